//! Degree targets from the degree/strength scaling laws
//! `k_out = e^β_out · s_out^α_out` and `k_in = e^β_in · k_out^α_in`.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::firms::FirmList;
use super::SamplerError;
use crate::rng::{substream, Stage};

const CHUNK: usize = 4096;
const MAX_REDRAWS: usize = 100;
const MEAN_TOLERANCE: f64 = 0.005;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ScalingConfig {
    pub alpha_out_mean: f64,
    pub alpha_out_sd: f64,
    /// Exponent draws outside `[min, max]` are redrawn.
    pub alpha_out_range: (f64, f64),
    pub alpha_in_mean: f64,
    pub alpha_in_sd: f64,
    pub alpha_in_range: (f64, f64),
    pub kbar_in: f64,
    pub kbar_out: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            alpha_out_mean: 0.335,
            alpha_out_sd: 0.025,
            alpha_out_range: (0.31, 0.36),
            alpha_in_mean: 0.7,
            alpha_in_sd: 0.1,
            alpha_in_range: (0.6, 0.8),
            kbar_in: 56.0,
            kbar_out: 50.0,
        }
    }
}

/// Outcome of the β calibration.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DegreeCalibration {
    pub beta_out: f64,
    pub beta_in: f64,
    pub mean_k_out: f64,
    pub mean_k_in: f64,
    /// Firms without positive turnover, pinned to one in- and one out-link.
    pub fixed_firms: usize,
    /// Both means within 0.5% of their targets.
    pub within_tolerance: bool,
}

fn draw_truncated<R: rand::Rng>(d: &Normal<f64>, range: (f64, f64), rng: &mut R) -> f64 {
    for _ in 0..MAX_REDRAWS {
        let x = d.sample(rng);
        if x >= range.0 && x <= range.1 {
            return x;
        }
    }
    d.sample(rng).clamp(range.0, range.1)
}

fn round_degree(x: f64) -> u32 {
    // f64::round is half away from zero
    x.round().clamp(1.0, u32::MAX as f64) as u32
}

/// Finds a multiplier `c` such that the mean of `round(c · raw_i)` (floored at
/// one) over `raw` plus `n_fixed` pinned ones hits `target`. Returns `c` and
/// the achieved mean.
fn calibrate(raw: &[f64], n_fixed: usize, target: f64) -> (f64, f64) {
    let n = (raw.len() + n_fixed) as f64;
    let mean_at = |c: f64| -> f64 {
        let s: u64 = raw.par_iter().map(|&r| round_degree(c * r) as u64).sum();
        (s + n_fixed as u64) as f64 / n
    };
    let sum_raw: f64 = raw.iter().sum();
    if raw.is_empty() || sum_raw <= 0.0 {
        return (1.0, mean_at(1.0));
    }
    // Fixed-point rescaling first; it converges in a few passes on
    // realistic populations.
    let mut c = ((target * n - n_fixed as f64) / sum_raw).max(f64::MIN_POSITIVE);
    let mut m = mean_at(c);
    for _ in 0..20 {
        if ((m - target) / target).abs() <= MEAN_TOLERANCE / 10.0 {
            return (c, m);
        }
        c *= target / m;
        m = mean_at(c);
    }
    // Rounding makes the mean a step function of c; fall back to bisection
    // on the monotone map and keep the closest point seen.
    let (mut lo, mut hi) = (0.0, c);
    while mean_at(hi) < target && hi < 1e300 {
        lo = hi;
        hi *= 2.0;
    }
    let mut best = (c, m);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let mm = mean_at(mid);
        if (mm - target).abs() < (best.1 - target).abs() {
            best = (mid, mm);
        }
        if mm < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= hi * 1e-15 {
            break;
        }
    }
    best
}

/// Draws per-firm exponents and sets `k_out_target` / `k_in_target`.
///
/// β is calibrated after the draws: `e^β_out` rescales raw out-degrees so that
/// the rounded mean equals `kbar_out`; in-degrees are then computed from the
/// calibrated integer out-degrees and rescaled to `kbar_in` the same way.
/// Firms with zero turnover get `k_out = k_in = 1`. Must run before dummies
/// are appended.
pub fn assign_degrees(
    firms: &mut FirmList,
    cfg: &ScalingConfig,
    seed: u64,
) -> Result<DegreeCalibration, SamplerError> {
    if firms.is_empty() {
        return Err(SamplerError::EmptyInput);
    }
    if firms.iter().any(|f| f.is_row_dummy) {
        return Err(SamplerError::DummiesPresent);
    }
    let d_out = Normal::new(cfg.alpha_out_mean, cfg.alpha_out_sd).map_err(|_| SamplerError::InvalidParams {
        shape: cfg.alpha_out_mean,
        scale: cfg.alpha_out_sd,
    })?;
    let d_in = Normal::new(cfg.alpha_in_mean, cfg.alpha_in_sd).map_err(|_| SamplerError::InvalidParams {
        shape: cfg.alpha_in_mean,
        scale: cfg.alpha_in_sd,
    })?;

    // (alpha_out, alpha_in) per firm, one substream per chunk of firms
    let alphas: Vec<(f64, f64)> = firms
        .as_slice()
        .par_chunks(CHUNK)
        .enumerate()
        .flat_map_iter(|(ci, chunk)| {
            let mut rng = substream(seed, Stage::Exponents, ci as u64);
            chunk
                .iter()
                .map(|_| {
                    let a = draw_truncated(&d_out, cfg.alpha_out_range, &mut rng);
                    let b = draw_truncated(&d_in, cfg.alpha_in_range, &mut rng);
                    (a, b)
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let active: Vec<usize> = firms
        .iter()
        .enumerate()
        .filter(|(_, f)| f.turnover.is_some_and(|t| t > 0.0 && t.is_finite()))
        .map(|(i, _)| i)
        .collect();
    let n_fixed = firms.len() - active.len();
    if n_fixed > 0 {
        log::info!("{n_fixed} firms without positive turnover pinned to k_out = k_in = 1");
    }

    let slice = firms.as_slice();
    let raw_out: Vec<f64> = active
        .par_iter()
        .map(|&i| (alphas[i].0 * slice[i].turnover.unwrap().ln()).exp())
        .collect();
    let (c_out, mean_out) = calibrate(&raw_out, n_fixed, cfg.kbar_out);
    let k_out: Vec<u32> = raw_out.par_iter().map(|&r| round_degree(c_out * r)).collect();

    let raw_in: Vec<f64> = active
        .par_iter()
        .zip(k_out.par_iter())
        .map(|(&i, &k)| (alphas[i].1 * (k as f64).ln()).exp())
        .collect();
    let (c_in, mean_in) = calibrate(&raw_in, n_fixed, cfg.kbar_in);

    let out = firms.as_mut_slice();
    for f in out.iter_mut() {
        f.k_out_target = 1;
        f.k_in_target = 1;
    }
    for (j, &i) in active.iter().enumerate() {
        out[i].k_out_target = k_out[j];
        out[i].k_in_target = round_degree(c_in * raw_in[j]);
    }

    let within_tolerance = ((mean_out - cfg.kbar_out) / cfg.kbar_out).abs() <= MEAN_TOLERANCE
        && ((mean_in - cfg.kbar_in) / cfg.kbar_in).abs() <= MEAN_TOLERANCE;
    if !within_tolerance {
        log::warn!(
            "degree calibration off target: mean k_out {mean_out:.3} (target {}), mean k_in {mean_in:.3} (target {})",
            cfg.kbar_out,
            cfg.kbar_in
        );
    }
    Ok(DegreeCalibration {
        beta_out: c_out.ln(),
        beta_in: c_in.ln(),
        mean_k_out: mean_out,
        mean_k_in: mean_in,
        fixed_firms: n_fixed,
        within_tolerance,
    })
}
