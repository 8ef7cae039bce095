//! Small descriptive statistics used by validation and tests.

use num_traits::Float;

/// Fractional ranks (1-based), ties receive the average of their positions.
pub fn ranks<F: Float>(xs: &[F]) -> Vec<F> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("NaN in rank input"));
    let mut out = vec![F::zero(); xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        // positions i..=j share rank (i+1 + j+1)/2
        let r = F::from(i + j + 2).unwrap() / F::from(2).unwrap();
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Pearson correlation; `None` when either side has zero variance or fewer than two points.
pub fn pearson<F: Float>(x: &[F], y: &[F]) -> Option<F> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return None;
    }
    let n = F::from(x.len()).unwrap();
    let mx = x.iter().fold(F::zero(), |a, &b| a + b) / n;
    let my = y.iter().fold(F::zero(), |a, &b| a + b) / n;
    let (mut sxy, mut sxx, mut syy) = (F::zero(), F::zero(), F::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx <= F::zero() || syy <= F::zero() {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).max(-F::one()).min(F::one()))
}

/// Spearman rank correlation (Pearson on fractional ranks).
pub fn spearman<F: Float>(x: &[F], y: &[F]) -> Option<F> {
    pearson(&ranks(x), &ranks(y))
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope<F: Float>(x: &[F], y: &[F]) -> Option<F> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return None;
    }
    let n = F::from(x.len()).unwrap();
    let mx = x.iter().fold(F::zero(), |a, &b| a + b) / n;
    let my = y.iter().fold(F::zero(), |a, &b| a + b) / n;
    let (mut sxy, mut sxx) = (F::zero(), F::zero());
    for (&a, &b) in x.iter().zip(y) {
        sxy = sxy + (a - mx) * (b - my);
        sxx = sxx + (a - mx) * (a - mx);
    }
    (sxx > F::zero()).then(|| sxy / sxx)
}

pub fn mean<F: Float>(xs: &[F]) -> Option<F> {
    if xs.is_empty() {
        return None;
    }
    Some(xs.iter().fold(F::zero(), |a, &b| a + b) / F::from(xs.len()).unwrap())
}

/// Median of a non-empty slice (average of the two central values for even lengths).
pub fn median<F: Float>(xs: &[F]) -> Option<F> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / F::from(2).unwrap()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }

    #[test]
    fn spearman_monotone() {
        let x = [1.0f64, 2.0, 3.0, 4.0, 5.0];
        let y = [1.0, 8.0, 27.0, 64.0, 125.0];
        assert!((spearman(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let yr: Vec<f64> = y.iter().rev().copied().collect();
        assert!((spearman(&x, &yr).unwrap() + 1.0).abs() < 1e-12);
        assert!(spearman(&x, &[2.0; 5]).is_none());
        assert!(spearman(&[1.0f32], &[1.0f32]).is_none());
    }

    #[test]
    fn slope_and_median() {
        let x = [0.0f64, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert!((ols_slope(&x, &y).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median::<f64>(&[]), None);
    }
}
