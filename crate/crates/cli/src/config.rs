//! Pipeline configuration: a TOML file with one section per stage.
//!
//! Relative input paths resolve against the config file's directory. Command
//! line flags override file values; the fully resolved configuration is
//! written next to every run's outputs and hashed into its manifest.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use scdd_core::indicators::{CsdddThresholds, GroupBy, Semantics};
use scdd_core::netgen::BuildConfig;
use scdd_core::sampler::{DegenerateRatioPolicy, GridSpec, ScalingConfig};
use scdd_core::ingest::UnmappedPolicy;
use scdd_core::{Country, EuList};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub sbs: PathBuf,
    pub iot: PathBuf,
    pub trade: PathBuf,
    pub concordance: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violations_child_forced_labor: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violations_lawsuits: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    #[default]
    Error,
    Skip,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemanticsChoice {
    Exact,
    #[default]
    Cumulative,
    Both,
}

impl SemanticsChoice {
    pub fn list(&self) -> Vec<Semantics> {
        match self {
            SemanticsChoice::Exact => vec![Semantics::Exact],
            SemanticsChoice::Cumulative => vec![Semantics::Cumulative],
            SemanticsChoice::Both => vec![Semantics::Exact, Semantics::Cumulative],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub scale_factor: f64,
    pub out: PathBuf,
    /// Worker threads; 0 uses all cores.
    pub threads: usize,
    pub tiers: Vec<u32>,
    pub semantics: SemanticsChoice,
    pub group_by: Vec<GroupBy>,
    pub exposure_by_band: bool,
    /// Node pairs sampled for the path-length estimate.
    pub validation_pairs: usize,
    pub unmapped_trade: Policy,
    pub degenerate_ratio: Policy,
    /// Member-state codes; defaults to the EU-27 list.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eu_countries: Option<Vec<String>>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 0,
            scale_factor: 1.0,
            out: PathBuf::from("out"),
            threads: 0,
            tiers: vec![1, 2, 3, 4],
            semantics: SemanticsChoice::Cumulative,
            group_by: vec![GroupBy::EU, GroupBy::COUNTRY, GroupBy::SECTOR, GroupBy::BAND],
            exposure_by_band: false,
            validation_pairs: 2000,
            unmapped_trade: Policy::Error,
            degenerate_ratio: Policy::Error,
            eu_countries: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildSection {
    pub stop_avg_links: f64,
    pub max_attempts_factor: u64,
    pub pool_empty_retries: u32,
}

impl Default for BuildSection {
    fn default() -> Self {
        let d = BuildConfig::default();
        Self {
            stop_avg_links: d.stop_avg_links,
            max_attempts_factor: d.max_attempts_factor,
            pool_empty_retries: d.pool_empty_retries,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub shape_min: f64,
    pub shape_max: f64,
    pub shape_step: f64,
    pub scale_min: f64,
    pub scale_max: f64,
    pub scale_points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = GridSpec::<f64>::default();
        Self {
            shape_min: g.shape_min,
            shape_max: g.shape_max,
            shape_step: g.shape_step,
            scale_min: g.scale_min,
            scale_max: g.scale_max,
            scale_points: g.scale_points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: Inputs,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub build: BuildSection,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub csddd: CsdddThresholds,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub scale: Option<f64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

fn absolutize(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))
    }

    /// Reads a config file, resolves its paths and applies `overrides`.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let base = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        let base = std::path::absolute(base).map_err(|e| CliError::io(base, e))?;
        cfg.resolve_paths(&base);
        cfg.apply(overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let i = &mut self.inputs;
        for p in [&mut i.sbs, &mut i.iot, &mut i.trade, &mut i.concordance] {
            *p = absolutize(base, p);
        }
        for p in [&mut i.violations_child_forced_labor, &mut i.violations_lawsuits]
            .into_iter()
            .flatten()
        {
            *p = absolutize(base, p);
        }
        self.run.out = absolutize(base, &self.run.out);
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(s) = o.seed {
            self.run.seed = s;
        }
        if let Some(s) = o.scale {
            self.run.scale_factor = s;
        }
        if let Some(t) = o.threads {
            self.run.threads = t;
        }
        if let Some(out) = &o.out {
            self.run.out = std::path::absolute(out).map_err(|e| CliError::io(out, e))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let r = &self.run;
        if !(r.scale_factor > 0.0 && r.scale_factor <= 1.0) {
            return Err(CliError::Input(format!("scale_factor {} outside (0, 1]", r.scale_factor)));
        }
        if r.tiers.is_empty() || r.tiers.contains(&0) {
            return Err(CliError::Input("tiers must be a nonempty list of integers >= 1".into()));
        }
        if r.group_by.is_empty() {
            return Err(CliError::Input("group_by must not be empty".into()));
        }
        if self.inputs.violations_child_forced_labor.is_none() && self.inputs.violations_lawsuits.is_none() {
            return Err(CliError::Input("at least one violations list is required".into()));
        }
        self.build_config().validate()?;
        self.csddd.validate()?;
        self.eu_list()?;
        Ok(())
    }

    pub fn build_config(&self) -> BuildConfig {
        BuildConfig {
            stop_avg_links: self.build.stop_avg_links,
            max_attempts_factor: self.build.max_attempts_factor,
            pool_empty_retries: self.build.pool_empty_retries,
            seed: self.run.seed,
        }
    }

    pub fn grid_spec(&self) -> GridSpec<f64> {
        let g = &self.grid;
        GridSpec {
            shape_min: g.shape_min,
            shape_max: g.shape_max,
            shape_step: g.shape_step,
            scale_min: g.scale_min,
            scale_max: g.scale_max,
            scale_points: g.scale_points,
        }
    }

    pub fn eu_list(&self) -> Result<EuList, CliError> {
        match &self.run.eu_countries {
            None => Ok(EuList::default()),
            Some(codes) => {
                let set = codes
                    .iter()
                    .map(|c| c.parse::<Country>().map_err(|e| CliError::Input(format!("eu_countries: {e}"))))
                    .collect::<Result<BTreeSet<_>, _>>()?;
                Ok(EuList::new(set))
            }
        }
    }

    pub fn unmapped_policy(&self) -> UnmappedPolicy {
        match self.run.unmapped_trade {
            Policy::Error => UnmappedPolicy::Error,
            Policy::Skip => UnmappedPolicy::SkipAndLog,
        }
    }

    pub fn degenerate_policy(&self) -> DegenerateRatioPolicy {
        match self.run.degenerate_ratio {
            Policy::Error => DegenerateRatioPolicy::Error,
            Policy::Skip => DegenerateRatioPolicy::SkipWithWarning,
        }
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Internal(format!("serializing config: {e}")))
    }

    /// SHA-256 of the resolved config in canonical TOML form.
    pub fn hash(&self) -> Result<String, CliError> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }
}
