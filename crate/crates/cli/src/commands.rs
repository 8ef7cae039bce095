//! Subcommand implementations. Each command stages its outputs and commits
//! them together with a manifest only after every stage succeeded.

use std::path::{Path, PathBuf};

use scdd_core::ingest::{IoTable, ViolationList};
use scdd_core::netgen::{write_network, SupplyNetwork};
use scdd_core::sampler::FirmList;

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::manifest::{FileDigest, Manifest, OutputSet};
use crate::pipeline::{self, Ingested};

pub const FIRMS_FILE: &str = "firms.csv";
pub const NETWORK_FILE: &str = "network.scdn";
pub const VALIDATION_FILE: &str = "validation.json";
pub const MONITORING_FILE: &str = "monitoring.json";
pub const RESOLVED_CONFIG_FILE: &str = "resolved_config.toml";

pub fn manifest_file(command: &str) -> String {
    format!("manifest_{command}.json")
}

pub fn risk_file(list: &ViolationList) -> String {
    format!("risk_{}.csv", list.kind)
}

pub fn exposure_file(list: &ViolationList) -> String {
    format!("exposure_{}.csv", list.kind)
}

/// An existing network and its node table.
#[derive(Clone, Debug, Default)]
pub struct NetworkSource {
    pub network: Option<PathBuf>,
    pub firms: Option<PathBuf>,
}

impl NetworkSource {
    fn paths(&self, cfg: &PipelineConfig) -> (PathBuf, PathBuf) {
        let network = self
            .network
            .clone()
            .unwrap_or_else(|| cfg.run.out.join(NETWORK_FILE));
        let firms = self.firms.clone().unwrap_or_else(|| {
            network
                .parent()
                .unwrap_or(Path::new("."))
                .join(FIRMS_FILE)
        });
        (network, firms)
    }
}

fn record_inputs(m: &mut Manifest, cfg: &PipelineConfig) -> Result<(), CliError> {
    let i = &cfg.inputs;
    for p in [&i.sbs, &i.iot, &i.trade, &i.concordance] {
        m.add_input(p)?;
    }
    for (_, p) in pipeline::violation_inputs(cfg) {
        m.add_input(p)?;
    }
    Ok(())
}

fn write_config(out: &mut OutputSet, cfg: &PipelineConfig) -> Result<(), CliError> {
    let text = cfg.to_toml()?;
    out.write(RESOLVED_CONFIG_FILE, |w| std::io::Write::write_all(w, text.as_bytes()))
}

fn ingest_stage(m: &mut Manifest, cfg: &PipelineConfig) -> Result<Ingested, CliError> {
    let input = m.timed("ingest", || pipeline::ingest(cfg))?;
    m.detail("ingest", &input.summary())?;
    Ok(input)
}

fn sample_stage(m: &mut Manifest, cfg: &PipelineConfig, input: &Ingested) -> Result<FirmList, CliError> {
    let (firms, summary) = m.timed("sample", || pipeline::sample(cfg, input))?;
    m.detail("sample", &summary)?;
    Ok(firms)
}

fn build_stage(
    m: &mut Manifest,
    cfg: &PipelineConfig,
    input: &Ingested,
    firms: &mut FirmList,
) -> Result<SupplyNetwork, CliError> {
    let (net, summary) = m.timed("build", || pipeline::build(cfg, input, firms))?;
    m.detail("build", &summary)?;
    Ok(net)
}

fn write_network_outputs(out: &mut OutputSet, net: &SupplyNetwork, firms: &FirmList) -> Result<(), CliError> {
    out.write(FIRMS_FILE, |w| firms.write_csv(w))?;
    out.write(NETWORK_FILE, |w| write_network(net, w))
}

fn write_risk(
    m: &mut Manifest,
    out: &mut OutputSet,
    cfg: &PipelineConfig,
    (net, firms): (&SupplyNetwork, &FirmList),
    lists: &[ViolationList],
) -> Result<(), CliError> {
    for list in lists {
        let report = m.timed(&format!("risk_{}", list.kind), || pipeline::risk_report(cfg, net, firms, list))?;
        out.write(&risk_file(list), |w| report.write_csv(w))?;
    }
    Ok(())
}

fn write_exposure(
    m: &mut Manifest,
    out: &mut OutputSet,
    cfg: &PipelineConfig,
    (net, firms): (&SupplyNetwork, &FirmList),
    lists: &[ViolationList],
) -> Result<(), CliError> {
    for list in lists {
        let matrix = m.timed(&format!("exposure_{}", list.kind), || {
            pipeline::exposure_matrix(cfg, net, firms, list)
        })?;
        out.write(&exposure_file(list), |w| matrix.write_csv(w))?;
    }
    let report = m.timed("monitoring", || pipeline::monitoring(cfg, net, firms))?;
    out.write_json(MONITORING_FILE, &report)
}

/// Validates inputs and writes the normalized tables.
pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<Manifest, CliError> {
    let mut m = Manifest::new("ingest", cfg)?;
    record_inputs(&mut m, cfg)?;
    let input = ingest_stage(&mut m, cfg)?;
    let mut out = OutputSet::new(&cfg.run.out)?;
    out.write("sbs.csv", |w| input.sbs.write_csv(w))?;
    out.write("iot.csv", |w| input.iot.write_csv(w))?;
    out.write("concordance.csv", |w| input.concordance.write_csv(w))?;
    out.write("imports.csv", |w| input.imports.write_csv(w))?;
    for list in &input.violations {
        out.write(&format!("violations_{}.csv", list.kind), |w| list.write_csv(w))?;
    }
    write_config(&mut out, cfg)?;
    out.commit(&manifest_file("ingest"), m)
}

/// Samples firms, degree targets and ROW dummies.
pub fn cmd_sample(cfg: &PipelineConfig) -> Result<Manifest, CliError> {
    let mut m = Manifest::new("sample", cfg)?;
    record_inputs(&mut m, cfg)?;
    let input = ingest_stage(&mut m, cfg)?;
    let firms = sample_stage(&mut m, cfg, &input)?;
    let mut out = OutputSet::new(&cfg.run.out)?;
    out.write(FIRMS_FILE, |w| firms.write_csv(w))?;
    write_config(&mut out, cfg)?;
    out.commit(&manifest_file("sample"), m)
}

/// Samples and wires the network, including import origins.
pub fn cmd_build(cfg: &PipelineConfig) -> Result<Manifest, CliError> {
    let mut m = Manifest::new("build", cfg)?;
    record_inputs(&mut m, cfg)?;
    let input = ingest_stage(&mut m, cfg)?;
    let mut firms = sample_stage(&mut m, cfg, &input)?;
    let net = build_stage(&mut m, cfg, &input, &mut firms)?;
    let mut out = OutputSet::new(&cfg.run.out)?;
    write_network_outputs(&mut out, &net, &firms)?;
    write_config(&mut out, cfg)?;
    out.commit(&manifest_file("build"), m)
}

/// The whole pipeline: every table, the network and all reports.
pub fn cmd_run(cfg: &PipelineConfig) -> Result<Manifest, CliError> {
    let mut m = Manifest::new("run", cfg)?;
    record_inputs(&mut m, cfg)?;
    let mut out = OutputSet::new(&cfg.run.out)?;
    write_config(&mut out, cfg)?;
    let input = ingest_stage(&mut m, cfg)?;
    let mut firms = sample_stage(&mut m, cfg, &input)?;
    let net = build_stage(&mut m, cfg, &input, &mut firms)?;
    write_network_outputs(&mut out, &net, &firms)?;
    let report = m.timed("validate", || pipeline::validate(cfg, &net, &firms, &input.iot))?;
    out.write_json(VALIDATION_FILE, &report)?;
    write_risk(&mut m, &mut out, cfg, (&net, &firms), &input.violations)?;
    write_exposure(&mut m, &mut out, cfg, (&net, &firms), &input.violations)?;
    out.commit(&manifest_file("run"), m)
}

/// Loads an existing network, checking it against the manifest that
/// produced it when one sits next to it.
fn load_source(m: &mut Manifest, cfg: &PipelineConfig, src: &NetworkSource) -> Result<(SupplyNetwork, FirmList), CliError> {
    let (net_path, firms_path) = src.paths(cfg);
    let net_digest = FileDigest::of(&net_path, net_path.display().to_string())?;
    let firms_digest = FileDigest::of(&firms_path, firms_path.display().to_string())?;
    verify_against_manifest(&net_path, &net_digest, &firms_path, &firms_digest)?;
    let net = pipeline::read_network_file(&net_path)?;
    let firms = pipeline::read_firms_file(&firms_path)?;
    if net.n_nodes() != firms.len() {
        return Err(CliError::Integrity(format!(
            "{} has {} nodes but {} lists {} firms",
            net_path.display(),
            net.n_nodes(),
            firms_path.display(),
            firms.len()
        )));
    }
    m.source_network = Some(net_digest);
    m.source_firms = Some(firms_digest);
    Ok((net, firms))
}

fn verify_against_manifest(
    net_path: &Path,
    net: &FileDigest,
    firms_path: &Path,
    firms: &FileDigest,
) -> Result<(), CliError> {
    let dir = net_path.parent().unwrap_or(Path::new("."));
    let net_name = net_path.file_name().map(|n| n.to_string_lossy().into_owned());
    for cmd in ["run", "build"] {
        let mp = dir.join(manifest_file(cmd));
        if !mp.exists() {
            continue;
        }
        let manifest = Manifest::read(&mp)?;
        let recorded = |name: &Option<String>| {
            manifest
                .outputs
                .iter()
                .find(|d| Some(&d.path) == name.as_ref())
                .map(|d| d.sha256.clone())
        };
        let Some(want) = recorded(&net_name) else { continue };
        if want != net.sha256 {
            return Err(CliError::Integrity(format!(
                "{} checksum {} does not match {} ({want})",
                net_path.display(),
                net.sha256,
                mp.display()
            )));
        }
        if firms_path.parent() == Some(dir) {
            let firms_name = firms_path.file_name().map(|n| n.to_string_lossy().into_owned());
            if let Some(want) = recorded(&firms_name) {
                if want != firms.sha256 {
                    return Err(CliError::Integrity(format!(
                        "{} checksum does not match {}; node table and network are out of sync",
                        firms_path.display(),
                        mp.display()
                    )));
                }
            }
        }
        return Ok(());
    }
    log::warn!("no manifest next to {}; checksums not verified", net_path.display());
    Ok(())
}

/// Recomputes risk reports on an existing network.
pub fn cmd_risk(cfg: &PipelineConfig, src: &NetworkSource) -> Result<Manifest, CliError> {
    let mut m = Manifest::new("risk", cfg)?;
    let (net, firms) = load_source(&mut m, cfg, src)?;
    let (lists, reports) = pipeline::load_violation_lists(cfg)?;
    m.detail("violations", &reports)?;
    let mut out = OutputSet::new(&cfg.run.out)?;
    write_risk(&mut m, &mut out, cfg, (&net, &firms), &lists)?;
    out.commit(&manifest_file("risk"), m)
}

/// Recomputes exposure matrices and monitoring statistics on an existing
/// network.
pub fn cmd_exposure(cfg: &PipelineConfig, src: &NetworkSource) -> Result<Manifest, CliError> {
    let mut m = Manifest::new("exposure", cfg)?;
    let (net, firms) = load_source(&mut m, cfg, src)?;
    let (lists, reports) = pipeline::load_violation_lists(cfg)?;
    m.detail("violations", &reports)?;
    let mut out = OutputSet::new(&cfg.run.out)?;
    write_exposure(&mut m, &mut out, cfg, (&net, &firms), &lists)?;
    out.commit(&manifest_file("exposure"), m)
}

/// Validation diagnostics for an existing network.
pub fn cmd_validate(cfg: &PipelineConfig, src: &NetworkSource) -> Result<Manifest, CliError> {
    let mut m = Manifest::new("validate", cfg)?;
    let (net, firms) = load_source(&mut m, cfg, src)?;
    let (iot, rep): (IoTable, _) = scdd_core::ingest::load_iot(&cfg.inputs.iot)?;
    m.detail("iot", &rep)?;
    net.check_invariants()?;
    let report = m.timed("validate", || pipeline::validate(cfg, &net, &firms, &iot))?;
    let mut out = OutputSet::new(&cfg.run.out)?;
    out.write_json(VALIDATION_FILE, &report)?;
    out.commit(&manifest_file("validate"), m)
}
