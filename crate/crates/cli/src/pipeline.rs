//! Pipeline stages shared by the subcommands.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use scdd_core::indicators::{
    classify_csddd, exposure, mark_violators, monitoring_stats, risk_tiers, ExposureMatrix, MonitoringReport,
    RiskReport,
};
use scdd_core::ingest::{
    load_imports, load_iot, load_sbs, load_violations, Concordance, ImportTable, ImputationLog, IngestError, IoTable,
    LoadReport, SbsTable, ViolationKind, ViolationList,
};
use scdd_core::netgen::{
    assign_import_origins, build_network, read_network, validate_network, BuildStats, OriginSummary,
    SupplyNetwork, ValidationReport,
};
use scdd_core::sampler::{
    assign_degrees, fit_cells, make_row_dummies, sample_firms, DegreeCalibration, DummySummary, FirmList,
};
use scdd_core::EuList;
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::CliError;

pub struct Ingested {
    pub eu: EuList,
    pub sbs: SbsTable,
    pub imputation: ImputationLog,
    pub iot: IoTable,
    pub concordance: Concordance,
    pub imports: ImportTable,
    pub violations: Vec<ViolationList>,
    pub reports: BTreeMap<String, LoadReport>,
}

impl Ingested {
    pub fn summary(&self) -> IngestSummary<'_> {
        IngestSummary {
            files: &self.reports,
            imputation: &self.imputation,
            sbs_cells: self.sbs.len(),
            iot_cells: self.iot.len(),
            import_rows: self.imports.len(),
        }
    }
}

#[derive(Serialize)]
pub struct IngestSummary<'a> {
    pub files: &'a BTreeMap<String, LoadReport>,
    pub imputation: &'a ImputationLog,
    pub sbs_cells: usize,
    pub iot_cells: usize,
    pub import_rows: usize,
}

pub fn violation_inputs(cfg: &PipelineConfig) -> Vec<(ViolationKind, &Path)> {
    let i = &cfg.inputs;
    [
        (ViolationKind::ChildForcedLabor, i.violations_child_forced_labor.as_deref()),
        (ViolationKind::Lawsuits, i.violations_lawsuits.as_deref()),
    ]
    .into_iter()
    .filter_map(|(k, p)| p.map(|p| (k, p)))
    .collect()
}

pub fn load_violation_lists(cfg: &PipelineConfig) -> Result<(Vec<ViolationList>, BTreeMap<String, LoadReport>), CliError> {
    let eu = cfg.eu_list()?;
    let mut lists = Vec::new();
    let mut reports = BTreeMap::new();
    for (kind, path) in violation_inputs(cfg) {
        let (list, rep) = load_violations(path, kind, &eu)?;
        lists.push(list);
        reports.insert(format!("violations_{kind}"), rep);
    }
    Ok((lists, reports))
}

pub fn ingest(cfg: &PipelineConfig) -> Result<Ingested, CliError> {
    let eu = cfg.eu_list()?;
    let mut reports = BTreeMap::new();
    let (mut sbs, rep) = load_sbs(&cfg.inputs.sbs)?;
    reports.insert("sbs".to_string(), rep);
    let imputation = sbs.impute_missing();
    let (iot, rep) = load_iot(&cfg.inputs.iot)?;
    reports.insert("iot".to_string(), rep);
    let gaps = iot.coverage_gaps(&sbs);
    if !gaps.is_empty() {
        let names: Vec<String> = gaps.iter().map(|g| g.to_string()).collect();
        log::warn!("IO table has no flows for {} SBS cells: {}", gaps.len(), names.join(", "));
    }
    let (concordance, rep) = Concordance::load(&cfg.inputs.concordance)?;
    reports.insert("concordance".to_string(), rep);
    let (imports, rep) = load_imports(&cfg.inputs.trade, &concordance, &eu, cfg.unmapped_policy())?;
    reports.insert("trade".to_string(), rep);
    let (violations, vrep) = load_violation_lists(cfg)?;
    reports.extend(vrep);
    Ok(Ingested {
        eu,
        sbs,
        imputation,
        iot,
        concordance,
        imports,
        violations,
        reports,
    })
}

#[derive(Serialize)]
pub struct SampleSummary {
    pub eu_firms: usize,
    pub calibration: DegreeCalibration,
    pub dummies: DummySummary,
}

pub fn sample(cfg: &PipelineConfig, input: &Ingested) -> Result<(FirmList, SampleSummary), CliError> {
    let fits = fit_cells(&input.sbs, &cfg.grid_spec())?;
    let mut firms = sample_firms(&input.sbs, &fits, cfg.run.scale_factor, cfg.run.seed)?;
    let eu_firms = firms.len();
    if eu_firms == 0 {
        return Err(CliError::Input("the SBS table yields no firms at this scale factor".into()));
    }
    let calibration = assign_degrees(&mut firms, &cfg.scaling, cfg.run.seed)?;
    if !calibration.within_tolerance {
        log::warn!(
            "mean degrees {:.3}/{:.3} miss the targets by more than 0.5%",
            calibration.mean_k_out,
            calibration.mean_k_in
        );
    }
    let dummies = make_row_dummies(&mut firms, &input.iot, cfg.degenerate_policy())?;
    log::info!("{} EU firms, {} ROW dummies", eu_firms, dummies.total);
    Ok((
        firms,
        SampleSummary {
            eu_firms,
            calibration,
            dummies,
        },
    ))
}

#[derive(Serialize)]
pub struct BuildSummary {
    pub build: BuildStats,
    pub origins: OriginSummary,
}

/// Wires the network and assigns import origins to the dummies in `firms`.
pub fn build(cfg: &PipelineConfig, input: &Ingested, firms: &mut FirmList) -> Result<(SupplyNetwork, BuildSummary), CliError> {
    let (net, build) = build_network(firms, &input.iot, &cfg.build_config())?;
    let origins = assign_import_origins(&net, firms, &input.imports, cfg.run.seed)?;
    Ok((net, BuildSummary { build, origins }))
}

pub fn validate(cfg: &PipelineConfig, net: &SupplyNetwork, firms: &FirmList, iot: &IoTable) -> Result<ValidationReport, CliError> {
    Ok(validate_network(net, firms, iot, cfg.run.validation_pairs, cfg.run.seed)?)
}

pub fn risk_report(
    cfg: &PipelineConfig,
    net: &SupplyNetwork,
    firms: &FirmList,
    viol: &ViolationList,
) -> Result<RiskReport, CliError> {
    let v = mark_violators(firms, viol)?;
    let max_k = *cfg.run.tiers.iter().max().expect("validated nonempty");
    let mut risks = Vec::new();
    for sem in cfg.run.semantics.list() {
        risks.extend(
            risk_tiers(net, &v, max_k, sem)?
                .into_iter()
                .filter(|r| cfg.run.tiers.contains(&r.k)),
        );
    }
    Ok(RiskReport::build(&risks, firms, &cfg.run.group_by)?)
}

pub fn exposure_matrix(
    cfg: &PipelineConfig,
    net: &SupplyNetwork,
    firms: &FirmList,
    viol: &ViolationList,
) -> Result<ExposureMatrix, CliError> {
    Ok(exposure(net, firms, viol, cfg.run.exposure_by_band)?)
}

pub fn monitoring(cfg: &PipelineConfig, net: &SupplyNetwork, firms: &FirmList) -> Result<MonitoringReport, CliError> {
    let labels = classify_csddd(firms, &cfg.csddd)?;
    Ok(monitoring_stats(net, firms, &labels)?)
}

pub fn read_network_file(path: &Path) -> Result<SupplyNetwork, CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_network(f).map_err(|e| CliError::Integrity(format!("{}: {e}", path.display())))
}

pub fn read_firms_file(path: &Path) -> Result<FirmList, CliError> {
    FirmList::read_csv(path).map_err(|e| match e {
        IngestError::Io { .. } => CliError::from(e),
        _ => CliError::Integrity(e.to_string()),
    })
}
