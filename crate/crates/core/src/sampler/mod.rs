//! Synthetic firm population: size sampling, degree targets and
//! rest-of-world dummy suppliers.

mod degrees;
mod dummies;
mod firms;
mod pareto;

use thiserror::Error;

use crate::band::SizeBand;
use crate::codes::Sector;

pub use degrees::{assign_degrees, DegreeCalibration, ScalingConfig};
pub use dummies::{make_row_dummies, DegenerateRatioPolicy, DummySummary};
pub use firms::{fit_cells, sample_firms, CellFits, Firm, FirmList};
pub use pareto::{fit_pareto_band, truncated_pareto_mean, GridSpec, ParetoParams, TruncatedLomax};

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error("invalid Pareto parameters shape={shape}, scale={scale}")]
    InvalidParams { shape: f64, scale: f64 },
    #[error("truncated mean diverges for shape {shape} <= 1 on an unbounded band")]
    DivergentMean { shape: f64 },
    #[error("target average {target} is not attainable in band {band}")]
    InfeasibleTarget { target: f64, band: SizeBand },
    #[error("cell {cell} has no fitted size distribution")]
    MissingFit { cell: String },
    #[error("cell {cell} has no average employee count")]
    MissingAverage { cell: String },
    #[error("scale factor {0} outside (0, 1]")]
    ScaleFactor(f64),
    #[error("firm list is empty")]
    EmptyInput,
    #[error("sector {sector}: ROW inflow {row_inflow} with zero non-ROW inflow")]
    DegenerateRatio { sector: Sector, row_inflow: f64 },
    #[error("degree assignment must run before dummies are appended")]
    DummiesPresent,
    #[error("firm list holds {0} firms, more than the 32-bit node id space")]
    TooManyFirms(usize),
}
