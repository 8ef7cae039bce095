//! Synthetic EU firm-level production network reconstruction and
//! supply-chain due-diligence (SCDD) risk indicators.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`ingest`] loads structural business statistics, input-output tables,
//!    trade data (mapped HS → NACE through a concordance) and violation lists.
//! 2. [`sampler`] fits truncated Lomax size distributions per
//!    (country, sector, size band), samples firms, assigns degree targets from
//!    the degree/strength scaling laws and appends rest-of-world dummies.
//! 3. [`netgen`] wires the directed supplier → buyer network proportionally to
//!    input-output flows and residual degrees, assigns import origins and
//!    validates the result.
//! 4. [`indicators`] computes tier-k risk flags, exposure matrices, directive
//!    coverage classes and monitoring statistics.
//!
//! The size-distribution math is generic over the floating-point type; the
//! aliases below fix it to `f64` for the pipeline.

pub mod band;
pub mod codes;
pub mod indicators;
pub mod ingest;
pub mod netgen;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use band::SizeBand;
pub use codes::{Country, CountrySector, EuList, Sector};

/// Lomax parameters in double precision, as used by the pipeline.
pub type ParetoParamsF64 = sampler::ParetoParams<f64>;
/// Single-precision variant for memory-bound bulk fitting.
pub type ParetoParamsF32 = sampler::ParetoParams<f32>;
pub type GridSpecF64 = sampler::GridSpec<f64>;
