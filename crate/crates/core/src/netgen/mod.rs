//! Network reconstruction: IO-proportional wiring of firms, import-origin
//! assignment for rest-of-world dummies, and validation diagnostics.

mod build;
mod edge_store;
mod fenwick;
pub mod format;
mod network;
mod origins;
mod validate;

use thiserror::Error;

pub use build::{build_network, BuildConfig, BuildStats};
pub use fenwick::FenwickSampler;
pub use format::{read_network, write_network, FormatError, FORMAT_VERSION};
pub use network::SupplyNetwork;
pub use origins::{assign_import_origins, OriginSummary};
pub use validate::{validate_network, CcdfPoint, ValidationReport};

#[derive(Debug, Error)]
pub enum NetgenError {
    #[error("{0} nodes exceed the 32-bit node id space")]
    TooManyNodes(usize),
    #[error("edge {supplier} -> {buyer} references a node outside 0..{n_nodes}")]
    NodeOutOfRange { supplier: u32, buyer: u32, n_nodes: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(u32),
    #[error("duplicate edge {supplier} -> {buyer}")]
    DuplicateEdge { supplier: u32, buyer: u32 },
    #[error("forward and reverse index disagree at {supplier} -> {buyer}")]
    Transpose { supplier: u32, buyer: u32 },
    #[error("invalid build config: {0}")]
    Config(String),
    #[error("no IO-table flow connects two populated cells")]
    NoWiringPairs,
    #[error("wiring exhausted after {consecutive} consecutive failed draws ({links} links placed)")]
    Exhaustion { consecutive: u32, links: u64 },
    #[error("network has {network} nodes but the firm list has {firms}")]
    SizeMismatch { network: usize, firms: usize },
    #[error("import table is empty; cannot assign origins")]
    EmptyImports,
    #[error("ROW dummy {id} has {out_degree} buyers (expected at most 1)")]
    DummyDegree { id: u32, out_degree: usize },
    #[error(transparent)]
    Format(#[from] FormatError),
}
