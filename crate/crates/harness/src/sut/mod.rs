//! The database interface layer: a pluggable adapter contract for systems
//! under test.
//!
//! Two adapters ship with the harness: `reference`, an embedded segment-file
//! time-series store with lossless codecs, and `modeled`, a synthetic SUT
//! whose admission rate follows a configurable scalability law (used for
//! harness self-tests). Adapters are selected by name through the
//! `sut.adapter` config key.

pub mod modeled;
pub mod reference;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use tsbench_core::query::Row;
use tsbench_core::workload::query::QuerySpec;
use tsbench_core::DataPoint;

use crate::config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum SutError {
    #[error("unknown adapter `{0}`")]
    UnknownAdapter(String),
    #[error("adapter unavailable: {0}")]
    Unavailable(String),
    #[error("batch ordering violation on sensor `{sensor}`: {reason}")]
    OrderingViolation { sensor: String, reason: String },
    #[error("sensor `{sensor}` changed value kind: {reason}")]
    KindChange { sensor: String, reason: String },
    #[error("storage I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt store: {0}")]
    Corrupt(String),
    #[error("query failed: {0}")]
    Query(#[from] tsbench_core::Error),
}

/// Adapter identity and capabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descriptor {
    pub name: String,
    /// Logical node count `m`.
    pub nodes: u32,
    pub scalable: bool,
    /// Whether written data can be re-read for verification.
    pub verifiable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InsertAck {
    pub points: u64,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScaleOutOutcome {
    /// The system now runs with one more node.
    ScaledTo(Descriptor),
    /// The system declared itself non-scalable; topology unchanged.
    NonScalable,
}

/// The adapter contract. Implementations must be safe to call from many
/// worker threads; inserts for distinct sensors must not serialize against
/// each other, and `scale_out` runs concurrently with traffic.
pub trait SutAdapter: Send + Sync {
    fn descriptor(&self) -> Descriptor;

    /// Ingest one batch. Batches must be per-sensor timestamp-ordered.
    /// Acknowledged bytes are the summed value payload sizes.
    fn insert(&self, batch: &[DataPoint]) -> Result<InsertAck, SutError>;

    /// Evaluate one query over flushed data.
    fn query(&self, spec: &QuerySpec) -> Result<Vec<Row>, SutError>;

    /// Add one node. Non-scalable systems return
    /// [`ScaleOutOutcome::NonScalable`] instead of failing.
    fn scale_out(&self) -> Result<ScaleOutOutcome, SutError>;

    /// Total on-disk bytes currently used, including indexes.
    fn disk_usage(&self) -> Result<u64, SutError>;

    /// Make all acknowledged inserts durable and visible to queries.
    fn flush(&self) -> Result<(), SutError>;

    /// Drop all stored data and reset to the initial topology.
    fn cleanup(&self) -> Result<(), SutError>;
}

pub const ADAPTERS: [&str; 2] = ["reference", "modeled"];

pub fn adapter_known(name: &str) -> bool {
    ADAPTERS.contains(&name)
}

/// Build the adapter selected by `cfg.sut.adapter`. The reference store is
/// (re)created under `data_dir`, wiping whatever a previous run left there.
pub fn build_adapter(cfg: &RunConfig, data_dir: &Path) -> Result<Arc<dyn SutAdapter>, SutError> {
    match cfg.sut.adapter.as_str() {
        "reference" => {
            let store = reference::ReferenceStore::create(
                data_dir,
                reference::StoreConfig {
                    initial_nodes: cfg.sut.nodes,
                    scalable: cfg.sut.scalable,
                    segment_points: cfg.sut.segment_points,
                    raw_codec: cfg.sut.raw_codec,
                },
            )?;
            Ok(Arc::new(store))
        }
        "modeled" => Ok(Arc::new(modeled::ModeledSut::new(
            modeled::ModeledConfig {
                initial_nodes: cfg.sut.nodes,
                base_rate: cfg.sut.modeled_rate,
                linearity: cfg.sut.modeled_linearity,
                mode: cfg.sut.modeled_mode,
                compression_ratio: cfg.sut.modeled_compression_ratio,
            },
        ))),
        other => Err(SutError::UnknownAdapter(other.to_string())),
    }
}

/// A second, independent connection for cross-client verification. `None`
/// for adapters that do not retain data (the modeled SUT).
pub fn verification_handle(
    cfg: &RunConfig,
    data_dir: &Path,
) -> Result<Option<Arc<dyn SutAdapter>>, SutError> {
    match cfg.sut.adapter.as_str() {
        "reference" => {
            let store = reference::ReferenceStore::open(data_dir)?;
            Ok(Some(Arc::new(store)))
        }
        _ => Ok(None),
    }
}

/// Resolve the store directory: explicit config key or `<out>/sut-data`.
pub fn resolve_data_dir(cfg: &RunConfig, out_dir: &Path) -> PathBuf {
    cfg.sut.data_dir.clone().unwrap_or_else(|| out_dir.join("sut-data"))
}
