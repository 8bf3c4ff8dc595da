//! Configuration, snapshots, output files and scenario orchestration.

mod config;
mod output;
mod scenario;
mod snapshot;
pub mod suite;

pub use config::{parse_config, parse_config_for, Scenario, ScenarioConfig, CONFIG_KEYS};
pub use output::{fmt_num, provenance, CsvFile, ARTIFACT_VERSION};
pub use scenario::{error_exit_code, run_scenario, ScenarioReport, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME};
pub use snapshot::{
    decode_snapshot, encode_snapshot, load_snapshot, save_snapshot, Snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION,
};
pub use suite::Check;

/// Sizes the global rayon pool; `0` keeps rayon's default.
pub fn init_threads(threads: usize) -> crate::Result<()> {
    if threads == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| crate::PttError::precondition(format!("thread pool: {e}")))
}
