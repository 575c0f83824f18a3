//! Scenario configuration, the deterministic millisecond event loop that
//! binds sensing, the database, the CeNB and traffic together, and the
//! metric reports.
//!
//! Scenario files are `section.key = value` text; file references resolve
//! against the scenario's directory and the seed is mandatory.

mod config;
mod report;
mod sim;

pub use config::{
    load_roc_config, load_scenario, load_study, parse_roc_config, parse_scenario, parse_study, AsmConfig, CenbSpec,
    HandoverConfig, RocConfig, ScenarioConfig, TrafficConfig,
};
pub use report::{emit_report, write_events_csv, write_handover_summary, write_plr_csv};
pub use sim::{run_simulation, Event, EventKind, HandoverRecord, MetricsSeries, PlrSample, SimOutput};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config error: {path}: {source}")]
    ConfigIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::ConfigIo { .. } => 2,
            HarnessError::Runtime(_) | HarnessError::Io { .. } => 3,
        }
    }
}
