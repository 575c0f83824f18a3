//! Feature detection of analog (PAL-D) TV in a channel: narrowband power
//! is measured around the vision, chroma and sound carriers and the channel
//! is declared occupied when at least `k_required` carriers exceed a
//! common threshold calibrated to a target false-alarm rate.
//!
//! The Monte Carlo model treats each resolution bin as the average of
//! `sense_duration_ms * snapshots_per_ms` independent exponential power
//! snapshots, so one bin is Gamma distributed around its mean power.

mod calibration;
mod detector;
mod roc;

pub use calibration::{
    calibrate_energy_threshold, calibrate_threshold, load_calibration, parse_calibration, write_calibration, NoiseModel,
};
pub use detector::{detect_tv, observe, DetectorConfig, Occupancy, SensingReport};
pub use roc::{estimate_roc, noise_statistic_ratio_db, write_roc_csv, RocPoint, RocScene};

use crate::radio_env::RadioError;

#[derive(Debug, thiserror::Error)]
pub enum SensingError {
    #[error("invalid detector configuration: {0}")]
    Config(String),
    #[error("calibration error: {0}")]
    Calibration(String),
    #[error("detector threshold is not calibrated")]
    Uncalibrated,
    #[error("coverage error: spectrum {have} does not cover channel {channel} ({need})")]
    Coverage { channel: usize, have: String, need: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Radio(#[from] RadioError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
