//! Coexistence Monte Carlo between a TV broadcast circle and a 19-site
//! TD-LTE network on an adjacent channel.
//!
//! Adjacent-channel interference is the received power of the aggressor
//! minus the ACIR. LTE links are noise limited and use Shannon capacity.
//! TV outage counts only receivers that meet the protection ratio without
//! LTE but fail it with LTE present; the coverage-limited baseline is
//! reported separately. Every ACIR is evaluated on the same drops.

mod guard;
mod sim;
mod topology;

pub use guard::{
    crossing_acir, determine_guard_band, guard_band_from_requirements, Constraint, GuardBandMap, GuardBandReport,
};
pub use sim::{acir_sweep, evaluate_drop, simulate_snapshot, AcirCurve, AcirPoint, Drop, SnapshotOutcome};
pub use topology::{build_topology, HexTopology, Sector};

use std::io::Write;

use crate::radio_env::{Point, PropagationConfig, RadioError};

#[derive(Debug, thiserror::Error)]
pub enum InterferenceError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("sweep never brings {constraint} within budget {budget}")]
    InsufficientSweep { constraint: String, budget: f64 },
    #[error("ACIR {0} dB lies beyond the guard band map")]
    OutOfMap(f64),
    #[error(transparent)]
    Radio(#[from] RadioError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub isd_m: f64,
    pub tv_radius_m: f64,
    /// TV transmitter position relative to the centre site.
    pub tv_offset: Point,
    pub freq_mhz: f64,
    pub tv_eirp_dbm: f64,
    pub tv_height_m: f64,
    pub tv_rx_height_m: f64,
    pub cenb_height_m: f64,
    pub ue_height_m: f64,
    /// Transmit power per sector.
    pub cenb_power_dbm: f64,
    pub ue_power_dbm: f64,
    pub tv_bw_mhz: f64,
    pub lte_bw_mhz: f64,
    pub tv_nf_db: f64,
    pub ue_nf_db: f64,
    pub cenb_nf_db: f64,
    /// Minimum TV SINR for normal reception.
    pub protection_db: f64,
    pub tv_receivers: usize,
    pub ues_per_sector: usize,
    pub prop: PropagationConfig,
    pub acir_db: Vec<f64>,
    pub snapshots: usize,
    pub seed: u64,
    pub loss_budget: f64,
    pub guard_map: GuardBandMap,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            isd_m: 500.0,
            tv_radius_m: 3000.0,
            tv_offset: Point::default(),
            freq_mhz: 700.0,
            tv_eirp_dbm: 93.0,
            tv_height_m: 150.0,
            tv_rx_height_m: 10.0,
            cenb_height_m: 30.0,
            ue_height_m: 1.5,
            cenb_power_dbm: 20.0,
            ue_power_dbm: 0.0,
            tv_bw_mhz: 8.0,
            lte_bw_mhz: 20.0,
            tv_nf_db: 7.0,
            ue_nf_db: 9.0,
            cenb_nf_db: 5.0,
            protection_db: 23.0,
            tv_receivers: 10,
            ues_per_sector: 10,
            prop: PropagationConfig::default(),
            acir_db: (0..=20).map(|i| 5.0 * i as f64).collect(),
            snapshots: 1000,
            seed: 1,
            loss_budget: 0.05,
            guard_map: GuardBandMap::default(),
        }
    }
}

impl StudyConfig {
    pub const MIN_SNAPSHOTS: usize = 100;

    pub fn topology(&self) -> HexTopology {
        build_topology(self.isd_m, self.tv_radius_m, self.tv_offset)
    }

    pub fn validate(&self) -> Result<(), InterferenceError> {
        let err = |m: &str| Err(InterferenceError::Config(m.into()));
        if !(self.isd_m > 0.0) {
            return err("isd_m must be positive");
        }
        if !(self.tv_radius_m > 0.0) {
            return err("tv_radius_m must be positive");
        }
        if self.snapshots < Self::MIN_SNAPSHOTS {
            return err("snapshots must be at least 100");
        }
        if !(0.0..=1.0).contains(&self.loss_budget) {
            return err("loss_budget must lie in [0, 1]");
        }
        if self.acir_db.is_empty() || self.acir_db.iter().any(|a| a.is_nan()) {
            return err("acir list must be non-empty numbers");
        }
        self.prop.validate()?;
        Ok(())
    }
}

fn fmt_acir(a: f64) -> String {
    if a == f64::INFINITY {
        "inf".into()
    } else {
        a.to_string()
    }
}

pub fn write_curve_csv<W: Write>(mut w: W, curve: &AcirCurve) -> std::io::Result<()> {
    writeln!(w, "acir_db,tv_outage_dl,tv_outage_ul,dl_cap_loss,ul_cap_loss,snapshots,seed")?;
    for p in &curve.points {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_acir(p.acir_db),
            p.tv_outage_dl,
            p.tv_outage_ul,
            p.dl_cap_loss,
            p.ul_cap_loss,
            curve.snapshots,
            curve.seed
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let curve = AcirCurve {
            points: vec![AcirPoint {
                acir_db: f64::INFINITY,
                tv_outage_dl: 0.0,
                tv_outage_ul: 0.0,
                dl_cap_loss: 0.0,
                ul_cap_loss: 0.0,
            }],
            snapshots: 100,
            seed: 3,
            tv_baseline_outage: 0.0,
        };
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &curve).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.ends_with("inf,0,0,0,0,100,3\n"));
    }

    #[test]
    fn default_validates() {
        assert!(StudyConfig::default().validate().is_ok());
        assert!(StudyConfig { snapshots: 10, ..Default::default() }.validate().is_err());
    }
}
