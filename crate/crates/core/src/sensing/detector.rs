use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::SensingError;
use crate::radio_env::{ChannelGrid, PowerSpectrum, PAL_D_CARRIER_OFFSETS_MHZ};
use crate::units::{dbm_to_mw, mw_to_dbm};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    pub carrier_offsets_mhz: Vec<f64>,
    pub det_bw_khz: f64,
    pub sense_duration_ms: f64,
    /// Independent power snapshots accumulated per millisecond of sensing.
    pub snapshots_per_ms: f64,
    pub k_required: usize,
    pub target_pfa: f64,
    /// Receiver noise figure the threshold was calibrated against.
    pub noise_figure_db: f64,
    /// Per-carrier threshold; `None` until calibrated, `-inf` always fires.
    pub threshold_dbm: Option<f64>,
    /// Optional full-channel energy test for signals without carrier
    /// structure (DTMB).
    pub energy_threshold_dbm: Option<f64>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            carrier_offsets_mhz: PAL_D_CARRIER_OFFSETS_MHZ.to_vec(),
            det_bw_khz: 200.0,
            sense_duration_ms: 2.0,
            snapshots_per_ms: 12_000.0,
            k_required: 2,
            target_pfa: 0.01,
            noise_figure_db: 6.0,
            threshold_dbm: None,
            energy_threshold_dbm: None,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), SensingError> {
        let n = self.carrier_offsets_mhz.len();
        if n == 0 {
            return Err(SensingError::Config("no carrier offsets".into()));
        }
        if self.k_required < 1 || self.k_required > n {
            return Err(SensingError::Config(format!("k_required {} not in 1..={n}", self.k_required)));
        }
        if !(self.target_pfa > 0.0 && self.target_pfa < 1.0) {
            return Err(SensingError::Config(format!("target_pfa {} not in (0, 1)", self.target_pfa)));
        }
        if !(self.det_bw_khz > 0.0) {
            return Err(SensingError::Config("detection bandwidth must be positive".into()));
        }
        let mut offsets = self.carrier_offsets_mhz.clone();
        offsets.sort_by(f64::total_cmp);
        let min_spacing_khz = offsets.windows(2).map(|w| (w[1] - w[0]) * 1e3).fold(f64::INFINITY, f64::min);
        if self.det_bw_khz > min_spacing_khz {
            return Err(SensingError::Config(format!(
                "detection bandwidth {} kHz exceeds carrier spacing {min_spacing_khz:.0} kHz",
                self.det_bw_khz
            )));
        }
        if self.snapshot_count() < 1 {
            return Err(SensingError::Config("sensing window holds no snapshots".into()));
        }
        Ok(())
    }

    pub fn snapshot_count(&self) -> u64 {
        (self.sense_duration_ms * self.snapshots_per_ms).round().max(0.0) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Occupancy {
    Occupied,
    Vacant,
}

impl std::fmt::Display for Occupancy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Occupancy::Occupied => "Occupied",
            Occupancy::Vacant => "Vacant",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingReport {
    pub cenb_id: String,
    pub channel_index: usize,
    pub decision: Occupancy,
    /// One window power per carrier offset, in offset order.
    pub carrier_stats_dbm: Vec<f64>,
    pub t_ms: u64,
}

impl SensingReport {
    pub fn stamped(mut self, cenb_id: impl Into<String>, t_ms: u64) -> Self {
        self.cenb_id = cenb_id.into();
        self.t_ms = t_ms;
        self
    }

    pub fn is_occupied(&self) -> bool {
        self.decision == Occupancy::Occupied
    }
}

/// Draws one sensing-window realization of `mean`: every bin becomes the
/// average of `snapshots` exponential power samples around its mean.
pub fn observe<R: Rng + ?Sized>(mean: &PowerSpectrum, snapshots: u64, rng: &mut R) -> PowerSpectrum {
    let n = snapshots.max(1) as f64;
    let unit = Gamma::new(n, 1.0 / n).expect("positive gamma shape");
    mean.map_mw(|_, p| if p > 0.0 { p * unit.sample(rng) } else { 0.0 })
}

/// Linear power in a `det_bw_khz` window centred on `freq_mhz`: the bins
/// whose centres fall inside the window, or the bin containing `freq_mhz`
/// when the window is narrower than a bin.
pub(crate) fn window_power_mw(spec: &PowerSpectrum, freq_mhz: f64, det_bw_khz: f64) -> f64 {
    let half = det_bw_khz * 1e-3 / 2.0;
    let p = spec.band_power_mw(freq_mhz - half, freq_mhz + half);
    if p > 0.0 {
        return p;
    }
    let has_bin = (0..spec.len()).any(|i| {
        let c = spec.bin_center_mhz(i);
        c >= freq_mhz - half && c < freq_mhz + half
    });
    if has_bin {
        p
    } else {
        spec.bin_containing(freq_mhz).map_or(0.0, |i| dbm_to_mw(spec.bins()[i]))
    }
}

/// k-of-n feature test on one channel of a measured spectrum.
pub fn detect_tv(
    cfg: &DetectorConfig,
    spectrum: &PowerSpectrum,
    channel_index: usize,
    grid: &ChannelGrid,
) -> Result<SensingReport, SensingError> {
    let threshold = cfg.threshold_dbm.ok_or(SensingError::Uncalibrated)?;
    let ch = grid
        .channel(channel_index)
        .ok_or_else(|| SensingError::Config(format!("channel {channel_index} not in grid")))?;
    if !spectrum.covers(ch.low_mhz, ch.high_mhz) {
        return Err(SensingError::Coverage {
            channel: channel_index,
            have: format!("{}-{} MHz", spectrum.start_mhz, spectrum.end_mhz()),
            need: format!("{}-{} MHz", ch.low_mhz, ch.high_mhz),
        });
    }
    let stats: Vec<f64> = cfg
        .carrier_offsets_mhz
        .iter()
        .map(|off| mw_to_dbm(window_power_mw(spectrum, ch.low_mhz + off, cfg.det_bw_khz)))
        .collect();
    let above = stats.iter().filter(|&&s| s > threshold).count();
    let mut occupied = above >= cfg.k_required;
    if let Some(energy_thr) = cfg.energy_threshold_dbm {
        let energy = mw_to_dbm(spectrum.band_power_mw(ch.low_mhz, ch.high_mhz));
        occupied |= energy > energy_thr;
    }
    Ok(SensingReport {
        cenb_id: String::new(),
        channel_index,
        decision: if occupied { Occupancy::Occupied } else { Occupancy::Vacant },
        carrier_stats_dbm: stats,
        t_ms: 0,
    })
}
