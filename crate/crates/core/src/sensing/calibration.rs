use std::io::{Read, Write};
use std::path::Path;

use super::detector::window_power_mw;
use super::{observe, DetectorConfig, SensingError};
use crate::exec::{map_indexed, substream, Execution};
use crate::radio_env::{build_channel_grid, ChannelGrid, FrequencyBand, PowerSpectrum};
use crate::units::{mw_to_dbm, thermal_noise_dbm};

/// Thermal noise seen by the detector in one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub per_bin_dbm: f64,
    pub rbw_khz: f64,
    pub channel_width_mhz: f64,
}

impl NoiseModel {
    pub fn thermal(noise_figure_db: f64, rbw_khz: f64) -> Self {
        Self { per_bin_dbm: thermal_noise_dbm(rbw_khz * 1e3, noise_figure_db), rbw_khz, channel_width_mhz: 8.0 }
    }

    /// Single-channel grid the Monte Carlo studies run on. Only offsets from
    /// the lower edge matter to the detector.
    pub fn reference_grid(&self) -> ChannelGrid {
        let band = FrequencyBand { low_mhz: 698.0, high_mhz: 698.0 + self.channel_width_mhz };
        build_channel_grid(band, self.channel_width_mhz, &[]).expect("single channel grid")
    }

    pub(crate) fn mean_spectrum(&self) -> Result<PowerSpectrum, SensingError> {
        let n = (self.channel_width_mhz * 1e3 / self.rbw_khz).round() as usize;
        Ok(PowerSpectrum::new(698.0, self.rbw_khz, vec![self.per_bin_dbm; n])?)
    }
}

/// Sets `cfg.threshold_dbm` so that the k-of-n rule fires on pure noise at
/// `cfg.target_pfa`. The threshold sits between the order statistics of the
/// k-th largest carrier power that bracket the allowed number of firings.
pub fn calibrate_threshold(
    cfg: &mut DetectorConfig,
    noise: &NoiseModel,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64, SensingError> {
    cfg.validate()?;
    check_trials(cfg.target_pfa, trials)?;
    let mean = noise_mean(noise)?;
    let grid = noise.reference_grid();
    let low = grid.channels()[0].low_mhz;
    let snapshots = cfg.snapshot_count();
    let k = cfg.k_required;

    let kth = map_indexed(trials, exec, |i| {
        let spec = observe(&mean, snapshots, &mut substream(seed, i as u64));
        let mut stats: Vec<f64> =
            cfg.carrier_offsets_mhz.iter().map(|off| window_power_mw(&spec, low + off, cfg.det_bw_khz)).collect();
        stats.sort_by(|a, b| b.total_cmp(a));
        stats[k - 1]
    });
    let thr = quantile_threshold(kth, cfg.target_pfa)?;
    cfg.threshold_dbm = Some(thr);
    Ok(thr)
}

/// Sets `cfg.energy_threshold_dbm` for the full-channel energy fallback at
/// `target_pfa`, independently of the carrier threshold.
pub fn calibrate_energy_threshold(
    cfg: &mut DetectorConfig,
    noise: &NoiseModel,
    target_pfa: f64,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64, SensingError> {
    if !(target_pfa > 0.0 && target_pfa < 1.0) {
        return Err(SensingError::Config(format!("target_pfa {target_pfa} not in (0, 1)")));
    }
    check_trials(target_pfa, trials)?;
    let mean = noise_mean(noise)?;
    let snapshots = cfg.snapshot_count();
    let energies =
        map_indexed(trials, exec, |i| observe(&mean, snapshots, &mut substream(seed, i as u64)).bins_mw().sum::<f64>());
    let thr = quantile_threshold(energies, target_pfa)?;
    cfg.energy_threshold_dbm = Some(thr);
    Ok(thr)
}

fn check_trials(pfa: f64, trials: usize) -> Result<(), SensingError> {
    let needed = (10.0 / pfa).ceil() as usize;
    if trials < needed {
        return Err(SensingError::Config(format!("{trials} trials cannot resolve pfa {pfa}; need at least {needed}")));
    }
    Ok(())
}

fn noise_mean(noise: &NoiseModel) -> Result<PowerSpectrum, SensingError> {
    if !noise.per_bin_dbm.is_finite() {
        return Err(SensingError::Calibration(format!("degenerate noise model ({} dBm per bin)", noise.per_bin_dbm)));
    }
    noise.mean_spectrum()
}

/// Threshold (dBm) with `round(pfa * n)` samples strictly above it.
fn quantile_threshold(mut samples_mw: Vec<f64>, pfa: f64) -> Result<f64, SensingError> {
    let n = samples_mw.len();
    let allowed = (pfa * n as f64).round() as usize;
    if allowed >= n {
        return Ok(f64::NEG_INFINITY);
    }
    samples_mw.sort_by(f64::total_cmp);
    let (lo, hi) = (samples_mw[0], samples_mw[n - 1]);
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return Err(SensingError::Calibration("noise statistic has no spread".into()));
    }
    if allowed == 0 {
        return Ok(mw_to_dbm(hi));
    }
    let below = samples_mw[n - allowed - 1];
    let above = samples_mw[n - allowed];
    Ok(mw_to_dbm(0.5 * (below + above)))
}

const CAL_KEYS: [&str; 5] =
    ["noise_figure_db", "snapshots_per_ms", "threshold_dbm", "k_required", "energy_threshold_dbm"];

/// Parses a `param,value` calibration file on top of the detector defaults.
pub fn parse_calibration<R: Read>(reader: R) -> Result<DetectorConfig, SensingError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let headers = rdr.headers().map_err(|e| SensingError::Parse { line: 1, message: e.to_string() })?;
    if headers.iter().collect::<Vec<_>>() != ["param", "value"] {
        return Err(SensingError::Parse { line: 1, message: "expected header `param,value`".into() });
    }
    let mut cfg = DetectorConfig::default();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| SensingError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let perr = |m: String| SensingError::Parse { line, message: m };
        let value = rec.get(1).ok_or_else(|| perr("missing value".into()))?;
        let num = || value.parse::<f64>().map_err(|_| perr(format!("bad number `{value}`")));
        match &rec[0] {
            "noise_figure_db" => cfg.noise_figure_db = num()?,
            "snapshots_per_ms" => cfg.snapshots_per_ms = num()?,
            "threshold_dbm" => cfg.threshold_dbm = Some(num()?),
            "energy_threshold_dbm" => cfg.energy_threshold_dbm = Some(num()?),
            "k_required" => cfg.k_required = value.parse().map_err(|_| perr(format!("bad k_required `{value}`")))?,
            "target_pfa" => cfg.target_pfa = num()?,
            "sense_duration_ms" => cfg.sense_duration_ms = num()?,
            "det_bw_khz" => cfg.det_bw_khz = num()?,
            other => return Err(perr(format!("unknown parameter `{other}` (known: {})", CAL_KEYS.join(", ")))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_calibration(path: &Path) -> Result<DetectorConfig, SensingError> {
    let f =
        std::fs::File::open(path).map_err(|source| SensingError::Io { path: path.display().to_string(), source })?;
    parse_calibration(f)
}

pub fn write_calibration<W: Write>(mut w: W, cfg: &DetectorConfig) -> std::io::Result<()> {
    writeln!(w, "param,value")?;
    writeln!(w, "noise_figure_db,{}", cfg.noise_figure_db)?;
    writeln!(w, "snapshots_per_ms,{}", cfg.snapshots_per_ms)?;
    writeln!(w, "sense_duration_ms,{}", cfg.sense_duration_ms)?;
    writeln!(w, "target_pfa,{}", cfg.target_pfa)?;
    if let Some(t) = cfg.threshold_dbm {
        writeln!(w, "threshold_dbm,{t}")?;
    }
    writeln!(w, "k_required,{}", cfg.k_required)?;
    if let Some(t) = cfg.energy_threshold_dbm {
        writeln!(w, "energy_threshold_dbm,{t}")?;
    }
    Ok(())
}

impl DetectorConfig {
    /// Detector defaults with the committed calibration applied.
    pub fn committed() -> DetectorConfig {
        parse_calibration(include_str!("../../data/calibration.csv").as_bytes()).expect("committed calibration parses")
    }
}
