use std::io::Write;

use super::detector::window_power_mw;
use super::{detect_tv, observe, DetectorConfig, NoiseModel, SensingError};
use crate::exec::{count_indexed, map_indexed, substream, Execution};
use crate::radio_env::{
    synthesize_tv_spectrum_with, PalDCarrierSplit, Point, PowerSpectrum, TvStandard, TvTransmitter,
};
use crate::units::{dbm_to_mw, ratio_to_db};

/// Receiver and signal model for detection-probability sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocScene {
    pub noise: NoiseModel,
    pub split: PalDCarrierSplit,
}

impl RocScene {
    pub fn new(cfg: &DetectorConfig) -> Self {
        Self { noise: NoiseModel::thermal(cfg.noise_figure_db, 200.0), split: PalDCarrierSplit::default() }
    }

    /// Mean spectrum of a PAL-D signal received at `power_dbm` plus noise.
    pub fn mean_spectrum(&self, power_dbm: f64) -> Result<PowerSpectrum, SensingError> {
        let noise = self.noise.mean_spectrum()?;
        if power_dbm == f64::NEG_INFINITY {
            return Ok(noise);
        }
        let grid = self.noise.reference_grid();
        let tx = TvTransmitter::new("roc", TvStandard::AnalogPalD, 0, Point::default(), power_dbm);
        let sig = synthesize_tv_spectrum_with(&tx, &grid, self.noise.rbw_khz, power_dbm, &self.split)?;
        let floor = dbm_to_mw(self.noise.per_bin_dbm);
        Ok(sig.map_mw(|_, p| p + floor))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub power_dbm: f64,
    pub pd: f64,
    pub pfa: f64,
    pub trials: usize,
}

/// Stream index for trial `t` of level `level`; level 0 is the noise-only run.
fn stream(level: usize, trial: usize) -> u64 {
    ((level as u64) << 32) | trial as u64
}

/// Empirical detection probability per received power, with the
/// false-alarm rate measured on a noise-only run under the same seed.
pub fn estimate_roc(
    cfg: &DetectorConfig,
    scene: &RocScene,
    powers_dbm: &[f64],
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<RocPoint>, SensingError> {
    cfg.validate()?;
    cfg.threshold_dbm.ok_or(SensingError::Uncalibrated)?;
    if trials == 0 {
        return Err(SensingError::Config("trials must be positive".into()));
    }
    let grid = scene.noise.reference_grid();
    let snapshots = cfg.snapshot_count();
    let rate = |mean: &PowerSpectrum, level: usize| -> f64 {
        let hits = count_indexed(trials, exec, |t| {
            let spec = observe(mean, snapshots, &mut substream(seed, stream(level, t)));
            detect_tv(cfg, &spec, 0, &grid).map(|r| r.is_occupied()).unwrap_or(false)
        });
        hits as f64 / trials as f64
    };
    let pfa = rate(&scene.mean_spectrum(f64::NEG_INFINITY)?, 0);
    powers_dbm
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let pd = rate(&scene.mean_spectrum(p)?, i + 1);
            Ok(RocPoint { power_dbm: p, pd, pfa, trials })
        })
        .collect()
}

/// Ratio, in dB, of the mean pure-noise statistic of a full-channel energy
/// detector to that of one carrier window.
pub fn noise_statistic_ratio_db(
    cfg: &DetectorConfig,
    noise: &NoiseModel,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64, SensingError> {
    let mean = noise.mean_spectrum()?;
    let low = noise.reference_grid().channels()[0].low_mhz;
    let snapshots = cfg.snapshot_count();
    let pairs = map_indexed(trials, exec, |i| {
        let spec = observe(&mean, snapshots, &mut substream(seed, i as u64));
        let energy: f64 = spec.bins_mw().sum();
        let windows: f64 =
            cfg.carrier_offsets_mhz.iter().map(|off| window_power_mw(&spec, low + off, cfg.det_bw_khz)).sum::<f64>()
                / cfg.carrier_offsets_mhz.len() as f64;
        (energy, windows)
    });
    let (e, w) = pairs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    Ok(ratio_to_db(e / w))
}

pub fn write_roc_csv<W: Write>(mut w: W, points: &[RocPoint]) -> std::io::Result<()> {
    writeln!(w, "power_dbm,pd,pfa,trials")?;
    for p in points {
        writeln!(w, "{},{},{},{}", p.power_dbm, p.pd, p.pfa, p.trials)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::calibrate_threshold;

    fn quick() -> (DetectorConfig, RocScene) {
        let mut cfg = DetectorConfig { snapshots_per_ms: 500.0, target_pfa: 0.05, ..Default::default() };
        let scene = RocScene::new(&cfg);
        calibrate_threshold(&mut cfg, &scene.noise, 5_000, 11, Execution::Parallel).unwrap();
        (cfg, scene)
    }

    #[test]
    fn saturating_and_null_power() {
        let (cfg, scene) = quick();
        let roc = estimate_roc(&cfg, &scene, &[-30.0, f64::NEG_INFINITY], 2_000, 3, Execution::Parallel).unwrap();
        assert_eq!(roc[0].pd, 1.0);
        // Off signal detects at the false-alarm rate (independent streams).
        let sigma = (0.05f64 * 0.95 / 2000.0).sqrt();
        assert!((roc[1].pd - roc[1].pfa).abs() < 5.0 * sigma * 2f64.sqrt());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let (cfg, scene) = quick();
        let powers = [-125.0, -115.0];
        let a = estimate_roc(&cfg, &scene, &powers, 1_000, 8, Execution::Sequential).unwrap();
        let b = estimate_roc(&cfg, &scene, &powers, 1_000, 8, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn roc_csv_layout() {
        let mut buf = Vec::new();
        write_roc_csv(&mut buf, &[RocPoint { power_dbm: -120.0, pd: 0.5, pfa: 0.01, trials: 10 }]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "power_dbm,pd,pfa,trials\n-120,0.5,0.01,10\n");
    }

    #[test]
    fn uncalibrated_rejected() {
        let cfg = DetectorConfig::default();
        let scene = RocScene::new(&cfg);
        assert!(matches!(
            estimate_roc(&cfg, &scene, &[-100.0], 10, 1, Execution::Sequential),
            Err(SensingError::Uncalibrated)
        ));
    }
}
