//! TV band radio environment: channelization, PAL-D spectral signatures,
//! propagation and received power spectra.

mod grid;
mod propagation;
mod spectrum;
mod transmitter;

pub use grid::{build_channel_grid, china_tv_grid, Channel, ChannelGrid, FrequencyBand};
pub use propagation::{free_space_loss_db, PathLoss, PropagationConfig};
pub use spectrum::{
    synthesize_tv_spectrum, synthesize_tv_spectrum_with, PalDCarrierSplit, PowerSpectrum, PAL_D_CARRIER_OFFSETS_MHZ,
};
pub use transmitter::{
    load_transmitters, parse_transmitters, write_transmitters, OnInterval, TvStandard, TvTransmitter,
};

use crate::units::{dbm_to_mw, thermal_noise_dbm};

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x_m: f64,
    pub y_m: f64,
}

impl Point {
    pub const fn new(x_m: f64, y_m: f64) -> Self {
        Self { x_m, y_m }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x_m - other.x_m).hypot(self.y_m - other.y_m)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RadioError {
    #[error("invalid frequency band {low_mhz}-{high_mhz} MHz")]
    InvalidBand { low_mhz: f64, high_mhz: f64 },
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Receiver-side view of the band: which grid, at what resolution, with
/// which noise figure and PAL-D carrier split.
#[derive(Debug, Clone)]
pub struct RadioEnv {
    pub grid: ChannelGrid,
    pub rbw_khz: f64,
    pub noise_figure_db: f64,
    pub carrier_split: PalDCarrierSplit,
}

impl RadioEnv {
    pub const DEFAULT_NOISE_FIGURE_DB: f64 = 6.0;
    pub const DEFAULT_RBW_KHZ: f64 = 200.0;

    pub fn new(grid: ChannelGrid) -> Self {
        Self {
            grid,
            rbw_khz: Self::DEFAULT_RBW_KHZ,
            noise_figure_db: Self::DEFAULT_NOISE_FIGURE_DB,
            carrier_split: PalDCarrierSplit::default(),
        }
    }

    /// Mean thermal noise power per resolution bin.
    pub fn noise_per_bin_dbm(&self) -> f64 {
        thermal_noise_dbm(self.rbw_khz * 1e3, self.noise_figure_db)
    }

    /// Received spectrum across the whole grid band: every transmitter active
    /// at `t_ms`, attenuated by its path loss, plus thermal noise.
    pub fn received_spectrum(
        &self,
        point: Point,
        txs: &[TvTransmitter],
        t_ms: u64,
        path_loss: &mut PathLoss,
    ) -> Result<PowerSpectrum, RadioError> {
        let band = self.grid.band;
        let mut spec = self.received_signal(point, txs, t_ms, band.low_mhz, band.high_mhz, path_loss)?;
        spec.add_floor_mw(dbm_to_mw(self.noise_per_bin_dbm()));
        Ok(spec)
    }

    /// Received spectrum restricted to one grid channel, noise included.
    pub fn received_channel_spectrum(
        &self,
        point: Point,
        txs: &[TvTransmitter],
        t_ms: u64,
        channel_index: usize,
        path_loss: &mut PathLoss,
    ) -> Result<PowerSpectrum, RadioError> {
        let ch = self
            .grid
            .channel(channel_index)
            .ok_or_else(|| RadioError::Config(format!("channel index {channel_index} not in grid")))?;
        let mut spec = self.received_signal(point, txs, t_ms, ch.low_mhz, ch.high_mhz, path_loss)?;
        spec.add_floor_mw(dbm_to_mw(self.noise_per_bin_dbm()));
        Ok(spec)
    }

    /// Noise-free received spectrum over `[low_mhz, high_mhz)`.
    pub fn received_signal(
        &self,
        point: Point,
        txs: &[TvTransmitter],
        t_ms: u64,
        low_mhz: f64,
        high_mhz: f64,
        path_loss: &mut PathLoss,
    ) -> Result<PowerSpectrum, RadioError> {
        let n_bins = bins_in(high_mhz - low_mhz, self.rbw_khz)?;
        let mut acc = vec![0.0f64; n_bins];
        for tx in txs.iter().filter(|tx| tx.is_active(t_ms)) {
            let ch = self.grid.channel(tx.channel_index).ok_or_else(|| {
                RadioError::Config(format!("transmitter {} uses channel {} outside the grid", tx.id, tx.channel_index))
            })?;
            if ch.high_mhz <= low_mhz || ch.low_mhz >= high_mhz {
                continue;
            }
            let d = point.distance(&tx.location).max(path_loss.config().ref_distance_m);
            let loss = path_loss.loss_db(d, ch.center_mhz())?;
            let tx_spec =
                synthesize_tv_spectrum_with(tx, &self.grid, self.rbw_khz, tx.eirp_dbm - loss, &self.carrier_split)?;
            let offset = ((ch.low_mhz - low_mhz) * 1e3 / self.rbw_khz).round() as i64;
            for (i, p) in tx_spec.bins_mw().enumerate() {
                let j = offset + i as i64;
                if j >= 0 && (j as usize) < n_bins {
                    acc[j as usize] += p;
                }
            }
        }
        Ok(PowerSpectrum::from_mw(low_mhz, self.rbw_khz, &acc))
    }
}

/// Number of `rbw_khz` bins in `width_mhz`; the width must be a whole multiple.
pub(crate) fn bins_in(width_mhz: f64, rbw_khz: f64) -> Result<usize, RadioError> {
    if !(rbw_khz > 0.0) {
        return Err(RadioError::Resolution(format!("rbw must be positive, got {rbw_khz} kHz")));
    }
    let n = width_mhz * 1e3 / rbw_khz;
    let rounded = n.round();
    if rounded < 1.0 || (n - rounded).abs() > 1e-6 {
        return Err(RadioError::Resolution(format!("{width_mhz} MHz is not a whole number of {rbw_khz} kHz bins")));
    }
    Ok(rounded as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> RadioEnv {
        RadioEnv::new(china_tv_grid())
    }

    fn pal(id: &str, ch: usize, x: f64, eirp: f64) -> TvTransmitter {
        TvTransmitter::new(id, TvStandard::AnalogPalD, ch, Point::new(x, 0.0), eirp)
    }

    #[test]
    fn pure_noise_bins_sit_at_thermal_floor() {
        let env = env();
        let mut pl = PathLoss::new(PropagationConfig::default()).unwrap();
        let spec = env.received_spectrum(Point::default(), &[], 0, &mut pl).unwrap();
        assert_eq!(spec.len(), 1680);
        for &b in spec.bins() {
            assert!((b - -115.0).abs() < 0.02, "{b}");
        }
    }

    #[test]
    fn zero_loss_transmitter_adds_to_noise() {
        let env = env();
        let cfg = PropagationConfig { ref_loss_db: Some(0.0), ..PropagationConfig::default() };
        let mut pl = PathLoss::new(cfg).unwrap();
        let tx = pal("a", 3, 1.0, -90.0);
        let got = env.received_channel_spectrum(Point::default(), std::slice::from_ref(&tx), 0, 3, &mut pl).unwrap();
        let synth = synthesize_tv_spectrum(&tx, &env.grid, 200.0, -90.0).unwrap();
        let noise = dbm_to_mw(env.noise_per_bin_dbm());
        for (g, s) in got.bins_mw().zip(synth.bins_mw()) {
            assert!((g - (s + noise)).abs() <= 1e-12 * g.max(1e-30));
        }
    }

    #[test]
    fn scheduled_off_matches_noise() {
        let env = env();
        let mut tx = pal("a", 3, 100.0, 60.0);
        tx.schedule = vec![OnInterval { on_ms: 1000, off_ms: None }];
        let mut pl = PathLoss::new(PropagationConfig::default()).unwrap();
        let off = env.received_spectrum(Point::default(), &[tx.clone()], 999, &mut pl).unwrap();
        let quiet = env.received_spectrum(Point::default(), &[], 999, &mut pl).unwrap();
        assert_eq!(off, quiet);
        let on = env.received_spectrum(Point::default(), &[tx], 1000, &mut pl).unwrap();
        assert_ne!(on, quiet);
    }

    #[test]
    fn superposition_is_linear() {
        let env = env();
        let mut pl = PathLoss::new(PropagationConfig::default()).unwrap();
        let a = pal("a", 20, 300.0, 50.0);
        let b = TvTransmitter::new("b", TvStandard::DigitalDtmb, 20, Point::new(-450.0, 80.0), 55.0);
        let (lo, hi) = (env.grid.band.low_mhz, env.grid.band.high_mhz);
        let p = Point::new(10.0, 20.0);
        let sa = env.received_signal(p, std::slice::from_ref(&a), 0, lo, hi, &mut pl).unwrap();
        let sb = env.received_signal(p, std::slice::from_ref(&b), 0, lo, hi, &mut pl).unwrap();
        let sab = env.received_signal(p, &[a, b], 0, lo, hi, &mut pl).unwrap();
        for ((x, y), z) in sa.bins_mw().zip(sb.bins_mw()).zip(sab.bins_mw()) {
            assert!((x + y - z).abs() <= 1e-9 * z.max(f64::MIN_POSITIVE));
        }
    }
}
