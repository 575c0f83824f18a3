use super::{bins_in, ChannelGrid, RadioError, TvStandard, TvTransmitter};
use crate::units::{dbm_to_mw, mw_to_dbm};

/// Vision, chroma sub-carrier and FM sound carrier, measured from the
/// channel's lower edge.
pub const PAL_D_CARRIER_OFFSETS_MHZ: [f64; 3] = [1.25, 5.68, 7.75];

/// Binned power-versus-frequency snapshot in dBm per bin. Bin `i` spans
/// `[start + i*rbw, start + (i+1)*rbw)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub start_mhz: f64,
    pub rbw_khz: f64,
    bins: Vec<f64>,
}

impl PowerSpectrum {
    pub fn new(start_mhz: f64, rbw_khz: f64, bins: Vec<f64>) -> Result<Self, RadioError> {
        if bins.is_empty() {
            return Err(RadioError::Config("spectrum needs at least one bin".into()));
        }
        if !(rbw_khz > 0.0) {
            return Err(RadioError::Resolution(format!("rbw must be positive, got {rbw_khz}")));
        }
        if bins.iter().any(|b| b.is_nan() || *b == f64::INFINITY) {
            return Err(RadioError::Config("spectrum bins must be finite or -inf".into()));
        }
        Ok(Self { start_mhz, rbw_khz, bins })
    }

    pub(crate) fn from_mw(start_mhz: f64, rbw_khz: f64, mw: &[f64]) -> Self {
        Self { start_mhz, rbw_khz, bins: mw.iter().map(|&p| mw_to_dbm(p)).collect() }
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn bins_mw(&self) -> impl Iterator<Item = f64> + '_ {
        self.bins.iter().map(|&b| dbm_to_mw(b))
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn rbw_mhz(&self) -> f64 {
        self.rbw_khz * 1e-3
    }

    pub fn end_mhz(&self) -> f64 {
        self.start_mhz + self.bins.len() as f64 * self.rbw_mhz()
    }

    pub fn bin_center_mhz(&self, i: usize) -> f64 {
        self.start_mhz + (i as f64 + 0.5) * self.rbw_mhz()
    }

    /// Index of the bin whose span contains `freq_mhz`.
    pub fn bin_containing(&self, freq_mhz: f64) -> Option<usize> {
        if freq_mhz < self.start_mhz || freq_mhz >= self.end_mhz() {
            return None;
        }
        let i = ((freq_mhz - self.start_mhz) / self.rbw_mhz() + 1e-9).floor() as usize;
        Some(i.min(self.bins.len() - 1))
    }

    pub fn covers(&self, low_mhz: f64, high_mhz: f64) -> bool {
        low_mhz >= self.start_mhz - 1e-9 && high_mhz <= self.end_mhz() + 1e-9
    }

    /// Linear sum of all bins, in dBm.
    pub fn total_power_dbm(&self) -> f64 {
        mw_to_dbm(self.bins_mw().sum())
    }

    /// Linear sum of the bins whose centers fall in `[low_mhz, high_mhz)`.
    pub fn band_power_mw(&self, low_mhz: f64, high_mhz: f64) -> f64 {
        (0..self.len())
            .filter(|&i| {
                let c = self.bin_center_mhz(i);
                c >= low_mhz && c < high_mhz
            })
            .map(|i| dbm_to_mw(self.bins[i]))
            .sum()
    }

    pub(crate) fn add_floor_mw(&mut self, floor_mw: f64) {
        for b in &mut self.bins {
            *b = mw_to_dbm(dbm_to_mw(*b) + floor_mw);
        }
    }

    /// Applies `f` to every bin's linear power.
    pub fn map_mw(&self, mut f: impl FnMut(usize, f64) -> f64) -> PowerSpectrum {
        let mw: Vec<f64> = self.bins_mw().enumerate().map(|(i, p)| f(i, p)).collect();
        Self::from_mw(self.start_mhz, self.rbw_khz, &mw)
    }
}

/// Fractions of total PAL-D power carried by each carrier and by the
/// broadband residual spread evenly across the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PalDCarrierSplit {
    pub vision: f64,
    pub chroma: f64,
    pub sound: f64,
    pub residual: f64,
}

impl Default for PalDCarrierSplit {
    fn default() -> Self {
        Self { vision: 0.80, chroma: 0.05, sound: 0.10, residual: 0.05 }
    }
}

impl PalDCarrierSplit {
    pub fn validate(&self) -> Result<(), RadioError> {
        let parts = [self.vision, self.chroma, self.sound, self.residual];
        if parts.iter().any(|p| !(*p >= 0.0)) || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(RadioError::Config(format!("carrier split {parts:?} must be >= 0 and sum to 1")));
        }
        Ok(())
    }

    /// Fractions in the order of [`PAL_D_CARRIER_OFFSETS_MHZ`].
    pub fn carriers(&self) -> [f64; 3] {
        [self.vision, self.chroma, self.sound]
    }
}

/// Spectrum of one transmitter across its channel, at `total_power_dbm`,
/// with the default carrier split.
pub fn synthesize_tv_spectrum(
    tx: &TvTransmitter,
    grid: &ChannelGrid,
    rbw_khz: f64,
    total_power_dbm: f64,
) -> Result<PowerSpectrum, RadioError> {
    synthesize_tv_spectrum_with(tx, grid, rbw_khz, total_power_dbm, &PalDCarrierSplit::default())
}

pub fn synthesize_tv_spectrum_with(
    tx: &TvTransmitter,
    grid: &ChannelGrid,
    rbw_khz: f64,
    total_power_dbm: f64,
    split: &PalDCarrierSplit,
) -> Result<PowerSpectrum, RadioError> {
    split.validate()?;
    let ch = grid
        .channel(tx.channel_index)
        .ok_or_else(|| RadioError::Config(format!("channel index {} not in grid", tx.channel_index)))?;
    let min_spacing_khz =
        PAL_D_CARRIER_OFFSETS_MHZ.windows(2).map(|w| (w[1] - w[0]) * 1e3).fold(f64::INFINITY, f64::min);
    if rbw_khz > min_spacing_khz {
        return Err(RadioError::Resolution(format!(
            "rbw {rbw_khz} kHz exceeds the {min_spacing_khz:.0} kHz carrier spacing"
        )));
    }
    let n = bins_in(ch.high_mhz - ch.low_mhz, rbw_khz)?;
    let total_mw = dbm_to_mw(total_power_dbm);
    if !total_mw.is_finite() {
        return Err(RadioError::Config(format!("total power {total_power_dbm} dBm is not finite")));
    }

    let mut mw = vec![0.0; n];
    match tx.standard {
        TvStandard::AnalogPalD => {
            let residual = total_mw * split.residual / n as f64;
            mw.iter_mut().for_each(|p| *p = residual);
            for (offset, frac) in PAL_D_CARRIER_OFFSETS_MHZ.iter().zip(split.carriers()) {
                let bin = ((offset * 1e3 / rbw_khz) + 1e-9).floor() as usize;
                mw[bin.min(n - 1)] += total_mw * frac;
            }
        }
        TvStandard::DigitalDtmb => {
            mw.iter_mut().for_each(|p| *p = total_mw / n as f64);
        }
    }
    Ok(PowerSpectrum::from_mw(ch.low_mhz, rbw_khz, &mw))
}
