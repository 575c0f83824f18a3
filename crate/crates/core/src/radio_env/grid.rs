use super::RadioError;

const ALIGN_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyBand {
    pub low_mhz: f64,
    pub high_mhz: f64,
}

impl FrequencyBand {
    pub fn new(low_mhz: f64, high_mhz: f64) -> Result<Self, RadioError> {
        if !(low_mhz > 0.0 && high_mhz > low_mhz && high_mhz.is_finite()) {
            return Err(RadioError::InvalidBand { low_mhz, high_mhz });
        }
        Ok(Self { low_mhz, high_mhz })
    }

    pub fn width_mhz(&self) -> f64 {
        self.high_mhz - self.low_mhz
    }

    pub fn overlaps(&self, other: &FrequencyBand) -> bool {
        self.low_mhz < other.high_mhz && other.low_mhz < self.high_mhz
    }

    pub fn contains(&self, other: &FrequencyBand) -> bool {
        other.low_mhz >= self.low_mhz && other.high_mhz <= self.high_mhz
    }
}

impl std::str::FromStr for FrequencyBand {
    type Err = RadioError;

    /// Parses `low-high` in MHz.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s.split_once('-').ok_or_else(|| RadioError::Config(format!("band `{s}` is not `low-high`")))?;
        let parse =
            |v: &str| v.trim().parse::<f64>().map_err(|_| RadioError::Config(format!("band `{s}`: bad number `{v}`")));
        FrequencyBand::new(parse(lo)?, parse(hi)?)
    }
}

impl std::fmt::Display for FrequencyBand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.low_mhz, self.high_mhz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub index: usize,
    pub low_mhz: f64,
    pub high_mhz: f64,
}

impl Channel {
    pub fn center_mhz(&self) -> f64 {
        0.5 * (self.low_mhz + self.high_mhz)
    }

    pub fn band(&self) -> FrequencyBand {
        FrequencyBand { low_mhz: self.low_mhz, high_mhz: self.high_mhz }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGrid {
    pub band: FrequencyBand,
    pub channel_width_mhz: f64,
    pub excluded: Vec<FrequencyBand>,
    channels: Vec<Channel>,
}

impl ChannelGrid {
    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, index: usize) -> Option<&Channel> {
        self.channels.get(index)
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// True when channels `a` and `a + 1` touch in frequency (no exclusion
    /// between them).
    pub fn adjacent(&self, a: usize) -> bool {
        match (self.channels.get(a), self.channels.get(a + 1)) {
            (Some(x), Some(y)) => (x.high_mhz - y.low_mhz).abs() < ALIGN_EPS,
            _ => false,
        }
    }

    /// Whether the sorted channel indices form one frequency-contiguous block.
    pub fn is_contiguous(&self, block: &[usize]) -> bool {
        !block.is_empty()
            && block.iter().all(|&c| c < self.len())
            && block.windows(2).all(|w| w[1] == w[0] + 1 && self.adjacent(w[0]))
    }

    /// Maximal frequency-contiguous runs of channels satisfying `pred`,
    /// ascending by first index.
    pub fn runs_where(&self, mut pred: impl FnMut(usize) -> bool) -> Vec<Vec<usize>> {
        let mut runs: Vec<Vec<usize>> = Vec::new();
        let mut current: Vec<usize> = Vec::new();
        for i in 0..self.len() {
            if pred(i) {
                if let Some(&last) = current.last() {
                    if !(last + 1 == i && self.adjacent(last)) {
                        runs.push(std::mem::take(&mut current));
                    }
                }
                current.push(i);
            } else if !current.is_empty() {
                runs.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            runs.push(current);
        }
        runs
    }
}

/// Cuts `band` into whole `width_mhz` channels, skipping `excluded` ranges.
/// Exclusion edges and the band extent must sit on the channel raster.
pub fn build_channel_grid(
    band: FrequencyBand,
    width_mhz: f64,
    excluded: &[FrequencyBand],
) -> Result<ChannelGrid, RadioError> {
    if !(width_mhz > 0.0) {
        return Err(RadioError::Config(format!("channel width must be positive, got {width_mhz}")));
    }
    let on_raster = |f: f64| {
        let k = (f - band.low_mhz) / width_mhz;
        (k - k.round()).abs() < ALIGN_EPS
    };
    if !on_raster(band.high_mhz) {
        return Err(RadioError::Alignment(format!("band {band} is not a whole number of {width_mhz} MHz channels")));
    }
    let mut excluded = excluded.to_vec();
    excluded.sort_by(|a, b| a.low_mhz.total_cmp(&b.low_mhz));
    for ex in &excluded {
        if !band.contains(ex) {
            return Err(RadioError::Alignment(format!("exclusion {ex} lies outside band {band}")));
        }
        if !on_raster(ex.low_mhz) || !on_raster(ex.high_mhz) {
            return Err(RadioError::Alignment(format!(
                "exclusion {ex} is not aligned to the {width_mhz} MHz raster from {} MHz",
                band.low_mhz
            )));
        }
    }
    if excluded.windows(2).any(|w| w[0].overlaps(&w[1])) {
        return Err(RadioError::Config("exclusions overlap".into()));
    }

    let total = (band.width_mhz() / width_mhz).round() as usize;
    let mut channels = Vec::with_capacity(total);
    for k in 0..total {
        let low = band.low_mhz + k as f64 * width_mhz;
        let ch = FrequencyBand { low_mhz: low, high_mhz: low + width_mhz };
        if excluded.iter().any(|ex| ex.overlaps(&ch)) {
            continue;
        }
        channels.push(Channel { index: channels.len(), low_mhz: ch.low_mhz, high_mhz: ch.high_mhz });
    }
    Ok(ChannelGrid { band, channel_width_mhz: width_mhz, excluded, channels })
}

/// 470-806 MHz in 8 MHz channels with the 566-606 MHz trunking block removed.
pub fn china_tv_grid() -> ChannelGrid {
    build_channel_grid(
        FrequencyBand { low_mhz: 470.0, high_mhz: 806.0 },
        8.0,
        &[FrequencyBand { low_mhz: 566.0, high_mhz: 606.0 }],
    )
    .expect("static grid is aligned")
}
