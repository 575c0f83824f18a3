use std::fmt;

use super::{OccupancyError, OccupancyMatrix};
use crate::radio_env::{Channel, ChannelGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdRule {
    Fixed {
        dbm: f64,
    },
    /// Percentile of the analysed cells, plus a margin.
    NoisePercentile {
        percentile: f64,
        margin_db: f64,
    },
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::NoisePercentile { percentile: 10.0, margin_db: 6.0 }
    }
}

impl fmt::Display for ThresholdRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdRule::Fixed { dbm } => write!(f, "fixed {dbm} dBm"),
            ThresholdRule::NoisePercentile { percentile, margin_db } => {
                write!(f, "noise p{percentile} + {margin_db} dB")
            }
        }
    }
}

/// Linearly interpolated percentile of unsorted values.
pub(crate) fn percentile(values: &mut [f64], p: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let rank = (p / 100.0).clamp(0.0, 1.0) * (values.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    values[lo] + (values[hi] - values[lo]) * (rank - lo as f64)
}

impl ThresholdRule {
    pub fn validate(&self) -> Result<(), OccupancyError> {
        match *self {
            ThresholdRule::Fixed { dbm } if dbm.is_nan() => Err(OccupancyError::Validation("NaN threshold".into())),
            ThresholdRule::NoisePercentile { percentile, margin_db }
                if !(0.0..=100.0).contains(&percentile) || !margin_db.is_finite() =>
            {
                Err(OccupancyError::Validation(format!("unusable threshold rule {self}")))
            }
            _ => Ok(()),
        }
    }

    /// Threshold for a set of cells.
    pub fn resolve(&self, cells: impl Iterator<Item = f64>) -> f64 {
        match *self {
            ThresholdRule::Fixed { dbm } => dbm,
            ThresholdRule::NoisePercentile { percentile: p, margin_db } => {
                let mut v: Vec<f64> = cells.collect();
                percentile(&mut v, p) + margin_db
            }
        }
    }
}

/// Fraction of cells strictly above the threshold in `[low, high)`.
pub(crate) fn band_duty(
    m: &OccupancyMatrix,
    low_mhz: f64,
    high_mhz: f64,
    rule: &ThresholdRule,
) -> Result<(f64, f64), OccupancyError> {
    let bins = m.bins_in(low_mhz, high_mhz)?;
    if m.timestamps_ms.is_empty() {
        return Err(OccupancyError::InsufficientData("trace has no rows".into()));
    }
    let thr = rule.resolve(m.cells(bins.clone()));
    let total = m.timestamps_ms.len() * bins.len();
    let above = m.cells(bins).filter(|&p| p > thr).count();
    Ok((above as f64 / total as f64, thr))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DutyCycles {
    /// `(channel index, occupancy, threshold dBm)`.
    pub channels: Vec<(usize, f64, f64)>,
    /// Bandwidth-weighted mean of the channel occupancies.
    pub band_average: f64,
    pub rule: ThresholdRule,
}

pub fn duty_cycle_channels(
    m: &OccupancyMatrix,
    channels: &[Channel],
    rule: &ThresholdRule,
) -> Result<DutyCycles, OccupancyError> {
    rule.validate()?;
    let mut out = Vec::with_capacity(channels.len());
    let (mut weighted, mut width) = (0.0, 0.0);
    for ch in channels {
        let (occ, thr) = band_duty(m, ch.low_mhz, ch.high_mhz, rule)?;
        let w = ch.high_mhz - ch.low_mhz;
        weighted += occ * w;
        width += w;
        out.push((ch.index, occ, thr));
    }
    let band_average = if width > 0.0 { weighted / width } else { 0.0 };
    Ok(DutyCycles { channels: out, band_average, rule: *rule })
}

/// Duty cycle of every channel of `grid`.
pub fn duty_cycle(m: &OccupancyMatrix, grid: &ChannelGrid, rule: &ThresholdRule) -> Result<DutyCycles, OccupancyError> {
    duty_cycle_channels(m, grid.channels(), rule)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelClass {
    /// Always on with a stable level.
    Persistent,
    /// On often, with a level that varies over time.
    Intermittent,
    /// Average near the noise floor, with occasional activity.
    Sporadic,
}

impl fmt::Display for ChannelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ChannelClass::Persistent => "Persistent",
            ChannelClass::Intermittent => "Intermittent",
            ChannelClass::Sporadic => "Sporadic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub class: ChannelClass,
    /// The channel never rose `delta_on_db` above the noise floor.
    pub never_seen: bool,
    /// Strongest per-bin time average (dB domain).
    pub avg_dbm: f64,
    /// Strongest max-hold value.
    pub max_dbm: f64,
}

/// Classifies a channel from its per-bin average and max-hold traces, as a
/// spectrum analyzer with log averaging would display them.
pub fn classify_channel(
    m: &OccupancyMatrix,
    grid: &ChannelGrid,
    channel: usize,
    noise_floor_dbm: f64,
    delta_on_db: f64,
    gamma_spread_db: f64,
) -> Result<Classification, OccupancyError> {
    let ch =
        grid.channel(channel).ok_or_else(|| OccupancyError::Validation(format!("channel {channel} not in grid")))?;
    let bins = m.bins_in(ch.low_mhz, ch.high_mhz)?;
    let n = m.timestamps_ms.len();
    if n == 0 {
        return Err(OccupancyError::InsufficientData("trace has no rows".into()));
    }
    let mut avg = f64::NEG_INFINITY;
    let mut max = f64::NEG_INFINITY;
    for b in bins {
        let col = m.power_dbm.iter().map(|r| r[b]);
        avg = avg.max(col.clone().sum::<f64>() / n as f64);
        max = max.max(col.fold(f64::NEG_INFINITY, f64::max));
    }
    let on = noise_floor_dbm + delta_on_db;
    let (class, never_seen) = if max < on {
        (ChannelClass::Sporadic, true)
    } else if avg < on {
        (ChannelClass::Sporadic, false)
    } else if max - avg <= gamma_spread_db {
        (ChannelClass::Persistent, false)
    } else {
        (ChannelClass::Intermittent, false)
    };
    Ok(Classification { class, never_seen, avg_dbm: avg, max_dbm: max })
}

#[cfg(test)]
mod tests {
    use super::super::TraceMeta;
    use super::*;
    use crate::radio_env::{build_channel_grid, FrequencyBand};

    /// 8 MHz channels over 470-486 MHz, 1 MHz bins, rows built by `f(t, bin)`.
    fn matrix(rows: usize, f: impl Fn(usize, usize) -> f64) -> (OccupancyMatrix, ChannelGrid) {
        let freqs: Vec<f64> = (0..16).map(|i| 470.5 + i as f64).collect();
        let power = (0..rows).map(|t| (0..16).map(|b| f(t, b)).collect()).collect();
        let times = (0..rows as u64).map(|t| t * 1000).collect();
        let meta = TraceMeta { rbw_khz: 1000.0, ..Default::default() };
        let grid = build_channel_grid(FrequencyBand::new(470.0, 486.0).unwrap(), 8.0, &[]).unwrap();
        (OccupancyMatrix::new(times, freqs, power, meta).unwrap(), grid)
    }

    #[test]
    fn all_above_is_one() {
        let (m, g) = matrix(5, |_, _| -50.0);
        let d = duty_cycle(&m, &g, &ThresholdRule::Fixed { dbm: -60.0 }).unwrap();
        assert!(d.channels.iter().all(|c| c.1 == 1.0));
        assert_eq!(d.band_average, 1.0);
    }

    #[test]
    fn hand_counted_37_percent() {
        // Channel 0 has 100 rows x 8 bins = 800 cells; 296 are hot.
        let (m, g) = matrix(100, |t, b| if b < 8 && t * 8 + b < 296 { -40.0 } else { -110.0 });
        let d = duty_cycle(&m, &g, &ThresholdRule::Fixed { dbm: -90.0 }).unwrap();
        assert_eq!(d.channels[0].1, 0.37);
        assert_eq!(d.channels[1].1, 0.0);
        assert_eq!(d.band_average, 0.185);
    }

    #[test]
    fn uncovered_channel_errors() {
        let (m, _) = matrix(2, |_, _| -100.0);
        let far = build_channel_grid(FrequencyBand::new(600.0, 608.0).unwrap(), 8.0, &[]).unwrap();
        assert!(matches!(duty_cycle(&m, &far, &ThresholdRule::default()), Err(OccupancyError::Coverage { .. })));
    }

    #[test]
    fn noise_percentile_threshold() {
        let (m, g) = matrix(10, |t, _| if t == 9 { -60.0 } else { -110.0 });
        let d = duty_cycle(&m, &g, &ThresholdRule::default()).unwrap();
        assert!((d.channels[0].2 - -104.0).abs() < 1e-12);
        assert!((d.channels[0].1 - 0.1).abs() < 1e-12);
    }

    #[test]
    fn three_cases() {
        let (m, g) = matrix(100, |t, b| match b {
            // 470-478: on 40% of the time.
            0..=7 if t % 5 < 2 => -60.0,
            0..=7 => -115.0,
            // 478-486: constant carrier.
            _ => -60.0,
        });
        let c = classify_channel(&m, &g, 0, -115.0, 10.0, 5.0).unwrap();
        assert_eq!(c.class, ChannelClass::Intermittent);
        assert_eq!(classify_channel(&m, &g, 1, -115.0, 10.0, 5.0).unwrap().class, ChannelClass::Persistent);
        let (burst, g) = matrix(100, |t, b| if t == 50 && b == 3 { -60.0 } else { -115.0 });
        let c = classify_channel(&burst, &g, 0, -115.0, 10.0, 5.0).unwrap();
        assert_eq!((c.class, c.never_seen), (ChannelClass::Sporadic, false));
        let c = classify_channel(&burst, &g, 1, -115.0, 10.0, 5.0).unwrap();
        assert_eq!((c.class, c.never_seen), (ChannelClass::Sporadic, true));
    }
}
