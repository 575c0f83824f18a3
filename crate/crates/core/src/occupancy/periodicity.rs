use super::analysis::ThresholdRule;
use super::{OccupancyError, OccupancyMatrix};

const HOUR_MS: f64 = 3_600_000.0;
/// Relative shortfall from the strongest peak still accepted as the period.
const PEAK_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Periodicity {
    pub period_hours: f64,
    /// Normalized circular autocorrelation at the peak lag.
    pub strength: f64,
    pub significant: bool,
}

impl Periodicity {
    /// Strength at or above which a peak counts as a real period.
    pub const SIGNIFICANCE: f64 = 0.3;
}

/// Dominant period in 12-36 h from the circular autocorrelation of a
/// series sampled every `interval_ms`. The series must span at least
/// 72 h so every candidate lag is at most half its length.
pub fn detect_periodicity(series: &[f64], interval_ms: u64) -> Result<Periodicity, OccupancyError> {
    if interval_ms == 0 {
        return Err(OccupancyError::Validation("interval must be positive".into()));
    }
    let step_h = interval_ms as f64 / HOUR_MS;
    let lag_min = (12.0 / step_h).ceil() as usize;
    let lag_max = (36.0 / step_h).floor() as usize;
    let n = series.len();
    if lag_min == 0 || lag_max < lag_min || n < 2 * lag_max {
        return Err(OccupancyError::InsufficientData(format!(
            "{n} samples of {interval_ms} ms do not span two 36 h periods"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let energy: f64 = x.iter().map(|v| v * v).sum();
    if energy <= 1e-12 * n as f64 * mean.abs().max(1.0).powi(2) {
        return Ok(Periodicity { period_hours: 24.0, strength: 0.0, significant: false });
    }
    let acf = |lag: usize| (0..n).map(|i| x[i] * x[(i + lag) % n]).sum::<f64>() / energy;
    let r: Vec<f64> = (lag_min - 1..=lag_max + 1).map(acf).collect();
    let best = r[1..r.len() - 1].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // A signal repeating every P also repeats every 2P; report the shortest
    // local peak that comes close to the strongest one.
    let best_lag = (1..r.len() - 1)
        .find(|&i| r[i] >= r[i - 1] && r[i] >= r[i + 1] && r[i] >= best - PEAK_TOLERANCE * best.abs())
        .or_else(|| (1..r.len() - 1).find(|&i| r[i] == best))
        .map_or(lag_min, |i| lag_min - 1 + i);
    let strength = r[best_lag + 1 - lag_min];
    Ok(Periodicity {
        period_hours: best_lag as f64 * step_h,
        strength,
        significant: strength >= Periodicity::SIGNIFICANCE,
    })
}

/// Band occupancy per `interval_ms` window: the fraction of all cells in
/// the window above a threshold resolved once over the whole trace.
pub fn band_occupancy_series(
    m: &OccupancyMatrix,
    rule: &ThresholdRule,
    interval_ms: u64,
) -> Result<Vec<f64>, OccupancyError> {
    rule.validate()?;
    if interval_ms == 0 || m.timestamps_ms.is_empty() {
        return Err(OccupancyError::InsufficientData("empty trace or zero interval".into()));
    }
    let thr = rule.resolve(m.power_dbm.iter().flatten().copied());
    let t0 = m.timestamps_ms[0];
    let windows = ((m.timestamps_ms[m.timestamps_ms.len() - 1] - t0) / interval_ms + 1) as usize;
    let mut above = vec![0usize; windows];
    let mut total = vec![0usize; windows];
    for (t, row) in m.timestamps_ms.iter().zip(&m.power_dbm) {
        let w = ((t - t0) / interval_ms) as usize;
        above[w] += row.iter().filter(|&&p| p > thr).count();
        total[w] += row.len();
    }
    Ok(above.iter().zip(&total).map(|(&a, &n)| if n == 0 { 0.0 } else { a as f64 / n as f64 }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::substream;
    use rand::Rng;

    const HOUR: u64 = 3_600_000;

    fn square(days: usize, period_h: usize) -> Vec<f64> {
        (0..days * 24).map(|h| if h % period_h < period_h / 2 { 1.0 } else { 0.0 }).collect()
    }

    #[test]
    fn square_wave_day() {
        let p = detect_periodicity(&square(7, 24), HOUR).unwrap();
        assert_eq!(p.period_hours, 24.0);
        assert!((p.strength - 1.0).abs() < 1e-12);
        assert!(p.significant);
    }

    #[test]
    fn flat_series_is_not_periodic() {
        let p = detect_periodicity(&[0.3; 168], HOUR).unwrap();
        assert_eq!(p.strength, 0.0);
        assert!(!p.significant);
    }

    #[test]
    fn noisy_day_within_an_hour() {
        let mut rng = substream(5, 0);
        let s: Vec<f64> = square(7, 24).iter().map(|v| v + 0.1 * (rng.random::<f64>() - 0.5)).collect();
        let p = detect_periodicity(&s, HOUR).unwrap();
        assert!((p.period_hours - 24.0).abs() <= 1.0);
    }

    #[test]
    fn short_series_rejected() {
        assert!(matches!(detect_periodicity(&square(2, 24), HOUR), Err(OccupancyError::InsufficientData(_))));
    }

    #[test]
    fn quarter_hour_resolution() {
        let s: Vec<f64> = (0..5 * 24 * 4).map(|q| (std::f64::consts::TAU * q as f64 / 80.0).sin()).collect();
        let p = detect_periodicity(&s, HOUR / 4).unwrap();
        assert_eq!(p.period_hours, 20.0);
    }
}
