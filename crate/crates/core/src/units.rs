//! Decibel conversions and thermal noise.

/// Thermal noise density at 290 K.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

#[inline]
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// `0 mW` maps to `-inf dBm`.
#[inline]
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

#[inline]
pub fn db_to_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn ratio_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Thermal noise power in `bandwidth_hz` for a receiver with the given
/// noise figure.
pub fn thermal_noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_PER_HZ + ratio_to_db(bandwidth_hz) + noise_figure_db
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_in_200khz_with_6db_nf() {
        let n = thermal_noise_dbm(200e3, 6.0);
        assert!((n - -114.9897).abs() < 1e-3, "{n}");
    }

    #[test]
    fn zero_power_is_minus_infinity() {
        assert_eq!(mw_to_dbm(0.0), f64::NEG_INFINITY);
        assert_eq!(dbm_to_mw(f64::NEG_INFINITY), 0.0);
    }
}
