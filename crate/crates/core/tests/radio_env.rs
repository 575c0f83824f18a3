use proptest::prelude::*;
use tvws_core::radio_env::{
    build_channel_grid, china_tv_grid, FrequencyBand, PathLoss, Point, PropagationConfig, RadioEnv, TvStandard,
    TvTransmitter,
};

fn standard() -> impl Strategy<Value = TvStandard> {
    prop_oneof![Just(TvStandard::AnalogPalD), Just(TvStandard::DigitalDtmb)]
}

fn transmitter() -> impl Strategy<Value = TvTransmitter> {
    (standard(), 0usize..37, -5000.0..5000.0f64, -5000.0..5000.0f64, 0.0..90.0f64)
        .prop_map(|(s, ch, x, y, eirp)| TvTransmitter::new("tx", s, ch, Point::new(x, y), eirp))
}

fn signal_mw(env: &RadioEnv, at: Point, txs: &[TvTransmitter]) -> Vec<f64> {
    let mut pl = PathLoss::new(PropagationConfig::default()).unwrap();
    let band = env.grid.band;
    env.received_signal(at, txs, 0, band.low_mhz, band.high_mhz, &mut pl).unwrap().bins_mw().collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn superposition_is_linear(a in transmitter(), b in transmitter(), x in -2000.0..2000.0f64) {
        let env = RadioEnv::new(china_tv_grid());
        let at = Point::new(x, 17.0);
        let both = signal_mw(&env, at, &[a.clone(), b.clone()]);
        let (sa, sb) = (signal_mw(&env, at, &[a]), signal_mw(&env, at, &[b]));
        for ((s, p), q) in both.iter().zip(&sa).zip(&sb) {
            let sum = p + q;
            prop_assert!((s - sum).abs() <= 1e-9 * sum.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn attenuation_is_monotone_without_shadowing(
        exponent in 2.0..5.0f64, d1 in 1.0..50_000.0f64, extra in 0.0..50_000.0f64, f in 470.0..806.0f64,
    ) {
        let cfg = PropagationConfig { exponent, ..PropagationConfig::default() };
        let mut pl = PathLoss::new(cfg).unwrap();
        prop_assert!(pl.loss_db(d1, f).unwrap() <= pl.loss_db(d1 + extra, f).unwrap());
    }

    #[test]
    fn shadowed_spectra_repeat_per_seed(tx in transmitter(), seed in any::<u64>()) {
        let env = RadioEnv::new(china_tv_grid());
        let cfg = PropagationConfig { shadowing_sigma_db: 8.0, seed, ..PropagationConfig::default() };
        let run = || {
            let mut pl = PathLoss::new(cfg.clone()).unwrap();
            env.received_spectrum(Point::new(300.0, 0.0), std::slice::from_ref(&tx), 0, &mut pl).unwrap()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn grid_avoids_exclusions(low in 0u32..20, width in 2u32..40, ex_at in 0.0..1.0f64, ex_frac in 0.0..1.0f64) {
        let ch = |n: u32| 470.0 + 8.0 * n as f64;
        let band = FrequencyBand::new(ch(low), ch(low + width)).unwrap();
        // Strictly inside the band, leaving at least one channel.
        let start = low + (ex_at * (width - 1) as f64) as u32;
        let len = 1 + (ex_frac * (low + width - 1 - start) as f64) as u32;
        let ex = FrequencyBand::new(ch(start), ch((start + len).min(low + width - 1).max(start + 1))).unwrap();
        let grid = build_channel_grid(band, 8.0, &[ex]).unwrap();
        prop_assert_eq!(grid.len() as f64, (band.width_mhz() - ex.width_mhz()) / 8.0);
        for ch in grid.channels() {
            prop_assert!(band.contains(&ch.band()));
            prop_assert!(!ex.overlaps(&ch.band()));
        }
        for w in grid.channels().windows(2) {
            prop_assert!(w[0].high_mhz <= w[1].low_mhz);
        }
    }
}

#[test]
fn china_grid_skips_566_to_606() {
    let grid = china_tv_grid();
    let ex = FrequencyBand::new(566.0, 606.0).unwrap();
    assert_eq!(grid.len(), 37);
    assert!(grid.channels().iter().all(|c| !c.band().overlaps(&ex)));
}
