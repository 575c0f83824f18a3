use proptest::prelude::*;
use tvws_core::exec::{substream, Execution};
use tvws_core::interference::{acir_sweep, build_topology, evaluate_drop, Drop, StudyConfig};
use tvws_core::radio_env::Point;

fn small() -> StudyConfig {
    StudyConfig { tv_receivers: 5, ues_per_sector: 3, ..StudyConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn paired_curves_are_bounded_monotone_and_order_free(
        seed in any::<u64>(), cenb_power in 10.0..40.0f64, tv_eirp in 60.0..100.0f64,
    ) {
        let cfg = StudyConfig { cenb_power_dbm: cenb_power, tv_eirp_dbm: tv_eirp, ..small() };
        let acirs: Vec<f64> = (0..=10).map(|i| 10.0 * i as f64).collect();
        let topo = cfg.topology();
        let seq = acir_sweep(&topo, &cfg, &acirs, 100, seed, Execution::Sequential).unwrap();
        let par = acir_sweep(&topo, &cfg, &acirs, 100, seed, Execution::Parallel).unwrap();
        prop_assert_eq!(&seq, &par);
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        for p in &seq.points {
            prop_assert!(unit(p.tv_outage_dl) && unit(p.tv_outage_ul) && unit(p.dl_cap_loss) && unit(p.ul_cap_loss));
        }
        for w in seq.points.windows(2) {
            prop_assert!(w[0].acir_db < w[1].acir_db);
            prop_assert!(w[1].tv_outage_dl <= w[0].tv_outage_dl && w[1].tv_outage_ul <= w[0].tv_outage_ul);
            prop_assert!(w[1].dl_cap_loss <= w[0].dl_cap_loss + 1e-12 && w[1].ul_cap_loss <= w[0].ul_cap_loss + 1e-12);
        }
    }
}

#[test]
fn perfect_isolation_costs_nothing() {
    let cfg = small();
    let curve = acir_sweep(&cfg.topology(), &cfg, &[0.0, f64::INFINITY], 100, 5, Execution::Parallel).unwrap();
    let iso = curve.points.last().unwrap();
    assert_eq!(iso.acir_db, f64::INFINITY);
    assert_eq!((iso.tv_outage_dl, iso.tv_outage_ul, iso.dl_cap_loss, iso.ul_cap_loss), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn rotated_drops_match_fresh_drops_in_aggregate() {
    let cfg = small();
    let topo = build_topology(cfg.isd_m, cfg.tv_radius_m, Point::default());
    let n = 400;
    let mean_dl_capacity = |seed: u64, deg: f64| {
        (0..n)
            .map(|i| {
                let drop = Drop::sample(&topo, &cfg, &mut substream(seed, i)).rotated(Point::default(), deg);
                evaluate_drop(&topo, &cfg, &drop, &[30.0]).unwrap()[0].dl_capacity
            })
            .collect::<Vec<f64>>()
    };
    let stats = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (m, var / v.len() as f64)
    };
    let (a, va) = stats(&mean_dl_capacity(11, 120.0));
    let (b, vb) = stats(&mean_dl_capacity(12, 0.0));
    assert!((a - b).abs() <= 4.0 * (va + vb).sqrt(), "{a} vs {b}");
}
