use std::collections::BTreeSet;
use std::path::Path;

use proptest::prelude::*;
use tvws_core::cenb::{
    asm_allocate, build_frame_schedule, select_bandwidth, spectrum_decision, AsmRequest, CenbState, FrameConfig,
    SpecialSplit, FRAME_MS,
};
use tvws_core::geodb::{query_vacant_channels, Region};
use tvws_core::harness::{load_scenario, run_simulation, EventKind};
use tvws_core::radio_env::{china_tv_grid, FrequencyBand, Point};
use tvws_core::sensing::{Occupancy, SensingReport};

fn request() -> impl Strategy<Value = AsmRequest> {
    (0.0..5000.0f64, 0.0..5000.0f64, 1usize..6, prop::collection::btree_set(0usize..37, 0..37)).prop_map(
        |(x, y, demand, available)| AsmRequest {
            cenb_id: String::new(),
            location: Point::new(x, y),
            demand,
            available,
        },
    )
}

fn report() -> impl Strategy<Value = SensingReport> {
    (10usize..20, any::<bool>(), 0u64..200).prop_map(|(ch, occ, t)| SensingReport {
        cenb_id: "a".into(),
        channel_index: ch,
        decision: if occ { Occupancy::Occupied } else { Occupancy::Vacant },
        carrier_stats_dbm: Vec::new(),
        t_ms: t,
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn asm_never_shares_a_channel_within_reuse_distance(
        mut reqs in prop::collection::vec(request(), 1..8), reuse in 100.0..4000.0f64,
    ) {
        for (i, r) in reqs.iter_mut().enumerate() {
            r.cenb_id = format!("c{i}");
        }
        let grid = china_tv_grid();
        let out = asm_allocate(&reqs, &grid, reuse, 3);
        for (i, (id, block)) in out.blocks.iter().enumerate() {
            prop_assert_eq!(id, &reqs[i].cenb_id);
            prop_assert!(block.len() <= reqs[i].demand.min(3));
            prop_assert!(block.iter().all(|c| reqs[i].available.contains(c)));
            prop_assert!(block.is_empty() || grid.is_contiguous(block));
            for (j, (_, other)) in out.blocks.iter().enumerate().skip(i + 1) {
                if reqs[i].location.distance(&reqs[j].location) < reuse {
                    let a: BTreeSet<_> = block.iter().collect();
                    prop_assert!(other.iter().all(|c| !a.contains(c)), "{} and {} share", i, j);
                }
            }
        }
    }

    #[test]
    fn decisions_ignore_reports_from_the_boundary_on(
        reports in prop::collection::vec(report(), 0..40), frame in 1u64..20, grey in any::<bool>(),
    ) {
        let grid = china_tv_grid();
        let region = if grey { Region::Grey } else { Region::White };
        let regions: Vec<Region> = (0..grid.len()).map(|c| if (10..20).contains(&c) { region } else { Region::Black }).collect();
        let state = CenbState::new("a", Point::default(), FrequencyBand::new(2570.0, 2590.0).unwrap());
        let boundary = frame * FRAME_MS;
        let past: Vec<SensingReport> = reports.iter().filter(|r| r.t_ms < boundary).cloned().collect();
        let all = spectrum_decision(&state, &reports, &regions, &grid, frame).map_err(|e| e.to_string());
        let only_past = spectrum_decision(&state, &past, &regions, &grid, frame).map_err(|e| e.to_string());
        prop_assert_eq!(&all, &only_past);
        if let Ok(Some(msg)) = all {
            prop_assert!(msg.activation_frame > msg.frame_no);
            prop_assert_eq!(msg.bandwidth, select_bandwidth(msg.target_block.len()));
        }
    }

    #[test]
    fn sensing_never_overlaps_data(config_id in 0u8..7, dwpts in 0.0..0.5f64, uppts in 0.01..0.3f64, wide in any::<bool>()) {
        let split = SpecialSplit { dwpts_ms: dwpts, gp_ms: 1.0 - dwpts - uppts, uppts_ms: uppts };
        let cfg = FrameConfig { config_id, split, wide_scan: wide, require_uppts: true };
        // Only configurations the schedule accepts are meaningful.
        if let Ok(s) = build_frame_schedule(&cfg) {
            prop_assert!(s.sensing_budget_ms() <= 2.0 + 1e-12);
            for (start, end) in s.sensing_windows() {
                for sub in (start.floor() as usize)..(end.ceil() as usize) {
                    prop_assert!(!s.is_data_subframe(sub));
                }
            }
        }
    }
}

#[test]
fn broadcasts_sit_on_dwpts_and_black_channels_stay_unused() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/handover.ini");
    let cfg = load_scenario(&path).unwrap();
    let schedule = build_frame_schedule(&cfg.frame).unwrap();
    for seed in 1..=10 {
        let out = run_simulation(&tvws_core::harness::ScenarioConfig { seed, ..cfg.clone() }).unwrap();
        let broadcasts: Vec<u64> =
            out.events.iter().filter(|e| e.kind == EventKind::Broadcast).map(|e| e.t_ms).collect();
        assert!(!broadcasts.is_empty());
        assert!(broadcasts.iter().all(|&t| schedule.is_dwpts_instant(t)), "{broadcasts:?}");
        let spec = &cfg.cenbs[0];
        let regions = query_vacant_channels(&cfg.geodb, spec.location, spec.power_dbm, &cfg.prop, &cfg.grid);
        for h in &out.metrics.handovers {
            assert!(h.to_block.iter().all(|&c| regions[c].1 != Region::Black), "{h:?}");
            assert_eq!(h.bandwidth, select_bandwidth(h.to_block.len()));
        }
    }
}
