use rand::Rng;

use super::{HexTopology, InterferenceError, StudyConfig};
use crate::exec::{map_indexed, substream, Execution};
use crate::radio_env::Point;
use crate::units::{db_to_ratio, dbm_to_mw, thermal_noise_dbm};

/// Positions of one uniform drop: TV receivers inside the TV circle and
/// LTE users inside every sector.
#[derive(Debug, Clone, PartialEq)]
pub struct Drop {
    pub tv_receivers: Vec<Point>,
    pub ues: Vec<Point>,
}

impl Drop {
    pub fn sample<R: Rng + ?Sized>(topo: &HexTopology, cfg: &StudyConfig, rng: &mut R) -> Self {
        let tv_receivers = (0..cfg.tv_receivers)
            .map(|_| {
                let r = topo.tv_radius_m * rng.random::<f64>().sqrt();
                let a = std::f64::consts::TAU * rng.random::<f64>();
                Point::new(topo.tv_center.x_m + r * a.cos(), topo.tv_center.y_m + r * a.sin())
            })
            .collect();
        let ues = (0..topo.sectors.len())
            .flat_map(|s| (0..cfg.ues_per_sector).map(move |_| s))
            .map(|s| {
                let (a, b) = (rng.random::<f64>(), rng.random::<f64>());
                topo.sector_point(s, a, b)
            })
            .collect();
        Self { tv_receivers, ues }
    }

    /// The same drop rotated by `deg` about `center`.
    pub fn rotated(&self, center: Point, deg: f64) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        let rot = |p: &Point| {
            let (dx, dy) = (p.x_m - center.x_m, p.y_m - center.y_m);
            Point::new(center.x_m + c * dx - s * dy, center.y_m + s * dx + c * dy)
        };
        Self { tv_receivers: self.tv_receivers.iter().map(rot).collect(), ues: self.ues.iter().map(rot).collect() }
    }
}

/// Interference-free link budgets of one drop, in mW.
struct Links {
    /// (wanted TV power, raw CeNB sum, raw UE sum) per TV receiver.
    tv: Vec<(f64, f64, f64)>,
    /// (DL wanted, raw TV at UE, UL wanted, raw TV at serving CeNB) per UE.
    ue: Vec<(f64, f64, f64, f64)>,
}

fn links(topo: &HexTopology, cfg: &StudyConfig, drop: &Drop) -> Result<Links, InterferenceError> {
    let loss = |a: Point, ha: f64, b: Point, hb: f64| -> Result<f64, InterferenceError> {
        let d = a.distance(&b).hypot(ha - hb);
        Ok(db_to_ratio(-cfg.prop.median_loss_db(d.max(cfg.prop.ref_distance_m), cfg.freq_mhz)?))
    };
    let sector_mw = dbm_to_mw(cfg.cenb_power_dbm);
    let ue_mw = dbm_to_mw(cfg.ue_power_dbm);
    let tv_mw = dbm_to_mw(cfg.tv_eirp_dbm);
    let mut tv = Vec::with_capacity(drop.tv_receivers.len());
    for &rx in &drop.tv_receivers {
        let wanted = tv_mw * loss(topo.tv_center, cfg.tv_height_m, rx, cfg.tv_rx_height_m)?;
        let mut dl = 0.0;
        for sector in &topo.sectors {
            dl += sector_mw * loss(topo.sites[sector.site], cfg.cenb_height_m, rx, cfg.tv_rx_height_m)?;
        }
        let mut ul = 0.0;
        for &ue in &drop.ues {
            ul += ue_mw * loss(ue, cfg.ue_height_m, rx, cfg.tv_rx_height_m)?;
        }
        tv.push((wanted, dl, ul));
    }
    let mut ue = Vec::with_capacity(drop.ues.len());
    for &p in &drop.ues {
        let site = topo.sites[topo.nearest_site(p)];
        let g = loss(site, cfg.cenb_height_m, p, cfg.ue_height_m)?;
        ue.push((
            sector_mw * g,
            tv_mw * loss(topo.tv_center, cfg.tv_height_m, p, cfg.ue_height_m)?,
            ue_mw * g,
            tv_mw * loss(topo.tv_center, cfg.tv_height_m, site, cfg.cenb_height_m)?,
        ));
    }
    Ok(Links { tv, ue })
}

/// Counts and capacity sums of one drop at one ACIR.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SnapshotOutcome {
    pub tv_receivers: u64,
    /// TV receivers below the protection threshold with no LTE present.
    pub tv_baseline_outage: u64,
    /// Receivers pushed into outage by CeNB downlink interference.
    pub tv_outage_dl: u64,
    /// Receivers pushed into outage by user uplink interference.
    pub tv_outage_ul: u64,
    /// Sum of per-user Shannon capacities, bit/s/Hz.
    pub dl_capacity: f64,
    pub ul_capacity: f64,
}

struct Evaluator<'a> {
    cfg: &'a StudyConfig,
    links: Links,
}

impl Evaluator<'_> {
    fn outcome(&self, acir_db: f64) -> SnapshotOutcome {
        let cfg = self.cfg;
        // +inf ACIR isolates the systems completely.
        let iso = if acir_db == f64::INFINITY { 0.0 } else { db_to_ratio(-acir_db) };
        let n_tv = dbm_to_mw(thermal_noise_dbm(cfg.tv_bw_mhz * 1e6, cfg.tv_nf_db));
        let n_ue = dbm_to_mw(thermal_noise_dbm(cfg.lte_bw_mhz * 1e6, cfg.ue_nf_db));
        let share = cfg.ues_per_sector.max(1) as f64;
        let n_ul = dbm_to_mw(thermal_noise_dbm(cfg.lte_bw_mhz * 1e6 / share, cfg.cenb_nf_db));
        let protect = db_to_ratio(cfg.protection_db);
        let mut o = SnapshotOutcome { tv_receivers: self.links.tv.len() as u64, ..Default::default() };
        for &(s, dl, ul) in &self.links.tv {
            let base = s / n_tv < protect;
            o.tv_baseline_outage += base as u64;
            o.tv_outage_dl += (!base && s / (n_tv + dl * iso) < protect) as u64;
            o.tv_outage_ul += (!base && s / (n_tv + ul * iso) < protect) as u64;
        }
        for &(s_dl, i_ue, s_ul, i_site) in &self.links.ue {
            o.dl_capacity += (1.0 + s_dl / (n_ue + i_ue * iso)).log2();
            o.ul_capacity += (1.0 + s_ul / (n_ul + i_site * iso / share)).log2();
        }
        o
    }
}

/// One drop evaluated at one ACIR.
pub fn simulate_snapshot(
    topo: &HexTopology,
    cfg: &StudyConfig,
    acir_db: f64,
    drop_seed: u64,
) -> Result<SnapshotOutcome, InterferenceError> {
    let drop = Drop::sample(topo, cfg, &mut substream(drop_seed, 0));
    evaluate_drop(topo, cfg, &drop, &[acir_db]).map(|v| v[0])
}

/// One drop evaluated at every ACIR in `acirs_db` (paired comparison).
pub fn evaluate_drop(
    topo: &HexTopology,
    cfg: &StudyConfig,
    drop: &Drop,
    acirs_db: &[f64],
) -> Result<Vec<SnapshotOutcome>, InterferenceError> {
    let ev = Evaluator { cfg, links: links(topo, cfg, drop)? };
    Ok(acirs_db.iter().map(|&a| ev.outcome(a)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcirPoint {
    pub acir_db: f64,
    /// Fraction of TV receivers put into outage by the CeNB downlink.
    pub tv_outage_dl: f64,
    pub tv_outage_ul: f64,
    /// Relative capacity decline against perfect isolation.
    pub dl_cap_loss: f64,
    pub ul_cap_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcirCurve {
    pub points: Vec<AcirPoint>,
    pub snapshots: usize,
    pub seed: u64,
    /// Coverage-limited TV outage without any LTE, reported separately.
    pub tv_baseline_outage: f64,
}

/// Paired-drop Monte Carlo over `acirs_db`; snapshot `i` uses substream `i`
/// of `seed`, so every ACIR sees the same drops.
pub fn acir_sweep(
    topo: &HexTopology,
    cfg: &StudyConfig,
    acirs_db: &[f64],
    snapshots: usize,
    seed: u64,
    exec: Execution,
) -> Result<AcirCurve, InterferenceError> {
    if snapshots < StudyConfig::MIN_SNAPSHOTS {
        return Err(InterferenceError::Config(format!(
            "need at least {} snapshots, got {snapshots}",
            StudyConfig::MIN_SNAPSHOTS
        )));
    }
    let mut acirs = acirs_db.to_vec();
    acirs.sort_by(f64::total_cmp);
    acirs.dedup();
    let mut with_ref = acirs.clone();
    with_ref.push(f64::INFINITY);
    let per_drop = map_indexed(snapshots, exec, |i| {
        let drop = Drop::sample(topo, cfg, &mut substream(seed, i as u64));
        evaluate_drop(topo, cfg, &drop, &with_ref)
    });
    let mut totals = vec![SnapshotOutcome::default(); with_ref.len()];
    for drop in per_drop {
        for (t, o) in totals.iter_mut().zip(drop?) {
            t.tv_receivers += o.tv_receivers;
            t.tv_baseline_outage += o.tv_baseline_outage;
            t.tv_outage_dl += o.tv_outage_dl;
            t.tv_outage_ul += o.tv_outage_ul;
            t.dl_capacity += o.dl_capacity;
            t.ul_capacity += o.ul_capacity;
        }
    }
    let reference = *totals.last().expect("reference point");
    let frac = |n: u64| if reference.tv_receivers == 0 { 0.0 } else { n as f64 / reference.tv_receivers as f64 };
    let loss = |c: f64, c_ref: f64| if c_ref > 0.0 { (1.0 - c / c_ref).clamp(0.0, 1.0) } else { 0.0 };
    let points = acirs
        .iter()
        .zip(&totals)
        .map(|(&acir_db, t)| AcirPoint {
            acir_db,
            tv_outage_dl: frac(t.tv_outage_dl),
            tv_outage_ul: frac(t.tv_outage_ul),
            dl_cap_loss: loss(t.dl_capacity, reference.dl_capacity),
            ul_cap_loss: loss(t.ul_capacity, reference.ul_capacity),
        })
        .collect();
    Ok(AcirCurve { points, snapshots, seed, tv_baseline_outage: frac(reference.tv_baseline_outage) })
}
