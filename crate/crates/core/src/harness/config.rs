use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::HarnessError;
use crate::cenb::{FrameConfig, FusionRule, SpecialSplit};
use crate::geodb::{self, GeoDb, GeoRecord};
use crate::ini::{self, Entry};
use crate::interference::{GuardBandMap, StudyConfig};
use crate::radio_env::{
    build_channel_grid, load_transmitters, ChannelGrid, FrequencyBand, Point, PropagationConfig, TvTransmitter,
};
use crate::sensing::{load_calibration, DetectorConfig};

const SCENARIO_KEYS: &[&str] = &[
    "scenario.duration_ms",
    "scenario.seed",
    "scenario.output_dir",
    "grid.band",
    "grid.channel_width_mhz",
    "grid.exclude",
    "files.transmitters",
    "files.geodb",
    "geodb.required_rx_dbm",
    "geodb.grey_margin_m",
    "geodb.protection_ratio_db",
    "detector.calibration",
    "detector.energy_threshold_dbm",
    "frame.config",
    "frame.dwpts_ms",
    "frame.gp_ms",
    "frame.uppts_ms",
    "frame.wide_scan",
    "handover.retune_ms",
    "handover.fusion",
    "handover.confirm_frames",
    "traffic.packets_per_subframe",
    "traffic.random_loss",
    "traffic.inr_threshold_db",
    "asm.reuse_distance_m",
    "asm.epoch_frames",
    "interference.enabled",
];

const PROPAGATION_KEYS: &[&str] = &[
    "propagation.exponent",
    "propagation.ref_distance_m",
    "propagation.ref_loss_db",
    "propagation.shadowing_sigma_db",
];

const STUDY_KEYS: &[&str] = &[
    "interference.isd_m",
    "interference.tv_radius_m",
    "interference.tv_offset_x_m",
    "interference.tv_offset_y_m",
    "interference.freq_mhz",
    "interference.tv_eirp_dbm",
    "interference.tv_height_m",
    "interference.tv_rx_height_m",
    "interference.cenb_height_m",
    "interference.ue_height_m",
    "interference.cenb_power_dbm",
    "interference.ue_power_dbm",
    "interference.tv_bw_mhz",
    "interference.lte_bw_mhz",
    "interference.tv_nf_db",
    "interference.ue_nf_db",
    "interference.cenb_nf_db",
    "interference.protection_db",
    "interference.tv_receivers",
    "interference.ues_per_sector",
    "interference.acir_db",
    "interference.snapshots",
    "interference.seed",
    "interference.loss_budget",
    "interference.guard_map",
];

const CENB_FIELDS: &[&str] = &["x_m", "y_m", "power_dbm", "dedicated_band", "initial_block"];

/// Parsed key/value text with typed, key-naming accessors.
pub(crate) struct Keys {
    map: BTreeMap<String, Entry>,
}

impl Keys {
    pub(crate) fn parse(text: &str, allowed: impl Fn(&str) -> bool) -> Result<Self, HarnessError> {
        let map = ini::parse(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        if let Some((k, e)) = map.iter().find(|(k, _)| !allowed(k)) {
            return Err(HarnessError::Config(format!("line {}: unknown key `{k}`", e.line)));
        }
        Ok(Self { map })
    }

    fn with<T>(&self, key: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<T>, HarnessError> {
        self.map
            .get(key)
            .map(|e| f(&e.value).map_err(|m| HarnessError::Config(format!("line {}: `{key}`: {m}", e.line))))
            .transpose()
    }

    pub(crate) fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, HarnessError>
    where
        T::Err: Display,
    {
        self.with(key, |v| v.parse::<T>().map_err(|e| format!("cannot parse `{v}`: {e}")))
    }

    pub(crate) fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, HarnessError>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub(crate) fn require<T: FromStr>(&self, key: &str) -> Result<T, HarnessError>
    where
        T::Err: Display,
    {
        self.get(key)?.ok_or_else(|| HarnessError::Config(format!("missing mandatory key `{key}`")))
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn keys(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }
}

fn parse_list<T: FromStr>(v: &str) -> Result<Vec<T>, String>
where
    T::Err: Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("bad list item `{s}`: {e}")))
        .collect()
}

/// `start:stop:step` inclusive range or a comma list. Negative bounds are
/// fine since `:` separates the fields.
fn parse_acir_list(v: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return parse_list(v);
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number `{s}`"));
    let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(step > 0.0) || b < a {
        return Err(format!("empty range `{v}`"));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + step * i as f64).collect())
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn cfg_err(key: &str, e: impl Display) -> HarnessError {
    HarnessError::Config(format!("`{key}`: {e}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenbSpec {
    pub id: String,
    pub location: Point,
    pub power_dbm: f64,
    pub dedicated_band: FrequencyBand,
    /// `None` lets the ASM assign the first block.
    pub initial_block: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandoverConfig {
    pub retune_ms: u64,
    pub fusion: FusionRule,
    /// Consecutive occupied frames before a channel is declared occupied.
    pub confirm_frames: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficConfig {
    pub packets_per_subframe: u32,
    /// Independent per-packet loss floor.
    pub random_loss: f64,
    /// Co-channel TV power over receiver noise above which a subframe is lost.
    pub inr_threshold_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsmConfig {
    pub reuse_distance_m: f64,
    pub epoch_frames: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub duration_ms: u64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub grid: ChannelGrid,
    pub transmitters_path: PathBuf,
    pub transmitters: Vec<TvTransmitter>,
    pub geodb_path: Option<PathBuf>,
    pub geodb: GeoDb,
    pub prop: PropagationConfig,
    pub detector: DetectorConfig,
    pub frame: FrameConfig,
    pub handover: HandoverConfig,
    pub traffic: TrafficConfig,
    pub asm: AsmConfig,
    pub cenbs: Vec<CenbSpec>,
    pub interference: Option<StudyConfig>,
}

fn scenario_key_allowed(k: &str) -> bool {
    if SCENARIO_KEYS.contains(&k) || PROPAGATION_KEYS.contains(&k) || STUDY_KEYS.contains(&k) {
        return true;
    }
    match k.strip_prefix("cenb.").and_then(|r| r.rsplit_once('.')) {
        Some((id, field)) => !id.is_empty() && !id.contains('.') && CENB_FIELDS.contains(&field),
        None => false,
    }
}

fn study_key_allowed(k: &str) -> bool {
    PROPAGATION_KEYS.contains(&k) || STUDY_KEYS.contains(&k)
}

fn propagation(keys: &Keys, seed: u64) -> Result<PropagationConfig, HarnessError> {
    let d = PropagationConfig::default();
    let prop = PropagationConfig {
        exponent: keys.get_or("propagation.exponent", d.exponent)?,
        ref_distance_m: keys.get_or("propagation.ref_distance_m", d.ref_distance_m)?,
        ref_loss_db: keys.get("propagation.ref_loss_db")?.or(d.ref_loss_db),
        shadowing_sigma_db: keys.get_or("propagation.shadowing_sigma_db", d.shadowing_sigma_db)?,
        seed,
    };
    prop.validate().map_err(|e| cfg_err("propagation", e))?;
    Ok(prop)
}

fn study(keys: &Keys, prop: PropagationConfig, default_seed: u64) -> Result<StudyConfig, HarnessError> {
    let d = StudyConfig::default();
    let k = |name: &str| format!("interference.{name}");
    let f = |name: &str, v: f64| keys.get_or(&k(name), v);
    let cfg = StudyConfig {
        isd_m: f("isd_m", d.isd_m)?,
        tv_radius_m: f("tv_radius_m", d.tv_radius_m)?,
        tv_offset: Point::new(f("tv_offset_x_m", d.tv_offset.x_m)?, f("tv_offset_y_m", d.tv_offset.y_m)?),
        freq_mhz: f("freq_mhz", d.freq_mhz)?,
        tv_eirp_dbm: f("tv_eirp_dbm", d.tv_eirp_dbm)?,
        tv_height_m: f("tv_height_m", d.tv_height_m)?,
        tv_rx_height_m: f("tv_rx_height_m", d.tv_rx_height_m)?,
        cenb_height_m: f("cenb_height_m", d.cenb_height_m)?,
        ue_height_m: f("ue_height_m", d.ue_height_m)?,
        cenb_power_dbm: f("cenb_power_dbm", d.cenb_power_dbm)?,
        ue_power_dbm: f("ue_power_dbm", d.ue_power_dbm)?,
        tv_bw_mhz: f("tv_bw_mhz", d.tv_bw_mhz)?,
        lte_bw_mhz: f("lte_bw_mhz", d.lte_bw_mhz)?,
        tv_nf_db: f("tv_nf_db", d.tv_nf_db)?,
        ue_nf_db: f("ue_nf_db", d.ue_nf_db)?,
        cenb_nf_db: f("cenb_nf_db", d.cenb_nf_db)?,
        protection_db: f("protection_db", d.protection_db)?,
        tv_receivers: keys.get_or(&k("tv_receivers"), d.tv_receivers)?,
        ues_per_sector: keys.get_or(&k("ues_per_sector"), d.ues_per_sector)?,
        prop,
        acir_db: keys.with(&k("acir_db"), parse_acir_list)?.unwrap_or(d.acir_db),
        snapshots: keys.get_or(&k("snapshots"), d.snapshots)?,
        seed: keys.get_or(&k("seed"), default_seed)?,
        loss_budget: f("loss_budget", d.loss_budget)?,
        guard_map: keys.get::<GuardBandMap>(&k("guard_map"))?.unwrap_or(d.guard_map),
    };
    cfg.validate().map_err(|e| cfg_err("interference", e))?;
    Ok(cfg)
}

/// Study configuration from `interference.*` and `propagation.*` keys.
pub fn parse_study(text: &str) -> Result<StudyConfig, HarnessError> {
    let keys = Keys::parse(text, study_key_allowed)?;
    let d = StudyConfig::default();
    let prop = propagation(&keys, d.prop.seed)?;
    study(&keys, prop, d.seed)
}

pub fn load_study(path: &Path) -> Result<StudyConfig, HarnessError> {
    parse_study(&read(path)?)
}

pub(crate) fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::ConfigIo { path: path.display().to_string(), source })
}

fn parse_grid(keys: &Keys) -> Result<ChannelGrid, HarnessError> {
    let band = keys.get_or("grid.band", FrequencyBand { low_mhz: 470.0, high_mhz: 806.0 })?;
    let width = keys.get_or("grid.channel_width_mhz", 8.0)?;
    let exclude = keys
        .with("grid.exclude", |v| if v.eq_ignore_ascii_case("none") { Ok(Vec::new()) } else { parse_list(v) })?
        .unwrap_or_else(|| vec![FrequencyBand { low_mhz: 566.0, high_mhz: 606.0 }]);
    build_channel_grid(band, width, &exclude).map_err(|e| cfg_err("grid", e))
}

fn parse_cenbs(keys: &Keys, grid: &ChannelGrid) -> Result<Vec<CenbSpec>, HarnessError> {
    let mut ids: Vec<String> = keys
        .keys()
        .filter_map(|k| k.strip_prefix("cenb.").and_then(|r| r.rsplit_once('.')).map(|(id, _)| id.to_string()))
        .collect();
    ids.dedup();
    if ids.is_empty() {
        return Err(HarnessError::Config("missing mandatory key `cenb.<id>.x_m`: no CeNB configured".into()));
    }
    ids.into_iter()
        .map(|id| {
            let k = |f: &str| format!("cenb.{id}.{f}");
            let initial_block: Option<Vec<usize>> = keys.with(&k("initial_block"), parse_list)?;
            if let Some(b) = &initial_block {
                if b.is_empty() || b.len() > 3 || !grid.is_contiguous(b) || b.iter().any(|&c| c >= grid.len()) {
                    return Err(cfg_err(&k("initial_block"), "must be 1-3 adjacent grid channels"));
                }
            }
            Ok(CenbSpec {
                location: Point::new(keys.require(&k("x_m"))?, keys.require(&k("y_m"))?),
                power_dbm: keys.get_or(&k("power_dbm"), 20.0)?,
                dedicated_band: keys
                    .get_or(&k("dedicated_band"), FrequencyBand { low_mhz: 2570.0, high_mhz: 2590.0 })?,
                initial_block,
                id,
            })
        })
        .collect()
}

fn parse_frame(keys: &Keys) -> Result<FrameConfig, HarnessError> {
    let d = FrameConfig::default();
    let split = SpecialSplit {
        dwpts_ms: keys.get_or("frame.dwpts_ms", d.split.dwpts_ms)?,
        gp_ms: keys.get_or("frame.gp_ms", d.split.gp_ms)?,
        uppts_ms: keys.get_or("frame.uppts_ms", d.split.uppts_ms)?,
    };
    let cfg = FrameConfig {
        config_id: keys.get_or("frame.config", d.config_id)?,
        split,
        wide_scan: keys.get_or("frame.wide_scan", d.wide_scan)?,
        require_uppts: d.require_uppts,
    };
    crate::cenb::build_frame_schedule(&cfg).map_err(|e| cfg_err("frame", e))?;
    Ok(cfg)
}

/// Parses scenario text; relative file references resolve against `base`.
pub fn parse_scenario(text: &str, base: &Path) -> Result<ScenarioConfig, HarnessError> {
    let keys = Keys::parse(text, scenario_key_allowed)?;
    let duration_ms: u64 = keys.require("scenario.duration_ms")?;
    if duration_ms == 0 || !duration_ms.is_multiple_of(10) {
        return Err(cfg_err("scenario.duration_ms", format!("{duration_ms} is not a positive multiple of 10 ms")));
    }
    let seed: u64 = keys.require("scenario.seed")?;
    let output_dir = resolve(base, &keys.get_or("scenario.output_dir", "out".to_string())?);
    let grid = parse_grid(&keys)?;
    let prop = propagation(&keys, seed)?;

    let transmitters_path = resolve(base, &keys.require::<String>("files.transmitters")?);
    let transmitters = load_transmitters(&transmitters_path).map_err(|e| cfg_err("files.transmitters", e))?;
    for tx in &transmitters {
        tx.validate(grid.len()).map_err(|e| cfg_err("files.transmitters", e))?;
    }

    let geodb_keys = ["geodb.required_rx_dbm", "geodb.grey_margin_m", "geodb.protection_ratio_db"];
    let geodb_path = keys.get::<String>("files.geodb")?.map(|p| resolve(base, &p));
    let geodb = match &geodb_path {
        Some(p) => {
            if let Some(k) = geodb_keys.iter().find(|k| keys.has(k)) {
                return Err(cfg_err(k, "conflicts with `files.geodb`"));
            }
            geodb::load(p, &prop, &grid).map_err(|e| cfg_err("files.geodb", e))?
        }
        None => {
            let required = keys.get_or("geodb.required_rx_dbm", GeoRecord::DEFAULT_REQUIRED_RX_DBM)?;
            let mut db = GeoDb::new(keys.get_or("geodb.grey_margin_m", 1000.0)?);
            db.protection_ratio_db = keys.get_or("geodb.protection_ratio_db", GeoDb::DEFAULT_PROTECTION_RATIO_DB)?;
            for tx in &transmitters {
                let rec = GeoRecord::from_transmitter(tx, required, &prop, &grid)
                    .map_err(|e| cfg_err("files.transmitters", e))?;
                db.insert(rec).map_err(|e| cfg_err("files.transmitters", e))?;
            }
            db
        }
    };

    let mut detector = match keys.get::<String>("detector.calibration")? {
        Some(p) => load_calibration(&resolve(base, &p)).map_err(|e| cfg_err("detector.calibration", e))?,
        None => DetectorConfig::committed(),
    };
    if let Some(t) = keys.get("detector.energy_threshold_dbm")? {
        detector.energy_threshold_dbm = Some(t);
    }
    if detector.threshold_dbm.is_none() {
        return Err(cfg_err("detector.calibration", "calibration has no threshold_dbm"));
    }

    let handover = HandoverConfig {
        retune_ms: keys.get_or("handover.retune_ms", 10)?,
        fusion: keys.get_or("handover.fusion", FusionRule::Or)?,
        confirm_frames: keys.get_or("handover.confirm_frames", 2)?,
    };
    if handover.confirm_frames == 0 {
        return Err(cfg_err("handover.confirm_frames", "must be at least 1"));
    }
    let traffic = TrafficConfig {
        packets_per_subframe: keys.get_or("traffic.packets_per_subframe", 10)?,
        random_loss: keys.get_or("traffic.random_loss", 0.0)?,
        inr_threshold_db: keys.get_or("traffic.inr_threshold_db", 0.0)?,
    };
    if !(0.0..=1.0).contains(&traffic.random_loss) {
        return Err(cfg_err("traffic.random_loss", "must lie in [0, 1]"));
    }
    let asm = AsmConfig {
        reuse_distance_m: keys.get_or("asm.reuse_distance_m", 2000.0)?,
        epoch_frames: keys.get_or("asm.epoch_frames", 100)?,
    };
    if asm.epoch_frames == 0 {
        return Err(cfg_err("asm.epoch_frames", "must be positive"));
    }
    let interference = if keys.get_or("interference.enabled", false)? {
        Some(study(&keys, prop.clone(), seed)?)
    } else {
        if let Some(k) = keys.keys().find(|k| STUDY_KEYS.contains(&k.as_str())) {
            return Err(cfg_err(k, "set without `interference.enabled = true`"));
        }
        None
    };

    Ok(ScenarioConfig {
        duration_ms,
        seed,
        output_dir,
        cenbs: parse_cenbs(&keys, &grid)?,
        grid,
        transmitters_path,
        transmitters,
        geodb_path,
        geodb,
        prop,
        detector,
        frame: parse_frame(&keys)?,
        handover,
        traffic,
        asm,
        interference,
    })
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, HarnessError> {
    let base = path.parent().unwrap_or(Path::new("."));
    parse_scenario(&read(path)?, base)
}

const ROC_KEYS: &[&str] = &[
    "detector.calibration",
    "detector.energy_threshold_dbm",
    "roc.powers_dbm",
    "roc.trials",
    "roc.seed",
    "roc.gain_trials",
    "calibrate.trials",
    "calibrate.seed",
];

/// Detector study: ROC levels plus the threshold calibration run.
#[derive(Debug, Clone, PartialEq)]
pub struct RocConfig {
    pub detector: DetectorConfig,
    pub powers_dbm: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Trials for the noise-statistic ratio; zero skips it.
    pub gain_trials: usize,
    pub calibrate_trials: usize,
    pub calibrate_seed: u64,
}

pub fn parse_roc_config(text: &str, base: &Path) -> Result<RocConfig, HarnessError> {
    let keys = Keys::parse(text, |k| ROC_KEYS.contains(&k))?;
    let mut detector = match keys.get::<String>("detector.calibration")? {
        Some(p) => load_calibration(&resolve(base, &p)).map_err(|e| cfg_err("detector.calibration", e))?,
        None => DetectorConfig::committed(),
    };
    if let Some(t) = keys.get("detector.energy_threshold_dbm")? {
        detector.energy_threshold_dbm = Some(t);
    }
    let cfg = RocConfig {
        detector,
        powers_dbm: keys
            .with("roc.powers_dbm", parse_acir_list)?
            .unwrap_or_else(|| (0..=10).map(|i| -130.0 + 2.0 * i as f64).collect()),
        trials: keys.get_or("roc.trials", 10_000)?,
        seed: keys.get_or("roc.seed", 1)?,
        gain_trials: keys.get_or("roc.gain_trials", 0)?,
        calibrate_trials: keys.get_or("calibrate.trials", 1_000_000)?,
        calibrate_seed: keys.get_or("calibrate.seed", 20_261_018)?,
    };
    if cfg.trials == 0 {
        return Err(cfg_err("roc.trials", "must be positive"));
    }
    Ok(cfg)
}

pub fn load_roc_config(path: &Path) -> Result<RocConfig, HarnessError> {
    let base = path.parent().unwrap_or(Path::new("."));
    parse_roc_config(&read(path)?, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TX: &str = "id,standard,channel,x_m,y_m,eirp_dbm,height_m,schedule\ntv1,PAL-D,13,50,0,0,30,1000:inf\n";

    fn dir() -> tempfile::TempDir {
        let d = tempfile::tempdir().unwrap();
        std::fs::write(d.path().join("tx.csv"), TX).unwrap();
        d
    }

    const MINIMAL: &str = "scenario.duration_ms = 2000\nscenario.seed = 7\nfiles.transmitters = tx.csv\n\
                           cenb.a.x_m = 0\ncenb.a.y_m = 0\n";

    #[test]
    fn minimal_gets_defaults() {
        let d = dir();
        let c = parse_scenario(MINIMAL, d.path()).unwrap();
        assert_eq!(c.grid.len(), 37);
        assert_eq!(c.handover.retune_ms, 10);
        assert_eq!(c.traffic.packets_per_subframe, 10);
        assert_eq!(c.cenbs[0].power_dbm, 20.0);
        assert_eq!(c.cenbs[0].initial_block, None);
        assert_eq!(c.output_dir, d.path().join("out"));
        assert_eq!(c.geodb.len(), 1);
        assert!(c.interference.is_none());
        assert_eq!(c.detector, DetectorConfig::committed());
    }

    #[test]
    fn unknown_key_named() {
        let d = dir();
        let err = parse_scenario(&format!("{MINIMAL}fooo = 1\n"), d.path()).unwrap_err();
        assert!(err.to_string().contains("`fooo`"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn duration_multiple_of_ten() {
        let d = dir();
        let err = parse_scenario(&MINIMAL.replace("2000", "1995"), d.path()).unwrap_err();
        assert!(err.to_string().contains("scenario.duration_ms"), "{err}");
    }

    #[test]
    fn missing_seed_and_file_named() {
        let d = dir();
        let err = parse_scenario(&MINIMAL.replace("scenario.seed = 7\n", ""), d.path()).unwrap_err();
        assert!(err.to_string().contains("scenario.seed"));
        let err = parse_scenario(&MINIMAL.replace("tx.csv", "nope.csv"), d.path()).unwrap_err();
        assert!(err.to_string().contains("files.transmitters"));
    }

    #[test]
    fn study_keys_need_enable() {
        let d = dir();
        let err = parse_scenario(&format!("{MINIMAL}interference.snapshots = 100\n"), d.path()).unwrap_err();
        assert!(err.to_string().contains("interference.snapshots"));
        let c =
            parse_scenario(&format!("{MINIMAL}[interference]\nenabled = true\nacir_db = 0:10:5\n"), d.path()).unwrap();
        let s = c.interference.unwrap();
        assert_eq!(s.acir_db, vec![0.0, 5.0, 10.0]);
        assert_eq!(s.seed, 7);
    }

    #[test]
    fn study_file() {
        let s = parse_study("[interference]\nsnapshots = 200\nguard_map = 10:1,20:2\n[propagation]\nexponent = 3\n")
            .unwrap();
        assert_eq!(s.snapshots, 200);
        assert_eq!(s.prop.exponent, 3.0);
        assert_eq!(s.guard_map.entries().len(), 2);
        assert!(parse_study("scenario.seed = 1\n").is_err());
    }

    #[test]
    fn bad_initial_block() {
        let d = dir();
        let err = parse_scenario(&format!("{MINIMAL}cenb.a.initial_block = 3,5\n"), d.path()).unwrap_err();
        assert!(err.to_string().contains("cenb.a.initial_block"));
    }
}
