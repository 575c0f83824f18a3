//! Geo-location database of protected TV services and the black / grey /
//! white region rule for co-channel reuse.
//!
//! A location is black for a channel when it lies inside any co-channel
//! protected contour. It is white when a CeNB at its maximum EIRP cannot
//! push any contour-edge receiver above the TV protection floor (required
//! receive level minus the protection ratio), with `grey_margin_m` of extra
//! clearance. Everything in between is grey: reuse requires sensing.

mod persist;
mod separation;

pub use persist::{load, parse, save, write};
pub use separation::{SeparationLookup, SeparationTable};

use std::collections::BTreeMap;
use std::fmt;

use crate::radio_env::{ChannelGrid, Point, PropagationConfig, RadioError, TvStandard, TvTransmitter};

#[derive(Debug, thiserror::Error)]
pub enum GeoError {
    #[error("degenerate contour for {id}: required level unattainable at the reference distance")]
    DegenerateContour { id: String },
    #[error("channel {0} is not in the grid")]
    Range(usize),
    #[error("duplicate record key `{0}`")]
    DuplicateKey(String),
    #[error("invalid record {id}: {message}")]
    InvalidRecord { id: String, message: String },
    #[error("invalid separation table: {0}")]
    Table(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error(transparent)]
    Radio(#[from] RadioError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Region permissiveness; the derived order is Black < Grey < White.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    Black,
    Grey,
    White,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Region::Black => "Black",
            Region::Grey => "Grey",
            Region::White => "White",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeoRecord {
    pub id: String,
    pub standard: TvStandard,
    pub channel_index: usize,
    pub location: Point,
    pub eirp_dbm: f64,
    pub height_m: f64,
    pub required_rx_dbm: f64,
    pub protected_radius_m: f64,
}

impl GeoRecord {
    pub const DEFAULT_REQUIRED_RX_DBM: f64 = -84.0;

    /// Record for `tx` with its contour computed from `prop`.
    pub fn from_transmitter(
        tx: &TvTransmitter,
        required_rx_dbm: f64,
        prop: &PropagationConfig,
        grid: &ChannelGrid,
    ) -> Result<Self, GeoError> {
        let mut rec = GeoRecord {
            id: tx.id.clone(),
            standard: tx.standard,
            channel_index: tx.channel_index,
            location: tx.location,
            eirp_dbm: tx.eirp_dbm,
            height_m: tx.antenna_height_m,
            required_rx_dbm,
            protected_radius_m: f64::NAN,
        };
        rec.protected_radius_m = protected_radius(&rec, prop, grid)?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        let bad = |m: &str| GeoError::InvalidRecord { id: self.id.clone(), message: m.into() };
        if !(self.protected_radius_m > 0.0) {
            return Err(bad("protected radius must be positive"));
        }
        if !(self.required_rx_dbm < self.eirp_dbm) {
            return Err(bad("required receive level must be below EIRP"));
        }
        Ok(())
    }
}

/// Largest distance at which the median received level still meets
/// `required_rx_dbm`, from the closed-form inverse of the log-distance law.
pub fn protected_radius(rec: &GeoRecord, prop: &PropagationConfig, grid: &ChannelGrid) -> Result<f64, GeoError> {
    prop.validate()?;
    let ch = grid.channel(rec.channel_index).ok_or(GeoError::Range(rec.channel_index))?;
    let budget = rec.eirp_dbm - rec.required_rx_dbm;
    if budget < prop.ref_loss_at(ch.center_mhz()) - 1e-9 {
        return Err(GeoError::DegenerateContour { id: rec.id.clone() });
    }
    Ok(prop.distance_for_loss(budget, ch.center_mhz()).max(prop.ref_distance_m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeoDb {
    records: BTreeMap<String, GeoRecord>,
    pub grey_margin_m: f64,
    /// Co-channel protection ratio (dB) separating the required TV level
    /// from the tolerable interference floor.
    pub protection_ratio_db: f64,
    version: u64,
}

impl Default for GeoDb {
    fn default() -> Self {
        Self::new(1000.0)
    }
}

impl GeoDb {
    pub const DEFAULT_PROTECTION_RATIO_DB: f64 = 23.0;

    pub fn new(grey_margin_m: f64) -> Self {
        Self {
            records: BTreeMap::new(),
            grey_margin_m,
            protection_ratio_db: Self::DEFAULT_PROTECTION_RATIO_DB,
            version: 0,
        }
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub(crate) fn set_version(&mut self, v: u64) {
        self.version = v;
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records in key order.
    pub fn records(&self) -> impl Iterator<Item = &GeoRecord> {
        self.records.values()
    }

    pub fn get(&self, id: &str) -> Option<&GeoRecord> {
        self.records.get(id)
    }

    pub fn insert(&mut self, rec: GeoRecord) -> Result<(), GeoError> {
        rec.validate()?;
        if self.records.contains_key(&rec.id) {
            return Err(GeoError::DuplicateKey(rec.id));
        }
        self.records.insert(rec.id.clone(), rec);
        self.version += 1;
        Ok(())
    }

    /// Inserts or replaces the record with the same key.
    pub fn upsert(&mut self, rec: GeoRecord) -> Result<(), GeoError> {
        rec.validate()?;
        self.records.insert(rec.id.clone(), rec);
        self.version += 1;
        Ok(())
    }

    pub fn remove(&mut self, id: &str) -> Option<GeoRecord> {
        let r = self.records.remove(id);
        if r.is_some() {
            self.version += 1;
        }
        r
    }

    pub fn co_channel(&self, channel_index: usize) -> impl Iterator<Item = &GeoRecord> {
        self.records.values().filter(move |r| r.channel_index == channel_index)
    }

    /// Distance at which a CeNB at `cenb_eirp_dbm` falls to the protection
    /// floor of `rec`.
    pub fn interference_range_m(
        &self,
        rec: &GeoRecord,
        cenb_eirp_dbm: f64,
        prop: &PropagationConfig,
        freq_mhz: f64,
    ) -> f64 {
        let floor = rec.required_rx_dbm - self.protection_ratio_db;
        prop.distance_for_loss(cenb_eirp_dbm - floor, freq_mhz)
    }

    /// Black / grey / white crossover distances from `rec`'s transmitter.
    pub fn crossover_radii(
        &self,
        rec: &GeoRecord,
        cenb_eirp_dbm: f64,
        prop: &PropagationConfig,
        grid: &ChannelGrid,
    ) -> Result<(f64, f64), GeoError> {
        let ch = grid.channel(rec.channel_index).ok_or(GeoError::Range(rec.channel_index))?;
        let reach = self.interference_range_m(rec, cenb_eirp_dbm, prop, ch.center_mhz());
        Ok((rec.protected_radius_m, rec.protected_radius_m + reach + self.grey_margin_m))
    }
}

pub fn classify_region(
    db: &GeoDb,
    point: Point,
    channel_index: usize,
    cenb_max_eirp_dbm: f64,
    prop: &PropagationConfig,
    grid: &ChannelGrid,
) -> Result<Region, GeoError> {
    let ch = grid.channel(channel_index).ok_or(GeoError::Range(channel_index))?;
    let mut region = Region::White;
    for rec in db.co_channel(channel_index) {
        let d = point.distance(&rec.location);
        if d <= rec.protected_radius_m {
            return Ok(Region::Black);
        }
        let reach = db.interference_range_m(rec, cenb_max_eirp_dbm, prop, ch.center_mhz());
        if d - rec.protected_radius_m <= reach + db.grey_margin_m {
            region = Region::Grey;
        }
    }
    Ok(region)
}

/// Region of every grid channel at `point`: white channels are usable
/// without sensing, grey ones only with sensing.
pub fn query_vacant_channels(
    db: &GeoDb,
    point: Point,
    cenb_max_eirp_dbm: f64,
    prop: &PropagationConfig,
    grid: &ChannelGrid,
) -> Vec<(usize, Region)> {
    grid.channels()
        .iter()
        .map(|ch| {
            let r =
                classify_region(db, point, ch.index, cenb_max_eirp_dbm, prop, grid).expect("grid channel is in range");
            (ch.index, r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio_env::{china_tv_grid, free_space_loss_db};

    fn prop() -> PropagationConfig {
        PropagationConfig::default()
    }

    fn record(id: &str, ch: usize, x: f64, eirp: f64) -> GeoRecord {
        let tx = TvTransmitter::new(id, TvStandard::AnalogPalD, ch, Point::new(x, 0.0), eirp);
        GeoRecord::from_transmitter(&tx, -84.0, &prop(), &china_tv_grid()).unwrap()
    }

    #[test]
    fn radius_at_reference_boundary() {
        let grid = china_tv_grid();
        let f = grid.channel(5).unwrap().center_mhz();
        let eirp = -84.0 + free_space_loss_db(1.0, f);
        let mut rec = record("a", 5, 0.0, 60.0);
        rec.eirp_dbm = eirp;
        let r = protected_radius(&rec, &prop(), &grid).unwrap();
        assert!((r - 1.0).abs() < 1e-9, "{r}");
        rec.eirp_dbm = eirp - 0.5;
        assert!(matches!(protected_radius(&rec, &prop(), &grid), Err(GeoError::DegenerateContour { .. })));
    }

    #[test]
    fn radius_closed_form_example() {
        // 60 dBm EIRP, -84 dBm required, n = 3.5, ref loss fixed at 29.3 dB.
        let cfg = PropagationConfig { ref_loss_db: Some(29.3), ..prop() };
        let mut rec = record("a", 0, 0.0, 60.0);
        rec.protected_radius_m = 1.0;
        let r = protected_radius(&rec, &cfg, &china_tv_grid()).unwrap();
        let by_hand = 10f64.powf((60.0 + 84.0 - 29.3) / 35.0);
        assert!((r - by_hand).abs() < 1e-9);
        assert!((r - 1893.0).abs() < 1.0);
    }

    #[test]
    fn margin_of_35log2_doubles_radius() {
        let grid = china_tv_grid();
        let a = record("a", 3, 0.0, 50.0);
        let mut b = a.clone();
        b.eirp_dbm += 35.0 * 2f64.log10();
        let ra = protected_radius(&a, &prop(), &grid).unwrap();
        let rb = protected_radius(&b, &prop(), &grid).unwrap();
        assert!((rb / ra - 2.0).abs() < 1e-9);
    }

    #[test]
    fn received_level_at_contour_equals_requirement() {
        let grid = china_tv_grid();
        let rec = record("a", 7, 0.0, 55.0);
        let f = grid.channel(7).unwrap().center_mhz();
        let rx = rec.eirp_dbm - prop().median_loss_db(rec.protected_radius_m, f).unwrap();
        assert!((rx - rec.required_rx_dbm).abs() < 0.01);
    }

    #[test]
    fn trivial_regions() {
        let grid = china_tv_grid();
        let mut db = GeoDb::default();
        assert_eq!(classify_region(&db, Point::default(), 4, 20.0, &prop(), &grid).unwrap(), Region::White);
        db.insert(record("a", 4, 0.0, 60.0)).unwrap();
        assert_eq!(classify_region(&db, Point::default(), 4, 20.0, &prop(), &grid).unwrap(), Region::Black);
        assert!(matches!(classify_region(&db, Point::default(), 99, 20.0, &prop(), &grid), Err(GeoError::Range(99))));
    }

    #[test]
    fn query_marks_only_co_channel() {
        let grid = china_tv_grid();
        let mut db = GeoDb::default();
        assert!(query_vacant_channels(&db, Point::default(), 20.0, &prop(), &grid)
            .iter()
            .all(|(_, r)| *r == Region::White));
        db.insert(record("a", 10, 100.0, 60.0)).unwrap();
        let q = query_vacant_channels(&db, Point::default(), 20.0, &prop(), &grid);
        assert_eq!(q.len(), 37);
        for (ch, r) in q {
            // Channels 9 and 11 are adjacent to the service but unaffected.
            assert_eq!(r, if ch == 10 { Region::Black } else { Region::White });
        }
    }

    #[test]
    fn version_tracks_mutations() {
        let mut db = GeoDb::default();
        db.insert(record("a", 1, 0.0, 60.0)).unwrap();
        db.upsert(record("a", 1, 5.0, 60.0)).unwrap();
        assert!(matches!(db.insert(record("a", 1, 0.0, 60.0)), Err(GeoError::DuplicateKey(_))));
        assert_eq!(db.version(), 2);
        assert!(db.remove("zzz").is_none());
        assert!(db.remove("a").is_some());
        assert_eq!(db.version(), 3);
    }

    #[test]
    fn region_order() {
        assert!(Region::Black < Region::Grey && Region::Grey < Region::White);
    }
}
