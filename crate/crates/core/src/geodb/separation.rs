use std::io::{Read, Write};

use super::GeoError;
use crate::radio_env::PropagationConfig;

/// Required separation from a protected contour, tabulated on a grid of
/// WSD transmit power (rows) by antenna height (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationTable {
    pub powers_dbm: Vec<f64>,
    pub heights_m: Vec<f64>,
    /// `distances_m[row][col]` for `powers_dbm[row]`, `heights_m[col]`.
    pub distances_m: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationLookup {
    pub distance_m: f64,
    /// Set when an input fell outside the table and was clamped to its edge.
    pub clamped: bool,
}

impl SeparationTable {
    pub fn new(powers_dbm: Vec<f64>, heights_m: Vec<f64>, distances_m: Vec<Vec<f64>>) -> Result<Self, GeoError> {
        let t = Self { powers_dbm, heights_m, distances_m };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<(), GeoError> {
        let err = |m: &str| Err(GeoError::Table(m.into()));
        if self.powers_dbm.is_empty() || self.heights_m.is_empty() {
            return err("table needs at least one power and one height");
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&self.powers_dbm) || !increasing(&self.heights_m) {
            return err("axes must be strictly increasing");
        }
        if self.distances_m.len() != self.powers_dbm.len()
            || self.distances_m.iter().any(|r| r.len() != self.heights_m.len())
        {
            return err("matrix shape does not match axes");
        }
        let rows_ok = self.distances_m.iter().all(|r| r.windows(2).all(|w| w[0] <= w[1]));
        let cols_ok = self.distances_m.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
        if !rows_ok || !cols_ok {
            return err("distances must be non-decreasing in power and height");
        }
        Ok(())
    }

    /// Table from the log-distance contour law: the distance at which a
    /// device of power `p` and height gain `20 log10(h / 1.5 m)` reaches
    /// `floor_dbm`. Illustrative defaults, not regulatory values.
    pub fn from_contour(
        prop: &PropagationConfig,
        floor_dbm: f64,
        freq_mhz: f64,
        powers_dbm: &[f64],
        heights_m: &[f64],
    ) -> Result<Self, GeoError> {
        let rows = powers_dbm
            .iter()
            .map(|p| {
                heights_m
                    .iter()
                    .map(|h| {
                        let gain = 20.0 * (h / 1.5).log10().max(0.0);
                        prop.distance_for_loss(p + gain - floor_dbm, freq_mhz)
                    })
                    .collect()
            })
            .collect();
        Self::new(powers_dbm.to_vec(), heights_m.to_vec(), rows)
    }

    /// 4 powers x 3 heights at 700 MHz against a -107 dBm floor
    /// (-84 dBm required level, 23 dB protection ratio).
    pub fn default_table() -> Self {
        Self::from_contour(&PropagationConfig::default(), -107.0, 700.0, &[10.0, 20.0, 30.0, 36.0], &[1.5, 10.0, 30.0])
            .expect("default table is monotone")
    }

    /// Bilinear interpolation, clamping out-of-hull inputs to the edge.
    pub fn lookup(&self, power_dbm: f64, height_m: f64) -> SeparationLookup {
        let (i0, i1, tp, cp) = bracket(&self.powers_dbm, power_dbm);
        let (j0, j1, th, ch) = bracket(&self.heights_m, height_m);
        let d = &self.distances_m;
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        let low = lerp(d[i0][j0], d[i0][j1], th);
        let high = lerp(d[i1][j0], d[i1][j1], th);
        SeparationLookup { distance_m: lerp(low, high, tp), clamped: cp || ch }
    }

    /// CSV matrix: header `power_dbm,<h1>,<h2>,...`, then one row per power.
    pub fn parse<R: Read>(reader: R) -> Result<Self, GeoError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| GeoError::Parse { line: 1, message: e.to_string() })?.clone();
        if headers.get(0) != Some("power_dbm") {
            return Err(GeoError::Parse { line: 1, message: "first column must be `power_dbm`".into() });
        }
        let heights = headers
            .iter()
            .skip(1)
            .map(|h| h.parse::<f64>().map_err(|_| GeoError::Parse { line: 1, message: format!("bad height `{h}`") }))
            .collect::<Result<Vec<_>, _>>()?;
        let mut powers = Vec::new();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec
                .map_err(|e| GeoError::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() })?;
            let line = rec.position().map_or(0, |p| p.line());
            let vals = rec
                .iter()
                .map(|v| v.parse::<f64>().map_err(|_| GeoError::Parse { line, message: format!("bad number `{v}`") }))
                .collect::<Result<Vec<_>, _>>()?;
            powers.push(vals[0]);
            rows.push(vals[1..].to_vec());
        }
        Self::new(powers, heights, rows)
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "power_dbm")?;
        for h in &self.heights_m {
            write!(w, ",{h}")?;
        }
        writeln!(w)?;
        for (p, row) in self.powers_dbm.iter().zip(&self.distances_m) {
            write!(w, "{p}")?;
            for v in row {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Lower/upper indices, interpolation weight and clamp flag for `x` on `axis`.
fn bracket(axis: &[f64], x: f64) -> (usize, usize, f64, bool) {
    let n = axis.len();
    if x <= axis[0] {
        return (0, 0, 0.0, x < axis[0]);
    }
    if x >= axis[n - 1] {
        return (n - 1, n - 1, 0.0, x > axis[n - 1]);
    }
    let hi = axis.partition_point(|&a| a <= x);
    let lo = hi - 1;
    (lo, hi, (x - axis[lo]) / (axis[hi] - axis[lo]), false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> SeparationTable {
        SeparationTable::new(vec![10.0, 20.0], vec![5.0, 15.0], vec![vec![100.0, 200.0], vec![300.0, 600.0]]).unwrap()
    }

    #[test]
    fn corner_hits_are_exact() {
        let t = square();
        assert_eq!(t.lookup(10.0, 5.0), SeparationLookup { distance_m: 100.0, clamped: false });
        assert_eq!(t.lookup(20.0, 15.0).distance_m, 600.0);
    }

    #[test]
    fn cell_midpoint_is_corner_mean() {
        let t = square();
        let got = t.lookup(15.0, 10.0);
        assert!((got.distance_m - 300.0).abs() < 1e-12);
        assert!(!got.clamped);
    }

    #[test]
    fn out_of_hull_is_clamped() {
        let t = square();
        let got = t.lookup(0.0, 5.0);
        assert_eq!(got, SeparationLookup { distance_m: 100.0, clamped: true });
        assert!(t.lookup(15.0, 99.0).clamped);
    }

    #[test]
    fn non_monotone_rejected() {
        assert!(SeparationTable::new(vec![10.0, 20.0], vec![5.0], vec![vec![200.0], vec![100.0]]).is_err());
        assert!(SeparationTable::new(vec![20.0, 10.0], vec![5.0], vec![vec![1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn default_table_shape_and_csv() {
        let t = SeparationTable::default_table();
        assert_eq!(t.powers_dbm.len(), 4);
        assert_eq!(t.heights_m.len(), 3);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert_eq!(SeparationTable::parse(buf.as_slice()).unwrap(), t);
    }
}
