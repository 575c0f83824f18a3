use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use super::analysis::{band_duty, ThresholdRule};
use super::{OccupancyError, OccupancyMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct Subband {
    pub low_mhz: f64,
    pub high_mhz: f64,
    pub label: String,
}

impl Subband {
    pub fn bandwidth_mhz(&self) -> f64 {
        self.high_mhz - self.low_mhz
    }
}

/// Sub-band table CSV `low_mhz,high_mhz,label`.
pub fn parse_subbands<R: Read>(reader: R) -> Result<Vec<Subband>, OccupancyError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let herr = |m: String| OccupancyError::Parse { row: 0, line: 1, message: m };
    let headers = rdr.headers().map_err(|e| herr(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["low_mhz", "high_mhz", "label"] {
        return Err(herr("expected header `low_mhz,high_mhz,label`".into()));
    }
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| OccupancyError::Parse {
            row,
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize| {
            rec[i].parse::<f64>().map_err(|_| OccupancyError::Parse {
                row,
                line,
                message: format!("bad frequency `{}`", &rec[i]),
            })
        };
        out.push(Subband { low_mhz: num(0)?, high_mhz: num(1)?, label: rec[2].to_string() });
    }
    Ok(out)
}

pub fn load_subbands(path: &Path) -> Result<Vec<Subband>, OccupancyError> {
    let f =
        std::fs::File::open(path).map_err(|source| OccupancyError::Io { path: path.display().to_string(), source })?;
    parse_subbands(f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub subband: Subband,
    pub occupancy: f64,
    pub threshold_dbm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandSummary {
    pub site: String,
    pub rule: ThresholdRule,
    pub rows: Vec<SummaryRow>,
    /// Bandwidth-weighted mean of the rows.
    pub overall: f64,
}

pub fn summarize_band(
    m: &OccupancyMatrix,
    subbands: &[Subband],
    rule: &ThresholdRule,
) -> Result<BandSummary, OccupancyError> {
    rule.validate()?;
    if let Some(s) = subbands.iter().find(|s| !(s.low_mhz < s.high_mhz)) {
        return Err(OccupancyError::Validation(format!("empty sub-band `{}`", s.label)));
    }
    let mut sorted: Vec<&Subband> = subbands.iter().collect();
    sorted.sort_by(|a, b| a.low_mhz.total_cmp(&b.low_mhz));
    if let Some(w) = sorted.windows(2).find(|w| w[1].low_mhz < w[0].high_mhz) {
        return Err(OccupancyError::Validation(format!("sub-bands `{}` and `{}` overlap", w[0].label, w[1].label)));
    }
    let mut rows = Vec::with_capacity(subbands.len());
    let (mut weighted, mut width) = (0.0, 0.0);
    for s in subbands {
        let (occupancy, threshold_dbm) = band_duty(m, s.low_mhz, s.high_mhz, rule)?;
        weighted += occupancy * s.bandwidth_mhz();
        width += s.bandwidth_mhz();
        rows.push(SummaryRow { subband: s.clone(), occupancy, threshold_dbm });
    }
    let overall = if width > 0.0 { weighted / width } else { 0.0 };
    Ok(BandSummary { site: m.meta.site.clone(), rule: *rule, rows, overall })
}

impl BandSummary {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "low_mhz,high_mhz,bandwidth_mhz,occupancy,threshold_dbm,label")?;
        for r in &self.rows {
            let s = &r.subband;
            let label = if s.label.contains([',', '"']) {
                format!("\"{}\"", s.label.replace('"', "\"\""))
            } else {
                s.label.clone()
            };
            writeln!(
                w,
                "{},{},{},{},{},{}",
                s.low_mhz,
                s.high_mhz,
                s.bandwidth_mhz(),
                r.occupancy,
                r.threshold_dbm,
                label
            )?;
        }
        let total: f64 = self.rows.iter().map(|r| r.subband.bandwidth_mhz()).sum();
        writeln!(w, ",,{},{},,overall", total, self.overall)
    }
}

impl fmt::Display for BandSummary {
    /// Aligned text table with the threshold rule in the header.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "site: {}  threshold: {}", self.site, self.rule)?;
        writeln!(f, "{:<18} {:>10} {:>10}  label", "subband", "bandwidth", "occupancy")?;
        for r in &self.rows {
            let s = &r.subband;
            writeln!(
                f,
                "{:<18} {:>6} MHz {:>9.2}%  {}",
                format!("{}~{} MHz", s.low_mhz, s.high_mhz),
                s.bandwidth_mhz(),
                100.0 * r.occupancy,
                s.label
            )?;
        }
        let total: f64 = self.rows.iter().map(|r| r.subband.bandwidth_mhz()).sum();
        writeln!(f, "{:<18} {:>6} MHz {:>9.2}%", "overall", total, 100.0 * self.overall)
    }
}

#[cfg(test)]
mod tests {
    use super::super::TraceMeta;
    use super::*;

    fn flat(lo: f64, hi: f64, rbw: f64, hot: impl Fn(f64) -> bool) -> OccupancyMatrix {
        let n = ((hi - lo) / rbw).round() as usize;
        let freqs: Vec<f64> = (0..n).map(|i| lo + rbw * (i as f64 + 0.5)).collect();
        let row: Vec<f64> = freqs.iter().map(|&f| if hot(f) { -50.0 } else { -110.0 }).collect();
        let meta = TraceMeta { site: "fixture".into(), rbw_khz: rbw * 1e3, positions: None };
        OccupancyMatrix::new(vec![0], freqs, vec![row], meta).unwrap()
    }

    fn sb(lo: f64, hi: f64, label: &str) -> Subband {
        Subband { low_mhz: lo, high_mhz: hi, label: label.into() }
    }

    #[test]
    fn single_subband_is_overall() {
        let m = flat(100.0, 110.0, 1.0, |f| f < 103.0);
        let s = summarize_band(&m, &[sb(100.0, 110.0, "all")], &ThresholdRule::Fixed { dbm: -80.0 }).unwrap();
        assert_eq!(s.overall, s.rows[0].occupancy);
        assert!((s.overall - 0.3).abs() < 1e-12);
    }

    #[test]
    fn weighted_mean_of_equal_widths() {
        // 0.2 of the first ten bins and 0.4 of the second ten are hot.
        let m = flat(0.0, 20.0, 1.0, |f| f < 2.0 || (10.0..14.0).contains(&f));
        let s = summarize_band(&m, &[sb(0.0, 10.0, "a"), sb(10.0, 20.0, "b")], &ThresholdRule::Fixed { dbm: -80.0 })
            .unwrap();
        assert!((s.rows[0].occupancy - 0.2).abs() < 1e-12);
        assert!((s.rows[1].occupancy - 0.4).abs() < 1e-12);
        assert!((s.overall - 0.3).abs() < 1e-12);
    }

    #[test]
    fn overlap_rejected() {
        let m = flat(0.0, 20.0, 1.0, |_| false);
        let err = summarize_band(&m, &[sb(0.0, 12.0, "a"), sb(10.0, 20.0, "b")], &ThresholdRule::default());
        assert!(matches!(err, Err(OccupancyError::Validation(_))));
    }

    #[test]
    fn shipped_table_renders_nine_rows() {
        let bands = parse_subbands(include_str!("../../data/japan_subbands.csv").as_bytes()).unwrap();
        assert_eq!(bands.len(), 9);
        let m = flat(90.0, 3000.0, 2.0, |f| (470.0..500.0).contains(&f));
        let s = summarize_band(&m, &bands, &ThresholdRule::Fixed { dbm: -80.0 }).unwrap();
        let text = s.to_string();
        assert_eq!(text.lines().count(), 2 + 9 + 1);
        let mut csv = Vec::new();
        s.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1 + 9 + 1);
        let expect = 30.0 / 2910.0;
        assert!((s.overall - expect).abs() < 1e-12);
    }
}
