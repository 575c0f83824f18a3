//! Spectrum-measurement analytics over time x frequency power matrices:
//! duty cycles, three-way channel classification, daily periodicity and
//! sub-band summaries.
//!
//! Every statistic is relative to a threshold; reports carry it in their
//! header.

mod analysis;
mod periodicity;
mod summary;

pub use analysis::{
    classify_channel, duty_cycle, duty_cycle_channels, ChannelClass, Classification, DutyCycles, ThresholdRule,
};
pub use periodicity::{band_occupancy_series, detect_periodicity, Periodicity};
pub use summary::{load_subbands, parse_subbands, summarize_band, BandSummary, Subband, SummaryRow};

use std::io::Read;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum OccupancyError {
    #[error("row {row} (line {line}): {message}")]
    Parse { row: usize, line: u64, message: String },
    #[error("trace does not cover {low_mhz}-{high_mhz} MHz")]
    Coverage { low_mhz: f64, high_mhz: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceMeta {
    pub site: String,
    /// Bin spacing; zero for single-bin traces.
    pub rbw_khz: f64,
    /// Per-row (lat, lon) for mobile measurements.
    pub positions: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMatrix {
    pub timestamps_ms: Vec<u64>,
    /// Ascending bin centres.
    pub freqs_mhz: Vec<f64>,
    /// `power_dbm[t][f]`.
    pub power_dbm: Vec<Vec<f64>>,
    pub meta: TraceMeta,
}

impl OccupancyMatrix {
    pub fn new(
        timestamps_ms: Vec<u64>,
        freqs_mhz: Vec<f64>,
        power_dbm: Vec<Vec<f64>>,
        meta: TraceMeta,
    ) -> Result<Self, OccupancyError> {
        let bad = |m: String| Err(OccupancyError::Validation(m));
        if freqs_mhz.is_empty() {
            return bad("no frequency bins".into());
        }
        if !freqs_mhz.windows(2).all(|w| w[0] < w[1]) {
            return bad("frequencies must be strictly increasing".into());
        }
        if !timestamps_ms.windows(2).all(|w| w[0] < w[1]) {
            return bad("timestamps must be strictly increasing".into());
        }
        if power_dbm.len() != timestamps_ms.len() {
            return bad(format!("{} rows for {} timestamps", power_dbm.len(), timestamps_ms.len()));
        }
        if let Some(i) = power_dbm.iter().position(|r| r.len() != freqs_mhz.len()) {
            return bad(format!("row {i} has {} cells, expected {}", power_dbm[i].len(), freqs_mhz.len()));
        }
        if power_dbm.iter().flatten().any(|p| p.is_nan()) {
            return bad("NaN power".into());
        }
        Ok(Self { timestamps_ms, freqs_mhz, power_dbm, meta })
    }

    pub fn rbw_mhz(&self) -> f64 {
        self.meta.rbw_khz * 1e-3
    }

    /// Indices of bins whose centres fall in `[low, high)`, or a coverage
    /// error when the trace does not span the whole range.
    pub fn bins_in(&self, low_mhz: f64, high_mhz: f64) -> Result<std::ops::Range<usize>, OccupancyError> {
        let half = self.rbw_mhz() / 2.0;
        let eps = 1e-6;
        let first = self.freqs_mhz[0] - half;
        let last = self.freqs_mhz[self.freqs_mhz.len() - 1] + half;
        let start = self.freqs_mhz.partition_point(|&f| f < low_mhz);
        let end = self.freqs_mhz.partition_point(|&f| f < high_mhz);
        if low_mhz < first - eps || high_mhz > last + eps || start == end {
            return Err(OccupancyError::Coverage { low_mhz, high_mhz });
        }
        Ok(start..end)
    }

    pub fn cells(&self, bins: std::ops::Range<usize>) -> impl Iterator<Item = f64> + '_ {
        self.power_dbm.iter().flat_map(move |row| row[bins.clone()].iter().copied())
    }
}

/// Reads a trace CSV `t_ms,[lat,lon,]p_<f1>,p_<f2>,...`.
pub fn parse_trace<R: Read>(reader: R, site: &str) -> Result<OccupancyMatrix, OccupancyError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
    let herr = |m: String| OccupancyError::Parse { row: 0, line: 1, message: m };
    let headers = rdr.headers().map_err(|e| herr(e.to_string()))?.clone();
    if headers.get(0) != Some("t_ms") {
        return Err(herr("first column must be `t_ms`".into()));
    }
    let mobile = headers.get(1) == Some("lat");
    if mobile && headers.get(2) != Some("lon") {
        return Err(herr("`lat` must be followed by `lon`".into()));
    }
    let skip = if mobile { 3 } else { 1 };
    let freqs = headers
        .iter()
        .skip(skip)
        .map(|h| {
            h.strip_prefix("p_")
                .and_then(|f| f.parse::<f64>().ok())
                .ok_or_else(|| herr(format!("bad power column `{h}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut times = Vec::new();
    let mut rows = Vec::new();
    let mut positions = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| OccupancyError::Parse {
            row,
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let perr = |message: String| OccupancyError::Parse { row, line, message };
        if rec.len() != headers.len() {
            return Err(perr(format!("{} fields, expected {}", rec.len(), headers.len())));
        }
        let t: u64 = rec[0].parse().map_err(|_| perr(format!("bad timestamp `{}`", &rec[0])))?;
        if times.last().is_some_and(|&prev| t <= prev) {
            return Err(perr(format!("timestamp {t} does not increase")));
        }
        let num = |i: usize| -> Result<f64, OccupancyError> {
            let v: f64 = rec[i].parse().map_err(|_| perr(format!("bad number `{}`", &rec[i])))?;
            if v.is_nan() {
                return Err(perr(format!("NaN in column {}", &headers[i])));
            }
            Ok(v)
        };
        if mobile {
            positions.push((num(1)?, num(2)?));
        }
        rows.push((skip..rec.len()).map(num).collect::<Result<Vec<_>, _>>()?);
        times.push(t);
    }
    let rbw_khz = if freqs.len() > 1 { (freqs[1] - freqs[0]) * 1e3 } else { 0.0 };
    let meta = TraceMeta { site: site.into(), rbw_khz, positions: mobile.then_some(positions) };
    OccupancyMatrix::new(times, freqs, rows, meta)
}

pub fn ingest_trace(path: &Path) -> Result<OccupancyMatrix, OccupancyError> {
    let f =
        std::fs::File::open(path).map_err(|source| OccupancyError::Io { path: path.display().to_string(), source })?;
    let site = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_trace(f, &site)
}
