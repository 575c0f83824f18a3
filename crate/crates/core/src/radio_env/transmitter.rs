use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::{Point, RadioError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TvStandard {
    AnalogPalD,
    DigitalDtmb,
}

impl FromStr for TvStandard {
    type Err = RadioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "pald" | "analogpald" | "atv" => Ok(Self::AnalogPalD),
            "dtmb" | "digitaldtmb" | "dtv" => Ok(Self::DigitalDtmb),
            other => Err(RadioError::Config(format!("unknown TV standard `{other}`"))),
        }
    }
}

impl fmt::Display for TvStandard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::AnalogPalD => "PAL-D",
            Self::DigitalDtmb => "DTMB",
        })
    }
}

/// Transmitter is on for `on_ms <= t < off_ms`; `off_ms = None` never ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OnInterval {
    pub on_ms: u64,
    pub off_ms: Option<u64>,
}

impl OnInterval {
    pub fn contains(&self, t_ms: u64) -> bool {
        t_ms >= self.on_ms && self.off_ms.is_none_or(|off| t_ms < off)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvTransmitter {
    pub id: String,
    pub standard: TvStandard,
    pub channel_index: usize,
    pub location: Point,
    pub eirp_dbm: f64,
    pub antenna_height_m: f64,
    /// Empty schedule means always on.
    pub schedule: Vec<OnInterval>,
}

impl TvTransmitter {
    pub fn new(
        id: impl Into<String>,
        standard: TvStandard,
        channel_index: usize,
        location: Point,
        eirp_dbm: f64,
    ) -> Self {
        Self {
            id: id.into(),
            standard,
            channel_index,
            location,
            eirp_dbm,
            antenna_height_m: 30.0,
            schedule: Vec::new(),
        }
    }

    pub fn is_active(&self, t_ms: u64) -> bool {
        self.schedule.is_empty() || self.schedule.iter().any(|iv| iv.contains(t_ms))
    }

    /// Whether the transmitter is on at any instant of `[from_ms, to_ms)`.
    pub fn active_during(&self, from_ms: u64, to_ms: u64) -> bool {
        if self.schedule.is_empty() {
            return true;
        }
        self.schedule.iter().any(|iv| iv.on_ms < to_ms && iv.off_ms.is_none_or(|off| off > from_ms))
    }

    pub fn validate(&self, n_channels: usize) -> Result<(), RadioError> {
        if self.channel_index >= n_channels {
            return Err(RadioError::Config(format!(
                "transmitter {}: channel {} outside grid of {n_channels}",
                self.id, self.channel_index
            )));
        }
        for w in self.schedule.windows(2) {
            let prev_end = w[0].off_ms.ok_or_else(|| {
                RadioError::Config(format!("transmitter {}: open interval before end of schedule", self.id))
            })?;
            if w[1].on_ms < prev_end {
                return Err(RadioError::Config(format!(
                    "transmitter {}: schedule intervals overlap or are unsorted",
                    self.id
                )));
            }
        }
        if self.schedule.iter().any(|iv| iv.off_ms.is_some_and(|off| off <= iv.on_ms)) {
            return Err(RadioError::Config(format!("transmitter {}: empty schedule interval", self.id)));
        }
        Ok(())
    }
}

pub(crate) fn parse_schedule(s: &str) -> Result<Vec<OnInterval>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|pair| {
            let (on, off) = pair.split_once(':').ok_or_else(|| format!("schedule entry `{pair}` is not `on:off`"))?;
            let on_ms = on.trim().parse::<u64>().map_err(|_| format!("bad on time `{on}`"))?;
            let off = off.trim();
            let off_ms = if off.is_empty() || off.eq_ignore_ascii_case("inf") {
                None
            } else {
                Some(off.parse::<u64>().map_err(|_| format!("bad off time `{off}`"))?)
            };
            Ok(OnInterval { on_ms, off_ms })
        })
        .collect()
}

pub(crate) fn format_schedule(schedule: &[OnInterval]) -> String {
    schedule
        .iter()
        .map(|iv| match iv.off_ms {
            Some(off) => format!("{}:{}", iv.on_ms, off),
            None => format!("{}:inf", iv.on_ms),
        })
        .collect::<Vec<_>>()
        .join(";")
}

const TX_HEADER: [&str; 8] = ["id", "standard", "channel", "x_m", "y_m", "eirp_dbm", "height_m", "schedule"];

/// Parses the transmitter fixture CSV
/// `id,standard,channel,x_m,y_m,eirp_dbm,height_m,schedule`.
pub fn parse_transmitters<R: Read>(reader: R) -> Result<Vec<TvTransmitter>, RadioError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header_err = |m: String| RadioError::Parse { line: 1, message: m };
    let headers = rdr.headers().map_err(|e| header_err(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != TX_HEADER {
        return Err(header_err(format!("expected header `{}`", TX_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec =
            rec.map_err(|e| RadioError::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() })?;
        let line = rec.position().map_or(0, |p| p.line());
        let perr = |message: String| RadioError::Parse { line, message };
        let num = |i: usize| -> Result<f64, RadioError> {
            rec[i].parse::<f64>().map_err(|_| perr(format!("bad {} `{}`", TX_HEADER[i], &rec[i])))
        };
        let tx = TvTransmitter {
            id: rec[0].to_string(),
            standard: rec[1].parse().map_err(|e: RadioError| perr(e.to_string()))?,
            channel_index: rec[2].parse().map_err(|_| perr(format!("bad channel `{}`", &rec[2])))?,
            location: Point::new(num(3)?, num(4)?),
            eirp_dbm: num(5)?,
            antenna_height_m: num(6)?,
            schedule: parse_schedule(&rec[7]).map_err(perr)?,
        };
        out.push(tx);
    }
    Ok(out)
}

pub fn load_transmitters(path: &Path) -> Result<Vec<TvTransmitter>, RadioError> {
    let f = std::fs::File::open(path).map_err(|source| RadioError::Io { path: path.display().to_string(), source })?;
    parse_transmitters(f)
}

pub fn write_transmitters<W: Write>(w: W, txs: &[TvTransmitter]) -> Result<(), RadioError> {
    let to_io = |e: csv::Error| RadioError::Io { path: "<writer>".into(), source: e.into() };
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(TX_HEADER).map_err(to_io)?;
    for tx in txs {
        wtr.write_record([
            tx.id.clone(),
            tx.standard.to_string(),
            tx.channel_index.to_string(),
            tx.location.x_m.to_string(),
            tx.location.y_m.to_string(),
            tx.eirp_dbm.to_string(),
            tx.antenna_height_m.to_string(),
            format_schedule(&tx.schedule),
        ])
        .map_err(to_io)?;
    }
    wtr.flush().map_err(|source| RadioError::Io { path: "<writer>".into(), source })
}
