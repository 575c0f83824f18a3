//! CSV persistence. The first line carries database metadata as a comment:
//! `# geodb version=N grey_margin_m=M protection_ratio_db=P`.
//! A blank `protected_radius_m` is computed on load.

use std::io::{Read, Write};
use std::path::Path;

use super::{protected_radius, GeoDb, GeoError, GeoRecord};
use crate::radio_env::{ChannelGrid, Point, PropagationConfig};

const HEADER: [&str; 9] =
    ["id", "standard", "channel", "x_m", "y_m", "eirp_dbm", "height_m", "required_rx_dbm", "protected_radius_m"];

fn parse_metadata(line: &str, db: &mut GeoDb) -> Result<(), GeoError> {
    let perr = |message: String| GeoError::Parse { line: 1, message };
    for kv in line.trim_start_matches('#').split_whitespace().skip(1) {
        let (k, v) = kv.split_once('=').ok_or_else(|| perr(format!("bad metadata `{kv}`")))?;
        match k {
            "version" => db.set_version(v.parse().map_err(|_| perr(format!("bad version `{v}`")))?),
            "grey_margin_m" => db.grey_margin_m = v.parse().map_err(|_| perr(format!("bad grey margin `{v}`")))?,
            "protection_ratio_db" => {
                db.protection_ratio_db = v.parse().map_err(|_| perr(format!("bad protection ratio `{v}`")))?
            }
            other => return Err(perr(format!("unknown metadata key `{other}`"))),
        }
    }
    Ok(())
}

pub fn parse<R: Read>(mut reader: R, prop: &PropagationConfig, grid: &ChannelGrid) -> Result<GeoDb, GeoError> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|source| GeoError::Io { path: "<reader>".into(), source })?;
    let mut db = GeoDb::default();
    if let Some(first) = text.lines().next().filter(|l| l.starts_with("# geodb")) {
        parse_metadata(first, &mut db)?;
    }
    let version = db.version();

    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| GeoError::Parse { line: 1, message: e.to_string() })?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(GeoError::Parse { line: 1, message: format!("expected header `{}`", HEADER.join(",")) });
    }
    for rec in rdr.records() {
        let rec =
            rec.map_err(|e| GeoError::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() })?;
        let line = rec.position().map_or(0, |p| p.line());
        let perr = |message: String| GeoError::Parse { line, message };
        let num = |i: usize| -> Result<f64, GeoError> {
            rec[i].parse::<f64>().map_err(|_| perr(format!("bad {} `{}`", HEADER[i], &rec[i])))
        };
        let mut r = GeoRecord {
            id: rec[0].to_string(),
            standard: rec[1].parse().map_err(|e: crate::radio_env::RadioError| perr(e.to_string()))?,
            channel_index: rec[2].parse().map_err(|_| perr(format!("bad channel `{}`", &rec[2])))?,
            location: Point::new(num(3)?, num(4)?),
            eirp_dbm: num(5)?,
            height_m: num(6)?,
            required_rx_dbm: num(7)?,
            protected_radius_m: f64::NAN,
        };
        if grid.channel(r.channel_index).is_none() {
            return Err(perr(format!("channel {} is not in the grid", r.channel_index)));
        }
        r.protected_radius_m = if rec[8].is_empty() {
            protected_radius(&r, prop, grid).map_err(|e| perr(e.to_string()))?
        } else {
            num(8)?
        };
        if db.get(&r.id).is_some() {
            return Err(perr(format!("duplicate record key `{}`", r.id)));
        }
        db.insert(r).map_err(|e| perr(e.to_string()))?;
    }
    db.set_version(version);
    Ok(db)
}

pub fn load(path: &Path, prop: &PropagationConfig, grid: &ChannelGrid) -> Result<GeoDb, GeoError> {
    let f = std::fs::File::open(path).map_err(|source| GeoError::Io { path: path.display().to_string(), source })?;
    parse(f, prop, grid)
}

pub fn write<W: Write>(mut w: W, db: &GeoDb) -> std::io::Result<()> {
    writeln!(
        w,
        "# geodb version={} grey_margin_m={} protection_ratio_db={}",
        db.version(),
        db.grey_margin_m,
        db.protection_ratio_db
    )?;
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(HEADER)?;
    for r in db.records() {
        wtr.write_record([
            r.id.clone(),
            r.standard.to_string(),
            r.channel_index.to_string(),
            r.location.x_m.to_string(),
            r.location.y_m.to_string(),
            r.eirp_dbm.to_string(),
            r.height_m.to_string(),
            r.required_rx_dbm.to_string(),
            r.protected_radius_m.to_string(),
        ])?;
    }
    wtr.flush()
}

pub fn save(db: &GeoDb, path: &Path) -> Result<(), GeoError> {
    let io = |source| GeoError::Io { path: path.display().to_string(), source };
    let f = std::fs::File::create(path).map_err(io)?;
    write(std::io::BufWriter::new(f), db).map_err(io)
}
