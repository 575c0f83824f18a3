use std::io::Write;
use std::path::{Path, PathBuf};

use super::{Event, HarnessError, MetricsSeries, ScenarioConfig, SimOutput};
use crate::interference::write_curve_csv;

pub fn write_plr_csv<W: Write>(mut w: W, m: &MetricsSeries) -> std::io::Result<()> {
    writeln!(w, "sample_index,t_ms,plr")?;
    for s in &m.plr {
        writeln!(w, "{},{},{}", s.index, s.t_ms, s.plr)?;
    }
    Ok(())
}

pub fn write_events_csv<W: Write>(w: W, events: &[Event]) -> std::io::Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(["t_ms", "cenb_id", "event", "detail"])?;
    for e in events {
        wtr.write_record([e.t_ms.to_string(), e.source.clone(), e.kind.to_string(), e.detail.clone()])?;
    }
    wtr.flush()
}

pub fn write_handover_summary<W: Write>(mut w: W, m: &MetricsSeries) -> std::io::Result<()> {
    writeln!(w, "handovers: {}", m.handovers.len())?;
    match (m.mean_latency_ms(), m.max_latency_ms()) {
        (Some(mean), Some(max)) => {
            writeln!(w, "mean_latency_ms: {mean}")?;
            writeln!(w, "max_latency_ms: {max}")?;
        }
        _ => {
            writeln!(w, "mean_latency_ms: n/a")?;
            writeln!(w, "max_latency_ms: n/a")?;
        }
    }
    for h in &m.handovers {
        writeln!(
            w,
            "{} detect={} restore={} latency_ms={} from={:?} to={:?}",
            h.cenb_id, h.t_detect_ms, h.t_restore_ms, h.latency_ms, h.from_block, h.to_block
        )?;
    }
    Ok(())
}

fn write_file(
    dir: &Path,
    name: &str,
    f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
) -> Result<PathBuf, HarnessError> {
    let path = dir.join(name);
    let io = |source| HarnessError::Io { path: path.display().to_string(), source };
    let mut buf = Vec::new();
    f(&mut buf).map_err(io)?;
    std::fs::write(&path, buf).map_err(io)?;
    Ok(path)
}

/// Writes `plr.csv`, `events.csv`, `handover_summary.txt` and, when the
/// interference study ran, `acir_curve.csv` into `dir`.
pub fn emit_report(out: &SimOutput, cfg: &ScenarioConfig, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.display().to_string(), source })?;
    let mut files = vec![
        write_file(dir, "plr.csv", |b| write_plr_csv(b, &out.metrics))?,
        write_file(dir, "events.csv", |b| write_events_csv(b, &out.events))?,
        write_file(dir, "handover_summary.txt", |b| write_handover_summary(b, &out.metrics))?,
    ];
    if cfg.interference.is_some() {
        if let Some(curve) = &out.acir_curve {
            files.push(write_file(dir, "acir_curve.csv", |b| write_curve_csv(b, curve))?);
        }
    }
    Ok(files)
}
