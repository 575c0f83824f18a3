//! `tvws`: one subcommand per module. Exit codes are 0 on success, 2 for
//! configuration or input errors and 3 for runtime failures.

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tvws_core::exec::Execution;
use tvws_core::geodb::{self, classify_region, query_vacant_channels, GeoDb, GeoRecord, SeparationTable};
use tvws_core::harness::{emit_report, load_roc_config, load_scenario, load_study, run_simulation, HarnessError};
use tvws_core::interference::{acir_sweep, determine_guard_band, write_curve_csv};
use tvws_core::occupancy::{
    band_occupancy_series, classify_channel, detect_periodicity, duty_cycle_channels, ingest_trace, load_subbands,
    summarize_band, OccupancyMatrix, ThresholdRule,
};
use tvws_core::radio_env::{china_tv_grid, load_transmitters, ChannelGrid, Point, PropagationConfig};
use tvws_core::sensing::{
    calibrate_threshold, estimate_roc, noise_statistic_ratio_db, write_calibration, write_roc_csv, NoiseModel, RocScene,
};

#[derive(Parser)]
#[command(name = "tvws", version, about = "Cognitive TD-LTE in TV white space")]
struct Cli {
    /// Run Monte Carlo trials on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write plr.csv, events.csv and handover_summary.txt.
    Simulate {
        scenario: PathBuf,
        /// Overrides `scenario.output_dir`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Detector ROC sweep, or threshold calibration with `--calibrate`.
    Roc {
        detector_cfg: PathBuf,
        #[arg(long)]
        calibrate: bool,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// ACIR sweep and guard-band determination.
    Acir {
        study_cfg: PathBuf,
        /// Curve CSV file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Geo-location database tools.
    Geodb {
        #[command(subcommand)]
        command: GeodbCommand,
    },
    /// Duty cycles, classification and periodicity of a measurement trace.
    Occupancy(OccupancyArgs),
}

#[derive(Subcommand)]
enum GeodbCommand {
    /// Build a database from a transmitter CSV.
    Build {
        #[arg(long)]
        transmitters: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = GeoRecord::DEFAULT_REQUIRED_RX_DBM, allow_hyphen_values = true)]
        required_rx_dbm: f64,
        #[arg(long, default_value_t = 1000.0)]
        grey_margin_m: f64,
    },
    /// Region of every channel at a location.
    Query {
        #[arg(long)]
        db: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        /// CeNB maximum EIRP.
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        eirp_dbm: f64,
    },
    /// Region of one channel at a location.
    Classify {
        #[arg(long)]
        db: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long)]
        channel: usize,
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        eirp_dbm: f64,
    },
    /// Separation distance lookup; prints the whole table without a query.
    Separation {
        /// Table CSV; the built-in table when omitted.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true, requires = "height_m")]
        power_dbm: Option<f64>,
        #[arg(long, requires = "power_dbm")]
        height_m: Option<f64>,
    },
}

#[derive(Args)]
struct OccupancyArgs {
    trace: PathBuf,
    /// Fixed threshold; the noise-percentile rule applies when omitted.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["percentile", "margin_db"])]
    threshold_dbm: Option<f64>,
    #[arg(long)]
    percentile: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    margin_db: Option<f64>,
    /// Sub-band table `low_mhz,high_mhz,label`; per-channel output otherwise.
    #[arg(long)]
    subbands: Option<PathBuf>,
    /// Machine-readable CSV output file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Classify each covered channel against this noise floor.
    #[arg(long, allow_hyphen_values = true)]
    noise_floor_dbm: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    delta_on_db: f64,
    #[arg(long, default_value_t = 5.0)]
    gamma_spread_db: f64,
    /// Band-occupancy window for the daily-periodicity test.
    #[arg(long)]
    periodicity_interval_ms: Option<u64>,
}

enum Fail {
    Config(String),
    Runtime(String),
}

impl Fail {
    fn config(e: impl Display) -> Self {
        Fail::Config(e.to_string())
    }

    fn runtime(e: impl Display) -> Self {
        Fail::Runtime(e.to_string())
    }
}

impl From<HarnessError> for Fail {
    fn from(e: HarnessError) -> Self {
        if e.exit_code() == 2 {
            Fail::Config(e.to_string())
        } else {
            Fail::Runtime(e.to_string())
        }
    }
}

type Outcome = Result<(), Fail>;

/// Writes `bytes` to `path`, or stdout when `path` is `None`.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Outcome {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Fail::runtime(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(Fail::runtime),
    }
}

fn buffer(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>, Fail> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(Fail::runtime)?;
    Ok(buf)
}

fn simulate(scenario: &Path, output_dir: Option<PathBuf>) -> Outcome {
    let cfg = load_scenario(scenario)?;
    let out = run_simulation(&cfg)?;
    let dir = output_dir.unwrap_or_else(|| cfg.output_dir.clone());
    let files = emit_report(&out, &cfg, &dir)?;
    let m = &out.metrics;
    let worst = m.plr.iter().map(|s| s.plr).fold(0.0, f64::max);
    println!("samples: {}  max plr: {worst}", m.plr.len());
    match (m.mean_latency_ms(), m.max_latency_ms()) {
        (Some(mean), Some(max)) => {
            println!("handovers: {}  mean latency: {mean} ms  max latency: {max} ms", m.handovers.len())
        }
        _ => println!("handovers: 0"),
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn roc(cfg_path: &Path, calibrate: bool, output: Option<&Path>, exec: Execution) -> Outcome {
    let cfg = load_roc_config(cfg_path)?;
    let noise = NoiseModel::thermal(cfg.detector.noise_figure_db, 200.0);
    if calibrate {
        let mut det = cfg.detector.clone();
        calibrate_threshold(&mut det, &noise, cfg.calibrate_trials, cfg.calibrate_seed, exec).map_err(Fail::runtime)?;
        let bytes = buffer(|b| {
            writeln!(
                b,
                "# threshold from {} noise-only trials, seed {} (tvws roc --calibrate)",
                cfg.calibrate_trials, cfg.calibrate_seed
            )?;
            write_calibration(b, &det)
        })?;
        return emit(output, &bytes);
    }
    let scene = RocScene::new(&cfg.detector);
    let points =
        estimate_roc(&cfg.detector, &scene, &cfg.powers_dbm, cfg.trials, cfg.seed, exec).map_err(Fail::runtime)?;
    emit(output, &buffer(|b| write_roc_csv(b, &points))?)?;
    if cfg.gain_trials > 0 {
        let gain =
            noise_statistic_ratio_db(&cfg.detector, &noise, cfg.gain_trials, cfg.seed, exec).map_err(Fail::runtime)?;
        eprintln!("narrowband gain: {gain:.3} dB");
    }
    Ok(())
}

fn acir(study_path: &Path, output: Option<&Path>, exec: Execution) -> Outcome {
    let study = load_study(study_path)?;
    let curve = acir_sweep(&study.topology(), &study, &study.acir_db, study.snapshots, study.seed, exec)
        .map_err(Fail::runtime)?;
    emit(output, &buffer(|b| write_curve_csv(b, &curve))?)?;
    let report = determine_guard_band(&curve, &study.guard_map, study.loss_budget).map_err(Fail::runtime)?;
    let mut text = String::new();
    for (c, a) in &report.required_acir_db {
        text.push_str(&format!("{c}: required ACIR {a:.2} dB\n"));
    }
    text.push_str(&format!("{report}\n"));
    if output.is_some() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
    Ok(())
}

fn load_db(path: &Path, prop: &PropagationConfig, grid: &ChannelGrid) -> Result<GeoDb, Fail> {
    geodb::load(path, prop, grid).map_err(Fail::config)
}

fn geodb_cmd(cmd: GeodbCommand) -> Outcome {
    let prop = PropagationConfig::default();
    let grid = china_tv_grid();
    match cmd {
        GeodbCommand::Build { transmitters, output, required_rx_dbm, grey_margin_m } => {
            let txs = load_transmitters(&transmitters).map_err(Fail::config)?;
            let mut db = GeoDb::new(grey_margin_m);
            for tx in &txs {
                let rec = GeoRecord::from_transmitter(tx, required_rx_dbm, &prop, &grid).map_err(Fail::config)?;
                db.insert(rec).map_err(Fail::config)?;
            }
            geodb::save(&db, &output).map_err(Fail::runtime)?;
            println!("{} records written to {}", db.len(), output.display());
        }
        GeodbCommand::Query { db, x, y, eirp_dbm } => {
            let db = load_db(&db, &prop, &grid)?;
            let mut text = String::from("channel,low_mhz,high_mhz,region\n");
            for (ch, region) in query_vacant_channels(&db, Point::new(x, y), eirp_dbm, &prop, &grid) {
                let c = &grid.channels()[ch];
                text.push_str(&format!("{ch},{},{},{region}\n", c.low_mhz, c.high_mhz));
            }
            emit(None, text.as_bytes())?;
        }
        GeodbCommand::Classify { db, x, y, channel, eirp_dbm } => {
            let db = load_db(&db, &prop, &grid)?;
            let region =
                classify_region(&db, Point::new(x, y), channel, eirp_dbm, &prop, &grid).map_err(Fail::config)?;
            println!("{region}");
        }
        GeodbCommand::Separation { table, power_dbm, height_m } => {
            let table = match table {
                Some(p) => {
                    let f = std::fs::File::open(&p).map_err(|e| Fail::config(format!("{}: {e}", p.display())))?;
                    SeparationTable::parse(f).map_err(Fail::config)?
                }
                None => SeparationTable::default_table(),
            };
            match (power_dbm, height_m) {
                (Some(p), Some(h)) => {
                    let l = table.lookup(p, h);
                    let note = if l.clamped { " (clamped to table edge)" } else { "" };
                    println!("{:.1} m{note}", l.distance_m);
                }
                _ => emit(None, &buffer(|b| table.write(b))?)?,
            }
        }
    }
    Ok(())
}

fn occupancy(a: OccupancyArgs) -> Outcome {
    let m = ingest_trace(&a.trace).map_err(Fail::config)?;
    let rule = match a.threshold_dbm {
        Some(dbm) => ThresholdRule::Fixed { dbm },
        None => {
            let ThresholdRule::NoisePercentile { percentile, margin_db } = ThresholdRule::default() else {
                unreachable!("default rule is a noise percentile")
            };
            ThresholdRule::NoisePercentile {
                percentile: a.percentile.unwrap_or(percentile),
                margin_db: a.margin_db.unwrap_or(margin_db),
            }
        }
    };
    rule.validate().map_err(Fail::config)?;
    let grid = china_tv_grid();
    let covered: Vec<_> =
        grid.channels().iter().filter(|c| m.bins_in(c.low_mhz, c.high_mhz).is_ok()).cloned().collect();
    let mut text = String::new();
    let mut csv = Vec::new();
    if let Some(path) = &a.subbands {
        let bands = load_subbands(path).map_err(Fail::config)?;
        let s = summarize_band(&m, &bands, &rule).map_err(Fail::config)?;
        text.push_str(&s.to_string());
        s.write_csv(&mut csv).map_err(Fail::runtime)?;
    } else {
        if covered.is_empty() {
            return Err(Fail::config(format!("{}: trace covers no TV channel", a.trace.display())));
        }
        let d = duty_cycle_channels(&m, &covered, &rule).map_err(Fail::config)?;
        text.push_str(&format!("site: {}  threshold: {}\n", m.meta.site, rule));
        text.push_str(&format!("{:<8} {:>16} {:>10} {:>14}\n", "channel", "band", "occupancy", "threshold"));
        writeln!(csv, "channel,low_mhz,high_mhz,occupancy,threshold_dbm").map_err(Fail::runtime)?;
        for (&(idx, occ, thr), ch) in d.channels.iter().zip(&covered) {
            let band = format!("{}-{} MHz", ch.low_mhz, ch.high_mhz);
            text.push_str(&format!("{idx:<8} {band:>16} {:>9.2}% {thr:>10.2} dBm\n", 100.0 * occ));
            writeln!(csv, "{idx},{},{},{occ},{thr}", ch.low_mhz, ch.high_mhz).map_err(Fail::runtime)?;
        }
        text.push_str(&format!("band average: {:.2}%\n", 100.0 * d.band_average));
        writeln!(csv, ",,,{},", d.band_average).map_err(Fail::runtime)?;
    }
    if let Some(floor) = a.noise_floor_dbm {
        text.push_str(&classify_text(&m, &grid, &covered, floor, a.delta_on_db, a.gamma_spread_db)?);
    }
    if let Some(interval) = a.periodicity_interval_ms {
        let series = band_occupancy_series(&m, &rule, interval).map_err(Fail::config)?;
        let p = detect_periodicity(&series, interval).map_err(Fail::config)?;
        let verdict = if p.significant { "significant" } else { "not significant" };
        text.push_str(&format!("periodicity: {:.2} h, strength {:.3} ({verdict})\n", p.period_hours, p.strength));
    }
    emit(None, text.as_bytes())?;
    if let Some(path) = &a.csv {
        emit(Some(path), &csv)?;
    }
    Ok(())
}

fn classify_text(
    m: &OccupancyMatrix,
    grid: &ChannelGrid,
    covered: &[tvws_core::radio_env::Channel],
    floor: f64,
    delta_on: f64,
    gamma: f64,
) -> Result<String, Fail> {
    let mut text = format!("classification: noise floor {floor} dBm, on at +{delta_on} dB, spread {gamma} dB\n");
    for ch in covered {
        let c = classify_channel(m, grid, ch.index, floor, delta_on, gamma).map_err(Fail::config)?;
        let seen = if c.never_seen { " never seen" } else { "" };
        text.push_str(&format!(
            "{:<8} {:<13} avg {:>8.2} dBm  max {:>8.2} dBm{seen}\n",
            ch.index, c.class, c.avg_dbm, c.max_dbm
        ));
    }
    Ok(text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let result = match cli.command {
        Command::Simulate { scenario, output_dir } => simulate(&scenario, output_dir),
        Command::Roc { detector_cfg, calibrate, output } => roc(&detector_cfg, calibrate, output.as_deref(), exec),
        Command::Acir { study_cfg, output } => acir(&study_cfg, output.as_deref(), exec),
        Command::Geodb { command } => geodb_cmd(command),
        Command::Occupancy(a) => occupancy(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Config(m)) => {
            eprintln!("tvws: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Runtime(m)) => {
            eprintln!("tvws: {m}");
            ExitCode::from(3)
        }
    }
}
