//! Command-line front end: `coverage`, `run`, `ingest`, `compare`.
//!
//! Every subcommand writes files plus a short summary on the output
//! stream, and reports failure as a single-line error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::engine::{self, ScenarioConfig};
use crate::geodesy::{self, DEFAULT_TABLE_ALTITUDES_KM, DEFAULT_TABLE_ELEVATIONS_DEG};
use crate::ingest;
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "leosim", version, about = "Deterministic LEO constellation network simulator")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Footprint coverage percentages over an altitude x elevation grid.
    Coverage(CoverageArgs),
    /// Run one or more scenario files.
    Run(RunArgs),
    /// Turn a sensor trace into ping schedules.
    Ingest(IngestArgs),
    /// Compare per-sender statistics of finished runs.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    /// Orbit altitudes, km, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true, default_values_t = DEFAULT_TABLE_ALTITUDES_KM)]
    pub altitudes: Vec<f64>,
    /// Minimum elevation angles, degrees, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true, default_values_t = DEFAULT_TABLE_ELEVATIONS_DEG)]
    pub elevations: Vec<f64>,
    /// CSV output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario TOML file; repeat to run several in parallel.
    #[arg(long, required = true, num_args = 1..)]
    pub scenario: Vec<PathBuf>,
    /// Artifacts go to `<out-dir>/<scenario name>/`.
    #[arg(long, env = "LEOSIM_OUT_DIR", default_value = "runs")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Sensor trace CSV.
    #[arg(long)]
    pub trace: PathBuf,
    /// Output directory for schedule.csv, intervals.csv and ingest.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Run directories containing summary.json.
    #[arg(required = true, num_args = 2..)]
    pub run_dirs: Vec<PathBuf>,
    /// Comparison CSV output; only the text table is printed when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn write_file(path: &Path, body: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn cmd_coverage(args: &CoverageArgs, out: &mut dyn Write) -> Result<(), Error> {
    let table = geodesy::coverage_table(&args.altitudes, &args.elevations)?;
    let csv = table.to_csv();
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            writeln!(out, "wrote {}x{} coverage table to {}", table.altitudes_km.len(), table.elevations_deg.len(), path.display())
        }
        None => out.write_all(csv.as_bytes()),
    }
    .map_err(|e| Error::io("<stdout>", e))
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<(), Error> {
    let configs = args
        .scenario
        .iter()
        .map(|p| ScenarioConfig::from_file(p))
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<Result<engine::RunResult, Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| {
                scope.spawn(move || {
                    let result = engine::run_scenario(cfg)?;
                    result.write_artifacts(&args.out_dir.join(&result.name))?;
                    Ok(result)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    });
    for r in results {
        let r = r?;
        let io = |e| Error::io("<stdout>", e);
        writeln!(
            out,
            "{}: {} snapshots, fingerprint {}",
            r.name, r.snapshot_count, r.fingerprint
        )
        .map_err(io)?;
        for s in &r.senders {
            let m = &s.summary;
            writeln!(
                out,
                "  {}: tx {} rx {} loss {:.2}% rtt {:.3}-{:.3} ms mean {:.3} ms",
                s.sender_id, m.pings_transmitted, m.pings_received, m.ping_loss_pct, m.rtt_min_ms, m.rtt_max_ms, m.rtt_mean_ms
            )
            .map_err(io)?;
        }
        writeln!(out, "  artifacts in {}", args.out_dir.join(&r.name).display()).map_err(io)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct IngestReport<'a> {
    t0_epoch_s: i64,
    interval_gcd_s: u64,
    recommended_update_interval_s: u64,
    start_offsets_s: Vec<(&'a str, i64)>,
}

pub fn cmd_ingest(args: &IngestArgs, out: &mut dyn Write) -> Result<(), Error> {
    let traces = ingest::parse_trace(&read_file(&args.trace)?)?;
    let derived = ingest::derive_schedules(&traces)?;
    let gcd = ingest::interval_gcd_s(&traces)?;
    let histogram = ingest::interval_histogram_csv(&traces, derived.t0_epoch_s)?;
    let report = IngestReport {
        t0_epoch_s: derived.t0_epoch_s,
        interval_gcd_s: gcd,
        recommended_update_interval_s: gcd,
        start_offsets_s: derived
            .schedules
            .iter()
            .map(|s| (s.sensor_id.as_str(), s.start_offset_s))
            .collect(),
    };
    write_file(&args.out.join("schedule.csv"), &derived.to_csv())?;
    write_file(&args.out.join("intervals.csv"), &histogram)?;
    write_file(
        &args.out.join("ingest.json"),
        &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"),
    )?;
    let io = |e| Error::io("<stdout>", e);
    writeln!(out, "{} sensors, t0 = {} (epoch s)", traces.len(), derived.t0_epoch_s).map_err(io)?;
    for s in &derived.schedules {
        writeln!(out, "  sensor {}: {} sends, start offset {} s", s.sensor_id, s.times_s.len(), s.start_offset_s)
            .map_err(io)?;
    }
    writeln!(out, "recommended update_interval_s = {gcd}").map_err(io)?;
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> Result<(), Error> {
    let runs = args
        .run_dirs
        .iter()
        .map(|dir| {
            let file = engine::read_summary_file(dir)?;
            let label = dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| file.name.clone());
            Ok(file.run_summaries(label))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let comparison = engine::compare_summaries(&runs)?;
    if let Some(path) = &args.out {
        write_file(path, &comparison.to_csv())?;
    }
    out.write_all(comparison.to_text().as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), Error> {
    match &cli.command {
        Command::Coverage(a) => cmd_coverage(a, out),
        Command::Run(a) => cmd_run(a, out),
        Command::Ingest(a) => cmd_ingest(a, out),
        Command::Compare(a) => cmd_compare(a, out),
    }
}
