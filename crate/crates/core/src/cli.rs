//! The `qcoexist` command-line front end.
//!
//! Every run command writes three files into the output directory:
//! `<command>.csv`, `<command>.json` (both byte-identical across runs of the
//! same config) and `<command>.meta.json`, which holds the timestamp.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::config::{canonical_json, ConfigError, Diagnostic, ScenarioConfig};
use crate::link::NoiseBudget;
use crate::planner::{self, SweepCurve};
use crate::presets;
use crate::spectra::BUNDLED_TABLE_VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_MODEL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "qcoexist",
    version,
    about = "QKD / classical DWDM coexistence noise and key-rate model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Best and worst spacing of the classical band.
    Placement(RunArgs),
    /// SKR and QBER versus total coexistence power.
    Sweep(RunArgs),
    /// Filter-leakage-only mode, no fibre in the path.
    Characterize(RunArgs),
    /// Power at which FWM overtakes Raman noise. Spacings with no crossing
    /// are left out of the CSV and listed in the JSON summary.
    Crossover(RunArgs),
    /// Check a config without running the model.
    Validate(ValidateArgs),
    /// List or dump the bundled presets.
    #[command(subcommand)]
    Preset(PresetCommand),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to the config's `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Replace the matching config section with a named preset. Repeatable.
    #[arg(long = "preset")]
    pub presets: Vec<String>,
    /// Accepted for interface stability; the model is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long = "preset")]
    pub presets: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum PresetCommand {
    List,
    /// Print a preset as a config fragment.
    Dump {
        name: String,
    },
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error("{0}")]
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) | Failure::Usage(_) => EXIT_VALIDATION,
            Failure::Model(_) | Failure::Io(_) => EXIT_MODEL,
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

/// Parses `std::env::args` and runs, returning the process exit code.
pub fn main() -> i32 {
    run(Cli::parse())
}

pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Placement(a) => run_command("placement", &a, placement),
        Command::Sweep(a) => run_command("sweep", &a, sweep),
        Command::Characterize(a) => run_command("characterize", &a, characterize),
        Command::Crossover(a) => run_command("crossover", &a, crossover),
        Command::Validate(a) => return validate(&a),
        Command::Preset(p) => preset(&p),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Full validation of a config file without running any physics.
pub fn validate_file(path: &Path, presets: &[String]) -> Result<Vec<Diagnostic>, ConfigError> {
    match ScenarioConfig::load(path, presets) {
        Ok(_) => Ok(Vec::new()),
        Err(ConfigError::Invalid(d)) => Ok(d),
        Err(e) => Err(e),
    }
}

fn validate(args: &ValidateArgs) -> i32 {
    match validate_file(&args.config, &args.presets) {
        Ok(d) if d.is_empty() => {
            println!("{}: ok", args.config.display());
            EXIT_OK
        }
        Ok(d) => {
            for diag in d {
                eprintln!("{diag}");
            }
            EXIT_VALIDATION
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_VALIDATION
        }
    }
}

fn preset(cmd: &PresetCommand) -> Result<(), Failure> {
    match cmd {
        PresetCommand::List => {
            for (kind, names) in [
                ("fibre", presets::fibre_names()),
                ("scenario", presets::scenario_names()),
                ("filters", presets::filter_chain_names()),
            ] {
                for n in names {
                    println!("{kind}\t{n}");
                }
            }
            Ok(())
        }
        PresetCommand::Dump { name } => {
            let v = presets::to_value(name).ok_or_else(|| Failure::Usage(format!("unknown preset `{name}`")))?;
            print!("{}", canonical_json(&v));
            Ok(())
        }
    }
}

/// A command's tabular output plus its structured summary.
struct Output {
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
    summary: serde_json::Value,
}

fn run_command(
    name: &str,
    args: &RunArgs,
    body: fn(&ScenarioConfig) -> Result<Output, Failure>,
) -> Result<(), Failure> {
    let config = ScenarioConfig::load(&args.config, &args.presets)?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.output.dir.as_ref().map(|d| config.base_dir.join(d)))
        .ok_or_else(|| Failure::Usage("no output directory: pass --out or set output.dir".into()))?;
    let output = body(&config)?;

    std::fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
    let csv_path = out_dir.join(format!("{name}.csv"));
    std::fs::write(&csv_path, render_csv(&output.header, &output.rows)).map_err(io_err(&csv_path))?;

    let results = json!({
        "command": name,
        "config": config,
        "results": output.summary,
    });
    let json_path = out_dir.join(format!("{name}.json"));
    std::fs::write(&json_path, canonical_json(&results)).map_err(io_err(&json_path))?;

    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = json!({
        "command": name,
        "config_path": args.config.display().to_string(),
        "created_unix_s": created,
        "raman_table": config.raman.table.as_ref().map_or_else(
            || BUNDLED_TABLE_VERSION.to_owned(),
            |p| p.display().to_string(),
        ),
        "seed": args.seed,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let meta_path = out_dir.join(format!("{name}.meta.json"));
    std::fs::write(&meta_path, canonical_json(&meta)).map_err(io_err(&meta_path))?;

    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "wrote {}", csv_path.display()).ok();
    Ok(())
}

/// CSV with a header row and every number in 9-significant-digit
/// scientific notation.
pub fn render_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|x| format!("{x:.8e}")))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

fn fibre(config: &ScenarioConfig) -> Result<crate::link::FibreSpec, Failure> {
    config
        .fibre_spec()
        .ok_or_else(|| Failure::Usage("fibre section did not resolve".into()))
}

fn budget_cells(b: &NoiseBudget) -> [f64; 3] {
    [b.raman_counts, b.fwm_counts, b.leakage_counts]
}

fn placement(config: &ScenarioConfig) -> Result<Output, Failure> {
    let env = config.environment()?;
    let p = &config.placement;
    let result = planner::best_worst_spacing(p.power_dbm, &config.layout()?, &p.spacing_ghz, &fibre(config)?, &env)?;
    let rows = result
        .points
        .iter()
        .map(|pt| {
            let [r, f, l] = budget_cells(&pt.budget);
            vec![pt.spacing_ghz, r, f, l, pt.budget.total, pt.qber, pt.skr]
        })
        .collect();
    Ok(Output {
        header: vec![
            "spacing_GHz",
            "raman_cps",
            "fwm_cps",
            "leakage_cps",
            "total_cps",
            "qber",
            "skr_bps",
        ],
        rows,
        summary: json!({
            "best_spacing_ghz": result.best_spacing_ghz,
            "worst_spacing_ghz": result.worst_spacing_ghz,
            "degenerate": result.degenerate,
            "objective": result.objective,
            "coexistence_dbm": result.coexistence_dbm,
            "cow": env.cow,
        }),
    })
}

fn curve_output(curve: &SweepCurve, cow: &impl Serialize) -> Output {
    let rows = curve
        .powers_dbm
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let [r, f, l] = budget_cells(&curve.budgets[i]);
            vec![p, curve.skr_bps[i], curve.qber[i], r, f, l]
        })
        .collect();
    Output {
        header: vec!["power_dBm", "skr_bps", "qber", "raman_cps", "fwm_cps", "leakage_cps"],
        rows,
        summary: json!({ "tag": curve.tag, "points": curve.powers_dbm.len(), "cow": cow }),
    }
}

fn sweep(config: &ScenarioConfig) -> Result<Output, Failure> {
    let env = config.environment()?;
    let powers = config.sweep.powers_dbm.points()?;
    let curve = planner::power_sweep(&config.tag(), &config.plan()?, &powers, &fibre(config)?, &env)?;
    Ok(curve_output(&curve, &env.cow))
}

fn characterize(config: &ScenarioConfig) -> Result<Output, Failure> {
    let mut env = config.environment()?;
    env.filters = env
        .filters
        .with_isolation_reduced(config.characterize.isolation_reduction_db);
    let powers = config.characterize.powers_dbm.points()?;
    let curve = planner::characterization_sweep(&config.tag(), &config.plan()?, &powers, &env)?;
    Ok(curve_output(&curve, &env.cow))
}

fn crossover(config: &ScenarioConfig) -> Result<Output, Failure> {
    let env = config.environment()?;
    let layout = config.layout()?;
    let fibre = fibre(config)?;
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    let mut last_err = None;
    for &s in &config.crossover.spacings_ghz {
        match planner::crossover_power(s, &layout, &fibre, &env) {
            Ok(dbm) => rows.push(vec![s, dbm]),
            Err(e @ crate::Error::NoCrossover { .. }) => {
                missing.push(s);
                last_err = Some(e);
            }
            Err(e) => return Err(e.into()),
        }
    }
    if rows.is_empty() {
        return Err(last_err.expect("at least one spacing").into());
    }
    Ok(Output {
        header: vec!["spacing_GHz", "crossover_dBm"],
        summary: json!({
            "crossover_dbm": rows.iter().map(|r| r[1]).collect::<Vec<_>>(),
            "spacings_ghz": rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
            "no_crossover_spacings_ghz": missing,
            "search_range_dbm": [planner::CROSSOVER_RANGE_DBM.0, planner::CROSSOVER_RANGE_DBM.1],
        }),
        rows,
    })
}
