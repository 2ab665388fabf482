//! Batch verification runner: `nkcheck identities|chart <id>|ode|all`.
//!
//! Exit codes: 0 when every check passes, 1 when any check fails,
//! 2 on usage or configuration errors. Reports go to stdout (or
//! `--out`); wall-clock timing goes to stderr so that reports stay
//! byte-identical across runs with the same seed and config.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use nkcheck_core::report::{CheckReport, RunConfig};
use nkcheck_core::suites;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "nkcheck", about = "Verification suites for the nearly Kähler S³×S³")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// RNG seed for sampled checks.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Random-sample count for identity sweeps.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Tolerance for algebraic identities.
    #[arg(long, global = true)]
    tol_algebraic: Option<f64>,

    /// Tolerance for finite-difference identities.
    #[arg(long, global = true)]
    tol_derivative: Option<f64>,

    /// Chart ids to include in `all` runs (repeatable).
    #[arg(long = "chart", global = true)]
    charts: Vec<String>,

    /// Grid resolution per axis for chart sweeps.
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Report format.
    #[arg(long, global = true)]
    format: Option<Format>,

    /// Write the report to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Flat key=value config file; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Random-sample sweep over the ambient structure identities.
    Identities,
    /// Grid sweep of one catalog chart.
    Chart { id: String },
    /// Coefficient-ODE checks.
    Ode,
    /// Every suite, merged into one report.
    All,
}

/// Settings that live outside `RunConfig` (output plumbing).
struct Output {
    format: Format,
    out: Option<PathBuf>,
}

fn parse_config_file(path: &PathBuf) -> Result<HashMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {} is not key=value: {line:?}", lineno + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parsed<T: std::str::FromStr>(map: &HashMap<String, String>, key: &str) -> Result<Option<T>, String>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| format!("config key {key}: {e}")),
    }
}

fn resolve(cli: &Cli) -> Result<(RunConfig, Output), String> {
    let mut cfg = RunConfig::default();
    let mut format = Format::Json;
    let mut out = None;

    if let Some(path) = &cli.config {
        let map = parse_config_file(path)?;
        let known = [
            "seed",
            "samples",
            "tol_algebraic",
            "tol_derivative",
            "charts",
            "grid",
            "format",
            "out",
        ];
        if let Some(key) = map.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(format!("unknown config key: {key}"));
        }
        if let Some(v) = parsed(&map, "seed")? {
            cfg.seed = v;
        }
        if let Some(v) = parsed(&map, "samples")? {
            cfg.samples = v;
        }
        if let Some(v) = parsed(&map, "tol_algebraic")? {
            cfg.tol_algebraic = v;
        }
        if let Some(v) = parsed(&map, "tol_derivative")? {
            cfg.tol_derivative = v;
        }
        if let Some(v) = parsed(&map, "grid")? {
            cfg.grid = v;
        }
        if let Some(raw) = map.get("charts") {
            cfg.charts = raw.split(',').map(|s| s.trim().to_string()).collect();
        }
        if let Some(raw) = map.get("format") {
            format = match raw.as_str() {
                "json" => Format::Json,
                "text" => Format::Text,
                other => return Err(format!("config key format: unknown value {other:?}")),
            };
        }
        if let Some(raw) = map.get("out") {
            out = Some(PathBuf::from(raw));
        }
    }

    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.samples {
        cfg.samples = v;
    }
    if let Some(v) = cli.tol_algebraic {
        cfg.tol_algebraic = v;
    }
    if let Some(v) = cli.tol_derivative {
        cfg.tol_derivative = v;
    }
    if let Some(v) = cli.grid {
        cfg.grid = v;
    }
    if !cli.charts.is_empty() {
        cfg.charts = cli.charts.clone();
    }
    if let Some(v) = cli.format {
        format = v;
    }
    if let Some(v) = &cli.out {
        out = Some(v.clone());
    }

    cfg.validate().map_err(|e| e.to_string())?;
    Ok((cfg, Output { format, out }))
}

fn emit(report: &CheckReport, output: &Output) -> Result<(), String> {
    let body = match output.format {
        Format::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
        Format::Text => report.to_text(),
    };
    match &output.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| format!("cannot write report to {}: {e}", path.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, output) = match resolve(&cli) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    let start = Instant::now();
    let report = match &cli.command {
        Command::Identities => suites::run_identity_suite(&cfg),
        Command::Chart { id } => suites::run_chart_suite(&cfg, id),
        Command::Ode => suites::run_ode_suite(&cfg),
        Command::All => suites::run_all(&cfg),
    };
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    eprintln!(
        "{}: {} checks in {} ms",
        report.suite,
        report.checks.len(),
        start.elapsed().as_millis()
    );

    if let Err(msg) = emit(&report, &output) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
