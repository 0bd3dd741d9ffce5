//! Command-line front end: configuration, experiment dispatch and
//! deterministic CSV/JSON output.

pub mod commands;
pub mod config;
pub mod output;
pub mod suite;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stepforce_core::{Shape, Theory};
use thiserror::Error;

use crate::config::RunConfig;
use crate::output::{fmt_f64, to_json, write_file};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Physics(#[from] stepforce_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0} of 10 acceptance criteria failed")]
    CriteriaFailed(usize),
}

impl CliError {
    /// 0 success, 1 physics-domain failure, 2 configuration error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(e) if e.is_configuration() => 2,
            CliError::Physics(_) | CliError::Io(_) | CliError::CriteriaFailed(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "stepforce", version, about = "Mean force on quantum particles at a potential step")]
pub struct Cli {
    /// JSON configuration file; omitted keys take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for the randomized sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for CSV and JSON files.
    #[arg(long, global = true, default_value = "stepforce-out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sharp-step mode, closed-form force and boundary terms.
    Mode(ModeArgs),
    /// Smoothed-step force sequence, extrapolated limit and verdict.
    Converge(ConvergeArgs),
    /// Residual tables for the nonrelativistic and infinite-step limits.
    Limits(LimitsArgs),
    /// Wavepacket run comparing d<p>/dt with <f>.
    Ehrenfest(EhrenfestArgs),
    /// Run the full acceptance suite and write report.json.
    Report,
}

#[derive(Debug, Args)]
pub struct ModeArgs {
    #[arg(long)]
    pub theory: Option<Theory>,
    #[arg(long)]
    pub energy: Option<f64>,
    #[arg(long)]
    pub v0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub theory: Option<Theory>,
    #[arg(long)]
    pub energy: Option<f64>,
    #[arg(long)]
    pub v0: Option<f64>,
    /// Comma-separated shape names.
    #[arg(long, value_delimiter = ',')]
    pub shapes: Option<Vec<Shape>>,
    /// Comma-separated, strictly decreasing widths.
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    #[arg(long)]
    pub half_length: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LimitKind {
    Nonrel,
    InfiniteStep,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    pub kind: LimitKind,
    /// nonrel: kinetic energy above the rest energy.
    #[arg(long)]
    pub e_nr: Option<f64>,
    /// nonrel: comma-separated speeds of light.
    #[arg(long, value_delimiter = ',')]
    pub c_list: Option<Vec<f64>>,
    /// nonrel: step height.
    #[arg(long)]
    pub v0: Option<f64>,
    /// infinite-step: energy.
    #[arg(long)]
    pub energy: Option<f64>,
    /// infinite-step: comma-separated step heights.
    #[arg(long, value_delimiter = ',')]
    pub v0_list: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct EhrenfestArgs {
    #[arg(long)]
    pub v0: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub shape: Option<Shape>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Fold command-line overrides into the loaded configuration.
pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let v0 = |cfg: &mut RunConfig, v: Option<f64>| {
        if let Some(v) = v {
            cfg.params = cfg.params.with_v0(v);
        }
    };
    match &cli.command {
        Command::Mode(a) => {
            set(&mut cfg.mode.theory, a.theory);
            set(&mut cfg.mode.energy, a.energy);
            v0(&mut cfg, a.v0);
        }
        Command::Converge(a) => {
            set(&mut cfg.converge.theory, a.theory);
            set(&mut cfg.converge.energy, a.energy);
            set(&mut cfg.converge.shapes, a.shapes.clone());
            set(&mut cfg.converge.epsilons, a.epsilons.clone());
            set(&mut cfg.converge.half_length, a.half_length);
            v0(&mut cfg, a.v0);
        }
        Command::Limits(a) => {
            set(&mut cfg.limits.e_nr, a.e_nr);
            set(&mut cfg.limits.c_list, a.c_list.clone());
            set(&mut cfg.limits.v0, a.v0);
            set(&mut cfg.infinite_step.energy, a.energy);
            set(&mut cfg.infinite_step.v0_list, a.v0_list.clone());
        }
        Command::Ehrenfest(a) => {
            set(&mut cfg.ehrenfest.dt, a.dt);
            set(&mut cfg.ehrenfest.duration, a.duration);
            set(&mut cfg.ehrenfest.epsilon, a.epsilon);
            set(&mut cfg.ehrenfest.shape, a.shape);
            v0(&mut cfg, a.v0);
        }
        Command::Report => {}
    }
    if !cfg.params.v0().is_finite() {
        return Err(CliError::Config(format!("v0 must be finite, got {}", cfg.params.v0())));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn line(out: &mut impl Write, key: &str, value: &str) -> std::io::Result<()> {
    writeln!(out, "{key} = {value}")
}

/// Execute a parsed command, writing human-readable results to `out`.
pub fn execute(cli: &Cli, cfg: &RunConfig, out: &mut impl Write) -> Result<(), CliError> {
    writeln!(out, "# resolved config (seed {})", cli.seed)?;
    write!(out, "{}", to_json(cfg))?;
    let dir: &Path = &cli.out;
    match &cli.command {
        Command::Mode(_) => {
            let s = commands::mode_summary(cfg.mode.theory, cfg.mode.energy, &cfg.params)?;
            for (k, v) in s.lines() {
                line(out, &k, &v)?;
            }
            write_file(dir, "mode.json", &to_json(&s))?;
        }
        Command::Converge(_) => {
            let c = &cfg.converge;
            let res = commands::converge(c.theory, c.energy, &cfg.params, c)?;
            line(out, "route A force", &fmt_f64(res.route_a))?;
            line(out, "midpoint-convention force", &fmt_f64(res.midpoint_force))?;
            for s in &res.shapes {
                let x = &s.extrapolation;
                line(
                    out,
                    &format!("{} limit", s.shape.name()),
                    &format!("{} (order {}, error estimate {})", fmt_f64(x.limit), fmt_f64(x.order), fmt_f64(x.error_estimate)),
                )?;
            }
            line(out, "shape spread", &fmt_f64(res.shape_spread))?;
            line(out, "verdict", &res.verdict)?;
            write_file(dir, "converge.csv", res.csv().as_str())?;
            write_file(dir, "converge.json", &to_json(&res))?;
        }
        Command::Limits(a) => match a.kind {
            LimitKind::Nonrel => {
                let table = commands::nonrel(&cfg.limits, &cfg.params)?;
                let csv = commands::nonrel_csv(&table);
                write!(out, "{}", csv.as_str())?;
                let slope = |s: Option<f64>| s.map_or("undefined".to_string(), fmt_f64);
                line(out, "density residual slope", &slope(table.density_slope))?;
                line(out, "force residual slope", &slope(table.force_slope))?;
                write_file(dir, "nonrel.csv", csv.as_str())?;
                write_file(dir, "nonrel.json", &to_json(&table))?;
            }
            LimitKind::InfiniteStep => {
                let res = commands::infinite_step(&cfg.infinite_step, &cfg.params)?;
                let table = res.table_csv();
                let weak = res.weak_product_csv();
                write!(out, "{}", table.as_str())?;
                let slope = res.table.error_slope.map_or("undefined".to_string(), fmt_f64);
                line(out, "candidate error slope", &slope)?;
                write!(out, "{}", weak.as_str())?;
                write_file(dir, "infinite_step.csv", table.as_str())?;
                write_file(dir, "weak_product.csv", weak.as_str())?;
                write_file(dir, "infinite_step.json", &to_json(&res))?;
            }
        },
        Command::Ehrenfest(_) => {
            let res = commands::ehrenfest(&cfg.ehrenfest, &cfg.params)?;
            for r in &res.runs {
                let rel = r.relative_deviation.map_or("undefined".to_string(), fmt_f64);
                line(
                    out,
                    r.label,
                    &format!(
                        "dt {} max |dp/dt - f| {} relative {} norm drift {}",
                        fmt_f64(r.dt),
                        fmt_f64(r.max_abs_deviation),
                        rel,
                        fmt_f64(r.max_norm_drift)
                    ),
                )?;
            }
            if let Some(ratio) = res.refinement_ratio {
                line(out, "dt-halving ratio", &fmt_f64(ratio))?;
            }
            write_file(dir, "ehrenfest.csv", res.csv().as_str())?;
            write_file(dir, "ehrenfest.json", &to_json(&res))?;
        }
        Command::Report => {
            let bundle = suite::run_suite(cfg, cli.seed, |c, secs| {
                eprintln!("criterion {} {}: {:.2} s", c.id, c.name, secs);
            });
            for c in &bundle.criteria {
                let status = if c.passed { "PASS" } else { "FAIL" };
                writeln!(out, "criterion {:>2} {}: {status}", c.id, c.name)?;
                if let Some(e) = &c.error {
                    writeln!(out, "    error: {e}")?;
                }
                for check in c.checks.iter().filter(|k| !k.passed) {
                    writeln!(out, "    failed check: {} = {}", check.name, fmt_f64(check.value))?;
                }
            }
            write_file(dir, "report.json", &to_json(&bundle))?;
            let failed = bundle.criteria.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::CriteriaFailed(failed));
            }
        }
    }
    Ok(())
}

/// Parse, resolve and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let start = Instant::now();
    let result = resolve(&cli).and_then(|cfg| {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        execute(&cli, &cfg, &mut lock)
    });
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
