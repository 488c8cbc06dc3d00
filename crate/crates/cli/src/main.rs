//! `nsv`: run, sweep and check Navier-Stokes-Voigt Galerkin trajectories.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use nsv_core::nonlinearity::convective;
use nsv_core::oracle::{direct_convective, direct_pressure, direct_scalar_lp, max_relative_difference};
use nsv_core::pressure::{lp_grid, scalar_lp};
use nsv_core::snapshot::{read_trajectory, write_trajectory};
use nsv_core::{
    diagnose, generate_datum, run, run_sweep, DatumSpec, SchemeParams, SweepPlan, TestFunction,
    TestFunctionSpec, TruncationBall,
};

#[derive(Parser)]
#[command(name = "nsv", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One level: step, diagnose, write report and snapshot.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Several levels plus cross-level Cauchy metrics.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diagnostics of a stored trajectory.
    Check {
        #[arg(long)]
        traj: PathBuf,
        /// Test function: a TOML file, or an inline table such as
        /// `{ weight = { kind = "product" }, start = 0.1, end = 0.4 }`.
        /// May be repeated.
        #[arg(long)]
        phi: Vec<String>,
        /// Write `report.json` and `report.csv` here instead of printing JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a fast kernel with its brute-force oracle.
    Oracle {
        #[arg(long, value_enum)]
        op: OracleOp,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        n: u32,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum OracleOp {
    Convective,
    Pressure,
    Lp,
}

/// Config for `nsv run`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    params: SchemeParams,
    datum: DatumSpec,
    #[serde(default)]
    phis: Vec<TestFunctionSpec>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct OracleReport {
    op: OracleOp,
    seed: u64,
    n: u32,
    fast: Option<f64>,
    oracle: Option<f64>,
    relative_difference: f64,
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_phi(arg: &str) -> Result<TestFunctionSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        return read_toml(path);
    }
    #[derive(Deserialize)]
    struct Wrap {
        phi: TestFunctionSpec,
    }
    let w: Wrap = toml::from_str(&format!("phi = {arg}"))
        .with_context(|| format!("--phi is neither a file nor an inline table: {arg}"))?;
    Ok(w.phi)
}

/// Prints `text` and a newline; a closed pipe (`nsv ... | head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("NSV_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().with_context(|| format!("NSV_THREADS={v}"))?;
    if n == 0 {
        bail!("NSV_THREADS must be positive");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn cmd_run(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let cfg: RunConfig = read_toml(config)?;
    let u0 = generate_datum(&cfg.datum, cfg.params.ball)?;
    let traj = run(&u0, &cfg.params)?;
    let phis = cfg
        .phis
        .iter()
        .map(|s| TestFunction::new(s, cfg.params.final_time))
        .collect::<nsv_core::Result<Vec<_>>>()?;
    let report = diagnose(&traj, &phis)?;
    match out.or(cfg.output_dir) {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            report.write_json(&dir.join("report.json"))?;
            report.write_csv(fs::File::create(dir.join("report.csv"))?)?;
            write_trajectory(&dir.join("trajectory.nsv"), &traj)?;
            println!(
                "n={} M={} alpha={} energy residual {:.3e}, wrote {}",
                cfg.params.ball.radius(),
                cfg.params.steps,
                cfg.params.alpha,
                report.energy.max_residual(),
                dir.display()
            );
        }
        None => emit(&report.to_json()?)?,
    }
    Ok(())
}

fn cmd_sweep(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let mut plan: SweepPlan = read_toml(config)?;
    if out.is_some() {
        plan.output_dir = out;
    }
    let report = run_sweep(&plan)?;
    emit(report.summary_table().trim_end())?;
    Ok(())
}

fn cmd_check(traj: &Path, phis: &[String], out: Option<PathBuf>) -> Result<()> {
    let traj = read_trajectory(traj)?;
    let phis = phis
        .iter()
        .map(|a| Ok(TestFunction::new(&parse_phi(a)?, traj.params.final_time)?))
        .collect::<Result<Vec<_>>>()?;
    let report = diagnose(&traj, &phis)?;
    match out {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            report.write_json(&dir.join("report.json"))?;
            report.write_csv(fs::File::create(dir.join("report.csv"))?)?;
        }
        None => emit(&report.to_json()?)?,
    }
    Ok(())
}

fn cmd_oracle(op: OracleOp, seed: u64, n: u32) -> Result<()> {
    let u = generate_datum(&DatumSpec::random(seed), TruncationBall(n))?;
    let report = match op {
        OracleOp::Convective => OracleReport {
            op,
            seed,
            n,
            fast: None,
            oracle: None,
            relative_difference: max_relative_difference(&convective(&u)?, &direct_convective(&u)),
        },
        OracleOp::Pressure => OracleReport {
            op,
            seed,
            n,
            fast: None,
            oracle: None,
            relative_difference: max_relative_difference(
                &nsv_core::solve_pressure(&u)?,
                &direct_pressure(&u),
            ),
        },
        OracleOp::Lp => {
            // L^2 of the pressure is band-limited, so the direct sum is exact
            let p = nsv_core::solve_pressure(&u)?;
            let size = lp_grid(p.ball());
            let fast = scalar_lp(&p, 2.0, size)?.integral;
            let oracle = direct_scalar_lp(&p, 2.0, size);
            OracleReport {
                op,
                seed,
                n,
                fast: Some(fast),
                oracle: Some(oracle),
                relative_difference: (fast - oracle).abs() / oracle.abs().max(f64::MIN_POSITIVE),
            }
        }
    };
    emit(&serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    init_threads()?;
    match cli.command {
        Command::Run { config, out } => cmd_run(&config, out),
        Command::Sweep { config, out } => cmd_sweep(&config, out),
        Command::Check { traj, phi, out } => cmd_check(&traj, &phi, out),
        Command::Oracle { op, seed, n } => cmd_oracle(op, seed, n),
    }
}
