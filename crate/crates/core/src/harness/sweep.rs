//! Multi-level runs and cross-level convergence metrics.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_datum, validate_schedule, DatumSpec, Level};
use crate::diagnostics::{diagnose, DiagnosticsReport, TestFunction, TestFunctionSpec, REPORT_SCHEMA};
use crate::error::{NsvError, Result};
use crate::lattice::TruncationBall;
use crate::stepper::{run, DiscreteTrajectory, SchemeParams, DEFAULT_PICARD_MAX_ITER, DEFAULT_PICARD_TOL};

fn default_final_time() -> f64 {
    0.5
}

fn default_tol() -> f64 {
    DEFAULT_PICARD_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_PICARD_MAX_ITER
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub levels: Vec<Level>,
    pub datum: DatumSpec,
    #[serde(default = "default_final_time")]
    pub final_time: f64,
    #[serde(default)]
    pub phis: Vec<TestFunctionSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_max_iter")]
    pub picard_max_iter: usize,
}

impl SweepPlan {
    pub fn params(&self, level: &Level) -> SchemeParams {
        SchemeParams {
            ball: TruncationBall(level.n),
            steps: level.steps,
            final_time: self.final_time,
            alpha: level.alpha,
            picard_tol: self.picard_tol,
            picard_max_iter: self.picard_max_iter,
        }
    }

    pub fn test_functions(&self) -> Result<Vec<TestFunction>> {
        self.phis
            .iter()
            .map(|s| TestFunction::new(s, self.final_time))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    pub level: Level,
    pub coupling: f64,
    pub report: DiagnosticsReport,
}

/// One line of the convergence table.
#[derive(Clone, Debug, Serialize)]
pub struct SummaryRow {
    pub n: u32,
    pub steps: usize,
    pub alpha: f64,
    pub coupling: f64,
    pub energy_residual_max: f64,
    pub tdw: f64,
    pub tdw_grad: f64,
    pub twodw: f64,
    pub pressure_sum: f64,
    pub sup_energy: f64,
    /// `||u - v||_{L^2 L^2}`
    pub u_minus_v: f64,
    /// `sqrt((T / 3M)(||u0||^2 + a^2 ||grad u0||^2))`
    pub u_minus_v_bound: f64,
    /// `sum I - lhs` per test function
    pub lei_residual: Vec<f64>,
    /// local energy inequality gap per test function
    pub lei_gap: Vec<f64>,
    /// `|I5|` per test function
    pub i5_abs: Vec<f64>,
    /// Distance to the next level, if any.
    pub cauchy_next: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub schema: &'static str,
    pub plan: SweepPlan,
    pub levels: Vec<LevelReport>,
    /// `||u_l - u_{l+1}||_{L^2(0,T; L^2)}` for successive levels.
    pub cauchy: Vec<f64>,
    pub summary: Vec<SummaryRow>,
    pub note: &'static str,
}

const SUBSEQUENCE_NOTE: &str =
    "metrics are over the full level sequence; convergence along a subsequence is not distinguished";

/// `||u_a - u_b||_{L^2(0,T; L^2)}` for the piecewise constant interpolants,
/// both embedded in the larger ball. Exact: the integrand is constant on
/// every cell of the merged time net.
pub fn cauchy_distance(a: &DiscreteTrajectory, b: &DiscreteTrajectory) -> f64 {
    let (ma, mb) = (a.steps() as u64, b.steps() as u64);
    let t = a.params.final_time;
    let (mut i, mut j) = (0u64, 0u64);
    // current position as the fraction pos / (ma mb)
    let mut pos = 0u64;
    let mut acc = 0.0;
    while i < ma && j < mb {
        let next_a = (i + 1) * mb;
        let next_b = (j + 1) * ma;
        let next = next_a.min(next_b);
        let len = t * (next - pos) as f64 / (ma * mb) as f64;
        let d = a.states[i as usize + 1].sub(&b.states[j as usize + 1]);
        acc += len * d.l2_sq();
        pos = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    acc.sqrt()
}

pub fn run_sweep(plan: &SweepPlan) -> Result<SweepReport> {
    validate_schedule(&plan.levels)?;
    let phis = plan.test_functions()?;
    let top = plan.levels.iter().map(|l| l.n).max().unwrap_or(1);
    let u0 = generate_datum(&plan.datum, TruncationBall(top))?;

    let runs = plan
        .levels
        .par_iter()
        .map(|level| -> Result<(DiscreteTrajectory, DiagnosticsReport)> {
            let wrap = |e: NsvError| NsvError::Level {
                n: level.n,
                source: Box::new(e),
            };
            let traj = run(&u0, &plan.params(level)).map_err(wrap)?;
            let report = diagnose(&traj, &phis).map_err(wrap)?;
            Ok((traj, report))
        })
        .collect::<Result<Vec<_>>>()?;

    let cauchy: Vec<f64> = runs
        .windows(2)
        .map(|w| cauchy_distance(&w[0].0, &w[1].0))
        .collect();

    let summary = plan
        .levels
        .iter()
        .zip(&runs)
        .enumerate()
        .map(|(idx, (level, (_, r)))| SummaryRow {
            n: level.n,
            steps: level.steps,
            alpha: level.alpha,
            coupling: level.coupling(),
            energy_residual_max: r.energy.max_residual(),
            tdw: r.weighted.tdw,
            tdw_grad: r.weighted.tdw_grad,
            twodw: r.weighted.twodw,
            pressure_sum: r.pressure.pressure_sum,
            sup_energy: r.energy.sup_energy,
            u_minus_v: r.interpolants.lhs1.sqrt(),
            u_minus_v_bound: r.interpolants.lhs1_bound.sqrt(),
            lei_residual: r.lei.iter().map(|l| l.residual).collect(),
            lei_gap: r.lei.iter().map(|l| l.gap).collect(),
            i5_abs: r.lei.iter().map(|l| l.terms.i5.abs()).collect(),
            cauchy_next: cauchy.get(idx).copied(),
        })
        .collect();

    let levels = plan
        .levels
        .iter()
        .zip(runs)
        .map(|(level, (_, report))| LevelReport {
            level: *level,
            coupling: level.coupling(),
            report,
        })
        .collect();

    let out = SweepReport {
        schema: REPORT_SCHEMA,
        plan: plan.clone(),
        levels,
        cauchy,
        summary,
        note: SUBSEQUENCE_NOTE,
    };
    if let Some(dir) = &plan.output_dir {
        out.write_to(dir)?;
    }
    Ok(out)
}

impl SweepReport {
    /// Fixed-format table; identical inputs give identical bytes.
    pub fn summary_table(&self) -> String {
        let nphi = self.plan.phis.len();
        let mut s = String::from(
            "n,M,alpha,n_alpha3,energy_residual_max,tdw,tdw_grad,twodw,pressure_sum,sup_energy,u_minus_v,u_minus_v_bound",
        );
        for i in 0..nphi {
            let _ = write!(s, ",lei_residual_{i},lei_gap_{i},i5_abs_{i}");
        }
        s.push_str(",cauchy_next\n");
        for r in &self.summary {
            let _ = write!(
                s,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.n,
                r.steps,
                r.alpha,
                r.coupling,
                r.energy_residual_max,
                r.tdw,
                r.tdw_grad,
                r.twodw,
                r.pressure_sum,
                r.sup_energy,
                r.u_minus_v,
                r.u_minus_v_bound
            );
            for i in 0..nphi {
                let _ = write!(
                    s,
                    ",{:.16e},{:.16e},{:.16e}",
                    r.lei_residual[i], r.lei_gap[i], r.i5_abs[i]
                );
            }
            match r.cauchy_next {
                Some(c) => {
                    let _ = writeln!(s, ",{c:.16e}");
                }
                None => s.push_str(",\n"),
            }
        }
        s
    }

    /// `summary.csv`, `sweep.json`, and per level `level_<n>.json` and
    /// `level_<n>.csv`.
    pub fn write_to(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("summary.csv"), self.summary_table())?;
        std::fs::write(dir.join("sweep.json"), serde_json::to_string_pretty(self)?)?;
        for l in &self.levels {
            l.report.write_json(&dir.join(format!("level_{}.json", l.level.n)))?;
            let f = std::fs::File::create(dir.join(format!("level_{}.csv", l.level.n)))?;
            l.report.write_csv(f)?;
        }
        Ok(())
    }
}
