//! Initial data, coupling schedules and multi-level sweeps.

mod datum;
mod sweep;

pub use datum::{generate_datum, DatumKind, DatumSpec};
pub use sweep::{cauchy_distance, run_sweep, LevelReport, SummaryRow, SweepPlan, SweepReport};

use serde::{Deserialize, Serialize};

use crate::error::{NsvError, Result};

/// Default exponent offset: `alpha_n = n^(-2/3 - eps)`, so `n alpha_n^3 = n^(-1 - 3 eps)`.
pub const DEFAULT_EPSILON: f64 = 1.0 / 12.0;

/// One sweep level `(n, M_n, alpha_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub n: u32,
    pub steps: usize,
    pub alpha: f64,
}

impl Level {
    /// `n alpha^3`, which the schedule must drive to zero.
    pub fn coupling(&self) -> f64 {
        self.n as f64 * self.alpha.powi(3)
    }
}

/// `alpha_n = n^(-2/3 - eps)`, `M_n = n`.
pub fn default_schedule(ns: &[u32]) -> Result<Vec<Level>> {
    power_schedule(ns, 2.0 / 3.0 + DEFAULT_EPSILON)
}

/// `alpha_n = n^-exponent`, `M_n = n`.
pub fn power_schedule(ns: &[u32], exponent: f64) -> Result<Vec<Level>> {
    let levels: Vec<Level> = ns
        .iter()
        .map(|&n| Level {
            n,
            steps: n as usize,
            alpha: (n as f64).powf(-exponent),
        })
        .collect();
    validate_schedule(&levels)?;
    Ok(levels)
}

/// `n` strictly increasing, `alpha` strictly decreasing, `M` nondecreasing
/// and `n alpha^3` strictly decreasing.
pub fn validate_schedule(levels: &[Level]) -> Result<()> {
    if levels.is_empty() {
        return Err(NsvError::ScheduleViolation("no levels".into()));
    }
    for l in levels {
        if l.n == 0 || l.steps == 0 || !(l.alpha.is_finite() && l.alpha >= 0.0) {
            return Err(NsvError::ScheduleViolation(format!("invalid level {l:?}")));
        }
    }
    for w in levels.windows(2) {
        let (a, b) = (w[0], w[1]);
        let fail = |what: &str| {
            Err(NsvError::ScheduleViolation(format!(
                "{what} between n={} and n={}",
                a.n, b.n
            )))
        };
        if b.n <= a.n {
            return fail("n not strictly increasing");
        }
        if b.alpha >= a.alpha {
            return fail("alpha not strictly decreasing");
        }
        if b.steps < a.steps {
            return fail("M decreasing");
        }
        if b.coupling() >= a.coupling() {
            return fail("n alpha^3 not strictly decreasing");
        }
    }
    Ok(())
}
