//! Fully discrete scheme: implicit Euler in time, Fourier-Galerkin in space.
//!
//! One step solves, for every mode `0 < |k| <= n`,
//!
//! ```text
//! (1 + a^2 |k|^2 + kappa |k|^2) u_k = (1 + a^2 |k|^2) prev_k - kappa [P_n((u . grad) u)]_k
//! ```
//!
//! by Picard iteration started from `prev`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NsvError, Result};
use crate::field::{Coefficient, SpectralScalar, SpectralVelocity};
use crate::lattice::TruncationBall;
use crate::nonlinearity::projected_convective;
use crate::pressure::solve_pressure;

pub const DEFAULT_PICARD_TOL: f64 = 1e-12;
pub const DEFAULT_PICARD_MAX_ITER: usize = 200;

fn default_tol() -> f64 {
    DEFAULT_PICARD_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_PICARD_MAX_ITER
}

/// `(n, M, T, alpha)` plus the nonlinear solver controls. Viscosity is 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub ball: TruncationBall,
    pub steps: usize,
    pub final_time: f64,
    pub alpha: f64,
    #[serde(default = "default_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_max_iter")]
    pub picard_max_iter: usize,
}

impl SchemeParams {
    pub fn new(ball: TruncationBall, steps: usize, final_time: f64, alpha: f64) -> Self {
        SchemeParams {
            ball,
            steps,
            final_time,
            alpha,
            picard_tol: DEFAULT_PICARD_TOL,
            picard_max_iter: DEFAULT_PICARD_MAX_ITER,
        }
    }

    /// `kappa = T / M`.
    pub fn time_step(&self) -> f64 {
        self.final_time / self.steps as f64
    }

    pub fn time(&self, m: usize) -> f64 {
        // exact at m = M
        self.final_time * m as f64 / self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(NsvError::InvalidParams(msg.into()));
        if self.ball.radius() == 0 {
            return bad("n must be positive");
        }
        if self.steps == 0 {
            return bad("M must be positive");
        }
        if !(self.final_time.is_finite() && self.final_time > 0.0) {
            return bad("T must be positive and finite");
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad("alpha must be nonnegative and finite");
        }
        if !(self.picard_tol.is_finite() && self.picard_tol > 0.0) {
            return bad("picard_tol must be positive");
        }
        if self.picard_max_iter == 0 {
            return bad("picard_max_iter must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub state: SpectralVelocity,
    /// Nonlinear evaluations performed.
    pub iterations: usize,
    /// Scaled residual of the returned state.
    pub residual: f64,
}

fn coeff_norm(f: &SpectralVelocity) -> f64 {
    f.coeffs().iter().map(|c| c.abs_sq()).sum::<f64>().sqrt()
}

/// One implicit Euler step from `prev`.
///
/// The residual of an iterate `u` is
/// `|D u - B prev + kappa P_n N(u)| / |B prev|` in the coefficient `l^2` norm,
/// with `B = 1 + a^2 |k|^2` and `D = B + kappa |k|^2`. The returned state is
/// the last iterate whose residual was actually measured.
pub fn euler_step(prev: &SpectralVelocity, params: &SchemeParams) -> Result<StepOutcome> {
    let kappa = params.time_step();
    let a2 = params.alpha * params.alpha;
    let prev = prev.resample(params.ball);
    let rhs = prev.radial(|kk| 1.0 + a2 * kk);
    let scale = coeff_norm(&rhs);
    let solve = |w: &SpectralVelocity| w.radial(|kk| 1.0 / (1.0 + a2 * kk + kappa * kk));

    let mut u = prev.clone();
    let mut residual = f64::INFINITY;
    for it in 1..=params.picard_max_iter {
        let nl = projected_convective(&u)?;
        let next = solve(&rhs.sub(&nl.scale(kappa)));
        // D (u - next) is exactly the scheme residual at u
        let defect = coeff_norm(&u.sub(&next).radial(|kk| 1.0 + a2 * kk + kappa * kk));
        residual = if scale > 0.0 { defect / scale } else { defect };
        if residual <= params.picard_tol {
            return Ok(StepOutcome {
                state: u,
                iterations: it,
                residual,
            });
        }
        if !residual.is_finite() {
            break;
        }
        u = next;
    }
    Err(NsvError::NonlinearSolveFailed {
        step: None,
        iterations: params.picard_max_iter,
        residual,
    })
}

/// States `u^0..u^M`, pressures `p^1..p^M` and solver statistics.
#[derive(Clone, Debug)]
pub struct DiscreteTrajectory {
    pub params: SchemeParams,
    /// The datum before projection; `states[0]` is its `P_n` image.
    pub datum: SpectralVelocity,
    pub states: Vec<SpectralVelocity>,
    /// `pressures[m - 1]` belongs to `states[m]`.
    pub pressures: Vec<SpectralScalar>,
    pub picard_iters: Vec<usize>,
    pub picard_residuals: Vec<f64>,
}

impl DiscreteTrajectory {
    /// Builds a trajectory from stored states, recomputing the pressures.
    /// Solver statistics are unknown and left empty.
    pub fn from_states(params: SchemeParams, states: Vec<SpectralVelocity>) -> Result<Self> {
        params.validate()?;
        if states.len() != params.steps + 1 {
            return Err(NsvError::InvalidParams(format!(
                "expected {} states, got {}",
                params.steps + 1,
                states.len()
            )));
        }
        let states: Vec<_> = states.iter().map(|s| s.resample(params.ball)).collect();
        let pressures = pressures_of(&states[1..])?;
        Ok(DiscreteTrajectory {
            params,
            datum: states[0].clone(),
            states,
            pressures,
            picard_iters: Vec::new(),
            picard_residuals: Vec::new(),
        })
    }

    pub fn kappa(&self) -> f64 {
        self.params.time_step()
    }

    pub fn steps(&self) -> usize {
        self.params.steps
    }
}

fn pressures_of(states: &[SpectralVelocity]) -> Result<Vec<SpectralScalar>> {
    states.par_iter().map(solve_pressure).collect()
}

/// Integrates `M` steps from `P_n u0`.
pub fn run(u0: &SpectralVelocity, params: &SchemeParams) -> Result<DiscreteTrajectory> {
    params.validate()?;
    let mut states = Vec::with_capacity(params.steps + 1);
    states.push(u0.truncate(params.ball));
    let mut picard_iters = Vec::with_capacity(params.steps);
    let mut picard_residuals = Vec::with_capacity(params.steps);
    for m in 1..=params.steps {
        let out = euler_step(&states[m - 1], params).map_err(|e| match e {
            NsvError::NonlinearSolveFailed {
                iterations,
                residual,
                ..
            } => NsvError::NonlinearSolveFailed {
                step: Some(m),
                iterations,
                residual,
            },
            other => other,
        })?;
        picard_iters.push(out.iterations);
        picard_residuals.push(out.residual);
        states.push(out.state);
    }
    let pressures = pressures_of(&states[1..])?;
    Ok(DiscreteTrajectory {
        params: *params,
        datum: u0.clone(),
        states,
        pressures,
        picard_iters,
        picard_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralVector;
    use crate::lattice::WaveVector;
    use num_complex::Complex64;

    const Z: Complex64 = Complex64 { re: 0.0, im: 0.0 };

    fn shear(ball: u32) -> SpectralVelocity {
        let v = SpectralVector::from_modes(
            TruncationBall(ball),
            [(WaveVector::new(0, 1, 0), [Complex64::new(0.0, -0.5), Z, Z])],
        )
        .unwrap();
        SpectralVelocity::try_new(v).unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let p = SchemeParams::new(TruncationBall(3), 4, 0.5, 0.3);
        let t = run(&SpectralVelocity::zeros(TruncationBall(3)), &p).unwrap();
        assert!(t.states.iter().all(|s| s.is_zero()));
        assert!(t.pressures.iter().all(|s| s.is_zero()));
        assert_eq!(t.picard_iters, vec![1; 4]);
    }

    #[test]
    fn shear_decays_geometrically() {
        let p = SchemeParams::new(TruncationBall(3), 10, 0.5, 0.4);
        let t = run(&shear(3), &p).unwrap();
        let a2 = 0.16;
        let ratio = (1.0 + a2) / (1.0 + a2 + p.time_step());
        let k = WaveVector::new(0, 1, 0);
        for (m, s) in t.states.iter().enumerate() {
            let want = -0.5 * ratio.powi(m as i32);
            let got = s.get(k)[0].im;
            assert!((got - want).abs() <= 1e-12 * want.abs());
        }
    }

    #[test]
    fn bad_params_rejected() {
        let mut p = SchemeParams::new(TruncationBall(3), 0, 0.5, 0.4);
        assert!(p.validate().is_err());
        p.steps = 2;
        p.alpha = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn failure_reports_step() {
        // one iteration cannot converge for a field with nonzero transfer
        let v = SpectralVector::from_modes(
            TruncationBall(2),
            [
                (WaveVector::new(1, 0, 0), [Z, Complex64::new(0.5, 0.0), Z]),
                (WaveVector::new(0, 1, 1), [Complex64::new(0.0, 0.7), Z, Z]),
                (WaveVector::new(1, 1, 0), [Z, Z, Complex64::new(0.3, 0.1)]),
            ],
        )
        .unwrap();
        let u = SpectralVelocity::try_new(v).unwrap();
        let mut p = SchemeParams::new(TruncationBall(2), 3, 0.5, 0.0);
        p.picard_max_iter = 1;
        match run(&u, &p) {
            Err(NsvError::NonlinearSolveFailed { step, iterations, .. }) => {
                assert_eq!(step, Some(1));
                assert_eq!(iterations, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
