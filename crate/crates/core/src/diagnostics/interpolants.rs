//! Time reconstructions of a discrete trajectory and space-time test
//! functions.

use serde::{Deserialize, Serialize};

use crate::error::{NsvError, Result};
use crate::field::{SpectralScalar, SpectralVelocity};
use crate::stepper::DiscreteTrajectory;
use crate::weight::{SpatialWeight, WeightSpec};

/// `u` and `p` are piecewise constant with value `u^m` on `[t_{m-1}, t_m)`;
/// `v` is the continuous piecewise linear interpolant of the nodes.
pub struct Interpolants<'a> {
    traj: &'a DiscreteTrajectory,
}

impl<'a> Interpolants<'a> {
    pub fn new(traj: &'a DiscreteTrajectory) -> Self {
        Interpolants { traj }
    }

    /// The `m` with `t` in `[t_{m-1}, t_m)`, and `M` at `t = T`.
    pub fn interval(&self, t: f64) -> usize {
        let p = &self.traj.params;
        let m = (t / p.time_step()).floor() as usize + 1;
        m.clamp(1, p.steps)
    }

    pub fn u(&self, t: f64) -> &'a SpectralVelocity {
        &self.traj.states[self.interval(t)]
    }

    pub fn p(&self, t: f64) -> &'a SpectralScalar {
        &self.traj.pressures[self.interval(t) - 1]
    }

    pub fn v(&self, t: f64) -> SpectralVelocity {
        let m = self.interval(t);
        let p = &self.traj.params;
        let tau = (t - p.time(m - 1)) / p.time_step();
        let a = &self.traj.states[m - 1];
        let b = &self.traj.states[m];
        a.add(&b.sub(a).scale(tau))
    }
}

/// `theta(t) = (1 - s^2)^4` on `(start, end)`, zero outside, where `s` maps
/// the support onto `(-1, 1)`. Three times continuously differentiable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeBump {
    pub start: f64,
    pub end: f64,
}

impl TimeBump {
    fn s(&self, t: f64) -> f64 {
        (2.0 * t - self.start - self.end) / (self.end - self.start)
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= self.start || t >= self.end {
            return 0.0;
        }
        let s = self.s(t);
        (1.0 - s * s).powi(4)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t <= self.start || t >= self.end {
            return 0.0;
        }
        let s = self.s(t);
        -8.0 * s * (1.0 - s * s).powi(3) * 2.0 / (self.end - self.start)
    }
}

/// Serializable test function `phi(t, x) = theta(t) psi(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSpec {
    pub weight: WeightSpec,
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Debug)]
pub struct TestFunction {
    pub spec: TestFunctionSpec,
    pub spatial: SpatialWeight,
    pub temporal: TimeBump,
}

impl TestFunction {
    /// Checks `0 < start < end < T` and `psi >= 0`.
    pub fn new(spec: &TestFunctionSpec, final_time: f64) -> Result<Self> {
        if !(spec.start > 0.0 && spec.start < spec.end && spec.end < final_time) {
            return Err(NsvError::InvalidParams(format!(
                "temporal support ({}, {}) must lie inside (0, {final_time})",
                spec.start, spec.end
            )));
        }
        Ok(TestFunction {
            spec: spec.clone(),
            spatial: SpatialWeight::from_spec(&spec.weight)?,
            temporal: TimeBump {
                start: spec.start,
                end: spec.end,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralVector;
    use crate::lattice::{TruncationBall, WaveVector};
    use crate::stepper::{run, SchemeParams};
    use num_complex::Complex64;

    #[test]
    fn bump_derivative_matches_difference() {
        let b = TimeBump { start: 0.1, end: 0.4 };
        for t in [0.12, 0.2, 0.25, 0.33, 0.39] {
            let h = 1e-6;
            let fd = (b.value(t + h) - b.value(t - h)) / (2.0 * h);
            assert!((fd - b.derivative(t)).abs() < 1e-6);
        }
        assert_eq!(b.value(0.05), 0.0);
        assert!((b.value(0.25) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interpolants_agree_at_nodes() {
        let z = Complex64::new(0.0, 0.0);
        let v = SpectralVector::from_modes(
            TruncationBall(2),
            [(WaveVector::new(0, 1, 0), [Complex64::new(0.0, -0.5), z, z])],
        )
        .unwrap();
        let u0 = SpectralVelocity::try_new(v).unwrap();
        let p = SchemeParams::new(TruncationBall(2), 4, 1.0, 0.5);
        let t = run(&u0, &p).unwrap();
        let it = Interpolants::new(&t);
        assert_eq!(it.interval(0.0), 1);
        assert_eq!(it.interval(0.25), 2);
        assert_eq!(it.interval(1.0), 4);
        // v(t_m) = u^m from the right interval
        assert!(it.v(0.5).sub(&t.states[2]).max_abs() < 1e-16);
        assert!(it.u(0.3).sub(&t.states[2]).max_abs() == 0.0);
    }

    #[test]
    fn support_must_be_interior() {
        let spec = TestFunctionSpec {
            weight: WeightSpec::Constant,
            start: 0.0,
            end: 0.3,
        };
        assert!(TestFunction::new(&spec, 0.5).is_err());
    }
}
