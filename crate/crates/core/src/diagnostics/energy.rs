//! Discrete energy equality, weighted higher-order sums and the exact
//! interpolant identities.

use serde::Serialize;

use super::interpolants::Interpolants;
use super::quadrature::{gauss_legendre, integrate};
use super::Checked;
use crate::field::SpectralVelocity;
use crate::stepper::DiscreteTrajectory;

/// Relative tolerance factor on the energy residual, times `picard_tol`.
pub const ENERGY_TOL_FACTOR: f64 = 100.0;
pub const IDENTITY_TOL: f64 = 1e-13;

/// Terms of the energy balance after `m` steps.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyRow {
    pub m: usize,
    /// `||u^m||^2`
    pub kinetic: f64,
    /// `sum_{i<=m} ||u^i - u^{i-1}||^2`
    pub increments: f64,
    /// `2 kappa sum_{i<=m} ||grad u^i||^2`
    pub dissipation: f64,
    /// `a^2 ||grad u^m||^2`
    pub voigt: f64,
    /// `a^2 sum_{i<=m} ||grad(u^i - u^{i-1})||^2`
    pub voigt_increments: f64,
    pub lhs: f64,
    pub residual: Checked,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyLedger {
    pub rows: Vec<EnergyRow>,
    /// `||P_n u0||^2 + a^2 ||grad P_n u0||^2`, the right side actually balanced.
    pub rhs_projected: f64,
    /// `||u0||^2 + a^2 ||grad u0||^2` for the unprojected datum.
    pub rhs_datum: f64,
    /// `||(I - P_n) u0||_2`
    pub datum_tail_l2: f64,
    /// `max_m (||u^m||^2 + a^2 ||grad u^m||^2)`
    pub sup_energy: f64,
    /// `max_t ||v(t)||^2`; `||v||^2` is convex on each interval, so the
    /// maximum is attained at a node.
    pub sup_v_l2_sq: f64,
    pub bounds_hold: bool,
}

pub fn energy_ledger(traj: &DiscreteTrajectory) -> EnergyLedger {
    let a2 = traj.params.alpha * traj.params.alpha;
    let kappa = traj.kappa();
    let tol = ENERGY_TOL_FACTOR * traj.params.picard_tol;
    let n0 = traj.states[0].norms();
    let rhs = n0.l2_sq + a2 * n0.h1_sq;
    let nd = traj.datum.norms();
    let rhs_datum = nd.l2_sq + a2 * nd.h1_sq;
    let tail = traj.datum.sub(&traj.states[0]);
    let mut rows = Vec::with_capacity(traj.steps());
    let (mut inc, mut diss, mut vinc) = (0.0, 0.0, 0.0);
    let mut sup_energy = rhs;
    let mut sup_v = n0.l2_sq;
    for m in 1..=traj.steps() {
        let d = traj.states[m].sub(&traj.states[m - 1]).norms();
        let nm = traj.states[m].norms();
        inc += d.l2_sq;
        diss += 2.0 * kappa * nm.h1_sq;
        vinc += a2 * d.h1_sq;
        let lhs = nm.l2_sq + inc + diss + a2 * nm.h1_sq + vinc;
        let residual = if rhs > 0.0 { (lhs - rhs).abs() / rhs } else { lhs };
        sup_energy = sup_energy.max(nm.l2_sq + a2 * nm.h1_sq);
        sup_v = sup_v.max(nm.l2_sq);
        rows.push(EnergyRow {
            m,
            kinetic: nm.l2_sq,
            increments: inc,
            dissipation: diss,
            voigt: a2 * nm.h1_sq,
            voigt_increments: vinc,
            lhs,
            residual: Checked::at_most(residual, tol),
        });
    }
    let slack = 1.0 + tol;
    EnergyLedger {
        rows,
        rhs_projected: rhs,
        rhs_datum,
        datum_tail_l2: tail.l2_sq().sqrt(),
        sup_energy,
        sup_v_l2_sq: sup_v,
        bounds_hold: sup_v <= rhs * slack && sup_energy <= rhs * slack,
    }
}

impl EnergyLedger {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual.value).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WeightedEstimates {
    /// `a^3 kappa sum ||d_t u^m||^2`
    pub tdw: f64,
    /// `a^5 kappa sum ||d_t grad u^m||^2`
    pub tdw_grad: f64,
    /// `a^6 kappa sum ||lap u^m||^2`
    pub twodw: f64,
}

pub fn weighted_estimates(traj: &DiscreteTrajectory) -> WeightedEstimates {
    let a = traj.params.alpha;
    let kappa = traj.kappa();
    let (mut dt, mut dtg, mut lap) = (0.0, 0.0, 0.0);
    for m in 1..=traj.steps() {
        let d = traj.states[m].sub(&traj.states[m - 1]).norms();
        dt += d.l2_sq / (kappa * kappa);
        dtg += d.h1_sq / (kappa * kappa);
        lap += traj.states[m].norms().h2_sq;
    }
    WeightedEstimates {
        tdw: a.powi(3) * kappa * dt,
        tdw_grad: a.powi(5) * kappa * dtg,
        twodw: a.powi(6) * kappa * lap,
    }
}

/// `||v - u||^2_{L^2 L^2}` and its gradient analogue, each computed by
/// quadrature through the interpolants and by the closed-form sum.
#[derive(Clone, Debug, Serialize)]
pub struct InterpolantIdentities {
    pub lhs1: f64,
    pub rhs1: f64,
    pub lhs2: f64,
    pub rhs2: f64,
    pub residual1: Checked,
    pub residual2: Checked,
    /// `(T / 3M)(||u0||^2 + a^2 ||grad u0||^2)`, an upper bound for `lhs1`.
    pub lhs1_bound: f64,
    pub bound_holds: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

pub fn interpolant_identities(traj: &DiscreteTrajectory) -> InterpolantIdentities {
    let p = &traj.params;
    let kappa = traj.kappa();
    let it = Interpolants::new(traj);
    // the integrand is quadratic in t on every interval
    let rule = gauss_legendre(3);
    let (mut lhs1, mut lhs2, mut rhs1, mut rhs2) = (0.0, 0.0, 0.0, 0.0);
    for m in 1..=p.steps {
        let (t0, t1) = (p.time(m - 1), p.time(m));
        let diff = |t: f64| -> SpectralVelocity { it.v(t).sub(it.u(t)) };
        lhs1 += integrate(&rule, t0, t1, |t| diff(t).norms().l2_sq);
        lhs2 += integrate(&rule, t0, t1, |t| diff(t).norms().h1_sq);
        let d = traj.states[m].sub(&traj.states[m - 1]).norms();
        rhs1 += kappa / 3.0 * d.l2_sq;
        rhs2 += kappa / 3.0 * d.h1_sq;
    }
    let nd = traj.datum.norms();
    let bound = p.final_time / (3.0 * p.steps as f64) * (nd.l2_sq + p.alpha * p.alpha * nd.h1_sq);
    InterpolantIdentities {
        lhs1,
        rhs1,
        lhs2,
        rhs2,
        residual1: Checked::at_most(rel(lhs1, rhs1), IDENTITY_TOL),
        residual2: Checked::at_most(rel(lhs2, rhs2), IDENTITY_TOL),
        lhs1_bound: bound,
        bound_holds: lhs1 <= bound * (1.0 + 1e-12),
    }
}
