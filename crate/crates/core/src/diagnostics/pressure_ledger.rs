//! Lebesgue-norm chain behind the pressure estimate.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::pressure::{lp_grid, scalar_lp, velocity_lp, LpValue, QUADRATURE_SELF_CHECK};
use crate::stepper::DiscreteTrajectory;

/// Relative slack allowed in the interpolation inequality.
pub const GN_SLACK: f64 = 1e-9;

/// Pressure coefficients below this times `max|u_k|^2` are roundoff; their
/// norm needs no self-check.
pub const PRESSURE_ROUNDOFF: f64 = 1e-13;

#[derive(Clone, Debug, Serialize)]
pub struct PressureRow {
    pub m: usize,
    pub u_l10_3: LpValue,
    pub u_l2: f64,
    pub grad_u_l2: f64,
    /// `||u||_2^(2/5) ||grad u||_2^(3/5)`
    pub gn_rhs: f64,
    pub gn_holds: bool,
    /// Recorded even when its self-check misses; see `pressure_resolved`.
    pub p_l5_3: LpValue,
    /// `p^m` is roundoff relative to `u^m` (exact pressure zero).
    pub p_negligible: bool,
    /// `||p||_{5/3} / ||u||_{10/3}^2`
    pub elliptic_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PressureLedger {
    pub rows: Vec<PressureRow>,
    /// `kappa sum_m ||p^m||_{5/3}^{5/3}`
    pub pressure_sum: f64,
    pub max_elliptic_ratio: f64,
    pub gn_all_hold: bool,
    pub quadrature_limit: f64,
    /// Every `||p^m||_{5/3}` passed the self-check.
    pub pressure_resolved: bool,
}

/// Fails with `QuadratureUnresolved` if a velocity norm misses the
/// self-check. Pressure norms whose zero set defeats the quadrature are
/// kept and flagged instead, so the rest of the ledger survives.
pub fn pressure_ledger(traj: &DiscreteTrajectory) -> Result<PressureLedger> {
    let kappa = traj.kappa();
    let rows = (1..=traj.steps())
        .into_par_iter()
        .map(|m| -> Result<PressureRow> {
            let u = &traj.states[m];
            let p = &traj.pressures[m - 1];
            let ul = velocity_lp(u, 10.0 / 3.0, lp_grid(u.ball()))?.require(QUADRATURE_SELF_CHECK)?;
            let pl = scalar_lp(p, 5.0 / 3.0, lp_grid(p.ball()))?;
            let nm = u.norms();
            let gn_rhs = nm.l2().powf(0.4) * nm.h1_seminorm().powf(0.6);
            let un = ul.norm();
            Ok(PressureRow {
                m,
                u_l10_3: ul,
                u_l2: nm.l2(),
                grad_u_l2: nm.h1_seminorm(),
                gn_rhs,
                gn_holds: un <= gn_rhs * (1.0 + GN_SLACK),
                p_l5_3: pl,
                p_negligible: p.max_abs() <= PRESSURE_ROUNDOFF * u.max_abs().powi(2),
                elliptic_ratio: if un > 0.0 { pl.norm() / (un * un) } else { 0.0 },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pressure_sum = kappa * rows.iter().map(|r| r.p_l5_3.integral).sum::<f64>();
    Ok(PressureLedger {
        pressure_sum,
        max_elliptic_ratio: rows.iter().map(|r| r.elliptic_ratio).fold(0.0, f64::max),
        gn_all_hold: rows.iter().all(|r| r.gn_holds),
        pressure_resolved: rows
            .iter()
            .all(|r| r.p_negligible || r.p_l5_3.relative_change <= QUADRATURE_SELF_CHECK),
        rows,
        quadrature_limit: QUADRATURE_SELF_CHECK,
    })
}
