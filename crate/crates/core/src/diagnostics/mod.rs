//! Ledger of discrete identities and estimates for a computed trajectory.

mod energy;
mod interpolants;
mod lei;
mod pressure_ledger;
pub mod quadrature;

use std::io::Write;
use std::path::Path;

use serde::Serialize;

pub use energy::{
    energy_ledger, interpolant_identities, weighted_estimates, EnergyLedger, EnergyRow,
    InterpolantIdentities, WeightedEstimates, ENERGY_TOL_FACTOR, IDENTITY_TOL,
};
pub use interpolants::{Interpolants, TestFunction, TestFunctionSpec, TimeBump};
pub use lei::{
    lei_grid, lei_residual, lei_residual_with_order, LeiReport, LeiTerms, DEFAULT_TIME_ORDER,
    LEI_IDENTITY_TOL, ORDER_STABILITY_TOL,
};
pub use pressure_ledger::{pressure_ledger, PressureLedger, PressureRow, GN_SLACK, PRESSURE_ROUNDOFF};

use crate::error::Result;
use crate::stepper::{DiscreteTrajectory, SchemeParams};

pub const REPORT_SCHEMA: &str = "nsv-report/1";

/// A value together with the bound it was checked against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Checked {
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Checked {
    pub fn at_most(value: f64, tolerance: f64) -> Self {
        Checked {
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsReport {
    pub schema: &'static str,
    pub params: SchemeParams,
    pub kappa: f64,
    pub picard_iters: Vec<usize>,
    pub picard_residuals: Vec<f64>,
    pub energy: EnergyLedger,
    pub weighted: WeightedEstimates,
    pub pressure: PressureLedger,
    pub interpolants: InterpolantIdentities,
    pub lei: Vec<LeiReport>,
}

pub fn diagnose(traj: &DiscreteTrajectory, phis: &[TestFunction]) -> Result<DiagnosticsReport> {
    let lei = phis
        .iter()
        .map(|phi| lei_residual(traj, phi))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticsReport {
        schema: REPORT_SCHEMA,
        params: traj.params,
        kappa: traj.kappa(),
        picard_iters: traj.picard_iters.clone(),
        picard_residuals: traj.picard_residuals.clone(),
        energy: energy_ledger(traj),
        weighted: weighted_estimates(traj),
        pressure: pressure_ledger(traj)?,
        interpolants: interpolant_identities(traj),
        lei,
    })
}

#[derive(Serialize)]
struct StepRow {
    m: usize,
    t: f64,
    kinetic: f64,
    increments: f64,
    dissipation: f64,
    voigt: f64,
    voigt_increments: f64,
    energy_lhs: f64,
    energy_residual: f64,
    picard_iters: Option<usize>,
    picard_residual: Option<f64>,
    u_l10_3: f64,
    gn_rhs: f64,
    p_l5_3: f64,
    elliptic_ratio: f64,
}

impl DiagnosticsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_json()?.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }

    /// One row per step `m = 1..M`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (e, p) in self.energy.rows.iter().zip(&self.pressure.rows) {
            w.serialize(StepRow {
                m: e.m,
                t: self.params.time(e.m),
                kinetic: e.kinetic,
                increments: e.increments,
                dissipation: e.dissipation,
                voigt: e.voigt,
                voigt_increments: e.voigt_increments,
                energy_lhs: e.lhs,
                energy_residual: e.residual.value,
                picard_iters: self.picard_iters.get(e.m - 1).copied(),
                picard_residual: self.picard_residuals.get(e.m - 1).copied(),
                u_l10_3: p.u_l10_3.norm(),
                gn_rhs: p.gn_rhs,
                p_l5_3: p.p_l5_3.norm(),
                elliptic_ratio: p.elliptic_ratio,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}
