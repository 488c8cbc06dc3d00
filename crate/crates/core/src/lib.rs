//! Fully discrete implicit Euler / Fourier-Galerkin scheme for the
//! Navier-Stokes-Voigt equations on the torus `[0, 2pi)^3` with unit
//! viscosity, and a diagnostics ledger for its discrete identities.

pub mod diagnostics;
pub mod error;
pub mod field;
pub mod harness;
pub mod lattice;
pub mod nonlinearity;
pub mod oracle;
pub mod pressure;
pub mod snapshot;
pub mod stepper;
pub mod transform;
pub mod weight;

pub use diagnostics::{diagnose, DiagnosticsReport, TestFunction, TestFunctionSpec};
pub use error::{NsvError, Result};
pub use field::{Norms, SpectralScalar, SpectralVector, SpectralVelocity};
pub use harness::{generate_datum, run_sweep, DatumKind, DatumSpec, Level, SweepPlan, SweepReport};
pub use lattice::{TruncationBall, WaveVector};
pub use nonlinearity::{galerkin_nonlinearity, NonlinearTerm};
pub use pressure::solve_pressure;
pub use stepper::{euler_step, run, DiscreteTrajectory, SchemeParams};
pub use weight::{SpatialWeight, WeightSpec};
