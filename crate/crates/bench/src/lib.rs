//! Fixtures shared by the kernel benchmarks in `benches/`.

use nsv_core::{generate_datum, DatumSpec, SchemeParams, SpectralVelocity, TruncationBall};

/// Seeded random field with `|k|^-4` decay on the ball of radius `n`.
pub fn field(n: u32) -> SpectralVelocity {
    generate_datum(&DatumSpec::random(42), TruncationBall(n)).expect("valid datum")
}

/// One-step parameters at radius `n` with the default coupling `alpha = n^-3/4`.
pub fn params(n: u32) -> SchemeParams {
    SchemeParams::new(TruncationBall(n), n as usize, 0.5, (n as f64).powf(-0.75))
}
