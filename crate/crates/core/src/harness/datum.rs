//! Initial data.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{NsvError, Result};
use crate::field::{SpectralVector, SpectralVelocity};
use crate::lattice::{ModeLattice, TruncationBall, WaveVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatumKind {
    /// `(cos x1 sin x2, -sin x1 cos x2, 0)`
    TaylorGreen,
    /// `(sin x1 cos x2 cos x3, -cos x1 sin x2 cos x3, 0)`
    TaylorGreen3d,
    /// `(sin x2, 0, 0)`
    Shear,
    /// Gaussian coefficients with `|c_k| ~ |k|^-s`.
    RandomHs,
}

fn default_decay() -> f64 {
    4.0
}

fn default_amplitude() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatumSpec {
    pub kind: DatumKind,
    /// Decay exponent `s` of `random_hs`.
    #[serde(default = "default_decay")]
    pub s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

impl DatumSpec {
    pub fn new(kind: DatumKind) -> Self {
        DatumSpec {
            kind,
            s: default_decay(),
            seed: 0,
            amplitude: default_amplitude(),
        }
    }

    pub fn random(seed: u64) -> Self {
        DatumSpec {
            seed,
            ..Self::new(DatumKind::RandomHs)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(NsvError::InvalidParams("datum amplitude must be finite".into()));
        }
        if self.kind == DatumKind::RandomHs && !(self.s.is_finite() && self.s >= 0.0) {
            return Err(NsvError::InvalidParams("decay exponent must be nonnegative".into()));
        }
        Ok(())
    }
}

/// The datum restricted to `ball`.
///
/// Random coefficients are drawn per mode from a stream keyed by `(seed, k)`,
/// so the datum on a small ball is exactly the truncation of the datum on a
/// larger one.
pub fn generate_datum(spec: &DatumSpec, ball: TruncationBall) -> Result<SpectralVelocity> {
    spec.validate()?;
    let a = spec.amplitude;
    let u = match spec.kind {
        DatumKind::Shear => {
            let i = Complex64::new(0.0, 1.0);
            let z = Complex64::new(0.0, 0.0);
            let v = SpectralVector::from_modes(
                TruncationBall(1),
                [(WaveVector::new(0, 1, 0), [-0.5 * a * i, z, z])],
            )?;
            v.leray_project()
        }
        DatumKind::TaylorGreen => {
            let q = Complex64::new(0.0, 0.25 * a);
            let z = Complex64::new(0.0, 0.0);
            SpectralVector::from_modes(
                TruncationBall(2),
                [
                    (WaveVector::new(1, 1, 0), [-q, q, z]),
                    (WaveVector::new(1, -1, 0), [q, q, z]),
                ],
            )?
            .leray_project()
        }
        DatumKind::TaylorGreen3d => {
            let q = Complex64::new(0.0, 0.125 * a);
            let z = Complex64::new(0.0, 0.0);
            let modes = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
                .map(|(s2, s3)| (WaveVector::new(1, s2, s3), [-q, q * s2 as f64, z]));
            SpectralVector::from_modes(TruncationBall(2), modes)?.leray_project()
        }
        DatumKind::RandomHs => random_hs(spec, ball),
    };
    Ok(u.truncate(ball))
}

fn mode_stream(k: WaveVector) -> u64 {
    let enc = |c: i32| (c + (1 << 19)) as u64 & 0xF_FFFF;
    (enc(k.0[0]) << 40) | (enc(k.0[1]) << 20) | enc(k.0[2])
}

fn random_hs(spec: &DatumSpec, ball: TruncationBall) -> SpectralVelocity {
    let lattice = ModeLattice::shared(ball);
    let mut v = SpectralVector::zeros(ball);
    for (k, c) in lattice.modes().iter().zip(v.coeffs_mut()) {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(mode_stream(*k));
        let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
        let amp = spec.amplitude * (k.norm_sq() as f64).powf(-spec.s / 2.0) / 2f64.sqrt();
        *c = std::array::from_fn(|_| Complex64::new(g(), g()) * amp);
    }
    v.leray_project()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::vector_to_grid;

    #[test]
    fn taylor_green_samples() {
        let u = generate_datum(&DatumSpec::new(DatumKind::TaylorGreen), TruncationBall(2)).unwrap();
        let g = vector_to_grid(&u, 6).unwrap();
        let h = 2.0 * std::f64::consts::PI / 6.0;
        for (i, j) in [(1, 2), (4, 3), (0, 5)] {
            let (x, y) = (h * i as f64, h * j as f64);
            assert!((g[0].at(i, j, 3) - x.cos() * y.sin()).abs() < 1e-14);
            assert!((g[1].at(i, j, 3) + x.sin() * y.cos()).abs() < 1e-14);
            assert!(g[2].at(i, j, 3).abs() < 1e-15);
        }
    }

    #[test]
    fn taylor_green_coefficients() {
        let u = generate_datum(&DatumSpec::new(DatumKind::TaylorGreen), TruncationBall(3)).unwrap();
        let q = Complex64::new(0.0, 0.25);
        assert_eq!(u.get(WaveVector::new(1, 1, 0)), [-q, q, Complex64::new(0.0, 0.0)]);
        assert_eq!(u.get(WaveVector::new(1, -1, 0)), [q, q, Complex64::new(0.0, 0.0)]);
        let nonzero = u.coeffs().iter().filter(|c| c.iter().any(|z| z.norm() > 0.0)).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn taylor_green_3d_samples() {
        let u = generate_datum(&DatumSpec::new(DatumKind::TaylorGreen3d), TruncationBall(2)).unwrap();
        let g = vector_to_grid(&u, 6).unwrap();
        let h = 2.0 * std::f64::consts::PI / 6.0;
        let (x, y, z) = (h, 2.0 * h, 5.0 * h);
        assert!((g[0].at(1, 2, 5) - x.sin() * y.cos() * z.cos()).abs() < 1e-14);
        assert!((g[1].at(1, 2, 5) + x.cos() * y.sin() * z.cos()).abs() < 1e-14);
    }

    #[test]
    fn random_is_deterministic_and_nested() {
        let spec = DatumSpec::random(7);
        let a = generate_datum(&spec, TruncationBall(5)).unwrap();
        let b = generate_datum(&spec, TruncationBall(5)).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());
        let small = generate_datum(&spec, TruncationBall(3)).unwrap();
        assert_eq!(small.coeffs(), a.truncate(TruncationBall(3)).coeffs());
        assert!(a.divergence_defect() < 1e-15);
        let other = generate_datum(&DatumSpec::random(8), TruncationBall(5)).unwrap();
        assert_ne!(a.coeffs(), other.coeffs());
    }

    #[test]
    fn shear_amplitude() {
        let mut spec = DatumSpec::new(DatumKind::Shear);
        spec.amplitude = 2.0;
        let u = generate_datum(&spec, TruncationBall(1)).unwrap();
        assert_eq!(u.get(WaveVector::new(0, 1, 0))[0], Complex64::new(0.0, -1.0));
    }
}
