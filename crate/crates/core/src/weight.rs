//! Nonnegative trigonometric polynomials used as the spatial part of test
//! functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NsvError, Result};
use crate::field::SpectralScalar;
use crate::lattice::{TruncationBall, WaveVector};
use crate::transform::{scalar_gradient_to_grid, scalar_to_grid, smooth_size, Grid};

/// `psi(x) = mean + sum_k c_k exp(i k.x)`.
#[derive(Clone, Debug)]
pub struct SpatialWeight {
    mean: f64,
    fluctuation: SpectralScalar,
}

/// Serializable description of a spatial weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// `psi = 1`
    Constant,
    /// `psi = 1 + amplitude cos(k.x)`, `|amplitude| <= 1`
    Cosine { k: [i32; 3], amplitude: f64 },
    /// `psi = prod_i (1 + cos x_i) / 8`
    Product,
}

impl SpatialWeight {
    pub fn new(mean: f64, fluctuation: SpectralScalar) -> Self {
        SpatialWeight { mean, fluctuation }
    }

    pub fn constant(c: f64) -> Self {
        SpatialWeight {
            mean: c,
            fluctuation: SpectralScalar::zeros(TruncationBall(1)),
        }
    }

    pub fn from_spec(spec: &WeightSpec) -> Result<Self> {
        let w = match spec {
            WeightSpec::Constant => Self::constant(1.0),
            WeightSpec::Cosine { k, amplitude } => {
                let k = WaveVector(*k);
                if k.is_zero() {
                    return Err(NsvError::InvalidParams("cosine weight needs k != 0".into()));
                }
                let r = (k.norm_sq() as f64).sqrt().ceil() as u32;
                let f = SpectralScalar::from_modes(
                    TruncationBall(r),
                    [(k, Complex64::new(amplitude / 2.0, 0.0))],
                )?;
                SpatialWeight::new(1.0, f)
            }
            WeightSpec::Product => {
                // (1 + cos x1)(1 + cos x2)(1 + cos x3) / 8
                let mut modes = Vec::new();
                for a in -1..=1i32 {
                    for b in -1..=1i32 {
                        for c in -1..=1i32 {
                            let k = WaveVector::new(a, b, c);
                            if k.is_zero() {
                                continue;
                            }
                            let nz = [a, b, c].iter().filter(|&&x| x != 0).count() as i32;
                            let val = 0.125 * 0.5f64.powi(nz);
                            modes.push((k, Complex64::new(val, 0.0)));
                        }
                    }
                }
                SpatialWeight::new(0.125, SpectralScalar::from_modes(TruncationBall(2), modes)?)
            }
        };
        w.check_nonnegative()?;
        Ok(w)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn fluctuation(&self) -> &SpectralScalar {
        &self.fluctuation
    }

    /// Radius of the smallest ball containing the support of the fluctuation.
    pub fn radius(&self) -> u32 {
        let r2 = self.fluctuation.support_radius_sq();
        let mut r = (r2 as f64).sqrt().floor() as u32;
        while (r as i64) * (r as i64) < r2 {
            r += 1;
        }
        r
    }

    /// Largest `|k_i|` in the support.
    pub fn max_component(&self) -> u32 {
        self.fluctuation
            .iter()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(k, _)| k.max_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.fluctuation.is_zero()
    }

    pub fn to_grid(&self, size: usize) -> Result<Grid> {
        let mut g = scalar_to_grid(&self.fluctuation, size)?;
        for v in g.values_mut() {
            *v += self.mean;
        }
        Ok(g)
    }

    pub fn laplacian_to_grid(&self, size: usize) -> Result<Grid> {
        let lap = self
            .fluctuation
            .map_modes(|k, c| c * -(k.norm_sq() as f64));
        scalar_to_grid(&lap, size)
    }

    pub fn gradient_to_grid(&self, size: usize) -> Result<[Grid; 3]> {
        scalar_gradient_to_grid(&self.fluctuation, size)
    }

    /// Minimum over a grid four times finer than the support requires.
    pub fn min_on_verification_grid(&self) -> Result<f64> {
        let size = smooth_size(4 * (2 * self.fluctuation.ball().radius() as usize + 2));
        let g = self.to_grid(size)?;
        Ok(g.values().iter().copied().fold(f64::INFINITY, f64::min))
    }

    pub fn check_nonnegative(&self) -> Result<()> {
        let min = self.min_on_verification_grid()?;
        if min < -1e-12 {
            return Err(NsvError::PhiNotNonnegative { min });
        }
        Ok(())
    }
}
