//! The convective term `(u . grad) u` of a Galerkin velocity, its split into
//! the resolved part `P_n((u . grad) u)`, the remainder `Q_n((u . grad) u)`
//! and a gradient, and the tail estimate for `Q_n(u psi)`.
//!
//! Products are formed on zero-padded grids. A product of two fields of
//! radius `n` has components up to `2n`, so recovering all of it needs
//! `N >= 4n + 1` points per dimension, while the resolved part alone only
//! needs `N >= 3n + 1`.

use serde::Serialize;

use crate::error::{NsvError, Result};
use crate::field::{Coefficient, SpectralVector, SpectralVelocity};
use crate::lattice::TruncationBall;
use crate::transform::{
    smooth_size, vector_and_gradient_to_grid, vector_from_grid, vector_to_grid, Grid,
};
use crate::weight::SpatialWeight;

/// Padding rule for products whose full `2n` support is needed.
pub fn full_product_grid_min(ball: TruncationBall) -> usize {
    4 * ball.radius() as usize + 2
}

/// Padding rule for products only needed inside the ball.
pub fn resolved_product_grid_min(ball: TruncationBall) -> usize {
    3 * ball.radius() as usize + 2
}

pub fn full_product_grid(ball: TruncationBall) -> usize {
    smooth_size(full_product_grid_min(ball))
}

pub fn resolved_product_grid(ball: TruncationBall) -> usize {
    smooth_size(resolved_product_grid_min(ball))
}

fn doubled(ball: TruncationBall) -> TruncationBall {
    TruncationBall(2 * ball.radius())
}

/// `sum_j u_j d_j u_i` on the grid.
fn advect_on_grid(u: &SpectralVelocity, size: usize) -> Result<[Grid; 3]> {
    let (ug, du) = vector_and_gradient_to_grid(u, size)?;
    Ok(std::array::from_fn(|i| {
        let mut out = Grid::zeros(size);
        let vals = out.values_mut();
        for (j, uj) in ug.iter().enumerate() {
            for ((o, a), b) in vals.iter_mut().zip(uj.values()).zip(du[i][j].values()) {
                *o += a * b;
            }
        }
        out
    }))
}

/// Fourier coefficients of `(u . grad) u` on the ball of radius `2n`.
pub fn convective(u: &SpectralVelocity) -> Result<SpectralVector> {
    convective_on_grid(u, full_product_grid(u.ball()))
}

pub fn convective_on_grid(u: &SpectralVelocity, size: usize) -> Result<SpectralVector> {
    let required = full_product_grid_min(u.ball());
    if size < required {
        return Err(NsvError::GridTooSmall {
            grid: size,
            required,
        });
    }
    let w = advect_on_grid(u, size)?;
    vector_from_grid(&w, doubled(u.ball()))
}

/// `P_n((u . grad) u)` with `n` the ball of `u`.
pub fn projected_convective(u: &SpectralVelocity) -> Result<SpectralVelocity> {
    projected_convective_on_grid(u, resolved_product_grid(u.ball()))
}

pub fn projected_convective_on_grid(u: &SpectralVelocity, size: usize) -> Result<SpectralVelocity> {
    let required = resolved_product_grid_min(u.ball());
    if size < required {
        return Err(NsvError::GridTooSmall {
            grid: size,
            required,
        });
    }
    let w = advect_on_grid(u, size)?;
    Ok(vector_from_grid(&w, u.ball())?.leray_project())
}

/// Helmholtz split of the convective term.
#[derive(Clone, Debug)]
pub struct NonlinearTerm {
    /// `(u . grad) u`, radius `2n`.
    pub full: SpectralVector,
    /// `P_n((u . grad) u)`, radius `n`.
    pub projected: SpectralVelocity,
    /// `Q_n((u . grad) u)`, radius `2n`, zero for `|k| <= n`.
    pub remainder: SpectralVelocity,
}

impl NonlinearTerm {
    /// `full - P(full)`, which is `-grad p`.
    pub fn gradient_part(&self) -> SpectralVector {
        self.full.gradient_part()
    }
}

pub fn galerkin_nonlinearity(u: &SpectralVelocity) -> Result<NonlinearTerm> {
    let full = convective(u)?;
    let projected = full.galerkin_truncate(u.ball());
    let remainder = full.qn_remainder(u.ball());
    Ok(NonlinearTerm {
        full,
        projected,
        remainder,
    })
}

/// Both sides of `||Q_n(u psi)||_inf^2 <= c (n^2 sum_{|k|>=n/2} |c_k|^2 + sum_k |c_k|^2 / n)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TailBound {
    /// `(sum_k |Q_n(u psi)_k|)^2`, a certified upper bound of the squared sup norm.
    pub lhs: f64,
    /// The bracket multiplying `c`.
    pub bracket: f64,
}

impl TailBound {
    pub fn ratio(&self) -> f64 {
        if self.bracket == 0.0 {
            0.0
        } else {
            self.lhs / self.bracket
        }
    }

    pub fn rhs(&self, constant: f64) -> f64 {
        constant * self.bracket
    }

    pub fn holds(&self, constant: f64) -> bool {
        self.lhs <= self.rhs(constant)
    }
}

/// Coefficients of `u psi` on the ball of radius `n + r_psi`.
pub fn multiply_by_weight(u: &SpectralVelocity, psi: &SpatialWeight) -> Result<SpectralVector> {
    let out_ball = TruncationBall(u.ball().radius() + psi.radius());
    let size = smooth_size(2 * out_ball.radius() as usize + 2);
    let ug = vector_to_grid(u, size)?;
    let pg = psi.to_grid(size)?;
    let prod: [Grid; 3] = std::array::from_fn(|i| ug[i].zip_map(&pg, |a, b| a * b));
    vector_from_grid(&prod, out_ball)
}

pub fn qn_tail_bound(u: &SpectralVelocity, psi: &SpatialWeight) -> Result<TailBound> {
    let n = u.ball().radius();
    let up = multiply_by_weight(u, psi)?;
    let q = up.qn_remainder(u.ball());
    // both halves of the lattice
    let sup: f64 = 2.0 * q.coeffs().iter().map(|c| c.abs_sq().sqrt()).sum::<f64>();
    let nf = n as f64;
    let mut high = 0.0;
    let mut all = 0.0;
    for (k, c) in u.iter() {
        let a = 2.0 * c.abs_sq();
        all += a;
        if 4 * k.norm_sq() >= (n as i64) * (n as i64) {
            high += a;
        }
    }
    Ok(TailBound {
        lhs: sup * sup,
        bracket: nf * nf * high + all / nf,
    })
}

/// `1.1 x` the largest observed `lhs / bracket`.
pub fn calibrate_tail_constant<'a, I>(fields: I, psi: &SpatialWeight) -> Result<f64>
where
    I: IntoIterator<Item = &'a SpectralVelocity>,
{
    let mut worst: f64 = 0.0;
    for u in fields {
        worst = worst.max(qn_tail_bound(u, psi)?.ratio());
    }
    Ok(1.1 * worst)
}

/// `(P_n((u . grad) u), u)`, zero in exact arithmetic.
pub fn energy_transfer(u: &SpectralVelocity) -> Result<f64> {
    let p = projected_convective(u)?;
    Ok(p.inner(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralVector;
    use crate::lattice::WaveVector;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }
    const Z: Complex64 = Complex64 { re: 0.0, im: 0.0 };

    fn shear() -> SpectralVelocity {
        // (sin x2 + 0.3 cos 2 x2, 0, 0)
        let v = SpectralVector::from_modes(
            TruncationBall(3),
            [
                (WaveVector::new(0, 1, 0), [c(0.0, -0.5), Z, Z]),
                (WaveVector::new(0, 2, 0), [c(0.15, 0.0), Z, Z]),
            ],
        )
        .unwrap();
        SpectralVelocity::try_new(v).unwrap()
    }

    #[test]
    fn shear_flow_has_no_convection() {
        let t = galerkin_nonlinearity(&shear()).unwrap();
        assert!(t.full.max_abs() < 1e-16);
        assert!(t.projected.max_abs() < 1e-16);
        assert!(t.remainder.max_abs() < 1e-16);
    }

    #[test]
    fn grid_rules_enforced() {
        let u = shear();
        assert!(matches!(
            convective_on_grid(&u, 13),
            Err(NsvError::GridTooSmall { grid: 13, required: 14 })
        ));
        assert!(convective_on_grid(&u, 14).is_ok());
        assert!(projected_convective_on_grid(&u, 10).is_err());
    }

    #[test]
    fn constant_weight_low_modes_have_no_tail() {
        let v = SpectralVector::from_modes(
            TruncationBall(9),
            [(WaveVector::new(1, 1, 0), [c(0.5, 0.0), c(-0.5, 0.0), Z])],
        )
        .unwrap();
        let u = SpectralVelocity::try_new(v).unwrap();
        let b = qn_tail_bound(&u, &SpatialWeight::constant(1.0)).unwrap();
        assert_eq!(b.lhs, 0.0);
        assert!(b.bracket > 0.0);
    }
}
