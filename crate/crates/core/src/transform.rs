//! Grid transforms for pseudo-spectral products.
//!
//! Grid point `(i, j, l)` sits at `x = 2 pi (i, j, l) / N`; samples are stored
//! row-major with the third index fastest.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{NsvError, Result};
use crate::field::{SpectralField, SpectralScalar, SpectralVector, Vec3c};
use crate::lattice::{ModeLattice, TruncationBall, WaveVector};

/// Forward and inverse 3D FFT plans for an `N^3` grid.
pub struct Fft3 {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub fn shared(size: usize) -> Arc<Fft3> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("fft cache poisoned");
        guard
            .entry(size)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft3 {
                    size,
                    forward: planner.plan_fft_forward(size),
                    inverse: planner.plan_fft_inverse(size),
                })
            })
            .clone()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Unnormalized `sum_k X_k exp(+i k x_j)`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(&*self.inverse, data);
    }

    /// Unnormalized `sum_j x_j exp(-i k x_j)`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(&*self.forward, data);
    }

    /// Three passes of contiguous line transforms. Between passes the cube is
    /// rotated `(a, b, c) -> (c, a, b)`, so the next axis becomes the fastest;
    /// three rotations restore the layout.
    fn apply(&self, plan: &dyn Fft<f64>, data: &mut [Complex64]) {
        let n = self.size;
        assert_eq!(data.len(), n * n * n);
        let mut tmp = vec![Complex64::new(0.0, 0.0); data.len()];
        lines(plan, data, n);
        rotate(data, &mut tmp, n);
        lines(plan, &mut tmp, n);
        rotate(&tmp, data, n);
        lines(plan, data, n);
        rotate(data, &mut tmp, n);
        data.copy_from_slice(&tmp);
    }
}

/// Transforms every contiguous line of length `n`, one slab per task.
fn lines(plan: &dyn Fft<f64>, data: &mut [Complex64], n: usize) {
    data.par_chunks_mut(n * n).for_each_init(
        || vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()],
        |scratch, slab| plan.process_with_scratch(slab, scratch),
    );
}

/// `out[c][a][b] = inp[a][b][c]`
fn rotate(inp: &[Complex64], out: &mut [Complex64], n: usize) {
    out.par_chunks_mut(n * n).enumerate().for_each(|(c, slab)| {
        for a in 0..n {
            for b in 0..n {
                slab[a * n + b] = inp[(a * n + b) * n + c];
            }
        }
    });
}

/// Smallest `N >= min` whose only prime factors are 2, 3 and 5.
pub fn smooth_size(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut m = n;
        for p in [2, 3, 5] {
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

/// Minimum grid that samples a field of radius `n` without folding modes.
pub fn min_sampling_size(ball: TruncationBall) -> usize {
    2 * ball.radius() as usize + 2
}

#[inline]
fn wrap(c: i32, n: usize) -> usize {
    c.rem_euclid(n as i32) as usize
}

#[inline]
pub(crate) fn grid_index(k: WaveVector, n: usize) -> usize {
    (wrap(k.0[0], n) * n + wrap(k.0[1], n)) * n + wrap(k.0[2], n)
}

/// Real samples of one scalar on an `N^3` grid.
#[derive(Clone, Debug)]
pub struct Grid {
    size: usize,
    values: Vec<f64>,
}

impl Grid {
    pub fn new(size: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), size * size * size);
        Grid { size, values }
    }

    pub fn zeros(size: usize) -> Self {
        Grid {
            size,
            values: vec![0.0; size * size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, i: usize, j: usize, l: usize) -> f64 {
        self.values[(i * self.size + j) * self.size + l]
    }

    /// Rectangle-rule integral over the torus.
    pub fn integral(&self) -> f64 {
        let n3 = self.values.len() as f64;
        crate::field::TORUS_VOLUME * self.values.iter().sum::<f64>() / n3
    }

    pub fn zip_map(&self, o: &Grid, f: impl Fn(f64, f64) -> f64) -> Grid {
        assert_eq!(self.size, o.size);
        Grid {
            size: self.size,
            values: self.values.iter().zip(&o.values).map(|(a, b)| f(*a, *b)).collect(),
        }
    }
}

fn check_size(ball: TruncationBall, size: usize) -> Result<()> {
    let required = min_sampling_size(ball);
    if size < required {
        return Err(NsvError::GridTooSmall {
            grid: size,
            required,
        });
    }
    Ok(())
}

/// Samples of `count` real trigonometric polynomials on the modes of
/// `lattice`, field `f` having canonical coefficients `coeff(f, i)`.
///
/// Fields go through the FFT in pairs as `a + i b`: both are real, so the
/// real and imaginary parts of the result separate them.
fn synthesize(
    lattice: &ModeLattice,
    size: usize,
    count: usize,
    coeff: impl Fn(usize, usize) -> Complex64,
) -> Vec<Grid> {
    let fft = Fft3::shared(size);
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(count);
    for first in (0..count).step_by(2) {
        let paired = first + 1 < count;
        let mut buf = vec![Complex64::new(0.0, 0.0); size * size * size];
        for (m, &k) in lattice.modes().iter().enumerate() {
            let a = coeff(first, m);
            let b = if paired { coeff(first + 1, m) } else { Complex64::new(0.0, 0.0) };
            buf[grid_index(k, size)] = a + i * b;
            buf[grid_index(-k, size)] = a.conj() + i * b.conj();
        }
        fft.inverse(&mut buf);
        out.push(Grid {
            size,
            values: buf.iter().map(|z| z.re).collect(),
        });
        if paired {
            out.push(Grid {
                size,
                values: buf.iter().map(|z| z.im).collect(),
            });
        }
    }
    out
}

/// Canonical coefficients of each grid on the modes of `lattice`, two grids
/// per FFT.
fn analyze(grids: &[&Grid], lattice: &ModeLattice) -> Vec<Vec<Complex64>> {
    let size = grids[0].size;
    let fft = Fft3::shared(size);
    let norm = 1.0 / (size * size * size) as f64;
    let mut out = Vec::with_capacity(grids.len());
    for pair in grids.chunks(2) {
        let mut buf: Vec<Complex64> = match pair {
            [a, b] => a
                .values
                .iter()
                .zip(&b.values)
                .map(|(&x, &y)| Complex64::new(x, y))
                .collect(),
            _ => pair[0].values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        };
        fft.forward(&mut buf);
        let (mut a, mut b) = (Vec::with_capacity(lattice.len()), Vec::with_capacity(lattice.len()));
        for &k in lattice.modes() {
            let p = buf[grid_index(k, size)];
            let q = buf[grid_index(-k, size)].conj();
            // p = A + i B and q = A - i B for the transforms A, B of the two grids
            a.push((p + q) * (0.5 * norm));
            b.push((p - q) * Complex64::new(0.0, -0.5 * norm));
        }
        out.push(a);
        if pair.len() == 2 {
            out.push(b);
        }
    }
    out
}

fn into_array<T>(v: Vec<T>) -> [T; 3] {
    v.try_into().unwrap_or_else(|_| unreachable!("three components"))
}

pub fn scalar_to_grid(f: &SpectralScalar, size: usize) -> Result<Grid> {
    check_size(f.ball(), size)?;
    let mut g = synthesize(f.lattice(), size, 1, |_, m| f.coeffs()[m]);
    Ok(g.remove(0))
}

pub fn vector_to_grid(f: &SpectralVector, size: usize) -> Result<[Grid; 3]> {
    check_size(f.ball(), size)?;
    Ok(into_array(synthesize(f.lattice(), size, 3, |d, m| f.coeffs()[m][d])))
}

/// `u` and `grad u` together, which saves one transform over two calls.
pub fn vector_and_gradient_to_grid(
    f: &SpectralVector,
    size: usize,
) -> Result<([Grid; 3], [[Grid; 3]; 3])> {
    check_size(f.ball(), size)?;
    let lat = f.lattice();
    let mut all = synthesize(lat, size, 12, |field, m| {
        let c = f.coeffs()[m];
        if field < 3 {
            c[field]
        } else {
            let (i, j) = ((field - 3) / 3, (field - 3) % 3);
            c[i] * Complex64::new(0.0, lat.modes()[m].as_f64()[j])
        }
    })
    .into_iter();
    let u = into_array(all.by_ref().take(3).collect());
    let du = std::array::from_fn(|_| into_array(all.by_ref().take(3).collect()));
    Ok((u, du))
}

/// Projects real samples onto the modes of `ball`; the mean is dropped.
pub fn scalar_from_grid(grid: &Grid, ball: TruncationBall) -> Result<SpectralScalar> {
    check_size(ball, grid.size)?;
    let lattice = ModeLattice::shared(ball);
    let coeffs = analyze(&[grid], &lattice).remove(0);
    Ok(SpectralField::from_parts(lattice, coeffs))
}

pub fn vector_from_grid(grids: &[Grid; 3], ball: TruncationBall) -> Result<SpectralVector> {
    check_size(ball, grids[0].size)?;
    let lattice = ModeLattice::shared(ball);
    let parts = analyze(&[&grids[0], &grids[1], &grids[2]], &lattice);
    let coeffs: Vec<Vec3c> = (0..lattice.len())
        .map(|i| [parts[0][i], parts[1][i], parts[2][i]])
        .collect();
    Ok(SpectralField::from_parts(lattice, coeffs))
}

/// Samples of every component of `grad f`: entry `[i][j]` is `d_j f_i`.
pub fn gradient_to_grid(f: &SpectralVector, size: usize) -> Result<[[Grid; 3]; 3]> {
    check_size(f.ball(), size)?;
    let lat = f.lattice();
    let mut all = synthesize(lat, size, 9, |field, m| {
        let (i, j) = (field / 3, field % 3);
        f.coeffs()[m][i] * Complex64::new(0.0, lat.modes()[m].as_f64()[j])
    })
    .into_iter();
    Ok(std::array::from_fn(|_| into_array(all.by_ref().take(3).collect())))
}

/// Samples of `grad f` for a scalar.
pub fn scalar_gradient_to_grid(f: &SpectralScalar, size: usize) -> Result<[Grid; 3]> {
    check_size(f.ball(), size)?;
    let lat = f.lattice();
    Ok(into_array(synthesize(lat, size, 3, |j, m| {
        f.coeffs()[m] * Complex64::new(0.0, lat.modes()[m].as_f64()[j])
    })))
}

/// Discrete mean square `(2pi)^3 / N^3 sum |f(x_j)|^2` over all components.
pub fn grid_l2_sq(grids: &[Grid]) -> f64 {
    grids
        .iter()
        .map(|g| {
            let sq = Grid {
                size: g.size,
                values: g.values.iter().map(|v| v * v).collect(),
            };
            sq.integral()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralVelocity;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_size(26), 27);
        assert_eq!(smooth_size(34), 36);
        assert_eq!(smooth_size(64), 64);
        assert_eq!(smooth_size(7), 8);
    }

    #[test]
    fn cosine_mode_samples() {
        // f = cos(x1 + 2 x3) = (e^{ik.x} + e^{-ik.x}) / 2
        let k = WaveVector::new(1, 0, 2);
        let f = SpectralScalar::from_modes(TruncationBall(3), [(k, c(0.5, 0.0))]).unwrap();
        let n = 8;
        let g = scalar_to_grid(&f, n).unwrap();
        let h = 2.0 * std::f64::consts::PI / n as f64;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let want = (h * i as f64 + 2.0 * h * l as f64).cos();
                    assert!((g.at(i, j, l) - want).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn zero_field_zero_samples() {
        let g = vector_to_grid(&SpectralVector::zeros(TruncationBall(2)), 6).unwrap();
        assert!(g.iter().all(|c| c.values().iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn grid_too_small() {
        let f = SpectralScalar::zeros(TruncationBall(3));
        assert!(matches!(
            scalar_to_grid(&f, 7),
            Err(NsvError::GridTooSmall { grid: 7, required: 8 })
        ));
    }

    #[test]
    fn parseval_on_grid() {
        let v = SpectralVector::from_modes(
            TruncationBall(2),
            [
                (WaveVector::new(0, 1, 0), [c(0.3, -0.5), c(0.0, 0.0), c(0.1, 0.2)]),
                (WaveVector::new(1, 1, 1), [c(0.2, 0.0), c(-0.2, 0.1), c(0.0, -0.1)]),
            ],
        )
        .unwrap();
        let u = v.leray_project();
        let g = vector_to_grid(&u, 6).unwrap();
        assert_relative_eq!(grid_l2_sq(&g), u.norms().l2_sq, max_relative = 1e-12);
        let back = vector_from_grid(&g, TruncationBall(2)).unwrap();
        let back = SpectralVelocity::try_new(back).unwrap();
        assert!(back.sub(&u).max_abs() < 1e-15);
    }
}
