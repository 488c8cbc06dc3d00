//! Brute-force reference computations, independent of the FFT path. They
//! cost `O(n^6)` or `O(N^3 modes)` and exist to check the fast kernels.

use num_complex::Complex64;

use crate::field::{Coefficient, SpectralScalar, SpectralVector, SpectralVelocity, Vec3c, TORUS_VOLUME};
use crate::lattice::{TruncationBall, WaveVector};

/// Every mode of the field, both halves.
fn full_modes<C: Coefficient>(f: &crate::field::SpectralField<C>) -> Vec<(WaveVector, C)> {
    f.iter()
        .flat_map(|(k, c)| [(k, *c), (-k, c.conj())])
        .collect()
}

/// `sum_{p + q = k} i (q . u_p) u_q` for every `0 < |k| <= 2n`.
pub fn direct_convective(u: &SpectralVelocity) -> SpectralVector {
    let out_ball = TruncationBall(2 * u.ball().radius());
    let all = full_modes(u.as_vector());
    let mut out = SpectralVector::zeros(out_ball);
    let lat = out.lattice().clone();
    for (k, c) in lat.modes().iter().zip(out.coeffs_mut()) {
        let mut s: Vec3c = [Complex64::new(0.0, 0.0); 3];
        for (p, up) in &all {
            let q = WaveVector([k.0[0] - p.0[0], k.0[1] - p.0[1], k.0[2] - p.0[2]]);
            if q.is_zero() || !u.ball().contains(q) {
                continue;
            }
            let uq = u.get(q);
            let qf = q.as_f64();
            let qdot = up[0] * qf[0] + up[1] * qf[1] + up[2] * qf[2];
            let f = Complex64::new(0.0, 1.0) * qdot;
            for i in 0..3 {
                s[i] += f * uq[i];
            }
        }
        *c = s;
    }
    out
}

/// `p_k = -sum_{p + q = k} (k . u_p)(k . u_q) / |k|^2`.
pub fn direct_pressure(u: &SpectralVelocity) -> SpectralScalar {
    let out_ball = TruncationBall(2 * u.ball().radius());
    let all = full_modes(u.as_vector());
    let mut out = SpectralScalar::zeros(out_ball);
    let lat = out.lattice().clone();
    for (k, c) in lat.modes().iter().zip(out.coeffs_mut()) {
        let kf = k.as_f64();
        let kd = |v: &Vec3c| v[0] * kf[0] + v[1] * kf[1] + v[2] * kf[2];
        let mut s = Complex64::new(0.0, 0.0);
        for (p, up) in &all {
            let q = WaveVector([k.0[0] - p.0[0], k.0[1] - p.0[1], k.0[2] - p.0[2]]);
            if q.is_zero() || !u.ball().contains(q) {
                continue;
            }
            s += kd(up) * kd(&u.get(q));
        }
        *c = -s / k.norm_sq() as f64;
    }
    out
}

/// Samples of every component by direct summation of the exponentials.
pub fn direct_samples<C: Coefficient>(
    f: &crate::field::SpectralField<C>,
    size: usize,
    component: impl Fn(&C) -> Complex64,
) -> Vec<f64> {
    let h = 2.0 * std::f64::consts::PI / size as f64;
    let modes: Vec<(WaveVector, Complex64)> = f
        .iter()
        .map(|(k, c)| (k, component(c)))
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .collect();
    // per-axis tables of exp(i k x_j)
    let table = |kc: i32| -> Vec<Complex64> {
        (0..size)
            .map(|j| Complex64::from_polar(1.0, kc as f64 * h * j as f64))
            .collect()
    };
    let tabs: Vec<[Vec<Complex64>; 3]> = modes
        .iter()
        .map(|(k, _)| [table(k.0[0]), table(k.0[1]), table(k.0[2])])
        .collect();
    let mut out = vec![0.0; size * size * size];
    for i in 0..size {
        for j in 0..size {
            for l in 0..size {
                let mut s = 0.0;
                for ((_, c), t) in modes.iter().zip(&tabs) {
                    // c e^{ikx} + conj
                    s += 2.0 * (c * t[0][i] * t[1][j] * t[2][l]).re;
                }
                out[(i * size + j) * size + l] = s;
            }
        }
    }
    out
}

/// `int |p|^q` by the rectangle rule on directly summed samples.
pub fn direct_scalar_lp(p: &SpectralScalar, exponent: f64, size: usize) -> f64 {
    let v = direct_samples(p, size, |c| *c);
    TORUS_VOLUME * v.iter().map(|x| x.abs().powf(exponent)).sum::<f64>() / v.len() as f64
}

/// Richardson value of [`direct_scalar_lp`] from `size`, `2 size`, `4 size`
/// with the same order the fast path uses.
pub fn direct_scalar_lp_extrapolated(p: &SpectralScalar, exponent: f64, size: usize) -> f64 {
    let i2 = direct_scalar_lp(p, exponent, 2 * size);
    let i4 = direct_scalar_lp(p, exponent, 4 * size);
    i4 + (i4 - i2) / (2f64.powf(exponent + 1.0) - 1.0)
}

/// Largest coefficient difference relative to the largest coefficient.
pub fn max_relative_difference<C: Coefficient>(
    a: &crate::field::SpectralField<C>,
    b: &crate::field::SpectralField<C>,
) -> f64 {
    let d = a.sub(b).max_abs();
    let s = a.max_abs().max(b.max_abs());
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{generate_datum, DatumKind, DatumSpec};

    #[test]
    fn taylor_green_pressure_closed_form() {
        // p = -(cos 2 x1 + cos 2 x2) / 4
        let u = generate_datum(&DatumSpec::new(DatumKind::TaylorGreen), TruncationBall(2)).unwrap();
        let p = direct_pressure(&u);
        for (k, c) in p.iter() {
            let want = if k == WaveVector::new(2, 0, 0) || k == WaveVector::new(0, 2, 0) {
                -0.125
            } else {
                0.0
            };
            assert!((c - Complex64::new(want, 0.0)).norm() < 1e-15, "{k}");
        }
    }

    #[test]
    fn samples_of_single_mode() {
        let f = SpectralScalar::from_modes(
            TruncationBall(2),
            [(WaveVector::new(0, 1, 1), Complex64::new(0.0, -0.5))],
        )
        .unwrap();
        // sin(x2 + x3)
        let s = direct_samples(&f, 4, |c| *c);
        let h = std::f64::consts::FRAC_PI_2;
        let at = |i: usize, j: usize, l: usize| s[(i * 4 + j) * 4 + l];
        assert!((at(0, 1, 2) - (3.0 * h).sin()).abs() < 1e-15);
        assert!((at(3, 0, 1) - h.sin()).abs() < 1e-15);
    }
}
