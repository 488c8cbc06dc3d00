//! Truncated Fourier representation of real, zero-mean periodic fields on
//! the torus `[0, 2pi)^3`, with the Leray and Galerkin projectors and the
//! Parseval norms.
//!
//! Coefficients are physical amplitudes: `u(x) = sum_k c_k exp(i k.x)`, so
//! `||u||_2^2 = (2 pi)^3 sum_k |c_k|^2` with the sum over both halves of the
//! lattice. Only the canonical half is stored (see [`crate::lattice`]).

use std::ops::Deref;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{NsvError, Result};
use crate::lattice::{ModeLattice, TruncationBall, WaveVector};

/// `(2 pi)^3`, the torus volume.
pub const TORUS_VOLUME: f64 = 8.0 * std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI;

/// Relative per-mode tolerance on `k . c_k` for a field to count as solenoidal.
pub const TOL_DIV: f64 = 1e-12;

pub type Vec3c = [Complex64; 3];

const CZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Per-mode coefficient algebra shared by scalar and vector fields.
pub trait Coefficient: Copy + Send + Sync + std::fmt::Debug + 'static {
    const ZERO: Self;
    fn conj(self) -> Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn mul_c(self, s: Complex64) -> Self;
    fn abs_sq(self) -> f64;
    /// `Re(conj(self) . o)`
    fn re_dot(self, o: Self) -> f64;
}

impl Coefficient for Complex64 {
    const ZERO: Self = CZERO;
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn mul_c(self, s: Complex64) -> Self {
        self * s
    }
    fn abs_sq(self) -> f64 {
        self.norm_sqr()
    }
    fn re_dot(self, o: Self) -> f64 {
        self.re * o.re + self.im * o.im
    }
}

impl Coefficient for Vec3c {
    const ZERO: Self = [CZERO; 3];
    fn conj(self) -> Self {
        [self[0].conj(), self[1].conj(), self[2].conj()]
    }
    fn add(self, o: Self) -> Self {
        [self[0] + o[0], self[1] + o[1], self[2] + o[2]]
    }
    fn sub(self, o: Self) -> Self {
        [self[0] - o[0], self[1] - o[1], self[2] - o[2]]
    }
    fn scale(self, s: f64) -> Self {
        [self[0] * s, self[1] * s, self[2] * s]
    }
    fn mul_c(self, s: Complex64) -> Self {
        [self[0] * s, self[1] * s, self[2] * s]
    }
    fn abs_sq(self) -> f64 {
        self[0].norm_sqr() + self[1].norm_sqr() + self[2].norm_sqr()
    }
    fn re_dot(self, o: Self) -> f64 {
        (0..3).map(|i| self[i].re * o[i].re + self[i].im * o[i].im).sum()
    }
}

/// `k . c` without conjugation.
#[inline]
pub fn k_dot(k: WaveVector, c: &Vec3c) -> Complex64 {
    let kf = k.as_f64();
    c[0] * kf[0] + c[1] * kf[1] + c[2] * kf[2]
}

/// Fourier coefficients of a real field, stored on the canonical half of a
/// truncation ball.
#[derive(Clone, Debug)]
pub struct SpectralField<C: Coefficient> {
    lattice: Arc<ModeLattice>,
    coeffs: Vec<C>,
}

/// General (not necessarily solenoidal) vector field.
pub type SpectralVector = SpectralField<Vec3c>;
/// Zero-mean scalar field, e.g. the pressure.
pub type SpectralScalar = SpectralField<Complex64>;

impl<C: Coefficient> SpectralField<C> {
    pub fn zeros(ball: TruncationBall) -> Self {
        let lattice = ModeLattice::shared(ball);
        let coeffs = vec![C::ZERO; lattice.len()];
        SpectralField { lattice, coeffs }
    }

    /// Builds a field from `(k, c)` pairs. A pair given at a non-canonical
    /// `k` is stored as `conj(c)` at `-k`. Later pairs overwrite earlier ones.
    pub fn from_modes<I>(ball: TruncationBall, modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (WaveVector, C)>,
    {
        let mut f = Self::zeros(ball);
        for (k, c) in modes {
            f.set(k, c)?;
        }
        Ok(f)
    }

    pub(crate) fn from_parts(lattice: Arc<ModeLattice>, coeffs: Vec<C>) -> Self {
        debug_assert_eq!(lattice.len(), coeffs.len());
        SpectralField { lattice, coeffs }
    }

    #[inline]
    pub fn ball(&self) -> TruncationBall {
        self.lattice.ball()
    }

    #[inline]
    pub fn lattice(&self) -> &Arc<ModeLattice> {
        &self.lattice
    }

    #[inline]
    pub fn modes(&self) -> &[WaveVector] {
        self.lattice.modes()
    }

    #[inline]
    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [C] {
        &mut self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (WaveVector, &C)> + '_ {
        self.lattice.modes().iter().copied().zip(self.coeffs.iter())
    }

    /// Coefficient at any `k`; zero outside the ball and at `k = 0`.
    pub fn get(&self, k: WaveVector) -> C {
        if k.is_zero() {
            return C::ZERO;
        }
        if k.is_canonical() {
            self.lattice.index_of(k).map_or(C::ZERO, |i| self.coeffs[i])
        } else {
            self.lattice
                .index_of(-k)
                .map_or(C::ZERO, |i| self.coeffs[i].conj())
        }
    }

    pub fn set(&mut self, k: WaveVector, c: C) -> Result<()> {
        if k.is_zero() {
            return Err(NsvError::InvalidField("the k = 0 mode is excluded (zero mean)".into()));
        }
        let (key, val) = if k.is_canonical() { (k, c) } else { (-k, c.conj()) };
        let i = self.lattice.index_of(key).ok_or_else(|| {
            NsvError::InvalidField(format!("mode {k} outside ball {}", self.ball().radius()))
        })?;
        self.coeffs[i] = val;
        Ok(())
    }

    /// Same field on another ball: zero-extension when growing, mode cutoff
    /// when shrinking.
    pub fn resample(&self, ball: TruncationBall) -> Self {
        if ball == self.ball() {
            return self.clone();
        }
        let lattice = ModeLattice::shared(ball);
        let coeffs = lattice
            .modes()
            .iter()
            .map(|&k| {
                self.lattice
                    .index_of(k)
                    .map_or(C::ZERO, |i| self.coeffs[i])
            })
            .collect();
        SpectralField { lattice, coeffs }
    }

    /// Multiplies each coefficient by `f(k)`; `f` must be even in `k`
    /// (real symbol) or odd and imaginary, so the result stays real.
    pub fn map_modes(&self, f: impl Fn(WaveVector, C) -> C) -> Self {
        let coeffs = self.iter().map(|(k, c)| f(k, *c)).collect();
        SpectralField {
            lattice: self.lattice.clone(),
            coeffs,
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C, C) -> C) -> Self {
        if Arc::ptr_eq(&self.lattice, &other.lattice) {
            let coeffs = self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect();
            return SpectralField {
                lattice: self.lattice.clone(),
                coeffs,
            };
        }
        let ball = self.ball().max(other.ball());
        let a = self.resample(ball);
        let b = other.resample(ball);
        a.zip_with(&b, f)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, C::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, C::sub)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_modes(|_, c| c.scale(s))
    }

    /// `L^2` inner product `(self, other)` with the Parseval factor.
    pub fn inner(&self, other: &Self) -> f64 {
        let half: f64 = if Arc::ptr_eq(&self.lattice, &other.lattice) {
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.re_dot(*b))
                .sum()
        } else {
            self.iter().map(|(k, a)| a.re_dot(other.get(k))).sum()
        };
        2.0 * TORUS_VOLUME * half
    }

    /// `(2 pi)^3 sum_k |k|^(2p) |c_k|^2` over both halves.
    pub fn weighted_sq(&self, power: i32) -> f64 {
        let half: f64 = self
            .iter()
            .map(|(k, c)| (k.norm_sq() as f64).powi(power) * c.abs_sq())
            .sum();
        2.0 * TORUS_VOLUME * half
    }

    pub fn l2_sq(&self) -> f64 {
        self.weighted_sq(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.abs_sq() == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.abs_sq().sqrt())
            .fold(0.0, f64::max)
    }

    /// Galerkin cutoff for scalars; vector fields use
    /// [`SpectralVector::galerkin_truncate`], which also projects.
    pub fn cutoff(&self, ball: TruncationBall) -> Self {
        let r = ball.radius() as i64;
        let mut out = self.resample(ball.max(self.ball()));
        for (k, c) in out.lattice.clone().modes().iter().zip(out.coeffs.iter_mut()) {
            if k.norm_sq() > r * r {
                *c = C::ZERO;
            }
        }
        out.resample(ball)
    }

    /// Keeps only modes with `|k| > n`, on the current lattice.
    pub fn tail(&self, ball: TruncationBall) -> Self {
        let r = ball.radius() as i64;
        self.map_modes(|k, c| if k.norm_sq() > r * r { c } else { C::ZERO })
    }

    /// Largest `|k|` carrying a nonzero coefficient.
    pub fn support_radius_sq(&self) -> i64 {
        self.iter()
            .filter(|(_, c)| c.abs_sq() > 0.0)
            .map(|(k, _)| k.norm_sq())
            .max()
            .unwrap_or(0)
    }
}

impl SpectralField<Vec3c> {
    /// Leray projection `c_k - (c_k . k) k / |k|^2`.
    pub fn leray_project(&self) -> SpectralVelocity {
        SpectralVelocity(self.map_modes(leray_mode))
    }

    /// `P_n`: mode cutoff to `0 < |k| <= n` followed by Leray projection.
    /// The result lives on the lattice of `ball`.
    pub fn galerkin_truncate(&self, ball: TruncationBall) -> SpectralVelocity {
        SpectralVelocity(self.cutoff(ball).map_modes(leray_mode))
    }

    /// `Q_n = P - P_n`: the Leray-projected part above the cutoff, on the
    /// field's own lattice.
    pub fn qn_remainder(&self, ball: TruncationBall) -> SpectralVelocity {
        SpectralVelocity(self.tail(ball).map_modes(leray_mode))
    }

    /// Largest `|k . c_k|` relative to the largest coefficient magnitude.
    pub fn divergence_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        self.iter()
            .map(|(k, c)| k_dot(k, c).norm() / k.norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// The gradient part removed by the Leray projection, `(c_k . k) k / |k|^2`.
    pub fn gradient_part(&self) -> SpectralVector {
        self.map_modes(|k, c| {
            let p = leray_mode(k, c);
            c.sub(p)
        })
    }

    /// `-|k|^2 c_k`.
    pub fn laplacian(&self) -> Self {
        self.map_modes(|k, c| c.scale(-(k.norm_sq() as f64)))
    }
}

#[inline]
fn leray_mode(k: WaveVector, c: Vec3c) -> Vec3c {
    let kf = k.as_f64();
    let kk = k.norm_sq() as f64;
    let proj = k_dot(k, &c) / kk;
    [c[0] - proj * kf[0], c[1] - proj * kf[1], c[2] - proj * kf[2]]
}

/// A divergence-free vector field: `k . c_k = 0` on every stored mode.
#[derive(Clone, Debug)]
pub struct SpectralVelocity(SpectralVector);

/// Parseval norms of a velocity field (squares, except the sup bound).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Norms {
    /// `||u||_2^2`
    pub l2_sq: f64,
    /// `||grad u||_2^2`
    pub h1_sq: f64,
    /// `||lap u||_2^2`
    pub h2_sq: f64,
    /// `sum_k |c_k|`, an upper bound for `sup |u|`.
    pub linf_bound: f64,
}

impl Norms {
    pub fn l2(&self) -> f64 {
        self.l2_sq.sqrt()
    }
    pub fn h1_seminorm(&self) -> f64 {
        self.h1_sq.sqrt()
    }
    pub fn h2_seminorm(&self) -> f64 {
        self.h2_sq.sqrt()
    }
}

impl SpectralVelocity {
    /// Accepts `v` if it is solenoidal to [`TOL_DIV`].
    pub fn try_new(v: SpectralVector) -> Result<Self> {
        let defect = v.divergence_defect();
        if defect > TOL_DIV {
            return Err(NsvError::InvalidField(format!(
                "divergence defect {defect:e} exceeds {TOL_DIV:e}"
            )));
        }
        Ok(SpectralVelocity(v))
    }

    pub fn zeros(ball: TruncationBall) -> Self {
        SpectralVelocity(SpectralVector::zeros(ball))
    }

    pub fn as_vector(&self) -> &SpectralVector {
        &self.0
    }

    pub fn into_vector(self) -> SpectralVector {
        self.0
    }

    pub fn resample(&self, ball: TruncationBall) -> Self {
        SpectralVelocity(self.0.resample(ball))
    }

    /// `P_n u`; cutoff of a solenoidal field stays solenoidal.
    pub fn truncate(&self, ball: TruncationBall) -> Self {
        SpectralVelocity(self.0.cutoff(ball))
    }

    pub fn add(&self, o: &Self) -> Self {
        SpectralVelocity(self.0.add(&o.0))
    }

    pub fn sub(&self, o: &Self) -> Self {
        SpectralVelocity(self.0.sub(&o.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        SpectralVelocity(self.0.scale(s))
    }

    /// Applies a real radial multiplier `f(|k|^2)`.
    pub fn radial(&self, f: impl Fn(f64) -> f64) -> Self {
        SpectralVelocity(self.0.map_modes(|k, c| c.scale(f(k.norm_sq() as f64))))
    }

    pub fn laplacian(&self) -> Self {
        SpectralVelocity(self.0.laplacian())
    }

    pub fn norms(&self) -> Norms {
        let mut l2 = 0.0;
        let mut h1 = 0.0;
        let mut h2 = 0.0;
        let mut linf = 0.0;
        for (k, c) in self.0.iter() {
            let a = c.abs_sq();
            let kk = k.norm_sq() as f64;
            l2 += a;
            h1 += kk * a;
            h2 += kk * kk * a;
            linf += a.sqrt();
        }
        let s = 2.0 * TORUS_VOLUME;
        Norms {
            l2_sq: s * l2,
            h1_sq: s * h1,
            h2_sq: s * h2,
            linf_bound: 2.0 * linf,
        }
    }

    /// `(grad u, grad w)`.
    pub fn grad_inner(&self, o: &Self) -> f64 {
        -self.0.laplacian().inner(&o.0)
    }
}

impl Deref for SpectralVelocity {
    type Target = SpectralVector;
    fn deref(&self) -> &SpectralVector {
        &self.0
    }
}

impl From<SpectralVelocity> for SpectralVector {
    fn from(v: SpectralVelocity) -> Self {
        v.0
    }
}
