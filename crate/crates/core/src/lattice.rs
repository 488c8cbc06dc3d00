//! Integer wave vectors, the Euclidean truncation ball and the canonical
//! half-lattice used to store Hermitian-symmetric coefficients.
//!
//! A real field on the torus has `c(-k) = conj(c(k))`, so only one member of
//! each `{k, -k}` pair is stored. The canonical member is the one whose first
//! nonzero component is positive.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveVector(pub [i32; 3]);

impl WaveVector {
    pub const fn new(k1: i32, k2: i32, k3: i32) -> Self {
        WaveVector([k1, k2, k3])
    }

    #[inline]
    pub fn norm_sq(self) -> i64 {
        self.0.iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    #[inline]
    pub fn norm(self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// First nonzero component positive.
    #[inline]
    pub fn is_canonical(self) -> bool {
        let [a, b, c] = self.0;
        a > 0 || (a == 0 && (b > 0 || (b == 0 && c > 0)))
    }

    #[inline]
    pub fn as_f64(self) -> [f64; 3] {
        [self.0[0] as f64, self.0[1] as f64, self.0[2] as f64]
    }

    /// Largest absolute component.
    #[inline]
    pub fn max_abs(self) -> u32 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }
}

impl std::ops::Neg for WaveVector {
    type Output = WaveVector;
    fn neg(self) -> WaveVector {
        WaveVector([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl std::ops::Add for WaveVector {
    type Output = WaveVector;
    fn add(self, o: WaveVector) -> WaveVector {
        WaveVector([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl fmt::Display for WaveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// Spectral cutoff `n`: the set `0 < |k| <= n` in the Euclidean norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TruncationBall(pub u32);

impl TruncationBall {
    pub const fn new(n: u32) -> Self {
        TruncationBall(n)
    }

    #[inline]
    pub fn radius(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn contains(self, k: WaveVector) -> bool {
        let r = self.0 as i64;
        !k.is_zero() && k.norm_sq() <= r * r
    }
}

/// Canonical modes of a truncation ball, sorted, with a dense lookup cube.
#[derive(Debug)]
pub struct ModeLattice {
    ball: TruncationBall,
    modes: Vec<WaveVector>,
    lookup: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl ModeLattice {
    fn build(ball: TruncationBall) -> Self {
        let r = ball.radius() as i32;
        let side = (2 * r + 1) as usize;
        let mut lookup = vec![ABSENT; side * side * side];
        let mut modes = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    let k = WaveVector::new(a, b, c);
                    if k.is_canonical() && ball.contains(k) {
                        modes.push(k);
                    }
                }
            }
        }
        for (i, k) in modes.iter().enumerate() {
            lookup[Self::cube_index(r, *k)] = i as u32;
        }
        ModeLattice {
            ball,
            modes,
            lookup,
        }
    }

    /// Shared lattice for `ball`; built once per radius.
    pub fn shared(ball: TruncationBall) -> Arc<ModeLattice> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<ModeLattice>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("lattice cache poisoned");
        guard
            .entry(ball.radius())
            .or_insert_with(|| Arc::new(ModeLattice::build(ball)))
            .clone()
    }

    #[inline]
    fn cube_index(r: i32, k: WaveVector) -> usize {
        let side = (2 * r + 1) as usize;
        let [a, b, c] = k.0;
        (((a + r) as usize) * side + (b + r) as usize) * side + (c + r) as usize
    }

    #[inline]
    pub fn ball(&self) -> TruncationBall {
        self.ball
    }

    #[inline]
    pub fn modes(&self) -> &[WaveVector] {
        &self.modes
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Storage slot of a canonical `k`, if inside the ball.
    #[inline]
    pub fn index_of(&self, k: WaveVector) -> Option<usize> {
        let r = self.ball.radius() as i32;
        if k.0.iter().any(|c| c.abs() > r) {
            return None;
        }
        match self.lookup[Self::cube_index(r, k)] {
            ABSENT => None,
            i => Some(i as usize),
        }
    }
}
