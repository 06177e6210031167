//! Reproducible Haar-random 4x4 unitaries and pure two-qubit states.
//!
//! Each draw is a pure function of a [`SeedSpec`]: the RNG is ChaCha8 keyed
//! by (master_seed, stream_index), so state k is bit-identical regardless of
//! worker count or execution order. Gaussians come from the basic Box-Muller
//! transform of two uniform draws; this transform is part of the
//! reproducibility contract and must not change.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::quantum::{Operator4, StateVector, C64};

/// Key of one deterministic substream: (master_seed, stream_index) -> output
/// is a pure function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// ChaCha8 keyed by the 32-byte layout
    /// `master_seed (LE) | stream_index (LE) | attempt (LE) | zeros`.
    pub fn rng(&self, attempt: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_index.to_le_bytes());
        key[16..24].copy_from_slice(&attempt.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }
}

/// A 4x4 unitary: U^dagger U = I within 1e-10 max-abs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary4 {
    pub m: [[C64; 4]; 4],
}

impl Unitary4 {
    pub fn unitarity_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..4 {
                    s += self.m[k][i].conj() * self.m[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                d = d.max((s - Complex64::new(expect, 0.0)).norm());
            }
        }
        d
    }

    pub fn column(&self, j: usize) -> [C64; 4] {
        [self.m[0][j], self.m[1][j], self.m[2][j], self.m[3][j]]
    }

    pub fn as_operator(&self) -> Operator4 {
        Operator4 { m: self.m }
    }
}

/// One standard normal via Box-Muller: z = sqrt(-2 ln u1) cos(2 pi u2).
/// Both halves of the pair are consumed so every Gaussian costs two uniforms.
fn standard_normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // gen::<f64>() is uniform on [0, 1); shift to (0, 1] for the log.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let a = 2.0 * std::f64::consts::PI * u2;
    (r * a.cos(), r * a.sin())
}

/// 4x4 matrix of iid standard complex Gaussians (Ginibre ensemble), variance
/// 1 per complex entry.
fn ginibre(rng: &mut ChaCha8Rng) -> [[C64; 4]; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for row in m.iter_mut() {
        for e in row.iter_mut() {
            let (re, im) = standard_normal_pair(rng);
            *e = Complex64::new(s * re, s * im);
        }
    }
    m
}

const SINGULAR_TOL: f64 = 1e-12;

/// Haar-distributed 4x4 unitary: Ginibre draw followed by modified
/// Gram-Schmidt QR. MGS normalizes each column by the real positive residual
/// norm, so R's diagonal is real positive by construction, which is the phase
/// convention that makes Q Haar-distributed. A (probability ~0) numerically
/// singular draw is retried with an incremented attempt counter.
pub fn haar_unitary(seed: SeedSpec) -> Unitary4 {
    for attempt in 0.. {
        let mut rng = seed.rng(attempt);
        let g = ginibre(&mut rng);
        if let Some(u) = qr_orthonormalize(g) {
            return u;
        }
    }
    unreachable!()
}

/// Modified Gram-Schmidt over the columns, with one reorthogonalization pass.
/// Returns None when a residual column norm falls below the singular cutoff.
fn qr_orthonormalize(g: [[C64; 4]; 4]) -> Option<Unitary4> {
    let mut cols: Vec<[C64; 4]> = (0..4)
        .map(|j| [g[0][j], g[1][j], g[2][j], g[3][j]])
        .collect();
    for k in 0..4 {
        for _pass in 0..2 {
            for j in 0..k {
                let proj: Complex64 = (0..4).map(|i| cols[j][i].conj() * cols[k][i]).sum();
                for i in 0..4 {
                    let v = cols[j][i];
                    cols[k][i] -= proj * v;
                }
            }
        }
        let norm: f64 = cols[k]
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm < SINGULAR_TOL {
            return None;
        }
        for i in 0..4 {
            cols[k][i] /= norm;
        }
    }
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for j in 0..4 {
        for i in 0..4 {
            m[i][j] = cols[j][i];
        }
    }
    Some(Unitary4 { m })
}

/// Uniformly distributed pure two-qubit state: the first column of a Haar
/// unitary.
pub fn random_pure_state(seed: SeedSpec) -> StateVector {
    let u = haar_unitary(seed);
    StateVector::new_renormalized(u.column(0), 1e-9).expect("QR column is normalized")
}
