//! Reproducible random operators.
//!
//! The generator is a 64-bit linear congruential generator,
//! `state ← state · 6364136223846793005 + 1442695040888963407 (mod 2^64)`,
//! seeded by `state = seed` and advanced once before the first draw.
//! Uniforms use the top 53 bits of the state; normals use Box–Muller
//! (two uniforms per pair, cosine branch first). A complex normal has
//! independent standard-normal real and imaginary parts, drawn in that order.
//!
//! Random strict contractions are `G / (‖G‖ · (1 + u))` with `G` a complex
//! Gaussian matrix and `u` uniform on `[0, 1)`.

use nalgebra::{ComplexField, DMatrix};

use crate::linalg::{operator_norm, ComplexMatrix};
use crate::scalar::{cx, re, Cx, Real};

pub const LCG_MULTIPLIER: u64 = 6364136223846793005;
pub const LCG_INCREMENT: u64 = 1442695040888963407;

#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
    spare_normal: Option<f64>,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        let mut rng = Self { state: seed, spare_normal: None };
        rng.next_u64();
        rng
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(LCG_MULTIPLIER).wrapping_add(LCG_INCREMENT);
        self.state
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_range(&mut self, lo: usize, hi: usize) -> usize {
        lo + ((self.uniform() * (hi - lo + 1) as f64) as usize).min(hi - lo)
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u keeps the logarithm finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn complex_normal<S: Real>(&mut self) -> Cx<S> {
        let re_part = self.normal();
        let im_part = self.normal();
        cx(S::lit(re_part), S::lit(im_part))
    }

    /// Complex point uniformly distributed in the disc of the given radius.
    pub fn disc_point<S: Real>(&mut self, radius: f64) -> Cx<S> {
        let r = radius * self.uniform().sqrt();
        let theta = 2.0 * std::f64::consts::PI * self.uniform();
        cx(S::lit(r * theta.cos()), S::lit(r * theta.sin()))
    }
}

pub fn gaussian_matrix<S: Real>(rng: &mut Lcg64, rows: usize, cols: usize) -> ComplexMatrix<S> {
    let entries = (0..rows * cols).map(|_| rng.complex_normal()).collect();
    ComplexMatrix::from_row_major(rows, cols, entries).expect("finite gaussian entries")
}

/// Strict contraction `G / (‖G‖ (1 + u))`.
pub fn random_contraction<S: Real>(rng: &mut Lcg64, n: usize) -> ComplexMatrix<S> {
    let g = gaussian_matrix::<S>(rng, n, n);
    let u = S::lit(rng.uniform());
    let norm = operator_norm(&g);
    g.scale_real(S::one() / (norm * (S::one() + u)))
}

/// Haar-distributed unitary from the QR factorisation of a Gaussian matrix,
/// with the diagonal of `R` rotated onto the positive reals.
pub fn random_unitary<S: Real>(rng: &mut Lcg64, n: usize) -> ComplexMatrix<S> {
    let g = gaussian_matrix::<S>(rng, n, n);
    let qr = g.inner().clone().qr();
    let (mut q, r): (DMatrix<Cx<S>>, DMatrix<Cx<S>>) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let m = d.modulus();
        if m > S::zero() {
            let phase = d * re(S::one() / m);
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    ComplexMatrix::from_inner(q)
}

/// Random Hermitian matrix `(G + G*) / 2`.
pub fn random_hermitian<S: Real>(rng: &mut Lcg64, n: usize) -> ComplexMatrix<S> {
    gaussian_matrix::<S>(rng, n, n).hermitian_part()
}

/// Random PSD matrix `G G* / n`, rank `rank`.
pub fn random_psd<S: Real>(rng: &mut Lcg64, n: usize, rank: usize) -> ComplexMatrix<S> {
    let g = gaussian_matrix::<S>(rng, n, rank);
    let gg = crate::linalg::multiply(&g, &crate::linalg::adjoint(&g)).expect("conformable");
    gg.scale_real(S::one() / S::lit(n.max(1) as f64)).hermitian_part()
}

/// Contraction with a non-trivial isometric part: `W (U ⊕ C) W*` with `U`
/// a random `k×k` unitary (`0 ≤ k ≤ n`), `C` a random strict contraction and
/// `W` a random unitary.
pub fn random_contraction_with_unitary_part<S: Real>(rng: &mut Lcg64, n: usize, k: usize) -> ComplexMatrix<S> {
    let k = k.min(n);
    let u = random_unitary::<S>(rng, k);
    let c = random_contraction::<S>(rng, n - k);
    let w = random_unitary::<S>(rng, n);
    let inner = u.direct_sum(&c);
    let left = crate::linalg::multiply(&w, &inner).expect("conformable");
    crate::linalg::multiply(&left, &crate::linalg::adjoint(&w)).expect("conformable")
}
