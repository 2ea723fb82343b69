//! Linear algebra of the Minkowski space R^{n+2}_1.
//!
//! Index 0 is the timelike slot; the pairing is `-a0*b0 + a1*b1 + ... + a_{n+1}*b_{n+1}`.
//! The complexified pairing is the bilinear (not Hermitian) extension, so an
//! isotropic complex vector such as `e1 + i e2` pairs to zero with itself.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, WlabError};

/// Default relative threshold for counting singular values in [`span_rank`].
pub const RANK_TOL: f64 = 1e-8;

/// Real vector of R^{n+2}_1.
#[derive(Debug, Clone, PartialEq)]
pub struct MinkowskiVec(pub Vec<f64>);

/// Complex vector of the complexified Minkowski space.
#[derive(Debug, Clone, PartialEq)]
pub struct CMinkowskiVec(pub Vec<Complex64>);

impl MinkowskiVec {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// Standard basis vector `e_k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = 1.0;
        v
    }

    /// The light-cone point `(1, x)` over a point `x` of the unit sphere.
    pub fn lift(x: &[f64]) -> Self {
        let mut v = Vec::with_capacity(x.len() + 1);
        v.push(1.0);
        v.extend_from_slice(x);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn complexify(&self) -> CMinkowskiVec {
        CMinkowskiVec(self.0.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|a| a * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl CMinkowskiVec {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|a| a.conj()).collect())
    }

    pub fn re(&self) -> MinkowskiVec {
        MinkowskiVec(self.0.iter().map(|a| a.re).collect())
    }

    pub fn im(&self) -> MinkowskiVec {
        MinkowskiVec(self.0.iter().map(|a| a.im).collect())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(self.0.iter().map(|a| a * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `sqrt(max(<v, conj v>, 0))`; a true norm on spacelike subspaces such as V^perp.
    pub fn mink_norm(&self) -> f64 {
        pair_hermitian(&self.0, &self.0).max(0.0).sqrt()
    }
}

/// Bilinear Minkowski pairing on raw complex slices. Callers guarantee equal length.
#[inline]
pub fn pair(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut acc = -a[0] * b[0];
    for k in 1..a.len() {
        acc += a[k] * b[k];
    }
    acc
}

/// `<a, conj b>`, real part only (the value is real whenever `a == b`).
#[inline]
pub fn pair_hermitian(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut acc = -(a[0] * b[0].conj()).re;
    for k in 1..a.len() {
        acc += (a[k] * b[k].conj()).re;
    }
    acc
}

/// Real Minkowski pairing on raw slices.
#[inline]
pub fn pair_real(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = -a[0] * b[0];
    for k in 1..a.len() {
        acc += a[k] * b[k];
    }
    acc
}

pub fn mink_inner(a: &MinkowskiVec, b: &MinkowskiVec) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(WlabError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if a.dim() == 0 {
        return Err(WlabError::EmptyInput("zero-dimensional vector"));
    }
    Ok(pair_real(&a.0, &b.0))
}

pub fn cmink_inner(a: &CMinkowskiVec, b: &CMinkowskiVec) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(WlabError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if a.dim() == 0 {
        return Err(WlabError::EmptyInput("zero-dimensional vector"));
    }
    Ok(pair(&a.0, &b.0))
}

/// Number of singular values of the stacked point matrix exceeding `tol`
/// times the largest one.
pub fn span_rank(points: &[MinkowskiVec], tol: f64) -> Result<usize> {
    let first = points.first().ok_or(WlabError::EmptyInput("span_rank needs points"))?;
    let dim = first.dim();
    if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
        return Err(WlabError::DimensionMismatch {
            expected: dim,
            got: bad.dim(),
        });
    }
    let m = DMatrix::from_fn(points.len(), dim, |r, c| points[r].0[c]);
    Ok(rank_of(m, tol))
}

pub(crate) fn rank_of(m: DMatrix<f64>, tol: f64) -> usize {
    // SVD cost depends on the smaller side; fold tall matrices into a d x d factor first.
    let m = if m.nrows() > 4 * m.ncols() { m.qr().r() } else { m };
    let sv = m.svd(false, false).singular_values;
    let largest = sv.iter().cloned().fold(0.0_f64, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * largest).count()
}

/// Diagonal signature matrix `diag(-1, 1, ..., 1)`.
pub fn signature(dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |r, c| match (r, c) {
        (0, 0) => -1.0,
        (r, c) if r == c => 1.0,
        _ => 0.0,
    })
}

/// An element of O(n+1,1) acting on the projective light cone.
#[derive(Debug, Clone, PartialEq)]
pub struct MobiusMap {
    pub matrix: DMatrix<f64>,
}

impl MobiusMap {
    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|r| (0..d).map(|c| self.matrix[(r, c)] * v[c]).sum())
            .collect()
    }

    /// Inverse through the group relation `M^{-1} = G M^T G`.
    pub fn inverse(&self) -> Self {
        let g = signature(self.dim());
        Self {
            matrix: &g * self.matrix.transpose() * &g,
        }
    }

    /// Largest entry of `M^T G M - G`; zero for an exact Lorentz transformation.
    pub fn form_defect(&self) -> f64 {
        let g = signature(self.dim());
        (self.matrix.transpose() * &g * &self.matrix - g).amax()
    }
}

/// Exponential of a random element of so(n+1,1), scaled by `magnitude`.
///
/// Entries are drawn uniformly from [-1, 1], projected onto the Lie algebra
/// via `A -> A - G A^T G`, rescaled to Frobenius norm `magnitude`, and
/// exponentiated with nalgebra's scaling-and-squaring Pade routine. The
/// result lies in the identity component, so it preserves the future light cone.
pub fn random_mobius(n: usize, seed: u64, magnitude: f64) -> MobiusMap {
    let dim = n + 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..=1.0));
    let g = signature(dim);
    let algebra = &raw - &g * raw.transpose() * &g;
    let algebra = &algebra * (magnitude / algebra.norm());
    MobiusMap { matrix: algebra.exp() }
}
