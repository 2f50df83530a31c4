//! Dense complex matrices, Hermitian spectral decomposition and the
//! positive-semidefinite functional calculus built on it.
//!
//! Matrices are immutable values; every operation returns a fresh matrix.
//! The eigensolver is nalgebra's Householder/implicit-QR routine, wrapped so
//! that the output ordering is deterministic (see [`hermitian_eigen`]).

use std::cmp::Ordering;
use std::fmt;

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_traits::Zero;
use thiserror::Error;

use crate::scalar::{re, Cx, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("entry count {got} does not match {rows}x{cols}")]
    EntryCount { rows: usize, cols: usize, got: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not Hermitian: ||A - A*|| = {residual:e} > {tol:e}")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e} < -{tol:e}")]
    NotPsd { min_eigenvalue: f64, tol: f64 },
    #[error("eigenvalue {eigenvalue:e} lies below the floor {floor:e}")]
    SingularBelowFloor { eigenvalue: f64, floor: f64 },
    #[error("matrix is singular to working precision")]
    Singular,
}

/// Finite complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix<S: Real> {
    inner: DMatrix<Cx<S>>,
}

impl<S: Real> fmt::Debug for ComplexMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.get(i, j);
                write!(f, "{:.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<S: Real> ComplexMatrix<S> {
    /// Builds a matrix from row-major entries, rejecting NaN/Inf.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Cx<S>>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::EntryCount { rows, cols, got: entries.len() });
        }
        for (k, z) in entries.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(LinalgError::NonFinite { row: k / cols.max(1), col: k % cols.max(1) });
            }
        }
        Ok(Self { inner: DMatrix::from_row_iterator(rows, cols, entries) })
    }

    /// Row-major real entries; panics on a count mismatch. Meant for literals.
    pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count");
        Self {
            inner: DMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| re(S::lit(x)))),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { inner: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: DMatrix::identity(n, n) }
    }

    pub fn from_real_diagonal(diag: &[S]) -> Self {
        let n = diag.len();
        let mut inner = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            inner[(i, i)] = re(d);
        }
        Self { inner }
    }

    pub fn from_diagonal(diag: &[Cx<S>]) -> Self {
        let n = diag.len();
        let mut inner = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            inner[(i, i)] = d;
        }
        Self { inner }
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<Cx<S>>]) -> Self {
        let mut inner = DMatrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (i, &z) in col.iter().enumerate() {
                inner[(i, j)] = z;
            }
        }
        Self { inner }
    }

    pub(crate) fn from_inner(inner: DMatrix<Cx<S>>) -> Self {
        Self { inner }
    }

    pub(crate) fn inner(&self) -> &DMatrix<Cx<S>> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Cx<S> {
        self.inner[(i, j)]
    }

    pub fn row_major(&self) -> Vec<Cx<S>> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Cx<S>> {
        self.inner.column(j).iter().copied().collect()
    }

    /// Real parts of the main diagonal.
    pub fn real_diagonal(&self) -> Vec<S> {
        (0..self.rows().min(self.cols())).map(|i| self.inner[(i, i)].re).collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.same_shape("add", other)?;
        Ok(Self { inner: &self.inner + &other.inner })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.same_shape("sub", other)?;
        Ok(Self { inner: &self.inner - &other.inner })
    }

    pub fn scale(&self, s: Cx<S>) -> Self {
        Self { inner: &self.inner * s }
    }

    pub fn scale_real(&self, s: S) -> Self {
        self.scale(re(s))
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = re(S::lit(0.5));
        Self { inner: (&self.inner + self.inner.adjoint()) * half }
    }

    pub fn frobenius_norm(&self) -> S {
        self.inner.iter().fold(S::zero(), |acc, z| acc + z.modulus_squared()).sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> S {
        self.inner.iter().fold(S::zero(), |acc, z| acc.max(z.modulus()))
    }

    /// Square of a square matrix.
    pub fn square(&self) -> Self {
        Self { inner: &self.inner * &self.inner }
    }

    pub fn trace(&self) -> Cx<S> {
        self.inner.trace()
    }

    /// Direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (r1, c1) = (self.rows(), self.cols());
        let mut inner = DMatrix::zeros(r1 + other.rows(), c1 + other.cols());
        inner.view_mut((0, 0), (r1, c1)).copy_from(&self.inner);
        inner.view_mut((r1, c1), (other.rows(), other.cols())).copy_from(&other.inner);
        Self { inner }
    }

    /// Sub-block of `len.0` rows and `len.1` columns starting at `start`.
    pub fn block(&self, start: (usize, usize), len: (usize, usize)) -> Self {
        Self { inner: self.inner.view(start, len).into_owned() }
    }

    /// Copy of `self` with `b` written at `(row, col)`.
    pub fn with_block(mut self, row: usize, col: usize, b: &Self) -> Self {
        self.inner.view_mut((row, col), (b.rows(), b.cols())).copy_from(&b.inner);
        self
    }

    pub fn mat_vec(&self, v: &[Cx<S>]) -> Vec<Cx<S>> {
        assert_eq!(v.len(), self.cols(), "vector length");
        let x = DVector::from_column_slice(v);
        (&self.inner * x).iter().copied().collect()
    }

    /// Inverse via LU; errors when the LU factorisation is singular.
    pub fn inverse(&self) -> Result<Self, LinalgError> {
        self.require_square()?;
        self.inner.clone().try_inverse().map(Self::from_inner).ok_or(LinalgError::Singular)
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> S {
        (0..self.cols())
            .map(|j| self.inner.column(j).iter().fold(S::zero(), |a, z| a + z.modulus()))
            .fold(S::zero(), |a, b| a.max(b))
    }

    pub(crate) fn require_square(&self) -> Result<(), LinalgError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(LinalgError::NotSquare { rows: self.rows(), cols: self.cols() })
        }
    }

    fn same_shape(&self, op: &'static str, other: &Self) -> Result<(), LinalgError> {
        if self.rows() == other.rows() && self.cols() == other.cols() {
            Ok(())
        } else {
            Err(LinalgError::DimensionMismatch {
                op,
                left: (self.rows(), self.cols()),
                right: (other.rows(), other.cols()),
            })
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen<S: Real> {
    /// Ascending eigenvalues.
    pub values: Vec<S>,
    /// Orthonormal eigenvectors, one column per eigenvalue.
    pub vectors: ComplexMatrix<S>,
}

impl<S: Real> HermitianEigen<S> {
    /// `V · diag(f(λ)) · V*`.
    pub fn map(&self, f: impl Fn(S) -> S) -> ComplexMatrix<S> {
        let v = &self.vectors.inner;
        let n = v.nrows();
        let mut scaled = v.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let fl = re(f(lambda));
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        ComplexMatrix::from_inner(scaled * v.adjoint())
    }

    pub fn vector(&self, j: usize) -> Vec<Cx<S>> {
        self.vectors.column(j)
    }

    pub fn min_value(&self) -> Option<S> {
        self.values.first().copied()
    }

    pub fn max_value(&self) -> Option<S> {
        self.values.last().copied()
    }
}

pub fn multiply<S: Real>(a: &ComplexMatrix<S>, b: &ComplexMatrix<S>) -> Result<ComplexMatrix<S>, LinalgError> {
    if a.cols() != b.rows() {
        return Err(LinalgError::DimensionMismatch {
            op: "multiply",
            left: (a.rows(), a.cols()),
            right: (b.rows(), b.cols()),
        });
    }
    Ok(ComplexMatrix::from_inner(&a.inner * &b.inner))
}

pub fn adjoint<S: Real>(a: &ComplexMatrix<S>) -> ComplexMatrix<S> {
    ComplexMatrix::from_inner(a.inner.adjoint())
}

/// Largest singular value, from the spectrum of the smaller Gram matrix.
pub fn operator_norm<S: Real>(a: &ComplexMatrix<S>) -> S {
    if a.rows() == 0 || a.cols() == 0 {
        return S::zero();
    }
    let gram = if a.cols() <= a.rows() {
        a.inner.adjoint() * &a.inner
    } else {
        &a.inner * a.inner.adjoint()
    };
    let gram = ComplexMatrix::from_inner(gram).hermitian_part();
    let top = raw_eigenvalues(&gram).into_iter().fold(S::zero(), |m, x| m.max(x));
    top.max(S::zero()).sqrt()
}

/// Operator norm of a Hermitian matrix: its largest |eigenvalue|.
pub fn hermitian_norm<S: Real>(a: &ComplexMatrix<S>) -> S {
    if a.rows() == 0 {
        return S::zero();
    }
    raw_eigenvalues(&a.hermitian_part()).into_iter().fold(S::zero(), |m, x| m.max(x.abs()))
}

/// Operator norm of `A - A*`, with a Frobenius shortcut.
pub fn hermitian_residual<S: Real>(a: &ComplexMatrix<S>) -> S {
    let skew = ComplexMatrix::from_inner(&a.inner - a.inner.adjoint());
    let fro = skew.frobenius_norm();
    if fro == S::zero() {
        return fro;
    }
    // i(A - A*) is Hermitian, so its norm is the largest |eigenvalue|.
    let herm = skew.scale(crate::scalar::cx(S::zero(), S::one())).hermitian_part();
    raw_eigenvalues(&herm).into_iter().fold(S::zero(), |m, x| m.max(x.abs()))
}

fn require_hermitian<S: Real>(a: &ComplexMatrix<S>, tol: S) -> Result<(), LinalgError> {
    a.require_square()?;
    let skew = ComplexMatrix::from_inner(&a.inner - a.inner.adjoint());
    if skew.frobenius_norm() <= tol {
        return Ok(());
    }
    let residual = hermitian_residual(a);
    if residual <= tol {
        Ok(())
    } else {
        Err(LinalgError::NotHermitian { residual: residual.as_f64(), tol: tol.as_f64() })
    }
}

fn raw_eigenvalues<S: Real>(herm: &ComplexMatrix<S>) -> Vec<S> {
    SymmetricEigen::new(herm.inner.clone()).eigenvalues.iter().copied().collect()
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues come out ascending. Each eigenvector is phase-normalised so
/// that its first non-negligible component is real and positive; within a
/// group of (numerically) equal eigenvalues the vectors are ordered by the
/// position of that first component, then lexicographically by components.
pub fn hermitian_eigen<S: Real>(a: &ComplexMatrix<S>, tol: S) -> Result<HermitianEigen<S>, LinalgError> {
    require_hermitian(a, tol)?;
    let n = a.rows();
    let sym = a.hermitian_part();
    let eig = SymmetricEigen::new(sym.inner.clone());
    let scale = S::one().max(eig.eigenvalues.iter().fold(S::zero(), |m, x| m.max(x.abs())));
    let negligible = S::lit(1e-10);

    let mut pairs: Vec<(S, Vec<Cx<S>>)> = (0..n)
        .map(|j| {
            let mut v: Vec<Cx<S>> = eig.eigenvectors.column(j).iter().copied().collect();
            normalise_phase(&mut v, negligible);
            (eig.eigenvalues[j], v)
        })
        .collect();

    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
    let tie = S::lit(1e-11) * scale;
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end].0 - pairs[end - 1].0 <= tie {
            end += 1;
        }
        if end - start > 1 {
            let group: Vec<Vec<Cx<S>>> = pairs[start..end].iter().map(|p| p.1.clone()).collect();
            for (slot, mut v) in pairs[start..end].iter_mut().zip(canonical_basis(n, &group)) {
                normalise_phase(&mut v, negligible);
                slot.1 = v;
            }
        }
        pairs[start..end].sort_by(|x, y| compare_vectors(&x.1, &y.1, negligible));
        start = end;
    }

    let values = pairs.iter().map(|p| p.0).collect();
    let columns: Vec<Vec<Cx<S>>> = pairs.into_iter().map(|p| p.1).collect();
    Ok(HermitianEigen { values, vectors: ComplexMatrix::from_columns(n, &columns) })
}

/// Basis of `span(group)` independent of the solver's choice inside a
/// degenerate eigenspace: Gram–Schmidt over the projected unit vectors
/// `P e_0, P e_1, ...`, largest residual first among near-ties in index order.
fn canonical_basis<S: Real>(n: usize, group: &[Vec<Cx<S>>]) -> Vec<Vec<Cx<S>>> {
    let g = group.len();
    let project = |i: usize| -> Vec<Cx<S>> {
        // P e_i = sum_k v_k conj(v_k[i])
        let mut out = vec![Cx::zero(); n];
        for v in group {
            let c = v[i].conj();
            for (o, x) in out.iter_mut().zip(v) {
                *o += *x * c;
            }
        }
        out
    };
    let mut basis: Vec<Vec<Cx<S>>> = Vec::with_capacity(g);
    let accept = S::lit(0.5) / S::lit(n.max(1) as f64).sqrt();
    let pass = |threshold: S, basis: &mut Vec<Vec<Cx<S>>>| {
        for i in 0..n {
            if basis.len() == g {
                break;
            }
            let mut v = project(i);
            for b in basis.iter() {
                let c = inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= *y * c;
                }
            }
            let norm = vector_norm(&v);
            if norm > threshold {
                let inv = re(S::one() / norm);
                basis.push(v.into_iter().map(|x| x * inv).collect());
            }
        }
    };
    pass(accept, &mut basis);
    if basis.len() < g {
        pass(S::lit(1e-8), &mut basis);
    }
    if basis.len() < g {
        return group.to_vec();
    }
    basis
}

fn normalise_phase<S: Real>(v: &mut [Cx<S>], negligible: S) {
    if let Some(lead) = v.iter().find(|z| z.modulus() > negligible).copied() {
        let phase = lead.conj() * re(S::one() / lead.modulus());
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

fn leading_position<S: Real>(v: &[Cx<S>], negligible: S) -> usize {
    v.iter().position(|z| z.modulus() > negligible).unwrap_or(v.len())
}

fn compare_vectors<S: Real>(x: &[Cx<S>], y: &[Cx<S>], negligible: S) -> Ordering {
    leading_position(x, negligible).cmp(&leading_position(y, negligible)).then_with(|| {
        for (a, b) in x.iter().zip(y) {
            // larger components first, so e1 precedes e2 in the identity case
            match b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal) {
                Ordering::Equal => {}
                o => return o,
            }
            match b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    })
}

/// Hermitian PSD square root; eigenvalues in `[-tol, 0)` are clamped to zero.
pub fn psd_sqrt<S: Real>(a: &ComplexMatrix<S>, tol: S) -> Result<ComplexMatrix<S>, LinalgError> {
    let eig = hermitian_eigen(a, tol)?;
    if let Some(min) = eig.min_value() {
        if min < -tol {
            return Err(LinalgError::NotPsd { min_eigenvalue: min.as_f64(), tol: tol.as_f64() });
        }
    }
    Ok(eig.map(|x| x.max(S::zero()).sqrt()).hermitian_part())
}

/// Inverse square root of a positive definite matrix whose spectrum stays
/// above `floor`.
pub fn psd_inv_sqrt<S: Real>(a: &ComplexMatrix<S>, floor: S) -> Result<ComplexMatrix<S>, LinalgError> {
    let tol = S::lit(1e-10) * S::one().max(a.max_abs());
    let eig = hermitian_eigen(a, tol)?;
    if let Some(min) = eig.min_value() {
        if min < floor {
            return Err(LinalgError::SingularBelowFloor { eigenvalue: min.as_f64(), floor: floor.as_f64() });
        }
    }
    Ok(eig.map(|x| S::one() / x.sqrt()).hermitian_part())
}

/// Loewner comparison `a ≤ b`: the smallest eigenvalue of `b - a` is at least `-tol`.
pub fn loewner_leq<S: Real>(a: &ComplexMatrix<S>, b: &ComplexMatrix<S>, tol: S) -> Result<bool, LinalgError> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(LinalgError::DimensionMismatch {
            op: "loewner_leq",
            left: (a.rows(), a.cols()),
            right: (b.rows(), b.cols()),
        });
    }
    require_hermitian(a, tol)?;
    require_hermitian(b, tol)?;
    let diff = b.sub(a)?.hermitian_part();
    if diff.rows() == 0 {
        return Ok(true);
    }
    let min = raw_eigenvalues(&diff).into_iter().fold(S::max_value().unwrap_or(S::lit(f64::MAX)), |m, x| m.min(x));
    Ok(min >= -tol)
}

/// Complex inner product `<x, y>` (linear in `y`).
pub fn inner<S: Real>(x: &[Cx<S>], y: &[Cx<S>]) -> Cx<S> {
    x.iter().zip(y).fold(Cx::zero(), |acc, (a, b)| acc + a.conj() * b)
}

pub fn vector_norm<S: Real>(x: &[Cx<S>]) -> S {
    x.iter().fold(S::zero(), |acc, z| acc + z.modulus_squared()).sqrt()
}
