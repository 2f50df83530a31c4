//! Contractions with a prescribed asymptotic limit, and functional calculus
//! by disc automorphisms.
//!
//! * [`lemma_block_construction`]: for positive blocks `A_0, A_1, …` with
//!   `r(A_j) ≤ r̲(A_{j+1})`, the block shift `X_j → X_{j+1}` with legs
//!   `A_{j+1}^{-1/2} A_j^{1/2}` has limit `⊕ A_j`.
//! * [`lemma_diagonal_construction`]: eigenvalues `λ_j ↗` laid out along
//!   anti-diagonals of `ℕ × ℕ`; each row is a weighted shift whose limit is
//!   the diagonal operator `α_{l,m}`.
//! * [`hybrid_construction`]: adds a column `m = 0` carrying eigenvalues
//!   below `b`, fed into the first column of the diagonal construction.
//!
//! Truncation never enters the stated bounds: errors are measured only on
//! blocks or indices whose `n`-step orbits stay inside the truncation.

use std::sync::Arc;

use nalgebra::ComplexField as _;
use thiserror::Error;

use crate::admissibility::{AdmissibilityError, Atom, SpectrumSpec, Tail};
use crate::asymptotics::{ConvergenceReport, ConvergenceStep};
use crate::expr::{EvalError, ExprAst};
use crate::linalg::{
    adjoint, hermitian_eigen, hermitian_norm, multiply, psd_inv_sqrt, psd_sqrt, ComplexMatrix, LinalgError,
};
use crate::operators::{truncate_sparse, DenseContraction, Index, IndexUniverse, OperatorError, OrbitShift, Window, WindowedShift};
use crate::scalar::{cx, Cx, Real};

/// Slack allowed in the ordering `r(A_j) ≤ r̲(A_{j+1})`.
pub const ORDER_SLACK: f64 = 1e-12;
/// Largest admissible condition number of `I − āT`.
pub const MAX_RESOLVENT_CONDITION: f64 = 1e12;
/// Contractivity slack for Möbius images.
pub const MOBIUS_SLACK: f64 = 1e-8;
/// Sample count used to screen a spectral transform `g` on `[0, 1]`.
pub const TRANSFORM_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Error)]
pub enum ConstructionError {
    #[error("specification violated: {0}")]
    SpecViolation(String),
    #[error("I - conj(a) T is nearly singular (1-norm condition number {condition:e})")]
    NearSingularResolvent { condition: f64 },
    #[error("g is not an admissible transform: {0} (checked at {TRANSFORM_SAMPLES} sample points)")]
    NotAdmissibleTransform(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Admissibility(#[from] AdmissibilityError),
}

fn violation(msg: impl Into<String>) -> ConstructionError {
    ConstructionError::SpecViolation(msg.into())
}

/// Positive blocks `A_0, …, A_{J−1}` of a common dimension.
#[derive(Debug, Clone)]
pub struct BlockSpec<S: Real> {
    pub blocks: Vec<ComplexMatrix<S>>,
}

/// Output of [`lemma_block_construction`].
#[derive(Debug, Clone)]
pub struct BlockConstruction<S: Real> {
    pub t: DenseContraction<S>,
    /// `⊕ A_j`
    pub exact_limit: ComplexMatrix<S>,
    pub block_dim: usize,
    pub blocks: Vec<ComplexMatrix<S>>,
    /// `r̲(A_j)` for each block.
    pub min_eigenvalues: Vec<S>,
}

impl<S: Real> BlockSpec<S> {
    pub fn new(blocks: Vec<ComplexMatrix<S>>) -> Self {
        Self { blocks }
    }

    /// `A_j = a_j·I_d`.
    pub fn scalar(values: &[f64], d: usize) -> Self {
        Self { blocks: values.iter().map(|&v| ComplexMatrix::identity(d).scale_real(S::lit(v))).collect() }
    }

    /// Checks the hypotheses and returns `(r̲(A_j), r(A_j))` per block.
    pub fn validate(&self) -> Result<Vec<(S, S)>, ConstructionError> {
        if self.blocks.len() < 2 {
            return Err(violation(format!("need at least 2 blocks, got {}", self.blocks.len())));
        }
        let d = self.blocks[0].rows();
        let tol = S::lit(ORDER_SLACK);
        let mut ranges = Vec::with_capacity(self.blocks.len());
        for (j, a) in self.blocks.iter().enumerate() {
            if a.rows() != d || a.cols() != d {
                return Err(violation(format!("block {j} is {}x{}, expected {d}x{d}", a.rows(), a.cols())));
            }
            let eig = hermitian_eigen(a, S::lit(1e-10))
                .map_err(|e| violation(format!("block {j} is not Hermitian: {e}")))?;
            let (lo, hi) = (eig.min_value().unwrap_or(S::zero()), eig.max_value().unwrap_or(S::zero()));
            if lo < -tol {
                return Err(violation(format!("block {j} is not positive: eigenvalue {lo}")));
            }
            if hi > S::one() + tol {
                return Err(violation(format!("block {j} is not a contraction: eigenvalue {hi}")));
            }
            ranges.push((lo.max(S::zero()), hi.min(S::one())));
        }
        if ranges[1].0 <= S::zero() {
            return Err(violation("block 1 must be invertible (minimal eigenvalue > 0)"));
        }
        for j in 0..ranges.len() - 1 {
            if ranges[j].1 > ranges[j + 1].0 + tol {
                return Err(violation(format!(
                    "ordering r(A_{j}) <= min eigenvalue of A_{} fails: {} > {}",
                    j + 1,
                    ranges[j].1,
                    ranges[j + 1].0
                )));
            }
        }
        Ok(ranges)
    }
}

/// Block shift `T|X_j = A_{j+1}^{-1/2} A_j^{1/2}`, last block sent to `0`.
pub fn lemma_block_construction<S: Real>(spec: &BlockSpec<S>) -> Result<BlockConstruction<S>, ConstructionError> {
    let ranges = spec.validate()?;
    let count = spec.blocks.len();
    let d = spec.blocks[0].rows();
    let mut t = ComplexMatrix::zeros(count * d, count * d);
    let herm_tol = S::lit(1e-10);
    for j in 0..count - 1 {
        let root = psd_sqrt(&spec.blocks[j], herm_tol)?;
        let inv_root = psd_inv_sqrt(&spec.blocks[j + 1], ranges[j + 1].0 * S::lit(0.5))?;
        let leg = multiply(&inv_root, &root)?;
        t = t.with_block((j + 1) * d, j * d, &leg);
    }
    let exact_limit = spec.blocks.iter().skip(1).fold(spec.blocks[0].clone(), |acc, b| acc.direct_sum(b));
    Ok(BlockConstruction {
        t: DenseContraction::new(t)?,
        exact_limit,
        block_dim: d,
        blocks: spec.blocks.clone(),
        min_eigenvalues: ranges.iter().map(|r| r.0).collect(),
    })
}

impl<S: Real> BlockConstruction<S> {
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// `1/r̲(A_n) − 1`; requires `1 ≤ n < J`.
    pub fn bound(&self, n: usize) -> S {
        S::one() / self.min_eigenvalues[n] - S::one()
    }

    /// `‖T*ⁿTⁿ − ⊕A_j‖` restricted to the blocks `j < J − n`, whose images
    /// stay inside the truncation.
    pub fn measured_error(&self, n: usize) -> Result<S, ConstructionError> {
        let mut power = ComplexMatrix::identity(self.t.dim());
        for _ in 0..n {
            power = multiply(self.t.matrix(), &power)?;
        }
        self.error_from_power(&power, n)
    }

    fn error_from_power(&self, power: &ComplexMatrix<S>, n: usize) -> Result<S, ConstructionError> {
        let interior = (self.block_count() - n) * self.block_dim;
        let gram = multiply(&adjoint(power), power)?.hermitian_part();
        let diff = gram.block((0, 0), (interior, interior)).sub(&self.exact_limit.block((0, 0), (interior, interior)))?;
        Ok(hermitian_norm(&diff))
    }

    /// Errors and bounds for `n = 1, …, min(max_n, J − 1)`.
    pub fn table(&self, max_n: usize) -> Result<ConvergenceReport, ConstructionError> {
        let mut steps = Vec::new();
        let mut power = ComplexMatrix::identity(self.t.dim());
        for n in 1..=max_n.min(self.block_count() - 1) {
            power = multiply(self.t.matrix(), &power)?;
            let error = self.error_from_power(&power, n)?.as_f64();
            steps.push(ConvergenceStep { n: n as u64, error, bound: Some(self.bound(n).as_f64()) });
        }
        Ok(finish_table(steps))
    }
}

fn finish_table(steps: Vec<ConvergenceStep>) -> ConvergenceReport {
    let converged = steps.iter().all(|s| s.bound.is_none_or(|b| s.error <= b + 1e-10));
    ConvergenceReport { converged, final_n: steps.last().map_or(0, |s| s.n), steps }
}

/// Position of `(l, m)` when `ℕ × ℕ` is enumerated along anti-diagonals:
/// `(1,1), (2,1), (1,2), (3,1), (2,2), (1,3), …`.
pub fn antidiag_index(l: i64, m: i64) -> i64 {
    let s = l + m;
    (s - 1) * (s - 2) / 2 + m
}

/// Eigenvalue sequence `λ_1, λ_2, …`.
#[derive(Debug, Clone)]
pub enum Eigenvalues {
    Formula(ExprAst),
    /// Finitely many values; orbits end where the list does.
    List(Vec<f64>),
}

/// Number of leading terms screened for range and monotonicity.
pub const SCREENED_TERMS: i64 = 10_000;

impl Eigenvalues {
    pub fn value(&self, j: i64) -> Result<f64, ConstructionError> {
        match self {
            Eigenvalues::Formula(e) => Ok(e.eval(j)?),
            Eigenvalues::List(v) => usize::try_from(j - 1)
                .ok()
                .and_then(|k| v.get(k).copied())
                .ok_or_else(|| violation(format!("eigenvalue list has no term {j}"))),
        }
    }

    fn len(&self) -> Option<i64> {
        match self {
            Eigenvalues::Formula(_) => None,
            Eigenvalues::List(v) => Some(v.len() as i64),
        }
    }

    /// Checks `0 < λ_j < 1` (or `lo ≤ λ_j < 1`) and monotonicity on the
    /// first terms.
    fn screen(&self, lo: f64, strict_lo: bool) -> Result<(), ConstructionError> {
        let count = self.len().unwrap_or(SCREENED_TERMS);
        if count == 0 {
            return Err(violation("no eigenvalues"));
        }
        let mut prev = f64::NEG_INFINITY;
        for j in 1..=count {
            let v = self.value(j)?;
            let low_ok = if strict_lo { v > lo } else { v >= lo };
            if !low_ok || v >= 1.0 {
                return Err(violation(format!("eigenvalue λ_{j} = {v} outside the allowed range")));
            }
            if v < prev {
                return Err(violation(format!("eigenvalues decrease at j = {j}: {prev} > {v}")));
            }
            prev = v;
        }
        Ok(())
    }
}

type LimitFn<S> = dyn Fn(Index) -> S + Send + Sync;

/// Output of the grid constructions: an orbit shift with known limit.
#[derive(Clone)]
pub struct OrbitConstruction<S: Real> {
    pub t: OrbitShift<S>,
    exact: Arc<LimitFn<S>>,
    lambda: Arc<Eigenvalues>,
}

impl<S: Real> std::fmt::Debug for OrbitConstruction<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OrbitConstruction").field("t", &self.t).field("lambda", &self.lambda).finish_non_exhaustive()
    }
}

impl<S: Real> OrbitConstruction<S> {
    /// `⟨A e_idx, e_idx⟩`; the limit is diagonal.
    pub fn exact_limit(&self, idx: Index) -> S {
        (self.exact)(idx)
    }

    /// `1/λ_n − 1`.
    pub fn bound(&self, n: usize) -> Result<S, ConstructionError> {
        Ok(S::one() / S::lit(self.lambda.value(n as i64)?) - S::one())
    }

    /// Compression to the square window `1 ≤ l ≤ N−1`, `origin ≤ m ≤ N−1`,
    /// which contains every index with `l + m ≤ N`.
    pub fn truncate(&self, n_total: i64) -> Result<WindowedShift<S>, ConstructionError> {
        let origin = match self.t.universe() {
            IndexUniverse::Grid { col_origin } => col_origin,
            _ => 1,
        };
        let w = Window::rect(self.t.universe(), (1, n_total - 1), (origin, n_total - 1));
        Ok(truncate_sparse(&self.t, &w)?)
    }

    /// Per-vector errors `|⟨T*ⁿTⁿ e, e⟩ − α|` on the window for `l + m + n ≤ N`.
    ///
    /// The truncated shift is applied `n` times to the all-ones vector and
    /// then its adjoint `n` times. Because successors are injective the
    /// Gram matrix of `Tⁿ` is diagonal, so this yields every diagonal entry
    /// at once, and those are the full columns of `T*ⁿTⁿ`.
    pub fn measured_errors(&self, ws: &WindowedShift<S>, n_total: i64, n: usize) -> Vec<(Index, S)> {
        let mut v = vec![cx(S::one(), S::zero()); ws.dim()];
        for _ in 0..n {
            v = ws.apply(&v);
        }
        for _ in 0..n {
            v = ws.apply_adjoint(&v);
        }
        ws.indices
            .iter()
            .zip(v)
            .filter(|(idx, _)| match idx {
                Index::Pair(l, m) => l + m + n as i64 <= n_total,
                Index::Single(_) => false,
            })
            .map(|(idx, g)| (*idx, (g.re - self.exact_limit(*idx)).abs()))
            .collect()
    }

    /// Worst interior error and bound for `n = 1, …, max_n`.
    pub fn table(&self, n_total: i64, max_n: usize) -> Result<ConvergenceReport, ConstructionError> {
        let ws = self.truncate(n_total)?;
        let mut steps = Vec::new();
        for n in 1..=max_n {
            let errs = self.measured_errors(&ws, n_total, n);
            if errs.is_empty() {
                break;
            }
            let error = errs.iter().map(|e| e.1.as_f64()).fold(0.0, f64::max);
            steps.push(ConvergenceStep { n: n as u64, error, bound: Some(self.bound(n)?.as_f64()) });
        }
        Ok(finish_table(steps))
    }
}

fn alpha(lambda: &Eigenvalues, l: i64, m: i64) -> f64 {
    lambda.value(antidiag_index(l, m)).unwrap_or(f64::NAN)
}

fn diagonal_successor(lambda: &Eigenvalues, l: i64, m: i64) -> Option<Index> {
    match lambda.len() {
        Some(len) if antidiag_index(l, m + 1) > len => None,
        _ => Some(Index::Pair(l, m + 1)),
    }
}

/// Weighted shifts along the rows of `[α_{l,m}]`, `α_{l,m} = λ_{antidiag(l,m)}`:
/// `e_{l,m} ↦ √(α_{l,m}/α_{l,m+1}) e_{l,m+1}`.
pub fn lemma_diagonal_construction<S: Real>(lambda: Eigenvalues) -> Result<OrbitConstruction<S>, ConstructionError> {
    lambda.screen(0.0, true)?;
    let lambda = Arc::new(lambda);
    let (ls, lw, lv, ld) = (lambda.clone(), lambda.clone(), lambda.clone(), lambda.clone());
    let t = OrbitShift::new(
        IndexUniverse::grid(),
        move |idx| match idx {
            Index::Pair(l, m) => diagonal_successor(&ls, l, m),
            Index::Single(_) => None,
        },
        move |idx| match idx {
            Index::Pair(l, m) => S::lit((alpha(&lw, l, m) / alpha(&lw, l, m + 1)).sqrt()),
            Index::Single(_) => S::zero(),
        },
    )
    .with_domain(move |idx| match (idx, ld.len()) {
        (Index::Pair(l, m), Some(len)) => antidiag_index(l, m) <= len,
        _ => true,
    });
    let exact = move |idx: Index| match idx {
        Index::Pair(l, m) => S::lit(alpha(&lv, l, m)),
        Index::Single(_) => S::zero(),
    };
    Ok(OrbitConstruction { t, exact: Arc::new(exact), lambda })
}

/// Diagonal construction plus a column `m = 0` holding `below_b`:
/// `e_{l,0} ↦ √(a_l/α_{l,1}) e_{l,1}` for `l ≤ below_b.len()`.
///
/// Requires `0 ≤ a_l < b ≤ λ_1`, so every new weight is at most `√(a_l/b) < 1`.
pub fn hybrid_construction<S: Real>(
    below_b: &[f64],
    b: f64,
    lambda: Eigenvalues,
) -> Result<OrbitConstruction<S>, ConstructionError> {
    if !(b > 0.0 && b < 1.0) {
        return Err(violation(format!("b = {b} must lie in (0, 1)")));
    }
    if let Some((k, a)) = below_b.iter().enumerate().find(|(_, a)| !(**a >= 0.0 && **a < b)) {
        return Err(violation(format!("value {k} of below_b is {a}, outside [0, {b})")));
    }
    lambda.screen(b, false)?;
    let rows = below_b.len() as i64;
    let below: Arc<Vec<f64>> = Arc::new(below_b.to_vec());
    let lambda = Arc::new(lambda);
    for (k, &a) in below.iter().enumerate() {
        let l = k as i64 + 1;
        let next = alpha(&lambda, l, 1);
        if next.is_nan() {
            return Err(violation(format!("no eigenvalue for (l, m) = ({l}, 1)")));
        }
        if (a / next).sqrt() > (a / b).sqrt() {
            return Err(violation(format!("weight at ({l}, 0) exceeds sqrt(a/b)")));
        }
    }
    let (ls, lw, lv, ld) = (lambda.clone(), lambda.clone(), lambda.clone(), lambda.clone());
    let (bw, bv) = (below.clone(), below.clone());
    let t = OrbitShift::new(
        IndexUniverse::Grid { col_origin: 0 },
        move |idx| match idx {
            Index::Pair(l, 0) => Some(Index::Pair(l, 1)),
            Index::Pair(l, m) => diagonal_successor(&ls, l, m),
            Index::Single(_) => None,
        },
        move |idx| match idx {
            Index::Pair(l, 0) => S::lit((bw[(l - 1) as usize] / alpha(&lw, l, 1)).sqrt()),
            Index::Pair(l, m) => S::lit((alpha(&lw, l, m) / alpha(&lw, l, m + 1)).sqrt()),
            Index::Single(_) => S::zero(),
        },
    )
    .with_domain(move |idx| match idx {
        Index::Pair(l, 0) => l <= rows,
        Index::Pair(l, m) => ld.len().is_none_or(|len| antidiag_index(l, m) <= len),
        Index::Single(_) => false,
    });
    let exact = move |idx: Index| match idx {
        Index::Pair(l, 0) => S::lit(bv[(l - 1) as usize]),
        Index::Pair(l, m) => S::lit(alpha(&lv, l, m)),
        Index::Single(_) => S::zero(),
    };
    Ok(OrbitConstruction { t, exact: Arc::new(exact), lambda })
}

/// Point `a` of the open unit disc, kept away from the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusParam<S: Real> {
    a: Cx<S>,
}

impl<S: Real> MobiusParam<S> {
    pub fn new(a: Cx<S>) -> Result<Self, ConstructionError> {
        if !(a.modulus() <= S::one() - S::lit(1e-9)) {
            return Err(violation(format!("|a| = {} must be at most 1 - 1e-9", a.modulus())));
        }
        Ok(Self { a })
    }

    pub fn real(a: f64) -> Result<Self, ConstructionError> {
        Self::new(cx(S::lit(a), S::zero()))
    }

    pub fn value(&self) -> Cx<S> {
        self.a
    }

    pub fn negated(&self) -> Self {
        Self { a: -self.a }
    }
}

/// `b_a(T) = (T − aI)(I − āT)^{-1}`.
pub fn mobius<S: Real>(t: &DenseContraction<S>, p: MobiusParam<S>) -> Result<DenseContraction<S>, ConstructionError> {
    let n = t.dim();
    let id = ComplexMatrix::identity(n);
    let resolvent = id.sub(&t.matrix().scale(p.a.conj()))?;
    let inverse = resolvent.inverse()?;
    let condition = (resolvent.norm_one() * inverse.norm_one()).as_f64();
    if !(condition <= MAX_RESOLVENT_CONDITION) {
        return Err(ConstructionError::NearSingularResolvent { condition });
    }
    let numerator = t.matrix().sub(&id.scale(p.a))?;
    Ok(DenseContraction::with_slack(multiply(&numerator, &inverse)?, S::lit(MOBIUS_SLACK))?)
}

/// `c · Π_k b_{a_k}(T)` for `|c| = 1`.
pub fn blaschke_product<S: Real>(
    t: &DenseContraction<S>,
    unimodular: Cx<S>,
    roots: &[MobiusParam<S>],
) -> Result<DenseContraction<S>, ConstructionError> {
    if (unimodular.modulus() - S::one()).abs() > S::lit(1e-12) {
        return Err(violation(format!("|c| = {} is not 1", unimodular.modulus())));
    }
    let mut acc = ComplexMatrix::identity(t.dim()).scale(unimodular);
    for &root in roots {
        acc = multiply(&acc, mobius(t, root)?.matrix())?;
    }
    Ok(DenseContraction::with_slack(acc, S::lit(MOBIUS_SLACK))?)
}

/// Screens `g` (a formula in `j`, read as a real variable `t`) on a uniform
/// grid: `g(0) = 0`, `g(1) = 1`, strictly increasing, `0 < g < 1` inside.
pub fn check_transform(g: &ExprAst) -> Result<(), ConstructionError> {
    let bad = |msg: String| ConstructionError::NotAdmissibleTransform(msg);
    let eval = |x: f64| g.eval_real(x).map_err(|e| bad(format!("g({x}) fails: {e}")));
    let g0 = eval(0.0)?;
    let g1 = eval(1.0)?;
    if g0.abs() > 1e-12 {
        return Err(bad(format!("g(0) = {g0}, expected 0")));
    }
    if (g1 - 1.0).abs() > 1e-12 {
        return Err(bad(format!("g(1) = {g1}, expected 1")));
    }
    let mut prev = g0;
    for k in 1..TRANSFORM_SAMPLES {
        let x = k as f64 / TRANSFORM_SAMPLES as f64;
        let v = eval(x)?;
        if !(v > 0.0 && v < 1.0) {
            return Err(bad(format!("g({x}) = {v} is not in (0, 1)")));
        }
        if v <= prev {
            return Err(bad(format!("g is not increasing near t = {x}")));
        }
        prev = v;
    }
    if g1 <= prev {
        return Err(bad("g is not increasing near t = 1".into()));
    }
    Ok(())
}

/// Spectrum of `g(A)`: atoms mapped pointwise, tails composed with `g`.
pub fn g_transform(spec: &SpectrumSpec, g: &ExprAst) -> Result<SpectrumSpec, ConstructionError> {
    check_transform(g)?;
    let atoms = spec
        .atoms
        .iter()
        .map(|a| {
            let value = if a.value == 0.0 || a.value == 1.0 { a.value } else { g.eval_real(a.value)? };
            Ok(Atom { value, mult: a.mult })
        })
        .collect::<Result<Vec<_>, ConstructionError>>()?;
    let tails = spec.tails.iter().map(|t| Tail::new(g.substitute(&t.expr), t.start, t.increasing)).collect();
    let out = SpectrumSpec { atoms, tails };
    out.validate()?;
    Ok(out)
}

/// Largest difference `|‖Xⁿe_k‖² − ‖Tⁿe_k‖²|` over `|k| ≤ N/4`, where `T` is
/// the compression of the half-weighted bilateral shift to `[−N, N]`,
/// `X = b_a(T)` and `n = 2^doublings`.
///
/// In infinite dimensions the two limits coincide for completely
/// non-unitary `T`; on a finite window both Gram sequences eventually
/// vanish, so the comparison is made at a fixed finite horizon instead.
pub fn mobius_window_discrepancy(half_width: i64, a: f64, doublings: usize) -> Result<f64, ConstructionError> {
    use crate::asymptotics::gram_diagonal_at_power;
    use crate::fixtures::half_weighted_bilateral_shift;

    let w = Window::interval(IndexUniverse::Integers, -half_width, half_width);
    let t = truncate_sparse(&half_weighted_bilateral_shift::<f64>(), &w)?.to_dense();
    let x = mobius(&t, MobiusParam::real(a)?)?;
    let gt = gram_diagonal_at_power(t.matrix(), doublings);
    let gx = gram_diagonal_at_power(x.matrix(), doublings);
    let centre = half_width as usize;
    let radius = (half_width / 4) as usize;
    Ok((centre - radius..=centre + radius).map(|c| (gt[c] - gx[c]).abs()).fold(0.0, f64::max))
}
