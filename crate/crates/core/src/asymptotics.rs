//! Asymptotic limits `A_T = lim T*ⁿTⁿ`.
//!
//! Dense contractions are handled by repeated squaring: `Q_k` is the Gram
//! matrix of `T^(2^k)`, and the sequence `Q_k` is Loewner-decreasing, so the
//! first small step difference identifies the limit. Orbit shifts have
//! diagonal limits given by infinite products of squared weights along each
//! orbit; see [`asymptotic_limit_orbit`] for the stopping rules.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{adjoint, hermitian_eigen, hermitian_norm, multiply, psd_sqrt, ComplexMatrix, LinalgError};
use crate::operators::{Block, BlockDiagonalOperator, DenseContraction, Index, OperatorError, OrbitShift, Window};
use crate::scalar::Real;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_DOUBLINGS: usize = 60;
/// Richardson columns used by the orbit extrapolation.
pub const EXTRAPOLATION_COLUMNS: usize = 3;
/// Overshoot of `‖Q_k‖` past 1 at which squaring gives up as drift-bound.
pub const DRIFT_LIMIT: f64 = 1e-6;
/// Consecutive near-zero relative decrements needed by the stagnation rule.
pub const STAGNATION_RUN: usize = 64;
/// First step count at which the orbit-product extrapolation samples the
/// partial log-product; later samples double it.
pub const EXTRAPOLATION_BASE: usize = 64;
/// Settling threshold for the extrapolation after `n` steps is
/// `max(tol, NOISE·ε·√n, DRIFT·ε·n)`. Each squared weight carries a
/// rounding error of a few ulps; independent errors grow like `√n`, but
/// weights given by smooth formulas round with a consistent bias that grows
/// like `n`, and extrapolating past that floor only chases the bias.
pub const EXTRAPOLATION_NOISE: f64 = 32.0;
pub const EXTRAPOLATION_DRIFT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStep {
    pub n: u64,
    pub error: f64,
    pub bound: Option<f64>,
}

/// Per-step record of `T*ⁿTⁿ → A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub final_n: u64,
    pub steps: Vec<ConvergenceStep>,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }

    /// Errors never increase by more than `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.steps.windows(2).all(|w| w[1].error <= w[0].error + slack)
    }

    /// Every step carrying a bound satisfies `error ≤ bound + slack`.
    pub fn respects_bounds(&self, slack: f64) -> bool {
        self.steps.iter().all(|s| s.bound.is_none_or(|b| s.error <= b + slack))
    }
}

#[derive(Debug, Clone, Error)]
pub enum AsymptoticsError {
    #[error("no convergence after {} doublings", .0.steps.len().saturating_sub(1))]
    NoConvergence(Box<ConvergenceReport>),
    #[error("orbit product inconclusive after {steps} steps: limit in [{lower}, {upper}]")]
    Inconclusive { lower: f64, upper: f64, steps: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Result of [`asymptotic_limit_dense`].
#[derive(Debug, Clone)]
pub struct DenseLimit<S: Real> {
    pub limit: ComplexMatrix<S>,
    /// Step `k` records `n = 2^k` and `‖Q_k − A‖`.
    pub report: ConvergenceReport,
    /// `‖Q_k − Q_{k−1}‖` for `k ≥ 1`.
    pub differences: Vec<f64>,
    /// `T^(2^K)` at the final doubling `K`.
    pub final_power: ComplexMatrix<S>,
}

/// Asymptotic limit of a dense contraction by repeated squaring.
///
/// Returns the first `Q_k` with `‖Q_k − Q_{k−1}‖ ≤ tol`, after at most
/// `max_doublings` squarings. Report errors are measured against the
/// returned limit, which makes them monotone.
pub fn asymptotic_limit_dense<S: Real>(
    t: &DenseContraction<S>,
    tol: S,
    max_doublings: usize,
) -> Result<DenseLimit<S>, AsymptoticsError> {
    let mut power = t.matrix().clone();
    let mut gram = multiply(&adjoint(&power), &power)?.hermitian_part();
    let mut iterates = vec![gram.clone()];
    let mut differences = Vec::new();
    let mut converged = false;
    for _ in 0..max_doublings {
        power = power.square();
        let next = multiply(&adjoint(&power), &power)?.hermitian_part();
        let diff = hermitian_norm(&gram.sub(&next)?);
        differences.push(diff.as_f64());
        iterates.push(next.clone());
        gram = next;
        if diff <= tol {
            converged = true;
            break;
        }
        // Squaring amplifies rounding by about 2^k; once the iterate leaves
        // the unit ball the drift has swamped the tolerance for good.
        if hermitian_norm(&gram) > S::one() + S::lit(DRIFT_LIMIT) {
            break;
        }
    }
    let steps = iterates
        .iter()
        .enumerate()
        .map(|(k, q)| {
            let error = hermitian_norm(&q.sub(&gram).expect("same shape")).as_f64();
            Ok(ConvergenceStep { n: 1u64 << k.min(63), error, bound: None })
        })
        .collect::<Result<Vec<_>, AsymptoticsError>>()?;
    let report = ConvergenceReport { converged, final_n: steps.last().map_or(1, |s| s.n), steps };
    if !converged {
        return Err(AsymptoticsError::NoConvergence(Box::new(report)));
    }
    Ok(DenseLimit { limit: gram, report, differences, final_power: power })
}

/// Which rule ended an orbit-product evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Partial product fell below the tolerance.
    Vanished,
    /// The orbit reached an index with no successor (`Tⁿe = 0` from then on).
    OrbitEnds,
    /// The orbit revisited an index.
    Cycle,
    /// Relative decrements stayed below the tolerance for
    /// [`STAGNATION_RUN`] consecutive steps.
    Stagnated,
    /// Extrapolation of the log-product settled.
    Extrapolated,
    /// The orbit reached an index whose limit was already known (batch
    /// evaluation only).
    Known,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitLimit<S: Real> {
    pub value: S,
    pub steps: usize,
    pub rule: StopRule,
}

/// Diagonal entry `⟨A_T e, e⟩ = Π_{n≥0} w(σⁿ(idx))²` of an orbit shift.
///
/// The partial products are non-increasing. The walk stops when
///
/// 1. the partial product drops below `tol` (limit reported as `0`);
/// 2. the successor is undefined (`0`);
/// 3. an index repeats: `0` if the cycle's product is below one, else the
///    current product;
/// 4. the relative decrement stays below `tol` for 64 consecutive steps
///    (current product);
/// 5. the extrapolated partial log-product (see [`extrapolate`]), sampled
///    at `64·2^k` steps, changes by at most the noise floor (see
///    [`EXTRAPOLATION_NOISE`]) or `tol` between
///    consecutive samples (the extrapolated value, capped by the current
///    product).
///
/// Rule 5 is what makes slowly converging products such as `Π (l²−1)/l²`
/// reachable to ~1e−13 within a few thousand steps.
pub fn asymptotic_limit_orbit<S: Real>(
    t: &OrbitShift<S>,
    idx: Index,
    tol: S,
    max_steps: usize,
) -> Result<OrbitLimit<S>, AsymptoticsError> {
    walk_orbit(t, idx, tol, max_steps, &HashMap::new())
}

/// [`asymptotic_limit_orbit`] for many indices at once, in input order.
///
/// Uses `⟨A e_k, e_k⟩ = w_k² ⟨A e_σ(k), e_σ(k)⟩`: indices are processed in
/// decreasing order, and a walk ends as soon as it reaches an index whose
/// limit is already known. Rows of a grid then cost one long walk each.
pub fn asymptotic_limit_orbit_batch<S: Real>(
    t: &OrbitShift<S>,
    indices: &[Index],
    tol: S,
    max_steps: usize,
) -> Result<Vec<OrbitLimit<S>>, AsymptoticsError> {
    let mut order: Vec<usize> = (0..indices.len()).collect();
    order.sort_by(|a, b| indices[*b].cmp(&indices[*a]));
    let mut known = HashMap::with_capacity(indices.len());
    let mut out = vec![None; indices.len()];
    for k in order {
        let l = walk_orbit(t, indices[k], tol, max_steps, &known)?;
        known.insert(indices[k], l.value);
        out[k] = Some(l);
    }
    Ok(out.into_iter().map(|l| l.expect("every index visited")).collect())
}

fn walk_orbit<S: Real>(
    t: &OrbitShift<S>,
    idx: Index,
    tol: S,
    max_steps: usize,
    known: &HashMap<Index, S>,
) -> Result<OrbitLimit<S>, AsymptoticsError> {
    let mut current = idx;
    let mut product = S::one();
    let mut log_sum = S::zero();
    let mut log_carry = S::zero();
    // Brent's cycle detection: a marker index is re-placed at steps 1, 2, 4, …
    let mut marker = (idx, 0usize, S::one());
    let mut next_marker = 1usize;
    let mut quiet = 0usize;
    let mut samples: Vec<S> = Vec::new();
    let mut previous_estimate: Option<S> = None;
    let mut checkpoint = EXTRAPOLATION_BASE;
    let cycle_margin = S::lit(64.0 * f64::EPSILON);
    let done = |value: S, steps: usize, rule: StopRule| Ok(OrbitLimit { value, steps, rule });

    for step in 0..max_steps {
        if step > 0 && !known.is_empty() {
            if let Some(&v) = known.get(&current) {
                let value = product * v;
                return done(if value < tol { S::zero() } else { value }, step, StopRule::Known);
            }
        }
        if step > marker.1 && current == marker.0 {
            let cycle_factor = product / marker.2;
            let len = S::lit((step - marker.1) as f64);
            return if cycle_factor < S::one() - cycle_margin * len {
                done(S::zero(), step, StopRule::Cycle)
            } else {
                done(product, step, StopRule::Cycle)
            };
        }
        if step == next_marker {
            marker = (current, step, product);
            next_marker *= 2;
        }

        let Some(next) = t.successor(current)? else {
            return done(S::zero(), step, StopRule::OrbitEnds);
        };
        let w = t.weight(current)?;
        if w == S::zero() {
            return done(S::zero(), step + 1, StopRule::Vanished);
        }
        let w2 = w * w;
        let updated = product * w2;
        // Neumaier summation: rounding of the sum itself stays below the noise
        // already present in the weights
        let term = (w2 - S::one()).ln_1p();
        let sum = log_sum + term;
        log_carry += if log_sum.abs() >= term.abs() { (log_sum - sum) + term } else { (term - sum) + log_sum };
        log_sum = sum;
        if updated < tol {
            return done(S::zero(), step + 1, StopRule::Vanished);
        }
        if (product - updated) / product < tol {
            quiet += 1;
        } else {
            quiet = 0;
        }
        product = updated;
        current = next;
        if quiet >= STAGNATION_RUN {
            return done(product, step + 1, StopRule::Stagnated);
        }

        if step + 1 == checkpoint {
            checkpoint *= 2;
            samples.push(log_sum + log_carry);
            let estimate = extrapolate(&samples);
            if let (Some(prev), Some(estimate)) = (previous_estimate, estimate) {
                let n = (step + 1) as f64;
                let noise = S::lit(f64::EPSILON * (EXTRAPOLATION_NOISE * n.sqrt()).max(EXTRAPOLATION_DRIFT * n));
                if (estimate - prev).abs() <= tol.max(noise) {
                    let value = estimate.exp().min(product).max(S::zero());
                    return done(value, step + 1, StopRule::Extrapolated);
                }
            }
            previous_estimate = estimate;
        }
    }
    Err(AsymptoticsError::Inconclusive { lower: 0.0, upper: product.as_f64(), steps: max_steps })
}

/// Limit estimate from partial sums sampled at `64·2^k` steps.
///
/// Tails of sums of smooth power-law terms expand as
/// `n^(−p)·(c₀ + c₁/n + c₂/n² + …)`. The ratio of consecutive sample
/// differences gives exponent estimates `p_k = p + a/n + b/n² + …`; two
/// Richardson steps on the last three of them pin `p` down to ~1e−7, close
/// enough to snap integer exponents (within 1e−5) without swallowing
/// nearby non-integer ones. Elimination of `p, p+1, …` then runs over the
/// latest `EXTRAPOLATION_COLUMNS + 1` samples.
fn extrapolate<S: Real>(samples: &[S]) -> Option<S> {
    let n = samples.len();
    if n < 5 {
        return None;
    }
    if samples[n - 1] == samples[n - 2] {
        return Some(samples[n - 1]);
    }
    let exponent = |k: usize| {
        let (d1, d2) = ((samples[k - 1] - samples[k - 2]).as_f64(), (samples[k] - samples[k - 1]).as_f64());
        let ratio = d1 / d2;
        (ratio.is_finite() && ratio > 1.0).then(|| ratio.log2())
    };
    let (p0, p1, p2) = (exponent(n - 3)?, exponent(n - 2)?, exponent(n - 1)?);
    let refined = (8.0 * p2 - 6.0 * p1 + p0) / 3.0;
    let mut p = if refined > 0.0 { refined } else { p2 };
    if (p - p.round()).abs() < 1e-5 {
        p = p.round();
    }
    let depth = (n - 1).min(EXTRAPOLATION_COLUMNS);
    let mut col: Vec<S> = samples[n - 1 - depth..].to_vec();
    for m in 0..depth {
        let factor = S::lit(2f64.powf(p + m as f64));
        col = col.windows(2).map(|w| w[1] + (w[1] - w[0]) / (factor - S::one())).collect();
    }
    col.last().copied()
}

/// Orthonormal basis (as matrix columns) of a spectral subspace.
#[derive(Debug, Clone)]
pub struct Subspace<S: Real> {
    pub basis: ComplexMatrix<S>,
}

impl<S: Real> Subspace<S> {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn vectors(&self) -> Vec<Vec<crate::scalar::Cx<S>>> {
        (0..self.dim()).map(|j| self.basis.column(j)).collect()
    }
}

fn spectral_subspace<S: Real>(
    a: &ComplexMatrix<S>,
    tol: S,
    keep: impl Fn(S) -> bool,
) -> Result<Subspace<S>, AsymptoticsError> {
    let herm_tol = tol.max(S::lit(1e-12));
    let eig = hermitian_eigen(a, herm_tol)?;
    let cols: Vec<_> = (0..eig.values.len()).filter(|&j| keep(eig.values[j])).map(|j| eig.vector(j)).collect();
    Ok(Subspace { basis: ComplexMatrix::from_columns(a.rows(), &cols) })
}

/// Span of eigenvectors of `a` with eigenvalue `≤ tol` (the stable vectors
/// when `a` is an asymptotic limit).
pub fn stable_subspace<S: Real>(a: &ComplexMatrix<S>, tol: S) -> Result<Subspace<S>, AsymptoticsError> {
    spectral_subspace(a, tol, |x| x <= tol)
}

/// Span of eigenvectors of `a` with eigenvalue `≥ 1 − tol`.
pub fn isometric_subspace<S: Real>(a: &ComplexMatrix<S>, tol: S) -> Result<Subspace<S>, AsymptoticsError> {
    spectral_subspace(a, tol, |x| x >= S::one() - tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardClass {
    /// Every vector is stable.
    C0Dot,
    /// Only `0` is stable.
    C1Dot,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackwardClass {
    CDot0,
    CDot1,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContractionClass {
    pub forward: ForwardClass,
    pub backward: BackwardClass,
    /// Dimension of the stable subspace of `T`.
    pub stable_dim: usize,
    /// Dimension of the isometric subspace of `T`.
    pub isometric_dim: usize,
    pub dim: usize,
}

impl ContractionClass {
    /// `C_{ij}` when both sides are pure, otherwise e.g. `Mixed/Mixed`.
    pub fn label(&self) -> String {
        let f = match self.forward {
            ForwardClass::C0Dot => Some('0'),
            ForwardClass::C1Dot => Some('1'),
            ForwardClass::Mixed => None,
        };
        let b = match self.backward {
            BackwardClass::CDot0 => Some('0'),
            BackwardClass::CDot1 => Some('1'),
            BackwardClass::Mixed => None,
        };
        match (f, b) {
            (Some(i), Some(j)) => format!("C_{{{i}{j}}}"),
            _ => {
                let f = f.map_or("Mixed".to_string(), |i| format!("C_{{{i}.}}"));
                let b = b.map_or("Mixed".to_string(), |j| format!("C_{{.{j}}}"));
                format!("{f}/{b}")
            }
        }
    }
}

/// Threshold separating zero/one eigenvalues of a computed limit.
fn spectral_threshold<S: Real>(tol: S) -> S {
    tol.sqrt().max(tol)
}

/// Classifies `T` by the stable subspaces of `A_T` and `A_{T*}`.
///
/// `tol` drives the squaring iteration; eigenvalues of the limits are split
/// at `√tol`.
pub fn classify<S: Real>(t: &DenseContraction<S>, tol: S) -> Result<ContractionClass, AsymptoticsError> {
    let n = t.dim();
    let cut = spectral_threshold(tol);
    let forward_limit = asymptotic_limit_dense(t, tol, DEFAULT_MAX_DOUBLINGS)?.limit;
    let backward_limit = asymptotic_limit_dense(&t.adjoint(), tol, DEFAULT_MAX_DOUBLINGS)?.limit;
    let stable = stable_subspace(&forward_limit, cut)?.dim();
    let isometric = isometric_subspace(&forward_limit, cut)?.dim();
    let stable_back = stable_subspace(&backward_limit, cut)?.dim();
    let forward = if stable == n {
        ForwardClass::C0Dot
    } else if stable == 0 {
        ForwardClass::C1Dot
    } else {
        ForwardClass::Mixed
    };
    let backward = if stable_back == n {
        BackwardClass::CDot0
    } else if stable_back == 0 {
        BackwardClass::CDot1
    } else {
        BackwardClass::Mixed
    };
    Ok(ContractionClass { forward, backward, stable_dim: stable, isometric_dim: isometric, dim: n })
}

/// Finite-dimensional realisation of the isometric asymptote.
#[derive(Debug, Clone)]
pub struct IsometricAsymptote<S: Real> {
    /// Orthonormal basis `R` of the range of `A_T` (columns).
    pub range_basis: ComplexMatrix<S>,
    /// `X⁺ = R* A_T^{1/2}`, mapping the space onto range coordinates.
    pub intertwiner: ComplexMatrix<S>,
    /// Isometry on the range with `V X⁺ = X⁺ T`.
    pub isometry: ComplexMatrix<S>,
    pub limit: ComplexMatrix<S>,
}

impl<S: Real> IsometricAsymptote<S> {
    pub fn range_dim(&self) -> usize {
        self.range_basis.cols()
    }

    /// `‖V X⁺ − X⁺ T‖`.
    pub fn intertwining_residual(&self, t: &DenseContraction<S>) -> Result<S, AsymptoticsError> {
        if self.range_dim() == 0 {
            return Ok(S::zero());
        }
        let lhs = multiply(&self.isometry, &self.intertwiner)?;
        let rhs = multiply(&self.intertwiner, t.matrix())?;
        Ok(crate::linalg::operator_norm(&lhs.sub(&rhs)?))
    }

    /// `‖V*V − I‖`.
    pub fn isometry_residual(&self) -> Result<S, AsymptoticsError> {
        let k = self.range_dim();
        if k == 0 {
            return Ok(S::zero());
        }
        let vv = multiply(&adjoint(&self.isometry), &self.isometry)?;
        Ok(hermitian_norm(&vv.sub(&ComplexMatrix::identity(k))?))
    }
}

/// Builds `(X⁺, V)` from the spectral decomposition of `A_T`: the range is
/// spanned by eigenvectors with eigenvalue above `√tol`, and
/// `V = X⁺ T R D^{-1/2}` with `D` the corresponding eigenvalues.
pub fn isometric_asymptote<S: Real>(t: &DenseContraction<S>, tol: S) -> Result<IsometricAsymptote<S>, AsymptoticsError> {
    let limit = asymptotic_limit_dense(t, tol, DEFAULT_MAX_DOUBLINGS)?.limit;
    let cut = spectral_threshold(tol);
    let eig = hermitian_eigen(&limit, tol.max(S::lit(1e-12)))?;
    let kept: Vec<usize> = (0..eig.values.len()).filter(|&j| eig.values[j] > cut).collect();
    let n = t.dim();
    let cols: Vec<_> = kept.iter().map(|&j| eig.vector(j)).collect();
    let range_basis = ComplexMatrix::from_columns(n, &cols);
    if kept.is_empty() {
        return Ok(IsometricAsymptote {
            range_basis,
            intertwiner: ComplexMatrix::zeros(0, n),
            isometry: ComplexMatrix::zeros(0, 0),
            limit,
        });
    }
    let root = psd_sqrt(&limit, tol.max(S::lit(1e-12)))?;
    let intertwiner = multiply(&adjoint(&range_basis), &root)?;
    let inv_root: Vec<S> = kept.iter().map(|&j| S::one() / eig.values[j].sqrt()).collect();
    let right_inverse = multiply(&range_basis, &ComplexMatrix::from_real_diagonal(&inv_root))?;
    let isometry = multiply(&multiply(&intertwiner, t.matrix())?, &right_inverse)?;
    Ok(IsometricAsymptote { range_basis, intertwiner, isometry, limit })
}

/// Diagonal of the orbit-shift limit over a window, in window order.
pub fn orbit_limit_diagonal<S: Real>(
    t: &OrbitShift<S>,
    w: &Window,
    tol: S,
    max_steps: usize,
) -> Result<Vec<S>, AsymptoticsError> {
    let indices: Vec<Index> = w.indices()?.into_iter().filter(|i| t.is_valid(*i)).collect();
    Ok(asymptotic_limit_orbit_batch(t, &indices, tol, max_steps)?.into_iter().map(|l| l.value).collect())
}

/// Blockwise asymptotic limit of an orthogonal sum: dense blocks by
/// squaring, orbit blocks by orbit products over `w`.
pub fn asymptotic_limit_blocks<S: Real>(
    op: &BlockDiagonalOperator<S>,
    w: &Window,
    tol: S,
) -> Result<ComplexMatrix<S>, AsymptoticsError> {
    let mut acc: Option<ComplexMatrix<S>> = None;
    for block in &op.blocks {
        let part = match block {
            Block::Dense(d) => asymptotic_limit_dense(d, tol, DEFAULT_MAX_DOUBLINGS)?.limit,
            Block::Orbit(o) => ComplexMatrix::from_real_diagonal(&orbit_limit_diagonal(o, w, tol, 1 << 20)?),
        };
        acc = Some(match acc {
            None => part,
            Some(a) => a.direct_sum(&part),
        });
    }
    acc.ok_or(AsymptoticsError::Operator(OperatorError::EmptyWindow))
}

/// `‖T^(2^k) e_c‖²` for every basis column `c`: the diagonal of the Gram
/// matrix of a fixed power. Used as a finite-horizon stand-in for the limit
/// when truncation makes the true limit trivial.
pub fn gram_diagonal_at_power<S: Real>(t: &ComplexMatrix<S>, doublings: usize) -> Vec<S> {
    let mut p = t.clone();
    for _ in 0..doublings {
        p = p.square();
    }
    (0..p.cols())
        .map(|c| p.column(c).iter().fold(S::zero(), |acc, z| acc + z.norm_sqr()))
        .collect()
}

/// `⟨A e_c, e_c⟩` helper for dense limits.
pub fn diagonal<S: Real>(a: &ComplexMatrix<S>) -> Vec<S> {
    a.real_diagonal()
}

/// `‖A² − A‖`, the projection defect.
pub fn projection_defect<S: Real>(a: &ComplexMatrix<S>) -> S {
    let sq = a.square();
    hermitian_norm(&sq.sub(a).expect("square").hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::vector_norm;
    use crate::operators::{Index, IndexUniverse};
    use crate::scalar::cx;

    type M = ComplexMatrix<f64>;

    fn dense(m: M) -> DenseContraction<f64> {
        DenseContraction::new(m).unwrap()
    }

    fn unitary4() -> M {
        let s = 0.5;
        M::from_row_major(
            4,
            4,
            vec![
                cx(s, 0.0), cx(s, 0.0), cx(s, 0.0), cx(s, 0.0),
                cx(s, 0.0), cx(0.0, s), cx(-s, 0.0), cx(0.0, -s),
                cx(s, 0.0), cx(-s, 0.0), cx(s, 0.0), cx(-s, 0.0),
                cx(s, 0.0), cx(0.0, -s), cx(-s, 0.0), cx(0.0, s),
            ],
        )
        .unwrap()
    }

    #[test]
    fn dense_examples() {
        let d = asymptotic_limit_dense(&dense(M::from_real_diagonal(&[1.0, 0.5])), 1e-10, 60).unwrap();
        assert!(d.limit.sub(&M::from_real_diagonal(&[1.0, 0.0])).unwrap().max_abs() < 1e-10);
        assert!(d.report.converged && d.report.is_monotone(1e-12));

        let nil = asymptotic_limit_dense(&dense(M::from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0])), 1e-10, 60).unwrap();
        assert_eq!(nil.limit.max_abs(), 0.0);

        let u = asymptotic_limit_dense(&dense(unitary4()), 1e-10, 60).unwrap();
        assert!(u.limit.sub(&M::identity(4)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn dense_no_convergence_reports() {
        let slow = dense(M::from_real_diagonal(&[1.0, 0.999_999]));
        match asymptotic_limit_dense(&slow, 1e-10, 3) {
            Err(AsymptoticsError::NoConvergence(report)) => {
                assert!(!report.converged);
                assert_eq!(report.steps.len(), 4);
                assert_eq!(report.final_n, 8);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn orbit_bilateral_examples() {
        let t = fixtures::half_weighted_bilateral_shift::<f64>();
        let at0 = asymptotic_limit_orbit(&t, Index::Single(0), 1e-14, 10_000).unwrap();
        assert_eq!(at0.value, 0.25);
        assert_eq!(at0.rule, StopRule::Stagnated);
        let at1 = asymptotic_limit_orbit(&t, Index::Single(1), 1e-14, 10_000).unwrap();
        assert_eq!(at1.value, 1.0);
    }

    #[test]
    fn orbit_telescoping_example() {
        let (t1, _) = fixtures::coinciding_limit_pair::<f64>();
        for j in 2..12 {
            let l = asymptotic_limit_orbit(&t1, Index::Pair(3, j), 1e-13, 1 << 20).unwrap();
            assert_eq!(l.rule, StopRule::Extrapolated);
            assert!((l.value - (j - 1) as f64 / j as f64).abs() < 1e-12, "j={j}: {}", l.value);
        }
    }

    #[test]
    fn batch_matches_single_walks() {
        let (t1, t2) = fixtures::coinciding_limit_pair::<f64>();
        let indices: Vec<Index> = (1..6).flat_map(|i| (1..6).map(move |j| Index::Pair(i, j))).collect();
        for t in [&t1, &t2] {
            let batch = asymptotic_limit_orbit_batch(t, &indices, 1e-14, 1 << 22).unwrap();
            for (idx, b) in indices.iter().zip(&batch) {
                let single = asymptotic_limit_orbit(t, *idx, 1e-14, 1 << 22).unwrap();
                assert!((b.value - single.value).abs() < 1e-12, "{idx}");
            }
            assert!(batch.iter().any(|b| b.rule == StopRule::Known));
        }
    }

    #[test]
    fn orbit_end_and_vanishing() {
        let (t1, t2) = fixtures::stable_pair_with_isometric_product::<f64>();
        let end = asymptotic_limit_orbit(&t2, Index::Pair(2, 3), 1e-12, 100).unwrap();
        assert_eq!((end.value, end.rule), (0.0, StopRule::OrbitEnds));
        let gone = asymptotic_limit_orbit(&t1, Index::Pair(1, 1), 1e-12, 100_000).unwrap();
        assert_eq!((gone.value, gone.rule), (0.0, StopRule::Vanished));
    }

    #[test]
    fn orbit_cycles() {
        let cyc = |w: f64| {
            OrbitShift::new(
                IndexUniverse::Naturals,
                |i| match i {
                    Index::Single(k) if k < 3 => Some(Index::Single(k + 1)),
                    _ => Some(Index::Single(1)),
                },
                move |i| if i == Index::Single(2) { w } else { 1.0 },
            )
        };
        let unit = asymptotic_limit_orbit(&cyc(1.0), Index::Single(1), 1e-10, 100).unwrap();
        assert_eq!((unit.value, unit.rule), (1.0, StopRule::Cycle));
        let lossy = asymptotic_limit_orbit(&cyc(0.99), Index::Single(1), 1e-10, 100).unwrap();
        assert_eq!((lossy.value, lossy.rule), (0.0, StopRule::Cycle));
    }

    #[test]
    fn orbit_inconclusive() {
        // w² = 1 - 1/(k+1)^1.5: neither extrapolable in powers of 1/n nor stagnant early
        let t: OrbitShift<f64> = OrbitShift::new(
            IndexUniverse::Naturals,
            |i| match i {
                Index::Single(k) => Some(Index::Single(k + 1)),
                _ => None,
            },
            |i| match i {
                Index::Single(k) => (1.0 - 1.0 / ((k + 1) as f64).powf(1.5)).sqrt(),
                _ => 0.0,
            },
        );
        match asymptotic_limit_orbit(&t, Index::Single(1), 1e-10, 500) {
            Err(AsymptoticsError::Inconclusive { lower, upper, .. }) => {
                assert_eq!(lower, 0.0);
                assert!(upper > 0.0 && upper < 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn subspace_examples() {
        assert_eq!(stable_subspace(&M::zeros(2, 2), 1e-8).unwrap().dim(), 2);
        assert_eq!(stable_subspace(&M::identity(2), 1e-8).unwrap().dim(), 0);
        let s = stable_subspace(&M::from_real_diagonal(&[1.0, 0.0, 0.5]), 1e-8).unwrap();
        assert_eq!(s.dim(), 1);
        assert!((s.basis.get(1, 0).re - 1.0).abs() < 1e-15);

        assert_eq!(isometric_subspace(&M::identity(3), 1e-8).unwrap().dim(), 3);
        let i = isometric_subspace(&M::from_real_diagonal(&[1.0, 0.5]), 1e-8).unwrap();
        assert_eq!(i.dim(), 1);
        assert!((i.basis.get(0, 0).re - 1.0).abs() < 1e-15);
        assert_eq!(isometric_subspace(&M::zeros(2, 2), 1e-8).unwrap().dim(), 0);
    }

    #[test]
    fn subspace_rejects_non_hermitian() {
        let a = M::from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(stable_subspace(&a, 1e-8), Err(AsymptoticsError::Linalg(LinalgError::NotHermitian { .. }))));
    }

    #[test]
    fn classify_examples() {
        let nil = classify(&dense(M::from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0])), 1e-10).unwrap();
        assert_eq!((nil.forward, nil.backward), (ForwardClass::C0Dot, BackwardClass::CDot0));
        assert_eq!(nil.label(), "C_{00}");
        let u = classify(&dense(unitary4()), 1e-10).unwrap();
        assert_eq!(u.label(), "C_{11}");
        let d = classify(&dense(M::from_real_diagonal(&[1.0, 0.5])), 1e-10).unwrap();
        assert_eq!((d.forward, d.backward), (ForwardClass::Mixed, BackwardClass::Mixed));
        assert_eq!((d.stable_dim, d.isometric_dim), (1, 1));
        assert_eq!(d.label(), "Mixed/Mixed");
    }

    #[test]
    fn asymptote_examples() {
        let t = dense(unitary4());
        let a = isometric_asymptote(&t, 1e-10).unwrap();
        assert!(a.intertwiner.sub(&M::identity(4)).unwrap().max_abs() < 1e-9);
        assert!(a.isometry.sub(t.matrix()).unwrap().max_abs() < 1e-9);

        let nil = isometric_asymptote(&dense(M::from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0])), 1e-10).unwrap();
        assert_eq!(nil.range_dim(), 0);
        assert_eq!(nil.isometry.rows(), 0);

        let theta: f64 = 0.7;
        let t = dense(M::from_diagonal(&[cx(theta.cos(), theta.sin()), cx(0.5, 0.0)]));
        let a = isometric_asymptote(&t, 1e-10).unwrap();
        assert_eq!(a.range_dim(), 1);
        assert!((a.intertwiner.get(0, 0) - cx(1.0, 0.0)).norm() < 1e-9);
        assert!(a.intertwiner.get(0, 1).norm() < 1e-9);
        assert!((a.isometry.get(0, 0) - cx(theta.cos(), theta.sin())).norm() < 1e-9);
        assert!(a.intertwining_residual(&t).unwrap() <= 1e-9);
        assert!(a.isometry_residual().unwrap() <= 1e-9);
    }

    #[test]
    fn stability_witness_on_mixed_operator() {
        let t = dense(M::from_real_rows(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.3, 0.4, 0.0, 0.0, 0.5]));
        let d = asymptotic_limit_dense(&t, 1e-10, 60).unwrap();
        let stable = stable_subspace(&d.limit, 1e-5).unwrap();
        assert_eq!(stable.dim(), 2);
        for x in stable.vectors() {
            assert!(vector_norm(&d.final_power.mat_vec(&x)) <= 1e-5);
        }
    }

    #[test]
    fn gram_diagonal_matches_direct_power() {
        let t = M::from_real_rows(2, 2, &[0.5, 0.25, 0.0, 0.75]);
        let g = gram_diagonal_at_power(&t, 2);
        let mut p = M::identity(2);
        for _ in 0..4 {
            p = multiply(&p, &t).unwrap();
        }
        let q = multiply(&adjoint(&p), &p).unwrap();
        for c in 0..2 {
            assert!((g[c] - q.get(c, c).re).abs() < 1e-15);
        }
    }
}
