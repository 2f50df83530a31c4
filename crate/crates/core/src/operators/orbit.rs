use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use super::{DenseContraction, OperatorError};
use crate::linalg::ComplexMatrix;
use crate::scalar::{re, Cx, Real};

/// Largest dense dimension a truncation may produce.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Basis label: a single integer (`ℕ` or `ℤ`) or a grid pair `(l, m)`.
///
/// The derived ordering is lexicographic, which fixes the basis order of
/// every truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Index {
    Single(i64),
    Pair(i64, i64),
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Single(k) => write!(f, "{k}"),
            Index::Pair(l, m) => write!(f, "({l},{m})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexUniverse {
    /// `{1, 2, 3, ...}`
    Naturals,
    /// `ℤ`
    Integers,
    /// Pairs `(l, m)` with `l ≥ 1` and `m ≥ col_origin`. The plain grid
    /// `ℕ × ℕ` has `col_origin = 1`; a grid with an extra column `m = 0`
    /// uses `col_origin = 0`.
    Grid { col_origin: i64 },
}

impl IndexUniverse {
    pub const fn grid() -> Self {
        IndexUniverse::Grid { col_origin: 1 }
    }

    pub fn contains(&self, idx: Index) -> bool {
        match (self, idx) {
            (IndexUniverse::Naturals, Index::Single(k)) => k >= 1,
            (IndexUniverse::Integers, Index::Single(_)) => true,
            (IndexUniverse::Grid { col_origin }, Index::Pair(l, m)) => l >= 1 && m >= *col_origin,
            _ => false,
        }
    }

    fn coordinates(&self) -> usize {
        match self {
            IndexUniverse::Naturals | IndexUniverse::Integers => 1,
            IndexUniverse::Grid { .. } => 2,
        }
    }
}

/// Finite box of indices, `bounds[c] = (lo, hi)` inclusive per coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub universe: IndexUniverse,
    pub bounds: Vec<(i64, i64)>,
}

impl Window {
    pub fn interval(universe: IndexUniverse, lo: i64, hi: i64) -> Self {
        Self { universe, bounds: vec![(lo, hi)] }
    }

    pub fn rect(universe: IndexUniverse, rows: (i64, i64), cols: (i64, i64)) -> Self {
        Self { universe, bounds: vec![rows, cols] }
    }

    /// Indices of the box that belong to the universe, in lexicographic order.
    pub fn indices(&self) -> Result<Vec<Index>, OperatorError> {
        if self.bounds.len() != self.universe.coordinates() {
            return Err(OperatorError::WindowShape(self.universe));
        }
        let out: Vec<Index> = match self.bounds.as_slice() {
            [(lo, hi)] => (*lo..=*hi).map(Index::Single).collect(),
            [(l0, l1), (m0, m1)] => (*l0..=*l1).flat_map(|l| (*m0..=*m1).map(move |m| Index::Pair(l, m))).collect(),
            _ => unreachable!("coordinate count checked above"),
        };
        let out: Vec<Index> = out.into_iter().filter(|i| self.universe.contains(*i)).collect();
        if out.is_empty() {
            return Err(OperatorError::EmptyWindow);
        }
        Ok(out)
    }

    pub fn cardinality(&self) -> usize {
        self.bounds.iter().map(|(lo, hi)| if hi >= lo { (hi - lo + 1) as usize } else { 0 }).product()
    }
}

type SuccessorFn = dyn Fn(Index) -> Option<Index> + Send + Sync;
type WeightFn<S> = dyn Fn(Index) -> S + Send + Sync;
type DomainFn = dyn Fn(Index) -> bool + Send + Sync;

/// Weighted orbit shift: `e_i ↦ w(i) e_{σ(i)}`, or `0` where `σ` is undefined.
///
/// `σ` must be injective; this is checked on every window the shift is
/// queried on, never globally.
#[derive(Clone)]
pub struct OrbitShift<S: Real> {
    universe: IndexUniverse,
    successor: Arc<SuccessorFn>,
    weight: Arc<WeightFn<S>>,
    domain: Option<Arc<DomainFn>>,
}

impl<S: Real> fmt::Debug for OrbitShift<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrbitShift").field("universe", &self.universe).finish_non_exhaustive()
    }
}

impl<S: Real> OrbitShift<S> {
    pub fn new(
        universe: IndexUniverse,
        successor: impl Fn(Index) -> Option<Index> + Send + Sync + 'static,
        weight: impl Fn(Index) -> S + Send + Sync + 'static,
    ) -> Self {
        Self { universe, successor: Arc::new(successor), weight: Arc::new(weight), domain: None }
    }

    /// Restricts the valid indices to those satisfying `domain` (on top of
    /// the universe itself).
    pub fn with_domain(mut self, domain: impl Fn(Index) -> bool + Send + Sync + 'static) -> Self {
        self.domain = Some(Arc::new(domain));
        self
    }

    pub fn universe(&self) -> IndexUniverse {
        self.universe
    }

    pub fn is_valid(&self, idx: Index) -> bool {
        self.universe.contains(idx) && self.domain.as_ref().is_none_or(|d| d(idx))
    }

    pub fn successor(&self, idx: Index) -> Result<Option<Index>, OperatorError> {
        if !self.is_valid(idx) {
            return Err(OperatorError::InvalidIndex(idx));
        }
        Ok((self.successor)(idx))
    }

    /// Weight at `idx`, checked to lie in `[0, 1]`.
    pub fn weight(&self, idx: Index) -> Result<S, OperatorError> {
        if !self.is_valid(idx) {
            return Err(OperatorError::InvalidIndex(idx));
        }
        let w = (self.weight)(idx);
        if !(w >= S::zero() && w <= S::one()) {
            return Err(OperatorError::InvalidWeight { index: idx, weight: w.as_f64() });
        }
        Ok(w)
    }

    /// Image of a single basis vector: `Some((target, weight))` or `None` for `0`.
    pub fn step(&self, idx: Index) -> Result<Option<(Index, S)>, OperatorError> {
        match self.successor(idx)? {
            Some(next) => Ok(Some((next, self.weight(idx)?))),
            None => Ok(None),
        }
    }

    /// The shift with every weight replaced by one (the "unweighted" skeleton).
    pub fn with_weight(&self, weight: impl Fn(Index) -> S + Send + Sync + 'static) -> Self {
        Self { universe: self.universe, successor: self.successor.clone(), weight: Arc::new(weight), domain: self.domain.clone() }
    }
}

/// Finitely supported vector over indices.
pub type SparseVector<S> = BTreeMap<Index, Cx<S>>;

/// Applies an orbit shift to a finitely supported vector.
pub fn orbit_apply<S: Real>(t: &OrbitShift<S>, v: &SparseVector<S>) -> Result<SparseVector<S>, OperatorError> {
    let mut out = SparseVector::new();
    let mut sources: HashMap<Index, Index> = HashMap::new();
    for (&idx, &coeff) in v {
        if let Some((next, w)) = t.step(idx)? {
            if let Some(first) = sources.insert(next, idx) {
                return Err(OperatorError::InjectivityViolation { first, second: idx, target: next });
            }
            if w != S::zero() {
                out.insert(next, coeff * re(w));
            }
        }
    }
    Ok(out)
}

/// The product `s · t` (apply `t` first) as an orbit shift.
pub fn orbit_compose<S: Real>(s: &OrbitShift<S>, t: &OrbitShift<S>) -> Result<OrbitShift<S>, OperatorError> {
    if s.universe != t.universe {
        return Err(OperatorError::UniverseMismatch);
    }
    let (s1, t1) = (s.clone(), t.clone());
    let (s2, t2) = (s.clone(), t.clone());
    let (s3, t3) = (s.clone(), t.clone());
    let successor = move |idx: Index| -> Option<Index> {
        let mid = (t1.successor)(idx)?;
        if s1.is_valid(mid) {
            (s1.successor)(mid)
        } else {
            None
        }
    };
    let weight = move |idx: Index| -> S {
        match (t2.successor)(idx) {
            Some(mid) if s2.is_valid(mid) => (t2.weight)(idx) * (s2.weight)(mid),
            _ => S::zero(),
        }
    };
    let composite = OrbitShift::new(t.universe, successor, weight)
        .with_domain(move |idx| t3.is_valid(idx) && (t3.successor)(idx).is_none_or(|mid| s3.is_valid(mid)));
    Ok(composite)
}

/// Compression of an orbit shift to a window, kept in column form: column `c`
/// holds at most one entry `(row, weight)`.
#[derive(Debug, Clone)]
pub struct WindowedShift<S: Real> {
    pub indices: Vec<Index>,
    pub targets: Vec<Option<(usize, S)>>,
    /// Some in-window index has its successor outside the window.
    pub boundary_leak: bool,
}

impl<S: Real> WindowedShift<S> {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn position(&self, idx: Index) -> Option<usize> {
        self.indices.binary_search(&idx).ok()
    }

    pub fn apply(&self, v: &[Cx<S>]) -> Vec<Cx<S>> {
        let mut out = vec![Cx::new(S::zero(), S::zero()); self.dim()];
        for (c, target) in self.targets.iter().enumerate() {
            if let Some((r, w)) = target {
                out[*r] += v[c] * re(*w);
            }
        }
        out
    }

    pub fn apply_adjoint(&self, v: &[Cx<S>]) -> Vec<Cx<S>> {
        self.targets
            .iter()
            .map(|t| match t {
                Some((r, w)) => v[*r] * re(*w),
                None => Cx::new(S::zero(), S::zero()),
            })
            .collect()
    }

    pub fn to_matrix(&self) -> ComplexMatrix<S> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for (c, target) in self.targets.iter().enumerate() {
            if let Some((r, w)) = target {
                m[(*r, c)] = re(*w);
            }
        }
        ComplexMatrix::from_inner(m)
    }

    /// Columns are orthogonal (distinct rows) with norm `w ≤ 1`, so the dense
    /// form is a contraction without a norm computation.
    pub fn to_dense(&self) -> DenseContraction<S> {
        DenseContraction::from_certified(self.to_matrix())
    }
}

/// Sparse compression `P_W T P_W` of an orbit shift.
pub fn truncate_sparse<S: Real>(t: &OrbitShift<S>, w: &Window) -> Result<WindowedShift<S>, OperatorError> {
    truncate_sparse_capped(t, w, DEFAULT_DENSE_CAP)
}

pub(crate) fn truncate_sparse_capped<S: Real>(
    t: &OrbitShift<S>,
    w: &Window,
    cap: usize,
) -> Result<WindowedShift<S>, OperatorError> {
    if w.universe != t.universe {
        return Err(OperatorError::UniverseMismatch);
    }
    if w.cardinality() > cap {
        return Err(OperatorError::WindowTooLarge { size: w.cardinality(), cap });
    }
    let all = w.indices()?;
    let indices: Vec<Index> = all.into_iter().filter(|i| t.is_valid(*i)).collect();
    if indices.is_empty() {
        return Err(OperatorError::EmptyWindow);
    }
    let mut sources: HashMap<Index, Index> = HashMap::with_capacity(indices.len());
    let mut targets = Vec::with_capacity(indices.len());
    let mut boundary_leak = false;
    for &idx in &indices {
        match t.step(idx)? {
            None => targets.push(None),
            Some((next, weight)) => {
                if let Some(first) = sources.insert(next, idx) {
                    return Err(OperatorError::InjectivityViolation { first, second: idx, target: next });
                }
                match indices.binary_search(&next) {
                    Ok(row) => targets.push(Some((row, weight))),
                    Err(_) => {
                        boundary_leak = true;
                        targets.push(None);
                    }
                }
            }
        }
    }
    Ok(WindowedShift { indices, targets, boundary_leak })
}

/// One summand of a [`BlockDiagonalOperator`].
#[derive(Debug, Clone)]
pub enum Block<S: Real> {
    Dense(DenseContraction<S>),
    Orbit(OrbitShift<S>),
}

/// Orthogonal sum of contractions.
#[derive(Debug, Clone)]
pub struct BlockDiagonalOperator<S: Real> {
    pub blocks: Vec<Block<S>>,
}

/// Operators accepted by [`truncate`].
pub trait Truncatable<S: Real> {
    fn truncate_with_cap(&self, w: &Window, cap: usize) -> Result<(DenseContraction<S>, bool), OperatorError>;
}

impl<S: Real> Truncatable<S> for OrbitShift<S> {
    fn truncate_with_cap(&self, w: &Window, cap: usize) -> Result<(DenseContraction<S>, bool), OperatorError> {
        let sparse = truncate_sparse_capped(self, w, cap)?;
        Ok((sparse.to_dense(), sparse.boundary_leak))
    }
}

/// Dense blocks are kept whole; the window applies to each orbit block.
impl<S: Real> Truncatable<S> for BlockDiagonalOperator<S> {
    fn truncate_with_cap(&self, w: &Window, cap: usize) -> Result<(DenseContraction<S>, bool), OperatorError> {
        let mut acc: Option<DenseContraction<S>> = None;
        let mut leak = false;
        for block in &self.blocks {
            let part = match block {
                Block::Dense(d) => d.clone(),
                Block::Orbit(o) => {
                    let (d, l) = o.truncate_with_cap(w, cap)?;
                    leak |= l;
                    d
                }
            };
            acc = Some(match acc {
                None => part,
                Some(a) => a.direct_sum(&part),
            });
            let size = acc.as_ref().map_or(0, |a| a.dim());
            if size > cap {
                return Err(OperatorError::WindowTooLarge { size, cap });
            }
        }
        acc.map(|a| (a, leak)).ok_or(OperatorError::EmptyWindow)
    }
}

/// Compression to a window in lexicographic basis order, with a flag telling
/// whether mass can leave the window.
pub fn truncate<S: Real, T: Truncatable<S>>(t: &T, w: &Window) -> Result<(DenseContraction<S>, bool), OperatorError> {
    t.truncate_with_cap(w, DEFAULT_DENSE_CAP)
}
