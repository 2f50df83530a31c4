//! Which positive contractions arise as asymptotic limits.
//!
//! A positive contraction `A` on a separable space is an asymptotic limit iff
//! `dim H((0,1]) = dim H((δ,1])` for every `δ < 1`, where `H(ω)` is the range
//! of the spectral projection of `ω`. Spectra are given symbolically as
//! finitely many atoms plus sequences `λ(j)` (tails) described by formulas;
//! limits of tails are decided by sampling up to `j = 10⁶`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse, EvalError, ExprAst, SyntaxError};
use crate::linalg::{hermitian_eigen, ComplexMatrix, LinalgError};
use crate::scalar::Real;

/// Largest index at which tails are sampled.
pub const HORIZON: i64 = 1_000_000;
/// Tolerance for deciding that an atom sits exactly at 0 or 1.
pub const ATOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    Finite(u64),
    CountablyInfinite,
}

impl Cardinality {
    fn add(self, other: Cardinality) -> Cardinality {
        match (self, other) {
            (Cardinality::Finite(a), Cardinality::Finite(b)) => Cardinality::Finite(a.saturating_add(b)),
            _ => Cardinality::CountablyInfinite,
        }
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinality::Finite(n) => write!(f, "{n}"),
            Cardinality::CountablyInfinite => write!(f, "countably infinite"),
        }
    }
}

/// Atom multiplicity: a positive count, or `"inf"` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Finite(u64),
    CountablyInfinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawMultiplicity {
    Count(u64),
    Word(String),
}

impl Serialize for Multiplicity {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> Result<Z::Ok, Z::Error> {
        match self {
            Multiplicity::Finite(n) => RawMultiplicity::Count(*n),
            Multiplicity::CountablyInfinite => RawMultiplicity::Word("inf".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Multiplicity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match RawMultiplicity::deserialize(d)? {
            RawMultiplicity::Count(n) => Ok(Multiplicity::Finite(n)),
            RawMultiplicity::Word(w) if w == "inf" => Ok(Multiplicity::CountablyInfinite),
            RawMultiplicity::Word(w) => Err(serde::de::Error::custom(format!("multiplicity must be a count or \"inf\", found \"{w}\""))),
        }
    }
}

impl From<Multiplicity> for Cardinality {
    fn from(m: Multiplicity) -> Self {
        match m {
            Multiplicity::Finite(n) => Cardinality::Finite(n),
            Multiplicity::CountablyInfinite => Cardinality::CountablyInfinite,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub value: f64,
    pub mult: Multiplicity,
}

/// Eigenvalue sequence `λ(j)`, `j ≥ start`, each of multiplicity one.
#[derive(Debug, Clone, PartialEq)]
pub struct Tail {
    pub expr: ExprAst,
    pub start: i64,
    pub increasing: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTail {
    expr: String,
    start: i64,
    increasing: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default)]
    tails: Vec<RawTail>,
}

/// Discrete spectral data of a positive contraction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectrumSpec {
    pub atoms: Vec<Atom>,
    pub tails: Vec<Tail>,
}

#[derive(Debug, Clone, Error)]
pub enum AdmissibilityError {
    #[error("invalid spectrum: {0}")]
    InvalidSpec(String),
    #[error("malformed spectrum JSON: {0}")]
    Json(String),
    #[error("cannot read spectrum file: {0}")]
    Io(String),
    #[error("tail {tail}: {source}")]
    Syntax { tail: usize, source: SyntaxError },
    #[error("tail {tail} at j = {j}: {source}")]
    Eval { tail: usize, j: i64, source: EvalError },
    #[error("undecidable: tail {tail} is not monotone and straddles {delta} near j = {horizon}")]
    Undecidable { tail: usize, delta: f64, horizon: i64 },
    #[error("not a contraction: eigenvalue {0} outside [0, 1]")]
    NotContraction(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl Tail {
    pub fn new(expr: ExprAst, start: i64, increasing: bool) -> Self {
        Self { expr, start, increasing }
    }

    pub fn parse(text: &str, start: i64, increasing: bool) -> Result<Self, SyntaxError> {
        Ok(Self::new(parse(text)?, start, increasing))
    }

    fn value(&self, index: usize, j: i64) -> Result<f64, AdmissibilityError> {
        self.expr.eval(j).map_err(|source| AdmissibilityError::Eval { tail: index, j, source })
    }

    /// The two sampling horizons used to read off a tail's limit.
    fn horizons(&self) -> (i64, i64) {
        let far = HORIZON.max(self.start.saturating_mul(10));
        (far / 10, far)
    }
}

/// Sample points `start, start+1, …, start+99`, then geometric (ratio ≈ 1.1)
/// up to the horizon.
fn sample_points(start: i64, end: i64) -> Vec<i64> {
    let mut out: Vec<i64> = (start..start.saturating_add(100).min(end + 1)).collect();
    let mut j = start.saturating_add(100) as f64;
    while (j as i64) <= end {
        let k = j as i64;
        if out.last() != Some(&k) {
            out.push(k);
        }
        j *= 1.1;
    }
    if out.last() != Some(&end) && end >= start {
        out.push(end);
    }
    out
}

impl SpectrumSpec {
    pub fn from_json(text: &str) -> Result<Self, AdmissibilityError> {
        let raw: RawSpectrum = serde_json::from_str(text).map_err(|e| AdmissibilityError::Json(e.to_string()))?;
        let tails = raw
            .tails
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                Tail::parse(&t.expr, t.start, t.increasing).map_err(|source| AdmissibilityError::Syntax { tail: i, source })
            })
            .collect::<Result<_, _>>()?;
        let spec = SpectrumSpec { atoms: raw.atoms, tails };
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: &Path) -> Result<Self, AdmissibilityError> {
        let text = std::fs::read_to_string(path).map_err(|e| AdmissibilityError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let raw = RawSpectrum {
            atoms: self.atoms.clone(),
            tails: self
                .tails
                .iter()
                .map(|t| RawTail { expr: t.expr.to_string(), start: t.start, increasing: t.increasing })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("spectrum serialises") + "\n"
    }

    /// Checks atom ranges and, at the sample points, tail ranges and
    /// declared monotonicity.
    pub fn validate(&self) -> Result<(), AdmissibilityError> {
        for (i, a) in self.atoms.iter().enumerate() {
            if !(0.0..=1.0).contains(&a.value) {
                return Err(AdmissibilityError::InvalidSpec(format!("atom {i} has value {} outside [0, 1]", a.value)));
            }
            if a.mult == Multiplicity::Finite(0) {
                return Err(AdmissibilityError::InvalidSpec(format!("atom {i} has multiplicity 0")));
            }
        }
        for (i, t) in self.tails.iter().enumerate() {
            if t.start < 1 {
                return Err(AdmissibilityError::InvalidSpec(format!("tail {i} starts at {} < 1", t.start)));
            }
            let mut prev: Option<f64> = None;
            for j in sample_points(t.start, t.horizons().1) {
                let v = t.value(i, j)?;
                if !(v > 0.0 && v < 1.0) {
                    return Err(AdmissibilityError::InvalidSpec(format!("tail {i} has value {v} outside (0, 1) at j = {j}")));
                }
                if t.increasing && prev.is_some_and(|p| v < p) {
                    return Err(AdmissibilityError::InvalidSpec(format!(
                        "tail {i} is declared increasing but decreases at j = {j}"
                    )));
                }
                prev = Some(v);
            }
        }
        Ok(())
    }
}

/// Number of tail terms `> delta`.
fn tail_count_above(t: &Tail, index: usize, delta: f64) -> Result<Cardinality, AdmissibilityError> {
    let (near, far) = t.horizons();
    if t.increasing {
        if t.value(index, far)? > delta {
            return Ok(Cardinality::CountablyInfinite);
        }
        return Ok(Cardinality::Finite(0));
    }
    let mut count = 0u64;
    let (mut above_late, mut below_late) = (false, false);
    for j in t.start..=far {
        let above = t.value(index, j)? > delta;
        if above {
            count += 1;
        }
        if j >= near {
            above_late |= above;
            below_late |= !above;
        }
    }
    match (above_late, below_late) {
        (true, true) => Err(AdmissibilityError::Undecidable { tail: index, delta, horizon: far }),
        (true, false) => Ok(Cardinality::CountablyInfinite),
        _ => Ok(Cardinality::Finite(count)),
    }
}

/// `dim H((delta, 1])`.
pub fn dim_above(spec: &SpectrumSpec, delta: f64) -> Result<Cardinality, AdmissibilityError> {
    let mut total = Cardinality::Finite(0);
    for a in &spec.atoms {
        if a.value > delta {
            total = total.add(a.mult.into());
        }
    }
    for (i, t) in spec.tails.iter().enumerate() {
        total = total.add(tail_count_above(t, i, delta)?);
    }
    Ok(total)
}

/// Largest values before and within the last decade `[far/10, far]`.
fn decade_sups(t: &Tail, index: usize) -> Result<(f64, f64), AdmissibilityError> {
    let (near, far) = t.horizons();
    let (mut early, mut late) = (0.0f64, 0.0f64);
    for j in t.start..=far {
        let v = t.value(index, j)?;
        if j < near {
            early = early.max(v);
        } else {
            late = late.max(v);
        }
    }
    Ok((early, late))
}

/// Distance to 1 keeps shrinking between the last two decades, or is
/// already negligible.
fn approaches_one(near: f64, far: f64) -> bool {
    let (d_near, d_far) = (1.0 - near, 1.0 - far);
    d_far <= 1e-9 || d_far <= 0.9 * d_near
}

/// Whether a tail accumulates at 1. Increasing tails are read off at the
/// two horizons; other tails through their largest value per decade.
fn tail_tends_to_one(t: &Tail, index: usize) -> Result<bool, AdmissibilityError> {
    let (near, far) = t.horizons();
    if t.increasing {
        return Ok(approaches_one(t.value(index, near)?, t.value(index, far)?));
    }
    let (early, late) = decade_sups(t, index)?;
    Ok(approaches_one(early, late))
}

/// Upper estimate of `sup λ` for a tail that does not tend to 1.
///
/// An increasing tail is extrapolated one decade past the horizon. A
/// non-monotone tail must have attained its supremum before the last
/// decade; if it is still climbing there, sampling cannot bound it.
fn tail_sup_estimate(t: &Tail, index: usize) -> Result<f64, AdmissibilityError> {
    let (near, far) = t.horizons();
    if t.increasing {
        let (v_near, v_far) = (t.value(index, near)?, t.value(index, far)?);
        return Ok((v_far + (v_far - v_near)).min(1.0));
    }
    let (early, late) = decade_sups(t, index)?;
    if late > early {
        return Err(AdmissibilityError::Undecidable { tail: index, delta: (late + 1.0) / 2.0, horizon: far });
    }
    Ok(early)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AdmissibilityCase {
    Zero,
    FiniteRankProjection,
    EssentialSpectralRadiusOne,
    Inadmissible,
}

impl fmt::Display for AdmissibilityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityVerdict {
    pub admissible: bool,
    pub case: AdmissibilityCase,
    pub witness: String,
    /// For inadmissible spectra, a `δ` with `dim H((δ,1]) < dim H((0,1])`.
    pub delta: Option<f64>,
}

impl AdmissibilityVerdict {
    fn admissible(case: AdmissibilityCase, witness: String) -> Self {
        Self { admissible: true, case, witness, delta: None }
    }

    fn inadmissible(delta: f64, above_zero: Cardinality, above_delta: Cardinality) -> Self {
        Self {
            admissible: false,
            case: AdmissibilityCase::Inadmissible,
            witness: format!("dim H((0,1]) = {above_zero} but dim H(({delta},1]) = {above_delta}"),
            delta: Some(delta),
        }
    }
}

/// Decides admissibility structurally:
///
/// * no mass above 0: `Zero`;
/// * only finitely many eigenvalues above 0, all equal to 1:
///   `FiniteRankProjection`;
/// * a tail accumulating at 1, or 1 with infinite multiplicity:
///   `EssentialSpectralRadiusOne`;
/// * otherwise `Inadmissible`, with `δ` halfway between the largest
///   eigenvalue below 1 and 1 as witness.
pub fn check_admissible(spec: &SpectrumSpec) -> Result<AdmissibilityVerdict, AdmissibilityError> {
    use AdmissibilityCase::*;
    let positive: Vec<&Atom> = spec.atoms.iter().filter(|a| a.value > ATOM_TOL).collect();
    if positive.is_empty() && spec.tails.is_empty() {
        return Ok(AdmissibilityVerdict::admissible(Zero, "no spectrum above 0".into()));
    }
    let at_one = |a: &&Atom| a.value >= 1.0 - ATOM_TOL;
    if spec.tails.is_empty() && positive.iter().all(|a| at_one(a) && a.mult != Multiplicity::CountablyInfinite) {
        let rank: u64 = positive
            .iter()
            .map(|a| match a.mult {
                Multiplicity::Finite(n) => n,
                Multiplicity::CountablyInfinite => unreachable!(),
            })
            .sum();
        return Ok(AdmissibilityVerdict::admissible(FiniteRankProjection, format!("projection of rank {rank}")));
    }
    if positive.iter().any(|a| at_one(a) && a.mult == Multiplicity::CountablyInfinite) {
        return Ok(AdmissibilityVerdict::admissible(
            EssentialSpectralRadiusOne,
            "eigenvalue 1 has infinite multiplicity".into(),
        ));
    }
    for (i, t) in spec.tails.iter().enumerate() {
        if tail_tends_to_one(t, i)? {
            return Ok(AdmissibilityVerdict::admissible(
                EssentialSpectralRadiusOne,
                format!("tail {i} `{}` accumulates at 1", t.expr),
            ));
        }
    }
    let mut sup_below_one = positive.iter().filter(|a| !at_one(a)).map(|a| a.value).fold(0.0f64, f64::max);
    for (i, t) in spec.tails.iter().enumerate() {
        sup_below_one = sup_below_one.max(tail_sup_estimate(t, i)?);
    }
    let delta = (sup_below_one + 1.0) / 2.0;
    let above_zero = dim_above(spec, 0.0)?;
    let above_delta = dim_above(spec, delta)?;
    if above_zero == above_delta {
        return Err(AdmissibilityError::InvalidSpec(format!(
            "no admissibility case applies, yet δ = {delta} does not separate dimensions"
        )));
    }
    Ok(AdmissibilityVerdict::inadmissible(delta, above_zero, above_delta))
}

/// Trichotomy for a finite-dimensional positive contraction: only `0` and
/// orthogonal projections can be asymptotic limits in finite dimensions.
pub fn trichotomy_of<S: Real>(a: &ComplexMatrix<S>, tol: S) -> Result<AdmissibilityVerdict, AdmissibilityError> {
    use AdmissibilityCase::*;
    let eig = hermitian_eigen(a, tol)?;
    let values: Vec<f64> = eig.values.iter().map(|v| v.as_f64()).collect();
    let tol = tol.as_f64();
    if let Some(&bad) = values.iter().find(|&&v| v < -tol || v > 1.0 + tol) {
        return Err(AdmissibilityError::NotContraction(bad));
    }
    let rank = values.iter().filter(|&&v| v > tol).count();
    if rank == 0 {
        return Ok(AdmissibilityVerdict::admissible(Zero, "all eigenvalues vanish".into()));
    }
    let middle: Vec<f64> = values.iter().copied().filter(|&v| v > tol && v < 1.0 - tol).collect();
    if middle.is_empty() {
        return Ok(AdmissibilityVerdict::admissible(FiniteRankProjection, format!("projection of rank {rank}")));
    }
    let delta = (middle.iter().copied().fold(0.0, f64::max) + 1.0) / 2.0;
    let above = values.iter().filter(|&&v| v > delta).count() as u64;
    Ok(AdmissibilityVerdict::inadmissible(delta, Cardinality::Finite(rank as u64), Cardinality::Finite(above)))
}
