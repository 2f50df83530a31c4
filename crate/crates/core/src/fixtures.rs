//! Worked operators with closed-form asymptotic limits.
//!
//! * [`half_weighted_bilateral_shift`]: bilateral shift on `ℤ` whose limit
//!   is diagonal but not a projection, although the operator is upper
//!   triangular with respect to its isometric subspace.
//! * [`coinciding_limit_pair`]: two non-commuting shifts on `ℕ × ℕ` with
//!   equal limits whose product has a strictly larger limit.
//! * [`stable_pair_with_isometric_product`]: two stable shifts on `ℕ × ℕ`
//!   whose product has no non-zero stable vectors.

use crate::operators::{Index, IndexUniverse, OrbitShift};
use crate::scalar::Real;

fn single(idx: Index) -> i64 {
    match idx {
        Index::Single(k) => k,
        Index::Pair(..) => unreachable!("single-index universe"),
    }
}

fn pair(idx: Index) -> (i64, i64) {
    match idx {
        Index::Pair(i, j) => (i, j),
        Index::Single(_) => unreachable!("grid universe"),
    }
}

/// `√(l² − 1) / l`
pub fn telescoping_weight<S: Real>(l: i64) -> S {
    let l = S::lit(l as f64);
    (l * l - S::one()).sqrt() / l
}

/// `T e_k = e_{k+1}` for `k > 0` and `(1/2) e_{k+1}` for `k ≤ 0`.
pub fn half_weighted_bilateral_shift<S: Real>() -> OrbitShift<S> {
    OrbitShift::new(
        IndexUniverse::Integers,
        |i| Some(Index::Single(single(i) + 1)),
        |i| if single(i) > 0 { S::one() } else { S::lit(0.5) },
    )
}

/// Closed-form diagonal of the limit of [`half_weighted_bilateral_shift`]:
/// `1` for `k > 0`, `(1/2)^(2 - 2k)` for `k ≤ 0`.
pub fn half_weighted_bilateral_limit<S: Real>(k: i64) -> S {
    if k > 0 {
        S::one()
    } else {
        S::lit(0.5).powi((2 - 2 * k) as i32)
    }
}

/// The pair `(T₁, T₂)`:
///
/// ```text
/// T₁ e(i,j) = e(i,j+1)                     j = 1
///           = √(j²−1)/j · e(i,j+1)         j > 1
///
/// T₂ e(i,j) = e(1,2)                       i = j = 1
///           = e(i+1,j−1)                   j = 2
///           = √3/2 · e(i−1,j+2)            i > 1, j = 1
///           = √(j²−1)/j · e(i,j+1)         j > 2
/// ```
pub fn coinciding_limit_pair<S: Real>() -> (OrbitShift<S>, OrbitShift<S>) {
    let t1 = OrbitShift::new(
        IndexUniverse::grid(),
        |idx| {
            let (i, j) = pair(idx);
            Some(Index::Pair(i, j + 1))
        },
        |idx| {
            let (_, j) = pair(idx);
            if j == 1 {
                S::one()
            } else {
                telescoping_weight(j)
            }
        },
    );
    let t2 = OrbitShift::new(
        IndexUniverse::grid(),
        |idx| {
            let (i, j) = pair(idx);
            Some(match (i, j) {
                (1, 1) => Index::Pair(1, 2),
                (_, 2) => Index::Pair(i + 1, 1),
                (_, 1) => Index::Pair(i - 1, 3),
                _ => Index::Pair(i, j + 1),
            })
        },
        |idx| {
            let (i, j) = pair(idx);
            match (i, j) {
                (1, 1) | (_, 2) => S::one(),
                (_, 1) => S::lit(3.0).sqrt() / S::lit(2.0),
                _ => telescoping_weight(j),
            }
        },
    );
    (t1, t2)
}

/// Common limit of both members of [`coinciding_limit_pair`]:
/// `1/2` on the first column, `(j−1)/j` elsewhere.
pub fn coinciding_limit<S: Real>(_i: i64, j: i64) -> S {
    if j == 1 {
        S::lit(0.5)
    } else {
        S::lit((j - 1) as f64) / S::lit(j as f64)
    }
}

/// Limit of `T₂T₁` for [`coinciding_limit_pair`]: `1` on the first column,
/// `(j−1)/j` elsewhere.
pub fn coinciding_product_limit<S: Real>(_i: i64, j: i64) -> S {
    if j == 1 {
        S::one()
    } else {
        S::lit((j - 1) as f64) / S::lit(j as f64)
    }
}

/// The pair `(T₁, T₂)`:
///
/// ```text
/// T₁ e(i,j) = √((i+1)²−1)/(i+1) · e(i,j+1)
/// T₂ e(i,j) = 0                 j = 1
///           = e(i+1,j−1)        j > 1
/// ```
///
/// so that `T₂T₁ e(i,j) = √((i+1)²−1)/(i+1) · e(i+1,j)`.
pub fn stable_pair_with_isometric_product<S: Real>() -> (OrbitShift<S>, OrbitShift<S>) {
    let t1 = OrbitShift::new(
        IndexUniverse::grid(),
        |idx| {
            let (i, j) = pair(idx);
            Some(Index::Pair(i, j + 1))
        },
        |idx| telescoping_weight(pair(idx).0 + 1),
    );
    let t2 = OrbitShift::new(
        IndexUniverse::grid(),
        |idx| {
            let (i, j) = pair(idx);
            (j > 1).then_some(Index::Pair(i + 1, j - 1))
        },
        |_| S::one(),
    );
    (t1, t2)
}

/// Limit of `T₂T₁` for [`stable_pair_with_isometric_product`]: `i/(i+1)`.
pub fn stable_pair_product_limit<S: Real>(i: i64, _j: i64) -> S {
    S::lit(i as f64) / S::lit((i + 1) as f64)
}
