//! Built-in check suites: the worked examples with closed-form limits, and
//! randomized property checks on dense contractions.

use std::fmt::Write as _;

use crate::admissibility::{trichotomy_of, AdmissibilityCase};
use crate::asymptotics::{asymptotic_limit_dense, asymptotic_limit_orbit, asymptotic_limit_orbit_batch, projection_defect, stable_subspace, DEFAULT_MAX_DOUBLINGS};
use crate::constructions::{mobius, MobiusParam};
use crate::fixtures;
use crate::linalg::{adjoint, loewner_leq, multiply, operator_norm, vector_norm, ComplexMatrix};
use crate::operators::{orbit_compose, DenseContraction, Index, OrbitShift};
use crate::random::{random_contraction, random_contraction_with_unitary_part, random_unitary, Lcg64};
use crate::scalar::Cx;

type M = ComplexMatrix<f64>;

/// Orbit-product tolerance for the example suite.
pub const ORBIT_TOL: f64 = 1e-14;
pub const ORBIT_MAX_STEPS: usize = 1 << 22;
pub const DENSE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }

    fn from_result(name: &str, r: Result<String, String>) -> Self {
        match r {
            Ok(detail) => Self::new(name, true, detail),
            Err(detail) => Self::new(name, false, detail),
        }
    }
}

pub fn render_table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{status}  {:width$}  {}", c.name, c.detail).expect("string write");
    }
    out
}

fn orbit_value(t: &OrbitShift<f64>, idx: Index) -> Result<f64, String> {
    asymptotic_limit_orbit(t, idx, ORBIT_TOL, ORBIT_MAX_STEPS).map(|l| l.value).map_err(|e| format!("{idx}: {e}"))
}

/// Orbit limits on `1 ≤ i, j ≤ extent`, row-major.
pub fn grid_limits(t: &OrbitShift<f64>, extent: i64) -> Result<Vec<((i64, i64), f64)>, String> {
    let pairs: Vec<(i64, i64)> = (1..=extent).flat_map(|i| (1..=extent).map(move |j| (i, j))).collect();
    let indices: Vec<Index> = pairs.iter().map(|&(i, j)| Index::Pair(i, j)).collect();
    let limits = asymptotic_limit_orbit_batch(t, &indices, ORBIT_TOL, ORBIT_MAX_STEPS).map_err(|e| e.to_string())?;
    Ok(pairs.into_iter().zip(limits.into_iter().map(|l| l.value)).collect())
}

/// Largest deviation of orbit limits from `want` over `1 ≤ i, j ≤ extent`,
/// with a separate (tighter or exact) tolerance on the first column.
fn grid_deviation(
    t: &OrbitShift<f64>,
    extent: i64,
    want: impl Fn(i64, i64) -> f64,
) -> Result<(f64, f64), String> {
    let (mut first_col, mut rest) = (0.0f64, 0.0f64);
    for ((i, j), got) in grid_limits(t, extent)? {
        let dev = (got - want(i, j)).abs();
        if j == 1 {
            first_col = first_col.max(dev);
        } else {
            rest = rest.max(dev);
        }
    }
    Ok((first_col, rest))
}

/// Half-weighted bilateral shift: limits `1` for `k > 0` and
/// `(1/2)^(2−2k)` for `k ≤ 0`, compared exactly on `[lo, hi]`.
pub fn check_bilateral(lo: i64, hi: i64) -> Check {
    let t = fixtures::half_weighted_bilateral_shift::<f64>();
    let r = (|| {
        for k in lo..=hi {
            let got = orbit_value(&t, Index::Single(k))?;
            let want = fixtures::half_weighted_bilateral_limit::<f64>(k);
            if got != want {
                return Err(format!("k = {k}: {got} != {want}"));
            }
        }
        Ok(format!("exact on [{lo}, {hi}]"))
    })();
    Check::from_result("bilateral shift limits", r)
}

/// Both operators of the coinciding-limit pair against `1/2`, `(j−1)/j`.
pub fn check_coinciding_pair(extent: i64) -> Vec<Check> {
    let (t1, t2) = fixtures::coinciding_limit_pair::<f64>();
    [("T1", t1), ("T2", t2)]
        .into_iter()
        .map(|(name, t)| {
            let r = grid_deviation(&t, extent, fixtures::coinciding_limit::<f64>).and_then(|(first, rest)| {
                let detail = format!("first column dev {first:.1e}, other dev {rest:.1e}");
                if first <= 1e-12 && rest <= 1e-10 {
                    Ok(detail)
                } else {
                    Err(detail)
                }
            });
            Check::from_result(&format!("coinciding pair: A_{name}"), r)
        })
        .collect()
}

/// `A_{T2T1}`: exactly `1` on the first column, `(j−1)/j` elsewhere, and
/// strictly above `A_{T1}` there.
pub fn check_coinciding_product(extent: i64) -> Vec<Check> {
    let (t1, t2) = fixtures::coinciding_limit_pair::<f64>();
    let product = match orbit_compose(&t2, &t1) {
        Ok(p) => p,
        Err(e) => return vec![Check::new("coinciding pair: A_T2T1", false, e.to_string())],
    };
    let values = grid_deviation(&product, extent, fixtures::coinciding_product_limit::<f64>);
    let value_check = Check::from_result(
        "coinciding pair: A_T2T1",
        values.and_then(|(first, rest)| {
            let detail = format!("first column dev {first:.1e}, other dev {rest:.1e}");
            if first == 0.0 && rest <= 1e-10 {
                Ok(detail)
            } else {
                Err(detail)
            }
        }),
    );
    let order = (|| {
        let mut min_gap_first = f64::INFINITY;
        for (((i, j), lower), (_, upper)) in grid_limits(&t1, extent)?.into_iter().zip(grid_limits(&product, extent)?) {
            if lower > upper + 1e-10 {
                return Err(format!("A_T1 > A_T2T1 at ({i},{j})"));
            }
            if j == 1 {
                min_gap_first = min_gap_first.min(upper - lower);
            }
        }
        if (min_gap_first - 0.5).abs() <= 1e-12 {
            Ok(format!("A_T1 <= A_T2T1, gap {min_gap_first} on the first column"))
        } else {
            Err(format!("first-column gap {min_gap_first}, expected 1/2"))
        }
    })();
    vec![value_check, Check::from_result("coinciding pair: A_T1 <= A_T2T1", order)]
}

/// Stable pair whose product has limit `i/(i+1)`.
pub fn check_stable_pair(extent: i64) -> Vec<Check> {
    let (t1, t2) = fixtures::stable_pair_with_isometric_product::<f64>();
    let product = orbit_compose(&t2, &t1);
    let values = (|| {
        let product = product.map_err(|e| e.to_string())?;
        let (first, rest) = grid_deviation(&product, extent, fixtures::stable_pair_product_limit::<f64>)?;
        let dev = first.max(rest);
        if dev <= 1e-10 {
            Ok(format!("max dev {dev:.1e}"))
        } else {
            Err(format!("max dev {dev:.1e}"))
        }
    })();
    let stable = (|| {
        let mut worst_steps = 0;
        for t in [&t1, &t2] {
            for i in 1..=extent {
                for j in 1..=extent {
                    let l = asymptotic_limit_orbit(t, Index::Pair(i, j), 1e-12, 100_000)
                        .map_err(|e| format!("({i},{j}): {e}"))?;
                    if l.value != 0.0 {
                        return Err(format!("({i},{j}) has limit {}", l.value));
                    }
                    worst_steps = worst_steps.max(l.steps);
                }
            }
        }
        Ok(format!("all orbits vanish, at most {worst_steps} steps"))
    })();
    vec![
        Check::from_result("stable pair: A_T2T1 = i/(i+1)", values),
        Check::from_result("stable pair: A_T1 = A_T2 = 0", stable),
    ]
}

pub fn examples_suite(extent: i64) -> Vec<Check> {
    let mut out = vec![check_bilateral(-20, 20)];
    out.extend(check_coinciding_pair(extent));
    out.extend(check_coinciding_product(extent));
    out.extend(check_stable_pair(extent));
    out
}

/// Random contraction of dimension `2..=8`: a strict contraction, or one
/// with a unitary summand of random size (so that limits are non-trivial).
pub fn random_test_contraction(rng: &mut Lcg64) -> M {
    let n = rng.int_range(2, 8);
    if rng.uniform() < 0.25 {
        random_contraction(rng, n)
    } else {
        let k = rng.int_range(0, n);
        random_contraction_with_unitary_part(rng, n, k)
    }
}

fn dense(m: M) -> Result<DenseContraction<f64>, String> {
    DenseContraction::new(m).map_err(|e| e.to_string())
}

fn limit(t: &DenseContraction<f64>) -> Result<crate::asymptotics::DenseLimit<f64>, String> {
    asymptotic_limit_dense(t, DENSE_TOL, DEFAULT_MAX_DOUBLINGS).map_err(|e| e.to_string())
}

/// `Q_{k+1} ≤ Q_k` for the squaring iterates.
pub fn check_loewner_monotone(rng: &mut Lcg64, trials: usize) -> Check {
    let r = (|| {
        let mut comparisons = 0;
        for trial in 0..trials {
            let mut p = random_test_contraction(rng);
            let mut q = multiply(&adjoint(&p), &p).map_err(|e| e.to_string())?.hermitian_part();
            for _ in 0..12 {
                p = p.square();
                let next = multiply(&adjoint(&p), &p).map_err(|e| e.to_string())?.hermitian_part();
                if !loewner_leq(&next, &q, 1e-10).map_err(|e| e.to_string())? {
                    return Err(format!("trial {trial}: Q_(k+1) <= Q_k fails"));
                }
                comparisons += 1;
                q = next;
            }
        }
        Ok(format!("{comparisons} comparisons"))
    })();
    Check::from_result("Loewner monotonicity of iterates", r)
}

/// Statistics of the projection-law run.
#[derive(Debug, Clone, Default)]
pub struct ProjectionStats {
    pub converged: usize,
    pub not_converged: usize,
    pub worst_defect: f64,
    pub worst_witness: f64,
    pub worst_spectrum_excess: f64,
    pub inadmissible: usize,
}

/// `‖A² − A‖ ≤ 1e−6`, spectrum in `[−1e−8, 1+1e−8]`, stable vectors die
/// under the final power, and the finite-dimensional trichotomy never
/// reports an inadmissible limit.
pub fn projection_law_stats(rng: &mut Lcg64, trials: usize) -> Result<ProjectionStats, String> {
    let mut s = ProjectionStats::default();
    for _ in 0..trials {
        let t = dense(random_test_contraction(rng))?;
        let Ok(d) = limit(&t) else {
            s.not_converged += 1;
            continue;
        };
        s.converged += 1;
        s.worst_defect = s.worst_defect.max(projection_defect(&d.limit));
        let eig = crate::linalg::hermitian_eigen(&d.limit, 1e-9).map_err(|e| e.to_string())?;
        let lo = eig.min_value().unwrap_or(0.0);
        let hi = eig.max_value().unwrap_or(0.0);
        s.worst_spectrum_excess = s.worst_spectrum_excess.max(-lo).max(hi - 1.0);
        let stable = stable_subspace(&d.limit, 1e-5).map_err(|e| e.to_string())?;
        for x in stable.vectors() {
            s.worst_witness = s.worst_witness.max(vector_norm(&d.final_power.mat_vec(&x)));
        }
        if trichotomy_of(&d.limit, 1e-6).map_err(|e| e.to_string())?.case == AdmissibilityCase::Inadmissible {
            s.inadmissible += 1;
        }
    }
    Ok(s)
}

pub fn check_projection_law(rng: &mut Lcg64, trials: usize) -> Check {
    let r = projection_law_stats(rng, trials).and_then(|s| {
        let detail = format!(
            "{} converged ({} not), max ||A^2-A|| {:.1e}, max witness {:.1e}",
            s.converged, s.not_converged, s.worst_defect, s.worst_witness
        );
        if s.worst_defect <= 1e-6 && s.worst_witness <= 1e-5 && s.worst_spectrum_excess <= 1e-8 && s.inadmissible == 0 {
            Ok(detail)
        } else {
            Err(detail)
        }
    });
    Check::from_result("projection law", r)
}

/// `A_{UTU*} = U A_T U*`.
pub fn check_unitary_conjugation(rng: &mut Lcg64, trials: usize) -> Check {
    let r = (|| {
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let t = random_test_contraction(rng);
            let u = random_unitary::<f64>(rng, t.rows());
            let conj = |m: &M| -> Result<M, String> {
                multiply(&multiply(&u, m).map_err(|e| e.to_string())?, &adjoint(&u)).map_err(|e| e.to_string())
            };
            let (Ok(a), Ok(b)) = (limit(&dense(t.clone())?), limit(&dense(conj(&t)?)?)) else {
                continue;
            };
            let diff = operator_norm(&b.limit.sub(&conj(&a.limit)?).map_err(|e| e.to_string())?);
            worst = worst.max(diff);
        }
        if worst <= 1e-8 {
            Ok(format!("max discrepancy {worst:.1e}"))
        } else {
            Err(format!("max discrepancy {worst:.1e}"))
        }
    })();
    Check::from_result("unitary conjugation", r)
}

#[derive(Debug, Clone, Default)]
pub struct MobiusStats {
    pub worst_norm: f64,
    pub worst_involution: f64,
}

/// Contractivity of `b_a(T)` and `b_{−a}(b_a(T)) = T`, `|a| ≤ 0.9`.
pub fn mobius_stats(rng: &mut Lcg64, trials: usize) -> Result<MobiusStats, String> {
    let mut s = MobiusStats::default();
    for _ in 0..trials {
        let t = dense(random_test_contraction(rng))?;
        let p = MobiusParam::new(rng.disc_point::<f64>(0.9)).map_err(|e| e.to_string())?;
        let x = mobius(&t, p).map_err(|e| e.to_string())?;
        s.worst_norm = s.worst_norm.max(operator_norm(x.matrix()));
        let back = mobius(&x, p.negated()).map_err(|e| e.to_string())?;
        let diff = operator_norm(&back.matrix().sub(t.matrix()).map_err(|e| e.to_string())?);
        s.worst_involution = s.worst_involution.max(diff);
    }
    Ok(s)
}

pub fn check_mobius(rng: &mut Lcg64, trials: usize) -> Check {
    let r = mobius_stats(rng, trials).and_then(|s| {
        let detail = format!("max ||b_a(T)|| {:.12}, max involution error {:.1e}", s.worst_norm, s.worst_involution);
        if s.worst_norm <= 1.0 + 1e-8 && s.worst_involution <= 1e-9 {
            Ok(detail)
        } else {
            Err(detail)
        }
    });
    Check::from_result("Mobius contractivity and involution", r)
}

/// `p(T)` for coefficients `c_0..c_d`, scaled to norm at most one.
pub fn polynomial_contraction(t: &M, coeffs: &[Cx<f64>]) -> Result<M, String> {
    let n = t.rows();
    let mut acc = M::zeros(n, n);
    let mut power = M::identity(n);
    for c in coeffs {
        acc = acc.add(&power.scale(*c)).map_err(|e| e.to_string())?;
        power = multiply(&power, t).map_err(|e| e.to_string())?;
    }
    let norm = operator_norm(&acc);
    Ok(if norm > 1.0 { acc.scale_real(1.0 / norm) } else { acc })
}

fn random_polynomial(rng: &mut Lcg64) -> Vec<Cx<f64>> {
    let degree = rng.int_range(1, 3);
    (0..=degree).map(|_| rng.complex_normal::<f64>()).collect()
}

/// For commuting contractions, `A_{T1T2} ≤ A_{T1}` and `A_{T1T2} ≤ A_{T2}`.
pub fn commuting_product_stats(rng: &mut Lcg64, trials: usize) -> Result<(usize, usize), String> {
    let (mut ok, mut skipped) = (0, 0);
    for trial in 0..trials {
        let t = random_test_contraction(rng);
        let t1 = polynomial_contraction(&t, &random_polynomial(rng))?;
        let t2 = polynomial_contraction(&t, &random_polynomial(rng))?;
        let prod = multiply(&t1, &t2).map_err(|e| e.to_string())?;
        let limits: Result<Vec<_>, _> = [t1, t2, prod].into_iter().map(|m| dense(m).and_then(|d| limit(&d))).collect();
        let Ok(limits) = limits else {
            skipped += 1;
            continue;
        };
        for k in 0..2 {
            if !loewner_leq(&limits[2].limit, &limits[k].limit, 1e-8).map_err(|e| e.to_string())? {
                return Err(format!("trial {trial}: A_(T1T2) <= A_T{} fails", k + 1));
            }
        }
        ok += 1;
    }
    Ok((ok, skipped))
}

pub fn check_commuting_products(rng: &mut Lcg64, trials: usize) -> Check {
    let r = commuting_product_stats(rng, trials).map(|(ok, skipped)| format!("{ok} pairs checked, {skipped} not converged"));
    Check::from_result("commuting product inequality", r)
}

/// Limit of a direct sum equals the direct sum of limits.
pub fn check_direct_sum(rng: &mut Lcg64, trials: usize) -> Check {
    let r = (|| {
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let a = random_test_contraction(rng);
            let b = random_test_contraction(rng);
            let (Ok(la), Ok(lb), Ok(lab)) =
                (limit(&dense(a.clone())?), limit(&dense(b.clone())?), limit(&dense(a.direct_sum(&b))?))
            else {
                continue;
            };
            let diff = lab.limit.sub(&la.limit.direct_sum(&lb.limit)).map_err(|e| e.to_string())?.max_abs();
            worst = worst.max(diff);
        }
        if worst <= 1e-10 {
            Ok(format!("max discrepancy {worst:.1e}"))
        } else {
            Err(format!("max discrepancy {worst:.1e}"))
        }
    })();
    Check::from_result("direct-sum law", r)
}

/// Randomized property suite; every check draws from its own stream
/// derived from `seed`, so checks are independent of each other's draws.
pub fn props_suite(seed: u64, trials: usize) -> Vec<Check> {
    let stream = |k: u64| Lcg64::new(seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    vec![
        check_loewner_monotone(&mut stream(1), trials),
        check_projection_law(&mut stream(2), trials),
        check_unitary_conjugation(&mut stream(3), trials),
        check_mobius(&mut stream(4), trials),
        check_commuting_products(&mut stream(5), trials),
        check_direct_sum(&mut stream(6), trials),
    ]
}
