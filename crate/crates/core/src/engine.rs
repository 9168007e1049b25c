//! Global assembly of the trace: relevant-class enumeration with vanishing
//! filters, the identity term, per-class global orbital integrals, and the
//! final exact trace or dimension.
//!
//! For a tuple of local data at level N = S^2 T^3, weight k > 2 and Hecke
//! index n coprime to N, the trace of T_n is
//!
//!   n^{k/2-1} [ conj(omega'(sqrt n)) (k-1)/12 prod d_sigma
//!               + (1/2) sum_{M|T} Phi([[0,-nM],[1,0]])
//!               + sum_{M|T} sum_{0<r<sqrt(4n/M)} Phi([[0,-nM],[1,rM]]) ]
//!
//! with each Phi a measure factor times local factors. Everything is exact;
//! the float mirror rides along for cross-checking only.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::arith::{factorize, gcd_u64, inv_mod, lcm_u64, legendre};
use crate::cyclotomic::{CycNumber, RootOfUnity, CONDUCTOR_CAP};
use crate::local_reps::{
    enumerate_tuples, global_root_number, validate_tuple, LocalRepData, SigmaTuple,
};
use crate::orbital::{
    lattice_orbital_oracle, measure_factor, phi_ell, phi_infty, phi_p_depth_zero,
    phi_p_simple_ramified, phi_p_simple_unramified, GammaClass,
};
use crate::residue::{Fp2Context, Nebentypus};
use crate::Error;

/// Where a local factor of a global orbital integral lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Infinity,
    /// A prime dividing the level.
    Level(u64),
    /// A prime dividing the discriminant but not the level.
    Away(u64),
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::Infinity => write!(f, "infinity"),
            Place::Level(p) => write!(f, "p={p}"),
            Place::Away(l) => write!(f, "ell={l}"),
        }
    }
}

/// One elliptic class's contribution, with the per-place breakdown kept for
/// reporting and regression against published tables.
#[derive(Debug, Clone)]
pub struct GammaTerm {
    pub gamma: GammaClass,
    /// 1/2 for the trace-zero classes, 1 otherwise.
    pub weight: BigRational,
    pub measure: BigRational,
    pub factors: Vec<(Place, CycNumber)>,
    /// measure times the product of all local factors (weight excluded).
    pub product: CycNumber,
}

/// Exact result of one trace computation, with full per-class breakdown.
#[derive(Debug, Clone)]
pub struct TraceReport {
    pub tuple: SigmaTuple,
    pub weight_k: u32,
    pub hecke_n: u64,
    pub identity_term: CycNumber,
    pub gamma_terms: Vec<GammaTerm>,
    pub total: CycNumber,
    pub total_float: (f64, f64),
    pub rationalized: Option<BigRational>,
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn squarefree_part(n: u64) -> u64 {
    factorize(n)
        .factors()
        .iter()
        .filter(|&&(_, e)| e % 2 == 1)
        .map(|&(p, _)| p)
        .product()
}

/// The ambient cyclotomic conductor every value of this computation lives
/// in: bounded by the lcm of the character orders, the p^2 phases at T, the
/// F_{p^2} orders at S, and the square-root fields when k is odd.
pub fn predicted_conductor(tuple: &SigmaTuple, k: u32, n: u64) -> u64 {
    let mut l = 4u64;
    for rep in tuple.reps() {
        match rep {
            LocalRepData::DepthZero(r) => {
                l = lcm_u64(l, r.p * r.p - 1);
            }
            LocalRepData::Simple(r) => {
                l = lcm_u64(l, r.p * r.p);
                l = lcm_u64(l, r.zeta.order());
                l = lcm_u64(l, (r.p - 1).max(1));
            }
        }
    }
    for lc in tuple.neb().locals() {
        l = lcm_u64(l, (lc.p - 1).max(1));
    }
    if k % 2 == 1 {
        for m in factorize(tuple.t()).divisors() {
            l = lcm_u64(l, 4 * squarefree_part(n * m));
        }
        l = lcm_u64(l, 4 * squarefree_part(n));
    }
    l
}

/// All classes [[0,-nM],[1,rM]] surviving the support and vanishing
/// filters, with their multiplicity weights. The trace-zero classes are
/// dropped for odd k, classes hyperbolic at some p | N are dropped, and the
/// two local residue conditions at p | M and p | T/M are applied.
pub fn relevant_gammas(
    tuple: &SigmaTuple,
    n: u64,
    k: u32,
) -> Result<Vec<(GammaClass, BigRational)>, Error> {
    if gcd_u64(n, tuple.level()) != 1 {
        return Err(Error::Invalid(format!(
            "Hecke index n = {n} must be coprime to the level {}",
            tuple.level()
        )));
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let t = tuple.t();
    let level_primes: Vec<u64> = factorize(tuple.level()).primes().collect();
    let mut out = Vec::new();
    for m in factorize(t).divisors() {
        let mut r = 0u64;
        while r * r * m < 4 * n {
            let keep = (|| {
                if r == 0 && k % 2 == 1 {
                    return Ok(None); // archimedean factor vanishes
                }
                let gamma = GammaClass::new(n, m, r)?;
                for &p in &level_primes {
                    if crate::arith::is_square_in_qp(gamma.delta, p) {
                        return Ok(None); // hyperbolic at p
                    }
                }
                for rep in tuple.reps() {
                    if let LocalRepData::Simple(sr) = rep {
                        let p = sr.p;
                        if m % p == 0 {
                            // Ramified side: -t/u must be a residue mod p.
                            if p != 2 {
                                let u = gamma.det / p;
                                let target =
                                    (p - sr.t % p) % p * inv_mod(u % p, p) % p;
                                if legendre(target as i64, p) != 1 {
                                    return Ok(None);
                                }
                            }
                        } else {
                            // Unramified side: nonzero double root needed.
                            if crate::orbital::double_root_mod_p(&gamma, p).is_none() {
                                return Ok(None);
                            }
                        }
                    }
                }
                Ok(Some(gamma))
            })();
            match keep? {
                Some(gamma) => {
                    let w = if r == 0 { half.clone() } else { BigRational::one() };
                    out.push((gamma, w));
                }
                None => {}
            }
            r += 1;
        }
    }
    Ok(out)
}

/// Identity (main) term: zero unless n is a perfect square, else
/// conj(omega'(sqrt n)) (k-1)/12 prod_{p|S} (p-1) prod_{p|T} (p^2-1)/2.
pub fn identity_term(tuple: &SigmaTuple, k: u32, n: u64) -> CycNumber {
    let root = isqrt(n);
    if root * root != n {
        return CycNumber::zero();
    }
    let mut scale = BigRational::new(BigInt::from(k - 1), BigInt::from(12));
    for rep in tuple.reps() {
        let (num, den) = rep.formal_degree_num_den();
        scale *= BigRational::new(BigInt::from(num), BigInt::from(den));
    }
    let w = tuple
        .neb()
        .eval(root as i64)
        .expect("sqrt(n) is coprime to N")
        .conj();
    w.to_cyc().scale(&scale)
}

/// The full global orbital integral of one class: measure times
/// archimedean, level, and away factors.
pub fn global_orbital(
    gamma: &GammaClass,
    tuple: &SigmaTuple,
    k: u32,
) -> Result<GammaTerm, Error> {
    let neb = tuple.neb();
    let mut factors: Vec<(Place, CycNumber)> = Vec::new();
    factors.push((Place::Infinity, phi_infty(gamma, k)?));
    for rep in tuple.reps() {
        let p = rep.p();
        let value = match rep {
            LocalRepData::Simple(sr) => {
                if gamma.m_div % p == 0 {
                    phi_p_simple_ramified(gamma, sr, neb)?
                } else {
                    phi_p_simple_unramified(gamma, sr, neb)?
                }
            }
            LocalRepData::DepthZero(dr) => {
                let ctx = Fp2Context::shared(p);
                phi_p_depth_zero(gamma, dr, &ctx, neb)?
            }
        };
        factors.push((Place::Level(p), value));
    }
    for ell in factorize(gamma.delta.unsigned_abs()).primes() {
        if tuple.level() % ell == 0 {
            continue;
        }
        let value = CycNumber::from_integer(phi_ell(gamma, ell) as i64);
        factors.push((Place::Away(ell), value));
    }
    let measure = measure_factor(gamma);
    let mut product = CycNumber::from_rational(measure.clone());
    for (_, f) in &factors {
        product = product.mul(f);
    }
    Ok(GammaTerm {
        gamma: gamma.clone(),
        weight: BigRational::one(),
        measure,
        factors,
        product,
    })
}

/// n^{k/2 - 1}, exactly; for odd k this is n^{(k-3)/2} sqrt(n).
fn hecke_normalization(n: u64, k: u32) -> Result<CycNumber, Error> {
    if k % 2 == 0 {
        Ok(CycNumber::from_rational(BigRational::from_integer(
            BigInt::from(n).pow((k - 2) / 2),
        )))
    } else {
        let sf = squarefree_part(n);
        let sq = isqrt(n / sf);
        let scalar =
            BigRational::from_integer(BigInt::from(n).pow((k - 3) / 2) * BigInt::from(sq));
        Ok(CycNumber::sqrt_squarefree(sf)?.scale(&scalar))
    }
}

/// The trace of T_n on the space cut out by the tuple, with the full
/// per-class breakdown.
pub fn trace_hecke(tuple: &SigmaTuple, k: u32, n: u64) -> Result<TraceReport, Error> {
    if k <= 2 {
        return Err(Error::Invalid(format!("weight k = {k} must exceed 2")));
    }
    let violations = validate_tuple(tuple, k);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    let needed = predicted_conductor(tuple, k, n);
    if needed > CONDUCTOR_CAP {
        return Err(Error::ConductorCap {
            needed,
            cap: CONDUCTOR_CAP,
        });
    }
    let identity = identity_term(tuple, k, n);
    let mut gamma_terms = Vec::new();
    let mut elliptic_sum = CycNumber::zero();
    for (gamma, weight) in relevant_gammas(tuple, n, k)? {
        let mut term = global_orbital(&gamma, tuple, k)?;
        term.weight = weight.clone();
        elliptic_sum = elliptic_sum.add(&term.product.scale(&weight));
        gamma_terms.push(term);
    }
    let bracket = identity.add(&elliptic_sum);
    let total = hecke_normalization(n, k)?.mul(&bracket);
    let rationalized = total.as_rational();
    // The report carries the *accumulated* shadow; approx() has already
    // cross-checked it against a fresh evaluation of the exact value.
    let shadow = total.shadow();
    total.approx();
    Ok(TraceReport {
        tuple: tuple.clone(),
        weight_k: k,
        hecke_n: n,
        identity_term: identity,
        gamma_terms,
        total,
        total_float: (shadow.re, shadow.im),
        rationalized,
    })
}

/// dim S_k = trace of T_1; asserts the result is a nonnegative integer.
pub fn dimension(tuple: &SigmaTuple, k: u32) -> Result<u64, Error> {
    let report = trace_hecke(tuple, k, 1)?;
    let q = report.rationalized.ok_or_else(|| {
        Error::NonIntegralDimension(format!(
            "tuple {} at k = {k}: total {} is irrational",
            tuple.label(),
            report.total
        ))
    })?;
    if !q.is_integer() {
        return Err(Error::NonIntegralDimension(format!(
            "tuple {} at k = {k}: total {q}",
            tuple.label()
        )));
    }
    if q.is_negative() {
        return Err(Error::NegativeDimension(format!(
            "tuple {} at k = {k}: total {q}",
            tuple.label()
        )));
    }
    q.to_integer()
        .to_u64()
        .ok_or_else(|| Error::Invalid("dimension exceeds u64".into()))
}

/// Dimensions of every tuple at the level, keyed by global root number.
/// Fails when some tuple's root number is unavailable.
pub fn bias_partition(
    neb: &Nebentypus,
    k: u32,
) -> Result<BTreeMap<RootOfUnity, u64>, Error> {
    let mut totals = BTreeMap::new();
    for tuple in enumerate_tuples(neb)? {
        let eps = global_root_number(k, &tuple).ok_or_else(|| {
            let p = tuple
                .reps()
                .iter()
                .find(|r| crate::local_reps::root_number(r, neb).is_none())
                .map(|r| r.p())
                .unwrap_or(0);
            Error::RootNumberUnavailable { p }
        })?;
        let dim = dimension(&tuple, k)?;
        *totals.entry(eps).or_insert(0) += dim;
    }
    Ok(totals)
}

/// Convenience: (tuple, dimension) for every tuple at the level.
pub fn dimensions_all(neb: &Nebentypus, k: u32) -> Result<Vec<(SigmaTuple, u64)>, Error> {
    enumerate_tuples(neb)?
        .into_iter()
        .map(|t| dimension(&t, k).map(|d| (t, d)))
        .collect()
}

/// Cross-check used by tests and the validation suite: every away-factor in
/// a report agrees with the brute-force lattice count.
pub fn check_away_factors_against_oracle(report: &TraceReport) -> Result<(), Error> {
    for term in &report.gamma_terms {
        for (place, value) in &term.factors {
            if let Place::Away(ell) = place {
                let v = crate::arith::valuation(term.gamma.delta, *ell);
                let expect = if crate::arith::is_square_in_qp(term.gamma.delta, *ell) {
                    ell.pow(v / 2)
                } else {
                    lattice_orbital_oracle(&term.gamma, *ell, v + 1)?
                };
                let got = value.as_rational();
                if got != Some(BigRational::from_integer(BigInt::from(expect))) {
                    return Err(Error::Invalid(format!(
                        "away factor mismatch at ell = {ell} for {}",
                        term.gamma.matrix_string()
                    )));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Serialization: exact JSON (order + dense rational coefficients + float
// mirror) and CSV summary rows.

fn rational_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn cyc_to_json(z: &CycNumber) -> serde_json::Value {
    let image = z.approx();
    serde_json::json!({
        "L": z.order(),
        "coeffs": z.dense_coeffs().iter().map(rational_string).collect::<Vec<_>>(),
        "re": image.re,
        "im": image.im,
    })
}

pub fn report_to_json(report: &TraceReport) -> serde_json::Value {
    let gamma_terms: Vec<serde_json::Value> = report
        .gamma_terms
        .iter()
        .map(|t| {
            serde_json::json!({
                "gamma": {
                    "n": t.gamma.hecke_n,
                    "M": t.gamma.m_div,
                    "r": t.gamma.r,
                    "trace": t.gamma.trace,
                    "det": t.gamma.det,
                    "delta": t.gamma.delta,
                    "matrix": t.gamma.matrix_string(),
                },
                "weight": rational_string(&t.weight),
                "measure": rational_string(&t.measure),
                "factors": t.factors.iter().map(|(place, v)| {
                    serde_json::json!({
                        "place": place.to_string(),
                        "value": cyc_to_json(v),
                    })
                }).collect::<Vec<_>>(),
                "product": cyc_to_json(&t.product),
            })
        })
        .collect();
    serde_json::json!({
        "tuple": crate::local_reps::tuple_to_json(&report.tuple, report.weight_k),
        "level": report.tuple.level(),
        "weight": report.weight_k,
        "hecke_n": report.hecke_n,
        "identity_term": cyc_to_json(&report.identity_term),
        "gamma_terms": gamma_terms,
        "total": cyc_to_json(&report.total),
        "total_float": { "re": report.total_float.0, "im": report.total_float.1 },
        "rationalized": report.rationalized.as_ref().map(|q| rational_string(q)),
    })
}

pub const CSV_HEADER: &str = "level,weight,tuple,n,trace_exact,trace_float";

pub fn report_csv_row(report: &TraceReport) -> String {
    let exact = match &report.rationalized {
        Some(q) => rational_string(q),
        None => report.total.display_string(),
    };
    format!(
        "{},{},\"{}\",{},\"{}\",{:+.6}{:+.6}i",
        report.tuple.level(),
        report.weight_k,
        report.tuple.label(),
        report.hecke_n,
        exact,
        report.total_float.0,
        report.total_float.1
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::RootOfUnity;
    use crate::local_reps::{LocalRepData, SimpleRep};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn n27_tuple(t: u64, zeta: RootOfUnity) -> SigmaTuple {
        let neb = Nebentypus::quadratic(1, 3, 3).unwrap();
        SigmaTuple::new(
            neb,
            vec![LocalRepData::Simple(SimpleRep { p: 3, t, zeta })],
        )
        .unwrap()
    }

    #[test]
    fn relevant_gammas_glist_rows() {
        // n = 1, odd T > 3: the only candidate class is [[0,-T],[1,0]], and
        // it survives exactly when -p t_p / T is a residue at every p | T.
        for t in [5u64, 7, 11, 15] {
            let neb = Nebentypus::trivial(1, t).unwrap();
            for tuple in enumerate_tuples(&neb).unwrap() {
                let residue_ok = tuple.reps().iter().all(|r| match r {
                    LocalRepData::Simple(sr) => {
                        let u = t / sr.p;
                        let target =
                            (sr.p - sr.t % sr.p) % sr.p * inv_mod(u % sr.p, sr.p) % sr.p;
                        legendre(target as i64, sr.p) == 1
                    }
                    _ => unreachable!(),
                });
                let gs = relevant_gammas(&tuple, 1, 4).unwrap();
                if residue_ok {
                    assert_eq!(gs.len(), 1, "T = {t}");
                    assert_eq!((gs[0].0.det, gs[0].0.trace), (t, 0));
                    assert_eq!(gs[0].1, rat(1, 2));
                } else {
                    assert!(gs.is_empty(), "T = {t}");
                }
            }
        }
        // n = 1, T = 3: [[0,-3],[1,0]], [[0,-3],[1,3]], [[0,-1],[1,1]]
        // before the per-tuple residue filters; (t = -1) keeps all three.
        let neb = Nebentypus::trivial(1, 3).unwrap();
        let tuple = SigmaTuple::new(
            neb,
            vec![LocalRepData::Simple(SimpleRep {
                p: 3,
                t: 2,
                zeta: RootOfUnity::one(),
            })],
        )
        .unwrap();
        let gs = relevant_gammas(&tuple, 1, 4).unwrap();
        let shapes: Vec<(u64, u64)> = gs.iter().map(|(g, _)| (g.det, g.trace)).collect();
        assert_eq!(shapes, vec![(1, 1), (3, 0), (3, 3)]);
        // t = 1 fails the residue condition at 3, dropping both ramified
        // classes.
        let neb = Nebentypus::trivial(1, 3).unwrap();
        let tuple = SigmaTuple::new(
            neb,
            vec![LocalRepData::Simple(SimpleRep {
                p: 3,
                t: 1,
                zeta: RootOfUnity::one(),
            })],
        )
        .unwrap();
        let gs = relevant_gammas(&tuple, 1, 4).unwrap();
        let shapes: Vec<(u64, u64)> = gs.iter().map(|(g, _)| (g.det, g.trace)).collect();
        assert_eq!(shapes, vec![(1, 1)]);
        // T = 2: [[0,-1],[1,0]], [[0,-2],[1,0]], [[0,-2],[1,2]].
        let neb = Nebentypus::trivial(1, 2).unwrap();
        for tuple in enumerate_tuples(&neb).unwrap() {
            let gs = relevant_gammas(&tuple, 1, 4).unwrap();
            let shapes: Vec<(u64, u64)> = gs.iter().map(|(g, _)| (g.det, g.trace)).collect();
            assert_eq!(shapes, vec![(1, 0), (2, 0), (2, 2)]);
        }
    }

    #[test]
    fn relevant_gammas_drop_no_double_root() {
        // n = 7, N = 27: [[0,-7],[1,3]] has no double characteristic root
        // mod 3, so it must be filtered.
        let tuple = n27_tuple(2, RootOfUnity::i_power(1));
        let gs = relevant_gammas(&tuple, 7, 5).unwrap();
        assert!(gs.iter().all(|(g, _)| !(g.det == 7 && g.trace == 3)));
        // Odd k drops every trace-zero class.
        assert!(gs.iter().all(|(g, _)| g.trace != 0));
    }

    #[test]
    fn identity_term_examples() {
        // N = 27, k = 5, n = 4, quadratic character: -4/3.
        let tuple = n27_tuple(2, RootOfUnity::i_power(1));
        assert_eq!(identity_term(&tuple, 5, 4).as_rational(), Some(rat(-4, 3)));
        // Non-square n: zero.
        assert!(identity_term(&tuple, 5, 7).is_zero());
        // N = 8, k = 6, n = 1: (5/12)(3/2) = 5/8.
        let neb = Nebentypus::trivial(1, 2).unwrap();
        let tuple8 = SigmaTuple::new(
            neb,
            vec![LocalRepData::Simple(SimpleRep {
                p: 2,
                t: 1,
                zeta: RootOfUnity::one(),
            })],
        )
        .unwrap();
        assert_eq!(identity_term(&tuple8, 6, 1).as_rational(), Some(rat(5, 8)));
    }

    #[test]
    fn trace_n27_k5_examples() {
        // tr T_4 = (37t - 23)/2 + 46 i zeta [t = -1];
        // tr T_7 = (67 - 143t)/4 + (37 i zeta / 2) [t = -1].
        for (t, zeta, want4, want7) in [
            (2u64, RootOfUnity::i_power(1), -76i64, 34i64), // (t,zeta)=(-1,i): -30-46, (210/4)+...
            (2, RootOfUnity::i_power(3), 16, 71),
            (1, RootOfUnity::one(), 7, -19),
            (1, RootOfUnity::minus_one(), 7, -19),
        ] {
            let tuple = n27_tuple(t, zeta);
            let r4 = trace_hecke(&tuple, 5, 4).unwrap();
            assert_eq!(r4.rationalized, Some(rat(want4, 1)), "T_4 at t={t}, zeta={zeta}");
            let r7 = trace_hecke(&tuple, 5, 7).unwrap();
            assert_eq!(r7.rationalized, Some(rat(want7, 1)), "T_7 at t={t}, zeta={zeta}");
            check_away_factors_against_oracle(&r4).unwrap();
            check_away_factors_against_oracle(&r7).unwrap();
        }
    }

    #[test]
    fn dimension_n27_k5() {
        // k = 5: dims (1, 2) for eps = (1, -1) at t = -1, and 1 for t = 1.
        let dims: Vec<u64> = [
            (2u64, RootOfUnity::i_power(3)), // eps = i^5 * (-i) = 1
            (2, RootOfUnity::i_power(1)),    // eps = -1
            (1, RootOfUnity::one()),
            (1, RootOfUnity::minus_one()),
        ]
        .iter()
        .map(|&(t, z)| dimension(&n27_tuple(t, z), 5).unwrap())
        .collect();
        assert_eq!(dims, vec![1, 2, 1, 1]);
    }

    #[test]
    fn dimension_n8() {
        // Level 8: dim = floor(k/8) for k = 0,2 mod 8, plus (1+eps)/2 for
        // k = 4,6 mod 8.
        let neb = Nebentypus::trivial(1, 2).unwrap();
        for (k, zeta, want) in [
            (8u32, 1i64, 1u64),
            (8, -1, 1),
            (6, 1, 0),  // eps = (-1)^3 * 1 = -1 -> floor(6/8) + 0
            (6, -1, 1), // eps = 1
            (4, 1, 1),  // eps = 1
            (4, -1, 0),
            (10, 1, 1),
            (10, -1, 1),
            (12, 1, 2), // eps = 1: floor(12/8) + 1
            (12, -1, 1),
        ] {
            let z = if zeta == 1 {
                RootOfUnity::one()
            } else {
                RootOfUnity::minus_one()
            };
            let tuple = SigmaTuple::new(
                neb.clone(),
                vec![LocalRepData::Simple(SimpleRep { p: 2, t: 1, zeta: z })],
            )
            .unwrap();
            assert_eq!(dimension(&tuple, k).unwrap(), want, "k = {k}, zeta = {zeta}");
        }
    }

    #[test]
    fn bias_partition_n27() {
        let neb = Nebentypus::quadratic(1, 3, 3).unwrap();
        let totals = bias_partition(&neb, 5).unwrap();
        assert_eq!(totals.get(&RootOfUnity::one()), Some(&1));
        assert_eq!(totals.get(&RootOfUnity::minus_one()), Some(&2));
        assert_eq!(totals.get(&RootOfUnity::i_power(1)), Some(&1));
        assert_eq!(totals.get(&RootOfUnity::i_power(3)), Some(&1));
    }

    #[test]
    fn global_orbital_closed_forms_level_8() {
        // [[0,-2],[1,2]] at level 8: full orbital integral eps g8(k)/4 with
        // g8 = -1 for k = 0,2 mod 8 and +1 for k = 4,6 mod 8.
        let neb = Nebentypus::trivial(1, 2).unwrap();
        for zeta_sign in [1i64, -1] {
            let zeta = if zeta_sign == 1 {
                RootOfUnity::one()
            } else {
                RootOfUnity::minus_one()
            };
            let tuple = SigmaTuple::new(
                neb.clone(),
                vec![LocalRepData::Simple(SimpleRep { p: 2, t: 1, zeta })],
            )
            .unwrap();
            for k in [4u32, 6, 8, 10, 12, 14] {
                let gamma = GammaClass::new(1, 2, 1).unwrap();
                let term = global_orbital(&gamma, &tuple, k).unwrap();
                let eps = if (k / 2) % 2 == 0 { zeta_sign } else { -zeta_sign };
                let g8 = if k % 8 == 0 || k % 8 == 2 { -1 } else { 1 };
                assert_eq!(term.product.as_rational(), Some(rat(eps * g8, 4)));
            }
        }
    }

    #[test]
    fn global_orbital_closed_forms_level_27() {
        // [[0,-1],[1,1]]: t c3(k) (halved when t = -1); [[0,-3],[1,3]]:
        // 0 for t = 1, eps g6(k) for t = -1. Trivial character, k even.
        let neb = Nebentypus::trivial(1, 3).unwrap();
        let c3 = |k: u32| rat(1 + 3 * (k as i64 / 3) - k as i64, 3);
        let g6 = |k: u32| match k % 6 {
            0 | 2 => rat(-1, 6),
            3 => rat(1, 2),
            4 => rat(1, 3),
            5 => rat(-1, 2),
            _ => rat(0, 1),
        };
        for rep in crate::local_reps::enumerate_simple(3, &neb).unwrap() {
            let ts = if rep.t == 1 { 1i64 } else { -1 };
            let zs = rep.zeta.as_sign().unwrap() as i64;
            let tuple = SigmaTuple::new(
                neb.clone(),
                vec![LocalRepData::Simple(rep.clone())],
            )
            .unwrap();
            for k in [4u32, 6, 8, 10, 12] {
                let torsion = GammaClass::new(1, 1, 1).unwrap();
                let term = global_orbital(&torsion, &tuple, k).unwrap();
                let mut expect = c3(k) * rat(ts, 1);
                if ts == -1 {
                    expect /= rat(2, 1);
                }
                assert_eq!(term.product.as_rational(), Some(expect), "k={k}, t={ts}");

                let ramified = GammaClass::new(1, 3, 1).unwrap();
                let term = global_orbital(&ramified, &tuple, k).unwrap();
                let expect = if ts == 1 {
                    rat(0, 1)
                } else {
                    let eps = if (k / 2) % 2 == 0 { zs } else { -zs };
                    g6(k) * rat(eps, 1)
                };
                assert_eq!(term.product.as_rational(), Some(expect), "k={k}, t={ts}");
            }
        }
    }

    #[test]
    fn global_orbital_trace_zero_closed_forms() {
        // [[0,-T],[1,0]] with trivial characters: eps h(-T) w_T / 3_{T=3},
        // where w_T = 1/2, 1, 2, 4 by the class of T mod 8; and for even
        // T = 2M, [[0,-M],[1,0]] gives eps zeta_2 z_M h(-M) with z_M as in
        // the 2-adic case analysis. Both require every -p t_p / (det/p) to
        // be a residue, which relevant_gammas enforces.
        for t in [5u64, 6, 7, 10, 11] {
            let neb = Nebentypus::trivial(1, t).unwrap();
            let w_t = match t % 8 {
                2 | 6 => rat(1, 2),
                1 | 5 => rat(1, 1),
                7 => rat(2, 1),
                _ => rat(4, 1), // 3 mod 8
            };
            for tuple in enumerate_tuples(&neb).unwrap() {
                let k = 6u32;
                let eps: i64 = {
                    let mut e = if (k / 2) % 2 == 0 { 1 } else { -1 };
                    for rep in tuple.reps() {
                        if let LocalRepData::Simple(sr) = rep {
                            e *= sr.zeta.as_sign().unwrap() as i64;
                        }
                    }
                    e
                };
                let gammas = relevant_gammas(&tuple, 1, k).unwrap();
                for (gamma, _) in gammas {
                    if gamma.trace != 0 {
                        continue;
                    }
                    let term = global_orbital(&gamma, &tuple, k).unwrap();
                    let got = term.product.as_rational().unwrap();
                    if gamma.det == t {
                        let h = rat(
                            crate::closed_forms::field_class_number(t) as i64,
                            1,
                        );
                        assert_eq!(got, w_t.clone() * h * rat(eps, 1), "T = {t}");
                    } else {
                        // det = M = T/2 for even T.
                        let m = t / 2;
                        let z_m = match m % 8 {
                            1 | 5 => rat(1, 2),
                            3 => rat(-3, 1),
                            _ => rat(0, 1),
                        };
                        let zeta2: i64 = tuple
                            .reps()
                            .iter()
                            .find_map(|r| match r {
                                LocalRepData::Simple(sr) if sr.p == 2 => {
                                    Some(sr.zeta.as_sign().unwrap() as i64)
                                }
                                _ => None,
                            })
                            .unwrap();
                        let h = rat(
                            crate::closed_forms::field_class_number(m) as i64,
                            1,
                        );
                        let three = if m == 3 { rat(1, 3) } else { rat(1, 1) };
                        assert_eq!(
                            got,
                            z_m * h * three * rat(eps * zeta2, 1),
                            "T = {t}, M = {m}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn global_orbital_nontrivial_character_cross_check() {
        // Same trace-zero closed form with a cubic character mod 7: the
        // residue sum no longer collapses, so the value picks up
        // conj(eps) * 2 * h(-7)/2 * (chi(y) + chi(-y)).
        let neb = Nebentypus::from_exponents(1, 7, &[(7, 2)]).unwrap();
        assert_eq!(neb.parity(), 1);
        let chi = neb.local(7).unwrap();
        for tuple in enumerate_tuples(&neb).unwrap() {
            let k = 6u32;
            if !crate::local_reps::validate_tuple(&tuple, k).is_empty() {
                continue;
            }
            let LocalRepData::Simple(sr) = &tuple.reps()[0] else {
                unreachable!()
            };
            let gammas = relevant_gammas(&tuple, 1, k).unwrap();
            let Some((gamma, _)) = gammas.iter().find(|(g, _)| g.trace == 0) else {
                // -t must be a residue mod 7; otherwise the class is gone.
                assert_eq!(crate::arith::legendre(-(sr.t as i64), 7), -1);
                continue;
            };
            let y = crate::arith::sqrt_mod_p(-(sr.t as i64), 7).unwrap();
            let char_sum = chi.value(y as i64).to_cyc().add(&chi.value(-(y as i64)).to_cyc());
            let eps_conj = RootOfUnity::i_power(k as i64).mul(&sr.zeta).conj().to_cyc();
            // 2_7 * h(-7) / 2^omega(7) = 2 * 1 / 2 = 1.
            let expect = eps_conj.mul(&char_sum);
            let term = global_orbital(gamma, &tuple, k).unwrap();
            assert!(
                term.product.equals(&expect),
                "tuple {}: got {}, want {}",
                tuple.label(),
                term.product,
                expect
            );
        }
    }

    #[test]
    fn validation_and_coprimality_enforced() {
        let tuple = n27_tuple(1, RootOfUnity::one());
        assert!(matches!(
            trace_hecke(&tuple, 4, 1),
            Err(Error::Validation(_))
        )); // parity violation at even k
        assert!(matches!(
            trace_hecke(&tuple, 5, 3),
            Err(Error::Invalid(_))
        )); // n shares a factor with N
        assert!(matches!(
            trace_hecke(&tuple, 2, 1),
            Err(Error::Invalid(_))
        )); // weight too small
    }

    #[test]
    fn report_serialization() {
        let tuple = n27_tuple(2, RootOfUnity::i_power(1));
        let report = trace_hecke(&tuple, 5, 4).unwrap();
        let json = report_to_json(&report);
        assert_eq!(json["rationalized"], serde_json::json!("-76"));
        assert_eq!(json["level"], serde_json::json!(27));
        let csv = report_csv_row(&report);
        assert!(csv.starts_with("27,5,"));
        assert!(csv.contains("-76"));
        // Per-class factor places are displayed deterministically.
        let first = &json["gamma_terms"][0]["factors"][0]["place"];
        assert_eq!(first, &serde_json::json!("infinity"));
    }
}
