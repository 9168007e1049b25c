//! Supercuspidal parameter records for the primes dividing N = S^2 T^3,
//! their enumeration compatibly with a central character, local and global
//! root numbers, and tuple validation.
//!
//! Conductor p^2 representations ("depth zero") are parametrized by a
//! primitive character nu of F_{p^2}^* restricting to omega_p on F_p^*, up
//! to the conjugate pair {nu, nu^p}. Conductor p^3 representations
//! ("simple") are parametrized by t in F_p^* together with a square root
//! zeta of omega_p(t p).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd_u64};
use crate::cyclotomic::RootOfUnity;
use crate::residue::{FiniteChar, Fp2Context, Nebentypus};
use crate::Error;

/// Conductor p^2 member: the primitive character nu_m, labeled by the
/// smaller exponent of the conjugate pair {m, pm}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthZeroRep {
    pub p: u64,
    pub m: u64,
}

/// Conductor p^3 member: parameter t in F_p^* and root number zeta with
/// zeta^2 = omega_p(t p).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleRep {
    pub p: u64,
    pub t: u64,
    pub zeta: RootOfUnity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalRepData {
    DepthZero(DepthZeroRep),
    Simple(SimpleRep),
}

impl LocalRepData {
    pub fn p(&self) -> u64 {
        match self {
            LocalRepData::DepthZero(r) => r.p,
            LocalRepData::Simple(r) => r.p,
        }
    }

    /// Formal degree relative to measure giving the maximal compact total
    /// mass one: q - 1 for conductor p^2, (q^2 - 1)/2 for conductor p^3.
    pub fn formal_degree_num_den(&self) -> (u64, u64) {
        match self {
            LocalRepData::DepthZero(r) => (r.p - 1, 1),
            LocalRepData::Simple(r) => (r.p * r.p - 1, 2),
        }
    }

    pub fn conductor_exponent(&self) -> u32 {
        match self {
            LocalRepData::DepthZero(_) => 2,
            LocalRepData::Simple(_) => 3,
        }
    }

    /// Short deterministic label, e.g. `nu10@11` or `t=-1,zeta=i@3`.
    pub fn label(&self) -> String {
        match self {
            LocalRepData::DepthZero(r) => format!("nu{}@{}", r.m, r.p),
            LocalRepData::Simple(r) => {
                let t_disp = if r.t == r.p - 1 && r.p > 2 {
                    "-1".to_string()
                } else {
                    r.t.to_string()
                };
                format!("t={},zeta={}@{}", t_disp, r.zeta, r.p)
            }
        }
    }
}

/// A full tuple of local supercuspidal data for N = S^2 T^3, together with
/// the nebentypus that its central characters multiply out to.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaTuple {
    neb: Nebentypus,
    reps: Vec<LocalRepData>,
}

impl SigmaTuple {
    pub fn new(neb: Nebentypus, mut reps: Vec<LocalRepData>) -> Result<Self, Error> {
        reps.sort_by_key(|r| r.p());
        let tuple = SigmaTuple { neb, reps };
        let shape = tuple.shape_violations();
        if !shape.is_empty() {
            return Err(Error::Validation(shape));
        }
        Ok(tuple)
    }

    pub fn s(&self) -> u64 {
        self.neb.s()
    }

    pub fn t(&self) -> u64 {
        self.neb.t()
    }

    pub fn level(&self) -> u64 {
        self.neb.level()
    }

    pub fn neb(&self) -> &Nebentypus {
        &self.neb
    }

    pub fn reps(&self) -> &[LocalRepData] {
        &self.reps
    }

    pub fn rep_at(&self, p: u64) -> Option<&LocalRepData> {
        self.reps.iter().find(|r| r.p() == p)
    }

    pub fn label(&self) -> String {
        self.reps
            .iter()
            .map(|r| r.label())
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Structural violations only (shape and arity); see
    /// [`validate_tuple`] for the full check.
    fn shape_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let s_primes: Vec<u64> = factorize(self.s()).primes().collect();
        let t_primes: Vec<u64> = factorize(self.t()).primes().collect();
        for &p in &s_primes {
            match self.rep_at(p) {
                Some(LocalRepData::DepthZero(_)) => {}
                _ => out.push(Violation::WrongKind {
                    p,
                    want_conductor: 2,
                }),
            }
        }
        for &p in &t_primes {
            match self.rep_at(p) {
                Some(LocalRepData::Simple(_)) => {}
                _ => out.push(Violation::WrongKind {
                    p,
                    want_conductor: 3,
                }),
            }
        }
        if self.reps.len() != s_primes.len() + t_primes.len() {
            out.push(Violation::ExtraneousRep);
        }
        out
    }
}

/// A reason a (tuple, weight) pair is not admissible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A prime of N is missing its local datum or has the wrong conductor.
    WrongKind { p: u64, want_conductor: u32 },
    /// A rep was supplied at a prime not dividing N.
    ExtraneousRep,
    /// nu is not primitive.
    NotPrimitive { p: u64, m: u64 },
    /// The local datum's central character does not match omega_p.
    CentralCharMismatch { p: u64 },
    /// omega'(-1) != (-1)^k.
    Parity { k: u32, parity: i32 },
    /// N in {4, 8} admits no odd-weight nebentypus.
    K2N2 { n: u64, k: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongKind { p, want_conductor } => {
                write!(f, "p = {p} needs a local rep of conductor p^{want_conductor}")
            }
            Violation::ExtraneousRep => write!(f, "tuple has a rep at a prime not dividing N"),
            Violation::NotPrimitive { p, m } => {
                write!(f, "nu_{m} at p = {p} is not primitive")
            }
            Violation::CentralCharMismatch { p } => {
                write!(f, "central character mismatch at p = {p}")
            }
            Violation::Parity { k, parity } => {
                write!(
                    f,
                    "omega'(-1) = {parity} but (-1)^k = {}",
                    if k % 2 == 0 { 1 } else { -1 }
                )
            }
            Violation::K2N2 { n, k } => {
                write!(f, "k2N2: N = {n} admits no character with odd weight k = {k}")
            }
        }
    }
}

/// All depth zero supercuspidals of G(Q_p) with central character omega_p,
/// one representative per conjugate pair, sorted by exponent.
pub fn enumerate_depth_zero(ctx: &Arc<Fp2Context>, neb: &Nebentypus) -> Vec<DepthZeroRep> {
    let p = ctx.p();
    let order = ctx.group_order();
    let chi = neb.local(p).expect("p divides N");
    let g = crate::arith::primitive_root(p);
    let target = chi.value(g as i64);
    let mut out = Vec::new();
    for m in 1..order {
        if m % (p + 1) == 0 {
            continue; // imprimitive
        }
        let partner = m * p % order;
        if partner < m {
            continue; // keep the smaller exponent of each conjugate pair
        }
        let nu = FiniteChar::new(ctx.clone(), m);
        if p == 2 || nu.value_rou((g, 0)) == target {
            out.push(DepthZeroRep { p, m });
        }
    }
    out
}

/// All simple supercuspidals of G(Q_p) with central character omega_p:
/// for each t in F_p^*, both square roots zeta of omega_p(t p).
pub fn enumerate_simple(p: u64, neb: &Nebentypus) -> Result<Vec<SimpleRep>, Error> {
    let chi = neb
        .local(p)
        .ok_or_else(|| Error::Invalid(format!("p = {p} does not divide N")))?;
    let w_at_p = neb.omega_p_at_p(p)?;
    let mut out = Vec::new();
    for t in 1..p {
        let square = chi.value(t as i64).mul(&w_at_p);
        for zeta in square.sqrt_branches() {
            out.push(SimpleRep { p, t, zeta });
        }
    }
    Ok(out)
}

/// The local root number (Atkin-Lehner sign). Simple supercuspidals carry
/// it as the parameter zeta. For depth zero it is only available with
/// trivial central character: -(-1)^{(q+1)/r} with r the order of nu (odd
/// q), and -1 for q = 2.
pub fn root_number(rep: &LocalRepData, neb: &Nebentypus) -> Option<RootOfUnity> {
    match rep {
        LocalRepData::Simple(r) => Some(r.zeta),
        LocalRepData::DepthZero(r) => {
            let chi = neb.local(r.p)?;
            if !chi.is_trivial() {
                return None;
            }
            if r.p == 2 {
                return Some(RootOfUnity::minus_one());
            }
            let order = (r.p * r.p - 1) / gcd_u64(r.m, r.p * r.p - 1);
            let s = (r.p + 1) / order;
            Some(if s % 2 == 0 {
                RootOfUnity::minus_one()
            } else {
                RootOfUnity::one()
            })
        }
    }
}

/// The global root number i^k prod_p eps_p, when every local sign is
/// available.
pub fn global_root_number(k: u32, tuple: &SigmaTuple) -> Option<RootOfUnity> {
    let mut eps = RootOfUnity::i_power(k as i64);
    for rep in tuple.reps() {
        eps = eps.mul(&root_number(rep, tuple.neb())?);
    }
    Some(eps)
}

/// Number of depth zero supercuspidals of G(Q_q) with trivial central
/// character and root number eps.
pub fn count_by_root_number(q: u64, eps: i32) -> u64 {
    assert!(eps == 1 || eps == -1);
    if q == 2 {
        return if eps == 1 { 0 } else { 1 };
    }
    match (q % 4, eps) {
        (1, _) => (q - 1) / 4,
        (3, 1) => (q + 1) / 4,
        (3, -1) => (q - 3) / 4,
        _ => unreachable!("q is an odd prime or 2"),
    }
}

/// Full admissibility check of a (tuple, weight) pair. Returns the list of
/// violations; empty means admissible.
pub fn validate_tuple(tuple: &SigmaTuple, k: u32) -> Vec<Violation> {
    let mut out = tuple.shape_violations();
    let neb = tuple.neb();
    for rep in tuple.reps() {
        match rep {
            LocalRepData::DepthZero(r) => {
                let ctx = Fp2Context::shared(r.p);
                let nu = FiniteChar::new(ctx.clone(), r.m);
                if !nu.is_primitive() {
                    out.push(Violation::NotPrimitive { p: r.p, m: r.m });
                }
                let chi = neb.local(r.p).expect("checked by shape");
                let g = crate::arith::primitive_root(r.p);
                if r.p > 2 && nu.value_rou((g, 0)) != chi.value(g as i64) {
                    out.push(Violation::CentralCharMismatch { p: r.p });
                }
            }
            LocalRepData::Simple(r) => {
                if r.t == 0 || r.t >= r.p {
                    out.push(Violation::CentralCharMismatch { p: r.p });
                    continue;
                }
                let chi = neb.local(r.p).expect("checked by shape");
                match neb.omega_p_at_p(r.p) {
                    Ok(w) => {
                        let want = chi.value(r.t as i64).mul(&w);
                        if r.zeta.mul(&r.zeta) != want {
                            out.push(Violation::CentralCharMismatch { p: r.p });
                        }
                    }
                    Err(_) => out.push(Violation::CentralCharMismatch { p: r.p }),
                }
            }
        }
    }
    let n = tuple.level();
    if (n == 4 || n == 8) && k % 2 == 1 {
        out.push(Violation::K2N2 { n, k });
    }
    let parity = neb.parity();
    let want = if k % 2 == 0 { 1 } else { -1 };
    if parity != want {
        out.push(Violation::Parity { k, parity });
    }
    out
}

/// All tuples for the level and nebentypus, as the cartesian product of the
/// per-prime enumerations, in deterministic order.
pub fn enumerate_tuples(neb: &Nebentypus) -> Result<Vec<SigmaTuple>, Error> {
    let mut per_prime: Vec<Vec<LocalRepData>> = Vec::new();
    for p in factorize(neb.s()).primes() {
        let ctx = Fp2Context::shared(p);
        per_prime.push(
            enumerate_depth_zero(&ctx, neb)
                .into_iter()
                .map(LocalRepData::DepthZero)
                .collect(),
        );
    }
    for p in factorize(neb.t()).primes() {
        per_prime.push(
            enumerate_simple(p, neb)?
                .into_iter()
                .map(LocalRepData::Simple)
                .collect(),
        );
    }
    let mut tuples = vec![Vec::new()];
    for options in &per_prime {
        let mut next = Vec::with_capacity(tuples.len() * options.len());
        for stem in &tuples {
            for opt in options {
                let mut reps = stem.clone();
                reps.push(opt.clone());
                next.push(reps);
            }
        }
        tuples = next;
    }
    tuples
        .into_iter()
        .map(|reps| SigmaTuple::new(neb.clone(), reps))
        .collect()
}

/// Serialized form of a tuple together with a weight: exact integers only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TupleJson {
    pub level: u64,
    pub weight: u32,
    /// Local character exponents of the nebentypus, keyed by prime.
    pub neb: std::collections::BTreeMap<u64, u64>,
    pub reps: Vec<RepJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepJson {
    DepthZero {
        p: u64,
        m: u64,
    },
    Simple {
        p: u64,
        t: u64,
        zeta_num: u64,
        #[serde(rename = "zeta_den_L")]
        zeta_den: u64,
    },
}

pub fn tuple_to_json(tuple: &SigmaTuple, k: u32) -> TupleJson {
    TupleJson {
        level: tuple.level(),
        weight: k,
        neb: tuple
            .neb()
            .locals()
            .iter()
            .map(|lc| (lc.p, lc.exponent))
            .collect(),
        reps: tuple
            .reps()
            .iter()
            .map(|r| match r {
                LocalRepData::DepthZero(d) => RepJson::DepthZero { p: d.p, m: d.m },
                LocalRepData::Simple(s) => RepJson::Simple {
                    p: s.p,
                    t: s.t,
                    zeta_num: s.zeta.numerator(),
                    zeta_den: s.zeta.order(),
                },
            })
            .collect(),
    }
}

pub fn tuple_from_json(json: &TupleJson) -> Result<(SigmaTuple, u32), Error> {
    let fac = factorize(json.level);
    let mut s = 1u64;
    let mut t = 1u64;
    for &(p, e) in fac.factors() {
        match e {
            2 => s *= p,
            3 => t *= p,
            _ => {
                return Err(Error::Invalid(format!(
                    "level {} is not of the form S^2 T^3",
                    json.level
                )))
            }
        }
    }
    let exps: Vec<(u64, u64)> = json.neb.iter().map(|(&p, &e)| (p, e)).collect();
    let neb = Nebentypus::from_exponents(s, t, &exps)?;
    let reps = json
        .reps
        .iter()
        .map(|r| match *r {
            RepJson::DepthZero { p, m } => LocalRepData::DepthZero(DepthZeroRep { p, m }),
            RepJson::Simple {
                p,
                t,
                zeta_num,
                zeta_den,
            } => LocalRepData::Simple(SimpleRep {
                p,
                t,
                zeta: RootOfUnity::new(zeta_num as i64, zeta_den),
            }),
        })
        .collect();
    Ok((SigmaTuple::new(neb, reps)?, json.weight))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trivial(s: u64, t: u64) -> Nebentypus {
        Nebentypus::trivial(s, t).unwrap()
    }

    #[test]
    fn depth_zero_enumeration_counts() {
        // p = 11, trivial: exponents 10,...,50.
        let neb = trivial(11, 1);
        let ctx = Fp2Context::shared(11);
        let reps = enumerate_depth_zero(&ctx, &neb);
        let ms: Vec<u64> = reps.iter().map(|r| r.m).collect();
        assert_eq!(ms, vec![10, 20, 30, 40, 50]);

        let neb3 = trivial(3, 1);
        assert_eq!(enumerate_depth_zero(&Fp2Context::shared(3), &neb3).len(), 1);
        let neb2 = trivial(2, 1);
        assert_eq!(enumerate_depth_zero(&Fp2Context::shared(2), &neb2).len(), 1);
    }

    #[test]
    fn depth_zero_count_formula() {
        // |enumeration| = P_omega / 2; for trivial omega and odd p this is
        // (p-1)/2, and summing the root-number counts recovers it.
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23] {
            let neb = trivial(p, 1);
            let ctx = Fp2Context::shared(p);
            let n = enumerate_depth_zero(&ctx, &neb).len() as u64;
            assert_eq!(n, (p - 1) / 2);
            assert_eq!(count_by_root_number(p, 1) + count_by_root_number(p, -1), n);
        }
        assert_eq!(count_by_root_number(2, 1) + count_by_root_number(2, -1), 1);
    }

    #[test]
    fn depth_zero_nontrivial_central_char_counts() {
        // P_omega = q+1 when omega^((q-1)/2) is nontrivial, else q-1.
        for p in [5u64, 7, 11, 13] {
            for e in 1..p - 1 {
                let neb = Nebentypus::from_exponents(p, 1, &[(p, e)]).unwrap();
                let ctx = Fp2Context::shared(p);
                let n = enumerate_depth_zero(&ctx, &neb).len() as u64;
                // omega^((q-1)/2) trivial iff e even.
                let expect = if e % 2 == 0 { (p - 1) / 2 } else { (p + 1) / 2 };
                assert_eq!(n, expect, "p = {p}, exponent {e}");
            }
        }
    }

    #[test]
    fn conjugate_pairs_not_double_counted() {
        let neb = trivial(13, 1);
        let ctx = Fp2Context::shared(13);
        let reps = enumerate_depth_zero(&ctx, &neb);
        for r in &reps {
            let partner = r.m * 13 % 168;
            assert!(r.m <= partner);
            assert!(!reps.iter().any(|o| o.m == partner && o.m != r.m));
        }
    }

    #[test]
    fn simple_enumeration() {
        let neb = trivial(1, 3);
        let reps = enumerate_simple(3, &neb).unwrap();
        assert_eq!(reps.len(), 4);
        for r in &reps {
            assert!(r.zeta.as_sign().is_some(), "trivial case has zeta = +-1");
        }
        let neb2 = trivial(1, 2);
        assert_eq!(enumerate_simple(2, &neb2).unwrap().len(), 2);

        // Quadratic character at 3: for t = -1 = 2 the square roots are +-i.
        let nebq = Nebentypus::quadratic(1, 3, 3).unwrap();
        let reps = enumerate_simple(3, &nebq).unwrap();
        let at_t2: Vec<&SimpleRep> = reps.iter().filter(|r| r.t == 2).collect();
        assert_eq!(at_t2.len(), 2);
        for r in at_t2 {
            assert!(r.zeta == RootOfUnity::i_power(1) || r.zeta == RootOfUnity::i_power(3));
        }
    }

    #[test]
    fn simple_zeta_squares_match() {
        for (s, t) in [(1u64, 6u64), (11, 2), (1, 15)] {
            let neb = trivial(s, t);
            for p in factorize(t).primes() {
                for r in enumerate_simple(p, &neb).unwrap() {
                    let w = neb
                        .local(p)
                        .unwrap()
                        .value(r.t as i64)
                        .mul(&neb.omega_p_at_p(p).unwrap());
                    assert_eq!(r.zeta.mul(&r.zeta), w);
                }
            }
        }
    }

    #[test]
    fn root_numbers_depth_zero() {
        let neb = trivial(11, 1);
        let sign = |m: u64| {
            root_number(&LocalRepData::DepthZero(DepthZeroRep { p: 11, m }), &neb)
                .unwrap()
                .as_sign()
                .unwrap()
        };
        // Alternating +,-,+,-,+ over nu_10..nu_50.
        assert_eq!(
            (1..=5).map(|w| sign(10 * w)).collect::<Vec<_>>(),
            vec![1, -1, 1, -1, 1]
        );
        // Nontrivial central character: unavailable.
        let nebq = Nebentypus::from_exponents(11, 1, &[(11, 5)]).unwrap();
        let ctx = Fp2Context::shared(11);
        let reps = enumerate_depth_zero(&ctx, &nebq);
        assert!(root_number(&LocalRepData::DepthZero(reps[0].clone()), &nebq).is_none());
    }

    #[test]
    fn count_by_root_number_table() {
        assert_eq!(count_by_root_number(11, 1), 3);
        assert_eq!(count_by_root_number(11, -1), 2);
        assert_eq!(count_by_root_number(2, 1), 0);
        assert_eq!(count_by_root_number(2, -1), 1);
        assert_eq!(count_by_root_number(13, 1), 3);
        assert_eq!(count_by_root_number(13, -1), 3);
    }

    #[test]
    fn global_root_numbers() {
        // N = 27, k = 5, t = -1, zeta = i: eps = i^5 * i = -1.
        let neb = Nebentypus::quadratic(1, 3, 3).unwrap();
        let tuple = SigmaTuple::new(
            neb,
            vec![LocalRepData::Simple(SimpleRep {
                p: 3,
                t: 2,
                zeta: RootOfUnity::i_power(1),
            })],
        )
        .unwrap();
        assert_eq!(
            global_root_number(5, &tuple).unwrap(),
            RootOfUnity::minus_one()
        );
        // N = 8, k = 6, zeta = -1: (-1)^3 * (-1) = 1.
        let neb8 = trivial(1, 2);
        let tuple8 = SigmaTuple::new(
            neb8,
            vec![LocalRepData::Simple(SimpleRep {
                p: 2,
                t: 1,
                zeta: RootOfUnity::minus_one(),
            })],
        )
        .unwrap();
        assert_eq!(global_root_number(6, &tuple8).unwrap(), RootOfUnity::one());
    }

    #[test]
    fn validation() {
        // N = 8, k = 5: k2N2 violation.
        let neb = trivial(1, 2);
        let tuple = SigmaTuple::new(
            neb,
            vec![LocalRepData::Simple(SimpleRep {
                p: 2,
                t: 1,
                zeta: RootOfUnity::one(),
            })],
        )
        .unwrap();
        let violations = validate_tuple(&tuple, 5);
        assert!(violations.iter().any(|v| matches!(v, Violation::K2N2 { .. })));

        // N = 27, k = 5, quadratic character, (t, zeta) = (1, 1): admissible.
        let nebq = Nebentypus::quadratic(1, 3, 3).unwrap();
        let good = SigmaTuple::new(
            nebq.clone(),
            vec![LocalRepData::Simple(SimpleRep {
                p: 3,
                t: 1,
                zeta: RootOfUnity::one(),
            })],
        )
        .unwrap();
        assert!(validate_tuple(&good, 5).is_empty());

        // Same tuple at k = 4: parity violation.
        let violations = validate_tuple(&good, 4);
        assert!(violations.iter().any(|v| matches!(v, Violation::Parity { .. })));

        // Wrong zeta: central character mismatch.
        let bad = SigmaTuple::new(
            nebq,
            vec![LocalRepData::Simple(SimpleRep {
                p: 3,
                t: 2,
                zeta: RootOfUnity::one(), // should be +-i
            })],
        )
        .unwrap();
        assert!(validate_tuple(&bad, 5)
            .iter()
            .any(|v| matches!(v, Violation::CentralCharMismatch { p: 3 })));
    }

    #[test]
    fn tuple_enumeration_and_json() {
        let neb = trivial(11, 2);
        let tuples = enumerate_tuples(&neb).unwrap();
        assert_eq!(tuples.len(), 10); // 5 depth zero at 11 times 2 simple at 2
        let json = tuple_to_json(&tuples[3], 6);
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.contains("zeta_den_L"));
        let parsed: TupleJson = serde_json::from_str(&text).unwrap();
        let (back, k) = tuple_from_json(&parsed).unwrap();
        assert_eq!(k, 6);
        assert_eq!(back, tuples[3]);
    }
}
