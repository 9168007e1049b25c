//! Specialized dimension and bias formulas, implemented from the theorem
//! statements alone. These never call the trace engine; the engine is
//! checked against them, so a shared bug would defeat their purpose.
//!
//! Conventions: h(-m) denotes the class number of Q(sqrt(-m)); epsilon is
//! the global root number; subscripted constants from the statements (the
//! "present only when ..." factors) are explicit conditionals here.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::arith::{class_number, factorize, fundamental_discriminant, gcd_u64};
use crate::cyclotomic::RootOfUnity;
use crate::local_reps::{root_number, LocalRepData, SigmaTuple};
use crate::Error;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Class number of the imaginary quadratic field Q(sqrt(-m)), m > 0.
pub fn field_class_number(m: u64) -> u64 {
    let (d_e, _) = fundamental_discriminant(-4 * (m as i64)).expect("-4m is a discriminant");
    class_number(d_e).expect("fundamental by construction")
}

/// Identity (main) term (k-1)/12 prod_{p|S}(p-1) prod_{p|T}(p^2-1)/2.
pub fn main_term(s: u64, t: u64, k: u32) -> BigRational {
    let mut acc = rat(k as i64 - 1, 12);
    for p in factorize(s).primes() {
        acc *= rat(p as i64 - 1, 1);
    }
    for p in factorize(t).primes() {
        acc *= rat((p * p) as i64 - 1, 2);
    }
    acc
}

/// Dimension for odd weight when T > 3: the elliptic terms vanish and the
/// identity term is everything.
pub fn dim_kodd(s: u64, t: u64, k: u32) -> Result<BigRational, Error> {
    if k % 2 == 0 || t <= 3 {
        return Err(Error::Invalid(
            "odd-weight closed form needs k odd and T > 3".into(),
        ));
    }
    Ok(main_term(s, t, k))
}

/// Power-of-two coefficient of the h(-T) term, by T mod 8.
fn b_t(t: u64) -> BigRational {
    if t % 2 == 0 {
        rat(1, 4)
    } else if t % 4 == 1 {
        rat(1, 2)
    } else if t % 8 == 7 {
        rat(1, 1)
    } else {
        rat(2, 1) // T = 3 mod 8
    }
}

/// Coefficient of the h(-M) term for even T = 2M, by M mod 8.
fn j_m(m: u64) -> BigRational {
    if m % 4 == 1 {
        rat(1, 4)
    } else if m % 8 == 3 {
        rat(-3, 2)
    } else {
        rat(0, 1) // M = 7 mod 8
    }
}

/// Root-number bias coefficient by T mod 8.
pub fn c_t(t: u64) -> BigRational {
    match t % 8 {
        1 | 2 | 5 | 6 => rat(1, 2),
        7 => rat(1, 1),
        3 => rat(2, 1),
        _ => unreachable!("T squarefree is never 0 or 4 mod 8"),
    }
}

/// The weight pattern 1, -1, 0 for k = 0, 2, 4 mod 6.
pub fn b_k(k: u32) -> i64 {
    if k % 6 == 0 {
        1
    } else if k % 6 == 2 {
        -1
    } else {
        0
    }
}

/// Dimension at level 8 (the parameter t is forced to 1; central character
/// trivial): floor(k/8), plus (1 + eps)/2 when k = 4, 6 mod 8.
pub fn dim_n8(k: u32, zeta: i32) -> u64 {
    assert!(zeta == 1 || zeta == -1);
    if k % 2 == 1 {
        return 0;
    }
    let eps = if (k / 2) % 2 == 0 { zeta } else { -zeta };
    let base = (k / 8) as u64;
    match k % 8 {
        0 | 2 => base,
        _ => base + ((1 + eps) / 2) as u64,
    }
}

/// Dimension at level 27 from the case table. `t` is +-1 and zeta the exact
/// local root number; eps = i^k zeta must be real whenever t = -1.
pub fn dim_n27(k: u32, t: i64, zeta: RootOfUnity) -> Result<u64, Error> {
    assert!(t == 1 || t == -1);
    let floor = (k / 3) as i64;
    if t == 1 || k % 6 == 1 {
        return Ok(floor as u64);
    }
    let eps = RootOfUnity::i_power(k as i64)
        .mul(&zeta)
        .as_sign()
        .ok_or_else(|| Error::Invalid("t = -1 requires eps = i^k zeta real".into()))?
        as i64;
    let value = match k % 6 {
        0 | 3 => floor + (eps - 1) / 2,
        2 => floor + (eps + 1) / 2,
        4 => floor + eps,
        5 => floor + (1 - eps) / 2,
        _ => unreachable!(),
    };
    Ok(value as u64)
}

/// Whether -c p t_p / T is a square mod p for every odd p | T (the
/// indicator Delta_i with c = 2^{i-1}).
fn delta_indicator(t: u64, params: &[(u64, u64)], c: u64) -> bool {
    params.iter().all(|&(p, tp)| {
        if p == 2 {
            return true;
        }
        let u = (c % p) * (t / p % p) % p; // c T / p mod p
        let target = (p - tp % p) % p * crate::arith::inv_mod(u, p) % p;
        crate::arith::legendre(target as i64, p) == 1
    })
}

/// Dimension at level T^3 (T > 3 squarefree, trivial central characters,
/// k >= 4 even): main term plus the two class-number corrections.
pub fn dim_t3(tuple: &SigmaTuple, k: u32) -> Result<BigRational, Error> {
    let t = tuple.t();
    if tuple.s() != 1 || t <= 3 || !tuple.neb().is_trivial() {
        return Err(Error::Invalid(
            "closed form requires level T^3, T > 3, trivial central character".into(),
        ));
    }
    if k % 2 == 1 || k < 4 {
        return Err(Error::Invalid("closed form requires k >= 4 even".into()));
    }
    let mut params: Vec<(u64, u64)> = Vec::new();
    let mut eps_sign = if (k / 2) % 2 == 0 { 1i64 } else { -1 };
    let mut zeta2 = 1i64;
    for rep in tuple.reps() {
        if let LocalRepData::Simple(sr) = rep {
            let z = sr
                .zeta
                .as_sign()
                .ok_or_else(|| Error::Invalid("trivial case requires zeta = +-1".into()))?
                as i64;
            eps_sign *= z;
            if sr.p == 2 {
                zeta2 = z;
            }
            params.push((sr.p, sr.t));
        }
    }
    let mut total = main_term(1, t, k);
    if delta_indicator(t, &params, 1) {
        total += b_t(t) * rat(eps_sign * field_class_number(t) as i64, 1);
    }
    if t % 2 == 0 {
        let m = t / 2;
        if delta_indicator(t, &params, 2) {
            let three = if m == 3 { 3 } else { 1 };
            total += j_m(m) * rat(eps_sign * zeta2 * field_class_number(m) as i64, three);
        }
    }
    Ok(total)
}

/// The exact factor -conj(nu(alpha)) - conj(nu^p(alpha)) for alpha^2 = -1
/// in F_{p^2}, p = 3 mod 4: nu_m(alpha) = e(m/4), so the value depends only
/// on m mod 4 and is rational.
fn a1_factor(m: u64) -> i64 {
    match m % 4 {
        0 => -2,
        2 => 2,
        _ => 0,
    }
}

/// The exact factor -conj(nu(beta)) - conj(nu^p(beta)) for beta of order 6
/// (or 3 when p = 2) in F_{p^2}, p = 2 mod 3: -2 Re(e(m/6)), rational.
fn a2_factor(p: u64, m: u64) -> i64 {
    if p == 2 {
        // Unique primitive character class; the two cube-root values sum
        // to -1 either way.
        return 1;
    }
    match m % 6 {
        0 => -2,
        1 | 5 => -1,
        2 | 4 => 1,
        3 => 2,
        _ => unreachable!(),
    }
}

/// Dimension at level S^2 (depth zero tuple, general nebentypus):
/// main term + A_1 + A_2.
pub fn dim_s2(tuple: &SigmaTuple, k: u32) -> Result<BigRational, Error> {
    let s = tuple.s();
    if tuple.t() != 1 || s <= 1 {
        return Err(Error::Invalid("closed form requires level S^2".into()));
    }
    let want = if k % 2 == 0 { 1 } else { -1 };
    if tuple.neb().parity() != want {
        return Err(Error::Invalid("omega'(-1) must equal (-1)^k".into()));
    }
    let mut total = main_term(s, 1, k);

    // A_1, supported on even k with every odd p | S congruent to 3 mod 4.
    if k % 2 == 0 {
        let mut a1 = rat(1, 4);
        if (s + 1 + (k as u64) / 2) % 2 == 1 {
            a1 = -a1;
        }
        for rep in tuple.reps() {
            if let LocalRepData::DepthZero(dr) = rep {
                if dr.p == 2 {
                    continue;
                }
                let f = if dr.p % 4 == 3 { a1_factor(dr.m) } else { 0 };
                a1 *= rat(f, 1);
            }
        }
        total += a1;
    }

    // A_2, supported on k = 0, 2 mod 3 with every p | S, p != 3, congruent
    // to 2 mod 3.
    if k % 3 != 1 {
        let mut a2 = rat(1, 3);
        if matches!(k % 6, 2 | 3) {
            a2 = -a2;
        }
        if s % 3 == 0 {
            let w3m1 = tuple
                .neb()
                .local(3)
                .expect("3 | S")
                .value(-1)
                .as_sign()
                .expect("quadratic value") as i64;
            a2 *= rat(-w3m1, 1);
        }
        for rep in tuple.reps() {
            if let LocalRepData::DepthZero(dr) = rep {
                if dr.p == 3 {
                    continue;
                }
                let f = if dr.p % 3 == 2 { a2_factor(dr.p, dr.m) } else { 0 };
                a2 *= rat(f, 1);
            }
        }
        total += a2;
    }
    Ok(total)
}

/// B(nu_p) from the trivial-central-character statement: -2 when the order
/// of nu_p divides (p+1)/3, else 1. Only meaningful for p = 2 mod 3.
pub fn b_of_nu(p: u64, m: u64) -> i64 {
    if p == 2 {
        return 1;
    }
    let order = (p * p - 1) / gcd_u64(m, p * p - 1);
    if (p + 1) % 3 == 0 && (p + 1) / 3 % order == 0 {
        -2
    } else {
        1
    }
}

/// Dimension at level S^2 with trivial central character and k even, in the
/// root-number form: main + D_4 eps/4 prod 2 + D_3 b(k) (-1)^[3|S]/3 prod B.
pub fn dim_s2_trivial(tuple: &SigmaTuple, k: u32) -> Result<BigRational, Error> {
    let s = tuple.s();
    if tuple.t() != 1 || !tuple.neb().is_trivial() || k % 2 == 1 {
        return Err(Error::Invalid(
            "trivial-character closed form requires level S^2 and even k".into(),
        ));
    }
    let mut total = main_term(s, 1, k);
    let d4 = factorize(s).primes().all(|p| p % 4 != 1);
    let d3 = factorize(s).primes().all(|p| p % 3 != 1);
    if d4 {
        let mut eps = if (k / 2) % 2 == 0 { 1i64 } else { -1 };
        let mut doubles = 1i64;
        for rep in tuple.reps() {
            eps *= root_number(rep, tuple.neb())
                .expect("trivial central character")
                .as_sign()
                .expect("real sign") as i64;
            if rep.p() != 2 {
                doubles *= 2;
            }
        }
        total += rat(eps * doubles, 4);
    }
    if d3 {
        let mut prod = 1i64;
        for rep in tuple.reps() {
            if let LocalRepData::DepthZero(dr) = rep {
                if dr.p != 3 {
                    prod *= b_of_nu(dr.p, dr.m);
                }
            }
        }
        let sign3 = if s % 3 == 0 { -1 } else { 1 };
        total += rat(b_k(k) * sign3 * prod, 3);
    }
    Ok(total)
}

/// Dimension of the twist-minimal subspace at level S^2, k even.
pub fn smin_dim(s: u64, k: u32) -> Result<BigRational, Error> {
    if s <= 1 || !factorize(s).is_squarefree() || k % 2 == 1 {
        return Err(Error::Invalid(
            "twist-minimal dimension requires squarefree S > 1 and even k".into(),
        ));
    }
    let d4 = factorize(s).primes().all(|p| p % 4 != 1);
    let d3 = factorize(s).primes().all(|p| p % 3 != 1);
    let mut total = rat(k as i64 - 1, 12);
    for p in factorize(s).primes() {
        if p != 2 {
            total *= rat(((p - 1) * (p - 1)) as i64, 2);
        }
    }
    if d4 {
        let mut term = rat(1, 4);
        let sign = (if s % 2 == 0 { 1 } else { 0 }) + k / 2;
        if sign % 2 == 1 {
            term = -term;
        }
        for p in factorize(s).primes() {
            if p != 2 {
                term *= rat(2, 1);
            }
        }
        total += term;
    }
    if d3 {
        let mut term = rat(b_k(k), 3);
        if s % 3 == 0 {
            term = -term;
        }
        let s_prime = s / gcd_u64(s, 6);
        for _ in factorize(s_prime).primes() {
            term *= rat(2, 1);
        }
        total += term;
    }
    Ok(total)
}

/// Root-number bias Delta(S^2, k) = dim^+ - dim^- on the twist-minimal
/// space: Delta_M + Delta_{A1} + Delta_{A2}.
pub fn sbias(s: u64, k: u32) -> Result<BigRational, Error> {
    if s <= 1 || !factorize(s).is_squarefree() || k % 2 == 1 {
        return Err(Error::Invalid(
            "bias formula requires squarefree S > 1 and even k".into(),
        ));
    }
    let d4 = factorize(s).primes().all(|p| p % 4 != 1);
    let d3 = factorize(s).primes().all(|p| p % 3 != 1);
    let phi_s: i64 = factorize(s).primes().map(|p| p as i64 - 1).product();
    let mut total = BigRational::zero();
    if d4 {
        let mut delta_m = rat(k as i64 - 1, 12) * rat(phi_s, 1);
        let sign = k / 2 + if s % 2 == 0 { 1 } else { 0 };
        if sign % 2 == 1 {
            delta_m = -delta_m;
        }
        total += delta_m;
        total += rat(phi_s, 4);
    }
    if d3 && matches!(k % 6, 0 | 2) {
        let s_prime = s / gcd_u64(s, 6);
        let sp = factorize(s_prime);
        let omega0 = if sp.primes().any(|p| p % 12 == 5) {
            0i64
        } else {
            1i64 << sp.omega()
        };
        let mu_s = factorize(s).moebius();
        let mut term = rat(mu_s * omega0, 3);
        if matches!(k % 12, 6 | 8) {
            term = -term;
        }
        total += term;
    }
    Ok(total)
}

/// The two root-number dimensions of the full new space at level T^3
/// (T > 3 squarefree, k >= 4 even): the plus space first.
pub fn pq_dims(t: u64, k: u32) -> Result<(BigRational, BigRational), Error> {
    if t <= 3 || !factorize(t).is_squarefree() || k % 2 == 1 || k < 4 {
        return Err(Error::Invalid(
            "root-number split requires squarefree T > 3 and k >= 4 even".into(),
        ));
    }
    let mut half_main = rat(k as i64 - 1, 24);
    for p in factorize(t).primes() {
        half_main *= rat(((p - 1) * (p - 1) * (p + 1)) as i64, 1);
    }
    let half_bias = pq_bias(t, k)? / rat(2, 1);
    Ok((half_main.clone() + half_bias.clone(), half_main - half_bias))
}

/// dim^+ - dim^- = c_T phi(T) h(-T) at level T^3.
pub fn pq_bias(t: u64, k: u32) -> Result<BigRational, Error> {
    if t <= 3 || !factorize(t).is_squarefree() || k % 2 == 1 || k < 4 {
        return Err(Error::Invalid(
            "root-number split requires squarefree T > 3 and k >= 4 even".into(),
        ));
    }
    let phi: i64 = factorize(t).primes().map(|p| p as i64 - 1).product();
    Ok(c_t(t) * rat(phi * field_class_number(t) as i64, 1))
}

/// The signed sums B(S)^+/- over tuples with nonarchimedean sign +-1, and
/// the tuple counts |H_S^+/-|, from the two counting lemmas. Requires
/// D_3(S) = 1 for the B sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiasLemmas {
    pub b_plus: i64,
    pub b_minus: i64,
    pub h_plus: u64,
    pub h_minus: u64,
}

fn b_pm(s: u64) -> (i64, i64) {
    if s == 2 {
        return (0, 1);
    }
    if s == 3 {
        return (1, 0);
    }
    if s % 2 == 0 {
        let (p, m) = b_pm(s / 2);
        return (m, p);
    }
    if s % 3 == 0 {
        return b_pm(s / 3);
    }
    // gcd(S, 6) = 1 with all p = 5 mod 6.
    let fac = factorize(s);
    let omega = fac.omega();
    let pow = 1i64 << omega;
    let plus = if fac.primes().any(|p| p % 12 == 5) {
        pow / 2
    } else if omega % 2 == 0 {
        pow
    } else {
        0
    };
    (plus, pow - plus)
}

pub fn bias_lemmas(s: u64) -> Result<BiasLemmas, Error> {
    let fac = factorize(s);
    if s <= 1 || !fac.is_squarefree() {
        return Err(Error::Invalid("requires squarefree S > 1".into()));
    }
    if fac.primes().any(|p| p % 3 == 1) {
        return Err(Error::Invalid("B sums require D_3(S) = 1".into()));
    }
    let (b_plus, b_minus) = b_pm(s);
    // Tuple counts: total = prod over odd p of (p-1)/2, and for D_4(S) = 1
    // the two signs differ by exactly (-1)^[2|S].
    let total: u64 = fac
        .primes()
        .filter(|&p| p != 2)
        .map(|p| (p - 1) / 2)
        .product();
    let d4 = fac.primes().all(|p| p % 4 != 1);
    let (h_plus, h_minus) = if !d4 {
        (total / 2, total / 2)
    } else {
        let bump = if s % 2 == 0 { -1i64 } else { 1 };
        (
            ((total as i64 + bump) / 2) as u64,
            ((total as i64 - bump) / 2) as u64,
        )
    };
    Ok(BiasLemmas {
        b_plus,
        b_minus,
        h_plus,
        h_minus,
    })
}

/// Full new-space dimensions recovered as corollaries: levels 8 and 27, and
/// (k-1)/12 prod (p-1)^2 (p+1) for T > 3.
pub fn dim_new_t3(t: u64, k: u32) -> Result<BigRational, Error> {
    if !factorize(t).is_squarefree() || t <= 1 || k % 2 == 1 {
        return Err(Error::Invalid("requires squarefree T > 1, even k".into()));
    }
    match t.cmp(&3) {
        Ordering::Less => Ok(rat((k / 4) as i64, 1)), // T = 2: floor(k/4)
        Ordering::Equal => Ok(rat(k as i64 - 1 + (k / 3) as i64, 1)),
        Ordering::Greater => {
            let mut acc = rat(k as i64 - 1, 12);
            for p in factorize(t).primes() {
                acc *= rat(((p - 1) * (p - 1) * (p + 1)) as i64, 1);
            }
            Ok(acc)
        }
    }
}

/// Partial sum over the zeta parameters with the t parameters fixed:
/// (k-1)/12 prod_{p|T} (p^2 - 1).
pub fn gross_sum(t: u64, k: u32) -> BigRational {
    let mut acc = rat(k as i64 - 1, 12);
    for p in factorize(t).primes() {
        acc *= rat((p * p - 1) as i64, 1);
    }
    acc
}
