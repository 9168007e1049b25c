//! Local orbital integral evaluators and the global measure factor.
//!
//! A rational class enters as [[0, -nM], [1, rM]] with determinant nM and
//! trace rM. Its global orbital integral factors as a measure term times
//! local factors: an archimedean one (a ratio of sines, computed here by an
//! integer Lucas recursion so exactness survives), one factor per prime
//! dividing the level (depending on the supercuspidal datum there), and one
//! per prime dividing the discriminant away from the level (a lattice count
//! with a closed form). A brute-force lattice enumeration serves as an
//! independent oracle for the latter.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{inv_mod, is_square_in_qp, sqrt_mod_p, valuation, QuadFieldData};
use crate::cyclotomic::CycNumber;
use crate::local_reps::{DepthZeroRep, SimpleRep};
use crate::residue::{Fp2Context, Nebentypus};
use crate::Error;

/// A rational conjugacy-class representative [[0, -nM], [1, rM]] with its
/// cached quadratic-field invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaClass {
    pub hecke_n: u64,
    pub m_div: u64,
    pub r: u64,
    pub trace: u64,
    pub det: u64,
    pub delta: i64,
    pub quad: QuadFieldData,
}

impl GammaClass {
    pub fn new(hecke_n: u64, m_div: u64, r: u64) -> Result<Self, Error> {
        if hecke_n == 0 || m_div == 0 {
            return Err(Error::Invalid("gamma requires n, M >= 1".into()));
        }
        let trace = r * m_div;
        let det = hecke_n * m_div;
        let delta = (trace * trace) as i64 - 4 * det as i64;
        if delta >= 0 {
            return Err(Error::Invalid(format!(
                "gamma with n={hecke_n}, M={m_div}, r={r} is not elliptic over R"
            )));
        }
        let quad = QuadFieldData::new(delta)?;
        Ok(GammaClass {
            hecke_n,
            m_div,
            r,
            trace,
            det,
            delta,
            quad,
        })
    }

    /// Class with prescribed trace and determinant (M = 1); used for tests
    /// and oracles where the (n, M, r) split is irrelevant.
    pub fn from_trace_det(trace: u64, det: u64) -> Result<Self, Error> {
        GammaClass::new(det, 1, trace)
    }

    /// Characteristic polynomial X^2 - trace X + det evaluated at x, modulo
    /// the given modulus.
    pub fn charpoly_mod(&self, x: u64, modulus: u64) -> u64 {
        let m = modulus as u128;
        let x = x as u128 % m;
        let sq = x * x % m;
        let tr_term = self.trace as u128 % m * x % m;
        (((sq + m - tr_term) % m + self.det as u128 % m) % m) as u64
    }

    pub fn matrix_string(&self) -> String {
        format!("[[0,-{}],[1,{}]]", self.det, self.trace)
    }
}

/// Archimedean factor -sin((k-1) theta)/sin(theta) for the eigenvalue angle
/// theta, computed exactly as -U_{k-1}/det^{(k-2)/2} where U_j is the Lucas
/// sequence U_1 = 1, U_2 = trace, U_j = trace U_{j-1} - det U_{j-2}. For odd
/// k the half-integral power of det contributes an exact square root.
pub fn phi_infty(gamma: &GammaClass, k: u32) -> Result<CycNumber, Error> {
    assert!(k > 2, "weight must exceed 2");
    let tr = BigInt::from(gamma.trace);
    let det = BigInt::from(gamma.det);
    let mut u_prev = BigInt::zero(); // U_0
    let mut u_cur = BigInt::one(); // U_1
    for _ in 2..k {
        let next = &tr * &u_cur - &det * &u_prev;
        u_prev = u_cur;
        u_cur = next;
    }
    let u_k1 = u_cur; // U_{k-1}
    if k % 2 == 0 {
        let denom = BigInt::from(gamma.det).pow((k - 2) / 2);
        Ok(CycNumber::from_rational(BigRational::new(-u_k1, denom)))
    } else {
        // det^{(k-2)/2} = det^{(k-1)/2} / sqrt(det); split det = sq^2 * sf.
        let mut sf = 1u64;
        let mut sq = 1u64;
        for &(p, e) in crate::arith::factorize(gamma.det).factors() {
            if e % 2 == 1 {
                sf *= p;
            }
            sq *= p.pow(e / 2);
        }
        let denom = BigInt::from(gamma.det).pow((k - 1) / 2);
        let scalar = BigRational::new(-u_k1 * BigInt::from(sq), denom);
        Ok(CycNumber::sqrt_squarefree(sf)?.scale(&scalar))
    }
}

/// Local factor at a prime l dividing the discriminant but not the level.
///
/// Hyperbolic over Q_l: l^{v(Delta)/2}. Elliptic: counts the lattice classes
/// preserved by gamma via the order indices, which depends only on whether l
/// ramifies in E (iff l | d_E) and on v_l(b), where Delta = b^2 d_E.
pub fn phi_ell(gamma: &GammaClass, ell: u64) -> u64 {
    let v = valuation(gamma.delta, ell);
    if is_square_in_qp(gamma.delta, ell) {
        return ell.pow(v / 2);
    }
    let e = if gamma.quad.d_e.rem_euclid(ell as i64) == 0 {
        2
    } else {
        1
    };
    let vb = valuation(gamma.quad.b as i64, ell);
    let mut total = e; // j = 0 term
    for j in 1..=vb {
        total += if e == 2 {
            2 * ell.pow(j)
        } else {
            ell.pow(j) + ell.pow(j - 1)
        };
    }
    total
}

/// N_gamma(c, n) = #{b mod p^{n+1} : P_gamma(b) = c p^n mod p^{n+1}}, by
/// direct enumeration.
pub fn count_n_gamma(gamma: &GammaClass, p: u64, c: u64, n: u32) -> u64 {
    assert!(n >= 1);
    n_gamma_row(gamma, p, n)[(c % p) as usize]
}

/// The full row (N_gamma(0, n), ..., N_gamma(p-1, n)).
pub fn n_gamma_row(gamma: &GammaClass, p: u64, n: u32) -> Vec<u64> {
    let modulus = p.pow(n + 1);
    let step = p.pow(n);
    let mut row = vec![0u64; p as usize];
    for b in 0..modulus {
        let v = gamma.charpoly_mod(b, modulus);
        if v % step == 0 {
            row[(v / step) as usize] += 1;
        }
    }
    row
}

/// Rows n = 1, 2, ... until the first row that vanishes identically; once
/// P_gamma(b) = 0 mod p^n has no solution, all later rows are zero too.
fn n_gamma_rows(gamma: &GammaClass, p: u64) -> Vec<Vec<u64>> {
    let mut rows = Vec::new();
    for n in 1..=64 {
        let row = n_gamma_row(gamma, p, n);
        if row.iter().all(|&c| c == 0) {
            return rows;
        }
        rows.push(row);
    }
    panic!("N_gamma rows did not terminate; gamma is hyperbolic at {p}");
}

/// The nonzero double root z of P_gamma mod p, if there is one. Requires
/// p coprime to det(gamma).
pub(crate) fn double_root_mod_p(gamma: &GammaClass, p: u64) -> Option<u64> {
    debug_assert!(gamma.det % p != 0);
    if p == 2 {
        // Odd determinant: a double root means X^2 + 1 = (X + 1)^2.
        return (gamma.trace % 2 == 0).then_some(1);
    }
    if gamma.delta.rem_euclid(p as i64) != 0 {
        return None;
    }
    let z = gamma.trace % p * inv_mod(2, p) % p;
    (z != 0).then_some(z)
}

/// Local factor at p | M (conductor p^3 member, class ramified at p).
///
/// Vanishes unless -t/u is a square mod p for u = det/p; otherwise, with
/// y a square root and v = trace/p,
/// conj(zeta) [e(-yv/p) omega_p(y) + (p odd) e(yv/p) omega_p(-y)].
pub fn phi_p_simple_ramified(
    gamma: &GammaClass,
    rep: &SimpleRep,
    neb: &Nebentypus,
) -> Result<CycNumber, Error> {
    let p = rep.p;
    if gamma.m_div % p != 0 {
        return Err(Error::Invalid(format!(
            "ramified evaluator requires p | M, got p = {p}, M = {}",
            gamma.m_div
        )));
    }
    let u = gamma.det / p;
    let v = gamma.trace / p;
    let chi = neb.local(p).expect("p | N");
    let target = (p - rep.t % p) % p * inv_mod(u % p, p) % p; // -t/u mod p
    let y = match sqrt_mod_p(target as i64, p) {
        Some(y) if y != 0 => y,
        _ => return Ok(CycNumber::zero()),
    };
    let term = |y: u64| -> CycNumber {
        let phase = CycNumber::root_of_unity(p, -((y * (v % p)) as i64));
        phase.mul(&chi.value(y as i64).to_cyc())
    };
    let mut sum = term(y);
    if p != 2 {
        sum = sum.add(&term(p - y));
    }
    Ok(rep.zeta.conj().to_cyc().mul(&sum))
}

/// Local factor at p | T with p not dividing M (conductor p^3 member, class
/// unramified at p).
///
/// Vanishes unless P_gamma has a nonzero double root z mod p; otherwise
/// (conj(omega_p(z))/p) sum_{n>=1} sum_c N(c,n) sum_y e(yc/(zp)) e(-t/(yzp))^[n=1].
pub fn phi_p_simple_unramified(
    gamma: &GammaClass,
    rep: &SimpleRep,
    neb: &Nebentypus,
) -> Result<CycNumber, Error> {
    let p = rep.p;
    if gamma.m_div % p == 0 {
        return Err(Error::Invalid(format!(
            "unramified evaluator requires p coprime to M, got p = {p}, M = {}",
            gamma.m_div
        )));
    }
    if is_square_in_qp(gamma.delta, p) {
        return Err(Error::HyperbolicAtP { p });
    }
    let chi = neb.local(p).expect("p | N");
    let z = match double_root_mod_p(gamma, p) {
        Some(z) => z,
        None => return Ok(CycNumber::zero()),
    };
    let z_inv = inv_mod(z, p);
    // Accumulate integer coefficients of zeta_p^j over all (n, c, y).
    let mut coeffs = vec![BigInt::zero(); p as usize];
    for (idx, row) in n_gamma_rows(gamma, p).iter().enumerate() {
        let n = idx + 1;
        for (c, &count) in row.iter().enumerate() {
            if count == 0 {
                continue;
            }
            for y in 1..p {
                let mut e = y * (c as u64) % p * z_inv % p;
                if n == 1 {
                    let y_inv = inv_mod(y, p);
                    let kloos = (p - rep.t % p) % p * y_inv % p * z_inv % p;
                    e = (e + kloos) % p;
                }
                coeffs[e as usize] += BigInt::from(count);
            }
        }
    }
    let mut sum = CycNumber::zero();
    for (j, c) in coeffs.into_iter().enumerate() {
        if !c.is_zero() {
            let term =
                CycNumber::root_of_unity(p, j as i64).scale(&BigRational::from_integer(c));
            sum = sum.add(&term);
        }
    }
    let prefactor = chi
        .value(z as i64)
        .conj()
        .to_cyc()
        .scale(&BigRational::new(BigInt::one(), BigInt::from(p)));
    Ok(prefactor.mul(&sum))
}

/// Local factor at p | S (conductor p^2 member; class unramified at p).
///
/// Double-root branch:
/// conj(omega_p(z)) (-1 + (1/p) sum_n [(p-1) N(0,n) - sum_{c != 0} N(c,n)]).
/// Irreducible branch: -conj(nu(x)) - conj(nu^p(x)) for x in F_{p^2} with
/// the same minimal polynomial as gamma mod p.
pub fn phi_p_depth_zero(
    gamma: &GammaClass,
    rep: &DepthZeroRep,
    ctx: &Fp2Context,
    neb: &Nebentypus,
) -> Result<CycNumber, Error> {
    let p = rep.p;
    debug_assert_eq!(ctx.p(), p);
    if gamma.det % p == 0 {
        return Err(Error::Invalid(format!(
            "depth zero evaluator requires p coprime to det, got p = {p}"
        )));
    }
    if is_square_in_qp(gamma.delta, p) {
        return Err(Error::HyperbolicAtP { p });
    }
    let chi = neb.local(p).expect("p | N");
    if let Some(z) = double_root_mod_p(gamma, p) {
        let mut acc = BigInt::zero();
        for row in n_gamma_rows(gamma, p) {
            acc += BigInt::from((p - 1) * row[0]);
            acc -= BigInt::from(row[1..].iter().sum::<u64>());
        }
        let value = BigRational::new(acc, BigInt::from(p)) - BigRational::one();
        Ok(chi.value(z as i64).conj().to_cyc().scale(&value))
    } else {
        // Irreducible modulo p.
        let x = ctx
            .element_with_charpoly(gamma.trace % p, gamma.det % p)
            .expect("irreducible charpoly has a root in F_{p^2}");
        let j = ctx.dlog(x).expect("nonzero element");
        let d = ctx.group_order();
        let exp = |mult: u64| -> i64 {
            -(((rep.m as u128 * j as u128 * mult as u128) % d as u128) as i64)
        };
        let a = CycNumber::root_of_unity(d, exp(1));
        let b = CycNumber::root_of_unity(d, exp(p));
        Ok(a.add(&b).neg())
    }
}

/// Global measure factor 2 h(E) / (w_E 2^{omega(d_E)}).
pub fn measure_factor(gamma: &GammaClass) -> BigRational {
    let q = &gamma.quad;
    BigRational::new(
        BigInt::from(2 * q.h),
        BigInt::from(q.w as u64 * 2u64.pow(q.omega_de)),
    )
}

/// Brute-force count of homothety classes of lattices preserved by gamma in
/// Q_l^2: candidate class representatives g = [[l^a, y], [0, 1]] are tested
/// for integrality of g^{-1} gamma g, which holds iff a >= 0, y is integral
/// and P_gamma(-y) = 0 mod l^a. Candidates at level a+1 are the lifts of the
/// survivors at level a; small levels are enumerated exhaustively.
pub fn lattice_orbital_oracle(
    gamma: &GammaClass,
    ell: u64,
    depth_cap: u32,
) -> Result<u64, Error> {
    if is_square_in_qp(gamma.delta, ell) {
        return Err(Error::HyperbolicAtP { p: ell });
    }
    let integral_conjugate = |y: u64, modulus: u64| -> bool {
        // g^{-1} gamma g = [[-y, -P(-y)/l^a], [l^a, y + trace]]; all entries
        // are integral except possibly the upper right.
        gamma.charpoly_mod((modulus - y % modulus) % modulus, modulus) == 0
    };
    let mut total = 1u64; // a = 0: the standard lattice, always preserved
    let mut survivors: Vec<u64> = vec![0];
    let mut modulus = 1u64;
    for _ in 1..=depth_cap {
        modulus *= ell;
        let candidates: Vec<u64> = if modulus <= 100_000 {
            (0..modulus).collect()
        } else {
            survivors
                .iter()
                .flat_map(|&y| (0..ell).map(move |d| y + d * (modulus / ell)))
                .collect()
        };
        survivors = candidates
            .into_iter()
            .filter(|&y| integral_conjugate(y, modulus))
            .collect();
        if survivors.is_empty() {
            break;
        }
        total += survivors.len() as u64;
    }
    Ok(total)
}
