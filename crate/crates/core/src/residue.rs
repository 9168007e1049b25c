//! Residue-field machinery: F_p and its quadratic extension F_{p^2},
//! multiplicative characters of both, and the nebentypus, stored as a
//! collection of local characters of F_p^* for the primes dividing ST.
//!
//! Characters take values in roots of unity and are returned as
//! [`RootOfUnity`] fractions; promote with `to_cyc()` where field arithmetic
//! is needed.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::arith::{factorize, gcd_u64, inv_mod, is_prime, legendre, primitive_root};
use crate::cyclotomic::{CycNumber, RootOfUnity};
use crate::Error;

/// Element of F_{p^2}, written x + y*theta for theta a fixed root of the
/// context's modulus.
pub type Fp2Elem = (u64, u64);

/// Arithmetic context for F_{p^2} = F_p[X]/(X^2 + aX + b), with a fixed
/// generator t = theta of the multiplicative group and a dense discrete-log
/// table.
#[derive(Debug)]
pub struct Fp2Context {
    p: u64,
    modulus: (u64, u64),
    powers: Vec<Fp2Elem>,
    dlog: Vec<u32>,
}

/// Largest prime for which we build dense F_{p^2} tables.
pub const MAX_CONTEXT_PRIME: u64 = 500;

fn default_modulus(p: u64) -> (u64, u64) {
    // Documented fixed choice at p = 11 so that published tables with
    // generator t a root of X^2 + 7X + 2 reproduce verbatim.
    if p == 11 {
        return (7, 2);
    }
    for a in 0..p {
        for b in 0..p {
            if is_irreducible(p, a, b) && root_generates(p, a, b) {
                return (a, b);
            }
        }
    }
    unreachable!("F_{{p^2}} always has a generating root of an irreducible quadratic")
}

fn is_irreducible(p: u64, a: u64, b: u64) -> bool {
    if p == 2 {
        return a == 1 && b == 1;
    }
    let disc = (a * a + 4 * (p - b % p)) % p;
    legendre(disc as i64, p) == -1
}

fn mul_elem_raw(p: u64, modulus: (u64, u64), e1: Fp2Elem, e2: Fp2Elem) -> Fp2Elem {
    // theta^2 = -a*theta - b
    let (a, b) = modulus;
    let (x1, y1) = e1;
    let (x2, y2) = e2;
    let cross = (x1 * y2 + x2 * y1) % p;
    let yy = (y1 * y2) % p;
    let x = (x1 * x2 + (p - b % p) * yy) % p;
    let y = (cross + (p - a % p) * yy) % p;
    (x, y)
}

fn pow_elem_raw(p: u64, modulus: (u64, u64), mut base: Fp2Elem, mut e: u64) -> Fp2Elem {
    let mut acc = (1, 0);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_elem_raw(p, modulus, acc, base);
        }
        base = mul_elem_raw(p, modulus, base, base);
        e >>= 1;
    }
    acc
}

fn root_generates(p: u64, a: u64, b: u64) -> bool {
    let theta = (0, 1);
    let order = p * p - 1;
    factorize(order)
        .primes()
        .all(|q| pow_elem_raw(p, (a, b), theta, order / q) != (1, 0))
}

impl Fp2Context {
    /// Deterministic context: the lexicographically smallest irreducible
    /// X^2 + aX + b whose root generates F_{p^2}^* (with the documented
    /// override at p = 11).
    pub fn new(p: u64) -> Self {
        let (a, b) = default_modulus(p);
        Self::with_modulus(p, a, b).expect("default modulus is valid")
    }

    /// Context with an explicitly chosen modulus, for reproducing published
    /// tables with a different generator.
    pub fn with_modulus(p: u64, a: u64, b: u64) -> Result<Self, Error> {
        if !is_prime(p) || p > MAX_CONTEXT_PRIME {
            return Err(Error::Invalid(format!(
                "F_(p^2) context requires a prime p <= {MAX_CONTEXT_PRIME}, got {p}"
            )));
        }
        if !is_irreducible(p, a, b) {
            return Err(Error::Invalid(format!(
                "X^2 + {a}X + {b} is reducible mod {p}"
            )));
        }
        if !root_generates(p, a, b) {
            return Err(Error::Invalid(format!(
                "the root of X^2 + {a}X + {b} does not generate F_({p}^2)*"
            )));
        }
        let order = (p * p - 1) as usize;
        let mut powers = Vec::with_capacity(order);
        let mut dlog = vec![u32::MAX; (p * p) as usize];
        let mut cur = (1u64, 0u64);
        for i in 0..order {
            powers.push(cur);
            dlog[(cur.0 + p * cur.1) as usize] = i as u32;
            cur = mul_elem_raw(p, (a, b), cur, (0, 1));
        }
        debug_assert_eq!(cur, (1, 0));
        Ok(Fp2Context {
            p,
            modulus: (a, b),
            powers,
            dlog,
        })
    }

    /// Shared default context for a prime, built once.
    pub fn shared(p: u64) -> Arc<Fp2Context> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Fp2Context>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard.entry(p).or_insert_with(|| Arc::new(Fp2Context::new(p))).clone()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn modulus(&self) -> (u64, u64) {
        self.modulus
    }

    pub fn group_order(&self) -> u64 {
        self.p * self.p - 1
    }

    pub fn generator(&self) -> Fp2Elem {
        (0, 1)
    }

    pub fn mul(&self, e1: Fp2Elem, e2: Fp2Elem) -> Fp2Elem {
        mul_elem_raw(self.p, self.modulus, e1, e2)
    }

    pub fn pow_of_generator(&self, i: u64) -> Fp2Elem {
        self.powers[(i % self.group_order()) as usize]
    }

    /// Discrete log base the generator; None for the zero element.
    pub fn dlog(&self, e: Fp2Elem) -> Option<u64> {
        let idx = (e.0 % self.p + self.p * (e.1 % self.p)) as usize;
        let v = self.dlog[idx];
        (v != u32::MAX).then_some(v as u64)
    }

    pub fn frobenius(&self, e: Fp2Elem) -> Fp2Elem {
        pow_elem_raw(self.p, self.modulus, e, self.p)
    }

    pub fn trace(&self, e: Fp2Elem) -> u64 {
        let (a, _) = self.modulus;
        (2 * e.0 % self.p + (self.p - a % self.p) * e.1) % self.p
    }

    pub fn norm(&self, e: Fp2Elem) -> u64 {
        let (a, b) = self.modulus;
        let (x, y) = (e.0 % self.p, e.1 % self.p);
        let xx = x * x % self.p;
        let byy = b % self.p * (y * y % self.p) % self.p;
        let axy = a % self.p * (x * y % self.p) % self.p;
        (xx + byy + self.p - axy) % self.p
    }

    /// An element of F_{p^2} - F_p with the given characteristic polynomial
    /// X^2 - tr X + nrm mod p, if one exists.
    pub fn element_with_charpoly(&self, tr: u64, nrm: u64) -> Option<Fp2Elem> {
        let p = self.p;
        let (tr, nrm) = (tr % p, nrm % p);
        for y in 1..p {
            for x in 0..p {
                let e = (x, y);
                if self.trace(e) == tr && self.norm(e) == nrm {
                    return Some(e);
                }
            }
        }
        None
    }
}

/// A multiplicative character nu_m of F_{p^2}^*, defined on the context's
/// generator t by nu_m(t) = e(m/(p^2-1)).
#[derive(Clone)]
pub struct FiniteChar {
    ctx: Arc<Fp2Context>,
    m: u64,
}

impl FiniteChar {
    pub fn new(ctx: Arc<Fp2Context>, m: u64) -> Self {
        let m = m % ctx.group_order();
        FiniteChar { ctx, m }
    }

    pub fn exponent(&self) -> u64 {
        self.m
    }

    pub fn context(&self) -> &Arc<Fp2Context> {
        &self.ctx
    }

    pub fn value_rou(&self, e: Fp2Elem) -> RootOfUnity {
        let d = self.ctx.dlog(e).expect("character evaluated at zero");
        let order = self.ctx.group_order();
        RootOfUnity::new(((self.m as u128 * d as u128) % order as u128) as i64, order)
    }

    /// chi(e) as an exact cyclotomic number.
    pub fn value(&self, e: Fp2Elem) -> CycNumber {
        self.value_rou(e).to_cyc()
    }

    /// Primitive (regular) characters are those not factoring through the
    /// norm, i.e. nu != nu^p, i.e. (p+1) does not divide m.
    pub fn is_primitive(&self) -> bool {
        self.m % (self.ctx.p() + 1) != 0
    }

    pub fn order(&self) -> u64 {
        let n = self.ctx.group_order();
        n / gcd_u64(self.m, n)
    }

    /// The conjugate character nu^p, inducing the same representation.
    pub fn conjugate_exponent(&self) -> u64 {
        (self.m as u128 * self.ctx.p() as u128 % self.ctx.group_order() as u128) as u64
    }
}

/// Dirichlet character of modulus N = S^2 T^3 with conductor dividing ST,
/// stored as one character of F_p^* per p | ST, each given by its exponent
/// relative to the smallest primitive root g_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nebentypus {
    s: u64,
    t: u64,
    locals: Vec<LocalChar>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalChar {
    pub p: u64,
    /// chi_p(g_p) = e(exponent/(p-1)), exponent in [0, p-2].
    pub exponent: u64,
    dlog: Vec<u32>,
}

impl LocalChar {
    fn new(p: u64, exponent: u64) -> Self {
        let g = primitive_root(p);
        let mut dlog = vec![u32::MAX; p as usize];
        let mut cur = 1u64;
        for i in 0..p - 1 {
            dlog[cur as usize] = i as u32;
            cur = cur * g % p;
        }
        LocalChar {
            p,
            exponent: exponent % (p - 1).max(1),
            dlog,
        }
    }

    /// chi_p(u) for u coprime to p.
    pub fn value(&self, u: i64) -> RootOfUnity {
        let r = u.rem_euclid(self.p as i64) as usize;
        let d = self.dlog[r];
        assert!(d != u32::MAX, "local character evaluated at a multiple of {}", self.p);
        if self.p == 2 {
            return RootOfUnity::one();
        }
        RootOfUnity::new((self.exponent * d as u64) as i64, self.p - 1)
    }

    pub fn is_trivial(&self) -> bool {
        self.exponent == 0
    }

    pub fn order(&self) -> u64 {
        if self.p == 2 || self.exponent == 0 {
            1
        } else {
            (self.p - 1) / gcd_u64(self.exponent, self.p - 1)
        }
    }
}

impl Nebentypus {
    /// Builds the character from (prime, exponent) pairs; primes of ST not
    /// listed get the trivial local component.
    pub fn from_exponents(s: u64, t: u64, exps: &[(u64, u64)]) -> Result<Self, Error> {
        let sf = factorize(s);
        let tf = factorize(t);
        if s * t <= 1 && s * t != 1 {
            return Err(Error::Invalid("level must be positive".into()));
        }
        if !sf.is_squarefree() || !tf.is_squarefree() || gcd_u64(s, t) != 1 {
            return Err(Error::Invalid(format!(
                "S = {s}, T = {t} must be coprime and squarefree"
            )));
        }
        if s * t == 1 {
            return Err(Error::Invalid("level N = S^2 T^3 must exceed 1".into()));
        }
        let mut locals = Vec::new();
        for p in sf.primes().chain(tf.primes()) {
            let raw = exps.iter().find(|&&(q, _)| q == p).map_or(0, |&(_, e)| e);
            if p == 2 && raw != 0 {
                return Err(Error::Invalid(
                    "F_2^* is trivial; the local character at 2 must have exponent 0".into(),
                ));
            }
            locals.push(LocalChar::new(p, raw % (p - 1).max(1)));
        }
        for &(q, _) in exps {
            if s % q != 0 && t % q != 0 {
                return Err(Error::Invalid(format!(
                    "character exponent given at p = {q}, which does not divide ST = {}",
                    s * t
                )));
            }
        }
        locals.sort_by_key(|lc| lc.p);
        Ok(Nebentypus { s, t, locals })
    }

    pub fn trivial(s: u64, t: u64) -> Result<Self, Error> {
        Nebentypus::from_exponents(s, t, &[])
    }

    /// The quadratic character modulo the odd prime q, as a character of
    /// modulus N.
    pub fn quadratic(s: u64, t: u64, q: u64) -> Result<Self, Error> {
        if q == 2 {
            return Err(Error::Invalid(
                "no quadratic character of conductor 2 exists".into(),
            ));
        }
        Nebentypus::from_exponents(s, t, &[(q, (q - 1) / 2)])
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn level(&self) -> u64 {
        self.s * self.s * self.t * self.t * self.t
    }

    pub fn locals(&self) -> &[LocalChar] {
        &self.locals
    }

    pub fn local(&self, p: u64) -> Option<&LocalChar> {
        self.locals.iter().find(|lc| lc.p == p)
    }

    pub fn is_trivial(&self) -> bool {
        self.locals.iter().all(|lc| lc.is_trivial())
    }

    pub fn conductor(&self) -> u64 {
        self.locals
            .iter()
            .filter(|lc| !lc.is_trivial())
            .map(|lc| lc.p)
            .product()
    }

    /// omega'(u) for u coprime to N, as a product of local values.
    pub fn eval(&self, u: i64) -> Result<RootOfUnity, Error> {
        let n = self.level();
        if gcd_u64(u.unsigned_abs() % n, n) != 1 {
            return Err(Error::Invalid(format!(
                "omega'({u}) undefined: gcd with N = {n} exceeds 1"
            )));
        }
        Ok(self
            .locals
            .iter()
            .fold(RootOfUnity::one(), |acc, lc| acc.mul(&lc.value(u))))
    }

    /// omega'(-1) as a sign.
    pub fn parity(&self) -> i32 {
        self.eval(-1)
            .expect("-1 is coprime to N")
            .as_sign()
            .expect("omega'(-1) is real")
    }

    /// The value omega_p(p) of the local component of the associated Hecke
    /// character at its own prime: the product over the other primes l | N
    /// of chi_l(p^{-1}).
    pub fn omega_p_at_p(&self, p: u64) -> Result<RootOfUnity, Error> {
        if self.local(p).is_none() {
            return Err(Error::Invalid(format!("p = {p} does not divide N")));
        }
        Ok(self
            .locals
            .iter()
            .filter(|lc| lc.p != p)
            .fold(RootOfUnity::one(), |acc, lc| {
                let pinv = inv_mod(p % lc.p, lc.p);
                acc.mul(&lc.value(pinv as i64))
            }))
    }
}
