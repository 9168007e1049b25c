//! Exact arithmetic in cyclotomic fields Q(zeta_L).
//!
//! [`CycNumber`] is the universal value type for character values, root
//! numbers, orbital integrals and traces. A value of ambient order L is a
//! sparse polynomial in zeta_L, stored reduced modulo zeta_L^L - 1 only;
//! reduction modulo the cyclotomic polynomial Phi_L happens lazily at
//! equality, zero tests and rationalization, so multiplication stays a plain
//! cyclic convolution. Mixed-order operands are aligned into the lcm field.
//!
//! Every value carries a complex floating "shadow". The shadow is recomputed
//! from the exact coefficients at observation points (`approx`, `equals`,
//! `as_rational`) and compared with the accumulated one; divergence beyond
//! 1e-6 (relative) aborts with a diagnostic, since it can only mean a bug in
//! the exact layer.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{factorize, gcd_u64, lcm_u64, legendre};
use crate::Error;

/// Largest ambient conductor we are willing to work in. Exceeding it is a
/// reported error, never silent degradation.
pub const CONDUCTOR_CAP: u64 = 100_000;

/// Relative tolerance for the exact-vs-shadow cross-check.
pub const SHADOW_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };
    pub const ONE: Complex = Complex { re: 1.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub fn unit(angle_turns: f64) -> Self {
        let t = 2.0 * std::f64::consts::PI * angle_turns;
        Complex::new(t.cos(), t.sin())
    }

    pub fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }

    pub fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }

    pub fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }

    pub fn scale(self, s: f64) -> Complex {
        Complex::new(self.re * s, self.im * s)
    }

    pub fn conj(self) -> Complex {
        Complex::new(self.re, -self.im)
    }

    pub fn inv(self) -> Complex {
        let n = self.norm_sq();
        Complex::new(self.re / n, -self.im / n)
    }

    pub fn norm_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> f64 {
        self.norm_sq().sqrt()
    }
}

fn rat_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// A root of unity e(num/den) = exp(2 pi i num/den), kept as a reduced
/// fraction. This is the compact exact form used for character values, local
/// root numbers and partition keys; promote to [`CycNumber`] for field
/// arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct RootOfUnity {
    num: u64,
    den: u64,
}

impl RootOfUnity {
    pub fn new(num: i64, den: u64) -> Self {
        assert!(den > 0);
        let n = num.rem_euclid(den as i64) as u64;
        let g = gcd_u64(n, den);
        if n == 0 {
            RootOfUnity { num: 0, den: 1 }
        } else {
            RootOfUnity {
                num: n / g,
                den: den / g,
            }
        }
    }

    pub fn one() -> Self {
        RootOfUnity { num: 0, den: 1 }
    }

    pub fn minus_one() -> Self {
        RootOfUnity { num: 1, den: 2 }
    }

    /// e(k/4) = i^k.
    pub fn i_power(k: i64) -> Self {
        RootOfUnity::new(k, 4)
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    /// The order of this root of unity in the unit circle.
    pub fn order(&self) -> u64 {
        self.den
    }

    pub fn mul(&self, other: &RootOfUnity) -> RootOfUnity {
        let den = lcm_u64(self.den, other.den);
        let num = (self.num * (den / self.den) + other.num * (den / other.den)) % den;
        RootOfUnity::new(num as i64, den)
    }

    pub fn conj(&self) -> RootOfUnity {
        RootOfUnity::new(-(self.num as i64), self.den)
    }

    pub fn pow(&self, k: i64) -> RootOfUnity {
        let e = (self.num as i128 * k as i128).rem_euclid(self.den as i128) as i64;
        RootOfUnity::new(e, self.den)
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    /// Returns +1/-1 when this root is real, None otherwise.
    pub fn as_sign(&self) -> Option<i32> {
        match (self.num, self.den) {
            (0, 1) => Some(1),
            (1, 2) => Some(-1),
            _ => None,
        }
    }

    pub fn is_imaginary_unit(&self) -> bool {
        self.den == 4
    }

    /// The two square roots of this value, principal branch first.
    pub fn sqrt_branches(&self) -> [RootOfUnity; 2] {
        let principal = RootOfUnity::new(self.num as i64, 2 * self.den);
        let other = principal.mul(&RootOfUnity::minus_one());
        [principal, other]
    }

    pub fn to_cyc(&self) -> CycNumber {
        CycNumber::root_of_unity(self.den, self.num as i64)
    }

    pub fn approx(&self) -> Complex {
        Complex::unit(self.num as f64 / self.den as f64)
    }
}

impl PartialOrd for RootOfUnity {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RootOfUnity {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.den, self.num).cmp(&(other.den, other.num))
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.num, self.den) {
            (0, 1) => write!(f, "1"),
            (1, 2) => write!(f, "-1"),
            (1, 4) => write!(f, "i"),
            (3, 4) => write!(f, "-i"),
            (n, d) => write!(f, "e({n}/{d})"),
        }
    }
}

/// Exact element of Q(zeta_L).
#[derive(Debug, Clone)]
pub struct CycNumber {
    order: u64,
    /// Sorted by exponent (< order), coefficients nonzero.
    terms: Vec<(u64, BigRational)>,
    shadow: Complex,
}

fn normalize_terms(mut raw: Vec<(u64, BigRational)>) -> Vec<(u64, BigRational)> {
    raw.sort_unstable_by_key(|&(e, _)| e);
    let mut out: Vec<(u64, BigRational)> = Vec::with_capacity(raw.len());
    for (e, c) in raw {
        if let Some(last) = out.last_mut() {
            if last.0 == e {
                last.1 += c;
                if last.1.is_zero() {
                    out.pop();
                }
                continue;
            }
        }
        if !c.is_zero() {
            out.push((e, c));
        }
    }
    out
}

impl CycNumber {
    fn from_terms(order: u64, raw: Vec<(u64, BigRational)>) -> Self {
        let terms = normalize_terms(raw);
        let shadow = image_of(order, &terms);
        CycNumber {
            order,
            terms,
            shadow,
        }
    }

    fn from_terms_with_shadow(
        order: u64,
        raw: Vec<(u64, BigRational)>,
        shadow: Complex,
    ) -> Self {
        CycNumber {
            order,
            terms: normalize_terms(raw),
            shadow,
        }
    }

    pub fn zero() -> Self {
        CycNumber {
            order: 1,
            terms: Vec::new(),
            shadow: Complex::ZERO,
        }
    }

    pub fn one() -> Self {
        CycNumber::from_integer(1)
    }

    pub fn from_integer(n: i64) -> Self {
        CycNumber::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(q: BigRational) -> Self {
        let shadow = Complex::new(rat_to_f64(&q), 0.0);
        let terms = if q.is_zero() { vec![] } else { vec![(0, q)] };
        CycNumber::from_terms_with_shadow(1, terms, shadow)
    }

    /// Exact value of e(j/L); the exponent is reduced mod L.
    pub fn root_of_unity(l: u64, j: i64) -> Self {
        assert!(l >= 1, "root_of_unity requires L >= 1");
        let e = j.rem_euclid(l as i64) as u64;
        CycNumber::from_terms(l, vec![(e, BigRational::one())])
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn terms(&self) -> &[(u64, BigRational)] {
        &self.terms
    }

    pub fn shadow(&self) -> Complex {
        self.shadow
    }

    /// Dense coefficient vector of length `order` (reduced mod zeta^L - 1
    /// only).
    pub fn dense_coeffs(&self) -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); self.order as usize];
        for (e, c) in &self.terms {
            v[*e as usize] = c.clone();
        }
        v
    }

    fn embed(&self, l2: u64) -> CycNumber {
        debug_assert!(l2 % self.order == 0);
        if l2 == self.order {
            return self.clone();
        }
        let k = l2 / self.order;
        CycNumber {
            order: l2,
            terms: self.terms.iter().map(|(e, c)| (e * k, c.clone())).collect(),
            shadow: self.shadow,
        }
    }

    fn aligned(&self, other: &CycNumber) -> (CycNumber, CycNumber) {
        let l = lcm_u64(self.order, other.order);
        assert!(
            l <= CONDUCTOR_CAP,
            "cyclotomic conductor {l} exceeds cap {CONDUCTOR_CAP}"
        );
        (self.embed(l), other.embed(l))
    }

    pub fn add(&self, other: &CycNumber) -> CycNumber {
        let (a, b) = self.aligned(other);
        let mut terms = a.terms;
        terms.extend(b.terms);
        CycNumber::from_terms_with_shadow(a.order, terms, self.shadow.add(other.shadow))
    }

    pub fn sub(&self, other: &CycNumber) -> CycNumber {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CycNumber {
        CycNumber {
            order: self.order,
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
            shadow: self.shadow.scale(-1.0),
        }
    }

    pub fn mul(&self, other: &CycNumber) -> CycNumber {
        let (a, b) = self.aligned(other);
        let l = a.order;
        let mut raw = Vec::with_capacity(a.terms.len() * b.terms.len());
        for (e1, c1) in &a.terms {
            for (e2, c2) in &b.terms {
                raw.push(((e1 + e2) % l, c1 * c2));
            }
        }
        CycNumber::from_terms_with_shadow(l, raw, self.shadow.mul(other.shadow))
    }

    pub fn scale(&self, q: &BigRational) -> CycNumber {
        if q.is_zero() {
            return CycNumber {
                order: self.order,
                terms: vec![],
                shadow: Complex::ZERO,
            };
        }
        CycNumber {
            order: self.order,
            terms: self.terms.iter().map(|(e, c)| (*e, c * q)).collect(),
            shadow: self.shadow.scale(rat_to_f64(q)),
        }
    }

    pub fn scale_by_integer(&self, n: i64) -> CycNumber {
        self.scale(&BigRational::from_integer(BigInt::from(n)))
    }

    /// Complex conjugation, zeta_L -> zeta_L^{-1}.
    pub fn conj(&self) -> CycNumber {
        let l = self.order;
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| ((l - e) % l, c.clone()))
            .collect();
        CycNumber::from_terms_with_shadow(l, terms, self.shadow.conj())
    }

    pub fn pow(&self, mut k: u64) -> CycNumber {
        let mut acc = CycNumber::one();
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, via the extended Euclidean algorithm against
    /// Phi_L in Q[x].
    pub fn invert(&self) -> Result<CycNumber, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let phi = cyclotomic_poly(self.order);
        let phi_q: Vec<BigRational> = phi
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let reduced = poly_rem(self.dense_coeffs(), &phi);
        let inv = poly_invert_mod(&reduced, &phi_q);
        let terms = inv
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| (e as u64, c))
            .collect();
        Ok(CycNumber::from_terms_with_shadow(
            self.order,
            terms,
            self.shadow.inv(),
        ))
    }

    /// The positive square root of a squarefree positive integer, as an
    /// element of Q(zeta_{4m}), built from quadratic Gauss sums.
    pub fn sqrt_squarefree(m: u64) -> Result<CycNumber, Error> {
        if m == 0 || !factorize(m).is_squarefree() {
            return Err(Error::NotSquarefree(m));
        }
        let mut acc = CycNumber::one();
        for q in factorize(m).primes() {
            let factor = if q == 2 {
                // zeta_8 + zeta_8^{-1} = 2 cos(pi/4)
                CycNumber::root_of_unity(8, 1).add(&CycNumber::root_of_unity(8, -1))
            } else {
                // Quadratic Gauss sum: sum_a (a|q) zeta_q^a equals sqrt(q)
                // for q = 1 mod 4 and i sqrt(q) for q = 3 mod 4.
                let mut terms = Vec::with_capacity(q as usize - 1);
                for a in 1..q {
                    let s = legendre(a as i64, q);
                    let c = BigRational::from_integer(BigInt::from(s));
                    terms.push((a, c));
                }
                let gauss = CycNumber::from_terms(q, terms);
                if q % 4 == 1 {
                    gauss
                } else {
                    gauss.mul(&CycNumber::root_of_unity(4, -1))
                }
            };
            acc = acc.mul(&factor);
        }
        // The Gauss-sum signs make this positive already; the assertion
        // pins the convention.
        assert!(acc.shadow.re > 0.0 && acc.shadow.im.abs() < 1e-6);
        Ok(acc)
    }

    /// Exact image under zeta_L -> exp(2 pi i / L), recomputed from the
    /// coefficients and cross-checked against the running shadow.
    pub fn approx(&self) -> Complex {
        let image = image_of(self.order, &self.terms);
        self.shadow_check(image);
        image
    }

    fn shadow_check(&self, image: Complex) {
        let err = image.sub(self.shadow).abs();
        let scale = 1.0 + image.abs();
        if !(err <= SHADOW_TOLERANCE * scale) {
            panic!(
                "float shadow diverged from exact value: shadow=({}, {}), image=({}, {}), \
                 order={}, {} terms",
                self.shadow.re,
                self.shadow.im,
                image.re,
                image.im,
                self.order,
                self.terms.len()
            );
        }
    }

    /// Exact conductor shrink: when every exponent is divisible by g, the
    /// value lives in Q(zeta_{L/g}). Keeps the lazy Phi reductions cheap.
    fn order_reduced(&self) -> CycNumber {
        if self.terms.is_empty() {
            return CycNumber {
                order: 1,
                terms: vec![],
                shadow: self.shadow,
            };
        }
        let mut g = self.order;
        for (e, _) in &self.terms {
            g = gcd_u64(g, *e);
            if g == 1 {
                return self.clone();
            }
        }
        CycNumber {
            order: self.order / g,
            terms: self.terms.iter().map(|(e, c)| (e / g, c.clone())).collect(),
            shadow: self.shadow,
        }
    }

    /// Canonical coefficients modulo Phi_L (degree < phi(L)).
    fn canonical(&self) -> Vec<BigRational> {
        poly_rem(self.dense_coeffs(), &cyclotomic_poly(self.order))
    }

    pub fn is_zero(&self) -> bool {
        if self.terms.is_empty() {
            return true;
        }
        let reduced = self.order_reduced();
        reduced.canonical().iter().all(|c| c.is_zero())
    }

    /// Exact equality in the compositum.
    pub fn equals(&self, other: &CycNumber) -> bool {
        self.sub(other).is_zero()
    }

    /// The rational value of this element, if it lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.shadow_check(image_of(self.order, &self.terms));
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 && self.terms[0].0 == 0 {
            return Some(self.terms[0].1.clone());
        }
        let canon = self.order_reduced().canonical();
        if canon.iter().skip(1).all(|c| c.is_zero()) {
            Some(canon.first().cloned().unwrap_or_else(BigRational::zero))
        } else {
            None
        }
    }

    /// Pretty form: rational if possible, otherwise the canonical
    /// (conductor-reduced, Phi-reduced) term sum in zeta_L.
    pub fn display_string(&self) -> String {
        if let Some(q) = self.as_rational() {
            return q.to_string();
        }
        let reduced = self.order_reduced();
        let mut parts = Vec::new();
        for (e, c) in reduced.canonical().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if e == 0 {
                parts.push(c.to_string());
            } else if c.is_one() {
                parts.push(format!("z{}^{}", reduced.order, e));
            } else {
                parts.push(format!("({})*z{}^{}", c, reduced.order, e));
            }
        }
        parts.join(" + ")
    }
}

impl fmt::Display for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_string())
    }
}

fn image_of(order: u64, terms: &[(u64, BigRational)]) -> Complex {
    let mut acc = Complex::ZERO;
    for (e, c) in terms {
        acc = acc.add(Complex::unit(*e as f64 / order as f64).scale(rat_to_f64(c)));
    }
    acc
}

/// Memoized integer coefficients of the cyclotomic polynomial Phi_L,
/// ascending degree, monic.
pub fn cyclotomic_poly(l: u64) -> Arc<Vec<BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&l) {
        return hit.clone();
    }
    // x^L - 1 divided by Phi_d over the proper divisors d of L.
    let mut poly = vec![BigInt::zero(); l as usize + 1];
    poly[0] = BigInt::from(-1);
    poly[l as usize] = BigInt::one();
    for d in factorize(l).divisors() {
        if d == l {
            continue;
        }
        let phi_d = cyclotomic_poly(d);
        poly = poly_div_exact(&poly, &phi_d);
    }
    let arc = Arc::new(poly);
    cache.lock().unwrap().insert(l, arc.clone());
    arc
}

/// Exact division of integer polynomials (divisor monic, remainder zero).
fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut quot = vec![BigInt::zero(); rem.len() - dn];
    for i in (dn..rem.len()).rev() {
        let coef = std::mem::replace(&mut rem[i], BigInt::zero());
        if coef.is_zero() {
            continue;
        }
        let qi = i - dn;
        for (j, dc) in den.iter().enumerate().take(dn) {
            let sub = dc * &coef;
            rem[qi + j] -= sub;
        }
        quot[qi] = coef;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()));
    quot
}

/// Remainder of a rational polynomial modulo a monic integer polynomial.
fn poly_rem(mut num: Vec<BigRational>, den: &[BigInt]) -> Vec<BigRational> {
    let dn = den.len() - 1;
    let den_q: Vec<BigRational> = den
        .iter()
        .take(dn)
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    while num.len() > dn {
        let coef = num.pop().unwrap();
        if coef.is_zero() {
            continue;
        }
        let base = num.len() - dn;
        for (j, dc) in den_q.iter().enumerate() {
            if !dc.is_zero() {
                let sub = dc * &coef;
                num[base + j] -= sub;
            }
        }
    }
    num
}

fn poly_deg(p: &[BigRational]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

/// Inverse of `a` modulo the monic polynomial `m` in Q[x] (gcd must be 1).
fn poly_invert_mod(a: &[BigRational], m: &[BigRational]) -> Vec<BigRational> {
    // Extended Euclid: maintain r = s*a mod m.
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    let mut s0 = vec![BigRational::zero()];
    let mut s1 = vec![BigRational::one()];
    while let Some(d1) = poly_deg(&r1) {
        if d1 == 0 {
            let c = r1[0].clone();
            return s1.into_iter().map(|x| x / c.clone()).collect();
        }
        let d0 = poly_deg(&r0).expect("nonzero remainder chain");
        if d0 < d1 {
            std::mem::swap(&mut r0, &mut r1);
            std::mem::swap(&mut s0, &mut s1);
            continue;
        }
        // One long-division elimination step.
        let shift = d0 - d1;
        let factor = &r0[d0] / &r1[d1];
        for j in 0..=d1 {
            let sub = &factor * &r1[j];
            r0[j + shift] -= sub;
        }
        if s0.len() < s1.len() + shift {
            s0.resize(s1.len() + shift, BigRational::zero());
        }
        for j in 0..s1.len() {
            let sub = &factor * &s1[j];
            s0[j + shift] -= sub;
        }
    }
    panic!("poly_invert_mod called with arguments that are not coprime");
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn roots_of_unity_basics() {
        assert!(CycNumber::root_of_unity(1, 0).equals(&CycNumber::one()));
        let i = CycNumber::root_of_unity(4, 1);
        assert_eq!(i.terms(), &[(1, rat(1, 1))]);
        let z3 = CycNumber::root_of_unity(3, 1);
        let sum = z3.add(&CycNumber::root_of_unity(3, 2));
        assert_eq!(sum.as_rational(), Some(rat(-1, 1)));
    }

    #[test]
    fn conj_and_field_axioms() {
        let z8 = CycNumber::root_of_unity(8, 1);
        assert!(z8.conj().equals(&CycNumber::root_of_unity(8, 7)));
        let z = CycNumber::from_integer(2).add(&CycNumber::root_of_unity(5, 1));
        let prod = z.mul(&z.invert().unwrap());
        assert!(prod.equals(&CycNumber::one()));
        assert!(z.add(&z.neg()).is_zero());
    }

    #[test]
    fn invert_zero_rejected() {
        assert!(matches!(
            CycNumber::zero().invert(),
            Err(Error::DivisionByZero)
        ));
        // A value that is zero only after Phi reduction.
        let hidden_zero = CycNumber::root_of_unity(3, 0)
            .add(&CycNumber::root_of_unity(3, 1))
            .add(&CycNumber::root_of_unity(3, 2));
        assert!(hidden_zero.is_zero());
        assert!(matches!(hidden_zero.invert(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn sqrt_squarefree_exact() {
        assert!(CycNumber::sqrt_squarefree(1).unwrap().equals(&CycNumber::one()));
        let s2 = CycNumber::sqrt_squarefree(2).unwrap();
        let expect = CycNumber::root_of_unity(8, 1).add(&CycNumber::root_of_unity(8, -1));
        assert!(s2.equals(&expect));
        for m in [2u64, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19, 21, 22, 23, 26, 29, 30] {
            let s = CycNumber::sqrt_squarefree(m).unwrap();
            assert!(
                s.mul(&s).equals(&CycNumber::from_integer(m as i64)),
                "sqrt({m})^2 != {m}"
            );
            assert!((s.approx().re - (m as f64).sqrt()).abs() < 1e-9);
        }
        assert!(matches!(
            CycNumber::sqrt_squarefree(12),
            Err(Error::NotSquarefree(12))
        ));
    }

    #[test]
    fn rationalization() {
        assert_eq!(
            CycNumber::root_of_unity(3, 1)
                .add(&CycNumber::root_of_unity(3, 2))
                .as_rational(),
            Some(rat(-1, 1))
        );
        assert_eq!(CycNumber::root_of_unity(8, 1).as_rational(), None);
        let i = CycNumber::root_of_unity(4, 1);
        let a = i.approx();
        assert!((a.re).abs() < 1e-12 && (a.im - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_order_arithmetic() {
        // zeta_6 = -zeta_3^2, checked in the lcm field.
        let z6 = CycNumber::root_of_unity(6, 1);
        let z3 = CycNumber::root_of_unity(3, 2).neg();
        assert!(z6.equals(&z3));
        let z4 = CycNumber::root_of_unity(4, 1);
        let z12 = z6.mul(&z4);
        assert_eq!(z12.order(), 12);
        assert!(z12.equals(&CycNumber::root_of_unity(12, 5)));
    }

    #[test]
    fn float_image_multiplicativity() {
        // Pseudo-random sample; exact product's image must match the complex
        // product of the images.
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for l in [12u64, 40, 105, 120] {
            for _ in 0..25 {
                let mk = |next: &mut dyn FnMut() -> u64| {
                    let mut terms = Vec::new();
                    for _ in 0..4 {
                        let e = (next() % l) as i64;
                        let num = (next() % 19) as i64 - 9;
                        let den = (next() % 7 + 1) as i64;
                        terms.push(CycNumber::root_of_unity(l, e).scale(&rat(num, den)));
                    }
                    terms
                        .into_iter()
                        .fold(CycNumber::zero(), |acc, t| acc.add(&t))
                };
                let a = mk(&mut next);
                let b = mk(&mut next);
                let prod = a.mul(&b);
                let lhs = prod.approx();
                let rhs = a.approx().mul(b.approx());
                assert!(lhs.sub(rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn equality_is_consistent_with_floats() {
        let a = CycNumber::root_of_unity(5, 1).add(&CycNumber::root_of_unity(5, 4));
        let b = CycNumber::from_rational(rat(-1, 2))
            .add(&CycNumber::sqrt_squarefree(5).unwrap().scale(&rat(1, 2)));
        // 2 cos(2 pi / 5) = (sqrt(5) - 1) / 2
        assert!(a.equals(&b));
        assert!(a.approx().sub(b.approx()).abs() < 1e-9);
        assert!(!a.equals(&CycNumber::one()));
    }

    #[test]
    fn equality_refines_float_equality() {
        // On a random sample: reflexive and symmetric, and exact equality
        // implies float images within 1e-9.
        let mut seed = 0xabcdef12345678u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        let mut sample = Vec::new();
        for l in [8u64, 12, 30] {
            for _ in 0..8 {
                let e = (next() % l) as i64;
                let num = (next() % 11) as i64 - 5;
                sample.push(CycNumber::root_of_unity(l, e).scale(&rat(num, 3)));
            }
        }
        for a in &sample {
            assert!(a.equals(a));
            for b in &sample {
                let ab = a.equals(b);
                assert_eq!(ab, b.equals(a));
                if ab {
                    assert!(a.approx().sub(b.approx()).abs() < 1e-9);
                }
            }
        }
        // Transitivity on a chain of equal representations of -1.
        let x = CycNumber::from_integer(-1);
        let y = CycNumber::root_of_unity(2, 1);
        let z = CycNumber::root_of_unity(3, 1).add(&CycNumber::root_of_unity(3, 2));
        assert!(x.equals(&y) && y.equals(&z) && x.equals(&z));
    }

    #[test]
    fn root_of_unity_fraction_type() {
        let x = RootOfUnity::new(3, 6);
        assert_eq!(x, RootOfUnity::new(1, 2));
        assert_eq!(x.as_sign(), Some(-1));
        let i = RootOfUnity::i_power(1);
        assert_eq!(i.mul(&i).as_sign(), Some(-1));
        assert_eq!(i.conj(), RootOfUnity::i_power(3));
        let [a, b] = RootOfUnity::minus_one().sqrt_branches();
        assert_eq!(a, RootOfUnity::i_power(1));
        assert_eq!(b, RootOfUnity::i_power(3));
        assert_eq!(RootOfUnity::new(5, 10).order(), 2);
        assert!(i.to_cyc().equals(&CycNumber::root_of_unity(4, 1)));
        assert_eq!(format!("{}", RootOfUnity::new(2, 3)), "e(2/3)");
    }

    #[test]
    fn cyclotomic_polys() {
        let phi12 = cyclotomic_poly(12);
        let expect: Vec<BigInt> = [1i64, 0, -1, 0, 1].iter().map(|&c| BigInt::from(c)).collect();
        assert_eq!(*phi12, expect);
        let phi1 = cyclotomic_poly(1);
        assert_eq!(*phi1, vec![BigInt::from(-1), BigInt::from(1)]);
        // degree phi(105) = 48, and Phi_105 famously has a -2 coefficient
        let phi105 = cyclotomic_poly(105);
        assert_eq!(phi105.len(), 49);
        assert!(phi105.iter().any(|c| *c == BigInt::from(-2)));
    }
}
