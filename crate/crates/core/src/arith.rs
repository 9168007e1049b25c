//! Integer and imaginary-quadratic-field arithmetic.
//!
//! Everything here is exact and sized for desk-scale inputs: 64-bit
//! factorization, Legendre symbols, square roots mod p, p-adic squareness,
//! fundamental discriminants, and class numbers of imaginary quadratic fields
//! by reduced binary-quadratic-form enumeration.

use crate::Error;

/// Prime factorization of a positive integer, sorted by prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn value(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| p.pow(e))
            .product::<u64>()
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Moebius function of the factored integer (0 unless squarefree).
    pub fn moebius(&self) -> i64 {
        if !self.is_squarefree() {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Exponent of `p` in the factorization.
    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// All positive divisors, sorted increasingly.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
            for &d in &divs {
                let mut pk = 1u64;
                for _ in 0..=e {
                    next.push(d * pk);
                    pk = pk.saturating_mul(p);
                }
            }
            divs = next;
        }
        divs.sort_unstable();
        divs
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, for `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> u64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert!(r == 1, "inv_mod: {a} is not invertible mod {m}");
    (((t % m as i128) + m as i128) % m as i128) as u64
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd_u64(a, b) * b
    }
}

/// Deterministic Miller-Rabin, valid for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    // n odd composite, no factor below the trial-division bound.
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

const TRIAL_BOUND: u64 = 1_000_000;

/// Canonical prime factorization. `factorize(1)` is the empty product.
pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "factorize requires n >= 1");
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let mut m = n;
    let push = |p: u64, factors: &mut Vec<(u64, u32)>, m: &mut u64| {
        let mut e = 0;
        while *m % p == 0 {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut factors, &mut m);
    let mut p = 3u64;
    while p <= TRIAL_BOUND && p * p <= m {
        push(p, &mut factors, &mut m);
        p += 2;
    }
    // Whatever survives trial division is prime, a prime square, or a
    // semiprime with both factors above the bound.
    let mut stack = Vec::new();
    if m > 1 {
        stack.push(m);
    }
    while let Some(v) = stack.pop() {
        if is_prime(v) {
            match factors.iter_mut().find(|(q, _)| *q == v) {
                Some((_, e)) => *e += 1,
                None => factors.push((v, 1)),
            }
        } else {
            let d = pollard_rho(v);
            stack.push(d);
            stack.push(v / d);
        }
    }
    factors.sort_unstable_by_key(|&(p, _)| p);
    Factorization { factors }
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: i64, p: u64) -> u32 {
    assert!(n != 0, "valuation of 0 is infinite");
    assert!(p >= 2);
    let mut m = n.unsigned_abs();
    let mut v = 0;
    while m % p == 0 {
        m /= p;
        v += 1;
    }
    v
}

/// Legendre symbol (a|p) for an odd prime p, extended by 0 on multiples of p.
pub fn legendre(a: i64, p: u64) -> i32 {
    assert!(p > 2 && is_prime(p), "legendre requires an odd prime");
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    let s = pow_mod(r, (p - 1) / 2, p);
    if s == 1 {
        1
    } else {
        -1
    }
}

/// Square root of `a` modulo a prime `p` (Tonelli-Shanks), if one exists.
/// Returns the representative in `[0, p/2]`; callers needing the other root
/// negate.
pub fn sqrt_mod_p(a: i64, p: u64) -> Option<u64> {
    assert!(is_prime(p), "sqrt_mod_p requires a prime modulus");
    let r = a.rem_euclid(p as i64) as u64;
    if p == 2 {
        return Some(r);
    }
    if r == 0 {
        return Some(0);
    }
    if legendre(r as i64, p) != 1 {
        return None;
    }
    let root = if p % 4 == 3 {
        pow_mod(r, (p + 1) / 4, p)
    } else {
        // Tonelli-Shanks.
        let mut q = p - 1;
        let mut s = 0u32;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let mut z = 2u64;
        while legendre(z as i64, p) != -1 {
            z += 1;
        }
        let mut m = s;
        let mut c = pow_mod(z, q, p);
        let mut t = pow_mod(r, q, p);
        let mut x = pow_mod(r, (q + 1) / 2, p);
        while t != 1 {
            let mut i = 0u32;
            let mut tt = t;
            while tt != 1 {
                tt = mul_mod(tt, tt, p);
                i += 1;
            }
            let b = pow_mod(c, 1 << (m - i - 1), p);
            m = i;
            c = mul_mod(b, b, p);
            t = mul_mod(t, c, p);
            x = mul_mod(x, b, p);
        }
        x
    };
    Some(root.min(p - root))
}

/// Whether a nonzero integer is a square in the p-adic field Q_p.
///
/// Writing d = p^v * u, this requires v even together with u a quadratic
/// residue mod p (odd p), or u = 1 mod 8 (p = 2).
pub fn is_square_in_qp(d: i64, p: u64) -> bool {
    assert!(d != 0);
    let v = valuation(d, p);
    if v % 2 == 1 {
        return false;
    }
    let u = d / (p as i64).pow(v);
    if p == 2 {
        u.rem_euclid(8) == 1
    } else {
        legendre(u, p) == 1
    }
}

/// Whether `d` is a fundamental discriminant of an imaginary quadratic field.
pub fn is_fundamental(d: i64) -> bool {
    if d >= 0 {
        return false;
    }
    let r = d.rem_euclid(4);
    if r == 1 {
        factorize(d.unsigned_abs()).is_squarefree()
    } else if r == 0 {
        let m = d / 4;
        let rm = m.rem_euclid(4);
        (rm == 2 || rm == 3) && factorize(m.unsigned_abs()).is_squarefree()
    } else {
        false
    }
}

/// Splits a negative discriminant as `delta = b^2 * d_E` with `d_E`
/// fundamental and `b > 0`.
pub fn fundamental_discriminant(delta: i64) -> Result<(i64, u64), Error> {
    if delta >= 0 || !matches!(delta.rem_euclid(4), 0 | 1) {
        return Err(Error::BadDiscriminant(delta));
    }
    // Squarefree kernel: |delta| = s * f^2 with s squarefree.
    let fac = factorize(delta.unsigned_abs());
    let mut s = 1u64;
    let mut f = 1u64;
    for &(p, e) in fac.factors() {
        if e % 2 == 1 {
            s *= p;
        }
        f *= p.pow(e / 2);
    }
    let s = -(s as i64);
    if s.rem_euclid(4) == 1 {
        Ok((s, f))
    } else {
        // delta = 0 mod 4 forces f even here.
        debug_assert!(f % 2 == 0);
        Ok((4 * s, f / 2))
    }
}

/// Unit count of the imaginary quadratic order of fundamental discriminant
/// `d_E`: 6 for -3, 4 for -4, 2 otherwise.
pub fn unit_count(d_e: i64) -> u32 {
    match d_e {
        -3 => 6,
        -4 => 4,
        _ => 2,
    }
}

/// Class number of the imaginary quadratic field of fundamental discriminant
/// `d_E`, by enumeration of primitive reduced forms ax^2 + bxy + cy^2:
/// b^2 - 4ac = d_E, |b| <= a <= c, and b >= 0 whenever a = c or |b| = a.
pub fn class_number(d_e: i64) -> Result<u64, Error> {
    if !is_fundamental(d_e) {
        return Err(Error::BadDiscriminant(d_e));
    }
    Ok(count_reduced_forms(d_e))
}

/// Primitive reduced-form count for any negative discriminant 0,1 mod 4.
pub(crate) fn count_reduced_forms(d: i64) -> u64 {
    debug_assert!(d < 0 && matches!(d.rem_euclid(4), 0 | 1));
    let mut count = 0u64;
    let abs_d = d.unsigned_abs() as i64;
    let mut a = 1i64;
    while 3 * a * a <= abs_d {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a {
                continue;
            }
            if a == c && b < 0 {
                continue;
            }
            let g = gcd_u64(gcd_u64(a as u64, b.unsigned_abs()), c as u64);
            if g != 1 {
                continue;
            }
            count += 1;
        }
        a += 1;
    }
    count
}

/// Invariants of the imaginary quadratic field attached to a negative
/// discriminant `delta = b^2 d_E`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadFieldData {
    pub delta: i64,
    pub d_e: i64,
    pub b: u64,
    pub h: u64,
    pub w: u32,
    pub omega_de: u32,
}

impl QuadFieldData {
    pub fn new(delta: i64) -> Result<Self, Error> {
        let (d_e, b) = fundamental_discriminant(delta)?;
        let h = class_number(d_e)?;
        let w = unit_count(d_e);
        let omega_de = factorize(d_e.unsigned_abs()).omega();
        Ok(QuadFieldData {
            delta,
            d_e,
            b,
            h,
            w,
            omega_de,
        })
    }
}

/// Smallest primitive root modulo a prime p.
pub fn primitive_root(p: u64) -> u64 {
    assert!(is_prime(p));
    if p == 2 {
        return 1;
    }
    let fac = factorize(p - 1);
    'g: for g in 2..p {
        for q in fac.primes() {
            if pow_mod(g, (p - 1) / q, p) == 1 {
                continue 'g;
            }
        }
        return g;
    }
    unreachable!("every prime has a primitive root")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorize_examples() {
        let f = factorize(968);
        assert_eq!(f.factors(), &[(2, 3), (11, 2)]);
        assert_eq!(factorize(1).factors(), &[]);
        assert_eq!(factorize(27).factors(), &[(3, 3)]);
        assert_eq!(f.value(), 968);
        assert_eq!(
            factorize(60).divisors(),
            vec![1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60]
        );
    }

    #[test]
    fn factorize_large_semiprime() {
        // Both factors above the trial-division bound.
        let p = 1_000_003u64;
        let q = 1_000_033u64;
        let f = factorize(p * q);
        assert_eq!(f.factors(), &[(p, 1), (q, 1)]);
    }

    #[test]
    fn squares_in_qp() {
        assert!(is_square_in_qp(-7, 2)); // -7 = 1 mod 8
        assert!(!is_square_in_qp(-3, 2)); // 5 mod 8, unramified nonsquare
        for p in [2u64, 3, 5, 7, 11, 13] {
            assert!(is_square_in_qp((p * p) as i64, p));
        }
    }

    #[test]
    fn brute_force_qp_square_criterion() {
        // d is a square in Q_p iff x^2 = d mod p^(v+3) has a solution of
        // valuation v/2 (v = v_p(d)); checked by enumeration.
        for p in [2u64, 3, 5, 7, 11, 13] {
            for d in -500i64..=500 {
                if d == 0 {
                    continue;
                }
                let v = valuation(d, p);
                let modulus = (p as i64).pow(v + 3);
                let expect = (1..modulus).any(|x| {
                    (x * x - d).rem_euclid(modulus) == 0 && 2 * valuation(x, p) == v
                });
                assert_eq!(is_square_in_qp(d, p), expect, "disagreement at d={d}, p={p}");
            }
        }
    }

    #[test]
    fn fundamental_discriminants() {
        assert_eq!(fundamental_discriminant(-4).unwrap(), (-4, 1));
        assert_eq!(fundamental_discriminant(-48).unwrap(), (-3, 4));
        assert_eq!(fundamental_discriminant(-56).unwrap(), (-56, 1));
        assert!(fundamental_discriminant(-6).is_err());
        assert!(fundamental_discriminant(5).is_err());
    }

    #[test]
    fn recombination_roundtrip() {
        for delta in (-4000i64..0).filter(|d| matches!(d.rem_euclid(4), 0 | 1)) {
            let (d_e, b) = fundamental_discriminant(delta).unwrap();
            assert!(is_fundamental(d_e));
            assert_eq!((b * b) as i64 * d_e, delta, "delta = {delta}");
        }
    }

    #[test]
    fn class_numbers() {
        assert_eq!(class_number(-4).unwrap(), 1);
        assert_eq!(class_number(-3).unwrap(), 1);
        assert_eq!(class_number(-56).unwrap(), 4);
        assert_eq!(class_number(-23).unwrap(), 3);
        assert_eq!(class_number(-163).unwrap(), 1);
        assert!(class_number(-12).is_err());
    }

    /// Independent oracle: enumerate forms scanning (a, c) and recognizing b
    /// by a perfect-square test, instead of scanning (a, b) and dividing.
    fn class_number_oracle(d: i64) -> u64 {
        let abs_d = -d;
        let mut count = 0u64;
        for a in 1..=((abs_d as f64 / 3.0).sqrt() as i64 + 1) {
            let c_lo = (abs_d + 4 * a - 1) / (4 * a); // c >= |d|/4a so b^2 >= 0
            let c_hi = (a * a + abs_d) / (4 * a); // b^2 <= a^2
            for c in c_lo.max(a)..=c_hi {
                let b2 = 4 * a * c - abs_d;
                let b = (b2 as f64).sqrt().round() as i64;
                if b * b != b2 || b > a {
                    continue;
                }
                let g = gcd_u64(gcd_u64(a as u64, b as u64), c as u64);
                if g != 1 {
                    continue;
                }
                if b == 0 || b == a || a == c {
                    count += 1; // only the b >= 0 representative is reduced
                } else {
                    count += 2; // both signs of b
                }
            }
        }
        count
    }

    #[test]
    fn class_number_matches_oracle() {
        for d in (-10_000i64..0).filter(|&d| is_fundamental(d)) {
            assert_eq!(
                class_number(d).unwrap(),
                class_number_oracle(d),
                "class number mismatch at d = {d}"
            );
        }
    }

    #[test]
    fn unit_counts_and_small_utilities() {
        assert_eq!(unit_count(-3), 6);
        assert_eq!(unit_count(-4), 4);
        assert_eq!(unit_count(-56), 2);
        assert_eq!(sqrt_mod_p(2, 7), Some(3));
        assert_eq!(sqrt_mod_p(3, 7), None);
        assert_eq!(sqrt_mod_p(2, 17), Some(6));
        assert_eq!(valuation(-48, 2), 4);
        assert_eq!(legendre(2, 7), 1);
        assert_eq!(legendre(5, 7), -1);
        assert_eq!(legendre(14, 7), 0);
    }

    #[test]
    fn sqrt_mod_p_both_roots() {
        for p in [3u64, 5, 7, 11, 13, 17, 97, 101] {
            for a in 0..p as i64 {
                match sqrt_mod_p(a, p) {
                    Some(r) => {
                        assert_eq!(mul_mod(r, r, p), a.rem_euclid(p as i64) as u64);
                        assert!(r <= p / 2);
                    }
                    None => assert_eq!(legendre(a, p), -1),
                }
            }
        }
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(3), 2);
        assert_eq!(primitive_root(7), 3);
        assert_eq!(primitive_root(11), 2);
        assert_eq!(primitive_root(191), 19);
    }

    #[test]
    fn quad_field_data_examples() {
        let q = QuadFieldData::new(-56).unwrap();
        assert_eq!((q.d_e, q.b, q.h, q.w, q.omega_de), (-56, 1, 4, 2, 2));
        let q = QuadFieldData::new(-48).unwrap();
        assert_eq!((q.d_e, q.b, q.h, q.w, q.omega_de), (-3, 4, 1, 6, 1));
    }
}
