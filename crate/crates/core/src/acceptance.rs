//! End-to-end validation suite. Each criterion reproduces published values
//! or cross-checks two independent routes, exactly, with a wall-clock
//! budget. The CLI `validate` subcommand and the `acceptance` integration
//! test target both run these.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::arith::{is_square_in_qp, valuation};
use crate::closed_forms;
use crate::cyclotomic::{CycNumber, RootOfUnity};
use crate::engine::{
    bias_partition, dimension, dimensions_all, identity_term, trace_hecke,
};
use crate::lmfdb::{check_against_lmfdb, LmfdbConfig};
use crate::local_reps::{
    enumerate_tuples, validate_tuple, LocalRepData, SigmaTuple, SimpleRep,
};
use crate::orbital::{lattice_orbital_oracle, n_gamma_row, phi_ell, GammaClass};
use crate::residue::Nebentypus;

pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub millis: u128,
    pub budget_millis: u128,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {}: {} ({} ms, budget {} ms) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.millis,
            self.budget_millis,
            self.detail
        )
    }
}

fn run_criterion(
    id: u32,
    name: &'static str,
    budget_millis: u128,
    body: impl FnOnce() -> Result<String, String>,
) -> CriterionOutcome {
    let start = Instant::now();
    let result = body();
    let millis = start.elapsed().as_millis();
    let (mut passed, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    let mut detail = detail;
    if passed && millis > budget_millis {
        passed = false;
        detail = format!("budget exceeded: {millis} ms > {budget_millis} ms; {detail}");
    }
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
        millis,
        budget_millis,
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn n27_tuples() -> Vec<(i64, RootOfUnity, SigmaTuple)> {
    let neb = Nebentypus::quadratic(1, 3, 3).unwrap();
    let mut out = Vec::new();
    for t in [1u64, 2] {
        let ts = if t == 1 { 1i64 } else { -1 };
        for rep in crate::local_reps::enumerate_simple(3, &neb).unwrap() {
            if rep.t == t {
                let tuple = SigmaTuple::new(
                    neb.clone(),
                    vec![LocalRepData::Simple(rep.clone())],
                )
                .unwrap();
                out.push((ts, rep.zeta, tuple));
            }
        }
    }
    out
}

/// Criterion 1: level 27, weight 5, quadratic nebentypus; exact traces of
/// T_4 and T_7 across all four (t, zeta).
fn body_1() -> Result<String, String> {
    let i = CycNumber::root_of_unity(4, 1);
    let mut checked = 0;
    for (t, zeta, tuple) in n27_tuples() {
        // (37 t - 23)/2 + 46 i zeta [t = -1]
        let mut expect4 = CycNumber::from_rational(rat(37 * t - 23, 2));
        // (67 - 143 t)/4 + (37 i zeta / 2) [t = -1]
        let mut expect7 = CycNumber::from_rational(rat(67 - 143 * t, 4));
        if t == -1 {
            let iz = i.mul(&zeta.to_cyc());
            expect4 = expect4.add(&iz.scale_by_integer(46));
            expect7 = expect7.add(&iz.scale(&rat(37, 2)));
        }
        let got4 = trace_hecke(&tuple, 5, 4).map_err(|e| e.to_string())?.total;
        let got7 = trace_hecke(&tuple, 5, 7).map_err(|e| e.to_string())?.total;
        if !got4.equals(&expect4) {
            return Err(format!(
                "tr T_4 mismatch at (t, zeta) = ({t}, {zeta}): got {got4}, want {expect4}"
            ));
        }
        if !got7.equals(&expect7) {
            return Err(format!(
                "tr T_7 mismatch at (t, zeta) = ({t}, {zeta}): got {got7}, want {expect7}"
            ));
        }
        // Pin the two labeled values.
        if t == -1 {
            let want = if zeta == RootOfUnity::i_power(3) {
                16
            } else {
                -76
            };
            if got4.as_rational() != Some(rat(want, 1)) {
                return Err(format!("labeled tr T_4 value mismatch at zeta = {zeta}"));
            }
        }
        checked += 1;
    }
    Ok(format!("{checked} tuples, T_4 and T_7 exact in Q(i)"))
}

/// Criterion 2: level 968, weight 6; exact tr T_7 over all ten tuples, with
/// the two Q(sqrt 3) values pinned.
fn body_2() -> Result<String, String> {
    let neb = Nebentypus::trivial(11, 2).unwrap();
    let eps11 = [1i64, -1, 1, -1, 1];
    let x11 = [1i64, 1, -2, 1, 1];
    let sqrt3 = CycNumber::sqrt_squarefree(3).unwrap();
    let y11 = |w: u64| -> CycNumber {
        match w {
            1 => sqrt3.clone(),
            2 => CycNumber::from_integer(-1),
            3 => CycNumber::zero(),
            4 => CycNumber::from_integer(1),
            5 => sqrt3.neg(),
            _ => unreachable!(),
        }
    };
    let mut checked = 0;
    for zeta_sign in [1i64, -1] {
        let zeta = if zeta_sign == 1 {
            RootOfUnity::one()
        } else {
            RootOfUnity::minus_one()
        };
        for w in 1..=5u64 {
            let tuple = SigmaTuple::new(
                neb.clone(),
                vec![
                    LocalRepData::DepthZero(crate::local_reps::DepthZeroRep {
                        p: 11,
                        m: 10 * w,
                    }),
                    LocalRepData::Simple(SimpleRep { p: 2, t: 1, zeta }),
                ],
            )
            .unwrap();
            let got = trace_hecke(&tuple, 6, 7).map_err(|e| e.to_string())?.total;
            let rational_part = -98 * zeta_sign * eps11[(w - 1) as usize]
                - 5 * zeta_sign * x11[(w - 1) as usize];
            let expect = CycNumber::from_integer(rational_part)
                .add(&y11(w).scale_by_integer(-31));
            if !got.equals(&expect) {
                return Err(format!(
                    "tr T_7 mismatch at (zeta, nu_{}0): got {got}, want {expect}",
                    w
                ));
            }
            checked += 1;
        }
    }
    // Pin the two irrational values.
    let pin = |w: u64, sign: i64| -> Result<(), String> {
        let tuple = SigmaTuple::new(
            neb.clone(),
            vec![
                LocalRepData::DepthZero(crate::local_reps::DepthZeroRep { p: 11, m: 10 * w }),
                LocalRepData::Simple(SimpleRep {
                    p: 2,
                    t: 1,
                    zeta: RootOfUnity::one(),
                }),
            ],
        )
        .unwrap();
        let got = trace_hecke(&tuple, 6, 7).map_err(|e| e.to_string())?.total;
        let expect = CycNumber::from_integer(-103).add(&sqrt3.scale_by_integer(sign * 31));
        if !got.equals(&expect) {
            return Err(format!("pinned value at nu_{}0 mismatch", w));
        }
        Ok(())
    };
    pin(1, -1)?; // -103 - 31 sqrt(3)
    pin(5, 1)?; // -103 + 31 sqrt(3)
    Ok(format!("{checked} tuples, tr T_7 exact in Q(sqrt 3)"))
}

/// Criterion 3: dimension tables at levels 8 and 27 over the stated weight
/// ranges, plus the ten level-968 dimensions.
fn body_3() -> Result<String, String> {
    let mut checked = 0;
    // Level 8, both zeta, k in {4,...,40} even.
    let neb8 = Nebentypus::trivial(1, 2).unwrap();
    for k in (4..=40).step_by(2) {
        for tuple in enumerate_tuples(&neb8).map_err(|e| e.to_string())? {
            let LocalRepData::Simple(sr) = &tuple.reps()[0] else {
                unreachable!()
            };
            let zeta = sr.zeta.as_sign().unwrap();
            let engine = dimension(&tuple, k).map_err(|e| e.to_string())?;
            let closed = closed_forms::dim_n8(k, zeta);
            if engine != closed {
                return Err(format!(
                    "level 8: k = {k}, zeta = {zeta}: engine {engine} != closed {closed}"
                ));
            }
            checked += 1;
        }
    }
    // Level 27, all admissible (t, zeta, omega'), k in {3,...,40}.
    for k in 3..=40u32 {
        let neb = if k % 2 == 0 {
            Nebentypus::trivial(1, 3).unwrap()
        } else {
            Nebentypus::quadratic(1, 3, 3).unwrap()
        };
        for tuple in enumerate_tuples(&neb).map_err(|e| e.to_string())? {
            if !validate_tuple(&tuple, k).is_empty() {
                continue;
            }
            let LocalRepData::Simple(sr) = &tuple.reps()[0] else {
                unreachable!()
            };
            let ts = if sr.t == 1 { 1 } else { -1 };
            let engine = dimension(&tuple, k).map_err(|e| e.to_string())?;
            let closed =
                closed_forms::dim_n27(k, ts, sr.zeta).map_err(|e| e.to_string())?;
            if engine != closed {
                return Err(format!(
                    "level 27: k = {k}, t = {ts}, zeta = {}: engine {engine} != closed {closed}",
                    sr.zeta
                ));
            }
            checked += 1;
        }
    }
    // Level 968, weight 6: dimension 7 exactly for (zeta, nu) in
    // {(1, nu40), (-1, nu20)}, else 6.
    let neb968 = Nebentypus::trivial(11, 2).unwrap();
    for tuple in enumerate_tuples(&neb968).map_err(|e| e.to_string())? {
        let m = tuple
            .reps()
            .iter()
            .find_map(|r| match r {
                LocalRepData::DepthZero(d) => Some(d.m),
                _ => None,
            })
            .unwrap();
        let zeta = tuple
            .reps()
            .iter()
            .find_map(|r| match r {
                LocalRepData::Simple(s) => s.zeta.as_sign(),
                _ => None,
            })
            .unwrap();
        let want = if (zeta == 1 && m == 40) || (zeta == -1 && m == 20) {
            7
        } else {
            6
        };
        let engine = dimension(&tuple, 6).map_err(|e| e.to_string())?;
        if engine != want {
            return Err(format!(
                "level 968: (zeta, nu_{m}): engine {engine} != expected {want}"
            ));
        }
        checked += 1;
    }
    Ok(format!("{checked} dimension-table entries"))
}

/// Criterion 4: global consistency sums over T in {2,3,5,6,7,10,11} and
/// k in {4,...,20} even: the full new-space dimension and the partial sums
/// over the zeta parameters.
fn body_4() -> Result<String, String> {
    let mut checked = 0;
    for t in [2u64, 3, 5, 6, 7, 10, 11] {
        let neb = Nebentypus::trivial(1, t).unwrap();
        for k in (4..=20u32).step_by(2) {
            let dims = dimensions_all(&neb, k).map_err(|e| e.to_string())?;
            let total: u64 = dims.iter().map(|(_, d)| d).sum();
            let expect = closed_forms::dim_new_t3(t, k).map_err(|e| e.to_string())?;
            if BigRational::from_integer(BigInt::from(total)) != expect {
                return Err(format!(
                    "sum over tuples at T = {t}, k = {k}: {total} != {expect}"
                ));
            }
            // Partial sums over the zeta branches at fixed t parameters.
            // The identity holds for T > 3, where the only surviving class
            // pairs off the two zeta signs; at T = 2, 3 the extra torsion
            // classes contribute zeta-independent terms and the levels are
            // pinned by their own closed forms instead.
            if t > 3 {
                let mut by_t: std::collections::BTreeMap<Vec<(u64, u64)>, u64> =
                    std::collections::BTreeMap::new();
                for (tuple, d) in &dims {
                    let key: Vec<(u64, u64)> = tuple
                        .reps()
                        .iter()
                        .map(|r| match r {
                            LocalRepData::Simple(s) => (s.p, s.t),
                            _ => unreachable!(),
                        })
                        .collect();
                    *by_t.entry(key).or_insert(0) += d;
                }
                let gross = closed_forms::gross_sum(t, k);
                for (key, sum) in by_t {
                    if BigRational::from_integer(BigInt::from(sum)) != gross {
                        return Err(format!(
                            "partial sum at T = {t}, k = {k}, t-params {key:?}: {sum} != {gross}"
                        ));
                    }
                    checked += 1;
                }
            }
            checked += 1;
        }
    }
    // The two small-level closed forms again, as sums.
    for k in (4..=20u32).step_by(2) {
        let n8: u64 = dimensions_all(&Nebentypus::trivial(1, 2).unwrap(), k)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|(_, d)| d)
            .sum();
        if n8 != (k / 4) as u64 {
            return Err(format!("dim new(8) at k = {k}: {n8} != {}", k / 4));
        }
        let n27: u64 = dimensions_all(&Nebentypus::trivial(1, 3).unwrap(), k)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|(_, d)| d)
            .sum();
        if n27 != (k - 1 + k / 3) as u64 {
            return Err(format!("dim new(27) at k = {k}: {n27} != {}", k - 1 + k / 3));
        }
        checked += 2;
    }
    Ok(format!("{checked} consistency sums"))
}

/// Criterion 5: engine vs closed forms: level T^3 against the general
/// theorem, level S^2 against both depth-zero statements, and the
/// twist-minimal dimension and bias by direct summation.
fn body_5() -> Result<String, String> {
    let mut checked = 0;
    // T^3 side.
    for t in [5u64, 7, 10, 11, 13, 14, 15] {
        let neb = Nebentypus::trivial(1, t).unwrap();
        for k in (4..=16u32).step_by(2) {
            for tuple in enumerate_tuples(&neb).map_err(|e| e.to_string())? {
                let engine = dimension(&tuple, k).map_err(|e| e.to_string())?;
                let closed = closed_forms::dim_t3(&tuple, k).map_err(|e| e.to_string())?;
                if BigRational::from_integer(BigInt::from(engine)) != closed {
                    return Err(format!(
                        "T = {t}, k = {k}, tuple {}: engine {engine} != closed {closed}",
                        tuple.label()
                    ));
                }
                checked += 1;
            }
        }
    }
    // S^2 side, plus twist-minimal sums and bias.
    for s in [2u64, 3, 5, 7, 11, 13, 23] {
        let neb = Nebentypus::trivial(s, 1).unwrap();
        for k in (4..=12u32).step_by(2) {
            let mut total = BigRational::zero();
            let mut bias = BigRational::zero();
            for tuple in enumerate_tuples(&neb).map_err(|e| e.to_string())? {
                let engine = dimension(&tuple, k).map_err(|e| e.to_string())?;
                let engine_q = BigRational::from_integer(BigInt::from(engine));
                let d0dim = closed_forms::dim_s2(&tuple, k).map_err(|e| e.to_string())?;
                let d0thm =
                    closed_forms::dim_s2_trivial(&tuple, k).map_err(|e| e.to_string())?;
                if engine_q != d0dim || engine_q != d0thm {
                    return Err(format!(
                        "S = {s}, k = {k}, tuple {}: engine {engine} vs {d0dim} / {d0thm}",
                        tuple.label()
                    ));
                }
                let eps = crate::local_reps::global_root_number(k, &tuple)
                    .and_then(|e| e.as_sign())
                    .ok_or_else(|| "missing root number".to_string())?;
                total += engine_q.clone();
                if eps == 1 {
                    bias += engine_q;
                } else {
                    bias -= engine_q;
                }
                checked += 1;
            }
            let smin = closed_forms::smin_dim(s, k).map_err(|e| e.to_string())?;
            if total != smin {
                return Err(format!("twist-minimal sum at S = {s}, k = {k}: {total} != {smin}"));
            }
            let sbias = closed_forms::sbias(s, k).map_err(|e| e.to_string())?;
            if bias != sbias {
                return Err(format!("bias at S = {s}, k = {k}: {bias} != {sbias}"));
            }
            checked += 2;
        }
    }
    // Exceptional vanishings.
    for (s, k) in [(2u64, 8u32), (3, 6)] {
        let total: u64 = dimensions_all(&Nebentypus::trivial(s, 1).unwrap(), k)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|(_, d)| d)
            .sum();
        if total != 0 {
            return Err(format!("expected S_{k}^min({s}^2) = 0, got {total}"));
        }
        checked += 1;
    }
    Ok(format!("{checked} engine-vs-closed-form comparisons"))
}

/// Criterion 6: root-number split of the new space at level T^3 against the
/// closed form, for both signs.
fn body_6() -> Result<String, String> {
    let mut checked = 0;
    for t in [5u64, 7, 10, 11, 13] {
        let neb = Nebentypus::trivial(1, t).unwrap();
        for k in (4..=16u32).step_by(2) {
            let totals = bias_partition(&neb, k).map_err(|e| e.to_string())?;
            let plus = *totals.get(&RootOfUnity::one()).unwrap_or(&0);
            let minus = *totals.get(&RootOfUnity::minus_one()).unwrap_or(&0);
            let (ep, em) = closed_forms::pq_dims(t, k).map_err(|e| e.to_string())?;
            if BigRational::from_integer(BigInt::from(plus)) != ep
                || BigRational::from_integer(BigInt::from(minus)) != em
            {
                return Err(format!(
                    "T = {t}, k = {k}: split ({plus}, {minus}) != ({ep}, {em})"
                ));
            }
            checked += 2;
        }
    }
    Ok(format!("{checked} signed dimension totals"))
}

/// Deterministic pseudo-random generator for the property suite.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }
}

/// Criterion 7: property suite (oracle equivalence, partition identity,
/// odd-weight vanishing, integrality, shadow agreement, forced elliptic
/// contributions).
fn body_7() -> Result<String, String> {
    let mut notes = Vec::new();
    // (a) closed-form lattice count vs brute-force enumeration.
    let mut rng = Rng(0x5eed_cafe_f00d_1234);
    let mut oracle_checked = 0;
    for ell in [2u64, 3, 5, 7, 11, 13] {
        let mut per_ell = 0;
        while per_ell < 40 {
            let tr = rng.next() % 40;
            let base = 1 + rng.next() % 60;
            let det = base * ell.pow((rng.next() % 4) as u32);
            if tr * tr >= 4 * det {
                continue;
            }
            let gamma = GammaClass::from_trace_det(tr, det).map_err(|e| e.to_string())?;
            if valuation(gamma.delta, ell) > 6 || is_square_in_qp(gamma.delta, ell) {
                continue;
            }
            let cap = valuation(gamma.delta, ell) + 1;
            let oracle = lattice_orbital_oracle(&gamma, ell, cap).map_err(|e| e.to_string())?;
            let formula = phi_ell(&gamma, ell);
            if oracle != formula {
                return Err(format!(
                    "phi_ell mismatch at ell = {ell}, gamma = {}: formula {formula}, oracle {oracle}",
                    gamma.matrix_string()
                ));
            }
            per_ell += 1;
            oracle_checked += 1;
        }
    }
    notes.push(format!("(a) {oracle_checked} oracle equivalences"));
    // (b) partition identity.
    let mut partition_checked = 0;
    for p in [2u64, 3, 5, 7, 11, 13] {
        for _ in 0..20 {
            let tr = rng.next() % 30;
            let det = 1 + rng.next() % 80;
            let gamma = match GammaClass::from_trace_det(tr, det) {
                Ok(g) => g,
                Err(_) => continue,
            };
            let vmax = valuation(gamma.delta, p).min(3);
            for n in 1..=vmax.max(1) {
                let row_sum: u64 = n_gamma_row(&gamma, p, n).iter().sum();
                let modulus = p.pow(n + 1);
                let direct = (0..modulus)
                    .filter(|&b| gamma.charpoly_mod(b, modulus) % p.pow(n) == 0)
                    .count() as u64;
                if row_sum != direct {
                    return Err(format!(
                        "partition identity fails at p = {p}, n = {n}, gamma = {}",
                        gamma.matrix_string()
                    ));
                }
                partition_checked += 1;
            }
        }
    }
    notes.push(format!("(b) {partition_checked} partition identities"));
    // (c) odd-weight vanishing of the elliptic terms for T in {5, 7, 11}.
    let mut kodd_checked = 0;
    for (t, exp) in [(5u64, 1u64), (7, 3), (11, 5)] {
        let neb = Nebentypus::from_exponents(1, t, &[(t, exp)]).map_err(|e| e.to_string())?;
        if neb.parity() != -1 {
            return Err(format!("test character at T = {t} is not odd"));
        }
        for k in [5u32, 7, 9] {
            for tuple in enumerate_tuples(&neb).map_err(|e| e.to_string())? {
                if !validate_tuple(&tuple, k).is_empty() {
                    continue;
                }
                let report = trace_hecke(&tuple, k, 1).map_err(|e| e.to_string())?;
                let elliptic_vanishes = report
                    .gamma_terms
                    .iter()
                    .all(|term| term.product.is_zero());
                let main = closed_forms::dim_kodd(1, t, k).map_err(|e| e.to_string())?;
                if !elliptic_vanishes
                    || report.rationalized.as_ref() != Some(&main)
                {
                    return Err(format!(
                        "odd-weight vanishing fails at T = {t}, k = {k}, tuple {}",
                        tuple.label()
                    ));
                }
                kodd_checked += 1;
            }
        }
    }
    notes.push(format!("(c) {kodd_checked} odd-weight identities"));
    // (d) integrality and nonnegativity: enforced by dimension() on every
    // computation above and below; exercise one sweep explicitly.
    let mut dims_checked = 0;
    for t in [2u64, 3, 5] {
        let neb = Nebentypus::trivial(1, t).unwrap();
        for k in (4..=10u32).step_by(2) {
            for (_, _d) in dimensions_all(&neb, k).map_err(|e| e.to_string())? {
                dims_checked += 1;
            }
        }
    }
    notes.push(format!("(d) {dims_checked} integral dimensions"));
    // (e) exact/float shadow agreement at 1e-9 relative on a spread of
    // trace reports.
    let mut shadow_checked = 0;
    for (t, zeta, tuple) in n27_tuples() {
        let _ = (t, zeta);
        for n in [1u64, 4, 7, 13] {
            let report = trace_hecke(&tuple, 5, n).map_err(|e| e.to_string())?;
            let image = report.total.approx();
            let err = ((report.total_float.0 - image.re).powi(2)
                + (report.total_float.1 - image.im).powi(2))
            .sqrt();
            if err > 1e-9 * (1.0 + image.abs()) {
                return Err(format!("shadow drift {err} at n = {n}"));
            }
            shadow_checked += 1;
        }
    }
    let neb968 = Nebentypus::trivial(11, 2).unwrap();
    for tuple in enumerate_tuples(&neb968).map_err(|e| e.to_string())? {
        let report = trace_hecke(&tuple, 6, 7).map_err(|e| e.to_string())?;
        let image = report.total.approx();
        let err = ((report.total_float.0 - image.re).powi(2)
            + (report.total_float.1 - image.im).powi(2))
        .sqrt();
        if err > 1e-9 * (1.0 + image.abs()) {
            return Err("shadow drift at level 968".into());
        }
        shadow_checked += 1;
    }
    notes.push(format!("(e) {shadow_checked} shadow agreements"));
    // (f) non-integral identity term forces a nonzero elliptic total:
    // T = 2 (k != 1 mod 8), T = 3 (k != 1 mod 3), T = 2p with p = 3,5 mod 8.
    let mut forced_checked = 0;
    let families: Vec<(u64, Vec<u32>)> = vec![
        (2, (4..=20).step_by(2).collect()),
        (3, (4..=20).step_by(2).filter(|k| k % 3 != 1).collect()),
        (6, (4..=12).step_by(2).collect()),
        (10, (4..=12).step_by(2).collect()),
    ];
    for (t, ks) in families {
        let neb = Nebentypus::trivial(1, t).unwrap();
        for k in ks {
            for tuple in enumerate_tuples(&neb).map_err(|e| e.to_string())? {
                let id = identity_term(&tuple, k, 1)
                    .as_rational()
                    .ok_or("identity term must be rational")?;
                if id.is_integer() {
                    return Err(format!(
                        "identity term unexpectedly integral at T = {t}, k = {k}"
                    ));
                }
                let report = trace_hecke(&tuple, k, 1).map_err(|e| e.to_string())?;
                let total = report
                    .rationalized
                    .ok_or("dimension must be rational")?;
                if (&total - &id).is_zero() {
                    return Err(format!(
                        "elliptic total vanished at T = {t}, k = {k}, tuple {}",
                        tuple.label()
                    ));
                }
                forced_checked += 1;
            }
        }
    }
    notes.push(format!("(f) {forced_checked} forced elliptic totals"));
    Ok(notes.join("; "))
}

/// Criterion 8: offline LMFDB fixture comparison for levels 27 (weight 5)
/// and 968 (weight 6).
fn body_8() -> Result<String, String> {
    let cfg = LmfdbConfig::offline_only();
    let neb27 = Nebentypus::quadratic(1, 3, 3).unwrap();
    let s27 = check_against_lmfdb(&cfg, &neb27, 5).map_err(|e| e.to_string())?;
    if !s27.consistent() {
        return Err(format!("level 27: {:?}", s27.mismatches));
    }
    let neb968 = Nebentypus::trivial(11, 2).unwrap();
    let s968 = check_against_lmfdb(&cfg, &neb968, 6).map_err(|e| e.to_string())?;
    if !s968.consistent() {
        return Err(format!("level 968: {:?}", s968.mismatches));
    }
    Ok(format!(
        "consistent partitions: 27.5 in {} classes, 968.6 in {} classes",
        s27.classes.len(),
        s968.classes.len()
    ))
}

pub fn criterion_1() -> CriterionOutcome {
    run_criterion(1, "level 27 weight 5 exact Hecke traces", 1_000, body_1)
}

pub fn criterion_2() -> CriterionOutcome {
    run_criterion(2, "level 968 weight 6 exact Hecke traces", 5_000, body_2)
}

pub fn criterion_3() -> CriterionOutcome {
    run_criterion(3, "dimension tables at levels 8, 27, 968", 10_000, body_3)
}

pub fn criterion_4() -> CriterionOutcome {
    run_criterion(4, "global consistency sums", 60_000, body_4)
}

pub fn criterion_5() -> CriterionOutcome {
    run_criterion(5, "engine vs closed-form oracle", 300_000, body_5)
}

pub fn criterion_6() -> CriterionOutcome {
    run_criterion(6, "root-number bias split", 300_000, body_6)
}

pub fn criterion_7() -> CriterionOutcome {
    run_criterion(7, "property suite", 300_000, body_7)
}

pub fn criterion_8() -> CriterionOutcome {
    run_criterion(8, "LMFDB fixture comparison", 60_000, body_8)
}

/// Runs every criterion in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
    ]
}
