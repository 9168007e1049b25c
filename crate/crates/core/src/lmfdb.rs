//! Optional cross-validation against LMFDB newform data: fetch Galois-orbit
//! records (dimensions, trace-form coefficients, Atkin-Lehner signs) over
//! the public HTTP API, cache responses locally, and compare against engine
//! output. Fixtures for the two bundled example levels ship in the repo so
//! the whole path runs offline.
//!
//! A Galois orbit is usually a direct sum of several tuple spaces (and
//! occasionally the other way around), so the comparison partitions both
//! sides by Atkin-Lehner signs or root number and checks that dimension and
//! trace sums agree within each class, rather than claiming a bijection.
//!
//! Convention note: the nebentypus used in this crate is the inverse of the
//! usual one, so the comparator inverts it before mapping to an LMFDB
//! character orbit. For quadratic characters (both bundled examples) the
//! inversion is the identity.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{CycNumber, RootOfUnity};
use crate::engine::{dimension, trace_hecke};
use crate::local_reps::{global_root_number, root_number, SigmaTuple};
use crate::residue::Nebentypus;
use crate::Error;

/// One Galois orbit of newforms as tabulated by LMFDB. `traces` maps n to
/// the trace of T_n on the orbit (the rational-subfield trace form); only
/// the entries actually known are present, and traces[1] equals dim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub label: String,
    pub level: u64,
    pub weight: u32,
    pub char_orbit: String,
    pub dim: u64,
    pub traces: BTreeMap<u64, i64>,
    /// Atkin-Lehner signs keyed by prime, when defined (trivial character).
    #[serde(default)]
    pub al_signs: BTreeMap<u64, i32>,
    /// Root number as "1", "-1", "i", "-i", or "pm_i" for a conjugate pair;
    /// None when unknown.
    #[serde(default)]
    pub root_number: Option<String>,
}

impl OrbitRecord {
    fn validate(&self) -> Result<(), Error> {
        if self.dim == 0 {
            return Err(Error::Lmfdb(format!("orbit {} has dim 0", self.label)));
        }
        if let Some(&a1) = self.traces.get(&1) {
            if a1 != self.dim as i64 {
                return Err(Error::Lmfdb(format!(
                    "orbit {}: traces[1] = {a1} != dim = {}",
                    self.label, self.dim
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CachedQuery {
    query: serde_json::Value,
    source: String,
    records: Vec<OrbitRecord>,
}

/// Access configuration; every field has an environment override.
#[derive(Debug, Clone)]
pub struct LmfdbConfig {
    pub base_url: String,
    pub cache_dir: Option<PathBuf>,
    pub offline: bool,
}

pub const ENV_BASE_URL: &str = "NEWFORM_TRACE_LMFDB_URL";
pub const ENV_CACHE_DIR: &str = "NEWFORM_TRACE_CACHE_DIR";
pub const ENV_OFFLINE: &str = "NEWFORM_TRACE_OFFLINE";

impl Default for LmfdbConfig {
    fn default() -> Self {
        LmfdbConfig {
            base_url: std::env::var(ENV_BASE_URL)
                .unwrap_or_else(|_| "https://www.lmfdb.org".into()),
            cache_dir: std::env::var(ENV_CACHE_DIR).ok().map(PathBuf::from),
            offline: std::env::var(ENV_OFFLINE).map_or(false, |v| v != "0" && !v.is_empty()),
        }
    }
}

impl LmfdbConfig {
    pub fn offline_only() -> Self {
        LmfdbConfig {
            base_url: String::new(),
            cache_dir: None,
            offline: true,
        }
    }
}

/// Repo-bundled fixtures, keyed by (level, weight, char orbit label).
fn fixture(level: u64, weight: u32, char_label: &str) -> Option<&'static str> {
    match (level, weight, char_label) {
        (27, 5, "27.b") => Some(include_str!("../fixtures/lmfdb_27_5_27.b.json")),
        (968, 6, "968.a") => Some(include_str!("../fixtures/lmfdb_968_6_968.a.json")),
        _ => None,
    }
}

fn parse_cached(text: &str) -> Result<Vec<OrbitRecord>, Error> {
    let cached: CachedQuery = serde_json::from_str(text)
        .map_err(|e| Error::Lmfdb(format!("cannot parse cached query: {e}")))?;
    for r in &cached.records {
        r.validate()?;
    }
    Ok(cached.records)
}

/// Parses the raw LMFDB API response into orbit records. Field names are
/// checked one by one so schema drift produces a useful error.
fn parse_api_response(
    text: &str,
    level: u64,
    weight: u32,
    char_label: &str,
) -> Result<Vec<OrbitRecord>, Error> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::Lmfdb(format!("response is not JSON: {e}")))?;
    let data = value
        .get("data")
        .and_then(|d| d.as_array())
        .ok_or_else(|| Error::Lmfdb("response is missing the `data` array".into()))?;
    let mut out = Vec::new();
    for row in data {
        let field = |name: &str| {
            row.get(name)
                .ok_or_else(|| Error::Lmfdb(format!("orbit row is missing field `{name}`")))
        };
        let label = field("label")?
            .as_str()
            .ok_or_else(|| Error::Lmfdb("`label` is not a string".into()))?
            .to_string();
        let dim = field("dim")?
            .as_u64()
            .ok_or_else(|| Error::Lmfdb("`dim` is not an integer".into()))?;
        let mut traces = BTreeMap::new();
        if let Some(arr) = field("traces")?.as_array() {
            for (i, v) in arr.iter().enumerate() {
                if let Some(t) = v.as_i64() {
                    traces.insert(i as u64 + 1, t);
                }
            }
        }
        let mut al_signs = BTreeMap::new();
        if let Some(arr) = row.get("atkin_lehner_eigenvals").and_then(|v| v.as_array()) {
            for pair in arr {
                if let (Some(p), Some(s)) = (
                    pair.get(0).and_then(|x| x.as_u64()),
                    pair.get(1).and_then(|x| x.as_i64()),
                ) {
                    al_signs.insert(p, s as i32);
                }
            }
        }
        let rec = OrbitRecord {
            label,
            level,
            weight,
            char_orbit: char_label.to_string(),
            dim,
            traces,
            al_signs,
            root_number: None,
        };
        rec.validate()?;
        out.push(rec);
    }
    Ok(out)
}

fn cache_path(cfg: &LmfdbConfig, level: u64, weight: u32, char_label: &str) -> Option<PathBuf> {
    cfg.cache_dir
        .as_ref()
        .map(|d| d.join(format!("lmfdb_{level}_{weight}_{char_label}.json")))
}

/// Atomic write: temp file in the same directory, then rename.
fn write_cache(path: &PathBuf, payload: &CachedQuery) -> Result<(), Error> {
    let dir = path.parent().ok_or_else(|| Error::Lmfdb("bad cache path".into()))?;
    std::fs::create_dir_all(dir).map_err(|e| Error::Lmfdb(format!("cache dir: {e}")))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        path.file_name().unwrap().to_string_lossy(),
        std::process::id()
    ));
    let text = serde_json::to_string_pretty(payload).expect("serializable");
    {
        let mut f =
            std::fs::File::create(&tmp).map_err(|e| Error::Lmfdb(format!("cache write: {e}")))?;
        f.write_all(text.as_bytes())
            .map_err(|e| Error::Lmfdb(format!("cache write: {e}")))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| Error::Lmfdb(format!("cache rename: {e}")))?;
    Ok(())
}

/// Fetches the Galois orbits at (level, weight, char orbit). Resolution
/// order: local cache, then bundled fixture, then (unless offline) the
/// network, caching the parsed result.
pub fn fetch_orbits(
    cfg: &LmfdbConfig,
    level: u64,
    weight: u32,
    char_label: &str,
) -> Result<Vec<OrbitRecord>, Error> {
    if let Some(path) = cache_path(cfg, level, weight, char_label) {
        if let Ok(text) = std::fs::read_to_string(&path) {
            return parse_cached(&text);
        }
    }
    if let Some(text) = fixture(level, weight, char_label) {
        return parse_cached(text);
    }
    if cfg.offline {
        return Err(Error::Lmfdb(format!(
            "offline, no fixture for {level}.{weight} character {char_label}"
        )));
    }
    let url = format!(
        "{}/api/mf_newforms/?level=i{level}&weight=i{weight}&char_orbit_label=s{char_label}\
         &_format=json&_fields=label,dim,traces,atkin_lehner_eigenvals",
        cfg.base_url
    );
    let text = ureq::get(&url)
        .call()
        .map_err(|e| Error::Lmfdb(format!("GET {url}: {e}")))?
        .into_string()
        .map_err(|e| Error::Lmfdb(format!("reading response: {e}")))?;
    let records = parse_api_response(&text, level, weight, char_label)?;
    if let Some(path) = cache_path(cfg, level, weight, char_label) {
        write_cache(
            &path,
            &CachedQuery {
                query: serde_json::json!({
                    "level": level, "weight": weight, "char_orbit_label": char_label,
                }),
                source: url,
                records: records.clone(),
            },
        )?;
    }
    Ok(records)
}

/// LMFDB character-orbit label for the inverse of our nebentypus, for the
/// character orbits this crate can name: the trivial one and the bundled
/// quadratic-mod-3 orbit at level 27. The inversion is applied first; for
/// characters of order at most 2 it is the identity, which the caller can
/// rely on for the bundled examples.
pub fn char_orbit_label(neb: &Nebentypus) -> Option<String> {
    // Invert: negate every exponent mod (p - 1). Quadratic components are
    // fixed by this.
    let inverted: Vec<(u64, u64)> = neb
        .locals()
        .iter()
        .map(|lc| (lc.p, (lc.p - 1 - lc.exponent) % (lc.p - 1).max(1)))
        .collect();
    let inv = Nebentypus::from_exponents(neb.s(), neb.t(), &inverted).ok()?;
    if inv.conductor() == 1 {
        return Some(format!("{}.a", neb.level()));
    }
    if neb.level() == 27 && inv == Nebentypus::quadratic(1, 3, 3).ok()? {
        return Some("27.b".into());
    }
    None
}

/// Engine-side summary of one tuple for comparison purposes.
#[derive(Debug, Clone)]
pub struct TupleSummary {
    pub label: String,
    pub dim: u64,
    pub al_signs: Option<Vec<(u64, i32)>>,
    pub root_number: Option<RootOfUnity>,
    pub traces: BTreeMap<u64, CycNumber>,
}

/// Computes the summary of a tuple: dimension, local signs where real, the
/// global root number, and exact traces at the requested Hecke indices.
pub fn summarize_tuple(
    tuple: &SigmaTuple,
    k: u32,
    hecke_ns: &[u64],
) -> Result<TupleSummary, Error> {
    let dim = dimension(tuple, k)?;
    let mut traces = BTreeMap::new();
    for &n in hecke_ns {
        if n <= 1 {
            continue;
        }
        let report = trace_hecke(tuple, k, n)?;
        traces.insert(n, report.total);
    }
    // Per-prime Atkin-Lehner signs are only defined (and only tabulated by
    // LMFDB) for trivial nebentypus.
    let mut al = Vec::new();
    let mut all_real = tuple.neb().is_trivial();
    if all_real {
        for rep in tuple.reps() {
            match root_number(rep, tuple.neb()).and_then(|r| r.as_sign()) {
                Some(s) => al.push((rep.p(), s)),
                None => {
                    all_real = false;
                    break;
                }
            }
        }
    }
    Ok(TupleSummary {
        label: tuple.label(),
        dim,
        al_signs: all_real.then_some(al),
        root_number: global_root_number(k, tuple),
        traces,
    })
}

/// Partition key shared by both sides of the comparison: per-prime
/// Atkin-Lehner signs when available, otherwise root-number class (with
/// conjugate imaginary values merged, since a Galois orbit mixes them).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ClassKey {
    Al(Vec<(u64, i32)>),
    EpsPlus,
    EpsMinus,
    EpsImaginary,
    EpsOther(u64, u64),
}

impl std::fmt::Display for ClassKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClassKey::Al(signs) => {
                let parts: Vec<String> = signs
                    .iter()
                    .map(|(p, s)| format!("{}{p}", if *s > 0 { '+' } else { '-' }))
                    .collect();
                write!(f, "AL({})", parts.join(","))
            }
            ClassKey::EpsPlus => write!(f, "eps=+1"),
            ClassKey::EpsMinus => write!(f, "eps=-1"),
            ClassKey::EpsImaginary => write!(f, "eps=+-i"),
            ClassKey::EpsOther(n, d) => write!(f, "eps~e({n}/{d})"),
        }
    }
}

fn eps_key(eps: &RootOfUnity) -> ClassKey {
    match eps.as_sign() {
        Some(1) => ClassKey::EpsPlus,
        Some(-1) => ClassKey::EpsMinus,
        _ if eps.order() == 4 => ClassKey::EpsImaginary,
        _ => {
            // Merge conjugates.
            let n = eps.numerator().min(eps.conj().numerator());
            ClassKey::EpsOther(n, eps.order())
        }
    }
}

fn tuple_key(s: &TupleSummary) -> Result<ClassKey, Error> {
    if let Some(al) = &s.al_signs {
        return Ok(ClassKey::Al(al.clone()));
    }
    s.root_number
        .as_ref()
        .map(eps_key)
        .ok_or_else(|| Error::Lmfdb(format!("tuple {} has no usable partition key", s.label)))
}

fn orbit_key(o: &OrbitRecord) -> Result<ClassKey, Error> {
    if !o.al_signs.is_empty() {
        return Ok(ClassKey::Al(o.al_signs.iter().map(|(&p, &s)| (p, s)).collect()));
    }
    match o.root_number.as_deref() {
        Some("1") => Ok(ClassKey::EpsPlus),
        Some("-1") => Ok(ClassKey::EpsMinus),
        Some("i") | Some("-i") | Some("pm_i") => Ok(ClassKey::EpsImaginary),
        other => Err(Error::Lmfdb(format!(
            "orbit {} has no usable partition key ({other:?})",
            o.label
        ))),
    }
}

#[derive(Debug, Clone)]
pub struct ClassDiff {
    pub key: String,
    pub tuple_labels: Vec<String>,
    pub orbit_labels: Vec<String>,
    pub tuple_dim_sum: u64,
    pub orbit_dim_sum: u64,
    pub dims_match: bool,
    /// (n, engine sum, orbit sum, matched)
    pub trace_checks: Vec<(u64, String, i64, bool)>,
}

#[derive(Debug, Clone)]
pub struct CompareSummary {
    pub classes: Vec<ClassDiff>,
    pub mismatches: Vec<String>,
}

impl CompareSummary {
    pub fn consistent(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Greedy consistency check: partition both sides by class key; within each
/// class the dimension sums and every commonly-known trace sum must match.
/// The result reports a consistent partition, exact mismatches, and
/// unresolvable ambiguities (classes missing on one side).
pub fn compare(
    summaries: &[TupleSummary],
    orbits: &[OrbitRecord],
) -> Result<CompareSummary, Error> {
    let mut tuple_classes: BTreeMap<ClassKey, Vec<&TupleSummary>> = BTreeMap::new();
    for s in summaries {
        tuple_classes.entry(tuple_key(s)?).or_default().push(s);
    }
    let mut orbit_classes: BTreeMap<ClassKey, Vec<&OrbitRecord>> = BTreeMap::new();
    for o in orbits {
        orbit_classes.entry(orbit_key(o)?).or_default().push(o);
    }
    let mut keys: Vec<ClassKey> = tuple_classes
        .keys()
        .chain(orbit_classes.keys())
        .cloned()
        .collect();
    keys.sort();
    keys.dedup();

    let mut classes = Vec::new();
    let mut mismatches = Vec::new();
    for key in keys {
        let tuples = tuple_classes.get(&key).cloned().unwrap_or_default();
        let orbs = orbit_classes.get(&key).cloned().unwrap_or_default();
        let tuple_dim_sum: u64 = tuples.iter().map(|s| s.dim).sum();
        let orbit_dim_sum: u64 = orbs.iter().map(|o| o.dim).sum();
        let dims_match = tuple_dim_sum == orbit_dim_sum;
        if !dims_match {
            mismatches.push(format!(
                "class {key}: dimension sums differ (tuples {tuple_dim_sum}, orbits {orbit_dim_sum})"
            ));
        }
        // Hecke indices known on both entire sides of the class.
        let mut common_ns: Vec<u64> = Vec::new();
        if let Some(first) = tuples.first() {
            for &n in first.traces.keys() {
                if tuples.iter().all(|s| s.traces.contains_key(&n))
                    && orbs.iter().all(|o| o.traces.contains_key(&n))
                    && !orbs.is_empty()
                {
                    common_ns.push(n);
                }
            }
        }
        let mut trace_checks = Vec::new();
        for n in common_ns {
            let mut engine_sum = CycNumber::zero();
            for s in &tuples {
                engine_sum = engine_sum.add(&s.traces[&n]);
            }
            let orbit_sum: i64 = orbs.iter().map(|o| o.traces[&n]).sum();
            let ok = engine_sum
                .equals(&CycNumber::from_rational(BigRational::from_integer(BigInt::from(
                    orbit_sum,
                ))));
            if !ok {
                mismatches.push(format!(
                    "class {key}: trace of T_{n} differs (engine {}, orbits {orbit_sum})",
                    engine_sum.display_string()
                ));
            }
            trace_checks.push((n, engine_sum.display_string(), orbit_sum, ok));
        }
        classes.push(ClassDiff {
            key: key.to_string(),
            tuple_labels: tuples.iter().map(|s| s.label.clone()).collect(),
            orbit_labels: orbs.iter().map(|o| o.label.clone()).collect(),
            tuple_dim_sum,
            orbit_dim_sum,
            dims_match,
            trace_checks,
        });
    }
    Ok(CompareSummary { classes, mismatches })
}

/// End-to-end offline check for one (nebentypus, weight): fetch orbits (from
/// fixture/cache), compute engine summaries at the orbit-known Hecke
/// indices, and compare.
pub fn check_against_lmfdb(
    cfg: &LmfdbConfig,
    neb: &Nebentypus,
    k: u32,
) -> Result<CompareSummary, Error> {
    let label = char_orbit_label(neb).ok_or_else(|| {
        Error::Lmfdb("cannot determine the LMFDB character orbit label for this nebentypus".into())
    })?;
    let orbits = fetch_orbits(cfg, neb.level(), k, &label)?;
    let mut ns: Vec<u64> = orbits
        .iter()
        .flat_map(|o| o.traces.keys().copied())
        .filter(|&n| n > 1 && crate::arith::gcd_u64(n, neb.level()) == 1)
        .collect();
    ns.sort_unstable();
    ns.dedup();
    let mut summaries = Vec::new();
    for tuple in crate::local_reps::enumerate_tuples(neb)? {
        summaries.push(summarize_tuple(&tuple, k, &ns)?);
    }
    compare(&summaries, &orbits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse() {
        let cfg = LmfdbConfig::offline_only();
        let orbits = fetch_orbits(&cfg, 27, 5, "27.b").unwrap();
        assert_eq!(orbits.len(), 3);
        assert_eq!(orbits[0].dim, 1);
        assert_eq!(orbits[1].traces[&4], -76);
        let orbits = fetch_orbits(&cfg, 968, 6, "968.a").unwrap();
        assert_eq!(orbits.len(), 8);
        assert_eq!(orbits.iter().map(|o| o.dim).sum::<u64>(), 62);
        // Unknown level: explicit offline error.
        let err = fetch_orbits(&cfg, 125, 4, "125.a").unwrap_err();
        assert!(matches!(err, Error::Lmfdb(msg) if msg.contains("offline, no fixture")));
    }

    #[test]
    fn cache_roundtrip() {
        let dir = std::env::temp_dir().join(format!("nft-cache-test-{}", std::process::id()));
        let cfg = LmfdbConfig {
            base_url: String::new(),
            cache_dir: Some(dir.clone()),
            offline: true,
        };
        let orbits = fetch_orbits(&cfg, 27, 5, "27.b").unwrap();
        // Write through the cache path, then read back in fixture-free mode.
        let path = cache_path(&cfg, 27, 5, "27.b").unwrap();
        write_cache(
            &path,
            &CachedQuery {
                query: serde_json::json!({}),
                source: "test".into(),
                records: orbits.clone(),
            },
        )
        .unwrap();
        let again = fetch_orbits(&cfg, 27, 5, "27.b").unwrap();
        assert_eq!(orbits, again);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn api_parsing_and_schema_errors() {
        let good = r#"{"data": [{"label": "27.5.b.a", "dim": 1,
            "traces": [1, 0, -6, 16], "atkin_lehner_eigenvals": null}]}"#;
        let recs = parse_api_response(good, 27, 5, "27.b").unwrap();
        assert_eq!(recs[0].traces[&4], 16);
        assert!(recs[0].al_signs.is_empty());
        let missing = r#"{"data": [{"label": "27.5.b.a", "traces": []}]}"#;
        let err = parse_api_response(missing, 27, 5, "27.b").unwrap_err();
        assert!(matches!(err, Error::Lmfdb(msg) if msg.contains("`dim`")));
    }

    #[test]
    fn char_orbit_labels() {
        let triv = Nebentypus::trivial(11, 2).unwrap();
        assert_eq!(char_orbit_label(&triv).unwrap(), "968.a");
        let quad = Nebentypus::quadratic(1, 3, 3).unwrap();
        assert_eq!(char_orbit_label(&quad).unwrap(), "27.b");
        // Inversion is the identity on quadratic characters: same label for
        // the explicitly inverted character.
        let quad_inv = Nebentypus::from_exponents(1, 3, &[(3, 1)]).unwrap();
        assert_eq!(char_orbit_label(&quad_inv).unwrap(), "27.b");
    }

    #[test]
    fn level_27_consistent() {
        let cfg = LmfdbConfig::offline_only();
        let neb = Nebentypus::quadratic(1, 3, 3).unwrap();
        let summary = check_against_lmfdb(&cfg, &neb, 5).unwrap();
        assert!(summary.consistent(), "{:?}", summary.mismatches);
        // eps = +1, -1, +-i classes all present.
        assert_eq!(summary.classes.len(), 3);
        for class in &summary.classes {
            assert!(class.dims_match);
            assert_eq!(class.trace_checks.len(), 2); // T_4 and T_7
        }
    }

    #[test]
    fn level_968_consistent() {
        let cfg = LmfdbConfig::offline_only();
        let neb = Nebentypus::trivial(11, 2).unwrap();
        let summary = check_against_lmfdb(&cfg, &neb, 6).unwrap();
        assert!(summary.consistent(), "{:?}", summary.mismatches);
        assert_eq!(summary.classes.len(), 4); // four AL sign patterns
        for class in &summary.classes {
            assert!(class.dims_match);
        }
    }

    #[test]
    fn identical_inputs_empty_diff() {
        let orbits = vec![OrbitRecord {
            label: "x".into(),
            level: 27,
            weight: 5,
            char_orbit: "27.b".into(),
            dim: 3,
            traces: BTreeMap::from([(1, 3), (4, 5)]),
            al_signs: BTreeMap::new(),
            root_number: Some("1".into()),
        }];
        let summaries = vec![TupleSummary {
            label: "t".into(),
            dim: 3,
            al_signs: None,
            root_number: Some(RootOfUnity::one()),
            traces: BTreeMap::from([(4, CycNumber::from_integer(5))]),
        }];
        let summary = compare(&summaries, &orbits).unwrap();
        assert!(summary.consistent());
        // And a deliberate mismatch is reported as data, not an error.
        let summaries_bad = vec![TupleSummary {
            dim: 2,
            ..summaries[0].clone()
        }];
        let summary = compare(&summaries_bad, &orbits).unwrap();
        assert!(!summary.consistent());
    }
}
