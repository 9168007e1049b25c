//! Command-line front end: dimensions, Hecke traces, representation
//! enumeration, root-number bias tables, the validation suite, and the
//! LMFDB cross-check.
//!
//! Exit codes: 0 success (and all checks passed where applicable), 1 input
//! or computation error, 2 usage error (from argument parsing), 3 internal
//! consistency failure (a value that must be a nonnegative integer is not).

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use newform_trace::acceptance;
use newform_trace::cyclotomic::RootOfUnity;
use newform_trace::engine::{
    bias_partition, dimension, report_csv_row, report_to_json, trace_hecke, CSV_HEADER,
};
use newform_trace::lmfdb::{check_against_lmfdb, LmfdbConfig};
use newform_trace::local_reps::{
    enumerate_tuples, global_root_number, tuple_to_json, LocalRepData, SigmaTuple,
};
use newform_trace::residue::Nebentypus;
use newform_trace::Error;

#[derive(Parser)]
#[command(
    name = "newform-trace",
    about = "Exact dimensions and Hecke traces of newform spaces with prescribed \
             supercuspidal local types at level N = S^2 T^3",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Args)]
struct LevelArgs {
    /// Product of the primes with conductor exponent 2 (level factor S^2).
    #[arg(long = "S", default_value_t = 1)]
    s: u64,
    /// Product of the primes with conductor exponent 3 (level factor T^3).
    #[arg(long = "T", default_value_t = 1)]
    t: u64,
    /// Nebentypus: `trivial`, `qP` (quadratic mod the odd prime P), or
    /// comma-separated `p:exponent` pairs relative to the smallest
    /// primitive root mod p.
    #[arg(long, default_value = "trivial")]
    neb: String,
}

#[derive(Args)]
struct SelectArgs {
    /// Simple-supercuspidal parameter(s): `p=t` pairs, or a bare value when
    /// T is prime. `-1` means the residue p-1.
    #[arg(long = "t", allow_hyphen_values = true, value_delimiter = ',')]
    t_param: Vec<String>,
    /// Root number zeta at p | T: `p=SYM` with SYM one of +1, -1, i, -i,
    /// e(a/b); bare SYM when T is prime.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    zeta: Vec<String>,
    /// Depth-zero character exponent(s) at p | S: `p=m` pairs, or bare m
    /// when S is prime.
    #[arg(long, value_delimiter = ',')]
    nu: Vec<String>,
    /// Select every tuple at the level.
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct LmfdbArgs {
    /// Never touch the network; use fixtures and the local cache only.
    #[arg(long)]
    offline: bool,
    /// Cache directory for fetched responses.
    #[arg(long)]
    cache_dir: Option<std::path::PathBuf>,
    /// Base URL of the LMFDB instance.
    #[arg(long)]
    base_url: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension of S_k for the selected tuple(s).
    Dim {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        select: SelectArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Trace of the Hecke operator T_n on S_k for the selected tuple(s).
    Trace {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long)]
        k: u32,
        /// Hecke index, coprime to the level.
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        select: SelectArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// List the local representations and tuples at a level.
    Enumerate {
        #[command(flatten)]
        level: LevelArgs,
        /// Weight used to annotate admissibility and root numbers.
        #[arg(long, default_value_t = 4)]
        k: u32,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Dimension totals partitioned by global root number.
    Bias {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Run the full validation suite and report per-criterion results.
    Validate,
    /// Compare engine output against LMFDB newform data.
    LmfdbCheck {
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        lmfdb: LmfdbArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

fn parse_neb(args: &LevelArgs) -> Result<Nebentypus, Error> {
    let spec = args.neb.trim();
    if spec.is_empty() || spec == "trivial" {
        return Nebentypus::trivial(args.s, args.t);
    }
    if let Some(rest) = spec.strip_prefix('q') {
        if let Ok(q) = rest.parse::<u64>() {
            return Nebentypus::quadratic(args.s, args.t, q);
        }
    }
    let mut exps = Vec::new();
    for part in spec.split(',') {
        let (p, e) = part
            .split_once(':')
            .ok_or_else(|| Error::Invalid(format!("bad nebentypus component `{part}`")))?;
        let p: u64 = p
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad prime in `{part}`")))?;
        let e: u64 = e
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad exponent in `{part}`")))?;
        exps.push((p, e));
    }
    Nebentypus::from_exponents(args.s, args.t, &exps)
}

fn parse_zeta_symbol(s: &str) -> Result<RootOfUnity, Error> {
    match s.trim() {
        "1" | "+1" => Ok(RootOfUnity::one()),
        "-1" => Ok(RootOfUnity::minus_one()),
        "i" | "+i" => Ok(RootOfUnity::i_power(1)),
        "-i" => Ok(RootOfUnity::i_power(3)),
        other => {
            if let Some(frac) = other.strip_prefix("e(").and_then(|x| x.strip_suffix(')')) {
                if let Some((a, b)) = frac.split_once('/') {
                    let a: i64 = a
                        .trim()
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad zeta `{other}`")))?;
                    let b: u64 = b
                        .trim()
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad zeta `{other}`")))?;
                    return Ok(RootOfUnity::new(a, b));
                }
            }
            Err(Error::Invalid(format!(
                "zeta must be one of +1, -1, i, -i, e(a/b); got `{other}`"
            )))
        }
    }
}

/// Parses `p=value` pairs; a bare value is allowed when exactly one prime
/// is eligible.
fn parse_per_prime<T>(
    entries: &[String],
    primes: &[u64],
    what: &str,
    parse: impl Fn(&str, u64) -> Result<T, Error>,
) -> Result<BTreeMap<u64, T>, Error> {
    let mut out = BTreeMap::new();
    for entry in entries {
        let (p, value) = match entry.split_once('=') {
            Some((p, v)) => {
                let p: u64 = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Invalid(format!("bad prime in `{entry}`")))?;
                (p, v)
            }
            None => {
                if primes.len() != 1 {
                    return Err(Error::Invalid(format!(
                        "bare {what} value `{entry}` needs `p=...` when several primes apply"
                    )));
                }
                (primes[0], entry.as_str())
            }
        };
        if !primes.contains(&p) {
            return Err(Error::Invalid(format!(
                "{what} given at p = {p}, which is not an eligible prime"
            )));
        }
        out.insert(p, parse(value, p)?);
    }
    Ok(out)
}

/// Applies the selection flags to the full tuple enumeration.
fn select_tuples(neb: &Nebentypus, select: &SelectArgs) -> Result<Vec<SigmaTuple>, Error> {
    let s_primes: Vec<u64> = newform_trace::arith::factorize(neb.s()).primes().collect();
    let t_primes: Vec<u64> = newform_trace::arith::factorize(neb.t()).primes().collect();
    let t_map = parse_per_prime(&select.t_param, &t_primes, "t", |v, p| {
        let raw: i64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad t value `{v}`")))?;
        let t = raw.rem_euclid(p as i64) as u64;
        if t == 0 {
            return Err(Error::Invalid(format!("t must be a unit mod {p}")));
        }
        Ok(t)
    })?;
    let zeta_map = parse_per_prime(&select.zeta, &t_primes, "zeta", |v, _| parse_zeta_symbol(v))?;
    let nu_map = parse_per_prime(&select.nu, &s_primes, "nu", |v, _| {
        v.trim()
            .parse::<u64>()
            .map_err(|_| Error::Invalid(format!("bad nu exponent `{v}`")))
    })?;
    if !select.all && t_map.is_empty() && zeta_map.is_empty() && nu_map.is_empty() {
        return Err(Error::Invalid(
            "select a tuple with --t/--zeta/--nu, or pass --all".into(),
        ));
    }
    let tuples: Vec<SigmaTuple> = enumerate_tuples(neb)?
        .into_iter()
        .filter(|tuple| {
            tuple.reps().iter().all(|rep| match rep {
                LocalRepData::Simple(sr) => {
                    t_map.get(&sr.p).map_or(true, |&t| t == sr.t)
                        && zeta_map.get(&sr.p).map_or(true, |&z| z == sr.zeta)
                }
                LocalRepData::DepthZero(dr) => nu_map.get(&dr.p).map_or(true, |&m| m == dr.m),
            })
        })
        .collect();
    if tuples.is_empty() {
        return Err(Error::Invalid(
            "no tuple at this level matches the selection".into(),
        ));
    }
    Ok(tuples)
}

fn eps_string(k: u32, tuple: &SigmaTuple) -> String {
    match global_root_number(k, tuple) {
        Some(e) => e.to_string(),
        None => "unavailable".into(),
    }
}

fn run_dim(level: &LevelArgs, k: u32, select: &SelectArgs, format: Format) -> Result<(), Error> {
    let neb = parse_neb(level)?;
    let tuples = select_tuples(&neb, select)?;
    let mut rows = Vec::new();
    for tuple in &tuples {
        let d = dimension(tuple, k)?;
        rows.push((tuple, d));
    }
    match format {
        Format::Table => {
            println!("level {} weight {k}", neb.level());
            for (tuple, d) in &rows {
                println!("{:<40} dim {:<6} eps {}", tuple.label(), d, eps_string(k, tuple));
            }
            if rows.len() > 1 {
                println!("total: {}", rows.iter().map(|(_, d)| d).sum::<u64>());
            }
        }
        Format::Csv => {
            println!("level,weight,tuple,dim,eps");
            for (tuple, d) in &rows {
                println!(
                    "{},{},\"{}\",{},{}",
                    neb.level(),
                    k,
                    tuple.label(),
                    d,
                    eps_string(k, tuple)
                );
            }
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|(tuple, d)| {
                    serde_json::json!({
                        "tuple": tuple_to_json(tuple, k),
                        "dim": d,
                        "eps": eps_string(k, tuple),
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&items).unwrap());
        }
    }
    Ok(())
}

fn run_trace(
    level: &LevelArgs,
    k: u32,
    n: u64,
    select: &SelectArgs,
    format: Format,
) -> Result<(), Error> {
    let neb = parse_neb(level)?;
    let tuples = select_tuples(&neb, select)?;
    let mut first = true;
    for tuple in &tuples {
        let report = trace_hecke(tuple, k, n)?;
        match format {
            Format::Table => {
                println!(
                    "tr(T_{n}) on S_{k}, level {}, tuple {}",
                    tuple.level(),
                    tuple.label()
                );
                println!("  identity term: {}", report.identity_term.display_string());
                if !report.gamma_terms.is_empty() {
                    println!(
                        "  {:<18} {:>7} {:>6} {:>6}  local factors",
                        "gamma", "Delta", "wt", "m"
                    );
                }
                for term in &report.gamma_terms {
                    let factors: Vec<String> = term
                        .factors
                        .iter()
                        .map(|(place, v)| format!("{place}: {}", v.display_string()))
                        .collect();
                    println!(
                        "  {:<18} {:>7} {:>6} {:>6}  {}",
                        term.gamma.matrix_string(),
                        term.gamma.delta,
                        term.weight.to_string(),
                        term.measure.to_string(),
                        factors.join(" | ")
                    );
                }
                let exact = match &report.rationalized {
                    Some(q) => q.to_string(),
                    None => report.total.display_string(),
                };
                println!("  total (exact): {exact}");
                println!(
                    "  total (float): {:+.9}{:+.9}i",
                    report.total_float.0, report.total_float.1
                );
            }
            Format::Csv => {
                if first {
                    println!("{CSV_HEADER}");
                }
                println!("{}", report_csv_row(&report));
            }
            Format::Json => {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report_to_json(&report)).unwrap()
                );
            }
        }
        first = false;
    }
    Ok(())
}

fn run_enumerate(level: &LevelArgs, k: u32, format: Format) -> Result<(), Error> {
    let neb = parse_neb(level)?;
    let tuples = enumerate_tuples(&neb)?;
    match format {
        Format::Table => {
            println!(
                "level {} = {}^2 * {}^3, nebentypus conductor {}",
                neb.level(),
                neb.s(),
                neb.t(),
                neb.conductor()
            );
            println!("{} tuples:", tuples.len());
            for tuple in &tuples {
                let admissible = newform_trace::local_reps::validate_tuple(tuple, k).is_empty();
                println!(
                    "  {:<40} eps(k={k}) {:<12} {}",
                    tuple.label(),
                    eps_string(k, tuple),
                    if admissible { "" } else { "(inadmissible at this weight)" }
                );
            }
        }
        Format::Csv => {
            println!("level,tuple,eps");
            for tuple in &tuples {
                println!("{},\"{}\",{}", neb.level(), tuple.label(), eps_string(k, tuple));
            }
        }
        Format::Json => {
            let items: Vec<serde_json::Value> =
                tuples.iter().map(|t| serde_json::json!(tuple_to_json(t, k))).collect();
            println!("{}", serde_json::to_string_pretty(&items).unwrap());
        }
    }
    Ok(())
}

fn run_bias(level: &LevelArgs, k: u32, format: Format) -> Result<(), Error> {
    let neb = parse_neb(level)?;
    let totals = bias_partition(&neb, k)?;
    match format {
        Format::Table => {
            println!("level {} weight {k}: dimensions by root number", neb.level());
            for (eps, total) in &totals {
                println!("  eps = {:<8} dim {}", eps.to_string(), total);
            }
            let dims: Vec<u64> = totals.values().copied().collect();
            println!("  total: {}", dims.iter().sum::<u64>());
            if let (Some(p), Some(m)) = (
                totals.get(&RootOfUnity::one()),
                totals.get(&RootOfUnity::minus_one()),
            ) {
                println!("  bias (+1 minus -1): {}", *p as i64 - *m as i64);
            }
        }
        Format::Csv => {
            println!("level,weight,eps,dim");
            for (eps, total) in &totals {
                println!("{},{},{},{}", neb.level(), k, eps, total);
            }
        }
        Format::Json => {
            let map: BTreeMap<String, u64> =
                totals.iter().map(|(e, d)| (e.to_string(), *d)).collect();
            println!("{}", serde_json::to_string_pretty(&map).unwrap());
        }
    }
    Ok(())
}

fn run_validate() -> ExitCode {
    let outcomes = acceptance::run_all();
    let mut all_passed = true;
    for outcome in &outcomes {
        println!("{}", outcome.line());
        all_passed &= outcome.passed;
    }
    println!(
        "{}: {}/{} criteria passed",
        if all_passed { "OK" } else { "FAILED" },
        outcomes.iter().filter(|o| o.passed).count(),
        outcomes.len()
    );
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run_lmfdb_check(
    level: &LevelArgs,
    k: u32,
    lmfdb: &LmfdbArgs,
    format: Format,
) -> Result<bool, Error> {
    let neb = parse_neb(level)?;
    let mut cfg = LmfdbConfig::default();
    if lmfdb.offline {
        cfg.offline = true;
    }
    if let Some(dir) = &lmfdb.cache_dir {
        cfg.cache_dir = Some(dir.clone());
    }
    if let Some(url) = &lmfdb.base_url {
        cfg.base_url = url.clone();
    }
    let summary = check_against_lmfdb(&cfg, &neb, k)?;
    match format {
        Format::Table => {
            println!("level {} weight {k} vs LMFDB:", neb.level());
            for class in &summary.classes {
                println!(
                    "  class {:<14} tuples [{}] dim {}  orbits [{}] dim {}  {}",
                    class.key,
                    class.tuple_labels.join(", "),
                    class.tuple_dim_sum,
                    class.orbit_labels.join(", "),
                    class.orbit_dim_sum,
                    if class.dims_match { "ok" } else { "MISMATCH" }
                );
                for (n, engine, orbit, ok) in &class.trace_checks {
                    println!(
                        "      tr T_{n}: engine {engine}, orbits {orbit} {}",
                        if *ok { "ok" } else { "MISMATCH" }
                    );
                }
            }
            println!(
                "{}",
                if summary.consistent() {
                    "consistent partition found"
                } else {
                    "INCONSISTENT"
                }
            );
        }
        Format::Csv => {
            println!("class,tuple_dims,orbit_dims,dims_match");
            for class in &summary.classes {
                println!(
                    "\"{}\",{},{},{}",
                    class.key, class.tuple_dim_sum, class.orbit_dim_sum, class.dims_match
                );
            }
        }
        Format::Json => {
            let classes: Vec<serde_json::Value> = summary
                .classes
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "class": c.key,
                        "tuples": c.tuple_labels,
                        "orbits": c.orbit_labels,
                        "tuple_dim_sum": c.tuple_dim_sum,
                        "orbit_dim_sum": c.orbit_dim_sum,
                        "dims_match": c.dims_match,
                        "trace_checks": c.trace_checks.iter().map(|(n, e, o, ok)| {
                            serde_json::json!({"n": n, "engine": e, "orbits": o, "ok": ok})
                        }).collect::<Vec<_>>(),
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "consistent": summary.consistent(),
                    "classes": classes,
                }))
                .unwrap()
            );
        }
    }
    Ok(summary.consistent())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<ExitCode, Error> = match &cli.command {
        Command::Dim {
            level,
            k,
            select,
            format,
        } => run_dim(level, *k, select, *format).map(|_| ExitCode::SUCCESS),
        Command::Trace {
            level,
            k,
            n,
            select,
            format,
        } => run_trace(level, *k, *n, select, *format).map(|_| ExitCode::SUCCESS),
        Command::Enumerate { level, k, format } => {
            run_enumerate(level, *k, *format).map(|_| ExitCode::SUCCESS)
        }
        Command::Bias { level, k, format } => {
            run_bias(level, *k, *format).map(|_| ExitCode::SUCCESS)
        }
        Command::Validate => Ok(run_validate()),
        Command::LmfdbCheck {
            level,
            k,
            lmfdb,
            format,
        } => run_lmfdb_check(level, *k, lmfdb, *format).map(|ok| {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }),
    };
    match result {
        Ok(code) => code,
        Err(err @ (Error::NonIntegralDimension(_) | Error::NegativeDimension(_))) => {
            eprintln!("internal consistency failure: {err}");
            ExitCode::from(3)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
