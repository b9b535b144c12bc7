//! cfdim: dimension computations, pressure tableaux, cover profiles,
//! continued-fraction utilities, Monte Carlo experiments, and invariant
//! check suites, emitted as CSV (default) or JSON.
//!
//! Every invocation is pure given its flags and seed: identical flags give
//! byte-identical output once the timestamp line is disabled with
//! `--no-timestamp`, at any worker count. Exit codes: 0 success, 2 parameter
//! or usage error, 3 solver or budget failure, 4 check-suite failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::Zero;
use serde::Deserialize;
use serde_json::json;

use cfdim_core::cf::{convergents, expand_rational, CfError, Enclosure, LinearIndex, Word};
use cfdim_core::checks::{run_suite, SUITE_NAMES};
use cfdim_core::cover::{
    cover_log_terms, cover_value, equalized_cover, supremum_grid_oracle, CoverError,
};
use cfdim_core::dimension::{
    dim_ef, exponents_from_psi, DimensionCase, DimensionDetail, DimensionError, EstimateParams,
    GrowthSpec, PsiSpec,
};
use cfdim_core::empirics::{
    cantor_geometry_check, geometric_mean_experiment, lemma51_ratio, limsup_event_frequency,
    mixed_geometric_mean, EmpiricsError, EventKind, ExperimentReport, RangeProfile, SampleConfig,
};
use cfdim_core::pressure::{PressureError, PressureSolver, SumMethod};

const EXIT_VALIDATION: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_CHECK_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "cfdim", version, about = "Hausdorff dimension toolkit for continued-fraction limsup sets")]
struct Cli {
    /// TOML file of default parameter values; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads (overrides CFDIM_WORKERS; results never depend on this).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Omit the generation timestamp, making the output byte-reproducible.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Pressure-root tableau over alphabets and depths for each growth base.
    Sb(SbArgs),
    /// Hausdorff dimension of the limsup set for a growth descriptor.
    Dim(DimArgs),
    /// Continued-fraction expansion of a rational or a rational enclosure.
    Expand(ExpandArgs),
    /// Equalized cover profile, optionally certified by the grid oracle.
    Cover(CoverArgs),
    /// Seeded Monte Carlo experiments and exact desk-scale reports.
    Mc {
        #[command(subcommand)]
        experiment: McCommand,
    },
    /// Invariant suite; exits 4 when any item fails.
    Check(CheckArgs),
}

#[derive(Args)]
struct SbArgs {
    /// Comma-separated growth bases, each > 1.
    #[arg(long = "B", value_delimiter = ',', required = true)]
    b: Vec<f64>,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    t: Option<u64>,
    #[arg(long = "Mmax")]
    m_max: Option<u64>,
    #[arg(long = "nmax")]
    n_max: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct DimArgs {
    /// Growth descriptor: poly(c,k), exp(beta), dexp(beta), or table:<path>.
    #[arg(long)]
    psi: String,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    t: Option<u64>,
    /// Scan horizon for table descriptors (default: the whole table).
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long = "Mmax")]
    m_max: Option<u64>,
    #[arg(long = "nmax")]
    n_max: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct ExpandArgs {
    /// Rational in (0, 1], written num/den.
    #[arg(long, value_name = "NUM/DEN")]
    value: Option<String>,
    /// Lower enclosure endpoint num/den (with --hi).
    #[arg(long, value_name = "NUM/DEN", requires = "hi")]
    lo: Option<String>,
    /// Upper enclosure endpoint num/den (with --lo).
    #[arg(long, value_name = "NUM/DEN", requires = "lo")]
    hi: Option<String>,
    /// Digit cap; enclosures may certify fewer.
    #[arg(long)]
    digits: Option<usize>,
}

#[derive(Args)]
struct CoverArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    s: f64,
    #[arg(long = "B")]
    b: f64,
    #[arg(long)]
    d: Option<u64>,
    /// Also run the brute-force grid oracle at this resolution per axis.
    #[arg(long = "oracle-points")]
    oracle_points: Option<usize>,
}

#[derive(Subcommand)]
enum McCommand {
    /// Geometric mean of the leading partial quotients vs the classical constant.
    Geomean(GeomeanArgs),
    /// Geometric mean along the progression f(n) = d n + t; no verdict.
    Mixed(MixedArgs),
    /// Occurrence frequencies of truncated limsup events.
    Limsup(LimsupArgs),
    /// Tuple-sum growth across decades of the cutoff.
    Lemma51(Lemma51Args),
    /// Exact interval geometry of a miniature restricted construction.
    Cantor(CantorArgs),
}

#[derive(Args)]
struct GeomeanArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    /// Number of leading partial quotients per sample.
    #[arg(long)]
    n: u64,
    /// Digits drawn per sample (default: n).
    #[arg(long)]
    digits: Option<u64>,
}

#[derive(Args)]
struct MixedArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    /// Product length; digits up to n * f(n) are consumed.
    #[arg(long)]
    n: u64,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    t: Option<u64>,
}

#[derive(Args)]
struct LimsupArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, value_enum)]
    kind: LimsupKind,
    /// Growth descriptor for the event threshold.
    #[arg(long)]
    psi: String,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    t: Option<u64>,
    /// Truncation window: events are counted for n up to this.
    #[arg(long)]
    window: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LimsupKind {
    Single,
    Mixed,
}

#[derive(Args)]
struct Lemma51Args {
    /// Tuple length, 1 to 3.
    #[arg(long)]
    k: u32,
    #[arg(long)]
    s: f64,
    /// Comma-separated product cutoffs.
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
    phi: Vec<f64>,
}

#[derive(Args)]
struct CantorArgs {
    /// Default digit range is 1..M at every position.
    #[arg(long = "M")]
    m: u64,
    #[arg(long)]
    depth: u64,
    /// Position whose digit range becomes [A, 2A] (with --wide-a).
    #[arg(long = "wide-pos", requires = "wide_a")]
    wide_pos: Option<u64>,
    #[arg(long = "wide-a", requires = "wide_pos")]
    wide_a: Option<u64>,
    /// Comma-separated positions pinned to the digit 2.
    #[arg(long, value_delimiter = ',')]
    forced: Vec<u64>,
}

#[derive(Args)]
struct CheckArgs {
    /// One of: cf-inequalities, pressure-oracles, cover-prop31, lemma51,
    /// cantor-geometry, sampler.
    suite: String,
}

/// Defaults file: same keys as the flags, all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDefaults {
    workers: Option<usize>,
    format: Option<String>,
    seed: Option<u64>,
    samples: Option<u64>,
    tol: Option<f64>,
    m_max: Option<u64>,
    n_max: Option<u64>,
    d: Option<u64>,
    t: Option<u64>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure { code: EXIT_VALIDATION, message: message.into() }
    }

    fn solver(message: impl Into<String>) -> Self {
        Failure { code: EXIT_SOLVER, message: message.into() }
    }
}

fn pressure_failure(e: PressureError) -> Failure {
    let code: u8 = match e {
        PressureError::BudgetExceeded { .. }
        | PressureError::NonConvergence { .. }
        | PressureError::BracketFailure { .. } => EXIT_SOLVER,
        _ => EXIT_VALIDATION,
    };
    Failure { code, message: e.to_string() }
}

fn cover_failure(e: CoverError) -> Failure {
    match e {
        CoverError::Budget { .. } => Failure::solver(e.to_string()),
        _ => Failure::validation(e.to_string()),
    }
}

fn dimension_failure(e: DimensionError) -> Failure {
    match e {
        DimensionError::Solver(inner) => pressure_failure(inner),
        _ => Failure::validation(e.to_string()),
    }
}

fn empirics_failure(e: EmpiricsError) -> Failure {
    match e {
        EmpiricsError::Budget { .. } | EmpiricsError::CrossCheck(_) => {
            Failure::solver(e.to_string())
        }
        EmpiricsError::Cf(CfError::PrecisionExhausted { .. }) => Failure::solver(e.to_string()),
        _ => Failure::validation(e.to_string()),
    }
}

fn cf_failure(e: CfError) -> Failure {
    match e {
        CfError::PrecisionExhausted { .. } => Failure::solver(e.to_string()),
        _ => Failure::validation(e.to_string()),
    }
}

/// One finished report: provenance parameters, a fixed-column CSV view, and
/// a full-diagnostics JSON view. Worker count and output path never enter
/// the provenance, so reruns at other thread counts stay byte-identical.
struct Document {
    subcommand: String,
    parameters: BTreeMap<String, String>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    json: serde_json::Value,
    exit: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let file = load_defaults(cli.config.as_deref())?;
    let format = resolve_format(cli.format, file.format.as_deref())?;
    let workers = match cli.workers {
        Some(w) => Some(w),
        None => env_workers()?.or(file.workers),
    };

    let doc = match workers {
        Some(0) => return Err(Failure::validation("workers must be at least 1")),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Failure::solver(format!("thread pool: {e}")))?;
            pool.install(|| dispatch(&cli.command, &file))?
        }
        None => dispatch(&cli.command, &file)?,
    };

    emit(&doc, format, cli.output.as_deref(), cli.no_timestamp)?;
    Ok(doc.exit)
}

fn load_defaults(path: Option<&Path>) -> Result<FileDefaults, Failure> {
    let Some(path) = path else { return Ok(FileDefaults::default()) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::validation(format!("config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| Failure::validation(format!("config {}: {e}", path.display())))
}

fn env_workers() -> Result<Option<usize>, Failure> {
    match std::env::var("CFDIM_WORKERS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Failure::validation(format!("CFDIM_WORKERS = {v:?} is not a number"))),
        Err(_) => Ok(None),
    }
}

fn resolve_format(
    flag: Option<OutputFormat>,
    file: Option<&str>,
) -> Result<OutputFormat, Failure> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match file {
        None => Ok(OutputFormat::Csv),
        Some("csv") => Ok(OutputFormat::Csv),
        Some("json") => Ok(OutputFormat::Json),
        Some(other) => Err(Failure::validation(format!(
            "config format {other:?} must be csv or json"
        ))),
    }
}

fn dispatch(command: &Command, file: &FileDefaults) -> Result<Document, Failure> {
    match command {
        Command::Sb(args) => cmd_sb(args, file),
        Command::Dim(args) => cmd_dim(args, file),
        Command::Expand(args) => cmd_expand(args),
        Command::Cover(args) => cmd_cover(args, file),
        Command::Mc { experiment } => cmd_mc(experiment, file),
        Command::Check(args) => cmd_check(args),
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn index_of(d: u64, t: u64) -> Result<LinearIndex, Failure> {
    LinearIndex::new(d, t).map_err(cf_failure)
}

fn cmd_sb(args: &SbArgs, file: &FileDefaults) -> Result<Document, Failure> {
    let d = args.d.or(file.d).unwrap_or(1);
    let t = args.t.or(file.t).unwrap_or(0);
    let m_max = args.m_max.or(file.m_max).unwrap_or(6);
    let n_max = args.n_max.or(file.n_max).unwrap_or(5);
    let tol = args.tol.or(file.tol).unwrap_or(1e-10);
    let index = index_of(d, t)?;
    let solver = PressureSolver::default();

    let mut rows = Vec::new();
    let mut estimates = Vec::new();
    for &b in &args.b {
        let est = solver
            .s_b_estimate(b, index, m_max, n_max, tol)
            .map_err(pressure_failure)?;
        for cell in &est.diagnostics.tableau {
            rows.push(vec![
                "cell".into(),
                fmt_f64(b),
                cell.alphabet_max.to_string(),
                cell.n.to_string(),
                cell.word_length.to_string(),
                fmt_f64(cell.root),
                String::new(),
                match cell.method {
                    SumMethod::Enumeration => "enumeration".into(),
                    SumMethod::OperatorIteration => "operator".into(),
                },
                String::new(),
                String::new(),
            ]);
        }
        rows.push(vec![
            "summary".into(),
            fmt_f64(b),
            String::new(),
            String::new(),
            String::new(),
            fmt_f64(est.value),
            fmt_f64(est.uncertainty),
            String::new(),
            est.diagnostics.monotone_in_alphabet.to_string(),
            est.diagnostics.monotone_in_n.to_string(),
        ]);
        estimates.push(json!({ "B": b, "estimate": est }));
    }

    let parameters = BTreeMap::from([
        ("B".into(), args.b.iter().map(|b| fmt_f64(*b)).collect::<Vec<_>>().join(",")),
        ("d".into(), d.to_string()),
        ("t".into(), t.to_string()),
        ("M_max".into(), m_max.to_string()),
        ("n_max".into(), n_max.to_string()),
        ("tol".into(), fmt_f64(tol)),
    ]);
    Ok(Document {
        subcommand: "sb".into(),
        parameters,
        columns: vec![
            "row",
            "B",
            "M",
            "n",
            "word_length",
            "value",
            "uncertainty",
            "method",
            "monotone_in_alphabet",
            "monotone_in_n",
        ],
        rows,
        json: json!({ "estimates": estimates }),
        exit: 0,
    })
}

fn case_name(case: DimensionCase) -> &'static str {
    match case {
        DimensionCase::BaseOne => "base-one",
        DimensionCase::BaseFinite => "base-finite",
        DimensionCase::BaseInfiniteDoubleFinite => "base-infinite-double-finite",
        DimensionCase::DoubleInfinite => "double-infinite",
    }
}

fn cmd_dim(args: &DimArgs, file: &FileDefaults) -> Result<Document, Failure> {
    let d = args.d.or(file.d).unwrap_or(1);
    let t = args.t.or(file.t).unwrap_or(0);
    let defaults = EstimateParams::default();
    let params = EstimateParams {
        alphabet_max: args.m_max.or(file.m_max).unwrap_or(defaults.alphabet_max),
        n_max: args.n_max.or(file.n_max).unwrap_or(defaults.n_max),
        tol: args.tol.or(file.tol).unwrap_or(defaults.tol),
    };
    let index = index_of(d, t)?;
    let psi = PsiSpec::parse(&args.psi).map_err(dimension_failure)?;
    let horizon = args.horizon.unwrap_or(match &psi {
        PsiSpec::Table { values } => values.len() as u64,
        _ => 10,
    });
    let spec = GrowthSpec { psi, index };
    let exponents = exponents_from_psi(&spec, horizon).map_err(dimension_failure)?;
    let solver = PressureSolver::default();
    let result = dim_ef(&exponents, index, &solver, &params).map_err(dimension_failure)?;

    let uncertainty = match &result.detail {
        DimensionDetail::ClosedForm => String::new(),
        DimensionDetail::Estimate(est) => fmt_f64(est.uncertainty),
    };
    let mut rows = vec![vec![
        "result".into(),
        case_name(result.case).into(),
        fmt_f64(result.value),
        uncertainty,
        fmt_f64(exponents.base),
        fmt_f64(exponents.double_base),
        exponents.exact.to_string(),
        exponents.horizon.to_string(),
        exponents.skipped_double.to_string(),
        String::new(),
        String::new(),
        String::new(),
    ]];
    for point in &exponents.trace {
        rows.push(vec![
            "trace".into(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            point.n.to_string(),
            fmt_f64(point.base_quotient),
            point.double_quotient.map(fmt_f64).unwrap_or_default(),
        ]);
    }

    let parameters = BTreeMap::from([
        ("psi".into(), args.psi.trim().to_string()),
        ("d".into(), d.to_string()),
        ("t".into(), t.to_string()),
        ("horizon".into(), horizon.to_string()),
        ("M_max".into(), params.alphabet_max.to_string()),
        ("n_max".into(), params.n_max.to_string()),
        ("tol".into(), fmt_f64(params.tol)),
    ]);
    Ok(Document {
        subcommand: "dim".into(),
        parameters,
        columns: vec![
            "row",
            "case",
            "value",
            "uncertainty",
            "base",
            "double_base",
            "exact",
            "horizon",
            "skipped_double",
            "n",
            "base_quotient",
            "double_quotient",
        ],
        rows,
        json: json!({ "exponents": exponents, "result": result }),
        exit: 0,
    })
}

fn parse_rational(text: &str) -> Result<BigRational, Failure> {
    let mut parts = text.splitn(2, '/');
    let num = parts.next().unwrap_or("").trim();
    let den = parts.next().unwrap_or("1").trim();
    let num = BigInt::from_str(num)
        .map_err(|_| Failure::validation(format!("bad numerator in {text:?}")))?;
    let den = BigInt::from_str(den)
        .map_err(|_| Failure::validation(format!("bad denominator in {text:?}")))?;
    if den.is_zero() {
        return Err(Failure::validation(format!("zero denominator in {text:?}")));
    }
    Ok(BigRational::new(num, den))
}

fn cmd_expand(args: &ExpandArgs) -> Result<Document, Failure> {
    let digits = args.digits.unwrap_or(32);
    if digits == 0 {
        return Err(Failure::validation("digits must be at least 1"));
    }
    let (word, parameters) = match (&args.value, &args.lo, &args.hi) {
        (Some(v), None, None) => {
            let x = parse_rational(v)?;
            let word = expand_rational(&x, digits).map_err(cf_failure)?;
            let parameters = BTreeMap::from([
                ("value".into(), v.trim().to_string()),
                ("digits".into(), digits.to_string()),
            ]);
            (word, parameters)
        }
        (None, Some(lo), Some(hi)) => {
            let e = Enclosure::new(parse_rational(lo)?, parse_rational(hi)?)
                .map_err(cf_failure)?;
            let prefix = e.certified_prefix(digits);
            let word = Word::new(prefix).expect("certified digits are positive");
            let parameters = BTreeMap::from([
                ("lo".into(), lo.trim().to_string()),
                ("hi".into(), hi.trim().to_string()),
                ("digits".into(), digits.to_string()),
            ]);
            (word, parameters)
        }
        _ => {
            return Err(Failure::validation(
                "give either --value, or --lo with --hi",
            ))
        }
    };

    let states = convergents(&word);
    let rows: Vec<Vec<String>> = states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            vec![
                (i + 1).to_string(),
                word.digits()[i].to_string(),
                s.p().to_string(),
                s.q().to_string(),
            ]
        })
        .collect();
    let convergent_json: Vec<_> = states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            json!({
                "n": i + 1,
                "digit": word.digits()[i],
                "p": s.p().to_string(),
                "q": s.q().to_string(),
            })
        })
        .collect();
    Ok(Document {
        subcommand: "expand".into(),
        parameters,
        columns: vec!["n", "digit", "p", "q"],
        rows,
        json: json!({
            "digits": word.digits(),
            "certified": word.len(),
            "requested": digits,
            "convergents": convergent_json,
        }),
        exit: 0,
    })
}

fn cmd_cover(args: &CoverArgs, file: &FileDefaults) -> Result<Document, Failure> {
    let d = args.d.or(file.d).unwrap_or(1);
    let profile = equalized_cover(args.n, args.s, args.b, d).map_err(cover_failure)?;
    let terms = cover_log_terms(&profile);
    let value = cover_value(&profile);
    let oracle = match args.oracle_points {
        Some(points) => {
            Some(supremum_grid_oracle(args.n, args.s, args.b, d, points).map_err(cover_failure)?)
        }
        None => None,
    };

    let mut rows = Vec::new();
    for k in 0..args.n {
        rows.push(vec![
            "scale".into(),
            (k + 1).to_string(),
            fmt_f64(profile.log_a[k]),
            fmt_f64(profile.log_alpha[k]),
            fmt_f64(terms[k]),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    rows.push(vec![
        "summary".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        fmt_f64(value),
        oracle.map(|g| fmt_f64(g.log_value)).unwrap_or_default(),
        oracle.map(|g| fmt_f64(g.slack_log)).unwrap_or_default(),
        oracle.map(|g| g.cells.to_string()).unwrap_or_default(),
    ]);

    let mut parameters = BTreeMap::from([
        ("n".into(), args.n.to_string()),
        ("s".into(), fmt_f64(args.s)),
        ("B".into(), fmt_f64(args.b)),
        ("d".into(), d.to_string()),
    ]);
    if let Some(points) = args.oracle_points {
        parameters.insert("oracle_points".into(), points.to_string());
    }
    Ok(Document {
        subcommand: "cover".into(),
        parameters,
        columns: vec![
            "row",
            "k",
            "log_a",
            "log_alpha",
            "log_term",
            "value",
            "oracle_log_value",
            "oracle_slack",
            "oracle_cells",
        ],
        rows,
        json: json!({
            "profile": profile,
            "log_terms": terms,
            "value": value,
            "oracle": oracle,
        }),
        exit: 0,
    })
}

fn cmd_mc(experiment: &McCommand, file: &FileDefaults) -> Result<Document, Failure> {
    let (name, report) = match experiment {
        McCommand::Geomean(args) => {
            let seed = args.seed.or(file.seed).unwrap_or(0);
            let samples = args.samples.or(file.samples).unwrap_or(200);
            let digits = args.digits.unwrap_or(args.n);
            let config = SampleConfig::new(seed, samples, digits);
            let report = geometric_mean_experiment(&config, args.n).map_err(empirics_failure)?;
            ("mc-geomean", report)
        }
        McCommand::Mixed(args) => {
            let seed = args.seed.or(file.seed).unwrap_or(0);
            let samples = args.samples.or(file.samples).unwrap_or(200);
            let d = args.d.or(file.d).unwrap_or(1);
            let t = args.t.or(file.t).unwrap_or(0);
            let index = index_of(d, t)?;
            let digits = (args.n as u128)
                .checked_mul(index.apply(args.n) as u128)
                .filter(|&v| v <= u64::MAX as u128)
                .ok_or_else(|| Failure::validation("n * f(n) overflows the digit budget"))?
                as u64;
            let config = SampleConfig::new(seed, samples, digits);
            let report =
                mixed_geometric_mean(&config, index, args.n).map_err(empirics_failure)?;
            ("mc-mixed", report)
        }
        McCommand::Limsup(args) => {
            let seed = args.seed.or(file.seed).unwrap_or(0);
            let samples = args.samples.or(file.samples).unwrap_or(200);
            let d = args.d.or(file.d).unwrap_or(1);
            let t = args.t.or(file.t).unwrap_or(0);
            let index = index_of(d, t)?;
            let psi = PsiSpec::parse(&args.psi).map_err(dimension_failure)?;
            let kind = match args.kind {
                LimsupKind::Single => EventKind::SingleQuotient,
                LimsupKind::Mixed => EventKind::MixedProduct,
            };
            let f_window = args
                .window
                .checked_mul(d)
                .and_then(|v| v.checked_add(t))
                .ok_or_else(|| Failure::validation("f(window) overflows"))?;
            let digits = match kind {
                EventKind::SingleQuotient => f_window,
                EventKind::MixedProduct => args
                    .window
                    .checked_mul(f_window)
                    .ok_or_else(|| Failure::validation("window * f(window) overflows"))?,
            };
            let config = SampleConfig::new(seed, samples, digits);
            let spec = GrowthSpec { psi, index };
            let report = limsup_event_frequency(&config, kind, &spec, args.window)
                .map_err(empirics_failure)?;
            ("mc-limsup", report)
        }
        McCommand::Lemma51(args) => {
            let report = lemma51_ratio(args.k, args.s, &args.phi).map_err(empirics_failure)?;
            ("mc-lemma51", report)
        }
        McCommand::Cantor(args) => {
            let profile = RangeProfile {
                wide: args.wide_pos.zip(args.wide_a),
                forced_two: args.forced.clone(),
            };
            let report =
                cantor_geometry_check(args.m, args.depth, &profile).map_err(empirics_failure)?;
            ("mc-cantor", report)
        }
    };
    Ok(report_document(name, report))
}

/// ExperimentReport rendered as (section, key, value) triples; JSON carries
/// the report verbatim.
fn report_document(subcommand: &str, report: ExperimentReport) -> Document {
    let mut parameters: BTreeMap<String, String> = report
        .parameters
        .iter()
        .cloned()
        .collect();
    if let Some(sc) = report.sampling {
        parameters.insert("seed".into(), sc.seed.to_string());
        parameters.insert("samples".into(), sc.samples.to_string());
        parameters.insert("digits_per_sample".into(), sc.digits_per_sample.to_string());
        parameters.insert("precision_bits".into(), sc.precision_bits.to_string());
    }

    let mut rows = vec![vec!["run".into(), "statistic".into(), report.statistic.clone()]];
    rows.push(vec!["run".into(), "discarded".into(), report.discarded.to_string()]);
    for (k, v) in &report.parameters {
        rows.push(vec!["parameter".into(), k.clone(), v.clone()]);
    }
    if let Some(s) = report.summary {
        for (key, value) in [
            ("count", s.count as f64),
            ("mean", s.mean),
            ("sd", s.sd),
            ("min", s.min),
            ("q1", s.q1),
            ("median", s.median),
            ("q3", s.q3),
            ("max", s.max),
        ] {
            rows.push(vec!["summary".into(), key.into(), fmt_f64(value)]);
        }
    }
    for (k, v) in &report.metrics {
        rows.push(vec!["metric".into(), k.clone(), fmt_f64(*v)]);
    }
    if let Some(target) = report.target {
        rows.push(vec!["verdict".into(), "target".into(), fmt_f64(target)]);
    }
    if let Some(tolerance) = report.tolerance {
        rows.push(vec!["verdict".into(), "tolerance".into(), fmt_f64(tolerance)]);
    }
    if let Some(pass) = report.pass {
        rows.push(vec!["verdict".into(), "pass".into(), pass.to_string()]);
    }
    for (i, note) in report.notes.iter().enumerate() {
        rows.push(vec!["note".into(), (i + 1).to_string(), note.clone()]);
    }

    Document {
        subcommand: subcommand.into(),
        parameters,
        columns: vec!["section", "key", "value"],
        rows,
        json: serde_json::to_value(&report).expect("report serializes"),
        exit: 0,
    }
}

fn cmd_check(args: &CheckArgs) -> Result<Document, Failure> {
    let report = run_suite(&args.suite).ok_or_else(|| {
        Failure::validation(format!(
            "unknown suite {:?}; available: {}",
            args.suite,
            SUITE_NAMES.join(", ")
        ))
    })?;
    let rows: Vec<Vec<String>> = report
        .items
        .iter()
        .map(|i| vec![i.name.clone(), i.passed.to_string(), i.details.clone()])
        .collect();
    let exit = if report.passed() { 0 } else { EXIT_CHECK_FAILED };
    Ok(Document {
        subcommand: "check".into(),
        parameters: BTreeMap::from([("suite".into(), args.suite.clone())]),
        columns: vec!["item", "passed", "details"],
        rows,
        json: serde_json::to_value(&report).expect("report serializes"),
        exit,
    })
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn render_csv(doc: &Document, no_timestamp: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# cfdim {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# subcommand {}", doc.subcommand);
    for (k, v) in &doc.parameters {
        let _ = writeln!(out, "# param {k} {v}");
    }
    if !no_timestamp {
        let _ = writeln!(out, "# generated_at {}", timestamp());
    }
    let _ = writeln!(out, "{}", doc.columns.join(","));
    for row in &doc.rows {
        let fields: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

fn render_json(doc: &Document, no_timestamp: bool) -> String {
    let mut root = serde_json::Map::new();
    root.insert(
        "config".into(),
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": doc.subcommand,
            "parameters": doc.parameters,
        }),
    );
    if !no_timestamp {
        root.insert("generated_at".into(), json!(timestamp()));
    }
    root.insert("result".into(), doc.json.clone());
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(root))
        .expect("document serializes");
    text.push('\n');
    text
}

fn emit(
    doc: &Document,
    format: OutputFormat,
    output: Option<&Path>,
    no_timestamp: bool,
) -> Result<(), Failure> {
    let text = match format {
        OutputFormat::Csv => render_csv(doc, no_timestamp),
        OutputFormat::Json => render_json(doc, no_timestamp),
    };
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::solver(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
