//! Command implementations for the `rademacher` binary.
//!
//! Every command returns an [`Outcome`] instead of printing, so the test
//! suites can drive the exact code path of the binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rademacher::circle::{coefficient, Lambda0Method};
use rademacher::lacuna::exact_sweep;
use rademacher::{
    density_profile, effective_lambda0, partition_oracle, CircleOptions, Error, ErrorBudget, ModularSpec,
};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID_SPEC: i32 = 2;
pub const EXIT_TARGET_UNREACHABLE: i32 = 3;
pub const EXIT_NO_POLAR_PART: i32 = 4;

/// Environment variable holding the minimum working precision in bits.
pub const PRECISION_ENV: &str = "CM_PRECISION_BITS";

/// Coefficients up to this index get an exact `oracle` line in `coeff`.
const ORACLE_LIMIT: i64 = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn fail(code: i32, msg: impl Into<String>) -> Self {
        let mut stderr = msg.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Outcome { code, stdout: String::new(), stderr }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::NoPolarPart => EXIT_NO_POLAR_PART,
        Error::TargetUnreachable { .. } | Error::IterationLimit(_) => EXIT_TARGET_UNREACHABLE,
        _ => EXIT_INVALID_SPEC,
    }
}

fn from_error(e: Error) -> Outcome {
    Outcome::fail(exit_code(&e), format!("error: {e}"))
}

#[derive(Debug, Parser)]
#[command(name = "rademacher", version, about = "Circle-method coefficients of modular functions on SL2(Z)")]
pub struct Cli {
    /// Worker threads for the parallel sums (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certified Fourier coefficient a(lambda_min + n).
    Coeff(CoeffArgs),
    /// Effective threshold lambda0 beyond which every coefficient is non-zero.
    Certify(CertifyArgs),
    /// Density profile of the non-zero coefficients as CSV.
    Density(DensityArgs),
    /// SVG of the Ford circles and the integration path of order N.
    Ford(FordArgs),
    /// Exact coefficients from the q-series oracle.
    Oracle(OracleArgs),
}

#[derive(Debug, Args, Clone)]
pub struct SpecArgs {
    /// f = eta^R.
    #[arg(long, value_name = "R", allow_negative_numbers = true, conflicts_with = "spec")]
    pub eta: Option<i64>,
    /// f = j (combined with --eta gives j * eta^R).
    #[arg(long, conflicts_with = "spec")]
    pub j: bool,
    /// Spec document (JSON or TOML).
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoeffArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Index n, so that lambda = lambda_min + n.
    #[arg(short = 'n', long = "index", allow_negative_numbers = true)]
    pub n: i64,
    /// Target absolute error (negative weight).
    #[arg(long)]
    pub target: Option<f64>,
    /// Fixed cutoff C for the sum over c (negative weight).
    #[arg(long)]
    pub cutoff: Option<i64>,
    /// Truncation N (non-negative weight); default floor(sqrt(lambda)).
    #[arg(short = 'N', long = "order")]
    pub order: Option<i64>,
    /// Emit the full error budget as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Comma-separated cut points, integers or fractions p/q.
    #[arg(long, value_delimiter = ',', required = true)]
    pub cuts: Vec<String>,
    /// Verdict threshold for the largest cut.
    #[arg(long, default_value_t = rademacher::lacuna::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Try to upgrade the verdict with an effective threshold.
    #[arg(long)]
    pub certify: bool,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FordArgs {
    #[arg(short = 'N', long = "order")]
    pub order: i64,
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// p(n) alone.
    #[arg(long, value_name = "N", conflicts_with_all = ["eta", "j", "spec"])]
    pub partition: Option<u64>,
    /// Truncation order T of the printed expansion.
    #[arg(short = 'T', long = "order")]
    pub order: Option<usize>,
}

/// Structured spec document accepted by `--spec`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    #[serde(default)]
    pub eta_exponent: i64,
    /// Power of `j` multiplying the eta power.
    #[serde(default)]
    pub j_power: u32,
    pub precision_bits: Option<u32>,
    /// Truncation order T for oracle output.
    pub truncation: Option<usize>,
    pub target_abs_err: Option<f64>,
}

impl SpecDocument {
    pub fn parse(text: &str, path: &Path) -> Result<Self, String> {
        let json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
        if json {
            serde_json::from_str(text).map_err(|e| format!("invalid JSON spec: {e}"))
        } else {
            toml::from_str(text).map_err(|e| format!("invalid TOML spec: {e}"))
        }
    }

    pub fn to_spec(&self) -> Result<ModularSpec, String> {
        if self.eta_exponent == 0 && self.j_power == 0 {
            return Err("spec needs a non-zero eta_exponent or j_power".into());
        }
        ModularSpec::eta_j(self.eta_exponent, self.j_power).map_err(|e| e.to_string())
    }
}

/// A validated spec plus the settings that came with it.
struct Resolved {
    spec: ModularSpec,
    doc: SpecDocument,
}

fn resolve(args: &SpecArgs) -> Result<Resolved, Outcome> {
    let doc = if let Some(path) = &args.spec {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Outcome::fail(EXIT_IO, format!("error: cannot read {}: {e}", path.display())))?;
        SpecDocument::parse(&text, path).map_err(|m| Outcome::fail(EXIT_INVALID_SPEC, format!("error: {m}")))?
    } else {
        SpecDocument { eta_exponent: args.eta.unwrap_or(0), j_power: args.j as u32, ..SpecDocument::default() }
    };
    if args.spec.is_none() && args.eta.is_none() && !args.j {
        return Err(Outcome::fail(EXIT_INVALID_SPEC, "error: give --eta R, --j or --spec FILE"));
    }
    let spec = doc.to_spec().map_err(|m| Outcome::fail(EXIT_INVALID_SPEC, format!("error: {m}")))?;
    Ok(Resolved { spec, doc })
}

fn circle_options(doc: &SpecDocument) -> Result<CircleOptions, Outcome> {
    let mut opts = CircleOptions::default();
    if let Ok(v) = std::env::var(PRECISION_ENV) {
        opts.min_precision = v
            .trim()
            .parse()
            .map_err(|_| Outcome::fail(EXIT_INVALID_SPEC, format!("error: {PRECISION_ENV}={v} is not a bit count")))?;
    }
    if let Some(p) = doc.precision_bits {
        opts.min_precision = p;
    }
    if !(32..=rademacher::numeric::MAX_PRECISION).contains(&opts.min_precision) {
        return Err(Outcome::fail(EXIT_INVALID_SPEC, format!("error: precision {} out of range", opts.min_precision)));
    }
    Ok(opts)
}

/// Decimal rendering of `x` with `digits` digits after the point.
fn fixed(x: &Float, digits: usize) -> String {
    let scale = Integer::from(10).pow(digits as u32);
    let Some(r) = x.to_rational() else {
        return x.to_string();
    };
    let scaled = Rational::from(&r * &scale).round();
    let neg = scaled < 0;
    let s = scaled.numer().clone().abs().to_string();
    let s = format!("{s:0>width$}", width = digits + 1);
    let (int, frac) = s.split_at(s.len() - digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// Digits after the point that are meaningful given `bound`.
fn digits_for(b: &ErrorBudget) -> usize {
    let e = b.bound.to_f64();
    if e <= 0.0 {
        return 0;
    }
    ((-e.log10()).ceil().max(0.0) as usize + 2).min(40)
}

#[derive(Serialize)]
struct BudgetJson {
    spec: String,
    n: i64,
    lambda: String,
    weight: String,
    main: String,
    bound: f64,
    breakdown: Vec<(String, f64)>,
    cutoff: i64,
    precision: u32,
    snapped: Option<String>,
    oracle: Option<String>,
}

pub fn cmd_coeff(args: &CoeffArgs) -> Outcome {
    let r = match resolve(&args.spec) {
        Ok(r) => r,
        Err(o) => return o,
    };
    let mut opts = match circle_options(&r.doc) {
        Ok(o) => o,
        Err(o) => return o,
    };
    opts.max_c = args.cutoff;
    if args.n < 0 {
        return Outcome::fail(EXIT_INVALID_SPEC, format!("error: index n = {} must be non-negative", args.n));
    }
    let target = args.target.or(r.doc.target_abs_err).unwrap_or(0.25);
    if target.is_nan() || target <= 0.0 {
        return Outcome::fail(EXIT_INVALID_SPEC, "error: --target must be positive");
    }
    let budget = match coefficient(&r.spec, args.n, target, args.order, &opts) {
        Ok(b) => b,
        Err(e) => return from_error(e),
    };
    let oracle = if args.n <= ORACLE_LIMIT {
        match r.spec.oracle(args.n as usize + 1) {
            Ok(s) => Some(s.coeff(args.n as usize).expect("in range").clone()),
            Err(e) => return from_error(e),
        }
    } else {
        None
    };
    let snapped = budget.snapped();
    if args.json {
        let doc = BudgetJson {
            spec: r.spec.describe(),
            n: args.n,
            lambda: budget.lambda.to_string(),
            weight: r.spec.weight().to_string(),
            main: fixed(&budget.main, digits_for(&budget)),
            bound: budget.bound.to_f64(),
            breakdown: budget.breakdown.iter().map(|(k, v)| (k.to_string(), v.to_f64())).collect(),
            cutoff: budget.cutoff,
            precision: budget.precision,
            snapped: snapped.as_ref().map(|v| v.to_string()),
            oracle: oracle.as_ref().map(|v| v.to_string()),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        return Outcome::ok(s);
    }
    let mut s = String::new();
    let _ = writeln!(s, "spec: {} (weight {}, lambda_min {})", r.spec.describe(), r.spec.weight(), r.spec.lambda_min());
    let _ = writeln!(s, "n: {}", args.n);
    let _ = writeln!(s, "lambda: {}", budget.lambda);
    let _ = writeln!(s, "main: {}", fixed(&budget.main, digits_for(&budget)));
    let _ = writeln!(s, "bound: {}", budget.bound);
    for (name, b) in &budget.breakdown {
        let _ = writeln!(s, "  {name}: {b}");
    }
    let _ = writeln!(s, "cutoff: {}", budget.cutoff);
    if let Some(v) = &snapped {
        let _ = writeln!(s, "snapped: {v}");
    }
    if let Some(v) = &oracle {
        let agree = if budget.encloses(v) { "enclosed" } else { "NOT ENCLOSED" };
        let _ = writeln!(s, "oracle: {v} ({agree})");
    }
    Outcome::ok(s)
}

#[derive(Serialize)]
struct CertifyJson {
    spec: String,
    lambda0: f64,
    first_index: i64,
    mu0: String,
    delta: String,
    delta_prime: String,
    m: String,
    tie_at_delta_prime: bool,
    method: String,
    lhs: f64,
    rhs: f64,
    verified_upto: i64,
    all_nonzero: bool,
}

pub fn cmd_certify(args: &CertifyArgs) -> Outcome {
    let r = match resolve(&args.spec) {
        Ok(r) => r,
        Err(o) => return o,
    };
    if r.spec.is_cusp_finite() {
        return Outcome::fail(
            EXIT_NO_POLAR_PART,
            format!("error: {} has no polar part (finite at the cusps); no threshold exists", r.spec.describe()),
        );
    }
    let cert = match effective_lambda0(&r.spec) {
        Ok(c) => c,
        Err(e) => return from_error(e),
    };
    // oracle sweep over lambda in [lambda_min, max(lambda0, 200)]
    let upto = cert.lambda0.max(200.0);
    let last = (upto - r.spec.lambda_min().to_f64()).floor() as i64;
    let series = match r.spec.oracle(last as usize + 1) {
        Ok(s) => s,
        Err(e) => return from_error(e),
    };
    let all_nonzero = exact_sweep(&series, last + 1) == Some(true);
    let (method, lhs, rhs) = match &cert.method {
        Lambda0Method::RatioThreshold { ratio, target } => ("ratio", *ratio, *target),
        Lambda0Method::BoundDominance { main_lower, rest_upper, .. } => ("dominance", *main_lower, *rest_upper),
    };
    let d = &cert.dominance;
    if args.json {
        let doc = CertifyJson {
            spec: r.spec.describe(),
            lambda0: cert.lambda0,
            first_index: cert.first_index,
            mu0: d.mu0.to_string(),
            delta: d.delta.to_string(),
            delta_prime: d.delta_prime.to_string(),
            m: d.m.to_string(),
            tie_at_delta_prime: d.tie_at_delta_prime,
            method: method.into(),
            lhs,
            rhs,
            verified_upto: last,
            all_nonzero,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        return Outcome { code: if all_nonzero { EXIT_OK } else { EXIT_TARGET_UNREACHABLE }, stdout: s, stderr: String::new() };
    }
    let mut s = String::new();
    let _ = writeln!(s, "spec: {} (weight {})", r.spec.describe(), r.spec.weight());
    let _ = writeln!(s, "mu0: {}  delta: {}  delta': {}  M: {}", d.mu0, d.delta, d.delta_prime, d.m);
    if d.tie_at_delta_prime {
        let _ = writeln!(s, "note: several (mu, c) attain delta'; the next strictly smaller value is used");
    }
    let _ = writeln!(s, "lambda0: {:.6}", cert.lambda0);
    let _ = writeln!(s, "first index: {}", cert.first_index);
    match &cert.method {
        Lambda0Method::RatioThreshold { ratio, target } => {
            let _ = writeln!(
                s,
                "inequality: L(4 pi^2 lambda0 delta') / L(4 pi^2 lambda0 delta) = {ratio:.16} < |a(mu0)| / (zeta(1-k) M) = {target:.16} (margin {:.3e})",
                target - ratio
            );
        }
        Lambda0Method::BoundDominance { main_lower, rest_upper, checked_to } => {
            let _ = writeln!(
                s,
                "inequality: main term >= {main_lower:.15e} > error majorant {rest_upper:.15e} (margin {:.3e})",
                main_lower - rest_upper
            );
            let _ = writeln!(s, "dominance rechecked on the lattice up to lambda = {checked_to}");
        }
    }
    let verdict = if all_nonzero { "all non-zero" } else { "ZERO FOUND" };
    let _ = writeln!(s, "verified n in [0, {last}]: {verdict}");
    if all_nonzero {
        let _ = writeln!(s, "verdict: certified non-lacunary (a(lambda) != 0 for every lambda in lambda_min + Z)");
        Outcome::ok(s)
    } else {
        Outcome { code: EXIT_TARGET_UNREACHABLE, stdout: s, stderr: String::new() }
    }
}

fn parse_cut(s: &str) -> Result<Rational, String> {
    let t = s.trim();
    let q = if t.contains('/') {
        Rational::parse(t).map(Rational::from).map_err(|e| e.to_string())
    } else {
        Integer::parse(t).map(|i| Rational::from(Integer::from(i))).map_err(|e| e.to_string())
    };
    q.map_err(|e| format!("cannot parse cut {t:?}: {e}"))
}

pub fn cmd_density(args: &DensityArgs) -> Outcome {
    let r = match resolve(&args.spec) {
        Ok(r) => r,
        Err(o) => return o,
    };
    let mut cuts = Vec::new();
    for c in &args.cuts {
        match parse_cut(c) {
            Ok(q) if q > 0 => cuts.push(q),
            Ok(q) => return Outcome::fail(EXIT_INVALID_SPEC, format!("error: cut {q} must be positive")),
            Err(m) => return Outcome::fail(EXIT_INVALID_SPEC, format!("error: {m}")),
        }
    }
    let max_cut = cuts.iter().max().expect("at least one cut").clone();
    let order = Rational::from(&max_cut - r.spec.lambda_min()).floor().numer().to_usize().unwrap_or(usize::MAX);
    if order > 2_000_000 {
        return Outcome::fail(EXIT_INVALID_SPEC, "error: largest cut too large");
    }
    let series = match r.spec.oracle(order + 1) {
        Ok(s) => s,
        Err(e) => return from_error(e),
    };
    let mut report = match rademacher::lacuna::density_profile_with(&series, &cuts, args.threshold) {
        Ok(rep) => rep,
        Err(e) => return from_error(e),
    };
    let _ = density_profile;
    let mut note = String::new();
    if args.certify && !r.spec.is_cusp_finite() {
        match effective_lambda0(&r.spec) {
            Ok(cert) => {
                let need = cert.first_index.max(0) as usize + 1;
                let full = if need > series.order() { r.spec.oracle(need) } else { Ok(series.clone()) };
                match full {
                    Ok(full) => {
                        if !report.certify(&full, &cert) {
                            note = "# certificate not upgraded: zero below lambda0\n".into();
                        }
                    }
                    Err(e) => return from_error(e),
                }
            }
            Err(e) => note = format!("# certificate unavailable: {e}\n"),
        }
    }
    let csv = format!("{note}{}", report.to_csv());
    match &args.output {
        Some(path) => match std::fs::write(path, &csv) {
            Ok(()) => Outcome::ok(format!("wrote {} rows to {}\n", report.xs.len(), path.display())),
            Err(e) => Outcome::fail(EXIT_IO, format!("error: cannot write {}: {e}", path.display())),
        },
        None => Outcome::ok(csv),
    }
}

pub fn cmd_ford(args: &FordArgs) -> Outcome {
    let svg = match rademacher::fordfarey::render_ford_svg(args.order) {
        Ok(s) => s,
        Err(e) => return from_error(e),
    };
    match &args.output {
        Some(path) => match std::fs::write(path, &svg) {
            Ok(()) => Outcome::ok(format!("wrote {}\n", path.display())),
            Err(e) => Outcome::fail(EXIT_IO, format!("error: cannot write {}: {e}", path.display())),
        },
        None => Outcome::ok(svg),
    }
}

pub fn cmd_oracle(args: &OracleArgs) -> Outcome {
    if let Some(n) = args.partition {
        return Outcome::ok(format!("{}\n", partition_oracle(n)));
    }
    let r = match resolve(&args.spec) {
        Ok(r) => r,
        Err(o) => return o,
    };
    let order = args.order.or(r.doc.truncation).unwrap_or(20);
    if order == 0 || order > 2_000_000 {
        return Outcome::fail(EXIT_INVALID_SPEC, format!("error: truncation order {order} out of range"));
    }
    match r.spec.oracle(order) {
        Ok(s) => Outcome::ok(s.to_text()),
        Err(e) => from_error(e),
    }
}

fn dispatch(cmd: &Command) -> Outcome {
    match cmd {
        Command::Coeff(a) => cmd_coeff(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Density(a) => cmd_density(a),
        Command::Ford(a) => cmd_ford(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

/// Runs `f` on a pool of `threads` workers (or the global pool).
pub fn with_threads<F>(threads: Option<usize>, f: F) -> Outcome
where
    F: FnOnce() -> Outcome + Send,
{
    match threads {
        None => f(),
        Some(0) => Outcome::fail(EXIT_INVALID_SPEC, "error: --threads must be at least 1"),
        #[cfg(feature = "parallel")]
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(f),
            Err(e) => Outcome::fail(EXIT_IO, format!("error: thread pool: {e}")),
        },
        #[cfg(not(feature = "parallel"))]
        Some(_) => f(),
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID_SPEC } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome::ok(text)
            } else {
                Outcome::fail(code, text)
            };
        }
    };
    with_threads(cli.threads, || dispatch(&cli.command))
}
