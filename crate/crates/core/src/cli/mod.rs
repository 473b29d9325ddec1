//! Command-line front end: argument parsing, dispatch and report rendering.
//!
//! Reports are JSON documents `{version, command, inputs, pass, result}` with
//! every exact value written as a string. Exit status: 0 when every check
//! passes, 1 when a check fails or a computation is refused, 2 on usage errors.

use std::fmt::Write as _;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bimodule::{gamma_self_test, identity_suite_with, Normalization, SamplePlan, SuiteOptions};
use crate::checks::{self, SuiteConfig};
use crate::error::Error;
use crate::exactnum::{parse_rat, PFrac, QuadReal};
use crate::morita::{
    certificate_search, condition_check, condition_witness, heisenberg_partner,
    heisenberg_partner_spec, projection_partner, relate_check, trace_line, ProjectionData,
    SearchBounds, SearchOutcome,
};
use crate::multiplier::{
    cocycle_defect, eta, eta_bar, iota_embed, lambda_embed, psi_alpha, rho, GammaElem,
};
use crate::padic::PAdic;
use crate::solenoid::{coherence_check, from_even_entries, SeqWindow, SolenoidSpec};

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Literal,
    Unit,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Literal => Normalization::Literal,
            NormArg::Unit => Normalization::Unit,
        }
    }
}

/// Parsed command line.
#[derive(Debug, Parser)]
#[command(name = "ncsol", version, about = "Morita partners of noncommutative solenoids")]
pub struct RunConfig {
    /// Seed for every randomized check.
    #[arg(long, global = true, env = "SOLENOID_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// p-adic expansions.
    #[command(subcommand)]
    Padic(PadicCmd),
    /// Parameter sequences.
    #[command(subcommand)]
    Solenoid(SolenoidCmd),
    /// Cocycle identities.
    #[command(subcommand)]
    Multiplier(MultiplierCmd),
    /// Partner constructions.
    #[command(subcommand)]
    Morita(MoritaCmd),
    /// Stage-compatibility identities of the bimodules.
    #[command(subcommand)]
    Bimodule(BimoduleCmd),
    /// Every property suite.
    Suite(SuiteArgs),
    /// Shortcut for single checks.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Shortcut for `morita heisenberg` and `morita projection`.
    #[command(subcommand)]
    Partner(PartnerCmd),
}

#[derive(Debug, Subcommand)]
pub enum PadicCmd {
    /// Inverse of a rational p-adic number.
    Inv(PadicArgs),
    /// The fractional part `{x}_p`.
    Frac(PadicArgs),
    /// `sum_{j=lo}^{hi} x_j p^j`.
    Trunc(TruncArgs),
}

#[derive(Debug, Args)]
pub struct PadicArgs {
    #[arg(long)]
    pub p: u64,
    /// Rational number, e.g. `3/2`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
}

#[derive(Debug, Args)]
pub struct TruncArgs {
    #[command(flatten)]
    pub x: PadicArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: i64,
}

/// A sequence given inline or as JSON.
#[derive(Debug, Args, Clone)]
pub struct SpecArgs {
    #[arg(long, conflicts_with = "spec")]
    pub p: Option<u64>,
    /// Initial entry, e.g. `(-1 + 1*sqrt(2))/1`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "spec")]
    pub theta: Option<String>,
    /// `x=<rational>` for a rational digit source, or a comma list of digits.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "spec")]
    pub digits: Option<String>,
    /// JSON spec, inline or a file path.
    #[arg(long)]
    pub spec: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum SolenoidCmd {
    /// Entries `alpha_0 .. alpha_N` and their classes mod 1.
    Alpha {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n: u64,
    },
    /// Integer defects `p^step w_{n+step} - w_n` of a window.
    CheckCoherence(WindowArgs),
    /// Sequence recovered from its even entries.
    FromEven(WindowArgs),
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    #[arg(long)]
    pub p: u64,
    /// `n:value` pairs separated by `;`, or a JSON window.
    #[arg(long, allow_hyphen_values = true)]
    pub window: String,
    #[arg(long, default_value_t = 2)]
    pub step: u64,
}

#[derive(Debug, Subcommand)]
pub enum MultiplierCmd {
    /// Cocycle identity and normalization on random triples.
    CheckCocycle(TrialArgs),
    /// The lattice `lambda(Gamma)` pairs trivially with `iota(Gamma)`.
    CheckAnnihilator(TrialArgs),
    /// Pullbacks of the Heisenberg multiplier equal the sequence cocycles.
    CheckEtaPsi(TrialArgs),
}

#[derive(Debug, Args)]
pub struct TrialArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Largest exponent `k` in random elements `j/p^k`.
    #[arg(long, default_value_t = 5)]
    pub max_k: u32,
}

#[derive(Debug, Subcommand)]
pub enum MoritaCmd {
    Heisenberg(EntriesArgs),
    Projection(ProjectionArgs),
    /// Displayed coefficients against the Heisenberg form.
    Relate(EntriesArgs),
    /// Bounded search for a projection relating two sequences.
    Certify(CertifyArgs),
}

#[derive(Debug, Args)]
pub struct EntriesArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, default_value_t = 8)]
    pub entries: u64,
}

#[derive(Debug, Args, Clone)]
pub struct ProjArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c0: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub d0: i64,
    /// Matrix size; the smallest admissible one by default.
    #[arg(long)]
    pub m: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ProjectionArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub proj: ProjArgs,
    #[arg(long, default_value_t = 8)]
    pub entries: u64,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// JSON spec of the first sequence, inline or a file path.
    #[arg(long)]
    pub a: String,
    /// JSON spec of the second sequence.
    #[arg(long)]
    pub b: String,
    #[arg(long, default_value_t = 4)]
    pub max_c0: u64,
    #[arg(long, default_value_t = 4)]
    pub max_d0: u64,
    #[arg(long, default_value_t = 4)]
    pub max_k: u64,
    #[arg(long, default_value_t = 16)]
    pub entries: u64,
}

#[derive(Debug, Subcommand)]
pub enum BimoduleCmd {
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub proj: ProjArgs,
    #[arg(long, default_value_t = 0)]
    pub n: u64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, default_value_t = 20)]
    pub functions: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value_t = NormArg::Literal)]
    pub normalization: NormArg,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = 1e-9)]
    pub bimodule_tolerance: f64,
    #[arg(long, value_enum, default_value_t = NormArg::Literal)]
    pub normalization: NormArg,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
}

#[derive(Debug, Subcommand)]
pub enum CheckCmd {
    /// `gcd(c0 p, d0 - c0 x0) = 1`.
    Condition {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        c0: i64,
        #[arg(long, allow_hyphen_values = true)]
        d0: i64,
        #[arg(long)]
        x0: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum PartnerCmd {
    Heisenberg(EntriesArgs),
    Projection(ProjectionArgs),
}

/// Why a command did not produce a passing report.
#[derive(Debug)]
enum Failure {
    /// Malformed input: exit 2.
    Usage(String),
    /// A refused computation: exit 1.
    Refused(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Refused(e)
    }
}

type Out<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Outcome of a command before rendering.
struct Report {
    command: &'static str,
    inputs: Value,
    pass: bool,
    result: Value,
}

/// Exit status and rendered report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub code: i32,
    pub output: String,
}

/// Runs a parsed command.
pub fn run(config: &RunConfig) -> Rendered {
    let (code, doc) = match dispatch(config) {
        Ok(rep) => {
            let code = if rep.pass { 0 } else { 1 };
            let doc = json!({
                "version": REPORT_VERSION,
                "command": rep.command,
                "inputs": rep.inputs,
                "pass": rep.pass,
                "result": rep.result,
            });
            (code, doc)
        }
        Err(Failure::Usage(msg)) => (2, json!({"version": REPORT_VERSION, "error": "usage", "message": msg})),
        Err(Failure::Refused(e)) => (
            1,
            json!({"version": REPORT_VERSION, "error": "refused", "message": e.to_string(), "pass": false}),
        ),
    };
    let output = match config.format {
        Format::Json => serde_json::to_string_pretty(&doc).expect("json values serialize"),
        Format::Text => render_text(&doc),
    };
    Rendered { code, output }
}

/// Parses `args` (including the program name) and runs; usage errors map to 2.
pub fn run_args<I, T>(args: I) -> Rendered
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            Rendered {
                code,
                output: e.render().to_string(),
            }
        }
    }
}

fn render_text(doc: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(map) => {
                for (k, x) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, out);
                }
            }
            Value::Array(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            Value::String(s) => {
                let _ = writeln!(out, "{prefix}: {s}");
            }
            other => {
                let _ = writeln!(out, "{prefix}: {other}");
            }
        }
    }
    let mut out = String::new();
    walk("", doc, &mut out);
    out
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

fn read_json(src: &str) -> Out<Value> {
    let text = if Path::new(src).is_file() {
        std::fs::read_to_string(src).map_err(|e| usage(format!("cannot read {src}: {e}")))?
    } else {
        src.to_string()
    };
    serde_json::from_str(&text).map_err(|e| usage(format!("malformed JSON: {e}")))
}

fn parse_spec_json(src: &str) -> Out<SolenoidSpec> {
    serde_json::from_value(read_json(src)?).map_err(|e| usage(format!("malformed spec: {e}")))
}

fn parse_theta(s: &str) -> Out<QuadReal> {
    s.parse().map_err(|e: crate::exactnum::ExactError| usage(e.to_string()))
}

fn build_spec(args: &SpecArgs) -> Out<SolenoidSpec> {
    if let Some(src) = &args.spec {
        return parse_spec_json(src);
    }
    let p = args.p.ok_or_else(|| usage("--p is required without --spec"))?;
    let theta = parse_theta(args.theta.as_deref().ok_or_else(|| usage("--theta is required without --spec"))?)?;
    let digits = args.digits.as_deref().unwrap_or("x=0");
    let spec = if let Some(x) = digits.strip_prefix("x=") {
        let q = parse_rat(x.trim()).map_err(|e| usage(e.to_string()))?;
        let x = PAdic::from_rational(p, &q).map_err(|e| usage(e.to_string()))?;
        SolenoidSpec::new(p, theta, x)
    } else {
        let ds = digits
            .split(',')
            .map(|d| d.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| usage(format!("bad digit list {digits:?}: {e}")))?;
        SolenoidSpec::with_digits(p, theta, ds)
    };
    spec.map_err(|e| usage(e.to_string()))
}

fn spec_value(spec: &SolenoidSpec) -> Value {
    to_value(spec)
}

fn build_proj(spec: &SolenoidSpec, args: &ProjArgs) -> Out<ProjectionData> {
    match args.m {
        Some(m) => ProjectionData::new(m, args.c0, args.d0, spec.theta()).map_err(|e| usage(e.to_string())),
        None => ProjectionData::minimal(args.c0, args.d0, spec.theta())
            .ok_or_else(|| usage("the trace c0*theta + d0 must be positive")),
    }
}

fn parse_window(src: &str) -> Out<SeqWindow> {
    let trimmed = src.trim();
    let pairs: Vec<(u64, String)> = if trimmed.starts_with('[') || Path::new(trimmed).is_file() {
        #[derive(serde::Deserialize)]
        struct Entry {
            n: u64,
            value: String,
        }
        let entries: Vec<Entry> =
            serde_json::from_value(read_json(trimmed)?).map_err(|e| usage(format!("malformed window: {e}")))?;
        entries.into_iter().map(|e| (e.n, e.value)).collect()
    } else {
        trimmed
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|item| {
                let (n, v) = item
                    .split_once(':')
                    .ok_or_else(|| usage(format!("window entry {item:?} is not n:value")))?;
                let n = n.trim().parse::<u64>().map_err(|e| usage(format!("bad index {n:?}: {e}")))?;
                Ok((n, v.trim().to_string()))
            })
            .collect::<Out<_>>()?
    };
    let entries = pairs
        .into_iter()
        .map(|(n, v)| Ok((n, parse_theta(&v)?)))
        .collect::<Out<Vec<_>>>()?;
    SeqWindow::new(entries).map_err(|e| usage(e.to_string()))
}

fn dispatch(cfg: &RunConfig) -> Out<Report> {
    match &cfg.command {
        Command::Padic(c) => padic(c),
        Command::Solenoid(c) => solenoid(c),
        Command::Multiplier(c) => multiplier(c, cfg.seed),
        Command::Morita(MoritaCmd::Heisenberg(a)) | Command::Partner(PartnerCmd::Heisenberg(a)) => {
            partner_heisenberg(a)
        }
        Command::Morita(MoritaCmd::Projection(a)) | Command::Partner(PartnerCmd::Projection(a)) => {
            partner_projection(a)
        }
        Command::Morita(MoritaCmd::Relate(a)) => relate(a),
        Command::Morita(MoritaCmd::Certify(a)) => certify(a),
        Command::Bimodule(BimoduleCmd::Verify(a)) => verify(a, cfg.seed),
        Command::Suite(a) => suite(a, cfg.seed),
        Command::Check(CheckCmd::Condition { p, c0, d0, x0 }) => condition(*p, *c0, *d0, *x0),
    }
}

fn padic_input(a: &PadicArgs) -> Out<PAdic> {
    let q = parse_rat(&a.x).map_err(|e| usage(e.to_string()))?;
    PAdic::from_rational(a.p, &q).map_err(|e| usage(e.to_string()))
}

fn padic(c: &PadicCmd) -> Out<Report> {
    Ok(match c {
        PadicCmd::Inv(a) => {
            let x = padic_input(a)?;
            let y = x.invert().map_err(Error::from)?;
            let ok = x.mul(&y).map_err(Error::from)? == PAdic::from_integer(a.p, 1).map_err(Error::from)?;
            Report {
                command: "padic inv",
                inputs: json!({"p": a.p, "x": a.x}),
                pass: ok,
                result: json!({"x": to_value(&x), "inverse": to_value(&y), "inverse_rational": y.to_rational().to_string()}),
            }
        }
        PadicCmd::Frac(a) => {
            let x = padic_input(a)?;
            Report {
                command: "padic frac",
                inputs: json!({"p": a.p, "x": a.x}),
                pass: true,
                result: json!({"x": to_value(&x), "frac": x.frac_part().to_string()}),
            }
        }
        PadicCmd::Trunc(t) => {
            let x = padic_input(&t.x)?;
            Report {
                command: "padic trunc",
                inputs: json!({"p": t.x.p, "x": t.x.x, "lo": t.lo, "hi": t.hi}),
                pass: true,
                result: {
                    let sum = x.truncate_sum(t.lo, t.hi);
                    json!({"x": to_value(&x), "sum": sum.to_string(), "sum_rational": sum.to_rat().to_string()})
                },
            }
        }
    })
}

fn solenoid(c: &SolenoidCmd) -> Out<Report> {
    Ok(match c {
        SolenoidCmd::Alpha { spec, n } => {
            let s = build_spec(spec)?;
            let window = s.window(*n)?;
            let classes = s.reduce_h(*n)?;
            Report {
                command: "solenoid alpha",
                inputs: json!({"spec": spec_value(&s), "n": n}),
                pass: true,
                result: json!({"alpha": to_value(&window), "mod1": to_value(&classes)}),
            }
        }
        SolenoidCmd::CheckCoherence(w) => {
            let window = parse_window(&w.window)?;
            let rep = coherence_check(&window, w.p, w.step)?;
            let defects: Vec<Value> = rep
                .defects
                .iter()
                .map(|d| json!({"from": d.from, "to": d.to, "defect": d.value.to_string(), "integer": d.integer().is_some()}))
                .collect();
            Report {
                command: "solenoid check-coherence",
                inputs: json!({"p": w.p, "step": w.step, "window": to_value(&window)}),
                pass: rep.is_coherent(),
                result: json!({"coherent": rep.is_coherent(), "defects": defects}),
            }
        }
        SolenoidCmd::FromEven(w) => {
            let window = parse_window(&w.window)?;
            let spec = from_even_entries(w.p, &window)?;
            Report {
                command: "solenoid from-even",
                inputs: json!({"p": w.p, "window": to_value(&window)}),
                pass: true,
                result: json!({"spec": spec_value(&spec)}),
            }
        }
    })
}

fn random_gamma(rng: &mut impl Rng, p: u64, max_k: u32) -> GammaElem {
    let mut part = || PFrac::new(p, rng.random_range(-60..=60_i64), rng.random_range(0..=max_k));
    let first = part();
    GammaElem::new(first, part()).expect("same prime")
}

fn multiplier(c: &MultiplierCmd, seed: u64) -> Out<Report> {
    let (name, args) = match c {
        MultiplierCmd::CheckCocycle(a) => ("multiplier check-cocycle", a),
        MultiplierCmd::CheckAnnihilator(a) => ("multiplier check-annihilator", a),
        MultiplierCmd::CheckEtaPsi(a) => ("multiplier check-eta-psi", a),
    };
    let spec = build_spec(&args.spec)?;
    let p = spec.prime();
    let mut rng = checks::rng(seed, 100);
    let mut failures = 0u64;
    let mut first: Option<String> = None;
    let x = spec.x_alpha().cloned();
    let partner = match c {
        MultiplierCmd::CheckEtaPsi(_) => Some(heisenberg_partner_spec(&spec)?),
        _ => None,
    };
    for _ in 0..args.trials {
        let g = random_gamma(&mut rng, p, args.max_k);
        let h = random_gamma(&mut rng, p, args.max_k);
        let (ok, desc) = match c {
            MultiplierCmd::CheckCocycle(_) => {
                let t = random_gamma(&mut rng, p, args.max_k);
                let psi = |a: &GammaElem, b: &GammaElem| psi_alpha(&spec, a, b);
                let id = GammaElem::identity(p);
                let ok = cocycle_defect(psi, &g, &h, &t)?.is_zero()
                    && psi(&g, &id)?.is_zero()
                    && psi(&id, &g)?.is_zero();
                (ok, format!("r={g} s={h} t={t}"))
            }
            MultiplierCmd::CheckAnnihilator(_) => {
                let x = x.as_ref().ok_or_else(|| usage("needs a rational digit source x=..."))?;
                let theta = spec.theta();
                let ok = rho(&iota_embed(x, theta, &g)?, &lambda_embed(x, theta, &h)?)?.is_zero();
                (ok, format!("r={g} s={h}"))
            }
            MultiplierCmd::CheckEtaPsi(_) => {
                let x = x.as_ref().ok_or_else(|| usage("needs a rational digit source x=..."))?;
                let theta = spec.theta();
                let pull = eta(&iota_embed(x, theta, &g)?, &iota_embed(x, theta, &h)?)?;
                let dual = eta_bar(&lambda_embed(x, theta, &g)?, &lambda_embed(x, theta, &h)?)?;
                let beta = partner.as_ref().expect("partner computed");
                let ok = pull == psi_alpha(&spec, &g, &h)? && dual == psi_alpha(beta, &g, &h)?;
                (ok, format!("g={g} h={h}"))
            }
        };
        if !ok {
            failures += 1;
            first.get_or_insert(desc);
        }
    }
    Ok(Report {
        command: name,
        inputs: json!({"spec": spec_value(&spec), "trials": args.trials, "max_k": args.max_k, "seed": seed}),
        pass: failures == 0,
        result: json!({"trials": args.trials, "failures": failures, "first_failure": first}),
    })
}

fn partner_heisenberg(a: &EntriesArgs) -> Out<Report> {
    let spec = build_spec(&a.spec)?;
    let window = heisenberg_partner(&spec, a.entries)?;
    let partner = heisenberg_partner_spec(&spec)?;
    let coherence = coherence_check(&window, spec.prime(), 1)?;
    Ok(Report {
        command: "morita heisenberg",
        inputs: json!({"spec": spec_value(&spec), "entries": a.entries}),
        pass: coherence.is_coherent(),
        result: json!({"beta": to_value(&window), "partner": spec_value(&partner), "coherent": coherence.is_coherent()}),
    })
}

fn partner_projection(a: &ProjectionArgs) -> Out<Report> {
    let spec = build_spec(&a.spec)?;
    let proj = build_proj(&spec, &a.proj)?;
    let window = projection_partner(&spec, &proj, a.entries)?;
    let rep = coherence_check(&window, spec.prime(), 2)?;
    let lines = (0..=a.entries)
        .map(|n| trace_line(&spec, &proj, n).map(|l| to_value(&l)))
        .collect::<Result<Vec<_>, _>>()?;
    let defects: Vec<String> = rep.defects.iter().map(|d| d.value.to_string()).collect();
    let ok = rep.is_coherent() && rep.defects_in_digit_range(spec.prime());
    Ok(Report {
        command: "morita projection",
        inputs: json!({"spec": spec_value(&spec), "projection": to_value(&proj), "entries": a.entries}),
        pass: ok,
        result: json!({"beta": to_value(&window), "trace_lines": lines, "defects": defects}),
    })
}

fn relate(a: &EntriesArgs) -> Out<Report> {
    let spec = build_spec(&a.spec)?;
    let rep = relate_check(&spec, a.entries)?;
    let entries: Vec<Value> = rep
        .entries
        .iter()
        .map(|e| {
            json!({
                "n": e.n,
                "displayed": {"a": e.displayed.a.to_string(), "b": e.displayed.b.to_string(),
                              "c": e.displayed.c.to_string(), "d": e.displayed.d.to_string(),
                              "det": e.displayed.det().to_string(), "b_integral": e.b_integral},
                "displayed_beta": e.displayed_beta.to_string(),
                "heisenberg_beta": e.heisenberg_beta.to_string(),
                "normalized": {"a": e.normalized.a.to_string(), "b": e.normalized.b.to_string(),
                               "det": e.normalized.det().to_string()},
                "normalized_beta": e.normalized_beta.to_string(),
                "exact_agreement": e.exact_agreement(),
            })
        })
        .collect();
    let dets: Vec<String> = rep.displayed_determinants().iter().map(BigInt::to_string).collect();
    Ok(Report {
        command: "morita relate",
        inputs: json!({"spec": spec_value(&spec), "entries": a.entries}),
        pass: rep.holds(),
        result: json!({
            "holds": rep.holds(),
            "displayed_determinants": dets,
            "normalized_matches_heisenberg_mod1": rep.normalized_matches_direct(),
            "normalized_matches_negated_heisenberg_mod1": rep.normalized_matches_negated(),
            "entries": entries,
        }),
    })
}

fn certify(a: &CertifyArgs) -> Out<Report> {
    let sa = parse_spec_json(&a.a)?;
    let sb = parse_spec_json(&a.b)?;
    let bounds = SearchBounds {
        max_c0: a.max_c0,
        max_d0: a.max_d0,
        max_k: a.max_k,
        entries: a.entries,
    };
    let outcome = certificate_search(&sa, &sb, &bounds)?;
    Ok(Report {
        command: "morita certify",
        inputs: json!({"a": spec_value(&sa), "b": spec_value(&sb), "bounds": to_value(&bounds)}),
        pass: !matches!(outcome, SearchOutcome::Inconclusive { .. }),
        result: to_value(&outcome),
    })
}

fn verify(a: &VerifyArgs, seed: u64) -> Out<Report> {
    let spec = build_spec(&a.spec)?;
    let proj = build_proj(&spec, &a.proj)?;
    let plan = SamplePlan {
        seed,
        functions: a.functions,
        points: a.points,
        ..SamplePlan::default()
    };
    let opts = SuiteOptions {
        normalization: a.normalization.into(),
        ..SuiteOptions::default()
    };
    let rep = match identity_suite_with(&spec, &proj, a.n, &plan, opts) {
        Err(Error::EmptyPlan) => return Err(usage("sample plan is empty")),
        other => other?,
    };
    let corrupted = gamma_self_test(&spec, &proj, a.n, &plan, 0.01)?;
    let sensitive = corrupted > 1e-3;
    let pass = rep.passes(a.tolerance) && sensitive;
    Ok(Report {
        command: "bimodule verify",
        inputs: json!({"spec": spec_value(&spec), "projection": to_value(&proj), "n": a.n,
                       "plan": to_value(&plan), "tolerance": a.tolerance,
                       "normalization": to_value(&Normalization::from(a.normalization))}),
        pass,
        result: json!({
            "identities": to_value(&rep.identities),
            "failing": rep.failures(a.tolerance),
            "checks": to_value(&rep.checks),
            "extras": to_value(&rep.extras),
            "inner_scale": to_value(&rep.inner_scale),
            "rescaled": to_value(&rep.rescaled),
            "corrupted_gamma_deviation": corrupted,
            "self_test_sensitive": sensitive,
        }),
    })
}

fn suite(a: &SuiteArgs, seed: u64) -> Out<Report> {
    let cfg = SuiteConfig {
        seed,
        bimodule_tolerance: a.bimodule_tolerance,
        normalization: a.normalization.into(),
        points: a.points,
    };
    let outcomes = checks::run_all(&cfg);
    let pass = outcomes.iter().all(|o| o.pass);
    Ok(Report {
        command: "suite",
        inputs: json!({"seed": seed, "bimodule_tolerance": a.bimodule_tolerance,
                       "normalization": to_value(&cfg.normalization), "points": a.points}),
        pass,
        result: json!({"checks": to_value(&outcomes)}),
    })
}

fn condition(p: u64, c0: i64, d0: i64, x0: u64) -> Out<Report> {
    if !crate::exactnum::is_prime(p) {
        return Err(usage(format!("{p} is not prime")));
    }
    if c0 == 0 {
        return Err(usage("c0 must be nonzero"));
    }
    let proj = ProjectionData { m: 1, c0, d0 };
    let ok = condition_check(p, &proj, x0);
    let c = BigInt::from(c0);
    let g = (&c * p).gcd(&(BigInt::from(d0) - &c * x0));
    // the first two trace lines depend only on x0 and the next digit, so report gcd(c0, d0) too
    let initial = c.gcd(&BigInt::from(d0));
    let witness = if ok {
        None
    } else if p > 0 {
        let spec = SolenoidSpec::with_digits(p, QuadReal::zero(), vec![x0 % p])
            .map_err(|e| usage(e.to_string()))?;
        condition_witness(&spec, &proj, 0).ok().flatten().map(|w| to_value(&w))
    } else {
        None
    };
    Ok(Report {
        command: "check condition",
        inputs: json!({"p": p, "c0": c0, "d0": d0, "x0": x0}),
        pass: ok,
        result: json!({
            "holds": ok,
            "gcd": g.to_string(),
            "gcd_c0_d0": initial.to_string(),
            "coprime_c0_d0": initial.is_one(),
            "witness": witness,
        }),
    })
}
