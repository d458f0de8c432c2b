//! The `snell` command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 invalid
//! model or parameters, 4 enumeration budget exceeded, 5 file error.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Number;

use crate::error::{Error, Result};
use crate::lower::lower_snell;
use crate::measure::{pasting, verify_pasting_formula, Family, Measure, RectangularFamily};
use crate::models::{self, to_number, BinomialParams, InstanceBounds, Model, Payoff};
use crate::oracle::{self, path_probabilities};
use crate::scalar::{Exact, Scalar};
use crate::snell::{min_optimal_time, snell_envelope};
use crate::tree::{EventTree, StoppingTime};
use crate::verify::{verify_model, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "snell", version, about = "Robust optimal stopping on finite event trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a binomial model with drift ambiguity, or a seeded random model.
    Gen(GenArgs),
    /// Lower Snell envelope and robust stopping time of a model.
    Price(PriceArgs),
    /// Run the invariant suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Every E_Q[H_tau] over stopping times from the root and members, as CSV.
    Enumerate(EnumerateArgs),
    /// Paste two members at a stopping time and check the pasting formula.
    Paste(PasteArgs),
    /// Lower value of the binomial put or call as the time step shrinks, as CSV.
    Refine(RefineArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GenKind {
    Binomial,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PayoffKind {
    Put,
    Call,
}

#[derive(Debug, Args)]
struct Common {
    /// Rational arithmetic instead of binary floating point.
    #[arg(long)]
    exact: bool,
    /// Cap on the size of any single enumeration.
    #[arg(long, env = "SNELL_BUDGET", default_value_t = oracle::DEFAULT_BUDGET)]
    budget: u128,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value_t = GenKind::Binomial)]
    model: GenKind,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=20))]
    steps: u32,
    #[arg(long, default_value = "100")]
    s0: String,
    #[arg(long, default_value = "1.1")]
    u: String,
    #[arg(long, default_value = "0.9")]
    d: String,
    #[arg(long, default_value = "0.4")]
    plo: String,
    #[arg(long, default_value = "0.6")]
    phi: String,
    #[arg(long, value_enum, default_value_t = PayoffKind::Put)]
    payoff: PayoffKind,
    #[arg(long, default_value = "100")]
    strike: String,
    /// Seed of a random model.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=6))]
    max_depth: u32,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(2..=5))]
    max_branching: u32,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=5))]
    max_kernels: u32,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct PriceArgs {
    model: PathBuf,
    /// Canonical index of a single member: report its classical envelope.
    #[arg(long)]
    measure: Option<u128>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    model: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    draws: usize,
    #[arg(long, default_value_t = 50)]
    chains: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    model: PathBuf,
    /// Also write the region of every stopping time as CSV (tau_id,region).
    #[arg(long)]
    taus: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct PasteArgs {
    model: PathBuf,
    #[arg(long)]
    q1: u128,
    #[arg(long)]
    q2: u128,
    /// `root`, `leaves`, `depth:K`, or comma-separated node ids.
    #[arg(long)]
    sigma: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct RefineArgs {
    /// Refinements use 2, 4, ..., 2^k steps.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=4))]
    k: u32,
    #[arg(long, default_value = "100")]
    s0: String,
    #[arg(long, default_value = "100")]
    strike: String,
    /// Volatility per unit time; a step of length h moves by exp(+-vol sqrt(h)).
    #[arg(long, default_value = "0.2")]
    vol: String,
    #[arg(long, default_value = "1")]
    maturity: String,
    /// Drift ambiguity: the up-probability ranges over 1/2 +- kappa sqrt(h) / 2.
    #[arg(long, default_value = "0.5")]
    kappa: String,
    #[arg(long, value_enum, default_value_t = PayoffKind::Put)]
    payoff: PayoffKind,
    #[command(flatten)]
    common: Common,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let mut rendered = e.render().to_string();
            if code != 0 && !rendered.contains("Usage:") {
                rendered.push('\n');
                rendered.push_str(&usage_for(&args));
                rendered.push('\n');
            }
            let target: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(target, "{rendered}");
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Usage line of the subcommand named in `args`, or of the whole tool.
fn usage_for(args: &[std::ffi::OsString]) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let name = args
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find(|a| cmd.find_subcommand(a).is_some())
        .map(str::to_owned);
    let usage = match name.and_then(|n| cmd.find_subcommand_mut(&n).map(|c| c.render_usage())) {
        Some(u) => u,
        None => cmd.render_usage(),
    };
    usage.to_string()
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<bool> {
    let exact = match &command {
        Command::Gen(a) => a.common.exact,
        Command::Price(a) => a.common.exact,
        Command::Verify(a) => a.common.exact,
        Command::Enumerate(a) => a.common.exact,
        Command::Paste(a) => a.common.exact,
        Command::Refine(a) => a.common.exact,
    };
    if exact {
        execute::<Exact>(command, stdout)
    } else {
        execute::<f64>(command, stdout)
    }
}

fn execute<S: Scalar>(command: Command, stdout: &mut dyn Write) -> Result<bool> {
    match command {
        Command::Gen(a) => gen::<S>(&a, stdout),
        Command::Price(a) => price::<S>(&a, stdout),
        Command::Verify(a) => verify::<S>(&a, stdout),
        Command::Enumerate(a) => enumerate::<S>(&a, stdout),
        Command::Paste(a) => paste::<S>(&a, stdout),
        Command::Refine(a) => refine::<S>(&a, stdout),
    }
}

fn decimal<S: Scalar>(flag: &str, text: &str) -> Result<S> {
    S::parse_decimal(text).ok_or_else(|| Error::InvalidParameter(format!("--{flag}: not a number: {text}")))
}

fn payoff<S: Scalar>(kind: PayoffKind) -> Payoff<S> {
    match kind {
        PayoffKind::Put => Payoff::Put,
        PayoffKind::Call => Payoff::Call,
    }
}

/// Writes `text` to `--out` or to standard output.
fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn open_output<'a>(out: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(stdout)),
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

/// The model and the hash of the file it came from.
fn load<S: Scalar>(path: &Path) -> Result<(Model<S>, String)> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Schema {
        location: path.display().to_string(),
        reason: format!("not UTF-8: {e}"),
    })?;
    let model = Model::from_json(&text)?;
    Ok((model, models::content_hash(text.as_bytes())))
}

fn gen<S: Scalar>(a: &GenArgs, stdout: &mut dyn Write) -> Result<bool> {
    let model: Model<S> = match a.model {
        GenKind::Binomial => models::binomial_kappa(&BinomialParams {
            steps: a.steps as usize,
            s0: decimal("s0", &a.s0)?,
            up: decimal("u", &a.u)?,
            down: decimal("d", &a.d)?,
            p_lo: decimal("plo", &a.plo)?,
            p_hi: decimal("phi", &a.phi)?,
            payoff: payoff(a.payoff),
            strike: decimal("strike", &a.strike)?,
        })?,
        GenKind::Random => models::random_instance(
            a.seed,
            &InstanceBounds {
                max_depth: a.max_depth as usize,
                max_branching: a.max_branching as usize,
                max_kernels: a.max_kernels as usize,
                ..InstanceBounds::default()
            },
        )?,
    };
    emit(&a.common.out, stdout, &model.to_json())?;
    Ok(true)
}

#[derive(Serialize)]
struct Provenance {
    tool: &'static str,
    version: &'static str,
    model_hash: String,
    exact: bool,
}

fn provenance<S: Scalar>(model_hash: &str) -> Provenance {
    Provenance {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        model_hash: model_hash.to_string(),
        exact: S::EXACT,
    }
}

#[derive(Serialize)]
struct PriceReport {
    #[serde(flatten)]
    provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    measure_id: Option<String>,
    root_value: Number,
    /// Exact value as a reduced fraction, in exact mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    root_value_fraction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau_down_region: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau_region: Option<Vec<u64>>,
    envelope_by_node: BTreeMap<String, Number>,
}

fn fraction<S: Scalar>(x: &S) -> Option<String> {
    x.to_fraction_string()
}

fn envelope_map<S: Scalar>(tree: &EventTree<S>, values: &[S]) -> BTreeMap<String, Number> {
    tree.nodes()
        .map(|n| (tree.label(n).to_string(), to_number(&values[n.index()])))
        .collect()
}

fn price<S: Scalar>(a: &PriceArgs, stdout: &mut dyn Write) -> Result<bool> {
    let (model, hash): (Model<S>, _) = load(&a.model)?;
    let Model { tree, family, payoff } = &model;
    let report = match a.measure {
        None => {
            let r = lower_snell(tree, family, payoff)?;
            PriceReport {
                provenance: provenance::<S>(&hash),
                measure_id: None,
                root_value: to_number(&r.root_value),
                root_value_fraction: fraction(&r.root_value),
                tau_down_region: Some(r.tau_down.labels(tree)),
                tau_region: None,
                envelope_by_node: envelope_map(tree, r.envelope.values()),
            }
        }
        Some(id) => {
            let q = member(family, id)?;
            let u = snell_envelope(tree, &q, payoff)?;
            let tau = min_optimal_time(tree, &q, payoff, &StoppingTime::at_root(tree))?;
            let root = u.value(tree.root());
            PriceReport {
                provenance: provenance::<S>(&hash),
                measure_id: Some(id.to_string()),
                root_value: to_number(root),
                root_value_fraction: fraction(root),
                tau_down_region: None,
                tau_region: Some(tau.labels(tree)),
                envelope_by_node: envelope_map(tree, u.values()),
            }
        }
    };
    emit(&a.common.out, stdout, &to_json(&report))?;
    Ok(true)
}

fn member<S: Scalar>(family: &RectangularFamily<S>, id: u128) -> Result<Measure<S>> {
    family.member(id).ok_or_else(|| {
        Error::InvalidParameter(format!("measure {id} out of range: the family has {} members", family.member_count()))
    })
}

fn verify<S: Scalar>(a: &VerifyArgs, stdout: &mut dyn Write) -> Result<bool> {
    let (model, hash): (Model<S>, _) = load(&a.model)?;
    let opts = VerifyOptions {
        budget: a.common.budget,
        seed: a.seed,
        draws: a.draws,
        chains: a.chains,
        ..VerifyOptions::default()
    };
    let mut report = verify_model(&model, &opts)?;
    report.model_hash = hash;
    emit(&a.common.out, stdout, &to_json(&report))?;
    Ok(report.passed)
}

fn enumerate<S: Scalar>(a: &EnumerateArgs, stdout: &mut dyn Write) -> Result<bool> {
    let (model, hash): (Model<S>, _) = load(&a.model)?;
    let Model { tree, family, payoff } = &model;
    let root = StoppingTime::at_root(tree);
    let taus = oracle::enumerate_stopping_times(tree, &root, a.common.budget)?;
    let cells = (taus.len() as u128).saturating_mul(family.member_count());
    if cells > a.common.budget {
        return Err(Error::EnumerationTooLarge { count: cells, budget: a.common.budget });
    }
    let probs: Vec<Vec<S>> = family
        .iter_members(a.common.budget)?
        .map(|q| path_probabilities(tree, &q, tree.root()))
        .collect();

    if let Some(path) = &a.taus {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "tau_id,region")?;
        for (t, tau) in taus.iter().enumerate() {
            let labels: Vec<String> = tau.labels(tree).iter().map(u64::to_string).collect();
            writeln!(w, "{t},{}", labels.join(" "))?;
        }
        w.flush()?;
    }

    let p = provenance::<S>(&hash);
    let mut w = open_output(&a.common.out, stdout)?;
    writeln!(w, "# {} {} model {}", p.tool, p.version, p.model_hash)?;
    writeln!(w, "tau_id,measure_id,value")?;
    for (t, tau) in taus.iter().enumerate() {
        for (m, prob) in probs.iter().enumerate() {
            let v = tau
                .region()
                .iter()
                .fold(S::zero(), |acc, n| acc + prob[n.index()].clone() * payoff.value(*n).clone());
            writeln!(w, "{t},{m},{}", v.to_decimal_string())?;
        }
    }
    w.flush()?;
    Ok(true)
}

fn parse_sigma<S: Scalar>(tree: &EventTree<S>, text: &str) -> Result<StoppingTime> {
    let text = text.trim();
    if text == "root" {
        return Ok(StoppingTime::at_root(tree));
    }
    if text == "leaves" {
        return Ok(StoppingTime::at_leaves(tree));
    }
    if let Some(d) = text.strip_prefix("depth:") {
        let d = d.parse().map_err(|_| Error::InvalidParameter(format!("--sigma: bad depth {d}")))?;
        return StoppingTime::at_depth(tree, d);
    }
    let labels = text
        .split(',')
        .map(|s| s.trim().parse::<u64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::InvalidParameter(format!("--sigma: expected node ids, got {text}")))?;
    StoppingTime::from_labels(tree, &labels)
}

#[derive(Serialize)]
struct PasteReport {
    #[serde(flatten)]
    provenance: Provenance,
    q1: String,
    q2: String,
    sigma: Vec<u64>,
    kernels: BTreeMap<String, Vec<Number>>,
    is_member: bool,
    formula: FormulaReport,
}

#[derive(Serialize)]
struct FormulaReport {
    events_checked: usize,
    exhaustive: bool,
    max_abs_diff: f64,
    passed: bool,
}

fn paste<S: Scalar>(a: &PasteArgs, stdout: &mut dyn Write) -> Result<bool> {
    let (model, hash): (Model<S>, _) = load(&a.model)?;
    let Model { tree, family, .. } = &model;
    let q1 = member(family, a.q1)?;
    let q2 = member(family, a.q2)?;
    let sigma = parse_sigma(tree, &a.sigma)?;
    let q3 = pasting(tree, &q1, &q2, &sigma)?;
    let check = verify_pasting_formula(tree, &q1, &q2, &sigma, &q3)?;
    let report = PasteReport {
        provenance: provenance::<S>(&hash),
        q1: a.q1.to_string(),
        q2: a.q2.to_string(),
        sigma: sigma.labels(tree),
        kernels: tree
            .internal_nodes()
            .map(|n| (tree.label(n).to_string(), q3.kernel(n).iter().map(to_number).collect()))
            .collect(),
        is_member: family.contains(tree, &q3),
        formula: FormulaReport {
            events_checked: check.events_checked,
            exhaustive: check.exhaustive,
            max_abs_diff: check.max_abs_diff,
            passed: check.passed,
        },
    };
    emit(&a.common.out, stdout, &to_json(&report))?;
    Ok(check.passed)
}

fn refine<S: Scalar>(a: &RefineArgs, stdout: &mut dyn Write) -> Result<bool> {
    let vol: f64 = decimal::<f64>("vol", &a.vol)?;
    let maturity: f64 = decimal::<f64>("maturity", &a.maturity)?;
    let kappa: f64 = decimal::<f64>("kappa", &a.kappa)?;
    if vol <= 0.0 || maturity <= 0.0 || kappa < 0.0 {
        return Err(Error::InvalidParameter("need vol > 0, maturity > 0, kappa >= 0".into()));
    }
    let mut w = open_output(&a.common.out, stdout)?;
    writeln!(w, "# {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "steps,root_value,diff")?;
    let mut previous: Option<S> = None;
    for i in 1..=a.k {
        let steps = 1usize << i;
        let root_h = (maturity / steps as f64).sqrt();
        // Transcendental factors enter through their f64 values, also in exact mode.
        let lift = |x: f64| S::from_f64(x).ok_or_else(|| Error::InvalidParameter("non-finite parameter".into()));
        let model: Model<S> = models::binomial_kappa(&BinomialParams {
            steps,
            s0: decimal("s0", &a.s0)?,
            up: lift((vol * root_h).exp())?,
            down: lift((-vol * root_h).exp())?,
            p_lo: lift(0.5 - kappa * root_h / 2.0)?,
            p_hi: lift(0.5 + kappa * root_h / 2.0)?,
            payoff: payoff(a.payoff),
            strike: decimal("strike", &a.strike)?,
        })?;
        let value = lower_snell(&model.tree, &model.family, &model.payoff)?.root_value;
        let diff = previous.as_ref().map(|p| (value.clone() - p.clone()).to_decimal_string());
        writeln!(w, "{steps},{},{}", value.to_decimal_string(), diff.unwrap_or_default())?;
        previous = Some(value);
    }
    w.flush()?;
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_two() {
        let (code, _, err) = run_capture(&["snell", "gen", "--steps", "0"]);
        assert_eq!(code, 2);
        assert!(err.contains("--steps"));
        assert_eq!(run_capture(&["snell", "frobnicate"]).0, 2);
        assert_eq!(run_capture(&["snell", "refine", "--k", "9"]).0, 2);
    }

    #[test]
    fn gen_is_deterministic() {
        let a = run_capture(&["snell", "gen", "--steps", "2"]);
        let b = run_capture(&["snell", "gen", "--steps", "2"]);
        assert_eq!(a.0, 0);
        assert_eq!(a.1, b.1);
        let m: Model<f64> = Model::from_json(&a.1).unwrap();
        assert_eq!(m.tree.len(), 7);
    }

    #[test]
    fn bad_parameters_exit_three() {
        assert_eq!(run_capture(&["snell", "gen", "--plo", "0.7", "--phi", "0.6"]).0, 3);
        assert_eq!(run_capture(&["snell", "gen", "--u", "abc"]).0, 3);
    }

    #[test]
    fn fraction_rendering() {
        assert_eq!(fraction(&Exact::from_ratio(6, 4)).as_deref(), Some("3/2"));
        assert_eq!(fraction(&Exact::from_ratio(-3, 1)).as_deref(), Some("-3"));
        assert_eq!(fraction(&1.5f64), None);
    }
}
