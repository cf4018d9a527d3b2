//! Command-line front end. Every subcommand expands its flags into a
//! [`Scenario`] (or a direct library call) and reports through exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success: converged or periodic, certificate passed |
//! | 1 | error while computing |
//! | 2 | evaluation undecided |
//! | 3 | construction not certified |
//! | 64 | usage error |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::cf::Verdict;
use crate::error::{Error, Result};
use crate::moebius::{rho_inverse, rotation_number, t_map, MapClass, MoebiusMap};
use crate::report::{
    compare_values, run, run_batch, to_json, write_outputs, Certificate, EvalSpec, RhoForm, RunOutcome, Scenario,
    SourceSpec,
};
use crate::scalar::{check_precision, Scalar, DEFAULT_PRECISION, PRECISION_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_NOT_CERTIFIED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "ramcf",
    version,
    about = "Evaluate continued fractions -a1/(1 - a2/(1 - ...)) and build convergent ones with a_i -> a > 1/4"
)]
pub struct Cli {
    /// Working precision in bits; overrides the scenario file, which
    /// overrides RAMCF_PRECISION_BITS, which overrides the default 256
    #[arg(long, global = true)]
    pub precision_bits: Option<u32>,
    /// Seed for every random choice [default: 0]; overrides the scenario file
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for CSV and JSON outputs
    #[arg(long, global = true, default_value = "ramcf-out")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a fraction and write trace.csv and report.json
    Eval(EvalArgs),
    /// Rotation number of T_a, or its inverse
    Rho(RhoArgs),
    /// Classify T_b or an explicit matrix
    Classify(ClassifyArgs),
    /// Build, evaluate and certify a convergent construction
    Construct(ConstructArgs),
    /// Partial sums of |a_i - a| next to the verdict of the fraction
    Gill(GillArgs),
    /// Tabulate artifacts from earlier runs
    Compare(CompareArgs),
    /// Run several scenario files and compare them
    Batch(BatchArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["scenario", "constant", "explicit"])))]
pub struct EvalArgs {
    /// Scenario JSON file
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Constant coefficients a_i = A
    #[arg(long, allow_hyphen_values = true)]
    pub constant: Option<String>,
    /// File of decimal coefficients separated by whitespace or commas
    #[arg(long)]
    pub explicit: Option<PathBuf>,
    /// Number of convergents to compute
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Chordal diameter below which the last window counts as converged
    #[arg(long)]
    pub threshold: Option<String>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("which").required(true).args(["a", "inverse"])))]
pub struct RhoArgs {
    /// Parameter a > 1/4
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Rotation number in (0, 1/2)
    #[arg(long, allow_hyphen_values = true)]
    pub inverse: Option<String>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("map").required(true).args(["b", "matrix"])))]
pub struct ClassifyArgs {
    /// Classify T_b(z) = -b/(z + 1)
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Matrix entries m11,m12,m21,m22
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: Option<String>,
    /// Classify the n-th power instead
    #[arg(long, default_value_t = 1)]
    pub power: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstructMode {
    Rational,
    Irrational,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long, value_enum)]
    pub mode: ConstructMode,
    /// Scenario JSON file; built from the flags below when absent
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Rational mode: numerator of the rotation number
    #[arg(long, default_value_t = 1)]
    pub p: u64,
    /// Rational mode: denominator of the rotation number
    #[arg(long, default_value_t = 3)]
    pub q: u64,
    /// Rational mode: harmonic, geometric, zero, or a rule such as 1/i
    #[arg(long, default_value = "harmonic")]
    pub t_rule: String,
    /// Irrational mode: number of stages K
    #[arg(long, default_value_t = 3)]
    pub stages: usize,
    /// Number of convergents to compute
    #[arg(long)]
    pub max_n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GillArgs {
    /// Limit a
    #[arg(long, allow_hyphen_values = true)]
    pub a: String,
    /// Perturbation rule: 0, 2^-i, 1/i, 1/i^p, i^-p
    #[arg(long, default_value = "0")]
    pub rule: String,
    /// Number of terms
    #[arg(long, default_value_t = 30_000)]
    pub max_n: usize,
    /// Put the rule on residues 1, 2 mod q with lemma coefficients
    /// (needs rational rotation number p/q for a)
    #[arg(long)]
    pub lemma: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// artifact.json files or directories holding one
    #[arg(required = true, num_args = 2..)]
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    /// Scenario files, each holding one scenario or an array
    #[arg(required = true, num_args = 1..)]
    pub scenarios: Vec<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return parse_error_code(&e);
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Help and version requests are not errors.
fn parse_error_code(e: &clap::Error) -> i32 {
    if e.use_stderr() {
        EXIT_USAGE
    } else {
        EXIT_OK
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Eval(a) => cmd_eval(cli, a),
        Command::Rho(a) => cmd_rho(cli, a),
        Command::Classify(a) => cmd_classify(cli, a),
        Command::Construct(a) => cmd_construct(cli, a),
        Command::Gill(a) => cmd_gill(cli, a),
        Command::Compare(a) => cmd_compare(cli, a),
        Command::Batch(a) => cmd_batch(cli, a),
    }
}

fn env_precision() -> Result<Option<u32>> {
    match std::env::var(PRECISION_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidConfig(format!("{PRECISION_ENV}=`{v}` is not a bit count"))),
        _ => Ok(None),
    }
}

fn precision(cli: &Cli) -> Result<u32> {
    let bits = match cli.precision_bits {
        Some(p) => p,
        None => env_precision()?.unwrap_or(DEFAULT_PRECISION),
    };
    check_precision(bits)
}

/// Flags override what the scenario file says; the environment only
/// fills in a missing precision.
fn apply_globals(cli: &Cli, mut s: Scenario) -> Result<Scenario> {
    if let Some(p) = cli.precision_bits {
        s.precision_bits = Some(p);
    } else if s.precision_bits.is_none() {
        s.precision_bits = env_precision()?;
    }
    if let Some(seed) = cli.seed {
        s.seed = Some(seed);
    }
    Ok(s)
}

fn apply_eval(mut s: Scenario, max_n: Option<usize>, threshold: Option<&String>) -> Scenario {
    if max_n.is_none() && threshold.is_none() {
        return s;
    }
    let mut eval = s.eval_spec();
    if let Some(n) = max_n {
        eval.max_n = n;
    }
    if let Some(t) = threshold {
        eval.threshold = Some(t.clone());
    }
    s.eval = Some(eval);
    s
}

fn out_dir(cli: &Cli, s: &Scenario) -> PathBuf {
    match s.output.as_ref().and_then(|o| o.dir.as_ref()) {
        Some(d) => PathBuf::from(d),
        None => cli.out_dir.clone(),
    }
}

fn verdict_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Converged | Verdict::DivergedPeriodic { .. } => EXIT_OK,
        Verdict::Undecided => EXIT_UNDECIDED,
    }
}

fn print_summary(outcome: &RunOutcome, dir: &Path) {
    let a = &outcome.artifact;
    println!("verdict: {}", a.report.verdict.label());
    if let Some(l) = &a.report.limit_estimate {
        println!("limit: {}", l.to_decimal());
    }
    if let Some(d) = a.report.final_diameter() {
        println!("final window diameter: {}", d.to_display(6));
    }
    println!("outputs: {}", dir.display());
}

fn read_explicit(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect())
}

fn cmd_eval(cli: &Cli, args: &EvalArgs) -> Result<i32> {
    let scenario = if let Some(path) = &args.scenario {
        Scenario::load(path)?
    } else if let Some(a) = &args.constant {
        Scenario::constant(a)
    } else if let Some(path) = &args.explicit {
        Scenario::new(SourceSpec::Explicit {
            values: read_explicit(path)?,
            limit: None,
        })
    } else {
        unreachable!("clap enforces one input")
    };
    let scenario = apply_eval(apply_globals(cli, scenario)?, args.max_n, args.threshold.as_ref());
    let outcome = run(&scenario)?;
    let dir = out_dir(cli, &scenario);
    write_outputs(&outcome, &dir)?;
    print_summary(&outcome, &dir);
    Ok(verdict_code(&outcome.artifact.report.verdict))
}

fn cmd_rho(cli: &Cli, args: &RhoArgs) -> Result<i32> {
    let prec = precision(cli)?;
    let value = match (&args.a, &args.inverse) {
        (Some(a), _) => rotation_number(&Scalar::parse(a, prec)?)?,
        (_, Some(r)) => rho_inverse(&Scalar::parse(r, prec)?)?,
        _ => unreachable!("clap enforces one flag"),
    };
    println!("{}", value.to_decimal());
    Ok(EXIT_OK)
}

fn parse_matrix(text: &str, prec: u32) -> Result<MoebiusMap> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::Parse(format!(
            "matrix `{text}` needs four comma-separated entries"
        )));
    }
    let v = parts
        .iter()
        .map(|p| Scalar::parse(p, prec))
        .collect::<Result<Vec<_>>>()?;
    MoebiusMap::new(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone())
}

fn class_json(map: &MoebiusMap) -> Value {
    let class = map.classify_default();
    let mut out = json!({ "class": class.name(), "trace": map.trace().to_decimal() });
    match class {
        MapClass::Elliptic { rotation_number } => {
            out["rotation_number"] = json!(rotation_number.to_decimal());
        }
        MapClass::Hyperbolic {
            attractor,
            repeller,
            multiplier,
        } => {
            out["attractor"] = json!(attractor.to_decimal());
            out["repeller"] = json!(repeller.to_decimal());
            out["multiplier"] = json!(multiplier.to_decimal());
        }
        MapClass::Identity | MapClass::Parabolic => {}
    }
    out
}

fn cmd_classify(cli: &Cli, args: &ClassifyArgs) -> Result<i32> {
    let prec = precision(cli)?;
    let map = match (&args.b, &args.matrix) {
        (Some(b), _) => t_map(&Scalar::parse(b, prec)?)?,
        (_, Some(m)) => parse_matrix(m, prec)?,
        _ => unreachable!("clap enforces one map"),
    };
    println!("{}", to_json(&class_json(&map.power(args.power)))?.trim_end());
    Ok(EXIT_OK)
}

fn diagnostic(outcome: &RunOutcome) -> Value {
    let a = &outcome.artifact;
    let mut failing = Vec::new();
    if a.report.verdict != Verdict::Converged {
        failing.push(format!("verdict {}", a.report.verdict.label()));
    }
    match &a.certificate {
        None => failing.push("no certificate: some stage is not hyperbolic".to_string()),
        Some(Certificate::Rational(c)) => {
            let s = &c.summary;
            for (ok, what) in [
                (s.unbounded_heuristic, "sum of -ln mu_r does not keep growing"),
                (s.fit_ok, "-ln mu_r does not follow |s| t_r"),
                (s.monotone_tail, "A_r, R_r do not settle monotonically"),
                (c.layout.holds, "coefficient layout bound fails"),
            ] {
                if !ok {
                    failing.push(what.to_string());
                }
            }
            if s.max_attractor_distance.to_f64() >= crate::rational::TAIL_DISTANCE
                || s.max_repeller_distance.to_f64() >= crate::rational::TAIL_DISTANCE
            {
                failing.push("A_r, R_r stay away from A, R".to_string());
            }
        }
        Some(Certificate::Irrational(c)) => {
            if !c.all_hyperbolic {
                failing.push("some stage is not hyperbolic".into());
            }
            if !c.margins_ok {
                failing.push("some R_n is too close to M_n".into());
            }
            failing.extend(
                c.check
                    .schedule
                    .iter()
                    .filter(|r| !r.ok)
                    .map(|r| format!("schedule fails at k = {}", r.k)),
            );
            failing.extend(
                c.check
                    .cauchy
                    .iter()
                    .filter(|r| !r.ok)
                    .map(|r| format!("Cauchy estimate fails at k = {}", r.k)),
            );
        }
    }
    json!({
        "verdict": a.report.verdict.label(),
        "certificate_passes": a.certificate.as_ref().map(Certificate::passes),
        "failing": failing,
    })
}

fn cmd_construct(cli: &Cli, args: &ConstructArgs) -> Result<i32> {
    let scenario = match &args.scenario {
        Some(path) => Scenario::load(path)?,
        None => match args.mode {
            ConstructMode::Rational => Scenario::rational(args.p, args.q, &args.t_rule),
            ConstructMode::Irrational => Scenario::irrational(RhoForm::golden(), args.stages),
        },
    };
    let expected = match args.mode {
        ConstructMode::Rational => "rational",
        ConstructMode::Irrational => "irrational",
    };
    if scenario.source.mode() != expected {
        eprintln!(
            "error: scenario mode `{}` does not match --mode {expected}",
            scenario.source.mode()
        );
        return Ok(EXIT_USAGE);
    }
    let scenario = apply_eval(apply_globals(cli, scenario)?, args.max_n, None);
    let outcome = run(&scenario)?;
    let dir = out_dir(cli, &scenario);
    write_outputs(&outcome, &dir)?;
    print_summary(&outcome, &dir);
    if outcome.artifact.passes == Some(true) {
        println!("certificate: passed");
        Ok(EXIT_OK)
    } else {
        let diag = diagnostic(&outcome);
        let text = to_json(&diag)?;
        fs::write(dir.join("diagnostic.json"), &text)?;
        println!("{}", text.trim_end());
        Ok(EXIT_NOT_CERTIFIED)
    }
}

/// `p/q` with `q ≤ 64` matching `ρ(a)` to half the working precision.
fn rational_rotation(a: &Scalar) -> Result<(u64, u64)> {
    let prec = a.prec();
    let rho = rotation_number(a)?;
    let tol = Scalar::pow2(-((prec / 2) as i32), prec);
    for q in 3..=64u64 {
        let p = (&rho * Scalar::from_int(q as i64, prec)).to_f64().round() as u64;
        if p > 0 && (&rho - Scalar::ratio(p as i64, q as i64, prec)).abs() < tol {
            return Ok((p, q));
        }
    }
    Err(Error::NotPeriodic(0))
}

fn cmd_gill(cli: &Cli, args: &GillArgs) -> Result<i32> {
    let prec = precision(cli)?;
    let base = if args.lemma {
        let (p, q) = rational_rotation(&Scalar::parse(&args.a, prec)?)?;
        Scenario::rational(p, q, &args.rule)
    } else {
        Scenario::gill(&args.a, &args.rule)
    };
    let scenario = apply_globals(cli, base)?.with_eval(EvalSpec {
        max_n: args.max_n,
        ..EvalSpec::default()
    });
    let outcome = run(&scenario)?;
    let dir = out_dir(cli, &scenario);
    write_outputs(&outcome, &dir)?;
    if let Some(g) = &outcome.artifact.gill {
        fs::write(dir.join("gill.json"), to_json(g)?)?;
        if let Some((n, s)) = g.checkpoints.last() {
            println!("sum |a_i - a| up to {n}: {}", s.to_display(12));
        }
        println!("summable: {}", g.summable_heuristic);
    }
    print_summary(&outcome, &dir);
    Ok(verdict_code(&outcome.artifact.report.verdict))
}

fn load_artifact(path: &Path) -> Result<Value> {
    let file = if path.is_dir() {
        path.join("artifact.json")
    } else {
        path.to_path_buf()
    };
    let text = fs::read_to_string(&file).map_err(|e| Error::Io(format!("{}: {e}", file.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Scenario(format!("{}: {e}", file.display())))
}

fn write_comparison(values: &[Value], dir: &Path) -> Result<()> {
    let table = compare_values(values)?;
    fs::create_dir_all(dir)?;
    table.write_csv(fs::File::create(dir.join("comparison.csv"))?)?;
    fs::write(dir.join("comparison.json"), to_json(&table)?)?;
    let stdout = std::io::stdout();
    table.write_csv(stdout.lock())?;
    stdout.lock().flush()?;
    Ok(())
}

fn cmd_compare(cli: &Cli, args: &CompareArgs) -> Result<i32> {
    let values = args
        .artifacts
        .iter()
        .map(|p| load_artifact(p))
        .collect::<Result<Vec<_>>>()?;
    write_comparison(&values, &cli.out_dir)?;
    Ok(EXIT_OK)
}

/// Directory names: the scenario label, suffixed with its position when
/// labels repeat.
fn run_dirs(root: &Path, scenarios: &[Scenario]) -> Vec<PathBuf> {
    let labels: Vec<String> = scenarios.iter().map(Scenario::label).collect();
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let clash = labels.iter().filter(|o| *o == l).count() > 1;
            root.join(if clash { format!("{l}-{i}") } else { l.clone() })
        })
        .collect()
}

fn cmd_batch(cli: &Cli, args: &BatchArgs) -> Result<i32> {
    let mut scenarios = Vec::new();
    for path in &args.scenarios {
        for s in Scenario::load_many(path)? {
            scenarios.push(apply_globals(cli, s)?);
        }
    }
    let dirs = run_dirs(&cli.out_dir, &scenarios);
    let mut values = Vec::new();
    let mut code = EXIT_OK;
    for ((result, dir), s) in run_batch(&scenarios).into_iter().zip(&dirs).zip(&scenarios) {
        match result {
            Ok(outcome) => {
                write_outputs(&outcome, dir)?;
                println!("{}: {}", s.label(), outcome.artifact.report.verdict.label());
                values.push(serde_json::to_value(&outcome.artifact)?);
            }
            Err(e) => {
                eprintln!("{}: error: {e}", s.label());
                code = EXIT_ERROR;
            }
        }
    }
    if values.len() >= 2 {
        write_comparison(&values, &cli.out_dir)?;
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_code(args: &[&str]) -> i32 {
        Cli::try_parse_from(args).map_or_else(|e| parse_error_code(&e), |_| EXIT_OK)
    }

    #[test]
    fn usage_errors_are_64() {
        assert_eq!(parse_code(&["ramcf", "eval"]), EXIT_USAGE);
        assert_eq!(
            parse_code(&["ramcf", "eval", "--constant", "1", "--explicit", "x"]),
            EXIT_USAGE
        );
        assert_eq!(parse_code(&["ramcf", "rho", "--bogus"]), EXIT_USAGE);
        assert_eq!(parse_code(&["ramcf", "compare", "one.json"]), EXIT_USAGE);
        assert_eq!(parse_code(&["ramcf", "--help"]), EXIT_OK);
        assert_eq!(parse_code(&["ramcf", "rho", "--a", "-1"]), EXIT_OK);
    }

    #[test]
    fn rotation_of_one_is_a_third() {
        assert_eq!(rational_rotation(&Scalar::one(256)).unwrap(), (1, 3));
        assert_eq!(rational_rotation(&Scalar::ratio(1, 2, 256)).unwrap(), (1, 4));
        assert!(rational_rotation(&Scalar::from_int(2, 256)).is_err());
    }

    #[test]
    fn classify_t_maps() {
        let prec = 256;
        let v = class_json(&t_map(&Scalar::one(prec)).unwrap());
        assert_eq!(v["class"], "elliptic");
        let v = class_json(&t_map(&Scalar::ratio(3, 16, prec)).unwrap());
        assert_eq!(v["class"], "hyperbolic");
        let v = class_json(&t_map(&Scalar::one(prec)).unwrap().power(3));
        assert_eq!(v["class"], "identity");
        assert!(parse_matrix("1,2,3", prec).is_err());
    }

    #[test]
    fn batch_dirs_are_distinct() {
        let s = vec![
            Scenario::constant("1"),
            Scenario::constant("2"),
            Scenario::gill("1", "0"),
        ];
        let d = run_dirs(Path::new("o"), &s);
        assert_eq!(
            d,
            vec![
                PathBuf::from("o/constant-0"),
                PathBuf::from("o/constant-1"),
                PathBuf::from("o/gill")
            ]
        );
    }
}
