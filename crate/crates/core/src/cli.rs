//! Command-line front end: growth comparisons, the construction pipeline
//! and entropy estimation, with CSV and JSON outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::json;
use thiserror::Error;

use crate::coder::{
    check_sandwich, count_words, count_words_composite, translation_toy, verify_syndetic_bounds,
    CoderError, WordCount,
};
use crate::estimator::{
    estimate_class, estimate_table, ClassEstimate, EstimatorError, FiniteSystem, GrowthSample,
    Method, DEFAULT_RUNGS,
};
use crate::flexibility::{build_composite, build_sequences, choose_l, ConstructionPlan, FlexError};
use crate::growth::{
    check_bjp, check_lip, compare, ordered_chain, parse_big_rational, parse_growth_spec, pi_e,
    pi_p, Growth, GrowthConfig, GrowthError, Relation, MIN_HORIZON,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

pub const THREADS_VAR: &str = "GROWTHFORGE_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("{0}")]
    Failed(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

impl From<GrowthError> for CliError {
    fn from(e: GrowthError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<FlexError> for CliError {
    fn from(e: FlexError) -> Self {
        match e {
            FlexError::NotPolynomial | FlexError::BelowQuadratic | FlexError::NoBjp => {
                CliError::Hypothesis(e.to_string())
            }
            FlexError::Stage { ref source, .. }
                if matches!(
                    **source,
                    FlexError::NotPolynomial | FlexError::BelowQuadratic | FlexError::NoBjp
                ) =>
            {
                CliError::Hypothesis(e.to_string())
            }
            FlexError::Growth(g) => g.into(),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<CoderError> for CliError {
    fn from(e: CoderError) -> Self {
        match e {
            CoderError::Flex(f) => f.into(),
            CoderError::Truncated { .. } => CliError::Usage(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "growthforge",
    version,
    about = "Orders of growth, realizing constructions and entropy estimates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare growth classes and report BJP, LIP and projections.
    Growth(GrowthArgs),
    /// Build sequences realizing a target class and verify the word counts.
    Construct(ConstructArgs),
    /// Estimate the growth class of a finite system.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args)]
pub struct GrowthArgs {
    /// Growth spec: a JSON file or inline JSON.
    #[arg(long)]
    pub target: String,
    /// Second growth spec to compare against.
    #[arg(long)]
    pub against: Option<String>,
    /// Defaults to 160, or the shortest table.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Constant allowed in equivalence checks, e.g. `64` or `5/4`.
    #[arg(long)]
    pub slack: Option<String>,
    /// Multiplier for the LIP check.
    #[arg(long = "lip-m", default_value_t = 2)]
    pub lip_m: u64,
    /// Directory for CSV and JSON outputs.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// Target spec; repeat for a chain of targets.
    #[arg(long, required = true)]
    pub target: Vec<String>,
    /// Number of crossing sequences; chosen automatically when absent.
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Defaults to 160, or the shortest table.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Largest first crossing time enumerated; defaults to the horizon.
    #[arg(long = "k1-max")]
    pub k1_max: Option<u64>,
    /// Constant allowed in equivalence checks, e.g. `64` or `5/4`.
    #[arg(long)]
    pub slack: Option<String>,
    /// Directory for CSV and JSON outputs.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Refuse truncated enumerations.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Spanning,
    Separated,
    Cover,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// System JSON file, or `doubling:M`, `rotation:M[:S]`, `identity:M`,
    /// `translation`.
    #[arg(long)]
    pub system: String,
    /// Count family; separated sets are the default.
    #[arg(long, value_enum, default_value_t = MethodArg::Separated)]
    pub method: MethodArg,
    /// JSON list of covers (each a list of point-index lists) for `cover`.
    #[arg(long)]
    pub cover: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    pub horizon: usize,
    #[arg(long, default_value_t = DEFAULT_RUNGS)]
    pub rungs: u32,
    /// Constant allowed in equivalence checks, e.g. `64` or `5/4`.
    #[arg(long)]
    pub slack: Option<String>,
    /// Directory for CSV and JSON outputs.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Validated settings shared by the commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub horizon: usize,
    pub growth: GrowthConfig,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn new(horizon: usize, slack: Option<&str>, out: Option<PathBuf>) -> Result<Self, CliError> {
        if horizon < MIN_HORIZON {
            return Err(CliError::Usage(format!(
                "horizon {horizon} is below {MIN_HORIZON}"
            )));
        }
        let growth = match slack {
            None => GrowthConfig::default(),
            Some(s) => {
                let slack = parse_big_rational(s)?;
                if slack < BigRational::from_integer(1.into()) {
                    return Err(CliError::Usage(format!("slack {s} is below 1")));
                }
                GrowthConfig::with_slack(slack)
            }
        };
        if let Some(dir) = &out {
            fs::create_dir_all(dir)?;
        }
        Ok(RunConfig {
            horizon,
            growth,
            out,
        })
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        if let Some(dir) = &self.out {
            fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

/// Text printed to stdout plus the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: serde_json::Value,
    pub text: String,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
            return (code, e.render().to_string());
        }
    };
    match execute(&cli.command) {
        Ok(o) => (o.code, o.text),
        Err(e) => (e.exit_code(), format!("error: {e}\n")),
    }
}

pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Growth(a) => cmd_growth(a),
        Command::Construct(a) => cmd_construct(a),
        Command::Estimate(a) => cmd_estimate(a),
    }
}

/// Reads a spec from a file, or takes the argument itself as JSON.
pub fn load_growth(arg: &str) -> Result<Growth, CliError> {
    let text = if Path::new(arg).is_file() {
        fs::read_to_string(arg)?
    } else if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        return Err(CliError::Usage(format!("no such spec file: {arg}")));
    };
    Ok(parse_growth_spec(&text)?)
}

fn growth_summary(
    g: &Growth,
    horizon: usize,
    lip_m: u64,
    cfg: &GrowthConfig,
) -> Result<(serde_json::Value, String), CliError> {
    let bjp = check_bjp(g, horizon, cfg)?;
    let lip_horizon = match g.available() {
        Some(len) => horizon.min(len / lip_m as usize),
        None => horizon,
    };
    let lip = if lip_horizon >= MIN_HORIZON {
        Some(check_lip(g, lip_m, lip_horizon, cfg)?)
    } else {
        None
    };
    let pe = pi_e(g, horizon)?;
    let pp = pi_p(g, horizon)?;
    let mut text = String::new();
    writeln!(text, "  class: {g}").unwrap();
    match &bjp {
        Some(c) => writeln!(text, "  bjp: C = {c}").unwrap(),
        None => writeln!(text, "  bjp: fails BJP").unwrap(),
    }
    match &lip {
        Some(Some((c1, c2))) => writeln!(text, "  lip(m={lip_m}): c1 = {c1}, c2 = {c2}").unwrap(),
        Some(None) => writeln!(text, "  lip(m={lip_m}): fails LIP").unwrap(),
        None => writeln!(text, "  lip(m={lip_m}): undetermined, table too short").unwrap(),
    }
    writeln!(text, "  pi_E: {pe}").unwrap();
    writeln!(text, "  pi_P: {pp}").unwrap();
    let report = json!({
        "class": g.to_string(),
        "bjp": bjp.map(|c| c.to_string()),
        "lip": match lip {
            Some(Some((c1, c2))) => json!({"m": lip_m, "c1": c1.to_string(), "c2": c2.to_string()}),
            Some(None) => json!("fails"),
            None => json!("undetermined"),
        },
        "pi_E": pe.to_string(),
        "pi_P": pp.to_string(),
    });
    Ok((report, text))
}

/// Horizon used when none is given.
pub const DEFAULT_HORIZON: usize = 160;

fn pick_horizon(given: Option<usize>, growths: &[&Growth]) -> usize {
    given.unwrap_or_else(|| {
        growths
            .iter()
            .filter_map(|g| g.available())
            .fold(DEFAULT_HORIZON, usize::min)
    })
}

pub fn cmd_growth(a: &GrowthArgs) -> Result<Outcome, CliError> {
    if a.lip_m < 2 {
        return Err(CliError::Usage("--lip-m must be at least 2".into()));
    }
    let target = load_growth(&a.target)?;
    let against = a.against.as_deref().map(load_growth).transpose()?;
    let horizon = pick_horizon(
        a.horizon,
        &[Some(&target), against.as_ref()]
            .into_iter()
            .flatten()
            .collect::<Vec<_>>(),
    );
    let cfg = RunConfig::new(horizon, a.slack.as_deref(), a.out.clone())?;
    let (target_report, target_text) = growth_summary(&target, cfg.horizon, a.lip_m, &cfg.growth)?;
    let mut text = format!("target\n{target_text}");
    let mut report = json!({"horizon": cfg.horizon, "target": target_report});
    let mut code = EXIT_OK;
    if let Some(other) = &against {
        let (other_report, other_text) = growth_summary(other, cfg.horizon, a.lip_m, &cfg.growth)?;
        let verdict = compare(&target, other, cfg.horizon, &cfg.growth)?;
        write!(text, "against\n{other_text}compare: {}", verdict.relation).unwrap();
        if let (Some(c1), Some(c2)) = (&verdict.c1, &verdict.c2) {
            write!(text, " (c1 = {c1}, c2 = {c2})").unwrap();
        }
        text.push('\n');
        if verdict.relation == Relation::NoVerdict {
            code = EXIT_INCONCLUSIVE;
        }
        report["against"] = other_report;
        report["compare"] = verdict.to_json();
    }
    cfg.write("report.json", &pretty(&report))?;
    Ok(Outcome { code, report, text })
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn ratio_f64(num: &BigRational) -> f64 {
    num.to_f64().unwrap_or(f64::NAN)
}

/// `n,c,a,ratio` for external plotting.
fn plot_csv(counts: &WordCount, target: &Growth) -> Result<String, CliError> {
    let a = target.rational_values(counts.horizon())?;
    let mut out = String::from("n,c,a,ratio\n");
    for n in 1..=counts.horizon() {
        let c = BigRational::from_integer(BigInt::from(counts.at(n).clone()));
        writeln!(
            out,
            "{},{},{:.6e},{:.6e}",
            n,
            counts.at(n),
            ratio_f64(&a[n - 1]),
            ratio_f64(&(c / &a[n - 1]))
        )
        .unwrap();
    }
    Ok(out)
}

pub fn cmd_construct(a: &ConstructArgs) -> Result<Outcome, CliError> {
    let targets = a
        .target
        .iter()
        .map(|t| load_growth(t))
        .collect::<Result<Vec<_>, _>>()?;
    let horizon = pick_horizon(a.horizon, &targets.iter().collect::<Vec<_>>());
    let cfg = RunConfig::new(horizon, a.slack.as_deref(), a.out.clone())?;
    let k1_max = a.k1_max.unwrap_or(horizon as u64);
    if a.strict && (k1_max as usize) < horizon {
        return Err(CliError::Usage(format!(
            "--k1-max {k1_max} is below the horizon {horizon} in strict mode"
        )));
    }
    if targets.len() == 1 {
        construct_single(&targets[0], a.l, k1_max, a.strict, &cfg)
    } else {
        construct_chain(&targets, k1_max, a.strict, &cfg)
    }
}

fn build_plan(
    target: &Growth,
    l: Option<usize>,
    cfg: &RunConfig,
) -> Result<ConstructionPlan, CliError> {
    let chosen = choose_l(target, cfg.horizon, &cfg.growth)?;
    let l = l.unwrap_or(chosen);
    Ok(build_sequences(target, l, cfg.horizon, &cfg.growth)?)
}

fn construct_single(
    target: &Growth,
    l: Option<usize>,
    k1_max: u64,
    strict: bool,
    cfg: &RunConfig,
) -> Result<Outcome, CliError> {
    let horizon = cfg.horizon;
    let plan = build_plan(target, l, cfg)?;
    let counts = count_words(&plan, horizon, k1_max, strict)?;
    let sandwich = check_sandwich(&plan, &counts);
    let complete_to = (1..=horizon)
        .take_while(|&n| counts.complete[n - 1])
        .last()
        .unwrap_or(0);
    let growth_counts = counts.as_growth()?;
    let fitted = pi_p(&growth_counts, complete_to.max(MIN_HORIZON))?;

    let mut text = String::new();
    writeln!(text, "target: {target}").unwrap();
    writeln!(
        text,
        "L = {}, horizon = {horizon}, k1_max = {k1_max}",
        plan.l
    )
    .unwrap();
    writeln!(
        text,
        "plan: d(n)/a(n) in [{:.6}, {:.6}] for n >= 8",
        ratio_f64(&plan.b1),
        ratio_f64(&plan.b2)
    )
    .unwrap();
    writeln!(
        text,
        "sandwich: lower {} ({} checks), upper {} ({} checks)",
        if sandwich.lower_failure.is_none() {
            "holds"
        } else {
            "FAILS"
        },
        sandwich.lower_checked,
        if sandwich.upper_failure.is_none() {
            "holds"
        } else {
            "FAILS"
        },
        sandwich.upper_checked
    )
    .unwrap();
    writeln!(text, "fitted exponent: {fitted}").unwrap();

    let mut report = json!({
        "target": target.to_string(),
        "L": plan.l,
        "horizon": horizon,
        "k1_max": k1_max,
        "b1": plan.b1.to_string(),
        "b2": plan.b2.to_string(),
        "fitted_exponent": fitted.value,
        "count_bjp": counts.max_jump().to_string(),
        "sandwich": {
            "holds": sandwich.holds(),
            "lower_checked": sandwich.lower_checked,
            "upper_checked": sandwich.upper_checked,
            "lower_failure": sandwich.lower_failure,
            "upper_failure": sandwich.upper_failure,
        },
    });

    let code = if complete_to < MIN_HORIZON {
        writeln!(
            text,
            "verdict: inconclusive (counts complete only to n = {complete_to})"
        )
        .unwrap();
        report["pass"] = json!(false);
        EXIT_INCONCLUSIVE
    } else {
        let r = verify_syndetic_bounds(&plan, &counts, complete_to, &cfg.growth)?;
        let pass = r.passed() && sandwich.holds();
        writeln!(
            text,
            "counts/target on (2L+2)N: d1 = {:.6}, d2 = {:.6}, d2/d1 = {:.4}, trend = {:.4}",
            ratio_f64(&r.d1),
            ratio_f64(&r.d2),
            ratio_f64(&(&r.d2 / &r.d1)),
            r.trend
        )
        .unwrap();
        writeln!(text, "verdict: {}", r.verdict.relation).unwrap();
        writeln!(text, "{}", if pass { "PASS" } else { "FAIL" }).unwrap();
        report["d1"] = json!(r.d1.to_string());
        report["d2"] = json!(r.d2.to_string());
        report["trend"] = json!(r.trend);
        report["verdict"] = r.verdict.to_json();
        report["pass"] = json!(pass);
        if pass {
            EXIT_OK
        } else {
            EXIT_INCONCLUSIVE
        }
    };

    cfg.write("plan.json", &pretty(&plan.to_json()))?;
    cfg.write("plan.csv", &plan.to_csv())?;
    cfg.write("counts.csv", &counts.to_csv(target)?)?;
    cfg.write("plot.csv", &plot_csv(&counts, target)?)?;
    cfg.write("report.json", &pretty(&report))?;
    Ok(Outcome { code, report, text })
}

fn construct_chain(
    targets: &[Growth],
    k1_max: u64,
    strict: bool,
    cfg: &RunConfig,
) -> Result<Outcome, CliError> {
    let horizon = cfg.horizon;
    let chain = ordered_chain(targets)?;
    let composite = build_composite(&chain, chain.len(), horizon, &cfg.growth)?;
    let counts = count_words_composite(&composite, horizon, k1_max, strict)?;
    let top = chain.top();
    let verdict = compare(&counts.as_growth()?, top, horizon, &cfg.growth)?;
    let complete = counts.is_complete();
    let pass = complete && verdict.relation == Relation::Equiv;

    let mut text = String::new();
    writeln!(text, "stages: {}", composite.k()).unwrap();
    for (idx, stage) in composite.stages.iter().enumerate() {
        writeln!(
            text,
            "  stage {}: {} (L = {})",
            idx + 1,
            stage.target,
            stage.l
        )
        .unwrap();
        cfg.write(
            &format!("plan_stage{}.json", idx + 1),
            &pretty(&stage.to_json()),
        )?;
        cfg.write(&format!("plan_stage{}.csv", idx + 1), &stage.to_csv())?;
    }
    writeln!(text, "composite counts vs {top}: {}", verdict.relation).unwrap();
    writeln!(text, "{}", if pass { "PASS" } else { "FAIL" }).unwrap();
    let report = json!({
        "stages": composite.stages.iter().map(|s| json!({"target": s.target.to_string(), "L": s.l})).collect::<Vec<_>>(),
        "horizon": horizon,
        "k1_max": k1_max,
        "complete": complete,
        "verdict": verdict.to_json(),
        "pass": pass,
    });
    cfg.write("counts.csv", &counts.to_csv(top)?)?;
    cfg.write("plot.csv", &plot_csv(&counts, top)?)?;
    cfg.write("report.json", &pretty(&report))?;
    let code = if pass { EXIT_OK } else { EXIT_INCONCLUSIVE };
    Ok(Outcome { code, report, text })
}

/// Built-in systems by name, otherwise a JSON file.
pub fn load_system(arg: &str) -> Result<Option<FiniteSystem>, CliError> {
    let parts: Vec<&str> = arg.split(':').collect();
    let size = |i: usize| -> Result<usize, CliError> {
        parts
            .get(i)
            .and_then(|s| s.parse().ok())
            .filter(|&m| m > 0)
            .ok_or_else(|| CliError::Usage(format!("bad system size in {arg}")))
    };
    match parts[0] {
        "translation" if parts.len() == 1 => Ok(None),
        "doubling" if parts.len() == 2 => Ok(Some(FiniteSystem::doubling_grid(size(1)?))),
        "identity" if parts.len() == 2 => Ok(Some(FiniteSystem::identity(size(1)?))),
        "rotation" if parts.len() == 2 || parts.len() == 3 => {
            let shift = if parts.len() == 3 { size(2)? } else { 1 };
            Ok(Some(FiniteSystem::rotation(size(1)?, shift)))
        }
        _ => {
            if !Path::new(arg).is_file() {
                return Err(CliError::Usage(format!("no such system file: {arg}")));
            }
            Ok(Some(FiniteSystem::from_json_str(&fs::read_to_string(
                arg,
            )?)?))
        }
    }
}

fn estimate_text(est: &ClassEstimate, method: &str) -> String {
    let mut text = String::new();
    writeln!(text, "method: {method}, horizon: {}", est.horizon).unwrap();
    match &est.label {
        Some(l) => writeln!(text, "class: {l}").unwrap(),
        None => writeln!(text, "class: no simple formula on this window").unwrap(),
    }
    writeln!(text, "h: {}", est.h).unwrap();
    writeln!(text, "h_pol: {}", est.h_pol).unwrap();
    text
}

pub fn cmd_estimate(a: &EstimateArgs) -> Result<Outcome, CliError> {
    let cfg = RunConfig::new(a.horizon, a.slack.as_deref(), a.out.clone())?;
    let Some(sys) = load_system(&a.system)? else {
        let counts = translation_toy(cfg.horizon)?;
        let table = counts.as_growth()?;
        let est = estimate_table(&table, cfg.horizon, &cfg.growth)?;
        let mut csv = String::from("method,epsilon,n,count,tag\n");
        for n in 1..=cfg.horizon {
            writeln!(csv, "coding,-,{},{},exact", n, counts.at(n)).unwrap();
        }
        let report = est.to_json();
        cfg.write("samples.csv", &csv)?;
        cfg.write("report.json", &pretty(&report))?;
        return Ok(Outcome {
            code: EXIT_OK,
            text: estimate_text(&est, "coding"),
            report,
        });
    };
    let sample = match a.method {
        MethodArg::Cover => {
            let path = a
                .cover
                .as_ref()
                .ok_or_else(|| CliError::Usage("--method cover needs --cover FILE".into()))?;
            let covers: Vec<Vec<Vec<usize>>> = serde_json::from_str(&fs::read_to_string(path)?)
                .map_err(|e| CliError::Usage(format!("bad cover file: {e}")))?;
            GrowthSample::covers(&sys, &covers, cfg.horizon)?
        }
        MethodArg::Spanning | MethodArg::Separated => {
            let method = if matches!(a.method, MethodArg::Spanning) {
                Method::Spanning
            } else {
                Method::Separated
            };
            GrowthSample::sample(&sys, method, &sys.ladder(a.rungs), cfg.horizon)?
        }
    };
    let est = estimate_class(&sample, &cfg.growth)?;
    let mut report = est.to_json();
    report["method"] = json!(sample.method.to_string());
    report["rungs"] = json!(sample
        .rungs
        .iter()
        .map(|r| r.label.clone())
        .collect::<Vec<_>>());
    cfg.write("samples.csv", &sample.to_csv())?;
    cfg.write("report.json", &pretty(&report))?;
    Ok(Outcome {
        code: EXIT_OK,
        text: estimate_text(&est, &sample.method.to_string()),
        report,
    })
}

/// Caps the global thread pool from `GROWTHFORGE_THREADS`.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Usage(format!("{THREADS_VAR}={value} is not a positive integer"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Failed(e.to_string()))
}
