//! Config-driven experiment runner.
//!
//! A JSON config file describes the model, the random observation time,
//! the estimator and the output; command-line flags override individual
//! fields. Five pipelines are exposed as subcommands: `simulate`,
//! `estimate`, `verify-dfr`, `hypotheses` and `counterexample`.
//!
//! Exit codes: 0 for a clean run, 1 for any error, 2 when the run
//! detects the property failure it was testing for (a VIOLATED margin
//! in `verify-dfr`, a confirmed construction in `counterexample`), so
//! scripted pipelines can assert expected violations.
//!
//! With the seed and thread count fixed, repeated runs produce byte
//! identical artifacts: estimation uses per-chunk random streams merged
//! in a fixed order, so the worker count never changes the numbers.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::counterexamples::{
    association_counterexample, kijima2_counterexample, CounterexampleReport,
};
use crate::error::{Error, Result};
use crate::estimate::{
    check_discrete_dfr, closed_form_poisson_exp, estimate_sequence_mc,
    estimate_sequence_quadrature, EstimateKind, EstimateMeta, LogConvexityReport, RandomTime,
    SurvivalSequenceEstimate,
};
use crate::hypotheses::{check_chain_decrease, check_kijima1_conditions, HypothesisReport};
use crate::models::{RepairPolicy, Trajectory, VirtualAgeModel, VirtualAgeRule};
use crate::rngs::stream_rng;
use crate::survival::{
    ArcLifetime, Empirical, Exponential, Gamma, Grid, PointMass, UniformZeroTo, Weibull,
};
use crate::tol::{DEFAULT_ALPHA, QUAD_ABS_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

/// Lifetime law description, mirroring the catalogue.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum LawSpec {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    Gamma { shape: f64, rate: f64 },
    Uniform { upper: f64 },
    PointMass { at: f64 },
    Empirical { samples: Vec<f64> },
}

impl LawSpec {
    pub fn build(&self) -> Result<ArcLifetime> {
        Ok(match self {
            LawSpec::Exponential { rate } => Arc::new(Exponential::new(*rate)?),
            LawSpec::Weibull { shape, scale } => Arc::new(Weibull::new(*shape, *scale)?),
            LawSpec::Gamma { shape, rate } => Arc::new(Gamma::new(*shape, *rate)?),
            LawSpec::Uniform { upper } => Arc::new(UniformZeroTo::new(*upper)?),
            LawSpec::PointMass { at } => Arc::new(PointMass::at(*at)?),
            LawSpec::Empirical { samples } => Arc::new(Empirical::from_samples(samples.clone())?),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleSpec {
    Kijima1,
    Kijima2,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    Constant { degree: f64 },
    Sequence { degrees: Vec<f64> },
    Random { law: LawSpec },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub base: LawSpec,
    pub rule: RuleSpec,
    pub policy: PolicySpec,
}

impl ModelSpec {
    pub fn build(&self) -> Result<VirtualAgeModel> {
        let rule = match self.rule {
            RuleSpec::Kijima1 => VirtualAgeRule::KijimaI,
            RuleSpec::Kijima2 => VirtualAgeRule::KijimaII,
        };
        let policy = match &self.policy {
            PolicySpec::Constant { degree } => RepairPolicy::constant(*degree)?,
            PolicySpec::Sequence { degrees } => RepairPolicy::sequence(degrees.clone())?,
            PolicySpec::Random { law } => RepairPolicy::iid_random(law.build()?),
        };
        Ok(VirtualAgeModel::new(self.base.build()?, rule, policy))
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::uniform(self.lo, self.hi, self.points)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorSpec {
    Mc,
    Quad,
    Closed,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedFormSpec {
    pub lambda: f64,
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Everything a pipeline might need; every field optional so configs
/// stay minimal and flags can fill the rest. Unknown keys are rejected.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Option<ModelSpec>,
    pub random_time: Option<LawSpec>,
    pub estimator: Option<EstimatorSpec>,
    pub n_max: Option<usize>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
    pub depth: Option<usize>,
    pub coord_grid: Option<GridSpec>,
    pub t_grid: Option<GridSpec>,
    pub closed_form: Option<ClosedFormSpec>,
    pub counterexample: Option<String>,
    pub level_probability: Option<f64>,
    pub scale_law: Option<LawSpec>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "virtage",
    about = "Virtual-age repair models: simulation, survival-sequence estimation and \
             DFR-preservation checks",
    version
)]
pub struct Cli {
    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Base RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sample count (trajectories or covariance draws).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Largest event count n in the estimated sequence.
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Test level for Monte Carlo margin verdicts.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Numerical tolerance (quadrature, cross-checks).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Artifact path; without it only the summary is printed.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Artifact format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample repair trajectories from the configured model.
    Simulate,
    /// Estimate the survival sequence p_n = P(N(T) >= n).
    Estimate {
        /// Closed-form family instead of a model; only "poisson-exp".
        #[arg(long, value_name = "FAMILY")]
        closed_form: Option<String>,
        /// Event rate for the closed form.
        #[arg(long)]
        lambda: Option<f64>,
        /// Observation-time rate for the closed form.
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Estimate the sequence and test its log-convexity margins.
    VerifyDfr,
    /// Audit the sufficient conditions for the configured model.
    Hypotheses,
    /// Reproduce a built-in counterexample.
    Counterexample {
        /// "kijima2" or "association".
        #[arg(long)]
        name: Option<String>,
        /// Level probability for the association construction.
        #[arg(long)]
        p: Option<f64>,
    },
}

/// Config with flags folded in and defaults applied.
struct Settings {
    model: Option<ModelSpec>,
    random_time: Option<LawSpec>,
    estimator: EstimatorSpec,
    n_max: usize,
    n_samples: usize,
    seed: u64,
    alpha: f64,
    tol: f64,
    threads: usize,
    depth: usize,
    coord_grid: GridSpec,
    t_grid: GridSpec,
    closed_form: Option<ClosedFormSpec>,
    counterexample: Option<String>,
    level_probability: f64,
    scale_law: Option<LawSpec>,
    out: Option<PathBuf>,
    format: OutputFormat,
}

fn resolve(cli: &Cli, cfg: ExperimentConfig) -> Settings {
    let threads = cli
        .threads
        .or(cfg.threads)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    Settings {
        model: cfg.model,
        random_time: cfg.random_time,
        estimator: cfg.estimator.unwrap_or(EstimatorSpec::Mc),
        n_max: cli.nmax.or(cfg.n_max).unwrap_or(4),
        n_samples: cli.samples.or(cfg.n_samples).unwrap_or(100_000),
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
        alpha: cli.alpha.or(cfg.alpha).unwrap_or(DEFAULT_ALPHA),
        tol: cli.tol.or(cfg.tol).unwrap_or(QUAD_ABS_TOL),
        threads,
        depth: cfg.depth.unwrap_or(2),
        coord_grid: cfg.coord_grid.unwrap_or(GridSpec { lo: 0.0, hi: 2.0, points: 8 }),
        t_grid: cfg.t_grid.unwrap_or(GridSpec { lo: 0.0, hi: 5.0, points: 8 }),
        closed_form: cfg.closed_form,
        counterexample: cfg.counterexample,
        level_probability: cfg.level_probability.unwrap_or(0.5),
        scale_law: cfg.scale_law,
        out: cli.out.clone().or(cfg.out),
        format: cli.format.or(cfg.format).unwrap_or(OutputFormat::Csv),
    }
}

impl Settings {
    fn model(&self) -> Result<VirtualAgeModel> {
        self.model
            .as_ref()
            .ok_or_else(|| {
                Error::Config(
                    "this pipeline needs a model; add a \"model\" object to the config"
                        .to_string(),
                )
            })?
            .build()
    }

    fn horizon(&self) -> Result<RandomTime> {
        let law = self
            .random_time
            .as_ref()
            .ok_or_else(|| {
                Error::Config(
                    "this pipeline needs an observation time; add \"random_time\" to the config"
                        .to_string(),
                )
            })?
            .build()?;
        Ok(RandomTime::new(law))
    }

    fn write_artifact(&self, content: &str) -> Result<()> {
        if let Some(path) = &self.out {
            fs::write(path, content)
                .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
            println!("wrote {}", path.display());
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parse arguments and run; the process exit code is returned, never
/// raised, so the caller owns process exit.
pub fn run_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_ERROR,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Execute one parsed invocation inside a worker pool of the requested
/// size. Returns the exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    let settings = resolve(cli, cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build a {}-thread pool: {e}", settings.threads)))?;
    pool.install(|| match &cli.command {
        Command::Simulate => run_simulate(&settings),
        Command::Estimate { closed_form, lambda, mu } => {
            let est = build_estimate(&settings, closed_form.as_deref(), *lambda, *mu)?;
            print_estimate(&est);
            let artifact = match settings.format {
                OutputFormat::Csv => {
                    let mut s = String::new();
                    est.append_csv(&mut s);
                    s
                }
                OutputFormat::Json => serde_json::to_string_pretty(&est)?,
            };
            settings.write_artifact(&artifact)?;
            Ok(EXIT_OK)
        }
        Command::VerifyDfr => run_verify_dfr(&settings),
        Command::Hypotheses => run_hypotheses(&settings),
        Command::Counterexample { name, p } => run_counterexample(&settings, name.as_deref(), *p),
    })
}

fn run_simulate(s: &Settings) -> Result<i32> {
    let model = s.model()?;
    let mut trajectories: Vec<Trajectory> = Vec::with_capacity(s.n_samples);
    for i in 0..s.n_samples {
        let mut rng = stream_rng(s.seed, i as u64);
        trajectories.push(model.sample_trajectory(s.n_max, &mut rng)?);
    }
    let absorbed = trajectories.iter().filter(|t| t.absorbed).count();
    let mean_span = trajectories.iter().map(|t| t.s[t.len()]).sum::<f64>() / s.n_samples as f64;
    println!(
        "simulated {} trajectories of {} repairs (seed {}): mean S_n = {:.6}, {} absorbed",
        s.n_samples, s.n_max, s.seed, mean_span, absorbed
    );
    let artifact = match s.format {
        OutputFormat::Csv => {
            let mut out = String::from("trajectory,n,x,a,v,s\n");
            for (i, t) in trajectories.iter().enumerate() {
                t.append_csv_rows(i, &mut out);
            }
            out
        }
        OutputFormat::Json => serde_json::to_string_pretty(&trajectories)?,
    };
    s.write_artifact(&artifact)?;
    Ok(EXIT_OK)
}

fn build_estimate(
    s: &Settings,
    closed_form_flag: Option<&str>,
    lambda: Option<f64>,
    mu: Option<f64>,
) -> Result<SurvivalSequenceEstimate> {
    if let Some(family) = closed_form_flag {
        if family != "poisson-exp" {
            return Err(Error::Config(format!(
                "unknown closed form \"{family}\"; the catalogue has \"poisson-exp\""
            )));
        }
        let lambda = lambda.or(s.closed_form.map(|c| c.lambda)).ok_or_else(|| {
            Error::Config("closed form needs --lambda (or closed_form.lambda in the config)".to_string())
        })?;
        let mu = mu.or(s.closed_form.map(|c| c.mu)).ok_or_else(|| {
            Error::Config("closed form needs --mu (or closed_form.mu in the config)".to_string())
        })?;
        return closed_form_poisson_exp(lambda, mu, s.n_max);
    }
    match s.estimator {
        EstimatorSpec::Closed => {
            let cf = s.closed_form.ok_or_else(|| {
                Error::Config(
                    "estimator \"closed\" needs a closed_form {lambda, mu} config entry"
                        .to_string(),
                )
            })?;
            closed_form_poisson_exp(cf.lambda, cf.mu, s.n_max)
        }
        EstimatorSpec::Quad => {
            estimate_sequence_quadrature(&s.model()?, &s.horizon()?, s.n_max, s.tol)
        }
        EstimatorSpec::Mc => {
            estimate_sequence_mc(&s.model()?, &s.horizon()?, s.n_max, s.n_samples, s.seed)
        }
    }
}

fn print_estimate(est: &SurvivalSequenceEstimate) {
    println!("{:>3} {:>22} {:>12}  kind", "n", "p_hat", "se");
    for n in 0..est.p.len() {
        println!("{n:>3} {:>22.16} {:>12.3e}  {}", est.p[n], est.se[n], est.kind);
    }
    if let Some(seed) = est.meta.seed {
        println!(
            "seed {seed}, {} samples",
            est.meta.n_samples.map_or_else(|| "?".to_string(), |n| n.to_string())
        );
    }
}

fn print_margins(report: &LogConvexityReport) {
    println!("{:>3} {:>22} {:>12}  verdict", "n", "margin", "se");
    for e in &report.entries {
        println!("{:>3} {:>22.16} {:>12.3e}  {}", e.n, e.margin, e.margin_se, e.verdict);
    }
    match report.alpha {
        Some(a) => println!("overall: {} (alpha = {a})", report.overall),
        None => println!("overall: {} (exact)", report.overall),
    }
}

fn run_verify_dfr(s: &Settings) -> Result<i32> {
    let est = build_estimate(s, None, None, None)?;
    let report = check_discrete_dfr(&est, s.alpha)?;
    print_estimate(&est);
    print_margins(&report);
    let artifact = match s.format {
        OutputFormat::Csv => {
            let mut out = String::new();
            report.append_csv(&mut out);
            out
        }
        OutputFormat::Json => serde_json::to_string_pretty(&report)?,
    };
    s.write_artifact(&artifact)?;
    Ok(if report.any_violated() { EXIT_VIOLATION } else { EXIT_OK })
}

#[derive(Serialize)]
struct NamedReport {
    checker: &'static str,
    report: HypothesisReport,
}

fn run_hypotheses(s: &Settings) -> Result<i32> {
    let model = s.model()?;
    let coord = s.coord_grid.build()?;
    let t_grid = s.t_grid.build()?;
    let mut reports: Vec<NamedReport> = Vec::new();
    if matches!(model.rule(), VirtualAgeRule::KijimaI) && s.random_time.is_some() {
        let report = check_kijima1_conditions(&model, &s.horizon()?, &t_grid)?;
        reports.push(NamedReport { checker: "kijima1-conditions", report });
    }
    if model.policy().is_deterministic() {
        let report = check_chain_decrease(&model, s.depth, &coord, &t_grid)?;
        reports.push(NamedReport { checker: "chain-decrease", report });
    }
    if reports.is_empty() {
        return Err(Error::Config(
            "no checker applies: random-degree policies need the additive rule plus a \
             random_time entry; other rules need a deterministic policy"
                .to_string(),
        ));
    }
    for r in &reports {
        println!("{}: {}", r.checker, r.report.overall);
        for c in &r.report.conditions {
            println!("  [{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.label, c.detail);
        }
        for note in &r.report.notes {
            println!("  note: {note}");
        }
    }
    let artifact = match s.format {
        OutputFormat::Csv => {
            let mut out = String::from("checker,label,passed,detail\n");
            for r in &reports {
                for c in &r.report.conditions {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        r.checker,
                        csv_field(&c.label),
                        c.passed,
                        csv_field(&c.detail)
                    ));
                }
            }
            out
        }
        OutputFormat::Json => serde_json::to_string_pretty(&reports)?,
    };
    s.write_artifact(&artifact)?;
    Ok(EXIT_OK)
}

fn counterexample_csv(report: &CounterexampleReport) -> String {
    let mut out = String::from("section,label,value,extra\n");
    for c in &report.constants {
        out.push_str(&format!(
            "constant,{},{},{}\n",
            csv_field(&c.name),
            c.value,
            c.derivation
        ));
    }
    for m in &report.margins {
        out.push_str(&format!("margin,{},{},\n", csv_field(&m.label), m.value));
    }
    for c in &report.mc {
        out.push_str(&format!("mc,{},{},se={}\n", csv_field(&c.label), c.estimate, c.se));
    }
    out.push_str(&format!("verdict,{},,\n", report.verdict));
    out
}

fn run_counterexample(s: &Settings, name: Option<&str>, p: Option<f64>) -> Result<i32> {
    let name = name
        .map(str::to_string)
        .or_else(|| s.counterexample.clone())
        .ok_or_else(|| {
            Error::Config(
                "pick a counterexample with --name kijima2 or --name association".to_string(),
            )
        })?;
    let report = match name.as_str() {
        "kijima2" => {
            let report = kijima2_counterexample(s.tol)?;
            print!("{}", report.to_text_table());
            // Margin verdicts on the exact sequence, in the same layout
            // the estimators use.
            let exact = SurvivalSequenceEstimate {
                p: vec![
                    1.0,
                    report.constant("p1 = 1 - e^-1").expect("constant is always present").value,
                    report.constant("p2 (series)").expect("constant is always present").value,
                    report.constant("p3 = p1 * p2").expect("constant is always present").value,
                ],
                se: vec![0.0; 4],
                cov: None,
                kind: EstimateKind::ClosedForm,
                meta: EstimateMeta::default(),
            };
            print_margins(&check_discrete_dfr(&exact, s.alpha)?);
            report
        }
        "association" => {
            let p = p.unwrap_or(s.level_probability);
            let w = match &s.scale_law {
                Some(spec) => spec.build()?,
                None => Arc::new(Exponential::new(1.0)?),
            };
            let report = association_counterexample(p, w, s.n_samples, s.seed)?;
            print!("{}", report.to_text_table());
            report
        }
        other => {
            return Err(Error::Config(format!(
                "unknown counterexample \"{other}\"; available: kijima2, association"
            )))
        }
    };
    let artifact = match s.format {
        OutputFormat::Csv => counterexample_csv(&report),
        OutputFormat::Json => report.to_json_pretty()?,
    };
    s.write_artifact(&artifact)?;
    Ok(if report.verdict == crate::counterexamples::ClaimVerdict::Confirmed {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    })
}
