//! Command-line front end.
//!
//! Every command reads one JSON scenario file and emits one artifact. Exit
//! status: 0 success, 1 configuration or validation error, 2 numeric
//! failure, 3 verification failure.

pub mod config;
pub mod output;
mod sweep;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::effects::{harmful_reform_search, long_run_effect_report, short_run_effect_report, HARMFUL_SEARCH_DRAWS};
use crate::equilibrium::{nash_gmt_with_pre, nash_no_gmt, short_run_outcome, Regime};
use crate::error::{Error as ModelError, ErrorClass};
use crate::firm::GmtPolicy;
use crate::labor::{labor_short_run, nash_labor_gmt_with_pre, nash_labor_no_gmt, phi_labor, verify_labor_nash};
use crate::oracle::{verify_equilibrium, verify_nash, DeviationReport, GridSpec};
use crate::thresholds::threshold_set;

pub use config::{Format, ModelEconomy, ScenarioConfig, SweepAxis, SweepParameter};
pub use output::{csv_header, round_sig, SCHEMA_VERSION};

/// Deviation grid used for labor checks.
pub const LABOR_TAX_STEPS: usize = 1001;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("ConfigParse: {0}")]
    ConfigParse(String),
    #[error("Io: {0}")]
    Io(String),
    #[error("Validation: {field}: {invariant} ({detail})")]
    Validation {
        field: String,
        invariant: String,
        detail: String,
    },
    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: ModelError,
    },
    #[error("VerificationFailed: {0}")]
    VerificationFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigParse(_) | CliError::Io(_) | CliError::Validation { .. } => 1,
            CliError::Model { source, .. } => match source.class() {
                ErrorClass::Validation => 1,
                ErrorClass::Numeric => 2,
            },
            CliError::VerificationFailed(_) => 3,
        }
    }
}

fn ctx<T>(context: &str, r: crate::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Model {
        context: context.to_string(),
        source,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    SolvePre,
    SolveGmt,
    ShortRun,
    Thresholds,
    Effects,
    Sweep,
    Verify,
    Labor,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SolvePre => "solve-pre",
            Command::SolveGmt => "solve-gmt",
            Command::ShortRun => "short-run",
            Command::Thresholds => "thresholds",
            Command::Effects => "effects",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
            Command::Labor => "labor",
        }
    }
}

/// Tax competition under a global minimum tax.
#[derive(Debug, Parser)]
#[command(name = "gmtcomp", version)]
pub struct Cli {
    /// What to compute.
    #[arg(value_enum)]
    pub command: Command,
    /// Scenario file (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; csv is available for sweep and solve-gmt.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Check the solution against the deviation oracle.
    #[arg(long)]
    pub verify: bool,
    /// Worker threads for sweeps and oracle checks.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Seed for randomized searches.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Suppress warnings on standard error.
    #[arg(long, short)]
    pub quiet: bool,
}

/// Resolved run settings.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub format: Format,
    pub verify: bool,
    pub seed: Option<u64>,
}

/// What a command produced.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub text: String,
    pub warnings: Vec<String>,
    /// Set when an oracle check failed; the artifact is still written.
    pub failed_check: Option<String>,
}

fn inputs(cfg: &ScenarioConfig) -> Value {
    let economy = match cfg.economy {
        ModelEconomy::Capital(e) => json!(e.record()),
        ModelEconomy::Labor(e) => json!(e.record()),
    };
    json!({ "economy": economy, "policy": cfg.policy })
}

#[derive(Serialize)]
struct Checked<'a, T: Serialize> {
    #[serde(flatten)]
    body: &'a T,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<&'a [DeviationReport]>,
}

fn first_failure(reports: &[DeviationReport]) -> Option<String> {
    reports.iter().find(|r| !r.passed).map(|r| {
        format!(
            "deviation gain {:.3e} / {:.3e} at ({}, {})",
            r.max_gain_country1, r.max_gain_country2, r.candidate.t1, r.candidate.t2
        )
    })
}

fn json_artifact<T: Serialize>(
    command: Command,
    cfg: &ScenarioConfig,
    body: &T,
    reports: Option<Vec<DeviationReport>>,
    warnings: Vec<String>,
) -> Result<Artifact, CliError> {
    let failed_check = reports.as_deref().and_then(first_failure);
    let payload = Checked {
        body,
        verification: reports.as_deref(),
    };
    let v = output::envelope(command.name(), &cfg.scenario_id, inputs(cfg), &payload)?;
    Ok(Artifact {
        text: output::to_pretty(&v),
        warnings,
        failed_check,
    })
}

fn require_json(command: Command, format: Format) -> Result<(), CliError> {
    if format == Format::Csv {
        return Err(CliError::Validation {
            field: "format".into(),
            invariant: "UnsupportedFormat".into(),
            detail: format!("'{}' emits json only", command.name()),
        });
    }
    Ok(())
}

/// Runs one command on a parsed scenario.
pub fn execute(command: Command, cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Artifact, CliError> {
    let name = command.name();
    if !matches!(command, Command::Sweep | Command::SolveGmt) {
        require_json(command, opts.format)?;
    }
    let grid = GridSpec::default();
    match command {
        Command::SolvePre => {
            let econ = cfg.capital_economy(name)?;
            let pre = ctx("solve-pre", nash_no_gmt(&econ))?;
            let reports = if opts.verify {
                Some(vec![ctx("verify", verify_nash(&econ, None, &pre.taxes, &grid))?])
            } else {
                None
            };
            json_artifact(command, cfg, &pre, reports, Vec::new())
        }
        Command::SolveGmt => {
            let econ = cfg.capital_economy(name)?;
            let policy = cfg.required_policy(name)?;
            let pre = ctx("solve-gmt", nash_no_gmt(&econ))?;
            let eq = ctx("solve-gmt", nash_gmt_with_pre(&econ, &policy, &pre))?;
            let mut warnings = Vec::new();
            if eq.regime == Regime::HavenContinuum {
                warnings.push(format!(
                    "sigma = {} is at or below the haven floor {}; solved the continuum case",
                    policy.sigma, eq.bounds.lower
                ));
            }
            let reports = if opts.verify {
                Some(ctx("verify", verify_equilibrium(&econ, &eq, &grid))?)
            } else {
                None
            };
            if opts.format == Format::Csv {
                let sol = output::CellSolution::capital(eq.taxes, &eq.choice, eq.revenues);
                let rec = econ.record();
                let params = [rec.alpha1, rec.alpha2, rec.r, rec.mu, rec.delta];
                let text = format!(
                    "{}\n{}\n",
                    csv_header(false),
                    output::csv_row(
                        &cfg.scenario_id,
                        &params,
                        Some(&policy),
                        Ok((eq.regime.label(), &sol)),
                        false
                    )
                );
                return Ok(Artifact {
                    text,
                    warnings,
                    failed_check: reports.as_deref().and_then(first_failure),
                });
            }
            json_artifact(command, cfg, &eq, reports, warnings)
        }
        Command::ShortRun => {
            let econ = cfg.capital_economy(name)?;
            let policy = cfg.required_policy(name)?;
            let pre = ctx("short-run", nash_no_gmt(&econ))?;
            let report = ctx("short-run", short_run_outcome(&econ, &policy, &pre))?;
            let warnings = report.warnings.clone();
            json_artifact(command, cfg, &report, None, warnings)
        }
        Command::Thresholds => {
            let econ = cfg.capital_economy(name)?;
            let set = ctx("thresholds", threshold_set(&econ, cfg.policy.map(|p| p.t_m)))?;
            json_artifact(command, cfg, &set, None, Vec::new())
        }
        Command::Effects => {
            let econ = cfg.capital_economy(name)?;
            let policy = cfg.required_policy(name)?;
            let short_run = ctx("effects (short run)", short_run_effect_report(&econ, &policy))?;
            let long_run = ctx("effects (long run)", long_run_effect_report(&econ, &policy))?;
            let harmful = opts.seed.map(|s| harmful_reform_search(s, HARMFUL_SEARCH_DRAWS));
            let mut warnings = short_run.warnings.clone();
            warnings.extend(long_run.warnings.iter().cloned());
            let body = json!({
                "short_run": short_run,
                "long_run": long_run,
                "harmful_reform_search": harmful.map(|h| json!({ "seed": opts.seed, "found": h })),
            });
            json_artifact(command, cfg, &body, None, warnings)
        }
        Command::Verify => verify_command(cfg, &grid),
        Command::Labor => labor_command(cfg, opts),
        Command::Sweep => sweep::run(cfg, opts),
    }
}

fn verify_command(cfg: &ScenarioConfig, grid: &GridSpec) -> Result<Artifact, CliError> {
    let command = Command::Verify;
    let reports = match cfg.economy {
        ModelEconomy::Capital(econ) => match (cfg.policy, cfg.candidate) {
            (policy, Some(c)) => vec![ctx("verify", verify_nash(&econ, policy.as_ref(), &c, grid))?],
            (None, None) => {
                let pre = ctx("verify", nash_no_gmt(&econ))?;
                vec![ctx("verify", verify_nash(&econ, None, &pre.taxes, grid))?]
            }
            (Some(p), None) => {
                let pre = ctx("verify", nash_no_gmt(&econ))?;
                let eq = ctx("verify", nash_gmt_with_pre(&econ, &p, &pre))?;
                ctx("verify", verify_equilibrium(&econ, &eq, grid))?
            }
        },
        ModelEconomy::Labor(econ) => {
            let candidate = match (cfg.policy, cfg.candidate) {
                (_, Some(c)) => c,
                (None, None) => ctx("verify", nash_labor_no_gmt(&econ))?.taxes,
                (Some(p), None) => {
                    let pre = ctx("verify", nash_labor_no_gmt(&econ))?;
                    ctx("verify", nash_labor_gmt_with_pre(&econ, &p, &pre))?.taxes
                }
            };
            vec![ctx(
                "verify",
                verify_labor_nash(&econ, cfg.policy.as_ref(), &candidate, LABOR_TAX_STEPS),
            )?]
        }
    };
    let body = json!({ "passed": reports.iter().all(|r| r.passed), "reports": reports });
    let failed_check = first_failure(&reports);
    let v = output::envelope(command.name(), &cfg.scenario_id, inputs(cfg), &body)?;
    Ok(Artifact {
        text: output::to_pretty(&v),
        warnings: Vec::new(),
        failed_check,
    })
}

fn labor_command(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Artifact, CliError> {
    let command = Command::Labor;
    let econ = cfg.labor_economy(command.name())?;
    let pre = ctx("labor", nash_labor_no_gmt(&econ))?;
    let phi = ctx("labor", phi_labor(&econ, pre.t2()))?;
    let mut warnings = Vec::new();
    let mut reports = opts.verify.then(Vec::new);
    if let Some(r) = reports.as_mut() {
        r.push(ctx(
            "verify",
            verify_labor_nash(&econ, None, &pre.taxes, LABOR_TAX_STEPS),
        )?);
    }
    let (short_run, gmt) = match cfg.policy {
        Some(p) => {
            let sr = ctx("labor (short run)", labor_short_run(&econ, &p, &pre))?;
            let eq = ctx("labor (long run)", nash_labor_gmt_with_pre(&econ, &p, &pre))?;
            warnings.extend(eq.warnings.iter().cloned());
            if let Some(r) = reports.as_mut() {
                r.push(ctx(
                    "verify",
                    verify_labor_nash(&econ, Some(&p), &eq.taxes, LABOR_TAX_STEPS),
                )?);
            }
            (Some(sr), Some(eq))
        }
        None => (None, None),
    };
    let body = json!({
        "pre": pre,
        "phi_at_small_rate": phi,
        "short_run_sign_of_small_country_change": if phi > 0.0 { "gain" } else if phi < 0.0 { "loss" } else { "zero" },
        "short_run": short_run,
        "gmt": gmt,
    });
    json_artifact(command, cfg, &body, reports, warnings)
}

/// Applies flags on top of the scenario file.
pub fn resolve_options(cli: &Cli, cfg: &ScenarioConfig) -> RunOptions {
    let default_format = if cli.command == Command::Sweep {
        Format::Csv
    } else {
        Format::Json
    };
    RunOptions {
        format: cli.format.or(cfg.format).unwrap_or(default_format),
        verify: cli.verify || cfg.verify,
        seed: cli.seed.or(cfg.seed),
    }
}

fn write_artifact(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

/// Parses the scenario, runs the command and writes the artifact.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(&cli.config)?;
    let opts = resolve_options(cli, &cfg);
    let job = || execute(cli.command, &cfg, &opts);
    let artifact = match cli.workers {
        Some(0) => {
            return Err(CliError::Validation {
                field: "workers".into(),
                invariant: "NoWorkers".into(),
                detail: "at least one worker is required".into(),
            })
        }
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?
            .install(job)?,
        None => job()?,
    };
    if !cli.quiet {
        for w in &artifact.warnings {
            eprintln!("warning: {w}");
        }
    }
    write_artifact(cli.out.as_ref().or(cfg.output_path.as_ref()), &artifact.text)?;
    match artifact.failed_check {
        Some(msg) => Err(CliError::VerificationFailed(msg)),
        None => Ok(()),
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub(crate) fn policy_or_missing(policy: Option<GmtPolicy>, field: &str) -> Result<GmtPolicy, CliError> {
    policy.ok_or_else(|| CliError::Validation {
        field: format!("policy.{field}"),
        invariant: "MissingField".into(),
        detail: format!("no sweep axis or policy value for {field}"),
    })
}
