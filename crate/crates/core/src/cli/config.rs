//! Scenario configuration files.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::firm::{GmtPolicy, TaxPair};
use crate::labor::{LaborEconomy, LaborEconomyRecord};
use crate::model::{Economy, EconomyRecord};

use super::CliError;

/// Output encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

/// Parameter a sweep axis varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "t_m")]
    MinimumRate,
    #[serde(rename = "sigma")]
    CarveOut,
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "alpha2")]
    Alpha2,
}

impl SweepParameter {
    const NAMES: [&'static str; 4] = ["t_m", "sigma", "delta", "alpha2"];

    fn parse(name: &str) -> Option<Self> {
        match name {
            "t_m" => Some(SweepParameter::MinimumRate),
            "sigma" => Some(SweepParameter::CarveOut),
            "delta" => Some(SweepParameter::Delta),
            "alpha2" => Some(SweepParameter::Alpha2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::MinimumRate => "t_m",
            SweepParameter::CarveOut => "sigma",
            SweepParameter::Delta => "delta",
            SweepParameter::Alpha2 => "alpha2",
        }
    }
}

/// One axis as written in a file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisRecord {
    parameter: String,
    #[serde(default)]
    lo: Option<f64>,
    #[serde(default)]
    hi: Option<f64>,
    steps: usize,
}

/// A validated sweep axis.
///
/// When `lo` and `hi` are omitted for `t_m` or `sigma`, the axis covers the
/// admissible band of the cell: `steps` interior points of `(t2N, t1N)` for
/// the minimum rate and `steps` points of `(max(lower, 0), upper]` for the
/// carve-out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub range: Option<[f64; 2]>,
    pub steps: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepRecord {
    axes: Vec<AxisRecord>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputRecord {
    #[serde(default)]
    path: Option<PathBuf>,
    #[serde(default)]
    format: Option<Format>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigRecord {
    #[serde(default)]
    scenario_id: Option<String>,
    economy: Value,
    #[serde(default)]
    policy: Option<GmtPolicy>,
    #[serde(default)]
    sweep: Option<SweepRecord>,
    #[serde(default)]
    output: Option<OutputRecord>,
    #[serde(default)]
    verify: bool,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    candidate: Option<TaxPair>,
}

/// Either model variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelEconomy {
    Capital(Economy),
    Labor(LaborEconomy),
}

/// A parsed and validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario_id: String,
    pub economy: ModelEconomy,
    pub policy: Option<GmtPolicy>,
    pub sweep: Vec<SweepAxis>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub verify: bool,
    pub seed: Option<u64>,
    /// Tax pair to check instead of a freshly solved one.
    pub candidate: Option<TaxPair>,
}

fn invalid(field: impl Into<String>, invariant: &str, detail: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.into(),
        invariant: invariant.to_string(),
        detail: detail.into(),
    }
}

fn parse_economy(value: Value) -> Result<ModelEconomy, CliError> {
    let is_labor = value.as_object().is_some_and(|m| m.contains_key("lambda"));
    let to_error = |e: crate::error::ValidationError| {
        let names: Vec<&str> = e.violations.iter().map(|v| v.name()).collect();
        let details: Vec<String> = e
            .violations
            .iter()
            .map(|v| {
                let full = v.to_string();
                let rest = full.strip_prefix(v.name()).unwrap_or(&full).trim();
                rest.trim_start_matches('(').trim_end_matches(')').to_string()
            })
            .collect();
        invalid("economy", &names.join(", "), details.join("; "))
    };
    if is_labor {
        let rec: LaborEconomyRecord =
            serde_json::from_value(value).map_err(|e| CliError::ConfigParse(format!("economy: {e}")))?;
        rec.validate().map(ModelEconomy::Labor).map_err(to_error)
    } else {
        let rec: EconomyRecord =
            serde_json::from_value(value).map_err(|e| CliError::ConfigParse(format!("economy: {e}")))?;
        rec.validate().map(ModelEconomy::Capital).map_err(to_error)
    }
}

fn parse_axis(index: usize, rec: AxisRecord) -> Result<SweepAxis, CliError> {
    let field = format!("sweep.axes[{index}]");
    let parameter = SweepParameter::parse(&rec.parameter).ok_or_else(|| {
        invalid(
            format!("{field}.parameter"),
            "UnknownParameter",
            format!("'{}' is not one of {}", rec.parameter, SweepParameter::NAMES.join(", ")),
        )
    })?;
    if rec.steps < 2 {
        return Err(invalid(
            format!("{field}.steps"),
            "TooFewSteps",
            format!("steps = {} must be at least 2", rec.steps),
        ));
    }
    let range = match (rec.lo, rec.hi) {
        (Some(lo), Some(hi)) => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(invalid(
                    field,
                    "EmptyRange",
                    format!("lo = {lo} must be finite and below hi = {hi}"),
                ));
            }
            Some([lo, hi])
        }
        (None, None) => {
            if matches!(parameter, SweepParameter::Delta | SweepParameter::Alpha2) {
                return Err(invalid(
                    field,
                    "MissingRange",
                    format!("axis '{}' needs lo and hi", parameter.name()),
                ));
            }
            None
        }
        _ => {
            return Err(invalid(field, "MissingRange", "give both lo and hi or neither"));
        }
    };
    Ok(SweepAxis {
        parameter,
        range,
        steps: rec.steps,
    })
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let rec: ConfigRecord = serde_json::from_str(text).map_err(|e| CliError::ConfigParse(e.to_string()))?;
        let economy = parse_economy(rec.economy)?;
        if let Some(p) = &rec.policy {
            p.validate()
                .map_err(|e| invalid("policy", "InvalidPolicy", e.to_string()))?;
        }
        if let Some(c) = &rec.candidate {
            c.validate()
                .map_err(|e| invalid("candidate", "TaxOutOfRange", e.to_string()))?;
        }
        let mut sweep = Vec::new();
        if let Some(s) = rec.sweep {
            if s.axes.is_empty() {
                return Err(invalid("sweep.axes", "EmptySweep", "at least one axis is required"));
            }
            for (i, a) in s.axes.into_iter().enumerate() {
                let axis = parse_axis(i, a)?;
                if sweep.iter().any(|b: &SweepAxis| b.parameter == axis.parameter) {
                    return Err(invalid(
                        format!("sweep.axes[{i}].parameter"),
                        "DuplicateParameter",
                        format!("'{}' appears twice", axis.parameter.name()),
                    ));
                }
                sweep.push(axis);
            }
        }
        let output = rec.output.unwrap_or_default();
        Ok(ScenarioConfig {
            scenario_id: rec.scenario_id.unwrap_or_else(|| "scenario".to_string()),
            economy,
            policy: rec.policy,
            sweep,
            output_path: output.path,
            format: output.format,
            verify: rec.verify,
            seed: rec.seed,
            candidate: rec.candidate,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn capital_economy(&self, command: &str) -> Result<Economy, CliError> {
        match self.economy {
            ModelEconomy::Capital(e) => Ok(e),
            ModelEconomy::Labor(_) => Err(invalid(
                "economy",
                "WrongModel",
                format!("'{command}' needs an economy with alpha1, alpha2, r, mu, delta"),
            )),
        }
    }

    pub fn labor_economy(&self, command: &str) -> Result<LaborEconomy, CliError> {
        match self.economy {
            ModelEconomy::Labor(e) => Ok(e),
            ModelEconomy::Capital(_) => Err(invalid(
                "economy",
                "WrongModel",
                format!("'{command}' needs a labor economy with lambda, beta, lbar1, lbar2, r, mu, delta"),
            )),
        }
    }

    pub fn required_policy(&self, command: &str) -> Result<GmtPolicy, CliError> {
        self.policy.ok_or_else(|| {
            invalid(
                "policy",
                "MissingField",
                format!("'{command}' needs a policy with t_m and sigma"),
            )
        })
    }
}
