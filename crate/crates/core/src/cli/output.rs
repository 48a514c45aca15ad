//! JSON envelopes and CSV rows with numbers rounded to 12 significant digits.

use serde::Serialize;
use serde_json::{json, Map, Number, Value};

use crate::firm::{FirmChoice, GmtPolicy, TaxPair};
use crate::labor::LaborFirmChoice;
use crate::revenue::RevenueBreakdown;

use super::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to `SIGNIFICANT_DIGITS` significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| Number::from_f64(round_sig(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

/// Serializes `payload` under a versioned envelope with rounded numbers.
pub fn envelope<T: Serialize>(command: &str, scenario_id: &str, inputs: Value, payload: &T) -> Result<Value, CliError> {
    let result = serde_json::to_value(payload).map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m.insert("scenario_id".into(), json!(scenario_id));
    m.insert("inputs".into(), inputs);
    m.insert("result".into(), result);
    Ok(round_value(Value::Object(m)))
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

/// Parameter columns of a capital-model row.
pub const CAPITAL_PARAMETERS: [&str; 5] = ["alpha1", "alpha2", "r", "mu", "delta"];
/// Parameter columns of a labor-model row.
pub const LABOR_PARAMETERS: [&str; 7] = ["lambda", "beta", "lbar1", "lbar2", "r", "mu", "delta"];
/// Columns after the parameters.
pub const RESULT_COLUMNS: [&str; 20] = [
    "t_m",
    "sigma",
    "regime",
    "t1",
    "t2",
    "k1",
    "k2",
    "g",
    "pi1",
    "pi2",
    "R1_total",
    "R1_true_profit",
    "R1_shifted",
    "R1_sbie_loss",
    "R1_topup",
    "R2_total",
    "R2_true_profit",
    "R2_shifted",
    "R2_sbie_loss",
    "R2_topup",
];
/// Extra columns appended for labor economies.
pub const LABOR_COLUMNS: [&str; 2] = ["w1", "w2"];

pub fn csv_columns(labor: bool) -> Vec<&'static str> {
    let mut cols = vec!["scenario_id"];
    if labor {
        cols.extend(LABOR_PARAMETERS);
    } else {
        cols.extend(CAPITAL_PARAMETERS);
    }
    cols.extend(RESULT_COLUMNS);
    if labor {
        cols.extend(LABOR_COLUMNS);
    }
    cols
}

pub fn csv_header(labor: bool) -> String {
    csv_columns(labor).join(",")
}

fn num(x: f64) -> String {
    if x.is_finite() {
        round_sig(x).to_string()
    } else {
        String::new()
    }
}

fn escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Solved quantities of one cell.
#[derive(Clone, Copy, Debug)]
pub struct CellSolution {
    pub taxes: TaxPair,
    pub k: [f64; 2],
    pub g: f64,
    pub pi: [f64; 2],
    pub revenues: [RevenueBreakdown; 2],
    pub wages: Option<[f64; 2]>,
}

impl CellSolution {
    pub fn capital(taxes: TaxPair, c: &FirmChoice, revenues: [RevenueBreakdown; 2]) -> Self {
        CellSolution {
            taxes,
            k: [c.k1, c.k2],
            g: c.g,
            pi: [c.pi1, c.pi2],
            revenues,
            wages: None,
        }
    }

    pub fn labor(taxes: TaxPair, c: &LaborFirmChoice, revenues: [RevenueBreakdown; 2]) -> Self {
        CellSolution {
            taxes,
            k: [c.k1, c.k2],
            g: c.g,
            pi: [c.pi1, c.pi2],
            revenues,
            wages: Some([c.w1, c.w2]),
        }
    }
}

/// One CSV line. `params` follows `CAPITAL_PARAMETERS` or
/// `LABOR_PARAMETERS`; an error name goes in the regime column.
pub fn csv_row(
    scenario_id: &str,
    params: &[f64],
    policy: Option<&GmtPolicy>,
    outcome: std::result::Result<(&str, &CellSolution), &str>,
    labor: bool,
) -> String {
    let mut cells: Vec<String> = vec![escape(scenario_id)];
    cells.extend(params.iter().map(|&x| num(x)));
    cells.push(policy.map_or(String::new(), |p| num(p.t_m)));
    cells.push(policy.map_or(String::new(), |p| num(p.sigma)));
    let width = csv_columns(labor).len() - cells.len() - 1;
    match outcome {
        Ok((regime, s)) => {
            cells.push(escape(regime));
            cells.extend([s.taxes.t1, s.taxes.t2, s.k[0], s.k[1], s.g, s.pi[0], s.pi[1]].map(num));
            for r in &s.revenues {
                cells.extend(
                    [
                        r.total,
                        r.true_profit_part,
                        r.shifted_part,
                        r.sbie_loss,
                        r.topup_collected,
                    ]
                    .map(num),
                );
            }
            if labor {
                let w = s.wages.unwrap_or([f64::NAN; 2]);
                cells.extend(w.map(num));
            }
        }
        Err(err) => {
            cells.push(escape(&format!("error:{err}")));
            cells.extend(std::iter::repeat(String::new()).take(width));
        }
    }
    cells.join(",")
}
