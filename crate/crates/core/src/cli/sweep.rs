//! Cartesian parameter sweeps.
//!
//! Cells are enumerated with the first axis outermost, solved on the current
//! rayon pool and written in enumeration order.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::equilibrium::{nash_gmt_with_pre, nash_no_gmt};
use crate::firm::GmtPolicy;
use crate::labor::{nash_labor_gmt_with_pre, nash_labor_no_gmt, verify_labor_nash, LaborEconomy};
use crate::model::Economy;
use crate::oracle::{verify_equilibrium, GridSpec};
use crate::thresholds::sigma_bounds;

use super::config::{Format, ModelEconomy, ScenarioConfig, SweepAxis, SweepParameter};
use super::output::{self, CellSolution};
use super::{policy_or_missing, Artifact, CliError, RunOptions, LABOR_TAX_STEPS};

struct Cell {
    params: Vec<f64>,
    policy: Option<GmtPolicy>,
    result: Result<(&'static str, CellSolution), String>,
    verified: Option<bool>,
}

fn axis_value(axis: &SweepAxis, j: usize, band: Option<(f64, f64)>) -> f64 {
    match (axis.range, axis.parameter, band) {
        (Some([_, hi]), _, _) if j + 1 == axis.steps => hi,
        (Some([lo, hi]), _, _) => lo + (hi - lo) * j as f64 / (axis.steps - 1) as f64,
        (None, SweepParameter::MinimumRate, Some((lo, hi))) => {
            lo + (hi - lo) * (j + 1) as f64 / (axis.steps + 1) as f64
        }
        (None, _, Some((_, hi))) if j + 1 == axis.steps => hi,
        (None, _, Some((lo, hi))) => lo + (hi - lo) * (j + 1) as f64 / axis.steps as f64,
        (None, _, None) => f64::NAN,
    }
}

fn cell_indices(axes: &[SweepAxis]) -> Vec<Vec<usize>> {
    let mut cells = vec![Vec::new()];
    for axis in axes {
        cells = cells
            .into_iter()
            .flat_map(|prefix| {
                (0..axis.steps).map(move |j| {
                    let mut c = prefix.clone();
                    c.push(j);
                    c
                })
            })
            .collect();
    }
    cells
}

fn find(axes: &[SweepAxis], idx: &[usize], p: SweepParameter) -> Option<(SweepAxis, usize)> {
    axes.iter()
        .zip(idx)
        .find(|(a, _)| a.parameter == p)
        .map(|(a, &j)| (*a, j))
}

fn capital_cell(base: &Economy, cfg: &ScenarioConfig, idx: &[usize], verify: bool) -> Cell {
    let axes = &cfg.sweep;
    let mut econ = *base;
    let mut policy = None;
    let result = (|| -> crate::Result<_> {
        if let Some((a, j)) = find(axes, idx, SweepParameter::Delta) {
            econ = econ.with_delta(axis_value(&a, j, None))?;
        }
        if let Some((a, j)) = find(axes, idx, SweepParameter::Alpha2) {
            econ = econ.with_alpha2(axis_value(&a, j, None))?;
        }
        let pre = nash_no_gmt(&econ)?;
        let t_m = match find(axes, idx, SweepParameter::MinimumRate) {
            Some((a, j)) => axis_value(&a, j, Some((pre.t2(), pre.t1()))),
            None => cfg.policy.map_or(f64::NAN, |p| p.t_m),
        };
        let sigma = match find(axes, idx, SweepParameter::CarveOut) {
            Some((a, j)) => {
                let band = if a.range.is_none() {
                    let b = sigma_bounds(&econ, t_m, pre.t2())?;
                    Some((b.lower.max(0.0), b.upper))
                } else {
                    None
                };
                axis_value(&a, j, band)
            }
            None => cfg.policy.map_or(f64::NAN, |p| p.sigma),
        };
        let p = GmtPolicy::new(t_m, sigma)?;
        policy = Some(p);
        let eq = nash_gmt_with_pre(&econ, &p, &pre)?;
        let verified = if verify {
            let reports = verify_equilibrium(&econ, &eq, &GridSpec::default())?;
            Some(reports.iter().all(|r| r.passed))
        } else {
            None
        };
        Ok((
            eq.regime.label(),
            CellSolution::capital(eq.taxes, &eq.choice, eq.revenues),
            verified,
        ))
    })();
    let rec = econ.record();
    let params = vec![rec.alpha1, rec.alpha2, rec.r, rec.mu, rec.delta];
    match result {
        Ok((label, sol, verified)) => Cell {
            params,
            policy,
            result: Ok((label, sol)),
            verified,
        },
        Err(e) => Cell {
            params,
            policy,
            result: Err(e.name().to_string()),
            verified: None,
        },
    }
}

fn labor_cell(base: &LaborEconomy, cfg: &ScenarioConfig, idx: &[usize], verify: bool) -> Cell {
    let axes = &cfg.sweep;
    let mut econ = *base;
    let mut policy = None;
    let result = (|| -> crate::Result<_> {
        if let Some((a, j)) = find(axes, idx, SweepParameter::Delta) {
            econ = econ.with_delta(axis_value(&a, j, None))?;
        }
        let pre = nash_labor_no_gmt(&econ)?;
        let t_m = match find(axes, idx, SweepParameter::MinimumRate) {
            Some((a, j)) => axis_value(&a, j, Some((pre.t2(), pre.t1()))),
            None => cfg.policy.map_or(f64::NAN, |p| p.t_m),
        };
        let sigma = match find(axes, idx, SweepParameter::CarveOut) {
            Some((a, j)) => axis_value(&a, j, None),
            None => cfg.policy.map_or(f64::NAN, |p| p.sigma),
        };
        let p = GmtPolicy::new(t_m, sigma)?;
        policy = Some(p);
        let eq = nash_labor_gmt_with_pre(&econ, &p, &pre)?;
        let verified = if verify {
            Some(verify_labor_nash(&econ, Some(&p), &eq.taxes, LABOR_TAX_STEPS)?.passed)
        } else {
            None
        };
        Ok((
            eq.regime.label(),
            CellSolution::labor(eq.taxes, &eq.choice, eq.revenues),
            verified,
        ))
    })();
    let rec = econ.record();
    let params = vec![rec.lambda, rec.beta, rec.lbar1, rec.lbar2, rec.r, rec.mu, rec.delta];
    match result {
        Ok((label, sol, verified)) => Cell {
            params,
            policy,
            result: Ok((label, sol)),
            verified,
        },
        Err(e) => Cell {
            params,
            policy,
            result: Err(e.name().to_string()),
            verified: None,
        },
    }
}

fn check_axes(cfg: &ScenarioConfig) -> Result<(), CliError> {
    if cfg.sweep.is_empty() {
        return Err(CliError::Validation {
            field: "sweep".into(),
            invariant: "MissingField".into(),
            detail: "'sweep' needs at least one axis".into(),
        });
    }
    let has = |p| cfg.sweep.iter().any(|a| a.parameter == p);
    if !has(SweepParameter::MinimumRate) {
        policy_or_missing(cfg.policy, "t_m")?;
    }
    if !has(SweepParameter::CarveOut) {
        policy_or_missing(cfg.policy, "sigma")?;
    }
    if let ModelEconomy::Labor(_) = cfg.economy {
        for (i, a) in cfg.sweep.iter().enumerate() {
            let bad = match a.parameter {
                SweepParameter::Alpha2 => Some("UnknownParameter"),
                SweepParameter::CarveOut if a.range.is_none() => Some("MissingRange"),
                _ => None,
            };
            if let Some(invariant) = bad {
                return Err(CliError::Validation {
                    field: format!("sweep.axes[{i}]"),
                    invariant: invariant.into(),
                    detail: format!(
                        "axis '{}' is not available for labor economies without a range",
                        a.parameter.name()
                    ),
                });
            }
        }
    }
    Ok(())
}

fn cell_json(id: usize, c: &Cell, names: &[&str]) -> Value {
    let params: serde_json::Map<String, Value> = names
        .iter()
        .zip(&c.params)
        .map(|(n, v)| (n.to_string(), json!(v)))
        .collect();
    let mut v = json!({ "cell": id, "parameters": params, "policy": c.policy });
    match &c.result {
        Ok((label, s)) => {
            v["regime"] = json!(label);
            v["taxes"] = json!(s.taxes);
            v["k"] = json!(s.k);
            v["g"] = json!(s.g);
            v["pi"] = json!(s.pi);
            v["revenues"] = json!(s.revenues);
            if let Some(w) = s.wages {
                v["wages"] = json!(w);
            }
        }
        Err(e) => v["error"] = json!(e),
    }
    if let Some(ok) = c.verified {
        v["verification_passed"] = json!(ok);
    }
    v
}

pub(super) fn run(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Artifact, CliError> {
    check_axes(cfg)?;
    let indices = cell_indices(&cfg.sweep);
    let labor = matches!(cfg.economy, ModelEconomy::Labor(_));
    let cells: Vec<Cell> = indices
        .par_iter()
        .map(|idx| match &cfg.economy {
            ModelEconomy::Capital(e) => capital_cell(e, cfg, idx, opts.verify),
            ModelEconomy::Labor(e) => labor_cell(e, cfg, idx, opts.verify),
        })
        .collect();
    let failures: Vec<usize> = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.verified == Some(false))
        .map(|(i, _)| i)
        .collect();
    let errors = cells.iter().filter(|c| c.result.is_err()).count();
    let mut warnings = Vec::new();
    if errors > 0 {
        warnings.push(format!("{errors} of {} cells could not be solved", cells.len()));
    }
    let text = match opts.format {
        Format::Csv => {
            let mut s = output::csv_header(labor);
            s.push('\n');
            for c in &cells {
                let outcome = c.result.as_ref().map(|(l, sol)| (*l, sol)).map_err(String::as_str);
                s.push_str(&output::csv_row(
                    &cfg.scenario_id,
                    &c.params,
                    c.policy.as_ref(),
                    outcome,
                    labor,
                ));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let names: &[&str] = if labor {
                &output::LABOR_PARAMETERS
            } else {
                &output::CAPITAL_PARAMETERS
            };
            let rows: Vec<Value> = cells.iter().enumerate().map(|(i, c)| cell_json(i, c, names)).collect();
            let body =
                json!({ "axes": cfg.sweep, "cells": rows, "unsolved": errors, "verification_failures": failures });
            output::to_pretty(&output::envelope("sweep", &cfg.scenario_id, super::inputs(cfg), &body)?)
        }
    };
    let failed_check = (!failures.is_empty()).then(|| format!("deviation check failed in cells {failures:?}"));
    Ok(Artifact {
        text,
        warnings,
        failed_check,
    })
}
