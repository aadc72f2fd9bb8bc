//! Parameter sweeps, scaling fits and self-describing run records.
//!
//! CSV column order for sweeps is fixed by [`SweepRow`]:
//!
//! ```text
//! n,k,alpha,x,epsilon,log2_N_A,log2_N_B,log2_M_A,log2_M_B,log2_M_AB,clamped,
//! stage1_time,iterations,total_time,log2_T,log2_T_approx,over_constrained
//! ```
//!
//! `log2_M_*` are the unclamped model estimates that enter the running time;
//! `clamped` marks rows where any of them is below zero.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::{
    approx_model_log2_time, estimate, model_time_with, scaling_exponent, PartitionModel,
};
use crate::dynamics::least_squares;
use crate::quadrature::QuadOptions;
use crate::schedule::{AccuracyTarget, IterationRule};
use crate::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parses `"a,b,c"` or `"lo:hi:count"` (inclusive, evenly spaced).
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::invalid("grid", format!("cannot parse {s:?} as a number")))
    };
    let grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid("grid", "range form is lo:hi:count"));
        }
        let (lo, hi) = (parse(parts[0])?, parse(parts[1])?);
        let count: usize = parts[2].trim().parse().map_err(|_| {
            Error::invalid(
                "grid",
                format!("count {:?} is not a positive integer", parts[2]),
            )
        })?;
        match count {
            0 => return Err(Error::invalid("grid", "count must be at least 1")),
            1 => vec![lo],
            _ => (0..count)
                .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .collect(),
        }
    } else {
        text.split(',').map(parse).collect::<Result<Vec<_>>>()?
    };
    if grid.is_empty() {
        return Err(Error::invalid("grid", "no points"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("grid", "values must be finite"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("grid", "values must be strictly increasing"));
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVar {
    X,
    Alpha,
    /// Number of variables.
    N,
    /// Search-space size `2^n`; grid values must be powers of two.
    #[serde(rename = "N")]
    SpaceSize,
    K,
}

impl std::str::FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(SweepVar::X),
            "alpha" => Ok(SweepVar::Alpha),
            "n" => Ok(SweepVar::N),
            "N" => Ok(SweepVar::SpaceSize),
            "k" => Ok(SweepVar::K),
            other => Err(Error::invalid(
                "vary",
                format!("{other:?} is not one of x, alpha, n, N, k"),
            )),
        }
    }
}

/// Model parameters for the fields a sweep holds fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: u32,
    pub k: u32,
    pub alpha: f64,
    pub x: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            n: 32,
            k: 2,
            alpha: 1.0,
            x: 0.5,
        }
    }
}

fn as_count(name: &'static str, v: f64) -> Result<u32> {
    if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
        return Err(Error::invalid(
            name,
            format!("{v} is not a non-negative integer"),
        ));
    }
    Ok(v as u32)
}

impl ModelParams {
    pub fn with(self, var: SweepVar, value: f64) -> Result<Self> {
        let mut p = self;
        match var {
            SweepVar::X => p.x = value,
            SweepVar::Alpha => p.alpha = value,
            SweepVar::N => p.n = as_count("n", value)?,
            SweepVar::SpaceSize => {
                let log = value.log2();
                if value < 1.0 || log.fract() != 0.0 {
                    return Err(Error::invalid(
                        "N",
                        format!("{value} is not a power of two"),
                    ));
                }
                p.n = log as u32;
            }
            SweepVar::K => p.k = as_count("k", value)?,
        }
        Ok(p)
    }

    pub fn model(&self) -> Result<PartitionModel> {
        PartitionModel::new(self.n, self.k, self.alpha, self.x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub varying: SweepVar,
    pub grid: Vec<f64>,
    pub fixed: ModelParams,
    pub epsilon: f64,
    pub tolerance: f64,
}

/// One CSV row; field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u32,
    pub k: u32,
    pub alpha: f64,
    pub x: f64,
    pub epsilon: f64,
    #[serde(rename = "log2_N_A")]
    pub log2_n_a: f64,
    #[serde(rename = "log2_N_B")]
    pub log2_n_b: f64,
    #[serde(rename = "log2_M_A")]
    pub log2_m_a: f64,
    #[serde(rename = "log2_M_B")]
    pub log2_m_b: f64,
    #[serde(rename = "log2_M_AB")]
    pub log2_m_ab: f64,
    pub clamped: bool,
    pub stage1_time: f64,
    pub iterations: u64,
    pub total_time: f64,
    #[serde(rename = "log2_T")]
    pub log2_t: f64,
    #[serde(rename = "log2_T_approx")]
    pub log2_t_approx: f64,
    pub over_constrained: bool,
}

/// Evaluates the numeric and approximate running time at one model point.
pub fn evaluate(params: &ModelParams, epsilon: f64, tolerance: f64) -> Result<SweepRow> {
    let model = params.model()?;
    let target = AccuracyTarget::new(epsilon)?;
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::invalid(
            "tolerance",
            format!("{tolerance} is outside (0, 1)"),
        ));
    }
    let quad = QuadOptions {
        rel_tol: tolerance,
        ..QuadOptions::default()
    };
    let est = estimate(&model);
    let budget = model_time_with(&model, target, IterationRule::default(), quad)?;
    Ok(SweepRow {
        n: model.n,
        k: model.k,
        alpha: model.alpha,
        x: model.x,
        epsilon,
        log2_n_a: est.log2_n_a,
        log2_n_b: est.log2_n_b,
        log2_m_a: est.raw_log2_m_a,
        log2_m_b: est.raw_log2_m_b,
        log2_m_ab: est.raw_log2_m_ab,
        clamped: est.clamped,
        stage1_time: budget.stage1_time,
        iterations: budget.iterations,
        total_time: budget.total_time,
        log2_t: budget.log2_total_time(),
        log2_t_approx: approx_model_log2_time(&model) - epsilon.log2(),
        over_constrained: budget.over_constrained,
    })
}

/// Rows in grid order; points are evaluated in parallel.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.grid.is_empty() || spec.grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "grid",
            "must be non-empty and strictly increasing",
        ));
    }
    spec.grid
        .par_iter()
        .map(|&v| {
            evaluate(
                &spec.fixed.with(spec.varying, v)?,
                spec.epsilon,
                spec.tolerance,
            )
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub k: u32,
    pub alpha: f64,
    pub x: f64,
    /// Least-squares slope of numeric `log2 T` against `n`, i.e. the
    /// exponent of `N`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the numeric fit.
    pub residual: f64,
    pub approx_slope: f64,
    /// `α/2 - α/2^{k+1}`.
    pub predicted_exponent: f64,
    pub rows: Vec<SweepRow>,
}

pub fn fit_scaling(
    k: u32,
    alpha: f64,
    x: f64,
    n_grid: &[f64],
    epsilon: f64,
    tolerance: f64,
) -> Result<ScalingFit> {
    if n_grid.len() < 5 {
        return Err(Error::invalid(
            "grid",
            format!("scaling needs at least 5 values of n, got {}", n_grid.len()),
        ));
    }
    let spec = SweepSpec {
        varying: SweepVar::N,
        grid: n_grid.to_vec(),
        fixed: ModelParams { n: 2, k, alpha, x },
        epsilon,
        tolerance,
    };
    let rows = run_sweep(&spec)?;
    if rows.iter().any(|r| !r.log2_t.is_finite()) {
        return Err(Error::invalid(
            "alpha",
            "running time vanishes; nothing to fit",
        ));
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ts: Vec<f64> = rows.iter().map(|r| r.log2_t).collect();
    let approx: Vec<f64> = rows.iter().map(|r| r.log2_t_approx).collect();
    let (slope, intercept) = least_squares(&ns, &ts);
    let (approx_slope, _) = least_squares(&ns, &approx);
    let residual = (ns
        .iter()
        .zip(&ts)
        .map(|(n, t)| (t - (slope * n + intercept)).powi(2))
        .sum::<f64>()
        / ns.len() as f64)
        .sqrt();
    Ok(ScalingFit {
        k,
        alpha,
        x,
        slope,
        intercept,
        residual,
        approx_slope,
        predicted_exponent: scaling_exponent(k, alpha),
        rows,
    })
}

/// A self-describing output record: the command, every input needed to
/// re-run it, and its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub inputs: serde_json::Value,
    pub outputs: serde_json::Value,
    pub tool_version: String,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    pub timestamp: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunRecord {
    pub fn new<I: Serialize, O: Serialize>(
        command: &str,
        inputs: &I,
        outputs: &O,
        seed: Option<u64>,
    ) -> Result<Self> {
        Ok(RunRecord {
            command: command.to_string(),
            inputs: serde_json::to_value(inputs)?,
            outputs: serde_json::to_value(outputs)?,
            tool_version: TOOL_VERSION.to_string(),
            timestamp: timestamp(),
            seed,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
    {
        return t;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// A standalone matplotlib script plotting `log2_T` and `log2_T_approx`
/// against `x_column` from a sweep CSV.
pub fn plot_script(csv_path: &str, x_column: &str) -> String {
    format!(
        r#"#!/usr/bin/env python3
# Plots a nested-search sweep CSV.
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_path:?}
xcol = {x_column:?}
rows = list(csv.DictReader(open(path)))
xs = [float(r[xcol]) for r in rows]
plt.plot(xs, [float(r["log2_T"]) for r in rows], "o-", label="numeric")
plt.plot(xs, [float(r["log2_T_approx"]) for r in rows], "--", label="approximate")
plt.xlabel(xcol)
plt.ylabel("log2 T")
plt.legend()
plt.tight_layout()
plt.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
"#
    )
}
