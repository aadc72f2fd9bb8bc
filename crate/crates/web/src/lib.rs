//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export returns a flat `Float64Array` of fixed-width records; the
//! record layout is given on each function. The plain-Rust versions (without
//! the `js_` prefix) are what the native tests exercise.

use nested_search::complexity::{
    approx_model_log2_time, model_time, optimize_x, OptimizeConfig, PartitionModel,
};
use nested_search::dynamics::{simulate_stage1, EvolutionConfig, Schedule};
use nested_search::schedule::{adiabatic_integrand, stage1_time, AccuracyTarget};
use nested_search::spectral::{gap, SchedulePoint, SubsystemShape};
use nested_search::{Error, Result};
use wasm_bindgen::prelude::*;

fn check_points(points: usize) -> Result<()> {
    if !(2..=10_000).contains(&points) {
        return Err(Error::InvalidParameter {
            name: "points",
            reason: format!("{points} is outside 2..=10000"),
        });
    }
    Ok(())
}

/// Records `[s, gap_A, gap_B, integrand]` on an even grid of `s`, for two
/// subsystems given as `log2 M` and `log2 N`.
pub fn spectrum_curve(
    log2_m_a: f64,
    log2_n_a: f64,
    log2_m_b: f64,
    log2_n_b: f64,
    points: usize,
) -> Result<Vec<f64>> {
    check_points(points)?;
    let shapes = [
        SubsystemShape::from_log2(log2_m_a, log2_n_a)?,
        SubsystemShape::from_log2(log2_m_b, log2_n_b)?,
    ];
    let mut out = Vec::with_capacity(4 * points);
    for i in 0..points {
        let s = i as f64 / (points - 1) as f64;
        let p = SchedulePoint::new(s)?;
        out.extend([
            s,
            gap(p, &shapes[0]),
            gap(p, &shapes[1]),
            adiabatic_integrand(s, &shapes),
        ]);
    }
    Ok(out)
}

/// Records `[x, log2 T, log2 T_approx]` over `x ∈ [0.05, 0.95]`, followed by
/// one trailing record `[x_opt, log2 T(x_opt), NaN]`.
pub fn runtime_curve(n: u32, k: u32, alpha: f64, points: usize) -> Result<Vec<f64>> {
    check_points(points)?;
    let target = AccuracyTarget::new(1.0)?;
    let mut out = Vec::with_capacity(3 * (points + 1));
    for i in 0..points {
        let x = 0.05 + 0.9 * i as f64 / (points - 1) as f64;
        let model = PartitionModel::new(n, k, alpha, x)?;
        out.extend([
            x,
            model_time(&model, target)?.log2_total_time(),
            approx_model_log2_time(&model),
        ]);
    }
    let best = optimize_x(n, k, alpha, OptimizeConfig::default(), target)?;
    out.extend([best.x, best.log2_time, f64::NAN]);
    Ok(out)
}

/// Records `[T / T_I, infidelity linear, infidelity local]` for stage I on
/// two identical subsystems `(M, N = 2^q)`, at `multiples` of the bound.
pub fn fidelity_curve(m: u64, qubits: u32, epsilon: f64, multiples: &[f64]) -> Result<Vec<f64>> {
    let shape = SubsystemShape::from_qubits(qubits, m)?;
    let shapes = [shape, shape];
    let t1 = stage1_time(&shapes, AccuracyTarget::new(epsilon)?)?.stage1_time;
    let mut out = Vec::with_capacity(3 * multiples.len());
    for &factor in multiples {
        let t = factor * t1;
        let mut row = [factor, 0.0, 0.0];
        for (slot, schedule) in [(1, Schedule::Linear), (2, Schedule::LocalAdiabatic)] {
            let report = simulate_stage1(
                &shapes,
                EvolutionConfig::for_schedule(&shapes, t, schedule)?,
            )?;
            row[slot] = (1.0 - report.final_fidelity).max(0.0);
        }
        out.extend(row);
    }
    Ok(out)
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = spectrumCurve)]
pub fn js_spectrum_curve(
    log2_m_a: f64,
    log2_n_a: f64,
    log2_m_b: f64,
    log2_n_b: f64,
    points: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    js(spectrum_curve(
        log2_m_a, log2_n_a, log2_m_b, log2_n_b, points,
    ))
}

#[wasm_bindgen(js_name = runtimeCurve)]
pub fn js_runtime_curve(
    n: u32,
    k: u32,
    alpha: f64,
    points: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    js(runtime_curve(n, k, alpha, points))
}

#[wasm_bindgen(js_name = fidelityCurve)]
pub fn js_fidelity_curve(
    m: u64,
    qubits: u32,
    epsilon: f64,
    multiples: Vec<f64>,
) -> std::result::Result<Vec<f64>, JsError> {
    js(fidelity_curve(m, qubits, epsilon, &multiples))
}
