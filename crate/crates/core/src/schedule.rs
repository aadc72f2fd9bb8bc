//! Stage-I minimal evolution time, stage-II iteration count and their
//! composition into the total running time.
//!
//! The stage-I bound integrates the adiabatic condition over the schedule:
//!
//! ```text
//! T_I = (1/ε) ∫₀¹ ds √( Σ_i ξ_i² / ω_i(s)⁶ )
//! ```
//!
//! summed over every subsystem of the partition (two for the basic
//! algorithm, more for a multi-partition). Stage II needs
//! `⌈c·√(∏ M_i / M_AB)⌉` global-search steps, each costing `T_I`.

use serde::{Deserialize, Serialize};

use crate::minimize::golden_section;
use crate::quadrature::{integrate, QuadOptions};
use crate::spectral::{gap, SchedulePoint, SubsystemShape};
use crate::{Error, Result};

/// Adiabatic accuracy `ε ∈ (0, 1]`. Times are proportional to `1/ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTarget {
    epsilon: f64,
}

impl AccuracyTarget {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::invalid(
                "epsilon",
                format!("{epsilon} is outside (0, 1]"),
            ));
        }
        Ok(AccuracyTarget { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl Default for AccuracyTarget {
    fn default() -> Self {
        AccuracyTarget { epsilon: 1.0 }
    }
}

/// Multiplier `c` in `⌈c·√(∏ M_i / M_AB)⌉`. Only the order of the stage-II
/// step count is fixed by the algorithm; the default constant is 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRule {
    pub constant: f64,
}

impl Default for IterationRule {
    fn default() -> Self {
        IterationRule { constant: 1.0 }
    }
}

impl IterationRule {
    /// Step count for `log2(∏ M_i / M_AB)`.
    pub fn iterations_for_log2_ratio(&self, log2_ratio: f64) -> u64 {
        let raw = self.constant * (0.5 * log2_ratio).exp2();
        let nearest = raw.round();
        // exact squares computed through logarithms land a few ulps off
        let snapped = if (raw - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest
        } else {
            raw.ceil()
        };
        if snapped >= u64::MAX as f64 {
            u64::MAX
        } else {
            (snapped as u64).max(1)
        }
    }
}

/// Result of the stage-I quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage1Time {
    pub stage1_time: f64,
    pub integrand_peak_s: f64,
    pub quadrature_error_estimate: f64,
    pub quadrature_converged: bool,
    /// Every subsystem is saturated (`M = N`); no search is needed.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBudget {
    pub stage1_time: f64,
    pub iterations: u64,
    pub total_time: f64,
    pub integrand_peak_s: f64,
    pub quadrature_error_estimate: f64,
    pub degenerate: bool,
    /// `M_AB < 1` was used: the model predicts an over-constrained problem.
    pub over_constrained: bool,
}

impl TimeBudget {
    pub fn log2_total_time(&self) -> f64 {
        self.total_time.log2()
    }

    pub fn log2_stage1_time(&self) -> f64 {
        self.stage1_time.log2()
    }
}

/// `√(Σ ξ_i² / ω_i(s)⁶)`.
pub fn adiabatic_integrand(s: f64, shapes: &[SubsystemShape]) -> f64 {
    let point = SchedulePoint::clamped(s);
    shapes
        .iter()
        .map(|shape| {
            let xi = shape.transition_strength();
            let w = gap(point, shape);
            xi * xi / (w * w * w * w * w * w)
        })
        .sum::<f64>()
        .sqrt()
}

pub fn stage1_time(shapes: &[SubsystemShape], target: AccuracyTarget) -> Result<Stage1Time> {
    stage1_time_with(shapes, target, QuadOptions::default())
}

pub fn stage1_time_with(
    shapes: &[SubsystemShape],
    target: AccuracyTarget,
    quad: QuadOptions,
) -> Result<Stage1Time> {
    if shapes.is_empty() {
        return Err(Error::invalid(
            "shapes",
            "at least one subsystem is required",
        ));
    }
    if shapes.iter().all(SubsystemShape::is_saturated) {
        return Ok(Stage1Time {
            stage1_time: 0.0,
            integrand_peak_s: 0.5,
            quadrature_error_estimate: 0.0,
            quadrature_converged: true,
            degenerate: true,
        });
    }
    let integrand = |s: f64| adiabatic_integrand(s, shapes);
    let q = integrate(integrand, 0.0, 1.0, &[0.5], quad);
    let inv_eps = 1.0 / target.epsilon();
    Ok(Stage1Time {
        stage1_time: q.value * inv_eps,
        integrand_peak_s: integrand_peak(shapes),
        quadrature_error_estimate: q.error * inv_eps,
        quadrature_converged: q.converged,
        degenerate: false,
    })
}

/// Location of the integrand's maximum: best of a 1001-point grid, refined
/// by golden section between its neighbours.
pub fn integrand_peak(shapes: &[SubsystemShape]) -> f64 {
    const GRID: usize = 1000;
    let neg = |s: f64| -adiabatic_integrand(s, shapes);
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for i in 0..=GRID {
        let v = neg(i as f64 / GRID as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let lo = best_i.saturating_sub(1) as f64 / GRID as f64;
    let hi = (best_i + 1).min(GRID) as f64 / GRID as f64;
    let (s, v) = golden_section(neg, lo, hi, 1e-9);
    if v < best {
        s
    } else {
        best_i as f64 / GRID as f64
    }
}

/// `⌈√(M_A·M_B / M_AB)⌉`, computed exactly in integers.
pub fn stage2_iterations(m_a: u64, m_b: u64, m_ab: u64) -> Result<u64> {
    if m_ab == 0 {
        return Err(Error::NoGlobalSolution);
    }
    if m_a == 0 || m_b == 0 {
        return Err(Error::invalid(
            "solution counts",
            "M_A and M_B must be at least 1",
        ));
    }
    let product = m_a as u128 * m_b as u128;
    let m_ab = m_ab as u128;
    if m_ab > product {
        return Err(Error::invalid(
            "M_AB",
            format!("{m_ab} exceeds M_A·M_B = {product}"),
        ));
    }
    // smallest k with k²·M_AB >= M_A·M_B
    let mut k = ((product as f64 / m_ab as f64).sqrt().ceil() as u128).max(1);
    while k > 1 && (k - 1) * (k - 1) * m_ab >= product {
        k -= 1;
    }
    while k * k * m_ab < product {
        k += 1;
    }
    Ok(k as u64)
}

/// Total time with an integer global solution count.
pub fn total_time(
    shapes: &[SubsystemShape],
    m_ab: u64,
    target: AccuracyTarget,
) -> Result<TimeBudget> {
    if m_ab == 0 {
        return Err(Error::NoGlobalSolution);
    }
    total_time_log2(
        shapes,
        (m_ab as f64).log2(),
        target,
        IterationRule::default(),
        QuadOptions::default(),
    )
}

/// Total time with `log2 M_AB` given directly, as the complexity model does.
pub fn total_time_log2(
    shapes: &[SubsystemShape],
    log2_m_ab: f64,
    target: AccuracyTarget,
    rule: IterationRule,
    quad: QuadOptions,
) -> Result<TimeBudget> {
    if !log2_m_ab.is_finite() {
        return Err(Error::NoGlobalSolution);
    }
    let log2_product: f64 = shapes.iter().map(SubsystemShape::log2_solutions).sum();
    let log2_ratio = log2_product - log2_m_ab;
    if log2_ratio < -1e-9 {
        return Err(Error::invalid(
            "M_AB",
            format!("log2 M_AB = {log2_m_ab} exceeds log2 of the product of local counts = {log2_product}"),
        ));
    }
    let stage1 = stage1_time_with(shapes, target, quad)?;
    let iterations = rule.iterations_for_log2_ratio(log2_ratio.max(0.0));
    Ok(TimeBudget {
        stage1_time: stage1.stage1_time,
        iterations,
        total_time: stage1.stage1_time * iterations as f64,
        integrand_peak_s: stage1.integrand_peak_s,
        quadrature_error_estimate: stage1.quadrature_error_estimate,
        degenerate: stage1.degenerate,
        over_constrained: log2_m_ab < 0.0,
    })
}

/// `log2 √(max_i N_i/M_i)`.
pub fn approx_log2_stage1_time(shapes: &[SubsystemShape]) -> f64 {
    0.5 * shapes
        .iter()
        .map(|s| s.log2_dimension() - s.log2_solutions())
        .fold(0.0, f64::max)
}

/// `T_I ∼ √(max_i N_i/M_i)`.
pub fn approx_stage1_time(shapes: &[SubsystemShape]) -> f64 {
    approx_log2_stage1_time(shapes).exp2()
}

/// `log2` of `√(max_i (N_i/M_i) · ∏_j M_j / M_AB)`; for two subsystems this
/// is `√(max(N_A·M_B, N_B·M_A) / M_AB)`.
pub fn approx_log2_total_time(shapes: &[SubsystemShape], log2_m_ab: f64) -> f64 {
    let log2_product: f64 = shapes.iter().map(SubsystemShape::log2_solutions).sum();
    approx_log2_stage1_time(shapes) + 0.5 * (log2_product - log2_m_ab)
}

pub fn approx_total_time(shapes: &[SubsystemShape], m_ab: u64) -> f64 {
    approx_log2_total_time(shapes, (m_ab as f64).log2()).exp2()
}
