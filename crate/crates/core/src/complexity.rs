//! Average-case complexity model.
//!
//! Under the independent no-good approximation a subset of `n_j` of the `n`
//! variables keeps `M_j ≈ 2^{n_j - nα(n_j/n)^k}` local solutions, for
//! `j = A, B` and the whole problem (`n_AB = n`). Feeding these estimates into
//! the stage-I/stage-II composition gives the running time as a function of
//! the partition fraction `x = n_A/n`.

use serde::{Deserialize, Serialize};

use crate::minimize::golden_section;
use crate::quadrature::QuadOptions;
use crate::schedule::{total_time_log2, AccuracyTarget, IterationRule, TimeBudget};
use crate::spectral::SubsystemShape;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionModel {
    pub n: u32,
    pub k: u32,
    pub alpha: f64,
    pub x: f64,
}

impl PartitionModel {
    pub fn new(n: u32, k: u32, alpha: f64, x: f64) -> Result<Self> {
        validate_nka(n, k, alpha)?;
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::invalid(
                "x",
                format!("{x} is outside the open interval (0, 1)"),
            ));
        }
        Ok(PartitionModel { n, k, alpha, x })
    }

    pub fn with_x(self, x: f64) -> Result<Self> {
        PartitionModel::new(self.n, self.k, self.alpha, x)
    }
}

fn validate_nka(n: u32, k: u32, alpha: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(
            "n",
            format!("{n} is below the minimum of 2"),
        ));
    }
    if k < 2 {
        return Err(Error::invalid(
            "k",
            format!("{k} is below the minimum of 2"),
        ));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(
            "alpha",
            format!("{alpha} must be a finite non-negative number"),
        ));
    }
    Ok(())
}

/// Base-2 logarithms of the model's solution counts.
///
/// The `log2_m_*` fields are clamped below at 0 (at least one solution);
/// the `raw_*` fields keep the unclamped model values, which may be
/// negative for over-constrained problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelEstimates {
    pub log2_n_a: f64,
    pub log2_n_b: f64,
    pub log2_m_a: f64,
    pub log2_m_b: f64,
    pub log2_m_ab: f64,
    pub raw_log2_m_a: f64,
    pub raw_log2_m_b: f64,
    pub raw_log2_m_ab: f64,
    pub clamped: bool,
}

impl ModelEstimates {
    /// Subsystem shapes built from the unclamped estimates.
    pub fn shapes(&self) -> Result<[SubsystemShape; 2]> {
        Ok([
            SubsystemShape::from_log2(self.raw_log2_m_a, self.log2_n_a)?,
            SubsystemShape::from_log2(self.raw_log2_m_b, self.log2_n_b)?,
        ])
    }
}

pub fn estimate(model: &PartitionModel) -> ModelEstimates {
    let n = model.n as f64;
    let k = model.k as i32;
    let a = model.alpha;
    let xa = model.x;
    let xb = 1.0 - model.x;
    let raw_a = n * xa - n * a * xa.powi(k);
    let raw_b = n * xb - n * a * xb.powi(k);
    let raw_ab = n - n * a;
    let clamp = |v: f64| v.max(0.0);
    ModelEstimates {
        log2_n_a: n * xa,
        log2_n_b: n * xb,
        log2_m_a: clamp(raw_a),
        log2_m_b: clamp(raw_b),
        log2_m_ab: clamp(raw_ab),
        raw_log2_m_a: raw_a,
        raw_log2_m_b: raw_b,
        raw_log2_m_ab: raw_ab,
        clamped: raw_a < 0.0 || raw_b < 0.0 || raw_ab < 0.0,
    }
}

/// Running time of the nested search under the model.
///
/// The composition uses the unclamped estimates, so `M_AB < 1` enlarges the
/// stage-II count as an expected value would; `over_constrained` is set
/// whenever any estimate fell below one solution.
pub fn model_time(model: &PartitionModel, target: AccuracyTarget) -> Result<TimeBudget> {
    model_time_with(
        model,
        target,
        IterationRule::default(),
        QuadOptions::default(),
    )
}

pub fn model_time_with(
    model: &PartitionModel,
    target: AccuracyTarget,
    rule: IterationRule,
    quad: QuadOptions,
) -> Result<TimeBudget> {
    let est = estimate(model);
    let shapes = est.shapes()?;
    let mut budget = total_time_log2(&shapes, est.raw_log2_m_ab, target, rule, quad)?;
    budget.over_constrained |= est.clamped;
    Ok(budget)
}

/// `log2 T ∼ (n/2)·max(α - α(1-x)^k, α - α·x^k)`.
pub fn approx_model_log2_time(model: &PartitionModel) -> f64 {
    let k = model.k as i32;
    let a = model.alpha;
    let left = a - a * (1.0 - model.x).powi(k);
    let right = a - a * model.x.powi(k);
    0.5 * model.n as f64 * left.max(right)
}

/// Exponent of `N` in the optimal running time, `α/2 - α/2^{k+1}`.
pub fn scaling_exponent(k: u32, alpha: f64) -> f64 {
    alpha / 2.0 - alpha / 2f64.powi(k as i32 + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeConfig {
    pub x_lo: f64,
    pub x_hi: f64,
    pub grid_points: usize,
    pub xtol: f64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            x_lo: 0.02,
            x_hi: 0.98,
            grid_points: 101,
            xtol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionOptimum {
    pub x: f64,
    pub log2_time: f64,
    pub budget: TimeBudget,
}

/// Minimizes `model_time` over `x`: coarse grid, then golden-section search
/// between the best grid point's neighbours. Ties go to the point nearest
/// `x = 1/2`, so a flat objective returns exactly `0.5`.
pub fn optimize_x(
    n: u32,
    k: u32,
    alpha: f64,
    config: OptimizeConfig,
    target: AccuracyTarget,
) -> Result<PartitionOptimum> {
    validate_nka(n, k, alpha)?;
    if !(config.x_lo > 0.0 && config.x_lo < config.x_hi && config.x_hi < 1.0) {
        return Err(Error::invalid(
            "x range",
            format!("[{}, {}] must lie inside (0, 1)", config.x_lo, config.x_hi),
        ));
    }
    if config.grid_points < 3 {
        return Err(Error::invalid("grid_points", "need at least 3 grid points"));
    }
    let eval = |x: f64| -> Result<TimeBudget> {
        model_time(&PartitionModel::new(n, k, alpha, x)?, target)
    };

    let step = (config.x_hi - config.x_lo) / (config.grid_points - 1) as f64;
    let grid: Vec<f64> = (0..config.grid_points)
        .map(|i| config.x_lo + i as f64 * step)
        .collect();
    let mut best: Option<(usize, TimeBudget)> = None;
    for (i, &x) in grid.iter().enumerate() {
        let b = eval(x)?;
        let better = match &best {
            None => true,
            Some((j, cur)) => {
                let tie = (b.total_time - cur.total_time).abs()
                    <= 1e-12 * cur.total_time.max(b.total_time);
                if tie {
                    (x - 0.5).abs() < (grid[*j] - 0.5).abs()
                } else {
                    b.total_time < cur.total_time
                }
            }
        };
        if better {
            best = Some((i, b));
        }
    }
    let (i, grid_budget) = best.expect("non-empty grid");
    let mut x_best = grid[i];
    let mut budget = grid_budget;
    // the flat case (every point ties) already sits at the tie-break point
    if budget.total_time > 0.0 {
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid.len() - 1)];
        let objective = |x: f64| eval(x).map(|b| b.total_time).unwrap_or(f64::INFINITY);
        let (x, t) = golden_section(objective, lo, hi, config.xtol);
        if t < budget.total_time {
            x_best = x;
            budget = eval(x)?;
        }
    }
    Ok(PartitionOptimum {
        x: x_best,
        log2_time: budget.log2_total_time(),
        budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::approx_log2_total_time;

    fn eps1() -> AccuracyTarget {
        AccuracyTarget::default()
    }

    #[test]
    fn validation() {
        assert!(PartitionModel::new(1, 2, 1.0, 0.5).is_err());
        assert!(PartitionModel::new(8, 1, 1.0, 0.5).is_err());
        assert!(PartitionModel::new(8, 2, -1.0, 0.5).is_err());
        assert!(PartitionModel::new(8, 2, 1.0, 0.0).is_err());
        assert!(PartitionModel::new(8, 2, 1.0, 1.5).is_err());
    }

    #[test]
    fn single_solution_point() {
        let e = estimate(&PartitionModel::new(32, 2, 1.0, 0.5).unwrap());
        assert_eq!(e.log2_m_a, 8.0);
        assert_eq!(e.log2_m_b, 8.0);
        assert_eq!(e.log2_m_ab, 0.0);
        assert!(!e.clamped);
    }

    #[test]
    fn unconstrained_model_is_saturated() {
        let m = PartitionModel::new(20, 3, 0.0, 0.3).unwrap();
        let e = estimate(&m);
        assert_eq!(e.log2_m_a, e.log2_n_a);
        assert_eq!(e.log2_m_b, e.log2_n_b);
        assert_eq!(e.log2_m_ab, 20.0);
        let b = model_time(&m, eps1()).unwrap();
        assert_eq!(b.total_time, 0.0);
        assert_eq!(b.iterations, 1);
    }

    #[test]
    fn over_constrained_estimate_is_clamped() {
        let e = estimate(&PartitionModel::new(27, 3, 1.25, 0.5).unwrap());
        assert!((e.raw_log2_m_ab - (27.0 - 33.75)).abs() < 1e-12);
        assert_eq!(e.log2_m_ab, 0.0);
        assert!(e.clamped);
        let b = model_time(&PartitionModel::new(27, 3, 1.25, 0.5).unwrap(), eps1()).unwrap();
        assert!(b.over_constrained);
    }

    #[test]
    fn model_time_at_critical_point() {
        let m = PartitionModel::new(32, 2, 1.0, 0.5).unwrap();
        let b = model_time(&m, eps1()).unwrap();
        assert_eq!(b.iterations, 256);
        assert!(b.total_time.is_finite() && b.total_time > 0.0);
        assert_eq!(b.total_time, b.stage1_time * 256.0);
        // two identical subsystems with N/M = 256: T_I = √2·√255
        assert!((b.stage1_time - (2.0f64 * 255.0).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn model_time_is_symmetric_in_x() {
        for x in [0.1, 0.23, 0.37, 0.49] {
            let a = model_time(&PartitionModel::new(32, 3, 1.0, x).unwrap(), eps1()).unwrap();
            let b = model_time(&PartitionModel::new(32, 3, 1.0, 1.0 - x).unwrap(), eps1()).unwrap();
            assert!(
                (a.total_time - b.total_time).abs() <= 1e-9 * a.total_time,
                "x = {x}"
            );
        }
    }

    #[test]
    fn approx_time_examples() {
        let m = PartitionModel::new(32, 2, 1.0, 0.5).unwrap();
        assert_eq!(approx_model_log2_time(&m), 12.0);
        let m = PartitionModel::new(32, 3, 1.0, 0.5).unwrap();
        assert_eq!(approx_model_log2_time(&m), 14.0);
        let m = PartitionModel::new(32, 2, 1.0, 1e-9).unwrap();
        assert!((approx_model_log2_time(&m) - 16.0).abs() < 1e-6);
        // agrees with the schedule-level approximation on the unclamped estimates
        for x in [0.1, 0.3, 0.5, 0.8] {
            let m = PartitionModel::new(30, 3, 1.1, x).unwrap();
            let e = estimate(&m);
            let via_schedule = approx_log2_total_time(&e.shapes().unwrap(), e.raw_log2_m_ab);
            assert!((via_schedule - approx_model_log2_time(&m)).abs() < 1e-9);
        }
    }

    #[test]
    fn scaling_exponent_examples() {
        assert_eq!(scaling_exponent(2, 1.0), 0.375);
        assert!((scaling_exponent(5, 0.9) - 0.435_937_5).abs() < 1e-15);
        assert!((scaling_exponent(60, 1.3) - 0.65).abs() < 1e-15);
    }

    #[test]
    fn exponent_is_the_slope_of_the_approximation() {
        for (k, a) in [(2u32, 1.0), (3, 0.8), (5, 1.2)] {
            let t = |n: u32| approx_model_log2_time(&PartitionModel::new(n, k, a, 0.5).unwrap());
            let slope = t(33) - t(32);
            assert!((slope - scaling_exponent(k, a)).abs() < 1e-12);
        }
    }

    #[test]
    fn optimum_is_half() {
        for k in [2u32, 3, 5] {
            let opt = optimize_x(32, k, 1.0, OptimizeConfig::default(), eps1()).unwrap();
            assert!((opt.x - 0.5).abs() <= 0.01, "k = {k}: {}", opt.x);
        }
        let opt = optimize_x(32, 5, 1.054, OptimizeConfig::default(), eps1()).unwrap();
        assert!((opt.x - 0.5).abs() <= 0.01);
    }

    #[test]
    fn flat_objective_breaks_tie_at_half() {
        let opt = optimize_x(16, 2, 0.0, OptimizeConfig::default(), eps1()).unwrap();
        assert_eq!(opt.x, 0.5);
        assert_eq!(opt.budget.total_time, 0.0);
    }

    #[test]
    fn time_grows_with_alpha() {
        let mut last = f64::NEG_INFINITY;
        for i in 0..=14 {
            let a = 0.5 + 0.05 * i as f64;
            let t = model_time(&PartitionModel::new(32, 3, a, 0.5).unwrap(), eps1())
                .unwrap()
                .log2_total_time();
            assert!(t > last, "alpha = {a}");
            last = t;
        }
    }

    #[test]
    fn breakdown_regime_saturates_subsystems() {
        // k >= log2(nα): M_A/N_A = 2^{-nα/2^k} >= 1/2
        for (n, a) in [(32u32, 1.0f64), (27, 1.25), (64, 0.9)] {
            let k = (n as f64 * a).log2().ceil() as u32;
            let e = estimate(&PartitionModel::new(n, k, a, 0.5).unwrap());
            assert!(e.log2_m_a - e.log2_n_a >= -1.0);
        }
    }
}
