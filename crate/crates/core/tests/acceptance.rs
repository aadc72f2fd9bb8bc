//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! with its measured value and wall time; the test fails if any line fails.

use std::time::{Duration, Instant};

use nested_search::complexity::{estimate, optimize_x, OptimizeConfig, PartitionModel};
use nested_search::csp::{generate, Constraint, CspInstance};
use nested_search::dynamics::{
    verify_adiabatic_bound, verify_adiabatic_bound_with, Schedule, STAGE2_CALIBRATION,
};
use nested_search::minimize::golden_section;
use nested_search::report::{
    fit_scaling, parse_grid, run_sweep, ModelParams, SweepRow, SweepSpec, SweepVar,
};
use nested_search::schedule::{stage1_time, stage2_iterations, total_time, AccuracyTarget};
use nested_search::spectral::{gap, SchedulePoint, SubsystemShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn eps(e: f64) -> AccuracyTarget {
    AccuracyTarget::new(e).unwrap()
}

fn x_sweep(n: u32, k: u32, alpha: f64) -> Vec<SweepRow> {
    run_sweep(&SweepSpec {
        varying: SweepVar::X,
        grid: parse_grid("0.1:0.9:33").unwrap(),
        fixed: ModelParams {
            n,
            k,
            alpha,
            x: 0.5,
        },
        epsilon: 1.0,
        tolerance: 1e-8,
    })
    .unwrap()
}

fn optimal_partition() -> Outcome {
    let mut xs = Vec::new();
    for k in [2, 3, 5] {
        xs.push(
            optimize_x(32, k, 1.0, OptimizeConfig::default(), eps(1.0))
                .unwrap()
                .x,
        );
    }
    let ok = xs.iter().all(|x| (x - 0.5).abs() <= 0.01);
    outcome(ok, format!("x_opt for k = 2, 3, 5: {xs:?}"))
}

fn scaling_slope() -> Outcome {
    let fit = fit_scaling(2, 1.0, 0.5, &parse_grid("16:40:7").unwrap(), 1.0, 1e-8).unwrap();
    outcome(
        (fit.slope - 0.375).abs() <= 0.02,
        format!(
            "slope {:.5} (residual {:.2e}, approximate {:.4})",
            fit.slope, fit.residual, fit.approx_slope
        ),
    )
}

fn analytic_agreement() -> Outcome {
    let rows = x_sweep(32, 2, 1.0);
    let ratios: Vec<f64> = rows.iter().map(|r| r.log2_t - r.log2_t_approx).collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    outcome(
        hi - lo <= 1.0,
        format!(
            "log2(T/T_approx) in [{lo:.4}, {hi:.4}], spread {:.4}",
            hi - lo
        ),
    )
}

fn n_alpha_collapse() -> Outcome {
    let a = x_sweep(32, 3, 1.054);
    let b = x_sweep(27, 3, 1.25);
    let worst = a
        .iter()
        .zip(&b)
        .map(|(p, q)| (p.log2_t - q.log2_t).abs() / p.log2_t.abs().max(q.log2_t.abs()))
        .fold(0.0, f64::max);
    outcome(
        worst <= 0.02,
        format!("max relative log2_T difference {:.4}%", 100.0 * worst),
    )
}

fn criticality_monotonicity() -> Outcome {
    let rows = run_sweep(&SweepSpec {
        varying: SweepVar::Alpha,
        grid: vec![0.9, 1.0, 1.054],
        fixed: ModelParams {
            n: 32,
            k: 5,
            alpha: 1.0,
            x: 0.5,
        },
        epsilon: 1.0,
        tolerance: 1e-8,
    })
    .unwrap();
    let t: Vec<f64> = rows.iter().map(|r| r.log2_t).collect();
    outcome(t[0] < t[1] && t[1] < t[2], format!("log2_T = {t:.4?}"))
}

fn gap_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut worst_s = 0.0f64;
    let mut endpoints = true;
    for _ in 0..100 {
        let q = rng.random_range(1..=40u32);
        let m = rng.random_range(1..=1u64 << q.min(20));
        let shape = SubsystemShape::from_qubits(q, m).unwrap();
        let (s_min, g_min) = golden_section(
            |s| gap(SchedulePoint::new(s).unwrap(), &shape),
            0.0,
            1.0,
            1e-10,
        );
        worst = worst.max((g_min - shape.ratio().sqrt()).abs());
        if shape.ratio() < 1.0 {
            worst_s = worst_s.max((s_min - 0.5).abs());
        }
        endpoints &= gap(SchedulePoint::new(0.0).unwrap(), &shape) == 1.0;
        endpoints &= gap(SchedulePoint::new(1.0).unwrap(), &shape) == 1.0;
    }
    outcome(
        worst <= 1e-9 && endpoints,
        format!("max |min ω - √(M/N)| = {worst:.2e}, max |argmin - 1/2| = {worst_s:.2e}, endpoints exact: {endpoints}"),
    )
}

fn single_solution_point() -> Outcome {
    let e = estimate(&PartitionModel::new(32, 2, 1.0, 0.5).unwrap());
    let (m_a, m_b, m_ab) = (e.log2_m_a.exp2(), e.log2_m_b.exp2(), e.log2_m_ab.exp2());
    outcome(
        m_ab == 1.0 && m_a == 256.0 && m_b == 256.0,
        format!("M_A = {m_a}, M_B = {m_b}, M_AB = {m_ab}"),
    )
}

fn adiabatic_bound() -> Outcome {
    let shape = SubsystemShape::new(1, 64).unwrap();
    let check = verify_adiabatic_bound(&[shape, shape], eps(0.1)).unwrap();
    let [e1, _, e4] = check.infidelities;
    let linear = verify_adiabatic_bound_with(&[shape, shape], eps(0.1), Schedule::Linear).unwrap();
    outcome(
        e1 <= 0.1 && e4 <= e1 / 8.0,
        format!(
            "T_I = {:.2}; infidelity at T_I, 2T_I, 4T_I: {:.3e} {:.3e} {:.3e} (linear sweep, informational: {:.3e} {:.3e} {:.3e})",
            check.stage1_time,
            e1,
            check.infidelities[1],
            e4,
            linear.infidelities[0],
            linear.infidelities[1],
            linear.infidelities[2]
        ),
    )
}

fn census_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut sandwich = true;
    for seed in 0..200 {
        let n = rng.random_range(4..=14u32);
        let alpha = rng.random_range(0.0..1.5);
        let c = generate(n, 2, alpha, 0.5, seed).unwrap().census().unwrap();
        sandwich &= c.m_ab <= c.m_a_s * c.m_b_s && c.m_a_s * c.m_b_s <= c.m_a * c.m_b;
    }
    let example = CspInstance::from_parts(
        4,
        vec![0, 1],
        vec![Constraint::forbidding(&[(0, true), (2, true)]).unwrap()],
    )
    .unwrap();
    let c = example.census().unwrap();
    outcome(
        sandwich && c.m_ab == 12 && !c.rectangular,
        format!(
            "sandwich holds on 200 instances: {sandwich}; example M_AB = {}, rectangular = {}",
            c.m_ab, c.rectangular
        ),
    )
}

fn stage2_success() -> Outcome {
    let (steps, _) = STAGE2_CALIBRATION.schedule(16, 16, 1).unwrap();
    let report = STAGE2_CALIBRATION.simulate(16, 16, 1).unwrap();
    let c = STAGE2_CALIBRATION.step_multiplier;
    outcome(
        steps == u64::from(c) * 16 && report.success_probability >= 0.9,
        format!(
            "c = {c}, {steps} steps, success {:.4}",
            report.success_probability
        ),
    )
}

fn multi_partition() -> Outcome {
    let shapes = [SubsystemShape::new(2, 16).unwrap(); 3];
    let t1 = stage1_time(&shapes, eps(1.0)).unwrap().stage1_time;
    let iterations = ((2.0f64 * 2.0 * 2.0 / 2.0).sqrt()).ceil() as u64;
    let budget = total_time(&shapes, 2, eps(1.0)).unwrap();
    let pairwise = stage2_iterations(2, 4, 2).unwrap();
    outcome(
        budget.iterations == iterations
            && budget.total_time == t1 * iterations as f64
            && pairwise == 2,
        format!(
            "T_I = {t1:.6}, iterations {}, T = {:.6}",
            budget.iterations, budget.total_time
        ),
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        (
            "optimal partition at x = 1/2",
            Duration::from_secs(10),
            optimal_partition,
        ),
        (
            "scaling slope 0.375",
            Duration::from_secs(30),
            scaling_slope,
        ),
        (
            "numeric/approximate agreement",
            Duration::from_secs(30),
            analytic_agreement,
        ),
        (
            "n·alpha collapse",
            Duration::from_secs(30),
            n_alpha_collapse,
        ),
        (
            "criticality monotonicity",
            Duration::from_secs(10),
            criticality_monotonicity,
        ),
        ("gap law", Duration::from_secs(5), gap_law),
        (
            "single-solution model point",
            Duration::from_secs(1),
            single_solution_point,
        ),
        ("adiabatic bound", Duration::from_secs(120), adiabatic_bound),
        ("census oracle", Duration::from_secs(60), census_oracle),
        ("stage-II success", Duration::from_secs(60), stage2_success),
        (
            "multi-partition composition",
            Duration::from_secs(1),
            multi_partition,
        ),
    ];
    let mut failures = Vec::new();
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let passed = result.passed && elapsed <= *budget;
        println!(
            "[{}] {:>2}. {name}: {} ({:.2?} of {:?})",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            elapsed,
            budget
        );
        if !passed {
            failures.push(i + 1);
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
