//! Schrödinger dynamics of both stages in their exact invariant planes.
//!
//! Stage I evolves every subsystem independently under
//! `H(s) = (1 - s)H₀ + s·H_f` with `s = t/T`, starting in `|Ψ₀⟩`. The joint
//! state is the tensor product, so the joint fidelity is the product of the
//! per-subsystem fidelities.
//!
//! Stage II lives in the plane of the solution state `|Ψ^S⟩` and its
//! complement `|Ψ^NS⟩` inside the stage-I output. It interpolates from
//! `H_i = 1 - |Ψ_out⟩⟨Ψ_out|` to `H_f = 1 - |Ψ^S⟩⟨Ψ^S|` in piecewise-constant
//! steps, each applied exactly as `exp(-i·H(s_ℓ)·Δt)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::csp::{CspInstance, SolutionCensus};
use crate::linalg::{norm_sqr, overlap_sqr, State2, Sym2};
use crate::schedule::{adiabatic_integrand, stage1_time, stage2_iterations, AccuracyTarget};
use crate::spectral::{SchedulePoint, SubsystemShape};
use crate::{Error, Result};

const MIN_STEPS: u64 = 100;
const MAX_STEP_DRIFT: f64 = 1e-9;
const MAX_NORM_ERROR: f64 = 1e-8;

/// How `s` advances with time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// `s(t) = t/T`.
    #[default]
    Linear,
    /// `ds/dt ∝ 1/√(Σ ξ_i²/ω_i(s)⁶)`, slowing down where the gap closes. This
    /// is the schedule that meets the adiabatic condition with equality at
    /// every instant; at `ε = 1` its duration is exactly the stage-I bound
    /// times `ε`.
    LocalAdiabatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    total_time: f64,
    steps: u64,
    schedule: Schedule,
}

impl EvolutionConfig {
    pub fn new(total_time: f64, steps: u64) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::invalid(
                "total_time",
                format!("{total_time} must be positive and finite"),
            ));
        }
        if steps < MIN_STEPS {
            return Err(Error::invalid(
                "steps",
                format!("{steps} is below the minimum of {MIN_STEPS}"),
            ));
        }
        Ok(EvolutionConfig {
            total_time,
            steps,
            schedule: Schedule::Linear,
        })
    }

    /// `max(1000, ⌈100·T⌉)` steps.
    pub fn with_default_steps(total_time: f64) -> Result<Self> {
        let steps = (100.0 * total_time).ceil().max(1000.0) as u64;
        EvolutionConfig::new(total_time, steps)
    }

    /// Default steps for `schedule`: [`with_default_steps`](Self::with_default_steps),
    /// raised for the local schedule so that `s` moves by at most 0.01 per step
    /// (its rate peaks at the endpoints, where it is `∫F / (T·√Σξ²)`).
    pub fn for_schedule(
        shapes: &[SubsystemShape],
        total_time: f64,
        schedule: Schedule,
    ) -> Result<Self> {
        let base = EvolutionConfig::with_default_steps(total_time)?.with_schedule(schedule);
        if schedule == Schedule::Linear {
            return Ok(base);
        }
        let b = stage1_time(shapes, AccuracyTarget::default())?;
        let endpoint = shapes
            .iter()
            .map(|s| s.ratio() * s.complement())
            .sum::<f64>()
            .sqrt();
        if b.degenerate || endpoint == 0.0 {
            return Ok(base);
        }
        let steps = (100.0 * b.stage1_time / endpoint).ceil() as u64;
        Ok(EvolutionConfig {
            steps: base.steps.max(steps),
            ..base
        })
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub total_time: f64,
    pub steps: u64,
    /// Stage I: joint squared overlap with the `s = 1` ground state.
    pub final_fidelity: f64,
    pub per_subsystem_fidelity: Vec<f64>,
    pub norm_error: f64,
    /// Stage II: `|⟨Ψ^S|ψ⟩|²`. For stage I this equals `final_fidelity`.
    pub success_probability: f64,
}

/// Integrates all subsystems together with classical RK4 on the state
/// `(s, ψ_1, …, ψ_m)`; `s` follows `ds/dt = rate(s)`. Returns the final
/// states in each subsystem's `{|Ψ₀⟩, |Ψ⊥⟩}` basis.
fn evolve<R: Fn(f64) -> f64>(
    shapes: &[SubsystemShape],
    config: &EvolutionConfig,
    rate: R,
) -> Vec<State2> {
    let h = config.total_time / config.steps as f64;
    let minus_i = Complex64::new(0.0, -1.0);
    let derivative = |s: f64, psis: &[State2]| -> (f64, Vec<State2>) {
        let point = SchedulePoint::clamped(s);
        let d = shapes
            .iter()
            .zip(psis)
            .map(|(shape, v)| {
                let hv = shape.hamiltonian(point).apply(v);
                [minus_i * hv[0], minus_i * hv[1]]
            })
            .collect();
        (rate(s.clamp(0.0, 1.0)), d)
    };
    let shifted = |s: f64, psis: &[State2], ds: f64, d: &[State2], a: f64| -> (f64, Vec<State2>) {
        let p = psis
            .iter()
            .zip(d)
            .map(|(v, k)| [v[0] + k[0] * a, v[1] + k[1] * a])
            .collect();
        (s + ds * a, p)
    };

    let mut s = 0.0;
    let mut psis: Vec<State2> = shapes
        .iter()
        .map(|shape| {
            let v = shape.initial_state();
            [Complex64::new(v[0], 0.0), Complex64::new(v[1], 0.0)]
        })
        .collect();
    for _ in 0..config.steps {
        let (r1, k1) = derivative(s, &psis);
        let (s2, p2) = shifted(s, &psis, r1, &k1, 0.5 * h);
        let (r2, k2) = derivative(s2, &p2);
        let (s3, p3) = shifted(s, &psis, r2, &k2, 0.5 * h);
        let (r3, k3) = derivative(s3, &p3);
        let (s4, p4) = shifted(s, &psis, r3, &k3, h);
        let (r4, k4) = derivative(s4, &p4);
        s += (r1 + 2.0 * r2 + 2.0 * r3 + r4) * (h / 6.0);
        for (i, psi) in psis.iter_mut().enumerate() {
            for j in 0..2 {
                psi[j] += (k1[i][j] + k2[i][j] * 2.0 + k3[i][j] * 2.0 + k4[i][j]) * (h / 6.0);
            }
        }
    }
    psis
}

pub fn simulate_stage1(
    shapes: &[SubsystemShape],
    config: EvolutionConfig,
) -> Result<SimulationReport> {
    if shapes.is_empty() {
        return Err(Error::invalid(
            "shapes",
            "at least one subsystem is required",
        ));
    }
    let t_total = config.total_time;
    let bound = match config.schedule {
        Schedule::Linear => None,
        Schedule::LocalAdiabatic => Some(stage1_time(shapes, AccuracyTarget::default())?),
    };
    let psis = match bound {
        // a saturated partition has no gap to protect; any schedule is exact
        Some(b) if !b.degenerate => {
            let total_integral = b.stage1_time;
            evolve(shapes, &config, |s| {
                total_integral / (t_total * adiabatic_integrand(s, shapes))
            })
        }
        _ => evolve(shapes, &config, |_| 1.0 / t_total),
    };

    let mut fidelities = Vec::with_capacity(shapes.len());
    let mut norm_error: f64 = 0.0;
    for (shape, psi) in shapes.iter().zip(&psis) {
        let e = (norm_sqr(psi) - 1.0).abs();
        // keep NaN from a blown-up integration
        if !norm_error.is_nan() && (e.is_nan() || e > norm_error) {
            norm_error = e;
        }
        fidelities.push(overlap_sqr(shape.final_state(), psi));
    }
    let drift = norm_error / config.steps as f64;
    if !(drift <= MAX_STEP_DRIFT && norm_error <= MAX_NORM_ERROR) {
        // RK4 norm loss per step scales as h^6
        let factor = if norm_error.is_finite() {
            (norm_error / (0.1 * MAX_NORM_ERROR))
                .powf(1.0 / 6.0)
                .clamp(2.0, 1e6)
        } else {
            10.0
        };
        return Err(Error::IntegratorTooCoarse {
            drift,
            suggested_steps: (config.steps as f64 * factor).ceil() as u64,
        });
    }
    let joint = fidelities.iter().product();
    Ok(SimulationReport {
        total_time: config.total_time,
        steps: config.steps,
        final_fidelity: joint,
        per_subsystem_fidelity: fidelities,
        norm_error,
        success_probability: joint,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticCheck {
    pub stage1_time: f64,
    /// `T_I`, `2·T_I`, `4·T_I`.
    pub times: [f64; 3],
    pub infidelities: [f64; 3],
    /// Least-squares `p` in `infidelity ∝ T^-p`.
    pub decay_order: f64,
}

/// Runs stage I at one, two and four times the stage-I bound, under the
/// locally adiabatic schedule the bound is derived for.
pub fn verify_adiabatic_bound(
    shapes: &[SubsystemShape],
    target: AccuracyTarget,
) -> Result<AdiabaticCheck> {
    verify_adiabatic_bound_with(shapes, target, Schedule::LocalAdiabatic)
}

pub fn verify_adiabatic_bound_with(
    shapes: &[SubsystemShape],
    target: AccuracyTarget,
    schedule: Schedule,
) -> Result<AdiabaticCheck> {
    if let Some(s) = shapes.iter().find(|s| s.ratio() > 1.0 / 16.0) {
        return Err(Error::invalid(
            "shapes",
            format!(
                "M/N = {} is above 1/16; the bound check needs small ratios",
                s.ratio()
            ),
        ));
    }
    let t1 = stage1_time(shapes, target)?.stage1_time;
    let times = [t1, 2.0 * t1, 4.0 * t1];
    let mut infidelities = [0.0; 3];
    for (slot, &t) in infidelities.iter_mut().zip(&times) {
        let report = simulate_stage1(shapes, EvolutionConfig::for_schedule(shapes, t, schedule)?)?;
        *slot = (1.0 - report.final_fidelity).max(0.0);
    }
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = infidelities.iter().map(|e| e.max(1e-300).ln()).collect();
    let (slope, _) = least_squares(&xs, &ys);
    Ok(AdiabaticCheck {
        stage1_time: t1,
        times,
        infidelities,
        decay_order: -slope,
    })
}

/// Returns `(slope, intercept)` of the least-squares line through the points.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `p = M_AB/(M_A·M_B)` and `1 - p`, exact in integer arithmetic.
fn solution_fraction(m_a: u64, m_b: u64, m_ab: u64) -> Result<(f64, f64)> {
    if m_ab == 0 {
        return Err(Error::NoGlobalSolution);
    }
    let product = m_a as u128 * m_b as u128;
    if m_ab as u128 > product {
        return Err(Error::invalid(
            "M_AB",
            format!("{m_ab} exceeds M_A·M_B = {product}"),
        ));
    }
    let p = product as f64;
    Ok((m_ab as f64 / p, (product - m_ab as u128) as f64 / p))
}

/// Stage-II Hamiltonian in the `{|Ψ^S⟩, |Ψ^NS⟩}` basis.
fn stage2_hamiltonian(s: f64, p: f64, q: f64) -> Sym2 {
    let initial = Sym2::new(q, -(p * q).sqrt(), p);
    let fin = Sym2::new(0.0, 0.0, 1.0);
    initial.scale(1.0 - s).plus(fin.scale(s))
}

pub fn simulate_stage2(
    m_a: u64,
    m_b: u64,
    m_ab: u64,
    steps: u64,
    step_time: f64,
) -> Result<SimulationReport> {
    let (p, q) = solution_fraction(m_a, m_b, m_ab)?;
    if !(step_time >= 0.0 && step_time.is_finite()) {
        return Err(Error::invalid(
            "step_time",
            format!("{step_time} must be finite and non-negative"),
        ));
    }
    let mut psi: State2 = [Complex64::new(p.sqrt(), 0.0), Complex64::new(q.sqrt(), 0.0)];
    for l in 1..=steps {
        let s = l as f64 / steps as f64;
        psi = stage2_hamiltonian(s, p, q).propagate(&psi, step_time);
    }
    let success = psi[0].norm_sqr();
    Ok(SimulationReport {
        total_time: steps as f64 * step_time,
        steps,
        final_fidelity: success,
        per_subsystem_fidelity: Vec::new(),
        norm_error: (norm_sqr(&psi) - 1.0).abs(),
        success_probability: success,
    })
}

/// Frozen stage-II discretization.
///
/// For a solution fraction `p = M_AB/(M_A·M_B)` the evolution runs for a
/// total time `time_factor / p` split into `⌈step_multiplier·√(1/p)⌉` equal
/// steps. Both constants come from [`calibrate_stage2`] on
/// `(M_A, M_B, M_AB) = (16, 16, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage2Calibration {
    pub time_factor: f64,
    pub step_multiplier: u32,
}

pub const STAGE2_CALIBRATION: Stage2Calibration = Stage2Calibration {
    time_factor: 4.0,
    step_multiplier: 2,
};

/// Success probability the dense reference must reach during calibration.
pub const STAGE2_REFERENCE_SUCCESS: f64 = 0.95;
/// Success probability the frozen discretization must reach.
pub const STAGE2_TARGET_SUCCESS: f64 = 0.9;

impl Stage2Calibration {
    /// `(steps, step_time)` for the given counts.
    pub fn schedule(&self, m_a: u64, m_b: u64, m_ab: u64) -> Result<(u64, f64)> {
        let (p, _) = solution_fraction(m_a, m_b, m_ab)?;
        let inv = 1.0 / p;
        let steps = (self.step_multiplier as f64 * inv.sqrt()).ceil().max(1.0) as u64;
        Ok((steps, self.time_factor * inv / steps as f64))
    }

    pub fn simulate(&self, m_a: u64, m_b: u64, m_ab: u64) -> Result<SimulationReport> {
        let (steps, dt) = self.schedule(m_a, m_b, m_ab)?;
        simulate_stage2(m_a, m_b, m_ab, steps, dt)
    }
}

/// Steps used for the dense reference evolution.
pub const REFERENCE_STEPS: u64 = 10_000;

/// Calibrates the stage-II discretization on `(16, 16, 1)`.
///
/// The time factor is the smallest multiple of 1/4 for which the dense
/// 10⁴-step reference reaches `reference_success`; the step multiplier is then
/// the smallest integer `c` for which `c·16` steps over the same total time
/// reach `target_success`.
pub fn calibrate_stage2(reference_success: f64, target_success: f64) -> Result<Stage2Calibration> {
    let (m_a, m_b, m_ab) = (16, 16, 1);
    let inv = 256.0;
    let time_factor = (1..=400)
        .map(|i| i as f64 * 0.25)
        .find(|&kappa| {
            simulate_stage2(
                m_a,
                m_b,
                m_ab,
                REFERENCE_STEPS,
                kappa * inv / REFERENCE_STEPS as f64,
            )
            .map(|r| r.success_probability >= reference_success)
            .unwrap_or(false)
        })
        .ok_or_else(|| {
            Error::invalid(
                "reference_success",
                "not reached for time factors up to 100",
            )
        })?;
    let step_multiplier = (1..=1000u32)
        .find(|&c| {
            let cal = Stage2Calibration {
                time_factor,
                step_multiplier: c,
            };
            cal.simulate(m_a, m_b, m_ab)
                .map(|r| r.success_probability >= target_success)
                .unwrap_or(false)
        })
        .ok_or_else(|| {
            Error::invalid(
                "target_success",
                "not reached for step multipliers up to 1000",
            )
        })?;
    Ok(Stage2Calibration {
        time_factor,
        step_multiplier,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedSearchReport {
    pub census: SolutionCensus,
    pub stage1_time: f64,
    /// `⌈√(M_A·M_B/M_AB)⌉`, the stage-II cost in units of `T_I`.
    pub iterations: u64,
    pub total_time: f64,
    pub stage1_fidelity: f64,
    pub stage2_success: f64,
    pub stage2_steps: u64,
    pub stage2_step_time: f64,
}

/// Census, then stage-I timing and dynamics (locally adiabatic schedule),
/// then stage-II count and dynamics.
pub fn run_nested_search(
    instance: &CspInstance,
    target: AccuracyTarget,
) -> Result<NestedSearchReport> {
    run_nested_search_with(instance, target, 1.0, STAGE2_CALIBRATION)
}

/// As [`run_nested_search`], with stage I simulated for `time_factor · T_I`.
pub fn run_nested_search_with(
    instance: &CspInstance,
    target: AccuracyTarget,
    time_factor: f64,
    calibration: Stage2Calibration,
) -> Result<NestedSearchReport> {
    let census = instance.census()?;
    let shapes = instance.shapes(&census)?;
    let pair = [shapes.a, shapes.b];
    let t1 = stage1_time(&pair, target)?.stage1_time;
    let iterations = stage2_iterations(census.m_a, census.m_b, census.m_ab)?;
    let stage1_fidelity = if t1 > 0.0 {
        simulate_stage1(
            &pair,
            EvolutionConfig::for_schedule(&pair, time_factor * t1, Schedule::LocalAdiabatic)?,
        )?
        .final_fidelity
    } else {
        1.0
    };
    let (steps, dt) = calibration.schedule(census.m_a, census.m_b, census.m_ab)?;
    let stage2 = simulate_stage2(census.m_a, census.m_b, census.m_ab, steps, dt)?;
    Ok(NestedSearchReport {
        census,
        stage1_time: t1,
        iterations,
        total_time: t1 * iterations as f64,
        stage1_fidelity,
        stage2_success: stage2.success_probability,
        stage2_steps: steps,
        stage2_step_time: dt,
    })
}
