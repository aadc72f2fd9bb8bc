//! Closed-form spectrum of one subsystem's interpolating Hamiltonian.
//!
//! For a subsystem with `N` basis states of which `M` are marked, the
//! Hamiltonian `H(s) = (1 - s)(1 - |Ψ₀⟩⟨Ψ₀|) + s(1 - |Ψf⟩⟨Ψf|)` leaves the
//! plane spanned by the uniform superposition `|Ψ₀⟩` and the marked
//! superposition `|Ψf⟩` invariant, with `⟨Ψ₀|Ψf⟩ = √(M/N)`. Everything here is
//! computed in the orthonormal basis `{|Ψ₀⟩, |Ψ⊥⟩}` of that plane, where
//! `|Ψf⟩ = √(M/N)|Ψ₀⟩ + √(1 - M/N)|Ψ⊥⟩`. No state vector of size `N` is ever
//! built, so `N` may be as large as `2^64` (or a fractional model quantity).

use serde::{Deserialize, Serialize};

use crate::linalg::Sym2;
use crate::{Error, Result};

/// Dimension and marked-state count of one Hilbert-space factor.
///
/// Stored through base-2 logarithms plus the ratio `M/N` and its complement,
/// both evaluated once at construction so that neither overflows nor loses
/// precision for `N` near `2^64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsystemShape {
    log2_dimension: f64,
    log2_solutions: f64,
    ratio: f64,
    complement: f64,
}

impl SubsystemShape {
    /// Exact counts, `1 <= solutions <= dimension`.
    pub fn new(solutions: u64, dimension: u64) -> Result<Self> {
        if solutions == 0 {
            return Err(Error::invalid("shape", "solution count must be at least 1"));
        }
        if solutions > dimension {
            return Err(Error::invalid(
                "shape",
                format!("solution count {solutions} exceeds dimension {dimension}"),
            ));
        }
        let n = dimension as f64;
        Ok(SubsystemShape {
            log2_dimension: n.log2(),
            log2_solutions: (solutions as f64).log2(),
            ratio: solutions as f64 / n,
            complement: (dimension - solutions) as f64 / n,
        })
    }

    /// `N = 2^qubits` with `solutions` marked states.
    pub fn from_qubits(qubits: u32, solutions: u64) -> Result<Self> {
        if qubits > 64 {
            return Err(Error::invalid("shape", "at most 64 qubits per subsystem"));
        }
        if qubits == 64 {
            // 2^64 does not fit in u64; go through the log form.
            if solutions == 0 {
                return Err(Error::invalid("shape", "solution count must be at least 1"));
            }
            return Self::from_log2((solutions as f64).log2(), 64.0);
        }
        Self::new(solutions, 1u64 << qubits)
    }

    /// Model-valued shape given by `log2 M` and `log2 N`.
    ///
    /// Fractional counts are allowed, including `M < 1` for over-constrained
    /// model estimates; only `M <= N` is required.
    pub fn from_log2(log2_solutions: f64, log2_dimension: f64) -> Result<Self> {
        if !log2_solutions.is_finite() || !log2_dimension.is_finite() {
            return Err(Error::invalid("shape", "logarithms must be finite"));
        }
        if log2_dimension < 0.0 {
            return Err(Error::invalid("shape", "dimension must be at least 1"));
        }
        let diff = log2_solutions - log2_dimension;
        if diff > 0.0 {
            return Err(Error::invalid(
                "shape",
                format!("log2 M = {log2_solutions} exceeds log2 N = {log2_dimension}"),
            ));
        }
        Ok(SubsystemShape {
            log2_dimension,
            log2_solutions,
            ratio: diff.exp2(),
            complement: -(diff * std::f64::consts::LN_2).exp_m1(),
        })
    }

    /// `M/N`.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// `1 - M/N`, without cancellation.
    pub fn complement(&self) -> f64 {
        self.complement
    }

    pub fn log2_dimension(&self) -> f64 {
        self.log2_dimension
    }

    pub fn log2_solutions(&self) -> f64 {
        self.log2_solutions
    }

    pub fn dimension(&self) -> f64 {
        self.log2_dimension.exp2()
    }

    pub fn solutions(&self) -> f64 {
        self.log2_solutions.exp2()
    }

    /// Every state is marked; the subsystem needs no search.
    pub fn is_saturated(&self) -> bool {
        self.complement == 0.0
    }

    /// `ξ = (M/N)·√(N/M - 1)`, written as `√(r(1 - r))`.
    pub fn transition_strength(&self) -> f64 {
        (self.ratio * self.complement).sqrt()
    }

    /// The interpolating Hamiltonian restricted to the invariant plane.
    ///
    /// In the `{|Ψ₀⟩, |Ψ⊥⟩}` basis this is
    /// `[[g(1-r), -g√(r(1-r))], [-g√(r(1-r)), f + g·r]]`.
    pub fn hamiltonian(&self, point: SchedulePoint) -> Sym2 {
        let (f, g) = (point.f(), point.g());
        let r = self.ratio;
        let c = self.complement;
        Sym2::new(g * c, -g * (r * c).sqrt(), f + g * r)
    }

    /// `|Ψ₀⟩`, the ground state at `s = 0`.
    pub fn initial_state(&self) -> [f64; 2] {
        [1.0, 0.0]
    }

    /// `|Ψf⟩`, the ground state at `s = 1`.
    pub fn final_state(&self) -> [f64; 2] {
        [self.ratio.sqrt(), self.complement.sqrt()]
    }
}

/// A point on the linear schedule: `f = 1 - s` weights the initial
/// Hamiltonian and `g = s` the final one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulePoint {
    s: f64,
    f: f64,
}

impl SchedulePoint {
    pub fn new(s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::invalid("s", format!("{s} is outside [0, 1]")));
        }
        Ok(SchedulePoint { s, f: 1.0 - s })
    }

    /// Clamps `s` into `[0, 1]`; for internal callers whose `s` is known good
    /// up to rounding.
    pub(crate) fn clamped(s: f64) -> Self {
        let s = s.clamp(0.0, 1.0);
        SchedulePoint { s, f: 1.0 - s }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn g(&self) -> f64 {
        self.s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelSpectrum {
    pub gap: f64,
    pub ground_energy: f64,
    pub excited_energy: f64,
    /// Ground-state amplitudes on `{|Ψ₀⟩, |Ψ⊥⟩}`, first nonzero entry positive.
    pub ground_state: [f64; 2],
    /// `M = N`: the invariant plane collapses to the single line `|Ψ₀⟩ = |Ψf⟩`.
    pub degenerate: bool,
}

/// `ω = √((f - g)² + 4(M/N)·f·g)`.
pub fn gap(point: SchedulePoint, shape: &SubsystemShape) -> f64 {
    let (f, g) = (point.f(), point.g());
    ((f - g) * (f - g) + 4.0 * shape.ratio() * f * g).sqrt()
}

pub fn transition_strength(shape: &SubsystemShape) -> f64 {
    shape.transition_strength()
}

pub fn two_level_spectrum(point: SchedulePoint, shape: &SubsystemShape) -> TwoLevelSpectrum {
    let omega = gap(point, shape);
    // trace = f + g = 1, det = f·g·(1 - r)
    let excited = 0.5 * (1.0 + omega);
    let ground = point.f() * point.g() * shape.complement() / excited;
    if shape.is_saturated() {
        // |Ψ⊥⟩ is formal here: it stands for the orthogonal complement at energy f + g = 1.
        return TwoLevelSpectrum {
            gap: omega,
            ground_energy: 0.0,
            excited_energy: omega,
            ground_state: [1.0, 0.0],
            degenerate: true,
        };
    }
    let mut v = shape.hamiltonian(point).eigen().lower_vec;
    if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
        v = [-v[0], -v[1]];
    }
    TwoLevelSpectrum {
        gap: omega,
        ground_energy: ground,
        excited_energy: excited,
        ground_state: v,
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(s: f64) -> SchedulePoint {
        SchedulePoint::new(s).unwrap()
    }

    #[test]
    fn gap_examples() {
        let any = SubsystemShape::new(3, 16).unwrap();
        assert_eq!(gap(pt(0.0), &any), 1.0);
        let quarter = SubsystemShape::new(1, 4).unwrap();
        assert!((gap(pt(0.5), &quarter) - 0.5).abs() < 1e-15);
        // direct radical: (1/2)^2 + 4·2^-40·(3/16)
        let tiny = SubsystemShape::from_qubits(40, 1).unwrap();
        let want = (0.25f64 + 4.0 * 2f64.powi(-40) * 0.1875).sqrt();
        assert!((gap(pt(0.25), &tiny) - want).abs() < 1e-15);
        assert!((gap(pt(0.25), &tiny) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn transition_strength_examples() {
        for n in [1u64, 2, 1024, u64::MAX] {
            assert_eq!(
                SubsystemShape::new(n, n).unwrap().transition_strength(),
                0.0
            );
        }
        let s = SubsystemShape::new(1, 4).unwrap().transition_strength();
        assert!((s - 0.25 * 3f64.sqrt()).abs() < 1e-15);
        assert!((s - 0.433_012_701_892_219_3).abs() < 1e-15);
        let s = SubsystemShape::new(2, 1024).unwrap().transition_strength();
        assert!((s - (2.0 / 1024.0) * 511f64.sqrt()).abs() < 1e-15);
        assert!((s - 0.0441).abs() < 1e-4);
    }

    #[test]
    fn shape_validation() {
        assert!(SubsystemShape::new(0, 4).is_err());
        assert!(SubsystemShape::new(5, 4).is_err());
        assert!(SubsystemShape::from_log2(3.0, 2.0).is_err());
        assert!(SubsystemShape::from_log2(f64::NAN, 2.0).is_err());
        let big = SubsystemShape::from_qubits(64, 1).unwrap();
        assert_eq!(big.ratio(), 2f64.powi(-64));
        assert_eq!(big.complement(), 1.0);
        let frac = SubsystemShape::from_log2(-1.5, 10.0).unwrap();
        assert!((frac.ratio() - 2f64.powf(-11.5)).abs() < 1e-18);
        assert!(SchedulePoint::new(1.2).is_err());
        assert!(SchedulePoint::new(-0.1).is_err());
    }

    #[test]
    fn complement_is_exact_near_one() {
        let s = SubsystemShape::new(u64::MAX - 1, u64::MAX).unwrap();
        assert!(s.complement() > 0.0);
        let l = SubsystemShape::from_log2(20.0 - 1e-9, 20.0).unwrap();
        let want = 1e-9 * std::f64::consts::LN_2;
        assert!((l.complement() - want).abs() / want < 1e-6);
    }

    #[test]
    fn spectrum_endpoints_have_zero_ground_energy() {
        let shape = SubsystemShape::new(1, 16).unwrap();
        let s0 = two_level_spectrum(pt(0.0), &shape);
        assert_eq!(s0.ground_energy, 0.0);
        assert!((s0.ground_state[0] - 1.0).abs() < 1e-15 && s0.ground_state[1].abs() < 1e-15);
        let s1 = two_level_spectrum(pt(1.0), &shape);
        assert_eq!(s1.ground_energy, 0.0);
        let f = shape.final_state();
        assert!((s1.ground_state[0] - f[0]).abs() < 1e-15);
        assert!((s1.ground_state[1] - f[1]).abs() < 1e-15);
    }

    /// Independent route: Gram–Schmidt on explicit |Ψ₀⟩, |Ψf⟩ in a 16-state
    /// register, projector matrix elements, then the 2×2 eigenvalues from the
    /// characteristic polynomial.
    #[test]
    fn spectrum_matches_gram_schmidt_oracle() {
        let (n, marked, s) = (16usize, [5usize], 0.3f64);
        let psi0 = vec![1.0 / (n as f64).sqrt(); n];
        let mut psif = vec![0.0; n];
        for &m in &marked {
            psif[m] = 1.0 / (marked.len() as f64).sqrt();
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let ov = dot(&psi0, &psif);
        let mut perp: Vec<f64> = psif.iter().zip(&psi0).map(|(f, z)| f - ov * z).collect();
        let norm = dot(&perp, &perp).sqrt();
        perp.iter_mut().for_each(|x| *x /= norm);
        let basis = [psi0.clone(), perp];
        // <u|H|v> with H = f(1 - P0) + g(1 - Pf)
        let h = |u: &[f64], v: &[f64]| {
            (1.0 - s) * (dot(u, v) - dot(u, &psi0) * dot(&psi0, v))
                + s * (dot(u, v) - dot(u, &psif) * dot(&psif, v))
        };
        let a = h(&basis[0], &basis[0]);
        let b = h(&basis[0], &basis[1]);
        let d = h(&basis[1], &basis[1]);
        let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
        let (e0, e1) = ((a + d - disc) / 2.0, (a + d + disc) / 2.0);

        let shape = SubsystemShape::new(1, 16).unwrap();
        let spec = two_level_spectrum(pt(s), &shape);
        assert!((spec.ground_energy - e0).abs() < 1e-10);
        assert!((spec.excited_energy - e1).abs() < 1e-10);
        // eigenvector check: H v = E0 v
        let v = spec.ground_state;
        assert!((a * v[0] + b * v[1] - e0 * v[0]).abs() < 1e-10);
        assert!((b * v[0] + d * v[1] - e0 * v[1]).abs() < 1e-10);
    }

    #[test]
    fn saturated_shape_is_flagged() {
        let shape = SubsystemShape::new(8, 8).unwrap();
        let sp = two_level_spectrum(pt(0.4), &shape);
        assert!(sp.degenerate);
        assert_eq!(sp.ground_energy, 0.0);
        assert!((sp.excited_energy - sp.ground_energy - sp.gap).abs() < 1e-15);
    }

    #[test]
    fn gap_minimum_is_sqrt_ratio_at_half() {
        for (m, n) in [(1u64, 4u64), (1, 1024), (7, 4096), (3, 1 << 30)] {
            let shape = SubsystemShape::new(m, n).unwrap();
            let (mut best, mut at) = (f64::INFINITY, 0.0);
            for i in 0..=1000 {
                let s = i as f64 / 1000.0;
                let w = gap(pt(s), &shape);
                if w < best {
                    best = w;
                    at = s;
                }
            }
            assert_eq!(at, 0.5);
            assert!((best - shape.ratio().sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn transition_strength_rises_then_falls() {
        // finite differences on a log grid of r in (0, 1]
        let rs: Vec<f64> = (0..=200)
            .map(|i| 2f64.powf(-20.0 + 20.0 * i as f64 / 200.0))
            .collect();
        let xi: Vec<f64> = rs
            .iter()
            .map(|&r| {
                SubsystemShape::from_log2(r.log2(), 0.0)
                    .unwrap()
                    .transition_strength()
            })
            .collect();
        let signs: Vec<bool> = xi.windows(2).map(|w| w[1] > w[0]).collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, 1);
        assert!(signs[0] && !signs[signs.len() - 1]);
        assert_eq!(*xi.last().unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn schedule_weights_sum_to_one(s in 0.0f64..=1.0) {
            let p = pt(s);
            prop_assert_eq!(p.f() + p.g(), 1.0);
        }

        #[test]
        fn gap_is_symmetric_and_pinned_at_ends(s in 0.0f64..=1.0, m in 1u64..1000, extra in 0u64..100_000) {
            let shape = SubsystemShape::new(m, m + extra).unwrap();
            let a = gap(pt(s), &shape);
            let b = gap(pt(1.0 - s), &shape);
            prop_assert!((a - b).abs() <= 1e-14);
            prop_assert!(a > 0.0 && a <= 1.0 + 1e-15);
            prop_assert_eq!(gap(pt(0.0), &shape), 1.0);
            prop_assert_eq!(gap(pt(1.0), &shape), 1.0);
        }

        #[test]
        fn spectrum_splitting_equals_gap(s in 0.0f64..=1.0, m in 1u64..64, log_n in 6u32..20) {
            let shape = SubsystemShape::from_qubits(log_n, m).unwrap();
            let sp = two_level_spectrum(pt(s), &shape);
            let split = sp.excited_energy - sp.ground_energy;
            prop_assert!((split - sp.gap).abs() <= 1e-12 * sp.gap);
            let v = sp.ground_state;
            prop_assert!((v[0] * v[0] + v[1] * v[1] - 1.0).abs() < 1e-12);
        }
    }
}
