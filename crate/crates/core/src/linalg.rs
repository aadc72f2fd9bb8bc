//! Real symmetric 2×2 matrices and the complex two-component states they act on.

use num_complex::Complex64;

pub type State2 = [Complex64; 2];

/// Real symmetric matrix `[[a, b], [b, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

/// Eigen-decomposition of a [`Sym2`], eigenvalues in ascending order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen2 {
    pub lower: f64,
    pub upper: f64,
    /// Unit eigenvector of `lower`.
    pub lower_vec: [f64; 2],
    /// Unit eigenvector of `upper`.
    pub upper_vec: [f64; 2],
}

impl Sym2 {
    pub fn new(a: f64, b: f64, d: f64) -> Self {
        Sym2 { a, b, d }
    }

    pub fn scale(self, k: f64) -> Self {
        Sym2::new(self.a * k, self.b * k, self.d * k)
    }

    pub fn plus(self, o: Sym2) -> Self {
        Sym2::new(self.a + o.a, self.b + o.b, self.d + o.d)
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Half the eigenvalue splitting.
    fn half_split(&self) -> f64 {
        (0.5 * (self.a - self.d)).hypot(self.b)
    }

    pub fn eigen(&self) -> Eigen2 {
        let mean = 0.5 * self.trace();
        let r = self.half_split();
        // angle of the upper eigenvector
        let theta = 0.5 * (2.0 * self.b).atan2(self.a - self.d);
        let (s, c) = theta.sin_cos();
        Eigen2 {
            lower: mean - r,
            upper: mean + r,
            lower_vec: [-s, c],
            upper_vec: [c, s],
        }
    }

    pub fn apply(&self, v: &State2) -> State2 {
        [v[0] * self.a + v[1] * self.b, v[0] * self.b + v[1] * self.d]
    }

    /// `exp(-i·H·t)·v`, evaluated in closed form.
    pub fn propagate(&self, v: &State2, t: f64) -> State2 {
        let mean = 0.5 * self.trace();
        let r = self.half_split();
        let phase = Complex64::from_polar(1.0, -mean * t);
        let cos = (r * t).cos();
        // sin(rt)/r, finite as r -> 0
        let sinc = if r * t.abs() < 1e-8 {
            t
        } else {
            (r * t).sin() / r
        };
        let shifted = Sym2::new(self.a - mean, self.b, self.d - mean);
        let hv = shifted.apply(v);
        let i = Complex64::i();
        [
            phase * (v[0] * cos - i * hv[0] * sinc),
            phase * (v[1] * cos - i * hv[1] * sinc),
        ]
    }
}

pub fn norm_sqr(v: &State2) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

/// `|<u|v>|²` for a real bra `u`.
pub fn overlap_sqr(u: [f64; 2], v: &State2) -> f64 {
    (v[0] * u[0] + v[1] * u[1]).norm_sqr()
}
