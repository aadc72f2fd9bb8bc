//! Random constraint-satisfaction instances, the A/B/cross classification of
//! their constraints, and exact solution counts by enumeration.
//!
//! Every constraint forbids a single assignment ("no-good") of its `k`
//! variables. The generator draws
//! `m = round(nα / -log2(1 - 2^-k))` of them, which makes the expected number
//! of surviving assignments on any `n_j` variables match
//! `2^{n_j - nα(n_j/n)^k}` from the complexity model.

use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spectral::SubsystemShape;
use crate::{Error, Result};

/// Largest `n` the census will enumerate.
pub const CENSUS_MAX_VARIABLES: usize = 30;
/// Largest subset the census will enumerate locally.
pub const CENSUS_MAX_SUBSET: usize = 25;
/// Variables are packed into a `u64` assignment.
pub const MAX_VARIABLES: usize = 64;

pub const FORMAT_VERSION: u32 = 1;

/// A single no-good: the assignment `forbidden` of `variables` is excluded.
///
/// Bit `j` of `forbidden` is the value of `variables[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    variables: Vec<u32>,
    forbidden: u64,
}

impl Constraint {
    pub fn new(variables: Vec<u32>, forbidden: u64) -> Result<Self> {
        if variables.is_empty() || variables.len() > MAX_VARIABLES {
            return Err(Error::invalid(
                "constraint",
                "arity must be between 1 and 64",
            ));
        }
        if variables.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "constraint",
                format!("variables {variables:?} are not strictly increasing"),
            ));
        }
        if variables.len() < 64 && forbidden >> variables.len() != 0 {
            return Err(Error::invalid(
                "constraint",
                "forbidden pattern is longer than the variable list",
            ));
        }
        Ok(Constraint {
            variables,
            forbidden,
        })
    }

    /// Builds a constraint from `(variable, forbidden value)` pairs in any order.
    pub fn forbidding(assignment: &[(u32, bool)]) -> Result<Self> {
        let mut pairs = assignment.to_vec();
        pairs.sort_by_key(|p| p.0);
        let vars = pairs.iter().map(|p| p.0).collect();
        let bits = pairs
            .iter()
            .enumerate()
            .fold(0u64, |acc, (j, p)| acc | (u64::from(p.1) << j));
        Constraint::new(vars, bits)
    }

    pub fn variables(&self) -> &[u32] {
        &self.variables
    }

    pub fn forbidden(&self) -> u64 {
        self.forbidden
    }

    pub fn arity(&self) -> usize {
        self.variables.len()
    }

    /// Forbidden pattern as a bit string, `variables[0]` first.
    pub fn pattern_string(&self) -> String {
        (0..self.arity())
            .map(|j| {
                if self.forbidden >> j & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }

    /// Mask of the variables and the forbidden bits placed at their positions.
    fn masks(&self) -> (u64, u64) {
        self.variables
            .iter()
            .enumerate()
            .fold((0, 0), |(mask, bad), (j, &v)| {
                (mask | 1 << v, bad | ((self.forbidden >> j & 1) << v))
            })
    }

    /// Whether the full assignment (bit `v` = value of variable `v`) avoids the no-good.
    pub fn allows(&self, assignment: u64) -> bool {
        let (mask, bad) = self.masks();
        assignment & mask != bad
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CspInstance {
    n: u32,
    k: u32,
    alpha: f64,
    x: f64,
    seed: u64,
    partition_a: Vec<u32>,
    constraints: Vec<Constraint>,
}

/// Constraint indices split by the subsets they touch.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Classification {
    pub within_a: Vec<usize>,
    pub within_b: Vec<usize>,
    pub cross: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionCensus {
    pub n_a: u32,
    pub n_b: u32,
    pub m_a: u64,
    pub m_b: u64,
    pub m_ab: u64,
    pub m_a_s: u64,
    pub m_a_ns: u64,
    pub m_b_s: u64,
    pub m_b_ns: u64,
    /// `M_A^S · M_B^S == M_AB`: the global solutions form a product set.
    pub rectangular: bool,
}

/// Shapes for the two subsystems plus the global count, ready for the
/// schedule formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensusShapes {
    pub a: SubsystemShape,
    pub b: SubsystemShape,
    pub m_ab: u64,
}

/// `round(nα / -log2(1 - 2^-k))`.
pub fn constraint_count(n: u32, k: u32, alpha: f64) -> usize {
    let per_nogood = -(-(2f64.powi(-(k as i32)))).ln_1p() / std::f64::consts::LN_2;
    (n as f64 * alpha / per_nogood).round() as usize
}

pub fn generate(n: u32, k: u32, alpha: f64, x: f64, seed: u64) -> Result<CspInstance> {
    if n as usize > MAX_VARIABLES {
        return Err(Error::invalid(
            "n",
            format!("{n} exceeds the maximum of {MAX_VARIABLES}"),
        ));
    }
    if k < 2 || k > n {
        return Err(Error::invalid(
            "k",
            format!("{k} must satisfy 2 <= k <= n = {n}"),
        ));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(
            "alpha",
            format!("{alpha} must be a finite non-negative number"),
        ));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::invalid(
            "x",
            format!("{x} is outside the open interval (0, 1)"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u32> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_a = ((x * n as f64).round() as usize).clamp(1, n as usize - 1);
    let mut partition_a = order[..n_a].to_vec();
    partition_a.sort_unstable();

    let m = constraint_count(n, k, alpha);
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let mut vars: Vec<u32> = index::sample(&mut rng, n as usize, k as usize)
            .into_iter()
            .map(|v| v as u32)
            .collect();
        vars.sort_unstable();
        let pattern = rng.random_range(0..1u64 << k);
        constraints.push(Constraint::new(vars, pattern)?);
    }
    Ok(CspInstance {
        n,
        k,
        alpha,
        x,
        seed,
        partition_a,
        constraints,
    })
}

impl CspInstance {
    /// Hand-built instance. `k` is taken from the widest constraint, `x` from
    /// the partition and `alpha` from inverting the generator's constraint count.
    pub fn from_parts(n: u32, partition_a: Vec<u32>, constraints: Vec<Constraint>) -> Result<Self> {
        let k = constraints
            .iter()
            .map(Constraint::arity)
            .max()
            .unwrap_or(2)
            .max(2) as u32;
        let per_nogood = -(-(2f64.powi(-(k as i32)))).ln_1p() / std::f64::consts::LN_2;
        let inst = CspInstance {
            n,
            k,
            alpha: constraints.len() as f64 * per_nogood / n.max(1) as f64,
            x: partition_a.len() as f64 / n.max(1) as f64,
            seed: 0,
            partition_a,
            constraints,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n as usize;
        if !(2..=MAX_VARIABLES).contains(&n) {
            return Err(Error::invalid(
                "n",
                format!("{n} must be between 2 and {MAX_VARIABLES}"),
            ));
        }
        if self.partition_a.is_empty() || self.partition_a.len() >= n {
            return Err(Error::invalid(
                "partition_A",
                "must be a proper non-empty subset",
            ));
        }
        if self.partition_a.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "partition_A",
                "indices must be strictly increasing",
            ));
        }
        if self.partition_a.last().is_some_and(|&v| v as usize >= n) {
            return Err(Error::invalid(
                "partition_A",
                format!("index out of range for n = {n}"),
            ));
        }
        for c in &self.constraints {
            if c.variables.last().is_some_and(|&v| v as usize >= n) {
                return Err(Error::invalid(
                    "constraint",
                    format!("variable out of range for n = {n}"),
                ));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn partition_a(&self) -> &[u32] {
        &self.partition_a
    }

    pub fn partition_b(&self) -> Vec<u32> {
        let a = self.mask_a();
        (0..self.n).filter(|v| a >> v & 1 == 0).collect()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// No constraints were drawn (for instance `alpha = 0`).
    pub fn is_unconstrained(&self) -> bool {
        self.constraints.is_empty()
    }

    fn mask_a(&self) -> u64 {
        self.partition_a.iter().fold(0, |m, &v| m | 1 << v)
    }

    pub fn classify(&self) -> Classification {
        let a = self.mask_a();
        let mut out = Classification::default();
        for (i, c) in self.constraints.iter().enumerate() {
            let (mask, _) = c.masks();
            if mask & !a == 0 {
                out.within_a.push(i);
            } else if mask & a == 0 {
                out.within_b.push(i);
            } else {
                out.cross.push(i);
            }
        }
        out
    }

    /// Exact solution counts by enumeration.
    ///
    /// Local solutions of A and B are listed first; global solutions are then
    /// the pairs (A outer, B inner) that also satisfy every cross constraint.
    pub fn census(&self) -> Result<SolutionCensus> {
        let n = self.n as usize;
        if n > CENSUS_MAX_VARIABLES {
            return Err(Error::TooLarge {
                what: "n",
                value: n,
                limit: CENSUS_MAX_VARIABLES,
            });
        }
        let vars_a = self.partition_a.clone();
        let vars_b = self.partition_b();
        for (what, len) in [("n_A", vars_a.len()), ("n_B", vars_b.len())] {
            if len > CENSUS_MAX_SUBSET {
                return Err(Error::TooLarge {
                    what,
                    value: len,
                    limit: CENSUS_MAX_SUBSET,
                });
            }
        }
        let class = self.classify();
        let masks = |idx: &[usize]| -> Vec<(u64, u64)> {
            idx.iter().map(|&i| self.constraints[i].masks()).collect()
        };
        let sols_a = local_solutions(&vars_a, &masks(&class.within_a));
        let sols_b = local_solutions(&vars_b, &masks(&class.within_b));
        let cross = masks(&class.cross);

        let words = sols_b.len().div_ceil(64);
        let (m_ab, m_a_s, b_seen) = sols_a
            .par_iter()
            .fold(
                || (0u64, 0u64, vec![0u64; words]),
                |(mut total, mut extendable, mut seen), &za| {
                    let mut hits = 0u64;
                    for (j, &zb) in sols_b.iter().enumerate() {
                        let z = za | zb;
                        if cross.iter().all(|&(mask, bad)| z & mask != bad) {
                            hits += 1;
                            seen[j / 64] |= 1 << (j % 64);
                        }
                    }
                    total += hits;
                    extendable += u64::from(hits > 0);
                    (total, extendable, seen)
                },
            )
            .reduce(
                || (0, 0, vec![0u64; words]),
                |(t1, e1, mut s1), (t2, e2, s2)| {
                    s1.iter_mut().zip(&s2).for_each(|(a, b)| *a |= b);
                    (t1 + t2, e1 + e2, s1)
                },
            );
        let m_b_s: u64 = b_seen.iter().map(|w| u64::from(w.count_ones())).sum();
        let m_a = sols_a.len() as u64;
        let m_b = sols_b.len() as u64;
        Ok(SolutionCensus {
            n_a: vars_a.len() as u32,
            n_b: vars_b.len() as u32,
            m_a,
            m_b,
            m_ab,
            m_a_s,
            m_a_ns: m_a - m_a_s,
            m_b_s,
            m_b_ns: m_b - m_b_s,
            rectangular: m_a_s as u128 * m_b_s as u128 == m_ab as u128,
        })
    }

    pub fn shapes(&self, census: &SolutionCensus) -> Result<CensusShapes> {
        if census.m_a == 0 {
            return Err(Error::LocallyUnsatisfiable { subset: 'A' });
        }
        if census.m_b == 0 {
            return Err(Error::LocallyUnsatisfiable { subset: 'B' });
        }
        Ok(CensusShapes {
            a: SubsystemShape::from_qubits(census.n_a, census.m_a)?,
            b: SubsystemShape::from_qubits(census.n_b, census.m_b)?,
            m_ab: census.m_ab,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            version: FORMAT_VERSION,
            n: self.n,
            k: self.k,
            alpha: self.alpha,
            x: self.x,
            seed: self.seed,
            partition_a: self.partition_a.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintRecord {
                    vars: c.variables.clone(),
                    forbidden: c.pattern_string(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                file.version
            )));
        }
        let constraints = file
            .constraints
            .into_iter()
            .map(|r| {
                if r.forbidden.len() != r.vars.len() {
                    return Err(Error::Format(format!(
                        "pattern \"{}\" has length {} but the constraint has {} variables",
                        r.forbidden,
                        r.forbidden.len(),
                        r.vars.len()
                    )));
                }
                let mut bits = 0u64;
                for (j, ch) in r.forbidden.chars().enumerate() {
                    match ch {
                        '0' => {}
                        '1' => bits |= 1 << j,
                        other => {
                            return Err(Error::Format(format!(
                                "invalid pattern character {other:?}"
                            )))
                        }
                    }
                }
                Constraint::new(r.vars, bits)
            })
            .collect::<Result<Vec<_>>>()?;
        let inst = CspInstance {
            n: file.n,
            k: file.k,
            alpha: file.alpha,
            x: file.x,
            seed: file.seed,
            partition_a: file.partition_a,
            constraints,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    version: u32,
    n: u32,
    k: u32,
    alpha: f64,
    x: f64,
    seed: u64,
    #[serde(rename = "partition_A")]
    partition_a: Vec<u32>,
    constraints: Vec<ConstraintRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintRecord {
    vars: Vec<u32>,
    forbidden: String,
}

/// Full-width assignments over `vars` (in index order) that satisfy every
/// `(mask, bad)` no-good.
fn local_solutions(vars: &[u32], nogoods: &[(u64, u64)]) -> Vec<u64> {
    // scatter tables: local bit i -> variable vars[i], one table per byte
    let tables: Vec<[u64; 256]> = vars
        .chunks(8)
        .map(|chunk| {
            let mut t = [0u64; 256];
            for (byte, slot) in t.iter_mut().enumerate() {
                *slot = chunk
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| byte >> i & 1 == 1)
                    .fold(0, |acc, (_, &v)| acc | 1 << v);
            }
            t
        })
        .collect();
    let scatter = |local: u64| {
        tables.iter().enumerate().fold(0u64, |acc, (c, t)| {
            acc | t[(local >> (8 * c) & 0xff) as usize]
        })
    };
    (0..1u64 << vars.len())
        .map(scatter)
        .filter(|&z| nogoods.iter().all(|&(mask, bad)| z & mask != bad))
        .collect()
}
