//! Variable partition and box bounds of a mixed-integer problem.
//!
//! Points are plain `f64` slices of length `n`. Integer variables are stored
//! as reals with zero fractional part, so one projection and one oracle
//! interface cover both kinds of variables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Split of the indices `0..n` into continuous and integer variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariablePartition {
    n: usize,
    continuous: Vec<usize>,
    integer: Vec<usize>,
}

impl VariablePartition {
    /// Builds a partition from the set of integer indices; every other index
    /// in `0..n` is continuous.
    pub fn new(n: usize, integer_indices: &[usize]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidProblem("problem has no variables".into()));
        }
        let mut is_integer = vec![false; n];
        for &i in integer_indices {
            if i >= n {
                return Err(Error::InvalidProblem(format!(
                    "integer index {i} out of range for n = {n}"
                )));
            }
            if is_integer[i] {
                return Err(Error::InvalidProblem(format!(
                    "duplicate integer index {i}"
                )));
            }
            is_integer[i] = true;
        }
        let continuous = (0..n).filter(|&i| !is_integer[i]).collect();
        let integer = (0..n).filter(|&i| is_integer[i]).collect();
        Ok(Self {
            n,
            continuous,
            integer,
        })
    }

    /// First `n_c` variables continuous, the following `n_z` integer.
    pub fn split(n_c: usize, n_z: usize) -> Result<Self> {
        let integer: Vec<usize> = (n_c..n_c + n_z).collect();
        Self::new(n_c + n_z, &integer)
    }

    pub fn all_continuous(n: usize) -> Result<Self> {
        Self::new(n, &[])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn continuous(&self) -> &[usize] {
        &self.continuous
    }

    pub fn integer(&self) -> &[usize] {
        &self.integer
    }

    pub fn is_integer(&self, i: usize) -> bool {
        self.integer.binary_search(&i).is_ok()
    }
}

/// Box `l <= x <= u` with finite bounds, `l < u`, and integral bounds on the
/// integer variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, partition: &VariablePartition) -> Result<Self> {
        let n = partition.n();
        if lower.len() != n || upper.len() != n {
            return Err(Error::InvalidProblem(format!(
                "bounds have lengths {} and {}, expected {n}",
                lower.len(),
                upper.len()
            )));
        }
        for i in 0..n {
            let (l, u) = (lower[i], upper[i]);
            if !l.is_finite() || !u.is_finite() {
                return Err(Error::InvalidProblem(format!("bound {i} is not finite")));
            }
            if l >= u {
                return Err(Error::InvalidProblem(format!(
                    "bound {i}: lower {l} must be strictly below upper {u}"
                )));
            }
        }
        for &i in partition.integer() {
            if lower[i].fract() != 0.0 || upper[i].fract() != 0.0 {
                return Err(Error::InvalidProblem(format!(
                    "integer variable {i} has non-integral bounds [{}, {}]",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.len()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&l, &u))| l <= v && v <= u)
    }

    /// Componentwise clamp `max{l, min{u, x}}`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        self.project_in_place(&mut out);
        out
    }

    pub fn project_in_place(&self, x: &mut [f64]) {
        for (v, (&l, &u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = l.max(u.min(*v));
        }
    }
}

/// Projection of `x` onto the box.
pub fn project_box(x: &[f64], bounds: &Bounds) -> Vec<f64> {
    bounds.project(x)
}

/// Checks `x ∈ X ∩ Z` and explains the first violation found.
pub fn check_lattice_point(
    x: &[f64],
    partition: &VariablePartition,
    bounds: &Bounds,
) -> Result<()> {
    if x.len() != partition.n() {
        return Err(Error::InfeasibleRequest(format!(
            "point has length {}, expected {}",
            x.len(),
            partition.n()
        )));
    }
    for (i, &v) in x.iter().enumerate() {
        if !(bounds.lower[i] <= v && v <= bounds.upper[i]) {
            return Err(Error::InfeasibleRequest(format!(
                "x[{i}] = {v} outside [{}, {}]",
                bounds.lower[i], bounds.upper[i]
            )));
        }
    }
    for &i in partition.integer() {
        if x[i].fract() != 0.0 {
            return Err(Error::InfeasibleRequest(format!(
                "integer variable x[{i}] = {} is not integral",
                x[i]
            )));
        }
    }
    Ok(())
}
