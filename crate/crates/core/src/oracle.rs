//! Problem definitions and the budgeted, cached evaluation oracle.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_lattice_point, Bounds, VariablePartition};

/// Objective value and constraint values `g(x)` (feasible iff `g <= 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub f: f64,
    pub g: Vec<f64>,
}

/// A black-box mapping `x -> (f(x), g(x))`.
///
/// One instance is owned by one solver run, so `&mut self` is allowed.
pub trait Oracle: Send {
    fn call(&mut self, x: &[f64]) -> Result<Response>;
}

struct FnOracle<F>(F);

impl<F> Oracle for FnOracle<F>
where
    F: FnMut(&[f64]) -> Response + Send,
{
    fn call(&mut self, x: &[f64]) -> Result<Response> {
        Ok((self.0)(x))
    }
}

/// A bound-constrained (m = 0) or nonlinearly constrained problem.
pub struct ProblemInstance {
    pub name: String,
    pub partition: VariablePartition,
    pub bounds: Bounds,
    pub start: Vec<f64>,
    num_constraints: usize,
    oracle: Box<dyn Oracle>,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("partition", &self.partition)
            .field("bounds", &self.bounds)
            .field("start", &self.start)
            .field("num_constraints", &self.num_constraints)
            .finish_non_exhaustive()
    }
}

impl ProblemInstance {
    pub fn new(
        name: impl Into<String>,
        partition: VariablePartition,
        bounds: Bounds,
        start: Vec<f64>,
        num_constraints: usize,
        oracle: Box<dyn Oracle>,
    ) -> Result<Self> {
        if bounds.len() != partition.n() {
            return Err(Error::InvalidProblem(
                "bounds and partition disagree on n".into(),
            ));
        }
        check_lattice_point(&start, &partition, &bounds)
            .map_err(|e| Error::InvalidProblem(format!("starting point not in X ∩ Z: {e}")))?;
        Ok(Self {
            name: name.into(),
            partition,
            bounds,
            start,
            num_constraints,
            oracle,
        })
    }

    /// Wraps a closure returning `(f, g)`.
    pub fn from_fn<F>(
        name: impl Into<String>,
        partition: VariablePartition,
        bounds: Bounds,
        start: Vec<f64>,
        num_constraints: usize,
        f: F,
    ) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Response + Send + 'static,
    {
        Self::new(
            name,
            partition,
            bounds,
            start,
            num_constraints,
            Box::new(FnOracle(f)),
        )
    }

    /// Bound-constrained problem from a scalar objective.
    pub fn from_objective<F>(
        name: impl Into<String>,
        partition: VariablePartition,
        bounds: Bounds,
        start: Vec<f64>,
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(&[f64]) -> f64 + Send + 'static,
    {
        Self::from_fn(name, partition, bounds, start, 0, move |x| Response {
            f: f(x),
            g: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    pub fn num_constraints(&self) -> usize {
        self.num_constraints
    }

    /// Direct oracle call, bypassing budget and cache.
    pub fn call(&mut self, x: &[f64]) -> Result<Response> {
        self.oracle.call(x)
    }
}

/// `Σ_i max{0, g_i}`.
pub fn violation(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |acc, &v| acc + v.max(0.0))
}

/// One forwarded oracle call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// 1-based position in the trace, equal to the evaluation count after the call.
    pub index: usize,
    pub point: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
    pub violation: f64,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }
}

fn point_key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Budget-enforcing, caching front end to a [`ProblemInstance`].
///
/// Cache hits are free; every forwarded call is appended to the trace.
#[derive(Debug)]
pub struct BudgetedOracle {
    problem: ProblemInstance,
    max_evaluations: usize,
    cache: HashMap<Vec<u64>, usize>,
    trace: Vec<Evaluation>,
    best_feasible: Option<usize>,
}

impl BudgetedOracle {
    pub fn new(problem: ProblemInstance, max_evaluations: usize) -> Self {
        Self {
            problem,
            max_evaluations,
            cache: HashMap::new(),
            trace: Vec::new(),
            best_feasible: None,
        }
    }

    pub fn problem(&self) -> &ProblemInstance {
        &self.problem
    }

    pub fn into_problem(self) -> ProblemInstance {
        self.problem
    }

    pub fn max_evaluations(&self) -> usize {
        self.max_evaluations
    }

    pub fn eval_count(&self) -> usize {
        self.trace.len()
    }

    pub fn remaining(&self) -> usize {
        self.max_evaluations - self.trace.len()
    }

    pub fn trace(&self) -> &[Evaluation] {
        &self.trace
    }

    pub fn into_trace(self) -> Vec<Evaluation> {
        self.trace
    }

    /// Feasible evaluation with the lowest `f` so far (first one on ties).
    pub fn best_feasible(&self) -> Option<&Evaluation> {
        self.best_feasible.map(|i| &self.trace[i])
    }

    pub fn lookup(&self, x: &[f64]) -> Option<&Evaluation> {
        self.cache.get(&point_key(x)).map(|&i| &self.trace[i])
    }

    pub fn evaluate(&mut self, x: &[f64]) -> Result<&Evaluation> {
        let key = point_key(x);
        if let Some(&i) = self.cache.get(&key) {
            return Ok(&self.trace[i]);
        }
        check_lattice_point(x, &self.problem.partition, &self.problem.bounds)?;
        if self.trace.len() >= self.max_evaluations {
            return Err(Error::BudgetExhausted(self.max_evaluations));
        }
        let Response { f, g } = self.problem.oracle.call(x)?;
        if !f.is_finite() {
            return Err(Error::Protocol(format!("objective returned {f} at {x:?}")));
        }
        if g.len() != self.problem.num_constraints {
            return Err(Error::Protocol(format!(
                "expected {} constraint values, got {}",
                self.problem.num_constraints,
                g.len()
            )));
        }
        if let Some(bad) = g.iter().find(|v| !v.is_finite()) {
            return Err(Error::Protocol(format!(
                "constraint returned {bad} at {x:?}"
            )));
        }
        let idx = self.trace.len();
        let evaluation = Evaluation {
            index: idx + 1,
            point: x.to_vec(),
            f,
            violation: violation(&g),
            g,
        };
        if evaluation.is_feasible()
            && self
                .best_feasible
                .is_none_or(|b| evaluation.f < self.trace[b].f)
        {
            self.best_feasible = Some(idx);
        }
        self.trace.push(evaluation);
        self.cache.insert(key, idx);
        Ok(&self.trace[idx])
    }
}
