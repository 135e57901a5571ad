//! Python bindings: solve shipped test problems or Python callables, and
//! compute benchmark profiles.

use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dfmix::bench::{self, BenchConfig, ProblemMeta, SolveTable, SolverVariant};
use dfmix::directions;
use dfmix::oracle::Response;
use dfmix::problems::{build_problem, list_problems as list_specs, ProblemSpec, Suite};
use dfmix::{
    Bounds, Error, PenaltyConfig, ProblemInstance, SolveReport, SolverConfig, VariablePartition,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_)
        | Error::InvalidProblem(_)
        | Error::UnknownProblem(_)
        | Error::InfeasibleRequest(_)
        | Error::DimensionTooSmall { .. }
        | Error::ZeroVector => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn suite(name: &str) -> PyResult<Suite> {
    match name {
        "bound" => Ok(Suite::Bound),
        "constrained" => Ok(Suite::Constrained),
        _ => Err(PyValueError::new_err(format!("unknown suite `{name}`"))),
    }
}

fn solver_config(budget: usize, seed: u64, variant: &str) -> PyResult<SolverConfig> {
    let base = match variant {
        "full" => SolverConfig::default(),
        "coordinate" => SolverConfig::coordinate_only(),
        _ => {
            return Err(PyValueError::new_err(format!(
                "unknown variant `{variant}`"
            )))
        }
    };
    Ok(SolverConfig {
        max_evaluations: budget,
        seed,
        ..base
    })
}

fn penalty(epsilon: Option<f64>) -> PenaltyConfig {
    let mut p = PenaltyConfig::default();
    if let Some(eps) = epsilon {
        p.epsilon = eps;
    }
    p
}

/// Result of a solver run.
#[pyclass(name = "Report", frozen)]
struct PyReport {
    inner: SolveReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn problem(&self) -> String {
        self.inner.problem.clone()
    }

    #[getter]
    fn best_point(&self) -> Vec<f64> {
        self.inner.best_point.clone()
    }

    #[getter]
    fn best_f(&self) -> f64 {
        self.inner.best_f
    }

    #[getter]
    fn best_violation(&self) -> f64 {
        self.inner.best_violation
    }

    #[getter]
    fn feasible(&self) -> bool {
        self.inner.best_feasible.is_some()
    }

    #[getter]
    fn evaluations_used(&self) -> usize {
        self.inner.evaluations_used
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn termination(&self) -> String {
        format!("{:?}", self.inner.termination)
    }

    #[getter]
    fn xi_final(&self) -> f64 {
        self.inner.xi_final
    }

    #[getter]
    fn alpha_dense_final(&self) -> f64 {
        self.inner.alpha_dense_final
    }

    /// Merit value `f(x_k)` (or the penalty value) per outer iteration.
    #[getter]
    fn merit_history(&self) -> Vec<f64> {
        self.inner.rows.iter().map(|r| r.merit).collect()
    }

    /// `(index, f, violation)` for every oracle call, in call order.
    #[getter]
    fn trace(&self) -> Vec<(usize, f64, f64)> {
        self.inner
            .trace
            .iter()
            .map(|e| (e.index, e.f, e.violation))
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Report(problem={:?}, best_f={:?}, best_violation={:?}, evaluations_used={})",
            self.inner.problem,
            self.inner.best_f,
            self.inner.best_violation,
            self.inner.evaluations_used
        )
    }
}

/// Clamp `x` into `[lower, upper]` componentwise.
#[pyfunction]
fn project_box(x: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Vec<f64>> {
    let n = x.len();
    let p = VariablePartition::all_continuous(n).map_err(to_py)?;
    let b = Bounds::new(lower, upper, &p).map_err(to_py)?;
    Ok(dfmix::project_box(&x, &b))
}

#[pyfunction]
fn is_primitive(v: Vec<i64>) -> PyResult<bool> {
    directions::is_primitive(&v).map_err(to_py)
}

#[pyfunction]
fn penalty_value(f: f64, g: Vec<f64>, epsilon: f64) -> PyResult<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(PyValueError::new_err("epsilon must be positive"));
    }
    Ok(dfmix::penalty_value(f, &g, epsilon))
}

#[pyfunction]
#[pyo3(signature = (suite_name = "bound"))]
fn list_problems(suite_name: &str) -> PyResult<Vec<String>> {
    Ok(list_specs(suite(suite_name)?)
        .iter()
        .map(ProblemSpec::name)
        .collect())
}

/// Objective and constraint values of a named test problem at encoded `x`.
#[pyfunction]
fn evaluate_problem(name: &str, x: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
    let spec = ProblemSpec::parse(name).map_err(to_py)?;
    let mut problem = build_problem(&spec).map_err(to_py)?;
    if x.len() != problem.n() {
        return Err(PyValueError::new_err(format!(
            "expected {} values",
            problem.n()
        )));
    }
    let r = problem.call(&x).map_err(to_py)?;
    Ok((r.f, r.g))
}

/// Solve a shipped test problem such as `"maxq(20)"` or `"maxq(20)/f3"`.
#[pyfunction]
#[pyo3(signature = (problem, budget = 5000, seed = 0, epsilon = None, variant = "full"))]
fn solve(
    py: Python<'_>,
    problem: &str,
    budget: usize,
    seed: u64,
    epsilon: Option<f64>,
    variant: &str,
) -> PyResult<PyReport> {
    let spec = ProblemSpec::parse(problem).map_err(to_py)?;
    let instance = build_problem(&spec).map_err(to_py)?;
    let config = solver_config(budget, seed, variant)?;
    let pen = penalty(epsilon);
    let inner = py
        .detach(move || dfmix::solve(instance, &config, &pen))
        .map_err(to_py)?;
    Ok(PyReport { inner })
}

/// Minimize a Python callable over a mixed box.
///
/// `func(x)` returns either `f` or `(f, g)` with `g` a sequence of
/// `constraints` values, feasible where `g <= 0`.
#[pyfunction]
#[pyo3(signature = (
    func, lower, upper, integer_indices = Vec::new(), start = None, constraints = 0,
    budget = 5000, seed = 0, epsilon = None, variant = "full"
))]
#[allow(clippy::too_many_arguments)]
fn minimize(
    func: Py<PyAny>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    integer_indices: Vec<usize>,
    start: Option<Vec<f64>>,
    constraints: usize,
    budget: usize,
    seed: u64,
    epsilon: Option<f64>,
    variant: &str,
) -> PyResult<PyReport> {
    let n = lower.len();
    let partition = VariablePartition::new(n, &integer_indices).map_err(to_py)?;
    let bounds = Bounds::new(lower, upper, &partition).map_err(to_py)?;
    let start = match start {
        Some(s) => s,
        None => {
            let mut s: Vec<f64> = (0..n)
                .map(|i| {
                    let mid = 0.5 * (bounds.lower()[i] + bounds.upper()[i]);
                    if partition.is_integer(i) {
                        mid.floor()
                    } else {
                        mid
                    }
                })
                .collect();
            bounds.project_in_place(&mut s);
            s
        }
    };
    let failure: Arc<Mutex<Option<PyErr>>> = Arc::new(Mutex::new(None));
    let slot = Arc::clone(&failure);
    let oracle = CallbackOracle { func, slot };
    let instance = ProblemInstance::new(
        "python",
        partition,
        bounds,
        start,
        constraints,
        Box::new(oracle),
    )
    .map_err(to_py)?;
    let config = solver_config(budget, seed, variant)?;
    let result = dfmix::solve(instance, &config, &penalty(epsilon));
    if let Some(err) = failure.lock().expect("callback error slot").take() {
        return Err(err);
    }
    Ok(PyReport {
        inner: result.map_err(to_py)?,
    })
}

struct CallbackOracle {
    func: Py<PyAny>,
    slot: Arc<Mutex<Option<PyErr>>>,
}

impl dfmix::oracle::Oracle for CallbackOracle {
    fn call(&mut self, x: &[f64]) -> dfmix::Result<Response> {
        Python::attach(|py| {
            let out = self.func.call1(py, (x.to_vec(),)).and_then(|v| {
                let v = v.bind(py);
                match v.extract::<f64>() {
                    Ok(f) => Ok(Response { f, g: Vec::new() }),
                    Err(_) => v
                        .extract::<(f64, Vec<f64>)>()
                        .map(|(f, g)| Response { f, g }),
                }
            });
            out.map_err(|e| {
                let msg = e.to_string();
                *self.slot.lock().expect("callback error slot") = Some(e);
                Error::Protocol(format!("python callback failed: {msg}"))
            })
        })
    }
}

fn table_from(t: Vec<Vec<Option<usize>>>, dims: Option<Vec<usize>>) -> PyResult<SolveTable> {
    let n_s = t.first().map_or(0, Vec::len);
    if t.iter().any(|row| row.len() != n_s) {
        return Err(PyValueError::new_err(
            "every row needs one entry per solver",
        ));
    }
    let dims = dims.unwrap_or_else(|| vec![1; t.len()]);
    if dims.len() != t.len() {
        return Err(PyValueError::new_err(
            "one dimension per problem is required",
        ));
    }
    Ok(SolveTable {
        problems: dims
            .iter()
            .enumerate()
            .map(|(i, &n)| ProblemMeta {
                name: format!("p{i}"),
                n,
                constrained: false,
            })
            .collect(),
        solvers: (0..n_s).map(|s| format!("s{s}")).collect(),
        t,
    })
}

type Curve = (Vec<f64>, Vec<f64>);

/// Performance profile from a table `t[p][s]` of evaluations-to-solve
/// (`None` for unsolved). Returns one `(alphas, fractions)` step curve per solver.
#[pyfunction]
fn performance_profile(t: Vec<Vec<Option<usize>>>) -> PyResult<Vec<Curve>> {
    let table = table_from(t, None)?;
    Ok(bench::performance_profile(&table)
        .into_iter()
        .map(|c| (c.abscissae, c.ordinates))
        .collect())
}

/// Data profile for `kappa = 0..=kappa_max` given the problem dimensions.
#[pyfunction]
fn data_profile(
    t: Vec<Vec<Option<usize>>>,
    dims: Vec<usize>,
    kappa_max: usize,
) -> PyResult<Vec<Curve>> {
    let table = table_from(t, Some(dims))?;
    Ok(bench::data_profile(&table, kappa_max)
        .into_iter()
        .map(|c| (c.abscissae, c.ordinates))
        .collect())
}

/// Run the full solver and its coordinate-only variant over a suite and
/// write traces, profiles and a manifest into `out`.
#[pyfunction]
#[pyo3(signature = (out, suite_name = "bound", budget = 5000, taus = vec![1e-1, 1e-3, 1e-5], seed = 0))]
fn run_bench(
    py: Python<'_>,
    out: PathBuf,
    suite_name: &str,
    budget: usize,
    taus: Vec<f64>,
    seed: u64,
) -> PyResult<()> {
    let config = BenchConfig {
        problems: list_specs(suite(suite_name)?),
        solvers: vec![SolverVariant::full(), SolverVariant::coordinate_only()],
        budget,
        taus,
        seed,
    };
    py.detach(move || {
        let bundle = bench::run_benchmark(&config)?;
        bench::write_bundle(&out, &bundle)
    })
    .map_err(to_py)
}

#[pymodule]
#[pyo3(name = "dfmix")]
fn dfmix_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(project_box, m)?)?;
    m.add_function(wrap_pyfunction!(is_primitive, m)?)?;
    m.add_function(wrap_pyfunction!(penalty_value, m)?)?;
    m.add_function(wrap_pyfunction!(list_problems, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_problem, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(performance_profile, m)?)?;
    m.add_function(wrap_pyfunction!(data_profile, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    Ok(())
}
