//! The mixed-integer linesearch solver and its exact-penalty wrapper.
//!
//! Each outer iteration runs three phases:
//!
//! 1. continuous exploration: a coordinate sweep over `±e_i`, `i ∈ I^c`, with
//!    per-coordinate tentative steps, followed (once every coordinate step has
//!    shrunk below `dense_trigger` times its initial value) by a projected
//!    search along the next direction of a dense sequence;
//! 2. discrete exploration: discrete searches along the stored primitive
//!    directions until one succeeds; if all fail at unit tentative step the
//!    sufficient-decrease parameter `xi` is reduced and the direction set is
//!    enlarged;
//! 3. the iterate moves to the last accepted point.
//!
//! The run stops when the evaluation budget is spent, when the optional
//! tolerances are met, or after `stall_limit` consecutive iterations that
//! issue no new oracle call (every step has collapsed below floating-point
//! resolution and every neighbour is cached).

use serde::{Deserialize, Serialize};

use crate::directions::{DenseSequence, DirectionSet};
use crate::error::{Error, Result};
use crate::linesearch::{
    coordinate_search, discrete_search, projected_continuous_search, LineSearchParams,
};
use crate::model::Bounds;
use crate::oracle::{BudgetedOracle, Evaluation, ProblemInstance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopTolerances {
    /// Bound on every continuous tentative step.
    pub step: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub line_search: LineSearchParams,
    /// Reduction factor for failed steps and for `xi`.
    pub theta: f64,
    pub xi0: f64,
    pub max_evaluations: usize,
    pub seed: u64,
    /// Dense directions start once every coordinate step is below this
    /// fraction of its initial value.
    pub dense_trigger: f64,
    /// New directions per enlargement; `None` means `2 |I^z|`.
    pub expansion_batch: Option<usize>,
    pub stop: Option<StopTolerances>,
    pub dense_directions: bool,
    pub expand_discrete: bool,
    /// Move to the best merit point seen instead of the last accepted one.
    pub jump_to_best: bool,
    pub stall_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            line_search: LineSearchParams::default(),
            theta: 0.5,
            xi0: 1.0,
            max_evaluations: 5000,
            seed: 0,
            dense_trigger: 1e-3,
            expansion_batch: None,
            stop: None,
            dense_directions: true,
            expand_discrete: true,
            jump_to_best: false,
            stall_limit: 100,
        }
    }
}

impl SolverConfig {
    /// Variant restricted to coordinate directions on both kinds of variables.
    pub fn coordinate_only() -> Self {
        Self {
            dense_directions: false,
            expand_discrete: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.line_search.validate()?;
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config(format!(
                "theta must lie in (0,1), got {}",
                self.theta
            )));
        }
        if !(self.xi0 > 0.0) {
            return Err(Error::Config(format!(
                "xi0 must be positive, got {}",
                self.xi0
            )));
        }
        if self.max_evaluations == 0 {
            return Err(Error::Config("max_evaluations must be at least 1".into()));
        }
        if !(self.dense_trigger > 0.0) {
            return Err(Error::Config("dense_trigger must be positive".into()));
        }
        if self.expansion_batch == Some(0) {
            return Err(Error::Config("expansion_batch must be at least 1".into()));
        }
        if self.stall_limit == 0 {
            return Err(Error::Config("stall_limit must be at least 1".into()));
        }
        Ok(())
    }
}

/// Geometric reduction of the penalty parameter while the iterate stays
/// infeasible after the discrete phase has converged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonReduction {
    pub factor: f64,
    /// Reduce only once `xi` has fallen to this level.
    pub xi_trigger: f64,
    pub feasibility_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub epsilon: f64,
    pub reduction: Option<EpsilonReduction>,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            reduction: None,
        }
    }
}

impl PenaltyConfig {
    pub fn with_reduction() -> Self {
        Self {
            epsilon: 0.1,
            reduction: Some(EpsilonReduction {
                factor: 0.1,
                xi_trigger: 1e-6,
                feasibility_tol: 1e-6,
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if let Some(r) = self.reduction {
            if !(r.factor > 0.0 && r.factor < 1.0) {
                return Err(Error::Config(
                    "epsilon reduction factor must lie in (0,1)".into(),
                ));
            }
        }
        Ok(())
    }
}

/// `f + (1/epsilon) Σ max{0, g_i}`; exactly `f` when `g <= 0`.
pub fn penalty_value(f: f64, g: &[f64], epsilon: f64) -> f64 {
    let v = crate::oracle::violation(g);
    if v == 0.0 {
        f
    } else {
        f + v / epsilon
    }
}

fn merit_of(e: &Evaluation, epsilon: Option<f64>) -> f64 {
    match epsilon {
        None => e.f,
        Some(eps) => penalty_value(e.f, &e.g, eps),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    BudgetExhausted,
    TolerancesMet,
    Stalled,
}

/// Snapshot taken after each outer iteration (row `k = 0` is the start).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub k: usize,
    /// `f(x_k)`, or `P(x_k; epsilon)` in a penalty run.
    pub merit: f64,
    pub f: f64,
    pub violation: f64,
    pub xi: f64,
    pub alpha_dense: f64,
    pub max_coord_step: f64,
    pub directions: usize,
    pub evaluations: usize,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incumbent {
    pub point: Vec<f64>,
    pub f: f64,
    pub violation: f64,
    pub merit: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub problem: String,
    pub config: SolverConfig,
    pub penalty: Option<PenaltyConfig>,
    pub termination: Termination,
    /// Best feasible point when one exists, else the best merit point.
    pub best_point: Vec<f64>,
    pub best_f: f64,
    pub best_violation: f64,
    pub best_feasible: Option<Incumbent>,
    pub best_merit: Incumbent,
    pub final_point: Vec<f64>,
    pub final_merit: f64,
    pub iterations: usize,
    pub evaluations_used: usize,
    pub xi_final: f64,
    pub alpha_dense_final: f64,
    pub coord_steps_final: Vec<f64>,
    pub epsilon_final: Option<f64>,
    pub rows: Vec<IterationRow>,
    /// Final discrete directions with their tentative steps.
    pub final_directions: Vec<(Vec<i64>, u64)>,
    #[serde(skip)]
    pub trace: Vec<Evaluation>,
}

impl SolveReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub k: usize,
    pub x: Vec<f64>,
    pub merit: f64,
    pub alpha_dense: f64,
    pub coord_steps: Vec<f64>,
    pub coord_initial: Vec<f64>,
    pub xi: f64,
    pub dirset: DirectionSet,
    pub dense: Option<DenseSequence>,
}

impl SolverState {
    fn max_coord_step(&self) -> f64 {
        self.coord_steps.iter().copied().fold(0.0, f64::max)
    }

    fn coordinates_small(&self, trigger: f64) -> bool {
        self.coord_steps
            .iter()
            .zip(&self.coord_initial)
            .all(|(s, s0)| *s <= trigger * s0)
    }
}

struct Run<'a> {
    cfg: &'a SolverConfig,
    penalty: Option<PenaltyConfig>,
    epsilon: Option<f64>,
    bounds: Bounds,
    continuous: Vec<usize>,
    batch: usize,
    oracle: BudgetedOracle,
    state: SolverState,
    rows: Vec<IterationRow>,
}

impl<'a> Run<'a> {
    fn new(
        problem: ProblemInstance,
        cfg: &'a SolverConfig,
        penalty: Option<PenaltyConfig>,
    ) -> Result<Self> {
        cfg.validate()?;
        if let Some(p) = &penalty {
            p.validate()?;
        }
        let epsilon = penalty.map(|p| p.epsilon);
        let bounds = problem.bounds.clone();
        let partition = problem.partition.clone();
        let start = problem.start.clone();
        let continuous = partition.continuous().to_vec();
        let batch = cfg
            .expansion_batch
            .unwrap_or(2 * partition.integer().len())
            .max(1);

        let mut oracle = BudgetedOracle::new(problem, cfg.max_evaluations);
        let merit = merit_of(oracle.evaluate(&start)?, epsilon);

        let coord_initial: Vec<f64> = continuous.iter().map(|&i| bounds.width(i) / 2.0).collect();
        let alpha_dense = if coord_initial.is_empty() {
            0.0
        } else {
            coord_initial.iter().sum::<f64>() / coord_initial.len() as f64
        };
        let dirset = DirectionSet::initial(&start, &partition, &bounds, cfg.seed ^ 0x5bd1_e995)?;
        let dense = if cfg.dense_directions && !continuous.is_empty() {
            Some(DenseSequence::new(&partition, cfg.seed)?)
        } else {
            None
        };
        let state = SolverState {
            k: 0,
            x: start,
            merit,
            alpha_dense,
            coord_steps: coord_initial.clone(),
            coord_initial,
            xi: cfg.xi0,
            dirset,
            dense,
        };
        let mut run = Self {
            cfg,
            penalty,
            epsilon,
            bounds,
            continuous,
            batch,
            oracle,
            state,
            rows: Vec::new(),
        };
        run.record_row();
        Ok(run)
    }

    fn record_row(&mut self) {
        let st = &self.state;
        let e = self
            .oracle
            .lookup(&st.x)
            .expect("iterates are always evaluated");
        self.rows.push(IterationRow {
            k: st.k,
            merit: st.merit,
            f: e.f,
            violation: e.violation,
            xi: st.xi,
            alpha_dense: st.alpha_dense,
            max_coord_step: st.max_coord_step(),
            directions: st.dirset.len(),
            evaluations: self.oracle.eval_count(),
            epsilon: self.epsilon,
        });
    }

    fn iterate(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let eps = self.epsilon;
        let theta = cfg.theta;
        let bounds = &self.bounds;
        let oracle = &mut self.oracle;
        let st = &mut self.state;
        let mut merit = |x: &[f64]| oracle.evaluate(x).map(|e| merit_of(e, eps));

        // Phase 1: coordinate sweep, then a dense direction once steps are small
        for (j, &i) in self.continuous.iter().enumerate() {
            let r = coordinate_search(
                st.coord_steps[j],
                &st.x,
                st.merit,
                i,
                bounds,
                &cfg.line_search,
                &mut merit,
            )?;
            match r.accepted {
                None => st.coord_steps[j] *= theta,
                Some((y, fy)) => {
                    st.coord_steps[j] = r.alpha;
                    st.x = y;
                    st.merit = fy;
                }
            }
        }
        let dense_due = st.coordinates_small(cfg.dense_trigger);
        if let Some(seq) = st.dense.as_mut().filter(|_| dense_due) {
            let s = seq.next_direction()?;
            let r = projected_continuous_search(
                st.alpha_dense,
                &st.x,
                st.merit,
                &s,
                bounds,
                &cfg.line_search,
                &mut merit,
            )?;
            match r.accepted {
                None => st.alpha_dense *= theta,
                Some((y, fy)) => {
                    st.alpha_dense = r.alpha;
                    st.x = y;
                    st.merit = fy;
                }
            }
        }

        // Phase 2.A: discrete directions in insertion order until one succeeds
        let mut moved = false;
        let mut all_unit = true;
        for k in 0..st.dirset.len() {
            let step = st.dirset.step(k);
            let r = discrete_search(
                step,
                &st.x,
                st.merit,
                st.dirset.direction(k),
                st.xi,
                bounds,
                &mut merit,
            )?;
            match r.accepted {
                None => {
                    all_unit &= step == 1;
                    st.dirset.set_step(k, (step / 2).max(1));
                }
                Some((y, fy)) => {
                    st.dirset.set_step(k, r.alpha);
                    st.x = y;
                    st.merit = fy;
                    moved = true;
                    break;
                }
            }
        }

        // Phase 2.B: shrink xi and enlarge the direction set
        if !moved && all_unit {
            st.xi *= theta;
            if cfg.expand_discrete {
                match st.dirset.expand(&st.x, bounds, self.batch) {
                    Ok(_) | Err(Error::SetComplete) | Err(Error::EnumerationLimit) => {}
                    Err(e) => return Err(e),
                }
            }
        }

        // Phase 3
        if cfg.jump_to_best {
            if let Some((p, v)) = best_merit_entry(oracle.trace(), eps) {
                if v < st.merit {
                    st.x = p;
                    st.merit = v;
                }
            }
        }
        st.k += 1;
        Ok(())
    }

    fn maybe_reduce_epsilon(&mut self, unchanged: bool) {
        let (Some(pc), Some(eps)) = (self.penalty, self.epsilon) else {
            return;
        };
        let Some(red) = pc.reduction else {
            return;
        };
        let st = &self.state;
        let e = self.oracle.lookup(&st.x).expect("iterate cached");
        if unchanged && st.xi <= red.xi_trigger && e.violation > red.feasibility_tol {
            let eps = eps * red.factor;
            self.epsilon = Some(eps);
            self.state.merit = penalty_value(e.f, &e.g, eps);
        }
    }

    fn tolerances_met(&self) -> bool {
        let Some(tol) = self.cfg.stop else {
            return false;
        };
        let st = &self.state;
        st.max_coord_step() <= tol.step
            && (st.dense.is_none() || st.alpha_dense <= tol.step)
            && st.xi <= tol.xi
    }

    fn run(mut self) -> Result<SolveReport> {
        let mut stalled = 0;
        let termination = loop {
            let evals_before = self.oracle.eval_count();
            let x_before = self.state.x.clone();
            match self.iterate() {
                Ok(()) => {}
                Err(Error::BudgetExhausted(_)) => {
                    self.state.k += 1;
                    self.record_row();
                    break Termination::BudgetExhausted;
                }
                Err(e) => return Err(e),
            }
            self.maybe_reduce_epsilon(x_before == self.state.x);
            self.record_row();
            if self.tolerances_met() {
                break Termination::TolerancesMet;
            }
            if self.oracle.eval_count() == evals_before {
                stalled += 1;
                if stalled >= self.cfg.stall_limit {
                    break Termination::Stalled;
                }
            } else {
                stalled = 0;
            }
            if self.oracle.remaining() == 0 {
                break Termination::BudgetExhausted;
            }
        };
        Ok(self.into_report(termination))
    }

    fn into_report(self, termination: Termination) -> SolveReport {
        let eps = self.epsilon;
        let incumbent = |e: &Evaluation| Incumbent {
            point: e.point.clone(),
            f: e.f,
            violation: e.violation,
            merit: merit_of(e, eps),
        };
        let best_feasible = self.oracle.best_feasible().map(incumbent);
        let best_merit = self
            .oracle
            .trace()
            .iter()
            .fold(None::<&Evaluation>, |best, e| match best {
                Some(b) if merit_of(b, eps) <= merit_of(e, eps) => Some(b),
                _ => Some(e),
            })
            .map(incumbent)
            .expect("the starting point is always evaluated");
        let best = best_feasible.as_ref().unwrap_or(&best_merit);
        let st = self.state;
        SolveReport {
            problem: self.oracle.problem().name.clone(),
            config: self.cfg.clone(),
            penalty: self.penalty,
            termination,
            best_point: best.point.clone(),
            best_f: best.f,
            best_violation: best.violation,
            best_feasible: best_feasible.clone(),
            best_merit: best_merit.clone(),
            final_point: st.x,
            final_merit: st.merit,
            iterations: st.k,
            evaluations_used: self.oracle.eval_count(),
            xi_final: st.xi,
            alpha_dense_final: st.alpha_dense,
            coord_steps_final: st.coord_steps,
            epsilon_final: eps,
            rows: self.rows,
            final_directions: st
                .dirset
                .directions()
                .iter()
                .zip(st.dirset.steps())
                .map(|(d, &s)| (d.as_slice().to_vec(), s))
                .collect(),
            trace: self.oracle.into_trace(),
        }
    }
}

fn best_merit_entry(trace: &[Evaluation], eps: Option<f64>) -> Option<(Vec<f64>, f64)> {
    trace
        .iter()
        .map(|e| (e, merit_of(e, eps)))
        .fold(None::<(&Evaluation, f64)>, |best, (e, v)| match best {
            Some((_, bv)) if bv <= v => best,
            _ => Some((e, v)),
        })
        .map(|(e, v)| (e.point.clone(), v))
}

/// Minimizes `f` over `X ∩ Z` for a problem without nonlinear constraints.
pub fn solve_bound_constrained(
    problem: ProblemInstance,
    config: &SolverConfig,
) -> Result<SolveReport> {
    if problem.num_constraints() > 0 {
        return Err(Error::Config(format!(
            "problem `{}` has {} nonlinear constraints; use solve_constrained",
            problem.name,
            problem.num_constraints()
        )));
    }
    Run::new(problem, config, None)?.run()
}

/// Minimizes the exact penalty `P(x; epsilon)` over `X ∩ Z`; both searches
/// use `P` as merit.
pub fn solve_constrained(
    problem: ProblemInstance,
    config: &SolverConfig,
    penalty: &PenaltyConfig,
) -> Result<SolveReport> {
    Run::new(problem, config, Some(*penalty))?.run()
}

/// Dispatches on the number of constraints.
pub fn solve(
    problem: ProblemInstance,
    config: &SolverConfig,
    penalty: &PenaltyConfig,
) -> Result<SolveReport> {
    if problem.num_constraints() == 0 {
        solve_bound_constrained(problem, config)
    } else {
        solve_constrained(problem, config, penalty)
    }
}
