//! Benchmark harness: solver runs over a problem suite, the relative
//! convergence test, and data and performance profiles.
//!
//! A bundle directory holds `traces.csv`, `performance.csv`, `data.csv` and
//! `manifest.json`. Profiles are a pure function of the traces and the
//! manifest, so `recompute_profiles` reproduces the CSV files byte for byte.

use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::Evaluation;
use crate::problems::{build_problem, ProblemSpec};
use crate::solver::{solve, PenaltyConfig, SolverConfig, Termination};

pub const DEFAULT_TAUS: [f64; 3] = [1e-1, 1e-3, 1e-5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub eval_index: usize,
    pub f: f64,
    pub violation: f64,
}

impl TraceEntry {
    /// Objective value used for profiling: `+∞` at infeasible points.
    pub fn profile_value(&self) -> f64 {
        if self.violation > 0.0 {
            f64::INFINITY
        } else {
            self.f
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub problem: String,
    pub solver: String,
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn from_evaluations(problem: &str, solver: &str, evaluations: &[Evaluation]) -> Self {
        Self {
            problem: problem.to_string(),
            solver: solver.to_string(),
            entries: evaluations
                .iter()
                .map(|e| TraceEntry {
                    eval_index: e.index,
                    f: e.f,
                    violation: e.violation,
                })
                .collect(),
        }
    }

    fn feasible_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries
            .iter()
            .map(TraceEntry::profile_value)
            .filter(|v| v.is_finite())
    }
}

/// First evaluation index whose feasible value passes
/// `f <= f_L + tau (f̂_0 - f_L)`.
pub fn solved_at(trace: &Trace, f_low: f64, f_hat0: f64, tau: f64) -> Option<usize> {
    let threshold = f_low + tau * (f_hat0 - f_low);
    trace
        .entries
        .iter()
        .find(|e| e.profile_value() <= threshold)
        .map(|e| e.eval_index)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    pub name: String,
    pub n: usize,
    pub constrained: bool,
}

/// `t[p][s]`: evaluations solver `s` needed on problem `p`, if it succeeded.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveTable {
    pub problems: Vec<ProblemMeta>,
    pub solvers: Vec<String>,
    pub t: Vec<Vec<Option<usize>>>,
}

/// Reference values `(f_L, f̂_0)` for one problem, or `None` when no trace
/// contains a feasible point.
pub fn reference_values(meta: &ProblemMeta, traces: &[&Trace]) -> Option<(f64, f64)> {
    let f_low = traces
        .iter()
        .flat_map(|t| t.feasible_values())
        .fold(f64::INFINITY, f64::min);
    if !f_low.is_finite() {
        return None;
    }
    let f_hat0 = if meta.constrained {
        traces
            .iter()
            .flat_map(|t| t.feasible_values())
            .fold(f64::NEG_INFINITY, f64::max)
    } else {
        // every solver evaluates the common starting point first
        traces
            .iter()
            .find_map(|t| t.entries.first().filter(|e| e.eval_index == 1).map(|e| e.f))?
    };
    Some((f_low, f_hat0))
}

/// Builds the solve table for one tolerance. Problems without any feasible
/// point are dropped and returned separately.
pub fn convergence_table(
    problems: &[ProblemMeta],
    solvers: &[String],
    traces: &[Trace],
    tau: f64,
) -> (SolveTable, Vec<String>) {
    let empty = |p: &str, s: &str| Trace {
        problem: p.to_string(),
        solver: s.to_string(),
        entries: Vec::new(),
    };
    let mut kept = Vec::new();
    let mut t = Vec::new();
    let mut excluded = Vec::new();
    for meta in problems {
        let owned: Vec<Trace> = solvers
            .iter()
            .map(|s| {
                traces
                    .iter()
                    .find(|tr| tr.problem == meta.name && &tr.solver == s)
                    .cloned()
                    .unwrap_or_else(|| empty(&meta.name, s))
            })
            .collect();
        let refs: Vec<&Trace> = owned.iter().collect();
        match reference_values(meta, &refs) {
            None => excluded.push(meta.name.clone()),
            Some((f_low, f_hat0)) => {
                t.push(
                    owned
                        .iter()
                        .map(|tr| solved_at(tr, f_low, f_hat0, tau))
                        .collect(),
                );
                kept.push(meta.clone());
            }
        }
    }
    (
        SolveTable {
            problems: kept,
            solvers: solvers.to_vec(),
            t,
        },
        excluded,
    )
}

/// Step curve: `ordinate[k] = counts[k] / n_problems` holds on
/// `[abscissae[k], abscissae[k+1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub solver: String,
    pub abscissae: Vec<f64>,
    pub counts: Vec<usize>,
    pub n_problems: usize,
    pub ordinates: Vec<f64>,
}

impl ProfileCurve {
    fn from_counts(
        solver: &str,
        abscissae: Vec<f64>,
        counts: Vec<usize>,
        n_problems: usize,
    ) -> Self {
        let ordinates = counts
            .iter()
            .map(|&c| {
                if n_problems == 0 {
                    0.0
                } else {
                    c as f64 / n_problems as f64
                }
            })
            .collect();
        Self {
            solver: solver.to_string(),
            abscissae,
            counts,
            n_problems,
            ordinates,
        }
    }
}

fn ratios(table: &SolveTable) -> Vec<Vec<Option<f64>>> {
    table
        .t
        .iter()
        .map(|row| {
            let best = row.iter().flatten().min().copied();
            row.iter()
                .map(|t| match (t, best) {
                    (Some(t), Some(b)) => Some(*t as f64 / b as f64),
                    _ => None,
                })
                .collect()
        })
        .collect()
}

/// `ρ_s(α)`: fraction of problems with `t_{p,s} / min_s' t_{p,s'} <= α`,
/// sampled at 1 and at every finite ratio.
pub fn performance_profile(table: &SolveTable) -> Vec<ProfileCurve> {
    let r = ratios(table);
    let mut grid: Vec<f64> = r.iter().flatten().flatten().copied().collect();
    grid.push(1.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let n_p = table.problems.len();
    table
        .solvers
        .iter()
        .enumerate()
        .map(|(s, name)| {
            let counts = grid
                .iter()
                .map(|&a| {
                    r.iter()
                        .filter(|row| row[s].is_some_and(|v| v <= a))
                        .count()
                })
                .collect();
            ProfileCurve::from_counts(name, grid.clone(), counts, n_p)
        })
        .collect()
}

/// `d_s(κ)`: fraction of problems with `t_{p,s} <= κ (n_p + 1)`, for
/// `κ = 0, 1, …, kappa_max`.
pub fn data_profile(table: &SolveTable, kappa_max: usize) -> Vec<ProfileCurve> {
    let grid: Vec<usize> = (0..=kappa_max).collect();
    let n_p = table.problems.len();
    table
        .solvers
        .iter()
        .enumerate()
        .map(|(s, name)| {
            let counts = grid
                .iter()
                .map(|&k| {
                    table
                        .t
                        .iter()
                        .zip(&table.problems)
                        .filter(|(row, meta)| row[s].is_some_and(|t| t <= k * (meta.n + 1)))
                        .count()
                })
                .collect();
            ProfileCurve::from_counts(name, grid.iter().map(|&k| k as f64).collect(), counts, n_p)
        })
        .collect()
}

/// `⌈budget / min_p (n_p + 1)⌉`.
pub fn kappa_limit(problems: &[ProblemMeta], budget: usize) -> usize {
    let min = problems.iter().map(|p| p.n + 1).min().unwrap_or(1);
    budget.div_ceil(min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    pub tau: f64,
    pub curves: Vec<ProfileCurve>,
    pub excluded: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profiles {
    pub performance: Vec<CurveSet>,
    pub data: Vec<CurveSet>,
}

pub fn compute_profiles(
    problems: &[ProblemMeta],
    solvers: &[String],
    traces: &[Trace],
    taus: &[f64],
    budget: usize,
) -> Profiles {
    let kappa_max = kappa_limit(problems, budget);
    let mut performance = Vec::new();
    let mut data = Vec::new();
    for &tau in taus {
        let (table, excluded) = convergence_table(problems, solvers, traces, tau);
        performance.push(CurveSet {
            tau,
            curves: performance_profile(&table),
            excluded: excluded.clone(),
        });
        data.push(CurveSet {
            tau,
            curves: data_profile(&table, kappa_max),
            excluded,
        });
    }
    Profiles { performance, data }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverVariant {
    pub name: String,
    pub config: SolverConfig,
    pub penalty: PenaltyConfig,
}

impl SolverVariant {
    pub fn full() -> Self {
        Self {
            name: "dfndfl".into(),
            config: SolverConfig::default(),
            penalty: PenaltyConfig::default(),
        }
    }

    pub fn coordinate_only() -> Self {
        Self {
            name: "coordinate".into(),
            config: SolverConfig::coordinate_only(),
            penalty: PenaltyConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub problems: Vec<ProblemSpec>,
    pub solvers: Vec<SolverVariant>,
    pub budget: usize,
    pub taus: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub solver: String,
    pub seed: u64,
    pub evaluations: usize,
    pub termination: Option<Termination>,
    /// Set when the run failed; its trace is then empty.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub budget: usize,
    pub taus: Vec<f64>,
    pub solvers: Vec<SolverVariant>,
    pub problems: Vec<ProblemMeta>,
    pub runs: Vec<RunRecord>,
    /// Problems without any feasible point, per tau.
    pub excluded: Vec<(f64, Vec<String>)>,
    pub created_unix: u64,
}

#[derive(Debug, Clone)]
pub struct BenchBundle {
    pub manifest: Manifest,
    pub traces: Vec<Trace>,
    pub profiles: Profiles,
}

fn fnv1a(seed: u64, parts: &[&str]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed;
    for part in parts {
        for b in part.bytes().chain(std::iter::once(0xff)) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Per-run seed from the master seed, the problem, and the solver settings
/// (not its label, so a variant registered twice behaves identically).
pub fn run_seed(master: u64, problem: &str, variant: &SolverVariant) -> u64 {
    let settings =
        serde_json::to_string(&(&variant.config, &variant.penalty)).expect("serializable");
    fnv1a(master, &[problem, &settings])
}

fn run_one(
    spec: &ProblemSpec,
    variant: &SolverVariant,
    budget: usize,
    seed: u64,
) -> (Trace, RunRecord) {
    let name = spec.name();
    let mut cfg = variant.config.clone();
    cfg.max_evaluations = budget;
    cfg.seed = seed;
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        build_problem(spec).and_then(|p| solve(p, &cfg, &variant.penalty))
    }));
    let mut record = RunRecord {
        problem: name.clone(),
        solver: variant.name.clone(),
        seed,
        evaluations: 0,
        termination: None,
        error: None,
    };
    let trace = match outcome {
        Ok(Ok(report)) => {
            record.evaluations = report.evaluations_used;
            record.termination = Some(report.termination);
            Trace::from_evaluations(&name, &variant.name, &report.trace)
        }
        Ok(Err(e)) => {
            record.error = Some(e.to_string());
            Trace::from_evaluations(&name, &variant.name, &[])
        }
        Err(_) => {
            record.error = Some("solver panicked".into());
            Trace::from_evaluations(&name, &variant.name, &[])
        }
    };
    (trace, record)
}

/// Runs every solver on every problem (in parallel) and computes profiles.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchBundle> {
    if cfg.problems.is_empty() {
        return Err(Error::Config("benchmark suite is empty".into()));
    }
    if cfg.solvers.is_empty() {
        return Err(Error::Config("no solvers registered".into()));
    }
    let mut names: Vec<&str> = cfg.solvers.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("solver names must be unique".into()));
    }
    if let Some(t) = cfg.taus.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(Error::Config(format!("tau must lie in (0,1), got {t}")));
    }

    let jobs: Vec<(&ProblemSpec, &SolverVariant)> = cfg
        .problems
        .iter()
        .flat_map(|p| cfg.solvers.iter().map(move |s| (p, s)))
        .collect();
    let results: Vec<(Trace, RunRecord)> = jobs
        .par_iter()
        .map(|(p, s)| run_one(p, s, cfg.budget, run_seed(cfg.seed, &p.name(), s)))
        .collect();
    let (traces, runs): (Vec<Trace>, Vec<RunRecord>) = results.into_iter().unzip();

    let problems: Vec<ProblemMeta> = cfg
        .problems
        .iter()
        .map(|p| ProblemMeta {
            name: p.name(),
            n: p.n(),
            constrained: p.num_constraints() > 0,
        })
        .collect();
    let solvers: Vec<String> = cfg.solvers.iter().map(|s| s.name.clone()).collect();
    let profiles = compute_profiles(&problems, &solvers, &traces, &cfg.taus, cfg.budget);
    let created_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = Manifest {
        seed: cfg.seed,
        budget: cfg.budget,
        taus: cfg.taus.clone(),
        solvers: cfg.solvers.clone(),
        problems,
        runs,
        excluded: profiles
            .performance
            .iter()
            .map(|c| (c.tau, c.excluded.clone()))
            .collect(),
        created_unix,
    };
    Ok(BenchBundle {
        manifest,
        traces,
        profiles,
    })
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_traces_csv<W: Write>(out: W, traces: &[Trace]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["problem", "solver", "eval_index", "f", "violation"])?;
    for t in traces {
        for e in &t.entries {
            w.write_record([
                t.problem.as_str(),
                t.solver.as_str(),
                &e.eval_index.to_string(),
                &num(e.f),
                &num(e.violation),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_curves_csv<W: Write>(out: W, sets: &[CurveSet]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["solver", "tau", "abscissa", "ordinate"])?;
    for set in sets {
        for c in &set.curves {
            for (a, o) in c.abscissae.iter().zip(&c.ordinates) {
                w.write_record([c.solver.as_str(), &num(set.tau), &num(*a), &num(*o)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct TraceRow {
    problem: String,
    solver: String,
    eval_index: usize,
    f: f64,
    violation: f64,
}

pub fn read_traces_csv<R: std::io::Read>(input: R) -> Result<Vec<Trace>> {
    let mut r = csv::Reader::from_reader(input);
    let mut traces: Vec<Trace> = Vec::new();
    for row in r.deserialize() {
        let row: TraceRow = row?;
        let entry = TraceEntry {
            eval_index: row.eval_index,
            f: row.f,
            violation: row.violation,
        };
        match traces.last_mut() {
            Some(t) if t.problem == row.problem && t.solver == row.solver => t.entries.push(entry),
            _ => traces.push(Trace {
                problem: row.problem,
                solver: row.solver,
                entries: vec![entry],
            }),
        }
    }
    Ok(traces)
}

pub fn write_profiles(dir: &Path, profiles: &Profiles) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_curves_csv(
        fs::File::create(dir.join("performance.csv"))?,
        &profiles.performance,
    )?;
    write_curves_csv(fs::File::create(dir.join("data.csv"))?, &profiles.data)?;
    Ok(())
}

pub fn write_bundle(dir: &Path, bundle: &BenchBundle) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_traces_csv(fs::File::create(dir.join("traces.csv"))?, &bundle.traces)?;
    write_profiles(dir, &bundle.profiles)?;
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&bundle.manifest)?,
    )?;
    Ok(())
}

/// Reads `traces.csv` and `manifest.json` from `traces_dir` and writes fresh
/// profile CSVs into `out_dir`.
pub fn recompute_profiles(traces_dir: &Path, out_dir: &Path) -> Result<Profiles> {
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(traces_dir.join("manifest.json"))?)?;
    let traces = read_traces_csv(fs::File::open(traces_dir.join("traces.csv"))?)?;
    let solvers: Vec<String> = manifest.solvers.iter().map(|s| s.name.clone()).collect();
    let profiles = compute_profiles(
        &manifest.problems,
        &solvers,
        &traces,
        &manifest.taus,
        manifest.budget,
    );
    write_profiles(out_dir, &profiles)?;
    Ok(profiles)
}
