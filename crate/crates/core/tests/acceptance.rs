//! Acceptance gate. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dfmix::bench::{
    data_profile, performance_profile, run_benchmark, write_bundle, BenchConfig, ProblemMeta,
    SolveTable, SolverVariant, DEFAULT_TAUS,
};
use dfmix::directions::{ContinuousDirection, PrimitiveDirection};
use dfmix::linesearch::{discrete_search, projected_continuous_search, LineSearchParams};
use dfmix::model::check_lattice_point;
use dfmix::oracle::Response;
use dfmix::problems::{build_problem, list_problems, BaseObjective, ProblemSpec, Suite};
use dfmix::{
    solve, solve_constrained, Bounds, PenaltyConfig, ProblemInstance, SolveReport, SolverConfig,
    VariablePartition,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn one_dim(l: f64, u: f64, integer: bool) -> (VariablePartition, Bounds) {
    let p = if integer {
        VariablePartition::split(0, 1).unwrap()
    } else {
        VariablePartition::all_continuous(1).unwrap()
    };
    let b = Bounds::new(vec![l], vec![u], &p).unwrap();
    (p, b)
}

fn linesearch_traces() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let defaults = LineSearchParams::default();

    // ‖x‖² at its minimizer: both sides fail
    let p = VariablePartition::all_continuous(2).unwrap();
    let b = Bounds::new(vec![-5.0; 2], vec![5.0; 2], &p).unwrap();
    let e1 = ContinuousDirection::coordinate(2, 0, 1.0);
    let mut f = |x: &[f64]| Ok(x.iter().map(|v| v * v).sum::<f64>());
    let r = projected_continuous_search(1.0, &[0.0, 0.0], 0.0, &e1, &b, &defaults, &mut f).unwrap();
    if !(r.alpha == 0.0 && r.direction == e1) {
        failures.push(format!("minimizer: alpha={} p={:?}", r.alpha, r.direction));
    }

    // (x-3)² from 0: accepts 1, 2, 4 and rejects 8
    let (_, b) = one_dim(0.0, 10.0, false);
    let e1 = ContinuousDirection::coordinate(1, 0, 1.0);
    let mut f = |x: &[f64]| Ok((x[0] - 3.0).powi(2));
    let r = projected_continuous_search(1.0, &[0.0], 9.0, &e1, &b, &defaults, &mut f).unwrap();
    if !(r.alpha == 4.0 && r.direction == e1) {
        failures.push(format!("quadratic: alpha={} p={:?}", r.alpha, r.direction));
    }

    // f = x from 5 with gamma = 0.1: flips to -e1, stops after the clamp at 0
    let params = LineSearchParams {
        gamma: 0.1,
        delta: 0.5,
    };
    let mut f = |x: &[f64]| Ok(x[0]);
    let r = projected_continuous_search(1.0, &[5.0], 5.0, &e1, &b, &params, &mut f).unwrap();
    if !(r.alpha == 4.0 && r.direction == e1.negated()) {
        failures.push(format!(
            "linear flip: alpha={} p={:?}",
            r.alpha, r.direction
        ));
    }

    // discrete: outward direction on a face
    let (p1, bz) = one_dim(0.0, 10.0, true);
    let up = PrimitiveDirection::new(vec![1], &p1).unwrap();
    let down = PrimitiveDirection::new(vec![-1], &p1).unwrap();
    let mut calls = 0;
    let mut f = |x: &[f64]| {
        calls += 1;
        Ok(x[0])
    };
    let r = discrete_search(1, &[10.0], 10.0, &up, 1.0, &bz, &mut f).unwrap();
    if !(r.alpha == 0 && calls == 0) {
        failures.push(format!("face: alpha={} calls={calls}", r.alpha));
    }

    // f = x from 10 along -1 with step 2, xi = 0.5: 2, 4, 8, then saturation at 10
    let mut f = |x: &[f64]| Ok(x[0]);
    let r = discrete_search(2, &[10.0], 10.0, &down, 0.5, &bz, &mut f).unwrap();
    if r.alpha != 10 {
        failures.push(format!("saturation: alpha={}", r.alpha));
    }

    // huge xi: no sufficient decrease possible
    let mut f = |x: &[f64]| Ok(x[0]);
    let r = discrete_search(1, &[10.0], 10.0, &down, 1e9, &bz, &mut f).unwrap();
    if r.alpha != 0 {
        failures.push(format!("huge xi: alpha={}", r.alpha));
    }

    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        failures.push(format!("runtime {elapsed:?}"));
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("6/6 traces match, {elapsed:?}")
        } else {
            failures.join("; ")
        },
    )
}

struct SuiteRuns {
    reports: Vec<SolveReport>,
    elapsed: Duration,
}

fn run_shipped(budget: usize) -> SuiteRuns {
    let start = Instant::now();
    let mut reports = Vec::new();
    let config = SolverConfig {
        max_evaluations: budget,
        ..SolverConfig::default()
    };
    for suite in [Suite::Bound, Suite::Constrained] {
        for spec in list_problems(suite) {
            let problem = build_problem(&spec).unwrap();
            reports.push(solve(problem, &config, &PenaltyConfig::default()).unwrap());
        }
    }
    SuiteRuns {
        reports,
        elapsed: start.elapsed(),
    }
}

fn monotonicity(runs: &SuiteRuns) -> Outcome {
    let mut bad = Vec::new();
    for r in &runs.reports {
        if r.rows.windows(2).any(|w| w[1].merit > w[0].merit) {
            bad.push(r.problem.clone());
        }
    }
    if runs.elapsed >= Duration::from_secs(60) {
        bad.push(format!("runtime {:?}", runs.elapsed));
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} runs, {} violations, {:?} {}",
            runs.reports.len(),
            bad.len(),
            runs.elapsed,
            bad.join(", ")
        ),
    )
}

fn feasibility(runs: &SuiteRuns) -> Outcome {
    let mut calls = 0usize;
    let mut bad = 0usize;
    for r in &runs.reports {
        let spec = ProblemSpec::parse(&r.problem).unwrap();
        let problem = build_problem(&spec).unwrap();
        for e in &r.trace {
            calls += 1;
            if check_lattice_point(&e.point, &problem.partition, &problem.bounds).is_err() {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("{calls} oracle calls, {bad} outside X∩Z"))
}

fn budget(runs: &SuiteRuns) -> Outcome {
    let over: Vec<String> = runs
        .reports
        .iter()
        .filter(|r| r.evaluations_used > 5000 || r.trace.len() > 5000)
        .map(|r| format!("{}={}", r.problem, r.evaluations_used))
        .collect();
    let max = runs
        .reports
        .iter()
        .map(|r| r.evaluations_used)
        .max()
        .unwrap_or(0);
    outcome(
        over.is_empty(),
        format!(
            "max evaluations_used {max} over {} runs {}",
            runs.reports.len(),
            over.join(", ")
        ),
    )
}

/// Σ (x_c - c)² + Σ (x_z - z)² on [-5,5]² × {0..20}².
fn strictly_convex_run() -> SolveReport {
    let p = VariablePartition::split(2, 2).unwrap();
    let b = Bounds::new(vec![-5.0, -5.0, 0.0, 0.0], vec![5.0, 5.0, 20.0, 20.0], &p).unwrap();
    let problem =
        ProblemInstance::from_objective("convex(2+2)", p, b, vec![5.0, 5.0, 10.0, 10.0], |x| {
            (x[0] - 1.3).powi(2)
                + (x[1] + 0.7).powi(2)
                + (x[2] - 3.0).powi(2)
                + (x[3] - 17.0).powi(2)
        })
        .unwrap();
    let config = SolverConfig {
        max_evaluations: 100_000,
        seed: 11,
        ..SolverConfig::default()
    };
    solve(problem, &config, &PenaltyConfig::default()).unwrap()
}

fn sepquad_optimum_oracle() -> f64 {
    // integer grid × per-cell golden-section minimization of each continuous term
    let golden = |g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64| {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if g(c) <= g(d) {
                b = d;
            } else {
                a = c;
            }
        }
        g(0.5 * (a + b))
    };
    let cont: f64 = [2.5, 7.25]
        .iter()
        .map(|&c| golden(&move |t: f64| (t - c) * (t - c), 0.0, 10.0))
        .sum();
    let mut best = f64::INFINITY;
    for z0 in 0..=100 {
        for z1 in 0..=100 {
            let v = cont + (f64::from(z0) - 37.0).abs() + (f64::from(z1) - 62.0).abs();
            best = best.min(v);
        }
    }
    best
}

fn brute_force() -> Outcome {
    let start = Instant::now();
    let spec = ProblemSpec::new(BaseObjective::Sepquad, 4).unwrap();
    let config = SolverConfig {
        max_evaluations: 2000,
        ..SolverConfig::default()
    };
    let report = solve(
        build_problem(&spec).unwrap(),
        &config,
        &PenaltyConfig::default(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let opt = sepquad_optimum_oracle();
    let gap = (report.best_f - opt).abs();
    let z_ok = report.best_point[2] == 37.0 && report.best_point[3] == 62.0;
    outcome(
        gap <= 1e-6 && z_ok && elapsed < Duration::from_secs(5),
        format!(
            "best_f {:?}, oracle {:?}, gap {gap:e}, z = {:?}, {elapsed:?}",
            report.best_f,
            opt,
            &report.best_point[2..]
        ),
    )
}

fn penalty_exactness() -> Outcome {
    let (p, b) = one_dim(0.0, 10.0, false);
    let toy = ProblemInstance::from_fn("toy", p, b, vec![5.0], 1, |x| Response {
        f: -x[0],
        g: vec![x[0] - 2.0],
    })
    .unwrap();
    let config = SolverConfig {
        max_evaluations: 5000,
        ..SolverConfig::default()
    };
    let toy_report = solve_constrained(toy, &config, &PenaltyConfig::default()).unwrap();
    let x = toy_report.best_merit.point[0];
    let toy_ok = toy_report.best_merit.violation <= 1e-6 && (x - 2.0).abs() <= 1e-4;

    let spec = ProblemSpec::parse("maxq(3)/f6").unwrap();
    let fam = solve(
        build_problem(&spec).unwrap(),
        &config,
        &PenaltyConfig::default(),
    )
    .unwrap();
    let fam_ok = fam.best_merit.violation <= 1e-6;
    outcome(
        toy_ok && fam_ok,
        format!(
            "toy x = {x:?} violation {:?}; {} violation {:?}",
            toy_report.best_merit.violation, fam.problem, fam.best_merit.violation
        ),
    )
}

fn profile_math() -> Outcome {
    let meta = |name: &str, n| ProblemMeta {
        name: name.into(),
        n,
        constrained: false,
    };
    let table = SolveTable {
        problems: vec![meta("p1", 10), meta("p2", 10), meta("p3", 10)],
        solvers: vec!["s1".into(), "s2".into()],
        t: vec![
            vec![Some(10), Some(20)],
            vec![Some(30), Some(30)],
            vec![None, Some(5)],
        ],
    };
    let perf = performance_profile(&table);
    // (count, n_problems) at a given alpha, compared as rationals
    let at = |s: usize, alpha: f64| {
        let c = &perf[s];
        let k = c.abscissae.iter().rposition(|&a| a <= alpha).unwrap();
        (c.counts[k], c.n_problems)
    };
    let mut failures = Vec::new();
    for (s, alpha, want) in [
        (0, 1.0, 2),
        (1, 1.0, 2),
        (1, 2.0, 3),
        (0, 2.0, 2),
        (0, 1e9, 2),
    ] {
        let (num, den) = at(s, alpha);
        if num * 3 != want * den {
            failures.push(format!(
                "rho_{}({alpha}) = {num}/{den}, want {want}/3",
                s + 1
            ));
        }
    }
    // data profile: t = 22 at n_p = 10 is first solved at kappa = 2
    let single = SolveTable {
        problems: vec![meta("p", 10)],
        solvers: vec!["s".into()],
        t: vec![vec![Some(22)]],
    };
    let d = &data_profile(&single, 4)[0];
    if d.counts != [0, 0, 1, 1, 1] {
        failures.push(format!("d(kappa) counts {:?}", d.counts));
    }
    let d = data_profile(&table, 3);
    // s1 solves p1 (10 ≤ 11) at 1 and p2 (30 ≤ 33) at 3; s2 solves p3 at 1, p1 at 2, p2 at 3
    if d[0].counts != [0, 1, 1, 2] || d[1].counts != [0, 1, 2, 3] {
        failures.push(format!(
            "table d(kappa) {:?} {:?}",
            d[0].counts, d[1].counts
        ));
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "rho_1(1)=2/3, rho_2(1)=2/3, rho_2(2)=1, d(kappa) exact".to_string()
        } else {
            failures.join("; ")
        },
    )
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let mut problems = list_problems(Suite::Bound);
    problems.extend(list_problems(Suite::Constrained));
    let config = BenchConfig {
        problems,
        solvers: vec![SolverVariant::full(), SolverVariant::coordinate_only()],
        budget: 1000,
        taus: DEFAULT_TAUS.to_vec(),
        seed: 2024,
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let bundle = run_benchmark(&config).unwrap();
        write_bundle(dir.path(), &bundle).unwrap();
    }
    let elapsed = start.elapsed();
    let mut differing = Vec::new();
    for file in ["traces.csv", "performance.csv", "data.csv"] {
        let a = std::fs::read(dirs[0].path().join(file)).unwrap();
        let b = std::fs::read(dirs[1].path().join(file)).unwrap();
        if a != b || a.is_empty() {
            differing.push(file);
        }
    }
    outcome(
        differing.is_empty() && elapsed < Duration::from_secs(120),
        format!(
            "{} problems x 2 solvers, two runs in {elapsed:?}, differing: {:?}",
            config.problems.len(),
            differing
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("linesearch traces", linesearch_traces()));

    let runs = run_shipped(5000);
    results.push(("monotonicity", monotonicity(&runs)));
    results.push(("feasibility", feasibility(&runs)));

    let convex = strictly_convex_run();
    results.push((
        "xi decay",
        outcome(
            convex.xi_final <= 1e-6,
            format!(
                "xi_final {:e} after {} evaluations",
                convex.xi_final, convex.evaluations_used
            ),
        ),
    ));
    results.push((
        "stepsize decay",
        outcome(
            convex.alpha_dense_final <= 1e-4,
            format!("alpha_dense_final {:e}", convex.alpha_dense_final),
        ),
    ));
    results.push(("brute-force equivalence", brute_force()));
    results.push(("penalty exactness", penalty_exactness()));
    results.push(("profile math", profile_math()));
    results.push(("budget contract", budget(&runs)));
    results.push(("end-to-end benchmark", end_to_end()));

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
