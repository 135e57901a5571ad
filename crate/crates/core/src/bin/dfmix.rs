use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dfmix::bench::{recompute_profiles, run_benchmark, write_bundle, BenchConfig, SolverVariant};
use dfmix::external::ExternalProblemSpec;
use dfmix::problems::{build_problem, list_problems, ProblemSpec, Suite};
use dfmix::solver::{solve, PenaltyConfig, SolverConfig};
use dfmix::Error;

#[derive(Parser)]
#[command(
    name = "dfmix",
    version,
    about = "Derivative-free mixed-integer optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Bound,
    Constrained,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    /// Coordinate, dense and expanding discrete directions.
    Full,
    /// Coordinate directions and unit integer steps only.
    Coordinate,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single problem and write a JSON report.
    Solve {
        /// Test problem name, e.g. `maxq(20)` or `maxq(20)/f3`.
        #[arg(long, required_unless_present = "external")]
        problem: Option<String>,
        /// Constraint family (1-6) to attach to the problem.
        #[arg(long)]
        family: Option<u8>,
        /// Problem description for a black box driven over stdin/stdout.
        #[arg(long, conflicts_with = "problem")]
        external: Option<PathBuf>,
        #[arg(long, default_value_t = 5000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Penalty parameter for constrained problems.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Solver variant.
        #[arg(long, value_enum, default_value = "full")]
        variant: VariantArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the full solver against its coordinate-only variant.
    Bench {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 5000)]
        budget: usize,
        #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-3,1e-5")]
        taus: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute profile CSVs from a bench output directory.
    Profiles {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the problems of a suite.
    List {
        #[arg(long, value_enum)]
        suite: SuiteArg,
    },
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Bound => Suite::Bound,
            SuiteArg::Constrained => Suite::Constrained,
        }
    }
}

fn run(cli: Cli) -> dfmix::Result<()> {
    match cli.command {
        Command::Solve {
            problem,
            family,
            external,
            budget,
            seed,
            epsilon,
            variant,
            out,
        } => {
            let instance = match (problem, external) {
                (_, Some(path)) => ExternalProblemSpec::from_file(&path)?.instantiate()?,
                (Some(name), None) => {
                    let mut spec = ProblemSpec::parse(&name)?;
                    if let Some(k) = family {
                        spec = spec.with_family(k)?;
                    }
                    build_problem(&spec)?
                }
                (None, None) => return Err(Error::Config("no problem given".into())),
            };
            let base = match variant {
                VariantArg::Full => SolverConfig::default(),
                VariantArg::Coordinate => SolverConfig::coordinate_only(),
            };
            let config = SolverConfig {
                max_evaluations: budget,
                seed,
                ..base
            };
            let mut penalty = PenaltyConfig::default();
            if let Some(eps) = epsilon {
                penalty.epsilon = eps;
            }
            let report = solve(instance, &config, &penalty)?;
            let json = report.to_json()?;
            match out {
                Some(path) => std::fs::write(path, json)?,
                None => println!("{json}"),
            }
            eprintln!(
                "{}: f = {:?}, violation = {:?}, evaluations = {}, {:?}",
                report.problem,
                report.best_f,
                report.best_violation,
                report.evaluations_used,
                report.termination
            );
        }
        Command::Bench {
            suite,
            budget,
            taus,
            seed,
            out,
        } => {
            let config = BenchConfig {
                problems: list_problems(suite.into()),
                solvers: vec![SolverVariant::full(), SolverVariant::coordinate_only()],
                budget,
                taus,
                seed,
            };
            let bundle = run_benchmark(&config)?;
            write_bundle(&out, &bundle)?;
            for (tau, names) in &bundle.manifest.excluded {
                if !names.is_empty() {
                    eprintln!(
                        "tau {tau:?}: no feasible point found on {}",
                        names.join(", ")
                    );
                }
            }
            for r in bundle.manifest.runs.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "{} / {}: {}",
                    r.problem,
                    r.solver,
                    r.error.as_deref().unwrap_or("")
                );
            }
        }
        Command::Profiles { traces, out } => {
            recompute_profiles(&traces, &out)?;
        }
        Command::List { suite } => {
            for p in list_problems(suite.into()) {
                println!("{p}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Protocol(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
