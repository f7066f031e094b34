//! `pctsp`: generate, solve, verify, and benchmark prize-collecting TSP
//! instances from the command line.
//!
//! Exit codes are a stable contract: 0 ok, 2 input error, 3 solver error,
//! 4 certification failure. All randomness flows from `--seed` (default 0);
//! two runs with the same flags produce byte-identical output.

mod bench;
mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

use pctsp::combine::{
    attach_scaled_penalty_certificate, solve_best_full, solve_exact_report, solve_primal_dual_full,
    solve_randomized_report, solve_rounding_full, SolveArtifacts,
};
use pctsp::instance::{gen_euclidean, metric_closure, MetricInstance, RawInstance};
use pctsp::verify::verify_instance;
use pctsp::Error;

/// Largest instance the LP pipeline accepts from the CLI.
const SOLVE_CAP: usize = 30;
const DEFAULT_TRIALS: usize = 1000;

#[derive(Parser)]
#[command(
    name = "pctsp",
    version,
    about = "Prize-collecting TSP approximation toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit JSON instead of aligned text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for all randomized behavior (instance generation, trials).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the primary output to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Diagnostic verbosity on stderr (repeatable).
    #[arg(short = 'v', long = "verbose", global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random Euclidean instance file.
    Gen {
        /// Vertex count (the root is vertex 0).
        #[arg(long)]
        n: usize,
        /// Penalties are uniform in [0, penalty-scale].
        #[arg(long, default_value_t = 1.0)]
        penalty_scale: f64,
    },
    /// Solve an instance file.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Best)]
        mode: Mode,
        /// Trial count for randomized mode.
        #[arg(long)]
        trials: Option<usize>,
        /// Also evaluate the scaled-penalty certificate (second LP solve).
        #[arg(long)]
        emit_scaled_penalty_certificate: bool,
        /// Write the moat event log (JSON lines) to this path.
        #[arg(long)]
        emit_event_log: Option<PathBuf>,
        /// Write the final restricted LP as a text dump to this path.
        #[arg(long)]
        emit_lp_dump: Option<PathBuf>,
        /// Repair a non-metric matrix by shortest-path closure before
        /// validation.
        #[arg(long)]
        metric_closure: bool,
    },
    /// Solve an instance exactly (subset dynamic programming, n <= 18).
    Exact {
        instance: PathBuf,
        #[arg(long)]
        metric_closure: bool,
    },
    /// Recompute every guarantee on an instance against the exact optimum.
    Verify {
        instance: PathBuf,
        #[arg(long)]
        metric_closure: bool,
    },
    /// Solve batches of random instances and aggregate ratio statistics.
    Bench {
        /// Inclusive vertex-count range, e.g. 4:8.
        #[arg(long)]
        n_range: String,
        /// Instances per vertex count.
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 1.0)]
        penalty_scale: f64,
    },
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    Best,
    Rounding,
    PrimalDual,
    Randomized,
}

/// A failed run: message for stderr plus the contract exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInstance(_)
            | Error::InvalidTour(_)
            | Error::Parse(_)
            | Error::InvalidArgument(_) => 2,
            Error::Solver(_) | Error::SeparationCap { .. } => 3,
            Error::Certification { .. } => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Rendered output plus the exit code (verify and bench can succeed in
/// producing a report that nevertheless fails its checks).
struct Output {
    text: String,
    code: i32,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(), // clap uses exit code 2 for usage errors
    };
    let out_path = cli.out.clone();
    match execute(cli) {
        Ok(output) => {
            if let Err(e) = write_output(out_path.as_deref(), &output.text) {
                eprintln!("error: {e}");
                std::process::exit(2);
            }
            std::process::exit(output.code);
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            std::process::exit(failure.code);
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(path) => fs::write(path, format!("{text}\n")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_instance(path: &Path, repair: bool) -> Result<MetricInstance, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let mut raw = RawInstance::from_json(&text)?;
    if repair {
        raw.metric = metric_closure(&raw.metric);
    }
    Ok(raw.into_instance()?)
}

fn execute(cli: Cli) -> Result<Output, Failure> {
    match cli.command {
        Command::Gen { n, penalty_scale } => {
            if n == 0 {
                return Err(Failure::input("--n must be at least 1"));
            }
            if !(penalty_scale >= 0.0) || !penalty_scale.is_finite() {
                return Err(Failure::input("--penalty-scale must be a nonnegative real"));
            }
            let inst = gen_euclidean(n, cli.seed, penalty_scale);
            Ok(Output {
                text: inst.to_json(),
                code: 0,
            })
        }
        Command::Solve {
            instance,
            mode,
            trials,
            emit_scaled_penalty_certificate,
            emit_event_log,
            emit_lp_dump,
            metric_closure,
        } => {
            if trials.is_some() && mode != Mode::Randomized {
                return Err(Failure::input("--trials only applies to --mode randomized"));
            }
            if emit_scaled_penalty_certificate && !matches!(mode, Mode::Best | Mode::PrimalDual) {
                return Err(Failure::input(
                    "--emit-scaled-penalty-certificate needs a mode that runs the primal-dual \
                     algorithm",
                ));
            }
            if emit_event_log.is_some() && !matches!(mode, Mode::Best | Mode::PrimalDual) {
                return Err(Failure::input(
                    "--emit-event-log needs a mode that runs the primal-dual algorithm",
                ));
            }
            if emit_lp_dump.is_some() && mode == Mode::Randomized {
                return Err(Failure::input(
                    "--emit-lp-dump is not available in randomized mode",
                ));
            }
            let inst = load_instance(&instance, metric_closure)?;
            if inst.n() > SOLVE_CAP {
                return Err(Failure::input(format!(
                    "solve is capped at n <= {SOLVE_CAP}, instance has {}",
                    inst.n()
                )));
            }
            if cli.verbose > 0 {
                eprintln!("solving n={} root={} mode={mode:?}", inst.n(), inst.root());
            }
            let report = match mode {
                Mode::Randomized => {
                    solve_randomized_report(&inst, cli.seed, trials.unwrap_or(DEFAULT_TRIALS))?
                }
                _ => {
                    let mut artifacts: SolveArtifacts = match mode {
                        Mode::Best => solve_best_full(&inst)?,
                        Mode::Rounding => solve_rounding_full(&inst)?,
                        Mode::PrimalDual => solve_primal_dual_full(&inst)?,
                        Mode::Randomized => unreachable!(),
                    };
                    if emit_scaled_penalty_certificate {
                        attach_scaled_penalty_certificate(&inst, &mut artifacts)?;
                    }
                    if let Some(path) = &emit_lp_dump {
                        let Some(lp) = &artifacts.lp else {
                            return Err(Failure::input(
                                "no LP was solved for this instance (n <= 2)",
                            ));
                        };
                        let dump = lp.problem.dump(&lp.var_names);
                        fs::write(path, dump).map_err(|e| {
                            Failure::input(format!("cannot write {}: {e}", path.display()))
                        })?;
                    }
                    if let Some(path) = &emit_event_log {
                        let Some(record) = &artifacts.pd_record else {
                            return Err(Failure::input(
                                "no moat growth was run for this instance (n <= 2)",
                            ));
                        };
                        let mut lines = String::new();
                        for event in &record.events {
                            lines.push_str(&serde_json::to_string(event).expect("event json"));
                            lines.push('\n');
                        }
                        fs::write(path, lines).map_err(|e| {
                            Failure::input(format!("cannot write {}: {e}", path.display()))
                        })?;
                    }
                    artifacts.report
                }
            };
            let text = if cli.json {
                report.to_json()
            } else {
                output::render_solve(&report)
            };
            Ok(Output { text, code: 0 })
        }
        Command::Exact {
            instance,
            metric_closure,
        } => {
            let inst = load_instance(&instance, metric_closure)?;
            let report = solve_exact_report(&inst)?;
            let text = if cli.json {
                report.to_json()
            } else {
                output::render_solve(&report)
            };
            Ok(Output { text, code: 0 })
        }
        Command::Verify {
            instance,
            metric_closure,
        } => {
            let inst = load_instance(&instance, metric_closure)?;
            let report = verify_instance(&inst)?;
            let code = if report.pass { 0 } else { 4 };
            if !report.pass {
                for check in report.checks.iter().filter(|c| !c.pass) {
                    eprintln!(
                        "certificate failed: {} (lhs {} rhs {} slack {})",
                        check.name, check.lhs, check.rhs, check.slack
                    );
                }
            }
            let text = if cli.json {
                serde_json::to_string_pretty(&report).expect("report serializes")
            } else {
                output::render_verify(&report)
            };
            Ok(Output { text, code })
        }
        Command::Bench {
            n_range,
            count,
            penalty_scale,
        } => {
            let (n_from, n_to) = bench::parse_range(&n_range)?;
            if count == 0 {
                return Err(Failure::input("--count must be at least 1"));
            }
            let report = bench::run(bench::BenchConfig {
                n_from,
                n_to,
                count,
                seed: cli.seed,
                penalty_scale,
                verbose: cli.verbose,
            })?;
            let code = if report.bound_ok { 0 } else { 4 };
            if !report.bound_ok {
                eprintln!(
                    "certificate failed: max H/LP ratio {} exceeds {}",
                    report.max_ratio_h_lp, report.ratio_bound
                );
            }
            let text = if cli.json {
                serde_json::to_string_pretty(&report).expect("report serializes")
            } else {
                output::render_bench(&report)
            };
            Ok(Output { text, code })
        }
    }
}
