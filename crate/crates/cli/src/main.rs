//! `spap`: generate, check and solve SPA-P instances and run experiments.
//!
//! Exit status is 0 on success, 1 on invalid input or usage, and 2 when an
//! exact search stops on its budget (the best matching found is still
//! printed).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use spap::approx::{best_of_runs_with, Algorithm, ApproxConfig};
use spap::format::{format_matching, parse_instance, parse_matching, serialize_instance};
use spap::harness::{
    grid, ratio_table, run_experiment_0, run_experiment_1, run_experiment_2, run_experiment_3,
    summarize_timing, Exp0, Exp1, Exp2, Exp3, ExperimentReport, GroupBy, DEFAULT_RUNS,
};
use spap::instances::{generate, GenParams, PopularityMode, PrefLen};
use spap::ip::{build_model, export_lp};
use spap::solvers::{max_stable_oracle, solve_exact, Budget, ExactMode, OptimalResult};
use spap::stability::{build_envy_graph, check_feasible, find_blocking_pairs, find_coalition, format_coalition};
use spap::{Error, Execution, Instance};

#[derive(Parser)]
#[command(name = "spap", version, about = "Stable student-project allocation with lecturer preferences over projects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Report blocking pairs and coalitions of a matching.
    Check {
        instance: PathBuf,
        /// Pairs `i:j` separated by spaces, e.g. "1:2 2:1 3:3".
        #[arg(long)]
        matching: String,
    },
    /// Find a maximum stable matching.
    Solve(SolveArgs),
    /// Run a randomized approximation algorithm.
    Approx {
        instance: PathBuf,
        #[arg(long, default_value = "three-halves")]
        algo: Algorithm,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the integer-programming model in LP format.
    ExportLp {
        instance: PathBuf,
        /// Leave out the envy and labelling rows.
        #[arg(long)]
        no_coalition: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact solve times with and without coalition rows.
    Exp0 {
        #[arg(long, value_delimiter = ',', default_value = "10")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[command(flatten)]
        common: ExpArgs,
    },
    /// Five-algorithm comparison over instance sizes.
    Exp1 {
        #[arg(long, value_delimiter = ',', default_value = "10")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: usize,
        #[command(flatten)]
        common: ExpArgs,
    },
    /// Five-algorithm comparison over exact preference-list lengths.
    Exp2 {
        #[arg(long, default_value_t = 20)]
        n1: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
        lengths: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: usize,
        #[command(flatten)]
        common: ExpArgs,
    },
    /// Five algorithms under derived lecturer preferences. Without
    /// instance files, runs stand-ins for the four published dataset shapes.
    Exp3 {
        instances: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "random,ascending,descending")]
        modes: Vec<PopularityMode>,
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: usize,
        #[command(flatten)]
        common: ExpArgs,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 10)]
    n1: usize,
    /// `min-max` or an exact length.
    #[arg(long, default_value = "2-5")]
    pref_len: PrefLen,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    project_ratio: f64,
    #[arg(long, default_value_t = 0.2)]
    lecturer_ratio: f64,
    #[arg(long, default_value_t = 1.1)]
    capacity_ratio: f64,
    /// Use a published dataset shape (2014 to 2017) instead of the ratios.
    #[arg(long, conflicts_with_all = ["n1", "pref_len"])]
    dataset: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long)]
    max_seconds: Option<f64>,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget {
            max_nodes: self.max_nodes,
            max_time: self.max_seconds.map(Duration::from_secs_f64),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Branch and bound over the integer model (the default).
    #[arg(long, conflicts_with = "oracle")]
    exact: bool,
    /// Exhaustive enumeration; small instances only.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value = "no-coalition")]
    mode: ExactMode,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct ExpArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    budget: BudgetArgs,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run trials one at a time.
    #[arg(long)]
    sequential: bool,
}

impl ExpArgs {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

enum Failure {
    Invalid(String),
    Budget,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn load(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn gen(a: &GenArgs) -> CmdResult {
    let params = match a.dataset {
        Some(year) => GenParams::dataset(year, a.seed)
            .ok_or_else(|| Failure::Invalid(format!("no published shape for {year}")))?,
        None => GenParams {
            n1: a.n1,
            pref_len: a.pref_len,
            seed: a.seed,
            project_ratio: a.project_ratio,
            lecturer_ratio: a.lecturer_ratio,
            capacity_ratio: a.capacity_ratio,
            ..GenParams::default()
        },
    };
    emit(&a.out, &serialize_instance(&generate(&params)?))
}

fn check(path: &Path, literal: &str) -> CmdResult {
    let inst = load(path)?;
    let m = parse_matching(&inst, literal)?;
    let violations = check_feasible(&inst, &m);
    if !violations.is_empty() {
        for v in violations {
            println!("INFEASIBLE {v}");
        }
        return Err(Failure::Invalid("matching is not feasible".into()));
    }
    let blocking = find_blocking_pairs(&inst, &m)?;
    for bp in &blocking {
        println!("{bp}");
    }
    let coalition = find_coalition(&build_envy_graph(&inst, &m));
    if let Some(cycle) = &coalition {
        println!("{}", format_coalition(cycle));
    }
    if blocking.is_empty() && coalition.is_none() {
        println!("STABLE");
    }
    Ok(())
}

fn print_result(r: &OptimalResult) {
    println!("size={}", r.size);
    println!("matching={}", format_matching(&r.matching));
    println!(
        "nodes={} time_ms={:.3} proven_optimal={}",
        r.nodes_explored,
        r.wall_time.as_secs_f64() * 1000.0,
        r.proven_optimal
    );
}

fn solve(a: &SolveArgs) -> CmdResult {
    let inst = load(&a.instance)?;
    if a.oracle {
        print_result(&max_stable_oracle(&inst)?);
        return Ok(());
    }
    match solve_exact(&inst, a.mode, &a.budget.budget()) {
        Ok(r) => {
            print_result(&r);
            Ok(())
        }
        Err(Error::BudgetExceeded(r)) => {
            print_result(&r);
            eprintln!("budget exhausted; size is a lower bound");
            Err(Failure::Budget)
        }
        Err(e) => Err(e.into()),
    }
}

fn approx(path: &Path, algorithm: Algorithm, runs: usize, seed: u64) -> CmdResult {
    if runs == 0 {
        return Err(Failure::Invalid("--runs must be at least 1".into()));
    }
    let inst = load(path)?;
    let cfg = ApproxConfig {
        algorithm,
        runs,
        seed,
    };
    let t = Instant::now();
    let m = best_of_runs_with(&inst, &cfg, Execution::default());
    println!("size={}", m.size());
    println!("matching={}", format_matching(&m));
    println!("time_ms={:.3}", t.elapsed().as_secs_f64() * 1000.0);
    Ok(())
}

fn export(path: &Path, no_coalition: bool, out: &Option<PathBuf>) -> CmdResult {
    let inst = load(path)?;
    emit(out, &export_lp(&build_model(&inst, !no_coalition)))
}

fn write_report(report: &ExperimentReport, common: &ExpArgs) -> CmdResult {
    if let Some(path) = &common.out {
        let file = fs::File::create(path)?;
        report.write_csv(io::BufWriter::new(file))?;
    }
    Ok(())
}

fn print_ratios(report: &ExperimentReport, by: GroupBy, heading: &str) {
    println!("{heading:>8} algo  count  mean_ratio  std_err  mean_size");
    for r in ratio_table(report, by) {
        println!(
            "{:>8} {:>4}  {:>5}  {:>10.4}  {:>7.4}  {:>9.3}",
            r.key, r.algo, r.count, r.mean_ratio, r.std_err, r.mean_size
        );
    }
}

fn run() -> CmdResult {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage {
                Err(Failure::Invalid(String::new()))
            } else {
                Ok(())
            };
        }
    };
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Check { instance, matching } => check(instance, matching),
        Command::Solve(a) => solve(a),
        Command::Approx {
            instance,
            algo,
            runs,
            seed,
        } => approx(instance, *algo, *runs, *seed),
        Command::ExportLp {
            instance,
            no_coalition,
            out,
        } => export(instance, *no_coalition, out),
        Command::Exp0 {
            sizes,
            trials,
            common,
        } => {
            let cfg = Exp0 {
                sizes: sizes.clone(),
                trials: *trials,
                budget: common.budget.budget(),
                seed: common.seed,
                ..Exp0::default()
            };
            let report = run_experiment_0(&cfg, common.exec())?;
            write_report(&report, common)?;
            println!("      n1 mode            trials  mean_size  mean_time_ms  budget_limited");
            for s in summarize_timing(&report) {
                println!(
                    "{:>8} {:<15} {:>6}  {:>9.3}  {:>12.3}  {:>14}",
                    s.n1, s.mode, s.trials, s.mean_size, s.mean_time_ms, s.budget_limited
                );
            }
            Ok(())
        }
        Command::Exp1 {
            sizes,
            trials,
            runs,
            common,
        } => {
            let cfg = Exp1 {
                sizes: sizes.clone(),
                trials: *trials,
                runs: *runs,
                budget: common.budget.budget(),
                seed: common.seed,
                ..Exp1::default()
            };
            let report = run_experiment_1(&cfg, common.exec())?;
            write_report(&report, common)?;
            print_ratios(&report, GroupBy::N1, "n1");
            Ok(())
        }
        Command::Exp2 {
            n1,
            lengths,
            trials,
            runs,
            common,
        } => {
            let cfg = Exp2 {
                n1: *n1,
                lengths: lengths.clone(),
                trials: *trials,
                runs: *runs,
                budget: common.budget.budget(),
                seed: common.seed,
            };
            let report = run_experiment_2(&cfg, common.exec())?;
            write_report(&report, common)?;
            print_ratios(&report, GroupBy::PrefLen, "x");
            Ok(())
        }
        Command::Exp3 {
            instances,
            modes,
            runs,
            common,
        } => {
            let budget = common.budget.budget();
            let mut cfg = if instances.is_empty() {
                Exp3::dataset_stand_ins(common.seed, budget)?
            } else {
                Exp3 {
                    instances: instances
                        .iter()
                        .map(|p| load(p).map(|inst| (inst, common.seed)))
                        .collect::<Result<_, _>>()?,
                    modes: Vec::new(),
                    runs: *runs,
                    budget,
                    seed: common.seed,
                }
            };
            cfg.modes = modes.clone();
            cfg.runs = *runs;
            let report = run_experiment_3(&cfg, common.exec())?;
            write_report(&report, common)?;
            println!("n1 n2 n3 l | mode: A B C D E (* = exact search hit its budget)");
            for row in grid(&report) {
                println!("{row}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Budget) => ExitCode::from(2),
    }
}
