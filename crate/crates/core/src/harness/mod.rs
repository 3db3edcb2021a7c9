//! Experiment runner: the five-algorithm comparison on generated or
//! supplied instances, with CSV reporting.
//!
//! Each trial is independent, so trials run through an [`Execution`] and
//! rows come back in deterministic (size, trial) order whatever the
//! scheduling. Every matching is verified stable before it becomes a row.

mod report;

pub use report::{
    grid, ratio_table, summarize_timing, ExperimentReport, GridRow, GroupBy, Label, RatioSummary,
    ReportRow, TimingSummary, CSV_HEADER,
};

use std::time::{Duration, Instant};

use crate::approx::{best_of_runs_with, run_once, Algorithm, ApproxConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::instances::{derive_lecturer_prefs, generate, GenParams, PopularityMode, PrefLen};
use crate::model::{Instance, Matching};
use crate::solvers::{solve_exact_with, Budget, ExactMode, ExactOptions, OptimalResult};
use crate::stability::is_stable;

/// Default number of runs for the best-of-R algorithms.
pub const DEFAULT_RUNS: usize = 100;

/// Seed of trial `trial` in the group `key` (a size or list length).
pub fn trial_seed(base: u64, key: usize, trial: usize) -> u64 {
    base.wrapping_add((key as u64) << 32)
        .wrapping_add(trial as u64)
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

fn verified(inst: &Instance, m: Matching, what: &str) -> Result<Matching> {
    match is_stable(inst, &m) {
        v if v.is_stable() => Ok(m),
        v => Err(Error::Unstable(format!("{what}: {v:?}"))),
    }
}

/// Exact solve that reports budget exhaustion as an unproven result.
fn exact(inst: &Instance, opts: &ExactOptions) -> Result<OptimalResult> {
    match solve_exact_with(inst, opts) {
        Ok(r) => Ok(r),
        Err(Error::BudgetExceeded(r)) => Ok(*r),
        Err(e) => Err(e),
    }
}

/// Shape columns shared by every row of one instance.
#[derive(Clone, Debug)]
struct Shape {
    experiment: &'static str,
    n1: usize,
    n2: usize,
    n3: usize,
    pref_len: String,
    seed: u64,
}

impl Shape {
    fn of(experiment: &'static str, inst: &Instance, pref_len: String, seed: u64) -> Self {
        Self {
            experiment,
            n1: inst.n_students(),
            n2: inst.n_projects(),
            n3: inst.n_lecturers(),
            pref_len,
            seed,
        }
    }

    fn row(
        &self,
        mode: &str,
        algo: Label,
        size: usize,
        opt: Option<usize>,
        time: Duration,
        nodes: Option<u64>,
    ) -> ReportRow {
        ReportRow {
            experiment: self.experiment.to_string(),
            n1: self.n1,
            n2: self.n2,
            n3: self.n3,
            pref_len: self.pref_len.clone(),
            seed: self.seed,
            mode: mode.to_string(),
            algo,
            size,
            opt,
            ratio: opt.map(|o| if o == 0 { 1.0 } else { size as f64 / o as f64 }),
            time_ms: ms(time),
            nodes,
        }
    }
}

/// Observed list lengths of `inst` in [`PrefLen`] notation.
pub fn observed_pref_len(inst: &Instance) -> String {
    let lens = inst.students().iter().map(|s| s.prefs.len());
    let lo = lens.clone().min().unwrap_or(0);
    let hi = lens.max().unwrap_or(0);
    if lo == hi {
        PrefLen::Exact(lo).to_string()
    } else {
        PrefLen::Range(lo, hi).to_string()
    }
}

/// Identifies the instance a batch of rows belongs to.
#[derive(Clone, Debug)]
pub struct RowInfo {
    pub experiment: &'static str,
    pub pref_len: String,
    /// Seed reported in the `seed` column.
    pub seed: u64,
    /// Value of the `mode` column.
    pub mode: String,
}

/// Runs algorithms A to E on one instance and returns their rows in label
/// order. The single runs use `seed` and the best-of-R runs use `seed`,
/// `seed + 1`, … so each best-of-R result is at least its single run. The
/// exact search starts from the larger of B and D and so never reports
/// less than either, even when it stops on its budget.
pub fn five_algorithms(
    inst: &Instance,
    runs: usize,
    seed: u64,
    budget: Budget,
    info: &RowInfo,
) -> Result<Vec<ReportRow>> {
    let shape = Shape::of(info.experiment, inst, info.pref_len.clone(), info.seed);
    let mode = info.mode.as_str();
    let timed = |f: &dyn Fn() -> Matching| {
        let t = Instant::now();
        let m = f();
        (m, t.elapsed())
    };
    let best = |algorithm| {
        let cfg = ApproxConfig {
            algorithm,
            runs,
            seed,
        };
        best_of_runs_with(inst, &cfg, Execution::Sequential)
    };

    let (b, tb) = timed(&|| best(Algorithm::ThreeHalves));
    let (c, tc) = timed(&|| run_once(inst, Algorithm::ThreeHalves, seed));
    let (d, td) = timed(&|| best(Algorithm::Two));
    let (e, te) = timed(&|| run_once(inst, Algorithm::Two, seed));
    let b = verified(inst, b, "B")?;
    let c = verified(inst, c, "C")?;
    let d = verified(inst, d, "D")?;
    let e = verified(inst, e, "E")?;

    let warm = if b.size() >= d.size() { &b } else { &d };
    let a = exact(
        inst,
        &ExactOptions {
            mode: ExactMode::NoCoalitionRotate,
            budget,
            warm_start: Some(warm.clone()),
            seed,
        },
    )?;
    let a_size = verified(inst, a.matching, "A")?.size();
    let opt = a.proven_optimal.then_some(a_size);

    let mut rows = vec![shape.row(mode, Label::A, a_size, opt, a.wall_time, Some(a.nodes_explored))];
    for (label, m, t) in [(Label::B, &b, tb), (Label::C, &c, tc), (Label::D, &d, td), (Label::E, &e, te)] {
        rows.push(shape.row(mode, label, m.size(), opt, t, None));
    }
    Ok(rows)
}

/// Exact solve times with and without coalition rows.
#[derive(Clone, Debug)]
pub struct Exp0 {
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub pref_len: PrefLen,
    pub budget: Budget,
    pub seed: u64,
}

impl Default for Exp0 {
    fn default() -> Self {
        Self {
            sizes: vec![10],
            trials: 50,
            pref_len: PrefLen::Range(2, 5),
            budget: Budget::unlimited(),
            seed: 0,
        }
    }
}

pub fn run_experiment_0(cfg: &Exp0, exec: Execution) -> Result<ExperimentReport> {
    let jobs: Vec<(usize, usize)> = cfg
        .sizes
        .iter()
        .flat_map(|&n1| (0..cfg.trials).map(move |t| (n1, t)))
        .collect();
    let batches = exec.map(&jobs, |&(n1, trial)| -> Result<Vec<ReportRow>> {
        let seed = trial_seed(cfg.seed, n1, trial);
        let inst = generate(&GenParams::new(n1, cfg.pref_len, seed))?;
        let shape = Shape::of("exp0", &inst, cfg.pref_len.to_string(), seed);
        let mut rows = Vec::with_capacity(2);
        for mode in [ExactMode::WithCoalition, ExactMode::NoCoalitionRotate] {
            let r = exact(
                &inst,
                &ExactOptions {
                    mode,
                    budget: cfg.budget,
                    warm_start: None,
                    seed,
                },
            )?;
            let m = verified(&inst, r.matching, "A")?;
            let opt = r.proven_optimal.then_some(r.size);
            rows.push(shape.row(mode.label(), Label::A, m.size(), opt, r.wall_time, Some(r.nodes_explored)));
        }
        Ok(rows)
    });
    collect(batches)
}

fn collect(batches: Vec<Result<Vec<ReportRow>>>) -> Result<ExperimentReport> {
    let mut rows = Vec::new();
    for b in batches {
        rows.extend(b?);
    }
    Ok(ExperimentReport { rows })
}

/// Five-algorithm comparison over growing instance sizes.
#[derive(Clone, Debug)]
pub struct Exp1 {
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub runs: usize,
    pub pref_len: PrefLen,
    pub budget: Budget,
    pub seed: u64,
}

impl Default for Exp1 {
    fn default() -> Self {
        Self {
            sizes: vec![10],
            trials: 200,
            runs: DEFAULT_RUNS,
            pref_len: PrefLen::Range(2, 5),
            budget: Budget::unlimited(),
            seed: 0,
        }
    }
}

fn compare_generated(
    experiment: &'static str,
    jobs: &[(usize, usize)],
    base_seed: u64,
    params: impl Fn(usize, u64) -> GenParams + Sync,
    runs: usize,
    budget: Budget,
    exec: Execution,
) -> Result<ExperimentReport> {
    let batches = exec.map(jobs, |&(key, trial)| {
        let seed = trial_seed(base_seed, key, trial);
        let p = params(key, seed);
        let inst = generate(&p)?;
        let info = RowInfo {
            experiment,
            pref_len: p.pref_len.to_string(),
            seed,
            mode: ExactMode::NoCoalitionRotate.label().to_string(),
        };
        five_algorithms(&inst, runs, seed, budget, &info)
    });
    collect(batches)
}

pub fn run_experiment_1(cfg: &Exp1, exec: Execution) -> Result<ExperimentReport> {
    let jobs: Vec<(usize, usize)> = cfg
        .sizes
        .iter()
        .flat_map(|&n1| (0..cfg.trials).map(move |t| (n1, t)))
        .collect();
    let params = |n1, seed| GenParams::new(n1, cfg.pref_len, seed);
    compare_generated("exp1", &jobs, cfg.seed, params, cfg.runs, cfg.budget, exec)
}

/// Five-algorithm comparison over exact list lengths at a fixed size.
#[derive(Clone, Debug)]
pub struct Exp2 {
    pub n1: usize,
    pub lengths: Vec<usize>,
    pub trials: usize,
    pub runs: usize,
    pub budget: Budget,
    pub seed: u64,
}

impl Default for Exp2 {
    fn default() -> Self {
        Self {
            n1: 20,
            lengths: (2..=6).collect(),
            trials: 100,
            runs: DEFAULT_RUNS,
            budget: Budget::unlimited(),
            seed: 0,
        }
    }
}

pub fn run_experiment_2(cfg: &Exp2, exec: Execution) -> Result<ExperimentReport> {
    for &x in &cfg.lengths {
        GenParams::new(cfg.n1, PrefLen::Exact(x), cfg.seed).validate()?;
    }
    let jobs: Vec<(usize, usize)> = cfg
        .lengths
        .iter()
        .flat_map(|&x| (0..cfg.trials).map(move |t| (x, t)))
        .collect();
    let params = |x, seed| GenParams::new(cfg.n1, PrefLen::Exact(x), seed);
    compare_generated("exp2", &jobs, cfg.seed, params, cfg.runs, cfg.budget, exec)
}

/// Five-algorithm comparison under derived lecturer preferences.
#[derive(Clone, Debug)]
pub struct Exp3 {
    pub instances: Vec<(Instance, u64)>,
    pub modes: Vec<PopularityMode>,
    pub runs: usize,
    pub budget: Budget,
    pub seed: u64,
}

impl Exp3 {
    /// Stand-ins for every published dataset shape, generated from `seed`.
    pub fn dataset_stand_ins(seed: u64, budget: Budget) -> Result<Self> {
        let instances = crate::instances::DATASET_SHAPES
            .iter()
            .map(|&(year, ..)| {
                let p = GenParams::dataset(year, seed).expect("listed shape");
                generate(&p).map(|inst| (inst, seed))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            instances,
            modes: PopularityMode::ALL.to_vec(),
            runs: DEFAULT_RUNS,
            budget,
            seed,
        })
    }
}

pub fn run_experiment_3(cfg: &Exp3, exec: Execution) -> Result<ExperimentReport> {
    let jobs: Vec<(usize, PopularityMode)> = (0..cfg.instances.len())
        .flat_map(|i| cfg.modes.iter().map(move |&m| (i, m)))
        .collect();
    let batches = exec.map(&jobs, |&(i, mode)| {
        let (base, instance_seed) = &cfg.instances[i];
        let inst = derive_lecturer_prefs(base, mode, cfg.seed);
        let info = RowInfo {
            experiment: "exp3",
            pref_len: observed_pref_len(&inst),
            seed: *instance_seed,
            mode: mode.label().to_string(),
        };
        five_algorithms(&inst, cfg.runs, cfg.seed, cfg.budget, &info)
    });
    collect(batches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_instance;
    use crate::format::WORKED;

    fn sizes(rows: &[ReportRow]) -> Vec<usize> {
        rows.iter().map(|r| r.size).collect()
    }

    #[test]
    fn worked_five() {
        let inst = parse_instance(WORKED).unwrap();
        let info = RowInfo {
            experiment: "t",
            pref_len: observed_pref_len(&inst),
            seed: 1,
            mode: "m".into(),
        };
        let rows = five_algorithms(&inst, 10, 1, Budget::unlimited(), &info).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].algo, Label::A);
        assert_eq!(rows[0].opt, Some(3));
        assert_eq!(info.pref_len, "1-3");
        let s = sizes(&rows);
        assert!(s[0] >= s[1] && s[1] >= s[2] && s[0] >= s[3] && s[3] >= s[4]);
    }

    #[test]
    fn empty_inputs_give_empty_reports() {
        let e = Execution::Sequential;
        let r0 = run_experiment_0(&Exp0 { sizes: vec![], ..Exp0::default() }, e).unwrap();
        assert!(r0.is_empty());
        let r1 = run_experiment_1(&Exp1 { trials: 0, ..Exp1::default() }, e).unwrap();
        assert!(r1.is_empty());
        let r3 = run_experiment_3(
            &Exp3 {
                instances: vec![(parse_instance(WORKED).unwrap(), 0)],
                modes: vec![],
                runs: 5,
                budget: Budget::unlimited(),
                seed: 0,
            },
            e,
        )
        .unwrap();
        assert!(r3.is_empty());
    }

    #[test]
    fn overlong_lists_rejected() {
        let cfg = Exp2 {
            n1: 10,
            lengths: vec![2, 6],
            trials: 1,
            runs: 1,
            ..Exp2::default()
        };
        assert!(matches!(run_experiment_2(&cfg, Execution::Sequential), Err(Error::Param(_))));
    }

    #[test]
    fn rows_independent_of_execution() {
        let cfg = Exp1 {
            sizes: vec![10, 12],
            trials: 6,
            runs: 5,
            ..Exp1::default()
        };
        let strip = |r: ExperimentReport| -> Vec<(usize, u64, Label, usize)> {
            r.rows.iter().map(|x| (x.n1, x.seed, x.algo, x.size)).collect()
        };
        let a = strip(run_experiment_1(&cfg, Execution::Sequential).unwrap());
        let b = strip(run_experiment_1(&cfg, Execution::default()).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.len(), 2 * 6 * 5);
    }
}
