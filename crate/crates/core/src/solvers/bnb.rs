use std::time::Instant;

use super::{Budget, ExactMode, OptimalResult};
use crate::approx::approx_three_halves;
use crate::error::{Error, Result};
use crate::ip::{build_model, lift_matching, IpModel};
use crate::model::{Instance, Matching, ProjectId, StudentId};
use crate::stability::{eliminate_coalitions, is_stable};

/// How often (in nodes) the wall clock is consulted.
const TIME_CHECK_INTERVAL: u64 = 1024;

#[derive(Clone, Debug, Default)]
pub struct ExactOptions {
    pub mode: ExactMode,
    pub budget: Budget,
    /// A stable matching to start from instead of a 3/2-approximation run.
    pub warm_start: Option<Matching>,
    /// Seed of the initial 3/2-approximation run.
    pub seed: u64,
}

/// Upper bound on the size of any completion of a partial assignment in
/// which `assigned` of the first `depth` students hold a project.
pub fn completion_bound(assigned: usize, depth: usize, n_students: usize) -> usize {
    assigned + (n_students - depth)
}

struct Search<'a> {
    inst: &'a Instance,
    model: IpModel,
    mode: ExactMode,
    m: Matching,
    size: usize,
    project_load: Vec<usize>,
    lecturer_load: Vec<usize>,
    /// Undecided students listing each project.
    pending: Vec<usize>,
    /// Sum of `pending` over each lecturer's projects.
    lecturer_pending: Vec<usize>,
    applicants: Vec<Vec<StudentId>>,
    incumbent: Matching,
    incumbent_size: usize,
    history: Vec<usize>,
    nodes: u64,
    rejected_rotations: u64,
    budget: Budget,
    start: Instant,
    out_of_budget: bool,
}

impl Search<'_> {
    fn over_budget(&mut self) -> bool {
        if self.budget.max_nodes.is_some_and(|n| self.nodes > n) {
            return true;
        }
        if let Some(limit) = self.budget.max_time {
            if self.nodes.is_multiple_of(TIME_CHECK_INTERVAL) && self.start.elapsed() > limit {
                return true;
            }
        }
        false
    }

    /// Whether `(s, p)` blocks, given final loads for `p`'s lecturer.
    fn blocks(&self, s: StudentId, p: ProjectId) -> bool {
        let inst = self.inst;
        let current = self.m.project_of(s);
        if let Some(q) = current {
            if q == p || !inst.student_prefers(s, p, q) {
                return false;
            }
        }
        if self.project_load[p.index()] >= inst.project(p).capacity {
            return false;
        }
        let l = inst.offerer(p);
        match current {
            Some(q) if inst.offerer(q) == l => inst.offerer_rank(p) < inst.offerer_rank(q),
            _ => {
                if self.lecturer_load[l.index()] < inst.lecturer(l).capacity {
                    return true;
                }
                let worst = inst
                    .lecturer(l)
                    .prefs
                    .iter()
                    .filter(|q| self.project_load[q.index()] > 0)
                    .map(|&q| inst.offerer_rank(q))
                    .max()
                    .unwrap_or(0);
                inst.offerer_rank(p) < worst
            }
        }
    }

    /// Lecturers whose projects no undecided student lists have final
    /// loads, so every pair with their projects can be judged now.
    fn closed_lecturer_blocks(&self, closed: &[usize]) -> bool {
        closed.iter().any(|&k| {
            self.inst.lecturers()[k].prefs.iter().any(|&p| {
                self.applicants[p.index()]
                    .iter()
                    .any(|&s| self.blocks(s, p))
            })
        })
    }

    /// Whether some pair of a decided student must block in every
    /// completion. A decided student `s` and a project `p` it prefers to
    /// its assignment stop blocking only if `p` ends full, or the offering
    /// lecturer ends full without preferring `p` to its worst non-empty
    /// project, or (same lecturer) the lecturer prefers the assignment.
    /// Loads only grow and the worst non-empty rank only rises, so a pair
    /// whose project and lecturer can no longer fill up is doomed.
    fn doomed(&self, depth: usize) -> bool {
        let inst = self.inst;
        let worst: Vec<usize> = inst
            .lecturers()
            .iter()
            .map(|l| {
                l.prefs
                    .iter()
                    .rev()
                    .find(|q| self.project_load[q.index()] > 0)
                    .map_or(0, |&q| inst.offerer_rank(q))
            })
            .collect();
        let can_fill_project = |p: ProjectId| {
            self.project_load[p.index()] + self.pending[p.index()] >= inst.project(p).capacity
        };
        let can_fill_lecturer = |k: usize| {
            self.lecturer_load[k] + self.lecturer_pending[k] >= inst.lecturers()[k].capacity
        };
        (0..depth).any(|i| {
            let s = StudentId::new(i);
            let current = self.m.project_of(s);
            let better = match current {
                Some(q) => &inst.student(s).prefs[..inst.student_rank_of(s, q).expect("acceptable") - 1],
                None => &inst.student(s).prefs[..],
            };
            better.iter().any(|&p| {
                let k = inst.offerer(p).index();
                let rank = inst.offerer_rank(p);
                match current {
                    Some(q) if inst.offerer(q).index() == k => {
                        rank < inst.offerer_rank(q) && !can_fill_project(p)
                    }
                    _ => {
                        !can_fill_project(p) && (rank < worst[k] || !can_fill_lecturer(k))
                    }
                }
            })
        })
    }

    /// Room left for undecided students: per lecturer, the smaller of its
    /// spare capacity and the spare capacity of its projects that some
    /// undecided student lists.
    fn room(&self) -> usize {
        let inst = self.inst;
        inst.lecturers()
            .iter()
            .map(|l| {
                let spare: usize = l
                    .prefs
                    .iter()
                    .filter(|p| self.pending[p.index()] > 0)
                    .map(|&p| inst.project(p).capacity - self.project_load[p.index()])
                    .sum();
                spare.min(l.capacity - self.lecturer_load[l.id.index()])
            })
            .sum()
    }

    /// Undecided students with at least one project that still has room.
    fn viable_undecided(&self, depth: usize) -> usize {
        let inst = self.inst;
        (depth..inst.n_students())
            .filter(|&i| {
                inst.student(StudentId::new(i)).prefs.iter().any(|&p| {
                    let l = inst.offerer(p);
                    self.project_load[p.index()] < inst.project(p).capacity
                        && self.lecturer_load[l.index()] < inst.lecturer(l).capacity
                })
            })
            .count()
    }

    fn accept_leaf(&mut self) -> Result<()> {
        let Some(values) = lift_matching(self.inst, &self.model, &self.m) else {
            return Ok(());
        };
        if !self.model.is_feasible(&values) {
            return Ok(());
        }
        let found = match self.mode {
            ExactMode::WithCoalition => self.m.clone(),
            ExactMode::NoCoalitionRotate => match eliminate_coalitions(self.inst, &self.m) {
                Ok(m) => m,
                Err(Error::RotationBrokeStability(_)) => {
                    self.rejected_rotations += 1;
                    return Ok(());
                }
                Err(e) => return Err(e),
            },
        };
        self.incumbent_size = found.size();
        self.incumbent = found;
        self.history.push(self.incumbent_size);
        Ok(())
    }

    fn go(&mut self, depth: usize) -> Result<()> {
        self.nodes += 1;
        if self.over_budget() {
            self.out_of_budget = true;
            return Ok(());
        }
        let n1 = self.inst.n_students();
        if completion_bound(self.size, depth, n1) <= self.incumbent_size
            || self.size + self.viable_undecided(depth).min(self.room()) <= self.incumbent_size
        {
            return Ok(());
        }
        if depth == n1 {
            return self.accept_leaf();
        }

        let s = StudentId::new(depth);
        let prefs = &self.inst.student(s).prefs;
        let mut closed = Vec::new();
        for &p in prefs {
            let k = self.inst.offerer(p).index();
            self.pending[p.index()] -= 1;
            self.lecturer_pending[k] -= 1;
            if self.lecturer_pending[k] == 0 {
                closed.push(k);
            }
        }

        for option in prefs.iter().copied().map(Some).chain([None]) {
            if self.out_of_budget {
                break;
            }
            if let Some(p) = option {
                let l = self.inst.offerer(p);
                if self.project_load[p.index()] >= self.inst.project(p).capacity
                    || self.lecturer_load[l.index()] >= self.inst.lecturer(l).capacity
                {
                    continue;
                }
                self.project_load[p.index()] += 1;
                self.lecturer_load[l.index()] += 1;
                self.size += 1;
            }
            self.m.set(s, option);

            let result = if self.closed_lecturer_blocks(&closed) || self.doomed(depth + 1) {
                Ok(())
            } else {
                self.go(depth + 1)
            };

            self.m.set(s, None);
            if let Some(p) = option {
                self.project_load[p.index()] -= 1;
                self.lecturer_load[self.inst.offerer(p).index()] -= 1;
                self.size -= 1;
            }
            result?;
        }

        for &p in prefs {
            self.pending[p.index()] += 1;
            self.lecturer_pending[self.inst.offerer(p).index()] += 1;
        }
        Ok(())
    }
}

/// [`solve_exact_with`] with default options.
pub fn solve_exact(inst: &Instance, mode: ExactMode, budget: &Budget) -> Result<OptimalResult> {
    solve_exact_with(
        inst,
        &ExactOptions {
            mode,
            budget: *budget,
            ..ExactOptions::default()
        },
    )
}

/// Maximum stable matching by depth-first branch and bound.
///
/// Students are branched in id order over their list, then "unassigned".
/// Branches exceeding a capacity are skipped, as are branches where a
/// lecturer whose loads are already final has a blocking pair, or where a
/// decided student has a pair that blocks however the rest is completed.
/// A subtree is cut when the assigned count plus the undecided students
/// that still have a project with room, or plus the remaining capacity
/// reachable by them, cannot beat the incumbent. A complete assignment is accepted iff the induced
/// variable assignment satisfies every row of the model for `opts.mode`;
/// in no-coalition mode it is then rotated coalition-free, and dropped if
/// the rotation left a blocking pair.
///
/// On budget exhaustion returns [`Error::BudgetExceeded`] with the
/// incumbent.
pub fn solve_exact_with(inst: &Instance, opts: &ExactOptions) -> Result<OptimalResult> {
    let start = Instant::now();
    let incumbent = match &opts.warm_start {
        Some(m) => {
            if !is_stable(inst, m).is_stable() {
                return Err(Error::Param("warm start is not a stable matching".into()));
            }
            m.clone()
        }
        None => approx_three_halves(inst, opts.seed),
    };
    let model = build_model(inst, opts.mode == ExactMode::WithCoalition);

    let mut pending = vec![0; inst.n_projects()];
    let mut lecturer_pending = vec![0; inst.n_lecturers()];
    for (_, p) in inst.acceptable_pairs() {
        pending[p.index()] += 1;
        lecturer_pending[inst.offerer(p).index()] += 1;
    }

    let mut search = Search {
        inst,
        model,
        mode: opts.mode,
        m: Matching::empty(inst.n_students()),
        size: 0,
        project_load: vec![0; inst.n_projects()],
        lecturer_load: vec![0; inst.n_lecturers()],
        pending,
        lecturer_pending,
        applicants: inst.applicants(),
        incumbent_size: incumbent.size(),
        history: vec![incumbent.size()],
        incumbent,
        nodes: 0,
        rejected_rotations: 0,
        budget: opts.budget,
        start,
        out_of_budget: false,
    };
    search.go(0)?;

    let result = OptimalResult {
        size: search.incumbent_size,
        matching: search.incumbent,
        nodes_explored: search.nodes,
        wall_time: start.elapsed(),
        mode: Some(opts.mode),
        proven_optimal: !search.out_of_budget,
        incumbent_history: search.history,
        rejected_rotations: search.rejected_rotations,
    };
    if search.out_of_budget {
        Err(Error::BudgetExceeded(Box::new(result)))
    } else {
        Ok(result)
    }
}
