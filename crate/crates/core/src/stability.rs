//! Feasibility and stability checks, envy graphs and coalition elimination.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Instance, LecturerId, Matching, ProjectId, StudentId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    WrongStudentCount { expected: usize, found: usize },
    UnknownProject { student: StudentId, project: ProjectId },
    NotAcceptable { student: StudentId, project: ProjectId },
    ProjectOversubscribed { project: ProjectId, load: usize, capacity: usize },
    LecturerOversubscribed { lecturer: LecturerId, load: usize, capacity: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::WrongStudentCount { expected, found } => {
                write!(f, "matching covers {found} students, instance has {expected}")
            }
            Self::UnknownProject { student, project } => {
                write!(f, "{student} assigned to unknown project {project}")
            }
            Self::NotAcceptable { student, project } => {
                write!(f, "{student} assigned to unacceptable {project}")
            }
            Self::ProjectOversubscribed { project, load, capacity } => {
                write!(f, "{project} oversubscribed ({load} > {capacity})")
            }
            Self::LecturerOversubscribed { lecturer, load, capacity } => {
                write!(f, "{lecturer} oversubscribed ({load} > {capacity})")
            }
        }
    }
}

/// Every reason `m` fails to be a matching of `inst`. Empty iff it is one.
pub fn check_feasible(inst: &Instance, m: &Matching) -> Vec<Violation> {
    if m.n_students() != inst.n_students() {
        return vec![Violation::WrongStudentCount {
            expected: inst.n_students(),
            found: m.n_students(),
        }];
    }
    let mut out = Vec::new();
    for (s, p) in m.pairs() {
        if p.index() >= inst.n_projects() {
            out.push(Violation::UnknownProject { student: s, project: p });
        } else if inst.student_rank_of(s, p).is_none() {
            out.push(Violation::NotAcceptable { student: s, project: p });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for (p, load) in inst.projects().iter().zip(m.project_loads(inst)) {
        if load > p.capacity {
            out.push(Violation::ProjectOversubscribed {
                project: p.id,
                load,
                capacity: p.capacity,
            });
        }
    }
    for (l, load) in inst.lecturers().iter().zip(m.lecturer_loads(inst)) {
        if load > l.capacity {
            out.push(Violation::LecturerOversubscribed {
                lecturer: l.id,
                load,
                capacity: l.capacity,
            });
        }
    }
    out
}

fn require_feasible(inst: &Instance, m: &Matching) -> Result<()> {
    match check_feasible(inst, m).first() {
        None => Ok(()),
        Some(v) => Err(Error::InfeasibleMatching(v.to_string())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockingType {
    /// Student already with the lecturer, who prefers the new project.
    A,
    /// Lecturer undersubscribed.
    B,
    /// Lecturer prefers the project to its worst non-empty one.
    C,
}

impl fmt::Display for BlockingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::A => "1a",
            Self::B => "1b",
            Self::C => "1c",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockingPair {
    pub student: StudentId,
    pub project: ProjectId,
    pub kind: BlockingType,
}

impl fmt::Display for BlockingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BLOCK {} {} type={}", self.student, self.project, self.kind)
    }
}

/// Load summary of a feasible matching used by the blocking-pair test.
struct Loads {
    project: Vec<usize>,
    lecturer: Vec<usize>,
    /// Rank of each lecturer's worst non-empty project, 0 if none.
    worst_rank: Vec<usize>,
}

impl Loads {
    fn of(inst: &Instance, m: &Matching) -> Self {
        let project = m.project_loads(inst);
        let lecturer = m.lecturer_loads(inst);
        let mut worst_rank = vec![0; inst.n_lecturers()];
        for p in inst.project_ids() {
            if project[p.index()] > 0 {
                let k = inst.offerer(p).index();
                worst_rank[k] = worst_rank[k].max(inst.offerer_rank(p));
            }
        }
        Self {
            project,
            lecturer,
            worst_rank,
        }
    }
}

/// Classifies `(s, p)` where `s` is unassigned or prefers `p` to `M(s)`.
fn classify(
    inst: &Instance,
    loads: &Loads,
    current: Option<ProjectId>,
    p: ProjectId,
) -> Option<BlockingType> {
    if loads.project[p.index()] >= inst.project(p).capacity {
        return None;
    }
    let l = inst.offerer(p);
    let rank_p = inst.offerer_rank(p);
    match current {
        Some(q) if inst.offerer(q) == l => {
            (rank_p < inst.offerer_rank(q)).then_some(BlockingType::A)
        }
        _ => {
            if loads.lecturer[l.index()] < inst.lecturer(l).capacity {
                Some(BlockingType::B)
            } else if rank_p < loads.worst_rank[l.index()] {
                Some(BlockingType::C)
            } else {
                None
            }
        }
    }
}

/// All blocking pairs of a feasible matching, ordered by student then by
/// the student's preference. A pair satisfying several clauses is reported
/// under the lowest letter.
pub fn find_blocking_pairs(inst: &Instance, m: &Matching) -> Result<Vec<BlockingPair>> {
    require_feasible(inst, m)?;
    let loads = Loads::of(inst, m);
    let mut out = Vec::new();
    for s in inst.students() {
        let current = m.project_of(s.id);
        for &p in &s.prefs {
            if Some(p) == current {
                break;
            }
            if let Some(kind) = classify(inst, &loads, current, p) {
                out.push(BlockingPair {
                    student: s.id,
                    project: p,
                    kind,
                });
            }
        }
    }
    Ok(out)
}

/// Envy graph over the students of a matching. Unassigned students are
/// isolated vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvyGraph {
    assigned: Vec<bool>,
    /// Out-neighbours, ascending.
    adj: Vec<Vec<StudentId>>,
}

impl EnvyGraph {
    pub fn n_students(&self) -> usize {
        self.adj.len()
    }

    /// Assigned students, ascending.
    pub fn vertices(&self) -> impl Iterator<Item = StudentId> + '_ {
        self.assigned
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| StudentId::new(i))
    }

    pub fn successors(&self, s: StudentId) -> &[StudentId] {
        &self.adj[s.index()]
    }

    pub fn has_arc(&self, from: StudentId, to: StudentId) -> bool {
        self.adj[from.index()].binary_search(&to).is_ok()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (StudentId, StudentId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, out)| out.iter().map(move |&t| (StudentId::new(i), t)))
    }

    pub fn n_arcs(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }
}

/// Arc `(s, t)` iff both are assigned and `s` prefers `M(t)` to `M(s)`.
pub fn build_envy_graph(inst: &Instance, m: &Matching) -> EnvyGraph {
    let n1 = inst.n_students();
    let mut holders: Vec<Vec<StudentId>> = vec![Vec::new(); inst.n_projects()];
    for (s, p) in m.pairs() {
        holders[p.index()].push(s);
    }
    let mut adj = vec![Vec::new(); n1];
    let mut assigned = vec![false; n1];
    for (s, q) in m.pairs() {
        assigned[s.index()] = true;
        let out = &mut adj[s.index()];
        for &p in &inst.student(s).prefs {
            if p == q {
                break;
            }
            out.extend_from_slice(&holders[p.index()]);
        }
        out.sort_unstable();
    }
    EnvyGraph { assigned, adj }
}

/// Some directed cycle of `g`, in arc order, or `None` if `g` is acyclic.
///
/// Depth-first from the lowest student id with successors in ascending
/// order; the first cycle closed is returned.
pub fn find_coalition(g: &EnvyGraph) -> Option<Vec<StudentId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let n = g.n_students();
    let mut mark = vec![Mark::New; n];
    let mut path: Vec<StudentId> = Vec::new();
    let mut cursor: Vec<usize> = Vec::new();

    for root in g.vertices() {
        if mark[root.index()] != Mark::New {
            continue;
        }
        mark[root.index()] = Mark::Open;
        path.push(root);
        cursor.push(0);
        while let Some(&top) = path.last() {
            let pos = cursor.last_mut().expect("cursor tracks path");
            let succ = g.successors(top);
            if *pos == succ.len() {
                mark[top.index()] = Mark::Done;
                path.pop();
                cursor.pop();
                continue;
            }
            let next = succ[*pos];
            *pos += 1;
            match mark[next.index()] {
                Mark::New => {
                    mark[next.index()] = Mark::Open;
                    path.push(next);
                    cursor.push(0);
                }
                Mark::Open => {
                    let start = path.iter().position(|&v| v == next).expect("open vertex on path");
                    return Some(path[start..].to_vec());
                }
                Mark::Done => {}
            }
        }
    }
    None
}

/// Topological order of all students (isolated ones included), smallest
/// available id first, or `None` if `g` has a cycle.
pub fn topological_order(g: &EnvyGraph) -> Option<Vec<StudentId>> {
    let n = g.n_students();
    let mut indegree = vec![0usize; n];
    for (_, t) in g.arcs() {
        indegree[t.index()] += 1;
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(StudentId::new(i));
        for &t in &g.adj[i] {
            indegree[t.index()] -= 1;
            if indegree[t.index()] == 0 {
                ready.push(Reverse(t.index()));
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Each student on the cycle takes the project of the next one.
fn rotate(m: &mut Matching, cycle: &[StudentId]) {
    let taken: Vec<Option<ProjectId>> = cycle.iter().map(|&s| m.project_of(s)).collect();
    for (t, &s) in cycle.iter().enumerate() {
        m.set(s, taken[(t + 1) % cycle.len()]);
    }
}

fn rank_sum(inst: &Instance, m: &Matching) -> usize {
    m.pairs()
        .map(|(s, p)| inst.student_rank_of(s, p).unwrap_or(0))
        .sum()
}

/// Rotates envy cycles away until the matching is coalition-free.
///
/// The input must be feasible and blocking-pair free. Project and lecturer
/// loads are unchanged by every rotation. The output is re-checked for
/// blocking pairs and [`Error::RotationBrokeStability`] is returned if one
/// appeared.
pub fn eliminate_coalitions(inst: &Instance, m: &Matching) -> Result<Matching> {
    let before = find_blocking_pairs(inst, m)?;
    if let Some(first) = before.first() {
        return Err(Error::BlockingPairsPresent {
            count: before.len(),
            first: first.to_string(),
        });
    }
    let mut out = m.clone();
    let mut ranks = rank_sum(inst, &out);
    while let Some(cycle) = find_coalition(&build_envy_graph(inst, &out)) {
        rotate(&mut out, &cycle);
        let next = rank_sum(inst, &out);
        debug_assert!(next < ranks, "rotation must improve every student on the cycle");
        ranks = next;
    }
    debug_assert_eq!(out.project_loads(inst), m.project_loads(inst));
    if let Some(bp) = find_blocking_pairs(inst, &out)?.first() {
        return Err(Error::RotationBrokeStability(bp.to_string()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Infeasible(Vec<Violation>),
    Blocking(Vec<BlockingPair>),
    Coalition(Vec<StudentId>),
}

impl Verdict {
    pub fn is_stable(&self) -> bool {
        matches!(self, Self::Stable)
    }
}

/// Full stability verdict. Blocking pairs take precedence over coalitions.
pub fn is_stable(inst: &Instance, m: &Matching) -> Verdict {
    let violations = check_feasible(inst, m);
    if !violations.is_empty() {
        return Verdict::Infeasible(violations);
    }
    let blocking = find_blocking_pairs(inst, m).expect("feasibility checked above");
    if !blocking.is_empty() {
        return Verdict::Blocking(blocking);
    }
    match find_coalition(&build_envy_graph(inst, m)) {
        Some(cycle) => Verdict::Coalition(cycle),
        None => Verdict::Stable,
    }
}

/// `COALITION s1,s2` line for a cycle.
pub fn format_coalition(cycle: &[StudentId]) -> String {
    let names: Vec<String> = cycle.iter().map(ToString::to_string).collect();
    format!("COALITION {}", names.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::worked;

    fn sid(n: usize) -> StudentId {
        StudentId::from_number(n).unwrap()
    }
    fn pid(n: usize) -> ProjectId {
        ProjectId::from_number(n).unwrap()
    }
    fn m(inst: &Instance, pairs: &[(usize, usize)]) -> Matching {
        Matching::from_numbers(inst, pairs).unwrap()
    }

    #[test]
    fn feasibility() {
        let inst = worked();
        assert!(check_feasible(&inst, &m(&inst, &[(1, 3), (2, 1)])).is_empty());
        assert!(check_feasible(&inst, &Matching::empty(3)).is_empty());
        let v = check_feasible(&inst, &m(&inst, &[(1, 3), (3, 3)]));
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].to_string(), "p3 oversubscribed (2 > 1)");
        assert_eq!(v[1].to_string(), "l2 oversubscribed (2 > 1)");
        let raw = Matching::from_assignment(vec![None, Some(pid(3)), None]);
        assert!(matches!(check_feasible(&inst, &raw)[0], Violation::NotAcceptable { .. }));
    }

    #[test]
    fn blocking_pairs_on_worked() {
        let inst = worked();
        assert!(find_blocking_pairs(&inst, &m(&inst, &[(1, 3), (2, 1)])).unwrap().is_empty());
        assert!(find_blocking_pairs(&inst, &m(&inst, &[(1, 2), (2, 1), (3, 3)]))
            .unwrap()
            .is_empty());

        // Only s2 assigned (to p1). Checked clause by clause over the six
        // acceptable pairs: (s1,p3) 1b, (s1,p2) 1b (l1 has 1 < 2),
        // (s1,p1) p1 full, (s2,*) s2 holds its first choice, (s3,p3) 1b.
        let bp = find_blocking_pairs(&inst, &m(&inst, &[(2, 1)])).unwrap();
        let got: Vec<(usize, usize, BlockingType)> = bp
            .iter()
            .map(|b| (b.student.number(), b.project.number(), b.kind))
            .collect();
        assert_eq!(
            got,
            vec![
                (1, 3, BlockingType::B),
                (1, 2, BlockingType::B),
                (3, 3, BlockingType::B)
            ]
        );
        assert_eq!(bp[0].to_string(), "BLOCK s1 p3 type=1b");
    }

    #[test]
    fn blocking_pair_types_a_and_c() {
        // l1 offers p1 > p2 (caps 1), capacity 1.
        let inst = crate::format::parse_instance(
            "2 2 1\nP 1 1 1\nP 2 1 1\nL 1 1 : 1 2\nS 1 : 1 2\nS 2 : 1\n",
        )
        .unwrap();
        let bp = find_blocking_pairs(&inst, &m(&inst, &[(1, 2)])).unwrap();
        assert_eq!(bp.len(), 2);
        assert_eq!(bp[0].kind, BlockingType::A);
        assert_eq!(bp[1].kind, BlockingType::C);
        assert_eq!(bp[1].student, sid(2));
    }

    #[test]
    fn infeasible_input_is_an_error() {
        let inst = worked();
        assert!(matches!(
            find_blocking_pairs(&inst, &m(&inst, &[(1, 3), (3, 3)])),
            Err(Error::InfeasibleMatching(_))
        ));
    }

    #[test]
    fn envy_graph_of_m2() {
        let inst = worked();
        let g = build_envy_graph(&inst, &m(&inst, &[(1, 1), (2, 2), (3, 3)]));
        let arcs: Vec<(usize, usize)> = g.arcs().map(|(a, b)| (a.number(), b.number())).collect();
        assert_eq!(arcs, vec![(1, 2), (1, 3), (2, 1)]);
        assert_eq!(find_coalition(&g), Some(vec![sid(1), sid(2)]));
        assert!(topological_order(&g).is_none());
    }

    #[test]
    fn envy_graph_of_m3() {
        let inst = worked();
        let g = build_envy_graph(&inst, &m(&inst, &[(1, 2), (2, 1), (3, 3)]));
        let arcs: Vec<(usize, usize)> = g.arcs().map(|(a, b)| (a.number(), b.number())).collect();
        assert_eq!(arcs, vec![(1, 3)]);
        assert_eq!(find_coalition(&g), None);
        assert_eq!(topological_order(&g), Some(vec![sid(1), sid(2), sid(3)]));
    }

    #[test]
    fn empty_matching_graph() {
        let inst = worked();
        let g = build_envy_graph(&inst, &Matching::empty(3));
        assert_eq!(g.n_arcs(), 0);
        assert_eq!(g.vertices().count(), 0);
        assert_eq!(find_coalition(&g), None);
    }

    #[test]
    fn rotation_turns_m2_into_m3() {
        let inst = worked();
        let m2 = m(&inst, &[(1, 1), (2, 2), (3, 3)]);
        let m3 = m(&inst, &[(1, 2), (2, 1), (3, 3)]);
        assert_eq!(eliminate_coalitions(&inst, &m2).unwrap(), m3);
        assert_eq!(eliminate_coalitions(&inst, &m3).unwrap(), m3);
    }

    #[test]
    fn elimination_rejects_blocking_input() {
        let inst = worked();
        assert!(matches!(
            eliminate_coalitions(&inst, &m(&inst, &[(2, 1)])),
            Err(Error::BlockingPairsPresent { .. })
        ));
    }

    #[test]
    fn rotation_can_create_a_blocking_pair() {
        // s1 sits at q(p1) of l1 (q > p on l1's list), envies s2 at r(p3);
        // s2 envies s1. Swapping leaves l1 undersubscribed while s1, now
        // outside l1, still prefers p(p2): a 1b pair.
        let inst = crate::format::parse_instance(
            "2 3 2\nP 1 1 1\nP 2 1 1\nP 3 1 2\nL 1 2 : 1 2\nL 2 1 : 3\nS 1 : 2 3 1\nS 2 : 1 3\n",
        )
        .unwrap();
        let start = m(&inst, &[(1, 1), (2, 3)]);
        assert!(find_blocking_pairs(&inst, &start).unwrap().is_empty());
        assert!(matches!(is_stable(&inst, &start), Verdict::Coalition(_)));
        assert!(matches!(
            eliminate_coalitions(&inst, &start),
            Err(Error::RotationBrokeStability(_))
        ));
    }

    #[test]
    fn verdicts() {
        let inst = worked();
        assert_eq!(is_stable(&inst, &m(&inst, &[(1, 3), (2, 1)])), Verdict::Stable);
        assert_eq!(
            is_stable(&inst, &m(&inst, &[(1, 1), (2, 2), (3, 3)])),
            Verdict::Coalition(vec![sid(1), sid(2)])
        );
        assert!(matches!(is_stable(&inst, &m(&inst, &[(2, 1)])), Verdict::Blocking(_)));
        assert_eq!(format_coalition(&[sid(1), sid(2)]), "COALITION s1,s2");
    }
}
