use std::time::Instant;

use super::OptimalResult;
use crate::error::{Error, Result};
use crate::model::{Instance, Matching, StudentId};
use crate::stability::is_stable;

/// Default node limit for the enumeration oracle.
pub const DEFAULT_ORACLE_NODES: u64 = 200_000_000;

struct Walk<'a, F> {
    inst: &'a Instance,
    m: Matching,
    project_load: Vec<usize>,
    lecturer_load: Vec<usize>,
    size: usize,
    nodes: u64,
    limit: u64,
    /// Subtrees that cannot reach this many assigned students are skipped.
    floor: usize,
    leaf: F,
}

impl<F: FnMut(&Matching, &mut usize)> Walk<'_, F> {
    fn go(&mut self, depth: usize) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(Error::SizeGuard { limit: self.limit });
        }
        let n1 = self.inst.n_students();
        if self.size + (n1 - depth) < self.floor {
            return Ok(());
        }
        if depth == n1 {
            (self.leaf)(&self.m, &mut self.floor);
            return Ok(());
        }
        let s = StudentId::new(depth);
        for &p in &self.inst.student(s).prefs {
            let l = self.inst.offerer(p);
            if self.project_load[p.index()] >= self.inst.project(p).capacity
                || self.lecturer_load[l.index()] >= self.inst.lecturer(l).capacity
            {
                continue;
            }
            self.project_load[p.index()] += 1;
            self.lecturer_load[l.index()] += 1;
            self.size += 1;
            self.m.set(s, Some(p));
            let r = self.go(depth + 1);
            self.m.set(s, None);
            self.size -= 1;
            self.project_load[p.index()] -= 1;
            self.lecturer_load[l.index()] -= 1;
            r?;
        }
        self.go(depth + 1)
    }
}

fn walk<F: FnMut(&Matching, &mut usize)>(inst: &Instance, limit: u64, leaf: F) -> Result<u64> {
    let mut w = Walk {
        inst,
        m: Matching::empty(inst.n_students()),
        project_load: vec![0; inst.n_projects()],
        lecturer_load: vec![0; inst.n_lecturers()],
        size: 0,
        nodes: 0,
        limit,
        floor: 0,
        leaf,
    };
    w.go(0)?;
    Ok(w.nodes)
}

/// Calls `f` on every stable matching of `inst`. Students are branched in
/// id order over their acceptable projects with spare capacity, then
/// "unassigned"; each complete assignment is checked against the stability
/// definition. Returns the number of search nodes.
pub fn for_each_stable(inst: &Instance, node_limit: u64, mut f: impl FnMut(&Matching)) -> Result<u64> {
    walk(inst, node_limit, |m, _| {
        if is_stable(inst, m).is_stable() {
            f(m);
        }
    })
}

/// Every stable matching, in search order.
pub fn enumerate_stable(inst: &Instance, node_limit: u64) -> Result<Vec<Matching>> {
    let mut out = Vec::new();
    for_each_stable(inst, node_limit, |m| out.push(m.clone()))?;
    Ok(out)
}

pub fn max_stable_oracle(inst: &Instance) -> Result<OptimalResult> {
    max_stable_oracle_with(inst, DEFAULT_ORACLE_NODES)
}

/// A maximum stable matching by enumeration; among maximum ones the
/// lexicographically smallest assignment vector (project numbers, 0 for
/// unassigned) wins. Leaves smaller than the best found are not checked.
pub fn max_stable_oracle_with(inst: &Instance, node_limit: u64) -> Result<OptimalResult> {
    let start = Instant::now();
    let mut best: Option<(usize, Vec<usize>, Matching)> = None;
    let mut history = Vec::new();
    let nodes = walk(inst, node_limit, |m, floor| {
        let size = m.size();
        if size < *floor {
            return;
        }
        if !is_stable(inst, m).is_stable() {
            return;
        }
        let key = m.as_numbers();
        let better = match &best {
            None => true,
            Some((bs, bk, _)) => size > *bs || (size == *bs && key < *bk),
        };
        if better {
            if best.as_ref().is_none_or(|(bs, _, _)| size > *bs) {
                history.push(size);
            }
            *floor = size;
            best = Some((size, key, m.clone()));
        }
    })?;
    let (size, _, matching) = best.expect("some stable matching always exists");
    Ok(OptimalResult {
        matching,
        size,
        nodes_explored: nodes,
        wall_time: start.elapsed(),
        mode: None,
        proven_optimal: true,
        incumbent_history: history,
        rejected_rotations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_instance;
    use crate::model::tests::worked;

    #[test]
    fn worked_stable_set() {
        let inst = worked();
        let all = enumerate_stable(&inst, 1_000_000).unwrap();
        let m1 = Matching::from_numbers(&inst, &[(1, 3), (2, 1)]).unwrap();
        let m2 = Matching::from_numbers(&inst, &[(1, 1), (2, 2), (3, 3)]).unwrap();
        let m3 = Matching::from_numbers(&inst, &[(1, 2), (2, 1), (3, 3)]).unwrap();
        assert!(all.contains(&m1));
        assert!(all.contains(&m3));
        assert!(!all.contains(&m2));
    }

    #[test]
    fn worked_maximum() {
        let r = max_stable_oracle(&worked()).unwrap();
        assert_eq!(r.size, 3);
        assert_eq!(r.matching.as_numbers(), vec![2, 1, 3]);
    }

    #[test]
    fn single_pair_has_one_stable_matching() {
        let inst = parse_instance("1 1 1\nP 1 1 1\nL 1 1 : 1\nS 1 : 1\n").unwrap();
        let all = enumerate_stable(&inst, 100).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].as_numbers(), vec![1]);
        assert_eq!(max_stable_oracle(&inst).unwrap().size, 1);
    }

    #[test]
    fn worked_without_p2() {
        // s1: p3 p1, s2: p1, s3: p3 with l1 offering only p1 now.
        let inst = parse_instance(
            "3 2 2\nP 1 1 1\nP 2 1 2\nL 1 2 : 1\nL 2 1 : 2\nS 1 : 2 1\nS 2 : 1\nS 3 : 2\n",
        )
        .unwrap();
        // Enumerated by hand: p1 and p2 have capacity 1 so at most two
        // students are ever assigned.
        let all = enumerate_stable(&inst, 1000).unwrap();
        assert!(!all.is_empty());
        assert!(all.iter().all(|m| m.size() == 2));
        assert_eq!(max_stable_oracle(&inst).unwrap().size, 2);
    }

    #[test]
    fn size_guard() {
        assert!(matches!(
            enumerate_stable(&worked(), 3),
            Err(Error::SizeGuard { limit: 3 })
        ));
    }
}
