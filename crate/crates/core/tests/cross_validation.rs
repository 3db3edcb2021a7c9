//! Library checks against naive re-implementations written directly from
//! the definitions.

use spap::approx::{best_of_runs, Algorithm, ApproxConfig};
use spap::instances::{generate, GenParams, PrefLen};
use spap::solvers::{
    completion_bound, enumerate_stable, max_stable_oracle, solve_exact, solve_exact_with, Budget,
    ExactMode, ExactOptions,
};
use spap::stability::{build_envy_graph, find_blocking_pairs, find_coalition, is_stable, BlockingType};
use spap::{Execution, Instance, Matching, ProjectId, StudentId};

/// Lower is better.
fn srank(inst: &Instance, s: StudentId, p: ProjectId) -> usize {
    inst.student(s).prefs.iter().position(|&q| q == p).unwrap()
}

fn lrank(inst: &Instance, p: ProjectId) -> usize {
    let l = inst.offerer(p);
    inst.lecturer(l).prefs.iter().position(|&q| q == p).unwrap()
}

/// Blocking pairs by the textbook definition, lowest clause letter first.
fn naive_blocking(inst: &Instance, m: &Matching) -> Vec<(StudentId, ProjectId, BlockingType)> {
    let mut out = Vec::new();
    for s in inst.student_ids() {
        let cur = m.project_of(s);
        for &p in &inst.student(s).prefs {
            if cur == Some(p) {
                continue;
            }
            let wants = match cur {
                None => true,
                Some(q) => srank(inst, s, p) < srank(inst, s, q),
            };
            let p_load = m.students_of(p).count();
            if !wants || p_load >= inst.project(p).capacity {
                continue;
            }
            let l = inst.offerer(p);
            let l_projects = &inst.lecturer(l).prefs;
            let l_load: usize = l_projects.iter().map(|&q| m.students_of(q).count()).sum();
            let with_l = cur.is_some_and(|q| inst.offerer(q) == l);
            let kind = if with_l {
                (lrank(inst, p) < lrank(inst, cur.unwrap())).then_some(BlockingType::A)
            } else if l_load < inst.lecturer(l).capacity {
                Some(BlockingType::B)
            } else {
                let worst = l_projects
                    .iter()
                    .filter(|&&q| m.students_of(q).count() > 0)
                    .map(|&q| lrank(inst, q))
                    .max();
                worst.is_some_and(|w| lrank(inst, p) < w).then_some(BlockingType::C)
            };
            if let Some(k) = kind {
                out.push((s, p, k));
            }
        }
    }
    out
}

/// Envy cycle existence via transitive closure.
fn naive_has_cycle(inst: &Instance, m: &Matching) -> bool {
    let n = inst.n_students();
    let mut reach = vec![vec![false; n]; n];
    for a in inst.student_ids() {
        for b in inst.student_ids() {
            if let (Some(pa), Some(pb)) = (m.project_of(a), m.project_of(b)) {
                if a != b && inst.student_rank_of(a, pb).is_some() && srank(inst, a, pb) < srank(inst, a, pa) {
                    reach[a.index()][b.index()] = true;
                }
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    (0..n).any(|i| reach[i][i])
}

fn random_matching(inst: &Instance, salt: u64) -> Matching {
    let mut m = Matching::empty(inst.n_students());
    let mut state = salt.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    for s in inst.student_ids() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let prefs = &inst.student(s).prefs;
        let pick = (state >> 33) as usize % (prefs.len() + 1);
        if pick < prefs.len() {
            let p = prefs[pick];
            let fits = m.students_of(p).count() < inst.project(p).capacity
                && m.lecturer_loads(inst)[inst.offerer(p).index()] < inst.lecturer(inst.offerer(p)).capacity;
            if fits {
                m.set(s, Some(p));
            }
        }
    }
    m
}

#[test]
fn stability_checks_match_naive_definitions() {
    for seed in 0..300u64 {
        let inst = generate(&GenParams::new(12, PrefLen::Range(1, 5), seed)).unwrap();
        for salt in 0..20 {
            let m = random_matching(&inst, seed * 100 + salt);
            let got: Vec<_> = find_blocking_pairs(&inst, &m)
                .unwrap()
                .into_iter()
                .map(|b| (b.student, b.project, b.kind))
                .collect();
            assert_eq!(got, naive_blocking(&inst, &m), "seed {seed} salt {salt}");
            let g = build_envy_graph(&inst, &m);
            assert_eq!(find_coalition(&g).is_some(), naive_has_cycle(&inst, &m));
            if let Some(cycle) = find_coalition(&g) {
                for (k, &a) in cycle.iter().enumerate() {
                    assert!(g.has_arc(a, cycle[(k + 1) % cycle.len()]));
                }
            }
        }
    }
}

#[test]
fn exact_matches_oracle_on_varied_shapes() {
    let shapes = [
        (8, PrefLen::Range(1, 3)),
        (9, PrefLen::Exact(2)),
        (10, PrefLen::Exact(4)),
        (11, PrefLen::Range(2, 5)),
    ];
    let jobs: Vec<(usize, PrefLen, u64)> = shapes
        .iter()
        .flat_map(|&(n1, len)| (0..40).map(move |s| (n1, len, s)))
        .collect();
    let out = Execution::default().map(&jobs, |&(n1, len, seed)| {
        let inst = generate(&GenParams::new(n1, len, seed)).unwrap();
        let opt = max_stable_oracle(&inst).unwrap();
        assert!(is_stable(&inst, &opt.matching).is_stable());
        for mode in [ExactMode::WithCoalition, ExactMode::NoCoalitionRotate] {
            let r = solve_exact(&inst, mode, &Budget::unlimited()).unwrap();
            assert_eq!(r.size, opt.size, "n1 {n1} seed {seed} {mode}");
            assert!(is_stable(&inst, &r.matching).is_stable());
            assert!(r.incumbent_history.windows(2).all(|w| w[0] < w[1]));
        }
        opt.size
    });
    assert_eq!(out.len(), 160);
}

#[test]
fn oracle_enumeration_is_exactly_the_stable_set() {
    for seed in 0..40u64 {
        let inst = generate(&GenParams::new(7, PrefLen::Range(1, 3), seed)).unwrap();
        let stable = enumerate_stable(&inst, 10_000_000).unwrap();
        for m in &stable {
            assert!(naive_blocking(&inst, m).is_empty() && !naive_has_cycle(&inst, m));
        }
        let best = stable.iter().map(Matching::size).max().unwrap();
        assert_eq!(max_stable_oracle(&inst).unwrap().size, best);
    }
}

#[test]
fn completion_bound_is_admissible() {
    // The bound may never undercut the best completion of any prefix
    // assignment, in particular of the optimum's own prefixes.
    for seed in 0..50u64 {
        let inst = generate(&GenParams::new(10, PrefLen::Range(2, 5), seed)).unwrap();
        let opt = max_stable_oracle(&inst).unwrap();
        let n1 = inst.n_students();
        let mut assigned = 0;
        for depth in 0..=n1 {
            assert!(completion_bound(assigned, depth, n1) >= opt.size);
            if depth < n1 && opt.matching.project_of(StudentId::new(depth)).is_some() {
                assigned += 1;
            }
        }
    }
}

#[test]
fn budget_exhaustion_keeps_a_stable_incumbent() {
    let inst = generate(&GenParams::new(30, PrefLen::Range(2, 5), 3)).unwrap();
    let opts = ExactOptions {
        budget: Budget::nodes(50),
        ..ExactOptions::default()
    };
    match solve_exact_with(&inst, &opts) {
        Err(spap::Error::BudgetExceeded(r)) => {
            assert!(!r.proven_optimal);
            assert!(is_stable(&inst, &r.matching).is_stable());
        }
        Ok(r) => assert!(r.proven_optimal),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn worked_best_of_100_three_halves() {
    let inst = spap::format::parse_instance(spap::format::WORKED).unwrap();
    let m = best_of_runs(
        &inst,
        &ApproxConfig {
            algorithm: Algorithm::ThreeHalves,
            runs: 100,
            seed: 0,
        },
    );
    assert!(m.size() >= 2);
    assert_eq!(m.size(), 3);
}
