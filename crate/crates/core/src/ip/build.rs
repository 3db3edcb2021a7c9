use super::{Constraint, Family, IpModel, Sense, VarId, VarKind, VarRole, Variable};
use crate::model::Instance;

/// Linear expression with terms kept in first-insertion order and
/// duplicate variables merged.
#[derive(Default)]
struct Expr {
    terms: Vec<(VarId, i64)>,
    constant: i64,
}

impl Expr {
    fn add(&mut self, v: VarId, c: i64) -> &mut Self {
        match self.terms.iter_mut().find(|(u, _)| *u == v) {
            Some(t) => t.1 += c,
            None => self.terms.push((v, c)),
        }
        self
    }

    fn add_all(&mut self, vs: impl IntoIterator<Item = VarId>, c: i64) -> &mut Self {
        for v in vs {
            self.add(v, c);
        }
        self
    }

    fn constant(&mut self, c: i64) -> &mut Self {
        self.constant += c;
        self
    }

    /// `self <sense> bound` as a row.
    fn row(&mut self, family: Family, name: String, sense: Sense, bound: i64) -> Constraint {
        let terms = std::mem::take(&mut self.terms)
            .into_iter()
            .filter(|&(_, c)| c != 0)
            .collect();
        Constraint {
            family,
            name,
            terms,
            sense,
            rhs: bound - std::mem::take(&mut self.constant),
        }
    }
}

struct Builder {
    variables: Vec<Variable>,
}

impl Builder {
    fn var(&mut self, name: String, kind: VarKind, lower: i64, upper: i64, role: VarRole) -> VarId {
        let id = VarId(self.variables.len() as u32);
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
            role,
        });
        id
    }

    fn binary(&mut self, name: String, role: VarRole) -> VarId {
        self.var(name, VarKind::Binary, 0, 1, role)
    }
}

/// Builds the model for `inst`. With `with_coalition == false` the envy
/// and labelling variables and rows are left out, so feasible solutions
/// are exactly the blocking-pair-free matchings.
pub fn build_model(inst: &Instance, with_coalition: bool) -> IpModel {
    let n1 = inst.n_students();
    let n2 = inst.n_projects();
    let n3 = inst.n_lecturers();
    let mut b = Builder {
        variables: Vec::new(),
    };

    let x: Vec<Vec<(usize, VarId)>> = inst
        .students()
        .iter()
        .map(|s| {
            s.prefs
                .iter()
                .map(|&p| {
                    let (i, j) = (s.id.index(), p.index());
                    let v = b.binary(
                        format!("x_{}_{}", i + 1, j + 1),
                        VarRole::Assign { student: i, project: j },
                    );
                    (j, v)
                })
                .collect()
        })
        .collect();
    let alpha: Vec<VarId> = (0..n2)
        .map(|j| b.binary(format!("alpha_{}", j + 1), VarRole::ProjectUnder { project: j }))
        .collect();
    let delta: Vec<VarId> = (0..n3)
        .map(|k| b.binary(format!("delta_{}", k + 1), VarRole::LecturerUnder { lecturer: k }))
        .collect();
    let eta: Vec<VarId> = inst
        .projects()
        .iter()
        .map(|p| {
            let (j, k) = (p.id.index(), p.lecturer.index());
            b.binary(
                format!("eta_{}_{}", j + 1, k + 1),
                VarRole::LecturerFullPrefers { project: j, lecturer: k },
            )
        })
        .collect();
    let mut e = vec![None; n1 * n1];
    let mut v = Vec::new();
    if with_coalition {
        for i in 0..n1 {
            for ip in 0..n1 {
                if i != ip {
                    e[i * n1 + ip] = Some(b.binary(
                        format!("e_{}_{}", i + 1, ip + 1),
                        VarRole::Envy { from: i, to: ip },
                    ));
                }
            }
        }
        v = (0..n1)
            .map(|i| {
                b.var(
                    format!("v_{}", i + 1),
                    VarKind::Integer,
                    1,
                    n1 as i64,
                    VarRole::Label { student: i },
                )
            })
            .collect();
    }

    let x_of = |i: usize, j: usize| x[i].iter().find(|&&(p, _)| p == j).map(|&(_, v)| v);
    // x_{i',j} over all students i' for a fixed project, student order.
    let mut by_project: Vec<Vec<VarId>> = vec![Vec::new(); n2];
    for row in &x {
        for &(j, var) in row {
            by_project[j].push(var);
        }
    }
    let by_projects = |projects: &[crate::model::ProjectId]| {
        let mut out: Vec<(usize, VarId)> = Vec::new();
        for p in projects {
            for &var in &by_project[p.index()] {
                out.push((var.index(), var));
            }
        }
        // Student-major, then list order, like the x registry.
        out.sort_unstable_by_key(|&(idx, _)| idx);
        out.into_iter().map(|(_, v)| v)
    };

    let mut rows: Vec<Constraint> = Vec::new();
    let mut ex = Expr::default();

    // (1) each student at most one project
    for s in inst.students() {
        let i = s.id.index();
        ex.add_all(x[i].iter().map(|&(_, v)| v), 1);
        rows.push(ex.row(Family::StudentAssignment, format!("c1_s{}", i + 1), Sense::Le, 1));
    }
    // (2) project capacity
    for p in inst.projects() {
        let j = p.id.index();
        ex.add_all(by_project[j].iter().copied(), 1);
        rows.push(ex.row(
            Family::ProjectCapacity,
            format!("c2_p{}", j + 1),
            Sense::Le,
            p.capacity as i64,
        ));
    }
    // (3) lecturer capacity
    for l in inst.lecturers() {
        let k = l.id.index();
        ex.add_all(by_projects(&l.prefs), 1);
        rows.push(ex.row(
            Family::LecturerCapacity,
            format!("c3_l{}", k + 1),
            Sense::Le,
            l.capacity as i64,
        ));
    }
    // (4) c_j alpha_j >= c_j - |M(p_j)|
    for p in inst.projects() {
        let j = p.id.index();
        let c = p.capacity as i64;
        ex.add(alpha[j], c).add_all(by_project[j].iter().copied(), 1);
        rows.push(ex.row(Family::ProjectUnder, format!("c4_p{}", j + 1), Sense::Ge, c));
    }

    // theta_{i,j} = 1 - sum_{S_{i,j}} x_{i,j'}
    let theta = |ex: &mut Expr, i: usize, r: usize| {
        let prefix = &inst.students()[i].prefs[..=r];
        ex.constant(1)
            .add_all(prefix.iter().map(|p| x_of(i, p.index()).expect("acceptable")), -1);
    };

    // (5) theta + alpha + gamma <= 2, gamma = sum_{T_{k,j} ∩ A_i} x_{i,j'}
    for s in inst.students() {
        let i = s.id.index();
        for (r, &p) in s.prefs.iter().enumerate() {
            let j = p.index();
            theta(&mut ex, i, r);
            ex.add(alpha[j], 1);
            ex.add_all(inst.lecturer_worse(p).iter().filter_map(|q| x_of(i, q.index())), 1);
            rows.push(ex.row(
                Family::BlockingA,
                format!("c5_s{}_p{}", i + 1, j + 1),
                Sense::Le,
                2,
            ));
        }
    }
    // (6) d_k delta_k >= d_k - |M(l_k)|
    for l in inst.lecturers() {
        let k = l.id.index();
        let d = l.capacity as i64;
        ex.add(delta[k], d).add_all(by_projects(&l.prefs), 1);
        rows.push(ex.row(Family::LecturerUnder, format!("c6_l{}", k + 1), Sense::Ge, d));
    }

    // beta_{i,k} = sum_{P_k ∩ A_i} x_{i,j'}
    let one_minus_beta = |ex: &mut Expr, i: usize, k: usize| {
        let offered = &inst.lecturers()[k].prefs;
        ex.constant(1)
            .add_all(offered.iter().filter_map(|q| x_of(i, q.index())), -1);
    };

    // (7) theta + alpha + (1 - beta) + delta <= 3
    for s in inst.students() {
        let i = s.id.index();
        for (r, &p) in s.prefs.iter().enumerate() {
            let (j, k) = (p.index(), inst.offerer(p).index());
            theta(&mut ex, i, r);
            ex.add(alpha[j], 1);
            one_minus_beta(&mut ex, i, k);
            ex.add(delta[k], 1);
            rows.push(ex.row(
                Family::BlockingB,
                format!("c7_s{}_p{}", i + 1, j + 1),
                Sense::Le,
                3,
            ));
        }
    }
    // (8) d_k eta_{j,k} >= d_k - sum_{i'} sum_{D_{k,j}} x_{i',j'}
    for p in inst.projects() {
        let (j, k) = (p.id.index(), p.lecturer.index());
        let d = inst.lecturers()[k].capacity as i64;
        ex.add(eta[j], d).add_all(by_projects(inst.lecturer_at_least(p.id)), 1);
        rows.push(ex.row(
            Family::LecturerFull,
            format!("c8_p{}_l{}", j + 1, k + 1),
            Sense::Ge,
            d,
        ));
    }
    // (9) theta + alpha + (1 - beta) + eta <= 3
    for s in inst.students() {
        let i = s.id.index();
        for (r, &p) in s.prefs.iter().enumerate() {
            let (j, k) = (p.index(), inst.offerer(p).index());
            theta(&mut ex, i, r);
            ex.add(alpha[j], 1);
            one_minus_beta(&mut ex, i, k);
            ex.add(eta[j], 1);
            rows.push(ex.row(
                Family::BlockingC,
                format!("c9_s{}_p{}", i + 1, j + 1),
                Sense::Le,
                3,
            ));
        }
    }

    if with_coalition {
        // (10) e_{i,i'} + 1 >= x_{i,j} + x_{i',j'} whenever s_i prefers
        // p_{j'} to p_j; rows whose x_{i',j'} does not exist are vacuous.
        for si in inst.students() {
            let i = si.id.index();
            for ip in 0..n1 {
                if ip == i {
                    continue;
                }
                let e_var = e[i * n1 + ip].expect("off-diagonal");
                for (r, &pj) in si.prefs.iter().enumerate() {
                    for &pjp in &si.prefs[..r] {
                        let Some(x_other) = x_of(ip, pjp.index()) else {
                            continue;
                        };
                        let x_own = x_of(i, pj.index()).expect("acceptable");
                        ex.add(x_own, 1).add(x_other, 1).add(e_var, -1);
                        rows.push(ex.row(
                            Family::Envy,
                            format!(
                                "c10_s{}_s{}_p{}_p{}",
                                i + 1,
                                ip + 1,
                                pj.number(),
                                pjp.number()
                            ),
                            Sense::Le,
                            1,
                        ));
                    }
                }
            }
        }
        // (11) v_i < v_{i'} + n1 (1 - e_{i,i'}), as
        //      v_i - v_{i'} + n1 e_{i,i'} <= n1 - 1
        let n = n1 as i64;
        for i in 0..n1 {
            for ip in 0..n1 {
                if i == ip {
                    continue;
                }
                ex.add(v[i], 1)
                    .add(v[ip], -1)
                    .add(e[i * n1 + ip].expect("off-diagonal"), n);
                rows.push(ex.row(
                    Family::Topological,
                    format!("c11_s{}_s{}", i + 1, ip + 1),
                    Sense::Le,
                    n - 1,
                ));
            }
        }
    }

    let objective = x.iter().flatten().map(|&(_, v)| (v, 1)).collect();

    IpModel {
        n_students: n1,
        n_projects: n2,
        n_lecturers: n3,
        with_coalition,
        variables: b.variables,
        constraints: rows,
        objective,
        x,
        alpha,
        delta,
        eta,
        e,
        v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ip::Family;
    use crate::model::tests::worked;

    #[test]
    fn worked_census_with_coalition() {
        let c = build_model(&worked(), true).census();
        assert_eq!((c.x, c.alpha, c.delta, c.eta, c.e, c.v), (6, 3, 2, 3, 6, 3));
        assert_eq!(c.variables(), 23);
        assert_eq!(c.rows, [3, 3, 2, 3, 6, 2, 6, 3, 6, 4, 6]);
    }

    #[test]
    fn worked_census_without_coalition() {
        let c = build_model(&worked(), false).census();
        assert_eq!(c.variables(), 14);
        assert_eq!(c.e + c.v, 0);
        assert_eq!(c.rows_of(Family::Envy) + c.rows_of(Family::Topological), 0);
    }

    #[test]
    fn single_pair_model() {
        let inst = crate::format::parse_instance("1 1 1\nP 1 1 1\nL 1 1 : 1\nS 1 : 1\n").unwrap();
        let m = build_model(&inst, true);
        let row5 = m
            .constraints()
            .iter()
            .find(|r| r.family == Family::BlockingA)
            .unwrap();
        // theta = 1 - x, gamma = 0:  -x + alpha <= 1
        let names: Vec<(&str, i64)> = row5
            .terms
            .iter()
            .map(|&(v, c)| (m.variable(v).name.as_str(), c))
            .collect();
        assert_eq!(names, vec![("x_1_1", -1), ("alpha_1", 1)]);
        assert_eq!(row5.rhs, 1);

        // x = 0 forces alpha = 1 and delta = 1, violating (7).
        let zero = vec![0; m.variables().len()];
        assert!(!m.is_feasible(&zero));
        let mut one = zero.clone();
        one[m.x_var(0, 0).unwrap().index()] = 1;
        one[m.var_by_name("v_1").unwrap().index()] = 1;
        assert!(m.is_feasible(&one));
        assert_eq!(m.objective_value(&one), 1);
    }

    #[test]
    fn overlapping_theta_and_gamma_cancel() {
        // s1 prefers p2 to p1, l1 prefers p1 to p2: x_1_2 is both in S_{1,1}
        // and in T_{1,1}, so it cancels out of row (5) for (s1, p1).
        let inst = crate::format::parse_instance(
            "1 2 1\nP 1 1 1\nP 2 1 1\nL 1 2 : 1 2\nS 1 : 2 1\n",
        )
        .unwrap();
        let m = build_model(&inst, false);
        let row = m.constraints().iter().find(|r| r.name == "c5_s1_p1").unwrap();
        let names: Vec<&str> = row.terms.iter().map(|&(v, _)| m.variable(v).name.as_str()).collect();
        assert_eq!(names, vec!["x_1_1", "alpha_1"]);
    }
}
