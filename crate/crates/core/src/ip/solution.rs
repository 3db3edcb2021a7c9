use std::collections::HashMap;

use super::IpModel;
use crate::error::{Error, Result};
use crate::model::{Instance, Matching, ProjectId};
use crate::stability::{build_envy_graph, topological_order};

const INTEGRALITY_TOL: f64 = 1e-6;

impl IpModel {
    /// Matching encoded by the `x` variables of a solution, keyed by LP
    /// variable name. Only the `x` values are read.
    pub fn extract_matching(&self, values: &HashMap<String, f64>) -> Result<Matching> {
        let mut assignment = vec![None; self.n_students];
        for (i, row) in self.x.iter().enumerate() {
            for &(j, var) in row {
                let name = &self.variable(var).name;
                let value = *values
                    .get(name)
                    .ok_or_else(|| Error::MissingValue(name.clone()))?;
                let rounded = value.round();
                if (value - rounded).abs() > INTEGRALITY_TOL || !(rounded == 0.0 || rounded == 1.0) {
                    return Err(Error::NonIntegral {
                        name: name.clone(),
                        value,
                    });
                }
                if rounded == 1.0 {
                    if assignment[i].is_some() {
                        return Err(Error::InfeasibleMatching(format!(
                            "s{} has more than one x set",
                            i + 1
                        )));
                    }
                    assignment[i] = Some(ProjectId::new(j));
                }
            }
        }
        Ok(Matching::from_assignment(assignment))
    }

    /// Same as [`IpModel::extract_matching`] for a dense integer solution.
    pub fn matching_from_values(&self, values: &[i64]) -> Matching {
        let assignment = self
            .x
            .iter()
            .map(|row| {
                row.iter()
                    .find(|&&(_, var)| values[var.index()] == 1)
                    .map(|&(j, _)| ProjectId::new(j))
            })
            .collect();
        Matching::from_assignment(assignment)
    }
}

/// Variable assignment induced by a matching.
///
/// `x` comes from `m`; `alpha`, `delta` and `eta` take the smallest values
/// their defining rows (4), (6), (8) allow; `e` holds the envy arcs of `m`;
/// `v` is a topological numbering of the envy graph. Returns `None` when
/// coalition rows are present and the envy graph has a cycle, since then
/// no labelling satisfies (11).
///
/// For a stable matching the result satisfies every row. For any matching
/// the result is feasible iff some completion of its `x` values is.
pub fn lift_matching(inst: &Instance, model: &IpModel, m: &Matching) -> Option<Vec<i64>> {
    let mut values = vec![0i64; model.variables.len()];
    for (s, p) in m.pairs() {
        let var = model.x_var(s.index(), p.index())?;
        values[var.index()] = 1;
    }
    let project_load = m.project_loads(inst);
    let lecturer_load = m.lecturer_loads(inst);
    for p in inst.projects() {
        let j = p.id.index();
        values[model.alpha[j].index()] = i64::from(project_load[j] < p.capacity);
        // Load of the offering lecturer on projects at least as good as p.
        let upper: usize = inst
            .lecturer_at_least(p.id)
            .iter()
            .map(|q| project_load[q.index()])
            .sum();
        values[model.eta[j].index()] = i64::from(upper < inst.lecturer(p.lecturer).capacity);
    }
    for l in inst.lecturers() {
        let k = l.id.index();
        values[model.delta[k].index()] = i64::from(lecturer_load[k] < l.capacity);
    }
    if model.with_coalition {
        let g = build_envy_graph(inst, m);
        let n1 = model.n_students;
        for (a, b) in g.arcs() {
            let var = model.e[a.index() * n1 + b.index()].expect("off-diagonal");
            values[var.index()] = 1;
        }
        let order = topological_order(&g)?;
        for (pos, s) in order.into_iter().enumerate() {
            values[model.v[s.index()].index()] = pos as i64 + 1;
        }
    }
    Some(values)
}

/// `eta` values under the literal reading "1 iff the lecturer is full and
/// prefers the project to its worst non-empty one", indexed by project.
/// Kept to document that this reading can violate row (8) when a lecturer
/// is undersubscribed; [`lift_matching`] uses the minimal feasible value.
pub fn literal_lift_eta(inst: &Instance, m: &Matching) -> Vec<i64> {
    let project_load = m.project_loads(inst);
    let lecturer_load = m.lecturer_loads(inst);
    inst.projects()
        .iter()
        .map(|p| {
            let k = p.lecturer.index();
            let full = lecturer_load[k] == inst.lecturers()[k].capacity;
            let worst = inst.lecturers()[k]
                .prefs
                .iter()
                .filter(|q| project_load[q.index()] > 0)
                .map(|&q| inst.offerer_rank(q))
                .max();
            i64::from(full && worst.is_some_and(|w| inst.offerer_rank(p.id) < w))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ip::{build_model, Family};
    use crate::model::tests::worked;

    fn named(model: &IpModel, ones: &[&str]) -> HashMap<String, f64> {
        model
            .variables()
            .iter()
            .map(|v| (v.name.clone(), if ones.contains(&v.name.as_str()) { 1.0 } else { 0.0 }))
            .collect()
    }

    #[test]
    fn extract_m3() {
        let inst = worked();
        let model = build_model(&inst, true);
        let m = model
            .extract_matching(&named(&model, &["x_1_2", "x_2_1", "x_3_3"]))
            .unwrap();
        assert_eq!(m, Matching::from_numbers(&inst, &[(1, 2), (2, 1), (3, 3)]).unwrap());
        assert_eq!(m.size(), 3);
    }

    #[test]
    fn extract_all_zero() {
        let model = build_model(&worked(), false);
        let m = model.extract_matching(&named(&model, &[])).unwrap();
        assert_eq!(m.size(), 0);
    }

    #[test]
    fn extract_rejects_fractional() {
        let model = build_model(&worked(), false);
        let mut values = named(&model, &[]);
        values.insert("x_1_3".into(), 0.5);
        assert!(matches!(
            model.extract_matching(&values),
            Err(Error::NonIntegral { .. })
        ));
        values.remove("x_1_3");
        assert!(matches!(model.extract_matching(&values), Err(Error::MissingValue(_))));
    }

    #[test]
    fn stable_matchings_lift_to_feasible_solutions() {
        let inst = worked();
        for with in [false, true] {
            let model = build_model(&inst, with);
            for pairs in [&[(1, 3), (2, 1)][..], &[(1, 2), (2, 1), (3, 3)][..]] {
                let m = Matching::from_numbers(&inst, pairs).unwrap();
                let values = lift_matching(&inst, &model, &m).unwrap();
                assert!(model.violations(&values).is_empty(), "{pairs:?}");
                assert_eq!(model.objective_value(&values), m.size() as i64);
                assert_eq!(model.matching_from_values(&values), m);
            }
        }
    }

    #[test]
    fn coalition_matching_has_no_lift() {
        let inst = worked();
        let m2 = Matching::from_numbers(&inst, &[(1, 1), (2, 2), (3, 3)]).unwrap();
        assert!(lift_matching(&inst, &build_model(&inst, true), &m2).is_none());
        // Without coalition rows M2 is fine: it has no blocking pair.
        let model = build_model(&inst, false);
        let values = lift_matching(&inst, &model, &m2).unwrap();
        assert!(model.is_feasible(&values));
    }

    #[test]
    fn literal_eta_breaks_row_8_for_undersubscribed_lecturer() {
        // M1 leaves l1 (capacity 2) with one student.
        let inst = worked();
        let model = build_model(&inst, true);
        let m1 = Matching::from_numbers(&inst, &[(1, 3), (2, 1)]).unwrap();
        let mut values = lift_matching(&inst, &model, &m1).unwrap();
        for (j, eta) in literal_lift_eta(&inst, &m1).into_iter().enumerate() {
            values[model.eta[j].index()] = eta;
        }
        let broken: Vec<Family> = model
            .violations(&values)
            .into_iter()
            .map(|r| model.constraints()[r].family)
            .collect();
        assert!(!broken.is_empty());
        assert!(broken.iter().all(|&f| f == Family::LecturerFull));
    }
}
