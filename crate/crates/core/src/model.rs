//! Instance and matching data model.
//!
//! Identifiers are dense. Internally every id wraps a 0-based index; the
//! textual forms (`s1`, `p3`, the instance file, LP variable names) use the
//! 1-based number.

use std::fmt;

use crate::error::{Error, Result};

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident, $prefix:literal) => {
        $(#[$doc])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(u32);

        impl $name {
            /// Id from a 0-based index.
            pub fn new(index: usize) -> Self {
                Self(u32::try_from(index).expect("id index overflows u32"))
            }

            /// Id from the 1-based number used in files and output.
            pub fn from_number(number: usize) -> Option<Self> {
                number.checked_sub(1).map(Self::new)
            }

            pub fn index(self) -> usize {
                self.0 as usize
            }

            pub fn number(self) -> usize {
                self.0 as usize + 1
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.number())
            }
        }
    };
}

id_type!(
    /// A student `s_i`.
    StudentId,
    "s"
);
id_type!(
    /// A project `p_j`.
    ProjectId,
    "p"
);
id_type!(
    /// A lecturer `l_k`.
    LecturerId,
    "l"
);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Student {
    pub id: StudentId,
    /// Acceptable projects, most preferred first.
    pub prefs: Vec<ProjectId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Project {
    pub id: ProjectId,
    pub capacity: usize,
    pub lecturer: LecturerId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lecturer {
    pub id: LecturerId,
    pub capacity: usize,
    /// Exactly the offered projects, most preferred first.
    pub prefs: Vec<ProjectId>,
}

/// A validated SPA-P instance. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    students: Vec<Student>,
    projects: Vec<Project>,
    lecturers: Vec<Lecturer>,
    /// 1-based rank of each project on its lecturer's list.
    lecturer_rank: Vec<usize>,
}

impl Instance {
    /// Validates and builds an instance. Each element's `id` must equal its
    /// position.
    pub fn new(
        students: Vec<Student>,
        projects: Vec<Project>,
        lecturers: Vec<Lecturer>,
    ) -> Result<Self> {
        let n2 = projects.len();
        let invalid = |msg: String| Err(Error::Invalid(msg));

        for (j, p) in projects.iter().enumerate() {
            if p.id.index() != j {
                return invalid(format!("project at position {} has id {}", j + 1, p.id));
            }
            if p.capacity == 0 {
                return invalid(format!("{} has capacity 0", p.id));
            }
            if p.lecturer.index() >= lecturers.len() {
                return invalid(format!("{} names unknown lecturer {}", p.id, p.lecturer));
            }
        }

        let mut lecturer_rank = vec![0usize; n2];
        let mut offered_by: Vec<Option<LecturerId>> = vec![None; n2];
        for (k, l) in lecturers.iter().enumerate() {
            if l.id.index() != k {
                return invalid(format!("lecturer at position {} has id {}", k + 1, l.id));
            }
            if l.capacity == 0 {
                return invalid(format!("{} has capacity 0", l.id));
            }
            if l.prefs.is_empty() {
                return invalid(format!("{} offers no projects", l.id));
            }
            for (r, &p) in l.prefs.iter().enumerate() {
                if p.index() >= n2 {
                    return invalid(format!("{} ranks unknown project {}", l.id, p));
                }
                match offered_by[p.index()] {
                    Some(other) if other == l.id => {
                        return invalid(format!("{} ranks {} twice", l.id, p));
                    }
                    Some(other) => {
                        return invalid(format!(
                            "project offered by two lecturers: {p} ({other} and {})",
                            l.id
                        ));
                    }
                    None => {}
                }
                offered_by[p.index()] = Some(l.id);
                lecturer_rank[p.index()] = r + 1;
            }
        }
        for (j, p) in projects.iter().enumerate() {
            match offered_by[j] {
                None => {
                    return invalid(format!("{} is missing from {}'s list", p.id, p.lecturer));
                }
                Some(k) if k != p.lecturer => {
                    return invalid(format!(
                        "{} belongs to {} but is ranked by {}",
                        p.id, p.lecturer, k
                    ));
                }
                Some(_) => {}
            }
        }

        let mut seen = vec![usize::MAX; n2];
        for (i, s) in students.iter().enumerate() {
            if s.id.index() != i {
                return invalid(format!("student at position {} has id {}", i + 1, s.id));
            }
            if s.prefs.is_empty() {
                return invalid(format!("{} has an empty preference list", s.id));
            }
            for &p in &s.prefs {
                if p.index() >= n2 {
                    return invalid(format!("{} ranks unknown project {}", s.id, p));
                }
                if seen[p.index()] == i {
                    return invalid(format!("{} ranks {} twice", s.id, p));
                }
                seen[p.index()] = i;
            }
        }

        Ok(Self {
            students,
            projects,
            lecturers,
            lecturer_rank,
        })
    }

    pub fn students(&self) -> &[Student] {
        &self.students
    }

    pub fn projects(&self) -> &[Project] {
        &self.projects
    }

    pub fn lecturers(&self) -> &[Lecturer] {
        &self.lecturers
    }

    pub fn n_students(&self) -> usize {
        self.students.len()
    }

    pub fn n_projects(&self) -> usize {
        self.projects.len()
    }

    pub fn n_lecturers(&self) -> usize {
        self.lecturers.len()
    }

    pub fn student(&self, s: StudentId) -> &Student {
        &self.students[s.index()]
    }

    pub fn project(&self, p: ProjectId) -> &Project {
        &self.projects[p.index()]
    }

    pub fn lecturer(&self, l: LecturerId) -> &Lecturer {
        &self.lecturers[l.index()]
    }

    pub fn student_ids(&self) -> impl Iterator<Item = StudentId> + '_ {
        (0..self.students.len()).map(StudentId::new)
    }

    pub fn project_ids(&self) -> impl Iterator<Item = ProjectId> + '_ {
        (0..self.projects.len()).map(ProjectId::new)
    }

    pub fn lecturer_ids(&self) -> impl Iterator<Item = LecturerId> + '_ {
        (0..self.lecturers.len()).map(LecturerId::new)
    }

    /// Lecturer offering `p`.
    pub fn offerer(&self, p: ProjectId) -> LecturerId {
        self.projects[p.index()].lecturer
    }

    /// Acceptable pairs in student order, then list order.
    pub fn acceptable_pairs(&self) -> impl Iterator<Item = (StudentId, ProjectId)> + '_ {
        self.students
            .iter()
            .flat_map(|s| s.prefs.iter().map(move |&p| (s.id, p)))
    }

    pub fn total_project_capacity(&self) -> usize {
        self.projects.iter().map(|p| p.capacity).sum()
    }

    /// Position of `p` on `s`'s list, if acceptable. 1-based.
    pub fn student_rank_of(&self, s: StudentId, p: ProjectId) -> Option<usize> {
        self.students[s.index()]
            .prefs
            .iter()
            .position(|&q| q == p)
            .map(|r| r + 1)
    }

    /// `rank(s, p)`: one plus the number of projects `s` prefers to `p`.
    pub fn rank_student(&self, s: StudentId, p: ProjectId) -> Result<usize> {
        self.student_rank_of(s, p).ok_or(Error::NotAcceptable {
            student: s,
            project: p,
        })
    }

    /// `rank(l, p)` on the lecturer's list.
    pub fn rank_lecturer(&self, l: LecturerId, p: ProjectId) -> Result<usize> {
        if p.index() < self.projects.len() && self.offerer(p) == l {
            Ok(self.lecturer_rank[p.index()])
        } else {
            Err(Error::NotOffered {
                lecturer: l,
                project: p,
            })
        }
    }

    /// Rank of `p` on the list of the lecturer who offers it.
    pub fn offerer_rank(&self, p: ProjectId) -> usize {
        self.lecturer_rank[p.index()]
    }

    /// Whether `s` strictly prefers `a` to `b`. Both must be acceptable.
    pub fn student_prefers(&self, s: StudentId, a: ProjectId, b: ProjectId) -> bool {
        for &q in &self.students[s.index()].prefs {
            if q == a {
                return q != b;
            }
            if q == b {
                return false;
            }
        }
        false
    }

    /// Number of students finding each project acceptable.
    pub fn popularity(&self) -> Vec<usize> {
        let mut a = vec![0; self.projects.len()];
        for s in &self.students {
            for &p in &s.prefs {
                a[p.index()] += 1;
            }
        }
        a
    }

    /// Students listing each project, in student order.
    pub fn applicants(&self) -> Vec<Vec<StudentId>> {
        let mut out = vec![Vec::new(); self.projects.len()];
        for s in &self.students {
            for &p in &s.prefs {
                out[p.index()].push(s.id);
            }
        }
        out
    }

    /// Copy with new lecturer preference lists. Each list must be a
    /// permutation of the lecturer's current one.
    pub fn with_lecturer_prefs(&self, prefs: Vec<Vec<ProjectId>>) -> Result<Self> {
        let lecturers = self
            .lecturers
            .iter()
            .zip(prefs)
            .map(|(l, prefs)| Lecturer {
                id: l.id,
                capacity: l.capacity,
                prefs,
            })
            .collect();
        Self::new(self.students.clone(), self.projects.clone(), lecturers)
    }

    /// `S_{i,j}`: projects `s` likes at least as much as `p`.
    pub fn student_at_least(&self, s: StudentId, p: ProjectId) -> Result<&[ProjectId]> {
        let r = self.rank_student(s, p)?;
        Ok(&self.students[s.index()].prefs[..r])
    }

    /// `D_{k,j}`: projects the offering lecturer likes at least as much as `p`.
    pub fn lecturer_at_least(&self, p: ProjectId) -> &[ProjectId] {
        let l = &self.lecturers[self.offerer(p).index()];
        &l.prefs[..self.offerer_rank(p)]
    }

    /// `T_{k,j}`: projects the offering lecturer ranks strictly below `p`.
    pub fn lecturer_worse(&self, p: ProjectId) -> &[ProjectId] {
        let l = &self.lecturers[self.offerer(p).index()];
        &l.prefs[self.offerer_rank(p)..]
    }
}

/// Preference-derived index families, materialized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefSets {
    /// `S_{i,j}` for every acceptable pair, keyed like [`Instance::acceptable_pairs`].
    pub at_least_student: Vec<((StudentId, ProjectId), Vec<ProjectId>)>,
    /// `T_{k,j}` indexed by project.
    pub worse_lecturer: Vec<Vec<ProjectId>>,
    /// `D_{k,j}` indexed by project.
    pub at_least_lecturer: Vec<Vec<ProjectId>>,
}

pub fn pref_sets(inst: &Instance) -> PrefSets {
    let at_least_student = inst
        .students()
        .iter()
        .flat_map(|s| {
            s.prefs
                .iter()
                .enumerate()
                .map(move |(r, &p)| ((s.id, p), s.prefs[..=r].to_vec()))
        })
        .collect();
    PrefSets {
        at_least_student,
        worse_lecturer: inst
            .project_ids()
            .map(|p| inst.lecturer_worse(p).to_vec())
            .collect(),
        at_least_lecturer: inst
            .project_ids()
            .map(|p| inst.lecturer_at_least(p).to_vec())
            .collect(),
    }
}

/// A partial map from students to projects.
///
/// Capacity feasibility is not enforced on construction; see
/// [`crate::stability::check_feasible`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    assignment: Vec<Option<ProjectId>>,
}

impl Matching {
    pub fn empty(n_students: usize) -> Self {
        Self {
            assignment: vec![None; n_students],
        }
    }

    pub fn from_assignment(assignment: Vec<Option<ProjectId>>) -> Self {
        Self { assignment }
    }

    /// Builds a matching from pairs, rejecting unknown ids, unacceptable
    /// pairs and students listed twice.
    pub fn from_pairs(
        inst: &Instance,
        pairs: impl IntoIterator<Item = (StudentId, ProjectId)>,
    ) -> Result<Self> {
        let mut m = Self::empty(inst.n_students());
        for (s, p) in pairs {
            if s.index() >= inst.n_students() {
                return Err(Error::InfeasibleMatching(format!("unknown student {s}")));
            }
            if p.index() >= inst.n_projects() {
                return Err(Error::InfeasibleMatching(format!("unknown project {p}")));
            }
            inst.rank_student(s, p)?;
            if m.assignment[s.index()].replace(p).is_some() {
                return Err(Error::InfeasibleMatching(format!("{s} assigned twice")));
            }
        }
        Ok(m)
    }

    /// Convenience for 1-based `(student, project)` number pairs.
    pub fn from_numbers(inst: &Instance, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut ids = Vec::with_capacity(pairs.len());
        for &(i, j) in pairs {
            let s = StudentId::from_number(i)
                .ok_or_else(|| Error::InfeasibleMatching("student number 0".into()))?;
            let p = ProjectId::from_number(j)
                .ok_or_else(|| Error::InfeasibleMatching("project number 0".into()))?;
            ids.push((s, p));
        }
        Self::from_pairs(inst, ids)
    }

    pub fn assignment(&self) -> &[Option<ProjectId>] {
        &self.assignment
    }

    pub fn n_students(&self) -> usize {
        self.assignment.len()
    }

    /// `M(s)`.
    pub fn project_of(&self, s: StudentId) -> Option<ProjectId> {
        self.assignment[s.index()]
    }

    pub fn set(&mut self, s: StudentId, p: Option<ProjectId>) {
        self.assignment[s.index()] = p;
    }

    /// `|M|`.
    pub fn size(&self) -> usize {
        self.assignment.iter().filter(|p| p.is_some()).count()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (StudentId, ProjectId)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (StudentId::new(i), p)))
    }

    /// `M(p)` for one project.
    pub fn students_of(&self, p: ProjectId) -> impl Iterator<Item = StudentId> + '_ {
        self.pairs().filter(move |&(_, q)| q == p).map(|(s, _)| s)
    }

    /// `|M(p_j)|` for every project.
    pub fn project_loads(&self, inst: &Instance) -> Vec<usize> {
        let mut loads = vec![0; inst.n_projects()];
        for (_, p) in self.pairs() {
            loads[p.index()] += 1;
        }
        loads
    }

    /// `|M(l_k)|` for every lecturer.
    pub fn lecturer_loads(&self, inst: &Instance) -> Vec<usize> {
        let mut loads = vec![0; inst.n_lecturers()];
        for (_, p) in self.pairs() {
            loads[inst.offerer(p).index()] += 1;
        }
        loads
    }

    /// Assignment as 1-based project numbers, 0 for unassigned.
    pub fn as_numbers(&self) -> Vec<usize> {
        self.assignment
            .iter()
            .map(|p| p.map_or(0, ProjectId::number))
            .collect()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn worked() -> Instance {
        crate::format::parse_instance(crate::format::WORKED).unwrap()
    }

    fn p(n: usize) -> ProjectId {
        ProjectId::from_number(n).unwrap()
    }
    fn s(n: usize) -> StudentId {
        StudentId::from_number(n).unwrap()
    }
    fn l(n: usize) -> LecturerId {
        LecturerId::from_number(n).unwrap()
    }

    #[test]
    fn student_ranks_on_worked() {
        let inst = worked();
        assert_eq!(inst.rank_student(s(1), p(3)).unwrap(), 1);
        assert_eq!(inst.rank_student(s(1), p(1)).unwrap(), 3);
        assert_eq!(inst.rank_student(s(3), p(3)).unwrap(), 1);
        assert!(matches!(
            inst.rank_student(s(2), p(3)),
            Err(Error::NotAcceptable { .. })
        ));
    }

    #[test]
    fn lecturer_ranks_on_worked() {
        let inst = worked();
        assert_eq!(inst.rank_lecturer(l(1), p(2)).unwrap(), 1);
        assert_eq!(inst.rank_lecturer(l(1), p(1)).unwrap(), 2);
        assert_eq!(inst.rank_lecturer(l(2), p(3)).unwrap(), 1);
        assert!(matches!(
            inst.rank_lecturer(l(2), p(1)),
            Err(Error::NotOffered { .. })
        ));
    }

    #[test]
    fn index_families_on_worked() {
        let inst = worked();
        assert_eq!(inst.student_at_least(s(1), p(2)).unwrap(), &[p(3), p(2)]);
        assert_eq!(inst.lecturer_worse(p(2)), &[p(1)]);
        assert_eq!(inst.lecturer_at_least(p(2)), &[p(2)]);
        assert_eq!(inst.lecturer_worse(p(3)), &[] as &[ProjectId]);

        let sets = pref_sets(&inst);
        assert_eq!(sets.at_least_student.len(), 6);
        for ((st, pj), set) in &sets.at_least_student {
            if inst.rank_student(*st, *pj).unwrap() == 1 {
                assert_eq!(set, &vec![*pj]);
            }
        }
    }

    #[test]
    fn rejects_project_offered_twice() {
        let text = "2 1 2\nP 1 1 1\nL 1 1 : 1\nL 2 1 : 1\nS 1 : 1\nS 2 : 1\n";
        let err = crate::format::parse_instance(text).unwrap_err();
        assert!(err.to_string().contains("project offered by two lecturers"), "{err}");
    }

    #[test]
    fn rejects_empty_student_list() {
        let text = "1 1 1\nP 1 1 1\nL 1 1 : 1\nS 1 :\n";
        let err = crate::format::parse_instance(text).unwrap_err();
        assert!(err.to_string().contains("empty preference list"), "{err}");
    }

    #[test]
    fn rejects_partial_lecturer_list() {
        let text = "1 2 1\nP 1 1 1\nP 2 1 1\nL 1 1 : 1\nS 1 : 1\n";
        let err = crate::format::parse_instance(text).unwrap_err();
        assert!(err.to_string().contains("missing"), "{err}");
    }

    #[test]
    fn rejects_zero_capacity() {
        let text = "1 1 1\nP 1 0 1\nL 1 1 : 1\nS 1 : 1\n";
        assert!(crate::format::parse_instance(text).is_err());
    }

    #[test]
    fn project_nobody_wants_is_allowed() {
        let text = "1 2 1\nP 1 1 1\nP 2 1 1\nL 1 1 : 2 1\nS 1 : 1\n";
        let inst = crate::format::parse_instance(text).unwrap();
        assert_eq!(inst.popularity(), vec![1, 0]);
    }

    #[test]
    fn matching_views() {
        let inst = worked();
        let m = Matching::from_numbers(&inst, &[(1, 2), (2, 1), (3, 3)]).unwrap();
        assert_eq!(m.size(), 3);
        assert_eq!(m.project_loads(&inst), vec![1, 1, 1]);
        assert_eq!(m.lecturer_loads(&inst), vec![2, 1]);
        assert_eq!(m.students_of(p(3)).collect::<Vec<_>>(), vec![s(3)]);
        assert!(Matching::from_numbers(&inst, &[(2, 3)]).is_err());
        assert!(Matching::from_numbers(&inst, &[(1, 3), (1, 2)]).is_err());
    }

    #[test]
    fn student_prefers_follows_list_order() {
        let inst = worked();
        assert!(inst.student_prefers(s(1), p(3), p(1)));
        assert!(!inst.student_prefers(s(1), p(1), p(3)));
        assert!(!inst.student_prefers(s(1), p(2), p(2)));
    }
}
