//! Integer-programming formulation of maximum stable matching.
//!
//! Variables: `x_i_j` per acceptable pair, `alpha_j` (project
//! undersubscribed), `delta_k` (lecturer undersubscribed), `eta_j_k`
//! (offering lecturer full and preferring `p_j` to its worst non-empty
//! project) and, when coalitions are excluded, `e_i_ip` (envy arcs) and
//! integer labels `v_i` in `[1, n1]`.
//!
//! The student "unassigned or prefers" indicator, the "already with this
//! lecturer at a worse project" indicator and the "with this lecturer"
//! indicator are linear in `x`, so they are expanded inline rather than
//! given variables of their own.

mod build;
mod lp;
mod solution;

pub use build::build_model;
pub use lp::export_lp;
pub use solution::{lift_matching, literal_lift_eta};

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Integer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarRole {
    Assign { student: usize, project: usize },
    ProjectUnder { project: usize },
    LecturerUnder { lecturer: usize },
    LecturerFullPrefers { project: usize, lecturer: usize },
    Envy { from: usize, to: usize },
    Label { student: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: i64,
    pub upper: i64,
    pub role: VarRole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Le => "<=",
            Self::Ge => ">=",
        })
    }
}

/// Constraint families, numbered as in the formulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    StudentAssignment = 1,
    ProjectCapacity = 2,
    LecturerCapacity = 3,
    ProjectUnder = 4,
    BlockingA = 5,
    LecturerUnder = 6,
    BlockingB = 7,
    LecturerFull = 8,
    BlockingC = 9,
    Envy = 10,
    Topological = 11,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Self::StudentAssignment,
        Self::ProjectCapacity,
        Self::LecturerCapacity,
        Self::ProjectUnder,
        Self::BlockingA,
        Self::LecturerUnder,
        Self::BlockingB,
        Self::LecturerFull,
        Self::BlockingC,
        Self::Envy,
        Self::Topological,
    ];

    pub fn number(self) -> usize {
        self as usize
    }
}

/// `sum(coef * var) <sense> rhs`, constants already moved to the right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub family: Family,
    pub name: String,
    pub terms: Vec<(VarId, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl Constraint {
    pub fn lhs(&self, values: &[i64]) -> i64 {
        self.terms.iter().map(|&(v, c)| c * values[v.index()]).sum()
    }

    pub fn holds(&self, values: &[i64]) -> bool {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
        }
    }
}

/// Variable and row counts of a model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Census {
    pub x: usize,
    pub alpha: usize,
    pub delta: usize,
    pub eta: usize,
    pub e: usize,
    pub v: usize,
    /// Rows per family, index 0 is family (1).
    pub rows: [usize; 11],
}

impl Census {
    pub fn variables(&self) -> usize {
        self.x + self.alpha + self.delta + self.eta + self.e + self.v
    }

    pub fn rows_of(&self, family: Family) -> usize {
        self.rows[family.number() - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IpModel {
    pub(crate) n_students: usize,
    pub(crate) n_projects: usize,
    pub(crate) n_lecturers: usize,
    pub(crate) with_coalition: bool,
    pub(crate) variables: Vec<Variable>,
    pub(crate) constraints: Vec<Constraint>,
    pub(crate) objective: Vec<(VarId, i64)>,
    /// `x` variables per student, in preference order.
    pub(crate) x: Vec<Vec<(usize, VarId)>>,
    pub(crate) alpha: Vec<VarId>,
    pub(crate) delta: Vec<VarId>,
    /// `eta` per project (for its offering lecturer).
    pub(crate) eta: Vec<VarId>,
    /// `e` row-major over ordered student pairs, `None` on the diagonal.
    pub(crate) e: Vec<Option<VarId>>,
    pub(crate) v: Vec<VarId>,
}

impl IpModel {
    pub fn with_coalition(&self) -> bool {
        self.with_coalition
    }

    pub fn dimensions(&self) -> (usize, usize, usize) {
        (self.n_students, self.n_projects, self.n_lecturers)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, i64)] {
        &self.objective
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.variables[v.index()]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .map(|i| VarId(i as u32))
    }

    /// `x_{i,j}` for a 0-based student and project index.
    pub fn x_var(&self, student: usize, project: usize) -> Option<VarId> {
        self.x[student]
            .iter()
            .find(|&&(p, _)| p == project)
            .map(|&(_, v)| v)
    }

    pub fn census(&self) -> Census {
        let mut c = Census::default();
        for v in &self.variables {
            match v.role {
                VarRole::Assign { .. } => c.x += 1,
                VarRole::ProjectUnder { .. } => c.alpha += 1,
                VarRole::LecturerUnder { .. } => c.delta += 1,
                VarRole::LecturerFullPrefers { .. } => c.eta += 1,
                VarRole::Envy { .. } => c.e += 1,
                VarRole::Label { .. } => c.v += 1,
            }
        }
        for row in &self.constraints {
            c.rows[row.family.number() - 1] += 1;
        }
        c
    }

    pub fn objective_value(&self, values: &[i64]) -> i64 {
        self.objective.iter().map(|&(v, c)| c * values[v.index()]).sum()
    }

    /// Indices of rows violated by `values`, plus any variable outside its
    /// bounds (reported as `usize::MAX - var index`).
    pub fn violations(&self, values: &[i64]) -> Vec<usize> {
        assert_eq!(values.len(), self.variables.len(), "one value per variable");
        let mut out: Vec<usize> = self
            .variables
            .iter()
            .enumerate()
            .filter(|(i, var)| values[*i] < var.lower || values[*i] > var.upper)
            .map(|(i, _)| usize::MAX - i)
            .collect();
        out.extend(
            self.constraints
                .iter()
                .enumerate()
                .filter(|(_, row)| !row.holds(values))
                .map(|(i, _)| i),
        );
        out
    }

    pub fn is_feasible(&self, values: &[i64]) -> bool {
        self.variables
            .iter()
            .zip(values)
            .all(|(var, &x)| var.lower <= x && x <= var.upper)
            && self.constraints.iter().all(|row| row.holds(values))
    }
}
