//! Exact maximum stable matching: a brute-force oracle and a
//! branch-and-bound search over the integer model.

mod bnb;
mod oracle;

pub use bnb::{completion_bound, solve_exact, solve_exact_with, ExactOptions};
pub use oracle::{
    enumerate_stable, for_each_stable, max_stable_oracle, max_stable_oracle_with,
    DEFAULT_ORACLE_NODES,
};

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::model::Matching;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ExactMode {
    /// Envy and labelling rows in the model; leaves must be coalition-free.
    WithCoalition,
    /// Blocking-pair rows only; coalitions are rotated away afterwards.
    #[default]
    NoCoalitionRotate,
}

impl ExactMode {
    pub fn label(self) -> &'static str {
        match self {
            Self::WithCoalition => "with-coalition",
            Self::NoCoalitionRotate => "no-coalition",
        }
    }
}

impl fmt::Display for ExactMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ExactMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "with-coalition" => Ok(Self::WithCoalition),
            "no-coalition" | "no-coalition+rotate" => Ok(Self::NoCoalitionRotate),
            _ => Err(format!("unknown mode `{s}` (expected with-coalition|no-coalition)")),
        }
    }
}

/// Search limits. `None` means unlimited.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn nodes(n: u64) -> Self {
        Self {
            max_nodes: Some(n),
            max_time: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimalResult {
    pub matching: Matching,
    pub size: usize,
    pub nodes_explored: u64,
    pub wall_time: Duration,
    /// `None` for the enumeration oracle.
    pub mode: Option<ExactMode>,
    /// False when the search stopped on its budget; `size` is then only a
    /// lower bound.
    pub proven_optimal: bool,
    /// Incumbent sizes in the order they were adopted.
    pub incumbent_history: Vec<usize>,
    /// Leaves satisfying the model whose coalition rotation produced a
    /// blocking pair (no-coalition mode only).
    pub rejected_rotations: u64,
}
