//! Maximum stable matchings for student-project allocation with lecturer
//! preferences over projects.
//!
//! Students rank acceptable projects, lecturers rank the projects they
//! offer, and projects and lecturers have capacities. A matching is stable
//! when it admits no blocking pair and no coalition. The crate provides:
//!
//! * the data model and a text format ([`model`], [`format`]);
//! * stability checking and coalition removal ([`stability`]);
//! * the integer-programming model with LP export ([`ip`]);
//! * exact solvers, one searching the model and one enumerating ([`solvers`]);
//! * randomized 2- and 3/2-approximations ([`approx`]);
//! * instance generation and the experiment harness ([`instances`], [`harness`]).
//!
//! Batch work (best-of-R runs, experiment trials) runs on rayon when the
//! `parallel` feature is enabled; see [`exec::Execution`].
//!
//! ```
//! use spap::{format::{parse_instance, WORKED}, solvers::{solve_exact, Budget, ExactMode}};
//!
//! let inst = parse_instance(WORKED).unwrap();
//! let best = solve_exact(&inst, ExactMode::WithCoalition, &Budget::unlimited()).unwrap();
//! assert_eq!(best.size, 3);
//! ```

pub mod approx;
pub mod error;
pub mod exec;
pub mod format;
pub mod harness;
pub mod instances;
pub mod ip;
pub mod model;
pub mod solvers;
pub mod stability;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{Instance, LecturerId, Matching, ProjectId, StudentId};
