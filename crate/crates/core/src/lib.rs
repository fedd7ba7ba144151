//! Max-min diversification under group fairness constraints.
//!
//! Given `n` items split into `C` disjoint groups and a distance metric, the
//! goal is to pick exactly `k` items, with between `l_c` and `h_c` items from
//! every group `c`, so that the smallest pairwise distance among the picked
//! items is as large as possible.
//!
//! Two solvers are provided:
//!
//! * [`exact::solve_exact`] binary-searches the sorted pairwise distances and
//!   answers one fair-independent-set question per probe with the built-in
//!   branch-and-bound of [`fis`]. It returns a provably optimal subset and is
//!   meant for small inputs.
//! * [`scalable::solve_scalable`] builds a small per-group coreset with
//!   farthest-point greedy fills, then solves fair-independent-set instances
//!   on the coreset while decaying its diversity guess by a factor `1 - ε`.
//!   The result is within `(1 - ε) / 5` of the optimum.
//!
//! [`oracle`] holds brute-force enumerators used as ground truth and
//! [`bench`] the experiment harness driven by the `fairdiv` CLI.

pub mod bench;
pub mod dataset;
pub mod error;
pub mod exact;
pub mod fis;
pub mod geometry;
pub mod greedy;
pub mod lp;
pub mod oracle;
pub mod rng;
pub mod scalable;
pub mod solution;

pub use dataset::{FairnessConstraints, GroupedDataset, Item, ValidationReport, Violation};
pub use error::{DatasetError, GeometryError, SolveError};
pub use geometry::MetricKind;
pub use solution::{DiagValue, Diagnostics, Solution};
