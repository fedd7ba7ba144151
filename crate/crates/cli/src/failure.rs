//! Error object printed on stdout when a command fails.

use std::path::Path;

use serde_json::{json, Value};

use fairdiv::error::GeometryError;
use fairdiv::{DatasetError, SolveError};

pub const USAGE: u8 = 2;
pub const INFEASIBLE: u8 = 3;
pub const BUDGET: u8 = 4;
const INTERNAL: u8 = 1;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
    pub details: Option<Value>,
}

impl Failure {
    fn new(code: u8, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            kind,
            message: message.into(),
            details: None,
        }
    }

    fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(USAGE, "usage", message)
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::new(USAGE, "io", format!("{}: {err}", path.display()))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(INTERNAL, "internal", message)
    }

    /// A validation report with at least one problem.
    pub fn invalid(report: Value) -> Self {
        Self::new(INFEASIBLE, "invalid", "validation failed").with_details(report)
    }

    pub fn to_json(&self) -> Value {
        let mut error = json!({
            "code": self.code,
            "kind": self.kind,
            "message": self.message,
        });
        if let Some(details) = &self.details {
            error["details"] = details.clone();
        }
        json!({ "error": error })
    }
}

impl From<DatasetError> for Failure {
    fn from(err: DatasetError) -> Self {
        match &err {
            DatasetError::InfeasibleBounds(report) => {
                let details = json!({ "violations": report });
                Self::new(INFEASIBLE, "infeasible_constraints", err.to_string()).with_details(details)
            }
            DatasetError::Io { .. } => Self::new(USAGE, "io", err.to_string()),
            _ => Self::new(USAGE, "data", err.to_string()),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(err: SolveError) -> Self {
        let message = err.to_string();
        match err {
            SolveError::InvalidConstraints(report) => {
                Self::new(INFEASIBLE, "infeasible_constraints", message).with_details(json!({ "violations": report }))
            }
            SolveError::InvalidParameter(_) => Self::new(USAGE, "invalid_parameter", message),
            SolveError::Geometry(GeometryError::PairwiseBudget { n, max }) => {
                Self::new(BUDGET, "pairwise_budget", message).with_details(json!({ "n": n, "max": max }))
            }
            SolveError::Geometry(_) => Self::new(USAGE, "invalid_parameter", message),
            SolveError::NodeBudget { nodes, best } => {
                Self::new(BUDGET, "node_budget", message).with_details(json!({ "nodes": nodes, "best": best }))
            }
            SolveError::Degenerate { threshold, groups } => Self::new(BUDGET, "degenerate", message)
                .with_details(json!({ "threshold": threshold, "groups": groups })),
            SolveError::EnumerationBudget { subsets, budget } => Self::new(BUDGET, "enumeration_budget", message)
                .with_details(
                    json!({ "subsets": (subsets < u128::MAX).then(|| subsets.to_string()), "budget": budget }),
                ),
        }
    }
}
