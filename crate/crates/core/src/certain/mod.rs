//! Checkers that decide whether a certain model exists: a single model that
//! minimizes training loss for every repair of the missing cells.

pub mod kernel;
pub mod linear_svm;
pub mod linreg;
pub mod ranges;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::dataset::Repair;
use crate::trainers::LinearModel;

pub use kernel::{
    check_certain_arccos_svm, check_certain_poly_svm, check_certain_rbf_svm, lower_bound_margins,
    KernelCertainReport,
};
pub use linear_svm::check_certain_linear_svm;
pub use linreg::check_certain_linreg;
pub use ranges::{kernel_range_arccos, kernel_range_rbf, Extremum, KernelRange};

/// Margin tolerance shared by the SVM checkers.
pub const MARGIN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Exists,
    NotExists,
    Unknown,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Exists => "exists",
            Self::NotExists => "not_exists",
            Self::Unknown => "unknown",
        }
    }
}

/// One evaluated condition: `holds` records the tolerance test on
/// `magnitude` against `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature: Option<usize>,
    pub magnitude: f64,
    pub threshold: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub conditions: Vec<Condition>,
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub(crate) fn push(
        &mut self,
        name: &str,
        example: Option<usize>,
        feature: Option<usize>,
        magnitude: f64,
        threshold: f64,
        holds: bool,
    ) -> bool {
        self.conditions.push(Condition {
            name: name.to_string(),
            example,
            feature,
            magnitude,
            threshold,
            holds,
        });
        holds
    }

    pub fn first_failure(&self) -> Option<&Condition> {
        self.conditions.iter().find(|c| !c.holds)
    }

    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }
}

/// A repair on which the candidate model is not optimal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "serialize_repair")]
    pub repair: Repair,
    pub explanation: String,
    /// Loss of the candidate on `repair` minus that repair's optimum. When
    /// the optimum comes from an inexact solve this is a lower bound.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertainReport {
    pub verdict: Verdict,
    pub model: Option<LinearModel>,
    pub witness: Option<Witness>,
    pub diagnostics: Diagnostics,
}

pub(crate) fn serialize_repair<S: Serializer>(r: &Repair, s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry {
        row: usize,
        col: usize,
        value: f64,
    }
    let mut seq = s.serialize_seq(Some(r.assignments.len()))?;
    for (c, v) in &r.assignments {
        seq.serialize_element(&Entry {
            row: c.row,
            col: c.col,
            value: *v,
        })?;
    }
    seq.end()
}
