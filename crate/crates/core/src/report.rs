//! Machine-readable run reports emitted by the command-line tool.

use serde::Serialize;
use serde_json::Value;

use crate::dataset::IncompleteDataset;
use crate::trainers::{DualModel, LinearModel};

pub const TOOL_NAME: &str = "certain";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: ToolInfo,
    pub command: CommandEcho,
    pub dataset: DatasetProfile,
    pub verdict: VerdictBlock,
    pub model: ModelBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: TOOL_NAME,
            version: TOOL_VERSION,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CommandEcho {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Arguments as given, without the program name.
    pub args: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetProfile {
    pub path: String,
    pub n: usize,
    pub d: usize,
    pub missing_factor: f64,
    /// Number of incomplete examples.
    pub incomplete_examples: usize,
    /// Number of incomplete features.
    pub incomplete_features: usize,
    pub missing_cells: usize,
}

impl DatasetProfile {
    pub fn of(path: &str, ds: &IncompleteDataset) -> Self {
        let sets = ds.missing_sets();
        Self {
            path: path.to_string(),
            n: ds.n(),
            d: ds.d(),
            missing_factor: ds.missing_factor(),
            incomplete_examples: sets.examples.len(),
            incomplete_features: sets.features.len(),
            missing_cells: ds.num_missing(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictBlock {
    /// One of exists, not_exists, unknown, acm_exists, not_found.
    pub value: String,
    /// Which procedure produced the verdict.
    pub source: String,
    pub details: Value,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelBlock {
    Linear {
        coefficients: Vec<f64>,
        training_loss: f64,
    },
    Dual {
        kernel: Value,
        c: f64,
        support_vectors: usize,
        /// Support-vector rows and their alphas.
        support: Vec<usize>,
        alphas: Vec<f64>,
        dual_objective: f64,
        iterations: usize,
    },
    None,
}

impl ModelBlock {
    pub fn linear(m: &LinearModel) -> Self {
        Self::Linear {
            coefficients: m.w.iter().copied().collect(),
            training_loss: m.training_loss,
        }
    }

    pub fn dual(m: &DualModel) -> Self {
        let support = m.support_indices(m.zero_tol());
        Self::Dual {
            kernel: serde_json::to_value(m.kernel).unwrap_or(Value::Null),
            c: m.c,
            support_vectors: support.len(),
            alphas: support.iter().map(|&j| m.alphas[j]).collect(),
            support,
            dual_objective: m.objective,
            iterations: m.iterations,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Timings {
    /// Training one model of the same kind on the mean-imputed data.
    pub train_ms: f64,
    pub check_ms: f64,
}
