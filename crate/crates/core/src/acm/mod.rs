//! Approximately certain models.
//!
//! `h(w, X^r) = L(X^r, w) - min_v L(X^r, v)` is the optimality gap of `w` on
//! one repair and `g(w)` its supremum over repairs. For the linear losses
//! here the supremum is taken at edge repairs, which put every missing cell
//! at an end of its interval.

mod edges;
mod exact;
mod sampled;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{IncompleteDataset, Repair};
use crate::error::{Error, Result};
use crate::trainers::{LinearLoss, LinearModel};

pub use edges::{enumerate_edge_repairs, num_edge_repairs, sample_edge_repairs, EdgeEnumeration, EdgeRepair};
pub use exact::{decomposition_check, learn_acm_linreg_exact, worst_edge_per_example, DecompositionCheck};
pub use sampled::learn_acm_sampled;

pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Slack when comparing a certified `g` to `epsilon`.
pub const GAP_TOL: f64 = 1e-8;

/// Repairs kept in a report's `worst_repairs`.
const WORST_KEPT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcmConfig {
    pub epsilon: f64,
    pub samples: usize,
    pub seed: u64,
    /// Fixed descent step; `None` picks `0.1 / L` from a curvature estimate.
    pub gd_step: Option<f64>,
    pub gd_tol: f64,
    pub gd_max_iters: usize,
    /// Largest number of missing cells for which all edge repairs are
    /// enumerated.
    pub enumeration_cap: usize,
}

impl Default for AcmConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            samples: 64,
            seed: 0,
            gd_step: None,
            gd_tol: 1e-6,
            gd_max_iters: 50_000,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl AcmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be finite and >= 0, got {}", self.epsilon)));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be >= 1".into()));
        }
        if let Some(s) = self.gd_step {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("gd_step must be finite and > 0, got {s}")));
            }
        }
        if !(self.gd_tol > 0.0) {
            return Err(Error::Config("gd_tol must be > 0".into()));
        }
        if self.gd_max_iters == 0 {
            return Err(Error::Config("gd_max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GKind {
    ExactOverEdges,
    SampledEstimate,
    PerExampleDecomposed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AcmVerdict {
    AcmExists,
    NotFound,
}

/// Gap of the returned model on one edge repair. `index` is the repair's
/// position in the enumeration (or in the sample).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepairGap {
    pub index: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcmReport {
    /// `training_loss` is the model's loss on its worst edge repair.
    pub model: LinearModel,
    pub g_value: f64,
    pub g_kind: GKind,
    pub verdict: AcmVerdict,
    pub epsilon: f64,
    /// Objective minimized by the descent, on the sampled repairs (or on the
    /// per-example worst repair for the exact learner).
    pub descent_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
    pub repairs_evaluated: usize,
    pub worst_repairs: Vec<RepairGap>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionCheck>,
    pub notes: Vec<String>,
}

/// `h(w, X^r)`.
pub fn h_value(w: &DVector<f64>, repair: &Repair, ds: &IncompleteDataset, loss: LinearLoss) -> Result<f64> {
    let values = repair.aligned(ds)?;
    let x = ds.repaired_with(&values)?;
    gap_on(&x, ds.labels(), w, loss)
}

pub(crate) fn gap_on(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, loss: LinearLoss) -> Result<f64> {
    let best = loss.train(x, y)?;
    Ok(loss.value(x, y, w) - best.training_loss)
}

/// Exact `g(w)` over every edge repair, with the worst repair (lowest index
/// on ties) and the largest gaps.
pub(crate) struct EdgeSup {
    pub g: f64,
    pub argmax: usize,
    pub worst: Vec<RepairGap>,
    pub count: usize,
}

pub(crate) fn enumerated_g(ds: &IncompleteDataset, lo: &[f64], hi: &[f64], loss: LinearLoss, w: &DVector<f64>, cap: usize) -> Result<EdgeSup> {
    let total = enumerate_edge_repairs(ds.num_missing(), cap)?.len();
    let gaps: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|k| {
            let e = EdgeRepair::from_index(k, ds.num_missing());
            gap_on(&ds.repaired_with(&e.values(lo, hi))?, ds.labels(), w, loss)
        })
        .collect::<Result<_>>()?;
    Ok(summarize(&gaps))
}

pub(crate) fn summarize(gaps: &[f64]) -> EdgeSup {
    let mut argmax = 0;
    for (k, &v) in gaps.iter().enumerate() {
        if v > gaps[argmax] {
            argmax = k;
        }
    }
    let mut order: Vec<usize> = (0..gaps.len()).collect();
    order.sort_by(|&a, &b| gaps[b].total_cmp(&gaps[a]).then(a.cmp(&b)));
    EdgeSup {
        g: gaps[argmax].max(0.0),
        argmax,
        worst: order.into_iter().take(WORST_KEPT).map(|k| RepairGap { index: k, gap: gaps[k] }).collect(),
        count: gaps.len(),
    }
}

/// Largest eigenvalue of `x^T x` by 20 power-iteration steps.
pub(crate) fn gram_top_eigenvalue(x: &DMatrix<f64>) -> f64 {
    let d = x.ncols();
    if d == 0 || x.nrows() == 0 {
        return 0.0;
    }
    let a = x.tr_mul(x);
    let mut v = DVector::from_element(d, 1.0 / (d as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..20 {
        let av = &a * &v;
        let norm = av.norm();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = v.dot(&av);
        v = av / norm;
    }
    lambda.max(v.dot(&(&a * &v)))
}

/// Curvature scale of a loss on one repaired matrix.
pub(crate) fn curvature(x: &DMatrix<f64>, loss: LinearLoss) -> f64 {
    match loss {
        LinearLoss::Ols => 2.0 * gram_top_eigenvalue(x),
        LinearLoss::Svm { c } => 1.0 + c * gram_top_eigenvalue(x),
    }
}

pub(crate) fn verdict_for(g: f64, epsilon: f64, diverged: bool) -> AcmVerdict {
    if !diverged && g <= epsilon + GAP_TOL {
        AcmVerdict::AcmExists
    } else {
        AcmVerdict::NotFound
    }
}

/// Report for data without missing values: the plain optimum with `g = 0`.
pub(crate) fn complete_report(ds: &IncompleteDataset, loss: LinearLoss, epsilon: f64) -> Result<AcmReport> {
    let x = ds.repaired_with(&[])?;
    let model = loss.train(&x, ds.labels())?;
    Ok(AcmReport {
        model,
        g_value: 0.0,
        g_kind: GKind::ExactOverEdges,
        verdict: verdict_for(0.0, epsilon, false),
        epsilon,
        descent_objective: 0.0,
        iterations: 0,
        converged: true,
        diverged: false,
        repairs_evaluated: 1,
        worst_repairs: vec![RepairGap { index: 0, gap: 0.0 }],
        decomposition: None,
        notes: vec!["no missing values".into()],
    })
}
