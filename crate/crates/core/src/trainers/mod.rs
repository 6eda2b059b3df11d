//! Deterministic trainers and loss evaluators. No model in this crate has an
//! intercept: predictions are `w . x`; add a constant column if one is
//! needed.

pub mod dual;
pub mod kernel;
pub mod linear_svm;
pub mod ols;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub use dual::{dual_objective, train_kernel_svm_dual, DualConstraint, DualModel, DualOptions};
pub use kernel::{arccos_from_cosine, kernel_eval, KernelSpec};
pub use linear_svm::{train_linear_svm, SvmOptions};
pub use ols::{train_ols, ResidueReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearModel {
    pub w: DVector<f64>,
    pub training_loss: f64,
}

/// Which convex loss a linear model is trained under.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LinearLoss {
    /// `||Xw - y||^2`
    Ols,
    /// `0.5 ||w||^2 + C sum max(0, 1 - y_i w.x_i)`
    Svm { c: f64 },
}

impl LinearLoss {
    pub fn value(&self, x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>) -> f64 {
        match *self {
            Self::Ols => ols_loss(x, y, w),
            Self::Svm { c } => svm_primal_loss(x, y, w, c),
        }
    }

    /// Gradient (OLS) or the subgradient that takes 0 at hinge kinks (SVM).
    pub fn gradient(&self, x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        match *self {
            Self::Ols => 2.0 * x.tr_mul(&(x * w - y)),
            Self::Svm { c } => {
                let margins = (x * w).component_mul(y);
                let mut g = w.clone();
                for i in 0..x.nrows() {
                    if margins[i] < 1.0 {
                        g.axpy(-c * y[i], &x.row(i).transpose(), 1.0);
                    }
                }
                g
            }
        }
    }

    /// Minimizer on a complete matrix, using the crate's default solver
    /// settings.
    pub fn train(&self, x: &DMatrix<f64>, y: &DVector<f64>) -> crate::Result<LinearModel> {
        match *self {
            Self::Ols => train_ols(x, y).map(|(m, _)| m),
            Self::Svm { c } => train_linear_svm(x, y, &SvmOptions::new(c)),
        }
    }

    /// Tolerance used when comparing two loss values for "same optimum".
    pub fn same_optimum_tol(&self) -> f64 {
        match self {
            Self::Ols => 1e-8,
            Self::Svm { .. } => 1e-4,
        }
    }
}

pub fn ols_loss(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>) -> f64 {
    (x * w - y).norm_squared()
}

pub fn svm_primal_loss(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, c: f64) -> f64 {
    let hinge: f64 = (x * w).component_mul(y).iter().map(|m| (1.0 - m).max(0.0)).sum();
    0.5 * w.norm_squared() + c * hinge
}
