//! Certain models for least-squares regression.
//!
//! A certain model exists iff the residue `e` of the fit on the complete
//! features is orthogonal to every incomplete feature under every repair:
//! `e_i = 0` wherever the feature is missing, and the observed part of the
//! feature is orthogonal to `e`. The certain model is then the complete
//! feature fit padded with zeros.

use nalgebra::DVector;

use super::{CertainReport, Diagnostics, Verdict, Witness};
use crate::dataset::{IncompleteDataset, Repair};
use crate::error::Result;
use crate::trainers::{ols_loss, train_ols, LinearModel};

pub const DEFAULT_TOL: f64 = 1e-8;

pub fn check_certain_linreg(ds: &IncompleteDataset, tol: f64) -> Result<CertainReport> {
    let y = ds.labels();
    let (xc, cols) = ds.complete_features();
    let (fit, residue) = train_ols(&xc.x, y)?;
    let e = residue.e;

    let mut expanded = DVector::zeros(ds.d());
    for (k, &j) in cols.iter().enumerate() {
        expanded[j] = fit.w[k];
    }

    let e_inf = e.amax();
    let mut diag = Diagnostics::default();
    diag.notes.push(format!(
        "zero tests use tol * (1 + ||e||_inf) * (1 + ||z_j||_inf) with tol = {tol:e}"
    ));
    if cols.is_empty() {
        diag.notes.push("no complete features; residue is -y".into());
    }
    for j in ds.missing_sets().features {
        let z_inf = ds.observed_in_column(j).map(|(_, v)| v.abs()).fold(0.0, f64::max);
        let threshold = tol * (1.0 + e_inf) * (1.0 + z_inf);
        let at_missing = (0..ds.n()).filter(|&i| ds.is_missing(i, j)).map(|i| e[i].abs()).fold(0.0, f64::max);
        diag.push("residue_zero_at_missing", None, Some(j), at_missing, threshold, at_missing <= threshold);
        let inner: f64 = ds.observed_in_column(j).map(|(i, v)| v * e[i]).sum();
        diag.push("residue_orthogonal_to_observed", None, Some(j), inner.abs(), threshold, inner.abs() <= threshold);
    }

    if diag.all_hold() {
        return Ok(CertainReport {
            verdict: Verdict::Exists,
            model: Some(LinearModel {
                w: expanded,
                training_loss: fit.training_loss,
            }),
            witness: None,
            diagnostics: diag,
        });
    }

    let witness = build_witness(ds, &e, &expanded, &diag)?;
    Ok(CertainReport {
        verdict: Verdict::NotExists,
        model: None,
        witness: Some(witness),
        diagnostics: diag,
    })
}

/// Repair on which the padded model is beaten: the violated feature's
/// missing cells get probe values signed to push `<e, z_j>` away from zero,
/// every other missing cell gets 0.
fn build_witness(ds: &IncompleteDataset, e: &DVector<f64>, expanded: &DVector<f64>, diag: &Diagnostics) -> Result<Witness> {
    let failed = diag.first_failure().expect("called only on failure");
    let j = failed.feature.expect("linreg conditions are per feature");
    let threshold = failed.threshold;
    let observed_inner: f64 = ds.observed_in_column(j).map(|(i, v)| v * e[i]).sum();
    let sign = if observed_inner < 0.0 { -1.0 } else { 1.0 };
    let min_nonzero = e.iter().map(|v| v.abs()).filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let probe = if min_nonzero.is_finite() { (1.0 + e.amax()) / min_nonzero } else { 1.0 };

    let values: Vec<f64> = ds
        .missing_cells()
        .iter()
        .map(|c| {
            if c.col == j && e[c.row].abs() > threshold {
                sign * probe * e[c.row].signum()
            } else {
                0.0
            }
        })
        .collect();
    let repair = Repair::from_aligned(ds, &values)?;
    let x = ds.repaired_with(&values)?;
    let (best, _) = train_ols(&x, ds.labels())?;
    let gap = ols_loss(&x, ds.labels(), expanded) - best.training_loss;
    Ok(Witness {
        repair,
        explanation: format!("{} fails for feature '{}'", failed.name, ds.feature_names()[j]),
        gap: Some(gap),
    })
}
