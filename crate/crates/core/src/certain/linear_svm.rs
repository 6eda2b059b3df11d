//! Certain models for the offset-free linear SVM.
//!
//! Step 1 trains on the complete examples and accepts when every incomplete
//! feature has a zero coefficient and every incomplete example clears the
//! margin on its observed part. Step 2 retrains on the mean repair to settle
//! incomplete examples sitting exactly on the margin.

use nalgebra::DVector;

use super::{CertainReport, Diagnostics, Verdict, Witness, MARGIN_TOL};
use crate::baselines::mean_repair_values;
use crate::dataset::{IncompleteDataset, Repair};
use crate::error::{Error, Result};
use crate::trainers::{svm_primal_loss, train_linear_svm, LinearLoss, LinearModel, SvmOptions};

/// Coefficient-zero tolerance relative to the model's largest weight.
pub(crate) fn coef_tol(w: &DVector<f64>) -> f64 {
    1e-6 * (1.0 + w.amax())
}

/// `y_i * sum_{observed j} w_j x_ij`.
pub(crate) fn observed_margin(ds: &IncompleteDataset, i: usize, w: &DVector<f64>) -> f64 {
    ds.labels()[i] * ds.observed_in_row(i).map(|(j, v)| w[j] * v).sum::<f64>()
}

pub fn check_certain_linear_svm(ds: &IncompleteDataset, c: f64, opts: &SvmOptions) -> Result<CertainReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("C must be finite and > 0, got {c}")));
    }
    let opts = SvmOptions { c, ..*opts };
    let sets = ds.missing_sets();
    let mut diag = Diagnostics::default();

    if let Some(full) = ds.to_complete() {
        let model = train_linear_svm(&full.x, &full.y, &opts)?;
        diag.notes.push("no missing values".into());
        return Ok(CertainReport {
            verdict: Verdict::Exists,
            model: Some(model),
            witness: None,
            diagnostics: diag,
        });
    }

    // Step 1: complete examples only. With none, the trained model is 0.
    let (xc, _) = ds.complete_examples();
    if xc.n() == 0 {
        diag.notes.push("no complete examples".into());
    }
    let diamond = train_linear_svm(&xc.x, &xc.y, &opts)?;
    let tau0 = coef_tol(&diamond.w);
    let mut set1 = true;
    for &j in &sets.features {
        let m = diamond.w[j].abs();
        set1 &= diag.push("set1_zero_coefficient", None, Some(j), m, tau0, m <= tau0);
    }
    for &i in &sets.examples {
        let m = observed_margin(ds, i, &diamond.w);
        set1 &= diag.push("set1_strict_margin", Some(i), None, m, 1.0 + MARGIN_TOL, m > 1.0 + MARGIN_TOL);
    }
    if set1 {
        let loss = svm_primal_loss(&xc.x, &xc.y, &diamond.w, c);
        diag.notes.push("certain model found by set 1".into());
        return Ok(CertainReport {
            verdict: Verdict::Exists,
            model: Some(LinearModel {
                w: diamond.w,
                training_loss: loss,
            }),
            witness: None,
            diagnostics: diag,
        });
    }

    // Step 2: one arbitrary (mean) repair.
    let mean_values = mean_repair_values(ds)?;
    let x_mean = ds.repaired_with(&mean_values)?;
    let prime = train_linear_svm(&x_mean, ds.labels(), &opts)?;
    let tau0p = coef_tol(&prime.w);
    let mut set2 = true;
    for &j in &sets.features {
        let m = prime.w[j].abs();
        set2 &= diag.push("set2_zero_coefficient", None, Some(j), m, tau0p, m <= tau0p);
    }
    let mut on_margin = 0;
    for &i in &sets.examples {
        let m = observed_margin(ds, i, &prime.w);
        if (m - 1.0).abs() <= MARGIN_TOL {
            on_margin += 1;
        }
        set2 &= diag.push("set2_margin", Some(i), None, m, 1.0 - MARGIN_TOL, m >= 1.0 - MARGIN_TOL);
    }
    // Incomplete examples on the margin must carry no weight in the fit,
    // otherwise repairing them moves the optimum. That holds exactly when
    // the mean-repair model coincides with the complete-example model.
    let dist = (&prime.w - &diamond.w).amax();
    let tol_same = tau0.max(tau0p);
    set2 &= diag.push("set2_matches_complete_example_model", None, None, dist, tol_same, dist <= tol_same);
    if on_margin > 0 {
        diag.notes.push(format!("{on_margin} incomplete example(s) lie on the margin within {MARGIN_TOL:e}"));
    }
    if set2 {
        diag.notes.push("certain model found by set 2".into());
        return Ok(CertainReport {
            verdict: Verdict::Exists,
            model: Some(prime),
            witness: None,
            diagnostics: diag,
        });
    }

    let witness = build_witness(ds, c, &diamond.w, &mean_values, &diag, &opts)?;
    Ok(CertainReport {
        verdict: Verdict::NotExists,
        model: None,
        witness: Some(witness),
        diagnostics: diag,
    })
}

/// Mean repair, except that a failing coefficient's missing cell is set so
/// that its example lands on the wrong side of the hyperplane.
/// Solver tolerance for the witness repair. Any iterate's loss is at least
/// the optimum, so the reported gap is a lower bound on the true one.
const WITNESS_TOL: f64 = 1e-4;

fn build_witness(
    ds: &IncompleteDataset,
    c: f64,
    w: &DVector<f64>,
    mean_values: &[f64],
    diag: &Diagnostics,
    opts: &SvmOptions,
) -> Result<Witness> {
    let mut values = mean_values.to_vec();
    let mut explanation = String::from("no certain model");
    if let Some(cond) = diag.conditions.iter().find(|c| c.name.starts_with("set1") && !c.holds) {
        match (cond.example, cond.feature) {
            (None, Some(j)) => {
                if let Some(k) = ds.missing_cells().iter().position(|cell| cell.col == j) {
                    let i = ds.missing_cells()[k].row;
                    let others: f64 = ds.observed_in_row(i).map(|(q, v)| w[q] * v).sum::<f64>()
                        + ds.missing_cells()
                            .iter()
                            .zip(mean_values)
                            .filter(|(cell, _)| cell.row == i && cell.col != j)
                            .map(|(cell, v)| w[cell.col] * v)
                            .sum::<f64>();
                    // y_i w.x_i = -1 after the repair
                    values[k] = (-ds.labels()[i] - others) / w[j];
                }
                explanation = format!("incomplete feature '{}' has a nonzero coefficient", ds.feature_names()[j]);
            }
            (Some(i), _) => {
                explanation = format!("incomplete example {i} is a support vector (observed margin {:.6})", cond.magnitude);
            }
            _ => {}
        }
    }
    let repair = Repair::from_aligned(ds, &values)?;
    let x = ds.repaired_with(&values)?;
    let gap = LinearLoss::Svm { c }.value(&x, ds.labels(), w) - train_linear_svm(&x, ds.labels(), &SvmOptions { tol: WITNESS_TOL.max(opts.tol), ..*opts })?.training_loss;
    Ok(Witness {
        repair,
        explanation,
        gap: Some(gap),
    })
}
