//! Certain models for kernel SVMs trained through the offset-free dual.
//!
//! The polynomial test is exact. The RBF and arc-cosine tests bound each
//! incomplete example's margin from below without enumerating repairs and
//! can only confirm existence.

use serde::Serialize;

use super::ranges::{kernel_range_arccos, kernel_range_rbf, KernelRange};
use super::{Diagnostics, Verdict, MARGIN_TOL};
use crate::dataset::{IncompleteDataset, RepairBounds};
use crate::error::{Error, Result};
use crate::trainers::kernel::dot;
use crate::trainers::{train_kernel_svm_dual, DualModel, DualOptions, KernelSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelCertainReport {
    pub verdict: Verdict,
    pub kernel: KernelSpec,
    /// Margin lower bounds, aligned with `incomplete_examples`. Empty for
    /// the polynomial test.
    pub lwb: Vec<f64>,
    pub incomplete_examples: Vec<usize>,
    pub model: Option<DualModel>,
    pub diagnostics: Diagnostics,
}

fn zero_tol(row: &[f64]) -> f64 {
    1e-6 * (1.0 + row.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Trains on the whole dataset when nothing is missing.
fn complete_shortcut(ds: &IncompleteDataset, kernel: KernelSpec, opts: &DualOptions) -> Result<Option<KernelCertainReport>> {
    let Some(full) = ds.to_complete() else {
        return Ok(None);
    };
    let model = train_kernel_svm_dual(&full.x, &full.y, kernel, opts)?;
    let mut diagnostics = Diagnostics::default();
    diagnostics.notes.push("no missing values".into());
    Ok(Some(KernelCertainReport {
        verdict: Verdict::Exists,
        kernel,
        lwb: vec![],
        incomplete_examples: vec![],
        model: Some(model),
        diagnostics,
    }))
}

/// Model trained on the complete examples, or `None` when there are none.
fn complete_example_model(ds: &IncompleteDataset, kernel: KernelSpec, opts: &DualOptions) -> Result<Option<DualModel>> {
    let (xc, _) = ds.complete_examples();
    if xc.n() == 0 {
        return Ok(None);
    }
    train_kernel_svm_dual(&xc.x, &xc.y, kernel, opts).map(Some)
}

/// Exact test for the polynomial kernel `(x.x' + coef0)^degree`.
pub fn check_certain_poly_svm(ds: &IncompleteDataset, degree: u32, coef0: f64, opts: &DualOptions) -> Result<KernelCertainReport> {
    let kernel = KernelSpec::polynomial(degree, coef0)?;
    if let Some(r) = complete_shortcut(ds, kernel, opts)? {
        return Ok(r);
    }
    let sets = ds.missing_sets();
    let mut diag = Diagnostics::default();
    let Some(model) = complete_example_model(ds, kernel, opts)? else {
        diag.notes.push("no complete examples".into());
        return Ok(KernelCertainReport {
            verdict: Verdict::NotExists,
            kernel,
            lwb: vec![],
            incomplete_examples: sets.examples,
            model: None,
            diagnostics: diag,
        });
    };

    let support = model.support_indices(model.zero_tol());
    let mut ok = true;
    for &s in &support {
        let row = &model.rows[s];
        let tol = zero_tol(row);
        for &m in &sets.features {
            let v = row[m].abs();
            ok &= diag.push("support_vector_zero_at_incomplete_feature", Some(s), Some(m), v, tol, v <= tol);
        }
    }
    for &i in &sets.examples {
        let observed: Vec<f64> = ds.row(i).iter().map(|v| v.unwrap_or(0.0)).collect();
        let mut value = 0.0;
        for &s in &support {
            value += model.alphas[s] * model.labels[s] * (dot(&observed, &model.rows[s]) + coef0).powi(degree as i32);
        }
        let margin = ds.labels()[i] * value;
        ok &= diag.push("observed_margin", Some(i), None, margin, 1.0 + MARGIN_TOL, margin > 1.0 + MARGIN_TOL);
    }
    Ok(KernelCertainReport {
        verdict: if ok { Verdict::Exists } else { Verdict::NotExists },
        kernel,
        lwb: vec![],
        incomplete_examples: sets.examples,
        model: ok.then_some(model),
        diagnostics: diag,
    })
}

/// Lower bound on `y_i f(x_i^r)` over all repairs, for every incomplete
/// example `i` (in row order). `bounds` is required for RBF and optional
/// for the arc-cosine kernel.
pub fn lower_bound_margins(ds: &IncompleteDataset, dual: &DualModel, bounds: Option<&RepairBounds>) -> Result<Vec<f64>> {
    if let Some(b) = bounds {
        b.check_aligned(ds)?;
    }
    if let KernelSpec::Rbf { .. } = dual.kernel {
        match bounds {
            Some(b) => b.require_finite(ds)?,
            None if ds.num_missing() > 0 => {
                let c = ds.missing_cells()[0];
                return Err(Error::UnboundedCell { row: c.row, col: c.col });
            }
            None => {}
        }
    }
    let support = dual.support_indices(dual.zero_tol());
    let mut out = Vec::new();
    for i in ds.missing_sets().examples {
        let x_i = ds.row(i);
        let intervals: Vec<(f64, f64)> = (0..ds.d())
            .filter_map(|m| ds.cell_index(i, m))
            .map(|k| bounds.map_or((f64::NEG_INFINITY, f64::INFINITY), |b| b.interval(k)))
            .collect();
        let mut lwb = 0.0;
        for &s in &support {
            let beta = ds.labels()[i] * dual.alphas[s] * dual.labels[s];
            if beta == 0.0 {
                continue;
            }
            let range = pair_range(dual.kernel, &x_i, &dual.rows[s], &intervals)?;
            lwb += if beta > 0.0 { beta * range.k_min } else { beta * range.k_max };
        }
        out.push(lwb);
    }
    Ok(out)
}

fn pair_range(kernel: KernelSpec, x_i: &[Option<f64>], x_j: &[f64], intervals: &[(f64, f64)]) -> Result<KernelRange> {
    match kernel {
        KernelSpec::Rbf { gamma } => kernel_range_rbf(x_i, x_j, intervals, gamma),
        KernelSpec::Arccos => kernel_range_arccos(x_i, x_j, intervals.first().copied()),
        other => Err(Error::Unsupported(format!("margin lower bounds are defined for rbf and arccos, not {}", other.name()))),
    }
}

fn check_by_lower_bound(ds: &IncompleteDataset, kernel: KernelSpec, opts: &DualOptions, bounds: Option<&RepairBounds>) -> Result<KernelCertainReport> {
    if let Some(r) = complete_shortcut(ds, kernel, opts)? {
        return Ok(r);
    }
    let examples = ds.missing_sets().examples;
    let mut diag = Diagnostics::default();
    let model = complete_example_model(ds, kernel, opts)?;
    let lwb = match &model {
        Some(m) => lower_bound_margins(ds, m, bounds)?,
        None => {
            diag.notes.push("no complete examples; every bound is 0".into());
            vec![0.0; examples.len()]
        }
    };
    let mut ok = true;
    for (&i, &b) in examples.iter().zip(&lwb) {
        ok &= diag.push("margin_lower_bound", Some(i), None, b, 1.0 + MARGIN_TOL, b > 1.0 + MARGIN_TOL);
    }
    if !ok {
        diag.notes.push("the bound is one-sided; a certain model may still exist".into());
    }
    Ok(KernelCertainReport {
        verdict: if ok { Verdict::Exists } else { Verdict::Unknown },
        kernel,
        lwb,
        incomplete_examples: examples,
        model: if ok { model } else { None },
        diagnostics: diag,
    })
}

/// Sufficient test for the RBF kernel. Needs finite bounds at every missing
/// cell.
pub fn check_certain_rbf_svm(ds: &IncompleteDataset, gamma: f64, opts: &DualOptions, bounds: &RepairBounds) -> Result<KernelCertainReport> {
    check_by_lower_bound(ds, KernelSpec::rbf(gamma)?, opts, Some(bounds))
}

/// Sufficient test for the arc-cosine kernel. Every incomplete example may
/// have one missing value only; `None` bounds mean the whole real line.
pub fn check_certain_arccos_svm(ds: &IncompleteDataset, opts: &DualOptions, bounds: Option<&RepairBounds>) -> Result<KernelCertainReport> {
    check_by_lower_bound(ds, KernelSpec::Arccos, opts, bounds)
}
