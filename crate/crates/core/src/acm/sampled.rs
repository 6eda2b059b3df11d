use log::debug;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{
    complete_report, curvature, enumerated_g, gap_on, sample_edge_repairs, summarize, verdict_for, AcmConfig, AcmReport, GKind,
};
use crate::dataset::{IncompleteDataset, RepairBounds};
use crate::error::Result;
use crate::trainers::{LinearLoss, LinearModel};

/// Iterations without improving the best objective before the descent
/// stops.
pub(crate) const PATIENCE: usize = 2_000;

/// Consecutive objective increases treated as divergence.
pub(crate) const DIVERGENCE_STEPS: usize = 100;

/// One pre-trained sampled repair. Least squares keeps only the normal
/// equations; the hinge loss needs the matrix.
enum Term {
    Quadratic {
        a: DMatrix<f64>,
        b: DVector<f64>,
        yy: f64,
        min_loss: f64,
    },
    Hinge {
        x: DMatrix<f64>,
        min_loss: f64,
    },
}

impl Term {
    fn gap(&self, w: &DVector<f64>, y: &DVector<f64>, loss: LinearLoss) -> f64 {
        match self {
            Term::Quadratic { a, b, yy, min_loss } => w.dot(&(a * w)) - 2.0 * b.dot(w) + yy - min_loss,
            Term::Hinge { x, min_loss } => loss.value(x, y, w) - min_loss,
        }
    }

    fn gradient(&self, w: &DVector<f64>, y: &DVector<f64>, loss: LinearLoss) -> DVector<f64> {
        match self {
            Term::Quadratic { a, b, .. } => 2.0 * (a * w - b),
            Term::Hinge { x, .. } => loss.gradient(x, y, w),
        }
    }
}

/// Minimizes the largest optimality gap over `cfg.samples` random edge
/// repairs, then certifies the result over all edge repairs when there are
/// at most `cfg.enumeration_cap` missing cells.
pub fn learn_acm_sampled(ds: &IncompleteDataset, bounds: &RepairBounds, loss: LinearLoss, cfg: &AcmConfig) -> Result<AcmReport> {
    cfg.validate()?;
    if ds.is_complete() {
        return complete_report(ds, loss, cfg.epsilon);
    }
    bounds.require_finite(ds)?;
    let y = ds.labels();
    let sample = sample_edge_repairs(ds.num_missing(), cfg.samples, cfg.seed);

    let trained: Vec<(Term, DVector<f64>, f64)> = sample
        .par_iter()
        .map(|e| {
            let x = ds.repaired_with(&e.values(&bounds.lo, &bounds.hi))?;
            let opt = loss.train(&x, y)?;
            let curv = curvature(&x, loss);
            let term = match loss {
                LinearLoss::Ols => Term::Quadratic {
                    a: x.tr_mul(&x),
                    b: x.tr_mul(y),
                    yy: y.norm_squared(),
                    min_loss: opt.training_loss,
                },
                LinearLoss::Svm { .. } => Term::Hinge {
                    x,
                    min_loss: opt.training_loss,
                },
            };
            Ok((term, opt.w, curv))
        })
        .collect::<Result<_>>()?;

    let step = cfg
        .gd_step
        .unwrap_or_else(|| 0.1 / trained.iter().map(|t| t.2).fold(f64::MIN_POSITIVE, f64::max));
    let objective = |w: &DVector<f64>| -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (k, (term, _, _)) in trained.iter().enumerate() {
            let v = term.gap(w, y, loss);
            if v > best.0 {
                best = (v, k);
            }
        }
        best
    };

    let mut w = trained.iter().fold(DVector::zeros(ds.d()), |acc, t| acc + &t.1) / trained.len() as f64;
    let (mut best_val, mut best_w) = (f64::INFINITY, w.clone());
    let (mut prev, mut increases, mut since_best) = (f64::INFINITY, 0, 0);
    let (mut iterations, mut converged, mut diverged) = (0, false, false);
    while iterations < cfg.gd_max_iters {
        iterations += 1;
        let (val, k) = objective(&w);
        if val < best_val {
            if best_val - val > 1e-12 * (1.0 + best_val.abs()) {
                since_best = 0;
            }
            best_val = val;
            best_w = w.clone();
        }
        since_best += 1;
        increases = if val > prev { increases + 1 } else { 0 };
        prev = val;
        if increases >= DIVERGENCE_STEPS || !val.is_finite() {
            diverged = true;
            break;
        }
        let grad = trained[k].0.gradient(&w, y, loss);
        if grad.norm() <= cfg.gd_tol {
            converged = true;
            break;
        }
        if since_best >= PATIENCE {
            break;
        }
        w -= step * grad;
    }
    debug!("sampled acm descent: {iterations} iterations, objective {best_val:.6e}");

    let mut notes = vec![format!("descent over {} sampled edge repairs, step {step:.3e}", cfg.samples)];
    if diverged {
        notes.push("descent diverged; reporting the best iterate".into());
    }
    let (sup, g_kind, worst_values) = if ds.num_missing() <= cfg.enumeration_cap {
        let sup = enumerated_g(ds, &bounds.lo, &bounds.hi, loss, &best_w, cfg.enumeration_cap)?;
        let e = super::EdgeRepair::from_index(sup.argmax, ds.num_missing());
        (sup, GKind::ExactOverEdges, e.values(&bounds.lo, &bounds.hi))
    } else {
        notes.push(format!(
            "{} missing cells exceed the enumeration cap of {}; g is estimated on the sample only",
            ds.num_missing(),
            cfg.enumeration_cap
        ));
        let gaps: Vec<f64> = sample
            .par_iter()
            .map(|e| gap_on(&ds.repaired_with(&e.values(&bounds.lo, &bounds.hi))?, y, &best_w, loss))
            .collect::<Result<_>>()?;
        let sup = summarize(&gaps);
        let values = sample[sup.argmax].values(&bounds.lo, &bounds.hi);
        (sup, GKind::SampledEstimate, values)
    };
    let worst_loss = loss.value(&ds.repaired_with(&worst_values)?, y, &best_w);

    Ok(AcmReport {
        model: LinearModel {
            w: best_w,
            training_loss: worst_loss,
        },
        g_value: sup.g,
        g_kind,
        verdict: verdict_for(sup.g, cfg.epsilon, diverged),
        epsilon: cfg.epsilon,
        descent_objective: best_val,
        iterations,
        converged,
        diverged,
        repairs_evaluated: sup.count,
        worst_repairs: sup.worst,
        decomposition: None,
        notes,
    })
}
