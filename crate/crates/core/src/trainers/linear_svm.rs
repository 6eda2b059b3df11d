use nalgebra::{DMatrix, DVector};

use super::{svm_primal_loss, LinearModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmOptions {
    pub c: f64,
    /// Largest tolerated projected-gradient magnitude of the dual.
    pub tol: f64,
    /// Cap on full passes over the data.
    pub max_epochs: usize,
}

impl SvmOptions {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            tol: 1e-10,
            max_epochs: 200_000,
        }
    }
}

/// Primal linear SVM without intercept:
/// `min 0.5 ||w||^2 + C sum max(0, 1 - y_i w.x_i)`.
///
/// Solved by cyclic coordinate ascent on the box-constrained dual, keeping
/// `w = sum alpha_i y_i x_i` in sync. Fully deterministic: the visiting
/// order is fixed (ascending over the active set) and the start is
/// `alpha = 0`.
pub fn train_linear_svm(x: &DMatrix<f64>, y: &DVector<f64>, opts: &SvmOptions) -> Result<LinearModel> {
    let (n, d) = x.shape();
    if !(opts.c > 0.0 && opts.c.is_finite()) {
        return Err(Error::Config(format!("C must be finite and > 0, got {}", opts.c)));
    }
    if y.len() != n {
        return Err(Error::Contract(format!("{} labels for {n} rows", y.len())));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::Config("SVM labels must be -1 or +1".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("SVM input"));
    }
    let c = opts.c;
    // Rows as contiguous slices: column i of x^T.
    let xt = x.transpose();
    let qii: Vec<f64> = (0..n).map(|i| xt.column(i).norm_squared()).collect();
    let mut alpha = vec![0.0; n];
    let mut w = DVector::<f64>::zeros(d);

    // Coordinates stuck at a bound with a gradient pushing outward are
    // skipped (shrunk) until the active set converges; then every
    // coordinate is checked again before returning.
    let mut active: Vec<usize> = (0..n).collect();
    let (mut pg_max_old, mut pg_min_old) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut violation = f64::INFINITY;
    for _ in 0..opts.max_epochs {
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut k = 0;
        while k < active.len() {
            let i = active[k];
            let xi = xt.column(i);
            let g = y[i] * w.dot(&xi) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                if g > pg_max_old {
                    active.swap_remove(k);
                    continue;
                }
                g.min(0.0)
            } else if alpha[i] >= c {
                if g < pg_min_old {
                    active.swap_remove(k);
                    continue;
                }
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            k += 1;
            if pg == 0.0 {
                continue;
            }
            let next = if qii[i] > 0.0 { (alpha[i] - g / qii[i]).clamp(0.0, c) } else { c };
            let step = next - alpha[i];
            if step != 0.0 {
                w.axpy(step * y[i], &xi, 1.0);
                alpha[i] = next;
            }
        }
        violation = pg_max.max(-pg_min).max(0.0);
        if violation <= opts.tol {
            if active.len() == n {
                let w = weights_from_dual(&xt, y, &alpha);
                return Ok(LinearModel {
                    training_loss: svm_primal_loss(x, y, &w, c),
                    w,
                });
            }
            active = (0..n).collect();
            pg_max_old = f64::INFINITY;
            pg_min_old = f64::NEG_INFINITY;
            continue;
        }
        pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
        pg_min_old = if pg_min >= 0.0 { f64::NEG_INFINITY } else { pg_min };
        active.sort_unstable();
    }
    Err(Error::NoConvergence {
        iterations: opts.max_epochs,
        violation,
        best: weights_from_dual(&xt, y, &alpha).iter().copied().collect(),
    })
}

fn weights_from_dual(xt: &DMatrix<f64>, y: &DVector<f64>, alpha: &[f64]) -> DVector<f64> {
    let coef = DVector::from_iterator(alpha.len(), alpha.iter().zip(y.iter()).map(|(a, y)| a * y));
    xt * coef
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair() -> (DMatrix<f64>, DVector<f64>) {
        (DMatrix::from_row_slice(2, 2, &[-2.0, 0.0, 2.0, 0.0]), DVector::from_vec(vec![-1.0, 1.0]))
    }

    #[test]
    fn symmetric_pair_has_unit_margin() {
        // Objective 0.5 w^2 + 2 max(0, 1 - 2w) is minimized where the hinge
        // switches off, w = 0.5, giving 0.125.
        let (x, y) = pair();
        let m = train_linear_svm(&x, &y, &SvmOptions::new(1.0)).unwrap();
        assert_abs_diff_eq!(m.w[0], 0.5, epsilon = 1e-9);
        assert_eq!(m.w[1], 0.0);
        assert_abs_diff_eq!(m.training_loss, 0.125, epsilon = 1e-9);
    }

    #[test]
    fn zero_example_gives_zero_model() {
        let x = DMatrix::zeros(1, 2);
        let m = train_linear_svm(&x, &DVector::from_vec(vec![1.0]), &SvmOptions::new(1.0)).unwrap();
        assert_eq!(m.w, DVector::zeros(2));
    }

    #[test]
    fn larger_c_keeps_separable_optimum() {
        let (x, y) = pair();
        let a = train_linear_svm(&x, &y, &SvmOptions::new(1.0)).unwrap();
        let b = train_linear_svm(&x, &y, &SvmOptions::new(10.0)).unwrap();
        assert_abs_diff_eq!(a.w, b.w, epsilon = 1e-9);
        // Stationarity: moving either way raises the objective.
        for dw in [1e-4, -1e-4] {
            let w = &b.w + DVector::from_vec(vec![dw, 0.0]);
            assert!(svm_primal_loss(&x, &y, &w, 10.0) > b.training_loss);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let (x, _) = pair();
        assert!(train_linear_svm(&x, &DVector::from_vec(vec![0.0, 1.0]), &SvmOptions::new(1.0)).is_err());
        assert!(train_linear_svm(&x, &DVector::from_vec(vec![-1.0, 1.0]), &SvmOptions::new(0.0)).is_err());
    }

    #[test]
    fn iteration_cap_returns_best_iterate() {
        let (x, y) = pair();
        let opts = SvmOptions {
            c: 1.0,
            tol: 0.0,
            max_epochs: 1,
        };
        match train_linear_svm(&x, &y, &opts) {
            Err(Error::NoConvergence { best, .. }) => assert_eq!(best.len(), 2),
            Ok(_) => {}
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn local_perturbations_never_improve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = DMatrix::from_fn(20, 3, |_, _| rng.gen_range(-2.0..2.0));
        let y = DVector::from_fn(20, |i, _| if x[(i, 0)] + 0.3 * x[(i, 1)] + rng.gen_range(-0.5..0.5) > 0.0 { 1.0 } else { -1.0 });
        let m = train_linear_svm(&x, &y, &SvmOptions::new(1.0)).unwrap();
        for _ in 0..1000 {
            let mut delta = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            let r = rng.gen_range(0.0..0.1);
            delta *= r / delta.norm();
            assert!(svm_primal_loss(&x, &y, &(&m.w + delta), 1.0) >= m.training_loss - 1e-9);
        }
    }
}
