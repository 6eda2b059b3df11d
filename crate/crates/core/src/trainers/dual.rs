//! Kernel SVM trained through its dual:
//!
//! `max sum a_i - 0.5 sum_ij a_i a_j y_i y_j k(x_i, x_j)`, `0 <= a_i <= C`.
//!
//! The decision value of a model is `sum_j a_j y_j k(x_j, x)` and carries no
//! offset. [`DualConstraint::Balanced`] additionally enforces
//! `sum a_i y_i = 0` (the classical formulation, solved by SMO); the
//! default [`DualConstraint::BoxOnly`] is the exact dual of the offset-free
//! primal, which is the one the certainty conditions reason about.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kernel::{row_major, KernelSpec};
use crate::error::{Error, Result};

/// Curvature floor for degenerate pairs.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DualConstraint {
    BoxOnly,
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualOptions {
    pub c: f64,
    /// KKT violation tolerance.
    pub tol: f64,
    pub max_iter: usize,
    pub constraint: DualConstraint,
}

impl DualOptions {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            tol: 1e-6,
            max_iter: 1_000_000,
            constraint: DualConstraint::BoxOnly,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualModel {
    pub alphas: DVector<f64>,
    pub labels: DVector<f64>,
    /// Training rows, one per alpha.
    pub rows: Vec<Vec<f64>>,
    pub kernel: KernelSpec,
    pub c: f64,
    pub constraint: DualConstraint,
    /// Dual objective at `alphas` (the maximized quantity).
    pub objective: f64,
    pub iterations: usize,
}

impl DualModel {
    /// Indices with `alpha > zero_tol`.
    pub fn support_indices(&self, zero_tol: f64) -> Vec<usize> {
        (0..self.alphas.len()).filter(|&i| self.alphas[i] > zero_tol).collect()
    }

    /// Default threshold separating support vectors from zero alphas.
    pub fn zero_tol(&self) -> f64 {
        1e-10 * self.c.max(1.0)
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for (j, row) in self.rows.iter().enumerate() {
            if self.alphas[j] != 0.0 {
                s += self.alphas[j] * self.labels[j] * self.kernel.eval(row, x)?;
            }
        }
        Ok(s)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Dual objective `sum a - 0.5 a^T Q a` with `Q_ij = y_i y_j K_ij`.
pub fn dual_objective(alphas: &DVector<f64>, y: &DVector<f64>, gram: &DMatrix<f64>) -> f64 {
    let ay = alphas.component_mul(y);
    alphas.sum() - 0.5 * ay.dot(&(gram * &ay))
}

pub fn train_kernel_svm_dual(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    kernel: KernelSpec,
    opts: &DualOptions,
) -> Result<DualModel> {
    let n = x.nrows();
    if n == 0 {
        return Err(Error::Empty("dual SVM needs at least one example".into()));
    }
    if y.len() != n {
        return Err(Error::Contract(format!("{} labels for {n} rows", y.len())));
    }
    if !(opts.c > 0.0 && opts.c.is_finite()) {
        return Err(Error::Config(format!("C must be finite and > 0, got {}", opts.c)));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::Config("SVM labels must be -1 or +1".into()));
    }
    let gram = kernel.gram(x)?;
    if gram.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("kernel Gram matrix"));
    }
    let (alphas, iterations) = match opts.constraint {
        DualConstraint::BoxOnly => solve_box(&gram, y, opts)?,
        DualConstraint::Balanced => solve_balanced(&gram, y, opts)?,
    };
    Ok(DualModel {
        objective: dual_objective(&alphas, y, &gram),
        alphas,
        labels: y.clone(),
        rows: row_major(x),
        kernel,
        c: opts.c,
        constraint: opts.constraint,
        iterations,
    })
}

/// Projected gradient of the minimization form at coordinate `i`.
fn projected(g: f64, a: f64, c: f64) -> f64 {
    if a <= 0.0 {
        g.min(0.0)
    } else if a >= c {
        g.max(0.0)
    } else {
        g
    }
}

/// Greedy coordinate descent on `0.5 a^T Q a - sum a` over the box.
fn solve_box(gram: &DMatrix<f64>, y: &DVector<f64>, opts: &DualOptions) -> Result<(DVector<f64>, usize)> {
    let n = y.len();
    let c = opts.c;
    let q = |i: usize, j: usize| y[i] * y[j] * gram[(i, j)];
    let mut alpha = DVector::<f64>::zeros(n);
    let mut grad = DVector::<f64>::from_element(n, -1.0);
    let mut violation = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let (i, v) = (0..n)
            .map(|i| (i, projected(grad[i], alpha[i], c).abs()))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        violation = v;
        if violation <= opts.tol {
            return Ok((alpha, iter));
        }
        let qii = q(i, i);
        let next = if qii > 0.0 { (alpha[i] - grad[i] / qii).clamp(0.0, c) } else if grad[i] < 0.0 { c } else { 0.0 };
        let step = next - alpha[i];
        alpha[i] = next;
        for k in 0..n {
            grad[k] += q(i, k) * step;
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        violation,
        best: alpha.iter().copied().collect(),
    })
}

/// SMO with second-order working-set selection.
fn solve_balanced(gram: &DMatrix<f64>, y: &DVector<f64>, opts: &DualOptions) -> Result<(DVector<f64>, usize)> {
    let n = y.len();
    let c = opts.c;
    let q = |i: usize, j: usize| y[i] * y[j] * gram[(i, j)];
    let mut alpha = DVector::<f64>::zeros(n);
    let mut grad = DVector::<f64>::from_element(n, -1.0);
    let up = |a: f64| a >= c;
    let low = |a: f64| a <= 0.0;
    let mut violation = f64::INFINITY;

    for iter in 0..opts.max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let cand = if y[t] > 0.0 {
                (!up(alpha[t])).then(|| -grad[t])
            } else {
                (!low(alpha[t])).then(|| grad[t])
            };
            if let Some(v) = cand {
                if v >= gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best_obj = f64::INFINITY;
        if i != usize::MAX {
            for t in 0..n {
                let (ok, g2, grad_diff, quad) = if y[t] > 0.0 {
                    (!low(alpha[t]), grad[t], gmax + grad[t], gram[(i, i)] + gram[(t, t)] - 2.0 * y[i] * q(i, t))
                } else {
                    (!up(alpha[t]), -grad[t], gmax - grad[t], gram[(i, i)] + gram[(t, t)] + 2.0 * y[i] * q(i, t))
                };
                if !ok {
                    continue;
                }
                gmax2 = gmax2.max(g2);
                if grad_diff > 0.0 {
                    let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                    if obj <= best_obj {
                        best_obj = obj;
                        j = t;
                    }
                }
            }
        }
        violation = if i == usize::MAX { 0.0 } else { (gmax + gmax2).max(0.0) };
        if violation < opts.tol || j == usize::MAX {
            return Ok((alpha, iter));
        }

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (gram[(i, i)] + gram[(j, j)] + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (gram[(i, i)] + gram[(j, j)] - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for k in 0..n {
            grad[k] += q(i, k) * di + q(j, k) * dj;
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        violation,
        best: alpha.iter().copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_points() -> (DMatrix<f64>, DVector<f64>) {
        (DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 1.0, 0.0]), DVector::from_vec(vec![-1.0, 1.0]))
    }

    #[test]
    fn two_point_polynomial_dual() {
        // Gram = diag(4, 4), cross terms 0: maximize 2a - 4a^2 -> a = 0.25.
        let (x, y) = two_points();
        let k = KernelSpec::polynomial(2, 1.0).unwrap();
        for constraint in [DualConstraint::BoxOnly, DualConstraint::Balanced] {
            let opts = DualOptions {
                tol: 1e-12,
                constraint,
                ..DualOptions::new(1.0)
            };
            let m = train_kernel_svm_dual(&x, &y, k, &opts).unwrap();
            assert_abs_diff_eq!(m.alphas[0], 0.25, epsilon = 1e-10);
            assert_abs_diff_eq!(m.alphas[1], 0.25, epsilon = 1e-10);
            assert_abs_diff_eq!(m.objective, 0.25, epsilon = 1e-10);
        }
    }

    /// KKT residual of the box-only dual.
    fn kkt_box(m: &DualModel, gram: &DMatrix<f64>) -> f64 {
        let ay = m.alphas.component_mul(&m.labels);
        let g = (gram * ay).component_mul(&m.labels).add_scalar(-1.0);
        (0..g.len()).map(|i| projected(g[i], m.alphas[i], m.c).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn rbf_kkt_residuals_within_tolerance() {
        let x = DMatrix::from_row_slice(6, 2, &[0.0, 0.0, 0.3, 0.2, -0.2, 0.4, 2.0, 2.0, 2.2, 1.7, 1.8, 2.3]);
        let y = DVector::from_vec(vec![-1.0, -1.0, -1.0, 1.0, 1.0, 1.0]);
        let k = KernelSpec::rbf(1.0).unwrap();
        let m = train_kernel_svm_dual(&x, &y, k, &DualOptions::new(1.0)).unwrap();
        let gram = k.gram(&x).unwrap();
        assert!(kkt_box(&m, &gram) <= 1e-6);
        for i in 0..6 {
            assert!(m.decision_value(&x.row(i).iter().copied().collect::<Vec<_>>()).unwrap() * y[i] > 0.0);
        }

        let bal = train_kernel_svm_dual(&x, &y, k, &DualOptions { constraint: DualConstraint::Balanced, ..DualOptions::new(1.0) })
            .unwrap();
        assert!(bal.alphas.dot(&y).abs() <= 1e-8);
        assert!(bal.alphas.iter().all(|&a| (0.0..=1.0).contains(&a)));
    }

    #[test]
    fn duplicated_points_with_opposite_labels_hit_the_box() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 1.0, 0.5]);
        let y = DVector::from_vec(vec![1.0, -1.0]);
        let k = KernelSpec::rbf(0.5).unwrap();
        let c = 0.7;
        // brute force: 201 x 201 grid over the feasible box
        let gram = k.gram(&x).unwrap();
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for a in 0..=200 {
            for b in 0..=200 {
                let al = DVector::from_vec(vec![c * a as f64 / 200.0, c * b as f64 / 200.0]);
                let v = dual_objective(&al, &y, &gram);
                if v > best.0 {
                    best = (v, al[0], al[1]);
                }
            }
        }
        assert_eq!((best.1, best.2), (c, c));
        for constraint in [DualConstraint::BoxOnly, DualConstraint::Balanced] {
            let m = train_kernel_svm_dual(&x, &y, k, &DualOptions { constraint, ..DualOptions::new(c) }).unwrap();
            assert_abs_diff_eq!(m.alphas[0], c, epsilon = 1e-12);
            assert_abs_diff_eq!(m.alphas[1], c, epsilon = 1e-12);
        }
    }

    #[test]
    fn feasibility_on_random_problems() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = rng.gen_range(2..10);
            let x = DMatrix::from_fn(n, 3, |_, _| rng.gen_range(-2.0..2.0));
            let y = DVector::from_fn(n, |_, _| if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
            let c = [0.1, 1.0, 10.0][rng.gen_range(0..3)];
            for k in [KernelSpec::Polynomial { degree: 2, coef0: 1.0 }, KernelSpec::Rbf { gamma: 0.5 }, KernelSpec::Arccos] {
                let opts = DualOptions { constraint: DualConstraint::Balanced, ..DualOptions::new(c) };
                let m = train_kernel_svm_dual(&x, &y, k, &opts).unwrap();
                assert!(m.alphas.iter().all(|&a| (0.0..=c).contains(&a)));
                assert!(m.alphas.dot(&y).abs() <= 1e-8);
                let b = train_kernel_svm_dual(&x, &y, k, &DualOptions::new(c)).unwrap();
                assert!(b.alphas.iter().all(|&a| (0.0..=c).contains(&a)));
                assert!(kkt_box(&b, &k.gram(&x).unwrap()) <= 1e-6);
            }
        }
    }

    #[test]
    fn linear_kernel_dual_matches_primal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = DMatrix::from_fn(12, 2, |_, _| rng.gen_range(-2.0..2.0));
        let y = DVector::from_fn(12, |i, _| if x[(i, 0)] - x[(i, 1)] > 0.2 { 1.0 } else { -1.0 });
        let dual = train_kernel_svm_dual(&x, &y, KernelSpec::Linear, &DualOptions { tol: 1e-10, ..DualOptions::new(1.0) }).unwrap();
        let primal = crate::trainers::train_linear_svm(&x, &y, &crate::trainers::SvmOptions::new(1.0)).unwrap();
        // strong duality
        assert_abs_diff_eq!(dual.objective, primal.training_loss, epsilon = 1e-7);
    }
}
