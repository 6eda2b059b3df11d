//! Brute-force ground truth over discretized repairs. Meant for small
//! inputs: every grid repair is trained separately.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{IncompleteDataset, Repair, RepairBounds};
use crate::error::{Error, Result};
use crate::trainers::{dual_objective, train_ols, train_kernel_svm_dual, DualOptions, KernelSpec, LinearLoss};

pub const GRID_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub points_per_cell: usize,
    pub bounds: RepairBounds,
}

/// Which trainer the oracle runs on every repair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleModel {
    Linear(LinearLoss),
    /// Kernel SVM compared through its dual objective.
    Kernel { kernel: KernelSpec, c: f64 },
}

impl OracleModel {
    pub fn same_optimum_tol(&self) -> f64 {
        match self {
            Self::Linear(l) => l.same_optimum_tol(),
            Self::Kernel { .. } => 1e-4,
        }
    }
}

fn grid_size(points: usize, dims: usize) -> Result<usize> {
    let count = (points as u128).checked_pow(dims as u32).unwrap_or(u128::MAX);
    if count > GRID_CAP {
        return Err(Error::CapExceeded {
            what: "grid repairs",
            count,
            cap: GRID_CAP,
        });
    }
    Ok(count as usize)
}

fn grid_point(k: usize, points: usize, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let m = lo.len();
    let mut out = vec![0.0; m];
    let mut rest = k;
    for c in (0..m).rev() {
        let s = rest % points;
        rest /= points;
        out[c] = if points == 1 { lo[c] } else { lo[c] + (hi[c] - lo[c]) * s as f64 / (points - 1) as f64 };
    }
    out
}

/// Repairs on an evenly spaced grid, lexicographic with the first missing
/// cell varying slowest. Values are aligned with `ds.missing_cells()`.
#[derive(Debug, Clone)]
pub struct GridRepairs {
    points: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    len: usize,
}

impl GridRepairs {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn values(&self, k: usize) -> Vec<f64> {
        grid_point(k, self.points, &self.lo, &self.hi)
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len).map(|k| self.values(k))
    }
}

pub fn grid_repairs(ds: &IncompleteDataset, grid: &GridSpec) -> Result<GridRepairs> {
    if grid.points_per_cell < 2 {
        return Err(Error::Config("points per cell must be >= 2".into()));
    }
    grid.bounds.require_finite(ds)?;
    Ok(GridRepairs {
        points: grid.points_per_cell,
        lo: grid.bounds.lo.clone(),
        hi: grid.bounds.hi.clone(),
        len: grid_size(grid.points_per_cell, ds.num_missing())?,
    })
}

/// Optimum on one repair, in a form that can be scored on other repairs.
enum Trained {
    Linear { w: DVector<f64>, loss: f64 },
    Dual { alphas: DVector<f64>, objective: f64 },
}

struct RepairCase {
    x: DMatrix<f64>,
    gram: Option<DMatrix<f64>>,
    trained: Trained,
}

impl RepairCase {
    fn optimum(&self) -> f64 {
        match &self.trained {
            Trained::Linear { loss, .. } => *loss,
            Trained::Dual { objective, .. } => -*objective,
        }
    }
}

fn train_case(x: DMatrix<f64>, y: &DVector<f64>, model: OracleModel) -> Result<RepairCase> {
    match model {
        OracleModel::Linear(loss) => {
            let m = loss.train(&x, y)?;
            Ok(RepairCase {
                trained: Trained::Linear { w: m.w, loss: m.training_loss },
                gram: None,
                x,
            })
        }
        OracleModel::Kernel { kernel, c } => {
            let opts = DualOptions { tol: 1e-9, ..DualOptions::new(c) };
            let m = train_kernel_svm_dual(&x, y, kernel, &opts)?;
            Ok(RepairCase {
                gram: Some(kernel.gram(&x)?),
                trained: Trained::Dual { alphas: m.alphas, objective: m.objective },
                x,
            })
        }
    }
}

/// Loss of `candidate`'s optimum on `case` minus `case`'s own optimum. For
/// kernel models the loss is the negated dual objective.
fn gap(candidate: &RepairCase, case: &RepairCase, y: &DVector<f64>, model: OracleModel) -> f64 {
    match (&candidate.trained, model) {
        (Trained::Linear { w, .. }, OracleModel::Linear(loss)) => loss.value(&case.x, y, w) - case.optimum(),
        (Trained::Dual { alphas, .. }, _) => -dual_objective(alphas, y, case.gram.as_ref().unwrap()) - case.optimum(),
        _ => unreachable!("candidate and case come from the same model"),
    }
}

fn train_all(ds: &IncompleteDataset, grid: &GridRepairs, model: OracleModel) -> Result<Vec<RepairCase>> {
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let x = ds.repaired_with(&grid.values(k))?;
            train_case(x, ds.labels(), model).map_err(|e| Error::Contract(format!("training on grid repair {k} failed: {e}")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleVerdict {
    pub exists: bool,
    pub repairs: usize,
    /// Grid repair whose optimum is optimal on every repair.
    pub candidate: Option<usize>,
    /// Least squares only: no single repair's optimum was common, but the
    /// minimum-norm solution of every repair's normal equations at once is.
    pub stacked_solution: bool,
    /// Largest gap of the first repair's optimum across the grid.
    pub first_model_max_gap: f64,
    /// On refutation: the first repair and the repair where its optimum is
    /// worst.
    #[serde(skip)]
    pub witness: Option<(Repair, Repair)>,
    pub tol: f64,
}

/// Whether one model is optimal, within `tol` in loss, on every grid repair.
/// Every repair's optimum is tried as the common model, in grid order.
pub fn oracle_certain(ds: &IncompleteDataset, model: OracleModel, grid: &GridSpec, tol: f64) -> Result<OracleVerdict> {
    let repairs = if ds.is_complete() {
        GridRepairs { points: 2, lo: vec![], hi: vec![], len: 1 }
    } else {
        grid_repairs(ds, grid)?
    };
    let cases = train_all(ds, &repairs, model)?;
    let y = ds.labels();
    let gaps_of = |cand: usize| -> Vec<f64> { cases.par_iter().map(|case| gap(&cases[cand], case, y, model)).collect() };

    let first = gaps_of(0);
    let (worst_idx, first_max) = first
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, &g)| if g > acc.1 { (k, g) } else { acc });
    let mut candidate = (first_max <= tol).then_some(0);
    if candidate.is_none() {
        candidate = (1..cases.len()).find(|&k| gaps_of(k).iter().all(|&g| g <= tol));
    }
    let mut stacked_solution = false;
    if candidate.is_none() && model == OracleModel::Linear(LinearLoss::Ols) {
        let w = common_normal_solution(&cases, y)?;
        let probe = RepairCase {
            x: DMatrix::zeros(0, 0),
            gram: None,
            trained: Trained::Linear { w, loss: f64::NAN },
        };
        stacked_solution = cases.par_iter().all(|case| gap(&probe, case, y, model) <= tol);
    }
    let witness = match candidate.or(stacked_solution.then_some(0)) {
        Some(_) => None,
        None => Some((
            Repair::from_aligned(ds, &repairs.values(0))?,
            Repair::from_aligned(ds, &repairs.values(worst_idx))?,
        )),
    };
    Ok(OracleVerdict {
        exists: candidate.is_some() || stacked_solution,
        stacked_solution,
        repairs: cases.len(),
        candidate,
        first_model_max_gap: first_max,
        witness,
        tol,
    })
}

/// Rows above which the stacked normal equations are reduced to their own
/// normal equations instead of being solved directly.
const STACK_ROWS: usize = 1 << 20;

/// Minimum-norm `w` solving `X_r^T X_r w = X_r^T y` for every case in the
/// least-squares sense. Optimal sets of different repairs can intersect
/// away from each repair's own minimum-norm optimum when `n < d`.
fn common_normal_solution(cases: &[RepairCase], y: &DVector<f64>) -> Result<DVector<f64>> {
    let d = cases[0].x.ncols();
    let blocks: Vec<(DMatrix<f64>, DVector<f64>)> = cases.iter().map(|c| (c.x.tr_mul(&c.x), c.x.tr_mul(y))).collect();
    let (a, b) = if cases.len() * d <= STACK_ROWS {
        let mut a = DMatrix::zeros(cases.len() * d, d);
        let mut b = DVector::zeros(cases.len() * d);
        for (k, (g, r)) in blocks.iter().enumerate() {
            a.view_mut((k * d, 0), (d, d)).copy_from(g);
            b.rows_mut(k * d, d).copy_from(r);
        }
        (a, b)
    } else {
        blocks.iter().fold((DMatrix::zeros(d, d), DVector::zeros(d)), |(a, b), (g, r)| (a + g.tr_mul(g), b + g.tr_mul(r)))
    };
    Ok(train_ols(&a, &b)?.0.w)
}

/// Largest optimality gap of `w` over the grid.
pub fn oracle_g(w: &DVector<f64>, ds: &IncompleteDataset, loss: LinearLoss, grid: &GridSpec) -> Result<f64> {
    if ds.is_complete() {
        let x = ds.repaired_with(&[])?;
        return Ok(loss.value(&x, ds.labels(), w) - loss.train(&x, ds.labels())?.training_loss);
    }
    let repairs = grid_repairs(ds, grid)?;
    let gaps: Vec<f64> = (0..repairs.len())
        .into_par_iter()
        .map(|k| {
            let x = ds.repaired_with(&repairs.values(k))?;
            Ok(loss.value(&x, ds.labels(), w) - loss.train(&x, ds.labels())?.training_loss)
        })
        .collect::<Result<_>>()?;
    Ok(gaps.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Extremes of `kernel(x_i^r, x_j)` over a grid of `points` values per
/// missing coordinate of `x_i`. `bounds` has one interval per missing
/// coordinate, in column order.
pub fn oracle_kernel_range(kernel: &KernelSpec, x_i: &[Option<f64>], x_j: &[f64], bounds: &[(f64, f64)], points: usize) -> Result<(f64, f64)> {
    let missing: Vec<usize> = (0..x_i.len()).filter(|&m| x_i[m].is_none()).collect();
    if bounds.len() != missing.len() {
        return Err(Error::Contract(format!("{} bounds for {} missing coordinates", bounds.len(), missing.len())));
    }
    if bounds.iter().any(|(l, h)| !l.is_finite() || !h.is_finite()) {
        return Err(Error::Config("grid scan needs finite bounds".into()));
    }
    if points < 2 && !missing.is_empty() {
        return Err(Error::Config("points per coordinate must be >= 2".into()));
    }
    let total = grid_size(points, missing.len())?;
    let (lo, hi): (Vec<f64>, Vec<f64>) = bounds.iter().copied().unzip();
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|k| {
            let fill = grid_point(k, points, &lo, &hi);
            let mut row: Vec<f64> = x_i.iter().map(|v| v.unwrap_or(0.0)).collect();
            for (&m, v) in missing.iter().zip(fill) {
                row[m] = v;
            }
            kernel.eval(&row, x_j)
        })
        .collect::<Result<_>>()?;
    Ok(values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v))))
}
