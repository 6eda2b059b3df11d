use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::LinearModel;
use crate::error::{Error, Result};

/// Per-example residue `Xw - y` of a fitted least-squares model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidueReport {
    pub e: DVector<f64>,
}

/// Least squares with the minimum-norm solution on rank-deficient inputs.
///
/// A matrix with zero columns is allowed and yields an empty model whose
/// residue is `-y`.
pub fn train_ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(LinearModel, ResidueReport)> {
    let (n, d) = x.shape();
    if n == 0 {
        return Err(Error::Empty("least squares needs at least one example".into()));
    }
    if y.len() != n {
        return Err(Error::Contract(format!("{} labels for {n} rows", y.len())));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("least-squares input"));
    }
    let w = if d == 0 { DVector::zeros(0) } else { min_norm_solve(x, y)? };
    let e = x * &w - y;
    let model = LinearModel {
        training_loss: e.norm_squared(),
        w,
    };
    Ok((model, ResidueReport { e }))
}

/// Minimum-norm least-squares solution by a complete orthogonal
/// decomposition: `X P = Q R` with column pivoting, then an LQ step on the
/// leading `r` rows of `R` when `X` is rank deficient.
fn min_norm_solve(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let (n, d) = x.shape();
    let qr = x.clone().col_piv_qr();
    let r_full = qr.r();
    let top = r_full[(0, 0)].abs();
    let cutoff = top * n.max(d) as f64 * f64::EPSILON * 10.0;
    let rank = (0..r_full.nrows().min(d)).take_while(|&k| r_full[(k, k)].abs() > cutoff).count();
    let mut z = DVector::zeros(d);
    if rank > 0 {
        let c = qr.q().tr_mul(y).rows(0, rank).clone_owned();
        let t = r_full.view((0, 0), (rank, d)).clone_owned();
        let sol = if rank == d {
            t.solve_upper_triangular(&c)
        } else {
            // t = r2^T q2^T, so z = q2 r2^-T c
            let lq = t.transpose().qr();
            lq.r().transpose().solve_lower_triangular(&c).map(|u| lq.q() * u)
        };
        z = sol.ok_or_else(|| Error::Contract("triangular solve failed".into()))?;
    }
    qr.p().inv_permute_rows(&mut z);
    Ok(z)
}
