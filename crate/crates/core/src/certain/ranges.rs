//! Repair-free ranges of kernel values between an incomplete row and a
//! complete one.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trainers::{arccos_from_cosine, KernelSpec};

/// Where an extreme kernel value is attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    /// Values of the missing coordinates, in column order.
    At(Vec<f64>),
    /// Supremum or infimum approached as the missing value goes to +inf.
    LimitPlus,
    LimitMinus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelRange {
    pub k_min: f64,
    pub k_max: f64,
    pub argmin: Extremum,
    pub argmax: Extremum,
}

fn check_lengths(x_i: &[Option<f64>], x_j: &[f64]) -> Result<()> {
    if x_i.len() != x_j.len() {
        return Err(Error::Contract(format!("rows of length {} and {}", x_i.len(), x_j.len())));
    }
    Ok(())
}

/// RBF kernel range. `bounds` holds one interval per missing coordinate of
/// `x_i`, in column order.
pub fn kernel_range_rbf(x_i: &[Option<f64>], x_j: &[f64], bounds: &[(f64, f64)], gamma: f64) -> Result<KernelRange> {
    check_lengths(x_i, x_j)?;
    KernelSpec::rbf(gamma)?;
    let missing: Vec<usize> = (0..x_i.len()).filter(|&m| x_i[m].is_none()).collect();
    if bounds.len() != missing.len() {
        return Err(Error::Contract(format!("{} bounds for {} missing coordinates", bounds.len(), missing.len())));
    }
    let observed: f64 = x_i
        .iter()
        .zip(x_j)
        .filter_map(|(a, b)| a.map(|a| (a - b) * (a - b)))
        .sum();

    let mut near = Vec::with_capacity(missing.len());
    let mut far = Vec::with_capacity(missing.len());
    let (mut near_sq, mut far_sq) = (0.0, 0.0);
    for (&m, &(lo, hi)) in missing.iter().zip(bounds) {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::UnboundedCell { row: 0, col: m });
        }
        if lo > hi {
            return Err(Error::Config(format!("invalid interval [{lo}, {hi}]")));
        }
        let t = x_j[m];
        let clamped = t.clamp(lo, hi);
        near_sq += (clamped - t) * (clamped - t);
        near.push(clamped);
        let endpoint = if (hi - t).abs() >= (lo - t).abs() { hi } else { lo };
        far_sq += (endpoint - t) * (endpoint - t);
        far.push(endpoint);
    }
    Ok(KernelRange {
        k_min: (-gamma * (observed + far_sq)).exp(),
        k_max: (-gamma * (observed + near_sq)).exp(),
        argmin: Extremum::At(far),
        argmax: Extremum::At(near),
    })
}

/// Arc-cosine kernel range for a row with exactly one missing coordinate.
/// `bounds` defaults to the whole real line and may have infinite ends.
pub fn kernel_range_arccos(x_i: &[Option<f64>], x_j: &[f64], bounds: Option<(f64, f64)>) -> Result<KernelRange> {
    check_lengths(x_i, x_j)?;
    let missing: Vec<usize> = (0..x_i.len()).filter(|&m| x_i[m].is_none()).collect();
    let z = match missing.as_slice() {
        [z] => *z,
        [] => {
            let row: Vec<f64> = x_i.iter().map(|v| v.unwrap()).collect();
            let k = KernelSpec::Arccos.eval(&row, x_j)?;
            return Ok(KernelRange {
                k_min: k,
                k_max: k,
                argmin: Extremum::At(vec![]),
                argmax: Extremum::At(vec![]),
            });
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "arc-cosine range needs exactly one missing value per example, found {}",
                missing.len()
            )))
        }
    };
    let (lo, hi) = bounds.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::Config(format!("invalid interval [{lo}, {hi}]")));
    }

    let a = x_j[z];
    let c = x_j.iter().map(|v| v * v).sum::<f64>().sqrt();
    if c == 0.0 {
        return Err(Error::Domain("arc-cosine kernel is undefined for a zero vector".into()));
    }
    let (mut b, mut d) = (0.0, 0.0);
    for (p, v) in x_i.iter().enumerate() {
        if let Some(v) = v {
            b += v * x_j[p];
            d += v * v;
        }
    }
    if d == 0.0 {
        return Err(Error::Domain("observed part of the incomplete row is zero".into()));
    }
    let cosine = |t: f64| (a * t + b) / (c * (t * t + d).sqrt());

    let mut candidates: Vec<(f64, Extremum)> = Vec::new();
    if b != 0.0 {
        let t_star = a * d / b;
        if lo <= t_star && t_star <= hi {
            // Closed form keeps the parallel case at exactly 1.
            let f = b.signum() * (a * a * d + b * b).sqrt() / (c * d.sqrt());
            candidates.push((f, Extremum::At(vec![t_star])));
        }
    }
    for end in [lo, hi] {
        if end.is_finite() {
            candidates.push((cosine(end), Extremum::At(vec![end])));
        }
    }
    if hi == f64::INFINITY {
        candidates.push((a / c, Extremum::LimitPlus));
    }
    if lo == f64::NEG_INFINITY {
        candidates.push((-a / c, Extremum::LimitMinus));
    }

    let k = |f: f64| arccos_from_cosine(f);
    let (mut min_i, mut max_i) = (0, 0);
    for (idx, (f, _)) in candidates.iter().enumerate() {
        if k(*f) < k(candidates[min_i].0) {
            min_i = idx;
        }
        if k(*f) > k(candidates[max_i].0) {
            max_i = idx;
        }
    }
    Ok(KernelRange {
        k_min: k(candidates[min_i].0),
        k_max: k(candidates[max_i].0),
        argmin: candidates[min_i].1.clone(),
        argmax: candidates[max_i].1.clone(),
    })
}
