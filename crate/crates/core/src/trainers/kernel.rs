use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel function with its parameters.
///
/// The arc-cosine kernel is `pi - acos(cos(a, b))`, which is `pi` for
/// parallel vectors and `0` for antiparallel ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Polynomial { degree: u32, coef0: f64 },
    Rbf { gamma: f64 },
    Arccos,
}

impl KernelSpec {
    pub fn polynomial(degree: u32, coef0: f64) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Config("polynomial degree must be >= 1".into()));
        }
        if !(coef0 >= 0.0 && coef0.is_finite()) {
            return Err(Error::Config("polynomial coef0 must be finite and >= 0".into()));
        }
        Ok(Self::Polynomial { degree, coef0 })
    }

    pub fn rbf(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Config("rbf gamma must be finite and > 0".into()));
        }
        Ok(Self::Rbf { gamma })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Polynomial { .. } => "polynomial",
            Self::Rbf { .. } => "rbf",
            Self::Arccos => "arccos",
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::Contract(format!("kernel arguments of length {} and {}", a.len(), b.len())));
        }
        Ok(match *self {
            Self::Linear => dot(a, b),
            Self::Polynomial { degree, coef0 } => (dot(a, b) + coef0).powi(degree as i32),
            Self::Rbf { gamma } => {
                let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * sq).exp()
            }
            Self::Arccos => {
                let (na2, nb2) = (dot(a, a), dot(b, b));
                if na2 == 0.0 || nb2 == 0.0 {
                    return Err(Error::Domain("arc-cosine kernel is undefined for a zero vector".into()));
                }
                arccos_from_cosine(dot(a, b) / (na2 * nb2).sqrt())
            }
        })
    }

    /// Gram matrix over the rows of `x`.
    pub fn gram(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let rows = row_major(x);
        let n = rows.len();
        let entries: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                let (i, j) = if i <= j { (i, j) } else { (j, i) };
                self.eval(&rows[i], &rows[j])
            })
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_row_slice(n, n, &entries))
    }
}

/// `pi - acos(c)` with `c` clamped into `[-1, 1]`.
pub fn arccos_from_cosine(c: f64) -> f64 {
    PI - c.clamp(-1.0, 1.0).acos()
}

pub fn kernel_eval(kernel: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    kernel.eval(a, b)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn row_major(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    x.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_values() {
        let p = KernelSpec::polynomial(2, 1.0).unwrap();
        assert_eq!(p.eval(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 4.0);
        let r = KernelSpec::rbf(1.0).unwrap();
        assert_eq!(r.eval(&[0.3, -2.0], &[0.3, -2.0]).unwrap(), 1.0);
        assert_eq!(KernelSpec::Arccos.eval(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), PI);
        assert!(KernelSpec::Arccos.eval(&[1.0, 0.0], &[-3.0, 0.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn arccos_rejects_zero_vector() {
        assert!(matches!(KernelSpec::Arccos.eval(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_parameters() {
        assert!(KernelSpec::polynomial(0, 1.0).is_err());
        assert!(KernelSpec::polynomial(2, -1.0).is_err());
        assert!(KernelSpec::rbf(0.0).is_err());
    }

    fn min_eigenvalue(k: &DMatrix<f64>) -> f64 {
        k.clone().symmetric_eigenvalues().min()
    }

    proptest! {
        #[test]
        fn symmetric_for_all_kinds(a in prop::collection::vec(-3.0..3.0f64, 3), b in prop::collection::vec(-3.0..3.0f64, 3)) {
            for k in [KernelSpec::Linear, KernelSpec::Polynomial { degree: 3, coef0: 0.5 }, KernelSpec::Rbf { gamma: 0.7 }, KernelSpec::Arccos] {
                match (k.eval(&a, &b), k.eval(&b, &a)) {
                    (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
                    (Err(_), Err(_)) => {}
                    _ => prop_assert!(false, "asymmetric failure"),
                }
            }
        }

        #[test]
        fn gram_is_psd(rows in prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 3), 2..7)) {
            let n = rows.len();
            let x = DMatrix::from_fn(n, 3, |i, j| rows[i][j]);
            for k in [KernelSpec::Polynomial { degree: 2, coef0: 1.0 }, KernelSpec::Rbf { gamma: 0.5 }] {
                let g = k.gram(&x).unwrap();
                prop_assert!(min_eigenvalue(&g) >= -1e-8);
            }
        }
    }
}
