use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{IncompleteDataset, Repair, RepairBounds};
use crate::error::{Error, Result};

/// One corner of the repair box: `true` puts the cell at its upper bound.
/// Bits are aligned with `IncompleteDataset::missing_cells`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeRepair {
    pub bits: Vec<bool>,
}

impl EdgeRepair {
    /// The `k`-th corner in lexicographic order; the first missing cell is
    /// the most significant bit.
    pub fn from_index(k: usize, m: usize) -> Self {
        Self {
            bits: (0..m).map(|c| (k >> (m - 1 - c)) & 1 == 1).collect(),
        }
    }

    pub fn values(&self, lo: &[f64], hi: &[f64]) -> Vec<f64> {
        self.bits.iter().enumerate().map(|(c, &b)| if b { hi[c] } else { lo[c] }).collect()
    }

    pub fn to_repair(&self, ds: &IncompleteDataset, bounds: &RepairBounds) -> Result<Repair> {
        if self.bits.len() != ds.num_missing() {
            return Err(Error::Contract("edge repair does not cover the missing cells".into()));
        }
        bounds.require_finite(ds)?;
        Repair::from_aligned(ds, &self.values(&bounds.lo, &bounds.hi))
    }
}

/// `2^m`, or an error when `m` exceeds `cap`.
pub fn num_edge_repairs(m: usize, cap: usize) -> Result<usize> {
    if m > cap || m >= usize::BITS as usize {
        return Err(Error::CapExceeded {
            what: "edge repairs (use sampling instead)",
            count: 1u128.checked_shl(m as u32).unwrap_or(u128::MAX),
            cap: 1u128 << cap.min(127),
        });
    }
    Ok(1 << m)
}

/// Every corner, lexicographically (lo before hi).
#[derive(Debug, Clone)]
pub struct EdgeEnumeration {
    m: usize,
    next: usize,
    end: usize,
}

impl Iterator for EdgeEnumeration {
    type Item = EdgeRepair;

    fn next(&mut self) -> Option<EdgeRepair> {
        (self.next < self.end).then(|| {
            self.next += 1;
            EdgeRepair::from_index(self.next - 1, self.m)
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.end - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for EdgeEnumeration {}

pub fn enumerate_edge_repairs(m: usize, cap: usize) -> Result<EdgeEnumeration> {
    Ok(EdgeEnumeration {
        m,
        next: 0,
        end: num_edge_repairs(m, cap)?,
    })
}

/// `s` corners drawn independently and uniformly.
pub fn sample_edge_repairs(m: usize, s: usize, seed: u64) -> Vec<EdgeRepair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..s)
        .map(|_| EdgeRepair {
            bits: (0..m).map(|_| rng.gen::<bool>()).collect(),
        })
        .collect()
}
