//! Reference repair strategies: mean imputation and dropping incomplete
//! examples.

use crate::dataset::{CompleteData, IncompleteDataset};
use crate::error::{Error, Result};

/// Summation by recursive halving; the result does not depend on the
/// thread count or on how the caller chunked the input.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Mean of the observed values of each feature (`None` when a feature has
/// no observed value).
pub fn feature_means(ds: &IncompleteDataset) -> Vec<Option<f64>> {
    (0..ds.d())
        .map(|j| {
            let vals: Vec<f64> = ds.observed_in_column(j).map(|(_, v)| v).collect();
            (!vals.is_empty()).then(|| pairwise_sum(&vals) / vals.len() as f64)
        })
        .collect()
}

/// Repair values (aligned with `ds.missing_cells()`) that put every missing
/// cell at its feature's observed mean.
pub fn mean_repair_values(ds: &IncompleteDataset) -> Result<Vec<f64>> {
    let means = feature_means(ds);
    ds.missing_cells()
        .iter()
        .map(|c| means[c.col].ok_or_else(|| Error::FullyMissingFeature(ds.feature_names()[c.col].clone())))
        .collect()
}

pub fn mean_impute(ds: &IncompleteDataset) -> Result<CompleteData> {
    let values = mean_repair_values(ds)?;
    Ok(CompleteData {
        x: ds.repaired_with(&values)?,
        y: ds.labels().clone(),
        feature_names: ds.feature_names().to_vec(),
    })
}

/// Keeps the complete examples only. The result may have zero rows.
pub fn drop_incomplete(ds: &IncompleteDataset) -> CompleteData {
    ds.complete_examples().0
}
