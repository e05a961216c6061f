use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::panel::{assign_clusters, build_design, ClusterScheme, ColumnLabel, DesignMatrix, ModelSpec, PanelDataset};
use crate::regression::{fit_matrix, ols_fit};
use crate::stats::{quantile_sorted, sorted};

/// Coefficient draws of a pairs-cluster bootstrap. Only the structural
/// coefficients (intercept and terms) are kept; fixed-effect dummies are
/// rebuilt for every replicate and are not comparable across draws.
#[derive(Debug, Clone)]
pub struct BootstrapSample {
    /// One row per successful replicate.
    pub draws: DMatrix<f64>,
    pub columns: Vec<ColumnLabel>,
    /// Estimate on the original data.
    pub point: DVector<f64>,
    pub scheme: ClusterScheme,
    pub replicates: usize,
    pub seed: u64,
    pub failed_refits: usize,
}

impl BootstrapSample {
    pub fn n_draws(&self) -> usize {
        self.draws.nrows()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(ColumnLabel::name).collect()
    }

    /// Standard deviation of each coefficient across draws.
    pub fn std_devs(&self) -> Vec<f64> {
        (0..self.draws.ncols())
            .map(|j| crate::stats::sample_variance(self.draws.column(j).as_slice()).sqrt())
            .collect()
    }

    pub fn contrast_values(&self, contrast: &[f64]) -> Result<Vec<f64>> {
        if contrast.len() != self.draws.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "contrast of length {} for {} coefficients",
                contrast.len(),
                self.draws.ncols()
            )));
        }
        let c = DVector::from_column_slice(contrast);
        Ok((&self.draws * c).iter().copied().collect())
    }
}

/// Resamples whole clusters with replacement and refits each replicate.
/// Replicate `b` draws from a generator seeded by `(seed, b)`.
pub fn block_bootstrap(
    dataset: &PanelDataset,
    spec: &ModelSpec,
    scheme: &ClusterScheme,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapSample> {
    let design = build_design(dataset, spec)?;
    bootstrap_design(dataset, &design, scheme, replicates, seed)
}

pub(crate) fn bootstrap_design(
    dataset: &PanelDataset,
    design: &DesignMatrix,
    scheme: &ClusterScheme,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapSample> {
    if replicates == 0 {
        return Err(Error::invalid("bootstrap needs at least one replicate"));
    }
    let clusters = assign_clusters(design, dataset, scheme)?;
    let g = clusters.n_clusters();
    if g < 2 {
        return Err(Error::invalid(format!("bootstrap needs at least two clusters, got {g}")));
    }
    let point = ols_fit(design)?;
    let members = clusters.members();
    let k = design.n_structural();

    let results: Vec<Option<Vec<f64>>> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = crate::rng::rng_for(seed, b as u64);
            let mut idx = Vec::with_capacity(design.n_rows());
            for _ in 0..g {
                idx.extend_from_slice(&members[rng.random_range(0..g)]);
            }
            let sub = design.subset(&idx);
            fit_matrix(sub.x(), sub.y(), sub.columns(), sub.has_intercept_or_fe(), false)
                .ok()
                .map(|fit| fit.beta.as_slice()[..k].to_vec())
        })
        .collect();

    let failed = results.iter().filter(|r| r.is_none()).count();
    if 2 * failed > replicates {
        return Err(Error::BootstrapFailed {
            failed,
            attempted: replicates,
        });
    }
    let ok: Vec<Vec<f64>> = results.into_iter().flatten().collect();
    let draws = DMatrix::from_fn(ok.len(), k, |i, j| ok[i][j]);
    Ok(BootstrapSample {
        draws,
        columns: design.columns()[..k].to_vec(),
        point: DVector::from_column_slice(&point.beta.as_slice()[..k]),
        scheme: scheme.clone(),
        replicates,
        seed,
        failed_refits: failed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PercentileInterval {
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
}

/// Type-7 quantiles `(1-level)/2`, `0.5`, `(1+level)/2` of `values`.
///
/// Requires at least 20 values and at least one value expected in each tail.
pub fn percentile_of(values: &[f64], level: f64) -> Result<PercentileInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("level {level} outside (0, 1)")));
    }
    let n = values.len();
    if n < 20 || (n as f64) * (1.0 - level) / 2.0 < 1.0 {
        return Err(Error::invalid(format!("{n} draws are too few for a {level} interval")));
    }
    let s = sorted(values);
    Ok(PercentileInterval {
        lower: quantile_sorted(&s, (1.0 - level) / 2.0),
        median: quantile_sorted(&s, 0.5),
        upper: quantile_sorted(&s, (1.0 + level) / 2.0),
    })
}

/// Percentile interval of `cᵀβ*` across draws.
pub fn percentile_interval(sample: &BootstrapSample, contrast: &[f64], level: f64) -> Result<PercentileInterval> {
    percentile_of(&sample.contrast_values(contrast)?, level)
}
