use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::folds::make_folds;
use crate::error::{Error, Result};
use crate::panel::{assign_clusters, build_design, ClusterScheme, DesignMatrix, ModelSpec, PanelDataset};
use crate::regression::fit_matrix;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub sse: f64,
    /// Held-out rows with a fixed-effect level not seen in training.
    pub unseen_levels: usize,
    pub collinear: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    /// Total squared error over total held-out rows.
    pub loss: f64,
    pub unseen_levels: usize,
    pub folds: Vec<FoldResult>,
}

impl CvResult {
    pub fn collinear(&self) -> bool {
        self.folds.iter().any(|f| f.collinear)
    }
}

/// Cluster-respecting K-fold cross-validated mean squared prediction error.
pub fn cv_loss(dataset: &PanelDataset, spec: &ModelSpec, scheme: &ClusterScheme, k: usize, seed: u64) -> Result<CvResult> {
    let design = build_design(dataset, spec)?;
    cv_on_design(dataset, &design, scheme, k, seed, false)
}

pub(crate) fn cv_on_design(
    dataset: &PanelDataset,
    design: &DesignMatrix,
    scheme: &ClusterScheme,
    k: usize,
    seed: u64,
    drop_collinear: bool,
) -> Result<CvResult> {
    let clusters = assign_clusters(design, dataset, scheme)?;
    let plan = make_folds(&clusters, k, seed)?;
    let row_folds = plan.row_folds(&clusters);
    cv_with_row_folds(design, &row_folds, k, drop_collinear)
}

pub(crate) fn cv_with_row_folds(design: &DesignMatrix, row_folds: &[usize], k: usize, drop_collinear: bool) -> Result<CvResult> {
    let folds: Vec<FoldResult> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..design.n_rows()).partition(|&i| row_folds[i] == fold);
            if test.is_empty() {
                return Err(Error::EmptyFold(fold));
            }
            let train_design = design.subset(&train);
            let fit = fit_matrix(
                train_design.x(),
                train_design.y(),
                train_design.columns(),
                train_design.has_intercept_or_fe(),
                drop_collinear,
            )
            .map_err(|e| Error::Fold {
                fold,
                source: Box::new(e),
            })?;
            let (x_test, unseen) = design.encode_like(&train_design, &test);
            let pred: DVector<f64> = x_test * &fit.beta;
            let sse = test
                .iter()
                .zip(pred.iter())
                .map(|(&i, p)| (design.y()[i] - p).powi(2))
                .sum();
            Ok(FoldResult {
                fold,
                n_train: train.len(),
                n_test: test.len(),
                sse,
                unseen_levels: unseen,
                collinear: fit.has_collinear(),
            })
        })
        .collect::<Result<_>>()?;
    let sse: f64 = folds.iter().map(|f| f.sse).sum();
    let n: usize = folds.iter().map(|f| f.n_test).sum();
    Ok(CvResult {
        loss: sse / n as f64,
        unseen_levels: folds.iter().map(|f| f.unseen_levels).sum(),
        folds,
    })
}
