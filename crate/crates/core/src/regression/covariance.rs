//! Cluster-robust sandwich covariance of the least-squares estimator.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ols::FitResult;
use crate::error::{Error, Result};
use crate::panel::{ClusterAssignment, ClusterScheme, DesignMatrix};
use crate::warning::{Warning, FEW_CLUSTERS};

/// Small-sample scaling of the clustered meat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SmallSampleCorrection {
    CR0,
    /// `G/(G-1) * (n-1)/(n-p)`
    #[default]
    CR1,
}

#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    pub cov: DMatrix<f64>,
    pub scheme: ClusterScheme,
    pub correction: SmallSampleCorrection,
    /// Number of clusters G.
    pub n_clusters: usize,
    pub warnings: Vec<Warning>,
}

impl CovarianceEstimate {
    pub fn std_errors(&self) -> Vec<f64> {
        self.cov.diagonal().iter().map(|v| v.max(0.0).sqrt()).collect()
    }
}

/// The CR1 multiplier. With a single cluster the `G/(G-1)` part is skipped.
pub fn cr1_factor(n_clusters: usize, n: usize, p: usize) -> f64 {
    let g = n_clusters as f64;
    let cluster_part = if n_clusters > 1 { g / (g - 1.0) } else { 1.0 };
    cluster_part * (n as f64 - 1.0) / (n as f64 - p as f64)
}

/// `(XᵀX)⁻¹ [Σ_g s_g s_gᵀ] (XᵀX)⁻¹` with cluster scores `s_g = X_gᵀ r_g`.
pub fn clustered_cov(
    fit: &FitResult,
    design: &DesignMatrix,
    clusters: &ClusterAssignment,
    correction: SmallSampleCorrection,
) -> Result<CovarianceEstimate> {
    let x = design.x();
    let (n, k) = x.shape();
    if fit.n != n || clusters.n_rows() != n || fit.beta.len() != k {
        return Err(Error::ShapeMismatch(format!(
            "fit has n={} k={}, design {}x{}, clusters cover {} rows",
            fit.n,
            fit.beta.len(),
            n,
            k,
            clusters.n_rows()
        )));
    }
    let g = clusters.n_clusters();
    let mut warnings = Vec::new();
    if g == 1 {
        warnings.push(Warning::SingleCluster);
    }
    if g < FEW_CLUSTERS {
        warnings.push(Warning::FewClusters(g));
    }
    let cov = sandwich_from_parts(x, fit, clusters, correction);
    Ok(CovarianceEstimate {
        cov,
        scheme: clusters.scheme().clone(),
        correction,
        n_clusters: g,
        warnings,
    })
}

pub(crate) fn sandwich_from_parts(
    x: &DMatrix<f64>,
    fit: &FitResult,
    clusters: &ClusterAssignment,
    correction: SmallSampleCorrection,
) -> DMatrix<f64> {
    let k = x.ncols();
    let g = clusters.n_clusters();
    let mut scores = DMatrix::<f64>::zeros(k, g);
    for (i, &c) in clusters.membership().iter().enumerate() {
        let r = fit.residuals[i];
        for j in 0..k {
            scores[(j, c)] += x[(i, j)] * r;
        }
    }
    let meat = &scores * scores.transpose();
    let mut cov = &fit.bread * meat * &fit.bread;
    if correction == SmallSampleCorrection::CR1 {
        cov *= cr1_factor(g, x.nrows(), fit.p);
    }
    (&cov + cov.transpose()) * 0.5
}
