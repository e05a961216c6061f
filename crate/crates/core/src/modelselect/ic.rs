use std::fmt;

use serde::{Deserialize, Serialize};

use super::likelihood::{fit_rho, loglik_iid};
use crate::error::Result;
use crate::panel::ClusterAssignment;
use crate::regression::FitResult;
use crate::warning::Warning;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    AIC,
    BIC,
}

impl Criterion {
    /// Penalty per parameter.
    pub fn gamma(self, n: usize) -> f64 {
        match self {
            Criterion::AIC => 2.0,
            Criterion::BIC => (n as f64).ln(),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Criterion::AIC => "AIC",
            Criterion::BIC => "BIC",
        })
    }
}

/// What counts towards the parameter number `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamCount {
    /// Coefficients plus `σ²`, plus `ρ` when adjusted.
    #[default]
    WithVariance,
    /// Regression coefficients only.
    CoefficientsOnly,
}

impl ParamCount {
    pub fn k(self, p: usize, adjusted: bool) -> usize {
        match self {
            ParamCount::WithVariance => p + 1 + usize::from(adjusted),
            ParamCount::CoefficientsOnly => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ICResult {
    pub criterion: Criterion,
    pub adjusted: bool,
    pub value: f64,
    pub k: usize,
    pub log_lik: f64,
    pub rho_hat: Option<f64>,
    pub sigma2: f64,
    pub n: usize,
    #[serde(skip)]
    pub warnings: Vec<Warning>,
}

/// `γ(n)·k − 2·log L`. The adjusted form estimates a common within-block
/// residual covariance `ρ` over the blocks of `clusters` with `σ²` fixed at
/// the residual mean square.
pub fn information_criterion(
    fit: &FitResult,
    clusters: &ClusterAssignment,
    criterion: Criterion,
    adjusted: bool,
    count: ParamCount,
) -> Result<ICResult> {
    let residuals = fit.residuals.as_slice();
    let n = residuals.len();
    let sigma2 = fit.ssr() / n as f64;
    let (log_lik, rho_hat, warnings) = if adjusted {
        let rf = fit_rho(residuals, clusters, sigma2)?;
        (rf.loglik, Some(rf.rho), rf.warnings)
    } else {
        (loglik_iid(residuals, sigma2)?, None, Vec::new())
    };
    let k = count.k(fit.p, adjusted);
    Ok(ICResult {
        criterion,
        adjusted,
        value: criterion.gamma(n) * k as f64 - 2.0 * log_lik,
        k,
        log_lik,
        rho_hat,
        sigma2,
        n,
        warnings,
    })
}
