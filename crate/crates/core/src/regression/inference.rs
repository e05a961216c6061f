use serde::Serialize;

use super::covariance::CovarianceEstimate;
use super::ols::FitResult;
use crate::error::{Error, Result};
use crate::panel::{ColumnKind, TermSpec};
use crate::stats::student_t_critical;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub label: String,
    pub estimate: f64,
    pub se: f64,
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Two-sided Student-t critical value with `G - 1` degrees of freedom.
pub fn cluster_critical_value(cov: &CovarianceEstimate, level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("confidence level {level} outside (0, 1)")));
    }
    if cov.n_clusters < 2 {
        return Err(Error::invalid("confidence intervals need at least two clusters"));
    }
    Ok(student_t_critical(level, (cov.n_clusters - 1) as f64))
}

/// `β̂_j ± q·se_j` for every coefficient. Collinear (dropped) coefficients get NaN bounds.
pub fn confidence_intervals(fit: &FitResult, cov: &CovarianceEstimate, level: f64) -> Result<Vec<CoefficientRow>> {
    let q = cluster_critical_value(cov, level)?;
    fit.columns
        .iter()
        .enumerate()
        .map(|(j, label)| {
            let estimate = fit.beta[j];
            if fit.aliased[j] {
                return Ok(CoefficientRow {
                    label: label.name(),
                    estimate,
                    se: f64::NAN,
                    t: f64::NAN,
                    lower: f64::NAN,
                    upper: f64::NAN,
                });
            }
            let var = cov.cov[(j, j)];
            if !(var > 0.0) {
                return Err(Error::NonPositiveVariance(label.name()));
            }
            let se = var.sqrt();
            Ok(CoefficientRow {
                label: label.name(),
                estimate,
                se,
                t: estimate / se,
                lower: estimate - q * se,
                upper: estimate + q * se,
            })
        })
        .collect()
}

/// `cᵀ Σ c`
pub fn contrast_variance(cov: &CovarianceEstimate, contrast: &[f64]) -> f64 {
    let c = nalgebra::DVector::from_column_slice(contrast);
    (c.transpose() * &cov.cov * &c)[(0, 0)]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub term: String,
    pub lag: usize,
    pub effect: f64,
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Contrast vectors for the cumulative effect of `term` at lags `0..=horizon`
/// with the moderator held at `moderator_value`.
pub fn response_contrasts(fit: &FitResult, term: &TermSpec, moderator_value: f64, horizon: usize) -> Result<Vec<Vec<f64>>> {
    if horizon > term.max_lag {
        return Err(Error::invalid(format!(
            "horizon {horizon} exceeds max_lag {} of `{}`",
            term.max_lag,
            term.key()
        )));
    }
    let name = term.name();
    let find = |kind: ColumnKind, lag: usize| {
        fit.columns.iter().position(|c| {
            c.kind == kind && c.term == name && c.moderator == term.moderator && c.lag == Some(lag)
        })
    };
    let mut contrasts = Vec::with_capacity(horizon + 1);
    let mut c = vec![0.0; fit.beta.len()];
    for lag in 0..=horizon {
        let base = find(ColumnKind::Base, lag).ok_or_else(|| Error::TermNotInModel(term.key()))?;
        c[base] = 1.0;
        if term.moderator.is_some() {
            let inter = find(ColumnKind::Interaction, lag).ok_or_else(|| Error::TermNotInModel(term.key()))?;
            c[inter] = moderator_value;
        }
        contrasts.push(c.clone());
    }
    Ok(contrasts)
}

/// Cumulative effect `Σ_{j≤ℓ} (β_base,j + m·β_inter,j)` per lag with clustered CI band.
pub fn term_response_curve(
    fit: &FitResult,
    cov: &CovarianceEstimate,
    term: &TermSpec,
    moderator_value: f64,
    horizon: usize,
    level: f64,
) -> Result<Vec<CurvePoint>> {
    let q = cluster_critical_value(cov, level)?;
    response_contrasts(fit, term, moderator_value, horizon)?
        .into_iter()
        .enumerate()
        .map(|(lag, c)| {
            let effect: f64 = c.iter().zip(fit.beta.iter()).map(|(a, b)| a * b).sum();
            let var = contrast_variance(cov, &c);
            if !(var > 0.0) {
                return Err(Error::NonPositiveVariance(format!("{} cumulative lag {lag}", term.key())));
            }
            let se = var.sqrt();
            Ok(CurvePoint {
                term: term.key(),
                lag,
                effect,
                se,
                lower: effect - q * se,
                upper: effect + q * se,
            })
        })
        .collect()
}
