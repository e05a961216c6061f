//! JSON and CSV emission of coefficient tables and response curves.

use std::io::Write;

use serde::Serialize;

use super::covariance::{CovarianceEstimate, SmallSampleCorrection};
use super::inference::{confidence_intervals, CoefficientRow, CurvePoint};
use super::ols::FitResult;
use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientTable {
    pub scheme: String,
    pub correction: SmallSampleCorrection,
    pub n_clusters: usize,
    pub level: f64,
    pub n: usize,
    pub p: usize,
    pub r_squared: f64,
    pub coefficients: Vec<CoefficientRow>,
    pub warnings: Vec<String>,
}

impl CoefficientTable {
    pub fn new(fit: &FitResult, cov: &CovarianceEstimate, level: f64) -> Result<Self> {
        Ok(CoefficientTable {
            scheme: cov.scheme.to_string(),
            correction: cov.correction,
            n_clusters: cov.n_clusters,
            level,
            n: fit.n,
            p: fit.p,
            r_squared: fit.r_squared,
            coefficients: confidence_intervals(fit, cov, level)?,
            warnings: fit.warnings.iter().chain(&cov.warnings).map(|w| w.to_string()).collect(),
        })
    }
}

pub fn write_curves_csv<W: Write>(writer: W, curves: &[(String, Vec<CurvePoint>)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["scheme", "term", "lag", "effect", "lower", "upper"])?;
    for (scheme, points) in curves {
        for p in points {
            wtr.write_record([
                scheme.clone(),
                p.term.clone(),
                p.lag.to_string(),
                p.effect.to_string(),
                p.lower.to_string(),
                p.upper.to_string(),
            ])?;
        }
    }
    wtr.flush().map_err(|e| crate::Error::io("<curves csv>", e))?;
    Ok(())
}
