//! Least squares, clustered covariance, confidence intervals and term response curves.

mod covariance;
mod inference;
mod ols;
mod report;

pub use covariance::{clustered_cov, cr1_factor, CovarianceEstimate, SmallSampleCorrection};
pub use inference::{
    cluster_critical_value, confidence_intervals, contrast_variance, response_contrasts, term_response_curve,
    CoefficientRow, CurvePoint,
};
pub use ols::{ols_fit, ols_fit_dropping_collinear, FitResult};
pub(crate) use ols::fit_matrix;
pub use report::{write_curves_csv, CoefficientTable};
