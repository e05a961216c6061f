use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::panel::{ColumnLabel, DesignMatrix};
use crate::warning::Warning;

/// Relative threshold on the QR diagonal below which a column counts as a
/// linear combination of the columns before it.
const COLLINEAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct FitResult {
    /// One entry per design column; collinear columns dropped under
    /// [`ols_fit_dropping_collinear`] carry 0.
    pub beta: DVector<f64>,
    pub residuals: DVector<f64>,
    pub fitted: DVector<f64>,
    pub r_squared: f64,
    pub n: usize,
    /// Number of estimated coefficients (design rank).
    pub p: usize,
    pub columns: Vec<ColumnLabel>,
    pub aliased: Vec<bool>,
    /// `(XᵀX)⁻¹`, zero in rows/columns of aliased coefficients.
    pub bread: DMatrix<f64>,
    pub warnings: Vec<Warning>,
}

impl FitResult {
    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(ColumnLabel::name).collect()
    }

    pub fn has_collinear(&self) -> bool {
        self.aliased.iter().any(|&a| a)
    }

    pub fn ssr(&self) -> f64 {
        self.residuals.norm_squared()
    }
}

/// Least squares via Householder QR. Fails on any collinear column.
pub fn ols_fit(design: &DesignMatrix) -> Result<FitResult> {
    fit_matrix(design.x(), design.y(), design.columns(), design.has_intercept_or_fe(), false)
}

/// Least squares that drops collinear columns (reported in `aliased` and as a warning).
pub fn ols_fit_dropping_collinear(design: &DesignMatrix) -> Result<FitResult> {
    fit_matrix(design.x(), design.y(), design.columns(), design.has_intercept_or_fe(), true)
}

struct QrSolve {
    beta: DVector<f64>,
    bread: DMatrix<f64>,
}

/// Returns the solve, or the indices of collinear columns.
fn qr_solve(x: &DMatrix<f64>, y: &DVector<f64>) -> std::result::Result<QrSolve, Vec<usize>> {
    let k = x.ncols();
    let qr = x.clone().qr();
    let r = qr.r();
    let collinear: Vec<usize> = (0..k)
        .filter(|&j| {
            let norm = x.column(j).norm();
            norm == 0.0 || r[(j, j)].abs() <= COLLINEAR_TOL * norm
        })
        .collect();
    if !collinear.is_empty() {
        return Err(collinear);
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let qty_top = qty.rows(0, k).into_owned();
    let beta = r.solve_upper_triangular(&qty_top).ok_or_else(Vec::new)?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(Vec::new)?;
    let bread = &r_inv * r_inv.transpose();
    Ok(QrSolve { beta, bread })
}

pub(crate) fn fit_matrix(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    columns: &[ColumnLabel],
    centered_r2: bool,
    drop_collinear: bool,
) -> Result<FitResult> {
    let (n, k) = x.shape();
    let mut warnings = Vec::new();
    let mut aliased = vec![false; k];
    let mut keep: Vec<usize> = (0..k).collect();

    let solve = loop {
        if n <= keep.len() {
            return Err(Error::TooFewObservations { n, p: keep.len() });
        }
        let xs = x.select_columns(keep.iter());
        match qr_solve(&xs, y) {
            Ok(s) => break s,
            Err(bad) if drop_collinear && !bad.is_empty() && bad.len() < keep.len() => {
                for &b in &bad {
                    aliased[keep[b]] = true;
                }
                keep = (0..k).filter(|&j| !aliased[j]).collect();
            }
            Err(bad) => {
                let names = bad.iter().map(|&b| columns[keep[b]].name()).collect();
                return Err(Error::RankDeficient { columns: names });
            }
        }
    };
    if aliased.iter().any(|&a| a) {
        let names = (0..k).filter(|&j| aliased[j]).map(|j| columns[j].name()).collect();
        warnings.push(Warning::Collinear(names));
    }

    let mut beta = DVector::zeros(k);
    let mut bread = DMatrix::zeros(k, k);
    for (a, &i) in keep.iter().enumerate() {
        beta[i] = solve.beta[a];
        for (b, &j) in keep.iter().enumerate() {
            bread[(i, j)] = solve.bread[(a, b)];
        }
    }

    let fitted = x * &beta;
    let residuals = y - &fitted;
    let ssr = residuals.norm_squared();
    let sum_y2 = y.norm_squared();
    let sst = if centered_r2 {
        let m = y.mean();
        y.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
    } else {
        sum_y2
    };
    let r_squared = if sst <= 1e-20 * sum_y2.max(f64::MIN_POSITIVE) {
        warnings.push(Warning::ZeroOutcomeVariance);
        0.0
    } else {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    };

    Ok(FitResult {
        beta,
        residuals,
        fitted,
        r_squared,
        n,
        p: keep.len(),
        columns: columns.to_vec(),
        aliased,
        bread,
        warnings,
    })
}
