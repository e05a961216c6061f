use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::panel::ClusterAssignment;
use crate::warning::Warning;

/// `-(n/2)(ln 2π + ln σ² + 1)` where `σ²` must equal the mean squared residual.
pub fn loglik_iid(residuals: &[f64], sigma2: f64) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::invalid("log-likelihood of zero residuals"));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::NonPositiveVariance("sigma2".into()));
    }
    let n = residuals.len() as f64;
    let computed = residuals.iter().map(|r| r * r).sum::<f64>() / n;
    if (computed - sigma2).abs() > 1e-9 * computed.max(sigma2) {
        return Err(Error::InconsistentVariance { given: sigma2, computed });
    }
    Ok(-0.5 * n * ((2.0 * PI).ln() + sigma2.ln() + 1.0))
}

/// Covariance parameters of equicorrelated blocks: variance `sigma2` on the
/// diagonal and covariance `rho` between members of the same block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquicorrParams {
    pub sigma2: f64,
    pub rho: f64,
}

impl EquicorrParams {
    pub fn new(sigma2: f64, rho: f64) -> Self {
        EquicorrParams { sigma2, rho }
    }

    /// `a = σ² − ρ`
    pub fn a(&self) -> f64 {
        self.sigma2 - self.rho
    }

    /// Checks that a block of `size` members has a positive definite covariance.
    pub fn check_block(&self, size: usize) -> Result<()> {
        let a = self.a();
        if !(self.sigma2 > 0.0) || !(a > 0.0) || !(1.0 + size as f64 * self.rho / a > 0.0) {
            return Err(Error::NotPositiveDefinite {
                block_size: size,
                sigma2: self.sigma2,
                rho: self.rho,
            });
        }
        Ok(())
    }

    /// Admissible open interval for `rho` given the largest block size.
    pub fn rho_bounds(sigma2: f64, n_max: usize) -> (f64, f64) {
        let lower = if n_max > 1 {
            -sigma2 / (n_max as f64 - 1.0)
        } else {
            f64::NEG_INFINITY
        };
        (lower, sigma2)
    }
}

/// Per-block sufficient statistics: size, sum and sum of squares.
#[derive(Debug, Clone)]
pub(crate) struct BlockStats {
    blocks: Vec<(usize, f64, f64)>,
    n: usize,
}

impl BlockStats {
    pub(crate) fn new(residuals: &[f64], clusters: &ClusterAssignment) -> Result<Self> {
        if residuals.len() != clusters.n_rows() {
            return Err(Error::ShapeMismatch(format!(
                "{} residuals for {} clustered rows",
                residuals.len(),
                clusters.n_rows()
            )));
        }
        let mut blocks: Vec<(usize, f64, f64)> = clusters.sizes().iter().map(|&s| (s, 0.0, 0.0)).collect();
        for (&g, &r) in clusters.membership().iter().zip(residuals) {
            blocks[g].1 += r;
            blocks[g].2 += r * r;
        }
        Ok(BlockStats {
            blocks,
            n: residuals.len(),
        })
    }

    fn max_size(&self) -> usize {
        self.blocks.iter().map(|b| b.0).max().unwrap_or(0)
    }

    pub(crate) fn loglik(&self, params: EquicorrParams) -> Result<f64> {
        let a = params.a();
        let rho = params.rho;
        let mut logdet = 0.0;
        let mut quad = 0.0;
        let mut checked = std::collections::BTreeSet::new();
        for &(size, sum, sumsq) in &self.blocks {
            if checked.insert(size) {
                params.check_block(size)?;
            }
            let m = size as f64;
            let denom = 1.0 + m * rho / a;
            logdet += denom.ln() + m * a.ln();
            quad += sumsq / a - rho / (a * a) / denom * sum * sum;
        }
        Ok(-0.5 * self.n as f64 * (2.0 * PI).ln() - 0.5 * logdet - 0.5 * quad)
    }
}

/// Gaussian log-likelihood of `residuals` under block-diagonal equicorrelated
/// covariance, evaluated per block in closed form.
pub fn loglik_equicorr(residuals: &[f64], clusters: &ClusterAssignment, params: EquicorrParams) -> Result<f64> {
    BlockStats::new(residuals, clusters)?.loglik(params)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoFit {
    pub rho: f64,
    pub loglik: f64,
    pub loglik_at_zero: f64,
    pub bounds: (f64, f64),
    #[serde(skip)]
    pub warnings: Vec<Warning>,
}

const BOUNDARY_EPS: f64 = 1e-9;
const GRID_POINTS: usize = 64;

/// Maximizes the equicorrelated log-likelihood over `rho` with `sigma2` held fixed.
pub fn fit_rho(residuals: &[f64], clusters: &ClusterAssignment, sigma2: f64) -> Result<RhoFit> {
    if !(sigma2 > 0.0) {
        return Err(Error::NonPositiveVariance("sigma2".into()));
    }
    let stats = BlockStats::new(residuals, clusters)?;
    let n_max = stats.max_size();
    if n_max < 2 {
        return Err(Error::RhoUnidentified);
    }
    let (lo_bound, hi_bound) = EquicorrParams::rho_bounds(sigma2, n_max);
    let lo = lo_bound * (1.0 - BOUNDARY_EPS);
    let hi = hi_bound * (1.0 - BOUNDARY_EPS);
    let f = |rho: f64| stats.loglik(EquicorrParams::new(sigma2, rho));

    // coarse scan to bracket the global maximum, then golden-section refinement
    let grid: Vec<f64> = (0..=GRID_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / GRID_POINTS as f64)
        .collect();
    let values = grid.iter().map(|&r| f(r)).collect::<Result<Vec<_>>>()?;
    let best = (0..grid.len())
        .max_by(|&i, &j| values[i].total_cmp(&values[j]))
        .unwrap();
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(GRID_POINTS)];

    let tol = 1e-8 * sigma2;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let mut rho = 0.5 * (a + b);
    let mut loglik = f(rho)?;
    for (r, v) in [(grid[best], values[best]), (lo, values[0]), (hi, values[GRID_POINTS])] {
        if v > loglik {
            rho = r;
            loglik = v;
        }
    }
    let loglik_at_zero = f(0.0)?;
    if loglik_at_zero > loglik {
        rho = 0.0;
        loglik = loglik_at_zero;
    }

    let mut warnings = Vec::new();
    let margin = 1e-6 * sigma2;
    if hi - rho < margin {
        warnings.push(Warning::RhoNearBoundary { rho, bound: hi_bound });
    } else if rho - lo < margin {
        warnings.push(Warning::RhoNearBoundary { rho, bound: lo_bound });
    }
    Ok(RhoFit {
        rho,
        loglik,
        loglik_at_zero,
        bounds: (lo_bound, hi_bound),
        warnings,
    })
}
