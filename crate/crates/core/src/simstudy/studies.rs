use rayon::prelude::*;
use serde::Serialize;

use super::dgp::{generate_panel, DgpConfig};
use crate::error::{Error, Result};
use crate::modelselect::{forward_scan, CvScorer, IcScorer, ModelScorer, ParamCount, Criterion};
use crate::panel::{assign_clusters, build_design, ClusterScheme, ModelSpec, TermSpec};
use crate::regression::{clustered_cov, cluster_critical_value, cr1_factor, ols_fit, SmallSampleCorrection};
use crate::rng::derive_seed;
use crate::stats::{mean, sample_variance};

fn slope_spec() -> ModelSpec {
    ModelSpec {
        terms: vec![TermSpec::new("x0")],
        ..ModelSpec::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeCoverage {
    pub scheme: String,
    pub nominal_level: f64,
    pub empirical_coverage: f64,
    pub mean_ci_width: f64,
    /// Replications that produced an interval.
    pub replications: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub config: DgpConfig,
    pub seed: u64,
    pub reps: usize,
    pub correction: SmallSampleCorrection,
    pub schemes: Vec<SchemeCoverage>,
}

/// Replication `i` uses the panel generated from `derive_seed(seed, i)`, fits
/// `y ~ 1 + x0` and checks whether each scheme's t interval covers `beta_true`.
pub fn coverage_study(
    config: &DgpConfig,
    schemes: &[ClusterScheme],
    reps: usize,
    level: f64,
    correction: SmallSampleCorrection,
    seed: u64,
) -> Result<CoverageReport> {
    config.validate()?;
    if reps < 100 {
        return Err(Error::invalid(format!("coverage study needs at least 100 replications, got {reps}")));
    }
    // per replication and scheme: Some((covered, width)) or None on failure
    let outcomes: Vec<Vec<Option<(bool, f64)>>> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let ds = generate_panel(config, derive_seed(seed, i as u64))?;
            let design = build_design(&ds, &slope_spec())?;
            let fit = ols_fit(&design);
            Ok(schemes
                .iter()
                .map(|scheme| {
                    let fit = fit.as_ref().ok()?;
                    let clusters = assign_clusters(&design, &ds, scheme).ok()?;
                    let cov = clustered_cov(fit, &design, &clusters, correction).ok()?;
                    let q = cluster_critical_value(&cov, level).ok()?;
                    let se = cov.cov[(1, 1)].max(0.0).sqrt();
                    let covered = (fit.beta[1] - config.beta_true).abs() <= q * se;
                    Some((covered, 2.0 * q * se))
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let schemes = schemes
        .iter()
        .enumerate()
        .map(|(s, scheme)| {
            let ok: Vec<(bool, f64)> = outcomes.iter().filter_map(|o| o[s]).collect();
            let n = ok.len();
            SchemeCoverage {
                scheme: scheme.to_string(),
                nominal_level: level,
                empirical_coverage: if n == 0 { f64::NAN } else { ok.iter().filter(|c| c.0).count() as f64 / n as f64 },
                mean_ci_width: if n == 0 { f64::NAN } else { ok.iter().map(|c| c.1).sum::<f64>() / n as f64 },
                replications: n,
                failures: reps - n,
            }
        })
        .collect();
    Ok(CoverageReport {
        config: config.clone(),
        seed,
        reps,
        correction,
        schemes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasReport {
    pub scheme: String,
    pub reps: usize,
    /// Monte Carlo mean of the CR0 slope variance.
    pub mean_cr0_variance: f64,
    pub mean_cr1_variance: f64,
    /// Variance of the slope estimates across replications.
    pub empirical_variance: f64,
    pub ratio_cr0: f64,
    pub ratio_cr1: f64,
}

/// Compares the average clustered slope variance with the empirical variance
/// of the slope under iid noise.
pub fn bias_study(config: &DgpConfig, scheme: &ClusterScheme, reps: usize, seed: u64) -> Result<BiasReport> {
    config.validate()?;
    if config.noise_shared_weight != 0.0 {
        return Err(Error::invalid("bias study needs iid noise (noise_shared_weight = 0)"));
    }
    if reps < 500 {
        return Err(Error::invalid(format!("bias study needs at least 500 replications, got {reps}")));
    }
    let draws: Vec<(f64, f64, f64)> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let ds = generate_panel(config, derive_seed(seed, i as u64))?;
            let design = build_design(&ds, &slope_spec())?;
            let fit = ols_fit(&design)?;
            let clusters = assign_clusters(&design, &ds, scheme)?;
            let cov = clustered_cov(&fit, &design, &clusters, SmallSampleCorrection::CR0)?;
            let factor = cr1_factor(clusters.n_clusters(), fit.n, fit.p);
            Ok((fit.beta[1], cov.cov[(1, 1)], cov.cov[(1, 1)] * factor))
        })
        .collect::<Result<_>>()?;
    let slopes: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let cr0: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let cr1: Vec<f64> = draws.iter().map(|d| d.2).collect();
    let empirical = sample_variance(&slopes);
    let (m0, m1) = (mean(&cr0), mean(&cr1));
    Ok(BiasReport {
        scheme: scheme.to_string(),
        reps,
        mean_cr0_variance: m0,
        mean_cr1_variance: m1,
        empirical_variance: empirical,
        ratio_cr0: m0 / empirical,
        ratio_cr1: m1 / empirical,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionCount {
    pub method: String,
    /// Runs in which the model with the predictor at full lag depth scored
    /// better than the trivial model.
    pub nontrivial: usize,
    /// Runs in which the predictor at some lag depth scored better than the trivial model.
    pub nontrivial_any_depth: usize,
    pub runs: usize,
}

impl SelectionCount {
    pub fn trivial_share(&self) -> f64 {
        (self.runs - self.nontrivial) as f64 / self.runs as f64
    }

    pub fn nontrivial_share(&self) -> f64 {
        self.nontrivial as f64 / self.runs as f64
    }
}

/// Selection methods compared on each generated panel.
pub fn selection_methods(k_folds: usize, fold_seed: u64) -> Vec<Box<dyn ModelScorer>> {
    let cv = |scheme| -> Box<dyn ModelScorer> {
        Box::new(CvScorer {
            scheme,
            k: k_folds,
            seed: fold_seed,
        })
    };
    let ic = |criterion, adjusted| -> Box<dyn ModelScorer> {
        Box::new(IcScorer {
            criterion,
            adjusted,
            scheme: ClusterScheme::CountryYear,
            count: ParamCount::default(),
        })
    };
    vec![
        cv(ClusterScheme::Country),
        cv(ClusterScheme::Year),
        cv(ClusterScheme::Region),
        ic(Criterion::AIC, false),
        ic(Criterion::BIC, false),
        ic(Criterion::AIC, true),
        ic(Criterion::BIC, true),
    ]
}

/// For each run, scans `x0` at lag depths `0..=max_lag` against the trivial
/// model (intercept only) and records, per method, whether the full-depth
/// model and whether any depth beats the trivial model.
pub fn selection_study(config: &DgpConfig, runs: usize, max_lag: usize, k_folds: usize, seed: u64) -> Result<Vec<SelectionCount>> {
    config.validate()?;
    let candidate = TermSpec::new("x0").with_max_lag(max_lag);
    let picks: Vec<Vec<(bool, bool)>> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let run_seed = derive_seed(seed, i as u64);
            let ds = generate_panel(config, run_seed)?;
            selection_methods(k_folds, run_seed)
                .iter()
                .map(|m| {
                    let scan = forward_scan(&ds, &ModelSpec::default(), std::slice::from_ref(&candidate), m.as_ref())?;
                    let full = scan.rows.last().is_some_and(|r| r.delta < 0.0);
                    Ok((full, scan.best().is_some()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(selection_methods(k_folds, 0)
        .iter()
        .enumerate()
        .map(|(j, m)| SelectionCount {
            method: m.label(),
            nontrivial: picks.iter().filter(|p| p[j].0).count(),
            nontrivial_any_depth: picks.iter().filter(|p| p[j].1).count(),
            runs,
        })
        .collect())
}
