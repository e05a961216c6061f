use super::*;
use crate::panel::ClusterScheme;
use crate::regression::SmallSampleCorrection;
use crate::residcorr::{spatial_pair_correlations, RegionMeta, RegionPairFilter, ResidualPanel};

fn noise_panel(config: &DgpConfig, seed: u64) -> ResidualPanel {
    let ds = generate_panel(config, seed).unwrap();
    let mut values = std::collections::BTreeMap::new();
    let mut meta = std::collections::BTreeMap::new();
    for o in ds.observations() {
        let e = o.outcome.unwrap() - config.beta_true * o.predictors[0].unwrap();
        values.insert((o.region_id.clone(), o.year), e);
        meta.insert(
            o.region_id.clone(),
            RegionMeta {
                country: o.country_id.clone(),
                centroid: o.centroid,
                groups: o.groups.clone(),
            },
        );
    }
    ResidualPanel::new(values, meta).unwrap()
}

fn mean_corr(config: &DgpConfig, filter: &RegionPairFilter) -> f64 {
    let out = spatial_pair_correlations(&noise_panel(config, 17), filter, 10);
    crate::stats::mean(&out.rhos())
}

#[test]
fn persistent_predictor() {
    let cfg = DgpConfig {
        predictor_shared_weight: 1.0,
        ..DgpConfig::default()
    };
    let ds = generate_panel(&cfg, 1).unwrap();
    for region in ds.regions() {
        let xs: Vec<f64> = ds
            .observations()
            .iter()
            .filter(|o| o.region_id == region)
            .map(|o| o.predictors[0].unwrap())
            .collect();
        assert!(xs.iter().all(|x| *x == xs[0]));
    }
    assert_eq!(ds.len(), 100);
}

#[test]
fn planted_noise_correlation() {
    let cfg = DgpConfig {
        n_regions: 200,
        n_years: 50,
        noise_shared_weight: 0.65,
        ..DgpConfig::default()
    };
    let m = mean_corr(&cfg, &RegionPairFilter::All);
    assert!((m - 0.65).abs() < 0.05, "{m}");

    let mut prev = f64::NEG_INFINITY;
    for we in [0.0, 0.3, 0.65, 0.9] {
        let cfg = DgpConfig {
            n_regions: 40,
            n_years: 30,
            noise_shared_weight: we,
            ..DgpConfig::default()
        };
        let m = mean_corr(&cfg, &RegionPairFilter::All);
        assert!(m > prev, "w_e {we}: {m}");
        if we == 0.0 {
            assert!(m.abs() < 0.05);
        }
        prev = m;
    }
}

#[test]
fn country_shared_noise() {
    let cfg = DgpConfig {
        n_regions: 60,
        n_years: 40,
        noise_shared_weight: 0.65,
        regions_per_country: Some(10),
        ..DgpConfig::default()
    };
    let same = mean_corr(&cfg, &RegionPairFilter::SameCountry);
    let diff = mean_corr(&cfg, &RegionPairFilter::DifferentCountry);
    assert!((same - 0.65).abs() < 0.05 && diff.abs() < 0.05, "{same} {diff}");
}

#[test]
fn invalid_configs() {
    for cfg in [
        DgpConfig { noise_shared_weight: 1.5, ..DgpConfig::default() },
        DgpConfig { predictor_spatial_weight: 0.2, ..DgpConfig::default() },
        DgpConfig { n_years: 1, ..DgpConfig::default() },
        DgpConfig { noise_scale: 0.0, ..DgpConfig::default() },
    ] {
        assert!(generate_panel(&cfg, 0).is_err());
    }
}

#[test]
fn coverage_is_seeded_and_scale_invariant() {
    let schemes = [ClusterScheme::Region, ClusterScheme::Year];
    let cfg = DgpConfig::coverage();
    let a = coverage_study(&cfg, &schemes, 100, 0.95, SmallSampleCorrection::CR1, 9).unwrap();
    let b = coverage_study(&cfg, &schemes, 100, 0.95, SmallSampleCorrection::CR1, 9).unwrap();
    assert_eq!(a, b);
    let tiny = DgpConfig {
        noise_scale: 1e-12,
        ..cfg.clone()
    };
    let c = coverage_study(&tiny, &schemes, 100, 0.95, SmallSampleCorrection::CR1, 9).unwrap();
    for (x, y) in a.schemes.iter().zip(&c.schemes) {
        assert_eq!(x.empirical_coverage, y.empirical_coverage);
        // y = x + 1e-12·e loses about four digits of e to cancellation
        let r = y.mean_ci_width / x.mean_ci_width / 1e-12;
        assert!((r - 1.0).abs() < 1e-4);
    }
    assert!(coverage_study(&cfg, &schemes, 99, 0.95, SmallSampleCorrection::CR1, 9).is_err());
}

#[test]
fn bias_study_identities() {
    let cfg = DgpConfig {
        noise_shared_weight: 0.0,
        ..DgpConfig::default()
    };
    let r = bias_study(&cfg, &ClusterScheme::Year, 500, 4).unwrap();
    let factor = crate::regression::cr1_factor(10, 100, 2);
    assert!((r.ratio_cr1 / r.ratio_cr0 - factor).abs() < 1e-12);

    let doubled = DgpConfig {
        noise_scale: 2.0,
        ..cfg.clone()
    };
    let d = bias_study(&doubled, &ClusterScheme::Year, 500, 4).unwrap();
    assert!((d.mean_cr0_variance / r.mean_cr0_variance - 4.0).abs() < 1e-9);
    assert!((d.empirical_variance / r.empirical_variance - 4.0).abs() < 1e-9);
    assert!((d.ratio_cr0 - r.ratio_cr0).abs() < 1e-9);
    assert!(bias_study(&DgpConfig::default(), &ClusterScheme::Year, 500, 4).is_err());
}
