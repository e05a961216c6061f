use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{GeoPoint, PanelDataset, PanelObservation};

/// Synthetic panel: predictor `x_k = √w_p·u_r + √w_s·s_t + √(1−w_p−w_s)·ξ_rt`
/// and noise `e = scale·(√w_e·v_t + √(1−w_e)·η_rt)`, with `y = β·x_0 + e`.
///
/// The shared components `s` and `v` are per year, or per country-year when
/// `regions_per_country` is set. All components are iid standard normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DgpConfig {
    pub n_regions: usize,
    pub n_years: usize,
    pub beta_true: f64,
    /// Share of predictor variance constant within a region.
    pub predictor_shared_weight: f64,
    /// Share of predictor variance common to all regions in a year (or country-year).
    pub predictor_spatial_weight: f64,
    /// Share of noise variance common to all regions in a year (or country-year).
    pub noise_shared_weight: f64,
    pub noise_scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regions_per_country: Option<usize>,
    /// Number of generated predictors `x0, x1, ...`; only `x0` enters the outcome.
    pub n_predictors: usize,
    pub start_year: i32,
    /// Place countries on a grid with about 1300 km spacing and jitter regions around them.
    pub coordinates: bool,
    /// Countries `0..bloc_countries` get the group tag `bloc`.
    pub bloc_countries: usize,
}

impl Default for DgpConfig {
    fn default() -> Self {
        DgpConfig {
            n_regions: 10,
            n_years: 10,
            beta_true: 1.0,
            predictor_shared_weight: 0.9,
            predictor_spatial_weight: 0.0,
            noise_shared_weight: 0.9,
            noise_scale: 1.0,
            regions_per_country: None,
            n_predictors: 1,
            start_year: 2000,
            coordinates: false,
            bloc_countries: 0,
        }
    }
}

impl DgpConfig {
    /// Coverage configuration: a predictor that is persistent within regions
    /// and partly shared within years, noise mostly shared within years.
    pub fn coverage() -> Self {
        DgpConfig {
            predictor_shared_weight: 0.7,
            predictor_spatial_weight: 0.2,
            ..DgpConfig::default()
        }
    }

    /// Spurious predictor: outcome unrelated to `x0`; predictor and noise both
    /// strongly shared within country-years.
    pub fn spurious() -> Self {
        DgpConfig {
            n_regions: 320,
            n_years: 20,
            beta_true: 0.0,
            predictor_shared_weight: 0.0,
            predictor_spatial_weight: 0.9,
            noise_shared_weight: 0.65,
            regions_per_country: Some(40),
            ..DgpConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let weights = [
            ("predictor_shared_weight", self.predictor_shared_weight),
            ("predictor_spatial_weight", self.predictor_spatial_weight),
            ("noise_shared_weight", self.noise_shared_weight),
        ];
        for (name, w) in weights {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::invalid(format!("{name} = {w} outside [0, 1]")));
            }
        }
        if self.predictor_shared_weight + self.predictor_spatial_weight > 1.0 + 1e-12 {
            return Err(Error::invalid("predictor weights sum above 1"));
        }
        if self.n_regions < 2 || self.n_years < 2 {
            return Err(Error::invalid("need at least 2 regions and 2 years"));
        }
        if !(self.noise_scale > 0.0) || !self.noise_scale.is_finite() {
            return Err(Error::invalid("noise_scale must be positive"));
        }
        if self.n_predictors == 0 {
            return Err(Error::invalid("need at least one predictor"));
        }
        if self.regions_per_country == Some(0) {
            return Err(Error::invalid("regions_per_country must be positive"));
        }
        Ok(())
    }

    pub fn n_countries(&self) -> usize {
        match self.regions_per_country {
            Some(m) => self.n_regions.div_ceil(m),
            None => self.n_regions,
        }
    }

    fn country_of(&self, region: usize) -> usize {
        match self.regions_per_country {
            Some(m) => region / m,
            None => region,
        }
    }

    /// Index of the shared component for a region-year.
    fn shared_unit(&self, region: usize, t: usize) -> usize {
        match self.regions_per_country {
            Some(_) => self.country_of(region) * self.n_years + t,
            None => t,
        }
    }

    fn n_shared_units(&self) -> usize {
        match self.regions_per_country {
            Some(_) => self.n_countries() * self.n_years,
            None => self.n_years,
        }
    }
}

fn normals(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn generate_panel(config: &DgpConfig, seed: u64) -> Result<PanelDataset> {
    config.validate()?;
    let (nr, nt) = (config.n_regions, config.n_years);
    let mut rng = crate::rng::rng(seed);

    let wp = config.predictor_shared_weight;
    let ws = config.predictor_spatial_weight;
    let wi = (1.0 - wp - ws).max(0.0);
    let predictors: Vec<Vec<f64>> = (0..config.n_predictors)
        .map(|_| {
            let u = normals(&mut rng, nr);
            let s = normals(&mut rng, config.n_shared_units());
            let xi = normals(&mut rng, nr * nt);
            (0..nr * nt)
                .map(|i| {
                    let (r, t) = (i / nt, i % nt);
                    wp.sqrt() * u[r] + ws.sqrt() * s[config.shared_unit(r, t)] + wi.sqrt() * xi[i]
                })
                .collect()
        })
        .collect();
    let we = config.noise_shared_weight;
    let v = normals(&mut rng, config.n_shared_units());
    let eta = normals(&mut rng, nr * nt);

    let width = (nr.max(config.n_countries()) as f64).log10().floor() as usize + 1;
    let centroids: Vec<Option<GeoPoint>> = (0..nr)
        .map(|r| {
            if !config.coordinates {
                return Ok(None);
            }
            let c = config.country_of(r);
            let lat = 36.0 + 12.0 * (c / 5) as f64 + rng.random_range(-2.0..2.0);
            let lon = -8.0 + 16.0 * (c % 5) as f64 + rng.random_range(-3.0..3.0);
            GeoPoint::new(lat.clamp(-89.0, 89.0), (lon + 180.0).rem_euclid(360.0) - 180.0).map(Some)
        })
        .collect::<Result<_>>()?;

    let mut obs = Vec::with_capacity(nr * nt);
    for r in 0..nr {
        let c = config.country_of(r);
        let groups: BTreeSet<String> = if c < config.bloc_countries {
            BTreeSet::from(["bloc".to_string()])
        } else {
            BTreeSet::new()
        };
        for t in 0..nt {
            let i = r * nt + t;
            let e = config.noise_scale * (we.sqrt() * v[config.shared_unit(r, t)] + (1.0 - we).sqrt() * eta[i]);
            obs.push(PanelObservation {
                region_id: format!("R{r:0width$}"),
                country_id: format!("C{c:0width$}"),
                year: config.start_year + t as i32,
                outcome: Some(config.beta_true * predictors[0][i] + e),
                predictors: predictors.iter().map(|p| Some(p[i])).collect(),
                centroid: centroids[r],
                groups: groups.clone(),
                extra: BTreeMap::new(),
            });
        }
    }
    let names = (0..config.n_predictors).map(|k| format!("x{k}")).collect();
    PanelDataset::new(names, obs)
}
