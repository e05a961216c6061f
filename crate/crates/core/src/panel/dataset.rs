use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::geo::GeoPoint;
use crate::error::{Error, Result};
use crate::stats;

/// One region-year record. Predictor values are aligned with
/// [`PanelDataset::predictor_names`]; `None` marks an explicit missing value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelObservation {
    pub region_id: String,
    pub country_id: String,
    pub year: i32,
    pub outcome: Option<f64>,
    pub predictors: Vec<Option<f64>>,
    pub centroid: Option<GeoPoint>,
    pub groups: BTreeSet<String>,
    /// Additional string columns, e.g. for custom clustering keys.
    pub extra: BTreeMap<String, String>,
}

/// Region-year panel sorted by `(region_id, year)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    observations: Vec<PanelObservation>,
    predictor_names: Vec<String>,
    extra_columns: Vec<String>,
}

impl PanelDataset {
    /// Validates the panel invariants and sorts observations by `(region_id, year)`.
    pub fn new(predictor_names: Vec<String>, mut observations: Vec<PanelObservation>) -> Result<Self> {
        for obs in &observations {
            if obs.predictors.len() != predictor_names.len() {
                return Err(Error::PredictorArity {
                    expected: predictor_names.len(),
                    found: obs.predictors.len(),
                });
            }
        }
        observations.sort_by(|a, b| (&a.region_id, a.year).cmp(&(&b.region_id, b.year)));

        for pair in observations.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.region_id != b.region_id {
                continue;
            }
            if a.year == b.year {
                return Err(Error::DuplicateObservation {
                    region: a.region_id.clone(),
                    year: a.year,
                });
            }
            if a.country_id != b.country_id {
                return Err(Error::RegionMultipleCountries {
                    region: a.region_id.clone(),
                    first: a.country_id.clone(),
                    second: b.country_id.clone(),
                });
            }
            if a.centroid != b.centroid {
                return Err(Error::InconsistentCentroid(a.region_id.clone()));
            }
        }

        let extra_columns: BTreeSet<String> = observations
            .iter()
            .flat_map(|o| o.extra.keys().cloned())
            .collect();

        Ok(PanelDataset {
            observations,
            predictor_names,
            extra_columns: extra_columns.into_iter().collect(),
        })
    }

    pub fn observations(&self) -> &[PanelObservation] {
        &self.observations
    }

    pub fn predictor_names(&self) -> &[String] {
        &self.predictor_names
    }

    pub fn extra_columns(&self) -> &[String] {
        &self.extra_columns
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn predictor_index(&self, name: &str) -> Result<usize> {
        self.predictor_names
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::UnknownPredictor(name.to_string()))
    }

    /// Binary search on the `(region, year)` sort order.
    pub fn find(&self, region: &str, year: i32) -> Option<&PanelObservation> {
        self.observations
            .binary_search_by(|o| (o.region_id.as_str(), o.year).cmp(&(region, year)))
            .ok()
            .map(|i| &self.observations[i])
    }

    pub fn regions(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for obs in &self.observations {
            if out.last() != Some(&obs.region_id.as_str()) {
                out.push(&obs.region_id);
            }
        }
        out
    }

    pub fn years(&self) -> Vec<i32> {
        let set: BTreeSet<i32> = self.observations.iter().map(|o| o.year).collect();
        set.into_iter().collect()
    }

    /// Missing calendar years strictly inside each region's observed span.
    pub fn gaps(&self) -> BTreeMap<String, Vec<i32>> {
        let mut out = BTreeMap::new();
        for pair in self.observations.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.region_id == b.region_id && b.year > a.year + 1 {
                out.entry(a.region_id.clone())
                    .or_insert_with(Vec::new)
                    .extend(a.year + 1..b.year);
            }
        }
        out
    }

    /// Median over all non-missing values of a predictor (type-7 convention).
    pub fn predictor_median(&self, name: &str) -> Result<f64> {
        let j = self.predictor_index(name)?;
        let values: Vec<f64> = self.observations.iter().filter_map(|o| o.predictors[j]).collect();
        if values.is_empty() {
            return Err(Error::invalid(format!("predictor `{name}` has no values")));
        }
        Ok(stats::quantile_sorted(&stats::sorted(&values), 0.5))
    }

    /// Concatenates two panels with identical predictor lists.
    pub fn concat(&self, other: &PanelDataset) -> Result<PanelDataset> {
        if self.predictor_names != other.predictor_names {
            return Err(Error::invalid("cannot concatenate panels with different predictors"));
        }
        let mut obs = self.observations.clone();
        obs.extend(other.observations.iter().cloned());
        PanelDataset::new(self.predictor_names.clone(), obs)
    }
}
