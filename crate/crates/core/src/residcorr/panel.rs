use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::panel::{DesignMatrix, GeoPoint, PanelDataset};
use crate::regression::FitResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionMeta {
    pub country: String,
    pub centroid: Option<GeoPoint>,
    pub groups: BTreeSet<String>,
}

/// Residuals indexed by `(region, year)` with per-region metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualPanel {
    values: BTreeMap<(String, i32), f64>,
    meta: BTreeMap<String, RegionMeta>,
}

impl ResidualPanel {
    pub fn new(values: BTreeMap<(String, i32), f64>, meta: BTreeMap<String, RegionMeta>) -> Result<Self> {
        if let Some(((region, _), _)) = values.iter().find(|((r, _), _)| !meta.contains_key(r)) {
            return Err(Error::invalid(format!("no metadata for region `{region}`")));
        }
        if let Some(((region, year), _)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite residual at {region} {year}")));
        }
        Ok(ResidualPanel { values, meta })
    }

    /// Residuals of `fit` on the rows of `design`, with metadata taken from `dataset`.
    pub fn from_fit(fit: &FitResult, design: &DesignMatrix, dataset: &PanelDataset) -> Result<Self> {
        if fit.residuals.len() != design.n_rows() {
            return Err(Error::ShapeMismatch(format!(
                "{} residuals for {} design rows",
                fit.residuals.len(),
                design.n_rows()
            )));
        }
        let values = design
            .rows()
            .iter()
            .zip(fit.residuals.iter())
            .map(|(k, &r)| ((k.region.to_string(), k.year), r))
            .collect::<BTreeMap<_, _>>();
        let mut meta = BTreeMap::new();
        for obs in dataset.observations() {
            if !values.contains_key(&(obs.region_id.clone(), obs.year)) {
                continue;
            }
            let entry = meta.entry(obs.region_id.clone()).or_insert_with(|| RegionMeta {
                country: obs.country_id.clone(),
                centroid: None,
                groups: BTreeSet::new(),
            });
            if entry.centroid.is_none() {
                entry.centroid = obs.centroid;
            }
            entry.groups.extend(obs.groups.iter().cloned());
        }
        ResidualPanel::new(values, meta)
    }

    pub fn values(&self) -> &BTreeMap<(String, i32), f64> {
        &self.values
    }

    pub fn region_meta(&self) -> &BTreeMap<String, RegionMeta> {
        &self.meta
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn regions(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.values.keys().map(|(r, _)| r.as_str()).collect();
        set.into_iter().collect()
    }

    pub fn years(&self) -> Vec<i32> {
        let set: BTreeSet<i32> = self.values.keys().map(|&(_, y)| y).collect();
        set.into_iter().collect()
    }

    /// Dense `regions × years` grid of residuals, `None` where missing.
    pub(crate) fn grid(&self) -> (Vec<&str>, Vec<i32>, Vec<Vec<Option<f64>>>) {
        let regions = self.regions();
        let years = self.years();
        let ridx: BTreeMap<&str, usize> = regions.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        let ypos: BTreeMap<i32, usize> = years.iter().enumerate().map(|(i, y)| (*y, i)).collect();
        let mut grid = vec![vec![None; years.len()]; regions.len()];
        for ((r, y), v) in &self.values {
            grid[ridx[r.as_str()]][ypos[y]] = Some(*v);
        }
        (regions, years, grid)
    }
}
