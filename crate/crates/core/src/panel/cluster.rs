use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::PanelDataset;
use super::design::DesignMatrix;
use crate::error::{Error, Result};

/// How design rows are grouped into mutually correlated clusters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ClusterScheme {
    Region,
    RegionYear,
    Country,
    CountryYear,
    Year,
    /// Values of an extra string column.
    Custom(String),
}

impl fmt::Display for ClusterScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClusterScheme::Region => f.write_str("Region"),
            ClusterScheme::RegionYear => f.write_str("RegionYear"),
            ClusterScheme::Country => f.write_str("Country"),
            ClusterScheme::CountryYear => f.write_str("CountryYear"),
            ClusterScheme::Year => f.write_str("Year"),
            ClusterScheme::Custom(c) => write!(f, "Custom:{c}"),
        }
    }
}

impl From<ClusterScheme> for String {
    fn from(s: ClusterScheme) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for ClusterScheme {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for ClusterScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "Region" | "region" => ClusterScheme::Region,
            "RegionYear" | "region_year" => ClusterScheme::RegionYear,
            "Country" | "country" => ClusterScheme::Country,
            "CountryYear" | "country_year" => ClusterScheme::CountryYear,
            "Year" | "year" => ClusterScheme::Year,
            other => match other.strip_prefix("Custom:") {
                Some(col) if !col.is_empty() => ClusterScheme::Custom(col.to_string()),
                _ => return Err(Error::invalid(format!("unknown clustering scheme `{other}`"))),
            },
        })
    }
}

/// Partition of design rows into clusters. Keys are sorted, so cluster
/// indices are deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    scheme: ClusterScheme,
    keys: Vec<String>,
    membership: Vec<usize>,
    sizes: Vec<usize>,
}

impl ClusterAssignment {
    /// Builds an assignment from one key per row.
    pub fn from_row_keys(scheme: ClusterScheme, row_keys: &[String]) -> Self {
        let mut index: BTreeMap<&str, usize> = row_keys.iter().map(|k| (k.as_str(), 0)).collect();
        for (i, v) in index.values_mut().enumerate() {
            *v = i;
        }
        let keys: Vec<String> = index.keys().map(|k| k.to_string()).collect();
        let membership: Vec<usize> = row_keys.iter().map(|k| index[k.as_str()]).collect();
        let mut sizes = vec![0; keys.len()];
        for &g in &membership {
            sizes[g] += 1;
        }
        ClusterAssignment {
            scheme,
            keys,
            membership,
            sizes,
        }
    }

    pub fn scheme(&self) -> &ClusterScheme {
        &self.scheme
    }

    pub fn n_clusters(&self) -> usize {
        self.keys.len()
    }

    pub fn n_rows(&self) -> usize {
        self.membership.len()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    /// Cluster index of every row.
    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn max_size(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    /// Row indices of every cluster, ascending within each cluster.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (row, &g) in self.membership.iter().enumerate() {
            out[g].push(row);
        }
        out
    }
}

pub fn assign_clusters(design: &DesignMatrix, dataset: &PanelDataset, scheme: &ClusterScheme) -> Result<ClusterAssignment> {
    if design.n_rows() == 0 {
        return Err(Error::EmptyDesign);
    }
    if let ClusterScheme::Custom(col) = scheme {
        if !dataset.extra_columns().iter().any(|c| c == col) {
            return Err(Error::UnknownClusterColumn(col.clone()));
        }
    }
    let keys = design
        .rows()
        .iter()
        .map(|r| {
            Ok(match scheme {
                ClusterScheme::Region => r.region.to_string(),
                ClusterScheme::RegionYear => format!("{}|{}", r.region, r.year),
                ClusterScheme::Country => r.country.to_string(),
                ClusterScheme::CountryYear => format!("{}|{}", r.country, r.year),
                ClusterScheme::Year => r.year.to_string(),
                ClusterScheme::Custom(col) => dataset
                    .find(&r.region, r.year)
                    .and_then(|o| o.extra.get(col))
                    .cloned()
                    .ok_or_else(|| Error::MissingClusterValue {
                        region: r.region.to_string(),
                        year: r.year,
                        column: col.clone(),
                    })?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClusterAssignment::from_row_keys(scheme.clone(), &keys))
}
