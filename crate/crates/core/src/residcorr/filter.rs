use serde::{Deserialize, Serialize};

use super::panel::RegionMeta;
use crate::panel::haversine_km;

/// Predicate over unordered region pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionPairFilter {
    All,
    SameCountry,
    DifferentCountry,
    /// Both regions carry the group tag.
    BothInGroup { group: String },
    /// Both regions belong to this country.
    NamedCountry { country: String },
    DistanceBelow { km: f64 },
    DistanceAbove { km: f64 },
    And { filters: Vec<RegionPairFilter> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterOutcome {
    Pass,
    Fail,
    /// A distance test was needed but a centroid is missing.
    NoCoordinates,
}

impl RegionPairFilter {
    pub fn and(filters: Vec<RegionPairFilter>) -> Self {
        RegionPairFilter::And { filters }
    }

    pub fn evaluate(&self, a: &RegionMeta, b: &RegionMeta) -> FilterOutcome {
        use FilterOutcome::*;
        let bool_outcome = |ok: bool| if ok { Pass } else { Fail };
        match self {
            RegionPairFilter::All => Pass,
            RegionPairFilter::SameCountry => bool_outcome(a.country == b.country),
            RegionPairFilter::DifferentCountry => bool_outcome(a.country != b.country),
            RegionPairFilter::BothInGroup { group } => {
                bool_outcome(a.groups.contains(group) && b.groups.contains(group))
            }
            RegionPairFilter::NamedCountry { country } => bool_outcome(&a.country == country && &b.country == country),
            RegionPairFilter::DistanceBelow { km } | RegionPairFilter::DistanceAbove { km } => {
                match (a.centroid, b.centroid) {
                    (Some(pa), Some(pb)) => {
                        let d = haversine_km(pa, pb).expect("centroids validated on load");
                        bool_outcome(match self {
                            RegionPairFilter::DistanceBelow { .. } => d < *km,
                            _ => d > *km,
                        })
                    }
                    _ => NoCoordinates,
                }
            }
            RegionPairFilter::And { filters } => {
                let mut missing = false;
                for f in filters {
                    match f.evaluate(a, b) {
                        Fail => return Fail,
                        NoCoordinates => missing = true,
                        Pass => {}
                    }
                }
                if missing {
                    NoCoordinates
                } else {
                    Pass
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YearPairFilter {
    All,
    /// `|a - b| = 1`
    Consecutive,
}

impl YearPairFilter {
    pub fn accepts(self, a: i32, b: i32) -> bool {
        match self {
            YearPairFilter::All => true,
            YearPairFilter::Consecutive => (a - b).abs() == 1,
        }
    }
}
