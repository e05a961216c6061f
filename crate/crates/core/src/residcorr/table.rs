use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::filter::{RegionPairFilter, YearPairFilter};
use super::pairs::{spatial_pair_correlations, temporal_pair_correlations, SkipCounts};
use super::panel::ResidualPanel;
use crate::error::{Error, Result};
use crate::stats::{mean, quantile_sorted, sorted};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    Spatial,
    Temporal,
}

impl fmt::Display for CorrelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            CorrelationKind::Spatial => "spatial",
            CorrelationKind::Temporal => "temporal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSelector {
    Spatial { filter: RegionPairFilter },
    Temporal { years: YearPairFilter },
}

impl GroupSelector {
    pub fn kind(&self) -> CorrelationKind {
        match self {
            GroupSelector::Spatial { .. } => CorrelationKind::Spatial,
            GroupSelector::Temporal { .. } => CorrelationKind::Temporal,
        }
    }
}

/// A labelled row of the correlation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationGroup {
    pub label: String,
    #[serde(flatten)]
    pub selector: GroupSelector,
}

impl CorrelationGroup {
    pub fn spatial(label: impl Into<String>, filter: RegionPairFilter) -> Self {
        CorrelationGroup {
            label: label.into(),
            selector: GroupSelector::Spatial { filter },
        }
    }

    pub fn temporal(label: impl Into<String>, years: YearPairFilter) -> Self {
        CorrelationGroup {
            label: label.into(),
            selector: GroupSelector::Temporal { years },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSummary {
    pub group_label: String,
    pub kind: CorrelationKind,
    pub mean: f64,
    pub q25: f64,
    pub q75: f64,
    pub pair_count: usize,
}

/// Mean and type-7 quartiles of `rhos`; `None` when there are no pairs.
pub fn summarize(group_label: &str, kind: CorrelationKind, rhos: &[f64]) -> Option<CorrelationSummary> {
    if rhos.is_empty() {
        return None;
    }
    let s = sorted(rhos);
    Some(CorrelationSummary {
        group_label: group_label.to_string(),
        kind,
        mean: mean(rhos).clamp(-1.0, 1.0),
        q25: quantile_sorted(&s, 0.25),
        q75: quantile_sorted(&s, 0.75),
        pair_count: rhos.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub group_label: String,
    pub kind: CorrelationKind,
    /// `None` means no pairs in the group.
    pub summary: Option<CorrelationSummary>,
    pub skipped: SkipCounts,
}

impl fmt::Display for CorrelationRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.summary {
            Some(s) => write!(
                f,
                "{:<9} {:<24} {:>6.2} {:>6.2} {:>6.2} {:>8}",
                self.kind, self.group_label, s.mean, s.q25, s.q75, s.pair_count
            ),
            None => write!(f, "{:<9} {:<24} no pairs", self.kind, self.group_label),
        }
    }
}

pub fn correlation_table(panel: &ResidualPanel, groups: &[CorrelationGroup], min_overlap: usize) -> Result<Vec<CorrelationRow>> {
    if panel.is_empty() {
        return Err(Error::invalid("residual panel is empty"));
    }
    Ok(groups
        .iter()
        .map(|g| {
            let pairs = match &g.selector {
                GroupSelector::Spatial { filter } => spatial_pair_correlations(panel, filter, min_overlap),
                GroupSelector::Temporal { years } => temporal_pair_correlations(panel, *years, min_overlap),
            };
            let kind = g.selector.kind();
            CorrelationRow {
                group_label: g.label.clone(),
                kind,
                summary: summarize(&g.label, kind, &pairs.rhos()),
                skipped: pairs.skipped,
            }
        })
        .collect())
}

/// The standard set of rows: temporal all/consecutive, spatial all,
/// same/different country, different country within each cohort tag,
/// the four distance-by-country cells at 1000 km, then each named country.
pub fn default_groups(cohort_tags: &[&str], named_countries: &[&str]) -> Vec<CorrelationGroup> {
    use RegionPairFilter as F;
    let mut groups = vec![
        CorrelationGroup::temporal("all", YearPairFilter::All),
        CorrelationGroup::temporal("consecutive", YearPairFilter::Consecutive),
        CorrelationGroup::spatial("all", F::All),
        CorrelationGroup::spatial("same country", F::SameCountry),
        CorrelationGroup::spatial("different country", F::DifferentCountry),
    ];
    for tag in cohort_tags {
        groups.push(CorrelationGroup::spatial(
            format!("different country in {tag}"),
            F::and(vec![F::DifferentCountry, F::BothInGroup { group: tag.to_string() }]),
        ));
    }
    let near = F::DistanceBelow { km: 1000.0 };
    let far = F::DistanceAbove { km: 1000.0 };
    groups.extend([
        CorrelationGroup::spatial("<1000km same country", F::and(vec![near.clone(), F::SameCountry])),
        CorrelationGroup::spatial("<1000km different country", F::and(vec![near, F::DifferentCountry])),
        CorrelationGroup::spatial(">1000km same country", F::and(vec![far.clone(), F::SameCountry])),
        CorrelationGroup::spatial(">1000km different country", F::and(vec![far, F::DifferentCountry])),
    ]);
    for c in named_countries {
        groups.push(CorrelationGroup::spatial(
            c.to_string(),
            F::NamedCountry { country: c.to_string() },
        ));
    }
    groups
}

/// Columns: kind, group, mean, q25, q75, pair_count, skipped_count. Empty groups get `NA`.
pub fn write_table_csv<W: Write>(writer: W, rows: &[CorrelationRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["kind", "group", "mean", "q25", "q75", "pair_count", "skipped_count"])?;
    for row in rows {
        let skipped = row.skipped.total().to_string();
        let record = match &row.summary {
            Some(s) => [
                row.kind.to_string(),
                row.group_label.clone(),
                s.mean.to_string(),
                s.q25.to_string(),
                s.q75.to_string(),
                s.pair_count.to_string(),
                skipped,
            ],
            None => [
                row.kind.to_string(),
                row.group_label.clone(),
                "NA".into(),
                "NA".into(),
                "NA".into(),
                "0".into(),
                skipped,
            ],
        };
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<correlation csv>", e))?;
    Ok(())
}

