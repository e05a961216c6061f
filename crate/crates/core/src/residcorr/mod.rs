//! Pairwise correlations of regression residuals between regions (spatial)
//! and between years (temporal), aggregated over groups of pairs.

mod filter;
mod pairs;
mod panel;
mod table;

pub use filter::{FilterOutcome, RegionPairFilter, YearPairFilter};
pub use pairs::{
    spatial_pair_correlations, temporal_pair_correlations, PairCorrelation, PairCorrelations, SkipCounts,
    DEFAULT_MIN_OVERLAP,
};
pub use panel::{RegionMeta, ResidualPanel};
pub use table::{
    correlation_table, default_groups, summarize, write_table_csv, CorrelationGroup, CorrelationKind,
    CorrelationRow, CorrelationSummary, GroupSelector,
};

#[cfg(test)]
mod tests;
