use rayon::prelude::*;
use serde::Serialize;

use super::filter::{FilterOutcome, RegionPairFilter, YearPairFilter};
use super::panel::ResidualPanel;
use crate::stats::pearson;

/// Pairs with fewer common observations are skipped.
pub const DEFAULT_MIN_OVERLAP: usize = 10;

/// Correlation of the residual sequences of two regions (or two years).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCorrelation {
    pub a: String,
    pub b: String,
    pub rho: f64,
    pub overlap: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SkipCounts {
    pub no_coordinates: usize,
    pub short_overlap: usize,
    /// Zero variance within the overlap.
    pub degenerate: usize,
}

impl SkipCounts {
    pub fn total(&self) -> usize {
        self.no_coordinates + self.short_overlap + self.degenerate
    }

    fn add(mut self, other: SkipCounts) -> SkipCounts {
        self.no_coordinates += other.no_coordinates;
        self.short_overlap += other.short_overlap;
        self.degenerate += other.degenerate;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PairCorrelations {
    /// Sorted by `(a, b)` with `a < b`.
    pub pairs: Vec<PairCorrelation>,
    pub skipped: SkipCounts,
}

impl PairCorrelations {
    pub fn rhos(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.rho).collect()
    }
}

enum PairResult {
    Excluded,
    Skipped(SkipCounts),
    Kept(PairCorrelation),
}

fn correlate(a: &[Option<f64>], b: &[Option<f64>], min_overlap: usize) -> Result<(f64, usize), SkipCounts> {
    let (xa, xb): (Vec<f64>, Vec<f64>) = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
        .unzip();
    if xa.len() < min_overlap.max(2) {
        return Err(SkipCounts {
            short_overlap: 1,
            ..Default::default()
        });
    }
    match pearson(&xa, &xb) {
        Some(rho) => Ok((rho, xa.len())),
        None => Err(SkipCounts {
            degenerate: 1,
            ..Default::default()
        }),
    }
}

fn collect(indices: Vec<(usize, usize)>, eval: impl Fn(usize, usize) -> PairResult + Sync) -> PairCorrelations {
    let results: Vec<PairResult> = indices.into_par_iter().map(|(i, j)| eval(i, j)).collect();
    let mut out = PairCorrelations::default();
    for r in results {
        match r {
            PairResult::Excluded => {}
            PairResult::Skipped(s) => out.skipped = out.skipped.add(s),
            PairResult::Kept(p) => out.pairs.push(p),
        }
    }
    out
}

fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// For each unordered pair of regions passing `filter`, the Pearson
/// correlation of their residuals over the years both are observed.
pub fn spatial_pair_correlations(
    panel: &ResidualPanel,
    filter: &RegionPairFilter,
    min_overlap: usize,
) -> PairCorrelations {
    let (regions, _, grid) = panel.grid();
    let meta: Vec<_> = regions.iter().map(|r| &panel.region_meta()[*r]).collect();
    collect(upper_pairs(regions.len()), |i, j| match filter.evaluate(meta[i], meta[j]) {
        FilterOutcome::Fail => PairResult::Excluded,
        FilterOutcome::NoCoordinates => PairResult::Skipped(SkipCounts {
            no_coordinates: 1,
            ..Default::default()
        }),
        FilterOutcome::Pass => match correlate(&grid[i], &grid[j], min_overlap) {
            Ok((rho, overlap)) => PairResult::Kept(PairCorrelation {
                a: regions[i].to_string(),
                b: regions[j].to_string(),
                rho,
                overlap,
            }),
            Err(s) => PairResult::Skipped(s),
        },
    })
}

/// For each unordered pair of years passing `filter`, the Pearson
/// correlation of the two cross-sections over regions observed in both.
pub fn temporal_pair_correlations(
    panel: &ResidualPanel,
    filter: YearPairFilter,
    min_overlap: usize,
) -> PairCorrelations {
    let (_, years, grid) = panel.grid();
    let columns: Vec<Vec<Option<f64>>> = (0..years.len()).map(|t| grid.iter().map(|row| row[t]).collect()).collect();
    collect(upper_pairs(years.len()), |i, j| {
        if !filter.accepts(years[i], years[j]) {
            return PairResult::Excluded;
        }
        match correlate(&columns[i], &columns[j], min_overlap) {
            Ok((rho, overlap)) => PairResult::Kept(PairCorrelation {
                a: years[i].to_string(),
                b: years[j].to_string(),
                rho,
                overlap,
            }),
            Err(s) => PairResult::Skipped(s),
        }
    })
}
