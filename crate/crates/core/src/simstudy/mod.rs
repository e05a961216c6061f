//! Synthetic panels with planted correlation structure and the Monte Carlo
//! studies built on them.

mod dgp;
mod studies;

pub use dgp::{generate_panel, DgpConfig};
pub use studies::{
    bias_study, coverage_study, selection_methods, selection_study, BiasReport, CoverageReport, SchemeCoverage,
    SelectionCount,
};

#[cfg(test)]
mod tests;
