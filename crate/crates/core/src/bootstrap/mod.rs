//! Pairs-cluster bootstrap, percentile intervals and scenario projections.

mod projection;
mod resample;

pub use projection::{
    first_discernible_year, project_scenarios, write_draws_csv, write_projection_csv, Aggregation, Projection,
    ScenarioPath,
};
pub use resample::{block_bootstrap, percentile_interval, percentile_of, BootstrapSample, PercentileInterval};
