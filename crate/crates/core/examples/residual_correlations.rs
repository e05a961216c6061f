//! Pairwise residual correlations grouped by country, distance and cohort.
//!
//! ```text
//! cargo run --example residual_correlations
//! ```

use std::path::Path;

use clusterpanel::panel::{build_design, load_csv, ColumnMapping, FixedEffect, ModelSpec, TermSpec};
use clusterpanel::regression::ols_fit;
use clusterpanel::residcorr::{
    correlation_table, default_groups, CorrelationGroup, RegionPairFilter, ResidualPanel, DEFAULT_MIN_OVERLAP,
};

fn main() -> clusterpanel::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/panel.csv");
    let ds = load_csv(path, &ColumnMapping::standard(&["x0", "x1"]))?;
    let spec = ModelSpec {
        terms: vec![TermSpec::new("x0").with_moderator("x1").with_max_lag(2)],
        fixed_effects: vec![FixedEffect::Region],
        ..ModelSpec::default()
    };
    let design = build_design(&ds, &spec)?;
    let fit = ols_fit(&design)?;
    let panel = ResidualPanel::from_fit(&fit, &design, &ds)?;

    let mut groups = default_groups(&["bloc"], &["C00", "C05"]);
    // custom rows are plain filter expressions
    groups.push(CorrelationGroup::spatial(
        "same country < 300km",
        RegionPairFilter::and(vec![RegionPairFilter::SameCountry, RegionPairFilter::DistanceBelow { km: 300.0 }]),
    ));
    for row in correlation_table(&panel, &groups, DEFAULT_MIN_OVERLAP)? {
        println!("{row}");
    }
    Ok(())
}
