//! Projects two predictor scenarios through bootstrap draws and reports the
//! first year in which they separate.
//!
//! ```text
//! cargo run --release --example scenario_projection
//! ```

use std::path::Path;

use clusterpanel::bootstrap::{
    block_bootstrap, first_discernible_year, percentile_of, project_scenarios, Aggregation, ScenarioPath,
};
use clusterpanel::panel::{load_csv, ClusterScheme, ColumnMapping, FixedEffect, ModelSpec, TermSpec};

fn main() -> clusterpanel::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let mapping = ColumnMapping::standard(&["x0", "x1"]);
    let ds = load_csv(data.join("panel.csv"), &mapping)?;
    let spec = ModelSpec {
        terms: vec![TermSpec::new("x0").with_moderator("x1").with_max_lag(2)],
        fixed_effects: vec![FixedEffect::Region],
        ..ModelSpec::default()
    };
    let sample = block_bootstrap(&ds, &spec, &ClusterScheme::Year, 500, 7)?;

    let mut projections = Vec::new();
    for label in ["low", "high"] {
        let scenario = load_csv(data.join(format!("scenario_{label}.csv")), &mapping)?;
        let path = ScenarioPath::from_dataset(label, &scenario, &spec, Some((2025, 2060)))?;
        projections.push(project_scenarios(&sample, &path, &Aggregation::Mean)?);
    }
    let (low, high) = (&projections[0], &projections[1]);
    for (t, year) in high.years.iter().enumerate().step_by(5) {
        let a = percentile_of(high.values.column(t).as_slice(), 0.9)?;
        let b = percentile_of(low.values.column(t).as_slice(), 0.9)?;
        println!(
            "{year}: high {:+.3} [{:+.3}, {:+.3}]  low {:+.3} [{:+.3}, {:+.3}]",
            a.median, a.lower, a.upper, b.median, b.lower, b.upper
        );
    }
    match first_discernible_year(high, low, 0.05)? {
        Some(y) => println!("scenarios first discernible in {y}"),
        None => println!("scenarios never discernible"),
    }
    Ok(())
}
