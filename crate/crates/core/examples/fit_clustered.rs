//! Distributed-lag regression with region fixed effects on the bundled panel,
//! reported under three clustering schemes.
//!
//! ```text
//! cargo run --example fit_clustered
//! ```

use std::path::Path;

use clusterpanel::panel::{
    assign_clusters, build_design, load_csv, ClusterScheme, ColumnMapping, FixedEffect, ModelSpec, TermSpec,
};
use clusterpanel::regression::{clustered_cov, ols_fit, term_response_curve, CoefficientTable, SmallSampleCorrection};

fn main() -> clusterpanel::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/panel.csv");
    let ds = load_csv(path, &ColumnMapping::standard(&["x0", "x1"]))?;

    let term = TermSpec::new("x0").with_moderator("x1").with_max_lag(2);
    let spec = ModelSpec {
        terms: vec![term.clone()],
        fixed_effects: vec![FixedEffect::Region],
        ..ModelSpec::default()
    };
    let design = build_design(&ds, &spec)?;
    let fit = ols_fit(&design)?;
    println!("n = {}, p = {}, R² = {:.3}", fit.n, fit.p, fit.r_squared);

    let median = ds.predictor_median("x1")?;
    for scheme in [ClusterScheme::Region, ClusterScheme::Year, ClusterScheme::CountryYear] {
        let clusters = assign_clusters(&design, &ds, &scheme)?;
        let cov = clustered_cov(&fit, &design, &clusters, SmallSampleCorrection::CR1)?;
        let table = CoefficientTable::new(&fit, &cov, 0.95)?;
        println!("\n{scheme} ({} clusters)", table.n_clusters);
        for row in table.coefficients.iter().take(design.n_structural()) {
            println!(
                "  {:<12} {:>8.4}  se {:.4}  [{:.4}, {:.4}]",
                row.label, row.estimate, row.se, row.lower, row.upper
            );
        }
        for w in &table.warnings {
            println!("  warning: {w}");
        }
        // cumulative effect of x0 with the moderator at its median
        let curve = term_response_curve(&fit, &cov, &term, median, 2, 0.95)?;
        let last = curve.last().unwrap();
        println!("  cumulative effect at lag 2: {:.4} [{:.4}, {:.4}]", last.effect, last.lower, last.upper);
    }
    Ok(())
}
