//! Pairs-cluster bootstrap compared with clustered standard errors.
//!
//! ```text
//! cargo run --release --example block_bootstrap
//! ```

use std::path::Path;

use clusterpanel::bootstrap::{block_bootstrap, percentile_interval};
use clusterpanel::panel::{
    assign_clusters, build_design, load_csv, ClusterScheme, ColumnMapping, FixedEffect, ModelSpec, TermSpec,
};
use clusterpanel::regression::{clustered_cov, ols_fit, SmallSampleCorrection};

fn main() -> clusterpanel::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/panel.csv");
    let ds = load_csv(path, &ColumnMapping::standard(&["x0", "x1"]))?;
    let spec = ModelSpec {
        terms: vec![TermSpec::new("x0").with_max_lag(1)],
        fixed_effects: vec![FixedEffect::Region],
        ..ModelSpec::default()
    };
    let scheme = ClusterScheme::CountryYear;

    let design = build_design(&ds, &spec)?;
    let fit = ols_fit(&design)?;
    let clusters = assign_clusters(&design, &ds, &scheme)?;
    let se = clustered_cov(&fit, &design, &clusters, SmallSampleCorrection::CR1)?.std_errors();

    let sample = block_bootstrap(&ds, &spec, &scheme, 1000, 42)?;
    println!("{} draws, {} failed refits", sample.n_draws(), sample.failed_refits);
    let sd = sample.std_devs();
    for (j, name) in sample.column_names().iter().enumerate() {
        let mut contrast = vec![0.0; sd.len()];
        contrast[j] = 1.0;
        let iv = percentile_interval(&sample, &contrast, 0.9)?;
        println!(
            "{name:<12} bootstrap sd {:.4}  clustered se {:.4}  90% [{:.4}, {:.4}]",
            sd[j], se[j], iv.lower, iv.upper
        );
    }
    Ok(())
}
