//! Clustered K-fold cross-validation, first for a single model under several
//! fold schemes, then as a backward scan over lag depths.
//!
//! ```text
//! cargo run --example cross_validation
//! ```

use std::path::Path;

use clusterpanel::modelselect::{backward_scan, cv_loss, CvScorer};
use clusterpanel::panel::{load_csv, ClusterScheme, ColumnMapping, FixedEffect, ModelSpec, TermSpec};

fn main() -> clusterpanel::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/panel.csv");
    let ds = load_csv(path, &ColumnMapping::standard(&["x0", "x1"]))?;
    let spec = ModelSpec {
        terms: vec![TermSpec::new("x0").with_max_lag(3)],
        fixed_effects: vec![FixedEffect::Year],
        ..ModelSpec::default()
    };

    // year folds hold out whole years, so their year effects are unseen
    for scheme in [ClusterScheme::Region, ClusterScheme::Country, ClusterScheme::Year] {
        let full = cv_loss(&ds, &spec, &scheme, 5, 1)?;
        let trivial = cv_loss(&ds, &spec.trivial(), &scheme, 5, 1)?;
        println!(
            "{scheme:<8} full {:.5}  trivial {:.5}  unseen levels {}",
            full.loss, trivial.loss, full.unseen_levels
        );
    }

    let scorer = CvScorer {
        scheme: ClusterScheme::Country,
        k: 5,
        seed: 1,
    };
    let scan = backward_scan(&ds, &spec, &scorer)?;
    println!("\nbackward scan, {} (reference {:.5})", scan.scorer, scan.reference.value);
    for row in &scan.rows {
        let depth = row.lag_depth.map_or("removed".to_string(), |d| d.to_string());
        println!("  {:<8} depth {:<8} loss {:.5}  delta {:+.5}", row.term, depth, row.score.value, row.delta);
    }
    Ok(())
}
