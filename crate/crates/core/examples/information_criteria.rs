//! AIC and BIC with and without the within-cluster correlation adjustment.
//!
//! ```text
//! cargo run --example information_criteria
//! ```

use std::path::Path;

use clusterpanel::modelselect::{forward_scan, information_criterion, Criterion, IcScorer, ParamCount};
use clusterpanel::panel::{
    assign_clusters, build_design, load_csv, ClusterScheme, ColumnMapping, FixedEffect, ModelSpec, TermSpec,
};
use clusterpanel::regression::ols_fit;

fn main() -> clusterpanel::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/panel.csv");
    let ds = load_csv(path, &ColumnMapping::standard(&["x0", "x1"]))?;
    let spec = ModelSpec {
        terms: vec![TermSpec::new("x0").with_max_lag(2)],
        fixed_effects: vec![FixedEffect::Region],
        ..ModelSpec::default()
    };
    let design = build_design(&ds, &spec)?;
    let fit = ols_fit(&design)?;
    let blocks = assign_clusters(&design, &ds, &ClusterScheme::CountryYear)?;
    for criterion in [Criterion::AIC, Criterion::BIC] {
        for adjusted in [false, true] {
            let ic = information_criterion(&fit, &blocks, criterion, adjusted, ParamCount::default())?;
            let rho = ic.rho_hat.map_or("-".to_string(), |r| format!("{r:.4}"));
            println!(
                "{}{criterion}: {:.2}  (k = {}, log L = {:.2}, rho = {rho})",
                if adjusted { "adjusted " } else { "" },
                ic.value,
                ic.k,
                ic.log_lik
            );
        }
    }

    // does adding x1 help?
    let scorer = IcScorer {
        criterion: Criterion::BIC,
        adjusted: true,
        scheme: ClusterScheme::CountryYear,
        count: ParamCount::default(),
    };
    let scan = forward_scan(&ds, &spec, &[TermSpec::new("x1").with_max_lag(2)], &scorer)?;
    for row in &scan.rows {
        println!("{} + {} depth {:?}: delta {:+.2}", scan.scorer, row.term, row.lag_depth, row.delta);
    }
    Ok(())
}
