//! Spurious-predictor benchmark: how often does each selection method keep a
//! predictor that has no effect on the outcome?
//!
//! ```text
//! cargo run --release --example model_selection_benchmark [runs]
//! ```

use clusterpanel::simstudy::{selection_study, DgpConfig};

fn main() -> clusterpanel::Result<()> {
    let runs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let counts = selection_study(&DgpConfig::spurious(), runs, 6, 5, 1006)?;
    println!("{:<14} {:>12} {:>16}", "method", "trivial", "nontrivial any");
    for c in &counts {
        println!(
            "{:<14} {:>11.0}% {:>15.0}%",
            c.method,
            100.0 * c.trivial_share(),
            100.0 * c.nontrivial_any_depth as f64 / c.runs as f64
        );
    }
    Ok(())
}
