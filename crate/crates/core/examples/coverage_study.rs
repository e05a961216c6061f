//! Coverage of 95% clustered intervals on a 10 x 10 panel with year-shared noise.
//!
//! ```text
//! cargo run --release --example coverage_study
//! ```

use clusterpanel::panel::ClusterScheme;
use clusterpanel::regression::SmallSampleCorrection;
use clusterpanel::simstudy::{coverage_study, DgpConfig};

fn main() -> clusterpanel::Result<()> {
    let schemes = [ClusterScheme::Region, ClusterScheme::Year, ClusterScheme::RegionYear];
    let report = coverage_study(&DgpConfig::coverage(), &schemes, 1000, 0.95, SmallSampleCorrection::CR1, 1003)?;
    for s in &report.schemes {
        println!(
            "{:<10} coverage {:.3}  mean width {:.3}  ({} reps, {} failed)",
            s.scheme, s.empirical_coverage, s.mean_ci_width, s.replications, s.failures
        );
    }
    Ok(())
}
