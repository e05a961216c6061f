//! Mean clustered variance of the slope against its Monte Carlo variance
//! under iid noise.
//!
//! ```text
//! cargo run --release --example bias_study
//! ```

use clusterpanel::panel::ClusterScheme;
use clusterpanel::simstudy::{bias_study, DgpConfig};

fn main() -> clusterpanel::Result<()> {
    let cfg = DgpConfig {
        noise_shared_weight: 0.0,
        ..DgpConfig::default()
    };
    for scheme in [ClusterScheme::Year, ClusterScheme::Region, ClusterScheme::RegionYear] {
        let r = bias_study(&cfg, &scheme, 1000, 1004)?;
        println!(
            "{:<10} CR0/empirical {:.3}  CR1/empirical {:.3}  (empirical variance {:.5})",
            r.scheme, r.ratio_cr0, r.ratio_cr1, r.empirical_variance
        );
    }
    Ok(())
}
