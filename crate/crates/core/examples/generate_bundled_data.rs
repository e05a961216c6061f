//! Regenerates the synthetic panel and scenario files under `data/`.
//!
//! ```text
//! cargo run --example generate_bundled_data
//! ```

use std::path::Path;

use clusterpanel::panel::{save_csv, ColumnMapping, PanelDataset, PanelObservation};
use clusterpanel::simstudy::{generate_panel, DgpConfig};

fn bundled_config() -> DgpConfig {
    DgpConfig {
        n_regions: 60,
        n_years: 30,
        beta_true: 0.5,
        predictor_shared_weight: 0.5,
        predictor_spatial_weight: 0.3,
        noise_shared_weight: 0.65,
        regions_per_country: Some(6),
        n_predictors: 2,
        start_year: 1990,
        coordinates: true,
        bloc_countries: 4,
        ..DgpConfig::default()
    }
}

/// Predictor paths for 2015..=2060 without outcomes: the last observed
/// value of each region plus a linear drift from 2031 on.
fn scenario(panel: &PanelDataset, drift: f64) -> clusterpanel::Result<PanelDataset> {
    let last_year = panel.years().into_iter().max().unwrap();
    let mut obs = Vec::new();
    for region in panel.regions() {
        let last = panel.find(region, last_year).unwrap();
        for year in 2015..=2060 {
            let step = (year - 2030).max(0) as f64;
            obs.push(PanelObservation {
                year,
                outcome: None,
                predictors: vec![
                    Some(last.predictors[0].unwrap() + drift * step),
                    last.predictors[1],
                ],
                ..last.clone()
            });
        }
    }
    PanelDataset::new(panel.predictor_names().to_vec(), obs)
}

fn main() -> clusterpanel::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir).map_err(|e| clusterpanel::Error::InvalidArgument(e.to_string()))?;
    let mapping = ColumnMapping::standard(&["x0", "x1"]);
    let panel = generate_panel(&bundled_config(), 20240601)?;
    save_csv(&panel, dir.join("panel.csv"), &mapping)?;
    save_csv(&scenario(&panel, 0.01)?, dir.join("scenario_low.csv"), &mapping)?;
    save_csv(&scenario(&panel, 0.08)?, dir.join("scenario_high.csv"), &mapping)?;
    println!("wrote {} observations to {}", panel.len(), dir.display());
    Ok(())
}
