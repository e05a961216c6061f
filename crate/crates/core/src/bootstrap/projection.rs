use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::resample::{percentile_of, BootstrapSample};
use crate::error::{Error, Result};
use crate::panel::{build_predictor_design, ColumnLabel, ModelSpec, PanelDataset};

/// Structural design rows of one scenario, built from predictor paths.
#[derive(Debug, Clone)]
pub struct ScenarioPath {
    pub label: String,
    pub columns: Vec<ColumnLabel>,
    pub regions: Vec<String>,
    pub years: Vec<i32>,
    pub x: DMatrix<f64>,
}

impl ScenarioPath {
    /// Rows of `dataset` with all required lags, restricted to `years` when given.
    /// Outcomes may be missing.
    pub fn from_dataset(
        label: impl Into<String>,
        dataset: &PanelDataset,
        spec: &ModelSpec,
        years: Option<(i32, i32)>,
    ) -> Result<Self> {
        let design = build_predictor_design(dataset, spec)?;
        let keep: Vec<usize> = (0..design.n_rows())
            .filter(|&i| years.is_none_or(|(a, b)| (a..=b).contains(&design.rows()[i].year)))
            .collect();
        if keep.is_empty() {
            return Err(Error::invalid("scenario has no rows in the requested years"));
        }
        let structural = design.structural();
        Ok(ScenarioPath {
            label: label.into(),
            columns: design.columns()[..design.n_structural()].to_vec(),
            regions: keep.iter().map(|&i| design.rows()[i].region.to_string()).collect(),
            years: keep.iter().map(|&i| design.rows()[i].year).collect(),
            x: structural.select_rows(keep.iter()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Mean,
    /// Weights per region; every projected region needs one.
    WeightedMean(BTreeMap<String, f64>),
}

/// Aggregated linear prediction per draw (rows) and year (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub label: String,
    pub years: Vec<i32>,
    pub values: DMatrix<f64>,
}

/// `Σ_r w_r x_{r,y}ᵀ β*_b / Σ_r w_r` for every draw `b` and year `y`.
pub fn project_scenarios(sample: &BootstrapSample, path: &ScenarioPath, aggregation: &Aggregation) -> Result<Projection> {
    let fitted = sample.column_names();
    let given: Vec<String> = path.columns.iter().map(ColumnLabel::name).collect();
    if fitted != given {
        return Err(Error::ColumnMismatch {
            missing: fitted.iter().filter(|c| !given.contains(c)).cloned().collect(),
            unexpected: given.iter().filter(|c| !fitted.contains(c)).cloned().collect(),
        });
    }
    let weights: Vec<f64> = match aggregation {
        Aggregation::Mean => vec![1.0; path.regions.len()],
        Aggregation::WeightedMean(w) => path
            .regions
            .iter()
            .map(|r| {
                w.get(r)
                    .copied()
                    .filter(|v| v.is_finite() && *v >= 0.0)
                    .ok_or_else(|| Error::invalid(format!("no valid weight for region `{r}`")))
            })
            .collect::<Result<_>>()?,
    };
    let years: Vec<i32> = {
        let mut y = path.years.clone();
        y.sort_unstable();
        y.dedup();
        y
    };
    // per-year weighted averages of design rows, so each draw is one dot product
    let k = path.x.ncols();
    let mut avg = DMatrix::<f64>::zeros(k, years.len());
    let mut total = vec![0.0; years.len()];
    for (i, year) in path.years.iter().enumerate() {
        let t = years.binary_search(year).expect("year present");
        total[t] += weights[i];
        for j in 0..k {
            avg[(j, t)] += weights[i] * path.x[(i, j)];
        }
    }
    for (t, w) in total.iter().enumerate() {
        if !(*w > 0.0) {
            return Err(Error::invalid(format!("weights sum to zero in {}", years[t])));
        }
        avg.column_mut(t).scale_mut(1.0 / w);
    }
    Ok(Projection {
        label: path.label.clone(),
        years,
        values: &sample.draws * avg,
    })
}

/// Earliest year whose paired difference `a − b` has a two-sided `1 − alpha`
/// percentile interval excluding zero.
pub fn first_discernible_year(a: &Projection, b: &Projection, alpha: f64) -> Result<Option<i32>> {
    if a.years != b.years || a.values.shape() != b.values.shape() {
        return Err(Error::ShapeMismatch(format!(
            "projections `{}` and `{}` differ in years or draws",
            a.label, b.label
        )));
    }
    for (t, year) in a.years.iter().enumerate() {
        let d: DVector<f64> = a.values.column(t) - b.values.column(t);
        let iv = percentile_of(d.as_slice(), 1.0 - alpha)?;
        if iv.lower > 0.0 || iv.upper < 0.0 {
            return Ok(Some(*year));
        }
    }
    Ok(None)
}

/// Columns: scenario, year, level, median, lower, upper.
pub fn write_projection_csv<W: Write>(writer: W, projections: &[Projection], levels: &[f64]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["scenario", "year", "level", "median", "lower", "upper"])?;
    for p in projections {
        for (t, year) in p.years.iter().enumerate() {
            for level in levels {
                let iv = percentile_of(p.values.column(t).as_slice(), *level)?;
                wtr.write_record([
                    p.label.clone(),
                    year.to_string(),
                    level.to_string(),
                    iv.median.to_string(),
                    iv.lower.to_string(),
                    iv.upper.to_string(),
                ])?;
            }
        }
    }
    wtr.flush().map_err(|e| Error::io("<projection csv>", e))?;
    Ok(())
}

/// Columns: replicate, then one per coefficient.
pub fn write_draws_csv<W: Write>(writer: W, sample: &BootstrapSample) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["draw".to_string()];
    header.extend(sample.column_names());
    wtr.write_record(&header)?;
    for (i, row) in sample.draws.row_iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<draws csv>", e))?;
    Ok(())
}
