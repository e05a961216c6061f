use std::collections::HashSet;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::cv::cv_on_design;
use super::ic::{information_criterion, Criterion, ParamCount};
use crate::error::{Error, Result};
use crate::panel::{assign_clusters, build_design, ClusterScheme, DesignMatrix, ModelSpec, PanelDataset, TermSpec};
use crate::regression::ols_fit_dropping_collinear;

/// Score of one fitted model; lower is better.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelScore {
    pub value: f64,
    pub collinear: bool,
    pub unseen_levels: usize,
    pub rho_hat: Option<f64>,
}

/// Scores a model on a fixed design. Collinear columns are dropped and flagged.
pub trait ModelScorer: Sync {
    fn label(&self) -> String;
    fn score(&self, dataset: &PanelDataset, design: &DesignMatrix) -> Result<ModelScore>;
}

#[derive(Debug, Clone)]
pub struct CvScorer {
    pub scheme: ClusterScheme,
    pub k: usize,
    pub seed: u64,
}

impl ModelScorer for CvScorer {
    fn label(&self) -> String {
        format!("cv:{}", self.scheme)
    }

    fn score(&self, dataset: &PanelDataset, design: &DesignMatrix) -> Result<ModelScore> {
        let cv = cv_on_design(dataset, design, &self.scheme, self.k, self.seed, true)?;
        Ok(ModelScore {
            value: cv.loss,
            collinear: cv.collinear(),
            unseen_levels: cv.unseen_levels,
            rho_hat: None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct IcScorer {
    pub criterion: Criterion,
    pub adjusted: bool,
    /// Blocks for the adjusted likelihood.
    pub scheme: ClusterScheme,
    pub count: ParamCount,
}

impl ModelScorer for IcScorer {
    fn label(&self) -> String {
        let adj = if self.adjusted { "adjusted " } else { "" };
        format!("{adj}{}", self.criterion)
    }

    fn score(&self, dataset: &PanelDataset, design: &DesignMatrix) -> Result<ModelScore> {
        let fit = ols_fit_dropping_collinear(design)?;
        let clusters = assign_clusters(design, dataset, &self.scheme)?;
        let ic = information_criterion(&fit, &clusters, self.criterion, self.adjusted, self.count)?;
        Ok(ModelScore {
            value: ic.value,
            collinear: fit.has_collinear(),
            unseen_levels: 0,
            rho_hat: ic.rho_hat,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    /// Term key, or `(all)` for removing every term.
    pub term: String,
    /// Highest lag kept; `None` when the term is removed.
    pub lag_depth: Option<usize>,
    pub score: ModelScore,
    /// Score minus the reference model's score.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scan {
    pub scorer: String,
    pub reference: ModelScore,
    pub n_rows: usize,
    pub rows: Vec<ScanRow>,
}

impl Scan {
    /// The row with the lowest score, if it beats the reference.
    pub fn best(&self) -> Option<&ScanRow> {
        self.rows
            .iter()
            .filter(|r| r.delta < 0.0)
            .min_by(|a, b| a.score.value.total_cmp(&b.score.value))
    }
}

fn common_rows(dataset: &PanelDataset, union: &ModelSpec) -> Result<HashSet<(Arc<str>, i32)>> {
    Ok(build_design(dataset, union)?.row_keys())
}

fn score_spec(
    dataset: &PanelDataset,
    spec: &ModelSpec,
    rows: &HashSet<(Arc<str>, i32)>,
    scorer: &dyn ModelScorer,
) -> Result<ModelScore> {
    let design = build_design(dataset, spec)?.restrict_to(rows);
    if design.n_rows() != rows.len() {
        return Err(Error::invalid("model does not cover the common sample"));
    }
    scorer.score(dataset, &design)
}

fn run(
    dataset: &PanelDataset,
    reference: &ModelSpec,
    union: &ModelSpec,
    variants: Vec<(String, Option<usize>, ModelSpec)>,
    scorer: &dyn ModelScorer,
) -> Result<Scan> {
    let rows = common_rows(dataset, union)?;
    let reference = score_spec(dataset, reference, &rows, scorer)?;
    let scored = variants
        .into_par_iter()
        .map(|(term, lag_depth, spec)| {
            let score = score_spec(dataset, &spec, &rows, scorer)?;
            Ok(ScanRow {
                term,
                lag_depth,
                delta: score.value - reference.value,
                score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Scan {
        scorer: scorer.label(),
        reference,
        n_rows: rows.len(),
        rows: scored,
    })
}

/// Adds each candidate to `base` at every lag depth `0..=max_lag`. All
/// models are compared on the rows available to the largest one.
pub fn forward_scan(dataset: &PanelDataset, base: &ModelSpec, candidates: &[TermSpec], scorer: &dyn ModelScorer) -> Result<Scan> {
    let mut union = base.clone();
    union.terms.extend(candidates.iter().cloned());
    let mut variants = Vec::new();
    for c in candidates {
        for depth in 0..=c.max_lag {
            let mut spec = base.clone();
            spec.terms.push(c.clone().with_max_lag(depth));
            variants.push((c.key(), Some(depth), spec));
        }
    }
    run(dataset, base, &union, variants, scorer)
}

/// Truncates each term of `full` to every shorter lag depth and then removes
/// it; finally removes all terms. Deltas are relative to `full`.
pub fn backward_scan(dataset: &PanelDataset, full: &ModelSpec, scorer: &dyn ModelScorer) -> Result<Scan> {
    let mut variants = Vec::new();
    for (i, term) in full.terms.iter().enumerate() {
        for depth in (0..term.max_lag).rev() {
            let mut spec = full.clone();
            spec.terms[i] = term.clone().with_max_lag(depth);
            variants.push((term.key(), Some(depth), spec));
        }
        let mut spec = full.clone();
        spec.terms.remove(i);
        variants.push((term.key(), None, spec));
    }
    if full.terms.len() > 1 {
        variants.push(("(all)".to_string(), None, full.trivial()));
    }
    run(dataset, full, full, variants, scorer)
}

/// Columns: term, lag_depth, scorer, value, delta, collinear, unseen_levels, rho_hat.
pub fn write_scan_csv<W: Write>(writer: W, scans: &[Scan]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["term", "lag_depth", "scorer", "value", "delta", "collinear", "unseen_levels", "rho_hat"])?;
    for scan in scans {
        wtr.write_record([
            "(reference)".to_string(),
            String::new(),
            scan.scorer.clone(),
            scan.reference.value.to_string(),
            "0".into(),
            scan.reference.collinear.to_string(),
            scan.reference.unseen_levels.to_string(),
            scan.reference.rho_hat.map(|r| r.to_string()).unwrap_or_else(|| "NA".into()),
        ])?;
        for row in &scan.rows {
            wtr.write_record([
                row.term.clone(),
                row.lag_depth.map(|d| d.to_string()).unwrap_or_else(|| "removed".into()),
                scan.scorer.clone(),
                row.score.value.to_string(),
                row.delta.to_string(),
                row.score.collinear.to_string(),
                row.score.unseen_levels.to_string(),
                row.score.rho_hat.map(|r| r.to_string()).unwrap_or_else(|| "NA".into()),
            ])?;
        }
    }
    wtr.flush().map_err(|e| Error::io("<scan csv>", e))?;
    Ok(())
}
