//! Model specification and design-matrix construction: first differences,
//! distributed lags, moderator interactions and fixed-effect dummies.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dataset::PanelDataset;
use crate::error::{Error, Result};

pub const DEFAULT_LAG_CEILING: usize = 10;

/// A predictor entering the model with lags `0..=max_lag`, optionally
/// first-differenced and interacted with a moderator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub variable: String,
    #[serde(default)]
    pub differenced: bool,
    #[serde(default)]
    pub moderator: Option<String>,
    #[serde(default)]
    pub max_lag: usize,
}

impl TermSpec {
    pub fn new(variable: impl Into<String>) -> Self {
        TermSpec {
            variable: variable.into(),
            differenced: false,
            moderator: None,
            max_lag: 0,
        }
    }

    pub fn differenced(mut self) -> Self {
        self.differenced = true;
        self
    }

    pub fn with_moderator(mut self, moderator: impl Into<String>) -> Self {
        self.moderator = Some(moderator.into());
        self
    }

    pub fn with_max_lag(mut self, max_lag: usize) -> Self {
        self.max_lag = max_lag;
        self
    }

    /// Column-label stem, e.g. `d.temp`.
    pub fn name(&self) -> String {
        if self.differenced {
            format!("d.{}", self.variable)
        } else {
            self.variable.clone()
        }
    }

    /// Identifies the term independent of its lag depth.
    pub fn key(&self) -> String {
        match &self.moderator {
            Some(m) => format!("{}*{}", self.name(), m),
            None => self.name(),
        }
    }

    fn column_count(&self) -> usize {
        (self.max_lag + 1) * if self.moderator.is_some() { 2 } else { 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedEffect {
    Region,
    Year,
}

/// Which moderator value multiplies the lagged base variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeratorAlignment {
    /// Moderator at the row's own year.
    #[default]
    Contemporaneous,
    /// Moderator at the same lag as the base variable.
    LagAligned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub terms: Vec<TermSpec>,
    #[serde(default)]
    pub fixed_effects: Vec<FixedEffect>,
    #[serde(default = "default_true")]
    pub intercept: bool,
    #[serde(default)]
    pub moderator_alignment: ModeratorAlignment,
    #[serde(default = "default_ceiling")]
    pub lag_ceiling: usize,
}

fn default_true() -> bool {
    true
}

fn default_ceiling() -> usize {
    DEFAULT_LAG_CEILING
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            terms: Vec::new(),
            fixed_effects: Vec::new(),
            intercept: true,
            moderator_alignment: ModeratorAlignment::default(),
            lag_ceiling: DEFAULT_LAG_CEILING,
        }
    }
}

impl ModelSpec {
    /// Model without terms, keeping intercept and fixed effects.
    pub fn trivial(&self) -> ModelSpec {
        ModelSpec {
            terms: Vec::new(),
            ..self.clone()
        }
    }

    pub fn with_terms(&self, terms: Vec<TermSpec>) -> ModelSpec {
        ModelSpec {
            terms,
            ..self.clone()
        }
    }

    pub fn with_fixed_effects(mut self, fe: &[FixedEffect]) -> Self {
        self.fixed_effects = fe.to_vec();
        self
    }

    fn validate(&self, dataset: &PanelDataset) -> Result<()> {
        for term in &self.terms {
            dataset.predictor_index(&term.variable)?;
            if let Some(m) = &term.moderator {
                dataset.predictor_index(m)?;
            }
            if term.max_lag > self.lag_ceiling {
                return Err(Error::InvalidSpec(format!(
                    "term `{}` has max_lag {} above the ceiling {}",
                    term.name(),
                    term.max_lag,
                    self.lag_ceiling
                )));
            }
        }
        let distinct: BTreeSet<_> = self.fixed_effects.iter().collect();
        if distinct.len() != self.fixed_effects.len() {
            return Err(Error::InvalidSpec("fixed effect listed twice".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Intercept,
    Base,
    Interaction,
    Dummy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnLabel {
    pub kind: ColumnKind,
    /// Term stem (`d.temp`), or `region`/`year` for dummies.
    pub term: String,
    /// Moderator of the owning term; set on both base and interaction columns.
    pub moderator: Option<String>,
    pub lag: Option<usize>,
    /// Fixed-effect level for dummies.
    pub level: Option<String>,
}

impl ColumnLabel {
    pub(crate) fn intercept() -> Self {
        ColumnLabel {
            kind: ColumnKind::Intercept,
            term: "(intercept)".into(),
            moderator: None,
            lag: None,
            level: None,
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            ColumnKind::Intercept => self.term.clone(),
            ColumnKind::Base => format!("{}[L{}]", self.term, self.lag.unwrap_or(0)),
            ColumnKind::Interaction => format!(
                "{}*{}[L{}]",
                self.term,
                self.moderator.as_deref().unwrap_or("?"),
                self.lag.unwrap_or(0)
            ),
            ColumnKind::Dummy => format!("{}={}", self.term, self.level.as_deref().unwrap_or("?")),
        }
    }
}

impl fmt::Display for ColumnLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Provenance of a design row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RowKey {
    pub region: Arc<str>,
    pub country: Arc<str>,
    pub year: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroppedRow {
    pub region: String,
    pub year: i32,
    pub reason: String,
}

/// Design matrix with the row and column bookkeeping needed to rebuild
/// fixed-effect dummies on arbitrary row subsets (folds, bootstrap resamples).
///
/// Columns are ordered: intercept, term columns (per term: base lags, then
/// interaction lags), then dummies (region levels, then year levels). The
/// leading non-dummy block is called structural.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    x: DMatrix<f64>,
    y: DVector<f64>,
    rows: Vec<RowKey>,
    columns: Vec<ColumnLabel>,
    n_structural: usize,
    fixed_effects: Vec<FixedEffect>,
    /// Per fixed effect, all levels present with the reference first.
    levels: Vec<Vec<String>>,
    dropped: Vec<DroppedRow>,
}

impl DesignMatrix {
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn rows(&self) -> &[RowKey] {
        &self.rows
    }

    pub fn columns(&self) -> &[ColumnLabel] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(ColumnLabel::name).collect()
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_structural(&self) -> usize {
        self.n_structural
    }

    pub fn fixed_effects(&self) -> &[FixedEffect] {
        &self.fixed_effects
    }

    /// Rows removed during construction and why.
    pub fn dropped(&self) -> &[DroppedRow] {
        &self.dropped
    }

    pub fn has_intercept_or_fe(&self) -> bool {
        self.columns.iter().any(|c| c.kind == ColumnKind::Intercept) || !self.fixed_effects.is_empty()
    }

    /// Rows `idx` (duplicates allowed) with fixed-effect dummies rebuilt from
    /// the levels present in the subset.
    pub fn subset(&self, idx: &[usize]) -> DesignMatrix {
        let structural = DMatrix::from_fn(idx.len(), self.n_structural, |i, j| self.x[(idx[i], j)]);
        let y = DVector::from_fn(idx.len(), |i, _| self.y[idx[i]]);
        let rows: Vec<RowKey> = idx.iter().map(|&i| self.rows[i].clone()).collect();
        assemble(
            structural,
            y,
            rows,
            self.columns[..self.n_structural].to_vec(),
            &self.fixed_effects,
            Vec::new(),
        )
    }

    /// Rows whose `(region, year)` is in `keys`, in original order.
    pub fn restrict_to(&self, keys: &HashSet<(Arc<str>, i32)>) -> DesignMatrix {
        let idx: Vec<usize> = (0..self.n_rows())
            .filter(|&i| keys.contains(&(self.rows[i].region.clone(), self.rows[i].year)))
            .collect();
        let mut out = self.subset(&idx);
        out.dropped = self.dropped.clone();
        out
    }

    pub fn row_keys(&self) -> HashSet<(Arc<str>, i32)> {
        self.rows.iter().map(|r| (r.region.clone(), r.year)).collect()
    }

    /// Encodes rows `idx` of `self` in the column layout of `template`, which
    /// must share the structural columns. Levels that are the template's
    /// reference or absent from it contribute nothing; the second value counts
    /// rows with at least one absent level.
    pub fn encode_like(&self, template: &DesignMatrix, idx: &[usize]) -> (DMatrix<f64>, usize) {
        assert_eq!(self.columns[..self.n_structural], template.columns[..template.n_structural]);
        let mut out = DMatrix::zeros(idx.len(), template.n_cols());
        let mut unseen = 0;
        for (i, &r) in idx.iter().enumerate() {
            for j in 0..self.n_structural {
                out[(i, j)] = self.x[(r, j)];
            }
            let mut row_unseen = false;
            let mut offset = template.n_structural;
            for (fe, levels) in template.fixed_effects.iter().zip(&template.levels) {
                let level = level_of(&self.rows[r], *fe);
                match levels.iter().position(|l| *l == level) {
                    Some(0) => {}
                    Some(k) => out[(i, offset + k - 1)] = 1.0,
                    None => row_unseen = true,
                }
                offset += levels.len().saturating_sub(1);
            }
            unseen += usize::from(row_unseen);
        }
        (out, unseen)
    }

    /// Structural block of the matrix (intercept and term columns).
    pub fn structural(&self) -> DMatrix<f64> {
        self.x.columns(0, self.n_structural).into_owned()
    }
}

fn level_of(row: &RowKey, fe: FixedEffect) -> String {
    match fe {
        FixedEffect::Region => row.region.to_string(),
        FixedEffect::Year => row.year.to_string(),
    }
}

fn fe_levels(rows: &[RowKey], fe: FixedEffect) -> Vec<String> {
    match fe {
        FixedEffect::Region => {
            let set: BTreeSet<&str> = rows.iter().map(|r| &*r.region).collect();
            set.into_iter().map(String::from).collect()
        }
        FixedEffect::Year => {
            let set: BTreeSet<i32> = rows.iter().map(|r| r.year).collect();
            set.into_iter().map(|y| y.to_string()).collect()
        }
    }
}

fn assemble(
    structural: DMatrix<f64>,
    y: DVector<f64>,
    rows: Vec<RowKey>,
    mut columns: Vec<ColumnLabel>,
    fixed_effects: &[FixedEffect],
    dropped: Vec<DroppedRow>,
) -> DesignMatrix {
    let n = rows.len();
    let n_structural = structural.ncols();
    let levels: Vec<Vec<String>> = fixed_effects.iter().map(|&fe| fe_levels(&rows, fe)).collect();
    let n_dummies: usize = levels.iter().map(|l| l.len().saturating_sub(1)).sum();

    let mut x = DMatrix::zeros(n, n_structural + n_dummies);
    x.columns_mut(0, n_structural).copy_from(&structural);
    let mut offset = n_structural;
    for (&fe, lv) in fixed_effects.iter().zip(&levels) {
        for level in lv.iter().skip(1) {
            columns.push(ColumnLabel {
                kind: ColumnKind::Dummy,
                term: match fe {
                    FixedEffect::Region => "region".into(),
                    FixedEffect::Year => "year".into(),
                },
                moderator: None,
                lag: None,
                level: Some(level.clone()),
            });
        }
        let index: HashMap<&str, usize> = lv.iter().enumerate().map(|(k, l)| (l.as_str(), k)).collect();
        for (i, row) in rows.iter().enumerate() {
            let k = index[level_of(row, fe).as_str()];
            if k > 0 {
                x[(i, offset + k - 1)] = 1.0;
            }
        }
        offset += lv.len().saturating_sub(1);
    }

    DesignMatrix {
        x,
        y,
        rows,
        columns,
        n_structural,
        fixed_effects: fixed_effects.to_vec(),
        levels,
        dropped,
    }
}

/// Builds the regression design. Rows lacking the outcome or any required
/// lagged value are dropped and recorded.
pub fn build_design(dataset: &PanelDataset, spec: &ModelSpec) -> Result<DesignMatrix> {
    build(dataset, spec, true)
}

/// As [`build_design`] but keeps rows with a missing outcome (`y` is NaN there).
/// Used for scenario projections.
pub fn build_predictor_design(dataset: &PanelDataset, spec: &ModelSpec) -> Result<DesignMatrix> {
    build(dataset, spec, false)
}

struct TermIndex {
    var: usize,
    moderator: Option<usize>,
}

fn build(dataset: &PanelDataset, spec: &ModelSpec, require_outcome: bool) -> Result<DesignMatrix> {
    spec.validate(dataset)?;
    let term_idx: Vec<TermIndex> = spec
        .terms
        .iter()
        .map(|t| {
            Ok(TermIndex {
                var: dataset.predictor_index(&t.variable)?,
                moderator: t.moderator.as_deref().map(|m| dataset.predictor_index(m)).transpose()?,
            })
        })
        .collect::<Result<_>>()?;

    let mut columns = Vec::new();
    if spec.intercept {
        columns.push(ColumnLabel::intercept());
    }
    for term in &spec.terms {
        for lag in 0..=term.max_lag {
            columns.push(ColumnLabel {
                kind: ColumnKind::Base,
                term: term.name(),
                moderator: term.moderator.clone(),
                lag: Some(lag),
                level: None,
            });
        }
        if let Some(m) = &term.moderator {
            for lag in 0..=term.max_lag {
                columns.push(ColumnLabel {
                    kind: ColumnKind::Interaction,
                    term: term.name(),
                    moderator: Some(m.clone()),
                    lag: Some(lag),
                    level: None,
                });
            }
        }
    }
    let n_structural = usize::from(spec.intercept) + spec.terms.iter().map(TermSpec::column_count).sum::<usize>();
    debug_assert_eq!(columns.len(), n_structural);

    let value = |region: &str, year: i32, j: usize| -> Option<f64> {
        dataset.find(region, year).and_then(|o| o.predictors[j])
    };

    let mut data: Vec<f64> = Vec::new();
    let mut ys = Vec::new();
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    let mut interned: Option<(Arc<str>, Arc<str>)> = None;

    'obs: for obs in dataset.observations() {
        let region = obs.region_id.as_str();
        let t = obs.year;
        let y = match obs.outcome {
            Some(y) => y,
            None if !require_outcome => f64::NAN,
            None => {
                dropped.push(DroppedRow {
                    region: region.into(),
                    year: t,
                    reason: "missing outcome".into(),
                });
                continue;
            }
        };

        let mut row = Vec::with_capacity(n_structural);
        if spec.intercept {
            row.push(1.0);
        }
        for (term, idx) in spec.terms.iter().zip(&term_idx) {
            let mut bases = Vec::with_capacity(term.max_lag + 1);
            for lag in 0..=term.max_lag {
                let ty = t - lag as i32;
                let base = if term.differenced {
                    value(region, ty, idx.var).zip(value(region, ty - 1, idx.var)).map(|(a, b)| a - b)
                } else {
                    value(region, ty, idx.var)
                };
                match base {
                    Some(b) => bases.push(b),
                    None => {
                        dropped.push(DroppedRow {
                            region: region.into(),
                            year: t,
                            reason: format!("missing {} at lag {}", term.name(), lag),
                        });
                        continue 'obs;
                    }
                }
            }
            row.extend_from_slice(&bases);
            if let Some(m) = idx.moderator {
                for (lag, b) in bases.iter().enumerate() {
                    let my = match spec.moderator_alignment {
                        ModeratorAlignment::Contemporaneous => t,
                        ModeratorAlignment::LagAligned => t - lag as i32,
                    };
                    match value(region, my, m) {
                        Some(mv) => row.push(b * mv),
                        None => {
                            dropped.push(DroppedRow {
                                region: region.into(),
                                year: t,
                                reason: format!("missing moderator {} in {}", dataset.predictor_names()[m], my),
                            });
                            continue 'obs;
                        }
                    }
                }
            }
        }

        let (r, c) = match &interned {
            Some((r, c)) if &**r == region => (r.clone(), c.clone()),
            _ => {
                let pair: (Arc<str>, Arc<str>) = (region.into(), obs.country_id.as_str().into());
                interned = Some(pair.clone());
                pair
            }
        };
        rows.push(RowKey { region: r, country: c, year: t });
        ys.push(y);
        data.extend(row);
    }

    if rows.is_empty() {
        return Err(Error::EmptyDesign);
    }
    let structural = DMatrix::from_row_slice(rows.len(), n_structural, &data);
    let y = DVector::from_vec(ys);
    Ok(assemble(structural, y, rows, columns, &spec.fixed_effects, dropped))
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, BTreeSet};

    use super::*;
    use crate::panel::dataset::PanelObservation;

    fn panel(regions: usize, years: std::ops::Range<i32>, f: impl Fn(usize, i32) -> Vec<Option<f64>>, names: &[&str]) -> PanelDataset {
        let mut obs = Vec::new();
        for r in 0..regions {
            for t in years.clone() {
                obs.push(PanelObservation {
                    region_id: format!("R{r}"),
                    country_id: "C".into(),
                    year: t,
                    outcome: Some(r as f64 + f64::from(t)),
                    predictors: f(r, t),
                    centroid: None,
                    groups: BTreeSet::new(),
                    extra: BTreeMap::new(),
                });
            }
        }
        PanelDataset::new(names.iter().map(|s| s.to_string()).collect(), obs).unwrap()
    }

    #[test]
    fn differenced_lagged_single_region() {
        let ds = panel(1, 2000..2004, |_, t| vec![Some(f64::from((t - 2000) * (t - 2000)))], &["v"]);
        let spec = ModelSpec {
            terms: vec![TermSpec::new("v").differenced().with_max_lag(1)],
            ..ModelSpec::default()
        };
        let d = build_design(&ds, &spec).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.rows()[0].year, 2002);
        assert_eq!(d.rows()[1].year, 2003);
        assert_eq!(d.column_names(), vec!["(intercept)", "d.v[L0]", "d.v[L1]"]);
        // v = 0,1,4,9 -> dv = _,1,3,5
        assert_eq!(d.x().row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 3.0, 1.0]);
        assert_eq!(d.x().row(1).iter().copied().collect::<Vec<_>>(), vec![1.0, 5.0, 3.0]);
        assert_eq!(d.dropped().len(), 2);
    }

    #[test]
    fn trivial_with_two_way_fixed_effects() {
        let ds = panel(3, 2000..2003, |_, _| vec![Some(0.0)], &["v"]);
        let spec = ModelSpec::default().with_fixed_effects(&[FixedEffect::Region, FixedEffect::Year]);
        let d = build_design(&ds, &spec).unwrap();
        assert_eq!(d.n_rows(), 9);
        assert_eq!(d.n_cols(), 5);
        assert_eq!(
            d.column_names(),
            vec!["(intercept)", "region=R1", "region=R2", "year=2001", "year=2002"]
        );
        // reference levels (R0, 2000) have all-zero dummies
        assert_eq!(d.x().row(0).iter().skip(1).sum::<f64>(), 0.0);
    }

    #[test]
    fn year_gap_makes_lag_missing() {
        let mut ds = panel(1, 2000..2005, |_, t| vec![Some(f64::from(t))], &["v"]);
        let obs: Vec<_> = ds.observations().iter().filter(|o| o.year != 2002).cloned().collect();
        ds = PanelDataset::new(vec!["v".into()], obs).unwrap();
        let spec = ModelSpec {
            terms: vec![TermSpec::new("v").differenced()],
            ..ModelSpec::default()
        };
        let d = build_design(&ds, &spec).unwrap();
        let years: Vec<i32> = d.rows().iter().map(|r| r.year).collect();
        assert_eq!(years, vec![2001, 2004]);
    }

    #[test]
    fn moderator_alignment_switch() {
        let ds = panel(1, 2000..2004, |_, t| vec![Some(f64::from(t - 2000)), Some(f64::from(10 * (t - 1999)))], &["v", "m"]);
        let term = TermSpec::new("v").with_moderator("m").with_max_lag(1);
        let mut spec = ModelSpec {
            terms: vec![term],
            intercept: false,
            ..ModelSpec::default()
        };
        let d = build_design(&ds, &spec).unwrap();
        // row 2001: v=1, v(-1)=0, m(2001)=20
        assert_eq!(d.x().row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 20.0, 0.0]);
        spec.moderator_alignment = ModeratorAlignment::LagAligned;
        let d = build_design(&ds, &spec).unwrap();
        // row 2002: v=2, v(-1)=1, m(2002)=30, m(2001)=20
        assert_eq!(d.x().row(1).iter().copied().collect::<Vec<_>>(), vec![2.0, 1.0, 60.0, 20.0]);
    }

    #[test]
    fn rejects_unknown_variable_and_lag_ceiling() {
        let ds = panel(1, 2000..2004, |_, _| vec![Some(0.0)], &["v"]);
        let bad = ModelSpec {
            terms: vec![TermSpec::new("w")],
            ..ModelSpec::default()
        };
        assert!(matches!(build_design(&ds, &bad), Err(Error::UnknownPredictor(_))));
        let deep = ModelSpec {
            terms: vec![TermSpec::new("v").with_max_lag(11)],
            ..ModelSpec::default()
        };
        assert!(matches!(build_design(&ds, &deep), Err(Error::InvalidSpec(_))));
        let too_deep = ModelSpec {
            terms: vec![TermSpec::new("v").with_max_lag(8)],
            ..ModelSpec::default()
        };
        assert!(matches!(build_design(&ds, &too_deep), Err(Error::EmptyDesign)));
    }

    #[test]
    fn subset_rebuilds_dummies_and_encode_like_counts_unseen() {
        let ds = panel(3, 2000..2002, |_, _| vec![Some(0.0)], &["v"]);
        let spec = ModelSpec::default().with_fixed_effects(&[FixedEffect::Region]);
        let d = build_design(&ds, &spec).unwrap();
        // rows 2..6 are R1 and R2; R1 becomes the reference
        let sub = d.subset(&[2, 3, 4, 5, 4]);
        assert_eq!(sub.column_names(), vec!["(intercept)", "region=R2"]);
        assert_eq!(sub.n_rows(), 5);
        let (enc, unseen) = d.encode_like(&sub, &[0, 2, 4]);
        assert_eq!(unseen, 1);
        assert_eq!(enc.column(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 1.0]);
    }
}
