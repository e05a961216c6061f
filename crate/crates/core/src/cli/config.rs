use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bootstrap::Aggregation;
use crate::error::{Error, Result};
use crate::modelselect::{Criterion, ParamCount};
use crate::panel::{ClusterScheme, ColumnMapping, ModelSpec, TermSpec};
use crate::regression::SmallSampleCorrection;
use crate::residcorr::{CorrelationGroup, DEFAULT_MIN_OVERLAP};
use crate::simstudy::DgpConfig;

/// Batch-run configuration, read from TOML. Relative paths are resolved
/// against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Set in manifests to record the command that produced them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<ClusterScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSection>,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub corr: CorrSection,
    #[serde(default)]
    pub cv: CvSection,
    #[serde(default)]
    pub ic: IcSection,
    #[serde(default)]
    pub bootstrap: BootstrapSection,
    #[serde(default)]
    pub project: ProjectSection,
    #[serde(default)]
    pub simulate: SimulateSection,
}

fn default_schemes() -> Vec<ClusterScheme> {
    vec![ClusterScheme::Region]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: PathBuf,
    pub columns: ColumnMapping,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub level: f64,
    pub correction: SmallSampleCorrection,
    /// Write cumulative response curves for every term.
    pub curves: bool,
    /// Moderator value for the curves; the moderator's overall median when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moderator_value: Option<f64>,
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection {
            level: 0.95,
            correction: SmallSampleCorrection::CR1,
            curves: true,
            moderator_value: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrSection {
    pub min_overlap: usize,
    /// Group tags that get a "different country in <tag>" row.
    pub cohort_tags: Vec<String>,
    /// Countries that get their own row.
    pub named_countries: Vec<String>,
    /// Replaces the standard rows when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<CorrelationGroup>>,
}

impl Default for CorrSection {
    fn default() -> Self {
        CorrSection {
            min_overlap: DEFAULT_MIN_OVERLAP,
            cohort_tags: Vec::new(),
            named_countries: Vec::new(),
            groups: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// Score only the configured model.
    #[default]
    None,
    /// Add each candidate to the model at every lag depth.
    Forward,
    /// Truncate and remove each term of the model.
    Backward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSection {
    pub k: usize,
    pub scan: ScanMode,
    pub candidates: Vec<TermSpec>,
}

impl Default for CvSection {
    fn default() -> Self {
        CvSection {
            k: 5,
            scan: ScanMode::None,
            candidates: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IcSection {
    pub criteria: Vec<Criterion>,
    pub adjusted: Vec<bool>,
    /// Blocks of the adjusted likelihood.
    pub block_scheme: ClusterScheme,
    pub param_count: ParamCount,
    pub scan: ScanMode,
    pub candidates: Vec<TermSpec>,
}

impl Default for IcSection {
    fn default() -> Self {
        IcSection {
            criteria: vec![Criterion::AIC, Criterion::BIC],
            adjusted: vec![false, true],
            block_scheme: ClusterScheme::CountryYear,
            param_count: ParamCount::default(),
            scan: ScanMode::None,
            candidates: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapSection {
    pub replicates: usize,
    /// Resampling scheme; the first of `schemes` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<ClusterScheme>,
    pub level: f64,
}

impl Default for BootstrapSection {
    fn default() -> Self {
        BootstrapSection {
            replicates: 1000,
            scheme: None,
            level: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub label: String,
    /// Panel CSV with the predictor paths (outcome may be empty), read with the data column mapping.
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to_year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectSection {
    pub scenarios: Vec<ScenarioSpec>,
    pub aggregation: Aggregation,
    pub levels: Vec<f64>,
    pub alpha: f64,
}

impl Default for ProjectSection {
    fn default() -> Self {
        ProjectSection {
            scenarios: Vec::new(),
            aggregation: Aggregation::Mean,
            levels: vec![0.65, 0.9],
            alpha: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    /// Write one generated panel.
    #[default]
    Generate,
    Coverage,
    Bias,
    Selection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub study: Study,
    pub dgp: DgpConfig,
    pub reps: usize,
    pub level: f64,
    pub correction: SmallSampleCorrection,
    /// Runs, lag depth and folds of the selection study.
    pub runs: usize,
    pub max_lag: usize,
    pub k: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            study: Study::Generate,
            dgp: DgpConfig::default(),
            reps: 1000,
            level: 0.95,
            correction: SmallSampleCorrection::CR1,
            runs: 50,
            max_lag: 6,
            k: 5,
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads the config and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::from_toml(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base };
        if let Some(d) = cfg.data.as_mut() {
            resolve(&base, &mut d.path);
        }
        for s in &mut cfg.project.scenarios {
            resolve(&base, &mut s.path);
        }
        if let Some(out) = cfg.out.as_mut() {
            resolve(&base, out);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::invalid(format!("cannot serialize config: {e}")))
    }
}
