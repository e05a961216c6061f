use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{RunConfig, ScanMode, Study};
use crate::bootstrap::{
    block_bootstrap, first_discernible_year, percentile_interval, project_scenarios, write_draws_csv,
    write_projection_csv, ScenarioPath,
};
use crate::error::{Error, Result};
use crate::modelselect::{
    backward_scan, cv_loss, forward_scan, information_criterion, write_scan_csv, CvScorer, IcScorer, ModelScorer, Scan,
};
use crate::panel::{assign_clusters, build_design, load_csv, save_csv, ColumnMapping, PanelDataset};
use crate::regression::{clustered_cov, ols_fit, term_response_curve, write_curves_csv, CoefficientTable};
use crate::residcorr::{correlation_table, default_groups, write_table_csv, ResidualPanel};
use crate::simstudy::{bias_study, coverage_study, generate_panel, selection_study};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Fit,
    Corr,
    Cv,
    Ic,
    Bootstrap,
    Project,
    Simulate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fit => "fit",
            Command::Corr => "corr",
            Command::Cv => "cv",
            Command::Ic => "ic",
            Command::Bootstrap => "bootstrap",
            Command::Project => "project",
            Command::Simulate => "simulate",
        }
    }
}

struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(BufWriter::new(file))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(self.dir.join(name), e))
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }
}

fn load_data(cfg: &RunConfig) -> Result<(PanelDataset, &ColumnMapping)> {
    let data = cfg
        .data
        .as_ref()
        .ok_or_else(|| Error::invalid("this command needs a [data] section"))?;
    Ok((load_csv(&data.path, &data.columns)?, &data.columns))
}

/// Runs `command` and writes its outputs plus `manifest.toml` into `out`.
/// Returns the written paths.
pub fn execute(command: Command, cfg: &RunConfig, seed: u64, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut outputs = Outputs {
        dir: out.to_path_buf(),
        written: Vec::new(),
    };
    match command {
        Command::Fit => fit(cfg, &mut outputs)?,
        Command::Corr => corr(cfg, &mut outputs)?,
        Command::Cv => cv(cfg, seed, &mut outputs)?,
        Command::Ic => ic(cfg, &mut outputs)?,
        Command::Bootstrap => bootstrap(cfg, seed, &mut outputs)?,
        Command::Project => project(cfg, seed, &mut outputs)?,
        Command::Simulate => simulate(cfg, seed, &mut outputs)?,
    }
    let mut manifest = cfg.clone();
    manifest.command = Some(command.name().to_string());
    manifest.seed = Some(seed);
    manifest.out = Some(std::path::absolute(out).map_err(|e| Error::io(out, e))?);
    if let Some(d) = manifest.data.as_mut() {
        d.path = std::path::absolute(&d.path).map_err(|e| Error::io(&d.path, e))?;
    }
    for s in &mut manifest.project.scenarios {
        s.path = std::path::absolute(&s.path).map_err(|e| Error::io(&s.path, e))?;
    }
    outputs.text("manifest.toml", &manifest.to_toml()?)?;
    Ok(outputs.written)
}

#[derive(Serialize)]
struct FitReport {
    n: usize,
    dropped_rows: usize,
    columns: Vec<String>,
    tables: Vec<CoefficientTable>,
}

fn fit(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let (ds, _) = load_data(cfg)?;
    let design = build_design(&ds, &cfg.model)?;
    let fit = ols_fit(&design)?;
    let mut tables = Vec::new();
    let mut curves = Vec::new();
    for scheme in &cfg.schemes {
        let clusters = assign_clusters(&design, &ds, scheme)?;
        let cov = clustered_cov(&fit, &design, &clusters, cfg.fit.correction)?;
        for w in &cov.warnings {
            log::warn!("{scheme}: {w}");
        }
        tables.push(CoefficientTable::new(&fit, &cov, cfg.fit.level)?);
        if cfg.fit.curves {
            for term in &cfg.model.terms {
                let m = match (&term.moderator, cfg.fit.moderator_value) {
                    (None, _) => 0.0,
                    (Some(_), Some(v)) => v,
                    (Some(name), None) => ds.predictor_median(name)?,
                };
                let points = term_response_curve(&fit, &cov, term, m, term.max_lag, cfg.fit.level)?;
                curves.push((scheme.to_string(), points));
            }
        }
    }
    for w in &fit.warnings {
        log::warn!("{w}");
    }
    out.json(
        "fit.json",
        &FitReport {
            n: fit.n,
            dropped_rows: design.dropped().len(),
            columns: fit.column_names(),
            tables,
        },
    )?;
    if cfg.fit.curves && !cfg.model.terms.is_empty() {
        write_curves_csv(out.create("curves.csv")?, &curves)?;
    }
    Ok(())
}

fn corr(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let (ds, _) = load_data(cfg)?;
    let design = build_design(&ds, &cfg.model)?;
    let fit = ols_fit(&design)?;
    let panel = ResidualPanel::from_fit(&fit, &design, &ds)?;
    let groups = match &cfg.corr.groups {
        Some(g) => g.clone(),
        None => {
            let tags: Vec<&str> = cfg.corr.cohort_tags.iter().map(String::as_str).collect();
            let named: Vec<&str> = cfg.corr.named_countries.iter().map(String::as_str).collect();
            default_groups(&tags, &named)
        }
    };
    let rows = correlation_table(&panel, &groups, cfg.corr.min_overlap)?;
    for r in &rows {
        log::info!("{r}");
    }
    write_table_csv(out.create("correlations.csv")?, &rows)
}

fn run_scan(
    ds: &PanelDataset,
    cfg: &RunConfig,
    mode: ScanMode,
    candidates: &[crate::panel::TermSpec],
    scorer: &dyn ModelScorer,
) -> Result<Scan> {
    match mode {
        ScanMode::Forward => forward_scan(ds, &cfg.model, candidates, scorer),
        ScanMode::Backward => backward_scan(ds, &cfg.model, scorer),
        ScanMode::None => forward_scan(ds, &cfg.model, &[], scorer),
    }
}

fn cv(cfg: &RunConfig, seed: u64, out: &mut Outputs) -> Result<()> {
    let (ds, _) = load_data(cfg)?;
    if cfg.cv.scan == ScanMode::None {
        let mut w = csv::Writer::from_writer(out.create("cv.csv")?);
        w.write_record(["scheme", "k", "loss", "unseen_levels"])?;
        for scheme in &cfg.schemes {
            let r = cv_loss(&ds, &cfg.model, scheme, cfg.cv.k, seed)?;
            w.write_record([scheme.to_string(), cfg.cv.k.to_string(), r.loss.to_string(), r.unseen_levels.to_string()])?;
        }
        return w.flush().map_err(|e| Error::io("cv.csv", e));
    }
    let scans = cfg
        .schemes
        .iter()
        .map(|scheme| {
            let scorer = CvScorer {
                scheme: scheme.clone(),
                k: cfg.cv.k,
                seed,
            };
            run_scan(&ds, cfg, cfg.cv.scan, &cfg.cv.candidates, &scorer)
        })
        .collect::<Result<Vec<_>>>()?;
    write_scan_csv(out.create("cv_scan.csv")?, &scans)
}

fn ic(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let (ds, _) = load_data(cfg)?;
    let scorers: Vec<IcScorer> = cfg
        .ic
        .adjusted
        .iter()
        .flat_map(|&adjusted| {
            cfg.ic.criteria.iter().map(move |&criterion| IcScorer {
                criterion,
                adjusted,
                scheme: cfg.ic.block_scheme.clone(),
                count: cfg.ic.param_count,
            })
        })
        .collect();
    if cfg.ic.scan == ScanMode::None {
        let design = build_design(&ds, &cfg.model)?;
        let fit = ols_fit(&design)?;
        let clusters = assign_clusters(&design, &ds, &cfg.ic.block_scheme)?;
        let results = scorers
            .iter()
            .map(|s| {
                let r = information_criterion(&fit, &clusters, s.criterion, s.adjusted, s.count)?;
                for w in &r.warnings {
                    log::warn!("{}: {w}", s.label());
                }
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut w = csv::Writer::from_writer(out.create("ic.csv")?);
        w.write_record(["criterion", "adjusted", "value", "k", "log_lik", "rho_hat", "sigma2", "n"])?;
        for r in results {
            w.write_record([
                r.criterion.to_string(),
                r.adjusted.to_string(),
                r.value.to_string(),
                r.k.to_string(),
                r.log_lik.to_string(),
                r.rho_hat.map(|v| v.to_string()).unwrap_or_else(|| "NA".into()),
                r.sigma2.to_string(),
                r.n.to_string(),
            ])?;
        }
        return w.flush().map_err(|e| Error::io("ic.csv", e));
    }
    let scans = scorers
        .iter()
        .map(|s| run_scan(&ds, cfg, cfg.ic.scan, &cfg.ic.candidates, s))
        .collect::<Result<Vec<_>>>()?;
    write_scan_csv(out.create("ic_scan.csv")?, &scans)
}

fn bootstrap_sample(cfg: &RunConfig, ds: &PanelDataset, seed: u64) -> Result<crate::bootstrap::BootstrapSample> {
    let scheme = match &cfg.bootstrap.scheme {
        Some(s) => s.clone(),
        None => cfg
            .schemes
            .first()
            .cloned()
            .ok_or_else(|| Error::invalid("no clustering scheme configured"))?,
    };
    let sample = block_bootstrap(ds, &cfg.model, &scheme, cfg.bootstrap.replicates, seed)?;
    if sample.failed_refits > 0 {
        log::warn!("{} of {} bootstrap refits failed", sample.failed_refits, sample.replicates);
    }
    Ok(sample)
}

fn bootstrap(cfg: &RunConfig, seed: u64, out: &mut Outputs) -> Result<()> {
    let (ds, _) = load_data(cfg)?;
    let sample = bootstrap_sample(cfg, &ds, seed)?;
    write_draws_csv(out.create("bootstrap_draws.csv")?, &sample)?;
    let mut w = csv::Writer::from_writer(out.create("bootstrap_summary.csv")?);
    w.write_record(["column", "estimate", "sd", "median", "lower", "upper", "level", "draws", "failed"])?;
    let sds = sample.std_devs();
    for (j, name) in sample.column_names().into_iter().enumerate() {
        let mut c = vec![0.0; sample.columns.len()];
        c[j] = 1.0;
        let iv = percentile_interval(&sample, &c, cfg.bootstrap.level)?;
        w.write_record([
            name,
            sample.point[j].to_string(),
            sds[j].to_string(),
            iv.median.to_string(),
            iv.lower.to_string(),
            iv.upper.to_string(),
            cfg.bootstrap.level.to_string(),
            sample.n_draws().to_string(),
            sample.failed_refits.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("bootstrap_summary.csv", e))
}

fn project(cfg: &RunConfig, seed: u64, out: &mut Outputs) -> Result<()> {
    let (ds, mapping) = load_data(cfg)?;
    if cfg.project.scenarios.is_empty() {
        return Err(Error::invalid("no scenarios configured"));
    }
    let sample = bootstrap_sample(cfg, &ds, seed)?;
    let projections = cfg
        .project
        .scenarios
        .iter()
        .map(|s| {
            let scen = load_csv(&s.path, mapping)?;
            let years = match (s.from_year, s.to_year) {
                (None, None) => None,
                (a, b) => Some((a.unwrap_or(i32::MIN), b.unwrap_or(i32::MAX))),
            };
            let path = ScenarioPath::from_dataset(&s.label, &scen, &cfg.model, years)?;
            project_scenarios(&sample, &path, &cfg.project.aggregation)
        })
        .collect::<Result<Vec<_>>>()?;
    write_projection_csv(out.create("projection.csv")?, &projections, &cfg.project.levels)?;
    let mut w = csv::Writer::from_writer(out.create("discernible.csv")?);
    w.write_record(["scenario_a", "scenario_b", "alpha", "first_year"])?;
    for (i, a) in projections.iter().enumerate() {
        for b in &projections[i + 1..] {
            let year = first_discernible_year(a, b, cfg.project.alpha)?;
            w.write_record([
                a.label.clone(),
                b.label.clone(),
                cfg.project.alpha.to_string(),
                year.map(|y| y.to_string()).unwrap_or_else(|| "none".into()),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("discernible.csv", e))
}

fn simulate(cfg: &RunConfig, seed: u64, out: &mut Outputs) -> Result<()> {
    let sim = &cfg.simulate;
    match sim.study {
        Study::Generate => {
            let ds = generate_panel(&sim.dgp, seed)?;
            let names: Vec<String> = ds.predictor_names().to_vec();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let mut mapping = ColumnMapping::standard(&refs);
            if !sim.dgp.coordinates {
                mapping.lat = None;
                mapping.lon = None;
            }
            let path = out.dir.join("panel.csv");
            save_csv(&ds, &path, &mapping)?;
            out.written.push(path);
            Ok(())
        }
        Study::Coverage => {
            let r = coverage_study(&sim.dgp, &cfg.schemes, sim.reps, sim.level, sim.correction, seed)?;
            let mut w = csv::Writer::from_writer(out.create("coverage.csv")?);
            w.write_record(["scheme", "nominal_level", "coverage", "mean_ci_width", "replications", "failures"])?;
            for s in &r.schemes {
                w.write_record([
                    s.scheme.clone(),
                    s.nominal_level.to_string(),
                    s.empirical_coverage.to_string(),
                    s.mean_ci_width.to_string(),
                    s.replications.to_string(),
                    s.failures.to_string(),
                ])?;
            }
            w.flush().map_err(|e| Error::io("coverage.csv", e))?;
            out.json("coverage.json", &r)
        }
        Study::Bias => {
            let reports = cfg
                .schemes
                .iter()
                .map(|s| bias_study(&sim.dgp, s, sim.reps, seed))
                .collect::<Result<Vec<_>>>()?;
            out.json("bias.json", &reports)
        }
        Study::Selection => {
            let counts = selection_study(&sim.dgp, sim.runs, sim.max_lag, sim.k, seed)?;
            let mut w = csv::Writer::from_writer(out.create("selection.csv")?);
            w.write_record(["method", "nontrivial", "nontrivial_any_depth", "runs", "trivial_share"])?;
            for c in &counts {
                w.write_record([
                    c.method.clone(),
                    c.nontrivial.to_string(),
                    c.nontrivial_any_depth.to_string(),
                    c.runs.to_string(),
                    c.trivial_share().to_string(),
                ])?;
            }
            w.flush().map_err(|e| Error::io("selection.csv", e))
        }
    }
}
