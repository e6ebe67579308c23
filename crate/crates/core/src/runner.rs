//! Seeded experiment orchestration and CSV reports.
//!
//! Run `k` of every method uses seed `seed + k`. Runs execute on a rayon pool
//! and are collected in order, so every artifact depends only on the config.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::ask_tell::{drive, RunLog};
use crate::baselines::{random_search, source_cma_run, OptimizerKind, OptimizerSpec, Source, DEFAULT_LAMBDA};
use crate::bench::{SyntheticKind, SyntheticProblem, OFFSETS};
use crate::cmaes::MgdState;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::similarity::{gamma_similarity, PriorKind, SimilarityEstimate, SimilarityParams, DEFAULT_SAMPLES};
use crate::space::{ParameterSpace, TrialArchive};
use crate::warmstart::{DEFAULT_ALPHA, DEFAULT_GAMMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Alpha,
    Gamma,
}

impl SweepParam {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "alpha" => Some(SweepParam::Alpha),
            "gamma" => Some(SweepParam::Gamma),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::Gamma => "gamma",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: SyntheticKind,
    pub offset_source: f64,
    pub offset_target: f64,
    pub methods: Vec<OptimizerKind>,
    pub budget: usize,
    pub reps: usize,
    pub seed: u64,
    pub gamma: f64,
    pub alpha: f64,
    pub lambda: usize,
    /// Random-search evaluations in a generated source archive.
    pub source_count: usize,
    /// Defaults to `seed + 10000`.
    pub source_seed: Option<u64>,
    /// Read the source archive from here instead of generating it.
    pub source_archive: Option<PathBuf>,
    /// Read the source distribution for `reuse_normal` from here instead of running CMA-ES.
    pub source_state: Option<PathBuf>,
    /// Budget of the source CMA-ES run behind `reuse_normal`.
    pub source_budget: usize,
    /// Random-search evaluations behind each archive of the similarity estimate.
    pub similarity_count: usize,
    /// Defaults to `seed + 20000`.
    pub target_seed: Option<u64>,
    pub similarity_gamma_source: f64,
    pub similarity_gamma_target: f64,
    pub similarity_samples: usize,
    pub prior: PriorKind,
    pub offsets: Vec<f64>,
    pub sweep_param: SweepParam,
    pub sweep_values: Vec<f64>,
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: SyntheticKind::Sphere,
            offset_source: 0.6,
            offset_target: 0.6,
            methods: vec![OptimizerKind::Cma, OptimizerKind::WsCma],
            budget: 50,
            reps: 20,
            seed: 0,
            gamma: DEFAULT_GAMMA,
            alpha: DEFAULT_ALPHA,
            lambda: DEFAULT_LAMBDA,
            source_count: 100,
            source_seed: None,
            source_archive: None,
            source_state: None,
            source_budget: 1000,
            similarity_count: 1000,
            target_seed: None,
            similarity_gamma_source: DEFAULT_GAMMA,
            similarity_gamma_target: DEFAULT_GAMMA,
            similarity_samples: DEFAULT_SAMPLES,
            prior: PriorKind::Gaussian,
            offsets: OFFSETS.to_vec(),
            sweep_param: SweepParam::Alpha,
            sweep_values: vec![0.05, 0.1, 0.15, 0.2, 0.25],
            out: PathBuf::from("out"),
            jobs: 0,
        }
    }
}

fn parse_value<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<V: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<V>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_value(key, s)).collect()
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "problem" => {
                self.problem = SyntheticKind::parse(value)
                    .ok_or_else(|| Error::Config(format!("problem: unknown kind {value:?}")))?
            }
            "offset_source" => self.offset_source = parse_value(key, value)?,
            "offset_target" => self.offset_target = parse_value(key, value)?,
            "methods" | "method" => {
                self.methods = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        OptimizerKind::parse(s).ok_or_else(|| Error::Config(format!("{key}: unknown method {s:?}")))
                    })
                    .collect::<Result<_>>()?
            }
            "budget" => self.budget = parse_value(key, value)?,
            "reps" => self.reps = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "gamma" => self.gamma = parse_value(key, value)?,
            "alpha" => self.alpha = parse_value(key, value)?,
            "lambda" => self.lambda = parse_value(key, value)?,
            "source_count" => self.source_count = parse_value(key, value)?,
            "source_seed" => self.source_seed = Some(parse_value(key, value)?),
            "source_archive" => self.source_archive = Some(PathBuf::from(value)),
            "source_state" => self.source_state = Some(PathBuf::from(value)),
            "source_budget" => self.source_budget = parse_value(key, value)?,
            "similarity_count" => self.similarity_count = parse_value(key, value)?,
            "target_seed" => self.target_seed = Some(parse_value(key, value)?),
            "similarity_gamma_source" => self.similarity_gamma_source = parse_value(key, value)?,
            "similarity_gamma_target" => self.similarity_gamma_target = parse_value(key, value)?,
            "similarity_samples" => self.similarity_samples = parse_value(key, value)?,
            "prior" => {
                self.prior =
                    PriorKind::parse(value).ok_or_else(|| Error::Config(format!("prior: unknown kind {value:?}")))?
            }
            "offsets" => self.offsets = parse_list(key, value)?,
            "sweep_param" => {
                self.sweep_param = SweepParam::parse(value)
                    .ok_or_else(|| Error::Config(format!("sweep_param: expected alpha or gamma, got {value:?}")))?
            }
            "sweep_values" => self.sweep_values = parse_list(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "jobs" => self.jobs = parse_value(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines on top of the current values. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            self.set(key.trim(), value).map_err(|e| e.context(&format!("line {}", i + 1)))?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        config.apply_text(text)?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn source_seed(&self) -> u64 {
        self.source_seed.unwrap_or(self.seed.wrapping_add(10_000))
    }

    pub fn target_seed(&self) -> u64 {
        self.target_seed.unwrap_or(self.seed.wrapping_add(20_000))
    }

    pub fn source_problem(&self) -> Result<SyntheticProblem<f64>> {
        SyntheticProblem::new(self.problem, self.offset_source)
    }

    pub fn target_problem(&self) -> Result<SyntheticProblem<f64>> {
        SyntheticProblem::new(self.problem, self.offset_target)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if self.budget == 0 {
            return bad("budget must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        if self.lambda < 2 {
            return bad(format!("lambda {} must be at least 2", self.lambda));
        }
        if self.methods.iter().any(|m| m.is_cma()) && self.budget < self.lambda {
            return bad(format!("budget {} is smaller than lambda {}", self.budget, self.lambda));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma {} must lie in (0, 1]", self.gamma));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha {} must be positive", self.alpha));
        }
        if self.source_count == 0
            || self.source_budget == 0
            || self.similarity_count == 0
            || self.similarity_samples == 0
        {
            return bad("source_count, source_budget, similarity_count and similarity_samples must be positive".into());
        }
        self.source_problem().map_err(|e| Error::Config(e.to_string()))?;
        self.target_problem().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} worker threads: {e}", self.jobs)))
    }
}

fn random_archive(problem: &SyntheticProblem<f64>, count: usize, seed: u64, run_id: &str) -> Result<TrialArchive<f64>> {
    let space = ParameterSpace::unit_cube(problem.dim())?;
    let log = random_search(&space, |x| problem.evaluate(x), count, seed)?;
    RunLog { run_id: run_id.into(), records: log.records }.to_archive(space)
}

/// Random search on the source task.
pub fn gen_source(config: &ExperimentConfig) -> Result<TrialArchive<f64>> {
    random_archive(&config.source_problem()?, config.source_count, config.source_seed(), "source")
}

/// Final distribution of a default CMA-ES run on the source task.
pub fn gen_source_state(config: &ExperimentConfig) -> Result<MgdState<f64>> {
    let problem = config.source_problem()?;
    source_cma_run(problem.dim(), |x| problem.evaluate(x), config.source_budget, config.lambda, config.source_seed())
}

/// Mean and standard error (sample std over `sqrt(n)`; zero for a single value).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: OptimizerKind,
    pub mean_best: f64,
    pub stderr_best: f64,
    pub trajectory_mean: Vec<f64>,
    pub trajectory_stderr: Vec<f64>,
}

impl MethodSummary {
    pub fn from_runs(method: OptimizerKind, runs: &[RunLog<f64>]) -> Result<Self> {
        let bests = runs.iter().map(|r| r.best().map(|b| b.1)).collect::<Result<Vec<_>>>()?;
        let (mean_best, stderr_best) = mean_stderr(&bests);
        let curves: Vec<Vec<f64>> = runs.iter().map(RunLog::best_so_far).collect();
        let len = curves.iter().map(Vec::len).min().unwrap_or(0);
        let (trajectory_mean, trajectory_stderr) =
            (0..len).map(|i| mean_stderr(&curves.iter().map(|c| c[i]).collect::<Vec<_>>())).unzip();
        Ok(Self { method, mean_best, stderr_best, trajectory_mean, trajectory_stderr })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodCell {
    pub method: OptimizerKind,
    /// Every run of the method, or the error that stopped it.
    pub outcome: std::result::Result<Vec<RunLog<f64>>, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub source_archive: Option<TrialArchive<f64>>,
    pub source_state: Option<MgdState<f64>>,
    pub cells: Vec<MethodCell>,
}

impl ExperimentResult {
    pub fn cell(&self, method: OptimizerKind) -> Option<&MethodCell> {
        self.cells.iter().find(|c| c.method == method)
    }

    pub fn summaries(&self) -> Result<Vec<MethodSummary>> {
        self.cells
            .iter()
            .filter_map(|c| c.outcome.as_ref().ok().map(|runs| MethodSummary::from_runs(c.method, runs)))
            .collect()
    }

    pub fn summary(&self, method: OptimizerKind) -> Option<MethodSummary> {
        match &self.cell(method)?.outcome {
            Ok(runs) => MethodSummary::from_runs(method, runs).ok(),
            Err(_) => None,
        }
    }

    pub fn errors(&self) -> Vec<(OptimizerKind, &str)> {
        self.cells.iter().filter_map(|c| c.outcome.as_ref().err().map(|e| (c.method, e.as_str()))).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(|c| c.outcome.is_ok())
    }
}

fn run_cell(
    config: &ExperimentConfig,
    method: OptimizerKind,
    problem: &SyntheticProblem<f64>,
    source: Option<Source<f64>>,
) -> Result<Vec<RunLog<f64>>> {
    let mut spec = OptimizerSpec::new(method, config.seed);
    spec.gamma = config.gamma;
    spec.alpha = config.alpha;
    spec.lambda = config.lambda;
    spec.source = source;
    spec.build(problem.dim())?;
    (0..config.reps)
        .into_par_iter()
        .map(|k| {
            let spec = OptimizerSpec { seed: config.seed.wrapping_add(k as u64), ..spec.clone() };
            let mut opt = spec.build(problem.dim())?;
            drive(opt.as_mut(), |x| problem.evaluate(x), config.budget, &format!("{}-{k}", method.as_str()))
        })
        .collect()
}

fn run_in_pool(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let problem = config.target_problem()?;

    let source_archive = if config.methods.iter().any(|m| m.needs_archive()) {
        Some(match &config.source_archive {
            Some(path) => TrialArchive::load(path)?,
            None => gen_source(config)?,
        })
    } else {
        None
    };
    let source_state = if config.methods.contains(&OptimizerKind::ReuseNormal) {
        Some(match &config.source_state {
            Some(path) => MgdState::read_from(fs::File::open(path)?)?,
            None => gen_source_state(config)?,
        })
    } else {
        None
    };

    let cells = config
        .methods
        .iter()
        .map(|&method| {
            let source = if method.needs_archive() {
                source_archive.clone().map(Source::Archive)
            } else if method == OptimizerKind::ReuseNormal {
                source_state.clone().map(Source::State)
            } else {
                None
            };
            let outcome = run_cell(config, method, &problem, source).map_err(|e| e.to_string());
            MethodCell { method, outcome }
        })
        .collect();
    Ok(ExperimentResult { source_archive, source_state, cells })
}

/// Runs every configured method `reps` times on the target task.
///
/// Errors in the config or the source data fail the whole call; an error inside
/// one method is recorded in its cell and the other methods still run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    config.pool()?.install(|| run_in_pool(config))
}

fn real<T: Scalar>(v: T) -> String {
    v.to_decimal()
}

fn one_line(message: &str) -> String {
    message.replace([',', '\n'], ";")
}

pub fn trajectory_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("method,run,eval_index,value,best_so_far\n");
    for cell in &result.cells {
        let Ok(runs) = &cell.outcome else { continue };
        for (k, run) in runs.iter().enumerate() {
            for (r, best) in run.records.iter().zip(run.best_so_far()) {
                let _ = writeln!(out, "{},{k},{},{},{}", cell.method.as_str(), r.eval_index, real(r.value), real(best));
            }
        }
    }
    out
}

pub fn summary_csv(summaries: &[MethodSummary]) -> String {
    let mut out = String::from("method,mean_best,stderr_best\n");
    for s in summaries {
        let _ = writeln!(out, "{},{},{}", s.method.as_str(), real(s.mean_best), real(s.stderr_best));
    }
    out
}

pub fn trajectory_summary_csv(summaries: &[MethodSummary]) -> String {
    let mut out = String::from("method,eval_index,mean_best_so_far,stderr_best_so_far\n");
    for s in summaries {
        for (i, (m, e)) in s.trajectory_mean.iter().zip(&s.trajectory_stderr).enumerate() {
            let _ = writeln!(out, "{},{i},{},{}", s.method.as_str(), real(*m), real(*e));
        }
    }
    out
}

fn errors_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("method,error\n");
    for (method, e) in result.errors() {
        let _ = writeln!(out, "{},{}", method.as_str(), one_line(e));
    }
    out
}

/// Writes the source data, one archive per run under `runs/`, and the CSV reports.
pub fn write_experiment(result: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("runs"))?;
    if let Some(a) = &result.source_archive {
        a.save(dir.join("source_archive.csv"))?;
    }
    if let Some(s) = &result.source_state {
        s.write_to(fs::File::create(dir.join("source_state.mgd"))?)?;
    }
    let space = ParameterSpace::unit_cube(2)?;
    for cell in &result.cells {
        let Ok(runs) = &cell.outcome else { continue };
        for (k, run) in runs.iter().enumerate() {
            run.to_archive(space.clone())?.save(dir.join("runs").join(format!("{}_{k}.csv", cell.method.as_str())))?;
        }
    }
    let summaries = result.summaries()?;
    fs::write(dir.join("trajectory.csv"), trajectory_csv(result))?;
    fs::write(dir.join("trajectory_summary.csv"), trajectory_summary_csv(&summaries))?;
    fs::write(dir.join("summary.csv"), summary_csv(&summaries))?;
    fs::write(dir.join("errors.csv"), errors_csv(result))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityRow {
    pub offset_source: f64,
    pub similarity: SimilarityEstimate<f64>,
    pub mean_best_cma: f64,
    pub mean_best_ws: f64,
}

impl SimilarityRow {
    /// `mean_best_cma - mean_best_ws`; positive when the warm start helps.
    pub fn improvement(&self) -> f64 {
        self.mean_best_cma - self.mean_best_ws
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityReport {
    pub rows: Vec<SimilarityRow>,
    pub errors: Vec<(f64, String)>,
    pub experiments: Vec<(f64, ExperimentResult)>,
}

impl SimilarityReport {
    pub fn is_complete(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("b_source,s_hat,s_stderr,kl_prior,kl_source,mean_best_cma,mean_best_ws,improvement\n");
        for r in &self.rows {
            let s = &r.similarity;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                real(r.offset_source),
                real(s.s_hat),
                real(s.standard_error),
                real(s.kl_prior.estimate),
                real(s.kl_source.estimate),
                real(r.mean_best_cma),
                real(r.mean_best_ws),
                real(r.improvement())
            );
        }
        out
    }
}

fn similarity_row(
    config: &ExperimentConfig,
    b: f64,
    target: &TrialArchive<f64>,
) -> Result<(SimilarityRow, ExperimentResult)> {
    let cfg = ExperimentConfig {
        offset_source: b,
        methods: vec![OptimizerKind::Cma, OptimizerKind::WsCma],
        source_archive: None,
        ..config.clone()
    };
    cfg.validate()?;
    let source = random_archive(&cfg.source_problem()?, config.similarity_count, cfg.source_seed(), "source")?;
    let params = SimilarityParams {
        gamma_source: config.similarity_gamma_source,
        gamma_target: config.similarity_gamma_target,
        alpha: config.alpha,
        n_samples: config.similarity_samples,
        seed: config.seed,
    };
    let prior = config.prior.density::<f64>(source.dim());
    let similarity = gamma_similarity(&source, target, prior.as_ref(), &params)?;
    let result = run_in_pool(&cfg)?;
    let mean = |m| {
        result.summary(m).map(|s| s.mean_best).ok_or_else(|| Error::InvalidParameter(format!("{} failed", m.as_str())))
    };
    let row = SimilarityRow {
        offset_source: b,
        similarity,
        mean_best_cma: mean(OptimizerKind::Cma)?,
        mean_best_ws: mean(OptimizerKind::WsCma)?,
    };
    Ok((row, result))
}

/// For every source offset: the similarity to the target task and the warm-start improvement.
pub fn similarity_report(config: &ExperimentConfig) -> Result<SimilarityReport> {
    config.validate()?;
    if config.offsets.is_empty() {
        return Err(Error::Config("no offsets given".into()));
    }
    config.pool()?.install(|| {
        let target =
            random_archive(&config.target_problem()?, config.similarity_count, config.target_seed(), "target")?;
        let mut report = SimilarityReport { rows: Vec::new(), errors: Vec::new(), experiments: Vec::new() };
        for &b in &config.offsets {
            match similarity_row(config, b, &target) {
                Ok((row, result)) => {
                    report.rows.push(row);
                    report.experiments.push((b, result));
                }
                Err(e) => report.errors.push((b, e.to_string())),
            }
        }
        Ok(report)
    })
}

pub fn write_similarity(report: &SimilarityReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("similarity.csv"), report.to_csv())?;
    let mut errors = String::from("b_source,error\n");
    for (b, e) in &report.errors {
        let _ = writeln!(errors, "{},{}", real(*b), one_line(e));
    }
    fs::write(dir.join("errors.csv"), errors)?;
    for (b, result) in &report.experiments {
        write_experiment(result, &dir.join(format!("offset_{}", real(*b))))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub value: f64,
    pub outcome: std::result::Result<ExperimentResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub param: SweepParam,
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(|c| c.outcome.as_ref().is_ok_and(ExperimentResult::is_complete))
    }

    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("param,param_value,method,run,eval_index,value,best_so_far\n");
        for cell in &self.cells {
            let Ok(result) = &cell.outcome else { continue };
            let prefix = format!("{},{},", self.param.as_str(), real(cell.value));
            for line in trajectory_csv(result).lines().skip(1) {
                out.push_str(&prefix);
                out.push_str(line);
                out.push('\n');
            }
        }
        out
    }

    pub fn summary_csv(&self) -> Result<String> {
        let mut out = String::from("param,param_value,method,mean_best,stderr_best\n");
        for cell in &self.cells {
            let Ok(result) = &cell.outcome else { continue };
            for s in result.summaries()? {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    self.param.as_str(),
                    real(cell.value),
                    s.method.as_str(),
                    real(s.mean_best),
                    real(s.stderr_best)
                );
            }
        }
        Ok(out)
    }

    pub fn errors_csv(&self) -> String {
        let mut out = String::from("param_value,method,error\n");
        for cell in &self.cells {
            match &cell.outcome {
                Err(e) => {
                    let _ = writeln!(out, "{},,{}", real(cell.value), one_line(e));
                }
                Ok(result) => {
                    for (m, e) in result.errors() {
                        let _ = writeln!(out, "{},{},{}", real(cell.value), m.as_str(), one_line(e));
                    }
                }
            }
        }
        out
    }
}

/// One experiment per value of `config.sweep_param`, everything else fixed.
pub fn sensitivity_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    if config.sweep_values.is_empty() {
        return Err(Error::Config("no sweep values given".into()));
    }
    if let Some(v) = config.sweep_values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Config(format!("sweep value {v} must be positive")));
    }
    config.pool()?.install(|| {
        let cells = config
            .sweep_values
            .iter()
            .map(|&value| {
                let mut cfg = config.clone();
                match config.sweep_param {
                    SweepParam::Alpha => cfg.alpha = value,
                    SweepParam::Gamma => cfg.gamma = value,
                }
                let outcome = run_in_pool(&cfg).map_err(|e| e.to_string());
                SweepCell { value, outcome }
            })
            .collect();
        Ok(SweepResult { param: config.sweep_param, cells })
    })
}

pub fn write_sweep(result: &SweepResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("sweep_trajectory.csv"), result.trajectory_csv())?;
    fs::write(dir.join("sweep_summary.csv"), result.summary_csv()?)?;
    fs::write(dir.join("errors.csv"), result.errors_csv())?;
    Ok(())
}
