//! Experiment orchestration: config resolution, seeded runs, CSV output,
//! regret analysis, horizon sweeps and the delay probe.

mod analysis;
mod config;
mod probe;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

pub use analysis::{
    bandit_regret, fit_loglog_slope, log_ratio_prediction, regret, scaling_sweep, SweepPoint, SweepResult,
};
pub use config::{
    AdversarySection, AlgorithmSection, CompressSection, ExperimentConfig, GeometrySection, GossipSection,
    HarnessSection, Resolved, TopologySection,
};
pub use probe::{delay_probe, ProbeResult};

use crate::algorithms::{run_algorithm, RunOutcome, RunRecord, RunSpec};
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 12] = [
    "run_id",
    "seed",
    "algo",
    "t",
    "b",
    "learner",
    "loss",
    "cum_regret",
    "cum_bytes",
    "e_consensus",
    "e_compression",
    "proj_residual_norm",
];

/// One seed's run: the outcome plus the records kept by the stride and
/// learner filters.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub outcome: RunOutcome,
    pub records: Vec<RunRecord>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub run_id: String,
    pub config: ExperimentConfig,
    pub resolved: Resolved,
    pub runs: Vec<SeedRun>,
}

impl ExperimentResult {
    /// Final regret averaged over learners, then seeds.
    pub fn mean_final_regret(&self) -> f64 {
        self.runs.iter().map(|r| r.outcome.mean_regret()).sum::<f64>() / self.runs.len() as f64
    }
}

fn keep_record(cfg: &ExperimentConfig, rec: &RunRecord) -> bool {
    let on_stride = rec.t.is_multiple_of(cfg.harness.stride) || rec.t == cfg.adversary.horizon;
    let learner_ok = cfg.harness.learners.as_ref().is_none_or(|ls| ls.contains(&rec.learner));
    on_stride && learner_ok
}

/// Runs a single seed of a resolved config.
pub fn run_seed(cfg: &ExperimentConfig, resolved: &Resolved, seed: u64, keep_records: bool) -> Result<SeedRun> {
    let stream = cfg.stream(seed)?;
    let spec = RunSpec {
        stream: stream.as_ref(),
        p: &resolved.p,
        domain: cfg.geometry.domain,
        hp: resolved.hp,
        compressor: cfg.compress.compressor,
        engine: cfg.gossip.engine,
        seed,
        bytes: cfg.compress.bytes,
        keep_plays: false,
    };
    let mut records = Vec::new();
    let outcome = if keep_records {
        let mut sink = |r: &RunRecord| {
            if keep_record(cfg, r) {
                records.push(r.clone());
            }
        };
        run_algorithm(cfg.algorithm.name, &spec, Some(&mut sink))?
    } else {
        run_algorithm(cfg.algorithm.name, &spec, None)?
    };
    Ok(SeedRun { seed, outcome, records })
}

/// Runs every seed of `cfg` (in parallel) and, when the config names an
/// output path, writes the CSV and its metadata sidecar.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let result = run_experiment_with(cfg, true)?;
    if let Some(path) = &cfg.harness.output {
        write_csv_file(path, &result)?;
        write_metadata(&metadata_path(path), &result)?;
    }
    Ok(result)
}

/// Like [`run_experiment`] but never writes files; `keep_records = false`
/// skips per-round records entirely.
pub fn run_experiment_with(cfg: &ExperimentConfig, keep_records: bool) -> Result<ExperimentResult> {
    let resolved = cfg.resolve()?;
    let runs = cfg
        .harness
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, &resolved, seed, keep_records))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        run_id: cfg.run_id(),
        config: cfg.clone(),
        resolved,
        runs,
    })
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the records of every seed, in seed order, as CSV.
pub fn write_csv<W: Write>(out: W, result: &ExperimentResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    let algo = result.config.algorithm.name.name();
    for run in &result.runs {
        let seed = run.seed.to_string();
        for r in &run.records {
            w.write_record([
                result.run_id.as_str(),
                seed.as_str(),
                algo,
                &r.t.to_string(),
                &r.b.to_string(),
                &r.learner.to_string(),
                &fmt_float(r.loss),
                &fmt_float(r.cum_regret),
                &fmt_float(r.cum_bytes),
                &fmt_float(r.e_consensus),
                &fmt_float(r.e_compression),
                &fmt_float(r.proj_residual_norm),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, result: &ExperimentResult) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(std::io::BufWriter::new(file), result)
}

/// `<output>.meta.toml`
pub fn metadata_path(csv_path: &Path) -> std::path::PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".meta.toml");
    s.into()
}

/// The resolved hyperparameters, the overrides that produced them, and the
/// full config, as TOML.
pub fn metadata_toml(result: &ExperimentResult) -> Result<String> {
    #[derive(serde::Serialize)]
    struct Meta<'a> {
        run_id: &'a str,
        omega: f64,
        rho: f64,
        beta: f64,
        hyperparams: crate::algorithms::HyperParams,
        overrides: crate::algorithms::HyperOverrides,
        config: &'a ExperimentConfig,
    }
    let k = &result.resolved.constants;
    let meta = Meta {
        run_id: &result.run_id,
        omega: k.omega,
        rho: k.rho,
        beta: k.beta,
        hyperparams: result.resolved.hp,
        overrides: result.config.algorithm.overrides,
        config: &result.config,
    };
    toml::to_string(&meta).map_err(|e| Error::Config(e.to_string()))
}

pub fn write_metadata(path: &Path, result: &ExperimentResult) -> Result<()> {
    std::fs::write(path, metadata_toml(result)?)?;
    Ok(())
}

/// Paired comparison of two configs over the seeds of `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub seed: u64,
    pub regret_a: f64,
    pub regret_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareTable {
    pub label_a: String,
    pub label_b: String,
    pub rows: Vec<CompareRow>,
}

impl CompareTable {
    pub fn mean_a(&self) -> f64 {
        self.rows.iter().map(|r| r.regret_a).sum::<f64>() / self.rows.len() as f64
    }

    pub fn mean_b(&self) -> f64 {
        self.rows.iter().map(|r| r.regret_b).sum::<f64>() / self.rows.len() as f64
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("seed,{},{},difference\n", self.label_a, self.label_b);
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                r.seed,
                fmt_float(r.regret_a),
                fmt_float(r.regret_b),
                fmt_float(r.regret_a - r.regret_b)
            ));
        }
        s.push_str(&format!(
            "mean,{},{},{}\n",
            fmt_float(self.mean_a()),
            fmt_float(self.mean_b()),
            fmt_float(self.mean_a() - self.mean_b())
        ));
        s
    }
}

/// Runs both configs on the seeds of `a` and pairs their mean final regrets.
pub fn compare(a: &ExperimentConfig, b: &ExperimentConfig) -> Result<CompareTable> {
    let mut b = b.clone();
    b.harness.seeds = a.harness.seeds.clone();
    let ra = run_experiment_with(a, false)?;
    let rb = run_experiment_with(&b, false)?;
    let rows = ra
        .runs
        .iter()
        .zip(&rb.runs)
        .map(|(x, y)| CompareRow {
            seed: x.seed,
            regret_a: x.outcome.mean_regret(),
            regret_b: y.outcome.mean_regret(),
        })
        .collect();
    let (mut label_a, label_b) = (ra.run_id, rb.run_id);
    if label_a == label_b {
        label_a.push_str("-a");
    }
    Ok(CompareTable { label_a, label_b, rows })
}
