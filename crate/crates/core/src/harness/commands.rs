use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Split};
use crate::eval::{boxplot_csv, report_csv, summarize_runs, MetricsReport, RunSetReport, SeedMetrics};
use crate::neuralnet::gradcheck::{gradcheck_full_cnn, gradcheck_linear_toy, DEFAULT_STEP};
use crate::neuralnet::{history_csv, save_checkpoint, GradcheckReport, TrainConfig};

use super::config::RunConfig;
use super::pipeline::{RunOutput, Workspace};
use super::HarnessError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const BOXPLOT_CSV: &str = "boxplot.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

fn write_file(path: &Path, contents: &[u8]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::output(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| HarnessError::output(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Parse a raw corpus (or JSON dataset) and write it as a JSON dataset.
/// Returns `(sentences, distinct labels)`.
pub fn cmd_prep(corpus: &Path, out: &Path) -> Result<(usize, usize), HarnessError> {
    if !corpus.is_file() {
        return Err(HarnessError::Config(format!("corpus {} does not exist", corpus.display())));
    }
    let ds = Dataset::load(corpus, Split::Train)?;
    let labels: std::collections::BTreeSet<&str> = ds.sentences.iter().map(|s| s.label.as_str()).collect();
    let mut json = ds.to_json()?;
    json.push('\n');
    write_file(out, json.as_bytes())?;
    Ok((ds.len(), labels.len()))
}

/// Test-set scores of one run, as written to `metrics.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub stack: String,
    pub seed: u64,
    pub config_digest: String,
    pub train: TrainConfig,
    pub labels: Vec<String>,
    pub final_train_loss: f64,
    pub final_dev_f1: f64,
    pub test: MetricsReport,
}

pub fn run_dir(out: &Path, stack: &str, seed: u64) -> PathBuf {
    out.join(stack).join(format!("seed-{seed}"))
}

fn write_run(ws: &Workspace, run: &RunOutput) -> Result<RunMetrics, HarnessError> {
    let dir = run_dir(&ws.config.out, &run.stack, run.seed);
    std::fs::create_dir_all(&dir).map_err(|e| HarnessError::output(&dir, e))?;
    save_checkpoint(&dir.join("model.rrm"), &run.params, &ws.digest)?;
    write_file(&dir.join("history.csv"), history_csv(&run.history).as_bytes())?;
    let last = run.history.last();
    let metrics = RunMetrics {
        stack: run.stack.clone(),
        seed: run.seed,
        config_digest: ws.digest.clone(),
        train: run.train_config,
        labels: ws.labels.names().to_vec(),
        final_train_loss: last.map_or(0.0, |r| r.train_loss),
        final_dev_f1: last.map_or(0.0, |r| r.dev_f1),
        test: run.test.clone(),
    };
    write_file(&dir.join("metrics.json"), to_json(&metrics).as_bytes())?;
    Ok(metrics)
}

/// One deterministic run of `stack` (default: the first) with `seed`.
pub fn cmd_train(config: RunConfig, stack: Option<&str>, seed: u64, verbose: bool) -> Result<RunMetrics, HarnessError> {
    let stack_index = config.stack(stack)?;
    let ws = Workspace::load(config)?;
    let name = ws.stack_name(stack_index).to_string();
    let run = ws.run(stack_index, seed, |r| {
        if verbose {
            eprintln!("[{name} seed {seed}] epoch {:>3}  loss {:.5}  dev F1 {:.4}", r.epoch, r.train_loss, r.dev_f1);
        }
    })?;
    write_run(&ws, &run)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub status: RunStatus,
    pub wall_clock_secs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackEntry {
    pub stack: String,
    /// Index into `report.json` stacks, absent when some run of the stack did not finish.
    pub report_index: Option<usize>,
    pub runs: Vec<RunRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepStatus {
    Complete,
    Aborted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchManifest {
    pub config_digest: String,
    pub version: String,
    pub status: SweepStatus,
    pub report: String,
    pub stacks: Vec<StackEntry>,
}

/// Aggregated sweep results. Holds no timings, so reruns are byte-identical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config_digest: String,
    pub status: SweepStatus,
    pub labels: Vec<String>,
    pub stacks: Vec<RunSetReport>,
}

fn seed_metrics(seed: u64, m: &MetricsReport) -> SeedMetrics {
    SeedMetrics { seed, prf: m.macro_avg }
}

/// Run every (stack, seed) pair on `workers` threads, then aggregate.
/// The first failure stops new runs from starting; finished runs are kept.
pub fn cmd_bench(config: RunConfig, verbose: bool) -> Result<BenchManifest, HarnessError> {
    let workers = config
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let ws = Workspace::load(config)?;
    let out = ws.config.out.clone();
    let jobs: Vec<(usize, u64)> = (0..ws.networks.len())
        .flat_map(|s| ws.config.seeds.iter().map(move |&seed| (s, seed)))
        .collect();

    let abort = AtomicBool::new(false);
    let execute = |&(stack, seed): &(usize, u64)| -> (RunRecord, Option<RunMetrics>) {
        if abort.load(Ordering::SeqCst) {
            let rec = RunRecord { seed, status: RunStatus::Skipped, wall_clock_secs: 0.0, macro_f1: None, error: None };
            return (rec, None);
        }
        let start = Instant::now();
        let result = ws.run(stack, seed, |_| {}).and_then(|run| write_run(&ws, &run));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(m) => {
                if verbose {
                    eprintln!("[{} seed {seed}] test macro F1 {:.4} ({secs:.1}s)", m.stack, m.test.macro_avg.f1);
                }
                let rec = RunRecord {
                    seed,
                    status: RunStatus::Ok,
                    wall_clock_secs: secs,
                    macro_f1: Some(m.test.macro_avg.f1),
                    error: None,
                };
                (rec, Some(m))
            }
            Err(e) => {
                abort.store(true, Ordering::SeqCst);
                eprintln!("[{} seed {seed}] failed: {e}", ws.stack_name(stack));
                let rec =
                    RunRecord { seed, status: RunStatus::Failed, wall_clock_secs: secs, macro_f1: None, error: Some(e.to_string()) };
                (rec, None)
            }
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Aborted(format!("thread pool: {e}")))?;
    let results: Vec<(RunRecord, Option<RunMetrics>)> = pool.install(|| jobs.par_iter().map(execute).collect());

    let per_stack = ws.config.seeds.len();
    let mut reports = Vec::new();
    let mut entries = Vec::new();
    for (s, chunk) in results.chunks(per_stack).enumerate() {
        let name = ws.stack_name(s).to_string();
        let complete: Option<Vec<SeedMetrics>> =
            chunk.iter().map(|(_, m)| m.as_ref().map(|m| seed_metrics(m.seed, &m.test))).collect();
        let report_index = match complete {
            Some(per_seed) => {
                reports.push(summarize_runs(&per_seed, &name)?);
                Some(reports.len() - 1)
            }
            None => None,
        };
        entries.push(StackEntry { stack: name, report_index, runs: chunk.iter().map(|(r, _)| r.clone()).collect() });
    }
    let failed: Vec<String> = entries
        .iter()
        .flat_map(|e| {
            e.runs
                .iter()
                .filter(|r| r.status == RunStatus::Failed)
                .map(move |r| format!("{} seed {}: {}", e.stack, r.seed, r.error.as_deref().unwrap_or("")))
        })
        .collect();
    let status = if failed.is_empty() { SweepStatus::Complete } else { SweepStatus::Aborted };

    let report = BenchReport {
        config_digest: ws.digest.clone(),
        status,
        labels: ws.labels.names().to_vec(),
        stacks: reports,
    };
    write_report_files(&out, &report)?;
    let manifest = BenchManifest {
        config_digest: ws.digest.clone(),
        version: VERSION.to_string(),
        status,
        report: REPORT_JSON.to_string(),
        stacks: entries,
    };
    write_file(&out.join(MANIFEST_JSON), to_json(&manifest).as_bytes())?;
    if failed.is_empty() {
        Ok(manifest)
    } else {
        Err(HarnessError::Aborted(failed.join("; ")))
    }
}

fn write_report_files(out: &Path, report: &BenchReport) -> Result<(), HarnessError> {
    write_file(&out.join(REPORT_JSON), to_json(report).as_bytes())?;
    write_file(&out.join(REPORT_CSV), report_csv(&report.stacks).as_bytes())?;
    write_file(&out.join(BOXPLOT_CSV), boxplot_csv(&report.stacks).as_bytes())
}

/// Regenerate the CSVs from `report.json` and render a summary table.
pub fn cmd_report(out: &Path) -> Result<String, HarnessError> {
    let path = out.join(REPORT_JSON);
    let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    let report: BenchReport =
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    write_file(&out.join(REPORT_CSV), report_csv(&report.stacks).as_bytes())?;
    write_file(&out.join(BOXPLOT_CSV), boxplot_csv(&report.stacks).as_bytes())?;
    Ok(render_table(&report))
}

pub fn render_table(report: &BenchReport) -> String {
    let width = report.stacks.iter().map(|r| r.stack.len()).max().unwrap_or(5).max(5);
    let mut s = String::new();
    writeln!(s, "{:<width$}  {:>6}  {:>6}  {:>6}  {:>6}  {:>5}", "stack", "P_min", "R_min", "F1_min", "F1_med", "seeds").unwrap();
    for r in &report.stacks {
        writeln!(
            s,
            "{:<width$}  {:>6.2}  {:>6.2}  {:>6.2}  {:>6.2}  {:>5}",
            r.stack,
            100.0 * r.min.precision,
            100.0 * r.min.recall,
            100.0 * r.min.f1,
            100.0 * r.boxplot.median,
            r.per_seed.len()
        )
        .unwrap();
    }
    if report.status == SweepStatus::Aborted {
        s.push_str("(sweep aborted; stacks with failed runs are omitted)\n");
    }
    s
}

/// Finite-difference check on a synthetic sample in f64.
pub fn cmd_gradcheck(seed: u64, tolerance: f64, toy_linear: bool) -> Result<GradcheckReport, HarnessError> {
    let report = if toy_linear {
        gradcheck_linear_toy(seed, DEFAULT_STEP)?
    } else {
        gradcheck_full_cnn(seed, DEFAULT_STEP)?
    };
    if report.max_rel_error < tolerance {
        Ok(report)
    } else {
        Err(HarnessError::GradcheckFailed { error: report.max_rel_error, tolerance })
    }
}
