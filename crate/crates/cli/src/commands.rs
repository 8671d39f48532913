use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use wssl_core::datagen::{
    generate_dataset, read_dataset, sample_manipulator, sample_rng, split_dataset, to_csv,
    write_dataset, Dataset,
};
use wssl_core::slnet::{
    bank_predict, evaluate, forward_many, per_sample_f_measure, read_bank, threshold_filter, train,
    write_bank, BankEntry, BankQuery, Batch, Metrics, SampleStats, SubspaceBank,
};
use wssl_core::workspace::{
    discretize_workspace, discretize_workspace_with, flatten, point_cloud_csv, slice_output,
    Prefilter,
};

use crate::config::{
    resolve, BenchConfig, EvalConfig, GenerateConfig, Subset, TrainCmdConfig, WorkspaceConfig,
};
use crate::error::{CliError, CliResult};

fn io_err(action: &str, path: &Path, e: impl fmt::Display) -> CliError {
    CliError::runtime(format!("cannot {action} {}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| io_err("write", path, e))
}

pub fn load_dataset(path: &Path) -> CliResult<Dataset> {
    let f = File::open(path).map_err(|e| {
        CliError::validation(format!("cannot open dataset {}: {e}", path.display()))
    })?;
    Ok(read_dataset(BufReader::new(f))?)
}

pub fn save_dataset(path: &Path, d: &Dataset) -> CliResult<()> {
    let f = File::create(path).map_err(|e| io_err("create", path, e))?;
    let mut w = BufWriter::new(f);
    write_dataset(&mut w, d)?;
    w.flush().map_err(|e| io_err("write", path, e))
}

pub fn load_bank(path: &Path) -> CliResult<SubspaceBank> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read bank {}: {e}", path.display())))?;
    Ok(read_bank(&text)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSummary {
    pub rows: usize,
    pub x_cols: usize,
    pub y_cols: usize,
    pub positive_rate: f64,
    pub seconds: f64,
}

impl fmt::Display for GenerateSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "generated {} samples ({} inputs, {} labels), positive rate {:.4}, {:.2} s",
            self.rows, self.x_cols, self.y_cols, self.positive_rate, self.seconds
        )
    }
}

pub fn cmd_generate(cfg: &GenerateConfig, base: &Path) -> CliResult<GenerateSummary> {
    let scope = cfg.scope.build()?;
    let desc = cfg.descriptor(&scope)?;
    let start = Instant::now();
    let d = generate_dataset(cfg.n, &desc, &scope, &cfg.ik, cfg.seed)?;
    let seconds = start.elapsed().as_secs_f64();
    save_dataset(&resolve(base, &cfg.output), &d)?;
    if let Some(csv) = &cfg.csv {
        write_text(&resolve(base, csv), &to_csv(&d))?;
    }
    Ok(GenerateSummary {
        rows: d.rows(),
        x_cols: d.x_cols(),
        y_cols: d.y_cols(),
        positive_rate: d.positive_rate(),
        seconds,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkspaceSummary {
    pub nodes: usize,
    pub reachable: usize,
    pub seconds: f64,
}

impl fmt::Display for WorkspaceSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} of {} nodes reachable, {:.3} s",
            self.reachable, self.nodes, self.seconds
        )
    }
}

pub fn cmd_workspace(cfg: &WorkspaceConfig, base: &Path) -> CliResult<WorkspaceSummary> {
    let scope = cfg.scope.build()?;
    let prefilter = if cfg.prefilter {
        Prefilter::ReachBound
    } else {
        Prefilter::None
    };
    let start = Instant::now();
    let t = discretize_workspace_with(&cfg.manipulator, &scope, &cfg.ik, prefilter)?;
    let seconds = start.elapsed().as_secs_f64();
    write_text(
        &resolve(base, &cfg.bits),
        &format!("{}\n", t.to_bit_string()),
    )?;
    write_text(&resolve(base, &cfg.csv), &point_cloud_csv(&scope, &t)?)?;
    Ok(WorkspaceSummary {
        nodes: t.len(),
        reachable: t.count_ones(),
        seconds,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub id: String,
    pub epochs: usize,
    pub best_epoch: usize,
    pub final_loss: f64,
    pub replaced: bool,
    pub seconds: f64,
}

impl fmt::Display for TrainSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} entry '{}': {} epochs, best validation at epoch {}, final loss {:.6}, {:.2} s",
            if self.replaced { "replaced" } else { "added" },
            self.id,
            self.epochs,
            self.best_epoch,
            self.final_loss,
            self.seconds
        )
    }
}

pub fn cmd_train(cfg: &TrainCmdConfig, base: &Path) -> CliResult<TrainSummary> {
    cfg.train.validate()?;
    let d = load_dataset(&resolve(base, &cfg.dataset))?;
    for (name, want, got) in [
        ("input_dim", cfg.input_dim, d.x_cols()),
        ("output_dim", cfg.output_dim, d.y_cols()),
    ] {
        if let Some(w) = want {
            if w != got {
                return Err(CliError::validation(format!(
                    "invalid {name}: config says {w}, dataset has {got}"
                )));
            }
        }
    }
    let bank_path = resolve(base, &cfg.bank);
    let mut bank = if bank_path.exists() {
        let b = load_bank(&bank_path)?;
        if b.hidden_sizes() != cfg.hidden_sizes.as_slice() {
            return Err(CliError::validation(format!(
                "invalid hidden_sizes: bank uses {:?}, config says {:?}",
                b.hidden_sizes(),
                cfg.hidden_sizes
            )));
        }
        b
    } else {
        SubspaceBank::new(cfg.hidden_sizes.clone())?
    };
    let arch = bank.architecture(&d.descriptor);
    arch.validate()?;
    let splits = split_dataset(&d, cfg.split, cfg.split_seed)?;
    let start = Instant::now();
    let out = train(
        &arch,
        &Batch::from_dataset(&splits.train),
        &Batch::from_dataset(&splits.validation),
        &cfg.train,
    )?;
    let seconds = start.elapsed().as_secs_f64();
    let replaced = bank
        .insert(BankEntry {
            descriptor: d.descriptor.clone(),
            link: cfg.train.loss.output_link(),
            params: out.params.clone(),
        })?
        .is_some();
    write_text(&bank_path, &write_bank(&bank)?)?;
    write_text(&resolve(base, &cfg.log), &out.log_csv())?;
    Ok(TrainSummary {
        id: d.descriptor.id.clone(),
        epochs: out.log.len(),
        best_epoch: out.best_epoch,
        final_loss: out.log.last().map_or(f64::NAN, |l| l.loss),
        replaced,
        seconds,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub id: String,
    pub rows: usize,
    pub threshold: f64,
    pub metrics: Metrics,
    pub per_sample: SampleStats,
}

#[derive(Serialize)]
struct EvalReportFile<'a> {
    id: &'a str,
    rows: usize,
    threshold: f64,
    precision: f64,
    recall: f64,
    f_measure: f64,
    true_positives: u64,
    false_positives: u64,
    false_negatives: u64,
    sample_f_mean: f64,
    sample_f_std_dev: f64,
    sample_f_defined: usize,
}

impl EvalReport {
    pub fn to_toml(&self) -> String {
        let m = &self.metrics;
        let file = EvalReportFile {
            id: &self.id,
            rows: self.rows,
            threshold: self.threshold,
            precision: m.precision,
            recall: m.recall,
            f_measure: m.f_measure,
            true_positives: m.true_positives,
            false_positives: m.false_positives,
            false_negatives: m.false_negatives,
            sample_f_mean: self.per_sample.mean,
            sample_f_std_dev: self.per_sample.std_dev,
            sample_f_defined: self.per_sample.defined,
        };
        toml::to_string(&file).expect("flat report serializes")
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.metrics;
        write!(
            f,
            "{} on {} samples: precision {:.4}, recall {:.4}, F {:.4}; per-sample F {:.4} +/- {:.4}",
            self.id, self.rows, m.precision, m.recall, m.f_measure, self.per_sample.mean, self.per_sample.std_dev
        )
    }
}

pub fn cmd_eval(cfg: &EvalConfig, base: &Path) -> CliResult<EvalReport> {
    if !cfg.threshold.is_finite() {
        return Err(CliError::validation("invalid threshold: must be finite"));
    }
    let bank = load_bank(&resolve(base, &cfg.bank))?;
    let d = load_dataset(&resolve(base, &cfg.dataset))?;
    let id = cfg.id.clone().unwrap_or_else(|| d.descriptor.id.clone());
    let entry = bank.get(&id).ok_or_else(|| {
        CliError::validation(format!(
            "no bank entry '{id}'; stored ids: [{}]",
            bank.ids().join(", ")
        ))
    })?;
    if entry.descriptor != d.descriptor {
        return Err(CliError::validation(format!(
            "descriptor mismatch: bank entry '{id}' was trained on a different subspace than dataset '{}'",
            d.descriptor.id
        )));
    }
    let d = match cfg.subset {
        Subset::All => d,
        other => {
            let s = split_dataset(&d, cfg.split, cfg.split_seed)?;
            match other {
                Subset::Train => s.train,
                Subset::Validation => s.validation,
                _ => s.test,
            }
        }
    };
    let arch = bank.architecture(&entry.descriptor);
    let out = forward_many(&arch, &entry.params, &Batch::from_dataset(&d).x)?;
    let scores: Vec<f64> = out.iter().map(|v| entry.link.apply(*v)).collect();
    let bits = threshold_filter(&scores, cfg.threshold);
    let report = EvalReport {
        id,
        rows: d.rows(),
        threshold: cfg.threshold,
        metrics: evaluate(&bits, d.y_bits())?,
        per_sample: per_sample_f_measure(&bits, d.y_bits(), d.y_cols())?,
    };
    if let Some(p) = &cfg.report {
        write_text(&resolve(base, p), &report.to_toml())?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub seconds: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
}

impl Timing {
    fn from_samples(seconds: Vec<f64>) -> Self {
        let n = seconds.len() as f64;
        let mean = seconds.iter().sum::<f64>() / n;
        let std_dev = if seconds.len() > 1 {
            (seconds.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            seconds,
            mean,
            std_dev,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hardware {
    pub os: String,
    pub arch: String,
    pub logical_cpus: usize,
    pub threads: usize,
    pub cpu_model: String,
}

impl Hardware {
    pub fn detect() -> Self {
        let cpu_model = std::fs::read_to_string("/proc/cpuinfo")
            .ok()
            .and_then(|s| {
                s.lines()
                    .find(|l| l.starts_with("model name"))
                    .and_then(|l| l.split_once(':'))
                    .map(|(_, v)| v.trim().to_string())
            })
            .unwrap_or_else(|| "unknown".to_string());
        Self {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            threads: rayon::current_num_threads(),
            cpu_model,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub id: String,
    pub nodes: usize,
    pub predicted_bits: usize,
    pub classical: Timing,
    pub network: Timing,
    pub speedup: f64,
    /// Agreement of the network with the classical map on the benchmarked arm.
    pub f_measure: f64,
    pub hardware: Hardware,
}

impl BenchReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "method,repetition,seconds")?;
        for (name, t) in [("classical", &self.classical), ("network", &self.network)] {
            for (i, s) in t.seconds.iter().enumerate() {
                writeln!(f, "{name},{},{s:.6e}", i + 1)?;
            }
        }
        writeln!(
            f,
            "classical: {:.6e} +/- {:.6e} s over {} nodes",
            self.classical.mean, self.classical.std_dev, self.nodes
        )?;
        writeln!(
            f,
            "network: {:.6e} +/- {:.6e} s",
            self.network.mean, self.network.std_dev
        )?;
        writeln!(
            f,
            "speedup: {:.1}x (F against classical {:.4})",
            self.speedup, self.f_measure
        )?;
        write!(
            f,
            "hardware: {} {}, {} logical cpus, {} threads, {}",
            self.hardware.os,
            self.hardware.arch,
            self.hardware.logical_cpus,
            self.hardware.threads,
            self.hardware.cpu_model
        )
    }
}

pub fn cmd_bench(cfg: &BenchConfig, base: &Path) -> CliResult<BenchReport> {
    if cfg.repetitions == 0 {
        return Err(CliError::validation("invalid repetitions: must be >= 1"));
    }
    let bank = load_bank(&resolve(base, &cfg.bank))?;
    let entry = match &cfg.id {
        Some(id) => bank.get(id).ok_or_else(|| {
            CliError::validation(format!(
                "no bank entry '{id}'; stored ids: [{}]",
                bank.ids().join(", ")
            ))
        })?,
        None => bank
            .entries()
            .first()
            .ok_or_else(|| CliError::validation("bank has no entries"))?,
    };
    let scope = cfg.scope.build()?;
    entry.descriptor.spec.check_scope(&scope)?;
    cfg.ik.validate()?;
    let (m, full) = sample_manipulator(&entry.descriptor.spec, &mut sample_rng(cfg.seed, 0))?;
    let query = BankQuery::FullInput(full);

    let mut classical = Vec::with_capacity(cfg.repetitions);
    let mut map = None;
    for _ in 0..cfg.repetitions {
        let start = Instant::now();
        let t = discretize_workspace(&m, &scope, &cfg.ik)?;
        classical.push(start.elapsed().as_secs_f64());
        map = Some(t);
    }
    let mut network = Vec::with_capacity(cfg.repetitions);
    let mut prediction = None;
    for _ in 0..cfg.repetitions {
        let start = Instant::now();
        let p = bank_predict(&bank, &query, cfg.threshold)?;
        network.push(start.elapsed().as_secs_f64());
        prediction = Some(p);
    }
    let map = map.expect("at least one repetition");
    let prediction = prediction.expect("at least one repetition");
    let [lo, hi] = bank.entries()[prediction.entry - 1].descriptor.output_slice;
    let truth = slice_output(&flatten(&map), lo, hi)?;
    let classical = Timing::from_samples(classical);
    let network = Timing::from_samples(network);
    let report = BenchReport {
        id: prediction.id.clone(),
        nodes: map.len(),
        predicted_bits: prediction.bits.len(),
        speedup: classical.mean / network.mean,
        f_measure: evaluate(&prediction.bits, &truth)?.f_measure,
        classical,
        network,
        hardware: Hardware::detect(),
    };
    if let Some(p) = &cfg.report {
        write_text(&resolve(base, p), &report.to_toml())?;
    }
    Ok(report)
}
