use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ecg_bench::config::{load_experiment_config, ExperimentConfig};
use ecg_bench::data::{load_feature_tensor, load_manifest, save_feature_tensor, split_dataset, FeatureTensor, SplitSet};
use ecg_bench::dsp::preprocess_dataset;
use ecg_bench::eval::{
    compare_models, emit_chart, emit_report_json, evaluate_checkpoint, evaluate_predictions, ModelComparison,
};
use ecg_bench::hash::hex64;
use ecg_bench::nn::{grad_check, ModelKind, ModelSpec};
use ecg_bench::svm::{svm_features, svm_predict, svm_train};
use ecg_bench::synth::generate_dataset;
use ecg_bench::train::{history_path, load_checkpoint, save_checkpoint, save_history, train_model, Checkpoint};
use ecg_bench::Error;
use rayon::prelude::*;

use crate::Common;

pub const GRADCHECK_TOLERANCE: f64 = 1e-4;
const GRADCHECK_EPS: f64 = 1e-5;
const THREADS_VAR: &str = "ECG_BENCH_THREADS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Data(_) => 2,
            CliError::Check(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Check(m) => f.write_str(m),
            CliError::Data(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_data_error() {
            CliError::Data(e)
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// A network architecture or the linear SVM baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelArg {
    Net(ModelKind),
    Svm,
}

impl FromStr for ModelArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("svm") {
            return Ok(ModelArg::Svm);
        }
        s.parse().map(ModelArg::Net).map_err(|_| {
            format!("unknown model {s:?} (expected CNN, GRU, LSTM, ATTN, BIGRU, BILSTM or SVM)")
        })
    }
}

fn load_config(common: &Common) -> CliResult<ExperimentConfig> {
    Ok(match &common.config {
        Some(path) => load_experiment_config(path)?,
        None => ExperimentConfig::default(),
    })
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|source| {
        CliError::Data(Error::Io {
            path: dir.to_path_buf(),
            source,
        })
    })
}

/// Loads the tensor and checks it was built with the configured
/// preprocessing, whose split seed also fixes the train/val/test split.
fn load_tensor_and_split(cfg: &ExperimentConfig, path: &Path) -> CliResult<(FeatureTensor, SplitSet)> {
    let tensor = load_feature_tensor(path)?;
    let expected = cfg.preprocess.hash();
    if tensor.config_hash() != expected {
        return Err(CliError::Data(Error::Integrity(format!(
            "{} was built with preprocessing {}, the config describes {}; pass the config (and split seed) used for preprocess",
            path.display(),
            hex64(tensor.config_hash()),
            hex64(expected)
        ))));
    }
    let split = split_dataset(&tensor, cfg.preprocess.split_ratios, cfg.preprocess.split_seed)?;
    Ok((tensor, split))
}

pub fn synth(common: &Common, out: Option<PathBuf>) -> CliResult {
    let mut cfg = load_config(common)?;
    if let Some(seed) = common.seed {
        cfg.generator.seed = seed;
    }
    let out = out.unwrap_or(cfg.paths.data.clone());
    let manifest = generate_dataset(&cfg.generator, &out)?;
    let [h, l, s] = manifest.class_counts;
    println!(
        "wrote {} records ({h} healthy, {l} LBBB, {s} sLBBB) to {}",
        manifest.len(),
        out.join("manifest.json").display()
    );
    Ok(())
}

pub fn preprocess(common: &Common, manifest: Option<PathBuf>, out: Option<PathBuf>) -> CliResult {
    let mut cfg = load_config(common)?;
    if let Some(seed) = common.seed {
        cfg.preprocess.split_seed = seed;
    }
    let manifest_path = manifest.unwrap_or_else(|| cfg.paths.data.join("manifest.json"));
    let manifest = load_manifest(&manifest_path)?;
    let tensor = preprocess_dataset(&manifest, &cfg.preprocess)?;
    let target = match out {
        Some(dir) => dir.join("tensor"),
        None => cfg.paths.tensor.clone(),
    };
    if let Some(parent) = target.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    save_feature_tensor(&tensor, &target)?;
    let [s, t, c] = tensor.shape();
    println!(
        "wrote {s}x{t}x{c} tensor to {} (config {})",
        target.display(),
        hex64(tensor.config_hash())
    );
    Ok(())
}

pub fn train(
    common: &Common,
    tensor: Option<PathBuf>,
    model: ModelArg,
    split_seed: Option<u64>,
    out: Option<PathBuf>,
) -> CliResult {
    let mut cfg = load_config(common)?;
    if let Some(seed) = split_seed {
        cfg.preprocess.split_seed = seed;
    }
    if let Some(seed) = common.seed {
        cfg.train.seed = seed;
    }
    let tensor_path = tensor.unwrap_or(cfg.paths.tensor.clone());
    let (tensor, split) = load_tensor_and_split(&cfg, &tensor_path)?;
    let out = out.unwrap_or(cfg.paths.runs.clone());
    create_dir(&out)?;
    match model {
        ModelArg::Net(kind) => {
            let spec = cfg.model_spec(kind, tensor.time_steps(), tensor.channels());
            let run = train_model(&spec, &tensor, &split, &cfg.train)?;
            let ckpt = Checkpoint::from_run(&run, tensor.config_hash(), &split);
            save_checkpoint(&ckpt, out.join(kind.name()))?;
            save_history(&run.history, history_path(&out, kind.name()))?;
            println!(
                "{kind}: best val accuracy {:.4} at epoch {} ({} epochs, {:?})",
                run.best_val_accuracy,
                run.best_epoch,
                run.history.len(),
                run.stop_reason
            );
        }
        ModelArg::Svm => {
            let labels = |idx: &[usize]| -> Vec<usize> { idx.iter().map(|&i| tensor.labels()[i].index()).collect() };
            let train_x = svm_features(&tensor.select(&split.train));
            let model = svm_train(&train_x, &labels(&split.train), cfg.svm.lambda, cfg.svm.epochs, cfg.train.seed)?;
            let val_pred = svm_predict(&model, &svm_features(&tensor.select(&split.val)))?;
            let val = evaluate_predictions("SVM", &labels(&split.val), &val_pred, split.test_hash())?;
            let ckpt = Checkpoint::from_svm(&model, val.accuracy, tensor.config_hash(), &split);
            save_checkpoint(&ckpt, out.join("SVM"))?;
            println!("SVM: val accuracy {:.4} after {} epochs", val.accuracy, model.meta.epochs);
        }
    }
    Ok(())
}

/// `ECG_BENCH_THREADS`, or rayon's default when unset.
fn thread_count() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got {v:?}"))),
        },
    }
}

fn discover_checkpoints(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|source| {
        CliError::Data(Error::Io {
            path: dir.to_path_buf(),
            source,
        })
    })?;
    let mut found: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".ckpt.json"))
        .collect();
    found.sort();
    Ok(found)
}

fn print_ranking(cmp: &ModelComparison) {
    println!("test samples: {}", cmp.test_size);
    println!("{:<4} {:<8} {:>9} {:>6} {:>6} {:>8}", "rank", "model", "accuracy", "tp", "errors", "macro_f1");
    for (i, e) in cmp.entries.iter().enumerate() {
        println!(
            "{:<4} {:<8} {:>9.4} {:>6} {:>6} {:>8.4}",
            i + 1,
            e.name,
            e.accuracy,
            e.true_positives,
            e.errors,
            e.report.macro_f1
        );
    }
}

pub fn evaluate(common: &Common, tensor: Option<PathBuf>, checkpoints: Vec<PathBuf>, out: Option<PathBuf>) -> CliResult {
    let mut cfg = load_config(common)?;
    if let Some(seed) = common.seed {
        cfg.preprocess.split_seed = seed;
    }
    let threads = thread_count()?;
    let tensor_path = tensor.unwrap_or(cfg.paths.tensor.clone());
    let (tensor, split) = load_tensor_and_split(&cfg, &tensor_path)?;
    let checkpoints = if checkpoints.is_empty() {
        discover_checkpoints(&cfg.paths.runs)?
    } else {
        checkpoints
    };
    if checkpoints.is_empty() {
        return Err(CliError::Usage("no checkpoints to evaluate".into()));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {THREADS_VAR} worker pool: {e}")))?;
    let evaluations = pool.install(|| {
        checkpoints
            .par_iter()
            .map(|path| load_checkpoint(path).and_then(|ckpt| evaluate_checkpoint(&ckpt, &tensor, &split)))
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let cmp = compare_models(evaluations)?;
    let out = out.unwrap_or(cfg.paths.reports.clone());
    create_dir(&out)?;
    emit_report_json(&cmp, out.join("report.json"))?;
    emit_chart(&cmp, out.join("comparison.svg"))?;
    print_ranking(&cmp);
    Ok(())
}

pub fn gradcheck(common: &Common, model: Option<ModelArg>, all: bool) -> CliResult {
    let kinds = match (all, model) {
        (true, _) => ModelKind::ALL.to_vec(),
        (false, Some(ModelArg::Net(kind))) => vec![kind],
        (false, Some(ModelArg::Svm)) => {
            return Err(CliError::Usage("gradcheck applies to the neural models only".into()))
        }
        (false, None) => return Err(CliError::Usage("pass --model or --all".into())),
    };
    let seed = common.seed.unwrap_or(0);
    println!("{:<7} {:>14} {:>8}  {:<16} status", "model", "max_rel_error", "checked", "worst");
    let mut failed = Vec::new();
    for kind in kinds {
        let spec = ModelSpec::new(kind, 16, 3).with_hidden(8);
        let report = grad_check(&spec, seed, GRADCHECK_EPS)?;
        let ok = report.max_rel_error < GRADCHECK_TOLERANCE;
        println!(
            "{:<7} {:>14.6e} {:>8}  {:<16} {}",
            kind.name(),
            report.max_rel_error,
            report.checked,
            format!("{}[{}]", report.worst_param, report.worst_index),
            if ok { "ok" } else { "FAIL" }
        );
        if !ok {
            failed.push(kind.name());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "gradient check above {GRADCHECK_TOLERANCE:e} for {}",
            failed.join(", ")
        )))
    }
}
