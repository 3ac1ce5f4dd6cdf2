//! Experiment harness behind the `slidercrank` binary.
//!
//! Every command reads one [`ExperimentConfig`] and writes into its output
//! directory the resolved `config.json`, a `run.json` with the tool version
//! and seeds, and its own JSON/CSV results. Wall-clock timings go to
//! `timing.log` so that all JSON and CSV outputs are reproducible byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dataset::{read_json, write_json, Dataset};
use crate::error::{Error, Result};
use crate::identify::{correlation_matrix, rank_sensitivities, sensitivity_matrix};
use crate::neural::{Feature, InputMap};
use crate::nnap::{ModelConfig, NnapModel};
use crate::optimize::{fold_seed, loocv, summarize, sweep_n, train, FitResult, Summary, TrainConfig};
use crate::physics::{slider, PhysParam, PhysParams};
use crate::simulate::{generate_dataset, write_simulation, GroundTruth, SimConfig, GROUND_TRUTH, SEALED_DIR};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "GRAYBOX_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Window lengths of the recurrent sweep.
    pub sweep_ns: Vec<usize>,
    /// Continuation epochs per window length in the sweep.
    pub sweep_epochs: usize,
    /// Held-out trajectories of the sweep; empty means all.
    pub sweep_folds: Vec<usize>,
    /// Input maps compared by `ablate-inputs`; the first is the reference.
    pub ablation_maps: Vec<InputMap>,
    /// Force-surface grid size along d and v.
    pub surface_grid: [usize; 2],
    pub sensitivity_params: Vec<PhysParam>,
    /// Regularization weight of the dissipative network in `decompose`.
    pub decompose_reg_c: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            sweep_ns: vec![1, 8, 64],
            sweep_epochs: 5,
            sweep_folds: vec![],
            ablation_maps: vec![
                InputMap::geometry(),
                InputMap(vec![Feature::Torque]),
                InputMap(vec![Feature::Theta]),
                InputMap(vec![Feature::Omega]),
            ],
            surface_grid: [41, 41],
            sensitivity_params: PhysParam::MECHANISM.to_vec(),
            decompose_reg_c: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub simulate: SimConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub analysis: AnalysisConfig,
}

impl ExperimentConfig {
    /// Parses a config; every key is required and unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.simulate.validate()?;
        self.model.validate()?;
        self.train.validate()?;
        let a = &self.analysis;
        if a.sweep_ns.is_empty() || a.sweep_ns.contains(&0) {
            return Err(Error::Config("sweep_ns must list positive window lengths".into()));
        }
        if a.ablation_maps.len() < 2 || a.ablation_maps.iter().any(|m| m.dim() == 0) {
            return Err(Error::Config("ablation needs at least two non-empty input maps".into()));
        }
        if a.surface_grid.contains(&0) {
            return Err(Error::Config("surface grid dimensions must be positive".into()));
        }
        if !(a.decompose_reg_c >= 0.0) {
            return Err(Error::Config("decompose_reg_c must be non-negative".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Parser)]
#[command(name = "slidercrank", version, about = "Gray-box identification of a slider-crank mechanism")]
pub struct Cli {
    /// Caps the number of worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Dataset directory written by `simulate`, or any directory of CSVs.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one model on every trajectory.
    Train(RunArgs),
    /// Leave-one-trajectory-out cross-validation.
    Loocv(RunArgs),
    /// Recurrent window-length sweep.
    SweepN(RunArgs),
    /// Cross-validated comparison of network input maps.
    AblateInputs(RunArgs),
    /// Train the conservative/dissipative force split.
    Decompose(RunArgs),
    /// Sensitivity and correlation analysis of a trained model.
    Sensitivity {
        #[command(flatten)]
        run: RunArgs,
        /// Trained `model.json`; trained from the config when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Compare a trained model against the sealed ground truth.
    Verify {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the default configuration.
    PrintConfig,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Train(_) => "train",
            Command::Loocv(_) => "loocv",
            Command::SweepN(_) => "sweep-n",
            Command::AblateInputs(_) => "ablate-inputs",
            Command::Decompose(_) => "decompose",
            Command::Sensitivity { .. } => "sensitivity",
            Command::Verify { .. } => "verify",
            Command::PrintConfig => "print-config",
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(jobs) = cli.jobs {
        // the pool may already exist when called repeatedly in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
    }
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error [{}]: {e}", category_name(&e));
            e.category().exit_code()
        }
    }
}

fn category_name(e: &Error) -> &'static str {
    match e.category().exit_code() {
        2 => "config",
        3 => "data",
        _ => "divergence",
    }
}

fn out_dir(out: &Option<PathBuf>, command: &str) -> PathBuf {
    match out {
        Some(p) => p.clone(),
        None => std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out"))
            .join(command),
    }
}

pub fn run(command: &Command) -> Result<()> {
    let name = command.name();
    log::info!("running {name}");
    match command {
        Command::PrintConfig => {
            print!("{}", ExperimentConfig::default().to_json());
            Ok(())
        }
        Command::Simulate { config, out } => {
            let cfg = ExperimentConfig::load(config)?;
            run_simulate(&cfg, &out_dir(out, name))
        }
        Command::Train(a) => with_run(a, name, run_train),
        Command::Loocv(a) => with_run(a, name, run_loocv),
        Command::SweepN(a) => with_run(a, name, run_sweep),
        Command::AblateInputs(a) => with_run(a, name, run_ablation),
        Command::Decompose(a) => with_run(a, name, run_decompose),
        Command::Sensitivity { run, model } => {
            let (cfg, data, out) = load_run(run, name)?;
            let model = match model {
                Some(path) => read_json::<NnapModel>(path)?,
                None => train(&cfg.train, &cfg.model, &data)?.model,
            };
            run_sensitivity(&cfg, &model, &data, &out)
        }
        Command::Verify { data, model, out } => {
            let model: NnapModel = read_json(model)?;
            run_verify(&model, data, &out_dir(out, name))
        }
    }
}

fn load_run(a: &RunArgs, name: &str) -> Result<(ExperimentConfig, Dataset, PathBuf)> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let data = Dataset::read_dir(&a.data)?;
    Ok((cfg, data, out_dir(&a.out, name)))
}

fn with_run(
    a: &RunArgs,
    name: &str,
    f: fn(&ExperimentConfig, &Dataset, &Path) -> Result<()>,
) -> Result<()> {
    let (cfg, data, out) = load_run(a, name)?;
    f(&cfg, &data, &out)
}

/// Writes `config.json` and `run.json` into a fresh output directory.
fn prepare(out: &Path, cfg: &ExperimentConfig, command: &str, seeds: serde_json::Value) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join("config.json"), cfg.to_json())?;
    write_json(
        &out.join("run.json"),
        &json!({
            "command": command,
            "tool_version": crate::VERSION,
            "seeds": seeds,
        }),
    )
}

fn train_seeds(cfg: &ExperimentConfig) -> serde_json::Value {
    json!({ "simulate": cfg.simulate.seed, "train": cfg.train.seed })
}

fn fold_seeds(cfg: &ExperimentConfig, folds: &[usize]) -> serde_json::Value {
    json!({
        "simulate": cfg.simulate.seed,
        "train": cfg.train.seed,
        "folds": folds.iter().map(|&k| json!({"held_out": k, "seed": fold_seed(cfg.train.seed, k)})).collect::<Vec<_>>(),
    })
}

pub fn run_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let sim = generate_dataset(&cfg.simulate)?;
    prepare(out, cfg, "simulate", json!({ "simulate": cfg.simulate.seed }))?;
    write_simulation(&sim, &cfg.simulate, out)
}

fn write_loss_csv(path: &Path, fit: &FitResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "loss"])?;
    for (e, l) in fit.loss_history.iter().enumerate() {
        w.serialize((e + 1, l))?;
    }
    w.flush()?;
    Ok(())
}

/// Physical-parameter convergence trace: one row per epoch, row 0 is the
/// starting point.
fn write_params_csv(path: &Path, fit: &FitResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["epoch".to_string()];
    header.extend(PhysParam::MECHANISM.iter().map(|p| p.name().to_string()));
    w.write_record(&header)?;
    for (e, p) in fit.param_history.iter().enumerate() {
        let mut row = vec![e as f64];
        row.extend(PhysParam::MECHANISM.iter().map(|&j| p.get(j)));
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn append_timing(out: &Path, label: &str, seconds: &[f64]) -> Result<()> {
    let mut text = fs::read_to_string(out.join("timing.log")).unwrap_or_default();
    let _ = writeln!(
        text,
        "{label} epochs={} mean_epoch_seconds={:.6} total_seconds={:.3}",
        seconds.len(),
        seconds.iter().sum::<f64>() / seconds.len().max(1) as f64,
        seconds.iter().sum::<f64>()
    );
    fs::write(out.join("timing.log"), text)?;
    Ok(())
}

fn params_json(p: &PhysParams) -> serde_json::Value {
    serde_json::to_value(p).expect("parameters serialize")
}

fn write_surface(model: &NnapModel, data: &Dataset, cfg: &ExperimentConfig, path: &Path) -> Result<bool> {
    let supports_surface = model.is_decomposed() || model.inputs.0.iter().all(|f| matches!(f, Feature::D | Feature::V));
    if !supports_surface {
        return Ok(false);
    }
    let [nd, nv] = cfg.analysis.surface_grid;
    model.force_surface(data, nd, nv)?.write_csv(path)?;
    Ok(true)
}

pub fn run_train(cfg: &ExperimentConfig, data: &Dataset, out: &Path) -> Result<()> {
    prepare(out, cfg, "train", train_seeds(cfg))?;
    let fit = train(&cfg.train, &cfg.model, data)?;
    finish_fit(cfg, data, out, "train", &fit, cfg.train.reg_c)
}

fn finish_fit(cfg: &ExperimentConfig, data: &Dataset, out: &Path, label: &str, fit: &FitResult, reg_c: f64) -> Result<()> {
    let model = &fit.model;
    write_json(&out.join("model.json"), model)?;
    write_loss_csv(&out.join("loss.csv"), fit)?;
    write_params_csv(&out.join("params.csv"), fit)?;
    let surface = write_surface(model, data, cfg, &out.join("force_surface.csv"))?;
    let rmse = data
        .trajectories
        .iter()
        .map(|t| model.rmse_multistep(t))
        .collect::<Result<Vec<_>>>()?;
    let final_loss = model.loss(data, cfg.train.n, reg_c)?;
    write_json(
        &out.join("metrics.json"),
        &json!({
            "final_loss": final_loss,
            "loss_history_last": fit.loss_history.last(),
            "params": params_json(&model.params),
            "normalized": cfg.model.trainable.iter().map(|&j| json!({
                "param": j.name(), "value": model.params.get(j) / model.reference.get(j)
            })).collect::<Vec<_>>(),
            "train_rmse_omega": rmse,
            "train_rmse_summary": summarize(&rmse),
            "force_surface": surface,
        }),
    )?;
    append_timing(out, label, &fit.epoch_seconds)
}

fn fold_list(data: &Dataset) -> Vec<usize> {
    (0..data.len()).collect()
}

pub fn run_loocv(cfg: &ExperimentConfig, data: &Dataset, out: &Path) -> Result<()> {
    prepare(out, cfg, "loocv", fold_seeds(cfg, &fold_list(data)))?;
    let res = loocv(&cfg.train, &cfg.model, data)?;
    let conv = out.join("convergence");
    fs::create_dir_all(&conv)?;
    let mut w = csv::Writer::from_path(out.join("folds.csv"))?;
    w.write_record(["held_out", "rmse_omega", "failed"])?;
    let mut records = Vec::new();
    for f in &res.folds {
        w.serialize((f.held_out, f.rmse, u8::from(f.failed())))?;
        write_params_csv(&conv.join(format!("fold_{:03}.csv", f.held_out)), &f.fit)?;
        append_timing(out, &format!("fold {}", f.held_out), &f.fit.epoch_seconds)?;
        records.push(json!({
            "held_out": f.held_out,
            "seed": fold_seed(cfg.train.seed, f.held_out),
            "rmse_omega": finite_or_null(f.rmse),
            "failed": f.failed(),
            "params": params_json(&f.fit.model.params),
            "final_loss": f.fit.loss_history.last(),
        }));
    }
    w.flush()?;
    write_json(
        &out.join("loocv.json"),
        &json!({ "folds": records, "summary": summary_json(&res.summary) }),
    )
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

fn summary_json(s: &Summary) -> serde_json::Value {
    json!({
        "median": finite_or_null(s.median),
        "p90": finite_or_null(s.p90),
        "min": finite_or_null(s.min),
        "max": finite_or_null(s.max),
        "failed": s.failed,
    })
}

pub fn run_sweep(cfg: &ExperimentConfig, data: &Dataset, out: &Path) -> Result<()> {
    let a = &cfg.analysis;
    let folds = if a.sweep_folds.is_empty() {
        fold_list(data)
    } else {
        a.sweep_folds.clone()
    };
    if let Some(&bad) = folds.iter().find(|&&k| k >= data.len()) {
        return Err(Error::Config(format!("sweep fold {bad} out of range for {} trajectories", data.len())));
    }
    prepare(out, cfg, "sweep-n", fold_seeds(cfg, &folds))?;
    let res = sweep_n(&cfg.train, &cfg.model, data, &a.sweep_ns, a.sweep_epochs, &folds)?;
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    w.write_record(["held_out", "n", "rmse_omega"])?;
    for f in &res.folds {
        for (i, &n) in res.ns.iter().enumerate() {
            w.serialize((f.held_out, n, f.rmse[i]))?;
            append_timing(out, &format!("fold {} N={n}", f.held_out), &f.epoch_seconds[i])?;
        }
    }
    w.flush()?;
    write_json(
        &out.join("sweep.json"),
        &json!({
            "ns": res.ns,
            "base_rmse": res.folds.iter().map(|f| json!({"held_out": f.held_out, "rmse_omega": finite_or_null(f.base_rmse)})).collect::<Vec<_>>(),
            "folds": res.folds.iter().map(|f| json!({
                "held_out": f.held_out,
                "rmse_omega": f.rmse.iter().map(|&r| finite_or_null(r)).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "summaries": res.ns.iter().zip(&res.summaries).map(|(n, s)| json!({"n": n, "summary": summary_json(s)})).collect::<Vec<_>>(),
        }),
    )
}

/// Per-map cross-validated RMSE, shared by the CLI and callers that want the
/// numbers directly.
pub struct Ablation {
    pub labels: Vec<String>,
    /// `rmse[m][k]`: map `m`, held-out trajectory `k`.
    pub rmse: Vec<Vec<f64>>,
}

impl Ablation {
    /// Fraction of folds where the reference map (index 0) beats map `m`.
    pub fn win_fraction(&self, m: usize) -> f64 {
        let wins = self.rmse[0]
            .iter()
            .zip(&self.rmse[m])
            .filter(|(a, b)| a < b)
            .count();
        wins as f64 / self.rmse[0].len() as f64
    }
}

pub fn ablate_inputs(cfg: &ExperimentConfig, data: &Dataset) -> Result<Ablation> {
    let mut labels = Vec::new();
    let mut rmse = Vec::new();
    for map in &cfg.analysis.ablation_maps {
        let model_cfg = ModelConfig {
            inputs: map.clone(),
            decomposed: false,
            ..cfg.model.clone()
        };
        let res = loocv(&cfg.train, &model_cfg, data)?;
        labels.push(map.label());
        rmse.push(res.folds.iter().map(|f| f.rmse).collect());
    }
    Ok(Ablation { labels, rmse })
}

pub fn run_ablation(cfg: &ExperimentConfig, data: &Dataset, out: &Path) -> Result<()> {
    prepare(out, cfg, "ablate-inputs", fold_seeds(cfg, &fold_list(data)))?;
    let ab = ablate_inputs(cfg, data)?;
    let mut w = csv::Writer::from_path(out.join("ablation.csv"))?;
    w.write_record(["map", "held_out", "rmse_omega"])?;
    for (label, r) in ab.labels.iter().zip(&ab.rmse) {
        for (k, v) in r.iter().enumerate() {
            w.serialize((label, k, v))?;
        }
    }
    w.flush()?;
    let maps: Vec<_> = ab
        .labels
        .iter()
        .enumerate()
        .map(|(m, label)| {
            json!({
                "map": label,
                "summary": summary_json(&summarize(&ab.rmse[m])),
                "reference_win_fraction": if m == 0 { serde_json::Value::Null } else { json!(ab.win_fraction(m)) },
            })
        })
        .collect();
    write_json(&out.join("ablation.json"), &json!({ "maps": maps }))
}

pub fn run_decompose(cfg: &ExperimentConfig, data: &Dataset, out: &Path) -> Result<()> {
    prepare(out, cfg, "decompose", train_seeds(cfg))?;
    let model_cfg = ModelConfig {
        decomposed: true,
        ..cfg.model.clone()
    };
    let train_cfg = TrainConfig {
        reg_c: cfg.analysis.decompose_reg_c,
        ..cfg.train.clone()
    };
    let fit = train(&train_cfg, &model_cfg, data)?;
    finish_fit(cfg, data, out, "decompose", &fit, train_cfg.reg_c)
}

pub fn run_sensitivity(cfg: &ExperimentConfig, model: &NnapModel, data: &Dataset, out: &Path) -> Result<()> {
    prepare(out, cfg, "sensitivity", train_seeds(cfg))?;
    write_json(&out.join("model.json"), model)?;
    let s = sensitivity_matrix(model, data, &cfg.analysis.sensitivity_params)?;
    s.write_csv(&out.join("sensitivity.csv"))?;
    let ranked = rank_sensitivities(&s);
    let mut w = csv::Writer::from_path(out.join("norms.csv"))?;
    w.write_record(["feature", "norm"])?;
    for (label, n) in &ranked {
        w.serialize((label, n))?;
    }
    w.flush()?;
    let q = correlation_matrix(&s)?;
    q.write_csv(&out.join("correlation.csv"))?;
    write_json(
        &out.join("sensitivity.json"),
        &json!({
            "rows": s.rows(),
            "ranking": ranked.iter().map(|(l, n)| json!({"feature": l, "norm": n})).collect::<Vec<_>>(),
            "labels": q.labels,
            "correlation": q.q,
        }),
    )
}

/// Reads the sealed ground truth of a dataset directory.
pub fn read_ground_truth(data_dir: &Path) -> Result<GroundTruth> {
    read_json(&data_dir.join(SEALED_DIR).join(GROUND_TRUTH))
}

/// Force and parameter errors of `model` against the truth sealed in `data_dir`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    /// RMSE of the extracted force over every measured sample (N).
    pub force_rmse: f64,
    /// Full range of the injected force over the same samples (N).
    pub force_range: f64,
    /// Relative error of every trainable parameter.
    pub param_errors: Vec<(String, f64)>,
    /// RMSE of η_c against the spring term, decomposed models only.
    pub spring_rmse: Option<f64>,
    pub spring_range: Option<f64>,
}

pub fn verify(model: &NnapModel, data: &Dataset, truth: &GroundTruth) -> Result<Verification> {
    let mut se = 0.0;
    let mut se_c = 0.0;
    let mut count = 0usize;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut slo, mut shi) = (f64::INFINITY, f64::NEG_INFINITY);
    for tr in &data.trajectories {
        for k in 0..tr.len() {
            let (d, v) = slider(tr.state(k), &truth.params);
            let f = truth.load.force(d, v);
            let fs = truth.load.spring(d);
            let est = model.force_at(tr.state(k), tr.torque[k]);
            se += (est.z - f).powi(2);
            if let Some(zc) = est.z_c {
                se_c += (zc - fs).powi(2);
            }
            lo = lo.min(f);
            hi = hi.max(f);
            slo = slo.min(fs);
            shi = shi.max(fs);
            count += 1;
        }
    }
    let n = count.max(1) as f64;
    Ok(Verification {
        force_rmse: (se / n).sqrt(),
        force_range: hi - lo,
        param_errors: model
            .trainable
            .iter()
            .map(|&j| (j.name().to_string(), model.params.get(j) / truth.params.get(j) - 1.0))
            .collect(),
        spring_rmse: model.is_decomposed().then(|| (se_c / n).sqrt()),
        spring_range: model.is_decomposed().then_some(shi - slo),
    })
}

pub fn run_verify(model: &NnapModel, data_dir: &Path, out: &Path) -> Result<()> {
    let data = Dataset::read_dir(data_dir)?;
    let truth = read_ground_truth(data_dir)?;
    let v = verify(model, &data, &truth)?;
    fs::create_dir_all(out)?;
    write_json(
        &out.join("run.json"),
        &json!({ "command": "verify", "tool_version": crate::VERSION, "seeds": {} }),
    )?;
    write_json(&out.join("verify.json"), &v)
}
