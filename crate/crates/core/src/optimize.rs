//! Joint identification of physical parameters and network weights: Adam
//! over shuffled minibatches of windows, the leave-one-out harness and the
//! recurrent step-size sweep.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::nnap::{windows, ModelConfig, NnapModel};
use crate::physics::{PhysParam, PhysParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates with the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl Moments {
    pub fn new(n: usize) -> Moments {
        Moments {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(params: &mut [f64], grads: &[f64], moments: &mut Moments, hyper: &AdamHyper) -> Result<()> {
    if params.len() != grads.len() || moments.m.len() != params.len() {
        return Err(Error::ShapeMismatch(format!(
            "adam: {} parameters, {} gradients, {} moments",
            params.len(),
            grads.len(),
            moments.m.len()
        )));
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient(i));
    }
    moments.t += 1;
    let t = moments.t as i32;
    let c1 = 1.0 - hyper.beta1.powi(t);
    let c2 = 1.0 - hyper.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        moments.m[i] = hyper.beta1 * moments.m[i] + (1.0 - hyper.beta1) * g;
        moments.v[i] = hyper.beta2 * moments.v[i] + (1.0 - hyper.beta2) * g * g;
        let mh = moments.m[i] / c1;
        let vh = moments.v[i] / c2;
        params[i] -= hyper.lr * mh / (vh.sqrt() + hyper.eps);
    }
    Ok(())
}

/// `p̃_j = p_j / p_ref_j` for each listed parameter.
pub fn normalize_params(p: &PhysParams, p_ref: &PhysParams, which: &[PhysParam]) -> Vec<f64> {
    which.iter().map(|&j| p.get(j) / p_ref.get(j)).collect()
}

/// Inverse of [`normalize_params`]; unlisted parameters are taken from `base`.
pub fn denormalize_params(scaled: &[f64], p_ref: &PhysParams, which: &[PhysParam], base: &PhysParams) -> PhysParams {
    let mut p = *base;
    for (&j, &s) in which.iter().zip(scaled) {
        p.set(j, s * p_ref.get(j));
    }
    p
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Window length N.
    pub n: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamHyper,
    /// Trainable parameters start uniformly within `±init_band` of nominal
    /// and stay inside that box.
    pub init_band: f64,
    /// Fixed parameters are perturbed uniformly within `±jitter_band`.
    pub jitter_band: f64,
    pub seed: u64,
    pub reg_c: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n: 1,
            epochs: 100,
            batch_size: 200,
            adam: AdamHyper::default(),
            init_band: 0.5,
            jitter_band: 0.1,
            seed: 1,
            reg_c: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.batch_size == 0 {
            return Err(Error::Config("window length and batch size must be at least 1".into()));
        }
        for (name, b) in [("init_band", self.init_band), ("jitter_band", self.jitter_band)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        if !(self.adam.lr >= 0.0) || !(0.0..1.0).contains(&self.adam.beta1) || !(0.0..1.0).contains(&self.adam.beta2) {
            return Err(Error::Config("invalid Adam hyperparameters".into()));
        }
        if !(self.reg_c >= 0.0) {
            return Err(Error::Config("reg_c must be non-negative".into()));
        }
        Ok(())
    }

    /// Starting parameters: trainable ones drawn in the init band, fixed ones
    /// jittered; gravity is never perturbed.
    pub fn initial_params(&self, nominal: &PhysParams, trainable: &[PhysParam]) -> PhysParams {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        nominal.map(|j, v| {
            let band = if j == PhysParam::G {
                0.0
            } else if trainable.contains(&j) {
                self.init_band
            } else {
                self.jitter_band
            };
            let u: f64 = rng.gen_range(-1.0..=1.0);
            v * (1.0 + band * u)
        })
    }
}

/// Outcome of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: NnapModel,
    /// Mean minibatch objective per epoch.
    pub loss_history: Vec<f64>,
    /// Physical parameters before training and after every epoch.
    pub param_history: Vec<PhysParams>,
    pub epoch_seconds: Vec<f64>,
}

/// Builds a model from `nominal` and trains it on `data`.
pub fn train(cfg: &TrainConfig, model_cfg: &ModelConfig, data: &Dataset) -> Result<FitResult> {
    cfg.validate()?;
    let start = cfg.initial_params(&model_cfg.nominal, &model_cfg.trainable);
    let model = NnapModel::new(model_cfg, data, start, cfg.seed)?;
    train_from(model, cfg, data)
}

/// Continues training an existing model.
pub fn train_from(mut model: NnapModel, cfg: &TrainConfig, data: &Dataset) -> Result<FitResult> {
    cfg.validate()?;
    let mut all = windows(data, cfg.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x005e_ed0f_ba7c_u64);
    let mut theta = model.flat();
    let np = model.trainable.len();
    let (lo, hi) = (1.0 - cfg.init_band, 1.0 + cfg.init_band);
    let mut moments = Moments::new(theta.len());
    let mut loss_history = Vec::with_capacity(cfg.epochs);
    let mut param_history = Vec::with_capacity(cfg.epochs + 1);
    let mut epoch_seconds = Vec::with_capacity(cfg.epochs);
    param_history.push(model.params);
    let mut batch_id = 0usize;
    for _ in 0..cfg.epochs {
        let clock = Instant::now();
        all.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut count = 0usize;
        for batch in all.chunks(cfg.batch_size) {
            let (l, g) = model
                .batch_gradient(data, batch, cfg.n, cfg.reg_c)
                .map_err(|e| match e {
                    Error::NonFiniteValue(_) | Error::NonFiniteGradient(_) => Error::NonFiniteGradient(batch_id),
                    other => other,
                })?;
            adam_step(&mut theta, &g, &mut moments, &cfg.adam).map_err(|e| match e {
                Error::NonFiniteGradient(_) => Error::NonFiniteGradient(batch_id),
                other => other,
            })?;
            for x in theta[..np].iter_mut() {
                *x = x.clamp(lo, hi);
            }
            model.set_flat(&theta);
            sum += l;
            count += 1;
            batch_id += 1;
        }
        loss_history.push(sum / count.max(1) as f64);
        log::debug!("epoch {}: loss {:.4e}", loss_history.len(), sum / count.max(1) as f64);
        param_history.push(model.params);
        epoch_seconds.push(clock.elapsed().as_secs_f64());
    }
    Ok(FitResult {
        model,
        loss_history,
        param_history,
        epoch_seconds,
    })
}

/// Median, 90th percentile and extremes over the finite entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub p90: f64,
    pub min: f64,
    pub max: f64,
    pub failed: usize,
}

pub fn summarize(values: &[f64]) -> Summary {
    let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    finite.sort_by(f64::total_cmp);
    let failed = values.len() - finite.len();
    if finite.is_empty() {
        return Summary {
            median: f64::NAN,
            p90: f64::NAN,
            min: f64::NAN,
            max: f64::NAN,
            failed,
        };
    }
    Summary {
        median: quantile(&finite, 0.5),
        p90: quantile(&finite, 0.9),
        min: finite[0],
        max: finite[finite.len() - 1],
        failed,
    }
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    pub held_out: usize,
    /// Multistep ω-RMSE on the held-out trajectory, infinite if diverged.
    pub rmse: f64,
    pub fit: FitResult,
}

impl Fold {
    pub fn failed(&self) -> bool {
        !self.rmse.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoocvResult {
    pub folds: Vec<Fold>,
    pub summary: Summary,
}

/// Seed of fold `k` derived from the base seed.
pub fn fold_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add(1000 * (k as u64 + 1))
}

/// Leave-one-trajectory-out cross-validation. Each fold fits its own input
/// scaling and loss weights on its training split.
pub fn loocv(cfg: &TrainConfig, model_cfg: &ModelConfig, data: &Dataset) -> Result<LoocvResult> {
    if data.len() < 2 {
        return Err(Error::Data("cross-validation needs at least two trajectories".into()));
    }
    let folds = (0..data.len())
        .into_par_iter()
        .map(|k| {
            let fold_cfg = TrainConfig {
                seed: fold_seed(cfg.seed, k),
                ..cfg.clone()
            };
            let fit = train(&fold_cfg, model_cfg, &data.without(k))?;
            let rmse = fit.model.rmse_multistep(&data.trajectories[k])?;
            Ok(Fold { held_out: k, rmse, fit })
        })
        .collect::<Result<Vec<_>>>()?;
    let rmse: Vec<f64> = folds.iter().map(|f| f.rmse).collect();
    Ok(LoocvResult {
        summary: summarize(&rmse),
        folds,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFold {
    pub held_out: usize,
    /// RMSE of the shared N = 1 starting model.
    pub base_rmse: f64,
    /// RMSE after continued training, one per swept N.
    pub rmse: Vec<f64>,
    /// Per-epoch training seconds, one list per swept N.
    pub epoch_seconds: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub ns: Vec<usize>,
    pub folds: Vec<SweepFold>,
    pub summaries: Vec<Summary>,
}

/// Recurrent step-size sweep over the given folds: every fold trains one
/// N = 1 model with `cfg`, then continues it for `extra_epochs` at each N.
pub fn sweep_n(
    cfg: &TrainConfig,
    model_cfg: &ModelConfig,
    data: &Dataset,
    ns: &[usize],
    extra_epochs: usize,
    held_out: &[usize],
) -> Result<SweepResult> {
    if data.len() < 2 {
        return Err(Error::Data("the sweep needs at least two trajectories".into()));
    }
    let folds = held_out
        .par_iter()
        .map(|&k| {
            let train_data = data.without(k);
            let base_cfg = TrainConfig {
                n: 1,
                seed: fold_seed(cfg.seed, k),
                ..cfg.clone()
            };
            let base = train(&base_cfg, model_cfg, &train_data)?;
            let test = &data.trajectories[k];
            let base_rmse = base.model.rmse_multistep(test)?;
            let mut rmse = Vec::with_capacity(ns.len());
            let mut epoch_seconds = Vec::with_capacity(ns.len());
            for &n in ns {
                let cont = TrainConfig {
                    n,
                    epochs: extra_epochs,
                    ..base_cfg.clone()
                };
                let fit = train_from(base.model.clone(), &cont, &train_data)?;
                rmse.push(fit.model.rmse_multistep(test)?);
                epoch_seconds.push(fit.epoch_seconds);
            }
            Ok(SweepFold {
                held_out: k,
                base_rmse,
                rmse,
                epoch_seconds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summaries = (0..ns.len())
        .map(|i| summarize(&folds.iter().map(|f| f.rmse[i]).collect::<Vec<_>>()))
        .collect();
    Ok(SweepResult {
        ns: ns.to_vec(),
        folds,
        summaries,
    })
}
