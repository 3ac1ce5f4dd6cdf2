//! One-hidden-layer ReLU network with a frozen diagonal input scaling.
//!
//! `z = W_oᵀ · max(0, W_hᵀ · Σ · q + b_h) + b_o`, where `Σ = diag(1/σ_j)` is
//! fitted once from training data and never updated by the optimizer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::physics::{kinematics, KinematicFrame, PhysParams, State};
use crate::scalar::Real;

/// Smallest admissible standard deviation of an input channel.
pub const MIN_SIGMA: f64 = 1e-12;

/// Quantities the input map can hand to the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    /// slider position
    D,
    /// slider velocity
    V,
    Theta,
    Omega,
    Torque,
}

impl Feature {
    pub fn name(self) -> &'static str {
        match self {
            Feature::D => "d",
            Feature::V => "v",
            Feature::Theta => "theta",
            Feature::Omega => "omega",
            Feature::Torque => "torque",
        }
    }
}

impl std::str::FromStr for Feature {
    type Err = Error;
    fn from_str(s: &str) -> Result<Feature> {
        match s {
            "d" => Ok(Feature::D),
            "v" => Ok(Feature::V),
            "theta" => Ok(Feature::Theta),
            "omega" => Ok(Feature::Omega),
            "torque" | "T" => Ok(Feature::Torque),
            other => Err(Error::Config(format!("unknown network input `{other}`"))),
        }
    }
}

/// Physics-inspired layer producing the network input from state and torque.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InputMap(pub Vec<Feature>);

impl InputMap {
    /// `(d, v)` through the slider-crank geometry.
    pub fn geometry() -> InputMap {
        InputMap(vec![Feature::D, Feature::V])
    }

    pub fn state() -> InputMap {
        InputMap(vec![Feature::Theta, Feature::Omega])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn label(&self) -> String {
        self.0.iter().map(|f| f.name()).collect::<Vec<_>>().join("+")
    }

    pub fn needs_geometry(&self) -> bool {
        self.0.iter().any(|f| matches!(f, Feature::D | Feature::V))
    }

    pub fn apply<R: Real>(&self, x: State<R>, torque: R, frame: &KinematicFrame<R>) -> Vec<R> {
        self.0
            .iter()
            .map(|f| match f {
                Feature::D => frame.d,
                Feature::V => frame.v,
                Feature::Theta => x.theta,
                Feature::Omega => x.omega,
                Feature::Torque => torque,
            })
            .collect()
    }

    /// Network inputs for every sample of every trajectory.
    pub fn samples(&self, data: &Dataset, p: &PhysParams) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(data.total_samples());
        for tr in &data.trajectories {
            for k in 0..tr.len() {
                let x = tr.state(k);
                let frame = kinematics(x, p);
                out.push(self.apply(x, tr.torque[k], &frame));
            }
        }
        out
    }
}

/// Σ = diag(1/σ_j) from the population standard deviation of each channel.
pub fn scaling_from_samples(samples: &[Vec<f64>], names: &[&str]) -> Result<Vec<f64>> {
    let Some(first) = samples.first() else {
        return Err(Error::Data("no samples to fit input scaling".into()));
    };
    let n = samples.len() as f64;
    (0..first.len())
        .map(|j| {
            let mean = samples.iter().map(|s| s[j]).sum::<f64>() / n;
            let var = samples.iter().map(|s| (s[j] - mean).powi(2)).sum::<f64>() / n;
            let sigma = var.sqrt();
            if !(sigma >= MIN_SIGMA) {
                return Err(Error::DegenerateInput {
                    channel: names.get(j).map_or_else(|| j.to_string(), |s| s.to_string()),
                    sigma,
                });
            }
            Ok(1.0 / sigma)
        })
        .collect()
}

pub fn fit_input_scaling(data: &Dataset, map: &InputMap, p: &PhysParams) -> Result<Vec<f64>> {
    let names: Vec<&str> = map.0.iter().map(|f| f.name()).collect();
    scaling_from_samples(&map.samples(data, p), &names)
}

/// Weights and biases of the network plus its frozen input scaling.
///
/// `w_h` is row-major `n_in x n_hidden`, `w_o` is row-major `n_hidden x n_out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetParams {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
    pub w_h: Vec<f64>,
    pub b_h: Vec<f64>,
    pub w_o: Vec<f64>,
    pub b_o: Vec<f64>,
    pub scale: Vec<f64>,
}

impl NetParams {
    /// Uniform fan-in initialization `±sqrt(6 / fan_in)` with zero biases and
    /// unit input scaling.
    pub fn init(n_in: usize, n_hidden: usize, n_out: usize, seed: u64) -> NetParams {
        assert!(n_in > 0 && n_hidden > 0 && n_out > 0, "network dimensions must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound_h = (6.0 / n_in as f64).sqrt();
        let bound_o = (6.0 / n_hidden as f64).sqrt();
        NetParams {
            n_in,
            n_hidden,
            n_out,
            w_h: (0..n_in * n_hidden).map(|_| rng.gen_range(-bound_h..=bound_h)).collect(),
            b_h: vec![0.0; n_hidden],
            w_o: (0..n_hidden * n_out).map(|_| rng.gen_range(-bound_o..=bound_o)).collect(),
            b_o: vec![0.0; n_out],
            scale: vec![1.0; n_in],
        }
    }

    pub fn num_params(&self) -> usize {
        self.w_h.len() + self.b_h.len() + self.w_o.len() + self.b_o.len()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.w_h.len() == self.n_in * self.n_hidden
            && self.b_h.len() == self.n_hidden
            && self.w_o.len() == self.n_hidden * self.n_out
            && self.b_o.len() == self.n_out
            && self.scale.len() == self.n_in;
        if !ok {
            return Err(Error::ShapeMismatch(format!(
                "network {}x{}x{} has inconsistent parameter arrays",
                self.n_in, self.n_hidden, self.n_out
            )));
        }
        if let Some(s) = self.scale.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::ShapeMismatch(format!("input scaling entry {s} must be positive")));
        }
        Ok(())
    }

    /// Trainable parameters in the order `w_h, b_h, w_o, b_o`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.num_params());
        v.extend_from_slice(&self.w_h);
        v.extend_from_slice(&self.b_h);
        v.extend_from_slice(&self.w_o);
        v.extend_from_slice(&self.b_o);
        v
    }

    pub fn unflatten(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.num_params());
        let (a, rest) = v.split_at(self.w_h.len());
        let (b, rest) = rest.split_at(self.b_h.len());
        let (c, d) = rest.split_at(self.w_o.len());
        self.w_h.copy_from_slice(a);
        self.b_h.copy_from_slice(b);
        self.w_o.copy_from_slice(c);
        self.b_o.copy_from_slice(d);
    }

    /// Weights lifted into another scalar type; the scaling stays `f64`.
    pub fn view<R: Real>(&self, lift: impl FnMut(f64) -> R) -> NetView<'_, R> {
        let all: Vec<R> = self.flatten().into_iter().map(lift).collect();
        self.view_from(all)
    }

    /// View whose weights are the given flat vector (same order as [`NetParams::flatten`]).
    pub fn view_from<R: Real>(&self, mut all: Vec<R>) -> NetView<'_, R> {
        let b_o = all.split_off(self.w_h.len() + self.b_h.len() + self.w_o.len());
        let w_o = all.split_off(self.w_h.len() + self.b_h.len());
        let b_h = all.split_off(self.w_h.len());
        NetView {
            net: self,
            w_h: all,
            b_h,
            w_o,
            b_o,
        }
    }

    /// Moves every hidden unit's kink onto a training input drawn at random,
    /// `b_h = −w_hᵀ Σ q`, so that no unit starts dead or purely linear over
    /// the data. Weights and the output bias are left as they are.
    pub fn anchor_biases(&mut self, inputs: &[Vec<f64>], seed: u64) {
        if inputs.is_empty() {
            return;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for h in 0..self.n_hidden {
            let q = &inputs[rng.gen_range(0..inputs.len())];
            self.b_h[h] = -(0..self.n_in)
                .map(|i| self.w_h[i * self.n_hidden + h] * self.scale[i] * q[i])
                .sum::<f64>();
        }
    }

    pub fn eval(&self, q: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.n_in {
            return Err(Error::ShapeMismatch(format!(
                "network expects {} inputs, got {}",
                self.n_in,
                q.len()
            )));
        }
        Ok(self.view(|w| w).eval(q))
    }
}

/// Network weights in scalar type `R`.
pub struct NetView<'a, R> {
    net: &'a NetParams,
    pub w_h: Vec<R>,
    pub b_h: Vec<R>,
    pub w_o: Vec<R>,
    pub b_o: Vec<R>,
}

impl<R: Real> NetView<'_, R> {
    /// Forward pass; `q.len()` must equal `n_in`.
    pub fn eval(&self, q: &[R]) -> Vec<R> {
        let net = self.net;
        let scaled: Vec<R> = q.iter().zip(&net.scale).map(|(&x, &s)| x * s).collect();
        let mut column = Vec::with_capacity(net.n_in);
        let hidden: Vec<R> = (0..net.n_hidden)
            .map(|h| {
                column.clear();
                column.extend((0..net.n_in).map(|i| self.w_h[i * net.n_hidden + h]));
                (R::dot(&column, &scaled) + self.b_h[h]).relu()
            })
            .collect();
        (0..net.n_out)
            .map(|o| {
                column.clear();
                column.extend((0..net.n_hidden).map(|h| self.w_o[h * net.n_out + o]));
                R::dot(&column, &hidden) + self.b_o[o]
            })
            .collect()
    }

    /// Hidden pre-activations, used to keep gradient probes away from kinks.
    pub fn pre_activations(&self, q: &[R]) -> Vec<f64> {
        let net = self.net;
        (0..net.n_hidden)
            .map(|h| {
                let mut acc = self.b_h[h].value();
                for i in 0..net.n_in {
                    acc += self.w_h[i * net.n_hidden + h].value() * q[i].value() * net.scale[i];
                }
                acc
            })
            .collect()
    }
}
