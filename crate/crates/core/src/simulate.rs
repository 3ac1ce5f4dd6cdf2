//! Ground-truth data generation: RK4 integration of the full mechanism under
//! an injected slider load, driven by a family of torque profiles.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{write_json, Dataset, Trajectory};
use crate::error::{Error, Result};
use crate::physics::{self, kinematics, PhysParams, State};

/// Rollouts with |ω| above this are treated as diverged.
pub const OMEGA_GUARD: f64 = 1e4;

pub const SEALED_DIR: &str = "sealed";
pub const GROUND_TRUTH: &str = "ground_truth.json";

/// Slider load: a compression spring engaging below `d_c` plus smoothed
/// Coulomb and viscous friction.
///
/// `force` follows the sign convention of the dynamics: positive values push
/// the slider towards negative x, so the spring term is negative (it pushes
/// the slider back out of compression) and friction has the sign of `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadModel {
    pub k: f64,
    pub d_c: f64,
    pub f_c: f64,
    pub b_v: f64,
    pub v_eps: f64,
}

impl Default for LoadModel {
    fn default() -> Self {
        LoadModel {
            k: 2000.0,
            d_c: 0.05,
            f_c: 5.0,
            b_v: 2.0,
            v_eps: 0.01,
        }
    }
}

impl LoadModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.k >= 0.0 && self.f_c >= 0.0 && self.b_v >= 0.0 && self.v_eps > 0.0) {
            return Err(Error::Config(format!(
                "load model requires k, f_c, b_v >= 0 and v_eps > 0: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn without_spring(self) -> LoadModel {
        LoadModel { k: 0.0, ..self }
    }

    pub fn without_friction(self) -> LoadModel {
        LoadModel {
            f_c: 0.0,
            b_v: 0.0,
            ..self
        }
    }

    /// Position-only (conservative) part.
    pub fn spring(&self, d: f64) -> f64 {
        -self.k * (self.d_c - d).max(0.0)
    }

    /// Velocity-dependent (dissipative) part.
    pub fn friction(&self, v: f64) -> f64 {
        self.f_c * (v / self.v_eps).tanh() + self.b_v * v
    }

    pub fn force(&self, d: f64, v: f64) -> f64 {
        self.spring(d) + self.friction(v)
    }

    /// Potential whose negative gradient along `d` is the spring's push on the slider.
    pub fn spring_potential(&self, d: f64) -> f64 {
        0.5 * self.k * (self.d_c - d).max(0.0).powi(2)
    }
}

pub fn ground_truth_force(d: f64, v: f64, load: &LoadModel) -> f64 {
    load.force(d, v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileShape {
    /// Weighted sum of sines; a zero frequency gives a constant term.
    Multisine { components: Vec<SineComponent> },
    /// Linear chirp between two frequencies over the profile duration.
    Chirp { f0: f64, f1: f64, phase: f64 },
    /// Levels in [-1, 1] held for `segment` seconds each, cycling.
    PiecewiseConstant { levels: Vec<f64>, segment: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SineComponent {
    pub freq: f64,
    pub phase: f64,
    pub weight: f64,
}

/// Motor torque signal `T(t)` with `|T| <= amplitude`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorqueProfile {
    pub amplitude: f64,
    pub duration: f64,
    pub theta0: f64,
    pub shape: ProfileShape,
}

impl TorqueProfile {
    pub fn torque(&self, t: f64) -> f64 {
        let unit = match &self.shape {
            ProfileShape::Multisine { components } => {
                let total: f64 = components.iter().map(|c| c.weight.abs()).sum();
                if total == 0.0 {
                    0.0
                } else {
                    components
                        .iter()
                        .map(|c| c.weight * (2.0 * PI * c.freq * t + c.phase).sin())
                        .sum::<f64>()
                        / total
                }
            }
            ProfileShape::Chirp { f0, f1, phase } => {
                let rate = (f1 - f0) / self.duration.max(f64::MIN_POSITIVE);
                (2.0 * PI * (f0 * t + 0.5 * rate * t * t) + phase).sin()
            }
            ProfileShape::PiecewiseConstant { levels, segment } => {
                if levels.is_empty() {
                    0.0
                } else {
                    let idx = (t / segment).floor().max(0.0) as usize % levels.len();
                    levels[idx].clamp(-1.0, 1.0)
                }
            }
        };
        self.amplitude * unit
    }
}

/// Integrates the mechanism with classic RK4 at step `dt_int`, holding the
/// torque constant over each sampling interval, and records `samples` states
/// every `dt_sample` starting from `x0`.
pub fn integrate_rk4(
    x0: State,
    profile: &TorqueProfile,
    p: &PhysParams,
    load: &LoadModel,
    dt_int: f64,
    dt_sample: f64,
    samples: usize,
) -> Result<Trajectory> {
    let substeps = (dt_sample / dt_int).round();
    if substeps < 1.0 || ((substeps * dt_int - dt_sample) / dt_sample).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "integration step {dt_int} must divide the sampling interval {dt_sample}"
        )));
    }
    let substeps = substeps as usize;
    let h = dt_sample / substeps as f64;
    let rhs = |x: [f64; 2], torque: f64| -> Result<[f64; 2]> {
        let s = State::new(x[0], x[1]);
        let k = kinematics(s, p);
        let f = load.force(k.d, k.v);
        Ok([x[1], physics::forward_dynamics_in(s, torque, f, p, &k)?])
    };
    let rk4_step = |x: [f64; 2], torque: f64, h: f64| -> Result<[f64; 2]> {
        let k1 = rhs(x, torque)?;
        let k2 = rhs([x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]], torque)?;
        let k3 = rhs([x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]], torque)?;
        let k4 = rhs([x[0] + h * k3[0], x[1] + h * k3[1]], torque)?;
        Ok(std::array::from_fn(|i| {
            x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        }))
    };
    let contact_gap = |x: [f64; 2]| -> Result<f64> {
        Ok(kinematics(State::new(x[0], x[1]), p).d - load.d_c)
    };
    let mut tr = Trajectory {
        t: Vec::with_capacity(samples),
        theta: Vec::with_capacity(samples),
        omega: Vec::with_capacity(samples),
        torque: Vec::with_capacity(samples),
    };
    let mut x = [x0.theta, x0.omega];
    for k in 0..samples {
        let t = k as f64 * dt_sample;
        let torque = profile.torque(t);
        tr.t.push(t);
        tr.theta.push(x[0]);
        tr.omega.push(x[1]);
        tr.torque.push(torque);
        if k + 1 == samples {
            break;
        }
        for _ in 0..substeps {
            let next = rk4_step(x, torque, h)?;
            // The spring force has a kink at contact; stepping across it
            // would cost two orders of accuracy, so split the step there.
            let (g0, g1) = (contact_gap(x)?, contact_gap(next)?);
            x = if load.k != 0.0 && g0 * g1 < 0.0 {
                let (mut lo, mut hi) = (0.0, h);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if contact_gap(rk4_step(x, torque, mid)?)? * g0 > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let at_contact = rk4_step(x, torque, hi)?;
                rk4_step(at_contact, torque, h - hi)?
            } else {
                next
            };
            if !(x[1].abs() <= OMEGA_GUARD) {
                return Err(Error::NonFiniteState {
                    step: k,
                    omega: x[1],
                });
            }
        }
    }
    Ok(tr)
}

/// Zero-mean Gaussian noise on the angle channel. ω is read through the
/// same channel, so it carries the angle noise differentiated by a central
/// difference rather than a noise source of its own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Noise {
    None,
    Gaussian { sigma: f64 },
    /// Gaussian with σ equal to one count of an 8192 CPR encoder.
    Encoder,
}

impl Noise {
    pub fn sigma(&self) -> f64 {
        match *self {
            Noise::None => 0.0,
            Noise::Gaussian { sigma } => sigma,
            Noise::Encoder => 2.0 * PI / 8192.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub num_profiles: usize,
    pub initial_angles: Vec<f64>,
    pub samples: usize,
    pub dt: f64,
    pub substeps: usize,
    /// Torque amplitudes are spread geometrically over this range (N·m).
    pub amplitude_range: [f64; 2],
    pub params: PhysParams,
    pub load: LoadModel,
    pub spring: bool,
    pub noise: Noise,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 2021,
            num_profiles: 10,
            initial_angles: vec![0.0, PI / 2.0],
            samples: 800,
            dt: 5e-4,
            substeps: 20,
            amplitude_range: [0.4, 3.0],
            params: PhysParams::table_one(),
            load: LoadModel::default(),
            spring: true,
            noise: Noise::None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.load.validate()?;
        if self.num_profiles == 0 || self.initial_angles.is_empty() {
            return Err(Error::Config("need at least one profile and one initial angle".into()));
        }
        if self.samples < 2 || !(self.dt > 0.0) || self.substeps == 0 {
            return Err(Error::Config("samples >= 2, dt > 0 and substeps >= 1 required".into()));
        }
        let [lo, hi] = self.amplitude_range;
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::Config(format!("invalid amplitude range {lo}..{hi}")));
        }
        if !(self.noise.sigma() >= 0.0) {
            return Err(Error::Config("noise sigma must be non-negative".into()));
        }
        Ok(())
    }

    pub fn effective_load(&self) -> LoadModel {
        if self.spring {
            self.load
        } else {
            self.load.without_spring()
        }
    }

    fn duration(&self) -> f64 {
        self.samples as f64 * self.dt
    }

    /// The torque family: kinds cycle through multisine, chirp and
    /// piecewise-constant while amplitudes grow geometrically.
    pub fn profiles(&self) -> Vec<TorqueProfile> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let [lo, hi] = self.amplitude_range;
        let n = self.num_profiles;
        let duration = self.duration();
        let mut shapes = Vec::with_capacity(n);
        for i in 0..n {
            let frac = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            let amplitude = lo * (hi / lo).powf(frac);
            let shape = match i % 3 {
                0 => {
                    let mut components = vec![SineComponent {
                        freq: 0.0,
                        phase: if rng.gen_bool(0.5) { PI / 2.0 } else { -PI / 2.0 },
                        weight: rng.gen_range(0.3..0.8),
                    }];
                    for _ in 0..3 {
                        components.push(SineComponent {
                            freq: rng.gen_range(1.0..12.0),
                            phase: rng.gen_range(0.0..2.0 * PI),
                            weight: rng.gen_range(0.2..1.0),
                        });
                    }
                    ProfileShape::Multisine { components }
                }
                1 => ProfileShape::Chirp {
                    f0: rng.gen_range(0.5..2.0),
                    f1: rng.gen_range(6.0..15.0),
                    phase: rng.gen_range(0.0..2.0 * PI),
                },
                _ => {
                    let segments = rng.gen_range(3..6);
                    let levels = (0..segments).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    // segment boundaries on the sampling grid
                    let per = (self.samples / segments).max(1);
                    ProfileShape::PiecewiseConstant {
                        levels,
                        segment: per as f64 * self.dt,
                    }
                }
            };
            shapes.push((amplitude, shape));
        }
        let mut out = Vec::with_capacity(n * self.initial_angles.len());
        for (amplitude, shape) in shapes {
            for &theta0 in &self.initial_angles {
                out.push(TorqueProfile {
                    amplitude,
                    duration,
                    theta0,
                    shape: shape.clone(),
                });
            }
        }
        out
    }
}

/// Adds `noise` to θ and its central-difference derivative to ω (one-sided
/// at both ends).
pub fn add_encoder_noise(tr: &mut Trajectory, noise: &[f64], dt: f64) {
    let n = tr.len();
    for k in 0..n {
        tr.theta[k] += noise[k];
        let slope = if n < 2 {
            0.0
        } else if k == 0 {
            (noise[1] - noise[0]) / dt
        } else if k == n - 1 {
            (noise[n - 1] - noise[n - 2]) / dt
        } else {
            (noise[k + 1] - noise[k - 1]) / (2.0 * dt)
        };
        tr.omega[k] += slope;
    }
}

/// Simulated data plus the sealed truth that produced it.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub dataset: Dataset,
    pub profiles: Vec<TorqueProfile>,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub params: PhysParams,
    pub load: LoadModel,
}

pub fn generate_dataset(cfg: &SimConfig) -> Result<Simulation> {
    cfg.validate()?;
    let profiles = cfg.profiles();
    let load = cfg.effective_load();
    let sigma = cfg.noise.sigma();
    let dt_int = cfg.dt / cfg.substeps as f64;
    let trajectories = profiles
        .par_iter()
        .enumerate()
        .map(|(i, profile)| {
            let x0 = State::new(profile.theta0, 0.0);
            let mut tr = integrate_rk4(x0, profile, &cfg.params, &load, dt_int, cfg.dt, cfg.samples)
                .map_err(|e| match e {
                    Error::NonFiniteState { .. } => Error::RolloutDiverged { trajectory: i },
                    other => other,
                })?;
            if sigma > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1 + i as u64));
                let normal = Normal::new(0.0, sigma).expect("valid sigma");
                let noise: Vec<f64> = (0..tr.len()).map(|_| normal.sample(&mut rng)).collect();
                add_encoder_noise(&mut tr, &noise, cfg.dt);
            }
            Ok(tr)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Simulation {
        dataset: Dataset::new(cfg.dt, trajectories)?,
        profiles,
        truth: GroundTruth {
            params: cfg.params,
            load,
        },
    })
}

/// Writes the dataset into `dir` and the ground truth into `dir/sealed/`.
pub fn write_simulation(sim: &Simulation, cfg: &SimConfig, dir: &Path) -> Result<()> {
    let profiles = serde_json::to_value(&sim.profiles)
        .map_err(|e| Error::Data(format!("serializing profiles: {e}")))?;
    sim.dataset.write_dir(dir, cfg.seed, profiles)?;
    let sealed = dir.join(SEALED_DIR);
    fs::create_dir_all(&sealed)?;
    write_json(&sealed.join(GROUND_TRUTH), &sim.truth)
}
