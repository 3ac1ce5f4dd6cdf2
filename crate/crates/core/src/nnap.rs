//! Neural-network-augmented physics: the Euler-stepped hybrid model, its
//! multistep rollout, the windowed loss and its taped gradient.
//!
//! The optimizer works on one flat vector `[p̃..., α...]` where `p̃_j = p_j /
//! p_ref_j` are the trainable physical parameters in normalized form and `α`
//! the network weights (conservative network first in decomposed mode).

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Trajectory};
use crate::error::{Error, Result};
use crate::neural::{fit_input_scaling, scaling_from_samples, Feature, InputMap, NetParams, NetView};
use crate::physics::{forward_dynamics_in, kinematics, KinematicFrame, PhysParam, PhysParams, State};
use crate::scalar::Real;
use crate::tape::Tape;

/// Rollouts leaving `|ω| <= OMEGA_GUARD` are cut off.
pub const OMEGA_GUARD: f64 = 1e4;
/// Loss charged for each step of a window lost to divergence.
pub const DIVERGENCE_PENALTY: f64 = 1e3;

const BIAS_SEED: u64 = 0xb1a5;

/// Architecture part of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Nominal parameters; also the normalization reference `p_ref`.
    pub nominal: PhysParams,
    pub inputs: InputMap,
    pub hidden: usize,
    pub trainable: Vec<PhysParam>,
    pub decomposed: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            nominal: PhysParams::table_one(),
            inputs: InputMap::geometry(),
            hidden: 32,
            trainable: vec![PhysParam::M3, PhysParam::J1, PhysParam::BM],
            decomposed: false,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        self.nominal.validate()?;
        if self.hidden == 0 {
            return Err(Error::Config("hidden layer width must be positive".into()));
        }
        if !self.decomposed && self.inputs.dim() == 0 {
            return Err(Error::Config("input map must select at least one feature".into()));
        }
        if self.trainable.contains(&PhysParam::G) {
            return Err(Error::Config("gravity is not trainable".into()));
        }
        let mut seen = self.trainable.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.trainable.len() {
            return Err(Error::Config("trainable parameter listed twice".into()));
        }
        Ok(())
    }
}

/// Force head: a single network on the configured input map, or a
/// conservative network on `d` plus a dissipative one on `(d, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Head {
    Single { net: NetParams },
    Decomposed { conservative: NetParams, dissipative: NetParams },
}

impl Head {
    fn nets(&self) -> Vec<&NetParams> {
        match self {
            Head::Single { net } => vec![net],
            Head::Decomposed { conservative, dissipative } => vec![conservative, dissipative],
        }
    }

    fn nets_mut(&mut self) -> Vec<&mut NetParams> {
        match self {
            Head::Single { net } => vec![net],
            Head::Decomposed { conservative, dissipative } => vec![conservative, dissipative],
        }
    }

    pub fn num_params(&self) -> usize {
        self.nets().iter().map(|n| n.num_params()).sum()
    }
}

enum HeadView<'a, R> {
    Single(NetView<'a, R>, &'a InputMap),
    Decomposed(NetView<'a, R>, NetView<'a, R>),
}

impl<R: Real> HeadView<'_, R> {
    /// Total force and, in decomposed mode, the dissipative part.
    fn force(&self, x: State<R>, torque: R, frame: &KinematicFrame<R>) -> (R, Option<R>) {
        match self {
            HeadView::Single(net, map) => (net.eval(&map.apply(x, torque, frame))[0], None),
            HeadView::Decomposed(c, nc) => {
                let zc = c.eval(&[frame.d])[0];
                let znc = nc.eval(&[frame.d, frame.v])[0];
                (zc + znc, Some(znc))
            }
        }
    }
}

/// Predicted states `h_1 ..= h_N` of one window, with the weighted squared
/// error of each step when measurements were supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub states: Vec<State>,
    pub squared_errors: Vec<f64>,
}

impl Rollout {
    pub fn horizon(&self) -> usize {
        self.states.len()
    }
}

/// Network output at a slider state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceEval {
    pub z: f64,
    pub z_c: Option<f64>,
    pub z_nc: Option<f64>,
}

/// A window seeded at sample `start` of trajectory `traj`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub traj: usize,
    pub start: usize,
}

/// Every admissible window of length `n`: `L - n` + 1 starts per trajectory
/// (the last start still needs `n` measured successors, so `i <= L - 1 - n`).
pub fn windows(data: &Dataset, n: usize) -> Result<Vec<Window>> {
    let mut out = Vec::new();
    for (s, tr) in data.trajectories.iter().enumerate() {
        let len = tr.len();
        if n == 0 || n + 1 > len {
            return Err(Error::WindowTooLong { n, len });
        }
        out.extend((0..len - n).map(|start| Window { traj: s, start }));
    }
    Ok(out)
}

/// `C = diag(1 / var θ, 1 / var ω)` over every sample of `data`.
pub fn loss_weights(data: &Dataset) -> Result<[f64; 2]> {
    let theta: Vec<Vec<f64>> = data
        .trajectories
        .iter()
        .flat_map(|t| t.theta.iter().zip(&t.omega).map(|(&a, &b)| vec![a, b]))
        .collect();
    let inv = scaling_from_samples(&theta, &["theta", "omega"])?;
    Ok([inv[0] * inv[0], inv[1] * inv[1]])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnapModel {
    /// Current physical parameters, trainable and fixed alike.
    pub params: PhysParams,
    /// Normalization reference `p_ref`.
    pub reference: PhysParams,
    pub trainable: Vec<PhysParam>,
    pub inputs: InputMap,
    pub head: Head,
    pub dt: f64,
    pub weights: [f64; 2],
}

impl NnapModel {
    /// Builds an untrained model starting from `params`: input scaling and
    /// loss weights are fitted on `train`, networks are initialized from `seed`.
    pub fn new(cfg: &ModelConfig, train: &Dataset, params: PhysParams, seed: u64) -> Result<NnapModel> {
        cfg.validate()?;
        params.validate()?;
        let weights = loss_weights(train)?;
        let fitted = |map: &InputMap, seed: u64| -> Result<NetParams> {
            let samples = map.samples(train, &params);
            let names: Vec<&str> = map.0.iter().map(|f| f.name()).collect();
            let mut net = NetParams::init(map.dim(), cfg.hidden, 1, seed);
            net.scale = scaling_from_samples(&samples, &names)?;
            net.anchor_biases(&samples, seed ^ BIAS_SEED);
            Ok(net)
        };
        let head = if cfg.decomposed {
            Head::Decomposed {
                conservative: fitted(&InputMap(vec![Feature::D]), seed)?,
                dissipative: fitted(&InputMap::geometry(), seed.wrapping_add(1))?,
            }
        } else {
            Head::Single {
                net: fitted(&cfg.inputs, seed)?,
            }
        };
        Ok(NnapModel {
            params,
            reference: cfg.nominal,
            trainable: cfg.trainable.clone(),
            inputs: cfg.inputs.clone(),
            head,
            dt: train.dt,
            weights,
        })
    }

    pub fn is_decomposed(&self) -> bool {
        matches!(self.head, Head::Decomposed { .. })
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        for net in self.head.nets() {
            net.validate()?;
        }
        if let Head::Single { net } = &self.head {
            if net.n_in != self.inputs.dim() {
                return Err(Error::ShapeMismatch(format!(
                    "input map yields {} features but the network takes {}",
                    self.inputs.dim(),
                    net.n_in
                )));
            }
        }
        if !(self.dt > 0.0) || !self.weights.iter().all(|w| *w > 0.0 && w.is_finite()) {
            return Err(Error::Config("model needs dt > 0 and positive loss weights".into()));
        }
        Ok(())
    }

    pub fn num_trainable(&self) -> usize {
        self.trainable.len() + self.head.num_params()
    }

    /// Optimizer coordinates `[p̃..., α...]`.
    pub fn flat(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .trainable
            .iter()
            .map(|&j| self.params.get(j) / self.reference.get(j))
            .collect();
        for net in self.head.nets() {
            v.extend(net.flatten());
        }
        v
    }

    pub fn set_flat(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.num_trainable(), "flat parameter vector length");
        let (pt, mut rest) = v.split_at(self.trainable.len());
        for (&j, &x) in self.trainable.iter().zip(pt) {
            self.params.set(j, x * self.reference.get(j));
        }
        for net in self.head.nets_mut() {
            let (mine, tail) = rest.split_at(net.num_params());
            net.unflatten(mine);
            rest = tail;
        }
    }

    fn view<'a, R: Real>(&'a self, alpha: Vec<R>) -> HeadView<'a, R> {
        match &self.head {
            Head::Single { net } => HeadView::Single(net.view_from(alpha), &self.inputs),
            Head::Decomposed { conservative, dissipative } => {
                let mut alpha = alpha;
                let tail = alpha.split_off(conservative.num_params());
                HeadView::Decomposed(conservative.view_from(alpha), dissipative.view_from(tail))
            }
        }
    }

    fn plain_view(&self) -> HeadView<'_, f64> {
        let alpha = self.head.nets().iter().flat_map(|n| n.flatten()).collect();
        self.view(alpha)
    }

    /// One Euler step `x + Δt · f(x, u, η(g(x, u)); p)`.
    pub fn step(&self, x: State, torque: f64) -> Result<State> {
        Ok(advance(&self.params, &self.plain_view(), self.dt, x, torque)?.0)
    }

    /// Recurrent prediction of `torques.len()` steps from `x0`.
    pub fn rollout(&self, x0: State, torques: &[f64]) -> Result<Rollout> {
        let head = self.plain_view();
        let mut states = Vec::with_capacity(torques.len());
        let mut x = x0;
        for (j, &u) in torques.iter().enumerate() {
            x = advance(&self.params, &head, self.dt, x, u)?.0;
            if !(x.omega.abs() <= OMEGA_GUARD) {
                return Err(Error::NonFiniteState { step: j + 1, omega: x.omega });
            }
            states.push(x);
        }
        Ok(Rollout {
            states,
            squared_errors: Vec::new(),
        })
    }

    /// Rollout of the window seeded at measured sample `start`, scored
    /// against the `n` following measurements.
    pub fn rollout_window(&self, tr: &Trajectory, start: usize, n: usize) -> Result<Rollout> {
        if n == 0 || start + n >= tr.len() {
            return Err(Error::WindowTooLong {
                n,
                len: tr.len().saturating_sub(start),
            });
        }
        let mut r = self.rollout(tr.state(start), &tr.torque[start..start + n])?;
        r.squared_errors = r
            .states
            .iter()
            .enumerate()
            .map(|(j, h)| {
                let k = start + j + 1;
                let (et, ew) = (tr.theta[k] - h.theta, tr.omega[k] - h.omega);
                self.weights[0] * et * et + self.weights[1] * ew * ew
            })
            .collect();
        Ok(r)
    }

    /// Force estimate at an arbitrary state and torque.
    pub fn force_at(&self, x: State, torque: f64) -> ForceEval {
        let frame = kinematics(x, &self.params);
        let head = self.plain_view();
        match &head {
            HeadView::Single(..) => ForceEval {
                z: head.force(x, torque, &frame).0,
                z_c: None,
                z_nc: None,
            },
            HeadView::Decomposed(c, nc) => {
                let z_c = c.eval(&[frame.d])[0];
                let z_nc = nc.eval(&[frame.d, frame.v])[0];
                ForceEval {
                    z: z_c + z_nc,
                    z_c: Some(z_c),
                    z_nc: Some(z_nc),
                }
            }
        }
    }

    /// Force estimate on the slider coordinates; needs a head that sees only
    /// `(d, v)`.
    pub fn eval_force(&self, d: f64, v: f64) -> Result<ForceEval> {
        match &self.head {
            Head::Decomposed { conservative, dissipative } => {
                let z_c = conservative.eval(&[d])?[0];
                let z_nc = dissipative.eval(&[d, v])?[0];
                Ok(ForceEval {
                    z: z_c + z_nc,
                    z_c: Some(z_c),
                    z_nc: Some(z_nc),
                })
            }
            Head::Single { net } => {
                let q: Vec<f64> = self
                    .inputs
                    .0
                    .iter()
                    .map(|f| match f {
                        Feature::D => Ok(d),
                        Feature::V => Ok(v),
                        other => Err(Error::Config(format!(
                            "force surface needs a (d, v) input map, found `{}`",
                            other.name()
                        ))),
                    })
                    .collect::<Result<_>>()?;
                Ok(ForceEval {
                    z: net.eval(&q)?[0],
                    z_c: None,
                    z_nc: None,
                })
            }
        }
    }

    fn check_dataset(&self, data: &Dataset) -> Result<()> {
        if ((data.dt - self.dt) / self.dt).abs() > 1e-9 {
            return Err(Error::Data(format!(
                "dataset sampled at {} s but the model steps {} s",
                data.dt, self.dt
            )));
        }
        Ok(())
    }

    /// Mean of `(x_k − x̂_k)ᵀ C (x_k − x̂_k)` over every predicted step of
    /// every window, plus `reg_c · mean(η_nc²)` in decomposed mode.
    pub fn loss(&self, data: &Dataset, n: usize, reg_c: f64) -> Result<f64> {
        self.check_dataset(data)?;
        let all = windows(data, n)?;
        let denom = (all.len() * n) as f64;
        let head = self.plain_view();
        let mut data_sum = 0.0;
        let mut reg_sum = 0.0;
        for w in &all {
            let (a, b) = window_terms(&self.params, &head, self.dt, self.weights, &data.trajectories[w.traj], w.start, n)?;
            data_sum += a;
            reg_sum += b;
        }
        Ok((data_sum + reg_c * reg_sum) / denom)
    }

    /// Full loss and its gradient in optimizer coordinates.
    pub fn loss_and_gradient(&self, data: &Dataset, n: usize, reg_c: f64) -> Result<(f64, Vec<f64>)> {
        self.check_dataset(data)?;
        let all = windows(data, n)?;
        self.objective_gradient(data, &all, n, reg_c)
    }

    /// The same objective restricted to the windows in `batch`, with its gradient.
    pub fn batch_gradient(
        &self,
        data: &Dataset,
        batch: &[Window],
        n: usize,
        reg_c: f64,
    ) -> Result<(f64, Vec<f64>)> {
        self.objective_gradient(data, batch, n, reg_c)
    }

    fn objective_gradient(
        &self,
        data: &Dataset,
        batch: &[Window],
        n: usize,
        reg_c: f64,
    ) -> Result<(f64, Vec<f64>)> {
        let scale = 1.0 / (batch.len() * n) as f64;
        let chunk = (256 / n).max(1);
        let parts = batch
            .par_chunks(chunk)
            .map(|ws| self.chunk_gradient(data, ws, n, scale, reg_c * scale))
            .collect::<Vec<_>>();
        let mut total = 0.0;
        let mut grad = vec![0.0; self.num_trainable()];
        for part in parts {
            let (l, g) = part?;
            total += l;
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += b;
            }
        }
        Ok((total, grad))
    }

    fn chunk_gradient(
        &self,
        data: &Dataset,
        ws: &[Window],
        n: usize,
        scale: f64,
        reg_scale: f64,
    ) -> Result<(f64, Vec<f64>)> {
        let tape = Tape::new();
        let p = self.params.map(|j, v| {
            if self.trainable.contains(&j) {
                tape.leaf(v)
            } else {
                tape.constant(v)
            }
        });
        let alpha: Vec<_> = self
            .head
            .nets()
            .iter()
            .flat_map(|net| net.flatten())
            .map(|w| tape.leaf(w))
            .collect();
        let head = self.view(alpha.clone());
        let mut terms = Vec::with_capacity(ws.len());
        for w in ws {
            let tr = &data.trajectories[w.traj];
            let (d, r) = window_terms(&p, &head, self.dt, self.weights, tr, w.start, n)?;
            terms.push(d * scale + r * reg_scale);
        }
        let total = tape.sum(&terms);
        let grads = tape.backward(total)?;
        let mut g = Vec::with_capacity(self.num_trainable());
        for &j in &self.trainable {
            g.push(grads.wrt(p.get(j)) * self.reference.get(j));
        }
        g.extend(alpha.iter().map(|&a| grads.wrt(a)));
        Ok((total.value(), g))
    }

    /// Multistep ω-RMSE of a free rollout over the whole trajectory; infinite
    /// when the rollout diverges.
    pub fn rmse_multistep(&self, tr: &Trajectory) -> Result<f64> {
        if tr.len() < 2 {
            return Err(Error::Data("trajectory needs at least two samples".into()));
        }
        let n = tr.len() - 1;
        match self.rollout(tr.state(0), &tr.torque[..n]) {
            Ok(r) => {
                let se: f64 = r
                    .states
                    .iter()
                    .zip(&tr.omega[1..])
                    .map(|(h, w)| (h.omega - w).powi(2))
                    .sum();
                Ok((se / n as f64).sqrt())
            }
            Err(Error::NonFiniteState { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    }

    /// Scaled `(d, v)` coordinates used for the explored-region mask.
    fn surface_scale(&self, train: &Dataset) -> Result<[f64; 2]> {
        match &self.head {
            Head::Decomposed { dissipative, .. } => Ok([dissipative.scale[0], dissipative.scale[1]]),
            Head::Single { net } if self.inputs == InputMap::geometry() => Ok([net.scale[0], net.scale[1]]),
            Head::Single { .. } => {
                let s = fit_input_scaling(train, &InputMap::geometry(), &self.params)?;
                Ok([s[0], s[1]])
            }
        }
    }

    /// Network output over a `nd x nv` grid spanning the training support,
    /// flagged explored when a training input lies within the mask radius.
    pub fn force_surface(&self, train: &Dataset, nd: usize, nv: usize) -> Result<ForceSurface> {
        let scale = self.surface_scale(train)?;
        let support: Vec<[f64; 2]> = InputMap::geometry()
            .samples(train, &self.params)
            .into_iter()
            .map(|q| [q[0], q[1]])
            .collect();
        let mask = ExploredMask::new(&support, scale);
        let (mut dlo, mut dhi, mut vlo, mut vhi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for q in &support {
            dlo = dlo.min(q[0]);
            dhi = dhi.max(q[0]);
            vlo = vlo.min(q[1]);
            vhi = vhi.max(q[1]);
        }
        let lerp = |lo: f64, hi: f64, i: usize, n: usize| {
            if n <= 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        let mut rows = Vec::with_capacity(nd * nv);
        for i in 0..nd {
            for j in 0..nv {
                let (d, v) = (lerp(dlo, dhi, i, nd), lerp(vlo, vhi, j, nv));
                let f = self.eval_force(d, v)?;
                rows.push(SurfacePoint {
                    d,
                    v,
                    force: f,
                    explored: mask.contains([d, v]),
                });
            }
        }
        Ok(ForceSurface {
            radius: mask.radius,
            points: rows,
        })
    }
}

/// Euler step on any scalar type; also returns η_nc in decomposed mode.
fn advance<R: Real>(
    p: &PhysParams<R>,
    head: &HeadView<'_, R>,
    dt: f64,
    x: State<R>,
    torque: R,
) -> Result<(State<R>, Option<R>)> {
    let frame = kinematics(x, p);
    let (z, nc) = head.force(x, torque, &frame);
    let omega_dot = forward_dynamics_in(x, torque, z, p, &frame)?;
    Ok((State::new(x.theta + x.omega * dt, x.omega + omega_dot * dt), nc))
}

/// Sum of weighted squared errors of one window and sum of η_nc².
fn window_terms<R: Real>(
    p: &PhysParams<R>,
    head: &HeadView<'_, R>,
    dt: f64,
    c: [f64; 2],
    tr: &Trajectory,
    start: usize,
    n: usize,
) -> Result<(R, R)> {
    let zero = p.m1.lift(0.0);
    let mut x = State::new(zero + tr.theta[start], zero + tr.omega[start]);
    let mut err = zero;
    let mut reg = zero;
    for j in 0..n {
        let k = start + j;
        let (next, nc) = advance(p, head, dt, x, zero + tr.torque[k])?;
        if let Some(nc) = nc {
            reg = reg + nc.square();
        }
        if !(next.omega.value().abs() <= OMEGA_GUARD && next.theta.value().is_finite()) {
            err = err + DIVERGENCE_PENALTY * (n - j) as f64;
            break;
        }
        let et = (next.theta - tr.theta[k + 1]).square() * c[0];
        let ew = (next.omega - tr.omega[k + 1]).square() * c[1];
        err = err + et + ew;
        x = next;
    }
    Ok((err, reg))
}

/// Training inputs in scaled coordinates with radius `ρ` = 2 × the mean
/// nearest-neighbour spacing. At most [`ExploredMask::MAX_POINTS`] inputs,
/// taken at a fixed stride, are kept.
pub struct ExploredMask {
    points: Vec<[f64; 2]>,
    scale: [f64; 2],
    pub radius: f64,
}

impl ExploredMask {
    pub const MAX_POINTS: usize = 2000;

    pub fn new(support: &[[f64; 2]], scale: [f64; 2]) -> ExploredMask {
        let stride = support.len().div_ceil(Self::MAX_POINTS).max(1);
        let points: Vec<[f64; 2]> = support
            .iter()
            .step_by(stride)
            .map(|q| [q[0] * scale[0], q[1] * scale[1]])
            .collect();
        let mut total = 0.0;
        for (i, a) in points.iter().enumerate() {
            let mut best = f64::INFINITY;
            for (j, b) in points.iter().enumerate() {
                if i != j {
                    best = best.min(dist2(a, b));
                }
            }
            if best.is_finite() {
                total += best.sqrt();
            }
        }
        let radius = if points.len() > 1 {
            2.0 * total / points.len() as f64
        } else {
            0.0
        };
        ExploredMask { points, scale, radius }
    }

    pub fn contains(&self, q: [f64; 2]) -> bool {
        let s = [q[0] * self.scale[0], q[1] * self.scale[1]];
        let r2 = self.radius * self.radius;
        self.points.iter().any(|p| dist2(p, &s) <= r2)
    }
}

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub d: f64,
    pub v: f64,
    pub force: ForceEval,
    pub explored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceSurface {
    pub radius: f64,
    pub points: Vec<SurfacePoint>,
}

impl ForceSurface {
    /// CSV with columns `d,v,z[,z_c,z_nc],explored`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let decomposed = self.points.first().is_some_and(|p| p.force.z_c.is_some());
        let mut w = csv::Writer::from_path(path)?;
        if decomposed {
            w.write_record(["d", "v", "z", "z_c", "z_nc", "explored"])?;
        } else {
            w.write_record(["d", "v", "z", "explored"])?;
        }
        for p in &self.points {
            let flag = u8::from(p.explored);
            match (p.force.z_c, p.force.z_nc) {
                (Some(c), Some(nc)) if decomposed => w.serialize((p.d, p.v, p.force.z, c, nc, flag))?,
                _ => w.serialize((p.d, p.v, p.force.z, flag))?,
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{generate_dataset, SimConfig};

    fn small_data() -> Dataset {
        let cfg = SimConfig {
            num_profiles: 2,
            initial_angles: vec![0.3],
            samples: 12,
            ..SimConfig::default()
        };
        generate_dataset(&cfg).unwrap().dataset
    }

    fn model(decomposed: bool) -> NnapModel {
        let data = small_data();
        let cfg = ModelConfig {
            hidden: 4,
            decomposed,
            ..ModelConfig::default()
        };
        let p = PhysParams::table_one();
        NnapModel::new(&cfg, &data, p, 3).unwrap()
    }

    #[test]
    fn euler_step_arithmetic() {
        let mut m = model(false);
        m.params.g = 0.0;
        m.params.b_m = 0.0;
        for net in m.head.nets_mut() {
            let zeros = vec![0.0; net.num_params()];
            net.unflatten(&zeros);
        }
        let x = State::new(0.4, 0.0);
        assert_eq!(m.step(x, 0.0).unwrap(), x);
        let y = m.step(State::new(0.4, 2.0), 0.0).unwrap();
        assert!((y.theta - 0.401).abs() < 1e-15);
    }

    #[test]
    fn rollout_composes_steps() {
        let m = model(false);
        let x = State::new(0.2, 3.0);
        let r = m.rollout(x, &[0.5, -0.2]).unwrap();
        let a = m.step(x, 0.5).unwrap();
        let b = m.step(a, -0.2).unwrap();
        assert_eq!(r.states, vec![a, b]);
        assert_eq!(m.rollout(x, &[0.5]).unwrap().states, vec![a]);
    }

    #[test]
    fn window_enumeration_matches_brute_force() {
        let data = small_data().subset(&[0]);
        let mut short = data.clone();
        for t in short.trajectories.iter_mut() {
            t.t.truncate(10);
            t.theta.truncate(10);
            t.omega.truncate(10);
            t.torque.truncate(10);
        }
        let ws = windows(&short, 3).unwrap();
        let mut brute = vec![];
        for i in 0..10 {
            if i + 3 <= 9 {
                brute.push(Window { traj: 0, start: i });
            }
        }
        assert_eq!(ws, brute);
        assert_eq!(ws.len(), 7);
        assert!(matches!(windows(&short, 10), Err(Error::WindowTooLong { .. })));
    }

    #[test]
    fn decomposed_force_is_sum() {
        let m = model(true);
        let f = m.eval_force(0.03, -0.4).unwrap();
        assert_eq!(f.z, f.z_c.unwrap() + f.z_nc.unwrap());
    }

    #[test]
    fn flat_round_trip() {
        let mut m = model(true);
        let v = m.flat();
        assert_eq!(v.len(), 3 + m.head.num_params());
        assert_eq!(&v[..3], &[1.0, 1.0, 1.0]);
        let mut w = v.clone();
        w[0] = 1.2;
        m.set_flat(&w);
        assert!((m.params.m3 - 0.77 * 1.2).abs() < 1e-15);
        assert_eq!(m.flat(), w);
    }

    #[test]
    fn taped_loss_matches_plain_loss() {
        for decomposed in [false, true] {
            let m = model(decomposed);
            let data = small_data();
            for n in [1, 3] {
                let plain = m.loss(&data, n, 0.5).unwrap();
                let (taped, _) = m.loss_and_gradient(&data, n, 0.5).unwrap();
                assert!((plain - taped).abs() <= 1e-12 * plain.abs().max(1e-300), "{plain} {taped}");
            }
        }
    }
}
