//! Slider-crank kinematics and multibody forward dynamics.
//!
//! Geometry: the crank pivots at the origin and carries joint B at
//! `l1 (cos θ, sin θ)`. The connecting rod runs from B down to the slider
//! joint C on the x-axis, at angle φ below the horizontal, so that
//! `l2 sin φ = l1 sin θ`. The slider coordinate is
//! `d = l1 cos θ + l2 cos φ - (l2 - l1)`, ranging over `[0, 2 l1]`.
//!
//! Force conventions: `F_a` acts on the crank from the ground at O, `F_b` acts
//! on the crank from the rod at B (the rod receives `-F_b`), `F_c` acts on the
//! rod from the slider at C (the slider receives `-F_c`), `F_N` is the guide
//! normal force on the slider, and the load `F` pushes the slider towards
//! negative x. `J1` is the inertia of motor plus crank about the fixed axis,
//! `J2 = m2 l2² / 3` is taken about the rod's centre of mass, and the centres
//! of mass sit at half length (`r1 = l1 / 2`, `r2 = l2 / 2`).
//!
//! The eight Newton-Euler equations are linear in the unknowns
//! `(F_ax, F_ay, F_bx, F_by, F_cx, F_cy, F_N, ω̇)` once link accelerations are
//! written as `a(θ) ω̇ + b(θ, ω)`; they are assembled and solved by Gaussian
//! elimination with partial pivoting for every evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Threshold on |det A| below which the system is reported singular.
pub const SINGULAR_DET: f64 = 1e-12;

const UNKNOWNS: usize = 8;
const OMEGA_DOT: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysParams<R = f64> {
    pub m1: R,
    pub m2: R,
    pub m3: R,
    pub l1: R,
    pub l2: R,
    pub j1: R,
    pub b_m: R,
    pub g: R,
}

/// Names of the individual physical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhysParam {
    M1,
    M2,
    M3,
    L1,
    L2,
    J1,
    #[serde(rename = "b_m")]
    BM,
    G,
}

impl PhysParam {
    /// The seven mechanism parameters (gravity excluded).
    pub const MECHANISM: [PhysParam; 7] = [
        PhysParam::M1,
        PhysParam::M2,
        PhysParam::M3,
        PhysParam::L1,
        PhysParam::L2,
        PhysParam::J1,
        PhysParam::BM,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PhysParam::M1 => "m1",
            PhysParam::M2 => "m2",
            PhysParam::M3 => "m3",
            PhysParam::L1 => "l1",
            PhysParam::L2 => "l2",
            PhysParam::J1 => "j1",
            PhysParam::BM => "b_m",
            PhysParam::G => "g",
        }
    }
}

impl std::fmt::Display for PhysParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PhysParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PhysParam::MECHANISM
            .iter()
            .chain(std::iter::once(&PhysParam::G))
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown physical parameter `{s}`")))
    }
}

impl PhysParams<f64> {
    /// Parameters identified on the reference rig, with standard gravity.
    pub fn table_one() -> Self {
        PhysParams {
            m1: 0.23,
            m2: 0.35,
            m3: 0.77,
            l1: 0.05,
            l2: 0.29,
            j1: 0.0034,
            b_m: 0.007,
            g: 9.81,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m1", self.m1),
            ("m2", self.m2),
            ("m3", self.m3),
            ("l1", self.l1),
            ("l2", self.l2),
            ("j1", self.j1),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.b_m >= 0.0) {
            return Err(Error::Config(format!("b_m must be >= 0, got {}", self.b_m)));
        }
        if self.l1 >= self.l2 {
            return Err(Error::Config(format!(
                "crank length l1 = {} must be shorter than rod length l2 = {}",
                self.l1, self.l2
            )));
        }
        Ok(())
    }
}

impl<R: Copy> PhysParams<R> {
    pub fn get(&self, p: PhysParam) -> R {
        match p {
            PhysParam::M1 => self.m1,
            PhysParam::M2 => self.m2,
            PhysParam::M3 => self.m3,
            PhysParam::L1 => self.l1,
            PhysParam::L2 => self.l2,
            PhysParam::J1 => self.j1,
            PhysParam::BM => self.b_m,
            PhysParam::G => self.g,
        }
    }

    pub fn set(&mut self, p: PhysParam, value: R) {
        match p {
            PhysParam::M1 => self.m1 = value,
            PhysParam::M2 => self.m2 = value,
            PhysParam::M3 => self.m3 = value,
            PhysParam::L1 => self.l1 = value,
            PhysParam::L2 => self.l2 = value,
            PhysParam::J1 => self.j1 = value,
            PhysParam::BM => self.b_m = value,
            PhysParam::G => self.g = value,
        }
    }

    pub fn map<S: Copy>(&self, mut f: impl FnMut(PhysParam, R) -> S) -> PhysParams<S> {
        PhysParams {
            m1: f(PhysParam::M1, self.m1),
            m2: f(PhysParam::M2, self.m2),
            m3: f(PhysParam::M3, self.m3),
            l1: f(PhysParam::L1, self.l1),
            l2: f(PhysParam::L2, self.l2),
            j1: f(PhysParam::J1, self.j1),
            b_m: f(PhysParam::BM, self.b_m),
            g: f(PhysParam::G, self.g),
        }
    }
}

/// Mechanism state: unwrapped crank angle and angular velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State<R = f64> {
    pub theta: R,
    pub omega: R,
}

impl<R> State<R> {
    pub fn new(theta: R, omega: R) -> Self {
        State { theta, omega }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KinematicFrame<R = f64> {
    pub sin_theta: R,
    pub cos_theta: R,
    pub phi: R,
    pub sin_phi: R,
    pub cos_phi: R,
    /// φ̇ = ratio · ω
    pub phi_ratio: R,
    pub phi_dot: R,
    pub d: R,
    pub v: R,
}

/// Positions and velocities of the crank and rod centres of mass.
#[derive(Debug, Clone, Copy)]
pub struct LinkCentres<R = f64> {
    pub crank: [R; 2],
    pub crank_vel: [R; 2],
    pub rod: [R; 2],
    pub rod_vel: [R; 2],
}

pub fn kinematics<R: Real>(x: State<R>, p: &PhysParams<R>) -> KinematicFrame<R> {
    let (s, c) = (x.theta.sin(), x.theta.cos());
    let sin_phi = p.l1 / p.l2 * s;
    let phi = sin_phi.asin();
    let cos_phi = phi.cos();
    let phi_ratio = p.l1 * c / (p.l2 * cos_phi);
    let phi_dot = phi_ratio * x.omega;
    let d = p.l1 * c + p.l2 * cos_phi - (p.l2 - p.l1);
    let v = -(p.l1 * s * x.omega) - p.l2 * sin_phi * phi_dot;
    KinematicFrame {
        sin_theta: s,
        cos_theta: c,
        phi,
        sin_phi,
        cos_phi,
        phi_ratio,
        phi_dot,
        d,
        v,
    }
}

pub fn link_centres<R: Real>(x: State<R>, p: &PhysParams<R>, k: &KinematicFrame<R>) -> LinkCentres<R> {
    let (s, c) = (k.sin_theta, k.cos_theta);
    let r1 = p.l1 * 0.5;
    // distance from joint B to the rod centre of mass
    let rb = p.l2 * 0.5;
    LinkCentres {
        crank: [r1 * c, r1 * s],
        crank_vel: [-(r1 * s * x.omega), r1 * c * x.omega],
        rod: [p.l1 * c + rb * k.cos_phi, p.l1 * s - rb * k.sin_phi],
        rod_vel: [
            -(p.l1 * s * x.omega) - rb * k.sin_phi * k.phi_dot,
            p.l1 * c * x.omega - rb * k.cos_phi * k.phi_dot,
        ],
    }
}

/// Slider position and velocity `(d, v)` for a state.
pub fn slider<R: Real>(x: State<R>, p: &PhysParams<R>) -> (R, R) {
    let k = kinematics(x, p);
    (k.d, k.v)
}

type System<R> = ([[Option<R>; UNKNOWNS]; UNKNOWNS], [R; UNKNOWNS]);

fn assemble<R: Real>(
    x: State<R>,
    torque: R,
    force: R,
    p: &PhysParams<R>,
    k: &KinematicFrame<R>,
) -> System<R> {
    let (s, c) = (k.sin_theta, k.cos_theta);
    let (sp, cp) = (k.sin_phi, k.cos_phi);
    let w = x.omega;
    let w2 = w * w;
    let r1 = p.l1 * 0.5;
    let r2 = p.l2 * 0.5;
    let r2p = p.l2 - r2;
    let j2 = p.m2 * p.l2 * p.l2 * (1.0 / 3.0);

    // φ̈ = ratio ω̇ + mu
    let mu = (p.l2 * sp * k.phi_dot * k.phi_dot - p.l1 * s * w2) / (p.l2 * cp);
    let pd2 = k.phi_dot * k.phi_dot;

    // accelerations as (coefficient of ω̇, remainder)
    let a1x = (-(r1 * s), -(r1 * c * w2));
    let a1y = (r1 * c, -(r1 * s * w2));
    let a2x = (
        -(p.l1 * s) - r2p * sp * k.phi_ratio,
        -(p.l1 * c * w2) - r2p * (sp * mu + cp * pd2),
    );
    let a2y = (
        p.l1 * c - r2p * cp * k.phi_ratio,
        -(p.l1 * s * w2) - r2p * (cp * mu - sp * pd2),
    );
    let a3 = (
        -(p.l1 * s) - p.l2 * sp * k.phi_ratio,
        -(p.l1 * c * w2) - p.l2 * (sp * mu + cp * pd2),
    );

    let one = w.lift(1.0);
    let minus_one = w.lift(-1.0);
    let mut a: [[Option<R>; UNKNOWNS]; UNKNOWNS] = [[None; UNKNOWNS]; UNKNOWNS];
    const AX: usize = 0;
    const AY: usize = 1;
    const BX: usize = 2;
    const BY: usize = 3;
    const CX: usize = 4;
    const CY: usize = 5;
    const NN: usize = 6;
    const WD: usize = OMEGA_DOT;

    // crank translation: m1 ẍ1 = F_ax + F_bx, m1 ÿ1 = -m1 g + F_ay + F_by
    a[0][WD] = Some(p.m1 * a1x.0);
    a[0][AX] = Some(minus_one);
    a[0][BX] = Some(minus_one);
    let b0 = -(p.m1 * a1x.1);
    a[1][WD] = Some(p.m1 * a1y.0);
    a[1][AY] = Some(minus_one);
    a[1][BY] = Some(minus_one);
    let b1 = -(p.m1 * p.g) - p.m1 * a1y.1;
    // crank rotation about O:
    // J1 ω̇ = T - B_m ω - r1 cosθ m1 g + l1 cosθ F_by - l1 sinθ F_bx
    a[2][WD] = Some(p.j1);
    a[2][BY] = Some(-(p.l1 * c));
    a[2][BX] = Some(p.l1 * s);
    let b2 = torque - p.b_m * w - r1 * c * p.m1 * p.g;
    // rod translation: m2 ẍ2 = -F_bx + F_cx, m2 ÿ2 = -F_by + F_cy - m2 g
    a[3][WD] = Some(p.m2 * a2x.0);
    a[3][BX] = Some(one);
    a[3][CX] = Some(minus_one);
    let b3 = -(p.m2 * a2x.1);
    a[4][WD] = Some(p.m2 * a2y.0);
    a[4][BY] = Some(one);
    a[4][CY] = Some(minus_one);
    let b4 = -(p.m2 * p.g) - p.m2 * a2y.1;
    // rod rotation about its centre of mass:
    // J2 φ̈ = -r2' cosφ F_by - r2' sinφ F_bx - r2 cosφ F_cy - r2 sinφ F_cx
    a[5][WD] = Some(j2 * k.phi_ratio);
    a[5][BY] = Some(r2p * cp);
    a[5][BX] = Some(r2p * sp);
    a[5][CY] = Some(r2 * cp);
    a[5][CX] = Some(r2 * sp);
    let b5 = -(j2 * mu);
    // slider: 0 = -F_cy - m3 g + F_N, m3 v̇ = -F_cx - F
    a[6][CY] = Some(one);
    a[6][NN] = Some(minus_one);
    let b6 = -(p.m3 * p.g);
    a[7][WD] = Some(p.m3 * a3.0);
    a[7][CX] = Some(one);
    let b7 = -force - p.m3 * a3.1;

    (a, [b0, b1, b2, b3, b4, b5, b6, b7])
}

/// Gaussian elimination with partial pivoting; structural zeros (`None`)
/// are skipped. Leaves `a` upper triangular and returns det(A).
fn eliminate<R: Real>(a: &mut [[Option<R>; UNKNOWNS]; UNKNOWNS], b: &mut [R; UNKNOWNS]) -> Result<f64> {
    let mut det = 1.0;
    for k in 0..UNKNOWNS {
        let (pivot, magnitude) = (k..UNKNOWNS)
            .map(|i| (i, a[i][k].map_or(0.0, |v| v.value().abs())))
            .fold((k, -1.0), |best, cand| if cand.1 > best.1 { cand } else { best });
        if magnitude == 0.0 {
            return Err(Error::SingularSystem(0.0));
        }
        if pivot != k {
            a.swap(pivot, k);
            b.swap(pivot, k);
            det = -det;
        }
        let akk = a[k][k].expect("pivot is structurally nonzero");
        det *= akk.value();
        for i in k + 1..UNKNOWNS {
            let Some(aik) = a[i][k].take() else { continue };
            let factor = aik / akk;
            for j in k + 1..UNKNOWNS {
                if let Some(akj) = a[k][j] {
                    a[i][j] = Some(match a[i][j] {
                        Some(aij) => aij - factor * akj,
                        None => -(factor * akj),
                    });
                }
            }
            b[i] = b[i] - factor * b[k];
        }
    }
    if !(det.abs() >= SINGULAR_DET) {
        return Err(Error::SingularSystem(det.abs()));
    }
    Ok(det)
}

/// Angular acceleration ω̇ of the crank under motor torque `torque` (N·m) and
/// slider load `force` (N).
pub fn forward_dynamics<R: Real>(x: State<R>, torque: R, force: R, p: &PhysParams<R>) -> Result<R> {
    let k = kinematics(x, p);
    forward_dynamics_in(x, torque, force, p, &k)
}

/// [`forward_dynamics`] reusing an already computed frame for `x`.
pub fn forward_dynamics_in<R: Real>(
    x: State<R>,
    torque: R,
    force: R,
    p: &PhysParams<R>,
    k: &KinematicFrame<R>,
) -> Result<R> {
    let (mut a, mut b) = assemble(x, torque, force, p, k);
    eliminate(&mut a, &mut b)?;
    let last = a[OMEGA_DOT][OMEGA_DOT].expect("pivot");
    Ok(b[OMEGA_DOT] / last)
}

/// State derivative `[ω, ω̇]`.
pub fn derivative(x: State, torque: f64, force: f64, p: &PhysParams) -> Result<[f64; 2]> {
    Ok([x.omega, forward_dynamics(x, torque, force, p)?])
}

/// Every unknown of the Newton-Euler system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reactions {
    pub omega_dot: f64,
    pub f_a: [f64; 2],
    pub f_b: [f64; 2],
    pub f_c: [f64; 2],
    pub f_n: f64,
    pub det: f64,
}

pub fn solve_reactions(x: State, torque: f64, force: f64, p: &PhysParams) -> Result<Reactions> {
    let k = kinematics(x, p);
    let (mut a, mut b) = assemble(x, torque, force, p, &k);
    let det = eliminate(&mut a, &mut b)?;
    let mut y = [0.0; UNKNOWNS];
    for i in (0..UNKNOWNS).rev() {
        let mut acc = b[i];
        for j in i + 1..UNKNOWNS {
            if let Some(aij) = a[i][j] {
                acc -= aij * y[j];
            }
        }
        y[i] = acc / a[i][i].expect("pivot");
    }
    Ok(Reactions {
        omega_dot: y[OMEGA_DOT],
        f_a: [y[0], y[1]],
        f_b: [y[2], y[3]],
        f_c: [y[4], y[5]],
        f_n: y[6],
        det,
    })
}

/// Kinetic plus gravitational energy of the links (J).
///
/// The crank contributes `½ J1 ω²` only; its translational motion is part of
/// the inertia about the fixed axis. The slider runs on the x-axis and has no
/// gravitational potential.
pub fn mechanical_energy(x: State, p: &PhysParams) -> f64 {
    let k = kinematics(x, p);
    let c = link_centres(x, p, &k);
    let j2 = p.m2 * p.l2 * p.l2 / 3.0;
    let rod_v2 = c.rod_vel[0].powi(2) + c.rod_vel[1].powi(2);
    let kinetic = 0.5 * p.j1 * x.omega * x.omega
        + 0.5 * p.m2 * rod_v2
        + 0.5 * j2 * k.phi_dot * k.phi_dot
        + 0.5 * p.m3 * k.v * k.v;
    let potential = p.m1 * p.g * c.crank[1] + p.m2 * p.g * c.rod[1];
    kinetic + potential
}
