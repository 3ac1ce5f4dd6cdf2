#![allow(dead_code)]
//! Independent single-degree-of-freedom Lagrangian model of the slider-crank,
//! used as an oracle for the Newton-Euler solve.
//!
//! Only link positions are written out by hand. Their first and second
//! derivatives with respect to θ come from a second-order forward-mode jet, so
//! none of the velocity/acceleration algebra of the library is reused.

use std::ops::{Add, Div, Mul, Neg, Sub};

use graybox::physics::{PhysParams, State};

/// Value with first and second derivative along one direction.
#[derive(Debug, Clone, Copy)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    fn var(v: f64) -> Jet {
        Jet { v, d1: 1.0, d2: 0.0 }
    }
    fn c(v: f64) -> Jet {
        Jet { v, d1: 0.0, d2: 0.0 }
    }
    fn chain(self, f: f64, df: f64, ddf: f64) -> Jet {
        Jet {
            v: f,
            d1: df * self.d1,
            d2: ddf * self.d1 * self.d1 + df * self.d2,
        }
    }
    fn sin(self) -> Jet {
        self.chain(self.v.sin(), self.v.cos(), -self.v.sin())
    }
    fn cos(self) -> Jet {
        self.chain(self.v.cos(), -self.v.sin(), -self.v.cos())
    }
    fn asin(self) -> Jet {
        let q = 1.0 - self.v * self.v;
        self.chain(self.v.asin(), 1.0 / q.sqrt(), self.v / q.powf(1.5))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}
impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}
impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
}
impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}
impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::c(self) * o
    }
}
impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, o: f64) -> Jet {
        Jet { v: self.v / o, d1: self.d1 / o, d2: self.d2 / o }
    }
}

pub struct Positions {
    pub crank_cm_y: Jet,
    pub rod_cm: (Jet, Jet),
    pub rod_angle: Jet,
    pub slider_x: Jet,
}

/// Positions of every body as functions of θ.
pub fn positions(theta: f64, p: &PhysParams) -> Positions {
    let t = Jet::var(theta);
    let phi = (p.l1 / p.l2 * t.sin()).asin();
    let bx = p.l1 * t.cos();
    let by = p.l1 * t.sin();
    let cx = bx + p.l2 * phi.cos();
    Positions {
        crank_cm_y: (p.l1 / 2.0) * t.sin(),
        rod_cm: ((bx + cx) / 2.0, by / 2.0),
        rod_angle: phi,
        slider_x: cx,
    }
}

/// ω̇ from d/dt ∂L/∂ω − ∂L/∂θ = T − B_m ω − F ∂d/∂θ with
/// L = ½ M(θ) ω² − V(θ).
pub fn lagrangian_omega_dot(x: State, torque: f64, force: f64, p: &PhysParams) -> f64 {
    let q = positions(x.theta, p);
    let j2 = p.m2 * p.l2 * p.l2 / 3.0;
    let (gx, gy) = q.rod_cm;
    let inertia = p.j1
        + p.m2 * (gx.d1 * gx.d1 + gy.d1 * gy.d1)
        + j2 * q.rod_angle.d1 * q.rod_angle.d1
        + p.m3 * q.slider_x.d1 * q.slider_x.d1;
    let inertia_slope = 2.0
        * (p.m2 * (gx.d1 * gx.d2 + gy.d1 * gy.d2)
            + j2 * q.rod_angle.d1 * q.rod_angle.d2
            + p.m3 * q.slider_x.d1 * q.slider_x.d2);
    let potential_slope = p.g * (p.m1 * q.crank_cm_y.d1 + p.m2 * gy.d1);
    let generalized = torque - p.b_m * x.omega - force * q.slider_x.d1;
    (generalized - potential_slope - 0.5 * inertia_slope * x.omega * x.omega) / inertia
}

pub fn effective_inertia(theta: f64, p: &PhysParams) -> f64 {
    let q = positions(theta, p);
    let (gx, gy) = q.rod_cm;
    p.j1 + p.m2 * (gx.d1 * gx.d1 + gy.d1 * gy.d1)
        + p.m2 * p.l2 * p.l2 / 3.0 * q.rod_angle.d1 * q.rod_angle.d1
        + p.m3 * q.slider_x.d1 * q.slider_x.d1
}

