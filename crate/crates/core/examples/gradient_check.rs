//! The reverse-mode tape at work: differentiates the mechanism's forward
//! dynamics with respect to every physical parameter and checks a few model
//! loss partials against central finite differences.
//!
//! ```text
//! cargo run --release --example gradient_check
//! ```

use graybox::nnap::{ModelConfig, NnapModel};
use graybox::physics::{forward_dynamics, PhysParam, PhysParams, State};
use graybox::simulate::{generate_dataset, SimConfig};
use graybox::tape::{check_gradient, Tape};

fn main() -> graybox::Result<()> {
    // d(omega_dot)/dp through the 8x8 Newton-Euler solve
    let p = PhysParams::table_one();
    let (x, torque, force) = (State::new(0.8, 12.0), 0.5, -20.0);
    let tape = Tape::new();
    let pv = p.map(|_, v| tape.leaf(v));
    let xs = State::new(tape.constant(x.theta), tape.constant(x.omega));
    let wd = forward_dynamics(xs, tape.constant(torque), tape.constant(force), &pv)?;
    let grads = tape.backward(wd)?;
    println!("omega_dot = {:.4} rad/s^2 ({} tape nodes)", wd.value(), tape.len());
    for j in PhysParam::MECHANISM {
        println!("  d/d{:<4} {:>14.6e}", j.name(), grads.wrt(pv.get(j)));
    }

    // the same check, packaged
    let report = check_gradient(
        |t, v| {
            let qv = p.map(|j, val| match j {
                PhysParam::M3 => v[0],
                PhysParam::J1 => v[1],
                PhysParam::BM => v[2],
                _ => t.constant(val),
            });
            forward_dynamics(State::new(t.constant(x.theta), t.constant(x.omega)), t.constant(torque), t.constant(force), &qv)
        },
        &[p.m3, p.j1, p.b_m],
        1e-7,
    )?;
    println!("check_gradient on (m3, J1, B_m): max relative error {:.1e}", report.max_relative_error);

    // loss gradient of the hybrid model in optimizer coordinates
    let data = generate_dataset(&SimConfig {
        num_profiles: 1,
        samples: 200,
        ..SimConfig::default()
    })?
    .dataset;
    let model = NnapModel::new(&ModelConfig::default(), &data, p, 1)?;
    let (loss, g) = model.loss_and_gradient(&data, 5, 0.0)?;
    println!("N=5 loss {loss:.4e}, {} partials", g.len());
    let flat = model.flat();
    for i in [0, 1, 2, 3, 40] {
        let h = 1e-6 * flat[i].abs().max(1.0);
        let at = |v: f64| {
            let mut m = model.clone();
            let mut f = flat.clone();
            f[i] = v;
            m.set_flat(&f);
            m.loss(&data, 5, 0.0)
        };
        let fd = (at(flat[i] + h)? - at(flat[i] - h)?) / (2.0 * h);
        println!("  partial {i:>3}: tape {:>12.5e}  finite difference {fd:>12.5e}", g[i]);
    }
    Ok(())
}
