//! Recurrent training: a converged one-step model is continued with windows of
//! N steps (backpropagation through N Euler steps) and compared on held-out
//! trajectories. Measurement noise on theta is what makes longer windows pay.
//!
//! ```text
//! cargo run --release --example recurrent_sweep
//! ```

use graybox::nnap::ModelConfig;
use graybox::optimize::{sweep_n, AdamHyper, TrainConfig};
use graybox::simulate::{generate_dataset, Noise, SimConfig};

fn main() -> graybox::Result<()> {
    let sim = generate_dataset(&SimConfig {
        noise: Noise::Gaussian { sigma: 2e-4 },
        ..SimConfig::default()
    })?;
    let cfg = TrainConfig {
        epochs: 60,
        adam: AdamHyper {
            lr: 1e-2,
            ..AdamHyper::default()
        },
        ..TrainConfig::default()
    };
    let ns = [1, 8, 32];
    let r = sweep_n(&cfg, &ModelConfig::default(), &sim.dataset, &ns, 5, &[8, 16])?;
    for f in &r.folds {
        print!("held out {:>2}: base {:.3}", f.held_out, f.base_rmse);
        for (n, (rmse, secs)) in ns.iter().zip(f.rmse.iter().zip(&f.epoch_seconds)) {
            let per_epoch = secs.iter().sum::<f64>() / secs.len() as f64;
            print!("  N={n}: {rmse:.3} ({per_epoch:.2} s/epoch)");
        }
        println!();
    }
    for (n, s) in ns.iter().zip(&r.summaries) {
        println!("N={n:<3} median omega RMSE {:.4}", s.median);
    }
    Ok(())
}
