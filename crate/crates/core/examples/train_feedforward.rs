//! Trains the one-step (feedforward) hybrid model with trainable m3, J1 and
//! B_m on all but one trajectory, then reports the recovered parameters, the
//! held-out multistep error and the extracted force against the injected law.
//!
//! ```text
//! cargo run --release --example train_feedforward [epochs]
//! ```

use graybox::cli::verify;
use graybox::nnap::ModelConfig;
use graybox::optimize::{train, AdamHyper, TrainConfig};
use graybox::simulate::{generate_dataset, SimConfig};

fn main() -> graybox::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100);
    let sim = generate_dataset(&SimConfig::default())?;
    let held_out = 7;
    let train_data = sim.dataset.without(held_out);

    let model_cfg = ModelConfig::default();
    let cfg = TrainConfig {
        epochs,
        jitter_band: 0.0,
        adam: AdamHyper {
            lr: 1e-2,
            ..AdamHyper::default()
        },
        ..TrainConfig::default()
    };
    let fit = train(&cfg, &model_cfg, &train_data)?;
    for (e, loss) in fit.loss_history.iter().enumerate().step_by((epochs / 10).max(1)) {
        println!("epoch {e:>4}  loss {loss:.3e}");
    }

    let truth = &sim.truth.params;
    for &j in &model_cfg.trainable {
        let (start, end) = (fit.param_history[0].get(j), fit.model.params.get(j));
        println!("{:>4}: start {:+6.1}%  final {:+6.2}%", j.name(), 100.0 * (start / truth.get(j) - 1.0), 100.0 * (end / truth.get(j) - 1.0));
    }
    let rmse = fit.model.rmse_multistep(&sim.dataset.trajectories[held_out])?;
    println!("held-out trajectory {held_out}: multistep omega RMSE {rmse:.4} rad/s");
    let v = verify(&fit.model, &train_data, &sim.truth)?;
    println!("extracted force RMSE {:.2} N over a {:.1} N range", v.force_rmse, v.force_range);
    Ok(())
}
