//! Leave-one-trajectory-out cross-validation on a reduced data set: every fold
//! fits its own scaling and loss weights, trains, and scores the held-out
//! trajectory by a free multistep rollout.
//!
//! ```text
//! cargo run --release --example loocv [num_profiles] [epochs]
//! ```

use graybox::nnap::ModelConfig;
use graybox::optimize::{loocv, AdamHyper, TrainConfig};
use graybox::simulate::{generate_dataset, SimConfig};

fn main() -> graybox::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().ok());
    let profiles = args.next().flatten().unwrap_or(4);
    let epochs = args.next().flatten().unwrap_or(40);
    let sim = generate_dataset(&SimConfig {
        num_profiles: profiles,
        ..SimConfig::default()
    })?;
    let cfg = TrainConfig {
        epochs,
        adam: AdamHyper {
            lr: 1e-2,
            ..AdamHyper::default()
        },
        ..TrainConfig::default()
    };
    let res = loocv(&cfg, &ModelConfig::default(), &sim.dataset)?;
    println!("{:>8} {:>12} {:>10}", "held out", "omega RMSE", "final loss");
    for f in &res.folds {
        println!("{:>8} {:>12.4} {:>10.2e}", f.held_out, f.rmse, f.fit.loss_history.last().copied().unwrap_or(f64::NAN));
    }
    let s = res.summary;
    println!("median {:.4}  p90 {:.4}  range {:.4}..{:.4}  diverged {}", s.median, s.p90, s.min, s.max, s.failed);
    Ok(())
}
