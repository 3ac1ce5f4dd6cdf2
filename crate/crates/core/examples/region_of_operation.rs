//! Extrapolation in operating speed: a model trained only on the slower half
//! of the trajectories is scored on the faster half and compared with a model
//! that saw both halves.
//!
//! ```text
//! cargo run --release --example region_of_operation [epochs]
//! ```

use graybox::nnap::{ModelConfig, NnapModel};
use graybox::optimize::{train, AdamHyper, TrainConfig};
use graybox::simulate::{generate_dataset, SimConfig};

fn main() -> graybox::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(60);
    let data = generate_dataset(&SimConfig::default())?.dataset;
    let (low, high) = data.speed_split();
    // every other fast trajectory is kept out of both fits for testing
    let test: Vec<usize> = high.iter().copied().step_by(2).collect();
    let fast_train: Vec<usize> = high.iter().copied().skip(1).step_by(2).collect();
    let cfg = TrainConfig {
        epochs,
        adam: AdamHyper {
            lr: 1e-2,
            ..AdamHyper::default()
        },
        ..TrainConfig::default()
    };
    let slow_only = train(&cfg, &ModelConfig::default(), &data.subset(&low))?.model;
    let both = train(&cfg, &ModelConfig::default(), &data.subset(&[low.clone(), fast_train].concat()))?.model;

    let score = |m: &NnapModel| -> graybox::Result<Vec<f64>> {
        test.iter().map(|&k| m.rmse_multistep(&data.trajectories[k])).collect()
    };
    let (a, b) = (score(&slow_only)?, score(&both)?);
    println!("{:>6} {:>10} {:>12} {:>12}", "traj", "peak |w|", "slow only", "slow + fast");
    for (i, &k) in test.iter().enumerate() {
        println!("{k:>6} {:>10.2} {:>12.4} {:>12.4}", data.trajectories[k].peak_speed(), a[i], b[i]);
    }
    Ok(())
}
