//! Local identifiability of the mechanism parameters: ranks the scaled
//! sensitivity columns of the trained model and prints their correlation
//! matrix. Strongly correlated pairs (l1 with m3) cannot be fitted together.
//!
//! ```text
//! cargo run --release --example sensitivity [epochs]
//! ```

use graybox::identify::{correlation_matrix, rank_sensitivities, sensitivity_matrix};
use graybox::nnap::ModelConfig;
use graybox::optimize::{train, AdamHyper, TrainConfig};
use graybox::physics::PhysParam;
use graybox::simulate::{generate_dataset, SimConfig};

fn main() -> graybox::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50);
    let sim = generate_dataset(&SimConfig::default())?;
    let cfg = TrainConfig {
        epochs,
        adam: AdamHyper {
            lr: 1e-2,
            ..AdamHyper::default()
        },
        ..TrainConfig::default()
    };
    let model = train(&cfg, &ModelConfig::default(), &sim.dataset)?.model;

    let s = sensitivity_matrix(&model, &sim.dataset, &PhysParam::MECHANISM)?;
    println!("sensitivity norms over {} samples:", s.rows());
    for (label, norm) in rank_sensitivities(&s) {
        println!("  {label:>4} {norm:>12.4e}");
    }
    let q = correlation_matrix(&s)?;
    print!("\n{:>5}", "");
    for l in &q.labels {
        print!("{l:>7}");
    }
    println!();
    for (l, row) in q.labels.iter().zip(&q.q) {
        print!("{l:>5}");
        for v in row {
            print!("{v:>7.2}");
        }
        println!();
    }
    Ok(())
}
