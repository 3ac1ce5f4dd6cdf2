//! Splits the learned slider force into a conservative part depending on d
//! and a dissipative part depending on (d, v), with a small penalty on the
//! dissipative output, and compares both with the injected spring and friction.
//!
//! ```text
//! cargo run --release --example force_decomposition [epochs] [out.csv]
//! ```

use graybox::nnap::ModelConfig;
use graybox::optimize::{train, AdamHyper, TrainConfig};
use graybox::simulate::{generate_dataset, SimConfig};

fn main() -> graybox::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs = args.next().and_then(|a| a.parse().ok()).unwrap_or(30);
    let out = args.next();
    // longer records decorrelate friction from position
    let sim = generate_dataset(&SimConfig {
        samples: 4000,
        ..SimConfig::default()
    })?;
    let model_cfg = ModelConfig {
        trainable: vec![],
        decomposed: true,
        ..ModelConfig::default()
    };
    let cfg = TrainConfig {
        epochs,
        jitter_band: 0.0,
        reg_c: 1e-6,
        adam: AdamHyper {
            lr: 1e-2,
            ..AdamHyper::default()
        },
        ..TrainConfig::default()
    };
    let model = train(&cfg, &model_cfg, &sim.dataset)?.model;
    let load = sim.truth.load;

    println!("{:>6} {:>10} {:>10} {:>12} {:>12}", "d (m)", "z_c", "spring", "z_nc(v=+.5)", "z_nc(v=-.5)");
    for i in 0..=12 {
        let d = 0.01 * i as f64;
        let rest = model.eval_force(d, 0.0)?;
        let (fwd, back) = (model.eval_force(d, 0.5)?, model.eval_force(d, -0.5)?);
        println!(
            "{d:>6.2} {:>10.2} {:>10.2} {:>12.2} {:>12.2}",
            rest.z_c.unwrap_or(f64::NAN),
            load.spring(d),
            fwd.z_nc.unwrap_or(f64::NAN),
            back.z_nc.unwrap_or(f64::NAN)
        );
    }
    println!("friction at v = +-0.5 m/s: {:+.2} / {:+.2} N", load.friction(0.5), load.friction(-0.5));
    if let Some(path) = out {
        model.force_surface(&sim.dataset, 41, 41)?.write_csv(path.as_ref())?;
        println!("force surface written to {path}");
    }
    Ok(())
}
