//! Generates the reference data set (10 torque profiles from two start angles,
//! 800 samples at 2 kHz) and writes it as CSV with a JSON manifest.
//!
//! ```text
//! cargo run --release --example simulate_dataset [out_dir]
//! ```

use std::path::PathBuf;

use graybox::simulate::{generate_dataset, write_simulation, SimConfig, SEALED_DIR};

fn main() -> graybox::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "out/example_data".into());
    let cfg = SimConfig::default();
    let sim = generate_dataset(&cfg)?;
    write_simulation(&sim, &cfg, &out)?;

    let data = &sim.dataset;
    println!("{} trajectories x {} samples, dt = {} s", data.len(), data.trajectories[0].len(), data.dt);
    println!("{:>4} {:>8} {:>10} {:>12}", "traj", "theta0", "peak |w|", "peak |T|");
    for (k, tr) in data.trajectories.iter().enumerate() {
        let peak_t = tr.torque.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        println!("{k:>4} {:>8.3} {:>10.2} {:>12.3}", tr.theta[0], tr.peak_speed(), peak_t);
    }
    let (low, _) = data.speed_split();
    println!("low-speed half: {low:?}");
    println!("written to {} (ground truth under {SEALED_DIR}/)", out.display());
    Ok(())
}
