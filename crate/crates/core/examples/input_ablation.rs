//! Which inputs does the force network need? Cross-validates the slider
//! coordinates (d, v) against torque-only, angle-only and speed-only maps.
//!
//! ```text
//! cargo run --release --example input_ablation [num_profiles] [epochs]
//! ```

use graybox::cli::{ablate_inputs, ExperimentConfig};
use graybox::simulate::generate_dataset;

fn main() -> graybox::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().ok());
    let mut cfg = ExperimentConfig::default();
    cfg.simulate.num_profiles = args.next().flatten().unwrap_or(3);
    cfg.train.epochs = args.next().flatten().unwrap_or(20);
    cfg.train.adam.lr = 1e-2;
    let data = generate_dataset(&cfg.simulate)?.dataset;
    let ab = ablate_inputs(&cfg, &data)?;
    for (m, label) in ab.labels.iter().enumerate() {
        let mut r = ab.rmse[m].clone();
        r.sort_by(f64::total_cmp);
        let median = r[r.len() / 2];
        let versus = if m == 0 {
            "reference".to_string()
        } else {
            format!("(d, v) better on {:.0}% of folds", 100.0 * ab.win_fraction(m))
        };
        println!("{label:>8}: median omega RMSE {median:>8.4}  {versus}");
    }
    Ok(())
}
