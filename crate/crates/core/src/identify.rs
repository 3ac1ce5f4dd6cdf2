//! Local identifiability analysis: per-sample sensitivities of ω̇ with respect
//! to the load force and the physical parameters, their norms, and the
//! correlation matrix of the normalized columns.

use std::path::Path;

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::nnap::NnapModel;
use crate::physics::{forward_dynamics, PhysParam, State};
use crate::tape::Tape;

/// `K x (r + 1)` sensitivities, stored by column. Column 0 is the force.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityMatrix {
    pub labels: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl SensitivityMatrix {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.len())
    }

    pub fn norms(&self) -> Vec<f64> {
        self.columns
            .iter()
            .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.labels)?;
        for k in 0..self.rows() {
            w.serialize(self.columns.iter().map(|c| c[k]).collect::<Vec<f64>>())?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sensitivities of `ω̇_k = f(θ_k, ω_k, T_k, F̂_k; p)` at every measured
/// sample, with `F̂_k` from the model's network.
///
/// Parameter columns are `p_j ∂f/∂p_j`. The force column is `∂f/∂F` times
/// the RMS of `F̂` over the data, a single constant that gives it the same
/// units as the parameter columns.
pub fn sensitivity_matrix(model: &NnapModel, data: &Dataset, params: &[PhysParam]) -> Result<SensitivityMatrix> {
    let samples: Vec<(State, f64)> = data
        .trajectories
        .iter()
        .flat_map(|tr| (0..tr.len()).map(move |k| (tr.state(k), tr.torque[k])))
        .collect();
    let forces: Vec<f64> = samples.iter().map(|&(x, u)| model.force_at(x, u).z).collect();
    let rms = (forces.iter().map(|f| f * f).sum::<f64>() / forces.len().max(1) as f64).sqrt();
    let f_scale = if rms > 0.0 { rms } else { 1.0 };
    let rows = samples
        .par_iter()
        .zip(forces.par_iter())
        .map(|(&(x, u), &f)| {
            let tape = Tape::new();
            let fv = tape.leaf(f);
            let pv = model.params.map(|_, v| tape.leaf(v));
            let xs = State::new(tape.constant(x.theta), tape.constant(x.omega));
            let wdot = forward_dynamics(xs, tape.constant(u), fv, &pv)?;
            let g = tape.backward(wdot)?;
            let mut row = Vec::with_capacity(params.len() + 1);
            row.push(g.wrt(fv) * f_scale);
            for &j in params {
                row.push(g.wrt(pv.get(j)) * model.params.get(j));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut labels = vec!["F".to_string()];
    labels.extend(params.iter().map(|p| p.name().to_string()));
    let columns = (0..labels.len())
        .map(|c| rows.iter().map(|r| r[c]).collect())
        .collect();
    Ok(SensitivityMatrix { labels, columns })
}

/// Column norms, largest first; ties keep column order.
pub fn rank_sensitivities(s: &SensitivityMatrix) -> Vec<(String, f64)> {
    let mut ranked: Vec<(String, f64)> = s.labels.iter().cloned().zip(s.norms()).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked
}

/// Symmetric `Q = S_Nᵀ S_N` with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub q: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.q[i][j])
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (label, row) in self.labels.iter().zip(&self.q) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn correlation_matrix(s: &SensitivityMatrix) -> Result<CorrelationMatrix> {
    let norms = s.norms();
    if let Some(i) = norms.iter().position(|&n| !(n > 0.0)) {
        return Err(Error::ZeroSensitivity(s.labels[i].clone()));
    }
    let unit: Vec<Vec<f64>> = s
        .columns
        .iter()
        .zip(&norms)
        .map(|(c, n)| c.iter().map(|x| x / n).collect())
        .collect();
    let r = unit.len();
    let mut q = vec![vec![0.0; r]; r];
    for i in 0..r {
        q[i][i] = 1.0;
        for j in 0..i {
            let v: f64 = unit[i].iter().zip(&unit[j]).map(|(a, b)| a * b).sum();
            let v = v.clamp(-1.0, 1.0);
            q[i][j] = v;
            q[j][i] = v;
        }
    }
    Ok(CorrelationMatrix {
        labels: s.labels.clone(),
        q,
    })
}
