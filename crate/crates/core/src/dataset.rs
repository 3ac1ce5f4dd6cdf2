//! Uniformly sampled trajectories and their on-disk form.
//!
//! A dataset directory holds one CSV per trajectory (`t,theta,omega,torque`)
//! and a `manifest.json` listing them. Ground truth never lives here; the
//! simulator seals it in a separate file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::State;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    pub torque: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn state(&self, k: usize) -> State {
        State::new(self.theta[k], self.omega[k])
    }

    pub fn peak_speed(&self) -> f64 {
        self.omega.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "theta", "omega", "torque"])?;
        for k in 0..self.len() {
            w.serialize((self.t[k], self.theta[k], self.omega[k], self.torque[k]))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Trajectory> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["t", "theta", "omega", "torque"] {
            return Err(Error::Data(format!(
                "{}: expected header t,theta,omega,torque, found {:?}",
                path.display(),
                header
            )));
        }
        let mut traj = Trajectory {
            t: vec![],
            theta: vec![],
            omega: vec![],
            torque: vec![],
        };
        for row in r.deserialize() {
            let (t, theta, omega, torque): (f64, f64, f64, f64) = row?;
            if ![t, theta, omega, torque].iter().all(|v| v.is_finite()) {
                return Err(Error::Data(format!("{}: non-finite sample", path.display())));
            }
            traj.t.push(t);
            traj.theta.push(theta);
            traj.omega.push(omega);
            traj.torque.push(torque);
        }
        Ok(traj)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub dt: f64,
    pub trajectories: Vec<Trajectory>,
}

/// Contents of `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub dt: f64,
    pub seed: u64,
    pub files: Vec<String>,
    /// Indices of the slower half of the trajectories, by peak |ω|.
    pub low_speed: Vec<usize>,
    pub profiles: serde_json::Value,
    pub tool_version: String,
}

impl Dataset {
    pub fn new(dt: f64, trajectories: Vec<Trajectory>) -> Result<Dataset> {
        let d = Dataset { dt, trajectories };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Data(format!("sampling interval {} must be positive", self.dt)));
        }
        if self.trajectories.is_empty() {
            return Err(Error::Data("dataset has no trajectories".into()));
        }
        let len = self.trajectories[0].t.len();
        for (s, tr) in self.trajectories.iter().enumerate() {
            let n = tr.t.len();
            if n < 2 || tr.theta.len() != n || tr.omega.len() != n || tr.torque.len() != n {
                return Err(Error::Data(format!("trajectory {s} is malformed or too short")));
            }
            if n != len {
                return Err(Error::Data(format!("trajectory {s} has {n} samples, trajectory 0 has {len}")));
            }
            if ![&tr.t, &tr.theta, &tr.omega, &tr.torque].iter().all(|c| c.iter().all(|v| v.is_finite())) {
                return Err(Error::Data(format!("trajectory {s} contains non-finite values")));
            }
            for k in 1..n {
                let step = tr.t[k] - tr.t[k - 1];
                if (step - self.dt).abs() > 1e-9 * self.dt.max(1.0) + 1e-12 {
                    return Err(Error::Data(format!(
                        "trajectory {s} is not uniformly sampled at {} (step {step} at sample {k})",
                        self.dt
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn total_samples(&self) -> usize {
        self.trajectories.iter().map(|t| t.len()).sum()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            dt: self.dt,
            trajectories: indices.iter().map(|&i| self.trajectories[i].clone()).collect(),
        }
    }

    /// All trajectories except `held_out`.
    pub fn without(&self, held_out: usize) -> Dataset {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| i != held_out).collect();
        self.subset(&keep)
    }

    /// Splits trajectory indices into the slower and faster halves by peak |ω|.
    pub fn speed_split(&self) -> (Vec<usize>, Vec<usize>) {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.trajectories[a]
                .peak_speed()
                .total_cmp(&self.trajectories[b].peak_speed())
                .then(a.cmp(&b))
        });
        let half = order.len() / 2;
        let (mut low, mut high) = (order[..half].to_vec(), order[half..].to_vec());
        low.sort_unstable();
        high.sort_unstable();
        (low, high)
    }

    pub fn file_name(index: usize) -> String {
        format!("traj_{index:03}.csv")
    }

    /// Writes trajectory CSVs and the manifest into `dir`.
    pub fn write_dir(&self, dir: &Path, seed: u64, profiles: serde_json::Value) -> Result<Manifest> {
        fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.len());
        for (i, tr) in self.trajectories.iter().enumerate() {
            let name = Self::file_name(i);
            tr.write_csv(&dir.join(&name))?;
            files.push(name);
        }
        let manifest = Manifest {
            s: self.len(),
            l: self.trajectories[0].len(),
            dt: self.dt,
            seed,
            files,
            low_speed: self.speed_split().0,
            profiles,
            tool_version: crate::VERSION.to_string(),
        };
        write_json(&dir.join(MANIFEST), &manifest)?;
        Ok(manifest)
    }

    /// Loads a dataset from a directory with a manifest, or from every
    /// `*.csv` file in it (sorted by name) when no manifest is present.
    pub fn read_dir(dir: &Path) -> Result<Dataset> {
        let manifest_path = dir.join(MANIFEST);
        let (files, dt_hint): (Vec<PathBuf>, Option<f64>) = if manifest_path.exists() {
            let m: Manifest = read_json(&manifest_path)?;
            (m.files.iter().map(|f| dir.join(f)).collect(), Some(m.dt))
        } else {
            let mut files: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| Error::Data(format!("{}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            files.sort();
            (files, None)
        };
        if files.is_empty() {
            return Err(Error::Data(format!("{}: no trajectories found", dir.display())));
        }
        let trajectories = files
            .iter()
            .map(|f| Trajectory::read_csv(f))
            .collect::<Result<Vec<_>>>()?;
        let dt = match dt_hint {
            Some(dt) => dt,
            None => trajectories[0].t[1] - trajectories[0].t[0],
        };
        Dataset::new(dt, trajectories)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Data(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}
