//! Sensitivity and correlation analysis.

use graybox::dataset::Dataset;
use graybox::identify::*;
use graybox::nnap::{ModelConfig, NnapModel};
use graybox::physics::{PhysParam, PhysParams};
use graybox::simulate::{generate_dataset, SimConfig};
use graybox::Error;
use nalgebra::DMatrix;

fn setup(samples: usize) -> (NnapModel, Dataset) {
    let cfg = SimConfig {
        num_profiles: 3,
        samples,
        ..SimConfig::default()
    };
    let data = generate_dataset(&cfg).unwrap().dataset;
    let model_cfg = ModelConfig {
        hidden: 8,
        ..ModelConfig::default()
    };
    let m = NnapModel::new(&model_cfg, &data, PhysParams::table_one(), 4).unwrap();
    (m, data)
}

#[test]
fn one_row_per_aggregated_sample() {
    let (m, data) = setup(70);
    let s = sensitivity_matrix(&m, &data, &PhysParam::MECHANISM).unwrap();
    assert_eq!(s.rows(), data.total_samples());
    assert_eq!(s.labels.len(), 8);
    assert_eq!(s.labels[0], "F");
    assert!(s.columns.iter().flatten().all(|v| v.is_finite()));
}

#[test]
fn damping_sensitivity_opposes_motion() {
    let (m, data) = setup(120);
    let s = sensitivity_matrix(&m, &data, &[PhysParam::BM]).unwrap();
    let omega: Vec<f64> = data.trajectories.iter().flat_map(|t| t.omega.clone()).collect();
    let mut checked = 0;
    for (w, sb) in omega.iter().zip(&s.columns[1]) {
        if w.abs() > 1e-9 {
            assert!(w * sb < 0.0, "omega {w}, column {sb}");
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn duplicated_samples_scale_norms_by_sqrt_two() {
    let (m, data) = setup(60);
    let twice = Dataset::new(data.dt, [data.trajectories.clone(), data.trajectories.clone()].concat()).unwrap();
    let (a, b) = (
        sensitivity_matrix(&m, &data, &PhysParam::MECHANISM).unwrap(),
        sensitivity_matrix(&m, &twice, &PhysParam::MECHANISM).unwrap(),
    );
    for (na, nb) in a.norms().iter().zip(b.norms()) {
        assert!((nb / na - 2f64.sqrt()).abs() < 1e-12);
    }
    let (qa, qb) = (correlation_matrix(&a).unwrap(), correlation_matrix(&b).unwrap());
    for (ra, rb) in qa.q.iter().zip(&qb.q) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn absent_parameter_gives_a_flagged_zero_column() {
    let (mut m, data) = setup(40);
    m.params.g = 0.0;
    let s = sensitivity_matrix(&m, &data, &[PhysParam::M3, PhysParam::G]).unwrap();
    assert!(s.columns[2].iter().all(|&v| v == 0.0));
    let ranked = rank_sensitivities(&s);
    assert_eq!(ranked.last().unwrap(), &("g".to_string(), 0.0));
    assert!(matches!(correlation_matrix(&s), Err(Error::ZeroSensitivity(name)) if name == "g"));
}

#[test]
fn correlation_matrix_is_a_valid_gram_matrix() {
    let (m, data) = setup(80);
    let s = sensitivity_matrix(&m, &data, &PhysParam::MECHANISM).unwrap();
    let q = correlation_matrix(&s).unwrap();
    let r = q.labels.len();
    for i in 0..r {
        assert_eq!(q.q[i][i], 1.0);
        for j in 0..r {
            assert_eq!(q.q[i][j], q.q[j][i]);
            assert!(q.q[i][j].abs() <= 1.0);
        }
    }
    let mat = DMatrix::from_fn(r, r, |i, j| q.q[i][j]);
    let eig = mat.symmetric_eigenvalues();
    assert!(eig.iter().all(|&e| e >= -1e-10), "{eig}");
}

#[test]
fn correlation_ignores_positive_column_rescaling() {
    let (m, data) = setup(60);
    let s = sensitivity_matrix(&m, &data, &PhysParam::MECHANISM).unwrap();
    let mut scaled = s.clone();
    for (c, col) in scaled.columns.iter_mut().enumerate() {
        let k = 0.3 + 2.0 * c as f64;
        col.iter_mut().for_each(|v| *v *= k);
    }
    let (q, qs) = (correlation_matrix(&s).unwrap(), correlation_matrix(&scaled).unwrap());
    for (ra, rb) in q.q.iter().zip(&qs.q) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() < 1e-12);
        }
    }
    let norms = (s.norms(), scaled.norms());
    assert!((norms.1[3] / norms.0[3] - 6.3).abs() < 1e-12);
}

#[test]
fn parameter_columns_match_finite_differences() {
    let (m, data) = setup(20);
    let s = sensitivity_matrix(&m, &data, &PhysParam::MECHANISM).unwrap();
    let tr = &data.trajectories[1];
    let row = data.trajectories[0].len() + 7;
    let (x, u) = (tr.state(7), tr.torque[7]);
    let f = m.force_at(x, u).z;
    for (c, &j) in PhysParam::MECHANISM.iter().enumerate() {
        let v = m.params.get(j);
        let h = 1e-6 * v;
        let eval = |val: f64| {
            let mut p = m.params;
            p.set(j, val);
            graybox::physics::forward_dynamics(x, u, f, &p).unwrap()
        };
        let fd = v * (eval(v + h) - eval(v - h)) / (2.0 * h);
        let ad = s.columns[c + 1][row];
        assert!((ad - fd).abs() <= 1e-6 * ad.abs().max(1e-3), "{j}: {ad} vs {fd}");
    }
}

#[test]
fn csv_exports_carry_labels() {
    let (m, data) = setup(20);
    let s = sensitivity_matrix(&m, &data, &[PhysParam::L1, PhysParam::M3]).unwrap();
    let q = correlation_matrix(&s).unwrap();
    let dir = tempfile::tempdir().unwrap();
    s.write_csv(&dir.path().join("s.csv")).unwrap();
    q.write_csv(&dir.path().join("q.csv")).unwrap();
    let st = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(st.lines().next().unwrap(), "F,l1,m3");
    assert_eq!(st.lines().count(), s.rows() + 1);
    let qt = std::fs::read_to_string(dir.path().join("q.csv")).unwrap();
    assert_eq!(qt.lines().next().unwrap(), ",F,l1,m3");
    assert!(qt.lines().nth(2).unwrap().starts_with("l1,"));
    assert_eq!(q.get("l1", "m3"), q.get("m3", "l1"));
}
