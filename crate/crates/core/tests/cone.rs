mod common;

use common::*;
use conicscan::cone::{analyze_cone, cone_from_frame, dirac_model, spectral_momentum, ConeData};
use conicscan::model::{builtin, Family};
use conicscan::scan::{scan, DegeneracyPoint, ScanConfig, Verdict};
use conicscan::Error;
use nalgebra::{DMatrix, Matrix3, Vector3};

fn cones(name: &str) -> (std::sync::Arc<dyn Family>, Vec<DegeneracyPoint>, Vec<ConeData>) {
    let m = builtin(name).unwrap();
    let f = m.family();
    let pts = scan(&f, m.band_index(), &ScanConfig::default()).unwrap();
    let cds = pts
        .iter()
        .filter(|p| p.verdict == Verdict::Conical)
        .map(|p| analyze_cone(&f, p).unwrap())
        .collect();
    (f, pts, cds)
}

fn gram(cd: &ConeData) -> Matrix3<f64> {
    let a = cd.a_matrix3();
    a.transpose() * a
}

#[test]
fn qwz_cone_linearization() {
    // columns of A0 are d-derivatives (0, 0, -2), (-1, 0, 0), (0, -1, 0) up to a rotation
    let (_, _, cds) = cones("qwz-3-1");
    let cd = &cds[0];
    assert_eq!(cd.chirality, -1);
    assert!((cd.determinant + 2.0).abs() < 1e-6, "{}", cd.determinant);
    let g = gram(cd);
    let expected = Matrix3::from_diagonal(&Vector3::new(4.0, 1.0, 1.0));
    assert!((g - expected).norm() < 1e-6, "{g}");
    assert!(cd.a0.iter().all(|x| x.abs() < 1e-8));
    assert!(cd.energy.abs() < 1e-8);
}

#[test]
fn chart_chiralities() {
    assert_eq!(cones("chart-weyl").2[0].chirality, 1);
    assert_eq!(cones("chart-mirror").2[0].chirality, -1);
    let g = gram(&cones("chart-weyl").2[0]);
    assert!((g - Matrix3::identity()).norm() < 1e-8);
}

#[test]
fn weyl_pair_on_the_torus_has_zero_net_chirality() {
    let (_, _, cds) = cones("torus-weyl");
    assert_eq!(cds.len(), 2);
    assert_eq!(cds.iter().map(|c| c.chirality).sum::<i32>(), 0);
}

#[test]
fn qwz_3_to_m3_chiralities() {
    let (_, _, cds) = cones("qwz-3-m3");
    let mut by_s: Vec<(f64, i32)> = cds.iter().map(|c| (c.location[0], c.chirality)).collect();
    by_s.sort_by(|a, b| a.0.total_cmp(&b.0));
    let signs: Vec<i32> = by_s.iter().map(|x| x.1).collect();
    // the mass passes 2, 0, -2 with Chern numbers 0, -1, 1, 0
    assert_eq!(signs, vec![-1, 1, 1, -1]);
}

#[test]
fn predicted_hessian_matches_scan_hessian() {
    for name in ["qwz-3-1", "qwz-3-m3", "torus-weyl", "chart-weyl", "qwz-stacked"] {
        let (_, pts, cds) = cones(name);
        for (p, cd) in pts.iter().zip(&cds) {
            let h = Matrix3::from_fn(|i, j| p.hessian[i][j]);
            let pred = cd.predicted_hessian();
            assert!((h - pred).norm() < 1e-3 * pred.norm(), "{name}: {h} vs {pred}");
        }
    }
}

#[test]
fn chirality_is_invariant_under_frame_rotations() {
    let (f, _, cds) = cones("qwz-stacked");
    let cd = &cds[0];
    let frame = cd.frame_matrix();
    let mut r = rng(77);
    for _ in 0..50 {
        let u = random_unitary(&mut r, 2);
        let rotated = cone_from_frame(&f, &cd.location, cd.band, &(&frame * u)).unwrap();
        assert_eq!(rotated.chirality, cd.chirality);
        assert!((rotated.determinant - cd.determinant).abs() < 1e-8);
        assert!((gram(&rotated) - gram(cd)).norm() < 1e-8);
        for j in 0..3 {
            assert!((rotated.a0[j] - cd.a0[j]).abs() < 1e-10);
        }
    }
}

#[test]
fn local_form_ratio_near_cone() {
    let (f, _, cds) = cones("qwz-3-1");
    let cd = &cds[0];
    let a = cd.a_matrix3();
    let mut r = rng(4);
    for _ in 0..50 {
        let u = random_unitary(&mut r, 3);
        let dir = Vector3::new(u[(0, 0)].re, u[(1, 0)].re, u[(2, 0)].re).normalize();
        let eps = 1e-3 * dir;
        let x = [cd.location[0] + eps[0], cd.location[1] + eps[1], cd.location[2] + eps[2]];
        let ev = f.evaluate(&x).eigenvalues().unwrap();
        let ratio = (ev[1] - ev[0]) / (2.0 * (a * eps).norm());
        assert!((ratio - 1.0).abs() < 1e-2, "{ratio}");
    }
}

#[test]
fn non_conical_points_are_refused() {
    let m = builtin("chart-quadratic").unwrap();
    let f = m.family();
    let pts = scan(&f, 1, &ScanConfig::default()).unwrap();
    assert!(matches!(analyze_cone(&f, &pts[0]), Err(Error::NotConical { .. })));
}

#[test]
fn bad_frames_are_refused() {
    let (f, _, cds) = cones("chart-weyl");
    let loc = cds[0].location;
    let wrong_shape = DMatrix::from_element(2, 1, num_complex::Complex64::new(1.0, 0.0));
    assert!(matches!(cone_from_frame(&f, &loc, 1, &wrong_shape), Err(Error::Frame(_))));
    let not_ortho = DMatrix::from_element(2, 2, num_complex::Complex64::new(1.0, 0.0));
    assert!(matches!(cone_from_frame(&f, &loc, 1, &not_ortho), Err(Error::Frame(_))));
}

#[test]
fn triple_point_has_no_isolated_pair_frame() {
    let m = builtin("qwz-triple").unwrap();
    let f = m.family();
    let p = scan(&f, 1, &ScanConfig::default()).unwrap().remove(0);
    let forced = DegeneracyPoint {
        verdict: Verdict::Conical,
        ..p
    };
    assert!(matches!(analyze_cone(&f, &forced), Err(Error::Frame(_))));
}

#[test]
fn spectral_momentum_differentiates_plane_waves() {
    let n = 32;
    let h = 0.25;
    let p = spectral_momentum(n, h);
    let k = std::f64::consts::TAU * 3.0 / (n as f64 * h);
    let wave = DMatrix::from_fn(n, 1, |m, _| num_complex::Complex64::from_polar(1.0, k * m as f64 * h));
    let pw = &p * &wave;
    assert!((pw - &wave * num_complex::Complex64::new(k, 0.0)).norm() < 1e-10);
    assert!((&p - p.adjoint()).norm() < 1e-12);
}

#[test]
fn dirac_line_spectrum_has_one_chiral_branch() {
    // A0 v = (-eta, -p, -2 x): the Jackiw-Rebbi mode exp(-x^2) (1, -1) has energy +eta
    let (_, _, cds) = cones("qwz-3-1");
    let model = dirac_model(&cds[0]);
    let n = 96;
    let half = 6.0;
    let h = 2.0 * half / n as f64;
    let x: Vec<f64> = (0..n).map(|m| -half + h * m as f64).collect();
    let p = spectral_momentum(n, h);
    for &eta in &[-0.4, 0.15, 0.3] {
        let spec = model.line_spectrum(eta, &x, &p, 0.5 * half).unwrap();
        let inner: Vec<f64> = spec.iter().filter(|(_, w)| *w > 0.99).map(|(e, _)| *e).collect();
        let chiral: Vec<&f64> = inner.iter().filter(|e| (**e - eta).abs() < 1e-6).collect();
        assert_eq!(chiral.len(), 1, "eta = {eta}: {inner:?}");
        // massive levels come in +- pairs
        for e in inner.iter().filter(|e| (**e - eta).abs() > 1e-6 && e.abs() < 2.5) {
            assert!(inner.iter().any(|f| (f + e).abs() < 1e-6), "unpaired level {e} at eta = {eta}");
        }
    }
}
