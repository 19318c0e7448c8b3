use std::f64::consts::PI;

use conicscan::model::{builtin, Family};
use conicscan::scan::{refine, scan, scan_with_stats, Multiplicity, Refinement, ScanConfig, Verdict};
use conicscan::Error;

fn run(name: &str) -> Vec<conicscan::scan::DegeneracyPoint> {
    let m = builtin(name).unwrap();
    scan(&m.family(), m.band_index(), &ScanConfig::default()).unwrap()
}

fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
    a.iter().zip(&b).all(|(x, y)| (x - y).abs() < tol)
}

#[test]
fn qwz_3_to_1_has_one_cone() {
    let pts = run("qwz-3-1");
    assert_eq!(pts.len(), 1);
    let p = &pts[0];
    assert!(close(p.location, [0.5, PI, PI], 1e-6), "{:?}", p.location);
    assert_eq!(p.verdict, Verdict::Conical);
    assert_eq!(p.multiplicity, Multiplicity::Pair);
    assert!(p.gap < 1e-8);
    assert!(p.energy.abs() < 1e-8);
}

#[test]
fn qwz_hessian_matches_hand_derivation() {
    // d = (sin xi1, sin xi2, 3 - 2 s + cos xi1 + cos xi2), so near the cone
    // |d|^2 = 4 ds^2 + dxi1^2 + dxi2^2 and 4 q = 4 |d|^2 has Hessian diag(32, 8, 8)
    let p = &run("qwz-3-1")[0];
    let expected = [[32.0, 0.0, 0.0], [0.0, 8.0, 0.0], [0.0, 0.0, 8.0]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((p.hessian[i][j] - expected[i][j]).abs() < 1e-3 * 32.0, "{:?}", p.hessian);
        }
    }
    assert!((p.hessian_det - 2048.0).abs() < 2048.0 * 1e-3);
}

#[test]
fn qwz_3_to_m3_has_four_cones_on_three_slices() {
    let pts = run("qwz-3-m3");
    assert_eq!(pts.len(), 4);
    assert!(pts.iter().all(|p| p.verdict == Verdict::Conical));
    let mut expected = vec![[0.25, PI, PI], [0.5, 0.0, PI], [0.5, PI, 0.0], [0.75, 0.0, 0.0]];
    for p in &pts {
        let dom = builtin("qwz-3-m3").unwrap().family().domain();
        let k = expected
            .iter()
            .position(|e| dom.distance(e, &p.location) < 1e-6)
            .unwrap_or_else(|| panic!("unexpected crossing {:?}", p.location));
        expected.remove(k);
    }
    assert!(expected.is_empty());
}

#[test]
fn tangent_homotopy_is_non_conical() {
    let pts = run("qwz-tangent");
    assert_eq!(pts.len(), 1);
    assert_eq!(pts[0].verdict, Verdict::NonConical);
    assert!(close(pts[0].location, [0.5, PI, PI], 1e-4));
}

#[test]
fn flat_band_fixture_has_a_triple_point() {
    let pts = run("qwz-triple");
    assert!(!pts.is_empty());
    assert!(pts.iter().any(|p| p.multiplicity == Multiplicity::Higher));
}

#[test]
fn gapped_homotopy_has_no_crossings() {
    assert!(run("constant-gapped").is_empty());
}

#[test]
fn torus_weyl_points() {
    let pts = run("torus-weyl");
    assert_eq!(pts.len(), 2);
    for p in &pts {
        assert_eq!(p.verdict, Verdict::Conical);
        assert!((p.location[0] - PI).abs() < 1e-6 && (p.location[1] - PI).abs() < 1e-6);
        let z = p.location[2];
        assert!((z - PI / 2.0).abs() < 1e-6 || (z - 1.5 * PI).abs() < 1e-6, "{z}");
    }
}

#[test]
fn chart_fixtures_classify() {
    let weyl = run("chart-weyl");
    assert_eq!(weyl.len(), 1);
    assert_eq!(weyl[0].verdict, Verdict::Conical);
    assert!(close(weyl[0].location, [0.0; 3], 1e-8));
    for i in 0..3 {
        for j in 0..3 {
            let e = if i == j { 8.0 } else { 0.0 };
            assert!((weyl[0].hessian[i][j] - e).abs() < 0.08);
        }
    }
    for name in ["chart-quadratic", "chart-cubic"] {
        let pts = run(name);
        assert_eq!(pts.len(), 1, "{name}");
        assert_eq!(pts[0].verdict, Verdict::NonConical, "{name}");
        assert!(pts[0].relative_det < ScanConfig::default().hess_tol);
    }
    let line = run("chart-line");
    assert!(!line.is_empty());
    assert!(line.iter().all(|p| p.verdict != Verdict::Conical));
}

#[test]
fn scan_is_deterministic() {
    let m = builtin("qwz-3-m3").unwrap();
    let cfg = ScanConfig::default();
    let a = scan(&m.family(), 1, &cfg).unwrap();
    let b = scan(&m.family(), 1, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn stats_count_the_grid() {
    let m = builtin("qwz-3-1").unwrap();
    let cfg = ScanConfig::default().with_grid([9, 12, 12]);
    let (pts, stats) = scan_with_stats(&m.family(), 1, &cfg).unwrap();
    assert_eq!(stats.grid_points, 9 * 12 * 12);
    assert!(stats.seeds >= 1);
    assert_eq!(stats.clusters, pts.len());
    assert_eq!(pts.len(), 1);
}

#[test]
fn region_restricts_the_search() {
    let m = builtin("qwz-3-m3").unwrap();
    let cfg = ScanConfig::default().with_region([[0.6, 0.9], [-1.0, 1.0], [-1.0, 1.0]]);
    let pts = scan(&m.family(), 1, &cfg).unwrap();
    assert_eq!(pts.len(), 1);
    assert!((pts[0].location[0] - 0.75).abs() < 1e-6);
}

#[test]
fn refine_converges_from_a_nearby_seed() {
    let m = builtin("qwz-3-1").unwrap();
    let r = refine(&m.family(), 1, &[0.45, 3.0, 3.3], &ScanConfig::default());
    match r {
        Refinement::Converged { point, q, .. } => {
            assert!(close(point, [0.5, PI, PI], 1e-6));
            assert!(q < 1e-16);
        }
        other => panic!("expected convergence, got {other:?}"),
    }
}

#[test]
fn refine_reports_gapped_minimum() {
    let m = builtin("constant-gapped").unwrap();
    let r = refine(&m.family(), 1, &[0.5, 1.0, 1.0], &ScanConfig::default());
    assert!(matches!(r, Refinement::Gapped { .. }), "{r:?}");
}

#[test]
fn invalid_configs_are_input_errors() {
    let m = builtin("qwz-3-1").unwrap();
    let f = m.family();
    let bad = [
        ScanConfig::default().with_grid([2, 10, 10]),
        ScanConfig {
            refine_tol: 0.0,
            ..ScanConfig::default()
        },
        ScanConfig {
            hess_tol: f64::NAN,
            ..ScanConfig::default()
        },
        ScanConfig::default().with_region([[0.5, 0.4], [0.0, 1.0], [0.0, 1.0]]),
    ];
    for cfg in bad {
        assert!(matches!(scan(&f, 1, &cfg), Err(Error::Input(_))), "{cfg:?}");
    }
    assert!(matches!(scan(&f, 2, &ScanConfig::default()), Err(Error::Input(_))));
}

#[test]
fn middle_pair_of_stacked_model_is_found() {
    let pts = run("qwz-stacked");
    assert_eq!(pts.len(), 1);
    assert_eq!(pts[0].band, 2);
    assert_eq!(pts[0].verdict, Verdict::Conical);
    assert!((pts[0].location[0] - 0.5).abs() < 0.05);
}
