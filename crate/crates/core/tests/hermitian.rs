mod common;

use common::*;
use conicscan::hermitian::{
    lowdin_orthonormalize, pauli_coordinates, pauli_vector, ISOLATION_TOL,
};
use conicscan::{discriminant, spectral_projector, two_band_window, Error, HermitianMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

fn herm(m: DMatrix<C64>) -> HermitianMatrix {
    HermitianMatrix::new(m).expect("hermitian")
}

#[test]
fn eigenvalues_match_companion_roots() {
    let mut r = rng(11);
    for n in 2..=5 {
        for _ in 0..40 {
            let a = random_hermitian(&mut r, n);
            let lib = herm(a.clone()).eigenvalues().unwrap();
            let oracle = companion_roots(&char_poly_real(&a));
            for (x, y) in lib.iter().zip(&oracle) {
                assert!((x - y).abs() < 1e-8 * (1.0 + y.abs()), "n={n}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn faddeev_leverrier_polynomial_is_real_for_hermitian_input() {
    let mut r = rng(3);
    let a = random_hermitian(&mut r, 4);
    for z in char_poly(&a) {
        assert!(z.im.abs() < 1e-12);
    }
}

#[test]
fn discriminant_matches_both_oracles() {
    let mut r = rng(5);
    for n in 2..=4 {
        for _ in 0..50 {
            let a = random_hermitian(&mut r, n);
            let lib = discriminant(&herm(a.clone())).unwrap();
            let res = resultant_discriminant(&char_poly_real(&a));
            let tp = trace_power_discriminant(&a);
            assert!((lib - res).abs() <= 1e-7 * res.abs(), "n={n}: {lib} vs {res}");
            assert!((lib - tp).abs() <= 1e-7 * tp.abs(), "n={n}: {lib} vs {tp}");
        }
    }
}

#[test]
fn discriminant_of_diagonal_is_product_of_squared_gaps() {
    let d = discriminant(&HermitianMatrix::diagonal(&[0.0, 1.0, 3.0])).unwrap();
    // (1-0)^2 (3-0)^2 (3-1)^2
    assert!((d - 36.0).abs() < 1e-12);
}

#[test]
fn discriminant_vanishes_on_repeated_eigenvalue() {
    let mut r = rng(8);
    let u = random_unitary(&mut r, 3);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C64::new(-1.0, 0.0),
        C64::new(2.0, 0.0),
        C64::new(2.0, 0.0),
    ]));
    let a = &u * d * u.adjoint();
    assert_eq!(discriminant(&herm(a)).unwrap(), 0.0);
}

#[test]
fn pauli_discriminant_is_four_norm_squared() {
    let v = [0.3, -1.2, 0.7];
    let d = discriminant(&HermitianMatrix::from_pauli(v)).unwrap();
    let (lo, hi) = pauli_pair(v);
    assert!((d - (hi - lo).powi(2)).abs() < 1e-12);
}

#[test]
fn projector_matches_contour_integral() {
    let mut r = rng(21);
    let mut checked = 0;
    while checked < 30 {
        let n = 2 + checked % 4;
        let a = random_hermitian(&mut r, n);
        let vals = companion_roots(&char_poly_real(&a));
        let k = 1 + checked % (n - 1);
        let cut = 0.5 * (vals[k - 1] + vals[k]);
        if vals[k] - vals[k - 1] < 0.2 {
            continue;
        }
        let (lo, _) = gershgorin(&a);
        let lo = lo - 1.0;
        let oracle = contour_projector(&a, 0.5 * (lo + cut), 0.5 * (cut - lo), 4096);
        let lib = spectral_projector(&herm(a), k).unwrap();
        assert!((&lib - &oracle).norm() < 1e-8, "n={n} k={k}: {}", (&lib - &oracle).norm());
        checked += 1;
    }
}

#[test]
fn projector_is_idempotent_with_trace_n() {
    let mut r = rng(2);
    let a = herm(random_hermitian(&mut r, 4));
    let p = spectral_projector(&a, 2).unwrap();
    assert!((&p * &p - &p).norm() < 1e-12);
    assert!((p.trace().re - 2.0).abs() < 1e-12);
    assert!((&p - p.adjoint()).norm() < 1e-12);
}

#[test]
fn projector_refuses_closed_gap() {
    let a = HermitianMatrix::diagonal(&[0.0, 1.0, 1.0]);
    assert!(matches!(spectral_projector(&a, 2), Err(Error::GapClosed { .. })));
    assert!(spectral_projector(&a, 1).is_ok());
}

#[test]
fn window_functions_of_pauli_matrix() {
    let v = [0.6, 0.0, 0.8];
    let w = two_band_window(&HermitianMatrix::from_pauli(v), 1).unwrap();
    assert!(w.ell.abs() < 1e-14);
    assert!((w.q - 1.0).abs() < 1e-12);
}

#[test]
fn window_q_is_quarter_squared_gap() {
    let a = HermitianMatrix::diagonal(&[-2.0, 0.5, 1.5, 4.0]);
    let w = two_band_window(&a, 2).unwrap();
    assert!((w.ell - 1.0).abs() < 1e-14);
    assert!((w.q - 0.25).abs() < 1e-14);
}

#[test]
fn window_rejects_non_isolated_pair() {
    let a = HermitianMatrix::diagonal(&[0.0, 0.0, 0.0]);
    match two_band_window(&a, 1) {
        Err(Error::Isolation { gap, .. }) => assert!(gap < ISOLATION_TOL),
        other => panic!("expected isolation error, got {other:?}"),
    }
}

#[test]
fn rejects_non_hermitian_and_non_finite() {
    let mut m = DMatrix::<C64>::zeros(2, 2);
    m[(0, 1)] = C64::new(1.0, 0.0);
    assert!(matches!(HermitianMatrix::new(m.clone()), Err(Error::NotHermitian { .. })));
    m[(1, 0)] = C64::new(f64::NAN, 0.0);
    assert!(matches!(HermitianMatrix::new(m), Err(Error::Input(_))));
    assert!(matches!(HermitianMatrix::new(DMatrix::zeros(2, 3)), Err(Error::Input(_))));
    assert!(matches!(HermitianMatrix::new(DMatrix::zeros(1, 1)), Err(Error::Input(_))));
}

#[test]
fn band_index_out_of_range_is_input_error() {
    let a = HermitianMatrix::diagonal(&[0.0, 1.0]);
    assert!(matches!(spectral_projector(&a, 0), Err(Error::Input(_))));
    assert!(matches!(spectral_projector(&a, 2), Err(Error::Input(_))));
}

#[test]
fn pauli_coordinates_roundtrip() {
    let v = [0.1, -0.4, 2.5];
    let mut m = pauli_vector(v);
    m[(0, 0)] += C64::new(0.7, 0.0);
    m[(1, 1)] += C64::new(0.7, 0.0);
    let (t, back) = pauli_coordinates(&m);
    assert!((t - 0.7).abs() < 1e-14);
    for k in 0..3 {
        assert!((back[k] - v[k]).abs() < 1e-14);
    }
}

#[test]
fn lowdin_returns_orthonormal_columns_close_to_input() {
    let mut r = rng(9);
    let u = random_unitary(&mut r, 4).columns(0, 2).into_owned();
    let noisy = &u + DMatrix::from_element(4, 2, C64::new(1e-6, 0.0));
    let q = lowdin_orthonormalize(&noisy).unwrap();
    assert!((q.adjoint() * &q - DMatrix::<C64>::identity(2, 2)).norm() < 1e-12);
    assert!((&q - &u).norm() < 1e-5);
}
