mod common;

use std::f64::consts::TAU;

use common::*;
use conicscan::chern::lattice_chern;
use conicscan::cone::{analyze_cone, cone_from_frame, spectral_momentum};
use conicscan::genericity::bump_profile;
use conicscan::hermitian::window_of;
use conicscan::model::{Domain, Family, Hopping, HoppingSet, Model, PolyFamily, TorusFamily};
use conicscan::scan::{scan, ScanConfig, Verdict};
use conicscan::{discriminant, spectral_projector, HermitianMatrix};
use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn herm(seed: u64, n: usize) -> DMatrix<C64> {
    random_hermitian(&mut rng(seed), n)
}

proptest! {
    #[test]
    fn discriminant_is_unitarily_invariant(seed in any::<u64>(), n in 2usize..=5) {
        let a = herm(seed, n);
        let u = random_unitary(&mut rng(seed ^ 0x5eed), n);
        let d0 = discriminant(&HermitianMatrix::new(a.clone()).unwrap()).unwrap();
        let d1 = discriminant(&HermitianMatrix::new(&u * a * u.adjoint()).unwrap()).unwrap();
        prop_assert!(d0 >= 0.0);
        prop_assert!((d0 - d1).abs() <= 1e-8 * d0.max(1e-300));
    }

    #[test]
    fn discriminant_scales_and_ignores_trace_shift(seed in any::<u64>(), n in 2usize..=4, t in 0.2f64..3.0, c in -5.0f64..5.0) {
        let a = herm(seed, n);
        let d = discriminant(&HermitianMatrix::new(a.clone()).unwrap()).unwrap();
        let scaled = discriminant(&HermitianMatrix::new(&a * C64::new(t, 0.0)).unwrap()).unwrap();
        let id = DMatrix::<C64>::identity(n, n);
        let shifted = discriminant(&HermitianMatrix::new(&a + id * C64::new(c, 0.0)).unwrap()).unwrap();
        let expect = d * t.powi((n * (n - 1)) as i32);
        prop_assert!((scaled - expect).abs() <= 1e-8 * expect);
        prop_assert!((shifted - d).abs() <= 1e-6 * d);
    }

    #[test]
    fn eigensystem_reconstructs_the_matrix(seed in any::<u64>(), n in 2usize..=6) {
        let a = herm(seed, n);
        let spec = HermitianMatrix::new(a.clone()).unwrap().eigensystem().unwrap();
        prop_assert!(spec.values.as_slice().windows(2).all(|w| w[0] <= w[1]));
        let diag = DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(spec.values[i], 0.0) } else { C64::new(0.0, 0.0) });
        let back = &spec.vectors * diag * spec.vectors.adjoint();
        prop_assert!((back - &a).norm() < 1e-10 * (1.0 + a.norm()));
    }

    #[test]
    fn projector_is_an_orthogonal_spectral_projector(seed in any::<u64>(), n in 2usize..=5, k in 1usize..5) {
        prop_assume!(k < n);
        let a = herm(seed, n);
        let p = spectral_projector(&HermitianMatrix::new(a.clone()).unwrap(), k).unwrap();
        prop_assert!((&p * &p - &p).norm() < 1e-10);
        prop_assert!((&p - p.adjoint()).norm() < 1e-12);
        prop_assert!((p.trace().re - k as f64).abs() < 1e-10);
        prop_assert!((&p * &a - &a * &p).norm() < 1e-9 * (1.0 + a.norm()));
    }

    #[test]
    fn window_shifts_with_the_trace(seed in any::<u64>(), c in -3.0f64..3.0) {
        let a = herm(seed, 3);
        let id = DMatrix::<C64>::identity(3, 3);
        let s0 = HermitianMatrix::new(a.clone()).unwrap().eigensystem().unwrap();
        let s1 = HermitianMatrix::new(&a + id * C64::new(c, 0.0)).unwrap().eigensystem().unwrap();
        let (w0, w1) = (window_of(&s0, 1).unwrap(), window_of(&s1, 1).unwrap());
        prop_assert!(w0.q >= 0.0);
        prop_assert!(s0.values[0] <= w0.ell && w0.ell <= s0.values[1]);
        prop_assert!((w1.ell - w0.ell - c).abs() < 1e-10);
        prop_assert!((w1.q - w0.q).abs() < 1e-9 * (1.0 + w0.q));
    }

    #[test]
    fn pauli_spectrum_is_plus_minus_norm(v in prop::array::uniform3(-5.0f64..5.0)) {
        let ev = HermitianMatrix::from_pauli(v).eigenvalues().unwrap();
        let (lo, hi) = pauli_pair(v);
        prop_assert!((ev[0] - lo).abs() < 1e-12 && (ev[1] - hi).abs() < 1e-12);
    }

    #[test]
    fn bloch_hamiltonians_are_periodic_and_hermitian(
        seed in any::<u64>(),
        xi in prop::array::uniform3(-10.0f64..10.0),
        axis in 0usize..3,
    ) {
        let set = random_hopping_set(seed);
        let h0 = set.evaluate(&xi).unwrap().into_matrix();
        let mut shifted = xi;
        shifted[axis] += TAU;
        let h1 = set.evaluate(&shifted).unwrap().into_matrix();
        prop_assert!((&h0 - &h1).norm() < 1e-11);
        prop_assert!((&h0 - h0.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn torus_models_roundtrip_through_json(seed in any::<u64>()) {
        let set = random_hopping_set(seed);
        let model = Model::Torus { family: std::sync::Arc::new(TorusFamily::new(set).unwrap()), band_index: 1 };
        let back = Model::from_json_str(&model.to_json().to_string()).unwrap();
        let x = [0.3, -1.2, 2.2];
        let d = back.family().evaluate(&x).into_matrix() - model.family().evaluate(&x).into_matrix();
        prop_assert!(d.norm() < 1e-14);
    }

    #[test]
    fn domain_normalization_is_idempotent(p in prop::array::uniform3(-20.0f64..20.0)) {
        for d in [Domain::homotopy(), Domain::torus()] {
            let once = d.normalize(p);
            prop_assert_eq!(d.normalize(once), once);
            prop_assert!(d.contains(&once));
        }
        // periodic axes only move by whole periods
        let torus = Domain::torus();
        prop_assert!(torus.distance(&p, &torus.normalize(p)) < 1e-9);
        let h = Domain::homotopy();
        let q = [p[0].clamp(0.0, 1.0), p[1], p[2]];
        prop_assert!(h.distance(&q, &h.normalize(p)) < 1e-9);
    }

    #[test]
    fn bump_profile_is_monotone_in_unit_range(a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(bump_profile(lo) >= bump_profile(hi));
        prop_assert!((0.0..=1.0).contains(&bump_profile(a)));
    }

    #[test]
    fn spectral_momentum_is_hermitian(n in 4usize..40, h in 0.05f64..1.0) {
        let p = spectral_momentum(n, h);
        prop_assert!((&p - p.adjoint()).norm() < 1e-10 * (1.0 + p.norm()));
    }
}

/// Two-band, three-momentum hopping set with random nearest-neighbour terms.
fn random_hopping_set(seed: u64) -> HoppingSet {
    let mut r = rng(seed);
    let mut terms = vec![Hopping::new(vec![0, 0, 0], random_hermitian(&mut r, 2))];
    for k in 0..3 {
        let mut disp = vec![0, 0, 0];
        disp[k] = 1;
        let t = random_hermitian(&mut r, 2) + random_unitary(&mut r, 2) * C64::new(0.3, 0.0);
        terms.push(Hopping::new(disp, t));
    }
    HoppingSet::new(3, 2, terms, true).unwrap()
}

fn linear_chart(m: [[f64; 3]; 3]) -> PolyFamily {
    const X: [[u32; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    let row = |k: usize| -> Vec<(f64, [u32; 3])> { (0..3).map(|j| (m[k][j], X[j])).collect() };
    let (a, b, c) = (row(0), row(1), row(2));
    PolyFamily::pauli(1.0, [&a, &b, &c])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chirality_of_linear_charts_is_sign_of_det(
        entries in prop::array::uniform9(-2.0f64..2.0),
        seed in any::<u64>(),
    ) {
        let m = [[entries[0], entries[1], entries[2]], [entries[3], entries[4], entries[5]], [entries[6], entries[7], entries[8]]];
        let mm = Matrix3::from_fn(|i, j| m[i][j]);
        let sv = mm.singular_values();
        prop_assume!(sv.min() > 0.2);
        let fam = linear_chart(m);
        let pts = scan(&fam, 1, &ScanConfig::default()).unwrap();
        prop_assert_eq!(pts.len(), 1);
        prop_assert_eq!(pts[0].verdict, Verdict::Conical);
        let cd = analyze_cone(&fam, &pts[0]).unwrap();
        prop_assert_eq!(cd.chirality, mm.determinant().signum() as i32);
        let gram = cd.a_matrix3().transpose() * cd.a_matrix3();
        prop_assert!((gram - mm.transpose() * mm).norm() < 1e-6 * (1.0 + mm.norm_squared()));
        // any other orthonormal frame of the pair gives the same sign
        let u = random_unitary(&mut rng(seed), 2);
        let rotated = cone_from_frame(&fam, &cd.location, 1, &(cd.frame_matrix() * u)).unwrap();
        prop_assert_eq!(rotated.chirality, cd.chirality);
    }

    #[test]
    fn lattice_chern_is_gauge_invariant(m in prop::sample::select(vec![-3.0, -1.0, 1.0, 3.0]), seed in any::<u64>()) {
        let set = conicscan::model::qwz(m);
        let grid = 24;
        let frames: Vec<DMatrix<C64>> = (0..grid * grid)
            .map(|k| {
                let xi = [TAU * (k / grid) as f64 / grid as f64, TAU * (k % grid) as f64 / grid as f64];
                set.evaluate(&xi).unwrap().eigensystem().unwrap().columns(0, 1)
            })
            .collect();
        let mut r = rng(seed);
        let twisted: Vec<DMatrix<C64>> = frames.iter().map(|f| f * random_unitary(&mut r, 1)).collect();
        let a = lattice_chern(&frames, grid).unwrap();
        let b = lattice_chern(&twisted, grid).unwrap();
        prop_assert!((a.raw - b.raw).abs() < 1e-9);
        prop_assert!((a.raw - a.raw.round()).abs() < 1e-9);
    }
}
