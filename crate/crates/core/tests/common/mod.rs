//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the library's eigen-solvers: characteristic polynomials
//! come from Faddeev-LeVerrier, discriminants from Sylvester resultants and
//! Hankel determinants of power sums, and projectors from contour integrals
//! of the resolvent.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// GUE sample with unit-variance off-diagonal entries.
pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(rng.sample(StandardNormal), 0.0);
        for j in i + 1..n {
            let z = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * std::f64::consts::FRAC_1_SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Haar-random unitary via QR of a complex Ginibre matrix with phase correction.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
    let g = DMatrix::from_fn(n, n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(n, n, |i, j| if i == j { r[(i, i)] / r[(i, i)].norm() } else { C64::new(0.0, 0.0) });
    q * phases
}

/// Coefficients `[c_0, ..., c_n]` of `det(z - A) = sum c_k z^k`, by Faddeev-LeVerrier.
pub fn char_poly(a: &DMatrix<C64>) -> Vec<C64> {
    let n = a.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    coeffs[n] = C64::new(1.0, 0.0);
    let mut m = DMatrix::<C64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + &id * coeffs[n - k + 1];
        let am = a * &m;
        coeffs[n - k] = -am.trace() / C64::new(k as f64, 0.0);
    }
    coeffs
}

/// Real parts of the characteristic polynomial of a Hermitian matrix.
pub fn char_poly_real(a: &DMatrix<C64>) -> Vec<f64> {
    char_poly(a).iter().map(|z| z.re).collect()
}

/// Roots of a monic real polynomial from its companion matrix.
pub fn companion_roots(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let comp = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -coeffs[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut roots: Vec<f64> = comp.complex_eigenvalues().iter().map(|z| z.re).collect();
    roots.sort_by(f64::total_cmp);
    roots
}

/// Resultant of two real polynomials (ascending coefficients) as a Sylvester determinant.
pub fn resultant(p: &[f64], q: &[f64]) -> f64 {
    let m = p.len() - 1;
    let n = q.len() - 1;
    let size = m + n;
    let mut s = DMatrix::<f64>::zeros(size, size);
    for row in 0..n {
        for (k, &c) in p.iter().rev().enumerate() {
            s[(row, row + k)] = c;
        }
    }
    for row in 0..m {
        for (k, &c) in q.iter().rev().enumerate() {
            s[(n + row, row + k)] = c;
        }
    }
    s.determinant()
}

/// Discriminant `prod_{i<j} (l_i - l_j)^2` of a monic polynomial via `Res(p, p')`.
pub fn resultant_discriminant(coeffs: &[f64]) -> f64 {
    let n = coeffs.len() - 1;
    let deriv: Vec<f64> = (1..=n).map(|k| k as f64 * coeffs[k]).collect();
    let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    sign * resultant(coeffs, &deriv) / coeffs[n]
}

/// Discriminant as the Hankel determinant of power sums `tr A^k`.
pub fn trace_power_discriminant(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut powers = vec![DMatrix::<C64>::identity(n, n)];
    for k in 1..2 * n - 1 {
        powers.push(&powers[k - 1] * a);
    }
    let p: Vec<f64> = powers.iter().map(|m| m.trace().re).collect();
    DMatrix::from_fn(n, n, |i, j| p[i + j]).determinant()
}

/// Riesz projector `(2 pi i)^{-1} oint (z - A)^{-1} dz` on the circle `|z - c| = r`.
pub fn contour_projector(a: &DMatrix<C64>, center: f64, radius: f64, nodes: usize) -> DMatrix<C64> {
    let n = a.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let mut sum = DMatrix::<C64>::zeros(n, n);
    for k in 0..nodes {
        let w = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / nodes as f64);
        let z = C64::new(center, 0.0) + w * radius;
        let resolvent = (&id * z - a).try_inverse().expect("contour avoids the spectrum");
        // dz = i r w dtheta; the 1/(2 pi i) and dtheta = 2 pi / nodes leave r w / nodes
        sum += resolvent * (w * radius / nodes as f64);
    }
    sum
}

/// Gershgorin interval containing the spectrum of a Hermitian matrix.
pub fn gershgorin(a: &DMatrix<C64>) -> (f64, f64) {
    let n = a.nrows();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].norm()).sum();
        lo = lo.min(a[(i, i)].re - r);
        hi = hi.max(a[(i, i)].re + r);
    }
    (lo, hi)
}

/// QWZ vector `d(xi) = (sin xi1, sin xi2, m + cos xi1 + cos xi2)`.
pub fn qwz_d(m: f64, xi: [f64; 2]) -> [f64; 3] {
    [xi[0].sin(), xi[1].sin(), m + xi[0].cos() + xi[1].cos()]
}

/// Degree of `d / |d|` over the torus from signed spherical-triangle areas.
pub fn sphere_degree(d: impl Fn([f64; 2]) -> [f64; 3], grid: usize) -> f64 {
    let unit = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        DVector::from_vec(vec![v[0] / n, v[1] / n, v[2] / n])
    };
    let step = std::f64::consts::TAU / grid as f64;
    let at = |i: usize, j: usize| unit(d([step * i as f64, step * j as f64]));
    // Van Oosterom-Strackee solid angle of a spherical triangle
    let tri = |a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>| {
        let num = a.dot(&cross(b, c));
        let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
        2.0 * num.atan2(den)
    };
    let mut total = 0.0;
    for i in 0..grid {
        for j in 0..grid {
            let (a, b, c, e) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
            total += tri(&a, &b, &c) + tri(&a, &c, &e);
        }
    }
    total / (4.0 * std::f64::consts::PI)
}

fn cross(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

/// Eigenvalues of `v . sigma` in closed form.
pub fn pauli_pair(v: [f64; 3]) -> (f64, f64) {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (-r, r)
}
