//! Hermitian matrices, sorted spectra and the symmetric-function layer.
//!
//! Eigenvalues are always reported in ascending order and band indices are
//! 1-based, so band `n` and band `n + 1` form the pair `(lambda_n, lambda_{n+1})`.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative tolerance used for every "gap has closed" decision.
pub const GAP_TOL: f64 = 1e-10;

/// Minimum separation from neighbouring bands for a two-band window.
pub const ISOLATION_TOL: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-12;

pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Pauli matrix `sigma_k` for `k` in 1..=3; `k = 0` gives the identity.
pub fn pauli(k: usize) -> Matrix2<C64> {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match k {
        0 => Matrix2::new(o, z, z, o),
        1 => Matrix2::new(z, o, o, z),
        2 => Matrix2::new(z, -i, i, z),
        3 => Matrix2::new(o, z, z, -o),
        _ => panic!("Pauli index {k} out of range"),
    }
}

/// `v . sigma` for a real 3-vector.
pub fn pauli_vector(v: [f64; 3]) -> Matrix2<C64> {
    pauli(1) * c(v[0], 0.0) + pauli(2) * c(v[1], 0.0) + pauli(3) * c(v[2], 0.0)
}

/// Real Pauli coordinates `(tr B / 2, tr(B sigma_k) / 2)` of a 2x2 matrix.
pub fn pauli_coordinates(b: &Matrix2<C64>) -> (f64, [f64; 3]) {
    let half = |m: Matrix2<C64>| 0.5 * (b * m).trace().re;
    (half(pauli(0)), [half(pauli(1)), half(pauli(2)), half(pauli(3))])
}

pub fn to_dynamic(m: &Matrix2<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

/// Square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(DMatrix<C64>);

impl HermitianMatrix {
    /// Validates shape, finiteness and Hermiticity, then symmetrizes.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Input(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() < 2 {
            return Err(Error::Input("dimension must be at least 2".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Input("matrix has non-finite entries".into()));
        }
        let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        let deviation = (&m - m.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if deviation > HERMITIAN_TOL * (1.0 + scale) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    /// Builds from real and imaginary parts given row by row.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if im.len() != n || re.iter().chain(im.iter()).any(|row| row.len() != n) {
            return Err(Error::Input("real and imaginary parts must be n x n".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| c(re[i][j], im[i][j])))
    }

    /// Averages `m` with its adjoint; used on sums that are Hermitian up to rounding.
    pub(crate) fn symmetrized(m: DMatrix<C64>) -> Self {
        let adj = m.adjoint();
        HermitianMatrix((m + adj) * c(0.5, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(DMatrix::identity(n, n))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        HermitianMatrix(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(values[i], 0.0)
            } else {
                c(0.0, 0.0)
            }
        }))
    }

    pub fn from_pauli(v: [f64; 3]) -> Self {
        HermitianMatrix(to_dynamic(&pauli_vector(v)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    /// Frobenius norm `sqrt(tr A^2)`.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &other.0)
    }

    pub fn scale(&self, t: f64) -> HermitianMatrix {
        HermitianMatrix(&self.0 * c(t, 0.0))
    }

    /// Ascending eigenvalues with matching orthonormal eigenvector columns.
    pub fn eigensystem(&self) -> Result<Spectrum> {
        let eig = self.0.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("eigensolver produced non-finite values".into()));
        }
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
        let vectors = DMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
        Ok(Spectrum { values, vectors })
    }

    pub fn eigenvalues(&self) -> Result<DVector<f64>> {
        Ok(self.eigensystem()?.values)
    }

    /// Tolerance below which two eigenvalues of this matrix count as equal.
    pub fn gap_tolerance(&self) -> f64 {
        GAP_TOL * (1.0 + self.norm())
    }
}

/// Sorted eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: DVector<f64>,
    pub vectors: DMatrix<C64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Gap between band `n` and band `n + 1` (1-based).
    pub fn gap(&self, n: usize) -> f64 {
        self.values[n] - self.values[n - 1]
    }

    /// Smallest gap over adjacent pairs other than `(n, n + 1)`.
    pub fn min_other_gap(&self, n: usize) -> f64 {
        (1..self.dim())
            .filter(|&k| k != n)
            .map(|k| self.gap(k))
            .fold(f64::INFINITY, f64::min)
    }

    /// Separation of the pair `(n, n + 1)` from the remaining bands.
    pub fn isolation(&self, n: usize) -> f64 {
        let below = if n > 1 { self.gap(n - 1) } else { f64::INFINITY };
        let above = if n + 1 < self.dim() {
            self.gap(n + 1)
        } else {
            f64::INFINITY
        };
        below.min(above)
    }

    /// Eigenvector columns `k0..k1` (0-based, exclusive end).
    pub fn columns(&self, k0: usize, k1: usize) -> DMatrix<C64> {
        self.vectors.columns(k0, k1 - k0).into_owned()
    }
}

/// Checks that `n` is a valid 1-based band index for dimension `dim`.
pub fn check_band(n: usize, dim: usize) -> Result<()> {
    if n == 0 || n >= dim {
        return Err(Error::Input(format!(
            "band index {n} outside 1..={}",
            dim - 1
        )));
    }
    Ok(())
}

/// `prod_{j<k} (lambda_j - lambda_k)^2`, zero when any gap is below tolerance.
pub fn discriminant(a: &HermitianMatrix) -> Result<f64> {
    let values = a.eigenvalues()?;
    Ok(discriminant_of(values.as_slice(), a.gap_tolerance()))
}

/// Discriminant of a sorted eigenvalue list with gap snapping at `tol`.
pub fn discriminant_of(values: &[f64], tol: f64) -> f64 {
    if values.windows(2).any(|w| w[1] - w[0] <= tol) {
        return 0.0;
    }
    let mut d = 1.0;
    for j in 0..values.len() {
        for k in j + 1..values.len() {
            let g = values[k] - values[j];
            d *= g * g;
        }
    }
    d
}

/// Orthogonal projector onto the span of the lowest `n` eigenvectors.
pub fn spectral_projector(a: &HermitianMatrix, n: usize) -> Result<DMatrix<C64>> {
    check_band(n, a.dim())?;
    let spec = a.eigensystem()?;
    let gap = spec.gap(n);
    if gap <= a.gap_tolerance() {
        return Err(Error::GapClosed {
            band: n,
            next: n + 1,
            point: vec![],
            gap,
        });
    }
    let w = spec.columns(0, n);
    Ok(&w * w.adjoint())
}

/// Symmetric functions of the pair `(lambda_n, lambda_{n+1})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoBandWindow {
    /// Mean of the pair.
    pub ell: f64,
    /// Quarter of the squared pair gap; vanishes exactly on degeneracy.
    pub q: f64,
}

/// Window functions `ell = F1 / 2` and `q = (2 F2 - F1^2) / 4` of the pair.
///
/// `q` is evaluated as `(lambda_{n+1} - lambda_n)^2 / 4`, which is the same
/// polynomial without the cancellation of the power-sum form.
pub fn two_band_window(a: &HermitianMatrix, n: usize) -> Result<TwoBandWindow> {
    check_band(n, a.dim())?;
    let spec = a.eigensystem()?;
    window_of(&spec, n)
}

pub fn window_of(spec: &Spectrum, n: usize) -> Result<TwoBandWindow> {
    let iso = spec.isolation(n);
    if iso < ISOLATION_TOL {
        return Err(Error::Isolation {
            band: n,
            next: n + 1,
            gap: iso,
        });
    }
    let (lo, hi) = (spec.values[n - 1], spec.values[n]);
    let g = (hi - lo).max(0.0);
    Ok(TwoBandWindow {
        ell: 0.5 * (lo + hi),
        q: 0.25 * g * g,
    })
}

/// `M (M* M)^{-1/2}`: the closest matrix with orthonormal columns.
pub fn lowdin_orthonormalize(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let gram = HermitianMatrix::symmetrized(m.adjoint() * m);
    let spec = gram.eigensystem()?;
    let min = spec.values.min();
    if min <= 1e-14 * (1.0 + spec.values.max()) {
        return Err(Error::Frame(format!(
            "frame columns are linearly dependent (smallest Gram eigenvalue {min:.3e})"
        )));
    }
    let k = spec.dim();
    let inv_sqrt = DMatrix::from_fn(k, k, |i, j| {
        (0..k)
            .map(|l| spec.vectors[(i, l)] * spec.vectors[(j, l)].conj() / spec.values[l].sqrt())
            .sum::<C64>()
    });
    Ok(m * inv_sqrt)
}
