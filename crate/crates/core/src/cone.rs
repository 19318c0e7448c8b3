//! Local data of a conical crossing: two-band frame, linearization `A0`,
//! chirality, and the associated Dirac model.

use nalgebra::{DMatrix, Matrix2, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{
    c, lowdin_orthonormalize, pauli, pauli_coordinates, HermitianMatrix, C64, ISOLATION_TOL,
};
use crate::model::{Family, Point};
use crate::scan::{DegeneracyPoint, Verdict};

/// Complex matrix stored as separate real and imaginary row lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DMatrix<C64>> for ComplexMatrixJson {
    fn from(m: &DMatrix<C64>) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        ComplexMatrixJson {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl ComplexMatrixJson {
    pub fn to_matrix(&self) -> DMatrix<C64> {
        let r = self.re.len();
        let k = self.re.first().map_or(0, Vec::len);
        DMatrix::from_fn(r, k, |i, j| c(self.re[i][j], self.im[i][j]))
    }
}

/// Linearization of `H` at a conical crossing in an orthonormal pair frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeData {
    pub location: Point,
    pub band: usize,
    /// Crossing energy `E0`.
    pub energy: f64,
    /// Columns `f1, f2` spanning the crossing pair.
    pub frame: ComplexMatrixJson,
    /// Trace part `a0_j = tr(B_j) / 2`.
    pub a0: [f64; 3],
    /// `A0[k][j] = tr(B_j sigma_k) / 2`; rows are Pauli indices, columns coordinates.
    pub a_matrix: [[f64; 3]; 3],
    pub determinant: f64,
    /// `sgn det A0`.
    pub chirality: i32,
}

impl ConeData {
    pub fn a_matrix3(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|k, j| self.a_matrix[k][j])
    }

    pub fn frame_matrix(&self) -> DMatrix<C64> {
        self.frame.to_matrix()
    }

    /// Predicted Hessian of `4 q`: `8 A0^T A0`.
    pub fn predicted_hessian(&self) -> Matrix3<f64> {
        let a = self.a_matrix3();
        8.0 * a.transpose() * a
    }
}

/// Builds cone data for a crossing already classified as conical.
pub fn analyze_cone<F: Family + ?Sized>(family: &F, point: &DegeneracyPoint) -> Result<ConeData> {
    if point.verdict != Verdict::Conical {
        return Err(Error::NotConical {
            point: point.location,
            detail: format!("verdict is {:?}", point.verdict),
        });
    }
    let n = point.band;
    let spec = family.evaluate(&point.location).eigensystem()?;
    let iso = spec.isolation(n);
    if iso < ISOLATION_TOL {
        return Err(Error::Frame(format!(
            "pair ({n}, {}) is not isolated at {:?} (separation {iso:.3e})",
            n + 1,
            point.location
        )));
    }
    let frame = lowdin_orthonormalize(&spec.columns(n - 1, n + 1))?;
    cone_from_frame(family, &point.location, n, &frame)
}

/// Cone data in a caller-supplied orthonormal frame of the crossing pair.
pub fn cone_from_frame<F: Family + ?Sized>(
    family: &F,
    location: &Point,
    band: usize,
    frame: &DMatrix<C64>,
) -> Result<ConeData> {
    let bands = family.bands();
    if frame.nrows() != bands || frame.ncols() != 2 {
        return Err(Error::Frame(format!(
            "frame is {}x{}, expected {bands}x2",
            frame.nrows(),
            frame.ncols()
        )));
    }
    let gram = frame.adjoint() * frame;
    let ortho = (gram - DMatrix::<C64>::identity(2, 2)).norm();
    if ortho > 1e-10 {
        return Err(Error::Frame(format!("frame columns are not orthonormal ({ortho:.3e})")));
    }
    let h = family.evaluate(location);
    let energy = {
        let spec = h.eigensystem()?;
        0.5 * (spec.values[band - 1] + spec.values[band])
    };
    let mut a0 = [0.0; 3];
    let mut a = [[0.0; 3]; 3];
    for j in 0..3 {
        let bj = frame.adjoint() * family.derivative(location, j) * frame;
        let b2 = Matrix2::new(bj[(0, 0)], bj[(0, 1)], bj[(1, 0)], bj[(1, 1)]);
        let (t, v) = pauli_coordinates(&b2);
        a0[j] = t;
        for k in 0..3 {
            a[k][j] = v[k];
        }
    }
    let det = Matrix3::from_fn(|k, j| a[k][j]).determinant();
    let chirality = if det > 0.0 {
        1
    } else if det < 0.0 {
        -1
    } else {
        0
    };
    Ok(ConeData {
        location: *location,
        band,
        energy,
        frame: ComplexMatrixJson::from(frame),
        a0,
        a_matrix: a,
        determinant: det,
        chirality,
    })
}

/// Effective Dirac operator `E0 + a0 . v + (A0 v) . sigma` with `v = (x2, eta1, D2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracModel {
    pub energy: f64,
    pub a0: [f64; 3],
    pub a_matrix: [[f64; 3]; 3],
}

impl From<&ConeData> for DiracModel {
    fn from(cd: &ConeData) -> Self {
        DiracModel {
            energy: cd.energy,
            a0: cd.a0,
            a_matrix: cd.a_matrix,
        }
    }
}

/// Dirac model of a cone, measured from the crossing energy.
pub fn dirac_model(cd: &ConeData) -> DiracModel {
    DiracModel::from(cd)
}

/// Hermitian spectral derivative `-i d/dx` on a periodic grid of `n` points, spacing `h`.
pub fn spectral_momentum(n: usize, h: f64) -> DMatrix<C64> {
    let mut d = DMatrix::zeros(n, n);
    let nf = n as f64;
    let scale = std::f64::consts::TAU / (nf * h);
    for m in 0..n {
        for k in 0..n {
            if m == k {
                continue;
            }
            let diff = m as f64 - k as f64;
            let sign = if (m + k) % 2 == 0 { 1.0 } else { -1.0 };
            let v = if n % 2 == 0 {
                0.5 * sign / (std::f64::consts::PI * diff / nf).tan()
            } else {
                0.5 * sign / (std::f64::consts::PI * diff / nf).sin()
            };
            // d/dx = scale * d/dtheta; the momentum operator is -i d/dx
            d[(m, k)] = c(0.0, -scale * v);
        }
    }
    d
}

impl DiracModel {
    /// Symbol at `(x2, eta1, xi2)` without the constant `E0`.
    pub fn symbol(&self, v: [f64; 3]) -> Matrix2<C64> {
        let mut m = pauli(0) * c(self.a0.iter().zip(&v).map(|(a, x)| a * x).sum(), 0.0);
        for k in 0..3 {
            let coef: f64 = (0..3).map(|j| self.a_matrix[k][j] * v[j]).sum();
            m += pauli(k + 1) * c(coef, 0.0);
        }
        m
    }

    /// Operator at fixed `eta1` on the grid `x`, with `p` the momentum matrix on that grid.
    ///
    /// Basis order is site-major: index `2 m + a` for site `m` and spinor component `a`.
    pub fn line_operator(&self, eta1: f64, x: &[f64], p: &DMatrix<C64>) -> HermitianMatrix {
        let n = x.len();
        let mut op = DMatrix::zeros(2 * n, 2 * n);
        let sig: Vec<Matrix2<C64>> = (0..4).map(pauli).collect();
        let xcoef = |k: usize| self.a_matrix[k][0];
        let ecoef = |k: usize| self.a_matrix[k][1];
        let pcoef = |k: usize| self.a_matrix[k][2];
        for m in 0..n {
            let mut local = sig[0] * c(self.a0[0] * x[m] + self.a0[1] * eta1, 0.0);
            for k in 0..3 {
                local += sig[k + 1] * c(xcoef(k) * x[m] + ecoef(k) * eta1, 0.0);
            }
            let mut pm = sig[0] * c(self.a0[2], 0.0);
            for k in 0..3 {
                pm += sig[k + 1] * c(pcoef(k), 0.0);
            }
            for l in 0..n {
                let block = if l == m {
                    local + pm * p[(m, l)]
                } else {
                    pm * p[(m, l)]
                };
                for a in 0..2 {
                    for b in 0..2 {
                        op[(2 * m + a, 2 * l + b)] += block[(a, b)];
                    }
                }
            }
        }
        HermitianMatrix::symmetrized(op)
    }

    /// Eigenvalues of the line operator with localization weight inside `|x| < inner`.
    pub fn line_spectrum(&self, eta1: f64, x: &[f64], p: &DMatrix<C64>, inner: f64) -> Result<Vec<(f64, f64)>> {
        let spec = self.line_operator(eta1, x, p).eigensystem()?;
        Ok((0..spec.dim())
            .map(|k| {
                let w: f64 = (0..x.len())
                    .filter(|&m| x[m].abs() < inner)
                    .map(|m| spec.vectors[(2 * m, k)].norm_sqr() + spec.vectors[(2 * m + 1, k)].norm_sqr())
                    .sum();
                (spec.values[k], w)
            })
            .collect())
    }
}
