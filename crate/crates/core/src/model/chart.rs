//! Matrix-valued polynomials on a cube, used as local model families.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Domain, Family, Point};
use crate::error::{Error, Result};
use crate::hermitian::{c, to_dynamic, pauli, HermitianMatrix, C64};

/// Monomial `x1^p1 x2^p2 x3^p3` times a Hermitian coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub powers: [u32; 3],
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// `H(x) = sum_t x^{p_t} C_t` on the cube `[-a, a]^3`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct PolyFamily {
    bands: usize,
    half_width: f64,
    terms: Vec<PolyTerm>,
    coeffs: Vec<DMatrix<C64>>,
}

#[derive(Clone, Serialize, Deserialize)]
struct PolyRepr {
    bands: usize,
    half_width: f64,
    terms: Vec<PolyTerm>,
}

impl TryFrom<PolyRepr> for PolyFamily {
    type Error = Error;
    fn try_from(r: PolyRepr) -> Result<Self> {
        PolyFamily::new(r.bands, r.half_width, r.terms)
    }
}

impl From<PolyFamily> for PolyRepr {
    fn from(p: PolyFamily) -> Self {
        PolyRepr {
            bands: p.bands,
            half_width: p.half_width,
            terms: p.terms,
        }
    }
}

impl PolyFamily {
    pub fn new(bands: usize, half_width: f64, terms: Vec<PolyTerm>) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Input("chart half width must be positive".into()));
        }
        let coeffs = terms
            .iter()
            .map(|t| {
                HermitianMatrix::from_parts(&t.re, &t.im).and_then(|h| {
                    if h.dim() == bands {
                        Ok(h.into_matrix())
                    } else {
                        Err(Error::Input(format!(
                            "coefficient is {0}x{0}, expected {bands}x{bands}",
                            h.dim()
                        )))
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyFamily {
            bands,
            half_width,
            terms,
            coeffs,
        })
    }

    /// Two-band family `sum_k f_k(x) sigma_k` with each `f_k` a list of `(coefficient, powers)`.
    pub fn pauli(half_width: f64, components: [&[(f64, [u32; 3])]; 3]) -> Self {
        let mut terms = Vec::new();
        for (k, comp) in components.iter().enumerate() {
            let m = to_dynamic(&pauli(k + 1));
            for &(a, powers) in comp.iter() {
                terms.push(PolyTerm {
                    powers,
                    re: rows(&m, |z| a * z.re),
                    im: rows(&m, |z| a * z.im),
                });
            }
        }
        PolyFamily::new(2, half_width, terms).expect("Pauli polynomial is Hermitian")
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    fn combine(&self, x: &Point, axis: Option<usize>, order: u32) -> DMatrix<C64> {
        let mut h = DMatrix::zeros(self.bands, self.bands);
        for (t, m) in self.terms.iter().zip(&self.coeffs) {
            let mut f = 1.0;
            for (k, &p) in t.powers.iter().enumerate() {
                let d = if axis == Some(k) { order } else { 0 };
                if d > p {
                    f = 0.0;
                    break;
                }
                let mut fall = 1.0;
                for j in 0..d {
                    fall *= (p - j) as f64;
                }
                f *= fall * x[k].powi((p - d) as i32);
            }
            if f != 0.0 {
                h += m * c(f, 0.0);
            }
        }
        h
    }
}

fn rows(m: &DMatrix<C64>, f: impl Fn(&C64) -> f64) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
        .collect()
}

impl Family for PolyFamily {
    fn bands(&self) -> usize {
        self.bands
    }
    fn domain(&self) -> Domain {
        Domain::cube(self.half_width)
    }
    fn evaluate(&self, x: &Point) -> HermitianMatrix {
        HermitianMatrix::symmetrized(self.combine(x, None, 0))
    }
    fn derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        self.combine(x, Some(axis), 1)
    }
    fn second_derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        self.combine(x, Some(axis), 2)
    }
}
