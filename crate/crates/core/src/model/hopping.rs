//! Finite-range hopping data and its Bloch transform.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Domain, Family, Point};
use crate::error::{Error, Result};
use crate::hermitian::{c, HermitianMatrix, C64};

const CLOSURE_TOL: f64 = 1e-12;

/// One hopping amplitude `T_r` at lattice displacement `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hopping {
    pub r: Vec<i64>,
    pub matrix: DMatrix<C64>,
}

impl Hopping {
    pub fn new(r: Vec<i64>, matrix: DMatrix<C64>) -> Self {
        Hopping { r, matrix }
    }
}

#[derive(Serialize, Deserialize)]
struct HoppingRepr {
    r: Vec<i64>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for Hopping {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.matrix.nrows();
        let part = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..self.matrix.ncols()).map(|j| f(&self.matrix[(i, j)])).collect())
                .collect()
        };
        HoppingRepr {
            r: self.r.clone(),
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Hopping {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = HoppingRepr::deserialize(d)?;
        let rows = repr.re.len();
        let cols = repr.re.first().map_or(0, Vec::len);
        let shape_ok = repr.im.len() == rows
            && repr.re.iter().all(|r| r.len() == cols)
            && repr.im.iter().all(|r| r.len() == cols);
        if !shape_ok {
            return Err(serde::de::Error::custom(
                "hopping re/im parts must be rectangular and of equal shape",
            ));
        }
        let matrix = DMatrix::from_fn(rows, cols, |i, j| c(repr.re[i][j], repr.im[i][j]));
        Ok(Hopping { r: repr.r, matrix })
    }
}

/// Hopping data closed under Hermitian conjugation, `T_{-r} = T_r*`.
#[derive(Clone, Debug)]
pub struct HoppingSet {
    dim_k: usize,
    bands: usize,
    terms: Vec<Hopping>,
    source: Vec<Hopping>,
    auto_hermitize: bool,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct HoppingSetRepr {
    pub bands: usize,
    pub dim_k: usize,
    #[serde(default)]
    pub auto_hermitize: bool,
    pub terms: Vec<Hopping>,
}

impl HoppingSet {
    /// Validates the terms and closes them under conjugation.
    ///
    /// With `auto_hermitize`, displacements whose partner `-r` is absent get
    /// the partner `T_r*` appended; a present but inconsistent partner is
    /// always an error.
    pub fn new(dim_k: usize, bands: usize, terms: Vec<Hopping>, auto_hermitize: bool) -> Result<Self> {
        if dim_k == 0 || dim_k > 3 {
            return Err(Error::Input(format!("dim_k = {dim_k} must be 1, 2 or 3")));
        }
        if bands < 2 {
            return Err(Error::Input("a model needs at least two bands".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.r.len() != dim_k {
                return Err(Error::Input(format!(
                    "term {i}: displacement has length {}, expected {dim_k}",
                    t.r.len()
                )));
            }
            if t.matrix.nrows() != bands || t.matrix.ncols() != bands {
                return Err(Error::Input(format!(
                    "term {i}: matrix is {}x{}, expected {bands}x{bands}",
                    t.matrix.nrows(),
                    t.matrix.ncols()
                )));
            }
            if t.matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Input(format!("term {i}: non-finite entry")));
            }
        }

        let mut by_r: BTreeMap<Vec<i64>, (usize, DMatrix<C64>)> = BTreeMap::new();
        for (i, t) in terms.iter().enumerate() {
            let entry = by_r
                .entry(t.r.clone())
                .or_insert_with(|| (i, DMatrix::zeros(bands, bands)));
            entry.1 += &t.matrix;
        }

        let mut closed = terms.clone();
        for (r, (first, sum)) in &by_r {
            let neg: Vec<i64> = r.iter().map(|x| -x).collect();
            match by_r.get(&neg) {
                Some((_, partner)) => {
                    let dev = (partner - sum.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
                    let scale = sum.iter().fold(1.0f64, |a, z| a.max(z.norm()));
                    if dev > CLOSURE_TOL * scale {
                        return Err(Error::Hermiticity {
                            term: *first,
                            detail: format!(
                                "sum of T at r={r:?} differs from the adjoint of T at -r by {dev:.3e}"
                            ),
                        });
                    }
                }
                None if auto_hermitize => {
                    for t in terms.iter().filter(|t| &t.r == r) {
                        closed.push(Hopping::new(neg.clone(), t.matrix.adjoint()));
                    }
                }
                None => {
                    return Err(Error::Hermiticity {
                        term: *first,
                        detail: format!("missing partner at r={neg:?}"),
                    });
                }
            }
        }

        Ok(HoppingSet {
            dim_k,
            bands,
            terms: closed,
            source: terms,
            auto_hermitize,
        })
    }

    pub fn dim_k(&self) -> usize {
        self.dim_k
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    /// Terms after Hermitian closure.
    pub fn terms(&self) -> &[Hopping] {
        &self.terms
    }

    /// Terms as supplied, before closure.
    pub fn source_terms(&self) -> &[Hopping] {
        &self.source
    }

    /// Largest `|r_axis|` over all terms.
    pub fn reach(&self, axis: usize) -> i64 {
        self.terms.iter().map(|t| t.r[axis].abs()).max().unwrap_or(0)
    }

    /// `H(xi) = sum_r T_r exp(i <xi, r>)`.
    pub fn evaluate(&self, xi: &[f64]) -> Result<HermitianMatrix> {
        if xi.len() != self.dim_k {
            return Err(Error::Input(format!(
                "momentum has {} components, model has dim_k = {}",
                xi.len(),
                self.dim_k
            )));
        }
        if xi.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("non-finite momentum".into()));
        }
        Ok(self.eval(xi))
    }

    pub(crate) fn eval(&self, xi: &[f64]) -> HermitianMatrix {
        HermitianMatrix::symmetrized(self.weighted(xi, |_| c(1.0, 0.0)))
    }

    /// Partial derivative of order 1 or 2 along momentum `axis`.
    pub fn derivative(&self, xi: &[f64], axis: usize, order: u32) -> Result<HermitianMatrix> {
        if axis >= self.dim_k || !(1..=2).contains(&order) {
            return Err(Error::Input(format!(
                "derivative along axis {axis} of order {order} is not defined"
            )));
        }
        if xi.len() != self.dim_k {
            return Err(Error::Input("momentum dimension mismatch".into()));
        }
        Ok(HermitianMatrix::symmetrized(self.deriv(xi, axis, order)))
    }

    pub(crate) fn deriv(&self, xi: &[f64], axis: usize, order: u32) -> DMatrix<C64> {
        self.weighted(xi, |r| c(0.0, r[axis] as f64).powu(order))
    }

    fn weighted(&self, xi: &[f64], weight: impl Fn(&[i64]) -> C64) -> DMatrix<C64> {
        let mut h = DMatrix::zeros(self.bands, self.bands);
        for t in &self.terms {
            let phase: f64 = t.r.iter().zip(xi).map(|(&r, &x)| r as f64 * x).sum();
            let w = weight(&t.r) * C64::from_polar(1.0, phase);
            if w != c(0.0, 0.0) {
                h += &t.matrix * w;
            }
        }
        h
    }

    /// `self` plus `other` as a single hopping set (same shape).
    pub fn direct_sum(&self, other: &HoppingSet) -> Result<HoppingSet> {
        if self.dim_k != other.dim_k {
            return Err(Error::Input("direct sum needs equal dim_k".into()));
        }
        let n = self.bands + other.bands;
        let embed = |t: &Hopping, offset: usize| {
            let mut m = DMatrix::zeros(n, n);
            m.view_mut((offset, offset), (t.matrix.nrows(), t.matrix.ncols()))
                .copy_from(&t.matrix);
            Hopping::new(t.r.clone(), m)
        };
        let terms = self
            .source
            .iter()
            .map(|t| embed(t, 0))
            .chain(other.source.iter().map(|t| embed(t, self.bands)))
            .collect();
        HoppingSet::new(self.dim_k, n, terms, self.auto_hermitize || other.auto_hermitize)
    }

    pub(crate) fn to_repr(&self) -> HoppingSetRepr {
        HoppingSetRepr {
            bands: self.bands,
            dim_k: self.dim_k,
            auto_hermitize: self.auto_hermitize,
            terms: self.source.clone(),
        }
    }

    pub(crate) fn from_repr(repr: HoppingSetRepr) -> Result<Self> {
        HoppingSet::new(repr.dim_k, repr.bands, repr.terms, repr.auto_hermitize)
    }
}

impl Serialize for HoppingSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_repr().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HoppingSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        HoppingSet::from_repr(HoppingSetRepr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// A hopping set with `dim_k = 3`, viewed as a family on the 3-torus.
#[derive(Clone, Debug)]
pub struct TorusFamily(HoppingSet);

impl TorusFamily {
    pub fn new(set: HoppingSet) -> Result<Self> {
        if set.dim_k() != 3 {
            return Err(Error::Input("a torus family needs dim_k = 3".into()));
        }
        Ok(TorusFamily(set))
    }

    pub fn hoppings(&self) -> &HoppingSet {
        &self.0
    }
}

impl Family for TorusFamily {
    fn bands(&self) -> usize {
        self.0.bands
    }
    fn domain(&self) -> Domain {
        Domain::torus()
    }
    fn evaluate(&self, x: &Point) -> HermitianMatrix {
        self.0.eval(x)
    }
    fn derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        self.0.deriv(x, axis, 1)
    }
    fn second_derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        self.0.deriv(x, axis, 2)
    }
}
