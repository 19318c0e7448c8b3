//! Two-parameter Bloch families joined by a schedule: `H(s) = (1 - w) H0 + w H1`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Domain, Family, HoppingSet, Point, Schedule};
use crate::error::{Error, Result};
use crate::hermitian::{c, check_band, HermitianMatrix, C64};

const ENDPOINT_GRID: usize = 64;

/// Homotopy between two gapped 2D Bloch Hamiltonians.
#[derive(Clone, Debug)]
pub struct Homotopy {
    h0: HoppingSet,
    h1: HoppingSet,
    schedule: Schedule,
    band_index: usize,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct HomotopyRepr {
    pub band_index: usize,
    pub schedule: Schedule,
    pub h0: HoppingSet,
    pub h1: HoppingSet,
}

impl Homotopy {
    /// Validates shapes and checks that bands `n`, `n + 1` are gapped at both ends.
    pub fn new(h0: HoppingSet, h1: HoppingSet, schedule: Schedule, band_index: usize) -> Result<Self> {
        Self::with_endpoint_grid(h0, h1, schedule, band_index, ENDPOINT_GRID)
    }

    pub fn with_endpoint_grid(
        h0: HoppingSet,
        h1: HoppingSet,
        schedule: Schedule,
        band_index: usize,
        grid: usize,
    ) -> Result<Self> {
        if h0.dim_k() != 2 || h1.dim_k() != 2 {
            return Err(Error::Input("homotopy endpoints must have dim_k = 2".into()));
        }
        if h0.bands() != h1.bands() {
            return Err(Error::Input(format!(
                "endpoint band counts differ: {} vs {}",
                h0.bands(),
                h1.bands()
            )));
        }
        check_band(band_index, h0.bands())?;
        let h = Homotopy {
            h0,
            h1,
            schedule,
            band_index,
        };
        for (s, set) in [(0.0, &h.h0), (1.0, &h.h1)] {
            check_endpoint(set, s, band_index, grid)?;
        }
        Ok(h)
    }

    pub fn h0(&self) -> &HoppingSet {
        &self.h0
    }

    pub fn h1(&self) -> &HoppingSet {
        &self.h1
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn band_index(&self) -> usize {
        self.band_index
    }

    /// `H(s, xi)` with `s` clamped to `[0, 1]`.
    pub fn at(&self, s: f64, xi: [f64; 2]) -> HermitianMatrix {
        let w = self.schedule.weight(s);
        if w == 0.0 {
            return self.h0.eval(&xi);
        }
        if w == 1.0 {
            return self.h1.eval(&xi);
        }
        let a = self.h0.eval(&xi).into_matrix();
        let b = self.h1.eval(&xi).into_matrix();
        HermitianMatrix::symmetrized(a * c(1.0 - w, 0.0) + b * c(w, 0.0))
    }

    pub(crate) fn to_repr(&self) -> HomotopyRepr {
        HomotopyRepr {
            band_index: self.band_index,
            schedule: self.schedule.clone(),
            h0: self.h0.clone(),
            h1: self.h1.clone(),
        }
    }
}

fn check_endpoint(set: &HoppingSet, s: f64, n: usize, grid: usize) -> Result<()> {
    let nodes = super::Axis::Periodic.nodes(grid);
    for &x1 in &nodes {
        for &x2 in &nodes {
            let h = set.eval(&[x1, x2]);
            let spec = h.eigensystem()?;
            if spec.gap(n) <= h.gap_tolerance() {
                return Err(Error::EndpointGap {
                    s,
                    xi: [x1, x2],
                    lower: spec.values[n - 1],
                    upper: spec.values[n],
                });
            }
        }
    }
    Ok(())
}

impl Family for Homotopy {
    fn bands(&self) -> usize {
        self.h0.bands()
    }

    fn domain(&self) -> Domain {
        Domain::homotopy()
    }

    fn evaluate(&self, x: &Point) -> HermitianMatrix {
        self.at(x[0], [x[1], x[2]])
    }

    fn derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        let xi = [x[1], x[2]];
        if axis == 0 {
            let dw = self.schedule.derivative(x[0], 1);
            return (self.h1.eval(&xi).into_matrix() - self.h0.eval(&xi).into_matrix()) * c(dw, 0.0);
        }
        let w = self.schedule.weight(x[0]);
        self.h0.deriv(&xi, axis - 1, 1) * c(1.0 - w, 0.0) + self.h1.deriv(&xi, axis - 1, 1) * c(w, 0.0)
    }

    fn second_derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        let xi = [x[1], x[2]];
        if axis == 0 {
            let d2w = self.schedule.derivative(x[0], 2);
            return (self.h1.eval(&xi).into_matrix() - self.h0.eval(&xi).into_matrix()) * c(d2w, 0.0);
        }
        let w = self.schedule.weight(x[0]);
        self.h0.deriv(&xi, axis - 1, 2) * c(1.0 - w, 0.0) + self.h1.deriv(&xi, axis - 1, 2) * c(w, 0.0)
    }
}
