//! Families derived from another family by a constant Hermitian shift.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::{Domain, Family, Point};
use crate::error::{Error, Result};
use crate::hermitian::{HermitianMatrix, C64};

/// `x -> H(x) + B` for a fixed Hermitian `B`.
#[derive(Clone)]
pub struct Shifted {
    base: Arc<dyn Family>,
    shift: HermitianMatrix,
}

impl Shifted {
    pub fn new(base: Arc<dyn Family>, shift: HermitianMatrix) -> Result<Self> {
        if shift.dim() != base.bands() {
            return Err(Error::Input(format!(
                "shift is {0}x{0}, family has {1} bands",
                shift.dim(),
                base.bands()
            )));
        }
        Ok(Shifted { base, shift })
    }

    pub fn shift(&self) -> &HermitianMatrix {
        &self.shift
    }
}

impl Family for Shifted {
    fn bands(&self) -> usize {
        self.base.bands()
    }
    fn domain(&self) -> Domain {
        self.base.domain()
    }
    fn evaluate(&self, x: &Point) -> HermitianMatrix {
        self.base.evaluate(x).add(&self.shift)
    }
    fn derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        self.base.derivative(x, axis)
    }
    fn second_derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        self.base.second_derivative(x, axis)
    }
}
