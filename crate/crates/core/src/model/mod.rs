//! Parametrized Hermitian families over three-dimensional parameter spaces.
//!
//! Every family is evaluated on a point of `Domain`, whose axes are either
//! periodic (Brillouin-zone angles) or closed intervals (homotopy parameter,
//! local charts). The coordinate order for homotopies is `(s, xi1, xi2)`.

mod builtin;
mod chart;
mod file;
mod homotopy;
mod hopping;
mod schedule;
mod transform;

pub use builtin::{builtin, builtin_names, qwz, qwz_homotopy};
pub use chart::{PolyFamily, PolyTerm};
pub use file::Model;
pub use homotopy::Homotopy;
pub use hopping::{Hopping, HoppingSet, TorusFamily};
pub use schedule::Schedule;
pub use transform::Shifted;

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::hermitian::{HermitianMatrix, C64};

pub type Point = [f64; 3];

/// One coordinate axis of a parameter space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Axis {
    /// Angle identified modulo `2 pi`.
    Periodic,
    /// Closed interval `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
}

impl Axis {
    pub fn length(&self) -> f64 {
        match *self {
            Axis::Periodic => TAU,
            Axis::Interval { lo, hi } => hi - lo,
        }
    }

    pub fn normalize(&self, x: f64) -> f64 {
        match *self {
            Axis::Periodic => {
                let r = x.rem_euclid(TAU);
                if r >= TAU {
                    0.0
                } else {
                    r
                }
            }
            Axis::Interval { lo, hi } => x.clamp(lo, hi),
        }
    }

    /// Signed displacement from `a` to `b`, using the shortest image on a circle.
    pub fn delta(&self, a: f64, b: f64) -> f64 {
        let d = b - a;
        match self {
            Axis::Periodic => d - TAU * (d / TAU).round(),
            Axis::Interval { .. } => d,
        }
    }

    /// Grid nodes: periodic axes omit the endpoint `2 pi`, intervals include both ends.
    pub fn nodes(&self, count: usize) -> Vec<f64> {
        match *self {
            Axis::Periodic => (0..count).map(|k| TAU * k as f64 / count as f64).collect(),
            Axis::Interval { lo, hi } => {
                if count == 1 {
                    return vec![0.5 * (lo + hi)];
                }
                (0..count)
                    .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
                    .collect()
            }
        }
    }
}

/// Product of three axes with their display names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub axes: [Axis; 3],
    pub names: [String; 3],
}

impl Domain {
    pub fn homotopy() -> Self {
        Domain {
            axes: [
                Axis::Interval { lo: 0.0, hi: 1.0 },
                Axis::Periodic,
                Axis::Periodic,
            ],
            names: ["s".into(), "xi1".into(), "xi2".into()],
        }
    }

    pub fn torus() -> Self {
        Domain {
            axes: [Axis::Periodic; 3],
            names: ["xi1".into(), "xi2".into(), "xi3".into()],
        }
    }

    pub fn cube(half_width: f64) -> Self {
        let ax = Axis::Interval {
            lo: -half_width,
            hi: half_width,
        };
        Domain {
            axes: [ax; 3],
            names: ["x1".into(), "x2".into(), "x3".into()],
        }
    }

    pub fn normalize(&self, p: Point) -> Point {
        [
            self.axes[0].normalize(p[0]),
            self.axes[1].normalize(p[1]),
            self.axes[2].normalize(p[2]),
        ]
    }

    pub fn displacement(&self, a: &Point, b: &Point) -> [f64; 3] {
        [
            self.axes[0].delta(a[0], b[0]),
            self.axes[1].delta(a[1], b[1]),
            self.axes[2].delta(a[2], b[2]),
        ]
    }

    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        let d = self.displacement(a, b);
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.axes.iter().zip(p).all(|(ax, &x)| match *ax {
            Axis::Periodic => x.is_finite(),
            Axis::Interval { lo, hi } => (lo..=hi).contains(&x),
        })
    }
}

/// A normalized point of a parameter domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    pub coords: Point,
}

impl ParameterPoint {
    pub fn new(domain: &Domain, coords: Point) -> Self {
        ParameterPoint {
            coords: domain.normalize(coords),
        }
    }

    /// Homotopy point `(s, xi1, xi2)`: `s` clamped, angles reduced.
    pub fn homotopy(s: f64, xi1: f64, xi2: f64) -> Self {
        Self::new(&Domain::homotopy(), [s, xi1, xi2])
    }
}

/// Smooth Hermitian-valued map on a three-dimensional domain.
pub trait Family: Send + Sync {
    fn bands(&self) -> usize;

    fn domain(&self) -> Domain;

    fn evaluate(&self, x: &Point) -> HermitianMatrix;

    /// First partial derivative along `axis`.
    fn derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        central_difference(self, x, axis, 1e-5)
    }

    /// Second partial derivative along `axis`.
    fn second_derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        let h = 1e-4;
        let mut xp = *x;
        let mut xm = *x;
        xp[axis] += h;
        xm[axis] -= h;
        let f0 = self.evaluate(x).into_matrix();
        (self.evaluate(&xp).into_matrix() + self.evaluate(&xm).into_matrix() - f0 * C64::new(2.0, 0.0))
            / C64::new(h * h, 0.0)
    }
}

/// Central difference of `family` along `axis` with step `h`.
pub fn central_difference<F: Family + ?Sized>(
    family: &F,
    x: &Point,
    axis: usize,
    h: f64,
) -> DMatrix<C64> {
    let mut xp = *x;
    let mut xm = *x;
    xp[axis] += h;
    xm[axis] -= h;
    (family.evaluate(&xp).into_matrix() - family.evaluate(&xm).into_matrix())
        / C64::new(2.0 * h, 0.0)
}

impl<F: Family + ?Sized> Family for std::sync::Arc<F> {
    fn bands(&self) -> usize {
        (**self).bands()
    }
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn evaluate(&self, x: &Point) -> HermitianMatrix {
        (**self).evaluate(x)
    }
    fn derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        (**self).derivative(x, axis)
    }
    fn second_derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        (**self).second_derivative(x, axis)
    }
}

impl<F: Family + ?Sized> Family for &F {
    fn bands(&self) -> usize {
        (**self).bands()
    }
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn evaluate(&self, x: &Point) -> HermitianMatrix {
        (**self).evaluate(x)
    }
    fn derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        (**self).derivative(x, axis)
    }
    fn second_derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        (**self).second_derivative(x, axis)
    }
}
