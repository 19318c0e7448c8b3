//! Interpolation weights `w(s)` for homotopies, with `w(0) = 0` and `w(1) = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ENDPOINT_TOL: f64 = 1e-12;
const CONTINUITY_TOL: f64 = 1e-9;

/// Piecewise polynomial on `[0, 1]`; piece `i` is `sum_k coeffs[i][k] (s - knots[i])^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct Schedule {
    name: Option<String>,
    knots: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScheduleRepr {
    Named(String),
    Piecewise { knots: Vec<f64>, coeffs: Vec<Vec<f64>> },
}

impl TryFrom<ScheduleRepr> for Schedule {
    type Error = Error;
    fn try_from(r: ScheduleRepr) -> Result<Self> {
        match r {
            ScheduleRepr::Named(n) => Schedule::named(&n),
            ScheduleRepr::Piecewise { knots, coeffs } => Schedule::piecewise(knots, coeffs),
        }
    }
}

impl From<Schedule> for ScheduleRepr {
    fn from(s: Schedule) -> Self {
        match s.name {
            Some(n) => ScheduleRepr::Named(n),
            None => ScheduleRepr::Piecewise {
                knots: s.knots,
                coeffs: s.coeffs,
            },
        }
    }
}

impl Schedule {
    pub fn piecewise(knots: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if knots.len() < 2 || coeffs.len() != knots.len() - 1 {
            return Err(Error::Input(
                "schedule needs k+1 knots for k polynomial pieces".into(),
            ));
        }
        if knots[0] != 0.0 || knots[knots.len() - 1] != 1.0 {
            return Err(Error::Input("schedule knots must start at 0 and end at 1".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("schedule knots must be strictly increasing".into()));
        }
        if coeffs.iter().flatten().any(|x| !x.is_finite()) || coeffs.iter().any(Vec::is_empty) {
            return Err(Error::Input("schedule coefficients must be finite and non-empty".into()));
        }
        let s = Schedule {
            name: None,
            knots,
            coeffs,
        };
        let w0 = s.raw(0.0, 0);
        let w1 = s.raw(1.0, 0);
        if w0.abs() > ENDPOINT_TOL || (w1 - 1.0).abs() > ENDPOINT_TOL {
            return Err(Error::Input(format!(
                "schedule must satisfy w(0) = 0 and w(1) = 1, got {w0} and {w1}"
            )));
        }
        for i in 1..s.knots.len() - 1 {
            let t = s.knots[i];
            let left = poly(&s.coeffs[i - 1], t - s.knots[i - 1], 0);
            let right = s.coeffs[i][0];
            if (left - right).abs() > CONTINUITY_TOL {
                return Err(Error::Input(format!("schedule is discontinuous at s = {t}")));
            }
        }
        Ok(s)
    }

    /// Built-in schedules: `linear`, `odd-cubic` and `tangent`.
    pub fn named(name: &str) -> Result<Self> {
        let coeffs = match name {
            "linear" => vec![0.0, 1.0],
            // 1/2 + (13/9)(s - 1/2) - (16/9)(s - 1/2)^3, expanded at s = 0
            "odd-cubic" => vec![0.0, 1.0 / 9.0, 8.0 / 3.0, -16.0 / 9.0],
            "tangent" => vec![0.0, 9.0, -12.0, 4.0],
            _ => return Err(Error::Input(format!("unknown schedule '{name}'"))),
        };
        let mut s = Schedule::piecewise(vec![0.0, 1.0], vec![coeffs])?;
        s.name = Some(name.to_string());
        Ok(s)
    }

    pub fn linear() -> Self {
        Schedule::named("linear").expect("built-in schedule")
    }

    /// `w(s)`, exactly 0 for `s <= 0` and exactly 1 for `s >= 1`.
    pub fn weight(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if s >= 1.0 {
            1.0
        } else {
            self.raw(s, 0)
        }
    }

    /// Derivative `w^(order)(s)`.
    pub fn derivative(&self, s: f64, order: u32) -> f64 {
        self.raw(s.clamp(0.0, 1.0), order)
    }

    fn raw(&self, s: f64, order: u32) -> f64 {
        let i = self
            .knots
            .windows(2)
            .position(|w| s < w[1])
            .unwrap_or(self.coeffs.len() - 1);
        poly(&self.coeffs[i], s - self.knots[i], order)
    }
}

fn poly(coeffs: &[f64], t: f64, order: u32) -> f64 {
    let mut acc = 0.0;
    for (k, &a) in coeffs.iter().enumerate().rev() {
        if (k as u32) < order {
            break;
        }
        let mut f = 1.0;
        for j in 0..order {
            f *= (k as u32 - j) as f64;
        }
        acc = acc * t + a * f;
    }
    acc
}
