//! Named reference models.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::{Hopping, HoppingSet, Homotopy, Model, PolyFamily, Schedule, TorusFamily};
use crate::error::{Error, Result};
use crate::hermitian::{c, pauli, to_dynamic, C64};

const BUILTINS: &[(&str, &str)] = &[
    ("constant-gapped", "s-independent sigma_3; no crossings"),
    ("qwz-3-1", "QWZ mass 3 -> 1, linear schedule; one cone at (0.5, pi, pi)"),
    ("qwz-3-m3", "QWZ mass 3 -> -3, odd cubic schedule; cones at s = 0.25, 0.5, 0.75"),
    ("qwz-tangent", "QWZ mass 3 -> 2 -> 2.5; quadratic tangency at (0.5, pi, pi)"),
    ("qwz-triple", "QWZ 3 -> 1 plus a flat band at 0; triple point at (0.5, pi, pi)"),
    ("qwz-stacked", "flat band at -8 coupled to QWZ 3 -> 1; middle pair n = 2"),
    ("qwz-tangent-stacked", "flat band at -8 plus the tangent QWZ homotopy; n = 2"),
    ("torus-weyl", "two-band model on the 3-torus with two Weyl points"),
    ("chart-weyl", "x . sigma on [-1, 1]^3"),
    ("chart-mirror", "(x1, x2, -x3) . sigma"),
    ("chart-quadratic", "(x1, x2, x3^2) . sigma; non-conical crossing"),
    ("chart-cubic", "(x1, x2, x3^3) . sigma; non-conical crossing"),
    ("chart-line", "(x2, x3, 0) . sigma; crossings along a line"),
];

/// Names and one-line descriptions of all built-in models.
pub fn builtin_names() -> Vec<(&'static str, &'static str)> {
    BUILTINS.to_vec()
}

fn m2(k: usize) -> DMatrix<C64> {
    to_dynamic(&pauli(k))
}

/// QWZ Bloch Hamiltonian `(sin xi1, sin xi2, m + cos xi1 + cos xi2) . sigma`.
pub fn qwz(m: f64) -> HoppingSet {
    let i = c(0.0, 1.0);
    let half = c(0.5, 0.0);
    let terms = vec![
        Hopping::new(vec![0, 0], m2(3) * c(m, 0.0)),
        Hopping::new(vec![1, 0], (m2(3) - m2(1) * i) * half),
        Hopping::new(vec![0, 1], (m2(3) - m2(2) * i) * half),
    ];
    HoppingSet::new(2, 2, terms, true).expect("QWZ hoppings are consistent")
}

/// QWZ homotopy between masses `m0` and `m1` under a named schedule.
pub fn qwz_homotopy(m0: f64, m1: f64, schedule: &str) -> Result<Homotopy> {
    Homotopy::new(qwz(m0), qwz(m1), Schedule::named(schedule)?, 1)
}

/// Flat band at `energy` stacked with QWZ(m), optionally coupled along `e1`.
///
/// With `below` the flat orbital is index 0, otherwise index 2.
fn stacked(m: f64, energy: f64, coupling: f64, below: bool) -> Result<HoppingSet> {
    let (flat, off) = if below { (0, 1) } else { (2, 0) };
    let embed = |t: &Hopping| {
        let mut big = DMatrix::zeros(3, 3);
        big.view_mut((off, off), (2, 2)).copy_from(&t.matrix);
        Hopping::new(t.r.clone(), big)
    };
    let mut terms: Vec<Hopping> = qwz(m).source_terms().iter().map(embed).collect();
    let mut onsite = DMatrix::zeros(3, 3);
    onsite[(flat, flat)] = c(energy, 0.0);
    terms.push(Hopping::new(vec![0, 0], onsite));
    if coupling != 0.0 {
        let mut t = DMatrix::zeros(3, 3);
        t[(flat, off)] = c(coupling, 0.0);
        terms.push(Hopping::new(vec![1, 0], t));
    }
    HoppingSet::new(2, 3, terms, true)
}

fn torus_weyl() -> HoppingSet {
    let i = c(0.0, 1.0);
    let half = c(0.5, 0.0);
    let terms = vec![
        Hopping::new(vec![0, 0, 0], m2(3) * c(2.0, 0.0)),
        Hopping::new(vec![1, 0, 0], (m2(3) - m2(1) * i) * half),
        Hopping::new(vec![0, 1, 0], (m2(3) - m2(2) * i) * half),
        Hopping::new(vec![0, 0, 1], m2(3) * half),
    ];
    HoppingSet::new(3, 2, terms, true).expect("torus hoppings are consistent")
}

/// Looks up a built-in model by name.
pub fn builtin(name: &str) -> Result<Model> {
    let hom = |h: Homotopy| Ok(Model::Homotopy(Arc::new(h)));
    let chart = |f: PolyFamily| {
        Ok(Model::Chart {
            family: Arc::new(f),
            band_index: 1,
        })
    };
    const X1: [u32; 3] = [1, 0, 0];
    const X2: [u32; 3] = [0, 1, 0];
    const X3: [u32; 3] = [0, 0, 1];
    match name {
        "constant-gapped" => {
            let set = HoppingSet::new(2, 2, vec![Hopping::new(vec![0, 0], m2(3))], true)?;
            hom(Homotopy::new(set.clone(), set, Schedule::linear(), 1)?)
        }
        "qwz-3-1" => hom(qwz_homotopy(3.0, 1.0, "linear")?),
        "qwz-3-m3" => hom(qwz_homotopy(3.0, -3.0, "odd-cubic")?),
        "qwz-tangent" => hom(qwz_homotopy(3.0, 2.5, "tangent")?),
        "qwz-triple" => hom(Homotopy::new(
            stacked(3.0, 0.0, 0.0, false)?,
            stacked(1.0, 0.0, 0.0, false)?,
            Schedule::linear(),
            1,
        )?),
        "qwz-stacked" => hom(Homotopy::new(
            stacked(3.0, -8.0, 0.3, true)?,
            stacked(1.0, -8.0, 0.3, true)?,
            Schedule::linear(),
            2,
        )?),
        "qwz-tangent-stacked" => hom(Homotopy::new(
            stacked(3.0, -8.0, 0.0, true)?,
            stacked(2.5, -8.0, 0.0, true)?,
            Schedule::named("tangent")?,
            2,
        )?),
        "torus-weyl" => Ok(Model::Torus {
            family: Arc::new(TorusFamily::new(torus_weyl())?),
            band_index: 1,
        }),
        "chart-weyl" => chart(PolyFamily::pauli(1.0, [&[(1.0, X1)], &[(1.0, X2)], &[(1.0, X3)]])),
        "chart-mirror" => chart(PolyFamily::pauli(1.0, [&[(1.0, X1)], &[(1.0, X2)], &[(-1.0, X3)]])),
        "chart-quadratic" => chart(PolyFamily::pauli(
            1.0,
            [&[(1.0, X1)], &[(1.0, X2)], &[(1.0, [0, 0, 2])]],
        )),
        "chart-cubic" => chart(PolyFamily::pauli(
            1.0,
            [&[(1.0, X1)], &[(1.0, X2)], &[(1.0, [0, 0, 3])]],
        )),
        "chart-line" => chart(PolyFamily::pauli(1.0, [&[(1.0, X2)], &[(1.0, X3)], &[]])),
        _ => Err(Error::Input(format!("unknown built-in model '{name}'"))),
    }
}
