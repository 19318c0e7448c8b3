//! Small perturbations that make every crossing of a family conical.
//!
//! Three engines: a random Hermitian constant shift that splits crossings of
//! higher multiplicity, a random Pauli shift for two-band families, and a
//! bump-localized correction written in a transported pair frame.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cone::ComplexMatrixJson;
use crate::error::{Error, Result};
use crate::hermitian::{c, lowdin_orthonormalize, pauli_vector, to_dynamic, HermitianMatrix, C64, ISOLATION_TOL};
use crate::model::{Axis, Domain, Family, Point, Shifted};
use crate::scan::{scan, witness_f, DegeneracyPoint, Multiplicity, ScanConfig, Verdict};

/// Upper bound on random draws per perturbation request.
pub const MAX_DRAWS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    HermitianShift,
    PauliShift,
    FramedBump,
}

/// Crossing counts of one scan.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub count: usize,
    pub conical: usize,
    pub non_conical: usize,
    pub indeterminate: usize,
    pub higher: usize,
    pub locations: Vec<Point>,
}

impl ScanSummary {
    pub fn of(points: &[DegeneracyPoint]) -> Self {
        let count_of = |v: Verdict| points.iter().filter(|p| p.verdict == v).count();
        ScanSummary {
            count: points.len(),
            conical: count_of(Verdict::Conical),
            non_conical: count_of(Verdict::NonConical),
            indeterminate: count_of(Verdict::Indeterminate),
            higher: points
                .iter()
                .filter(|p| p.multiplicity == Multiplicity::Higher)
                .count(),
            locations: points.iter().map(|p| p.location).collect(),
        }
    }

    pub fn all_conical(&self) -> bool {
        self.conical == self.count
    }
}

/// Ball in parameter space on which a bump is supported.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub center: Point,
    pub radius: f64,
}

/// Outcome of a perturbation request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationResult {
    pub kind: PerturbationKind,
    pub seed: u64,
    pub eps: f64,
    pub draws: usize,
    /// Largest Frobenius norm of the added term over the domain.
    pub norm: f64,
    /// Constant shift matrix, for shift engines.
    pub matrix: Option<ComplexMatrixJson>,
    /// Pauli vector of the shift or of the bump amplitude.
    pub vector: Option<[f64; 3]>,
    pub chart: Option<Chart>,
    pub before: ScanSummary,
    pub after: ScanSummary,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample of the `dim`-ball of radius `r`.
fn ball_sample(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            let u: f64 = rng.random();
            let rad = r * u.powf(1.0 / dim as f64);
            return v.into_iter().map(|x| x * rad / norm).collect();
        }
    }
}

/// GUE direction scaled to a uniform radius in the Frobenius `eps`-ball.
fn gue_shift(rng: &mut ChaCha8Rng, n: usize, eps: f64) -> HermitianMatrix {
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = c(rng.sample(StandardNormal), 0.0);
        for j in i + 1..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = c(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    let u: f64 = rng.random();
    let radius = eps * u.powf(1.0 / (n * n) as f64);
    let norm = m.norm();
    HermitianMatrix::new(m * c(radius / norm, 0.0)).expect("GUE sample is Hermitian")
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Input(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

/// Constant Hermitian shift, `||B|| <= eps`, removing crossings of higher multiplicity.
pub fn remove_high_multiplicity(
    family: Arc<dyn Family>,
    n: usize,
    eps: f64,
    seed: u64,
    cfg: &ScanConfig,
) -> Result<(PerturbationResult, Shifted)> {
    check_eps(eps)?;
    let before = ScanSummary::of(&scan(&family, n, cfg)?);
    let mut r = rng(seed);
    for draw in 1..=MAX_DRAWS {
        let shift = gue_shift(&mut r, family.bands(), eps);
        let shifted = Shifted::new(family.clone(), shift.clone())?;
        let points = match scan(&shifted, n, cfg) {
            Ok(p) => p,
            Err(Error::RefinementStall { .. }) => continue,
            Err(e) => return Err(e),
        };
        let after = ScanSummary::of(&points);
        if after.higher == 0 {
            let result = PerturbationResult {
                kind: PerturbationKind::HermitianShift,
                seed,
                eps,
                draws: draw,
                norm: shift.norm(),
                matrix: Some(ComplexMatrixJson::from(shift.matrix())),
                vector: None,
                chart: None,
                before,
                after,
            };
            return Ok((result, shifted));
        }
    }
    Err(Error::ExhaustedDraws { draws: MAX_DRAWS })
}

/// Constant Pauli shift `b . sigma` of a two-band family until every crossing is conical.
///
/// `b` is uniform in the ball of radius `eps / sqrt 2`, so `||b . sigma|| <= eps`.
pub fn sard_shift_2x2(
    family: Arc<dyn Family>,
    n: usize,
    eps: f64,
    seed: u64,
    cfg: &ScanConfig,
) -> Result<(PerturbationResult, Shifted)> {
    check_eps(eps)?;
    if family.bands() != 2 {
        return Err(Error::Input(format!(
            "Pauli shift needs a two-band family, got {} bands",
            family.bands()
        )));
    }
    let before = ScanSummary::of(&scan(&family, n, cfg)?);
    let mut r = rng(seed);
    for draw in 1..=MAX_DRAWS {
        let v = ball_sample(&mut r, 3, eps * std::f64::consts::FRAC_1_SQRT_2);
        let b = [v[0], v[1], v[2]];
        let shift = HermitianMatrix::from_pauli(b);
        let shifted = Shifted::new(family.clone(), shift.clone())?;
        let points = match scan(&shifted, n, cfg) {
            Ok(p) => p,
            Err(Error::RefinementStall { .. }) => continue,
            Err(e) => return Err(e),
        };
        let after = ScanSummary::of(&points);
        if after.all_conical() {
            let result = PerturbationResult {
                kind: PerturbationKind::PauliShift,
                seed,
                eps,
                draws: draw,
                norm: shift.norm(),
                matrix: Some(ComplexMatrixJson::from(shift.matrix())),
                vector: Some(b),
                chart: None,
                before,
                after,
            };
            return Ok((result, shifted));
        }
    }
    Err(Error::ExhaustedDraws { draws: MAX_DRAWS })
}

/// `1` on `[0, 1/2]`, `0` on `[1, inf)`, quintic smoothstep in between (C^2).
pub fn bump_profile(t: f64) -> f64 {
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let u = 2.0 * t - 1.0;
        1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// `H(x) - chi(|x - c| / r)^2 F(x) (b . sigma) F(x)*` with `F` the pair frame
/// transported along rays from the chart center.
#[derive(Clone)]
pub struct Bumped {
    base: Arc<dyn Family>,
    band: usize,
    chart: Chart,
    b: [f64; 3],
    frame0: DMatrix<C64>,
    steps: usize,
}

const TRANSPORT_STEPS: usize = 12;

impl Bumped {
    pub fn new(base: Arc<dyn Family>, band: usize, chart: Chart, b: [f64; 3]) -> Result<Self> {
        let spec = base.evaluate(&chart.center).eigensystem()?;
        let frame0 = lowdin_orthonormalize(&spec.columns(band - 1, band + 1))?;
        Ok(Bumped {
            base,
            band,
            chart,
            b,
            frame0,
            steps: TRANSPORT_STEPS,
        })
    }

    /// Pair frame at `x`, transported from the center along the straight segment.
    pub fn frame_at(&self, x: &Point) -> Result<DMatrix<C64>> {
        let domain = self.base.domain();
        let d = domain.displacement(&self.chart.center, x);
        let mut f = self.frame0.clone();
        for k in 1..=self.steps {
            let t = k as f64 / self.steps as f64;
            let y = [0, 1, 2].map(|j| self.chart.center[j] + t * d[j]);
            let spec = self.base.evaluate(&y).eigensystem()?;
            let w = spec.columns(self.band - 1, self.band + 1);
            let p = &w * w.adjoint();
            f = lowdin_orthonormalize(&(p * f))?;
        }
        Ok(f)
    }

    fn weight(&self, x: &Point) -> f64 {
        let r = self.base.domain().distance(&self.chart.center, x);
        bump_profile(r / self.chart.radius).powi(2)
    }

    /// The added term at `x`.
    pub fn correction(&self, x: &Point) -> DMatrix<C64> {
        let w = self.weight(x);
        let n = self.base.bands();
        if w == 0.0 {
            return DMatrix::zeros(n, n);
        }
        let f = self.frame_at(x).expect("pair stays isolated on the chart");
        &f * to_dynamic(&pauli_vector(self.b)) * f.adjoint() * c(-w, 0.0)
    }
}

impl Family for Bumped {
    fn bands(&self) -> usize {
        self.base.bands()
    }
    fn domain(&self) -> Domain {
        self.base.domain()
    }
    fn evaluate(&self, x: &Point) -> HermitianMatrix {
        let h = self.base.evaluate(x);
        if self.weight(x) == 0.0 {
            return h;
        }
        HermitianMatrix::symmetrized(h.into_matrix() + self.correction(x))
    }
    fn derivative(&self, x: &Point, axis: usize) -> DMatrix<C64> {
        let step = 1e-5;
        let r = self.base.domain().distance(&self.chart.center, x);
        if r > self.chart.radius + 2.0 * step {
            return self.base.derivative(x, axis);
        }
        crate::model::central_difference(self, x, axis, step)
    }
}

/// Smallest separation of the pair from the other bands over a grid of the chart ball.
fn chart_isolation<F: Family + ?Sized>(family: &F, n: usize, chart: &Chart) -> Result<f64> {
    let m = 9;
    let mut min = f64::INFINITY;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let u = [i, j, k].map(|a| -1.0 + 2.0 * a as f64 / (m - 1) as f64);
                if u.iter().map(|x| x * x).sum::<f64>() > 1.0 {
                    continue;
                }
                let x = [0, 1, 2].map(|a| chart.center[a] + chart.radius * u[a]);
                let spec = family.evaluate(&x).eigensystem()?;
                min = min.min(spec.isolation(n));
            }
        }
    }
    Ok(min)
}

fn chart_region(domain: &Domain, chart: &Chart) -> Result<[[f64; 2]; 3]> {
    let mut region = [[0.0; 2]; 3];
    for k in 0..3 {
        let (lo, hi) = (chart.center[k] - chart.radius, chart.center[k] + chart.radius);
        if let Axis::Interval { lo: a, hi: b } = domain.axes[k] {
            if lo <= a || hi >= b {
                return Err(Error::Input(format!(
                    "chart ball leaves the interior of axis {} ([{a}, {b}])",
                    domain.names[k]
                )));
            }
        }
        region[k] = [lo, hi];
    }
    Ok(region)
}

/// Bump-localized correction `-chi^2 F (b . sigma) F*` on a chart ball.
///
/// The chart must lie in the interior of interval axes, so the family is
/// unchanged near the endpoint slices. Success is judged by rescanning the
/// chart box.
pub fn framed_bump_perturbation(
    family: Arc<dyn Family>,
    n: usize,
    chart: Chart,
    eps: f64,
    seed: u64,
    cfg: &ScanConfig,
) -> Result<(PerturbationResult, Bumped)> {
    check_eps(eps)?;
    crate::hermitian::check_band(n, family.bands())?;
    if !(chart.radius > 0.0) {
        return Err(Error::Input("chart radius must be positive".into()));
    }
    let region = chart_region(&family.domain(), &chart)?;
    let iso = chart_isolation(&family, n, &chart)?;
    if iso < ISOLATION_TOL {
        return Err(Error::Frame(format!(
            "pair ({n}, {}) meets another band on the chart (separation {iso:.3e})",
            n + 1
        )));
    }
    if eps >= 0.5 * iso {
        return Err(Error::Frame(format!(
            "eps = {eps} is not small against the pair isolation {iso:.3e}"
        )));
    }
    let local = cfg.clone().with_region(region);
    let before = ScanSummary::of(&scan(&family, n, &local)?);
    let mut r = rng(seed);
    for draw in 1..=MAX_DRAWS {
        let v = ball_sample(&mut r, 3, eps * std::f64::consts::FRAC_1_SQRT_2);
        let b = [v[0], v[1], v[2]];
        let bumped = Bumped::new(family.clone(), n, chart, b)?;
        let points = match scan(&bumped, n, &local) {
            Ok(p) => p,
            Err(Error::RefinementStall { .. }) => continue,
            Err(e) => return Err(e),
        };
        let after = ScanSummary::of(&points);
        if after.all_conical() {
            let norm = std::f64::consts::SQRT_2 * b.iter().map(|x| x * x).sum::<f64>().sqrt();
            let result = PerturbationResult {
                kind: PerturbationKind::FramedBump,
                seed,
                eps,
                draws: draw,
                norm,
                matrix: None,
                vector: Some(b),
                chart: Some(chart),
                before,
                after,
            };
            return Ok((result, bumped));
        }
    }
    Err(Error::ExhaustedDraws { draws: MAX_DRAWS })
}

/// Result of a global conicality check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicalityReport {
    pub all_conical: bool,
    pub summary: ScanSummary,
    /// Smallest value of the witness `det(Hess D)^2 + D` over the sampled points.
    pub witness_min: f64,
    pub witness_samples: usize,
}

/// Scans, classifies and samples the witness function on a coarse grid plus
/// every located crossing.
pub fn verify_all_conical<F: Family + ?Sized>(family: &F, n: usize, cfg: &ScanConfig) -> Result<ConicalityReport> {
    let points = scan(family, n, cfg)?;
    let summary = ScanSummary::of(&points);
    let domain = family.domain();
    let axes: Vec<Vec<f64>> = (0..3)
        .map(|k| match cfg.region {
            Some(r) => Axis::Interval {
                lo: r[k][0],
                hi: r[k][1],
            }
            .nodes(6),
            None => domain.axes[k].nodes(6),
        })
        .collect();
    let mut samples: Vec<Point> = Vec::new();
    for &a in &axes[0] {
        for &b in &axes[1] {
            for &c in &axes[2] {
                samples.push([a, b, c]);
            }
        }
    }
    samples.extend(points.iter().map(|p| p.location));
    use rayon::prelude::*;
    let values: Vec<f64> = samples
        .par_iter()
        .map(|x| witness_f(family, x, cfg.fd_step))
        .collect();
    let witness_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ConicalityReport {
        all_conical: summary.all_conical(),
        summary,
        witness_min,
        witness_samples: samples.len(),
    })
}
