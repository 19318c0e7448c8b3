//! Crossing search for one band pair: coarse grid, Newton refinement on the
//! pair function `q`, clustering and Hessian classification.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{check_band, discriminant_of, Spectrum, ISOLATION_TOL};
use crate::model::{Axis, Domain, Family, Point};

/// Tunables of the crossing search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Coarse grid counts per axis.
    pub grid: [usize; 3],
    /// Refinement stops once the pair gap drops below this value.
    pub refine_tol: f64,
    /// Relative determinant threshold separating conical from non-conical.
    pub hess_tol: f64,
    /// Step of the finite-difference Hessian used for classification.
    pub fd_step: f64,
    /// Refined points closer than this are merged.
    pub cluster_radius: f64,
    pub max_iter: usize,
    /// Seeds are kept when the gap is below `seed_factor * diam * Lipschitz`.
    pub seed_factor: f64,
    /// Optional box `[lo, hi]` per axis replacing the family domain.
    pub region: Option<[[f64; 2]; 3]>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            grid: [17, 24, 24],
            refine_tol: 1e-9,
            hess_tol: 1e-6,
            fd_step: 1e-4,
            cluster_radius: 1e-3,
            max_iter: 100,
            seed_factor: 4.0,
            region: None,
        }
    }
}

impl ScanConfig {
    pub fn with_grid(mut self, grid: [usize; 3]) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_region(mut self, region: [[f64; 2]; 3]) -> Self {
        self.region = Some(region);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.iter().any(|&g| g < 3) {
            return Err(Error::Input("scan grid needs at least 3 points per axis".into()));
        }
        let positive = [self.refine_tol, self.hess_tol, self.fd_step, self.seed_factor];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) || self.cluster_radius < 0.0 {
            return Err(Error::Input("scan tolerances must be positive".into()));
        }
        if let Some(r) = self.region {
            if r.iter().any(|[lo, hi]| !(lo < hi)) {
                return Err(Error::Input("scan region needs lo < hi on every axis".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    /// Only bands `n` and `n + 1` meet.
    Pair,
    /// A further band joins the crossing.
    Higher,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Conical,
    NonConical,
    Indeterminate,
}

/// A classified crossing of bands `band` and `band + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyPoint {
    pub location: Point,
    pub band: usize,
    /// Mean energy of the crossing pair.
    pub energy: f64,
    /// Pair gap at the refined location.
    pub gap: f64,
    /// Hessian of the squared pair gap `4 q`.
    pub hessian: [[f64; 3]; 3],
    pub hessian_det: f64,
    /// `|det| / (largest |eigenvalue|)^3`.
    pub relative_det: f64,
    pub multiplicity: Multiplicity,
    pub verdict: Verdict,
}

/// Result of refining a single seed.
#[derive(Clone, Debug, PartialEq)]
pub enum Refinement {
    Converged { point: Point, q: f64, iterations: usize },
    /// Minimum of `q` with the pair still open.
    Gapped { point: Point, q: f64 },
    Stalled { point: Point, q: f64, iterations: usize },
    /// Descent stopped on a saddle of `q`; `direction` has negative curvature.
    Saddle { point: Point, q: f64, direction: [f64; 3] },
}

/// Counts gathered during a scan.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanStats {
    pub grid_points: usize,
    pub seeds: usize,
    pub converged: usize,
    pub gapped: usize,
    pub clusters: usize,
}

struct PairEval {
    q: f64,
    grad: [f64; 3],
}

fn pair_eval<F: Family + ?Sized>(family: &F, n: usize, x: &Point) -> PairEval {
    let h = family.evaluate(x);
    let spec = h.eigensystem().expect("finite Hermitian matrix");
    let g = spec.gap(n).max(0.0);
    let va = spec.vectors.column(n - 1);
    let vb = spec.vectors.column(n);
    let mut grad = [0.0; 3];
    for (j, gj) in grad.iter_mut().enumerate() {
        let d = family.derivative(x, j);
        let da = (va.adjoint() * &d * va)[(0, 0)].re;
        let db = (vb.adjoint() * &d * vb)[(0, 0)].re;
        *gj = 0.5 * g * (db - da);
    }
    PairEval {
        q: 0.25 * g * g,
        grad,
    }
}

fn pair_q<F: Family + ?Sized>(family: &F, n: usize, x: &Point) -> f64 {
    let spec = family.evaluate(x).eigensystem().expect("finite Hermitian matrix");
    let g = spec.gap(n).max(0.0);
    0.25 * g * g
}

/// Merit `q (1 + 1 / |x - z|^2)` that removes an already located zero `z`.
struct Merit<'a, F: Family + ?Sized> {
    family: &'a F,
    n: usize,
    domain: Domain,
    deflate: Option<Point>,
}

impl<F: Family + ?Sized> Merit<'_, F> {
    fn factor(&self, x: &Point) -> (f64, [f64; 3]) {
        match self.deflate {
            None => (1.0, [0.0; 3]),
            Some(z) => {
                let d = self.domain.displacement(&z, x);
                let r2 = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).max(1e-300);
                (1.0 + 1.0 / r2, d.map(|di| -2.0 * di / (r2 * r2)))
            }
        }
    }

    /// Merit value, its gradient, and the undeflated `q`.
    fn eval(&self, x: &Point) -> (f64, [f64; 3], f64) {
        let p = pair_eval(self.family, self.n, x);
        let (m, dm) = self.factor(x);
        let grad = [0, 1, 2].map(|j| m * p.grad[j] + p.q * dm[j]);
        (m * p.q, grad, p.q)
    }

    fn value(&self, x: &Point) -> (f64, f64) {
        let q = pair_q(self.family, self.n, x);
        (self.factor(x).0 * q, q)
    }
}

/// Axes of the search box with their node lists.
struct Grid {
    axes: [Axis; 3],
    wrap: [bool; 3],
    nodes: [Vec<f64>; 3],
}

impl Grid {
    fn new(domain: &Domain, cfg: &ScanConfig) -> Self {
        let mut axes = domain.axes;
        let mut wrap = [false; 3];
        for k in 0..3 {
            match cfg.region {
                Some(r) => {
                    axes[k] = Axis::Interval {
                        lo: r[k][0],
                        hi: r[k][1],
                    }
                }
                None => wrap[k] = matches!(axes[k], Axis::Periodic),
            }
        }
        let nodes = [0, 1, 2].map(|k| axes[k].nodes(cfg.grid[k]));
        Grid { axes, wrap, nodes }
    }

    fn spacing(&self, k: usize) -> f64 {
        let count = self.nodes[k].len();
        match self.axes[k] {
            Axis::Periodic => self.axes[k].length() / count as f64,
            Axis::Interval { .. } => self.axes[k].length() / (count - 1) as f64,
        }
    }

    fn cell_diameter(&self) -> f64 {
        (0..3).map(|k| self.spacing(k).powi(2)).sum::<f64>().sqrt()
    }

    fn len(&self) -> usize {
        self.nodes.iter().map(Vec::len).product()
    }

    fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.nodes[1].len() + i[1]) * self.nodes[2].len() + i[2]
    }

    fn unindex(&self, flat: usize) -> [usize; 3] {
        let (n1, n2) = (self.nodes[1].len(), self.nodes[2].len());
        [flat / (n1 * n2), (flat / n2) % n1, flat % n2]
    }

    fn point(&self, i: [usize; 3]) -> Point {
        [self.nodes[0][i[0]], self.nodes[1][i[1]], self.nodes[2][i[2]]]
    }

    fn neighbours(&self, i: [usize; 3]) -> Vec<usize> {
        let mut out = Vec::with_capacity(26);
        for d0 in -1i64..=1 {
            for d1 in -1i64..=1 {
                for d2 in -1i64..=1 {
                    if (d0, d1, d2) == (0, 0, 0) {
                        continue;
                    }
                    let mut j = [0usize; 3];
                    let mut ok = true;
                    for (k, d) in [d0, d1, d2].into_iter().enumerate() {
                        let len = self.nodes[k].len() as i64;
                        let mut v = i[k] as i64 + d;
                        if self.wrap[k] {
                            v = v.rem_euclid(len);
                        } else if v < 0 || v >= len {
                            ok = false;
                            break;
                        }
                        j[k] = v as usize;
                    }
                    if ok {
                        out.push(self.index(j));
                    }
                }
            }
        }
        out
    }
}

/// Locates and classifies all crossings of bands `n`, `n + 1` on the family domain.
pub fn scan<F: Family + ?Sized>(family: &F, n: usize, cfg: &ScanConfig) -> Result<Vec<DegeneracyPoint>> {
    Ok(scan_with_stats(family, n, cfg)?.0)
}

/// [`scan`] together with search statistics.
pub fn scan_with_stats<F: Family + ?Sized>(
    family: &F,
    n: usize,
    cfg: &ScanConfig,
) -> Result<(Vec<DegeneracyPoint>, ScanStats)> {
    cfg.validate()?;
    check_band(n, family.bands())?;
    let domain = family.domain();
    let grid = Grid::new(&domain, cfg);
    let diam = grid.cell_diameter();

    let samples: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let x = grid.point(grid.unindex(flat));
            let spec = family.evaluate(&x).eigensystem().expect("finite Hermitian matrix");
            let lip = (0..3)
                .map(|j| family.derivative(&x, j).norm_squared())
                .sum::<f64>()
                .sqrt();
            (spec.gap(n), cfg.seed_factor * diam * lip)
        })
        .collect();

    let seeds: Vec<Point> = (0..grid.len())
        .filter(|&flat| {
            let (g, threshold) = samples[flat];
            g < threshold
                && grid
                    .neighbours(grid.unindex(flat))
                    .iter()
                    .all(|&nb| g <= samples[nb].0)
        })
        .map(|flat| grid.point(grid.unindex(flat)))
        .collect();

    let threshold_of = |p: &Point| -> f64 {
        let lip = (0..3)
            .map(|j| family.derivative(p, j).norm_squared())
            .sum::<f64>()
            .sqrt();
        cfg.seed_factor * diam * lip
    };

    let outcomes: Vec<(Point, Refinement)> = seeds
        .par_iter()
        .flat_map_iter(|s| {
            let first = refine_with_radius(family, n, s, cfg, diam);
            if let Refinement::Converged { point, .. } = first {
                // a second zero may share the basin of this seed
                let second = refine_inner(family, n, s, cfg, diam, Some(point));
                return match second {
                    Refinement::Converged { .. } => vec![(*s, first), (*s, second)],
                    _ => vec![(*s, first)],
                };
            }
            match first {
                Refinement::Saddle {
                    point, direction, ..
                } => [1.0, -1.0]
                    .iter()
                    .map(|sign| {
                        let child = [0, 1, 2].map(|k| point[k] + sign * 0.25 * diam * direction[k]);
                        (*s, refine_with_radius(family, n, &child, cfg, diam))
                    })
                    .collect::<Vec<_>>(),
                other => vec![(*s, other)],
            }
        })
        .collect();

    let mut stats = ScanStats {
        grid_points: grid.len(),
        seeds: seeds.len(),
        ..ScanStats::default()
    };
    let mut converged: Vec<(Point, f64)> = Vec::new();
    for (seed, outcome) in &outcomes {
        match outcome {
            Refinement::Converged { point, q, .. } => {
                stats.converged += 1;
                converged.push((*point, *q));
            }
            Refinement::Gapped { .. } | Refinement::Saddle { .. } => stats.gapped += 1,
            Refinement::Stalled {
                point,
                q,
                iterations,
            } => {
                let t = threshold_of(seed);
                if *q < t * t {
                    return Err(Error::RefinementStall {
                        point: *point,
                        q: *q,
                        iterations: *iterations,
                    });
                }
                stats.gapped += 1;
            }
        }
    }

    let in_region = |p: &Point| match cfg.region {
        None => true,
        Some(r) => (0..3).all(|k| p[k] >= r[k][0] - 1e-9 && p[k] <= r[k][1] + 1e-9),
    };
    converged.retain(|(p, _)| in_region(p));
    let representatives = cluster(&domain, converged, cfg.cluster_radius);
    stats.clusters = representatives.len();

    let mut points: Vec<DegeneracyPoint> = representatives
        .par_iter()
        .map(|p| classify(family, n, p, cfg))
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| {
        a.location
            .iter()
            .zip(&b.location)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok((points, stats))
}

/// Greedy clustering: lowest `q` first, later points within `radius` are absorbed.
fn cluster(domain: &Domain, mut points: Vec<(Point, f64)>, radius: f64) -> Vec<Point> {
    points.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut reps: Vec<Point> = Vec::new();
    for (p, _) in points {
        if reps.iter().all(|r| domain.distance(r, &p) > radius) {
            reps.push(p);
        }
    }
    reps
}

const POLISH_STEPS: usize = 40;

/// Damped Newton descent of `q` from `seed`.
pub fn refine<F: Family + ?Sized>(family: &F, n: usize, seed: &Point, cfg: &ScanConfig) -> Refinement {
    let grid = Grid::new(&family.domain(), cfg);
    refine_with_radius(family, n, seed, cfg, grid.cell_diameter())
}

fn refine_with_radius<F: Family + ?Sized>(
    family: &F,
    n: usize,
    seed: &Point,
    cfg: &ScanConfig,
    radius: f64,
) -> Refinement {
    refine_inner(family, n, seed, cfg, radius, None)
}

fn refine_inner<F: Family + ?Sized>(
    family: &F,
    n: usize,
    seed: &Point,
    cfg: &ScanConfig,
    radius: f64,
    deflate: Option<Point>,
) -> Refinement {
    let domain = family.domain();
    let merit = Merit {
        family,
        n,
        domain: domain.clone(),
        deflate,
    };
    let target = 0.25 * cfg.refine_tol * cfg.refine_tol;
    let mut x = *seed;
    let (mut cur_m, mut cur_g, mut cur_q) = merit.eval(&x);
    let mut reached: Option<usize> = None;
    let mut negative: Option<[f64; 3]> = None;
    for it in 0..cfg.max_iter {
        if cur_q < target {
            // keep polishing: flat crossings reach the tolerance far from the zero
            let first = *reached.get_or_insert(it);
            if cur_q == 0.0 || it - first >= POLISH_STEPS {
                break;
            }
        }
        let h = (0.1 * cur_q.powf(0.25)).clamp(1e-7, cfg.fd_step);
        let mut hess = Matrix3::zeros();
        for k in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let gp = merit.eval(&xp).1;
            let gm = merit.eval(&xm).1;
            for j in 0..3 {
                hess[(j, k)] = (gp[j] - gm[j]) / (2.0 * h);
            }
        }
        let hess = 0.5 * (hess + hess.transpose());
        let g = Vector3::from(cur_g);
        let eig = hess.symmetric_eigen();
        let scale = eig.eigenvalues.amax().max(1e-300);
        let imin = eig.eigenvalues.imin();
        negative = (eig.eigenvalues[imin] < -1e-6 * scale).then(|| {
            let v = eig.eigenvectors.column(imin);
            [v[0], v[1], v[2]]
        });
        let mut step = Vector3::zeros();
        for i in 0..3 {
            let v = eig.eigenvectors.column(i);
            let mu = eig.eigenvalues[i].abs().max(1e-12 * scale);
            step -= v * (v.dot(&g) / mu);
        }
        let norm = step.norm();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        if norm > radius {
            step *= radius / norm;
        }

        let mut accepted = None;
        let mut alpha = 1.0;
        for _ in 0..40 {
            let mut trial = x;
            for k in 0..3 {
                trial[k] = domain.axes[k].clamp_interval(x[k] + alpha * step[k]);
            }
            let (m, _) = merit.value(&trial);
            if m < cur_m {
                accepted = Some(trial);
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some(t) => {
                x = t;
                (cur_m, cur_g, cur_q) = merit.eval(&x);
            }
            None => break,
        }
    }
    if cur_q < target {
        return Refinement::Converged {
            point: domain.normalize(x),
            q: cur_q,
            iterations: reached.unwrap_or(cfg.max_iter),
        };
    }
    if let Some(direction) = negative {
        return Refinement::Saddle {
            point: x,
            q: cur_q,
            direction,
        };
    }
    finish(domain.normalize(x), cur_q, cfg.max_iter, cfg)
}

/// A non-converged run counts as gapped once the pair gap is clearly open.
fn finish(point: Point, q: f64, iterations: usize, cfg: &ScanConfig) -> Refinement {
    let gap = 2.0 * q.sqrt();
    if gap >= (1e3 * cfg.refine_tol).max(1e-6) {
        Refinement::Gapped { point, q }
    } else {
        Refinement::Stalled {
            point,
            q,
            iterations,
        }
    }
}

impl Axis {
    fn clamp_interval(&self, x: f64) -> f64 {
        match *self {
            Axis::Periodic => x,
            Axis::Interval { lo, hi } => x.clamp(lo, hi),
        }
    }
}

/// Central-difference Hessian of `f` with one Richardson extrapolation.
pub fn richardson_hessian(f: impl Fn(&Point) -> f64, x: &Point, h: f64) -> Matrix3<f64> {
    let raw = |h: f64| {
        let mut m = Matrix3::zeros();
        let f0 = f(x);
        let shifted = |a: usize, da: f64, b: usize, db: f64| {
            let mut y = *x;
            y[a] += da;
            y[b] += db;
            f(&y)
        };
        for j in 0..3 {
            let mut yp = *x;
            let mut ym = *x;
            yp[j] += h;
            ym[j] -= h;
            m[(j, j)] = (f(&yp) - 2.0 * f0 + f(&ym)) / (h * h);
            for k in j + 1..3 {
                let v = (shifted(j, h, k, h) - shifted(j, h, k, -h) - shifted(j, -h, k, h)
                    + shifted(j, -h, k, -h))
                    / (4.0 * h * h);
                m[(j, k)] = v;
                m[(k, j)] = v;
            }
        }
        m
    };
    (4.0 * raw(0.5 * h) - raw(h)) / 3.0
}

/// Classifies a refined crossing by the Hessian of the squared pair gap.
pub fn classify<F: Family + ?Sized>(
    family: &F,
    n: usize,
    location: &Point,
    cfg: &ScanConfig,
) -> Result<DegeneracyPoint> {
    check_band(n, family.bands())?;
    let spec: Spectrum = family.evaluate(location).eigensystem()?;
    let gap = spec.gap(n);
    let higher = spec.min_other_gap(n) < ISOLATION_TOL;
    let gap_sq = |p: &Point| {
        let s = family.evaluate(p).eigensystem().expect("finite Hermitian matrix");
        let g = s.gap(n);
        g * g
    };
    let hess = richardson_hessian(gap_sq, location, cfg.fd_step);
    let hess = 0.5 * (hess + hess.transpose());
    let eig = hess.symmetric_eigen();
    let scale = eig.eigenvalues.amax();
    let det = hess.determinant();
    let relative_det = if scale > 0.0 { det.abs() / scale.powi(3) } else { 0.0 };
    let psd = eig.eigenvalues.min() >= -1e-6 * scale.max(1e-300);

    let verdict = if higher {
        Verdict::NonConical
    } else if !psd {
        Verdict::Indeterminate
    } else if relative_det > cfg.hess_tol {
        Verdict::Conical
    } else if relative_det > 1e-2 * cfg.hess_tol {
        Verdict::Indeterminate
    } else {
        Verdict::NonConical
    };
    let energy = 0.5 * (spec.values[n - 1] + spec.values[n]);
    Ok(DegeneracyPoint {
        location: family.domain().normalize(*location),
        band: n,
        energy,
        gap,
        hessian: [0, 1, 2].map(|j| [0, 1, 2].map(|k| hess[(j, k)])),
        hessian_det: det,
        relative_det,
        multiplicity: if higher {
            Multiplicity::Higher
        } else {
            Multiplicity::Pair
        },
        verdict,
    })
}

/// `f = det(Hess(D o H))^2 + D(H)` at `x`; vanishes exactly at non-conical crossings.
pub fn witness_f<F: Family + ?Sized>(family: &F, x: &Point, fd_step: f64) -> f64 {
    let disc = |p: &Point| {
        let h = family.evaluate(p);
        let tol = h.gap_tolerance();
        let values = h.eigenvalues().expect("finite Hermitian matrix");
        discriminant_of(values.as_slice(), tol)
    };
    let hess = richardson_hessian(disc, x, fd_step);
    hess.determinant().powi(2) + disc(x)
}
