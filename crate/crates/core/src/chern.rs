//! Berry curvature and first Chern numbers of slices `s = const`, and the
//! comparison of Chern jumps with cone chiralities along a homotopy.
//!
//! Convention: the Berry connection is `A = i <u|du>`, so the curvature of the
//! bundle spanned by the lowest `n` bands is `i tr(P [d1 P, d2 P])` and the
//! lattice Berry phase of a plaquette is minus the argument of its link
//! product. With this orientation the lower QWZ band at mass 1 has `c1 = -1`.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{analyze_cone, ConeData};
use crate::error::{Error, Result};
use crate::hermitian::{check_band, HermitianMatrix, C64};
use crate::model::{Axis, Family, Point};
use crate::scan::{scan, ScanConfig, Verdict};

/// Smallest pair gap tolerated on a slice before its Chern number is refused.
pub const SLICE_GAP_TOL: f64 = 1e-6;

/// Plaquette fluxes beyond `pi - FLUX_MARGIN` trigger grid refinement.
pub const FLUX_MARGIN: f64 = 0.2;

/// Pointwise curvature on a `grid x grid` lattice of a slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureField {
    pub s: f64,
    pub band: usize,
    pub grid: usize,
    /// Row-major values, `values[i1 * grid + i2]` at `(xi1, xi2) = 2 pi (i1, i2) / grid`.
    pub values: Vec<f64>,
}

impl CurvatureField {
    /// Riemann sum of the curvature divided by `2 pi`.
    pub fn chern_sum(&self) -> f64 {
        let cell = (TAU / self.grid as f64).powi(2);
        self.values.iter().sum::<f64>() * cell / TAU
    }
}

/// Slice `xi -> H(s, xi)` of a family whose axes 1 and 2 are angles.
pub struct Slice<'a, F: Family + ?Sized> {
    family: &'a F,
    s: f64,
}

impl<'a, F: Family + ?Sized> Slice<'a, F> {
    pub fn new(family: &'a F, s: f64) -> Result<Self> {
        let d = family.domain();
        if !matches!(d.axes[1], Axis::Periodic) || !matches!(d.axes[2], Axis::Periodic) {
            return Err(Error::Input("Chern numbers need periodic axes 1 and 2".into()));
        }
        Ok(Slice { family, s })
    }

    pub fn at(&self, xi: [f64; 2]) -> HermitianMatrix {
        self.family.evaluate(&[self.s, xi[0], xi[1]])
    }

    fn point(&self, xi: [f64; 2]) -> Vec<f64> {
        vec![self.s, xi[0], xi[1]]
    }

    /// Lowest-`n` eigenvector frame; refuses points where the gap is below tolerance.
    fn frame(&self, xi: [f64; 2], n: usize) -> Result<DMatrix<C64>> {
        let spec = self.at(xi).eigensystem()?;
        let gap = spec.gap(n);
        if gap <= SLICE_GAP_TOL {
            return Err(Error::GapClosed {
                band: n,
                next: n + 1,
                point: self.point(xi),
                gap,
            });
        }
        Ok(spec.columns(0, n))
    }

    fn projector(&self, xi: [f64; 2], n: usize) -> Result<DMatrix<C64>> {
        let w = self.frame(xi, n)?;
        Ok(&w * w.adjoint())
    }

    /// `i tr(P [d1 P, d2 P])` by central differences of projectors with step `h`.
    pub fn curvature_at(&self, xi: [f64; 2], n: usize, h: f64) -> Result<f64> {
        self.frame(xi, n)?;
        let p = self.projector(xi, n)?;
        let d = |axis: usize| -> Result<DMatrix<C64>> {
            let mut a = xi;
            let mut b = xi;
            a[axis] += h;
            b[axis] -= h;
            Ok((self.projector(a, n)? - self.projector(b, n)?) / C64::new(2.0 * h, 0.0))
        };
        let (d1, d2) = (d(0)?, d(1)?);
        let comm = &d1 * &d2 - &d2 * &d1;
        let tr = (&p * comm).trace();
        Ok(-tr.im)
    }
}

/// Curvature field of bands `1..=n` at slice `s`, sampled on a `grid x grid` lattice.
pub fn berry_curvature<F: Family + ?Sized>(family: &F, s: f64, n: usize, grid: usize) -> Result<CurvatureField> {
    check_band(n, family.bands())?;
    if grid < 4 {
        return Err(Error::Input("curvature grid must be at least 4".into()));
    }
    let slice = Slice::new(family, s)?;
    let h = TAU / (8.0 * grid as f64);
    let step = TAU / grid as f64;
    let values = (0..grid * grid)
        .into_par_iter()
        .map(|k| {
            let xi = [step * (k / grid) as f64, step * (k % grid) as f64];
            slice.curvature_at(xi, n, h)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CurvatureField {
        s,
        band: n,
        grid,
        values,
    })
}

/// Lattice Chern number from frames on a periodic `grid x grid` lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeChern {
    /// Sum of plaquette Berry phases divided by `2 pi`; an integer up to rounding.
    pub raw: f64,
    pub max_flux: f64,
    pub max_flux_cell: [usize; 2],
}

/// Gauge-invariant lattice Chern number of row-major frames `frames[i1 * grid + i2]`.
pub fn lattice_chern(frames: &[DMatrix<C64>], grid: usize) -> Result<LatticeChern> {
    if frames.len() != grid * grid || grid < 2 {
        return Err(Error::Input(format!(
            "expected {} frames for grid {grid}, got {}",
            grid * grid,
            frames.len()
        )));
    }
    let idx = |a: usize, b: usize| (a % grid) * grid + (b % grid);
    let link = |i: usize, j: usize| -> Result<C64> {
        let z = (frames[i].adjoint() * &frames[j]).determinant();
        let r = z.norm();
        if !(r > 1e-12) {
            return Err(Error::Frame(format!("vanishing link overlap between sites {i} and {j}")));
        }
        Ok(z / r)
    };
    let fluxes = (0..grid * grid)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (k / grid, k % grid);
            let u = link(idx(a, b), idx(a + 1, b))?
                * link(idx(a + 1, b), idx(a + 1, b + 1))?
                * link(idx(a + 1, b + 1), idx(a, b + 1))?
                * link(idx(a, b + 1), idx(a, b))?;
            Ok(-u.arg())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mut max_flux, mut cell) = (0.0f64, [0, 0]);
    for (k, f) in fluxes.iter().enumerate() {
        if f.abs() > max_flux {
            max_flux = f.abs();
            cell = [k / grid, k % grid];
        }
    }
    Ok(LatticeChern {
        raw: fluxes.iter().sum::<f64>() / TAU,
        max_flux,
        max_flux_cell: cell,
    })
}

/// Integer Chern number with the diagnostics that justify it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChernEstimate {
    pub s: f64,
    pub band: usize,
    pub value: i64,
    pub lattice: f64,
    pub riemann: f64,
    pub grid: usize,
    pub max_flux: f64,
}

/// Refinement policy for Chern computations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChernConfig {
    pub base_grid: usize,
    pub max_doublings: usize,
    /// Upper bound for the offset `delta` around a jump.
    pub delta_max: f64,
    /// Times `delta` is halved when an offset slice is not gapped.
    pub delta_halvings: usize,
    /// Crossings closer than this in `s` form one jump.
    pub jump_merge: f64,
}

impl Default for ChernConfig {
    fn default() -> Self {
        ChernConfig {
            base_grid: 48,
            max_doublings: 3,
            delta_max: 1e-2,
            delta_halvings: 6,
            jump_merge: 1e-6,
        }
    }
}

/// Chern number of the lowest `n` bands at slice `s`, doubling the grid until
/// every plaquette flux is safely inside the branch cut and the curvature sum agrees.
pub fn chern_number<F: Family + ?Sized>(family: &F, s: f64, n: usize, cfg: &ChernConfig) -> Result<ChernEstimate> {
    check_band(n, family.bands())?;
    let slice = Slice::new(family, s)?;
    let mut grid = cfg.base_grid.max(4);
    let mut last_err = None;
    for _ in 0..=cfg.max_doublings {
        match chern_at_grid(&slice, family, s, n, grid) {
            Ok(est) => return Ok(est),
            Err(e @ (Error::Plaquette { .. } | Error::ChernMismatch { .. })) => last_err = Some(e),
            Err(e) => return Err(e),
        }
        grid *= 2;
    }
    Err(last_err.expect("at least one attempt"))
}

fn chern_at_grid<F: Family + ?Sized>(
    slice: &Slice<'_, F>,
    family: &F,
    s: f64,
    n: usize,
    grid: usize,
) -> Result<ChernEstimate> {
    let step = TAU / grid as f64;
    let frames = (0..grid * grid)
        .into_par_iter()
        .map(|k| slice.frame([step * (k / grid) as f64, step * (k % grid) as f64], n))
        .collect::<Result<Vec<_>>>()?;
    let lat = lattice_chern(&frames, grid)?;
    if lat.max_flux > PI - FLUX_MARGIN {
        return Err(Error::Plaquette {
            cell: lat.max_flux_cell,
            flux: lat.max_flux,
            grid,
        });
    }
    let riemann = berry_curvature(family, s, n, grid)?.chern_sum();
    let value = lat.raw.round();
    if (riemann - value).abs() >= 0.5 {
        return Err(Error::ChernMismatch {
            lattice: lat.raw,
            riemann,
            grid,
        });
    }
    Ok(ChernEstimate {
        s,
        band: n,
        value: value as i64,
        lattice: lat.raw,
        riemann,
        grid,
        max_flux: lat.max_flux,
    })
}

/// Integral of the curvature over the disc of radius `r` about `center` at slice `s`.
///
/// Polar quadrature: Gauss-Legendre in radius on graded shells, trapezoid in angle.
pub fn disc_curvature<F: Family + ?Sized>(
    family: &F,
    s: f64,
    n: usize,
    center: [f64; 2],
    r: f64,
    scale: f64,
) -> Result<f64> {
    let slice = Slice::new(family, s)?;
    // shell edges graded geometrically from the core scale up to r
    let mut edges = vec![0.0];
    let mut e = scale.min(r / 4.0).max(1e-12);
    while e < r {
        edges.push(e);
        e *= 2.0;
    }
    edges.push(r);
    let (nodes, weights) = gauss_legendre_8();
    let n_theta = 64;
    let h = 1e-2 * scale.min(r);
    let mut jobs = Vec::new();
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (x, wt) in nodes.iter().zip(&weights) {
            let rho = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let wr = 0.5 * (b - a) * wt * rho * TAU / n_theta as f64;
            for t in 0..n_theta {
                let th = TAU * t as f64 / n_theta as f64;
                jobs.push(([center[0] + rho * th.cos(), center[1] + rho * th.sin()], wr));
            }
        }
    }
    let parts = jobs
        .par_iter()
        .map(|(xi, w)| Ok(w * slice.curvature_at(*xi, n, h)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum::<f64>() / TAU)
}

fn gauss_legendre_8() -> ([f64; 8], [f64; 8]) {
    let x = [
        -0.960_289_856_497_536_3,
        -0.796_666_477_413_626_7,
        -0.525_532_409_916_329_0,
        -0.183_434_642_495_649_8,
        0.183_434_642_495_649_8,
        0.525_532_409_916_329_0,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    let w = [
        0.101_228_536_290_376_3,
        0.222_381_034_453_374_5,
        0.313_706_645_877_887_3,
        0.362_683_783_378_362_0,
        0.362_683_783_378_362_0,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    (x, w)
}

/// Chern number of one slice in a profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceChern {
    pub s: f64,
    pub c1: i64,
    pub grid: usize,
}

/// Comparison of one Chern jump with the chiralities of the cones causing it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpCheck {
    pub s_star: f64,
    pub delta: f64,
    pub c_before: i64,
    pub c_after: i64,
    pub delta_c1: i64,
    pub cones: Vec<Point>,
    pub chiralities: Vec<i32>,
    pub chirality_sum: i64,
    pub pass: bool,
}

/// Chern numbers along a homotopy and the per-jump chirality balance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChernReport {
    pub band: usize,
    pub slices: Vec<SliceChern>,
    pub jumps: Vec<JumpCheck>,
    pub c_start: i64,
    pub c_end: i64,
    pub total_delta_c1: i64,
    pub total_chirality: i64,
    pub pass: bool,
}

fn s_range<F: Family + ?Sized>(family: &F) -> (f64, f64) {
    match family.domain().axes[0] {
        Axis::Interval { lo, hi } => (lo, hi),
        Axis::Periodic => (0.0, TAU),
    }
}

/// Chern profile across the jump set given by `cones`.
pub fn chern_profile<F: Family + ?Sized>(
    family: &F,
    n: usize,
    cones: &[ConeData],
    cfg: &ChernConfig,
) -> Result<ChernReport> {
    check_band(n, family.bands())?;
    let (lo, hi) = s_range(family);

    let mut sorted: Vec<&ConeData> = cones.iter().collect();
    sorted.sort_by(|a, b| a.location[0].total_cmp(&b.location[0]));
    let mut groups: Vec<Vec<&ConeData>> = Vec::new();
    for cd in sorted {
        match groups.last_mut() {
            Some(g) if (cd.location[0] - g[0].location[0]).abs() <= cfg.jump_merge => g.push(cd),
            _ => groups.push(vec![cd]),
        }
    }
    let stars: Vec<f64> = groups
        .iter()
        .map(|g| g.iter().map(|c| c.location[0]).sum::<f64>() / g.len() as f64)
        .collect();
    let min_spacing = stars
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let base_delta = cfg.delta_max.min(0.5 * min_spacing);

    let mut slices = Vec::new();
    let start = chern_number(family, lo, n, cfg)?;
    let end = chern_number(family, hi, n, cfg)?;
    slices.push(SliceChern {
        s: lo,
        c1: start.value,
        grid: start.grid,
    });

    let mut jumps = Vec::new();
    for (group, &star) in groups.iter().zip(&stars) {
        let mut delta = base_delta.min(0.5 * (star - lo)).min(0.5 * (hi - star));
        let mut attempt = 0;
        let (before, after) = loop {
            let pair = chern_number(family, star - delta, n, cfg)
                .and_then(|b| Ok((b, chern_number(family, star + delta, n, cfg)?)));
            match pair {
                Ok(p) => break p,
                Err(Error::GapClosed { .. }) if attempt < cfg.delta_halvings => {
                    delta *= 0.5;
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        };
        slices.push(SliceChern {
            s: before.s,
            c1: before.value,
            grid: before.grid,
        });
        slices.push(SliceChern {
            s: after.s,
            c1: after.value,
            grid: after.grid,
        });
        let chiralities: Vec<i32> = group.iter().map(|c| c.chirality).collect();
        let chirality_sum: i64 = chiralities.iter().map(|&x| x as i64).sum();
        let delta_c1 = after.value - before.value;
        jumps.push(JumpCheck {
            s_star: star,
            delta,
            c_before: before.value,
            c_after: after.value,
            delta_c1,
            cones: group.iter().map(|c| c.location).collect(),
            chiralities,
            chirality_sum,
            pass: delta_c1 == chirality_sum,
        });
    }
    slices.push(SliceChern {
        s: hi,
        c1: end.value,
        grid: end.grid,
    });

    let total_chirality = jumps.iter().map(|j| j.chirality_sum).sum();
    let total_delta_c1 = end.value - start.value;
    let pass = jumps.iter().all(|j| j.pass) && total_delta_c1 == total_chirality;
    Ok(ChernReport {
        band: n,
        slices,
        jumps,
        c_start: start.value,
        c_end: end.value,
        total_delta_c1,
        total_chirality,
        pass,
    })
}

/// Full check of a homotopy: scan, require every crossing conical, then profile.
pub fn verify_chirality_balance<F: Family + ?Sized>(
    family: &F,
    n: usize,
    scan_cfg: &ScanConfig,
    chern_cfg: &ChernConfig,
) -> Result<(Vec<ConeData>, ChernReport)> {
    let points = scan(family, n, scan_cfg)?;
    if let Some(bad) = points.iter().find(|p| p.verdict != Verdict::Conical) {
        return Err(Error::NotConical {
            point: bad.location,
            detail: format!("{:?} crossing with {:?} multiplicity", bad.verdict, bad.multiplicity),
        });
    }
    let cones = points
        .iter()
        .map(|p| analyze_cone(family, p))
        .collect::<Result<Vec<_>>>()?;
    let report = chern_profile(family, n, &cones, chern_cfg)?;
    Ok((cones, report))
}
