//! Domain walls between the endpoints of a homotopy, realized on a cylinder.
//!
//! Sites `m = (m1, m2)`; row `m2` uses the Hamiltonian at `s = delta m2 - margin`
//! clamped to `[0, 1]`, and the translation symmetry along `e1` is Bloch reduced.
//! Time evolution follows `(D_t - H) psi = 0` with `D_t = -i d/dt`, so states
//! evolve by `exp(i t H)` and a branch `lambda(xi1)` propagates with velocity
//! `-d lambda / d xi1`.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chern::{verify_chirality_balance, ChernConfig, ChernReport};
use crate::cone::{spectral_momentum, ConeData, DiracModel};
use crate::error::{Error, Result};
use crate::hermitian::{c, HermitianMatrix, Spectrum, C64};
use crate::model::{Axis, Homotopy};
use crate::scan::ScanConfig;

/// Smallest admissible `width * delta`.
pub const MIN_WALL_SPAN: f64 = 1.4;

/// Largest admissible wall rate.
pub const MAX_DELTA: f64 = 0.2;

/// Overlaps below this make eigenvalue continuation ambiguous.
pub const TRACKING_OVERLAP: f64 = 0.5;

/// Boundary mass that aborts a wavepacket run.
pub const ESCAPE_MASS: f64 = 1e-2;

/// Bloch-reduced domain-wall operator with open boundaries in `m2`.
#[derive(Clone, Debug)]
pub struct CylinderOperator {
    homotopy: Arc<Homotopy>,
    delta: f64,
    width: usize,
    k1: Vec<f64>,
}

impl CylinderOperator {
    pub fn new(homotopy: Arc<Homotopy>, delta: f64, width: usize, k1_count: usize) -> Result<Self> {
        if !(delta > 0.0 && delta <= MAX_DELTA) {
            return Err(Error::Input(format!("delta = {delta} must lie in (0, {MAX_DELTA}]")));
        }
        if (width as f64) * delta < MIN_WALL_SPAN {
            return Err(Error::Input(format!(
                "width * delta = {} is below {MIN_WALL_SPAN}",
                width as f64 * delta
            )));
        }
        if k1_count < 4 {
            return Err(Error::Input("at least 4 xi1 samples are required".into()));
        }
        let reach = homotopy.h0().reach(1).max(homotopy.h1().reach(1));
        let margin_sites = ((width as f64 * delta - 1.0) / (2.0 * delta)).floor() as i64;
        if reach > margin_sites {
            return Err(Error::Range {
                reach,
                needed: (1.0 / delta).ceil() as i64 + 2 * reach,
            });
        }
        Ok(CylinderOperator {
            homotopy,
            delta,
            width,
            k1: k1_samples(k1_count),
        })
    }

    /// Same wall with a different number of `xi1` samples.
    pub fn with_k1_count(&self, k1_count: usize) -> Result<Self> {
        Self::new(self.homotopy.clone(), self.delta, self.width, k1_count)
    }

    pub fn homotopy(&self) -> &Homotopy {
        &self.homotopy
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn k1_samples(&self) -> &[f64] {
        &self.k1
    }

    /// Padding `(width delta - 1) / 2` on each side of the wall, in units of `s`.
    pub fn margin(&self) -> f64 {
        0.5 * (self.width as f64 * self.delta - 1.0)
    }

    /// Unclamped wall coordinate of row `m2`.
    pub fn s_coordinate(&self, m2: f64) -> f64 {
        self.delta * m2 - self.margin()
    }

    /// Row at which the wall coordinate equals `s`.
    pub fn row_of(&self, s: f64) -> f64 {
        (s + self.margin()) / self.delta
    }

    /// Localization class of a state centred at row `center`.
    pub fn localization(&self, center: f64) -> Localization {
        let guard = 0.5 * self.margin() / self.delta;
        if center < guard {
            Localization::LowerBoundary
        } else if center > self.width as f64 - 1.0 - guard {
            Localization::UpperBoundary
        } else {
            Localization::Wall
        }
    }

    /// Block of the cylinder operator at `xi1`, ordered site-major (`m2 * N + a`).
    pub fn block(&self, xi1: f64) -> HermitianMatrix {
        let n = self.homotopy.h0().bands();
        let w_count = self.width as i64;
        let mut k = DMatrix::<C64>::zeros(n * self.width, n * self.width);
        for m2 in 0..w_count {
            let s = self.s_coordinate(m2 as f64).clamp(0.0, 1.0);
            let w = self.homotopy.schedule().weight(s);
            for (set, weight) in [(self.homotopy.h0(), 1.0 - w), (self.homotopy.h1(), w)] {
                if weight == 0.0 {
                    continue;
                }
                for t in set.terms() {
                    let col = m2 + t.r[1];
                    if !(0..w_count).contains(&col) {
                        continue;
                    }
                    let factor = C64::from_polar(weight, xi1 * t.r[0] as f64);
                    let (r0, c0) = (m2 as usize * n, col as usize * n);
                    for a in 0..n {
                        for b in 0..n {
                            k[(r0 + a, c0 + b)] += t.matrix[(a, b)] * factor;
                        }
                    }
                }
            }
        }
        HermitianMatrix::symmetrized(k)
    }

    /// Blocks at every `xi1` sample.
    pub fn blocks(&self) -> Vec<HermitianMatrix> {
        self.k1.par_iter().map(|&x| self.block(x)).collect()
    }

    /// `(xi1, eigenvalue)` pairs over all samples.
    pub fn spectrum_scatter(&self) -> Result<Vec<(f64, f64)>> {
        let per: Vec<Result<Vec<(f64, f64)>>> = self
            .k1
            .par_iter()
            .map(|&x| Ok(self.block(x).eigenvalues()?.iter().map(|&e| (x, e)).collect()))
            .collect();
        let mut out = Vec::new();
        for p in per {
            out.extend(p?);
        }
        Ok(out)
    }

    fn center(&self, v: &DMatrix<C64>, col: usize) -> f64 {
        let n = self.homotopy.h0().bands();
        (0..self.width)
            .map(|m2| {
                let w: f64 = (0..n).map(|a| v[(m2 * n + a, col)].norm_sqr()).sum();
                m2 as f64 * w
            })
            .sum()
    }
}

fn k1_samples(count: usize) -> Vec<f64> {
    // half-step offset keeps the high-symmetry momenta 0 and pi off the grid
    (0..count).map(|j| TAU * (j as f64 + 0.5) / count as f64).collect()
}

/// Where an eigenvector of the cylinder is concentrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Localization {
    Wall,
    LowerBoundary,
    UpperBoundary,
}

/// Common spectral gap of the two endpoint Hamiltonians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapWindow {
    /// Highest energy of band `n` over both endpoints.
    pub lower: f64,
    /// Lowest energy of band `n + 1` over both endpoints.
    pub upper: f64,
}

impl GapWindow {
    pub fn center(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// Default half-width: 45% of the common gap.
    pub fn default_half_width(&self) -> f64 {
        0.45 * (self.upper - self.lower)
    }
}

/// Common gap of the endpoints, sampled on a `grid x grid` lattice.
pub fn bulk_gap_window(homotopy: &Homotopy, grid: usize) -> Result<GapWindow> {
    let n = homotopy.band_index();
    let nodes = Axis::Periodic.nodes(grid);
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for set in [homotopy.h0(), homotopy.h1()] {
        for &x1 in &nodes {
            for &x2 in &nodes {
                let ev = set.evaluate(&[x1, x2])?.eigenvalues()?;
                lower = lower.max(ev[n - 1]);
                upper = upper.min(ev[n]);
            }
        }
    }
    if lower >= upper {
        return Err(Error::Input(format!(
            "endpoint gaps do not overlap: band top {lower:.6} above band bottom {upper:.6}"
        )));
    }
    Ok(GapWindow { lower, upper })
}

/// One eigenvalue branch crossing the reference energy between two samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowBranch {
    /// Interpolated crossing momentum.
    pub xi1: f64,
    /// Sign of `d lambda / d xi1`.
    pub slope: i32,
    /// Sign of the propagation velocity, `-slope`.
    pub propagation: i32,
    /// Mean row index of the state.
    pub center: f64,
    pub localization: Localization,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralFlowReport {
    pub delta: f64,
    pub width: usize,
    pub k1_count: usize,
    pub energy: f64,
    pub gap_window: (f64, f64),
    pub branches: Vec<FlowBranch>,
    /// Sum of propagation signs over wall-localized branches.
    pub signed_count: i64,
    /// Same sum over boundary-localized branches (excluded from `signed_count`).
    pub boundary_count: i64,
}

/// Signed count of wall modes crossing `energy` as `xi1` winds once.
pub fn spectral_flow(cyl: &CylinderOperator, energy: f64, half_width: f64) -> Result<SpectralFlowReport> {
    let gap = bulk_gap_window(cyl.homotopy(), 64)?;
    if !(half_width > 0.0) || energy - half_width <= gap.lower || energy + half_width >= gap.upper {
        return Err(Error::Input(format!(
            "window {energy} +- {half_width} is not inside the common bulk gap ({:.6}, {:.6})",
            gap.lower, gap.upper
        )));
    }
    let spectra: Vec<Result<Spectrum>> = cyl.k1.par_iter().map(|&x| cyl.block(x).eigensystem()).collect();
    let spectra = spectra.into_iter().collect::<Result<Vec<_>>>()?;
    let k = cyl.k1.len();
    let step = TAU / k as f64;
    let mut branches = Vec::new();
    for j in 0..k {
        let next = (j + 1) % k;
        let (a_spec, b_spec) = (&spectra[j], &spectra[next]);
        let overlap = a_spec.vectors.adjoint() * &b_spec.vectors;
        let in_window = |e: f64| (e - energy).abs() < half_width;
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for a in (0..a_spec.dim()).filter(|&a| in_window(a_spec.values[a])) {
            let (b, o) = best_match((0..b_spec.dim()).map(|b| overlap[(a, b)].norm_sqr()));
            if o < TRACKING_OVERLAP {
                return Err(Error::Tracking { xi1: cyl.k1[j], overlap: o });
            }
            pairs.push((a, b));
        }
        for b in (0..b_spec.dim()).filter(|&b| in_window(b_spec.values[b])) {
            let (a, o) = best_match((0..a_spec.dim()).map(|a| overlap[(a, b)].norm_sqr()));
            if o < TRACKING_OVERLAP {
                return Err(Error::Tracking { xi1: cyl.k1[next], overlap: o });
            }
            if !pairs.contains(&(a, b)) {
                pairs.push((a, b));
            }
        }
        pairs.sort_unstable();
        for (a, b) in pairs {
            let (ea, eb) = (a_spec.values[a] - energy, b_spec.values[b] - energy);
            if ea * eb >= 0.0 && !(ea == 0.0 && eb != 0.0) {
                continue;
            }
            let slope = if eb > ea { 1 } else { -1 };
            let xi1 = cyl.k1[j] + step * ea / (ea - eb);
            let center = 0.5 * (cyl.center(&a_spec.vectors, a) + cyl.center(&b_spec.vectors, b));
            branches.push(FlowBranch {
                xi1: xi1.rem_euclid(TAU),
                slope,
                propagation: -slope,
                center,
                localization: cyl.localization(center),
            });
        }
    }
    branches.sort_by(|x, y| x.xi1.total_cmp(&y.xi1));
    let sum = |wall: bool| {
        branches
            .iter()
            .filter(|b| (b.localization == Localization::Wall) == wall)
            .map(|b| b.propagation as i64)
            .sum()
    };
    Ok(SpectralFlowReport {
        delta: cyl.delta,
        width: cyl.width,
        k1_count: k,
        energy,
        gap_window: (energy - half_width, energy + half_width),
        signed_count: sum(true),
        boundary_count: sum(false),
        branches,
    })
}

/// [`spectral_flow`] retried with doubled sampling while tracking is ambiguous.
pub fn spectral_flow_adaptive(
    cyl: &CylinderOperator,
    energy: f64,
    half_width: f64,
    max_doublings: usize,
) -> Result<SpectralFlowReport> {
    let mut current = cyl.clone();
    let mut attempt = 0;
    loop {
        match spectral_flow(&current, energy, half_width) {
            Err(Error::Tracking { .. }) if attempt < max_doublings => {
                attempt += 1;
                current = current.with_k1_count(2 * current.k1.len())?;
            }
            other => return other,
        }
    }
}

/// Three-way comparison of Chern jump, chirality sum and wall spectral flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BulkEdgeReport {
    pub cones: Vec<ConeData>,
    pub chern: ChernReport,
    pub flow: SpectralFlowReport,
    pub delta_c1: i64,
    pub chirality_sum: i64,
    pub signed_count: i64,
    pub pass: bool,
}

/// Wall parameters for [`bulk_edge_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallConfig {
    pub delta: f64,
    pub width: usize,
    pub k1_count: usize,
    pub max_doublings: usize,
}

impl Default for WallConfig {
    fn default() -> Self {
        WallConfig {
            delta: 0.05,
            width: 40,
            k1_count: 64,
            max_doublings: 3,
        }
    }
}

/// Runs the chirality balance and the wall count on one homotopy.
pub fn bulk_edge_check(
    homotopy: Arc<Homotopy>,
    scan_cfg: &ScanConfig,
    chern_cfg: &ChernConfig,
    wall: &WallConfig,
) -> Result<BulkEdgeReport> {
    let n = homotopy.band_index();
    let (cones, chern) = verify_chirality_balance(&*homotopy, n, scan_cfg, chern_cfg)?;
    let gap = bulk_gap_window(&homotopy, 64)?;
    let cyl = CylinderOperator::new(homotopy, wall.delta, wall.width, wall.k1_count)?;
    let flow = spectral_flow_adaptive(&cyl, gap.center(), gap.default_half_width(), wall.max_doublings)?;
    let delta_c1 = chern.total_delta_c1;
    let chirality_sum = chern.total_chirality;
    let signed_count = flow.signed_count;
    Ok(BulkEdgeReport {
        pass: chern.pass && delta_c1 == chirality_sum && chirality_sum == signed_count,
        cones,
        chern,
        flow,
        delta_c1,
        chirality_sum,
        signed_count,
    })
}

fn best_match(overlaps: impl Iterator<Item = f64>) -> (usize, f64) {
    overlaps
        .enumerate()
        .fold((0, -1.0), |best, (i, o)| if o > best.1 { (i, o) } else { best })
}

/// Settings of a wavepacket comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavepacketConfig {
    /// Packet width in the rescaled variable `x = delta^{1/2} m`.
    pub sigma_scale: f64,
    /// Final rescaled time `tau = delta^{1/2} t`.
    pub horizon: f64,
    /// Number of sampled times after `t = 0`.
    pub samples: usize,
    /// Ring length along `m1`; chosen from the packet width when absent.
    pub ring: Option<usize>,
    /// Initial spinor in the cone frame.
    pub spinor: [f64; 2],
}

impl Default for WavepacketConfig {
    fn default() -> Self {
        WavepacketConfig {
            sigma_scale: 1.0,
            horizon: 1.0,
            samples: 8,
            ring: None,
            spinor: [1.0, 0.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavepacketReport {
    pub delta: f64,
    pub width: usize,
    pub ring: usize,
    /// Number of `m1` Fourier modes carrying the packet.
    pub modes: usize,
    pub cone_location: [f64; 3],
    pub energy: f64,
    pub times: Vec<f64>,
    pub rescaled_times: Vec<f64>,
    /// Relative L2 distance between the projected lattice state and the Dirac solution.
    pub deviation: Vec<f64>,
    /// Largest `| |psi(t)| - |psi(0)| |`.
    pub norm_drift: f64,
    /// Largest mass found in the boundary rows.
    pub boundary_mass: f64,
}

/// Eigen-decomposed Hermitian generator for exact exponentials `exp(i t A)`.
struct Propagator {
    values: DVector<f64>,
    vectors: DMatrix<C64>,
}

impl Propagator {
    fn new(a: &HermitianMatrix) -> Result<Self> {
        let s = a.eigensystem()?;
        Ok(Propagator {
            values: s.values,
            vectors: s.vectors,
        })
    }

    /// Coefficients of `v` in the eigenbasis.
    fn coefficients(&self, v: &DVector<C64>) -> DVector<C64> {
        self.vectors.adjoint() * v
    }

    fn evolve(&self, coeffs: &DVector<C64>, t: f64) -> DVector<C64> {
        let phased = DVector::from_fn(coeffs.len(), |i, _| coeffs[i] * C64::from_polar(1.0, t * self.values[i]));
        &self.vectors * phased
    }
}

/// Unitary DFT of a sampled profile on a ring of `l` sites: `c_j = l^{-1/2} sum_m g_m e^{-2 pi i j m / l}`.
fn ring_dft(g: &[f64]) -> Vec<C64> {
    let l = g.len();
    let norm = 1.0 / (l as f64).sqrt();
    (0..l)
        .map(|j| {
            g.iter()
                .enumerate()
                .map(|(m, &v)| C64::from_polar(v, -TAU * (j * m % l) as f64 / l as f64))
                .sum::<C64>()
                * norm
        })
        .collect()
}

/// Signed Fourier index in `(-l/2, l/2]`.
fn signed_index(j: usize, l: usize) -> f64 {
    if 2 * j > l {
        j as f64 - l as f64
    } else {
        j as f64
    }
}

fn gaussian(x: f64, sigma: f64) -> f64 {
    (-0.5 * (x / sigma).powi(2)).exp()
}

/// Smallest width admitting both the wall and a packet of width `sigma_scale` at rate `delta`.
pub fn packet_width(delta: f64, sigma_scale: f64) -> usize {
    let wall = (MIN_WALL_SPAN / delta).ceil() as usize;
    let packet = (12.0 * sigma_scale / delta.sqrt()).ceil() as usize + 3;
    wall.max(packet)
}

/// Evolves a wall wavepacket on the cylinder and compares it with the Dirac model of `cone`.
pub fn wavepacket_compare(cyl: &CylinderOperator, cone: &ConeData, cfg: &WavepacketConfig) -> Result<WavepacketReport> {
    let h = cyl.homotopy();
    let bands = h.h0().bands();
    if cone.band != h.band_index() {
        return Err(Error::Input(format!(
            "cone belongs to band {} but the homotopy tracks band {}",
            cone.band,
            h.band_index()
        )));
    }
    let [s0, xi01, xi02] = cone.location;
    if !(s0 > 0.0 && s0 < 1.0) {
        return Err(Error::Input(format!("cone at s = {s0} is not interior")));
    }
    if !(cfg.sigma_scale > 0.0 && cfg.horizon > 0.0) || cfg.samples == 0 {
        return Err(Error::Input("sigma_scale, horizon and samples must be positive".into()));
    }
    let sq = cyl.delta.sqrt();
    let width = cyl.width;
    let center = cyl.row_of(s0);
    let reach_rows = 6.0 * cfg.sigma_scale / sq;
    if center - reach_rows < 0.0 || center + reach_rows > width as f64 - 1.0 {
        return Err(Error::Input(format!(
            "packet of {reach_rows:.1} rows around row {center:.1} does not fit in width {width}"
        )));
    }
    let ring = cfg
        .ring
        .unwrap_or_else(|| (64usize).max(2 * (6.0 * cfg.sigma_scale / sq).ceil() as usize));
    let x2: Vec<f64> = (0..width).map(|m| sq * (m as f64 - center)).collect();
    let x1: Vec<f64> = (0..ring).map(|m| sq * (m as f64 - 0.5 * ring as f64)).collect();
    let g1: Vec<f64> = x1.iter().map(|&x| gaussian(x, cfg.sigma_scale)).collect();
    let g2: Vec<f64> = x2.iter().map(|&x| gaussian(x, cfg.sigma_scale)).collect();
    let spin_norm = cfg.spinor[0].hypot(cfg.spinor[1]);
    if spin_norm == 0.0 {
        return Err(Error::Input("initial spinor is zero".into()));
    }
    let total: f64 = g1.iter().map(|v| v * v).sum::<f64>() * g2.iter().map(|v| v * v).sum::<f64>();
    let scale = 1.0 / (total.sqrt() * spin_norm);
    let spinor = [cfg.spinor[0] * scale, cfg.spinor[1] * scale];
    let coeffs = ring_dft(&g1);
    let modes: Vec<(usize, C64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() * scale * scale > 1e-18)
        .map(|(j, &c)| (j, c))
        .collect();

    let frame = cone.frame_matrix();
    let dirac = DiracModel::from(cone);
    let p = spectral_momentum(width, sq);
    let times: Vec<f64> = (0..=cfg.samples)
        .map(|i| cfg.horizon / sq * i as f64 / cfg.samples as f64)
        .collect();
    let layer = (width / 20).max(2);
    let carrier: Vec<C64> = (0..width).map(|m| C64::from_polar(1.0, xi02 * m as f64)).collect();

    // per mode and time: (|diff|^2, |beta|^2, |psi|^2, boundary mass)
    let per_mode: Vec<Result<Vec<[f64; 4]>>> = modes
        .par_iter()
        .map(|&(j, cj)| {
            let jj = signed_index(j, ring);
            let k1 = xi01 + TAU * jj / ring as f64;
            let eta = TAU * jj / (ring as f64 * sq);
            let lattice = Propagator::new(&cyl.block(k1))?;
            let line = Propagator::new(&dirac.line_operator(eta, &x2, &p))?;
            let mut psi0 = DVector::<C64>::zeros(bands * width);
            let mut beta0 = DVector::<C64>::zeros(2 * width);
            for m in 0..width {
                for (i, &a) in spinor.iter().enumerate() {
                    let amp = cj * g2[m] * a;
                    beta0[2 * m + i] = amp;
                    for b in 0..bands {
                        psi0[m * bands + b] += carrier[m] * frame[(b, i)] * amp;
                    }
                }
            }
            let cl = lattice.coefficients(&psi0);
            let cd = line.coefficients(&beta0);
            Ok(times
                .iter()
                .map(|&t| {
                    let psi = lattice.evolve(&cl, t);
                    let beta = line.evolve(&cd, sq * t);
                    let phase = C64::from_polar(1.0, -cone.energy * t);
                    let mut acc = [0.0; 4];
                    for m in 0..width {
                        let mut mass = 0.0;
                        for i in 0..2 {
                            let mut proj = c(0.0, 0.0);
                            for b in 0..bands {
                                proj += frame[(b, i)].conj() * psi[m * bands + b];
                            }
                            proj *= carrier[m].conj() * phase;
                            acc[0] += (proj - beta[2 * m + i]).norm_sqr();
                            acc[1] += beta[2 * m + i].norm_sqr();
                        }
                        for b in 0..bands {
                            mass += psi[m * bands + b].norm_sqr();
                        }
                        acc[2] += mass;
                        if m < layer || m >= width - layer {
                            acc[3] += mass;
                        }
                    }
                    acc
                })
                .collect())
        })
        .collect();
    let mut sums = vec![[0.0f64; 4]; times.len()];
    for mode in per_mode {
        for (s, a) in sums.iter_mut().zip(mode?) {
            for i in 0..4 {
                s[i] += a[i];
            }
        }
    }
    let norm0 = sums[0][2].sqrt();
    let mut deviation = Vec::with_capacity(times.len());
    let mut norm_drift: f64 = 0.0;
    let mut boundary_mass: f64 = 0.0;
    for (s, &t) in sums.iter().zip(&times) {
        let rel_mass = s[3] / s[2];
        if rel_mass >= ESCAPE_MASS {
            return Err(Error::PacketEscape { time: t, mass: rel_mass });
        }
        boundary_mass = boundary_mass.max(rel_mass);
        norm_drift = norm_drift.max((s[2].sqrt() - norm0).abs());
        deviation.push((s[0] / s[1]).sqrt());
    }
    Ok(WavepacketReport {
        delta: cyl.delta,
        width,
        ring,
        modes: modes.len(),
        cone_location: cone.location,
        energy: cone.energy,
        rescaled_times: times.iter().map(|t| sq * t).collect(),
        times,
        deviation,
        norm_drift,
        boundary_mass,
    })
}

/// Zero mode of the `eta1 = 0` line operator localized near `x2 = 0`.
///
/// The periodic grid carries a second, antiwall zero mode at the wrap-around;
/// the near-zero eigenspace is rotated to maximize the weight in the central half.
fn wall_zero_mode(model: &DiracModel, x2: &[f64], p: &DMatrix<C64>) -> Result<DVector<C64>> {
    let zero = model.line_operator(0.0, x2, p).eigensystem()?;
    let mut order: Vec<usize> = (0..zero.dim()).collect();
    order.sort_by(|&a, &b| zero.values[a].abs().total_cmp(&zero.values[b].abs()));
    let basis = DMatrix::from_fn(zero.dim(), 2, |i, j| zero.vectors[(i, order[j])]);
    let half = 0.5 * x2.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let central = DMatrix::from_fn(zero.dim(), zero.dim(), |i, j| {
        if i == j && x2[i / 2].abs() < half {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let reduced = HermitianMatrix::symmetrized(basis.adjoint() * central * &basis).eigensystem()?;
    Ok(&basis * reduced.vectors.column(1))
}

/// Drift of `<x1>` over rescaled time `tau` for a Dirac packet built on the wall zero mode.
///
/// The packet is `g(x1) phi0(x2)` with `phi0` the eigenvector of the `eta1 = 0`
/// line operator closest to zero energy; `x1` lives on a ring of `ring` points
/// with spacing `spacing`, and `x2` on `x2`.
pub fn dirac_packet_drift(
    model: &DiracModel,
    x2: &[f64],
    ring: usize,
    spacing: f64,
    sigma: f64,
    tau: f64,
) -> Result<f64> {
    let n = x2.len();
    let h2 = if n > 1 { x2[1] - x2[0] } else { 1.0 };
    let p = spectral_momentum(n, h2);
    let phi0 = wall_zero_mode(model, x2, &p)?;
    let x1: Vec<f64> = (0..ring).map(|m| spacing * (m as f64 - 0.5 * ring as f64)).collect();
    let g: Vec<f64> = x1.iter().map(|&x| gaussian(x, sigma)).collect();
    let coeffs = ring_dft(&g);
    let period = spacing * ring as f64;
    // circular mean of x1 from the Fourier amplitudes: <e^{2 pi i x1 / P}> = sum_j conj(c_{j+1}) c_j
    let mean = |amps: &[DVector<C64>]| -> f64 {
        let mut z = c(0.0, 0.0);
        for j in 0..ring {
            let jn = (j + 1) % ring;
            z += amps[jn].dotc(&amps[j]);
        }
        z.arg() * period / TAU
    };
    let evolved: Vec<Result<(DVector<C64>, DVector<C64>)>> = (0..ring)
        .into_par_iter()
        .map(|j| {
            let eta = TAU * signed_index(j, ring) / period;
            let start = phi0.clone() * coeffs[j];
            let prop = Propagator::new(&model.line_operator(eta, x2, &p))?;
            let end = prop.evolve(&prop.coefficients(&start), tau);
            Ok((start, end))
        })
        .collect();
    let evolved = evolved.into_iter().collect::<Result<Vec<_>>>()?;
    let start: Vec<DVector<C64>> = evolved.iter().map(|e| e.0.clone()).collect();
    let end: Vec<DVector<C64>> = evolved.into_iter().map(|e| e.1).collect();
    let mut drift = mean(&end) - mean(&start);
    drift -= period * (drift / period).round();
    Ok(drift)
}
