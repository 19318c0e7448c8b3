//! Error taxonomy shared by every stage of the pipeline.

use thiserror::Error;

/// Failure modes of the numerical pipeline.
///
/// Variants carry the location (parameter point, term index, plaquette)
/// needed to reproduce the failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("matrix is not Hermitian: max |A - A*| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("hopping term {term} has no consistent Hermitian partner: {detail}")]
    Hermiticity { term: usize, detail: String },

    #[error("model parse error: {0}")]
    Parse(String),

    #[error("gap closed between bands {band} and {next} at {point:?} (gap {gap:.3e})")]
    GapClosed {
        band: usize,
        next: usize,
        point: Vec<f64>,
        gap: f64,
    },

    #[error("endpoint slice s={s} has a band collision at xi={xi:?}: {lower} vs {upper}")]
    EndpointGap {
        s: f64,
        xi: [f64; 2],
        lower: f64,
        upper: f64,
    },

    #[error("band pair ({band}, {next}) is not isolated: neighbouring gap {gap:.3e}")]
    Isolation { band: usize, next: usize, gap: f64 },

    #[error("refinement stalled at {point:?} with q = {q:.3e} after {iterations} iterations")]
    RefinementStall {
        point: [f64; 3],
        q: f64,
        iterations: usize,
    },

    #[error("point {point:?} is not a conical crossing: {detail}")]
    NotConical { point: [f64; 3], detail: String },

    #[error("frame construction failed: {0}")]
    Frame(String),

    #[error("plaquette flux {flux:.4} at cell {cell:?} exceeds the branch-cut margin at grid {grid}")]
    Plaquette {
        cell: [usize; 2],
        flux: f64,
        grid: usize,
    },

    #[error("Chern estimate did not stabilise: lattice {lattice:.4}, Riemann sum {riemann:.4} at grid {grid}")]
    ChernMismatch {
        lattice: f64,
        riemann: f64,
        grid: usize,
    },

    #[error("no admissible perturbation after {draws} draws")]
    ExhaustedDraws { draws: usize },

    #[error("cylinder range error: hopping reach {reach} needs width > {needed}")]
    Range { reach: i64, needed: i64 },

    #[error("eigenstate tracking ambiguous at xi1 = {xi1:.6} (best overlap {overlap:.3})")]
    Tracking { xi1: f64, overlap: f64 },

    #[error("wavepacket reached the domain boundary at t = {time:.4} (boundary mass {mass:.3e})")]
    PacketEscape { time: f64, mass: f64 },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by an unmet mathematical precondition.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::NotConical { .. }
                | Error::Isolation { .. }
                | Error::EndpointGap { .. }
                | Error::Hermiticity { .. }
                | Error::NotHermitian { .. }
                | Error::Range { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
