//! Frozen sign and ordering conventions, embedded in every report.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::builtin;

/// Fixture whose chirality fixes the orientation of `sgn det A0`.
pub const CALIBRATION_FIXTURE: &str = "chart-weyl";

/// Chirality of the calibration fixture under these conventions.
pub const CALIBRATION_CHIRALITY: i32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub pauli_order: String,
    pub coordinate_order: String,
    pub bloch_phase: String,
    pub berry_connection: String,
    pub chirality: String,
    pub spectral_flow: String,
    pub time_evolution: String,
    pub calibration_fixture: String,
    pub calibration_chirality: i32,
    /// SHA-256 of the fixture model JSON followed by its chirality.
    pub calibration_hash: String,
}

impl Conventions {
    pub fn current() -> Self {
        Conventions {
            pauli_order: "sigma0 = I, sigma1 = x, sigma2 = y, sigma3 = z".into(),
            coordinate_order: "homotopy (s, xi1, xi2); torus (xi1, xi2, xi3); chart (x1, x2, x3)".into(),
            bloch_phase: "H(xi) = sum_r T_r exp(i <xi, r>)".into(),
            berry_connection: "A = i <u|du>; lower QWZ band at m = 1 has c1 = -1".into(),
            chirality: "sgn det A0 with A0[k][j] = tr(sigma_k F* dH/dx_j F) / 2".into(),
            spectral_flow: "sum of -sgn(d lambda / d xi1) over wall modes crossing E0".into(),
            time_evolution: "(D_t - H) psi = 0 with D_t = -i d/dt".into(),
            calibration_fixture: CALIBRATION_FIXTURE.into(),
            calibration_chirality: CALIBRATION_CHIRALITY,
            calibration_hash: calibration_hash(),
        }
    }
}

/// Hex SHA-256 of the calibration fixture definition.
pub fn calibration_hash() -> String {
    let model = builtin(CALIBRATION_FIXTURE).expect("calibration fixture is built in");
    let mut hasher = Sha256::new();
    hasher.update(model.to_json().to_string().as_bytes());
    hasher.update(CALIBRATION_CHIRALITY.to_string().as_bytes());
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
