//! JSON model files.
//!
//! A file holds either a tagged model (`"kind"`: `homotopy`, `torus` or
//! `chart`) or a bare hopping set. A bare set with `dim_k = 2` is read as a
//! constant homotopy and one with `dim_k = 3` as a torus family.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::homotopy::HomotopyRepr;
use super::hopping::HoppingSetRepr;
use super::{Family, Homotopy, HoppingSet, PolyFamily, Schedule, TorusFamily};
use crate::error::{Error, Result};
use crate::hermitian::check_band;

/// A loaded model: a family together with the band pair under study.
#[derive(Clone, Debug)]
pub enum Model {
    Homotopy(Arc<Homotopy>),
    Torus {
        family: Arc<TorusFamily>,
        band_index: usize,
    },
    Chart {
        family: Arc<PolyFamily>,
        band_index: usize,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Tagged {
    Homotopy(HomotopyRepr),
    Torus {
        band_index: usize,
        hoppings: HoppingSet,
    },
    Chart {
        band_index: usize,
        family: PolyFamily,
    },
}

impl Model {
    pub fn family(&self) -> Arc<dyn Family> {
        match self {
            Model::Homotopy(h) => h.clone(),
            Model::Torus { family, .. } => family.clone(),
            Model::Chart { family, .. } => family.clone(),
        }
    }

    pub fn band_index(&self) -> usize {
        match self {
            Model::Homotopy(h) => h.band_index(),
            Model::Torus { band_index, .. } | Model::Chart { band_index, .. } => *band_index,
        }
    }

    pub fn homotopy(&self) -> Option<&Homotopy> {
        match self {
            Model::Homotopy(h) => Some(h),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Homotopy(_) => "homotopy",
            Model::Torus { .. } => "torus",
            Model::Chart { .. } => "chart",
        }
    }

    pub fn from_json(value: Value) -> Result<Self> {
        if value.get("kind").is_some() {
            let tagged: Tagged = serde_json::from_value(value)?;
            return match tagged {
                Tagged::Homotopy(r) => Ok(Model::Homotopy(Arc::new(Homotopy::new(
                    r.h0,
                    r.h1,
                    r.schedule,
                    r.band_index,
                )?))),
                Tagged::Torus {
                    band_index,
                    hoppings,
                } => {
                    check_band(band_index, hoppings.bands())?;
                    Ok(Model::Torus {
                        family: Arc::new(TorusFamily::new(hoppings)?),
                        band_index,
                    })
                }
                Tagged::Chart { band_index, family } => {
                    check_band(band_index, family.bands())?;
                    Ok(Model::Chart {
                        family: Arc::new(family),
                        band_index,
                    })
                }
            };
        }
        let repr: HoppingSetRepr = serde_json::from_value(value)?;
        let set = HoppingSet::from_repr(repr)?;
        let band_index = (set.bands() / 2).max(1);
        match set.dim_k() {
            2 => Ok(Model::Homotopy(Arc::new(Homotopy::new(
                set.clone(),
                set,
                Schedule::linear(),
                band_index,
            )?))),
            3 => Ok(Model::Torus {
                family: Arc::new(TorusFamily::new(set)?),
                band_index,
            }),
            d => Err(Error::Input(format!(
                "a bare hopping set with dim_k = {d} is not a three-parameter family"
            ))),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> Value {
        let tagged = match self {
            Model::Homotopy(h) => Tagged::Homotopy(h.to_repr()),
            Model::Torus { family, band_index } => Tagged::Torus {
                band_index: *band_index,
                hoppings: family.hoppings().clone(),
            },
            Model::Chart { family, band_index } => Tagged::Chart {
                band_index: *band_index,
                family: (**family).clone(),
            },
        };
        serde_json::to_value(tagged).expect("model serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}
