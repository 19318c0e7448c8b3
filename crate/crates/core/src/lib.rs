//! Detection and classification of band crossings in three-parameter
//! Hermitian families, with Chern-number bookkeeping across homotopies and
//! an adiabatic domain-wall model.
//!
//! Pipeline: build a [`model::Family`], locate crossings with
//! [`scan::scan`], classify them, extract cone data with
//! [`cone::analyze_cone`], and compare chirality sums with Chern jumps via
//! [`chern::chern_profile`].

pub mod error;
pub mod hermitian;
pub mod model;
pub mod scan;
pub mod cone;
pub mod chern;
pub mod genericity;
pub mod adiabatic;
pub mod conventions;

pub use error::{Error, Result};
pub use hermitian::{
    discriminant, spectral_projector, two_band_window, HermitianMatrix, Spectrum, TwoBandWindow,
};
