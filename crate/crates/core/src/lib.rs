//! Pseudo-spectral tools for the generalized Davey-Stewartson equation
//!
//! `i phi_t + Delta phi + |phi|^{p-1} phi + E_1(|phi|^2) phi = 0` on `R^2`,
//!
//! where `E_1` has Fourier symbol `xi_1^2 / |xi|^2`: sharp Gagliardo-Nirenberg
//! constant, ground states, their linearization, split-step evolution and
//! multi-soliton constructions by backward integration.

pub mod eigen;
pub mod error;
pub mod evolution;
pub mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod ground_state;
pub mod linalg;
pub mod model;
pub mod multisoliton;
pub mod nonlocal;
pub mod par;
pub mod random;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
pub use field::ComplexField;
pub use grid::Grid2D;
pub use model::{dilate, functionals, scaling_check, FunctionalReport, Model, ScalingCheck};
pub use nonlocal::{apply_e1_poisson, apply_ej, apply_multiplier_ej, NonlocalKind};
pub use spectral::{h1_distance, h1_norm};
