//! The mass-frequency curve, the linearization about a ground state and its
//! spectral signature.

mod coercivity;
mod curve;
mod linearized;

pub use coercivity::{coercivity_probe, CoercivityReport};
pub use curve::{build_curve, build_curve_with_states, curve_sample, native_derivative, CurveSample, OmegaJ, StabilityCurve, SAMPLE_RESIDUAL, SAMPLE_TOL};
pub use linearized::{lambda_minus_routes, linearized_spectrum, rayleigh_lambda_minus, EIGEN_TOL, KernelCheck, LambdaMinus, Linearization, LinearizedPair};
