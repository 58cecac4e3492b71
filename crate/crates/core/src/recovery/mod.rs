//! Recovery of the potential on `O` and on the whole torus, and of the
//! initial data, from extracted spectral data.

pub mod global;
pub mod initial;
pub mod local;
pub mod minres;
pub mod misfit;

pub use global::{recover_potential_global, warm_start, GlobalOptions, RecoveryDiagnostics, RecoveryResult};
pub use initial::{recover_initial_heat, recover_initial_wave, InitialEstimate};
pub use local::{harmonic_fill, recover_potential_on_o, LocalEstimate, DEFAULT_THETA};
pub use misfit::{
    evaluate, misfit_gradient, model_eigensystem, spectral_misfit, MisfitEval, MisfitGradient, MisfitSettings,
};
