//! The discrete Schrödinger operator `-Δ_h + V` on the torus grid and the
//! spectral data derived from it.

pub mod analysis;
pub mod basis;
pub mod dataset;
pub mod eigen;
pub mod fourier;
pub mod operator;

pub use analysis::{
    dual_test_function, observability_constants, pair_gram_schmidt, sobolev_norm, weyl_count,
    ObservabilityReport, PairedOrthonormalization,
};
pub use basis::{FourierBasis, ModalBasis};
pub use dataset::{restrict, scale_dataset, SpectralDataset, SpectralEntry};
pub use eigen::{eigensolve, solve_potential, EigenMethod, EigenOptions, EigenSystem};
pub use operator::{assemble_operator, SchrodingerOperator};
