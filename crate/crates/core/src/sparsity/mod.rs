//! Sparse eigenvalue collections, their Γ-sets, Fourier interpolation on
//! intervals, and the synthesis map over sparse eigenfunction families.

pub mod frame;
pub mod gamma;
pub mod interp;
pub mod spectrum;

pub use frame::{frame_bounds, membership_test, Membership};
pub use gamma::{
    default_windows, gamma_set, is_lambda_sparse, select_sparse_subsequence, uniform_gap, upper_uniform_density,
    GammaSet, SparseSelection, SparsityReport, SparsityVerdict,
};
pub use interp::{bandlimited_interpolant, Interpolant};
pub use spectrum::{lattice_count, FlatTorusSpectrum, Spectrum};
