//! Spectral data from passive recordings: Laplace transforms, exponential
//! fitting, and matching of datasets across operators.

pub mod laplace;
pub mod matching;
pub mod modes;
pub mod pencil;

pub use laplace::{laplace_samples, LaplaceSample};
pub use matching::{gauge_align, match_datasets, MatchResult};
pub use modes::{
    extract_heat_modes, extract_modes, extract_schrodinger_modes, extract_wave_modes, extract_with,
    to_spectral_dataset, Extraction, ModeEstimate,
};
pub use pencil::{fit_modes, ModeFamily, PencilFit, PencilOptions};
