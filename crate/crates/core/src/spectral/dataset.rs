//! Partial spectral data: eigenvalues with eigenfunction values on `O`,
//! carrying no global normalization.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::eigen::EigenSystem;
use crate::torus::ObservationSet;

/// Minimum singular value accepted by [`restrict`].
pub const RESTRICTION_SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEntry {
    /// Zero-based index of the eigenpair in the source ordering.
    pub index: usize,
    pub eigenvalue: f64,
    /// Values on the observed cells, in row-major order of the mask.
    pub restriction: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDataset {
    pub entries: Vec<SpectralEntry>,
    pub observation: ObservationSet,
    pub orthonormalized: bool,
}

impl SpectralDataset {
    pub fn new(observation: ObservationSet, entries: Vec<SpectralEntry>, orthonormalized: bool) -> Result<Self> {
        for e in &entries {
            if e.restriction.len() != observation.len() {
                return Err(Error::InvalidInput(format!(
                    "entry {} has {} values for {} observed cells",
                    e.index,
                    e.restriction.len(),
                    observation.len()
                )));
            }
        }
        if entries.windows(2).any(|w| w[1].eigenvalue < w[0].eigenvalue) {
            return Err(Error::InvalidInput("dataset eigenvalues must be nondecreasing".into()));
        }
        Ok(Self {
            entries,
            observation,
            orthonormalized,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.eigenvalue).collect()
    }

    /// Measure-weighted restriction matrix `h · [ψ_1|_O … ψ_K|_O]`.
    pub fn weighted_matrix(&self) -> DMatrix<Complex64> {
        let h = self.observation.grid().spacing();
        let rows = self.observation.len();
        DMatrix::from_fn(rows, self.len(), |i, k| self.entries[k].restriction[i] * h)
    }

    /// Gram matrix `⟨ψ_j|_O, ψ_k|_O⟩_{L²(O)}`.
    pub fn gram(&self) -> DMatrix<Complex64> {
        let m = self.weighted_matrix();
        m.ad_mul(&m)
    }

    /// Smallest singular value of the weighted restriction matrix.
    pub fn sigma_min(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.weighted_matrix()
            .singular_values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Restrict the selected eigenfunctions to `O`.
pub fn restrict(sys: &EigenSystem, o: &ObservationSet, indices: &[usize]) -> Result<SpectralDataset> {
    if o.grid() != sys.grid() {
        return Err(Error::InvalidInput("observation set and eigensystem grids differ".into()));
    }
    if indices.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("indices must be strictly increasing".into()));
    }
    if let Some(&bad) = indices.iter().find(|&&k| k >= sys.len()) {
        return Err(Error::InvalidInput(format!("index {bad} outside eigensystem of size {}", sys.len())));
    }
    let entries = indices
        .iter()
        .map(|&k| SpectralEntry {
            index: k,
            eigenvalue: sys.eigenvalue(k),
            restriction: sys.restricted(k, o).into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        })
        .collect();
    let ds = SpectralDataset::new(o.clone(), entries, o.len() == o.grid().cell_count())?;
    if !ds.is_empty() {
        let sigma = ds.sigma_min();
        if !(sigma > RESTRICTION_SIGMA_FLOOR) {
            return Err(Error::Singular {
                what: "restricted eigenfunctions; O too small for these modes at this resolution".into(),
                sigma,
            });
        }
    }
    Ok(ds)
}

/// Multiply restriction `k` by `scalars[k]`; eigenvalues are untouched.
pub fn scale_dataset(ds: &SpectralDataset, scalars: &[Complex64]) -> Result<SpectralDataset> {
    if scalars.len() != ds.len() {
        return Err(Error::InvalidInput("one scalar per entry required".into()));
    }
    if scalars.iter().any(|s| s.norm() == 0.0) {
        return Err(Error::InvalidInput("scalars must be nonzero".into()));
    }
    let entries = ds
        .entries
        .iter()
        .zip(scalars)
        .map(|(e, &s)| SpectralEntry {
            index: e.index,
            eigenvalue: e.eigenvalue,
            restriction: e.restriction.iter().map(|v| v * s).collect(),
        })
        .collect();
    let all_one = scalars.iter().all(|s| *s == Complex64::new(1.0, 0.0));
    Ok(SpectralDataset {
        entries,
        observation: ds.observation.clone(),
        orthonormalized: ds.orthonormalized && all_one,
    })
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    index: usize,
    eigenvalue: f64,
    /// Little-endian f64 values, interleaved re/im.
    restriction: String,
}

#[derive(Serialize, Deserialize)]
struct DatasetRecord {
    observation: ObservationSet,
    entries: Vec<EntryRecord>,
    orthonormalized: bool,
}

pub fn encode_complex(values: &[Complex64]) -> String {
    let mut bytes = Vec::with_capacity(values.len() * 16);
    for v in values {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    B64.encode(bytes)
}

pub fn decode_complex(text: &str) -> Result<Vec<Complex64>> {
    let bytes = B64.decode(text).map_err(|e| Error::Format(e.to_string()))?;
    if bytes.len() % 16 != 0 {
        return Err(Error::Format("complex payload length not a multiple of 16 bytes".into()));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect())
}

impl Serialize for SpectralDataset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DatasetRecord {
            observation: self.observation.clone(),
            entries: self
                .entries
                .iter()
                .map(|e| EntryRecord {
                    index: e.index,
                    eigenvalue: e.eigenvalue,
                    restriction: encode_complex(&e.restriction),
                })
                .collect(),
            orthonormalized: self.orthonormalized,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpectralDataset {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rec = DatasetRecord::deserialize(d)?;
        let entries = rec
            .entries
            .into_iter()
            .map(|e| {
                Ok(SpectralEntry {
                    index: e.index,
                    eigenvalue: e.eigenvalue,
                    restriction: decode_complex(&e.restriction)?,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        SpectralDataset::new(rec.observation, entries, rec.orthonormalized).map_err(D::Error::custom)
    }
}
