//! Initial data from extracted residues and a recovered eigensystem.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::ModeEstimate;
use crate::field::GridField;
use crate::spectral::eigen::EigenSystem;
use crate::torus::ObservationSet;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitialEstimate {
    /// `Σ Re(ĉ_k) φ_k` on the whole grid.
    pub field: Vec<f64>,
    /// `ĉ_k` for every mode of the eigensystem; zero where unobserved.
    pub coefficients: Vec<Complex64>,
    /// Eigensystem modes assigned to each residue (empty when unmatched).
    pub assignments: Vec<Vec<usize>>,
    /// Eigensystem modes no residue was assigned to.
    pub unobserved_modes: usize,
}

impl InitialEstimate {
    pub fn to_field(&self, sys: &EigenSystem) -> GridField {
        GridField::from_values(*sys.grid(), self.field.clone()).expect("field matches grid")
    }
}

fn from_residues(residues: &[(f64, &[Complex64])], sys: &EigenSystem, o: &ObservationSet, eig_tol: f64) -> Result<InitialEstimate> {
    if o.grid() != sys.grid() {
        return Err(Error::InvalidInput("observation set and eigensystem grids differ".into()));
    }
    let mut coefficients = vec![Complex64::default(); sys.len()];
    let mut assignments = Vec::with_capacity(residues.len());
    for &(mu, r) in residues {
        if r.len() != o.len() {
            return Err(Error::InvalidInput("residue length does not match O".into()));
        }
        let cluster: Vec<usize> = (0..sys.len())
            .filter(|&i| (sys.eigenvalue(i) - mu).abs() <= eig_tol * (1.0 + mu.abs()))
            .collect();
        if !cluster.is_empty() {
            // Least squares r ≈ Σ_{i ∈ cluster} c_i φ_i|_O.
            let a = DMatrix::from_fn(o.len(), cluster.len(), |row, col| {
                Complex64::new(sys.vectors()[(o.cells()[row], cluster[col])], 0.0)
            });
            let c = a
                .svd(true, true)
                .solve(&DVector::from_column_slice(r), 1e-12)
                .map_err(|e| Error::NoResult(e.to_string()))?;
            for (&i, v) in cluster.iter().zip(c.iter()) {
                coefficients[i] += v;
            }
        }
        assignments.push(cluster);
    }
    let real: Vec<f64> = coefficients.iter().map(|c| c.re).collect();
    let field = sys.synthesize(&real).into_values();
    let unobserved_modes = coefficients.iter().filter(|c| c.norm() == 0.0).count();
    Ok(InitialEstimate {
        field,
        coefficients,
        assignments,
        unobserved_modes,
    })
}

/// `ĉ_k = ⟨r_k, φ_k|_O⟩ / ‖φ_k|_O‖²` from heat residues `r_k = ⟨f, φ_k⟩ φ_k|_O`.
pub fn recover_initial_heat(modes: &[ModeEstimate], sys: &EigenSystem, o: &ObservationSet, eig_tol: f64) -> Result<InitialEstimate> {
    let residues: Vec<(f64, &[Complex64])> = modes.iter().map(|m| (m.eigenvalue, m.residue.as_slice())).collect();
    from_residues(&residues, sys, o, eig_tol)
}

/// Position and velocity estimates from the split wave residues.
pub fn recover_initial_wave(
    modes: &[ModeEstimate],
    sys: &EigenSystem,
    o: &ObservationSet,
    eig_tol: f64,
) -> Result<(InitialEstimate, InitialEstimate)> {
    let f: Vec<(f64, &[Complex64])> = modes.iter().map(|m| (m.eigenvalue, m.residue.as_slice())).collect();
    let h = modes
        .iter()
        .map(|m| {
            m.residue_h
                .as_deref()
                .map(|r| (m.eigenvalue, r))
                .ok_or_else(|| Error::InvalidInput("wave modes need velocity residues".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((from_residues(&f, sys, o, eig_tol)?, from_residues(&h, sys, o, eig_tol)?))
}
