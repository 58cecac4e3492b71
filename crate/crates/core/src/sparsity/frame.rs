//! The synthesis map `a ↦ (Σ a_k φ_{d_k})|_U` and range membership.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::eigen::EigenSystem;
use crate::torus::ObservationSet;

/// Relative residual below which a vector counts as in the range.
pub const RANGE_TOL: f64 = 1e-6;

fn synthesis_matrix(sys: &EigenSystem, d: &[usize], u: &ObservationSet) -> Result<DMatrix<f64>> {
    if u.grid() != sys.grid() {
        return Err(Error::InvalidInput("observation set and eigensystem grids differ".into()));
    }
    if d.is_empty() {
        return Err(Error::InvalidInput("index set D is empty".into()));
    }
    if let Some(&bad) = d.iter().find(|&&k| k >= sys.len()) {
        return Err(Error::InvalidInput(format!("index {bad} outside eigensystem of size {}", sys.len())));
    }
    let h = sys.grid().spacing();
    let cells = u.cells();
    let v = sys.vectors();
    Ok(DMatrix::from_fn(cells.len(), d.len(), |i, k| h * v[(cells[i], d[k])]))
}

/// Extreme singular values of the synthesis map in `ℓ² → L²(U)`.
pub fn frame_bounds(sys: &EigenSystem, d: &[usize], u: &ObservationSet) -> Result<(f64, f64)> {
    let a = synthesis_matrix(sys, d, u)?;
    let sv = a.singular_values();
    // Fewer observed cells than modes leaves a kernel.
    let lo = if a.nrows() < a.ncols() { 0.0 } else { sv.min() };
    Ok((lo, sv.max()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Membership {
    pub in_range: bool,
    /// `‖T a − Φ‖ / ‖Φ‖` in `L²(U)`, zero for `Φ = 0`.
    pub residual: f64,
    pub identified_eigenvalue: Option<f64>,
    pub coefficients: Vec<Complex64>,
}

/// Least-squares projection of `phi` onto the range of the synthesis map.
///
/// When `phi` lies in the range and `lambda` matches some `λ_{d_k}` within
/// `eig_tol · max(1, |λ|)`, that eigenvalue is reported.
pub fn membership_test(
    sys: &EigenSystem,
    d: &[usize],
    u: &ObservationSet,
    phi: &[Complex64],
    lambda: f64,
    eig_tol: f64,
) -> Result<Membership> {
    if phi.len() != u.len() {
        return Err(Error::InvalidInput(format!("Φ has {} values for {} cells", phi.len(), u.len())));
    }
    let a = synthesis_matrix(sys, d, u)?;
    let sv = a.clone().singular_values();
    let sigma = if a.nrows() < a.ncols() { 0.0 } else { sv.min() };
    if !(sigma > 1e-10) {
        return Err(Error::Singular {
            what: "synthesis map on U".into(),
            sigma,
        });
    }
    let h = sys.grid().spacing();
    let ac = a.map(|v| Complex64::new(v, 0.0));
    let b = DVector::from_iterator(phi.len(), phi.iter().map(|v| v * h));
    let target = b.norm();
    let coeffs = ac
        .clone()
        .svd(true, true)
        .solve(&b, 0.0)
        .map_err(|e| Error::NoResult(e.to_string()))?;
    let miss = (&ac * &coeffs - &b).norm();
    let residual = if target > 0.0 { miss / target } else { 0.0 };
    let in_range = residual < RANGE_TOL;
    let identified_eigenvalue = if in_range && target > 0.0 {
        d.iter()
            .map(|&k| sys.eigenvalue(k))
            .find(|&mu| (mu - lambda).abs() <= eig_tol * lambda.abs().max(1.0))
    } else {
        None
    };
    Ok(Membership {
        in_range,
        residual,
        identified_eigenvalue,
        coefficients: coeffs.iter().copied().collect(),
    })
}
