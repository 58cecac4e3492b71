//! Manipulations of spectral data: eigenvalue counting, paired
//! orthonormalization, observability constants, dual test functions and
//! spectral Sobolev norms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ComplexField, GridField};
use crate::spectral::dataset::{SpectralDataset, SpectralEntry};
use crate::spectral::eigen::EigenSystem;
use crate::torus::ObservationSet;

/// Relative tolerance for grouping equal eigenvalues.
pub const MULTIPLICITY_TOL: f64 = 1e-8;

/// `#{k : μ_k ≤ μ}` over the stored eigenvalues; `μ` may not exceed `μ_K`.
pub fn weyl_count(sys: &EigenSystem, mu: f64) -> Result<usize> {
    let top = *sys.eigenvalues().last().ok_or_else(|| Error::InvalidInput("empty eigensystem".into()))?;
    if mu > top && !sys.is_complete() {
        return Err(Error::InvalidInput(format!("μ = {mu} exceeds the largest stored eigenvalue {top}")));
    }
    Ok(sys.eigenvalues().partition_point(|&v| v <= mu))
}

/// Result of orthonormalizing the global family behind a dataset and
/// transporting the same triangular transform to a partner dataset.
#[derive(Debug, Clone)]
pub struct PairedOrthonormalization {
    /// Orthonormal global functions (columns), one per dataset entry.
    pub global: DMatrix<Complex64>,
    /// Upper-triangular `T` with `orthonormal = family · T`.
    pub transform: DMatrix<Complex64>,
    pub first: SpectralDataset,
    pub second: SpectralDataset,
}

/// Gram–Schmidt on the global eigenfunctions behind `ds1` (lifted through
/// `full1`), with the identical column operations applied to `ds2`.
pub fn pair_gram_schmidt(
    ds1: &SpectralDataset,
    ds2: &SpectralDataset,
    full1: &EigenSystem,
    eig_tol: f64,
) -> Result<PairedOrthonormalization> {
    if ds1.len() != ds2.len() {
        return Err(Error::InvalidInput("paired datasets must have equal length".into()));
    }
    if ds1.observation.len() != ds2.observation.len() {
        return Err(Error::InvalidInput("paired datasets observe different cell counts".into()));
    }
    for (a, b) in ds1.entries.iter().zip(&ds2.entries) {
        if (a.eigenvalue - b.eigenvalue).abs() > eig_tol * (1.0 + a.eigenvalue.abs()) {
            return Err(Error::InvalidInput(format!(
                "eigenvalues {} and {} differ beyond tolerance",
                a.eigenvalue, b.eigenvalue
            )));
        }
    }
    let family = lift_to_global(ds1, full1)?;
    let h2 = full1.grid().cell_area();
    let k = family.ncols();

    // Modified Gram–Schmidt, accumulating the triangular transform.
    let mut q = family.clone();
    let mut t = DMatrix::<Complex64>::identity(k, k);
    for j in 0..k {
        for i in 0..j {
            let proj = q.column(i).dotc(&q.column(j)) * h2;
            let qi = q.column(i).into_owned();
            q.column_mut(j).axpy(-proj, &qi, Complex64::new(1.0, 0.0));
            let ti = t.column(i).into_owned();
            t.column_mut(j).axpy(-proj, &ti, Complex64::new(1.0, 0.0));
        }
        let norm = (q.column(j).norm_squared() * h2).sqrt();
        let reference = (family.column(j).norm_squared() * h2).sqrt();
        if !(norm > 1e-12 * reference) {
            return Err(Error::Singular {
                what: format!("global family is rank deficient at entry {j}"),
                sigma: norm,
            });
        }
        let inv = Complex64::new(1.0 / norm, 0.0);
        q.column_mut(j).scale_mut(1.0 / norm);
        t.column_mut(j).scale_mut(inv.re);
    }

    let transform_dataset = |ds: &SpectralDataset| -> SpectralDataset {
        let r = DMatrix::from_fn(ds.observation.len(), k, |i, c| ds.entries[c].restriction[i]);
        let out = r * &t;
        SpectralDataset {
            entries: ds
                .entries
                .iter()
                .enumerate()
                .map(|(c, e)| SpectralEntry {
                    index: e.index,
                    eigenvalue: e.eigenvalue,
                    restriction: out.column(c).iter().copied().collect(),
                })
                .collect(),
            observation: ds.observation.clone(),
            orthonormalized: true,
        }
    };
    Ok(PairedOrthonormalization {
        global: q,
        transform: t.clone(),
        first: transform_dataset(ds1),
        second: transform_dataset(ds2),
    })
}

/// Global function behind each dataset entry: the unique member of the
/// matching eigenspace of `full` whose restriction reproduces the entry.
pub fn lift_to_global(ds: &SpectralDataset, full: &EigenSystem) -> Result<DMatrix<Complex64>> {
    let o = &ds.observation;
    let n = full.grid().cell_count();
    let mut out = DMatrix::<Complex64>::zeros(n, ds.len());
    for (c, e) in ds.entries.iter().enumerate() {
        let group: Vec<usize> = (0..full.len())
            .filter(|&k| (full.eigenvalue(k) - e.eigenvalue).abs() <= MULTIPLICITY_TOL * (1.0 + e.eigenvalue.abs()))
            .collect();
        if group.is_empty() {
            return Err(Error::InvalidInput(format!("no eigenvalue of the full system matches {}", e.eigenvalue)));
        }
        let basis = DMatrix::from_fn(o.len(), group.len(), |i, j| {
            Complex64::new(full.vectors()[(o.cells()[i], group[j])], 0.0)
        });
        let rhs = DVector::from_column_slice(&e.restriction);
        let svd = basis.clone().svd(true, true);
        let coeffs = svd.solve(&rhs, 1e-13).map_err(|m| Error::InvalidInput(m.to_string()))?;
        let fit = &basis * &coeffs;
        let miss = (&fit - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
        if miss > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "entry {} is not the restriction of an eigenfunction (relative miss {miss:.2e})",
                e.index
            )));
        }
        for (j, &k) in group.iter().enumerate() {
            let col = full.vectors().column(k);
            for r in 0..n {
                out[(r, c)] += coeffs[j] * col[r];
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenspaceObservability {
    pub indices: Vec<usize>,
    pub eigenvalue: f64,
    pub sigma_min: f64,
    pub constant: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservabilityReport {
    pub per_eigenspace: Vec<EigenspaceObservability>,
    pub overall: f64,
    /// Number of leading eigenpairs covered; the estimate says nothing
    /// about modes beyond this prefix.
    pub tested_modes: usize,
}

/// Smallest `C` with `‖φ‖ ≤ C ‖φ|_O‖` for every eigenfunction among the
/// first `k` modes, eigenspace by eigenspace.
pub fn observability_constants(sys: &EigenSystem, o: &ObservationSet, k: usize) -> Result<ObservabilityReport> {
    if k == 0 || k > sys.len() {
        return Err(Error::InvalidInput(format!("k = {k} outside 1..={}", sys.len())));
    }
    let h = sys.grid().spacing();
    let mut groups = sys.eigenspaces(sys.len(), MULTIPLICITY_TOL);
    groups.retain(|g| g[0] < k);
    let mut per = Vec::with_capacity(groups.len());
    for g in groups {
        let m = DMatrix::from_fn(o.len(), g.len(), |i, j| sys.vectors()[(o.cells()[i], g[j])] * h);
        let sigma = m.singular_values().iter().copied().fold(f64::INFINITY, f64::min);
        if !(sigma > 1e-14) {
            return Err(Error::Singular {
                what: format!("eigenspace at μ = {} is numerically unobservable", sys.eigenvalue(g[0])),
                sigma,
            });
        }
        per.push(EigenspaceObservability {
            eigenvalue: sys.eigenvalue(g[0]),
            indices: g,
            sigma_min: sigma,
            constant: 1.0 / sigma,
        });
    }
    let overall = per.iter().map(|e| e.constant).fold(0.0, f64::max);
    let tested_modes = per.iter().map(|e| e.indices.len()).sum();
    Ok(ObservabilityReport {
        per_eigenspace: per,
        overall,
        tested_modes,
    })
}

/// Minimum-norm `θ` supported in `O` with `(θ, ψ_k)_{L²(O)} = c_k`, where
/// `(a, b) = h² Σ a conj(b)`.
pub fn dual_test_function(ds: &SpectralDataset, c: &[Complex64]) -> Result<ComplexField> {
    if c.len() != ds.len() {
        return Err(Error::InvalidInput("one target value per dataset entry required".into()));
    }
    let o = &ds.observation;
    let grid = *o.grid();
    let mut theta = ComplexField::zeros(grid);
    if ds.is_empty() {
        return Ok(theta);
    }
    let h2 = grid.cell_area();
    let k = ds.len();
    // θ = Σ_j a_j ψ_j with (ψ_j, ψ_k) a_j summed = c_k.
    let gram = DMatrix::from_fn(k, k, |row, col| {
        ds.entries[col]
            .restriction
            .iter()
            .zip(&ds.entries[row].restriction)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * h2
    });
    let sigma = ds.sigma_min();
    if !(sigma > 1e-12) {
        return Err(Error::Singular {
            what: "dataset Gram matrix".into(),
            sigma,
        });
    }
    let rhs = DVector::from_column_slice(c);
    let a = gram
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular {
            what: "dataset Gram matrix".into(),
            sigma,
        })?;
    let vals = theta.values_mut();
    for (j, e) in ds.entries.iter().enumerate() {
        for (i, &cell) in o.cells().iter().enumerate() {
            vals[cell] += a[j] * e.restriction[i];
        }
    }
    Ok(theta)
}

/// `(Σ_k (μ_k + τ)^s |⟨u, φ_k⟩|²)^{1/2}` over the stored modes.
pub fn sobolev_norm(sys: &EigenSystem, u: &GridField, s: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::InvalidInput("Sobolev order must be nonnegative".into()));
    }
    let tau = sys.shift();
    let coeffs = sys.coefficients(u);
    Ok(coeffs
        .iter()
        .zip(sys.eigenvalues())
        .map(|(c, mu)| (mu + tau).powf(s) * c * c)
        .sum::<f64>()
        .sqrt())
}
