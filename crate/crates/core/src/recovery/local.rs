//! Algebraic recovery of the potential on the observation set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::spectral::dataset::SpectralDataset;

/// Default nodal guard.
pub const DEFAULT_THETA: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalEstimate {
    /// Estimate on trusted cells; zero elsewhere.
    pub values: Vec<f64>,
    /// Cells where the estimate is defined and not near a common nodal set.
    pub trusted: Vec<bool>,
}

impl LocalEstimate {
    pub fn trusted_cells(&self) -> Vec<usize> {
        (0..self.trusted.len()).filter(|&c| self.trusted[c]).collect()
    }
}

/// `V(x) = μ_k + Δ_h ψ_k(x) / ψ_k(x)` averaged over modes.
///
/// On every cell of `O` whose 5-point stencil lies in `O`, the modes are
/// combined with weights `|ψ_k(x)|² / max_O |ψ_k|²`, which makes the
/// estimate independent of any per-mode scalar. Cells where every
/// normalized amplitude is below `theta` are not trusted.
pub fn recover_potential_on_o(ds: &SpectralDataset, theta: f64) -> Result<LocalEstimate> {
    if ds.is_empty() {
        return Err(Error::InvalidInput("dataset has no modes".into()));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidInput("nodal threshold must lie in (0, 1)".into()));
    }
    let o = &ds.observation;
    let grid = *o.grid();
    let inv_h2 = 1.0 / grid.cell_area();
    let mut position = vec![usize::MAX; grid.cell_count()];
    for (i, &c) in o.cells().iter().enumerate() {
        position[c] = i;
    }
    let scale: Vec<f64> = ds
        .entries
        .iter()
        .map(|e| e.restriction.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max))
        .collect();
    if scale.contains(&0.0) {
        return Err(Error::InvalidInput("a mode vanishes identically on O".into()));
    }

    let mut values = vec![0.0; grid.cell_count()];
    let mut trusted = vec![false; grid.cell_count()];
    for c in o.interior() {
        let nb = grid.neighbours(c).map(|n| position[n]);
        let i = position[c];
        let (mut num, mut den, mut peak) = (0.0, 0.0, 0.0f64);
        for (e, &m) in ds.entries.iter().zip(&scale) {
            let psi = e.restriction[i];
            let lap = (nb.iter().map(|&j| e.restriction[j]).sum::<num_complex::Complex64>() - psi * 4.0) * inv_h2;
            let w = psi.norm_sqr();
            num += (w * e.eigenvalue + (psi.conj() * lap).re) / m;
            den += w / m;
            peak = peak.max(w / m);
        }
        if peak.sqrt() >= theta {
            values[c] = num / den;
            trusted[c] = true;
        }
    }
    if !trusted.iter().any(|&t| t) {
        return Err(Error::EmptyTrustedMask);
    }
    Ok(LocalEstimate { values, trusted })
}

/// Extend `known` values to every cell by minimizing the Dirichlet energy
/// with the known cells fixed (discrete harmonic fill).
pub fn harmonic_fill(grid: crate::torus::TorusGrid, known: &[Option<f64>]) -> Result<GridField> {
    if known.len() != grid.cell_count() {
        return Err(Error::InvalidInput("one entry per cell required".into()));
    }
    if known.iter().all(Option::is_none) {
        return Err(Error::InvalidInput("harmonic fill needs at least one known cell".into()));
    }
    let unknown: Vec<usize> = (0..known.len()).filter(|&c| known[c].is_none()).collect();
    let mut slot = vec![usize::MAX; known.len()];
    for (i, &c) in unknown.iter().enumerate() {
        slot[c] = i;
    }
    // (4 − Σ_unknown nb) x = Σ_known nb, an SPD system solved by CG.
    let apply = |x: &[f64]| -> Vec<f64> {
        unknown
            .iter()
            .map(|&c| {
                let s: f64 = grid.neighbours(c).iter().filter(|&&n| slot[n] != usize::MAX).map(|&n| x[slot[n]]).sum();
                4.0 * x[slot[c]] - s
            })
            .collect()
    };
    let b: Vec<f64> = unknown
        .iter()
        .map(|&c| grid.neighbours(c).iter().filter_map(|&n| known[n]).sum())
        .collect();
    let mut x = vec![0.0; unknown.len()];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let stop = 1e-28 * b.iter().map(|v| v * v).sum::<f64>().max(1e-300);
    for _ in 0..10 * unknown.len() + 10 {
        if rr <= stop {
            break;
        }
        let ap = apply(&p);
        let alpha = rr / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        x.iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.iter_mut().zip(&ap).for_each(|(r, a)| *r -= alpha * a);
        let next: f64 = r.iter().map(|v| v * v).sum();
        let beta = next / rr;
        rr = next;
        p.iter_mut().zip(&r).for_each(|(p, r)| *p = r + beta * *p);
    }
    let values = (0..known.len()).map(|c| known[c].unwrap_or_else(|| x[slot[c]])).collect();
    GridField::from_values(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::smooth_bump;
    use crate::spectral::dataset::{restrict, scale_dataset};
    use crate::spectral::eigen::solve_potential;
    use crate::torus::{ObservationSet, TorusGrid};
    use num_complex::Complex64;

    #[test]
    fn exact_eigenpairs_reproduce_potential() {
        let g = TorusGrid::standard(16).unwrap();
        let v = GridField::from_fn(g, |p| 1.5 * smooth_bump(p, [2.0, 3.0], 1.5, &g) + 0.2 * p[0].sin());
        let sys = solve_potential(&v, 6).unwrap();
        let o = ObservationSet::cross(g, 3.0, 2.0, 0.6).unwrap();
        let ds = restrict(&sys, &o, &[0, 1, 2, 3, 4, 5]).unwrap();
        let est = recover_potential_on_o(&ds, DEFAULT_THETA).unwrap();
        let cells = est.trusted_cells();
        assert!(!cells.is_empty());
        for c in cells {
            assert!((est.values[c] - v.values()[c]).abs() < 1e-9);
        }
        let s: Vec<Complex64> = (0..6).map(|k| Complex64::new(0.0, -(2f64).powi(-k))).collect();
        let scaled = recover_potential_on_o(&scale_dataset(&ds, &s).unwrap(), DEFAULT_THETA).unwrap();
        assert_eq!(scaled.values, est.values);
    }

    #[test]
    fn constant_potential_single_mode() {
        let g = TorusGrid::standard(8).unwrap();
        let sys = solve_potential(&GridField::constant(g, 2.5), 3).unwrap();
        let ds = restrict(&sys, &ObservationSet::quarter(g).unwrap(), &[0]).unwrap();
        let est = recover_potential_on_o(&ds, DEFAULT_THETA).unwrap();
        for c in est.trusted_cells() {
            assert!((est.values[c] - 2.5).abs() < 1e-10);
        }
    }

    #[test]
    fn fill_is_harmonic() {
        let g = TorusGrid::standard(8).unwrap();
        let mut known = vec![None; g.cell_count()];
        known[0] = Some(1.0);
        known[g.index(4, 4)] = Some(3.0);
        let f = harmonic_fill(g, &known).unwrap();
        let lap = f.laplacian();
        for (k, l) in known.iter().zip(lap.values()) {
            if k.is_none() {
                assert!(l.abs() < 1e-9);
            }
        }
        let all_known = vec![Some(2.0); g.cell_count()];
        assert_eq!(harmonic_fill(g, &all_known).unwrap().values()[3], 2.0);
    }
}
