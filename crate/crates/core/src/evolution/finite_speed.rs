//! Leakage of the shifted wave equation into a region beyond the reach of
//! unit-speed propagation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::spectral::basis::ModalBasis;
use crate::torus::{geodesic_distance, ObservationSet};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteSpeedReport {
    /// `max |u|` over the sampled times in `[0, T]` and the cells of `W`.
    pub leakage: f64,
    /// `max |f|`, for scale.
    pub amplitude: f64,
    /// Geodesic distance from the support of `f` to `W`.
    pub distance: f64,
    pub horizon: f64,
    /// Shift `τ` making every shifted eigenvalue at least one.
    pub tau: f64,
    /// True when `T` is below `distance`, so exact leakage would be zero.
    pub within_reach: bool,
}

/// Evolve `∂_t² u + (A + τ) u = 0`, `u(0) = f`, `∂_t u(0) = 0` and measure
/// the largest value on `W` at `n_times` uniform times in `[0, T]`.
pub fn finite_speed_check<B: ModalBasis + ?Sized>(
    basis: &B,
    f: &GridField,
    w: &ObservationSet,
    horizon: f64,
    n_times: usize,
) -> Result<FiniteSpeedReport> {
    if basis.grid() != f.grid() || w.grid() != f.grid() {
        return Err(Error::InvalidInput("field, basis and observation grids differ".into()));
    }
    if !(horizon >= 0.0) || n_times == 0 {
        return Err(Error::InvalidInput("need T ≥ 0 and at least one time".into()));
    }
    let grid = *f.grid();
    let amplitude = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let support: Vec<usize> = (0..grid.cell_count())
        .filter(|&c| f.values()[c].abs() > 1e-14 * amplitude.max(f64::MIN_POSITIVE))
        .collect();
    if support.is_empty() {
        return Err(Error::InvalidInput("initial datum vanishes".into()));
    }
    if support.iter().any(|&c| w.contains(c)) {
        return Err(Error::InvalidInput("support of f meets W".into()));
    }
    let distance = support
        .iter()
        .flat_map(|&a| w.cells().iter().map(move |&b| (a, b)))
        .map(|(a, b)| geodesic_distance(grid.node(a), grid.node(b), &grid))
        .fold(f64::INFINITY, f64::min);

    let mu = basis.eigenvalues();
    let mu_min = mu.iter().copied().fold(f64::INFINITY, f64::min);
    let tau = (1.0 - mu_min).max(0.0);
    let a = basis.analyze(f.to_complex().values());
    let mut leakage = 0.0f64;
    for i in 0..n_times {
        let t = if n_times == 1 { horizon } else { horizon * i as f64 / (n_times - 1) as f64 };
        let coeffs: Vec<Complex64> = a
            .iter()
            .zip(mu)
            .map(|(c, &m)| c * ((m + tau).sqrt() * t).cos())
            .collect();
        if t == 0.0 {
            // u(0) = f exactly, and f vanishes on W.
            continue;
        }
        let on_w = basis.synthesize_on(&coeffs, w.cells());
        leakage = on_w.iter().fold(leakage, |m, v| m.max(v.norm()));
    }
    Ok(FiniteSpeedReport {
        leakage,
        amplitude,
        distance,
        horizon,
        tau,
        within_reach: horizon < distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::smooth_bump;
    use crate::spectral::basis::FourierBasis;
    use crate::torus::TorusGrid;
    use std::f64::consts::PI;

    fn leak(n: usize, t_frac: f64) -> FiniteSpeedReport {
        let g = TorusGrid::standard(n).unwrap();
        let b = FourierBasis::new(g, 0.0);
        let f = GridField::from_fn(g, |p| smooth_bump(p, [PI / 2.0, PI], 0.6, &g));
        let w = ObservationSet::disc(g, [3.0 * PI / 2.0, PI], 0.6).unwrap();
        let probe = finite_speed_check(&b, &f, &w, 0.0, 1).unwrap();
        finite_speed_check(&b, &f, &w, t_frac * probe.distance, 40).unwrap()
    }

    #[test]
    fn zero_time_has_no_leakage() {
        let r = leak(32, 0.0);
        assert_eq!(r.leakage, 0.0);
        assert!(r.within_reach);
    }

    #[test]
    fn leakage_small_inside_and_large_beyond() {
        let inside = leak(64, 0.5);
        let beyond = leak(64, 2.0);
        assert!(inside.leakage < 1e-2 * inside.amplitude, "{}", inside.leakage);
        assert!(beyond.leakage > 0.05 * beyond.amplitude, "{}", beyond.leakage);
        assert!(!beyond.within_reach);
    }
}
