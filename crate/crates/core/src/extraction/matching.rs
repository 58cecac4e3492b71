//! Pairing of spectral datasets up to complex scalar gauges.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::dataset::SpectralDataset;

/// Optimal scalar `c = ⟨a, b⟩ / ‖a‖²` aligning `a` to `b`, and the relative
/// error `‖c a − b‖ / ‖b‖`.
pub fn gauge_align(a: &[Complex64], b: &[Complex64]) -> (Complex64, f64) {
    let aa: f64 = a.iter().map(|v| v.norm_sqr()).sum();
    let bb: f64 = b.iter().map(|v| v.norm_sqr()).sum();
    if aa == 0.0 || bb == 0.0 {
        let err = if aa == 0.0 && bb == 0.0 { 0.0 } else { 1.0 };
        return (Complex64::default(), err);
    }
    let ab: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let c = ab / aa;
    let miss: f64 = a.iter().zip(b).map(|(x, y)| (c * x - y).norm_sqr()).sum();
    (c, (miss / bb).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// `(k, b_k)`, strictly increasing in both coordinates.
    pub pairs: Vec<(usize, usize)>,
    pub eigenvalue_tol: f64,
    pub function_tol: f64,
    /// Gauge-aligned relative discrepancy per pair.
    pub discrepancies: Vec<f64>,
    /// Scalar mapping the first restriction onto the second, per pair.
    pub gauges: Vec<Complex64>,
    pub unmatched_first: Vec<usize>,
    pub unmatched_second: Vec<usize>,
}

/// Two-pointer scan over both sorted eigenvalue lists. A pair needs
/// `|μ − μ'| ≤ eig_tol (1 + |μ|)` and gauge-aligned restrictions within
/// `fun_tol`; among eigenvalue-compatible candidates the first one whose
/// restriction agrees is taken.
pub fn match_datasets(ds1: &SpectralDataset, ds2: &SpectralDataset, eig_tol: f64, fun_tol: f64) -> MatchResult {
    let e1 = &ds1.entries;
    let e2 = &ds2.entries;
    let mut out = MatchResult {
        pairs: Vec::new(),
        eigenvalue_tol: eig_tol,
        function_tol: fun_tol,
        discrepancies: Vec::new(),
        gauges: Vec::new(),
        unmatched_first: Vec::new(),
        unmatched_second: Vec::new(),
    };
    let close = |a: f64, b: f64| (a - b).abs() <= eig_tol * (1.0 + a.abs());
    let (mut i, mut j) = (0, 0);
    while i < e1.len() && j < e2.len() {
        let mu = e1[i].eigenvalue;
        if close(mu, e2[j].eigenvalue) {
            let mut hit = None;
            let mut jj = j;
            while jj < e2.len() && close(mu, e2[jj].eigenvalue) {
                let (c, err) = gauge_align(&e1[i].restriction, &e2[jj].restriction);
                if err <= fun_tol {
                    hit = Some((jj, c, err));
                    break;
                }
                jj += 1;
            }
            match hit {
                Some((jj, c, err)) => {
                    out.unmatched_second.extend(j..jj);
                    out.pairs.push((i, jj));
                    out.gauges.push(c);
                    out.discrepancies.push(err);
                    i += 1;
                    j = jj + 1;
                }
                None => {
                    out.unmatched_first.push(i);
                    i += 1;
                }
            }
        } else if mu < e2[j].eigenvalue {
            out.unmatched_first.push(i);
            i += 1;
        } else {
            out.unmatched_second.push(j);
            j += 1;
        }
    }
    out.unmatched_first.extend(i..e1.len());
    out.unmatched_second.extend(j..e2.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridField;
    use crate::spectral::dataset::{restrict, scale_dataset};
    use crate::spectral::eigen::solve_potential;
    use crate::torus::{ObservationSet, TorusGrid};

    fn ds(indices: &[usize]) -> SpectralDataset {
        let g = TorusGrid::standard(16).unwrap();
        let v = GridField::from_fn(g, |p| 0.7 * (p[0] - 0.4).cos() + 0.5 * (2.0 * p[1]).sin() * p[0].sin());
        let sys = solve_potential(&v, 24).unwrap();
        restrict(&sys, &ObservationSet::cross(g, 1.0, 2.0, 0.5).unwrap(), indices).unwrap()
    }

    #[test]
    fn self_match_is_identity() {
        let d = ds(&(0..12).collect::<Vec<_>>());
        let m = match_datasets(&d, &d, 1e-8, 1e-6);
        assert_eq!(m.pairs, (0..12).map(|k| (k, k)).collect::<Vec<_>>());
        assert!(m.discrepancies.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn gauge_scaled_match() {
        let d = ds(&(0..8).collect::<Vec<_>>());
        let s: Vec<Complex64> = (0..8).map(|k| Complex64::from_polar(0.5 + k as f64, 0.7 * k as f64)).collect();
        let m = match_datasets(&d, &scale_dataset(&d, &s).unwrap(), 1e-8, 1e-10);
        assert_eq!(m.pairs.len(), 8);
        for (g, s) in m.gauges.iter().zip(&s) {
            assert!((g - s).norm() < 1e-10 * s.norm());
        }
    }

    #[test]
    fn sparse_subset_pairs_selected_indices() {
        let full = ds(&(0..20).collect::<Vec<_>>());
        let sel = [1, 4, 9, 17];
        let sub = ds(&sel);
        let m = match_datasets(&sub, &full, 1e-8, 1e-6);
        assert_eq!(m.pairs, sel.iter().enumerate().map(|(k, &b)| (k, b)).collect::<Vec<_>>());
        assert_eq!(m.unmatched_second.len(), 16);
        assert!(m.unmatched_first.is_empty());
    }
}
