//! Mode estimates for the three passive measurement models.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{Equation, PassiveRecording};
use crate::extraction::pencil::{fit_modes, ModeFamily, PencilOptions};
use crate::spectral::dataset::{SpectralDataset, SpectralEntry};
use crate::torus::ObservationSet;

/// Relative fit residual accepted for noiseless recordings.
pub const NOISELESS_ACCEPT: f64 = 1e-4;
/// Residual RMS accepted for noisy recordings, in units of the noise level.
pub const NOISY_ACCEPT: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEstimate {
    pub eigenvalue: f64,
    /// Heat `−μ`, Schrödinger `−iμ`, wave `i√μ`.
    pub rate: Complex64,
    /// Heat and Schrödinger: `⟨f, ψ_k⟩ ψ_k` on `O`. Wave: the `f` part.
    pub residue: Vec<Complex64>,
    /// Wave only: `⟨h, ψ_k⟩ ψ_k` on `O`.
    pub residue_h: Option<Vec<Complex64>>,
    /// Relative residual of the fit the mode belongs to.
    pub confidence: f64,
}

impl ModeEstimate {
    /// The observed restriction used as eigenfunction data.
    pub fn restriction(&self) -> &[Complex64] {
        match &self.residue_h {
            Some(h) if l2(h) > l2(&self.residue) => h,
            _ => &self.residue,
        }
    }
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Extraction {
    pub equation: Equation,
    /// Accepted modes sorted by eigenvalue.
    pub modes: Vec<ModeEstimate>,
    /// Numerical rank found by the pencil and the singular values behind it.
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub stride: usize,
    pub relative_residual: f64,
    pub residual_rms: f64,
    /// Whether the fit passed the acceptance policy.
    pub accepted: bool,
    pub policy: String,
}

fn family(eq: Equation) -> ModeFamily {
    match eq {
        Equation::Heat => ModeFamily::Decay,
        Equation::Schrodinger => ModeFamily::Oscillation,
        Equation::Wave => ModeFamily::RealOscillation,
    }
}

/// Extract up to `k_max` modes from a recording of any equation.
pub fn extract_modes(rec: &PassiveRecording, k_max: usize) -> Result<Extraction> {
    extract_with(rec, &PencilOptions {
        max_modes: k_max,
        noise_sigma: rec.noise_sigma,
        ..PencilOptions::default()
    })
}

pub fn extract_with(rec: &PassiveRecording, opts: &PencilOptions) -> Result<Extraction> {
    if opts.max_modes == 0 {
        return Err(Error::InvalidInput("K_max must be positive".into()));
    }
    let eq = rec.equation;
    let fam = family(eq);
    let ch = rec.observation.len();
    let y = DMatrix::from_fn(ch, rec.len(), |c, n| rec.values[n][c]);
    let fit = fit_modes(&y, &rec.times, fam, opts)?;
    let t0 = rec.times[0];
    let n = rec.len() as f64;
    let sigma = rec.noise_sigma;
    let floor = 5.0 * sigma * (ch as f64 / n).sqrt();

    let mut modes = Vec::new();
    for (k, &p) in fit.parameters.iter().enumerate() {
        let row = |j: usize| -> Vec<Complex64> { fit.coefficients.row(j).iter().copied().collect() };
        let mode = match eq {
            Equation::Heat => ModeEstimate {
                eigenvalue: p,
                rate: Complex64::new(-p, 0.0),
                residue: row(k).into_iter().map(|c| c * (p * t0).exp()).collect(),
                residue_h: None,
                confidence: fit.relative_residual,
            },
            Equation::Schrodinger => ModeEstimate {
                eigenvalue: p,
                rate: Complex64::new(0.0, -p),
                residue: row(k).into_iter().map(|c| c * Complex64::from_polar(1.0, p * t0)).collect(),
                residue_h: None,
                confidence: fit.relative_residual,
            },
            Equation::Wave => {
                let (s, c) = (p * t0).sin_cos();
                let (c1, c2) = (row(2 * k), row(2 * k + 1));
                let f: Vec<Complex64> = c1.iter().zip(&c2).map(|(a, b)| a * c - b * s).collect();
                let h: Vec<Complex64> = c1.iter().zip(&c2).map(|(a, b)| (a * s + b * c) * p).collect();
                ModeEstimate {
                    eigenvalue: p * p,
                    rate: Complex64::new(0.0, p),
                    residue: f,
                    residue_h: Some(h),
                    confidence: fit.relative_residual,
                }
            }
        };
        modes.push(mode);
    }
    let largest = modes.iter().map(|m| l2(m.restriction())).fold(0.0, f64::max);
    modes.retain(|m| {
        let size = l2(m.restriction());
        size > 1e-12 * largest && size > floor
    });
    modes.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));

    let (accepted, policy) = if sigma > 0.0 {
        (
            fit.residual_rms < NOISY_ACCEPT * sigma,
            format!("residual RMS < {NOISY_ACCEPT} × σ"),
        )
    } else {
        (
            fit.relative_residual < NOISELESS_ACCEPT,
            format!("relative residual < {NOISELESS_ACCEPT:e}"),
        )
    };
    Ok(Extraction {
        equation: eq,
        modes,
        rank: fit.rank,
        singular_values: fit.singular_values,
        stride: fit.stride,
        relative_residual: fit.relative_residual,
        residual_rms: fit.residual_rms,
        accepted,
        policy,
    })
}

fn expect(rec: &PassiveRecording, eq: Equation) -> Result<()> {
    if rec.equation != eq {
        return Err(Error::InvalidInput(format!(
            "expected a {} recording, got {}",
            eq.name(),
            rec.equation.name()
        )));
    }
    Ok(())
}

pub fn extract_heat_modes(rec: &PassiveRecording, k_max: usize) -> Result<Extraction> {
    expect(rec, Equation::Heat)?;
    extract_modes(rec, k_max)
}

pub fn extract_schrodinger_modes(rec: &PassiveRecording, k_max: usize) -> Result<Extraction> {
    expect(rec, Equation::Schrodinger)?;
    extract_modes(rec, k_max)
}

pub fn extract_wave_modes(rec: &PassiveRecording, k_max: usize) -> Result<Extraction> {
    expect(rec, Equation::Wave)?;
    extract_modes(rec, k_max)
}

/// Dataset of extracted eigenvalues and restrictions, with no normalization.
pub fn to_spectral_dataset(modes: &[ModeEstimate], observation: &ObservationSet) -> Result<SpectralDataset> {
    let mut sorted: Vec<&ModeEstimate> = modes.iter().collect();
    sorted.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    let entries = sorted
        .into_iter()
        .enumerate()
        .map(|(k, m)| SpectralEntry {
            index: k,
            eigenvalue: m.eigenvalue,
            restriction: m.restriction().to_vec(),
        })
        .collect();
    SpectralDataset::new(observation.clone(), entries, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{evolve_on, Noise};
    use crate::field::GridField;
    use crate::spectral::eigen::{solve_potential, EigenSystem};
    use crate::torus::TorusGrid;

    fn setup() -> (EigenSystem, ObservationSet) {
        let g = TorusGrid::standard(16).unwrap();
        let v = GridField::from_fn(g, |p| 1.0 + 0.6 * (p[0] - 0.3).cos() + 0.4 * (p[1] + 0.2).sin() * p[0].sin());
        let sys = solve_potential(&v, 20).unwrap();
        (sys, ObservationSet::cross(g, std::f64::consts::PI, 0.0, 0.5).unwrap())
    }

    fn recording(sys: &EigenSystem, o: &ObservationSet, eq: Equation, f: &[(usize, f64)], h: &[(usize, f64)], t_end: f64) -> PassiveRecording {
        let g = *sys.grid();
        let mut fv = vec![Complex64::default(); g.cell_count()];
        let mut hv = fv.clone();
        for &(k, a) in f {
            for (c, v) in sys.eigenfunction(k).values().iter().enumerate() {
                fv[c] += a * v;
            }
        }
        for &(k, a) in h {
            for (c, v) in sys.eigenfunction(k).values().iter().enumerate() {
                hv[c] += a * v;
            }
        }
        let n = (t_end / 1e-3).round() as usize;
        let times: Vec<f64> = (1..=n).map(|i| i as f64 * 1e-3).collect();
        let values = evolve_on(sys, eq, &fv, Some(&hv), &times, o.cells()).unwrap();
        PassiveRecording::new(eq, times, values, o.clone()).unwrap()
    }

    #[test]
    fn heat_two_modes() {
        let (sys, o) = setup();
        let rec = recording(&sys, &o, Equation::Heat, &[(0, 1.0), (3, 2.0)], &[], 1.0);
        let ex = extract_heat_modes(&rec, 4).unwrap();
        assert!(ex.accepted);
        assert_eq!(ex.modes.len(), 2);
        for (m, (k, a)) in ex.modes.iter().zip([(0, 1.0), (3, 2.0)]) {
            assert!((m.eigenvalue - sys.eigenvalue(k)).abs() < 1e-8 * sys.eigenvalue(k));
            for (r, v) in m.residue.iter().zip(sys.restricted(k, &o)) {
                assert!((r - a * v).norm() < 1e-7);
            }
        }
        assert!(extract_wave_modes(&rec, 2).is_err());
    }

    #[test]
    fn wave_splits_residues() {
        let (sys, o) = setup();
        let rec = recording(&sys, &o, Equation::Wave, &[(2, 1.0)], &[(5, 1.0)], 20.0);
        let ex = extract_wave_modes(&rec, 4).unwrap();
        assert_eq!(ex.modes.len(), 2, "{:?} {:?}", ex.modes.iter().map(|m| m.eigenvalue).collect::<Vec<_>>(), (ex.rank, ex.stride, &ex.singular_values));
        let (a, b) = (&ex.modes[0], &ex.modes[1]);
        assert!((a.eigenvalue - sys.eigenvalue(2)).abs() < 1e-8);
        let phi2 = sys.restricted(2, &o);
        let phi5 = sys.restricted(5, &o);
        for c in 0..o.len() {
            assert!((a.residue[c] - phi2[c]).norm() < 1e-7);
            assert!(a.residue_h.as_ref().unwrap()[c].norm() < 1e-7);
            assert!(b.residue[c].norm() < 1e-7);
            assert!((b.residue_h.as_ref().unwrap()[c] - phi5[c]).norm() < 1e-7);
        }
    }

    #[test]
    fn schrodinger_with_noise() {
        let (sys, o) = setup();
        let rec = recording(&sys, &o, Equation::Schrodinger, &[(1, 1.0), (4, 0.8), (7, 1.2), (9, 1.0)], &[], 20.0)
            .with_noise(Noise { sigma: 1e-4, seed: 3 })
            .unwrap();
        let ex = extract_schrodinger_modes(&rec, 6).unwrap();
        assert!(ex.accepted, "{}", ex.residual_rms);
        assert_eq!(ex.modes.len(), 4);
        for (m, k) in ex.modes.iter().zip([1, 4, 7, 9]) {
            assert!((m.eigenvalue - sys.eigenvalue(k)).abs() < 1e-2);
        }
        let ds = to_spectral_dataset(&ex.modes, &o).unwrap();
        assert!(!ds.orthonormalized && ds.sigma_min() > 0.0);
    }
}
