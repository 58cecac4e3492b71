//! Exact-in-time spectral evolution for the heat, Schrödinger and wave
//! equations driven by the discrete operator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ComplexField, GridField};
use crate::spectral::basis::ModalBasis;
use crate::torus::TorusGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    Heat,
    Schrodinger,
    Wave,
}

impl Equation {
    pub fn name(self) -> &'static str {
        match self {
            Self::Heat => "heat",
            Self::Schrodinger => "schrodinger",
            Self::Wave => "wave",
        }
    }
}

impl std::str::FromStr for Equation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heat" => Ok(Self::Heat),
            "schrodinger" => Ok(Self::Schrodinger),
            "wave" => Ok(Self::Wave),
            other => Err(Error::InvalidInput(format!("unknown equation '{other}'"))),
        }
    }
}

/// Solution states at a list of times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TorusGrid,
    pub times: Vec<f64>,
    /// `states[i]` holds every cell at `times[i]`.
    pub states: Vec<Vec<Complex64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> ComplexField {
        GridField::from_values(self.grid, self.states[i].clone()).expect("state matches grid")
    }

    /// Largest weighted-norm difference between corresponding states.
    pub fn max_distance(&self, other: &Self) -> f64 {
        let h2 = self.grid.cell_area();
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (h2 * a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>()).sqrt())
            .fold(0.0, f64::max)
    }
}

/// Below this `|μ|` the wave kernel uses its zero-mode branch.
pub const ZERO_MODE_TOL: f64 = 1e-12;

/// `s(t)` and `s'(t)` for `s'' + μ s = 0`, `s(0) = 0`, `s'(0) = 1`.
pub fn wave_kernel(mu: f64, t: f64) -> (f64, f64) {
    if mu > ZERO_MODE_TOL {
        let w = mu.sqrt();
        ((w * t).sin() / w, (w * t).cos())
    } else if mu < -ZERO_MODE_TOL {
        let w = (-mu).sqrt();
        ((w * t).sinh() / w, (w * t).cosh())
    } else {
        (t, 1.0)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidInput("times must be finite and nonnegative".into()));
    }
    Ok(())
}

fn check_grid<B: ModalBasis + ?Sized>(basis: &B, grid: &TorusGrid) -> Result<()> {
    if basis.grid() != grid {
        return Err(Error::InvalidInput("field and basis grids differ".into()));
    }
    Ok(())
}

/// Modal time factors applied to the coefficients of `f` and of `h`.
fn factors(eq: Equation, mu: f64, t: f64) -> (Complex64, Complex64) {
    match eq {
        Equation::Heat => (Complex64::new((-mu * t).exp(), 0.0), Complex64::default()),
        Equation::Schrodinger => (Complex64::from_polar(1.0, -mu * t), Complex64::default()),
        Equation::Wave => {
            let (s, ds) = wave_kernel(mu, t);
            (Complex64::new(ds, 0.0), Complex64::new(s, 0.0))
        }
    }
}

/// Evolve initial data and return the solution on `cells` only.
///
/// `h` is the initial velocity and is used by the wave equation only.
pub fn evolve_on<B: ModalBasis + ?Sized>(
    basis: &B,
    eq: Equation,
    f: &[Complex64],
    h: Option<&[Complex64]>,
    times: &[f64],
    cells: &[usize],
) -> Result<Vec<Vec<Complex64>>> {
    check_times(times)?;
    let n = basis.grid().cell_count();
    if f.len() != n || h.is_some_and(|h| h.len() != n) {
        return Err(Error::InvalidInput("initial data does not match the grid".into()));
    }
    let a = basis.analyze(f);
    let b = match (eq, h) {
        (Equation::Wave, Some(h)) => basis.analyze(h),
        _ => vec![Complex64::default(); a.len()],
    };
    let mu = basis.eigenvalues();
    Ok(times
        .iter()
        .map(|&t| {
            let coeffs: Vec<Complex64> = (0..a.len())
                .map(|k| {
                    let (p, q) = factors(eq, mu[k], t);
                    p * a[k] + q * b[k]
                })
                .collect();
            basis.synthesize_on(&coeffs, cells)
        })
        .collect())
}

fn full<B: ModalBasis + ?Sized>(
    basis: &B,
    eq: Equation,
    f: &[Complex64],
    h: Option<&[Complex64]>,
    times: &[f64],
) -> Result<Trajectory> {
    let cells: Vec<usize> = (0..basis.grid().cell_count()).collect();
    Ok(Trajectory {
        grid: *basis.grid(),
        times: times.to_vec(),
        states: evolve_on(basis, eq, f, h, times, &cells)?,
    })
}

/// `u(t) = Σ e^{-μ_k t} ⟨f, ψ_k⟩ ψ_k`.
pub fn heat_solve<B: ModalBasis + ?Sized>(basis: &B, f: &GridField, times: &[f64]) -> Result<Trajectory> {
    check_grid(basis, f.grid())?;
    full(basis, Equation::Heat, f.to_complex().values(), None, times)
}

/// `u(t) = Σ e^{-iμ_k t} ⟨f, ψ_k⟩ ψ_k`.
pub fn schrodinger_solve<B: ModalBasis + ?Sized>(basis: &B, f: &ComplexField, times: &[f64]) -> Result<Trajectory> {
    check_grid(basis, f.grid())?;
    full(basis, Equation::Schrodinger, f.values(), None, times)
}

/// `u(t) = Σ (s_k'(t) ⟨f, ψ_k⟩ + s_k(t) ⟨h, ψ_k⟩) ψ_k` with the kernel of
/// [`wave_kernel`].
pub fn wave_solve<B: ModalBasis + ?Sized>(basis: &B, f: &GridField, h: &GridField, times: &[f64]) -> Result<Trajectory> {
    check_grid(basis, f.grid())?;
    check_grid(basis, h.grid())?;
    let h = h.to_complex();
    full(basis, Equation::Wave, f.to_complex().values(), Some(h.values()), times)
}

/// `∂_t u` for [`wave_solve`], differentiated mode by mode.
pub fn wave_velocity<B: ModalBasis + ?Sized>(
    basis: &B,
    f: &GridField,
    h: &GridField,
    times: &[f64],
) -> Result<Trajectory> {
    check_grid(basis, f.grid())?;
    check_times(times)?;
    let a = basis.analyze(f.to_complex().values());
    let b = basis.analyze(h.to_complex().values());
    let mu = basis.eigenvalues();
    let states = times
        .iter()
        .map(|&t| {
            let coeffs: Vec<Complex64> = (0..a.len())
                .map(|k| {
                    let (s, ds) = wave_kernel(mu[k], t);
                    a[k] * (-mu[k] * s) + b[k] * ds
                })
                .collect();
            basis.synthesize(&coeffs)
        })
        .collect();
    Ok(Trajectory {
        grid: *basis.grid(),
        times: times.to_vec(),
        states,
    })
}

/// Uniform step of `times`, or an error if the grid is not uniform.
pub fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InvalidInput("need at least two times".into()));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let tol = 1e-12 * times[times.len() - 1].abs().max(1.0);
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > tol) {
        return Err(Error::InvalidInput("times must be uniformly spaced and increasing".into()));
    }
    Ok(dt)
}

/// Zero-data wave solution driven by `sources[i]` at `times[i]`, from the
/// trapezoid rule for `∫_{t_0}^t ⟨F(τ), ψ_k⟩ s_k(t − τ) dτ`.
pub fn wave_source_solve<B: ModalBasis + ?Sized>(
    basis: &B,
    sources: &[ComplexField],
    times: &[f64],
) -> Result<Trajectory> {
    if sources.len() != times.len() {
        return Err(Error::InvalidInput("one source field per time required".into()));
    }
    check_times(times)?;
    let dt = uniform_step(times)?;
    for s in sources {
        check_grid(basis, s.grid())?;
    }
    let mu = basis.eigenvalues();
    let modal: Vec<Vec<Complex64>> = sources.iter().map(|s| basis.analyze(s.values())).collect();
    let kernels: Vec<Vec<f64>> = mu
        .iter()
        .map(|&m| (0..times.len()).map(|j| wave_kernel(m, j as f64 * dt).0).collect())
        .collect();
    let states = (0..times.len())
        .map(|n| {
            let coeffs: Vec<Complex64> = (0..mu.len())
                .map(|k| {
                    (0..=n)
                        .map(|j| {
                            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                            modal[j][k] * (w * kernels[k][n - j])
                        })
                        .sum::<Complex64>()
                        * dt
                })
                .collect();
            basis.synthesize(&coeffs)
        })
        .collect();
    Ok(Trajectory {
        grid: *basis.grid(),
        times: times.to_vec(),
        states,
    })
}
