//! Minimum-norm functions supported on an interval with prescribed Fourier
//! transform values at finitely many frequencies.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest accepted condition number of the sampling system.
pub const MAX_CONDITION: f64 = 1e10;

#[derive(Debug, Clone)]
pub struct Interpolant {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Trapezoid weights on `times`.
    pub weights: Vec<f64>,
    /// Quadrature `L²` norm of `h`.
    pub norm: f64,
    /// `|F(h)(γ_k) − c_k|` for each frequency.
    pub residuals: Vec<f64>,
    /// Condition number of the weighted sampling matrix.
    pub condition: f64,
}

impl Interpolant {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Quadrature value of `∫ h(t) e^{-iγt} dt`.
    pub fn transform(&self, gamma: f64) -> Complex64 {
        self.times
            .iter()
            .zip(&self.values)
            .zip(&self.weights)
            .map(|((&t, &v), &w)| v * w * Complex64::from_polar(1.0, -gamma * t))
            .sum()
    }

    /// Rows `t,re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,re,im")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(w, "{t:.17e},{:.17e},{:.17e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Minimum-`L²(J)` solution of `F(h)(γ_k) = c_k`, `F(h)(γ) = ∫ h e^{-iγt} dt`,
/// discretized by the trapezoid rule on `m` uniform samples of `J`.
pub fn bandlimited_interpolant(gamma: &[f64], c: &[Complex64], interval: (f64, f64), m: usize) -> Result<Interpolant> {
    let k = gamma.len();
    if k == 0 || c.len() != k {
        return Err(Error::InvalidInput("need one target value per frequency".into()));
    }
    let (t0, t1) = interval;
    if !(t1 > t0) {
        return Err(Error::InvalidInput("interval must have positive length".into()));
    }
    if m < 8 * k {
        return Err(Error::InvalidInput(format!("need at least {} samples, got {m}", 8 * k)));
    }
    let mut sorted = gamma.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[1] - w[0] <= 0.0) {
        return Err(Error::InvalidInput("frequencies must be pairwise distinct".into()));
    }

    let dt = (t1 - t0) / (m - 1) as f64;
    let times: Vec<f64> = (0..m).map(|i| t0 + i as f64 * dt).collect();
    let weights: Vec<f64> = (0..m)
        .map(|i| if i == 0 || i == m - 1 { 0.5 * dt } else { dt })
        .collect();
    let b = DMatrix::from_fn(k, m, |r, i| Complex64::from_polar(weights[i].sqrt(), -gamma[r] * times[i]));
    let gram = &b * b.adjoint();

    let eig = gram.clone().symmetric_eigen().eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let condition = if lo > 0.0 { (hi / lo).sqrt() } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned {
            what: "Fourier sampling system".into(),
            cond: condition,
        });
    }
    let rhs = DVector::from_column_slice(c);
    let y = gram
        .cholesky()
        .ok_or_else(|| Error::IllConditioned {
            what: "Fourier sampling Gram matrix".into(),
            cond: condition,
        })?
        .solve(&rhs);
    let g = b.adjoint() * y;
    let values: Vec<Complex64> = g.iter().zip(&weights).map(|(v, w)| v / w.sqrt()).collect();
    let norm = g.norm();
    let mut out = Interpolant {
        times,
        values,
        weights,
        norm,
        residuals: Vec::new(),
        condition,
    };
    out.residuals = gamma.iter().zip(c).map(|(&gm, &ck)| (out.transform(gm) - ck).norm()).collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_moment_gives_constant() {
        let h = bandlimited_interpolant(&[0.0], &[Complex64::new(1.0, 0.0)], (0.0, 2.0), 64).unwrap();
        assert!((h.transform(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        for v in &h.values {
            assert!((v - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let h = bandlimited_interpolant(&[0.0, 3.0], &[Complex64::default(); 2], (0.0, 1.0), 32).unwrap();
        assert!(h.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn input_guards() {
        let c = [Complex64::new(1.0, 0.0); 2];
        assert!(bandlimited_interpolant(&[1.0, 1.0], &c, (0.0, 1.0), 64).is_err());
        assert!(bandlimited_interpolant(&[1.0, 2.0], &c, (0.0, 1.0), 10).is_err());
        // Nearly coincident frequencies on a short interval.
        assert!(matches!(
            bandlimited_interpolant(&[1.0, 1.0 + 1e-9], &c, (0.0, 1.0), 64),
            Err(Error::IllConditioned { .. })
        ));
    }
}
