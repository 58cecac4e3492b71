//! Sampled Laplace transforms of recordings.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::PassiveRecording;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LaplaceSample {
    pub z: Complex64,
    /// `∫_{t_0}^{T} u(t, x) e^{-z t} dt` per observed cell.
    pub values: Vec<Complex64>,
    /// `max |u(T)| · |e^{-zT}| / Re z`, the omitted tail for data that do
    /// not grow past the window.
    pub tail_bound: f64,
    /// True when `Re z · dt > 1`: the transform is dominated by the first
    /// sample and the quadrature no longer resolves it.
    pub tail_dominated: bool,
}

/// Trapezoid rule with Gregory end corrections (fourth order for smooth
/// data) applied to `u(t) e^{-zt}` on the recording window.
pub fn laplace_samples(rec: &PassiveRecording, z_list: &[Complex64]) -> Result<Vec<LaplaceSample>> {
    let n = rec.len();
    if n < 3 {
        return Err(Error::InvalidInput("need at least three samples".into()));
    }
    let dt = rec.dt;
    let t_end = rec.times[n - 1];
    let last_max = rec.values[n - 1].iter().map(|v| v.norm()).fold(0.0, f64::max);
    z_list
        .iter()
        .map(|&z| {
            if !(z.re > 0.0) {
                return Err(Error::InvalidInput(format!("Re z must be positive, got {z}")));
            }
            let kernel: Vec<Complex64> = rec.times.iter().map(|&t| (-z * t).exp()).collect();
            let values = (0..rec.observation.len())
                .map(|c| {
                    let g = |i: usize| rec.values[i][c] * kernel[i];
                    let mut s: Complex64 = (1..n - 1).map(g).sum();
                    s += 0.5 * (g(0) + g(n - 1));
                    let d0 = (-3.0 * g(0) + 4.0 * g(1) - g(2)) / (2.0 * dt);
                    let d1 = (3.0 * g(n - 1) - 4.0 * g(n - 2) + g(n - 3)) / (2.0 * dt);
                    s * dt - dt * dt / 12.0 * (d1 - d0)
                })
                .collect();
            Ok(LaplaceSample {
                z,
                values,
                tail_bound: last_max * (-z.re * t_end).exp() / z.re,
                tail_dominated: z.re * dt > 1.0,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::Equation;
    use crate::torus::{ObservationSet, TorusGrid};

    #[test]
    fn three_modes_against_closed_form() {
        let g = TorusGrid::standard(8).unwrap();
        let o = ObservationSet::quarter(g).unwrap();
        let mus = [0.5, 1.7, 3.0];
        let amp = |c: usize, k: usize| ((c + 1) * (k + 2)) as f64 * 0.1;
        let times: Vec<f64> = (0..=2000).map(|i| i as f64 * 1e-3).collect();
        let values = times
            .iter()
            .map(|&t| (0..o.len()).map(|c| (0..3).map(|k| Complex64::new(amp(c, k) * (-mus[k] * t).exp(), 0.0)).sum()).collect())
            .collect();
        let rec = PassiveRecording::new(Equation::Heat, times, values, o.clone()).unwrap();
        let z = Complex64::new(1.0, 0.5);
        let s = &laplace_samples(&rec, &[z]).unwrap()[0];
        for c in 0..o.len() {
            let exact: Complex64 = (0..3)
                .map(|k| amp(c, k) * (1.0 - (-(z + mus[k]) * 2.0).exp()) / (z + mus[k]))
                .sum();
            assert!((s.values[c] - exact).norm() < 1e-6 * exact.norm());
        }
        assert!(!s.tail_dominated);
        let big = &laplace_samples(&rec, &[Complex64::new(1e5, 0.0)]).unwrap()[0];
        assert!(big.tail_dominated);
    }
}
