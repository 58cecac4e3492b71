//! Modal bases used for exact-in-time evolution.

use num_complex::Complex64;

use crate::spectral::eigen::EigenSystem;
use crate::spectral::fourier::{laplacian_symbol, GridFft};
use crate::torus::TorusGrid;

/// An orthonormal family of eigenfunctions of the grid operator.
///
/// `analyze` returns `⟨φ_k, u⟩ = h² Σ conj(φ_k) u`; `synthesize` is its
/// adjoint. When the family is complete the two are inverse to each other.
pub trait ModalBasis {
    fn grid(&self) -> &TorusGrid;
    fn eigenvalues(&self) -> &[f64];
    fn analyze(&self, u: &[Complex64]) -> Vec<Complex64>;
    fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64>;

    /// Synthesis evaluated only on the listed cells.
    fn synthesize_on(&self, coeffs: &[Complex64], cells: &[usize]) -> Vec<Complex64> {
        let full = self.synthesize(coeffs);
        cells.iter().map(|&c| full[c]).collect()
    }

    fn mode_count(&self) -> usize {
        self.eigenvalues().len()
    }

    fn is_complete(&self) -> bool {
        self.mode_count() == self.grid().cell_count()
    }
}

impl ModalBasis for EigenSystem {
    fn grid(&self) -> &TorusGrid {
        EigenSystem::grid(self)
    }

    fn eigenvalues(&self) -> &[f64] {
        EigenSystem::eigenvalues(self)
    }

    fn analyze(&self, u: &[Complex64]) -> Vec<Complex64> {
        let h2 = self.grid().cell_area();
        self.vectors()
            .column_iter()
            .map(|col| col.iter().zip(u).map(|(p, v)| v * *p).sum::<Complex64>() * h2)
            .collect()
    }

    fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let all: Vec<usize> = (0..self.grid().cell_count()).collect();
        self.synthesize_on(coeffs, &all)
    }

    fn synthesize_on(&self, coeffs: &[Complex64], cells: &[usize]) -> Vec<Complex64> {
        let v = self.vectors();
        cells
            .iter()
            .map(|&c| coeffs.iter().enumerate().map(|(k, a)| a * v[(c, k)]).sum())
            .collect()
    }
}

/// Complete Fourier eigenbasis of `-Δ_h + c` for a constant potential `c`.
///
/// Modes are plane waves `e^{i(2π/L)(q x + p y)} / L` in FFT order.
#[derive(Debug, Clone)]
pub struct FourierBasis {
    grid: TorusGrid,
    eigenvalues: Vec<f64>,
    fft: GridFft,
}

impl FourierBasis {
    pub fn new(grid: TorusGrid, constant_potential: f64) -> Self {
        let n = grid.n_side();
        let eigenvalues = (0..n * n)
            .map(|idx| laplacian_symbol(&grid, idx / n, idx % n) + constant_potential)
            .collect();
        Self {
            grid,
            eigenvalues,
            fft: GridFft::new(&grid),
        }
    }
}

impl ModalBasis for FourierBasis {
    fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn analyze(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut buf = u.to_vec();
        self.fft.forward(&mut buf);
        let scale = self.grid.cell_area() / self.grid.side_length();
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }

    fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coeffs.to_vec();
        self.fft.inverse(&mut buf);
        let scale = 1.0 / self.grid.side_length();
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridField;
    use crate::spectral::eigen::solve_potential;

    fn sample(grid: TorusGrid) -> Vec<Complex64> {
        GridField::from_fn(grid, |p| (p[0] + 0.2).sin() * (2.0 * p[1]).cos() + 0.1 * p[0])
            .to_complex()
            .into_values()
    }

    #[test]
    fn fourier_round_trip_and_parseval() {
        let g = TorusGrid::standard(16).unwrap();
        let b = FourierBasis::new(g, 0.0);
        let u = sample(g);
        let c = b.analyze(&u);
        let back = b.synthesize(&c);
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
        let norm2: f64 = g.cell_area() * u.iter().map(|v| v.norm_sqr()).sum::<f64>();
        let coeff2: f64 = c.iter().map(|v| v.norm_sqr()).sum();
        assert!((norm2 - coeff2).abs() < 1e-10 * norm2);
    }

    #[test]
    fn eigen_basis_matches_fourier_energy() {
        let g = TorusGrid::standard(8).unwrap();
        let sys = solve_potential(&GridField::zeros(g), 64).unwrap();
        let fb = FourierBasis::new(g, 0.0);
        let u = sample(g);
        let energy = |b: &dyn ModalBasis| -> f64 {
            b.analyze(&u).iter().zip(b.eigenvalues()).map(|(c, m)| m * c.norm_sqr()).sum()
        };
        assert!((energy(&sys) - energy(&fb)).abs() < 1e-9);
    }
}
