//! Discrete Fourier diagonalization of the periodic 5-point Laplacian.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::torus::TorusGrid;

/// Symbol of `-Δ_h` at wavenumber pair `(p, q)`:
/// `(4/h²)(sin²(πp/N) + sin²(πq/N))`.
pub fn laplacian_symbol(grid: &TorusGrid, p: usize, q: usize) -> f64 {
    let n = grid.n_side() as f64;
    let h2 = grid.cell_area();
    let sp = (std::f64::consts::PI * p as f64 / n).sin();
    let sq = (std::f64::consts::PI * q as f64 / n).sin();
    4.0 / h2 * (sp * sp + sq * sq)
}

/// All eigenvalues of `-Δ_h + c`, sorted ascending with multiplicity.
pub fn constant_potential_spectrum(grid: &TorusGrid, c: f64) -> Vec<f64> {
    let n = grid.n_side();
    let mut out: Vec<f64> = (0..n)
        .flat_map(|p| (0..n).map(move |q| (p, q)))
        .map(|(p, q)| laplacian_symbol(grid, p, q) + c)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// 2-D FFT over the grid (rows then columns), unnormalized.
#[derive(Clone)]
pub struct GridFft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GridFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridFft").field("n", &self.n).finish()
    }
}

impl GridFft {
    pub fn new(grid: &TorusGrid) -> Self {
        let n = grid.n_side();
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn apply(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        for row in data.chunks_mut(n) {
            fft.process(row);
        }
        let mut col = vec![Complex64::default(); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[i * n + j];
            }
            fft.process(&mut col);
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, &self.forward.clone());
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, &self.inverse.clone());
    }
}

/// Solves `(-Δ_h + c) u = f` exactly for `c > 0`.
#[derive(Debug, Clone)]
pub struct ShiftedLaplacianSolver {
    fft: GridFft,
    inv_symbol: Vec<f64>,
}

impl ShiftedLaplacianSolver {
    pub fn new(grid: &TorusGrid, c: f64) -> Self {
        assert!(c > 0.0, "shift must be positive");
        let n = grid.n_side();
        let scale = 1.0 / (n * n) as f64;
        let inv_symbol = (0..n * n)
            .map(|idx| scale / (laplacian_symbol(grid, idx / n, idx % n) + c))
            .collect();
        Self {
            fft: GridFft::new(grid),
            inv_symbol,
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = rhs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.inv_symbol) {
            *b *= *s;
        }
        self.fft.inverse(&mut buf);
        buf.into_iter().map(|v| v.re).collect()
    }
}
