//! Grid functions with measure-weighted inner products.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::torus::{ObservationSet, Point, TorusGrid};

/// Values on every cell of a [`TorusGrid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T = f64> {
    grid: TorusGrid,
    values: Vec<T>,
}

pub type ComplexField = GridField<Complex64>;

impl<T: Clone + Default> GridField<T> {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![T::default(); grid.cell_count()],
        }
    }
}

impl<T> GridField<T> {
    pub fn from_values(grid: TorusGrid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::InvalidInput(format!(
                "field has {} values, grid has {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(Point) -> T) -> Self {
        let values = (0..grid.cell_count()).map(|c| f(grid.node(c))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}

impl<T: Copy> GridField<T> {
    /// Values on the observed cells, in the set's row-major order.
    pub fn restrict(&self, o: &ObservationSet) -> Vec<T> {
        o.cells().iter().map(|&c| self.values[c]).collect()
    }
}

impl GridField<f64> {
    pub fn constant(grid: TorusGrid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.cell_count()],
        }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.grid.cell_area() * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    pub fn add_scaled(&self, a: f64, other: &Self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn to_complex(&self) -> ComplexField {
        GridField {
            grid: self.grid,
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    /// Periodic 5-point Laplacian `Δ_h u`.
    pub fn laplacian(&self) -> Self {
        let g = self.grid;
        let inv_h2 = 1.0 / g.cell_area();
        let values = (0..g.cell_count())
            .map(|c| {
                let nb = g.neighbours(c);
                (nb.iter().map(|&k| self.values[k]).sum::<f64>() - 4.0 * self.values[c]) * inv_h2
            })
            .collect();
        Self { grid: g, values }
    }

    /// Discrete Dirichlet energy `‖∇_h u‖²` with forward differences.
    pub fn gradient_energy(&self) -> f64 {
        let g = self.grid;
        let h = g.spacing();
        let mut sum = 0.0;
        for c in 0..g.cell_count() {
            let nb = g.neighbours(c);
            let dx = (self.values[nb[3]] - self.values[c]) / h;
            let dy = (self.values[nb[1]] - self.values[c]) / h;
            sum += dx * dx + dy * dy;
        }
        g.cell_area() * sum
    }

    /// Row-major CSV, one grid row per line, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.grid.n_side();
        for row in self.values.chunks(n) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv(grid: TorusGrid, text: &str) -> Result<Self> {
        let values = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .flat_map(|l| l.split(','))
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("{s}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(grid, values)
    }
}

impl GridField<Complex64> {
    pub fn dot(&self, other: &Self) -> Complex64 {
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.cell_area()
    }

    pub fn norm(&self) -> f64 {
        (self.grid.cell_area() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn real(&self) -> GridField<f64> {
        GridField {
            grid: self.grid,
            values: self.values.iter().map(|v| v.re).collect(),
        }
    }
}

/// Measure-weighted inner product `h² Σ conj(a) b` of two value slices.
pub fn weighted_dot(a: &[Complex64], b: &[Complex64], cell_area: f64) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * cell_area
}

pub fn weighted_norm(a: &[Complex64], cell_area: f64) -> f64 {
    (cell_area * a.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
}

/// Smooth compactly supported bump `exp(1 - 1/(1 - (r/R)²))` (peak 1).
pub fn smooth_bump(p: Point, center: Point, radius: f64, grid: &TorusGrid) -> f64 {
    let r = crate::torus::geodesic_distance(p, center, grid) / radius;
    if r >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_are_measure_weighted() {
        let g = TorusGrid::standard(16).unwrap();
        let one = GridField::constant(g, 1.0);
        assert!((one.norm() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(one.laplacian().values().iter().all(|v| v.abs() < 1e-12));
        assert_eq!(one.gradient_energy(), 0.0);
    }

    #[test]
    fn laplacian_of_fourier_mode() {
        let g = TorusGrid::standard(32).unwrap();
        let u = GridField::from_fn(g, |p| (2.0 * p[0]).cos());
        let lap = u.laplacian();
        let h = g.spacing();
        let symbol = -4.0 / (h * h) * (h).sin().powi(2);
        for (a, b) in lap.values().iter().zip(u.values()) {
            assert!((a - symbol * b).abs() < 1e-10);
        }
    }

    #[test]
    fn csv_round_trip() {
        let g = TorusGrid::standard(8).unwrap();
        let u = GridField::from_fn(g, |p| p[0].sin() * 1e-3 + p[1]);
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let back = GridField::read_csv(g, std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, u);
    }
}
