use nalgebra::DMatrix;

use crate::field::GridField;
use crate::torus::TorusGrid;

/// Discrete Schrödinger operator `-Δ_h + V` with the periodic 5-point stencil.
#[derive(Debug, Clone)]
pub struct SchrodingerOperator {
    potential: GridField,
}

pub fn assemble_operator(potential: &GridField) -> SchrodingerOperator {
    SchrodingerOperator {
        potential: potential.clone(),
    }
}

impl SchrodingerOperator {
    pub fn grid(&self) -> &TorusGrid {
        self.potential.grid()
    }

    pub fn potential(&self) -> &GridField {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.grid().cell_count()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_into(u, &mut out);
        out
    }

    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let g = self.grid();
        let inv_h2 = 1.0 / g.cell_area();
        let v = self.potential.values();
        for c in 0..g.cell_count() {
            let nb = g.neighbours(c);
            let lap = u[nb[0]] + u[nb[1]] + u[nb[2]] + u[nb[3]] - 4.0 * u[c];
            out[c] = -lap * inv_h2 + v[c] * u[c];
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let g = self.grid();
        let n = g.cell_count();
        let inv_h2 = 1.0 / g.cell_area();
        let mut a = DMatrix::zeros(n, n);
        for c in 0..n {
            a[(c, c)] += 4.0 * inv_h2 + self.potential.values()[c];
            for nb in g.neighbours(c) {
                a[(c, nb)] -= inv_h2;
            }
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_rows_sum_to_potential() {
        let g = TorusGrid::standard(8).unwrap();
        let zero = assemble_operator(&GridField::zeros(g)).to_dense();
        for r in 0..zero.nrows() {
            assert!(zero.row(r).sum().abs() < 1e-12);
        }
        assert_eq!(zero, zero.transpose());
        let c = assemble_operator(&GridField::constant(g, 2.5));
        let out = c.apply(&vec![1.0; 64]);
        assert!(out.iter().all(|v| (v - 2.5).abs() < 1e-12));
    }
}
