//! Lowest eigenpairs of `-Δ + V` on the flat torus and the Weyl count.

use std::f64::consts::PI;

use passive_spectral::field::smooth_bump;
use passive_spectral::spectral::analysis::weyl_count;
use passive_spectral::spectral::eigen::solve_potential;
use passive_spectral::{GridField, TorusGrid};

fn main() -> passive_spectral::Result<()> {
    let g = TorusGrid::standard(32)?;
    let flat = solve_potential(&GridField::zeros(g), 9)?;
    let v = GridField::from_fn(g, |p| 2.0 * smooth_bump(p, [PI, PI], 1.2, &g));
    let bumped = solve_potential(&v, 9)?;

    println!("  k      V = 0     bump V");
    for k in 0..9 {
        println!("{k:>3} {:>10.6} {:>10.6}", flat.eigenvalue(k), bumped.eigenvalue(k));
    }

    let full = solve_potential(&GridField::zeros(g), g.cell_count())?;
    for mu in [10.0, 25.0, 50.0] {
        let n = weyl_count(&full, mu)?;
        println!("N({mu}) = {n}, area·μ/4π = {:.1}", g.side_length().powi(2) * mu / (4.0 * PI));
    }
    Ok(())
}
