//! Potential on the observed set from exact eigenpair restrictions.

use std::f64::consts::PI;

use passive_spectral::field::smooth_bump;
use passive_spectral::recovery::{harmonic_fill, recover_potential_on_o, DEFAULT_THETA};
use passive_spectral::scenario::simple_modes;
use passive_spectral::spectral::dataset::restrict;
use passive_spectral::spectral::eigen::solve_potential;
use passive_spectral::{GridField, ObservationSet, TorusGrid};

fn main() -> passive_spectral::Result<()> {
    let g = TorusGrid::standard(32)?;
    let v = GridField::from_fn(g, |p| 1.5 * smooth_bump(p, [2.0, 2.5], 1.5, &g));
    let sys = solve_potential(&v, 64)?;
    let o = ObservationSet::cross(g, PI, 0.0, 0.8)?;
    let ds = restrict(&sys, &o, &simple_modes(&sys, 8)?)?;

    let est = recover_potential_on_o(&ds, DEFAULT_THETA)?;
    let cells = est.trusted_cells();
    let err = cells.iter().map(|&c| (est.values[c] - v.values()[c]).abs()).fold(0.0, f64::max);
    println!("{} of {} observed cells trusted, max error {err:.2e}", cells.len(), o.len());

    let known: Vec<Option<f64>> = est.values.iter().zip(&est.trusted).map(|(&x, &t)| t.then_some(x)).collect();
    let filled = harmonic_fill(g, &known)?;
    let l2 = filled.add_scaled(-1.0, &v).norm() / v.norm();
    println!("harmonic extension off O: relative L2 error {l2:.3}");
    Ok(())
}
