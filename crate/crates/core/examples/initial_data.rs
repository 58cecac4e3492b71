//! Initial data of a wave recording, given the eigensystem.

use std::f64::consts::PI;

use passive_spectral::evolution::{evolve_on, Equation, PassiveRecording};
use passive_spectral::extraction::extract_wave_modes;
use passive_spectral::recovery::recover_initial_wave;
use passive_spectral::spectral::eigen::solve_potential;
use passive_spectral::{GridField, ObservationSet, TorusGrid};

fn main() -> passive_spectral::Result<()> {
    let g = TorusGrid::standard(16)?;
    let v = GridField::from_fn(g, |p| 1.0 + 0.6 * (p[0] - 0.3).cos() + 0.4 * (p[1] + 0.2).sin() * p[0].sin());
    let sys = solve_potential(&v, g.cell_count())?;
    let o = ObservationSet::cross(g, PI, 0.0, 0.8)?;

    let mut f = vec![0.0; sys.len()];
    let mut h = vec![0.0; sys.len()];
    f[1] = 1.0;
    f[6] = -0.5;
    h[4] = 2.0;
    let times: Vec<f64> = (0..=20_000).map(|i| i as f64 * 1e-3).collect();
    let f0 = sys.synthesize(&f).to_complex();
    let h0 = sys.synthesize(&h).to_complex();
    let values = evolve_on(&sys, Equation::Wave, f0.values(), Some(h0.values()), &times, o.cells())?;
    let rec = PassiveRecording::new(Equation::Wave, times, values, o.clone())?;

    let ex = extract_wave_modes(&rec, 16)?;
    let (rf, rh) = recover_initial_wave(&ex.modes, &sys, &o, 1e-6)?;
    for k in 0..8 {
        println!(
            "φ_{k}: f {:+.6} (true {:+.1})  h {:+.6} (true {:+.1})",
            rf.coefficients[k].re, f[k], rh.coefficients[k].re, h[k]
        );
    }
    Ok(())
}
