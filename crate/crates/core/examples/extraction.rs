//! Recover eigenvalues and observed eigenfunction restrictions from a recording.

use passive_spectral::pipeline::{extract, simulate};
use passive_spectral::scenario::Scenario;

fn main() -> passive_spectral::Result<()> {
    for name in ["heat-bump-cross", "wave-bump-cross"] {
        let s = Scenario::load(name.as_ref())?;
        let sim = simulate(&s)?;
        let out = extract(&sim.recording, &s.extraction, Some(&sim.truth))?;
        let ex = &out.extraction;
        println!("{name}: rank {} from {} singular values, residual {:.1e}", ex.rank, ex.singular_values.len(), ex.relative_residual);
        for row in &out.pairing {
            println!(
                "  mode {:>2}  μ = {:>10.6}  truth {:>10.6}  rel err {:.1e}  eigenfunction {:.1e}",
                row.mode,
                row.eigenvalue,
                row.truth_eigenvalue.unwrap_or(f64::NAN),
                row.relative_error.unwrap_or(f64::NAN),
                row.discrepancy.unwrap_or(f64::NAN),
            );
        }
    }
    Ok(())
}
