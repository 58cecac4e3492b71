//! Full pipeline: simulate, extract, recover the potential, score against truth.

use passive_spectral::pipeline::{recover, score, simulate, RecoverInput};
use passive_spectral::scenario::Scenario;

fn main() -> passive_spectral::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "wave-bump-cross".into());
    let s = Scenario::load(name.as_ref())?;
    let sim = simulate(&s)?;
    let input = RecoverInput::from_recording(&sim.recording, &s.extraction)?;
    let out = recover(&input, &s.recovery, &s.extraction)?;

    let d = &out.result.diagnostics;
    println!(
        "{} iterations ({}), data misfit {:.2e} -> {:.2e}",
        d.iterations, d.method, d.warm_start_data, d.final_data
    );
    let sc = score(&out, &sim.truth)?;
    println!("max eigenvalue error      {:.2e}", sc.max_eigenvalue_error);
    println!("potential relative L2     {:.2e}", sc.potential_relative_l2_error);
    println!("on-O max error            {:.2e}", sc.on_o_max_error);
    if let Some(e) = sc.initial_f_coefficient_error {
        println!("initial f coefficients    {e:.2e}");
    }
    Ok(())
}
