//! Simulate a bundled scenario and write the passive recording to disk.

use std::path::PathBuf;

use passive_spectral::pipeline::{simulate, write_simulation};
use passive_spectral::scenario::Scenario;

fn main() -> passive_spectral::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "wave-bump-cross".into());
    let scenario = Scenario::load(name.as_ref())?;
    let sim = simulate(&scenario)?;
    let rec = &sim.recording;
    println!(
        "{}: {} samples on {} cells, dt {}",
        scenario.name,
        rec.len(),
        rec.observation.len(),
        rec.times[1] - rec.times[0]
    );
    println!("excited modes: {:?}", sim.truth.excited());

    let out = PathBuf::from("pslab-out").join(&scenario.name);
    write_simulation(&sim, &scenario, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}
