//! Geometric control and hypothesis (H) for a few observation sets.

use std::f64::consts::PI;

use passive_spectral::torus::{antipodal_set, check_hypothesis_h};
use passive_spectral::{ObservationSet, TorusGrid};

fn main() -> passive_spectral::Result<()> {
    let g = TorusGrid::standard(32)?;
    let horizon = 2.0 * g.side_length();
    let sets = [
        ("horizontal strip", ObservationSet::horizontal_strip(g, PI, 0.5)?),
        ("cross", ObservationSet::cross(g, PI, 0.0, 0.8)?),
        ("disc", ObservationSet::disc(g, [PI, PI], 1.0)?),
    ];
    for (name, o) in &sets {
        let h = check_hypothesis_h(o, horizon)?;
        print!("{name:<17} {:>4} cells  GCC {:?}", o.len(), h.gcc.verdict);
        if let Some(w) = &h.gcc.witness {
            print!("  (missed by ray from {:.2?} along {:?})", w.start, w.direction);
        }
        println!("  (H) {}", if h.holds { "holds" } else { "fails" });
    }

    let anti = antipodal_set([0.0, 0.0], &g, 1e-12);
    println!("antipodal cells of the origin: {:?}", anti.iter().map(|&c| g.node(c)).collect::<Vec<_>>());
    Ok(())
}
