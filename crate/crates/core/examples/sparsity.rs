//! Dyadic sparse subsequences of the flat-torus spectrum and their density.

use passive_spectral::sparsity::{
    gamma_set, is_lambda_sparse, select_sparse_subsequence, uniform_gap, FlatTorusSpectrum,
};

fn main() -> passive_spectral::Result<()> {
    let torus = FlatTorusSpectrum::standard(40_000_000_000);
    let sel = select_sparse_subsequence(&torus, 2.0)?;
    println!("{} blocks selected", sel.indices.len());
    for (&i, (lo, hi)) in sel.indices.iter().zip(&sel.blocks).take(6) {
        println!("  ({lo:>6}, {hi:>6}]  index {i}");
    }

    let gamma = gamma_set(&torus, &sel.indices)?;
    println!("uniform gap of sqrt-spectrum: {:.4}", uniform_gap(&gamma)?);

    let report = is_lambda_sparse(&torus, &sel.indices, Some(&[6250.0, 12500.0, 25000.0, 50000.0]))?;
    for (l, d) in &report.density_estimates {
        println!("  window {l:>8}: density {d:.4}");
    }
    println!("verdict: {:?}", report.verdict);

    // A full run of consecutive eigenvalues is never sparse.
    let dense: Vec<usize> = (1..2000).collect();
    println!("first 2000 indices: {:?}", is_lambda_sparse(&torus, &dense, None)?.verdict);
    Ok(())
}
