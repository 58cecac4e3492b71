//! Spectral data misfit of a candidate potential, with exact first
//! derivatives from eigenvalue and eigenvector perturbation theory.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::GridField;
use crate::recovery::minres::minres;
use crate::spectral::dataset::SpectralDataset;
use crate::spectral::eigen::{solve_potential, EigenSystem, DENSE_MAX_SIDE};
use crate::spectral::operator::assemble_operator;

/// Penalty charged for an observed mode with no model partner.
pub const UNMATCHED_PENALTY: f64 = 1.0;
/// Relative gap below which a matched model eigenvalue counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MisfitSettings {
    /// Per observed mode; empty means all ones.
    pub weights: Vec<f64>,
    /// Weight of `‖∇_h V‖²`.
    pub lambda: f64,
    pub unmatched_penalty: f64,
}

impl Default for MisfitSettings {
    fn default() -> Self {
        Self {
            weights: Vec::new(),
            lambda: 0.0,
            unmatched_penalty: UNMATCHED_PENALTY,
        }
    }
}

impl MisfitSettings {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    fn weight(&self, k: usize) -> f64 {
        self.weights.get(k).copied().unwrap_or(1.0)
    }
}

/// Misfit value with the model spectrum and the pairing behind it.
#[derive(Debug, Clone)]
pub struct MisfitEval {
    pub value: f64,
    pub data: f64,
    pub regularization: f64,
    /// Model mode paired with each observed mode.
    pub matches: Vec<Option<usize>>,
    /// Scalar aligning each matched model restriction to the observation.
    pub gauges: Vec<Option<Complex64>>,
    pub eigen: EigenSystem,
}

/// Eigenpairs of `V` used as the model: the complete spectrum on grids the
/// dense solver handles, otherwise enough of the bottom of the spectrum.
pub fn model_eigensystem(v: &GridField, observed: usize) -> Result<EigenSystem> {
    let n = v.grid().cell_count();
    let k = if v.grid().n_side() <= DENSE_MAX_SIDE { n } else { n.min(2 * observed + 24) };
    solve_potential(v, k)
}

struct PairCost {
    eigen: f64,
    function: f64,
}

fn pair_cost(sys: &EigenSystem, j: usize, ds: &SpectralDataset, k: usize) -> PairCost {
    let entry = &ds.entries[k];
    let mu_obs = entry.eigenvalue;
    let e = (sys.eigenvalue(j) - mu_obs) / (1.0 + mu_obs.abs());
    let col = sys.vectors().column(j);
    let (mut aa, mut bb, mut ab) = (0.0, 0.0, Complex64::default());
    for (&c, b) in ds.observation.cells().iter().zip(&entry.restriction) {
        let a = col[c];
        aa += a * a;
        bb += b.norm_sqr();
        ab += b * a;
    }
    let function = if aa == 0.0 || bb == 0.0 { 1.0 } else { (1.0 - ab.norm_sqr() / (aa * bb)).max(0.0) };
    PairCost { eigen: e * e, function }
}

/// Monotone alignment of observed modes to model modes minimizing the
/// summed pair costs, with a fixed penalty for skipping an observed mode.
fn align(sys: &EigenSystem, ds: &SpectralDataset, settings: &MisfitSettings) -> (Vec<Option<usize>>, f64) {
    let m = ds.len();
    let n = sys.len();
    let p = settings.unmatched_penalty;
    let mut cost = vec![vec![0.0; n]; m];
    for (k, row) in cost.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            let pc = pair_cost(sys, j, ds, k);
            *c = settings.weight(k) * (pc.eigen + pc.function);
        }
    }
    // best[k][j]: first k observed modes against the first j model modes.
    let mut best = vec![vec![0.0; n + 1]; m + 1];
    for k in 1..=m {
        best[k][0] = best[k - 1][0] + p * settings.weight(k - 1);
        for j in 1..=n {
            let skip_model = best[k][j - 1];
            let skip_obs = best[k - 1][j] + p * settings.weight(k - 1);
            let pair = best[k - 1][j - 1] + cost[k - 1][j - 1];
            best[k][j] = pair.min(skip_model).min(skip_obs);
        }
    }
    let mut matches = vec![None; m];
    let (mut k, mut j) = (m, n);
    while k > 0 {
        if j > 0 && best[k][j] == best[k - 1][j - 1] + cost[k - 1][j - 1] {
            matches[k - 1] = Some(j - 1);
            k -= 1;
            j -= 1;
        } else if j > 0 && best[k][j] == best[k][j - 1] {
            j -= 1;
        } else {
            k -= 1;
        }
    }
    (matches, best[m][n])
}

fn check_target(v: &GridField, target: &SpectralDataset) -> Result<()> {
    if target.is_empty() {
        return Err(Error::InvalidInput("target dataset is empty".into()));
    }
    if target.observation.grid() != v.grid() {
        return Err(Error::InvalidInput("potential and target grids differ".into()));
    }
    Ok(())
}

/// Evaluate the misfit against precomputed model eigenpairs of `v`.
pub fn evaluate_with(v: &GridField, sys: EigenSystem, target: &SpectralDataset, settings: &MisfitSettings) -> Result<MisfitEval> {
    check_target(v, target)?;
    let (matches, data) = align(&sys, target, settings);
    let gauges = matches
        .iter()
        .enumerate()
        .map(|(k, m)| {
            m.map(|j| {
                let col = sys.vectors().column(j);
                let (mut aa, mut ab) = (0.0, Complex64::default());
                for (&c, b) in target.observation.cells().iter().zip(&target.entries[k].restriction) {
                    aa += col[c] * col[c];
                    ab += b * col[c];
                }
                if aa > 0.0 { ab / aa } else { Complex64::default() }
            })
        })
        .collect();
    let regularization = settings.lambda * v.gradient_energy();
    Ok(MisfitEval {
        value: data + regularization,
        data,
        regularization,
        matches,
        gauges,
        eigen: sys,
    })
}

pub fn evaluate(v: &GridField, target: &SpectralDataset, settings: &MisfitSettings) -> Result<MisfitEval> {
    check_target(v, target)?;
    let sys = model_eigensystem(v, target.len())?;
    evaluate_with(v, sys, target, settings)
}

/// `J(V) = Σ_k w_k [ (μ_k(V) − μ_k^obs)² / (1 + μ_k^obs)² + min_c ‖c ψ_k(V)|_O − ψ_k^obs‖² / ‖ψ_k^obs‖² ] + λ ‖∇_h V‖²`.
pub fn spectral_misfit(v: &GridField, target: &SpectralDataset, settings: &MisfitSettings) -> Result<f64> {
    Ok(evaluate(v, target, settings)?.value)
}

#[derive(Debug, Clone)]
pub struct MisfitGradient {
    pub gradient: GridField,
    /// Observed modes whose matched model eigenvalue is degenerate.
    pub frozen: Vec<usize>,
    /// False when every matched mode was frozen.
    pub data_available: bool,
}

fn is_degenerate(sys: &EigenSystem, j: usize) -> bool {
    let mu = sys.eigenvalue(j);
    sys.spectral_gap(j) < DEGENERACY_TOL * (1.0 + mu.abs())
}

/// `∂F/∂a` for `F(a) = 1 − |aᵀb|² / (‖a‖² ‖b‖²)` on the observed cells.
fn function_sensitivity(a: &[f64], b: &[Complex64]) -> Vec<f64> {
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    let s: Complex64 = a.iter().zip(b).map(|(x, y)| y * x).sum();
    let s2 = s.norm_sqr();
    a.iter()
        .zip(b)
        .map(|(&ai, bi)| -2.0 * ((s.conj() * bi).re * aa - s2 * ai) / (aa * aa * bb))
        .collect()
}

/// Gradient of [`spectral_misfit`] with respect to the cell values of `V`.
pub fn misfit_gradient(v: &GridField, target: &SpectralDataset, settings: &MisfitSettings) -> Result<MisfitGradient> {
    let eval = evaluate(v, target, settings)?;
    gradient_of(v, &eval, target, settings)
}

pub fn gradient_of(v: &GridField, eval: &MisfitEval, target: &SpectralDataset, settings: &MisfitSettings) -> Result<MisfitGradient> {
    let sys = &eval.eigen;
    let grid = *v.grid();
    let n = grid.cell_count();
    let h2 = grid.cell_area();
    let cells = target.observation.cells();
    let vecs = sys.vectors();
    let mut grad = vec![0.0; n];
    let mut frozen = Vec::new();
    let mut active = 0;
    let op = assemble_operator(v);

    for (k, m) in eval.matches.iter().enumerate() {
        let Some(j) = *m else { continue };
        if is_degenerate(sys, j) {
            frozen.push(k);
            continue;
        }
        active += 1;
        let w = settings.weight(k);
        let mu = sys.eigenvalue(j);
        let mu_obs = target.entries[k].eigenvalue;
        let phi = vecs.column(j);
        let e = (mu - mu_obs) / (1.0 + mu_obs.abs());
        let ce = 2.0 * w * e / (1.0 + mu_obs.abs());
        for x in 0..n {
            grad[x] += ce * h2 * phi[x] * phi[x];
        }

        let a: Vec<f64> = cells.iter().map(|&c| phi[c]).collect();
        let g_o = function_sensitivity(&a, &target.entries[k].restriction);
        // dF/dV_x = h² φ_j(x) Σ_{i≠j} φ_i(x) (φ_i|_O · g) / (μ_j − μ_i).
        let z: Vec<f64> = if sys.is_complete() {
            let beta: Vec<f64> = (0..sys.len())
                .map(|i| {
                    if i == j {
                        return 0.0;
                    }
                    let col = vecs.column(i);
                    let dot: f64 = cells.iter().zip(&g_o).map(|(&c, g)| col[c] * g).sum();
                    dot / (mu - sys.eigenvalue(i))
                })
                .collect();
            (0..n).map(|x| (0..sys.len()).map(|i| vecs[(x, i)] * beta[i]).sum()).collect()
        } else {
            // (μ_j − A) z = g − φ_j h² (φ_jᵀ g), z ⊥ φ_j, then w = z / h².
            let mut g = vec![0.0; n];
            for (&c, gv) in cells.iter().zip(&g_o) {
                g[c] = *gv;
            }
            let u: Vec<f64> = phi.iter().map(|p| p * grid.spacing()).collect();
            let project = |x: &mut Vec<f64>| {
                let d: f64 = x.iter().zip(&u).map(|(a, b)| a * b).sum();
                x.iter_mut().zip(&u).for_each(|(x, u)| *x -= d * u);
            };
            project(&mut g);
            let apply = |x: &[f64]| {
                let mut px = x.to_vec();
                project(&mut px);
                let ax = op.apply(&px);
                let mut out: Vec<f64> = px.iter().zip(&ax).map(|(p, a)| mu * p - a).collect();
                project(&mut out);
                out
            };
            let (sol, _) = minres(apply, &g, 1e-13, 20 * n);
            sol.iter().map(|s| s / h2).collect()
        };
        for x in 0..n {
            grad[x] += w * h2 * phi[x] * z[x];
        }
    }
    if settings.lambda != 0.0 {
        let lap = v.laplacian();
        for (g, l) in grad.iter_mut().zip(lap.values()) {
            *g += -2.0 * settings.lambda * h2 * l;
        }
    }
    Ok(MisfitGradient {
        gradient: GridField::from_values(grid, grad)?,
        frozen,
        data_available: active > 0,
    })
}

/// Residual vector `r` with `‖r‖² = J(V)` (unmatched penalties excluded)
/// and its Jacobian, for a complete model eigensystem.
pub(crate) fn residual_jacobian(
    v: &GridField,
    eval: &MisfitEval,
    target: &SpectralDataset,
    settings: &MisfitSettings,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let sys = &eval.eigen;
    if !sys.is_complete() {
        return Err(Error::InvalidInput("Jacobian needs the complete eigensystem".into()));
    }
    let grid = *v.grid();
    let n = grid.cell_count();
    let h2 = grid.cell_area();
    let cells = target.observation.cells();
    let no = cells.len();
    let vecs = sys.vectors();
    let mut rows: Vec<f64> = Vec::new();
    let mut jac: Vec<Vec<f64>> = Vec::new();

    let phi_o = DMatrix::from_fn(no, sys.len(), |r, i| vecs[(cells[r], i)]);
    for (k, m) in eval.matches.iter().enumerate() {
        let Some(j) = *m else { continue };
        let sw = settings.weight(k).sqrt();
        let entry = &target.entries[k];
        let mu = sys.eigenvalue(j);
        let mu_obs = entry.eigenvalue;
        let phi = vecs.column(j);
        let frozen = is_degenerate(sys, j);

        rows.push(sw * (mu - mu_obs) / (1.0 + mu_obs.abs()));
        jac.push(if frozen {
            vec![0.0; n]
        } else {
            (0..n).map(|x| sw * h2 * phi[x] * phi[x] / (1.0 + mu_obs.abs())).collect()
        });

        let a: Vec<f64> = cells.iter().map(|&c| phi[c]).collect();
        let b = &entry.restriction;
        let aa: f64 = a.iter().map(|x| x * x).sum();
        let bn: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let c: Complex64 = a.iter().zip(b).map(|(x, y)| y * x).sum::<Complex64>() / aa;
        let scale = sw / bn;
        let r: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| (c * x - y) * scale).collect();
        // S = da/dV = Φ_O D (h² Φᵀ diag(φ_j)), D_ii = 1/(μ_j − μ_i), D_jj = 0.
        let s = if frozen {
            DMatrix::zeros(no, n)
        } else {
            let mut g = phi_o.clone();
            for i in 0..sys.len() {
                let d = if i == j { 0.0 } else { 1.0 / (mu - sys.eigenvalue(i)) };
                g.column_mut(i).scale_mut(d);
            }
            let mut psi = vecs.transpose();
            for x in 0..n {
                psi.column_mut(x).scale_mut(h2 * phi[x]);
            }
            g * psi
        };
        // dr/dV = scale (c S + a qᵀ), q = (b − 2 c a)ᵀ S / ‖a‖².
        let q: Vec<Complex64> = (0..n)
            .map(|x| {
                (0..no)
                    .map(|i| (b[i] - c * (2.0 * a[i])) * s[(i, x)])
                    .sum::<Complex64>()
                    / aa
            })
            .collect();
        for i in 0..no {
            rows.push(r[i].re);
            rows.push(r[i].im);
            let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
            for x in 0..n {
                let d = (c * s[(i, x)] + q[x] * a[i]) * scale;
                re[x] = d.re;
                im[x] = d.im;
            }
            jac.push(re);
            jac.push(im);
        }
    }
    if settings.lambda > 0.0 {
        let sl = settings.lambda.sqrt();
        let vals = v.values();
        for c in 0..n {
            let nb = grid.neighbours(c);
            for &other in &[nb[3], nb[1]] {
                rows.push(sl * (vals[other] - vals[c]));
                let mut row = vec![0.0; n];
                row[other] += sl;
                row[c] -= sl;
                jac.push(row);
            }
        }
    }
    let m = rows.len();
    let jm = DMatrix::from_fn(m, n, |r, x| jac[r][x]);
    Ok((rows, jm))
}
