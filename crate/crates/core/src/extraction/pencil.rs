//! Multi-channel matrix pencil with variable-projection refinement.
//!
//! Data are `Y[c, n] = Σ_k r_k[c] φ_k(p_k, t_n)` with real mode parameters
//! `p_k`. Rates are estimated from the shift invariance of the dominant
//! temporal subspace, then polished by Gauss–Newton on the separable
//! least-squares misfit with the linear coefficients eliminated.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Temporal model of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeFamily {
    /// `e^{-p t}`.
    Decay,
    /// `e^{-i p t}`.
    Oscillation,
    /// `cos(p t)` and `sin(p t)`.
    RealOscillation,
}

impl ModeFamily {
    fn columns(self) -> usize {
        match self {
            Self::RealOscillation => 2,
            _ => 1,
        }
    }

    /// Basis values and their `p`-derivatives at `t`.
    fn eval(self, p: f64, t: f64, out: &mut [Complex64; 2], d: &mut [Complex64; 2]) {
        match self {
            Self::Decay => {
                let e = (-p * t).exp();
                out[0] = Complex64::new(e, 0.0);
                d[0] = Complex64::new(-t * e, 0.0);
            }
            Self::Oscillation => {
                let e = Complex64::from_polar(1.0, -p * t);
                out[0] = e;
                d[0] = e * Complex64::new(0.0, -t);
            }
            Self::RealOscillation => {
                let (s, c) = (p * t).sin_cos();
                out[0] = Complex64::new(c, 0.0);
                out[1] = Complex64::new(s, 0.0);
                d[0] = Complex64::new(-t * s, 0.0);
                d[1] = Complex64::new(t * c, 0.0);
            }
        }
    }

    /// Mode parameters from pencil exponents `λ` with `φ ∝ e^{λt}`.
    fn parameters(self, exponents: &[Complex64], merge_tol: f64) -> Vec<f64> {
        let mut p: Vec<f64> = match self {
            Self::Decay => exponents.iter().map(|l| -l.re).collect(),
            Self::Oscillation => exponents.iter().map(|l| -l.im).collect(),
            Self::RealOscillation => exponents.iter().map(|l| l.im.abs()).collect(),
        };
        p.sort_by(f64::total_cmp);
        merge_close(&p, merge_tol)
    }
}

/// Average runs of values within `tol · (1 + |p|)` of their neighbour.
pub fn merge_close(sorted: &[f64], tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    let mut run: Vec<f64> = Vec::new();
    for &v in sorted {
        if let Some(&last) = run.last() {
            if (v - last).abs() > tol * (1.0 + v.abs()) {
                out.push(run.iter().sum::<f64>() / run.len() as f64);
                run.clear();
            }
        }
        run.push(v);
    }
    if !run.is_empty() {
        out.push(run.iter().sum::<f64>() / run.len() as f64);
    }
    out
}

#[derive(Debug, Clone)]
pub struct PencilOptions {
    /// Upper bound on the number of modes.
    pub max_modes: usize,
    /// Singular values below `rank_tol · σ_1` are treated as zero.
    pub rank_tol: f64,
    /// Standard deviation of additive noise per real component.
    pub noise_sigma: f64,
    /// Parameters closer than this (relative to `1 + |p|`) are one mode.
    pub merge_tol: f64,
    /// Target number of decimated samples for the subspace step.
    pub subspace_samples: usize,
    pub refine: bool,
    pub max_refine_iters: usize,
}

impl Default for PencilOptions {
    fn default() -> Self {
        Self {
            max_modes: 16,
            rank_tol: 1e-11,
            noise_sigma: 0.0,
            merge_tol: 1e-8,
            subspace_samples: 512,
            refine: true,
            max_refine_iters: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PencilFit {
    /// Mode parameters, ascending.
    pub parameters: Vec<f64>,
    /// Linear coefficients, one row per basis column and one column per channel.
    pub coefficients: DMatrix<Complex64>,
    /// Leading singular values of the subspace matrix.
    pub singular_values: Vec<f64>,
    /// Numerical rank of the subspace matrix.
    pub rank: usize,
    pub stride: usize,
    /// `‖Y − fit‖_F / ‖Y‖_F`.
    pub relative_residual: f64,
    /// RMS of the fit residual per real component.
    pub residual_rms: f64,
    pub refine_iterations: usize,
}

/// Temporal basis `Φ` (`N × P`) and its parameter derivatives.
fn basis(family: ModeFamily, params: &[f64], times: &[f64]) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let w = family.columns();
    let mut phi = DMatrix::zeros(times.len(), w * params.len());
    let mut dphi = phi.clone();
    let (mut o, mut d) = ([Complex64::default(); 2], [Complex64::default(); 2]);
    for (n, &t) in times.iter().enumerate() {
        for (k, &p) in params.iter().enumerate() {
            family.eval(p, t, &mut o, &mut d);
            for c in 0..w {
                phi[(n, w * k + c)] = o[c];
                dphi[(n, w * k + c)] = d[c];
            }
        }
    }
    (phi, dphi)
}

/// Least-squares coefficients `Φ⁺ Y^T` and the residual Frobenius norm.
fn linear_fit(phi: &DMatrix<Complex64>, yt: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let qr = phi.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let qty = q.adjoint() * yt;
    let coeffs = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Singular {
            what: "temporal mode basis".into(),
            sigma: 0.0,
        })?;
    Ok((coeffs, q))
}

fn rank_threshold(sv: &[f64], rows: usize, cols: usize, opts: &PencilOptions) -> f64 {
    let s1 = sv.first().copied().unwrap_or(0.0);
    let noise_floor = 2.0 * opts.noise_sigma * ((rows as f64).sqrt() + (cols as f64).sqrt());
    (opts.rank_tol * s1).max(noise_floor)
}

/// Orthonormal basis of the dominant channel subspace, from decimated data.
fn channel_basis(y: &DMatrix<Complex64>, stride: usize, cap: usize, opts: &PencilOptions) -> DMatrix<Complex64> {
    let samples: Vec<usize> = (0..y.ncols()).step_by(stride).collect();
    let dec = DMatrix::from_fn(y.nrows(), samples.len(), |r, c| y[(r, samples[c])]);
    let svd = dec.svd(true, false);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let thr = rank_threshold(&sv, y.nrows(), samples.len(), opts);
    let q = sv.iter().take_while(|&&s| s > thr).count().clamp(1, cap.max(1));
    svd.u.expect("left vectors requested").columns(0, q).into_owned()
}

/// Exponents `λ` with modes `∝ e^{λ t}` from the shift invariance of the
/// dominant right singular subspace of a lag-stacked, decimated matrix of
/// compressed channels.
fn subspace_exponents(
    y: &DMatrix<Complex64>,
    dt: f64,
    stride: usize,
    rank_cap: usize,
    long_shift: bool,
    opts: &PencilOptions,
) -> Result<(Vec<Complex64>, Vec<f64>, usize)> {
    let ch = y.nrows();
    let samples: Vec<usize> = (0..y.ncols()).step_by(stride).collect();
    let m = samples.len();
    // Enough lags for every exponent even when channel residues are
    // linearly dependent.
    let lags = (rank_cap + 2).saturating_sub(ch).max(2);
    if m < lags + rank_cap + 2 {
        return Err(Error::InvalidInput(format!(
            "{m} samples cannot resolve {rank_cap} exponents; lengthen the recording"
        )));
    }
    let cols = m - lags + 1;
    let h = DMatrix::from_fn(ch * lags, cols, |r, c| y[(r % ch, samples[c + r / ch])]);
    let svd = h.svd(false, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let threshold = rank_threshold(&sv, ch * lags, cols, opts);
    let rank = sv.iter().take_while(|&&s| s > threshold).count().min(rank_cap);
    if rank == 0 {
        return Ok((Vec::new(), sv, 0));
    }
    let vt = svd.v_t.as_ref().expect("right vectors requested");
    let w = vt.rows(0, rank).into_owned();
    // A long shift separates slowly varying exponents but is only safe
    // when they cannot alias.
    let shift = if long_shift { ((cols - 1) / 2).max(1) } else { 1 };
    let w1 = w.columns(0, cols - shift).transpose();
    let w2 = w.columns(shift, cols - shift).transpose();
    // W2 = Ψ W1  ⇔  W1^T Ψ^T = W2^T.
    let psi_t = w1
        .svd(true, true)
        .solve(&w2, 1e-300)
        .map_err(|e| Error::NoResult(e.to_string()))?;
    let eig = Schur::try_new(psi_t.transpose(), 1e-15, 10_000)
        .and_then(|s| s.eigenvalues())
        .ok_or_else(|| Error::NoResult("shift operator eigenvalues did not converge".into()))?;
    let step = (stride * shift) as f64 * dt;
    let exps = eig.iter().map(|z| z.ln() / step).collect();
    Ok((exps, sv, rank))
}

/// Fit `Y[c, n] ≈ Σ_k φ(p_k, t_n) C[k, c]`; `y` has one row per channel.
pub fn fit_modes(y: &DMatrix<Complex64>, times: &[f64], family: ModeFamily, opts: &PencilOptions) -> Result<PencilFit> {
    let n = times.len();
    if y.ncols() != n {
        return Err(Error::InvalidInput("one sample per time required".into()));
    }
    if n < 4 {
        return Err(Error::InvalidInput("need at least four samples".into()));
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    let t0 = times[0];
    let rel_times: Vec<f64> = times.iter().map(|t| t - t0).collect();
    let rank_cap = opts.max_modes * family.columns();

    // Nyquist bound from a short full-rate prefix, then a stride that keeps
    // the decimated exponents unaliased.
    let target = opts.subspace_samples.max(4 * rank_cap + 8);
    let mut stride = (n / target).max(1);
    let u = channel_basis(y, stride, rank_cap, opts);
    let yc = u.adjoint() * y;
    if family != ModeFamily::Decay && stride > 1 {
        let prefix = (8 * rank_cap + 16).min(n);
        let head = yc.columns(0, prefix).into_owned();
        let (exps, ..) = subspace_exponents(&head, dt, 1, rank_cap.min(prefix / 3), false, opts)?;
        let omega = exps.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
        if omega > 0.0 {
            let nyquist = (0.8 * std::f64::consts::PI / (1.25 * omega * dt)).floor() as usize;
            stride = stride.min(nyquist.max(1));
        }
    }
    let (exps, singular_values, rank) = subspace_exponents(&yc, dt, stride, rank_cap, family == ModeFamily::Decay, opts)?;
    let mut params = family.parameters(&exps, opts.merge_tol);
    if params.is_empty() {
        return Err(Error::NoResult("recording has numerical rank zero".into()));
    }

    let yct = yc.transpose();
    let mut iterations = 0;
    if opts.refine {
        let misfit = |p: &[f64]| -> Result<f64> {
            let (phi, _) = basis(family, p, &rel_times);
            let (c, _) = linear_fit(&phi, &yct)?;
            Ok((&yct - &phi * c).norm())
        };
        let mut current = misfit(&params)?;
        let mut damping = 1e-12;
        for _ in 0..opts.max_refine_iters {
            iterations += 1;
            let (phi, dphi) = basis(family, &params, &rel_times);
            let (c, q) = linear_fit(&phi, &yct)?;
            let res = &yct - &phi * &c;
            let w = family.columns();
            let k = params.len();
            let jac: Vec<DMatrix<Complex64>> = (0..k)
                .map(|j| {
                    let dk = dphi.columns(w * j, w) * c.rows(w * j, w);
                    let proj = &q * (q.adjoint() * &dk);
                    -(dk - proj)
                })
                .collect();
            let mut jtj = DMatrix::<f64>::zeros(k, k);
            let mut jtr = DVector::<f64>::zeros(k);
            for a in 0..k {
                for b in a..k {
                    let v = jac[a].dotc(&jac[b]).re;
                    jtj[(a, b)] = v;
                    jtj[(b, a)] = v;
                }
                jtr[a] = jac[a].dotc(&res).re;
            }
            let scale = (0..k).map(|i| jtj[(i, i)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            let mut accepted = false;
            for _ in 0..30 {
                let mut sys = jtj.clone();
                for i in 0..k {
                    sys[(i, i)] += damping * scale;
                }
                let Some(step) = sys.cholesky().map(|ch| ch.solve(&(-&jtr))) else {
                    damping *= 10.0;
                    continue;
                };
                let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
                let value = misfit(&trial)?;
                if value <= current {
                    let moved = step.iter().zip(&trial).map(|(s, p)| s.abs() / (1.0 + p.abs())).fold(0.0, f64::max);
                    let gain = current - value;
                    params = trial;
                    current = value;
                    damping = (damping / 10.0).max(1e-15);
                    accepted = true;
                    if moved < 1e-15 || gain <= 1e-15 * current {
                        accepted = false;
                    }
                    break;
                }
                damping *= 10.0;
            }
            if !accepted {
                break;
            }
        }
        params.sort_by(f64::total_cmp);
        params = merge_close(&params, opts.merge_tol);
    }

    let (phi, _) = basis(family, &params, &rel_times);
    let yt = y.transpose();
    let (coefficients, _) = linear_fit(&phi, &yt)?;
    let res = &yt - &phi * &coefficients;
    let total = y.norm();
    let relative_residual = if total > 0.0 { (res.norm() / total).min(1.0) } else { 0.0 };
    let real_components = if family == ModeFamily::Oscillation { 2.0 } else { 1.0 };
    let residual_rms = res.norm() / ((res.len() as f64) * real_components).sqrt();
    Ok(PencilFit {
        parameters: params,
        coefficients,
        singular_values: singular_values.into_iter().take(2 * rank_cap.max(1)).collect(),
        rank,
        stride,
        relative_residual,
        residual_rms,
        refine_iterations: iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(family: ModeFamily, params: &[f64], amps: &[[f64; 3]], times: &[f64]) -> DMatrix<Complex64> {
        let (phi, _) = basis(family, params, times);
        let w = family.columns();
        DMatrix::from_fn(3, times.len(), |c, n| {
            (0..params.len() * w).map(|j| phi[(n, j)] * amps[j][c]).sum()
        })
    }

    #[test]
    fn two_decays() {
        let times: Vec<f64> = (0..=400).map(|i| i as f64 * 1e-2).collect();
        let y = synth(ModeFamily::Decay, &[1.0, 2.0], &[[1.0, 0.5, -0.3], [0.7, -1.0, 0.2]], &times);
        let fit = fit_modes(&y, &times, ModeFamily::Decay, &PencilOptions::default()).unwrap();
        assert_eq!(fit.parameters.len(), 2);
        assert!((fit.parameters[0] - 1.0).abs() < 1e-8 && (fit.parameters[1] - 2.0).abs() < 1e-8);
        assert!((fit.coefficients[(1, 1)] - Complex64::new(-1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn single_decay_exact() {
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 1e-2).collect();
        let y = synth(ModeFamily::Decay, &[3.7], &[[1.0, 2.0, 3.0]], &times);
        let fit = fit_modes(&y, &times, ModeFamily::Decay, &PencilOptions::default()).unwrap();
        assert!((fit.parameters[0] - 3.7).abs() < 1e-10);
    }

    #[test]
    fn oscillations_with_decimation() {
        let times: Vec<f64> = (0..=20_000).map(|i| i as f64 * 1e-3).collect();
        let p = [0.7, 2.2, 5.1];
        let amps = [[1.0, 0.2, 0.1], [0.3, 1.0, -0.4], [0.5, 0.5, 1.0]];
        let y = synth(ModeFamily::Oscillation, &p, &amps, &times);
        let fit = fit_modes(&y, &times, ModeFamily::Oscillation, &PencilOptions::default()).unwrap();
        assert!(fit.stride > 1);
        for (a, b) in fit.parameters.iter().zip(p) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        let amps = [[1.0, 0.0, 0.1], [0.0, 1.0, 0.0], [0.3, 0.0, 1.0], [0.0, 0.5, 0.2]];
        let y = synth(ModeFamily::RealOscillation, &[1.3, 2.9], &amps, &times);
        let fit = fit_modes(&y, &times, ModeFamily::RealOscillation, &PencilOptions::default()).unwrap();
        assert!((fit.parameters[0] - 1.3).abs() < 1e-9 && (fit.parameters[1] - 2.9).abs() < 1e-9);
        assert!((fit.coefficients[(3, 1)] - Complex64::new(0.5, 0.0)).norm() < 1e-8);
    }
}
