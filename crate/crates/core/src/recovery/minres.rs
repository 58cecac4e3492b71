//! MINRES for symmetric, possibly indefinite systems.

/// Solve `A x = b` for symmetric `A` given by `apply`, starting from zero.
/// Returns the iterate and the final residual estimate.
pub fn minres(apply: impl Fn(&[f64]) -> Vec<f64>, b: &[f64], rtol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let n = b.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![0.0; n];
    let beta1 = dot(b, b).sqrt();
    if beta1 == 0.0 {
        return (x, 0.0);
    }
    let mut r1 = b.to_vec();
    let mut r2 = b.to_vec();
    let mut y = b.to_vec();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0, 0.0);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    for itn in 0..max_iter {
        let v: Vec<f64> = y.iter().map(|t| t / beta).collect();
        y = apply(&v);
        if itn > 0 {
            let f = beta / oldb;
            y.iter_mut().zip(&r1).for_each(|(y, r)| *y -= f * r);
        }
        let alfa = dot(&v, &y);
        let f = alfa / beta;
        y.iter_mut().zip(&r2).for_each(|(y, r)| *y -= f * r);
        r1 = std::mem::replace(&mut r2, y.clone());
        oldb = beta;
        beta = dot(&y, &y).sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let w1 = std::mem::replace(&mut w2, w.clone());
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
            x[i] += phi * w[i];
        }
        if phibar <= rtol * beta1 || beta == 0.0 {
            break;
        }
    }
    (x, phibar)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indefinite_diagonal_plus_coupling() {
        let d = [3.0, -1.0, 2.0, -4.0, 0.5];
        let apply = |x: &[f64]| -> Vec<f64> {
            (0..5)
                .map(|i| d[i] * x[i] + 0.1 * (x[(i + 1) % 5] + x[(i + 4) % 5]))
                .collect()
        };
        let b = [1.0, 2.0, -1.0, 0.5, 0.3];
        let (x, _) = minres(apply, &b, 1e-14, 100);
        let ax = apply(&x);
        for (a, b) in ax.iter().zip(&b) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
