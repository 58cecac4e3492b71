//! Γ-sets of shifted square-root sums and differences, uniform gaps, upper
//! uniform density estimates, and the sparsity verdict.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparsity::spectrum::Spectrum;

/// Values closer than this are treated as one point of Γ.
pub const DEDUP_TOL: f64 = 1e-12;

/// Default window lengths for density estimates.
pub const DEFAULT_WINDOWS: [f64; 4] = [10.0, 20.0, 40.0, 80.0];

pub const SPARSE_GAP_MIN: f64 = 1e-6;
pub const SPARSE_DENSITY_MAX: f64 = 0.02;
pub const DENSE_PLATEAU_MIN: f64 = 0.05;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaSet {
    /// Sorted, strictly increasing after deduplication.
    pub points: Vec<f64>,
    /// How the set was generated.
    pub source: String,
    /// Distinct expressions that landed within [`DEDUP_TOL`] of each other.
    pub collisions: usize,
}

impl GammaSet {
    /// Sort and deduplicate arbitrary points.
    pub fn from_points(mut raw: Vec<f64>, source: impl Into<String>) -> Self {
        raw.sort_by(f64::total_cmp);
        let mut points: Vec<f64> = Vec::with_capacity(raw.len());
        let mut collisions = 0;
        for v in raw {
            match points.last() {
                Some(&last) if v - last <= DEDUP_TOL => collisions += 1,
                _ => points.push(v),
            }
        }
        Self {
            points,
            source: source.into(),
            collisions,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn span(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

/// Γ for the sub-collection `subset` of `spectrum`, with `λ_1` the
/// spectrum's minimum. Eigenvalue multiplicity is ignored.
pub fn gamma_set<S: Spectrum + ?Sized>(spectrum: &S, subset: &[usize]) -> Result<GammaSet> {
    check_subset(spectrum, subset)?;
    let lambda1 = spectrum.value(0);
    let mut roots: Vec<f64> = subset
        .iter()
        .map(|&k| (spectrum.value(k) - lambda1 + 1.0).sqrt())
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    let mut raw = Vec::with_capacity(3 * roots.len() * roots.len() + 1);
    if !roots.is_empty() {
        raw.push(0.0);
    }
    for (j, a) in roots.iter().enumerate() {
        for (k, b) in roots.iter().enumerate() {
            if j != k {
                raw.push(a - b);
            }
            if j <= k {
                raw.push(a + b);
                raw.push(-(a + b));
            }
        }
    }
    Ok(GammaSet::from_points(
        raw,
        format!("{} eigenvalues, λ_1 = {lambda1}", roots.len()),
    ))
}

fn check_subset<S: Spectrum + ?Sized>(spectrum: &S, subset: &[usize]) -> Result<()> {
    if spectrum.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    if let Some(&k) = subset.iter().find(|&&k| k >= spectrum.len()) {
        return Err(Error::InvalidInput(format!("index {k} beyond truncation of {}", spectrum.len())));
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() >= spectrum.len() {
        return Err(Error::InvalidInput("subset must be a proper subset of the spectrum".into()));
    }
    Ok(())
}

/// Minimum distance between neighbouring points.
pub fn uniform_gap(gamma: &GammaSet) -> Result<f64> {
    if gamma.len() < 2 {
        return Err(Error::InvalidInput("uniform gap needs at least two points".into()));
    }
    Ok(gamma
        .points
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min))
}

/// `sup_s #(Γ ∩ (s, s+l)) / l` for each window `l`, exact on the truncation.
///
/// For sorted points the supremum over open windows equals
/// `max_i #{j : γ_i ≤ γ_j < γ_i + l}`, evaluated with a two-pointer sweep.
pub fn upper_uniform_density(gamma: &GammaSet, windows: &[f64]) -> Result<Vec<(f64, f64)>> {
    if windows.is_empty() || windows.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidInput("windows must be positive".into()));
    }
    if windows.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("windows must be increasing".into()));
    }
    let guard = gamma.span() / 4.0;
    if let Some(&l) = windows.iter().find(|&&l| l > guard) {
        return Err(Error::InvalidInput(format!(
            "window {l} exceeds the truncation guard span/4 = {guard}"
        )));
    }
    let pts = &gamma.points;
    Ok(windows
        .iter()
        .map(|&l| {
            let mut best = 0usize;
            let mut hi = 0usize;
            for lo in 0..pts.len() {
                if hi < lo {
                    hi = lo;
                }
                while hi < pts.len() && pts[hi] < pts[lo] + l {
                    hi += 1;
                }
                best = best.max(hi - lo);
            }
            (l, best as f64 / l)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparsityVerdict {
    Sparse,
    NotSparse,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SparsityReport {
    pub uniform_gap: Option<f64>,
    pub density_estimates: Vec<(f64, f64)>,
    pub verdict: SparsityVerdict,
    /// Number of distinct points of Γ examined.
    pub truncation_size: usize,
    pub collisions: usize,
    pub policy: String,
}

/// Default window ladder: [`DEFAULT_WINDOWS`] when the truncation is wide
/// enough, otherwise four doublings ending at `span/4`.
pub fn default_windows(span: f64) -> Vec<f64> {
    let top = span / 4.0;
    if top >= DEFAULT_WINDOWS[3] {
        DEFAULT_WINDOWS.to_vec()
    } else {
        (0..4).map(|i| top / f64::powi(2.0, 3 - i)).collect()
    }
}

/// Finite-truncation sparsity verdict for `subset ⊂ spectrum`.
///
/// `sparse`: gap above [`SPARSE_GAP_MIN`], last density below
/// [`SPARSE_DENSITY_MAX`] and nonincreasing densities over the ladder.
/// `not_sparse`: gap at most [`SPARSE_GAP_MIN`], or densities that stay
/// above [`DENSE_PLATEAU_MIN`] without decaying (last ≥ 0.9 × previous).
pub fn is_lambda_sparse<S: Spectrum + ?Sized>(
    spectrum: &S,
    subset: &[usize],
    windows: Option<&[f64]>,
) -> Result<SparsityReport> {
    let policy = format!(
        "sparse: gap > {SPARSE_GAP_MIN:e}, last density < {SPARSE_DENSITY_MAX}, nonincreasing; \
         not_sparse: gap ≤ {SPARSE_GAP_MIN:e} or plateau above {DENSE_PLATEAU_MIN}"
    );
    let gamma = gamma_set(spectrum, subset)?;
    if subset.is_empty() {
        return Ok(SparsityReport {
            uniform_gap: None,
            density_estimates: Vec::new(),
            verdict: SparsityVerdict::Sparse,
            truncation_size: 0,
            collisions: 0,
            policy,
        });
    }
    let gap = uniform_gap(&gamma)?;
    let ladder = match windows {
        Some(w) => w.to_vec(),
        None => default_windows(gamma.span()),
    };
    let density = upper_uniform_density(&gamma, &ladder)?;
    let d: Vec<f64> = density.iter().map(|&(_, v)| v).collect();
    let last = *d.last().expect("nonempty ladder");
    let nonincreasing = d.windows(2).all(|w| w[1] <= w[0]) && (d.len() < 2 || last < d[0]);
    let plateau = last > DENSE_PLATEAU_MIN && (d.len() < 2 || last >= 0.9 * d[d.len() - 2]);
    let verdict = if gap <= SPARSE_GAP_MIN || plateau {
        SparsityVerdict::NotSparse
    } else if last < SPARSE_DENSITY_MAX && nonincreasing {
        SparsityVerdict::Sparse
    } else {
        SparsityVerdict::Inconclusive
    };
    Ok(SparsityReport {
        uniform_gap: Some(gap),
        density_estimates: density,
        verdict,
        truncation_size: gamma.len(),
        collisions: gamma.collisions,
        policy,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SparseSelection {
    /// One index per covered block, ascending.
    pub indices: Vec<usize>,
    /// Blocks `(A^{2k}, A^{2k+1}]` that produced the indices.
    pub blocks: Vec<(f64, f64)>,
    /// First block that could not be filled, if the scan stopped early.
    pub stopped_at: Option<(f64, f64)>,
}

/// One eigenvalue from each block `(A^{2k}, A^{2k+1}]`, `k = 1, 2, …`,
/// scanning until the truncation is exhausted.
pub fn select_sparse_subsequence<S: Spectrum + ?Sized>(spectrum: &S, a: f64) -> Result<SparseSelection> {
    if !(a > 1.0) {
        return Err(Error::InvalidInput("block base A must exceed 1".into()));
    }
    if spectrum.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    let top = spectrum.max_value();
    let mut sel = SparseSelection {
        indices: Vec::new(),
        blocks: Vec::new(),
        stopped_at: None,
    };
    for k in 1.. {
        let lo = a.powi(2 * k);
        let hi = a.powi(2 * k + 1);
        if lo >= top {
            break;
        }
        let first = spectrum.count_le(lo);
        if first < spectrum.len() && spectrum.value(first) <= hi {
            sel.indices.push(first);
            sel.blocks.push((lo, hi));
        } else {
            if hi <= top {
                sel.stopped_at = Some((lo, hi));
            }
            break;
        }
    }
    if sel.indices.is_empty() {
        let (lo, hi) = sel.stopped_at.unwrap_or((a * a, a * a * a));
        return Err(Error::Coverage { lo, hi, found: 0 });
    }
    Ok(sel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsity::spectrum::FlatTorusSpectrum;

    fn integers(n: i64) -> GammaSet {
        GammaSet::from_points((-n..=n).map(|v| v as f64).collect(), "integers")
    }

    #[test]
    fn gaps() {
        assert_eq!(uniform_gap(&integers(100)).unwrap(), 1.0);
        let dyadic: Vec<f64> = (1..=10).flat_map(|j| [2f64.powi(j), -(2f64.powi(j))]).collect();
        assert_eq!(uniform_gap(&GammaSet::from_points(dyadic, "dyadic")).unwrap(), 2.0);
        let dup = GammaSet::from_points(vec![0.0, 1.0, 1.0 + 1e-13, 3.0], "dup");
        assert_eq!(dup.collisions, 1);
        assert_eq!(uniform_gap(&dup).unwrap(), 1.0);
        assert!(uniform_gap(&GammaSet::from_points(vec![1.0], "one")).is_err());
    }

    #[test]
    fn densities_of_reference_sets() {
        let z = integers(400);
        for (l, d) in upper_uniform_density(&z, &[10.0, 20.0, 40.0]).unwrap() {
            assert!((d - 1.0).abs() <= 1.0 / l);
        }
        let ap = GammaSet::from_points((0..400).map(|k| 2.5 * k as f64).collect(), "ap");
        for (l, d) in upper_uniform_density(&ap, &[10.0, 20.0, 40.0]).unwrap() {
            assert!((d - 0.4).abs() <= 1.0 / l);
        }
        let dyadic = GammaSet::from_points((1..=10).flat_map(|j| [2f64.powi(j), -(2f64.powi(j))]).collect(), "d");
        let est = upper_uniform_density(&dyadic, &DEFAULT_WINDOWS).unwrap();
        assert!(est.windows(2).all(|w| w[1].1 < w[0].1));
        assert!(upper_uniform_density(&integers(10), &[10.0]).is_err());
    }

    #[test]
    fn gamma_structure() {
        let lam = vec![0.0, 1.0, 1.0, 2.0, 4.0, 5.0];
        let g = gamma_set(&lam, &[3]).unwrap();
        let r = 2.0 * (2.0f64 + 1.0).sqrt();
        assert_eq!(g.points, vec![-r, 0.0, r]);
        let g = gamma_set(&lam, &[0]).unwrap();
        assert_eq!(g.points, vec![-2.0, 0.0, 2.0]);
        assert!(gamma_set(&lam, &[]).unwrap().is_empty());
        assert!(gamma_set(&lam, &[0, 1, 2, 3, 4, 5]).is_err());
    }

    #[test]
    fn empty_subset_is_sparse() {
        let lam = vec![0.0, 1.0, 2.0];
        assert_eq!(is_lambda_sparse(&lam, &[], None).unwrap().verdict, SparsityVerdict::Sparse);
    }

    #[test]
    fn squares_are_not_sparse() {
        let lam: Vec<f64> = (1..=200).map(|k| (k * k) as f64).collect();
        let subset: Vec<usize> = (1..200).collect();
        let r = is_lambda_sparse(&lam, &subset, None).unwrap();
        assert_eq!(r.verdict, SparsityVerdict::NotSparse);
    }

    #[test]
    fn dyadic_blocks_on_torus() {
        let s = FlatTorusSpectrum::standard(200);
        let sel = select_sparse_subsequence(&s, 2.0).unwrap();
        let vals: Vec<f64> = sel.indices.iter().map(|&k| s.value(k)).collect();
        assert_eq!(vals, vec![5.0, 17.0, 65.0]);
        assert_eq!(sel.blocks[0], (4.0, 8.0));
        assert!(select_sparse_subsequence(&s, 100.0).is_err());
    }
}
