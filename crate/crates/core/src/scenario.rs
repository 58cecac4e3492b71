//! JSON scenario files describing a complete synthetic experiment.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Equation;
use crate::field::{smooth_bump, GridField};
use crate::spectral::eigen::EigenSystem;
use crate::torus::{MaskRecord, ObservationSet, Point, TorusGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_side: usize,
    #[serde(default = "two_pi")]
    pub side_length: f64,
}

fn two_pi() -> f64 {
    2.0 * PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Constant { value: f64 },
    Bump { center: Point, width: f64, amplitude: f64 },
    /// Random trigonometric polynomial with frequencies `|m|_∞ ≤ cutoff`,
    /// scaled so that `max |V| = amplitude`.
    RandomSmooth { seed: u64, cutoff: usize, amplitude: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservationSpec {
    Strip { orientation: Orientation, center: f64, half_width: f64 },
    Disc { center: Point, radius: f64 },
    /// Horizontal strip at `center[0]` and vertical strip at `center[1]`.
    Cross { center: Point, half_width: f64 },
    Quarter,
    /// Mask JSON (`n_side`, `side_length`, `runs`), relative to the scenario file.
    MaskFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `f = Σ c φ_k` (and `h` for the wave equation) over eigenmodes of `V`.
    Modes {
        f: Vec<(usize, f64)>,
        #[serde(default)]
        h: Vec<(usize, f64)>,
    },
    /// The first `count` simple eigenmodes with coefficients `1, 1.5, 2, …`;
    /// the wave velocity uses the same modes with half the weight.
    SimpleModes { count: usize },
    Bump { center: Point, width: f64, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordingSpec {
    /// Heat window; defaults to `2/μ_max` over the excited modes.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Wave and Schrödinger window.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_horizon() -> f64 {
    20.0
}

fn default_dt() -> f64 {
    1e-3
}

impl Default for RecordingSpec {
    fn default() -> Self {
        Self {
            epsilon: None,
            horizon: default_horizon(),
            dt: default_dt(),
            sigma: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionSpec {
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Relative eigenvalue tolerance for pairing.
    #[serde(default = "default_eig_tol")]
    pub eig_tol: f64,
    /// Gauge-aligned relative tolerance for pairing restrictions.
    #[serde(default = "default_fun_tol")]
    pub fun_tol: f64,
}

fn default_k_max() -> usize {
    16
}

fn default_eig_tol() -> f64 {
    1e-6
}

fn default_fun_tol() -> f64 {
    1e-4
}

impl Default for ExtractionSpec {
    fn default() -> Self {
        Self {
            k_max: default_k_max(),
            eig_tol: default_eig_tol(),
            fun_tol: default_fun_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverySpec {
    /// Initial regularization weight; `None` means `1e-3 ·` warm-start data misfit.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Run the global fit after the on-O estimate.
    #[serde(default = "yes")]
    pub global: bool,
}

fn default_iterations() -> usize {
    200
}

fn default_theta() -> f64 {
    crate::recovery::DEFAULT_THETA
}

fn yes() -> bool {
    true
}

impl Default for RecoverySpec {
    fn default() -> Self {
        Self {
            lambda: None,
            iterations: default_iterations(),
            theta: default_theta(),
            global: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    /// GCC horizon; defaults to twice the side length.
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Leading eigenpairs covered by the observability table.
    #[serde(default = "default_observability_modes")]
    pub observability_modes: usize,
    /// Eigenvalue indices whose Λ-sparsity is reported; defaults to the
    /// dyadic block selection with base 2.
    #[serde(default)]
    pub subset: Option<Vec<usize>>,
}

fn default_observability_modes() -> usize {
    16
}

impl Default for CheckSpec {
    fn default() -> Self {
        Self {
            horizon: None,
            observability_modes: default_observability_modes(),
            subset: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub grid: GridSpec,
    pub potential: PotentialSpec,
    pub observation: ObservationSpec,
    pub equation: Equation,
    pub initial: InitialSpec,
    #[serde(default)]
    pub recording: RecordingSpec,
    #[serde(default)]
    pub extraction: ExtractionSpec,
    #[serde(default)]
    pub recovery: RecoverySpec,
    #[serde(default)]
    pub check: CheckSpec,
    /// Directory that relative paths are resolved against; not serialized.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// Scenarios shipped with the crate, by name.
pub const BUNDLED: &[&str] = &["heat-bump-cross", "strip-only", "wave-bump-cross"];

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    /// Reads a scenario file, or a bundled scenario when `path` names one.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            if let Some(s) = path.to_str().and_then(Self::bundled) {
                return Ok(s);
            }
        }
        let mut s = Self::from_json(&std::fs::read_to_string(path)?)?;
        s.base_dir = path.parent().map(Path::to_path_buf);
        if let ObservationSpec::MaskFile { path: mask } = &s.observation {
            let full = s.resolve(mask);
            if !full.exists() {
                return Err(Error::InvalidInput(format!("mask file {} not found", full.display())));
            }
        }
        Ok(s)
    }

    pub fn bundled(name: &str) -> Option<Self> {
        let cross = ObservationSpec::Cross {
            center: [PI, 0.0],
            half_width: 0.8,
        };
        let bump = PotentialSpec::Bump {
            center: [2.0, 2.5],
            width: 1.5,
            amplitude: 1.5,
        };
        let base = |name: &str, observation, equation| Scenario {
            name: name.into(),
            grid: GridSpec {
                n_side: 16,
                side_length: two_pi(),
            },
            potential: bump.clone(),
            observation,
            equation,
            initial: InitialSpec::SimpleModes { count: 8 },
            recording: RecordingSpec::default(),
            extraction: ExtractionSpec::default(),
            recovery: RecoverySpec::default(),
            check: CheckSpec::default(),
            base_dir: None,
        };
        // Eight decays inside 2/μ_max are too close to collinear for 1e-6
        // eigenvalues, so the heat scenarios record longer.
        let heat = |name: &str, observation| Scenario {
            recording: RecordingSpec {
                epsilon: Some(2.0),
                ..RecordingSpec::default()
            },
            ..base(name, observation, Equation::Heat)
        };
        match name {
            "heat-bump-cross" => Some(heat(name, cross)),
            "wave-bump-cross" => Some(base(name, cross, Equation::Wave)),
            "strip-only" => Some(heat(
                name,
                ObservationSpec::Strip {
                    orientation: Orientation::Horizontal,
                    center: PI,
                    half_width: 0.8,
                },
            )),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |what: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{what} must be positive, got {v}")))
            }
        };
        positive("recording.dt", self.recording.dt)?;
        positive("recording.horizon", self.recording.horizon)?;
        if let Some(e) = self.recording.epsilon {
            positive("recording.epsilon", e)?;
        }
        if !(self.recording.sigma >= 0.0) {
            return Err(Error::InvalidInput("recording.sigma must be nonnegative".into()));
        }
        positive("extraction.eig_tol", self.extraction.eig_tol)?;
        positive("extraction.fun_tol", self.extraction.fun_tol)?;
        positive("recovery.theta", self.recovery.theta)?;
        if let Some(l) = self.recovery.lambda {
            if !(l >= 0.0) {
                return Err(Error::InvalidInput("recovery.lambda must be nonnegative".into()));
            }
        }
        if self.extraction.k_max == 0 {
            return Err(Error::InvalidInput("extraction.k_max must be positive".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.grid.n_side, self.grid.side_length)
    }

    pub fn potential(&self) -> Result<GridField> {
        let g = self.grid()?;
        Ok(match &self.potential {
            PotentialSpec::Zero => GridField::zeros(g),
            PotentialSpec::Constant { value } => GridField::constant(g, *value),
            PotentialSpec::Bump {
                center,
                width,
                amplitude,
            } => GridField::from_fn(g, |p| amplitude * smooth_bump(p, *center, *width, &g)),
            PotentialSpec::RandomSmooth {
                seed,
                cutoff,
                amplitude,
            } => random_smooth(g, *seed, *cutoff, *amplitude),
        })
    }

    pub fn observation(&self) -> Result<ObservationSet> {
        let g = self.grid()?;
        match &self.observation {
            ObservationSpec::Strip {
                orientation: Orientation::Horizontal,
                center,
                half_width,
            } => ObservationSet::horizontal_strip(g, *center, *half_width),
            ObservationSpec::Strip {
                orientation: Orientation::Vertical,
                center,
                half_width,
            } => ObservationSet::vertical_strip(g, *center, *half_width),
            ObservationSpec::Disc { center, radius } => ObservationSet::disc(g, *center, *radius),
            ObservationSpec::Cross { center, half_width } => ObservationSet::cross(g, center[0], center[1], *half_width),
            ObservationSpec::Quarter => ObservationSet::quarter(g),
            ObservationSpec::MaskFile { path } => {
                let rec: MaskRecord = serde_json::from_str(&std::fs::read_to_string(self.resolve(path))?)?;
                let o = ObservationSet::try_from(rec)?;
                if o.grid() != &g {
                    return Err(Error::InvalidInput("mask file grid differs from scenario grid".into()));
                }
                Ok(o)
            }
        }
    }

    /// Coefficients of `f` and `h` in the eigenbasis of `sys`.
    pub fn initial_coefficients(&self, sys: &EigenSystem) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut f = vec![0.0; sys.len()];
        let mut h = vec![0.0; sys.len()];
        let wave = self.equation == Equation::Wave;
        match &self.initial {
            InitialSpec::Modes { f: fm, h: hm } => {
                for (target, list) in [(&mut f, fm), (&mut h, hm)] {
                    for &(k, c) in list {
                        if k >= sys.len() {
                            return Err(Error::InvalidInput(format!("initial mode {k} beyond {} computed", sys.len())));
                        }
                        target[k] += c;
                    }
                }
            }
            InitialSpec::SimpleModes { count } => {
                let modes = simple_modes(sys, *count)?;
                for (i, &k) in modes.iter().enumerate() {
                    f[k] = 1.0 + 0.5 * i as f64;
                    if wave {
                        h[k] = 0.5 * f[k];
                    }
                }
            }
            InitialSpec::Bump {
                center,
                width,
                amplitude,
            } => {
                let g = *sys.grid();
                let bump = GridField::from_fn(g, |p| amplitude * smooth_bump(p, *center, *width, &g));
                f = sys.coefficients(&bump);
            }
        }
        if !wave && h.iter().any(|&c| c != 0.0) {
            return Err(Error::InvalidInput("initial velocity only applies to the wave equation".into()));
        }
        Ok((f, h))
    }

    /// Uniform sample times covering the recording window.
    pub fn sample_times(&self, excited_max: f64) -> Result<Vec<f64>> {
        let window = match self.equation {
            Equation::Heat => match self.recording.epsilon {
                Some(e) => e,
                None if excited_max > 0.0 => 2.0 / excited_max,
                None => return Err(Error::InvalidInput("heat window needs a positive excited eigenvalue".into())),
            },
            _ => self.recording.horizon,
        };
        let n = (window / self.recording.dt).round() as usize;
        if n < 2 {
            return Err(Error::InvalidInput("recording window shorter than two steps".into()));
        }
        Ok((0..=n).map(|i| i as f64 * self.recording.dt).collect())
    }
}

/// Indices of the first `count` eigenvalues separated from both neighbours
/// by more than `1e-3 (1 + μ)`.
pub fn simple_modes(sys: &EigenSystem, count: usize) -> Result<Vec<usize>> {
    let mu = sys.eigenvalues();
    let sep = |a: f64, b: f64| (a - b).abs() > 1e-3 * (1.0 + a.abs());
    let modes: Vec<usize> = (0..mu.len().saturating_sub(1))
        .filter(|&k| (k == 0 || sep(mu[k], mu[k - 1])) && sep(mu[k], mu[k + 1]))
        .take(count)
        .collect();
    if modes.len() < count {
        return Err(Error::InvalidInput(format!(
            "only {} simple modes among {} computed",
            modes.len(),
            mu.len()
        )));
    }
    Ok(modes)
}

fn random_smooth(g: TorusGrid, seed: u64, cutoff: usize, amplitude: f64) -> GridField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = cutoff as i64;
    let k0 = 2.0 * PI / g.side_length();
    let mut terms = Vec::new();
    for m1 in -c..=c {
        for m2 in 0..=c {
            if m2 == 0 && m1 <= 0 {
                continue;
            }
            let decay = 1.0 / (1.0 + (m1 * m1 + m2 * m2) as f64);
            let a: f64 = rng.sample::<f64, _>(StandardNormal) * decay;
            let b: f64 = rng.sample::<f64, _>(StandardNormal) * decay;
            terms.push((m1 as f64 * k0, m2 as f64 * k0, a, b));
        }
    }
    let raw = GridField::from_fn(g, |p| {
        terms
            .iter()
            .map(|&(kx, ky, a, b)| {
                let phase = kx * p[0] + ky * p[1];
                a * phase.cos() + b * phase.sin()
            })
            .sum()
    });
    let peak = raw.values().iter().fold(0.0f64, |m: f64, v: &f64| m.max(v.abs()));
    if peak == 0.0 {
        return raw;
    }
    raw.map(|v| amplitude * v / peak)
}
