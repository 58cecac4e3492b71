//! Passive recordings on the observation set.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::solve::{uniform_step, Equation, Trajectory};
use crate::torus::ObservationSet;

/// Values of a solution on `O` at uniformly spaced times.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveRecording {
    pub equation: Equation,
    pub times: Vec<f64>,
    pub dt: f64,
    /// `values[i][j]` is the value on the `j`-th observed cell at `times[i]`.
    pub values: Vec<Vec<Complex64>>,
    pub observation: ObservationSet,
    pub noise_sigma: f64,
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    equation: Equation,
    dt: f64,
    noise_sigma: f64,
    seed: Option<u64>,
    observation: ObservationSet,
}

/// Additive Gaussian noise, reproducible from the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub sigma: f64,
    pub seed: u64,
}

impl PassiveRecording {
    pub fn new(
        equation: Equation,
        times: Vec<f64>,
        values: Vec<Vec<Complex64>>,
        observation: ObservationSet,
    ) -> Result<Self> {
        let dt = uniform_step(&times)?;
        if times[0] < 0.0 {
            return Err(Error::InvalidInput("recording times must be nonnegative".into()));
        }
        if values.len() != times.len() || values.iter().any(|row| row.len() != observation.len()) {
            return Err(Error::InvalidInput("recording shape does not match times × observed cells".into()));
        }
        if values.iter().flatten().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput("recording contains non-finite values".into()));
        }
        Ok(Self {
            equation,
            times,
            dt,
            values,
            observation,
            noise_sigma: 0.0,
            seed: None,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Time series of one observed cell.
    pub fn channel(&self, j: usize) -> Vec<Complex64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    /// Add Gaussian noise of standard deviation `sigma` to each real
    /// component (and each imaginary one for Schrödinger data).
    pub fn with_noise(mut self, noise: Noise) -> Result<Self> {
        if !(noise.sigma >= 0.0) {
            return Err(Error::InvalidInput("noise level must be nonnegative".into()));
        }
        if noise.sigma > 0.0 {
            let normal = Normal::new(0.0, noise.sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
            let complex = self.equation == Equation::Schrodinger;
            for v in self.values.iter_mut().flatten() {
                v.re += rng.sample(normal);
                if complex {
                    v.im += rng.sample(normal);
                }
            }
        }
        self.noise_sigma = noise.sigma;
        self.seed = Some(noise.seed);
        Ok(self)
    }

    fn sidecar_path(csv: &Path) -> PathBuf {
        csv.with_extension("json")
    }

    /// CSV with header `t,cell_0_re,cell_0_im,…` plus a JSON sidecar next to
    /// it holding the equation, noise and mask.
    pub fn write(&self, csv: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(fs::File::create(csv)?);
        write!(out, "t")?;
        for j in 0..self.observation.len() {
            write!(out, ",cell_{j}_re,cell_{j}_im")?;
        }
        writeln!(out)?;
        for (t, row) in self.times.iter().zip(&self.values) {
            write!(out, "{t:.16e}")?;
            for v in row {
                write!(out, ",{:.16e},{:.16e}", v.re, v.im)?;
            }
            writeln!(out)?;
        }
        out.flush()?;
        let side = Sidecar {
            equation: self.equation,
            dt: self.dt,
            noise_sigma: self.noise_sigma,
            seed: self.seed,
            observation: self.observation.clone(),
        };
        fs::write(Self::sidecar_path(csv), serde_json::to_string_pretty(&side)?)?;
        Ok(())
    }

    pub fn read(csv: &Path) -> Result<Self> {
        let side: Sidecar = serde_json::from_str(&fs::read_to_string(Self::sidecar_path(csv))?)?;
        let text = fs::read_to_string(csv)?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty recording".into()))?;
        let width = header.split(',').count();
        if width != 1 + 2 * side.observation.len() {
            return Err(Error::Format("recording columns do not match the mask".into()));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let nums = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Format(format!("line {}: {e}", n + 2)))?;
            if nums.len() != width {
                return Err(Error::Format(format!("line {}: expected {width} columns", n + 2)));
            }
            times.push(nums[0]);
            values.push(nums[1..].chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect());
        }
        let mut rec = Self::new(side.equation, times, values, side.observation)?;
        rec.noise_sigma = side.noise_sigma;
        rec.seed = side.seed;
        Ok(rec)
    }
}

/// Sample a trajectory on `O`, optionally with noise.
pub fn record(traj: &Trajectory, o: &ObservationSet, equation: Equation, noise: Option<Noise>) -> Result<PassiveRecording> {
    if o.grid() != &traj.grid {
        return Err(Error::InvalidInput("observation set and trajectory grids differ".into()));
    }
    let values = traj
        .states
        .iter()
        .map(|s| o.cells().iter().map(|&c| s[c]).collect())
        .collect();
    let rec = PassiveRecording::new(equation, traj.times.clone(), values, o.clone())?;
    match noise {
        Some(n) => rec.with_noise(n),
        None => Ok(rec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::solve::heat_solve;
    use crate::field::GridField;
    use crate::spectral::basis::FourierBasis;
    use crate::torus::TorusGrid;

    fn traj() -> (Trajectory, TorusGrid) {
        let g = TorusGrid::standard(8).unwrap();
        let b = FourierBasis::new(g, 0.0);
        let f = GridField::from_fn(g, |p| p[0].sin() + 0.2);
        let times: Vec<f64> = (1..=6).map(|i| 0.05 * i as f64).collect();
        (heat_solve(&b, &f, &times).unwrap(), g)
    }

    #[test]
    fn whole_torus_recording_is_the_solution() {
        let (t, g) = traj();
        let rec = record(&t, &ObservationSet::whole(g), Equation::Heat, None).unwrap();
        assert_eq!(rec.values, t.states);
    }

    #[test]
    fn noise_is_reproducible() {
        let (t, g) = traj();
        let o = ObservationSet::quarter(g).unwrap();
        let noise = Some(Noise { sigma: 1e-3, seed: 9 });
        let a = record(&t, &o, Equation::Heat, noise).unwrap();
        let b = record(&t, &o, Equation::Heat, noise).unwrap();
        assert_eq!(a, b);
        let clean = record(&t, &o, Equation::Heat, None).unwrap();
        assert_ne!(a.values, clean.values);
    }

    #[test]
    fn csv_round_trip() {
        let (t, g) = traj();
        let o = ObservationSet::quarter(g).unwrap();
        let rec = record(&t, &o, Equation::Heat, Some(Noise { sigma: 1e-2, seed: 1 })).unwrap();
        let dir = std::env::temp_dir().join(format!("pslab-rec-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rec.csv");
        rec.write(&path).unwrap();
        let back = PassiveRecording::read(&path).unwrap();
        assert_eq!(back, rec);
        fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn rejects_nonuniform_times() {
        let g = TorusGrid::standard(8).unwrap();
        let o = ObservationSet::quarter(g).unwrap();
        let row = vec![Complex64::default(); o.len()];
        assert!(PassiveRecording::new(Equation::Heat, vec![0.1, 0.2, 0.35], vec![row; 3], o).is_err());
    }
}
