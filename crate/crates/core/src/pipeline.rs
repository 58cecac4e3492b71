//! The simulate → extract → recover workflow over files, with scoring
//! against a sealed ground-truth bundle.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{evolve_on, Equation, Noise, PassiveRecording};
use crate::extraction::{extract_modes, match_datasets, to_spectral_dataset, Extraction, ModeEstimate};
use crate::field::GridField;
use crate::recovery::{
    model_eigensystem, recover_initial_heat, recover_initial_wave, recover_potential_global, recover_potential_on_o,
    warm_start, GlobalOptions, InitialEstimate, LocalEstimate, RecoveryDiagnostics, RecoveryResult,
};
use crate::scenario::{ExtractionSpec, RecoverySpec, Scenario};
use crate::sparsity::{is_lambda_sparse, select_sparse_subsequence, SparsityReport};
use crate::spectral::analysis::{observability_constants, ObservabilityReport};
use crate::spectral::dataset::{restrict, SpectralDataset};
use crate::spectral::eigen::{solve_potential, EigenSystem, DENSE_MAX_SIDE};
use crate::torus::{check_hypothesis_h, HypothesisReport, TorusGrid};

/// Eigenpairs computed when the grid is too large for a complete system.
const TRUNCATED_MODES: usize = 64;

fn eigensystem(v: &GridField, at_least: usize) -> Result<EigenSystem> {
    let g = v.grid();
    let k = if g.n_side() <= DENSE_MAX_SIDE {
        g.cell_count()
    } else {
        TRUNCATED_MODES.max(at_least + 8).min(g.cell_count())
    };
    solve_potential(v, k)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn read_field(path: &Path, grid: TorusGrid) -> Result<GridField> {
    GridField::read_csv(grid, &fs::read_to_string(path)?)
}

fn write_field(path: &Path, f: &GridField) -> Result<()> {
    f.write_csv(create(path)?)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

/// Ground truth for a simulated scenario.
#[derive(Debug, Clone)]
pub struct Truth {
    pub equation: Equation,
    pub potential: GridField,
    pub eigenvalues: Vec<f64>,
    pub f_coefficients: Vec<f64>,
    pub h_coefficients: Vec<f64>,
    pub initial_f: GridField,
    pub initial_h: Option<GridField>,
    /// Exact restrictions of the excited modes.
    pub dataset: SpectralDataset,
}

#[derive(Serialize, Deserialize)]
struct TruthManifest {
    scenario: String,
    n_side: usize,
    side_length: f64,
    equation: Equation,
    excited: Vec<usize>,
    files: Vec<String>,
}

impl Truth {
    pub fn excited(&self) -> Vec<usize> {
        (0..self.eigenvalues.len())
            .filter(|&k| self.f_coefficients[k] != 0.0 || self.h_coefficients[k] != 0.0)
            .collect()
    }

    pub fn write_dir(&self, dir: &Path, scenario: &str) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut files = vec!["potential.csv", "initial_f.csv", "eigenvalues.csv", "dataset.json"];
        write_field(&dir.join("potential.csv"), &self.potential)?;
        write_field(&dir.join("initial_f.csv"), &self.initial_f)?;
        if let Some(h) = &self.initial_h {
            write_field(&dir.join("initial_h.csv"), h)?;
            files.push("initial_h.csv");
        }
        let mut w = create(&dir.join("eigenvalues.csv"))?;
        writeln!(w, "index,eigenvalue,f_coefficient,h_coefficient")?;
        for k in 0..self.eigenvalues.len() {
            writeln!(
                w,
                "{k},{:.16e},{:.16e},{:.16e}",
                self.eigenvalues[k], self.f_coefficients[k], self.h_coefficients[k]
            )?;
        }
        w.flush()?;
        fs::write(dir.join("dataset.json"), serde_json::to_string(&self.dataset)?)?;
        let manifest = TruthManifest {
            scenario: scenario.into(),
            n_side: self.potential.grid().n_side(),
            side_length: self.potential.grid().side_length(),
            equation: self.equation,
            excited: self.excited(),
            files: files.into_iter().map(String::from).collect(),
        };
        fs::write(dir.join("truth.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self> {
        let manifest: TruthManifest = serde_json::from_str(&fs::read_to_string(dir.join("truth.json"))?)?;
        let grid = TorusGrid::new(manifest.n_side, manifest.side_length)?;
        let potential = read_field(&dir.join("potential.csv"), grid)?;
        let initial_f = read_field(&dir.join("initial_f.csv"), grid)?;
        let h_path = dir.join("initial_h.csv");
        let initial_h = if h_path.exists() { Some(read_field(&h_path, grid)?) } else { None };
        let (mut eigenvalues, mut f_coefficients, mut h_coefficients) = (Vec::new(), Vec::new(), Vec::new());
        for line in BufReader::new(fs::File::open(dir.join("eigenvalues.csv"))?).lines().skip(1) {
            let line = line?;
            let cols: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("{s}: {e}"))))
                .collect::<Result<_>>()?;
            if cols.len() != 4 {
                return Err(Error::Format(format!("eigenvalues.csv: bad row {line}")));
            }
            eigenvalues.push(cols[1]);
            f_coefficients.push(cols[2]);
            h_coefficients.push(cols[3]);
        }
        let dataset = serde_json::from_str(&fs::read_to_string(dir.join("dataset.json"))?)?;
        Ok(Self {
            equation: manifest.equation,
            potential,
            eigenvalues,
            f_coefficients,
            h_coefficients,
            initial_f,
            initial_h,
            dataset,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub recording: PassiveRecording,
    pub truth: Truth,
    pub eigensystem: EigenSystem,
}

/// Solve the forward problem of a scenario exactly in time and record it on `O`.
pub fn simulate(s: &Scenario) -> Result<Simulation> {
    let v = s.potential()?;
    let o = s.observation()?;
    let needed = match &s.initial {
        crate::scenario::InitialSpec::Modes { f, h } => f.iter().chain(h).map(|m| m.0 + 1).max().unwrap_or(0),
        crate::scenario::InitialSpec::SimpleModes { count } => 2 * count,
        crate::scenario::InitialSpec::Bump { .. } => 0,
    };
    let sys = eigensystem(&v, needed)?;
    let (fc, hc) = s.initial_coefficients(&sys)?;
    let excited_max = (0..sys.len())
        .filter(|&k| fc[k] != 0.0 || hc[k] != 0.0)
        .map(|k| sys.eigenvalue(k))
        .fold(0.0, f64::max);
    let times = s.sample_times(excited_max)?;
    let f = sys.synthesize(&fc);
    let h = sys.synthesize(&hc);
    let wave = s.equation == Equation::Wave;
    let values = evolve_on(
        &sys,
        s.equation,
        f.to_complex().values(),
        wave.then(|| h.to_complex()).as_ref().map(|h| h.values()),
        &times,
        o.cells(),
    )?;
    let mut recording = PassiveRecording::new(s.equation, times, values, o.clone())?;
    if s.recording.sigma > 0.0 {
        recording = recording.with_noise(Noise {
            sigma: s.recording.sigma,
            seed: s.recording.seed,
        })?;
    }
    let excited: Vec<usize> = (0..sys.len()).filter(|&k| fc[k] != 0.0 || hc[k] != 0.0).collect();
    let dataset = restrict(&sys, &o, &excited)?;
    let truth = Truth {
        equation: s.equation,
        potential: v,
        eigenvalues: sys.eigenvalues().to_vec(),
        f_coefficients: fc,
        h_coefficients: hc,
        initial_f: f,
        initial_h: wave.then_some(h),
        dataset,
    };
    Ok(Simulation {
        recording,
        truth,
        eigensystem: sys,
    })
}

/// `scenario.json`, `recording.csv` (+ `recording.json`) and `truth/`.
pub fn write_simulation(sim: &Simulation, s: &Scenario, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("scenario.json"), s.to_json()?)?;
    sim.recording.write(&dir.join("recording.csv"))?;
    sim.truth.write_dir(&dir.join("truth"), &s.name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingRow {
    pub mode: usize,
    pub eigenvalue: f64,
    pub confidence: f64,
    pub truth_index: Option<usize>,
    pub truth_eigenvalue: Option<f64>,
    pub relative_error: Option<f64>,
    pub discrepancy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExtractOutput {
    pub extraction: Extraction,
    pub dataset: SpectralDataset,
    pub pairing: Vec<PairingRow>,
}

pub fn extract(rec: &PassiveRecording, spec: &ExtractionSpec, truth: Option<&Truth>) -> Result<ExtractOutput> {
    let extraction = extract_modes(rec, spec.k_max)?;
    if extraction.modes.is_empty() {
        return Err(Error::NoResult("no modes extracted".into()));
    }
    let dataset = to_spectral_dataset(&extraction.modes, &rec.observation)?;
    let mut pairing: Vec<PairingRow> = extraction
        .modes
        .iter()
        .enumerate()
        .map(|(i, m)| PairingRow {
            mode: i,
            eigenvalue: m.eigenvalue,
            confidence: m.confidence,
            truth_index: None,
            truth_eigenvalue: None,
            relative_error: None,
            discrepancy: None,
        })
        .collect();
    if let Some(t) = truth {
        let m = match_datasets(&dataset, &t.dataset, spec.eig_tol, spec.fun_tol);
        for (k, &(i, j)) in m.pairs.iter().enumerate() {
            let te = t.dataset.entries[j].eigenvalue;
            let row = &mut pairing[i];
            row.truth_index = Some(t.dataset.entries[j].index);
            row.truth_eigenvalue = Some(te);
            row.relative_error = Some((row.eigenvalue - te).abs() / (1.0 + te.abs()));
            row.discrepancy = Some(m.discrepancies[k]);
        }
    }
    Ok(ExtractOutput {
        extraction,
        dataset,
        pairing,
    })
}

/// `dataset.json`, `modes.json` and `pairing.csv`.
pub fn write_extraction(out: &ExtractOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("dataset.json"), serde_json::to_string(&out.dataset)?)?;
    fs::write(dir.join("modes.json"), serde_json::to_string(&out.extraction)?)?;
    let mut w = create(&dir.join("pairing.csv"))?;
    writeln!(w, "mode,eigenvalue,confidence,truth_index,truth_eigenvalue,relative_error,discrepancy")?;
    for r in &out.pairing {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{},{},{},{}",
            r.mode,
            r.eigenvalue,
            r.confidence,
            r.truth_index.map(|i| i.to_string()).unwrap_or_default(),
            fmt_opt(r.truth_eigenvalue),
            fmt_opt(r.relative_error),
            fmt_opt(r.discrepancy)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Spectral data for recovery, with the residues when they are known.
#[derive(Debug, Clone)]
pub struct RecoverInput {
    pub dataset: SpectralDataset,
    pub modes: Option<Extraction>,
}

impl RecoverInput {
    pub fn from_recording(rec: &PassiveRecording, spec: &ExtractionSpec) -> Result<Self> {
        let out = extract(rec, spec, None)?;
        Ok(Self {
            dataset: out.dataset,
            modes: Some(out.extraction),
        })
    }

    /// A recording (`.csv`) or a dataset (`.json`, with `modes.json` beside
    /// it when available).
    pub fn load(path: &Path, spec: &ExtractionSpec) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Self::from_recording(&PassiveRecording::read(path)?, spec),
            Some("json") => {
                let dataset = serde_json::from_str(&fs::read_to_string(path)?)?;
                let modes_path = path.with_file_name("modes.json");
                let modes = if modes_path.exists() {
                    Some(serde_json::from_str(&fs::read_to_string(modes_path)?)?)
                } else {
                    None
                };
                Ok(Self { dataset, modes })
            }
            _ => Err(Error::InvalidInput(format!(
                "{}: expected a recording .csv or a dataset .json",
                path.display()
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoverOutput {
    pub result: RecoveryResult,
    pub local: LocalEstimate,
    pub dataset: SpectralDataset,
    pub modes: Option<Extraction>,
}

pub fn recover(input: &RecoverInput, spec: &RecoverySpec, extraction: &ExtractionSpec) -> Result<RecoverOutput> {
    let ds = &input.dataset;
    let local = recover_potential_on_o(ds, spec.theta)?;
    let (v0, trusted) = warm_start(ds, spec.theta)?;
    let mut result = if spec.global {
        let opts = GlobalOptions {
            lambda0: spec.lambda,
            max_iter: spec.iterations,
            theta: spec.theta,
            ..GlobalOptions::default()
        };
        recover_potential_global(ds, &v0, &opts)?
    } else {
        let eval = crate::recovery::evaluate(&v0, ds, &Default::default())?;
        RecoveryResult {
            potential_estimate: v0,
            recovered_mask: trusted,
            misfit_history: vec![eval.value],
            data_history: vec![eval.data],
            lambda_history: vec![0.0],
            initial_f: None,
            initial_h: None,
            diagnostics: RecoveryDiagnostics {
                gauges: eval.gauges,
                matches: eval.matches,
                warm_start_data: eval.data,
                final_data: eval.data,
                method: "local".into(),
                ..Default::default()
            },
        }
    };
    if let Some(ex) = &input.modes {
        let sys = if spec.global {
            eigensystem(&result.potential_estimate, ds.len())?
        } else {
            model_eigensystem(&result.potential_estimate, ds.len())?
        };
        let (f, h) = initial_data(&ex.modes, ex.equation, &sys, ds, extraction.eig_tol)?;
        result.initial_f = Some(f);
        result.initial_h = h;
    }
    Ok(RecoverOutput {
        result,
        local,
        dataset: ds.clone(),
        modes: input.modes.clone(),
    })
}

fn initial_data(
    modes: &[ModeEstimate],
    eq: Equation,
    sys: &EigenSystem,
    ds: &SpectralDataset,
    eig_tol: f64,
) -> Result<(InitialEstimate, Option<InitialEstimate>)> {
    match eq {
        Equation::Wave => {
            let (f, h) = recover_initial_wave(modes, sys, &ds.observation, eig_tol)?;
            Ok((f, Some(h)))
        }
        _ => Ok((recover_initial_heat(modes, sys, &ds.observation, eig_tol)?, None)),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenvalueError {
    pub mode: usize,
    pub eigenvalue: f64,
    pub truth_index: usize,
    pub truth_eigenvalue: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Score {
    pub eigenvalue_errors: Vec<EigenvalueError>,
    pub max_eigenvalue_error: f64,
    pub potential_relative_l2_error: f64,
    /// Largest error of the on-O estimate over trusted cells.
    pub on_o_max_error: f64,
    pub initial_f_coefficient_error: Option<f64>,
    pub initial_h_coefficient_error: Option<f64>,
    pub warm_start_data_misfit: f64,
    pub final_data_misfit: f64,
}

fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

fn coefficient_error(est: &InitialEstimate, truth: &[f64]) -> f64 {
    (0..truth.len().max(est.coefficients.len()))
        .map(|k| {
            let c = est.coefficients.get(k).map_or(0.0, |c| c.re);
            (c - truth.get(k).copied().unwrap_or(0.0)).abs()
        })
        .fold(0.0, f64::max)
}

/// Compare a recovery with ground truth. Eigenvalue errors pair each
/// observed eigenvalue with the nearest true one, relative to `1 + |μ|`.
pub fn score(out: &RecoverOutput, truth: &Truth) -> Result<Score> {
    if truth.potential.grid() != out.result.potential_estimate.grid() {
        return Err(Error::InvalidInput("truth and recovery grids differ".into()));
    }
    let eigenvalue_errors: Vec<EigenvalueError> = out
        .dataset
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let (k, &t) = truth
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - e.eigenvalue).abs().total_cmp(&(b.1 - e.eigenvalue).abs()))
                .expect("truth has eigenvalues");
            EigenvalueError {
                mode: i,
                eigenvalue: e.eigenvalue,
                truth_index: k,
                truth_eigenvalue: t,
                relative_error: (e.eigenvalue - t).abs() / (1.0 + t.abs()),
            }
        })
        .collect();
    let v = truth.potential.values();
    let on_o_max_error = out
        .local
        .trusted_cells()
        .into_iter()
        .map(|c| (out.local.values[c] - v[c]).abs())
        .fold(0.0, f64::max);
    Ok(Score {
        max_eigenvalue_error: eigenvalue_errors.iter().map(|e| e.relative_error).fold(0.0, f64::max),
        eigenvalue_errors,
        potential_relative_l2_error: relative_l2(out.result.potential_estimate.values(), v),
        on_o_max_error,
        initial_f_coefficient_error: out.result.initial_f.as_ref().map(|f| coefficient_error(f, &truth.f_coefficients)),
        initial_h_coefficient_error: out.result.initial_h.as_ref().map(|h| coefficient_error(h, &truth.h_coefficients)),
        warm_start_data_misfit: out.result.diagnostics.warm_start_data,
        final_data_misfit: out.result.diagnostics.final_data,
    })
}

/// RecoveryResult files plus `dataset.json`, `modes.json` when known and
/// `score.json` when a truth bundle is given.
pub fn write_recovery(out: &RecoverOutput, score: Option<&Score>, dir: &Path) -> Result<()> {
    out.result.write_dir(dir)?;
    fs::write(dir.join("dataset.json"), serde_json::to_string(&out.dataset)?)?;
    if let Some(m) = &out.modes {
        fs::write(dir.join("modes.json"), serde_json::to_string(m)?)?;
    }
    if let Some(s) = score {
        fs::write(dir.join("score.json"), serde_json::to_string_pretty(s)?)?;
    }
    Ok(())
}

/// `truth/` beside the input file or one directory up.
pub fn find_truth(input: &Path) -> Option<PathBuf> {
    let parent = input.parent()?;
    [parent.join("truth"), parent.parent()?.join("truth")]
        .into_iter()
        .find(|d| d.join("truth.json").exists())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub scenario: String,
    pub horizon: f64,
    pub hypothesis: HypothesisReport,
    pub observability: std::result::Result<ObservabilityReport, String>,
    pub sparsity_subset: Vec<usize>,
    pub sparsity: std::result::Result<SparsityReport, String>,
}

impl CheckReport {
    pub fn holds(&self) -> bool {
        self.hypothesis.holds
    }
}

/// Hypothesis (H), observability constants of the leading modes, and the
/// Λ-sparsity of a subset of the scenario's spectrum.
pub fn check(s: &Scenario) -> Result<CheckReport> {
    let o = s.observation()?;
    let horizon = s.check.horizon.unwrap_or(2.0 * o.grid().side_length());
    let hypothesis = check_hypothesis_h(&o, horizon)?;
    let v = s.potential()?;
    let sys = eigensystem(&v, s.check.observability_modes)?;
    let observability =
        observability_constants(&sys, &o, s.check.observability_modes.min(sys.len())).map_err(|e| e.to_string());
    let subset = match &s.check.subset {
        Some(sub) => sub.clone(),
        None => select_sparse_subsequence(sys.eigenvalues(), 2.0).map(|sel| sel.indices).unwrap_or_default(),
    };
    let sparsity = is_lambda_sparse(sys.eigenvalues(), &subset, None).map_err(|e| e.to_string());
    Ok(CheckReport {
        scenario: s.name.clone(),
        horizon,
        hypothesis,
        observability,
        sparsity_subset: subset,
        sparsity,
    })
}

/// Plot-ready tables from a recovery directory: `misfit_curve.csv`,
/// `cross_sections.csv`, `eigenvalue_scatter.csv`, `residue_magnitudes.csv`.
/// Tables whose inputs are missing are skipped.
pub fn report(result_dir: &Path, out_dir: &Path, truth: Option<&Truth>) -> Result<Vec<PathBuf>> {
    let history = result_dir.join("history.csv");
    let estimate = result_dir.join("potential_estimate.csv");
    if !history.exists() || !estimate.exists() {
        return Err(Error::NoResult(format!("{} holds no recovery result", result_dir.display())));
    }
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let curve = out_dir.join("misfit_curve.csv");
    fs::copy(&history, &curve)?;
    written.push(curve);

    let ds_path = result_dir.join("dataset.json");
    let dataset: Option<SpectralDataset> = if ds_path.exists() {
        Some(serde_json::from_str(&fs::read_to_string(&ds_path)?)?)
    } else {
        None
    };
    let g = match (&dataset, truth) {
        (Some(ds), _) => *ds.observation.grid(),
        (None, Some(t)) => *t.potential.grid(),
        (None, None) => {
            let rows = fs::read_to_string(&estimate)?.lines().filter(|l| !l.trim().is_empty()).count();
            TorusGrid::standard(rows)?
        }
    };
    let v = read_field(&estimate, g)?;
    let n = g.n_side();
    let path = out_dir.join("cross_sections.csv");
    let mut w = create(&path)?;
    writeln!(w, "axis,coordinate,estimate,truth")?;
    for (axis, cells) in [
        ("x", (0..n).map(|c| g.index((n / 2) as isize, c as isize)).collect::<Vec<_>>()),
        ("y", (0..n).map(|r| g.index(r as isize, (n / 2) as isize)).collect()),
    ] {
        for (i, c) in cells.into_iter().enumerate() {
            let t = truth.map(|t| t.potential.values()[c]);
            writeln!(w, "{axis},{:.16e},{:.16e},{}", i as f64 * g.spacing(), v.values()[c], fmt_opt(t))?;
        }
    }
    w.flush()?;
    written.push(path);

    if let Some(ds) = &dataset {
        let path = out_dir.join("eigenvalue_scatter.csv");
        let mut w = create(&path)?;
        writeln!(w, "mode,observed,truth")?;
        for (i, e) in ds.entries.iter().enumerate() {
            let t = truth.and_then(|t| {
                t.eigenvalues
                    .iter()
                    .copied()
                    .min_by(|a, b| (a - e.eigenvalue).abs().total_cmp(&(b - e.eigenvalue).abs()))
            });
            writeln!(w, "{i},{:.16e},{}", e.eigenvalue, fmt_opt(t))?;
        }
        w.flush()?;
        written.push(path);
    }

    let modes_path = result_dir.join("modes.json");
    if modes_path.exists() {
        let ex: Extraction = serde_json::from_str(&fs::read_to_string(&modes_path)?)?;
        let norm = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let path = out_dir.join("residue_magnitudes.csv");
        let mut w = create(&path)?;
        writeln!(w, "mode,eigenvalue,residue_norm,residue_h_norm")?;
        for (i, m) in ex.modes.iter().enumerate() {
            writeln!(
                w,
                "{i},{:.16e},{:.16e},{}",
                m.eigenvalue,
                norm(&m.residue),
                fmt_opt(m.residue_h.as_deref().map(norm))
            )?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("pslab-{}-{name}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        d
    }

    #[test]
    fn report_needs_a_result() {
        let d = tmp("empty");
        fs::create_dir_all(&d).unwrap();
        let err = report(&d, &d.join("out"), None).unwrap_err();
        assert!(matches!(err, Error::NoResult(_)), "{err}");
    }

    #[test]
    fn truth_round_trip() {
        let mut s = Scenario::bundled("wave-bump-cross").unwrap();
        s.grid.n_side = 8;
        s.initial = crate::scenario::InitialSpec::Modes {
            f: vec![(1, 1.0)],
            h: vec![(2, 0.5)],
        };
        s.recording.horizon = 0.1;
        let sim = simulate(&s).unwrap();
        let d = tmp("truth");
        sim.truth.write_dir(&d, &s.name).unwrap();
        let back = Truth::read_dir(&d).unwrap();
        assert_eq!(back.eigenvalues, sim.truth.eigenvalues);
        assert_eq!(back.potential, sim.truth.potential);
        assert_eq!(back.dataset, sim.truth.dataset);
        assert_eq!(back.excited(), vec![1, 2]);
        fs::remove_dir_all(&d).unwrap();
    }
}
