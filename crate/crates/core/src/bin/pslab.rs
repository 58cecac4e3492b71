use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use passive_spectral::error::{Error, Result};
use passive_spectral::extraction::match_datasets;
use passive_spectral::pipeline::{self, RecoverInput, Truth};
use passive_spectral::scenario::{ExtractionSpec, RecoverySpec, Scenario};
use passive_spectral::sparsity::{is_lambda_sparse, select_sparse_subsequence, FlatTorusSpectrum, Spectrum};
use passive_spectral::spectral::dataset::SpectralDataset;

const EXIT_INPUT: u8 = 1;
const EXIT_HYPOTHESIS: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Synthetic experiments for inverse spectral problems with one passive
/// measurement on a discretized flat torus.
#[derive(Parser)]
#[command(name = "pslab", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Noise seed; overrides the scenario's recording seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. Accepted for interface stability; every command
    /// currently runs on one thread.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "pslab-out")]
    out: PathBuf,
    /// Suppress the summary on stdout.
    #[arg(short, long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward problem of a scenario and record it on O.
    Simulate {
        /// Scenario JSON file or bundled scenario name.
        scenario: PathBuf,
    },
    /// Extract modes from a recording and write a spectral dataset.
    Extract {
        recording: PathBuf,
        #[command(flatten)]
        opts: ExtractOpts,
    },
    /// Pair the entries of two spectral datasets up to gauge.
    Match {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        eig_tol: f64,
        #[arg(long, default_value_t = 1e-4)]
        fun_tol: f64,
    },
    /// Recover the potential (and initial data) from a recording or dataset.
    Recover {
        input: PathBuf,
        #[command(flatten)]
        opts: ExtractOpts,
        /// Stop after the on-O estimate.
        #[arg(long)]
        local_only: bool,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Check hypothesis (H), observability and sparsity for a scenario.
    Check { scenario: PathBuf },
    /// Λ-sparsity report for a subset of the flat torus spectrum or of an
    /// eigenvalue list.
    Sparsity {
        /// Truncate the 2π-torus spectrum at this eigenvalue.
        #[arg(long, conflicts_with = "eigenvalues", default_value_t = 400)]
        torus_max: u64,
        /// One eigenvalue per line, nondecreasing.
        #[arg(long)]
        eigenvalues: Option<PathBuf>,
        /// Block base for the dyadic selection.
        #[arg(long, default_value_t = 2.0, conflicts_with = "indices")]
        base: f64,
        /// Explicit subset, comma separated.
        #[arg(long, value_delimiter = ',')]
        indices: Option<Vec<usize>>,
        /// Window lengths for the density estimates, comma separated.
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<f64>>,
    },
    /// Plot-ready tables from a recovery directory.
    Report {
        result: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExtractOpts {
    /// Scenario whose extraction and recovery settings apply; defaults to
    /// `scenario.json` beside the input.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Ground-truth bundle for scoring; defaults to a `truth/` beside the input.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    k_max: Option<usize>,
}

enum Outcome {
    Done,
    HypothesisFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::HypothesisFailed) => ExitCode::from(EXIT_HYPOTHESIS),
        Err(e) => {
            eprintln!("error: {e}");
            let numerical = matches!(
                e,
                Error::Singular { .. }
                    | Error::IllConditioned { .. }
                    | Error::NonConvergence { .. }
                    | Error::Coverage { .. }
                    | Error::EmptyTrustedMask
            );
            ExitCode::from(if numerical { EXIT_NUMERICAL } else { EXIT_INPUT })
        }
    }
}

fn say(g: &Global, msg: impl AsRef<str>) {
    if !g.quiet {
        println!("{}", msg.as_ref());
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'a str,
    input: Vec<PathBuf>,
    seed: Option<u64>,
    threads: usize,
    truth: Option<PathBuf>,
    extraction: Option<&'a ExtractionSpec>,
    recovery: Option<&'a RecoverySpec>,
}

/// Scenario given explicitly or found beside the input (or one level up).
fn scenario_for(input: &Path, explicit: Option<&Path>) -> Result<Option<Scenario>> {
    if let Some(p) = explicit {
        return Scenario::load(p).map(Some);
    }
    let parent = input.parent().unwrap_or(Path::new("."));
    for dir in [Some(parent), parent.parent()].into_iter().flatten() {
        let p = dir.join("scenario.json");
        if p.exists() {
            return Scenario::load(&p).map(Some);
        }
    }
    Ok(None)
}

fn truth_for(input: &Path, explicit: Option<&Path>) -> Result<Option<(PathBuf, Truth)>> {
    let dir = match explicit {
        Some(d) => Some(d.to_path_buf()),
        None => pipeline::find_truth(input),
    };
    dir.map(|d| Truth::read_dir(&d).map(|t| (d, t))).transpose()
}

fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    let out = &g.out;
    match &cli.command {
        Command::Simulate { scenario } => {
            let mut s = Scenario::load(scenario)?;
            if let Some(seed) = g.seed {
                s.recording.seed = seed;
            }
            let sim = pipeline::simulate(&s)?;
            pipeline::write_simulation(&sim, &s, out)?;
            say(
                g,
                format!(
                    "simulated {} ({}, {} samples on {} cells) -> {}",
                    s.name,
                    s.equation.name(),
                    sim.recording.len(),
                    sim.recording.observation.len(),
                    out.display()
                ),
            );
        }
        Command::Extract { recording, opts } => {
            let mut spec = scenario_for(recording, opts.scenario.as_deref())?
                .map(|s| s.extraction)
                .unwrap_or_default();
            if let Some(k) = opts.k_max {
                spec.k_max = k;
            }
            let truth = truth_for(recording, opts.truth.as_deref())?;
            let rec = passive_spectral::evolution::PassiveRecording::read(recording)?;
            let res = pipeline::extract(&rec, &spec, truth.as_ref().map(|t| &t.1))?;
            pipeline::write_extraction(&res, out)?;
            write_json(
                &out.join("config.json"),
                &RunConfig {
                    command: "extract",
                    input: vec![recording.clone()],
                    seed: g.seed,
                    threads: g.threads,
                    truth: truth.map(|t| t.0),
                    extraction: Some(&spec),
                    recovery: None,
                },
            )?;
            say(g, format!("extracted {} modes (rank {}) -> {}", res.dataset.len(), res.extraction.rank, out.display()));
            for r in &res.pairing {
                let err = r.relative_error.map(|e| format!("  error {e:.3e}")).unwrap_or_default();
                say(g, format!("  mode {:>2}  μ = {:.12}{err}", r.mode, r.eigenvalue));
            }
        }
        Command::Match {
            first,
            second,
            eig_tol,
            fun_tol,
        } => {
            let a: SpectralDataset = serde_json::from_str(&fs::read_to_string(first)?)?;
            let b: SpectralDataset = serde_json::from_str(&fs::read_to_string(second)?)?;
            let m = match_datasets(&a, &b, *eig_tol, *fun_tol);
            fs::create_dir_all(out)?;
            write_json(&out.join("match.json"), &m)?;
            say(
                g,
                format!(
                    "{} pairs, {} / {} unmatched -> {}",
                    m.pairs.len(),
                    m.unmatched_first.len(),
                    m.unmatched_second.len(),
                    out.join("match.json").display()
                ),
            );
        }
        Command::Recover {
            input,
            opts,
            local_only,
            lambda,
            iterations,
            theta,
        } => {
            let s = scenario_for(input, opts.scenario.as_deref())?;
            let mut ex = s.as_ref().map(|s| s.extraction.clone()).unwrap_or_default();
            let mut rs = s.map(|s| s.recovery).unwrap_or_default();
            if let Some(k) = opts.k_max {
                ex.k_max = k;
            }
            if *local_only {
                rs.global = false;
            }
            if lambda.is_some() {
                rs.lambda = *lambda;
            }
            if let Some(i) = iterations {
                rs.iterations = *i;
            }
            if let Some(t) = theta {
                rs.theta = *t;
            }
            let truth = truth_for(input, opts.truth.as_deref())?;
            let inp = RecoverInput::load(input, &ex)?;
            let res = pipeline::recover(&inp, &rs, &ex)?;
            let score = truth.as_ref().map(|t| pipeline::score(&res, &t.1)).transpose()?;
            pipeline::write_recovery(&res, score.as_ref(), out)?;
            write_json(
                &out.join("config.json"),
                &RunConfig {
                    command: "recover",
                    input: vec![input.clone()],
                    seed: g.seed,
                    threads: g.threads,
                    truth: truth.map(|t| t.0),
                    extraction: Some(&ex),
                    recovery: Some(&rs),
                },
            )?;
            let d = &res.result.diagnostics;
            if d.hypothesis_h == Some(false) {
                eprintln!("warning: the observation set fails hypothesis (H); uniqueness is not guaranteed");
            }
            if d.line_search_failed {
                eprintln!("warning: line search failed; returning the best iterate");
            }
            say(
                g,
                format!(
                    "{} on {} modes: data misfit {:.3e} -> {:.3e} in {} iterations -> {}",
                    d.method,
                    res.dataset.len(),
                    d.warm_start_data,
                    d.final_data,
                    d.iterations,
                    out.display()
                ),
            );
            if let Some(sc) = &score {
                say(
                    g,
                    format!(
                        "score: eigenvalues {:.3e}, potential L2 {:.3e}, on O {:.3e}",
                        sc.max_eigenvalue_error, sc.potential_relative_l2_error, sc.on_o_max_error
                    ),
                );
            }
        }
        Command::Check { scenario } => {
            let s = Scenario::load(scenario)?;
            let report = pipeline::check(&s)?;
            fs::create_dir_all(out)?;
            write_json(&out.join("check.json"), &report)?;
            let h = &report.hypothesis;
            say(g, format!("GCC: {:?} (horizon {:.4})", h.gcc.verdict, report.horizon));
            if let Some(w) = &h.gcc.witness {
                say(g, format!("  witness ray from {:?} along {:?}", w.start, w.direction));
            }
            say(g, format!("antipodal witness: {:?}", h.witness_p));
            match &report.observability {
                Ok(o) => say(g, format!("observability constant (first {} modes): {:.4}", o.tested_modes, o.overall)),
                Err(e) => say(g, format!("observability: {e}")),
            }
            match &report.sparsity {
                Ok(sp) => say(g, format!("sparsity of {:?}: {:?}", report.sparsity_subset, sp.verdict)),
                Err(e) => say(g, format!("sparsity: {e}")),
            }
            say(g, format!("hypothesis (H): {}", if report.holds() { "holds" } else { "fails" }));
            if !report.holds() {
                return Ok(Outcome::HypothesisFailed);
            }
        }
        Command::Sparsity {
            torus_max,
            eigenvalues,
            base,
            indices,
            windows,
        } => {
            let spectrum: Box<dyn Spectrum> = match eigenvalues {
                Some(p) => Box::new(
                    fs::read_to_string(p)?
                        .lines()
                        .filter(|l| !l.trim().is_empty())
                        .map(|l| l.trim().parse::<f64>().map_err(|e| Error::Format(format!("{l}: {e}"))))
                        .collect::<Result<Vec<f64>>>()?,
                ),
                None => Box::new(FlatTorusSpectrum::standard(*torus_max)),
            };
            let subset = match indices {
                Some(i) => i.clone(),
                None => select_sparse_subsequence(spectrum.as_ref(), *base)?.indices,
            };
            let report = is_lambda_sparse(spectrum.as_ref(), &subset, windows.as_deref())?;
            fs::create_dir_all(out)?;
            #[derive(Serialize)]
            struct Out<'a> {
                subset: &'a [usize],
                report: &'a passive_spectral::sparsity::SparsityReport,
            }
            write_json(&out.join("sparsity.json"), &Out { subset: &subset, report: &report })?;
            say(g, format!("subset {subset:?}: {:?}", report.verdict));
            for (l, d) in &report.density_estimates {
                say(g, format!("  window {l:>8.2}  density {d:.5}"));
            }
        }
        Command::Report { result, truth } => {
            let t = truth_for(&result.join("config.json"), truth.as_deref())?.or(
                // Recover records the truth bundle it scored against.
                recorded_truth(result)?,
            );
            let files = pipeline::report(result, out, t.as_ref().map(|t| &t.1))?;
            for f in files {
                say(g, f.display().to_string());
            }
        }
    }
    Ok(Outcome::Done)
}

fn recorded_truth(result: &Path) -> Result<Option<(PathBuf, Truth)>> {
    let p = result.join("config.json");
    if !p.exists() {
        return Ok(None);
    }
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p)?)?;
    match v.get("truth").and_then(|t| t.as_str()) {
        Some(d) if Path::new(d).join("truth.json").exists() => Ok(Some((d.into(), Truth::read_dir(Path::new(d))?))),
        _ => Ok(None),
    }
}
