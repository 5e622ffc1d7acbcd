//! `hotgibbs` command-line tool: model generation, Gibbs-state sampling,
//! self-verification and log-partition estimates.

use clap::{Args, Parser, Subcommand, ValueEnum};
use hotgibbs::cluster::{self, EstimateOptions};
use hotgibbs::tree_walk::{draw_indexed_sample, LogPartitionMemo, WalkParams};
use hotgibbs::verify::{self, SuiteReport, SCHEMA_VERSION};
use hotgibbs::{models, oracle, CriticalMode, Error, Hamiltonian, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hotgibbs", version, about = "Sample high-temperature Gibbs states as stabilizer product states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a benchmark Hamiltonian and print its degree, locality and thresholds.
    Gen(GenArgs),
    /// Draw product states from the Gibbs state of a Hamiltonian file.
    Sample(SampleArgs),
    /// Run a self-check suite against the dense oracle.
    Verify(VerifyArgs),
    /// Estimate ln tr e^{-βH} by the cluster expansion.
    Logz(LogzArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    ChainTfim,
    GridZz,
    HeisenbergChain,
    RandomKlocal,
}

#[derive(Args)]
struct GenArgs {
    family: Family,
    /// Number of sites (chains and random instances).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Number of terms (random-klocal).
    #[arg(long)]
    m: Option<usize>,
    /// Locality (random-klocal).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    hi: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; the Hamiltonian goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    hamiltonian: PathBuf,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long = "n-samples")]
    n_samples: u64,
    #[arg(long)]
    seed: u64,
    /// Allow β above the sampling threshold.
    #[arg(long)]
    unsafe_beta: bool,
    /// Write per-sample walk summaries and moves to this file.
    #[arg(long)]
    telemetry: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scale of the per-epoch step budget.
    #[arg(long, default_value_t = 4.0)]
    c1: f64,
    /// Scale of the epoch budget.
    #[arg(long, default_value_t = 8.0)]
    c2: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Algebra,
    Unbiased,
    Bounds,
    Mean,
    Potential,
    Emission,
    Cluster,
    Sandwich,
    End2end,
    Tree,
    Polymers,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    suite: Suite,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sample count for `mean`, `potential` and `end2end`.
    #[arg(long = "n-samples")]
    n_samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LogzArgs {
    hamiltonian: PathBuf,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 0.01)]
    eta: f64,
    #[arg(long)]
    unsafe_beta: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_hamiltonian(path: &Path) -> Result<Hamiltonian> {
    Hamiltonian::read_jsonl(BufReader::new(File::open(path)?))
}

fn require(v: Option<usize>, flag: &str) -> Result<usize> {
    v.ok_or_else(|| Error::InvalidInput(format!("--{flag} is required for this family")))
}

#[derive(Serialize)]
struct ModelReport {
    schema_version: u32,
    n: usize,
    terms: usize,
    degree: usize,
    locality: usize,
    beta_separability: f64,
    beta_sampling: f64,
    beta_cluster: f64,
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let h = match a.family {
        Family::ChainTfim => models::chain_tfim(require(a.n, "n")?)?,
        Family::HeisenbergChain => models::heisenberg_chain(require(a.n, "n")?)?,
        Family::GridZz => models::grid_zz(require(a.rows, "rows")?, require(a.cols, "cols")?)?,
        Family::RandomKlocal => {
            let seed = a
                .seed
                .ok_or_else(|| Error::InvalidInput("--seed is required for random-klocal".into()))?;
            models::random_klocal(
                require(a.n, "n")?,
                require(a.m, "m")?,
                require(a.k, "k")?,
                a.lo,
                a.hi,
                seed,
            )?
        }
    };
    let mut w = output(&a.out)?;
    h.write_jsonl(&mut w)?;
    w.flush()?;
    let report = ModelReport {
        schema_version: SCHEMA_VERSION,
        n: h.n(),
        terms: h.num_terms(),
        degree: h.degree(),
        locality: h.locality(),
        beta_separability: h.critical_beta(CriticalMode::Separability),
        beta_sampling: h.critical_beta(CriticalMode::Sampling),
        beta_cluster: h.critical_beta(CriticalMode::Cluster),
    };
    let line = serde_json::to_string(&report)?;
    if a.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(())
}

#[derive(Serialize)]
struct SampleHeader<'a> {
    schema_version: u32,
    kind: &'a str,
    n: usize,
    beta: f64,
    eps: f64,
    delta: f64,
    n_samples: u64,
    seed: u64,
}

#[derive(Serialize)]
struct SampleRecord {
    index: u64,
    seed: u64,
    state: String,
    code: usize,
    failures: u64,
}

/// Samples are computed in parallel in chunks and written in index order.
const CHUNK: u64 = 1024;

fn cmd_sample(a: &SampleArgs) -> Result<()> {
    let h = read_hamiltonian(&a.hamiltonian)?;
    let mut params = WalkParams::new(a.eps, a.delta);
    params.c1 = a.c1;
    params.c2 = a.c2;
    params.allow_above_threshold = a.unsafe_beta;
    params.validate()?;
    hotgibbs::pinning::check_beta(&h, a.beta, CriticalMode::Sampling, a.unsafe_beta)?;
    let mut w = output(&a.out)?;
    let mut tele = match &a.telemetry {
        Some(p) => Some(BufWriter::new(File::create(p)?)),
        None => None,
    };
    let header = SampleHeader {
        schema_version: SCHEMA_VERSION,
        kind: "sample",
        n: h.n(),
        beta: a.beta,
        eps: a.eps,
        delta: a.delta,
        n_samples: a.n_samples,
        seed: a.seed,
    };
    writeln!(w, "{}", serde_json::to_string(&header)?)?;
    let memo = LogPartitionMemo::new();
    let mut failures = 0;
    let mut start = 0;
    while start < a.n_samples {
        let end = (start + CHUNK).min(a.n_samples);
        let batch: Vec<_> = (start..end)
            .into_par_iter()
            .map(|i| {
                draw_indexed_sample(&h, a.beta, a.eps, &params, &memo, a.seed, i, 1000, tele.is_some())
            })
            .collect::<Result<Vec<_>>>()?;
        for s in batch {
            failures += s.failures;
            if s.failures > 0 {
                log::info!("sample {}: {} failed walks before success", s.index, s.failures);
            }
            let rec = SampleRecord {
                index: s.index,
                seed: s.seed,
                state: s.state.label(),
                code: s.state.code(),
                failures: s.failures,
            };
            writeln!(w, "{}", serde_json::to_string(&rec)?)?;
            if let Some(t) = tele.as_mut() {
                let line = serde_json::json!({
                    "index": s.index,
                    "summary": s.summary,
                    "moves": s.moves,
                });
                writeln!(t, "{line}")?;
            }
        }
        start = end;
    }
    w.flush()?;
    if let Some(t) = tele.as_mut() {
        t.flush()?;
    }
    eprintln!(
        "{}",
        serde_json::json!({"schema_version": SCHEMA_VERSION, "samples": a.n_samples, "walk_failures": failures})
    );
    Ok(())
}

fn run_suite(suite: Suite, seed: u64, n_samples: Option<usize>) -> Result<SuiteReport> {
    match suite {
        Suite::Algebra => verify::algebra(1000, seed),
        Suite::Unbiased => verify::unbiased(10, 3, 3, seed),
        Suite::Bounds => verify::bounds(100_000, seed),
        Suite::Mean => {
            let h = models::chain_tfim(4)?;
            let beta = h.critical_beta(CriticalMode::Separability) / 2.0;
            verify::separability_mean(&h, beta, n_samples.unwrap_or(20_000), seed)
        }
        Suite::Potential => {
            let h = models::chain_tfim(4)?;
            verify::potential(&h, h.potential_beta() / 2.0, n_samples.unwrap_or(10_000), seed)
        }
        Suite::Emission => verify::emission(200, seed),
        Suite::Cluster => verify::cluster_accuracy(&verify::cluster_instances()?, &[0.1, 0.01]),
        Suite::Sandwich => verify::sandwich(&models::regression_corpus(), 10.0, seed),
        Suite::End2end => {
            let h = models::chain_tfim(4)?;
            let beta = h.critical_beta(CriticalMode::Separability) / 4.0;
            let params = WalkParams::new(0.1, 0.01);
            let samples = n_samples.unwrap_or(20_000);
            verify::end_to_end(&h, beta, 0.1, &params, samples, 200, seed).map(|(r, _)| r)
        }
        Suite::Tree => {
            let h = verify::tree_instance()?;
            verify::tree(&h, h.critical_beta(CriticalMode::Sampling) / 2.0, 2)
        }
        Suite::Polymers => verify::polymer_counts(&verify::polymer_instances()?, 6),
        Suite::All => unreachable!("expanded by the caller"),
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<bool> {
    let suites = if a.suite == Suite::All {
        vec![
            Suite::Algebra,
            Suite::Unbiased,
            Suite::Bounds,
            Suite::Mean,
            Suite::Potential,
            Suite::Emission,
            Suite::Cluster,
            Suite::Sandwich,
            Suite::End2end,
            Suite::Tree,
            Suite::Polymers,
        ]
    } else {
        vec![a.suite]
    };
    let mut w = output(&a.out)?;
    let mut ok = true;
    for s in suites {
        let rep = run_suite(s, a.seed, a.n_samples)?;
        ok &= rep.passed();
        writeln!(w, "{}", serde_json::to_string(&rep)?)?;
    }
    w.flush()?;
    Ok(ok)
}

#[derive(Serialize)]
struct LogzReport {
    schema_version: u32,
    z_hat: f64,
    k_used: usize,
    k_required: usize,
    capped: bool,
    clusters: usize,
    polymers: usize,
    truncation_bound: f64,
    exact: Option<f64>,
    error: Option<f64>,
}

fn cmd_logz(a: &LogzArgs) -> Result<()> {
    let h = read_hamiltonian(&a.hamiltonian)?;
    let opts = EstimateOptions {
        allow_above_threshold: a.unsafe_beta,
        ..EstimateOptions::default()
    };
    let est = cluster::log_partition_estimate(&h, a.beta, a.eta, opts)?;
    let exact = if h.n() <= 10 {
        Some(oracle::log_partition(&h, a.beta)?)
    } else {
        None
    };
    let report = LogzReport {
        schema_version: SCHEMA_VERSION,
        z_hat: est.z_hat,
        k_used: est.k_used,
        k_required: est.k_required,
        capped: est.capped,
        clusters: est.cluster_count,
        polymers: est.polymer_count,
        truncation_bound: est.truncation_bound,
        exact,
        error: exact.map(|x| (est.z_hat - x).abs()),
    };
    let mut w = output(&a.out)?;
    writeln!(w, "{}", serde_json::to_string(&report)?)?;
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a).map(|_| true),
        Command::Sample(a) => cmd_sample(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
        Command::Logz(a) => cmd_logz(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
