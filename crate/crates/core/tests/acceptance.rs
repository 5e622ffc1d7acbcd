//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test -p hotgibbs --test acceptance -- 7 10`.

use hotgibbs::tree_walk::WalkParams;
use hotgibbs::verify::{self, SuiteReport};
use hotgibbs::{models, CriticalMode, Result};
use std::time::{Duration, Instant};

struct Outcome {
    passed: bool,
    detail: String,
}

fn from_report(rep: &SuiteReport) -> Outcome {
    let margins: Vec<String> = rep
        .margins
        .iter()
        .map(|(k, v)| format!("{k}={v:.3e}"))
        .collect();
    Outcome {
        passed: rep.passed(),
        detail: format!(
            "{}/{} cases ok; {}",
            rep.cases - rep.failures,
            rep.cases,
            margins.join(", ")
        ),
    }
}

fn pauli_algebra() -> Result<Outcome> {
    Ok(from_report(&verify::algebra(1000, 1)?))
}

fn sampler_unbiasedness() -> Result<Outcome> {
    Ok(from_report(&verify::unbiased(10, 3, 3, 2)?))
}

fn coefficient_bounds() -> Result<Outcome> {
    Ok(from_report(&verify::bounds(100_000, 3)?))
}

fn separability_mean() -> Result<Outcome> {
    let h = models::chain_tfim(4)?;
    let beta = h.critical_beta(CriticalMode::Separability) / 2.0;
    Ok(from_report(&verify::separability_mean(&h, beta, 200_000, 4)?))
}

fn potential_invariant() -> Result<Outcome> {
    let h = models::chain_tfim(4)?;
    Ok(from_report(&verify::potential(&h, h.potential_beta() / 2.0, 10_000, 5)?))
}

fn stabilizer_emission() -> Result<Outcome> {
    Ok(from_report(&verify::emission(200, 6)?))
}

fn cluster_accuracy() -> Result<Outcome> {
    let instances = verify::cluster_instances()?;
    Ok(from_report(&verify::cluster_accuracy(&instances, &[0.1, 0.01])?))
}

fn structural_inequalities() -> Result<Outcome> {
    Ok(from_report(&verify::sandwich(&models::regression_corpus(), 10.0, 8)?))
}

fn end_to_end() -> Result<Outcome> {
    let h = models::chain_tfim(4)?;
    let beta = h.critical_beta(CriticalMode::Separability) / 4.0;
    let params = WalkParams::new(0.1, 0.01);
    let (rep, _) = verify::end_to_end(&h, beta, 0.1, &params, 100_000, 200, 9)?;
    Ok(from_report(&rep))
}

fn tree_stationarity() -> Result<Outcome> {
    let h = verify::tree_instance()?;
    let beta = h.critical_beta(CriticalMode::Sampling) / 2.0;
    Ok(from_report(&verify::tree(&h, beta, 2)?))
}

fn polymer_counts() -> Result<Outcome> {
    Ok(from_report(&verify::polymer_counts(&verify::polymer_instances()?, 6)?))
}

type Criterion = (u32, &'static str, Duration, fn() -> Result<Outcome>);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "Pauli algebra exactness", Duration::from_secs(1), pauli_algebra),
        (2, "sampler unbiasedness", Duration::from_secs(30), sampler_unbiasedness),
        (3, "coefficient bounds", Duration::from_secs(60), coefficient_bounds),
        (4, "separability sampler mean", Duration::from_secs(600), separability_mean),
        (5, "potential invariant", Duration::from_secs(300), potential_invariant),
        (6, "stabilizer emission", Duration::from_secs(30), stabilizer_emission),
        (7, "cluster expansion accuracy", Duration::from_secs(300), cluster_accuracy),
        (8, "structural inequality checks", Duration::from_secs(120), structural_inequalities),
        (9, "end-to-end Gibbs sampling", Duration::from_secs(1800), end_to_end),
        (10, "tree-walk stationarity", Duration::from_secs(60), tree_stationarity),
        (11, "polymer count bound", Duration::from_secs(60), polymer_counts),
    ];
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut all_passed = true;
    for (id, name, budget, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= budget;
        let status = if passed && in_time { "PASS" } else { "FAIL" };
        all_passed &= passed && in_time;
        println!(
            "criterion {id:>2} {status} {name} [{:.1}s of {}s]: {detail}",
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if !all_passed {
        std::process::exit(1);
    }
}
