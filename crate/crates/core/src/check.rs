//! Empirical soundness harness: compares a bound against exact depth-limited
//! expectations and against Monte Carlo estimates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::interp_dist::{self, CostDist};
use crate::interp_trace::{self, RunResult, TraceError};
use crate::potential::Pot;
use crate::program::Program;
use crate::rat::{self, Rat};
use crate::value::Value;

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub max_depth: usize,
    pub trials: usize,
    pub seed: u64,
    pub budget: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthRow {
    pub depth: usize,
    /// Expected cost plus result potential, or `None` for an infinite value.
    pub expected_h: Option<String>,
    pub diverge_mass: String,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarlo {
    pub trials: usize,
    /// Runs that exhausted the step budget; they are left out of the mean.
    pub unfinished: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub threshold: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub bound: String,
    pub depths: Vec<DepthRow>,
    pub monte_carlo: MonteCarlo,
    pub pass: bool,
    /// The smallest depth whose expectation exceeds the bound, with its
    /// distribution.
    pub counterexample: Option<serde_json::Value>,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs `trials` samples from one generator seeded with `seed`. Returns
/// the finished runs and the number of runs that exhausted the budget.
pub fn sample_runs(
    program: &Program,
    args: &[Value],
    trials: usize,
    seed: u64,
    budget: usize,
) -> Result<(Vec<RunResult>, usize), CheckError> {
    let (env, body) = program.call(args).map_err(|e| CheckError::Input(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runs = Vec::with_capacity(trials);
    let mut unfinished = 0;
    for _ in 0..trials {
        match interp_trace::sample_with(&env, &body, &mut rng, budget) {
            Ok(r) => runs.push(r),
            Err(TraceError::Budget(_)) => unfinished += 1,
            Err(e) => return Err(CheckError::Runtime(e.to_string())),
        }
    }
    Ok((runs, unfinished))
}

/// Costs of the finished runs of [`sample_runs`] and the unfinished count.
pub fn sample_costs(
    program: &Program,
    args: &[Value],
    trials: usize,
    seed: u64,
    budget: usize,
) -> Result<(Vec<f64>, usize), CheckError> {
    let (runs, unfinished) = sample_runs(program, args, trials, seed, budget)?;
    Ok((runs.iter().map(|r| rat::to_f64(&r.cost)).collect(), unfinished))
}

/// Checks `bound` (the value of the bound on `args`) for the program
/// applied to `args`, where `result` is the annotated result type.
pub fn check(program: &Program, args: &[Value], bound: &Rat, result: &Pot, cfg: &CheckConfig) -> Result<CheckReport, CheckError> {
    let (env, body) = program.call(args).map_err(|e| CheckError::Input(e.to_string()))?;
    let mut depths = Vec::new();
    let mut counterexample = None;
    for depth in 0..=cfg.max_depth {
        let mu: CostDist =
            interp_dist::eval_partial_dist(&env, &body, depth).map_err(|e| CheckError::Runtime(e.to_string()))?;
        let h = interp_dist::expected_h(&mu, result).map_err(|e| CheckError::Runtime(e.to_string()))?;
        let ok = h.as_ref().is_some_and(|h| h <= bound);
        if !ok && counterexample.is_none() {
            counterexample = Some(serde_json::json!({
                "depth": depth,
                "expected_h": h.as_ref().map(rat::render),
                "distribution": mu.to_json(),
            }));
        }
        depths.push(DepthRow {
            depth,
            expected_h: h.as_ref().map(rat::render),
            diverge_mass: rat::render(&mu.diverge_mass()),
            ok,
        });
    }
    let (costs, unfinished) = sample_costs(program, args, cfg.trials, cfg.seed, cfg.budget)?;
    let (mean, std_dev) = mean_std(&costs);
    let threshold = rat::to_f64(bound) + 4.0 * std_dev / (costs.len().max(1) as f64).sqrt();
    let mc_ok = mean <= threshold;
    let pass = depths.iter().all(|d| d.ok) && mc_ok;
    Ok(CheckReport {
        bound: rat::render(bound),
        depths,
        monte_carlo: MonteCarlo {
            trials: cfg.trials,
            unfinished,
            mean,
            std_dev,
            threshold,
            ok: mc_ok,
        },
        pass,
        counterexample,
    })
}
