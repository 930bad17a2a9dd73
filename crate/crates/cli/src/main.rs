//! `praml`: expected-cost analysis, evaluation and profiling of programs in
//! a small probabilistic ML-like language.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use praml_core::check::{self, CheckConfig};
use praml_core::corpus;
use praml_core::infer::{self, AnalysisOutcome, ObjectiveMode, Options};
use praml_core::interp_dist;
use praml_core::interp_trace::{render_trace, DEFAULT_BUDGET};
use praml_core::profiler::{self, SiteReport, TransformOptions};
use praml_core::program::Program;
use praml_core::rat;
use praml_core::syntax::pretty::render_core;
use praml_core::value::{parse_values, Value};

const EXIT_MISMATCH: u8 = 1;
const EXIT_UNSOUND: u8 = 2;
const EXIT_INPUT: u8 = 3;

/// Stack for the worker thread; evaluation recurses once per nested call.
const STACK_BYTES: usize = 1 << 30;

#[derive(Parser)]
#[command(name = "praml", version, about = "Expected-cost bounds for probabilistic functional programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Objective {
    Staged,
    Flat,
}

#[derive(Subcommand)]
enum Command {
    /// Infer a linear expected-cost bound.
    Analyze {
        file: PathBuf,
        /// Write the constraint system in LP format.
        #[arg(long)]
        emit_lp: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[arg(long, value_enum, default_value = "staged")]
        objective: Objective,
    },
    /// Exact cost distribution up to an evaluation depth.
    Eval {
        file: PathBuf,
        /// Whitespace-separated argument literals.
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo estimate of the expected cost.
    Sample {
        file: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// Write one JSON line per finished run: trace, cost and probability.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Check the inferred bound against exact and sampled expectations.
    Check {
        file: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// Write the counterexample of a failed check here.
        #[arg(long)]
        artifact: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Count branch frequencies of a deterministic program over a data set.
    Profile {
        file: PathBuf,
        /// Directory of files with one input per line.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Write the stats here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Replace profiled conditionals by coin flips.
    Transform {
        file: PathBuf,
        #[arg(long)]
        stats: PathBuf,
        /// Round frequencies to this many decimal digits.
        #[arg(long)]
        round_prob: Option<u32>,
        /// Drop the evaluation of replaced conditions.
        #[arg(long)]
        drop_scrutinee: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Analyze the bundled examples and compare with the expected bounds.
    Corpus {
        #[arg(long)]
        json: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.to_string(),
    }
}

type Outcome = Result<u8, Failure>;

fn load(file: &Path) -> Result<Program, Failure> {
    let text = fs::read_to_string(file).map_err(|e| input_error(format!("{}: {e}", file.display())))?;
    Program::parse(&text).map_err(|e| input_error(format!("{}: {e}", file.display())))
}

fn args_of(program: &Program, input: &str) -> Result<Vec<Value>, Failure> {
    let args = parse_values(input).map_err(|e| input_error(format!("--input: {e}")))?;
    program.call(&args).map_err(input_error)?;
    Ok(args)
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON values serialize"));
}

fn analyze(file: &Path, emit_lp: Option<&Path>, as_json: bool, objective: Objective) -> Outcome {
    let program = load(file)?;
    let mode = match objective {
        Objective::Staged => ObjectiveMode::Staged,
        Objective::Flat => ObjectiveMode::Flat,
    };
    if let Some(path) = emit_lp {
        let lp = infer::export_lp(&program, mode).map_err(input_error)?;
        fs::write(path, praml_lp::format::write_lp(&lp)).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    }
    let opts = Options {
        objective: mode,
        drop_class: None,
    };
    let outcome = infer::analyze_with(&program, &opts).map_err(input_error)?;
    let stats = outcome.stats();
    let stats_json = json!({
        "constraints": stats.constraints,
        "variables": stats.variables,
        "pivots": stats.pivots,
        "solve_time_ms": stats.solve_time.as_secs_f64() * 1e3,
    });
    match &outcome {
        AnalysisOutcome::Bound(a) => {
            if as_json {
                print_json(&json!({
                    "file": file.display().to_string(),
                    "status": "bound",
                    "bound": a.bound.to_json(),
                    "type": a.signature(),
                    "params": a.args.iter().map(|(n, t)| json!({"name": n, "type": t.to_string()})).collect::<Vec<_>>(),
                    "stats": stats_json,
                }));
            } else {
                println!("bound: {}", a.bound);
                println!("type: {}", a.signature());
                println!(
                    "constraints: {}  variables: {}  pivots: {}  solve time: {:.3} ms",
                    stats.constraints,
                    stats.variables,
                    stats.pivots,
                    stats.solve_time.as_secs_f64() * 1e3
                );
            }
        }
        AnalysisOutcome::NoBound { conflict, .. } => {
            if as_json {
                print_json(&json!({
                    "file": file.display().to_string(),
                    "status": corpus::NO_BOUND,
                    "bound": null,
                    "conflict": conflict,
                    "stats": stats_json,
                }));
            } else {
                println!("{}", corpus::NO_BOUND);
                println!("conflicting constraints:");
                for c in conflict {
                    println!("  {c}");
                }
                println!("constraints: {}  variables: {}", stats.constraints, stats.variables);
            }
        }
    }
    Ok(0)
}

fn eval(file: &Path, input: &str, depth: usize, as_json: bool) -> Outcome {
    let program = load(file)?;
    let args = args_of(&program, input)?;
    let (env, body) = program.call(&args).map_err(input_error)?;
    let mu = interp_dist::eval_partial_dist(&env, &body, depth).map_err(input_error)?;
    let expected = mu.expected_cost();
    let finished = mu.restrict_values();
    if as_json {
        print_json(&json!({
            "depth": depth,
            "distribution": mu.to_json(),
            "expected_cost": expected.as_ref().map(rat::render),
            "finished_mass": rat::render(&finished.mass()),
            "diverge_mass": rat::render(&mu.diverge_mass()),
        }));
    } else {
        for (o, c, p) in mu.entries() {
            println!("{o} | cost {c} | prob {}", rat::render(p));
        }
        match &expected {
            Some(e) => println!("expected cost: {}", rat::render_with_decimal(e)),
            None => println!("expected cost: infinite"),
        }
        println!("residual ∘ mass: {}", rat::render(&mu.diverge_mass()));
    }
    Ok(0)
}

fn sample(file: &Path, input: &str, trials: usize, seed: u64, budget: usize, log: Option<&Path>, as_json: bool) -> Outcome {
    let program = load(file)?;
    let args = args_of(&program, input)?;
    let (runs, unfinished) = check::sample_runs(&program, &args, trials, seed, budget).map_err(input_error)?;
    if let Some(path) = log {
        let lines: String = runs
            .iter()
            .map(|r| {
                let line = json!({
                    "trace": render_trace(&r.trace),
                    "cost": rat::render(&r.cost),
                    "prob": rat::render(&r.prob),
                });
                format!("{line}\n")
            })
            .collect();
        fs::write(path, lines).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    }
    let costs: Vec<f64> = runs.iter().map(|r| rat::to_f64(&r.cost)).collect();
    let (mean, std_dev) = check::mean_std(&costs);
    let stderr = std_dev / (costs.len().max(1) as f64).sqrt();
    if as_json {
        print_json(&json!({
            "trials": trials,
            "seed": seed,
            "unfinished": unfinished,
            "mean": mean,
            "std_dev": std_dev,
            "std_error": stderr,
        }));
    } else {
        println!("trials: {trials}  seed: {seed}  unfinished: {unfinished}");
        println!("mean cost: {mean:.6}  std dev: {std_dev:.6}  std error: {stderr:.6}");
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn run_check(
    file: &Path,
    input: &str,
    depth: usize,
    trials: usize,
    seed: u64,
    budget: usize,
    artifact: Option<&Path>,
    as_json: bool,
) -> Outcome {
    let program = load(file)?;
    let args = args_of(&program, input)?;
    let outcome = infer::analyze(&program).map_err(input_error)?;
    let AnalysisOutcome::Bound(a) = outcome else {
        return Err(input_error(format!("{}: {}", file.display(), corpus::NO_BOUND)));
    };
    let bound = praml_core::bound::evaluate(&a.bound, &args).map_err(input_error)?;
    let cfg = CheckConfig {
        max_depth: depth,
        trials,
        seed,
        budget,
    };
    let report = check::check(&program, &args, &bound, &a.result, &cfg).map_err(input_error)?;
    if let (Some(path), Some(cex)) = (artifact, &report.counterexample) {
        let text = serde_json::to_string_pretty(cex).expect("JSON values serialize");
        fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    }
    if as_json {
        print_json(&json!({
            "bound_text": a.bound.to_string(),
            "report": serde_json::to_value(&report).expect("report serializes"),
        }));
    } else {
        println!("bound: {} = {}", a.bound, rat::render_with_decimal(&bound));
        for d in &report.depths {
            println!(
                "depth {:>3}: expected {} | ∘ mass {} | {}",
                d.depth,
                d.expected_h.as_deref().unwrap_or("infinite"),
                d.diverge_mass,
                if d.ok { "ok" } else { "VIOLATION" }
            );
        }
        let mc = &report.monte_carlo;
        println!(
            "monte carlo: {} trials, mean {:.6} <= {:.6}: {}",
            mc.trials,
            mc.mean,
            mc.threshold,
            if mc.ok { "ok" } else { "VIOLATION" }
        );
        if let Some(cex) = &report.counterexample {
            println!("counterexample: {cex}");
        }
        println!("{}", if report.pass { "PASS" } else { "FAIL" });
    }
    Ok(if report.pass { 0 } else { EXIT_UNSOUND })
}

fn read_inputs(dir: &Path) -> Result<Vec<Vec<Value>>, Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| input_error(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    let mut inputs = Vec::new();
    for f in files {
        let text = fs::read_to_string(&f).map_err(|e| input_error(format!("{}: {e}", f.display())))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let args = parse_values(line).map_err(|e| input_error(format!("{}:{}: {e}", f.display(), i + 1)))?;
            inputs.push(args);
        }
    }
    Ok(inputs)
}

fn profile(file: &Path, data: &Path, alpha: f64, output: Option<&Path>) -> Outcome {
    let program = load(file)?;
    let inputs = read_inputs(data)?;
    let stats = profiler::profile(&program, &inputs).map_err(input_error)?;
    let report = profiler::report(&stats, alpha);
    let text = serde_json::to_string_pretty(&report).expect("stats serialize");
    match output {
        Some(path) => fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))?,
        None => println!("{text}"),
    }
    Ok(0)
}

fn transform(file: &Path, stats: &Path, round_prob: Option<u32>, drop_scrutinee: bool, output: &Path) -> Outcome {
    let program = load(file)?;
    let text = fs::read_to_string(stats).map_err(|e| input_error(format!("{}: {e}", stats.display())))?;
    let reports: Vec<SiteReport> =
        serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", stats.display())))?;
    let opts = TransformOptions {
        round_digits: round_prob,
        drop_scrutinee,
    };
    let core = profiler::transform(&program.core, &reports, &opts).map_err(input_error)?;
    let rendered = render_core(&core);
    Program::parse(&rendered).map_err(|e| input_error(format!("transformed program does not check: {e}")))?;
    fs::write(output, rendered + "\n").map_err(|e| input_error(format!("{}: {e}", output.display())))?;
    Ok(0)
}

fn run_corpus(as_json: bool) -> Outcome {
    let rows = corpus::run_all();
    if as_json {
        print_json(&serde_json::to_value(&rows).expect("rows serialize"));
    } else {
        println!(
            "{:<20} {:<24} {:>11} {:>9} {:>10}  result",
            "program", "bound", "constraints", "variables", "time (ms)"
        );
        for r in &rows {
            println!(
                "{:<20} {:<24} {:>11} {:>9} {:>10.3}  {}",
                r.name,
                r.bound,
                r.constraints,
                r.variables,
                r.solve_time.as_secs_f64() * 1e3,
                if r.pass { "ok".to_string() } else { format!("MISMATCH (expected {})", r.expected) }
            );
        }
    }
    Ok(if rows.iter().all(|r| r.pass) { 0 } else { EXIT_MISMATCH })
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Analyze {
            file,
            emit_lp,
            json,
            objective,
        } => analyze(&file, emit_lp.as_deref(), json, objective),
        Command::Eval {
            file,
            input,
            depth,
            json,
        } => eval(&file, &input, depth, json),
        Command::Sample {
            file,
            input,
            trials,
            seed,
            budget,
            log,
            json,
        } => sample(&file, &input, trials, seed, budget, log.as_deref(), json),
        Command::Check {
            file,
            input,
            depth,
            trials,
            seed,
            budget,
            artifact,
            json,
        } => run_check(&file, &input, depth, trials, seed, budget, artifact.as_deref(), json),
        Command::Profile {
            file,
            data,
            alpha,
            output,
        } => profile(&file, &data, alpha, output.as_deref()),
        Command::Transform {
            file,
            stats,
            round_prob,
            drop_scrutinee,
            output,
        } => transform(&file, &stats, round_prob, drop_scrutinee, &output),
        Command::Corpus { json } => run_corpus(json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let worker = std::thread::Builder::new()
        .stack_size(STACK_BYTES)
        .spawn(move || run(cli))
        .expect("spawning the worker thread");
    match worker.join() {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(f)) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
        Err(_) => ExitCode::FAILURE,
    }
}
