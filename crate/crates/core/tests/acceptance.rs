//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

#[path = "../../lp/tests/support/vertex_enum.rs"]
mod vertex_enum;

use std::panic::{self, AssertUnwindSafe};
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use praml_core::bound;
use praml_core::check::mean_std;
use praml_core::corpus::{self, Expected, ENTRIES};
use praml_core::infer::{self, AnalysisOutcome};
use praml_core::interp_dist::{self, leq_pointwise, sq_leq, Cost, CostDist, DistKind, Outcome};
use praml_core::interp_trace::{self, DEFAULT_BUDGET};
use praml_core::profiler::{self, nearly_sorted, TransformOptions};
use praml_core::program::Program;
use praml_core::rat::{self, frac, Rat};
use praml_core::value::Value;
use praml_lp::Status;
use vertex_enum::{random_lp, vertex_enumeration, Oracle};

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// The insertion sort rewritten from profiles of nearly sorted lists.
fn isort_prime() -> Program {
    let program = corpus::get("isort").unwrap().program();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let inputs: Vec<Vec<Value>> = (0..200)
        .map(|i| vec![Value::list(nearly_sorted(20 + i % 81, 10, &mut rng).into_iter().map(Value::Int))])
        .collect();
    let stats = profiler::profile(&program, &inputs).unwrap();
    let reports = profiler::report(&stats, 0.05);
    let opts = TransformOptions {
        round_digits: Some(1),
        drop_scrutinee: true,
    };
    Program::from_core(profiler::transform(&program.core, &reports, &opts).unwrap()).unwrap()
}

fn analyze(p: &Program) -> Option<infer::Analysis> {
    infer::analyze(p).unwrap().bound().cloned()
}

fn goldens() -> Verdict {
    let rows = corpus::run_all();
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass && r.expected != corpus::NO_BOUND)
        .map(|r| format!("{}: {} (expected {})", r.name, r.bound, r.expected))
        .collect();
    ensure(bad.is_empty(), || bad.join("; "))?;
    let dice = analyze(&corpus::get("dice").unwrap().program()).unwrap();
    ensure(rat::to_decimal(&dice.bound.constant, 2) == "3.67", || "dice is not 3.67".into())?;
    let prime = analyze(&isort_prime()).ok_or("isort' has no bound")?;
    ensure(prime.bound.to_string() == "10·|l|", || format!("isort' gives {}", prime.bound))?;
    let checked = rows.iter().filter(|r| r.expected != corpus::NO_BOUND).count();
    Ok(format!("{checked} corpus bounds and isort' = 10·|l|"))
}

fn red_black() -> Verdict {
    let mut out = Vec::new();
    for (name, limit) in [
        ("sample_fast_red", frac(3, 10)),
        ("sample_slow_red", frac(3, 10)),
        ("sample_fast_black", frac(7, 10)),
        ("sample_slow_black", frac(7, 10)),
    ] {
        let a = analyze(&corpus::get(name).unwrap().program()).ok_or(format!("{name}: no bound"))?;
        ensure(a.bound.terms.is_empty() && a.bound.constant <= limit, || {
            format!("{name}: {} exceeds {}", a.bound, rat::render(&limit))
        })?;
        out.push(format!("{name} {}", rat::render(&a.bound.constant)));
    }
    Ok(out.join(", "))
}

fn soundness() -> Verdict {
    let mut programs: Vec<(String, Program)> = ENTRIES
        .iter()
        .filter(|e| e.expected != Expected::NoBound)
        .map(|e| (e.name.to_string(), e.program()))
        .collect();
    programs.push(("isort'".into(), isort_prime()));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut checks = 0;
    for (name, program) in &programs {
        let a = analyze(program).ok_or(format!("{name}: no bound"))?;
        for _ in 0..5 {
            let args = corpus::random_inputs(program, 4, &mut rng);
            let b = bound::evaluate(&a.bound, &args)?;
            let (env, body) = program.call(&args).map_err(|e| e.to_string())?;
            for depth in 0..=12 {
                let mu = interp_dist::eval_partial_dist(&env, &body, depth).map_err(|e| e.to_string())?;
                let h = interp_dist::expected_h(&mu, &a.result).map_err(|e| e.to_string())?;
                ensure(h.as_ref().is_some_and(|h| *h <= b), || {
                    format!("{name} on {args:?} at depth {depth}: h = {h:?} > {}", rat::render(&b))
                })?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} exact comparisons over {} programs", programs.len()))
}

fn semantics_agree() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut agreed = 0;
    let mut skipped = 0;
    for entry in ENTRIES {
        let program = entry.program();
        for _ in 0..5 {
            let args = corpus::random_inputs(&program, 3, &mut rng);
            let (env, body) = program.call(&args).map_err(|e| e.to_string())?;
            let full = interp_dist::eval_partial_dist(&env, &body, 12).map_err(|e| e.to_string())?;
            let by_trace = interp_trace::enumerate(&env, &body, 12, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
            if full.diverge_mass() != rat::zero() || by_trace.mass() != rat::one() {
                skipped += 1;
                continue;
            }
            let sub = interp_dist::eval_dist(&env, &body, 12).map_err(|e| e.to_string())?;
            ensure(sub == by_trace, || format!("{} on {args:?}", entry.name))?;
            agreed += 1;
        }
    }
    ensure(agreed > 0, || "no terminating cases".into())?;
    Ok(format!("{agreed} terminating cases agree ({skipped} did not finish within depth 12)"))
}

fn half_pow(i: usize) -> Rat {
    frac(1, 2).pow(i as i32)
}

fn order_lemmas() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut pairs = 0;
    for entry in ENTRIES {
        let program = entry.program();
        for _ in 0..2 {
            let args = corpus::random_inputs(&program, 3, &mut rng);
            let (env, body) = program.call(&args).map_err(|e| e.to_string())?;
            let subs: Vec<CostDist> = (0..=12).map(|d| interp_dist::eval_dist(&env, &body, d).unwrap()).collect();
            let fulls: Vec<CostDist> =
                (0..=12).map(|d| interp_dist::eval_partial_dist(&env, &body, d).unwrap()).collect();
            for n in 0..=12 {
                for m in n..=12 {
                    ensure(leq_pointwise(&subs[n], &subs[m]), || format!("{}: ≤ fails at {n},{m}", entry.name))?;
                    ensure(sq_leq(&fulls[n], &fulls[m]), || format!("{}: ⊑ fails at {n},{m}", entry.name))?;
                    pairs += 1;
                }
            }
        }
    }
    let (env, body) = corpus::get("loop_half").unwrap().program().call(&[Value::Unit]).unwrap();
    for k in 0..=6 {
        let mut expected = CostDist::zero(DistKind::Sub);
        for i in 1..=k {
            expected.add(Outcome::Value(Value::Unit), Cost::zero(), half_pow(i));
        }
        let sub = interp_dist::eval_dist(&env, &body, 2 * k + 1).unwrap();
        ensure(sub == expected, || format!("diverging loop at depth {}", 2 * k + 1))?;
        let full = interp_dist::eval_partial_dist(&env, &body, 2 * k + 1).unwrap();
        ensure(full.get(&Outcome::Diverge, &Cost::zero()) == half_pow(k), || {
            format!("∘ mass at depth {}", 2 * k + 1)
        })?;
    }
    Ok(format!("{pairs} depth pairs; diverging loop exact for k ≤ 6"))
}

fn bernoulli_mean() -> Verdict {
    let program = corpus::get("bernoulli").unwrap().program();
    let (costs, unfinished) =
        praml_core::check::sample_costs(&program, &[Value::unit_list(3)], 10_000, 2024, DEFAULT_BUDGET)
            .map_err(|e| e.to_string())?;
    ensure(unfinished == 0, || "unfinished runs".into())?;
    let (mean, sd) = mean_std(&costs);
    let tol = 4.0 * sd / (costs.len() as f64).sqrt();
    ensure((mean - 0.875).abs() <= tol, || format!("mean {mean} vs 7/8 ± {tol}"))?;
    Ok(format!("mean {mean:.4}, |mean - 7/8| <= {tol:.4}"))
}

fn negative_controls() -> Verdict {
    for name in ["geometric", "negative_binomial", "von_neumann"] {
        let outcome = infer::analyze(&corpus::get(name).unwrap().program()).map_err(|e| e.to_string())?;
        ensure(matches!(outcome, AnalysisOutcome::NoBound { .. }), || format!("{name} got a bound"))?;
    }
    Ok(format!("all three report \"{}\"", corpus::NO_BOUND))
}

fn stats_deterministic() -> Verdict {
    let first = corpus::run_all();
    let second = corpus::run_all();
    let mut total = Duration::ZERO;
    for (a, b) in first.iter().zip(&second) {
        ensure(a.constraints == b.constraints && a.variables == b.variables, || {
            format!("{}: {} vs {} constraints", a.name, a.constraints, b.constraints)
        })?;
        ensure(a.constraints > 0, || format!("{}: no constraints reported", a.name))?;
        total += a.solve_time;
    }
    for r in &first {
        println!(
            "    {:<20} {:>5} constraints {:>5} variables {:>9.3} ms",
            r.name,
            r.constraints,
            r.variables,
            r.solve_time.as_secs_f64() * 1e3
        );
    }
    Ok(format!("{} programs, total solve time {:.1} ms", first.len(), total.as_secs_f64() * 1e3))
}

fn simplex_vs_vertices() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut optimal, mut infeasible) = (0, 0);
    for i in 0..200 {
        let lp = random_lp(&mut rng);
        let s = praml_lp::solve(&lp).map_err(|e| e.to_string())?;
        match vertex_enumeration(&lp) {
            Oracle::Infeasible => {
                ensure(s.status == Status::Infeasible, || format!("LP {i}: simplex says {:?}", s.status))?;
                infeasible += 1;
            }
            Oracle::Optimal(v) => {
                ensure(s.status == Status::Optimal && s.objective == v, || {
                    format!("LP {i}: {:?} {} vs {}", s.status, rat::render(&s.objective), rat::render(&v))
                })?;
                optimal += 1;
            }
        }
    }
    Ok(format!("200 agree ({optimal} optimal, {infeasible} infeasible)"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("golden bounds", goldens),
        ("red/black tick variants", red_black),
        ("soundness against exact expectations", soundness),
        ("distribution and trace semantics agree", semantics_agree),
        ("order lemmas and diverging example", order_lemmas),
        ("bernoulli Monte Carlo mean", bernoulli_mean),
        ("programs without linear bounds", negative_controls),
        ("deterministic constraint statistics", stats_deterministic),
        ("simplex against vertex enumeration", simplex_vs_vertices),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
