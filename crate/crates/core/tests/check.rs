use praml_core::bound;
use praml_core::check::{self, CheckConfig};
use praml_core::corpus;
use praml_core::infer::{self, AnalysisOutcome};
use praml_core::rat::{self, frac};
use praml_core::value::Value;

fn cfg() -> CheckConfig {
    CheckConfig {
        max_depth: 12,
        trials: 2000,
        seed: 4,
        budget: 100_000,
    }
}

fn analysis(name: &str) -> infer::Analysis {
    let AnalysisOutcome::Bound(a) = infer::analyze(&corpus::get(name).unwrap().program()).unwrap() else {
        panic!("{name}")
    };
    a
}

#[test]
fn inferred_bounds_pass() {
    for (name, args) in [
        ("bernoulli", vec![Value::unit_list(3)]),
        ("brdwalk", vec![Value::unit_list(6)]),
        ("sample_slow", vec![Value::Unit]),
        ("dice", vec![Value::Unit]),
    ] {
        let program = corpus::get(name).unwrap().program();
        let a = analysis(name);
        let b = bound::evaluate(&a.bound, &args).unwrap();
        let report = check::check(&program, &args, &b, &a.result, &cfg()).unwrap();
        assert!(report.pass, "{name}: {report:?}");
        assert_eq!(report.depths.len(), 13);
        assert!(report.counterexample.is_none());
        assert_eq!(report.monte_carlo.unfinished, 0);
    }
}

#[test]
fn lowered_bound_is_caught() {
    // Bernoulli on three elements costs 7/8 in expectation, under the bound 1.
    let program = corpus::get("bernoulli").unwrap().program();
    let a = analysis("bernoulli");
    let args = [Value::unit_list(3)];
    let report = check::check(&program, &args, &frac(1, 2), &a.result, &cfg()).unwrap();
    assert!(!report.pass);
    assert!(!report.monte_carlo.ok);
    let cex = report.counterexample.unwrap();
    let first_bad = report.depths.iter().find(|d| !d.ok).unwrap().depth;
    assert_eq!(cex["depth"], first_bad);
    assert!(cex["distribution"].is_array());

    // Deep enough for every run to finish, the exact expectation is caught
    // even when sampling alone cannot separate it.
    let deep = CheckConfig { max_depth: 60, ..cfg() };
    let tight = frac(7, 8) - frac(1, 1000);
    assert!(!check::check(&program, &args, &tight, &a.result, &deep).unwrap().pass);
    assert!(check::check(&program, &args, &frac(7, 8), &a.result, &deep).unwrap().pass);
}

#[test]
fn sample_runs_are_reproducible() {
    let program = corpus::get("rdwalk").unwrap().program();
    let args = [Value::list([Value::Prob(frac(1, 2)), Value::Prob(frac(1, 4))])];
    let (a, ua) = check::sample_runs(&program, &args, 100, 9, 100_000).unwrap();
    let (b, ub) = check::sample_runs(&program, &args, 100, 9, 100_000).unwrap();
    assert_eq!(a, b);
    assert_eq!((ua, ub), (0, 0));
    let (costs, _) = check::sample_costs(&program, &args, 100, 9, 100_000).unwrap();
    assert_eq!(costs, a.iter().map(|r| rat::to_f64(&r.cost)).collect::<Vec<_>>());
}

#[test]
fn unfinished_runs_are_counted() {
    let program = corpus::get("loop_half").unwrap().program();
    let (_, unfinished) = check::sample_runs(&program, &[Value::Unit], 200, 1, 12).unwrap();
    assert!(unfinished > 0);
}

#[test]
fn mean_and_sample_deviation() {
    let (m, s) = check::mean_std(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(m, 2.5);
    assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
    assert_eq!(check::mean_std(&[]), (0.0, 0.0));
}
