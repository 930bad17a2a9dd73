use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use praml_core::bound;
use praml_core::corpus::{self, Expected, ENTRIES};
use praml_core::infer::gen::{tag_class, RULES};
use praml_core::infer::{self, AnalysisOutcome, ObjectiveMode, Options};
use praml_core::interp_dist;
use praml_core::program::{Program, ProgramError};
use praml_core::rat::{self, frac};
use praml_core::value::Value;

fn analysis(name: &str) -> infer::Analysis {
    match infer::analyze(&corpus::get(name).unwrap().program()).unwrap() {
        AnalysisOutcome::Bound(a) => a,
        AnalysisOutcome::NoBound { conflict, .. } => panic!("{name}: no bound ({conflict:?})"),
    }
}

#[test]
fn corpus_goldens() {
    for row in corpus::run_all() {
        assert!(row.pass, "{}: expected {}, got {}", row.name, row.expected, row.bound);
    }
}

#[test]
fn inferred_signatures() {
    assert_eq!(analysis("brdwalk").signature(), "<L^2(unit), 0> -> <unit, 0>");
    assert_eq!(analysis("bernoulli").signature(), "<L^0(unit), 1> -> <bool, 0>");
    assert_eq!(analysis("rdwalk").signature(), "<L^1(prob{5}{0}), 0> -> <unit, 0>");
}

#[test]
fn per_element_recursion_needs_one_unit_per_element() {
    let p = Program::parse("let rec walk l = match l with | [] -> () | _ :: t -> let _ = tick 1 in walk t").unwrap();
    let AnalysisOutcome::Bound(a) = infer::analyze(&p).unwrap() else { panic!() };
    assert_eq!(a.bound.to_string(), "|l|");
    assert_eq!(a.signature(), "<L^1(unit), 0> -> <unit, 0>");
}

#[test]
fn bounded_programs_pass_the_checker() {
    for entry in ENTRIES.iter().filter(|e| e.expected != Expected::NoBound) {
        let program = entry.program();
        let AnalysisOutcome::Bound(a) = infer::analyze(&program).unwrap() else { panic!("{}", entry.name) };
        assert_eq!(infer::check(&program, &a), Ok(()), "{}", entry.name);
    }
}

#[test]
fn checker_rejects_a_lowered_constant() {
    let program = corpus::get("bernoulli").unwrap().program();
    let mut a = analysis("bernoulli");
    a.q = frac(1, 2);
    assert!(infer::check(&program, &a).is_err());

    let mut a = analysis("bernoulli");
    if let Some(v) = a.values.iter_mut().find(|v| **v > rat::zero()) {
        *v = rat::zero();
    }
    assert!(infer::check(&program, &a).is_err());
}

#[test]
fn no_bound_programs_report_a_conflict() {
    for name in ["geometric", "negative_binomial", "von_neumann", "isort"] {
        let outcome = infer::analyze(&corpus::get(name).unwrap().program()).unwrap();
        let AnalysisOutcome::NoBound { conflict, stats } = outcome else { panic!("{name} got a bound") };
        assert!(!conflict.is_empty(), "{name}");
        assert!(conflict.iter().all(|t| RULES.contains(&tag_class(t))), "{name}: {conflict:?}");
        assert!(stats.constraints > 0);
    }
}

#[test]
fn flat_objective_finds_a_different_sound_bound() {
    let program = corpus::get("bernoulli").unwrap().program();
    let opts = Options {
        objective: ObjectiveMode::Flat,
        drop_class: None,
    };
    let AnalysisOutcome::Bound(a) = infer::analyze_with(&program, &opts).unwrap() else { panic!() };
    assert_eq!(a.bound.to_string(), "1/2·|lst|");
    assert_eq!(infer::check(&program, &a), Ok(()));
    for n in 0..6 {
        let args = [Value::unit_list(n)];
        let b = bound::evaluate(&a.bound, &args).unwrap();
        let (env, body) = program.call(&args).unwrap();
        let mu = interp_dist::eval_partial_dist(&env, &body, 40).unwrap();
        assert!(interp_dist::expected_h(&mu, &a.result).unwrap().unwrap() <= b);
    }

    let brdwalk = corpus::get("brdwalk").unwrap().program();
    let AnalysisOutcome::Bound(a) = infer::analyze_with(&brdwalk, &opts).unwrap() else { panic!() };
    assert_eq!(a.bound.to_string(), "2·|l|");
}

#[test]
fn constraint_counts_are_deterministic() {
    for entry in ENTRIES {
        let program = entry.program();
        let a = infer::analyze(&program).unwrap();
        let b = infer::analyze(&entry.program()).unwrap();
        assert_eq!(a.stats().constraints, b.stats().constraints, "{}", entry.name);
        assert_eq!(a.stats().variables, b.stats().variables, "{}", entry.name);
        assert_eq!(a.stats().pivots, b.stats().pivots, "{}", entry.name);
        assert_eq!(a.bound().map(|x| x.bound.to_string()), b.bound().map(|x| x.bound.to_string()));
    }
}

#[test]
fn every_constraint_has_a_known_rule() {
    for entry in ENTRIES {
        let sys = infer::generate(&entry.program()).unwrap();
        for c in sys.lp.constraints() {
            assert!(RULES.contains(&tag_class(&c.tag)), "{}: tag {}", entry.name, c.tag);
            assert!(c.tag.contains(" @"), "{}: tag {} lacks a span", entry.name, c.tag);
        }
    }
}

#[test]
fn base_type_errors() {
    let err = Program::parse("let f u = () :: [0.5] in f").unwrap_err();
    assert!(matches!(err, ProgramError::Type(_)), "{err}");
    let err = Program::parse("let f l = match flip l with | H -> () | T -> () in let g u = f [] in g").unwrap_err();
    assert!(matches!(err, ProgramError::Type(_)), "{err}");
}

#[test]
fn base_types_of_corpus_entries() {
    let b = corpus::get("bernoulli").unwrap().program();
    assert_eq!(b.arg_types.iter().map(|t| t.to_string()).collect::<Vec<_>>(), ["L(unit)"]);
    assert_eq!(b.ret_type.to_string(), "bool");
    let isort = corpus::get("isort").unwrap().program();
    assert_eq!(isort.arg_types[0].to_string(), "L(int)");
}

/// The rendered outcome of every corpus entry when one rule class is dropped.
fn outcomes(drop: Option<&str>) -> Vec<(String, Option<infer::Analysis>)> {
    let opts = Options {
        objective: ObjectiveMode::Staged,
        drop_class: drop.map(String::from),
    };
    ENTRIES
        .iter()
        .map(|e| {
            let a = infer::analyze_with(&e.program(), &opts).ok().and_then(|o| o.bound().cloned());
            let text = a.as_ref().map_or_else(|| corpus::NO_BOUND.to_string(), |a| a.bound.to_string());
            (text, a)
        })
        .collect()
}

fn violates_soundness(entry: &corpus::Entry, a: &infer::Analysis) -> bool {
    let program = entry.program();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a9);
    for _ in 0..5 {
        let args = corpus::random_inputs(&program, 4, &mut rng);
        let Ok(b) = bound::evaluate(&a.bound, &args) else { return true };
        let (env, body) = program.call(&args).unwrap();
        for depth in 0..=12 {
            let mu = interp_dist::eval_partial_dist(&env, &body, depth).unwrap();
            match interp_dist::expected_h(&mu, &a.result) {
                Ok(Some(h)) if h <= b => {}
                _ => return true,
            }
        }
    }
    false
}

#[test]
fn dropping_a_rule_class_changes_the_results() {
    let baseline = outcomes(None);
    let mut unsound = Vec::new();
    let mut unchanged = Vec::new();
    for class in RULES {
        let mutated = outcomes(Some(class));
        let changed: Vec<usize> = (0..ENTRIES.len()).filter(|&i| mutated[i].0 != baseline[i].0).collect();
        if changed.is_empty() {
            unchanged.push(*class);
        }
        let killed = changed
            .iter()
            .any(|&i| mutated[i].1.as_ref().is_some_and(|a| violates_soundness(&ENTRIES[i], a)));
        if killed {
            unsound.push(*class);
        }
    }
    // Neither rule produces potential, so the corpus never depends on them.
    assert_eq!(unchanged, ["L:Nil", "L:Const"]);
    assert_eq!(
        unsound,
        [
            "L:Var", "L:Unit", "L:Tick", "L:Cons", "L:Consume", "L:MatL", "L:Fun", "L:App", "L:Let", "L:Share",
            "L:Flip", "L:FlipS", "L:Sub"
        ]
    );
}
