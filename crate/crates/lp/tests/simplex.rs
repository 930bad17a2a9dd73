#[path = "support/vertex_enum.rs"]
mod vertex_enum;

use num::{One, Zero};
use praml_lp::format::{read_lp, write_lp};
use praml_lp::{solve, solve_stages, Constraint, LinExpr, LinearProgram, Rat, Relation, Status, VarId};
use proptest::prelude::*;
use rand::SeedableRng;
use vertex_enum::{random_lp, vertex_enumeration, Oracle};

fn int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

fn frac(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

#[test]
fn minimize_single_lower_bound() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x");
    lp.add_constraint(Constraint::ge(x.into(), LinExpr::constant(int(3)), "x>=3"));
    lp.set_objective(x.into());
    let s = solve(&lp).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert_eq!(s.value(x), &int(3));
    assert_eq!(s.objective, int(3));
}

#[test]
fn contradictory_bounds_cite_both_rows() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x");
    lp.add_constraint(Constraint::ge(x.into(), LinExpr::constant(int(1)), "lower"));
    lp.add_constraint(Constraint::new(x.into(), Relation::Le, LinExpr::constant(int(0)), "upper"));
    lp.add_constraint(Constraint::ge(x.into(), LinExpr::zero(), "harmless"));
    let s = solve(&lp).unwrap();
    assert_eq!(s.status, Status::Infeasible);
    let mut tags = s.conflict_tags(&lp);
    tags.sort();
    assert_eq!(tags, vec!["lower", "upper"]);
}

#[test]
fn ground_row_violation_is_its_own_conflict() {
    let mut lp = LinearProgram::new();
    lp.add_var("x");
    lp.add_constraint(Constraint::ge(LinExpr::constant(int(1)), LinExpr::constant(int(2)), "1>=2"));
    let s = solve(&lp).unwrap();
    assert_eq!(s.status, Status::Infeasible);
    assert_eq!(s.conflict_tags(&lp), vec!["1>=2"]);
}

#[test]
fn unbounded_reports_descent_ray() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x");
    let y = lp.add_var("y");
    lp.add_constraint(Constraint::ge(LinExpr::var(x) - LinExpr::var(y), LinExpr::constant(int(1)), "r"));
    lp.set_objective(-LinExpr::var(x));
    let s = solve(&lp).unwrap();
    assert_eq!(s.status, Status::Unbounded);
    let obj_dir = lp.objective().eval(&s.ray);
    assert!(obj_dir < Rat::zero());
    // Moving along the ray keeps the row satisfied.
    let moved: Vec<Rat> = s.values.iter().zip(&s.ray).map(|(v, r)| v + r * int(100)).collect();
    assert!(lp.is_satisfied_by(&moved));
}

#[test]
fn bernoulli_shaped_system_has_unit_optimum() {
    // Constant slot q, per-element slot a, recursive-call budget:
    // q + a >= 1/2 (1 + q) with a weighted against q degree-first.
    let mut lp = LinearProgram::new();
    let q = lp.add_var("q");
    let a = lp.add_var("a");
    let lhs = LinExpr::var(q) + LinExpr::var(a);
    let rhs = (LinExpr::constant(int(1)) + LinExpr::var(q)).scale(&frac(1, 2));
    lp.add_constraint(Constraint::ge(lhs, rhs, "flip"));
    let (s, stages) = solve_stages(&lp, &[LinExpr::var(a), LinExpr::var(q)]).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert_eq!(stages, vec![Rat::zero(), Rat::one()]);
    assert_eq!(s.value(q), &int(1));
}

#[test]
fn stages_pin_earlier_objectives() {
    // min x+y then min x over x + y >= 2.
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x");
    let y = lp.add_var("y");
    lp.add_constraint(Constraint::ge(LinExpr::var(x) + LinExpr::var(y), LinExpr::constant(int(2)), "sum"));
    let (s, stages) = solve_stages(&lp, &[LinExpr::var(x) + LinExpr::var(y), LinExpr::var(x)]).unwrap();
    assert_eq!(stages, vec![int(2), int(0)]);
    assert_eq!(s.value(y), &int(2));
}

#[test]
fn degenerate_equalities_are_handled() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x");
    let y = lp.add_var("y");
    lp.add_constraint(Constraint::eq(LinExpr::var(x), LinExpr::var(y), "e1"));
    lp.add_constraint(Constraint::eq(LinExpr::var(y), LinExpr::var(x), "e2"));
    lp.add_constraint(Constraint::ge(LinExpr::var(x), LinExpr::constant(frac(3, 2)), "lb"));
    lp.set_objective(LinExpr::var(x) + LinExpr::var(y));
    let s = solve(&lp).unwrap();
    assert_eq!(s.objective, int(3));
    assert!(lp.is_satisfied_by(&s.values));
}

#[test]
fn dump_round_trips() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let lp = random_lp(&mut rng);
        let text = write_lp(&lp);
        let back = read_lp(&text).unwrap();
        assert_eq!(back, lp, "{text}");
    }
}

#[test]
fn dump_has_exact_fractions() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("q \"in\"");
    lp.add_constraint(Constraint::ge(LinExpr::term(x, frac(3, 4)), LinExpr::constant(frac(-1, 3)), "L:Flip @1:2"));
    lp.set_objective(x.into());
    let text = write_lp(&lp);
    assert!(text.contains("+ 3/4 x0 >= -1/3"), "{text}");
    assert_eq!(read_lp(&text).unwrap(), lp);
}

#[test]
fn iis_is_irreducible_on_random_infeasible_systems() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut seen = 0;
    for _ in 0..400 {
        let lp = random_lp(&mut rng);
        let s = solve(&lp).unwrap();
        if s.status != Status::Infeasible {
            continue;
        }
        seen += 1;
        let keep: Vec<usize> = s.conflict.clone();
        let sub = restrict(&lp, &keep);
        assert!(!praml_lp::is_feasible(&sub).unwrap());
        for drop in 0..keep.len() {
            let mut fewer = keep.clone();
            fewer.remove(drop);
            assert!(praml_lp::is_feasible(&restrict(&lp, &fewer)).unwrap());
        }
    }
    assert!(seen > 10, "too few infeasible samples: {seen}");
}

fn restrict(lp: &LinearProgram, rows: &[usize]) -> LinearProgram {
    let mut out = LinearProgram::new();
    for n in lp.names() {
        out.add_var(n.clone());
    }
    for &i in rows {
        out.add_constraint(lp.constraints()[i].clone());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_matches_vertex_enumeration(seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let lp = random_lp(&mut rng);
        let s = solve(&lp).unwrap();
        match vertex_enumeration(&lp) {
            Oracle::Infeasible => prop_assert_eq!(s.status, Status::Infeasible),
            Oracle::Optimal(v) => {
                prop_assert_eq!(s.status, Status::Optimal);
                prop_assert_eq!(&s.objective, &v);
                prop_assert!(lp.is_satisfied_by(&s.values));
            }
        }
    }

    #[test]
    fn optimal_points_satisfy_rows_exactly(seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let lp = random_lp(&mut rng);
        let s = solve(&lp).unwrap();
        if s.status == Status::Optimal {
            prop_assert!(lp.is_satisfied_by(&s.values));
            prop_assert_eq!(lp.objective().eval(&s.values), s.objective);
        }
    }
}

#[test]
fn variable_names_survive() {
    let mut lp = LinearProgram::new();
    let v = lp.add_var("arg.per");
    assert_eq!(lp.name(v), "arg.per");
    assert_eq!(VarId(0), v);
}
