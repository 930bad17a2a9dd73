use std::collections::BTreeMap;
use std::rc::Rc;

use proptest::prelude::*;

use praml_core::potential::{
    phi, phi_env, scale_type, share_type, share_with_witness, subtype_constraints, zero_type, AnnType, Anno, ArrowType,
};
use praml_core::rat::{self, frac, Rat};
use praml_core::value::Value;
use praml_lp::{self as lp, LinExpr, LinearProgram, Status};

fn arb_rat() -> impl Strategy<Value = Rat> {
    (0i64..12, 1i64..5).prop_map(|(n, d)| frac(n, d))
}

fn arb_prob() -> impl Strategy<Value = Rat> {
    (0i64..=6).prop_map(|k| frac(k, 6))
}

fn arb_type() -> impl Strategy<Value = AnnType> {
    let leaf = prop_oneof![
        Just(AnnType::Unit),
        Just(AnnType::Int),
        Just(AnnType::Bool),
        (arb_rat(), arb_rat()).prop_map(|(h, t)| AnnType::prob(h, t)),
    ];
    leaf.prop_recursive(3, 8, 1, |inner| (inner, arb_rat()).prop_map(|(e, q)| AnnType::list(e, q)))
}

fn arb_value(t: &AnnType) -> BoxedStrategy<Value> {
    match t {
        AnnType::Unit => Just(Value::Unit).boxed(),
        AnnType::Int => (-9i64..9).prop_map(Value::Int).boxed(),
        AnnType::Bool => any::<bool>().prop_map(Value::Bool).boxed(),
        AnnType::Prob { .. } => arb_prob().prop_map(Value::Prob).boxed(),
        AnnType::List { elem, .. } => prop::collection::vec(arb_value(elem), 0..5).prop_map(Value::list).boxed(),
        AnnType::Arrow(_) => unreachable!(),
    }
}

fn typed_value() -> impl Strategy<Value = (AnnType, Value)> {
    arb_type().prop_flat_map(|t| {
        let v = arb_value(&t);
        (Just(t), v)
    })
}

/// `t` with every annotation multiplied by its own factor from `fs`.
fn scaled_each(t: &AnnType, fs: &[Rat]) -> AnnType {
    let mut i = 0;
    t.map_annos(&mut |a| {
        let f = fs[i % fs.len()].clone();
        i += 1;
        Anno::Const(a.concrete().unwrap() * f)
    })
}

fn constraints_hold(cs: &[lp::Constraint]) -> bool {
    cs.iter().all(|c| c.is_satisfied(&[]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn sharing_splits_potential((t, v) in typed_value(), fs in prop::collection::vec(arb_prob(), 1..6)) {
        let left = scaled_each(&t, &fs);
        let right = share_with_witness(&t, &left).unwrap();
        prop_assert_eq!(phi(&v, &t).unwrap(), phi(&v, &left).unwrap() + phi(&v, &right).unwrap());
    }

    #[test]
    fn symbolic_sharing_splits_potential((t, v) in typed_value(), weights in prop::collection::vec(0i64..4, 8)) {
        let mut lp = LinearProgram::new();
        let (l, r, cs) = share_type(&t, &mut lp, "share");
        prop_assert_eq!(cs.len(), t.annos().len());
        for c in cs {
            lp.add_constraint(c);
        }
        let objective = l
            .annos()
            .into_iter()
            .chain(r.annos())
            .zip(weights.iter().cycle())
            .fold(LinExpr::zero(), |acc, (a, w)| acc + a.expr().scale(&rat::int(*w)));
        lp.set_objective(objective);
        let sol = lp::solve(&lp).unwrap();
        prop_assert_eq!(sol.status, Status::Optimal);
        let (l, r) = (l.resolve(&sol.values), r.resolve(&sol.values));
        prop_assert_eq!(phi(&v, &t).unwrap(), phi(&v, &l).unwrap() + phi(&v, &r).unwrap());
    }

    #[test]
    fn scaling_scales_potential((t, v) in typed_value(), p in arb_prob()) {
        let scaled = scale_type(&p, &t).unwrap();
        prop_assert_eq!(phi(&v, &scaled).unwrap(), &p * phi(&v, &t).unwrap());
    }

    #[test]
    fn subtypes_carry_more_potential((t, v) in typed_value(), fs in prop::collection::vec(arb_prob(), 1..6)) {
        let smaller = scaled_each(&t, &fs);
        let cs = subtype_constraints(&t, &smaller, "sub").unwrap();
        prop_assert!(constraints_hold(&cs));
        prop_assert!(phi(&v, &smaller).unwrap() <= phi(&v, &t).unwrap());
    }

    #[test]
    fn satisfied_subtyping_is_monotone((t, v) in typed_value(), fs in prop::collection::vec(0i64..4, 1..6)) {
        let other = scaled_each(&t, &fs.iter().map(|k| frac(*k, 2)).collect::<Vec<_>>());
        let cs = subtype_constraints(&t, &other, "sub").unwrap();
        if constraints_hold(&cs) {
            prop_assert!(phi(&v, &other).unwrap() <= phi(&v, &t).unwrap());
        }
    }

    #[test]
    fn zeroing_removes_potential((t, v) in typed_value()) {
        prop_assert_eq!(phi(&v, &zero_type(&t)).unwrap(), rat::zero());
    }
}

#[test]
fn phi_examples() {
    let l = Value::unit_list(3);
    assert_eq!(phi(&l, &AnnType::list(AnnType::Unit, rat::int(2))).unwrap(), rat::int(6));
    assert_eq!(phi(&Value::Prob(frac(3, 10)), &AnnType::prob(rat::int(10), rat::zero())).unwrap(), rat::int(3));

    let ps = [frac(1, 5), frac(1, 2), frac(9, 10)];
    let v = Value::list(ps.iter().cloned().map(Value::Prob));
    let t = AnnType::list(AnnType::prob(rat::int(5), rat::zero()), rat::one());
    let expected = rat::int(3) + ps.iter().map(|p| rat::int(5) * p).sum::<Rat>();
    assert_eq!(phi(&v, &t).unwrap(), expected);

    assert!(phi(&Value::Unit, &t).is_err());
}

#[test]
fn sharing_examples() {
    let mut lp = LinearProgram::new();
    let (l, r, cs) = share_type(&AnnType::Unit, &mut lp, "s");
    assert_eq!((l, r), (AnnType::Unit, AnnType::Unit));
    assert!(cs.is_empty());

    let right = share_with_witness(&AnnType::prob(rat::int(4), rat::int(2)), &AnnType::prob(rat::one(), rat::one())).unwrap();
    assert_eq!(right, AnnType::prob(rat::int(3), rat::one()));

    let arrow = AnnType::Arrow(Rc::new(ArrowType {
        args: vec![AnnType::list(AnnType::Unit, rat::int(2))],
        arg_q: Anno::zero(),
        ret: AnnType::Unit,
        ret_q: Anno::zero(),
    }));
    let (l, r, cs) = share_type(&arrow, &mut lp, "s");
    assert_eq!(l, arrow);
    assert_eq!(r, arrow);
    assert!(cs.is_empty());
    assert_eq!(zero_type(&arrow), arrow);
}

#[test]
fn scaling_and_zeroing_examples() {
    let t = AnnType::prob(rat::int(4), rat::int(2));
    assert_eq!(scale_type(&rat::one(), &t).unwrap(), t);
    assert_eq!(scale_type(&frac(1, 2), &t).unwrap(), AnnType::prob(rat::int(2), rat::one()));
    let l = AnnType::list(AnnType::Unit, rat::int(2));
    assert_eq!(scale_type(&frac(3, 4), &l).unwrap(), AnnType::list(AnnType::Unit, frac(3, 2)));
    assert_eq!(zero_type(&l), AnnType::list(AnnType::Unit, rat::zero()));
    assert_eq!(zero_type(&t), AnnType::prob(rat::zero(), rat::zero()));
}

#[test]
fn subtyping_examples() {
    let l3 = AnnType::list(AnnType::Unit, rat::int(3));
    let l1 = AnnType::list(AnnType::Unit, rat::one());
    assert!(constraints_hold(&subtype_constraints(&l3, &l1, "s").unwrap()));
    assert!(!constraints_hold(&subtype_constraints(&l1, &l3, "s").unwrap()));
    let a = AnnType::prob(rat::one(), rat::one());
    let b = AnnType::prob(rat::int(2), rat::zero());
    assert!(!constraints_hold(&subtype_constraints(&a, &b, "s").unwrap()));
    assert!(subtype_constraints(&l3, &l3, "s").unwrap().is_empty());
    assert!(subtype_constraints(&l3, &AnnType::Unit, "s").is_err());
}

#[test]
fn phi_env_examples() {
    let env: BTreeMap<_, _> = [(Rc::from("l"), Value::unit_list(2)), (Rc::from("p"), Value::Prob(frac(1, 2)))].into();
    let mut ctx = BTreeMap::new();
    assert_eq!(phi_env(&env, &ctx).unwrap(), rat::zero());
    ctx.insert(Rc::from("l"), AnnType::list(AnnType::Unit, rat::int(3)));
    assert_eq!(phi_env(&env, &ctx).unwrap(), rat::int(6));
    ctx.insert(Rc::from("p"), AnnType::prob(rat::int(4), rat::zero()));
    assert_eq!(phi_env(&env, &ctx).unwrap(), rat::int(8));
    ctx.insert(Rc::from("q"), AnnType::Unit);
    assert!(phi_env(&env, &ctx).is_err());
}
