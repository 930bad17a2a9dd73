//! Annotated types and the potential algebra: Φ, sharing, scaling, zeroing
//! and subtyping.

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use praml_lp::{Constraint, LinExpr, LinearProgram, Relation, VarId};

use crate::rat::{self, Rat};
use crate::syntax::{Name, TypeLit};
use crate::value::Value;

/// An annotation slot: a concrete rational or an LP variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Anno {
    Const(Rat),
    Var(VarId),
}

impl Anno {
    pub fn zero() -> Anno {
        Anno::Const(rat::zero())
    }

    pub fn expr(&self) -> LinExpr {
        match self {
            Anno::Const(c) => LinExpr::constant(c.clone()),
            Anno::Var(v) => LinExpr::var(*v),
        }
    }

    pub fn as_const(&self) -> Option<&Rat> {
        match self {
            Anno::Const(c) => Some(c),
            Anno::Var(_) => None,
        }
    }

    pub fn concrete(&self) -> Result<&Rat, PotentialError> {
        self.as_const().ok_or(PotentialError::Symbolic)
    }

    pub fn resolve(&self, values: &[Rat]) -> Anno {
        match self {
            Anno::Const(_) => self.clone(),
            Anno::Var(v) => Anno::Const(values[v.0].clone()),
        }
    }
}

impl From<Rat> for Anno {
    fn from(r: Rat) -> Self {
        Anno::Const(r)
    }
}

impl fmt::Display for Anno {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anno::Const(c) => write!(f, "{}", rat::render(c)),
            Anno::Var(v) => write!(f, "x{}", v.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnnType {
    Unit,
    Int,
    Bool,
    Prob { heads: Anno, tails: Anno },
    List { elem: Box<AnnType>, per: Anno },
    Arrow(Rc<ArrowType>),
}

/// `<τ1 .. τn, q> -> <τ, q'>`. Arrows are shared by reference: every copy
/// of a function type points at the same annotations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowType {
    pub args: Vec<AnnType>,
    pub arg_q: Anno,
    pub ret: AnnType,
    pub ret_q: Anno,
}

/// A potential-annotated pair `<τ, q>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pot {
    pub ty: AnnType,
    pub q: Anno,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PotentialError {
    #[error("value `{value}` does not have type {ty}")]
    Mismatch { value: String, ty: String },
    #[error("type skeletons differ: {0} vs {1}")]
    Skeleton(String, String),
    #[error("annotation is not concrete")]
    Symbolic,
    #[error("negative annotation in split")]
    Negative,
    #[error("unbound variable `{0}` in environment")]
    Unbound(String),
}

/// Source of fresh annotation variables.
pub trait AnnoSource {
    fn fresh(&mut self, hint: &str) -> Anno;
}

impl AnnoSource for LinearProgram {
    fn fresh(&mut self, hint: &str) -> Anno {
        Anno::Var(self.add_var(hint))
    }
}

impl AnnType {
    pub fn list(elem: AnnType, per: impl Into<Anno>) -> AnnType {
        AnnType::List {
            elem: Box::new(elem),
            per: per.into(),
        }
    }

    pub fn prob(heads: impl Into<Anno>, tails: impl Into<Anno>) -> AnnType {
        AnnType::Prob {
            heads: heads.into(),
            tails: tails.into(),
        }
    }

    pub fn from_literal(t: &TypeLit) -> AnnType {
        match t {
            TypeLit::Unit => AnnType::Unit,
            TypeLit::Int => AnnType::Int,
            TypeLit::Bool => AnnType::Bool,
            TypeLit::Prob { heads, tails } => AnnType::prob(heads.clone(), tails.clone()),
            TypeLit::List { elem, per } => AnnType::list(AnnType::from_literal(elem), per.clone()),
        }
    }

    /// Annotations in pre-order, arrows excluded.
    pub fn annos(&self) -> Vec<&Anno> {
        let mut out = Vec::new();
        self.collect_annos(&mut out);
        out
    }

    fn collect_annos<'a>(&'a self, out: &mut Vec<&'a Anno>) {
        match self {
            AnnType::Prob { heads, tails } => {
                out.push(heads);
                out.push(tails);
            }
            AnnType::List { elem, per } => {
                out.push(per);
                elem.collect_annos(out);
            }
            _ => {}
        }
    }

    pub fn map_annos(&self, f: &mut impl FnMut(&Anno) -> Anno) -> AnnType {
        match self {
            AnnType::Prob { heads, tails } => AnnType::Prob {
                heads: f(heads),
                tails: f(tails),
            },
            AnnType::List { elem, per } => AnnType::List {
                per: f(per),
                elem: Box::new(elem.map_annos(f)),
            },
            other => other.clone(),
        }
    }

    /// Substitutes an LP assignment into every slot, including arrows.
    pub fn resolve(&self, values: &[Rat]) -> AnnType {
        match self {
            AnnType::Arrow(a) => AnnType::Arrow(Rc::new(ArrowType {
                args: a.args.iter().map(|t| t.resolve(values)).collect(),
                arg_q: a.arg_q.resolve(values),
                ret: a.ret.resolve(values),
                ret_q: a.ret_q.resolve(values),
            })),
            other => other.map_annos(&mut |a| a.resolve(values)),
        }
    }

    pub fn is_concrete(&self) -> bool {
        match self {
            AnnType::Arrow(a) => {
                a.args.iter().all(AnnType::is_concrete)
                    && a.arg_q.as_const().is_some()
                    && a.ret.is_concrete()
                    && a.ret_q.as_const().is_some()
            }
            other => other.annos().iter().all(|a| a.as_const().is_some()),
        }
    }

    fn same_skeleton(&self, other: &AnnType) -> bool {
        match (self, other) {
            (AnnType::Unit, AnnType::Unit)
            | (AnnType::Int, AnnType::Int)
            | (AnnType::Bool, AnnType::Bool)
            | (AnnType::Prob { .. }, AnnType::Prob { .. }) => true,
            (AnnType::List { elem: a, .. }, AnnType::List { elem: b, .. }) => a.same_skeleton(b),
            (AnnType::Arrow(a), AnnType::Arrow(b)) => {
                a.args.len() == b.args.len()
                    && a.args.iter().zip(&b.args).all(|(x, y)| x.same_skeleton(y))
                    && a.ret.same_skeleton(&b.ret)
            }
            _ => false,
        }
    }
}

impl fmt::Display for AnnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnnType::Unit => write!(f, "unit"),
            AnnType::Int => write!(f, "int"),
            AnnType::Bool => write!(f, "bool"),
            AnnType::Prob { heads, tails } => write!(f, "prob{{{heads}}}{{{tails}}}"),
            AnnType::List { elem, per } => write!(f, "L^{per}({elem})"),
            AnnType::Arrow(a) => write!(f, "({a})"),
        }
    }
}

impl fmt::Display for ArrowType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ", {}> -> <{}, {}>", self.arg_q, self.ret, self.ret_q)
    }
}

impl fmt::Display for Pot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.ty, self.q)
    }
}

fn mismatch(v: &Value, t: &AnnType) -> PotentialError {
    PotentialError::Mismatch {
        value: v.to_string(),
        ty: t.to_string(),
    }
}

/// Structural value typing. Closures are accepted against arrows of the
/// same arity.
pub fn check_value(v: &Value, t: &AnnType) -> Result<(), PotentialError> {
    match (v, t) {
        (Value::Unit, AnnType::Unit) | (Value::Int(_), AnnType::Int) | (Value::Bool(_), AnnType::Bool) => Ok(()),
        (Value::Prob(p), AnnType::Prob { .. }) if rat::is_probability(p) => Ok(()),
        (Value::Nil, AnnType::List { .. }) => Ok(()),
        (Value::Cons(h, tl), AnnType::List { elem, .. }) => {
            check_value(h, elem)?;
            check_value(tl, t)
        }
        (Value::Closure(c), AnnType::Arrow(a)) if c.fun.params.len() == a.args.len() => Ok(()),
        _ => Err(mismatch(v, t)),
    }
}

/// Φ(v : τ) for a concrete type.
pub fn phi(v: &Value, t: &AnnType) -> Result<Rat, PotentialError> {
    match (v, t) {
        (Value::Prob(p), AnnType::Prob { heads, tails }) if rat::is_probability(p) => {
            Ok(heads.concrete()? * p + tails.concrete()? * (rat::one() - p))
        }
        (Value::Nil, AnnType::List { .. }) => Ok(rat::zero()),
        (Value::Cons(..), AnnType::List { elem, per }) => {
            let per = per.concrete()?;
            let mut total = rat::zero();
            let mut cur = v;
            loop {
                match cur {
                    Value::Nil => return Ok(total),
                    Value::Cons(h, tl) => {
                        total += per + phi(h, elem)?;
                        cur = tl;
                    }
                    _ => return Err(mismatch(v, t)),
                }
            }
        }
        _ => check_value(v, t).map(|_| rat::zero()),
    }
}

/// Φ(v : <τ, q>) = Φ(v : τ) + q.
pub fn phi_pot(v: &Value, a: &Pot) -> Result<Rat, PotentialError> {
    Ok(phi(v, &a.ty)? + a.q.concrete()?)
}

/// Φ(V : Γ), summing over the context's domain.
pub fn phi_env(env: &BTreeMap<Name, Value>, ctx: &BTreeMap<Name, AnnType>) -> Result<Rat, PotentialError> {
    let mut total = rat::zero();
    for (x, t) in ctx {
        let v = env.get(x).ok_or_else(|| PotentialError::Unbound(x.to_string()))?;
        total += phi(v, t)?;
    }
    Ok(total)
}

/// Splits `t` into two fresh copies whose annotations add up to `t`'s.
/// Arrows are duplicated unchanged.
pub fn share_type(t: &AnnType, src: &mut dyn AnnoSource, tag: &str) -> (AnnType, AnnType, Vec<Constraint>) {
    let mut constraints = Vec::new();
    let mut right_annos = Vec::new();
    let left = t.map_annos(&mut |a| {
        let l = src.fresh("share");
        let r = src.fresh("share");
        constraints.push(Constraint::eq(a.expr(), l.expr() + r.expr(), tag));
        right_annos.push(r);
        l
    });
    let mut it = right_annos.into_iter();
    let right = t.map_annos(&mut |_| it.next().expect("same shape"));
    (left, right, constraints)
}

/// The complement of a concrete sharing witness: `t - left`.
pub fn share_with_witness(t: &AnnType, left: &AnnType) -> Result<AnnType, PotentialError> {
    if !t.same_skeleton(left) {
        return Err(PotentialError::Skeleton(t.to_string(), left.to_string()));
    }
    let lefts: Vec<Rat> = left
        .annos()
        .into_iter()
        .map(|a| a.concrete().cloned())
        .collect::<Result<_, _>>()?;
    let mut it = lefts.into_iter();
    let mut err = None;
    let right = t.map_annos(&mut |a| {
        let l = it.next().expect("same shape");
        match a.concrete() {
            Ok(c) if *c >= l => Anno::Const(c - l),
            Ok(_) => {
                err = Some(PotentialError::Negative);
                Anno::zero()
            }
            Err(e) => {
                err = Some(e);
                Anno::zero()
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(right),
    }
}

/// p × τ for concrete annotations.
pub fn scale_type(p: &Rat, t: &AnnType) -> Result<AnnType, PotentialError> {
    let mut err = None;
    let out = t.map_annos(&mut |a| match a.concrete() {
        Ok(c) => Anno::Const(p * c),
        Err(e) => {
            err = Some(e);
            a.clone()
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Replaces every annotation by 0; arrows are unchanged.
pub fn zero_type(t: &AnnType) -> AnnType {
    t.map_annos(&mut |_| Anno::zero())
}

/// Constraints for `sub <: sup`: potentials of the subtype dominate, and
/// arrows are contravariant in their arguments.
pub fn subtype_constraints(sub: &AnnType, sup: &AnnType, tag: &str) -> Result<Vec<Constraint>, PotentialError> {
    let mut out = Vec::new();
    subtype_into(sub, sup, tag, &mut out)?;
    Ok(out)
}

fn ge(out: &mut Vec<Constraint>, big: &Anno, small: &Anno, tag: &str) {
    if big != small {
        out.push(Constraint::new(big.expr(), Relation::Ge, small.expr(), tag));
    }
}

fn subtype_into(sub: &AnnType, sup: &AnnType, tag: &str, out: &mut Vec<Constraint>) -> Result<(), PotentialError> {
    match (sub, sup) {
        (AnnType::Unit, AnnType::Unit) | (AnnType::Int, AnnType::Int) | (AnnType::Bool, AnnType::Bool) => Ok(()),
        (AnnType::Prob { heads: h1, tails: t1 }, AnnType::Prob { heads: h2, tails: t2 }) => {
            ge(out, h1, h2, tag);
            ge(out, t1, t2, tag);
            Ok(())
        }
        (AnnType::List { elem: e1, per: p1 }, AnnType::List { elem: e2, per: p2 }) => {
            ge(out, p1, p2, tag);
            subtype_into(e1, e2, tag, out)
        }
        (AnnType::Arrow(a), AnnType::Arrow(b)) => {
            if Rc::ptr_eq(a, b) {
                return Ok(());
            }
            if a.args.len() != b.args.len() {
                return Err(PotentialError::Skeleton(sub.to_string(), sup.to_string()));
            }
            for (x, y) in a.args.iter().zip(&b.args) {
                subtype_into(y, x, tag, out)?;
            }
            ge(out, &b.arg_q, &a.arg_q, tag);
            subtype_into(&a.ret, &b.ret, tag, out)?;
            ge(out, &a.ret_q, &b.ret_q, tag);
            Ok(())
        }
        _ => Err(PotentialError::Skeleton(sub.to_string(), sup.to_string())),
    }
}

/// Equality constraints between two types of the same skeleton.
pub fn equal_constraints(a: &AnnType, b: &AnnType, tag: &str) -> Result<Vec<Constraint>, PotentialError> {
    let mut out = subtype_constraints(a, b, tag)?;
    out.extend(subtype_constraints(b, a, tag)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    #[test]
    fn phi_examples() {
        let p = Value::Prob(frac(3, 10));
        assert_eq!(phi(&p, &AnnType::prob(int(10), int(0))).unwrap(), int(3));
        let l = Value::unit_list(3);
        assert_eq!(phi(&l, &AnnType::list(AnnType::Unit, int(2))).unwrap(), int(6));
    }

    #[test]
    fn share_witness_example() {
        let t = AnnType::prob(int(4), int(2));
        let right = share_with_witness(&t, &AnnType::prob(int(1), int(1))).unwrap();
        assert_eq!(right, AnnType::prob(int(3), int(1)));
    }

    #[test]
    fn scale_examples() {
        assert_eq!(
            scale_type(&frac(1, 2), &AnnType::prob(int(4), int(2))).unwrap(),
            AnnType::prob(int(2), int(1))
        );
        assert_eq!(
            scale_type(&frac(3, 4), &AnnType::list(AnnType::Unit, int(2))).unwrap(),
            AnnType::list(AnnType::Unit, frac(3, 2))
        );
    }
}
