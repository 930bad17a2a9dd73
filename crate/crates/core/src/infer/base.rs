//! Monomorphic base-type inference by unification.

use std::collections::HashMap;
use std::fmt;

use crate::syntax::{CmpOp, CoreExpr, Kind, Name, NodeId, Span, TypeLit};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BaseTy {
    Unit,
    Int,
    Bool,
    Prob,
    List(Box<BaseTy>),
    Arrow(Vec<BaseTy>, Box<BaseTy>),
    Var(usize),
}

impl BaseTy {
    pub fn list(t: BaseTy) -> BaseTy {
        BaseTy::List(Box::new(t))
    }

    pub fn from_literal(t: &TypeLit) -> BaseTy {
        match t {
            TypeLit::Unit => BaseTy::Unit,
            TypeLit::Int => BaseTy::Int,
            TypeLit::Bool => BaseTy::Bool,
            TypeLit::Prob { .. } => BaseTy::Prob,
            TypeLit::List { elem, .. } => BaseTy::list(BaseTy::from_literal(elem)),
        }
    }
}

impl fmt::Display for BaseTy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseTy::Unit => write!(f, "unit"),
            BaseTy::Int => write!(f, "int"),
            BaseTy::Bool => write!(f, "bool"),
            BaseTy::Prob => write!(f, "prob"),
            BaseTy::List(t) => write!(f, "L({t})"),
            BaseTy::Arrow(args, r) => {
                write!(f, "(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, " -> {r})")
            }
            BaseTy::Var(v) => write!(f, "'a{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: type error: {message}")]
pub struct TypeError {
    pub message: String,
    pub span: Span,
}

/// Result type of every node. Type variables left unconstrained are
/// defaulted to int when compared and to unit otherwise.
#[derive(Clone, Debug, Default)]
pub struct BaseTypes {
    nodes: HashMap<NodeId, BaseTy>,
}

impl BaseTypes {
    pub fn of(&self, id: NodeId) -> &BaseTy {
        &self.nodes[&id]
    }
}

struct Unifier {
    subst: Vec<Option<BaseTy>>,
    nodes: HashMap<NodeId, BaseTy>,
    scope: Vec<(Name, BaseTy)>,
    /// Comparison operand types; those left unconstrained become int.
    compared: Vec<BaseTy>,
}

impl Unifier {
    fn fresh(&mut self) -> BaseTy {
        self.subst.push(None);
        BaseTy::Var(self.subst.len() - 1)
    }

    fn shallow(&self, t: &BaseTy) -> BaseTy {
        let mut t = t.clone();
        while let BaseTy::Var(v) = t {
            match &self.subst[v] {
                Some(u) => t = u.clone(),
                None => break,
            }
        }
        t
    }

    fn resolve(&self, t: &BaseTy) -> BaseTy {
        match self.shallow(t) {
            BaseTy::List(e) => BaseTy::list(self.resolve(&e)),
            BaseTy::Arrow(a, r) => BaseTy::Arrow(a.iter().map(|x| self.resolve(x)).collect(), Box::new(self.resolve(&r))),
            BaseTy::Var(_) => BaseTy::Unit,
            other => other,
        }
    }

    fn occurs(&self, v: usize, t: &BaseTy) -> bool {
        match self.shallow(t) {
            BaseTy::Var(u) => u == v,
            BaseTy::List(e) => self.occurs(v, &e),
            BaseTy::Arrow(a, r) => a.iter().any(|x| self.occurs(v, x)) || self.occurs(v, &r),
            _ => false,
        }
    }

    fn unify(&mut self, a: &BaseTy, b: &BaseTy, span: Span) -> Result<(), TypeError> {
        let (a, b) = (self.shallow(a), self.shallow(b));
        let fail = |me: &Self| TypeError {
            message: format!("cannot match {} with {}", me.resolve_display(&a), me.resolve_display(&b)),
            span,
        };
        match (&a, &b) {
            (BaseTy::Var(x), BaseTy::Var(y)) if x == y => Ok(()),
            (BaseTy::Var(x), t) | (t, BaseTy::Var(x)) => {
                if self.occurs(*x, t) {
                    return Err(fail(self));
                }
                self.subst[*x] = Some(t.clone());
                Ok(())
            }
            (BaseTy::List(x), BaseTy::List(y)) => self.unify(x, y, span),
            (BaseTy::Arrow(xa, xr), BaseTy::Arrow(ya, yr)) => {
                if xa.len() != ya.len() {
                    return Err(fail(self));
                }
                for (x, y) in xa.iter().zip(ya) {
                    self.unify(x, y, span)?;
                }
                self.unify(xr, yr, span)
            }
            _ if a == b => Ok(()),
            _ => Err(fail(self)),
        }
    }

    /// Like `resolve` but keeps unconstrained variables.
    fn resolve_generic(&self, t: &BaseTy) -> BaseTy {
        match self.shallow(t) {
            BaseTy::List(e) => BaseTy::list(self.resolve_generic(&e)),
            BaseTy::Arrow(a, r) => {
                BaseTy::Arrow(a.iter().map(|x| self.resolve_generic(x)).collect(), Box::new(self.resolve_generic(&r)))
            }
            other => other,
        }
    }

    fn resolve_display(&self, t: &BaseTy) -> String {
        self.resolve_generic(t).to_string()
    }

    fn lookup(&self, x: &Name, span: Span) -> Result<BaseTy, TypeError> {
        self.scope
            .iter()
            .rev()
            .find(|(n, _)| n == x)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| TypeError {
                message: format!("unbound variable `{x}`"),
                span,
            })
    }

    fn with<T>(&mut self, binds: Vec<(Name, BaseTy)>, f: impl FnOnce(&mut Self) -> T) -> T {
        let n = self.scope.len();
        self.scope.extend(binds);
        let out = f(self);
        self.scope.truncate(n);
        out
    }

    fn infer(&mut self, e: &CoreExpr) -> Result<BaseTy, TypeError> {
        let sp = e.span;
        let t = match &e.kind {
            Kind::Var(x) => self.lookup(x, sp)?,
            Kind::Unit | Kind::Tick(_) => BaseTy::Unit,
            Kind::Nil => {
                let a = self.fresh();
                BaseTy::list(a)
            }
            Kind::Int(_) => BaseTy::Int,
            Kind::Bool(_) => BaseTy::Bool,
            Kind::Prob(_) => BaseTy::Prob,
            Kind::Cons(h, tl) => {
                let th = self.lookup(h, sp)?;
                let tt = self.lookup(tl, sp)?;
                self.unify(&tt, &BaseTy::list(th), sp)?;
                tt
            }
            Kind::MatchList {
                scrut,
                nil,
                head,
                tail,
                cons,
            } => {
                let elem = self.fresh();
                let ts = self.lookup(scrut, sp)?;
                self.unify(&ts, &BaseTy::list(elem.clone()), sp)
                    .map_err(|err| TypeError {
                        message: format!("match scrutinee is not a list: {}", err.message),
                        span: sp,
                    })?;
                let t0 = self.infer(nil)?;
                let t1 = self.with(
                    vec![(head.clone(), elem.clone()), (tail.clone(), BaseTy::list(elem))],
                    |u| u.infer(cons),
                )?;
                self.unify(&t0, &t1, sp)?;
                t0
            }
            Kind::Fun(fd) => {
                let params: Vec<BaseTy> = fd.params.iter().map(|_| self.fresh()).collect();
                let ret = self.fresh();
                let arrow = BaseTy::Arrow(params.clone(), Box::new(ret.clone()));
                let mut binds = vec![(fd.name.clone(), arrow.clone())];
                binds.extend(fd.params.iter().cloned().zip(params));
                let tb = self.with(binds, |u| u.infer(&fd.body))?;
                self.unify(&ret, &tb, sp)?;
                arrow
            }
            Kind::App { func, args } => {
                let tf = self.lookup(func, sp)?;
                let targs = args.iter().map(|a| self.lookup(a, sp)).collect::<Result<Vec<_>, _>>()?;
                let ret = self.fresh();
                self.unify(&tf, &BaseTy::Arrow(targs, Box::new(ret.clone())), sp)?;
                ret
            }
            Kind::Let { name, def, body } => {
                let t1 = self.infer(def)?;
                self.with(vec![(name.clone(), t1)], |u| u.infer(body))?
            }
            Kind::Share {
                src,
                left,
                right,
                body,
            } => {
                let t = self.lookup(src, sp)?;
                self.with(vec![(left.clone(), t.clone()), (right.clone(), t)], |u| u.infer(body))?
            }
            Kind::Flip { heads, tails, .. } => {
                let t1 = self.infer(heads)?;
                let t2 = self.infer(tails)?;
                self.unify(&t1, &t2, sp)?;
                t1
            }
            Kind::FlipSym { scrut, heads, tails } => {
                let ts = self.lookup(scrut, sp)?;
                self.unify(&ts, &BaseTy::Prob, sp).map_err(|_| TypeError {
                    message: format!("flip on `{scrut}`, which is not of prob type"),
                    span: sp,
                })?;
                let t1 = self.infer(heads)?;
                let t2 = self.infer(tails)?;
                self.unify(&t1, &t2, sp)?;
                t1
            }
            Kind::Consume { var, ty } => {
                let tv = self.lookup(var, sp)?;
                self.unify(&tv, &BaseTy::from_literal(ty), sp)?;
                BaseTy::Unit
            }
            Kind::Cmp { op, lhs, rhs } => {
                let a = self.lookup(lhs, sp)?;
                let b = self.lookup(rhs, sp)?;
                self.unify(&a, &b, sp)?;
                self.compared.push(a.clone());
                if *op != CmpOp::Eq {
                    let ta = self.shallow(&a);
                    if !matches!(ta, BaseTy::Int | BaseTy::Prob | BaseTy::Var(_)) {
                        return Err(TypeError {
                            message: format!("`{}` needs int or prob operands", op.symbol()),
                            span: sp,
                        });
                    }
                }
                BaseTy::Bool
            }
            Kind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let tc = self.lookup(cond, sp)?;
                self.unify(&tc, &BaseTy::Bool, sp)?;
                let t1 = self.infer(then_branch)?;
                let t2 = self.infer(else_branch)?;
                self.unify(&t1, &t2, sp)?;
                t1
            }
        };
        self.nodes.insert(e.id, t.clone());
        Ok(t)
    }
}

/// Infers base types for `e` given the types of its free variables.
pub fn infer_base_types(e: &CoreExpr, free: &[(Name, BaseTy)]) -> Result<(BaseTy, BaseTypes), TypeError> {
    infer_base_types_generic(e, free).map(|(_, t, types)| (t, types))
}

/// As [`infer_base_types`], but also returns the type of `e` with its
/// unconstrained type variables left in place.
pub fn infer_base_types_generic(
    e: &CoreExpr,
    free: &[(Name, BaseTy)],
) -> Result<(BaseTy, BaseTy, BaseTypes), TypeError> {
    let mut u = Unifier {
        subst: Vec::new(),
        nodes: HashMap::new(),
        scope: free.to_vec(),
        compared: Vec::new(),
    };
    let t = u.infer(e)?;
    for c in std::mem::take(&mut u.compared) {
        if let BaseTy::Var(_) = u.shallow(&c) {
            u.unify(&c, &BaseTy::Int, e.span)?;
        }
    }
    let nodes = u.nodes.iter().map(|(k, v)| (*k, u.resolve(v))).collect();
    Ok((u.resolve_generic(&t), u.resolve(&t), BaseTypes { nodes }))
}
