//! Constraint generation for the annotated type system.

use std::collections::BTreeMap;
use std::rc::Rc;

use praml_lp::{Constraint, LinExpr, LinearProgram, Relation};

use super::base::{BaseTy, BaseTypes};
use crate::potential::{self, Anno, AnnType, AnnoSource, ArrowType, Pot};
use crate::rat::{self, Rat};
use crate::syntax::{CoreExpr, Kind, Name, Span};

/// Rule names used as constraint provenance. Relaxation at branch joins is
/// tagged with the branching rule it serves.
pub const RULES: &[&str] = &[
    "L:Var", "L:Unit", "L:Nil", "L:Const", "L:Tick", "L:Prob", "L:Cons", "L:Consume", "L:Cmp", "L:MatL", "L:If",
    "L:Fun", "L:App", "L:Let", "L:Share", "L:Flip", "L:FlipS", "L:Sub",
];

/// The class of a provenance tag, e.g. `L:Tick` for `L:Tick @3:5`.
pub fn tag_class(tag: &str) -> &str {
    tag.split(" @").next().unwrap_or(tag)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct GenError {
    pub message: String,
    pub span: Span,
}

/// A typing judgment `Γ; q ⊢ e : <ty, out>` whose context is implicit.
#[derive(Clone, Debug)]
pub struct Judgment {
    pub q: Anno,
    pub ty: AnnType,
    pub out: Anno,
}

pub type Ctx = BTreeMap<Name, AnnType>;

pub struct Gen<'a> {
    pub lp: LinearProgram,
    types: &'a BaseTypes,
    /// Arrow templates of function nodes, in pre-order.
    pub arrows: Vec<Rc<ArrowType>>,
}

fn tag(rule: &str, span: Span) -> String {
    format!("{rule} @{span}")
}

impl<'a> Gen<'a> {
    pub fn new(types: &'a BaseTypes) -> Self {
        Gen {
            lp: LinearProgram::new(),
            types,
            arrows: Vec::new(),
        }
    }

    fn var(&mut self, hint: &str) -> Anno {
        self.lp.fresh(hint)
    }

    fn push(&mut self, c: Constraint) {
        self.lp.add_constraint(c);
    }

    fn ge(&mut self, lhs: LinExpr, rhs: LinExpr, rule: &str, span: Span) {
        self.push(Constraint::new(lhs, Relation::Ge, rhs, tag(rule, span)));
    }

    fn eq(&mut self, lhs: LinExpr, rhs: LinExpr, rule: &str, span: Span) {
        self.push(Constraint::new(lhs, Relation::Eq, rhs, tag(rule, span)));
    }

    fn sub(&mut self, sub: &AnnType, sup: &AnnType, span: Span) -> Result<(), GenError> {
        let cs = potential::subtype_constraints(sub, sup, &tag("L:Sub", span)).map_err(|e| GenError {
            message: e.to_string(),
            span,
        })?;
        for c in cs {
            self.push(c);
        }
        Ok(())
    }

    /// Runs a sub-derivation `j` under the outer budget `(q, out)`.
    fn relax(&mut self, q: LinExpr, out: LinExpr, j: &Judgment, rule: &str, span: Span) {
        self.ge(q.clone(), j.q.expr(), rule, span);
        self.ge(q - out, j.q.expr() - j.out.expr(), rule, span);
    }

    /// A fresh annotated type for the given base type.
    pub fn template(&mut self, t: &BaseTy, hint: &str) -> AnnType {
        match t {
            BaseTy::Unit | BaseTy::Var(_) => AnnType::Unit,
            BaseTy::Int => AnnType::Int,
            BaseTy::Bool => AnnType::Bool,
            BaseTy::Prob => AnnType::Prob {
                heads: self.var(&format!("{hint}.h")),
                tails: self.var(&format!("{hint}.t")),
            },
            BaseTy::List(e) => {
                let per = self.var(&format!("{hint}.per"));
                AnnType::List {
                    elem: Box::new(self.template(e, &format!("{hint}.elem"))),
                    per,
                }
            }
            BaseTy::Arrow(args, r) => AnnType::Arrow(Rc::new(self.arrow_template(args, r, hint))),
        }
    }

    fn arrow_template(&mut self, args: &[BaseTy], ret: &BaseTy, hint: &str) -> ArrowType {
        let args = args
            .iter()
            .enumerate()
            .map(|(i, a)| self.template(a, &format!("{hint}.arg{i}")))
            .collect();
        let arg_q = self.var(&format!("{hint}.q"));
        let ret_t = self.template(ret, &format!("{hint}.ret"));
        let ret_q = self.var(&format!("{hint}.ret_q"));
        ArrowType {
            args,
            arg_q,
            ret: ret_t,
            ret_q,
        }
    }

    fn leaf(&mut self, e: &CoreExpr, ty: AnnType, rule: &str, cost: LinExpr) -> Judgment {
        let id = e.id.0;
        let q = self.var(&format!("q{id}"));
        let out = self.var(&format!("out{id}"));
        self.ge(q.expr() - out.expr(), cost, rule, e.span);
        Judgment { q, ty, out }
    }

    fn lookup<'c>(&self, ctx: &'c Ctx, x: &Name, span: Span) -> Result<&'c AnnType, GenError> {
        ctx.get(x).ok_or_else(|| GenError {
            message: format!("unbound variable `{x}`"),
            span,
        })
    }

    /// Fresh result type and budget for a branching node.
    fn join_head(&mut self, e: &CoreExpr) -> (Anno, AnnType, Anno) {
        let id = e.id.0;
        let q = self.var(&format!("q{id}"));
        let ty = self.template(self.types.of(e.id), &format!("t{id}"));
        let out = self.var(&format!("out{id}"));
        (q, ty, out)
    }

    pub fn gen(&mut self, ctx: &Ctx, e: &CoreExpr) -> Result<Judgment, GenError> {
        let sp = e.span;
        let zero = LinExpr::zero;
        Ok(match &e.kind {
            Kind::Var(x) => {
                let t = self.lookup(ctx, x, sp)?.clone();
                self.leaf(e, t, "L:Var", zero())
            }
            Kind::Unit => self.leaf(e, AnnType::Unit, "L:Unit", zero()),
            Kind::Int(_) => self.leaf(e, AnnType::Int, "L:Const", zero()),
            Kind::Bool(_) => self.leaf(e, AnnType::Bool, "L:Const", zero()),
            Kind::Nil => {
                let t = self.template(self.types.of(e.id), &format!("t{}", e.id.0));
                self.leaf(e, t, "L:Nil", zero())
            }
            Kind::Tick(c) => self.leaf(e, AnnType::Unit, "L:Tick", LinExpr::constant(c.clone())),
            Kind::Prob(r) => {
                let h = self.var(&format!("t{}.h", e.id.0));
                let t = self.var(&format!("t{}.t", e.id.0));
                let cost = h.expr().scale(r) + t.expr().scale(&(rat::one() - r));
                self.leaf(e, AnnType::Prob { heads: h, tails: t }, "L:Prob", cost)
            }
            Kind::Cons(x, y) => {
                let tx = self.lookup(ctx, x, sp)?.clone();
                let ty = self.lookup(ctx, y, sp)?.clone();
                let result = self.template(self.types.of(e.id), &format!("t{}", e.id.0));
                let AnnType::List { elem, per } = &result else {
                    return Err(GenError {
                        message: "cons does not build a list".into(),
                        span: sp,
                    });
                };
                let (elem, per) = ((**elem).clone(), per.clone());
                self.sub(&tx, &elem, sp)?;
                self.sub(&ty, &result, sp)?;
                self.leaf(e, result, "L:Cons", per.expr())
            }
            Kind::Consume { var, ty } => {
                let tv = self.lookup(ctx, var, sp)?.clone();
                let lit = AnnType::from_literal(ty);
                let cs = potential::subtype_constraints(&tv, &lit, &tag("L:Consume", sp)).map_err(|err| GenError {
                    message: err.to_string(),
                    span: sp,
                })?;
                for c in cs {
                    self.push(c);
                }
                self.leaf(e, AnnType::Unit, "L:Consume", zero())
            }
            Kind::Cmp { .. } => self.leaf(e, AnnType::Bool, "L:Cmp", zero()),
            Kind::Fun(fd) => {
                let BaseTy::Arrow(args, ret) = self.types.of(e.id).clone() else {
                    unreachable!("function nodes have arrow types")
                };
                let arrow = Rc::new(self.arrow_template(&args, &ret, &format!("f{}", e.id.0)));
                self.arrows.push(arrow.clone());
                let mut inner = Ctx::new();
                for c in &fd.captures {
                    inner.insert(c.clone(), potential::zero_type(self.lookup(ctx, c, sp)?));
                }
                inner.insert(fd.name.clone(), AnnType::Arrow(arrow.clone()));
                for (p, t) in fd.params.iter().zip(&arrow.args) {
                    inner.insert(p.clone(), t.clone());
                }
                let jb = self.gen(&inner, &fd.body)?;
                self.ge(arrow.arg_q.expr(), jb.q.expr(), "L:Fun", sp);
                self.ge(
                    arrow.arg_q.expr() - arrow.ret_q.expr(),
                    jb.q.expr() - jb.out.expr(),
                    "L:Fun",
                    sp,
                );
                self.sub(&jb.ty, &arrow.ret, sp)?;
                self.leaf(e, AnnType::Arrow(arrow), "L:Fun", zero())
            }
            Kind::App { func, args } => {
                let AnnType::Arrow(a) = self.lookup(ctx, func, sp)?.clone() else {
                    return Err(GenError {
                        message: format!("`{func}` is not a function"),
                        span: sp,
                    });
                };
                for (x, t) in args.iter().zip(&a.args) {
                    let tx = self.lookup(ctx, x, sp)?.clone();
                    self.sub(&tx, t, sp)?;
                }
                let q = self.var(&format!("q{}", e.id.0));
                let out = self.var(&format!("out{}", e.id.0));
                self.ge(q.expr(), a.arg_q.expr(), "L:App", sp);
                self.ge(q.expr() - out.expr(), a.arg_q.expr() - a.ret_q.expr(), "L:App", sp);
                Judgment {
                    q,
                    ty: a.ret.clone(),
                    out,
                }
            }
            Kind::Let { name, def, body } => {
                let j1 = self.gen(ctx, def)?;
                let mut inner = ctx.clone();
                inner.insert(name.clone(), j1.ty.clone());
                let j2 = self.gen(&inner, body)?;
                self.ge(j1.out.expr(), j2.q.expr(), "L:Let", sp);
                Judgment {
                    q: j1.q,
                    ty: j2.ty,
                    out: j2.out,
                }
            }
            Kind::Share {
                src,
                left,
                right,
                body,
            } => {
                let t = self.lookup(ctx, src, sp)?.clone();
                let (t1, t2, cs) = potential::share_type(&t, &mut self.lp, &tag("L:Share", sp));
                for c in cs {
                    self.push(c);
                }
                let mut inner = ctx.clone();
                inner.remove(src);
                inner.insert(left.clone(), t1);
                inner.insert(right.clone(), t2);
                self.gen(&inner, body)?
            }
            Kind::MatchList {
                scrut,
                nil,
                head,
                tail,
                cons,
            } => {
                let ts = self.lookup(ctx, scrut, sp)?.clone();
                let AnnType::List { elem, per } = &ts else {
                    return Err(GenError {
                        message: format!("match on `{scrut}`, which is not a list"),
                        span: sp,
                    });
                };
                let mut base = ctx.clone();
                base.remove(scrut);
                let j0 = self.gen(&base, nil)?;
                let mut inner = base.clone();
                inner.insert(head.clone(), (**elem).clone());
                inner.insert(tail.clone(), ts.clone());
                let j1 = self.gen(&inner, cons)?;
                let (q, ty, out) = self.join_head(e);
                self.relax(q.expr(), out.expr(), &j0, "L:MatL", sp);
                self.relax(q.expr() + per.expr(), out.expr(), &j1, "L:MatL", sp);
                self.sub(&j0.ty, &ty, sp)?;
                self.sub(&j1.ty, &ty, sp)?;
                Judgment { q, ty, out }
            }
            Kind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let mut base = ctx.clone();
                base.remove(cond);
                let j1 = self.gen(&base, then_branch)?;
                let j2 = self.gen(&base, else_branch)?;
                let (q, ty, out) = self.join_head(e);
                self.relax(q.expr(), out.expr(), &j1, "L:If", sp);
                self.relax(q.expr(), out.expr(), &j2, "L:If", sp);
                self.sub(&j1.ty, &ty, sp)?;
                self.sub(&j2.ty, &ty, sp)?;
                Judgment { q, ty, out }
            }
            Kind::FlipSym { scrut, heads, tails } => {
                let AnnType::Prob { heads: h, tails: t } = self.lookup(ctx, scrut, sp)?.clone() else {
                    return Err(GenError {
                        message: format!("flip on `{scrut}`, which is not of prob type"),
                        span: sp,
                    });
                };
                let mut base = ctx.clone();
                base.remove(scrut);
                let j1 = self.gen(&base, heads)?;
                let j2 = self.gen(&base, tails)?;
                let (q, ty, out) = self.join_head(e);
                self.relax(q.expr() + h.expr(), out.expr(), &j1, "L:FlipS", sp);
                self.relax(q.expr() + t.expr(), out.expr(), &j2, "L:FlipS", sp);
                self.sub(&j1.ty, &ty, sp)?;
                self.sub(&j2.ty, &ty, sp)?;
                Judgment { q, ty, out }
            }
            Kind::Flip { p, heads, tails } => {
                let np = rat::one() - p;
                let free = e.free_vars();
                let mut c1 = Ctx::new();
                let mut c2 = Ctx::new();
                for x in &free {
                    let t = self.lookup(ctx, x, sp)?.clone();
                    let annos: Vec<Anno> = t.annos().into_iter().cloned().collect();
                    let t1 = t.map_annos(&mut |_| self.lp.fresh("split"));
                    let t2 = t.map_annos(&mut |_| self.lp.fresh("split"));
                    for ((a, a1), a2) in annos.iter().zip(t1.annos()).zip(t2.annos()) {
                        let rhs = a1.expr().scale(p) + a2.expr().scale(&np);
                        self.eq(a.expr(), rhs, "L:Flip", sp);
                    }
                    c1.insert(x.clone(), t1);
                    c2.insert(x.clone(), t2);
                }
                let j1 = self.gen(&c1, heads)?;
                let j2 = self.gen(&c2, tails)?;
                let (q, ty, out) = self.join_head(e);
                let b1 = self.var(&format!("b{}.h", e.id.0));
                let b2 = self.var(&format!("b{}.t", e.id.0));
                self.relax(b1.expr(), out.expr(), &j1, "L:Flip", sp);
                self.relax(b2.expr(), out.expr(), &j2, "L:Flip", sp);
                self.ge(q.expr(), b1.expr().scale(p) + b2.expr().scale(&np), "L:Flip", sp);
                self.sub(&j1.ty, &ty, sp)?;
                self.sub(&j2.ty, &ty, sp)?;
                Judgment { q, ty, out }
            }
        })
    }
}

/// Resolves a judgment's result against an LP assignment.
pub fn resolve_pot(ty: &AnnType, out: &Anno, values: &[Rat]) -> Pot {
    Pot {
        ty: ty.resolve(values),
        q: out.resolve(values),
    }
}
