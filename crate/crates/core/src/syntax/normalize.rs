//! Elaboration into share-let-normal form.
//!
//! Two passes. The first let-binds every compound subterm that sits where the
//! core grammar wants a variable, checking scopes on the way. The second makes
//! variable use affine: for each binder with several uses it finds the
//! smallest subterm covering all of them and splits the variable there with
//! `share`, so share nodes end up as deep as possible.

use std::rc::Rc;

use super::core::{CoreExpr, FunDef, Kind, NodeId};
use super::surface::{Binder, SurfaceExpr, SurfaceKind};
use super::{Name, Span, SyntaxError, RESERVED_PREFIX};

struct Fresh {
    next: u32,
}

impl Fresh {
    fn name(&mut self, stem: &str) -> Name {
        self.next += 1;
        Rc::from(format!("{RESERVED_PREFIX}{stem}{}", self.next).as_str())
    }
}

fn highest_reserved_suffix(e: &SurfaceExpr) -> u32 {
    fn suffix(n: &str) -> u32 {
        if !n.starts_with(RESERVED_PREFIX) {
            return 0;
        }
        let digits: String = n.chars().rev().take_while(|c| c.is_ascii_digit()).collect();
        digits.chars().rev().collect::<String>().parse().unwrap_or(0)
    }
    let mut names: Vec<&str> = Vec::new();
    match &e.kind {
        SurfaceKind::Var(x) => names.push(x),
        SurfaceKind::MatchList { head, tail, .. } => {
            names.extend(head.name().map(|n| &**n));
            names.extend(tail.name().map(|n| &**n));
        }
        SurfaceKind::Fun { name, params, .. } => {
            names.extend(name.as_deref());
            names.extend(params.iter().filter_map(|b| b.name().map(|n| &**n)));
        }
        SurfaceKind::Let { binder, .. } => names.extend(binder.name().map(|n| &**n)),
        SurfaceKind::Consume { var, .. } => names.push(var),
        SurfaceKind::Share {
            src, left, right, ..
        } => names.extend([&**src, &**left, &**right]),
        _ => {}
    }
    let here = names.into_iter().map(suffix).max().unwrap_or(0);
    e.children()
        .into_iter()
        .map(highest_reserved_suffix)
        .max()
        .unwrap_or(0)
        .max(here)
}

struct Elaborator {
    fresh: Fresh,
    scope: Vec<Name>,
}

type Binds = Vec<(Name, CoreExpr)>;

fn wrap(binds: Binds, body: CoreExpr) -> CoreExpr {
    binds.into_iter().rev().fold(body, |body, (name, def)| {
        let span = def.span;
        CoreExpr::new(
            Kind::Let {
                name,
                def: Box::new(def),
                body: Box::new(body),
            },
            span,
        )
    })
}

impl Elaborator {
    fn check(&self, x: &Name, span: Span) -> Result<(), SyntaxError> {
        if self.scope.iter().rev().any(|y| y == x) {
            Ok(())
        } else {
            Err(SyntaxError::Unbound {
                name: x.to_string(),
                span,
            })
        }
    }

    fn binder(&mut self, b: &Binder) -> Name {
        match b {
            Binder::Named(n) => n.clone(),
            Binder::Wildcard | Binder::Unit => self.fresh.name("tmp"),
        }
    }

    fn param(&mut self, b: &Binder) -> Name {
        match b {
            Binder::Named(n) => n.clone(),
            Binder::Wildcard | Binder::Unit => self.fresh.name("arg"),
        }
    }

    fn atomize(&mut self, e: &SurfaceExpr, binds: &mut Binds) -> Result<Name, SyntaxError> {
        if let SurfaceKind::Var(x) = &e.kind {
            self.check(x, e.span)?;
            return Ok(x.clone());
        }
        let core = self.expr(e)?;
        let t = self.fresh.name("tmp");
        binds.push((t.clone(), core));
        Ok(t)
    }

    fn scoped<T>(&mut self, names: &[Name], f: impl FnOnce(&mut Self) -> T) -> T {
        let n = self.scope.len();
        self.scope.extend(names.iter().cloned());
        let out = f(self);
        self.scope.truncate(n);
        out
    }

    fn expr(&mut self, e: &SurfaceExpr) -> Result<CoreExpr, SyntaxError> {
        let span = e.span;
        let leaf = |k: Kind| Ok(CoreExpr::new(k, span));
        match &e.kind {
            SurfaceKind::Var(x) => {
                self.check(x, span)?;
                leaf(Kind::Var(x.clone()))
            }
            SurfaceKind::Unit => leaf(Kind::Unit),
            SurfaceKind::Nil => leaf(Kind::Nil),
            SurfaceKind::Int(n) => leaf(Kind::Int(*n)),
            SurfaceKind::Bool(b) => leaf(Kind::Bool(*b)),
            SurfaceKind::Prob(p) => leaf(Kind::Prob(p.clone())),
            SurfaceKind::Tick(q) => leaf(Kind::Tick(q.clone())),
            SurfaceKind::Cons(a, b) => {
                let mut binds = Vec::new();
                let x = self.atomize(a, &mut binds)?;
                let y = self.atomize(b, &mut binds)?;
                Ok(wrap(binds, CoreExpr::new(Kind::Cons(x, y), span)))
            }
            SurfaceKind::List(items) => {
                let mut binds = Vec::new();
                let mut names = Vec::new();
                for it in items {
                    names.push(self.atomize(it, &mut binds)?);
                }
                let nil = self.fresh.name("tmp");
                binds.push((nil.clone(), CoreExpr::new(Kind::Nil, span)));
                let mut tail = nil;
                let (first, rest) = names.split_first().expect("list literal has elements");
                for x in rest.iter().rev() {
                    let cell = self.fresh.name("tmp");
                    binds.push((cell.clone(), CoreExpr::new(Kind::Cons(x.clone(), tail), span)));
                    tail = cell;
                }
                Ok(wrap(binds, CoreExpr::new(Kind::Cons(first.clone(), tail), span)))
            }
            SurfaceKind::MatchList {
                scrut,
                nil,
                head,
                tail,
                cons,
            } => {
                let mut binds = Vec::new();
                let x = self.atomize(scrut, &mut binds)?;
                let nil = self.expr(nil)?;
                let h = self.binder(head);
                let t = self.binder(tail);
                let cons = self.scoped(&[h.clone(), t.clone()], |s| s.expr(cons))?;
                let node = Kind::MatchList {
                    scrut: x,
                    nil: Box::new(nil),
                    head: h,
                    tail: t,
                    cons: Box::new(cons),
                };
                Ok(wrap(binds, CoreExpr::new(node, span)))
            }
            SurfaceKind::MatchBool {
                scrut,
                on_true,
                on_false,
            }
            | SurfaceKind::If(scrut, on_true, on_false) => {
                let mut binds = Vec::new();
                let c = self.atomize(scrut, &mut binds)?;
                let t = self.expr(on_true)?;
                let f = self.expr(on_false)?;
                let node = Kind::If {
                    cond: c,
                    then_branch: Box::new(t),
                    else_branch: Box::new(f),
                };
                Ok(wrap(binds, CoreExpr::new(node, span)))
            }
            SurfaceKind::Fun { name, params, body } => {
                let visible: Vec<Name> = name.iter().cloned().collect();
                let fname = name.clone().unwrap_or_else(|| self.fresh.name("self"));
                let params: Vec<Name> = params.iter().map(|p| self.param(p)).collect();
                let mut bound = visible;
                bound.extend(params.iter().cloned());
                let body = self.scoped(&bound, |s| s.expr(body))?;
                leaf(Kind::Fun(Rc::new(FunDef {
                    name: fname,
                    params,
                    body,
                    captures: Vec::new(),
                })))
            }
            SurfaceKind::App(f, args) => {
                let mut binds = Vec::new();
                let func = self.atomize(f, &mut binds)?;
                let mut names = Vec::new();
                for a in args {
                    names.push(self.atomize(a, &mut binds)?);
                }
                Ok(wrap(binds, CoreExpr::new(Kind::App { func, args: names }, span)))
            }
            SurfaceKind::Let { binder, def, body } => {
                let def = self.expr(def)?;
                let name = self.binder(binder);
                let body = self.scoped(std::slice::from_ref(&name), |s| s.expr(body))?;
                leaf(Kind::Let {
                    name,
                    def: Box::new(def),
                    body: Box::new(body),
                })
            }
            SurfaceKind::Flip { p, heads, tails } => leaf(Kind::Flip {
                p: p.clone(),
                heads: Box::new(self.expr(heads)?),
                tails: Box::new(self.expr(tails)?),
            }),
            SurfaceKind::FlipSym {
                scrut,
                heads,
                tails,
            } => {
                let mut binds = Vec::new();
                let x = self.atomize(scrut, &mut binds)?;
                let node = Kind::FlipSym {
                    scrut: x,
                    heads: Box::new(self.expr(heads)?),
                    tails: Box::new(self.expr(tails)?),
                };
                Ok(wrap(binds, CoreExpr::new(node, span)))
            }
            SurfaceKind::Consume { var, ty } => {
                self.check(var, span)?;
                leaf(Kind::Consume {
                    var: var.clone(),
                    ty: ty.clone(),
                })
            }
            SurfaceKind::Cmp(op, a, b) => {
                let mut binds = Vec::new();
                let lhs = self.atomize(a, &mut binds)?;
                let rhs = self.atomize(b, &mut binds)?;
                Ok(wrap(binds, CoreExpr::new(Kind::Cmp { op: *op, lhs, rhs }, span)))
            }
            SurfaceKind::Share {
                src,
                left,
                right,
                body,
            } => {
                self.check(src, span)?;
                let body = self.scoped(&[left.clone(), right.clone()], |s| s.expr(body))?;
                leaf(Kind::Share {
                    src: src.clone(),
                    left: left.clone(),
                    right: right.clone(),
                    body: Box::new(body),
                })
            }
        }
    }

    /// Makes every binder below `e` affine.
    fn affine(&mut self, mut e: CoreExpr) -> CoreExpr {
        if let Kind::Fun(fd) = &mut e.kind {
            let fd = Rc::make_mut(fd);
            let body = std::mem::replace(&mut fd.body, CoreExpr::new(Kind::Unit, Span::default()));
            let mut body = self.affine(body);
            for p in fd.params.iter().chain(std::iter::once(&fd.name)) {
                body = self.share_var(p, body);
            }
            let mut captures: Vec<Name> = body
                .free_vars()
                .into_iter()
                .filter(|x| *x != fd.name && !fd.params.contains(x))
                .collect();
            captures.sort();
            for c in &captures {
                body = self.share_var(c, body);
            }
            fd.body = body;
            fd.captures = captures;
            return e;
        }
        let kind = std::mem::replace(&mut e.kind, Kind::Unit);
        e.kind = match kind {
            Kind::Let { name, def, body } => {
                let def = self.affine(*def);
                let body = self.affine(*body);
                let body = self.share_var(&name, body);
                Kind::Let {
                    name,
                    def: Box::new(def),
                    body: Box::new(body),
                }
            }
            Kind::MatchList {
                scrut,
                nil,
                head,
                tail,
                cons,
            } => {
                let nil = self.affine(*nil);
                let cons = self.affine(*cons);
                let cons = self.share_var(&head, cons);
                let cons = self.share_var(&tail, cons);
                Kind::MatchList {
                    scrut,
                    nil: Box::new(nil),
                    head,
                    tail,
                    cons: Box::new(cons),
                }
            }
            Kind::Share {
                src,
                left,
                right,
                body,
            } => {
                let body = self.affine(*body);
                let body = self.share_var(&left, body);
                let body = self.share_var(&right, body);
                Kind::Share {
                    src,
                    left,
                    right,
                    body: Box::new(body),
                }
            }
            Kind::Flip { p, heads, tails } => Kind::Flip {
                p,
                heads: Box::new(self.affine(*heads)),
                tails: Box::new(self.affine(*tails)),
            },
            Kind::FlipSym {
                scrut,
                heads,
                tails,
            } => Kind::FlipSym {
                scrut,
                heads: Box::new(self.affine(*heads)),
                tails: Box::new(self.affine(*tails)),
            },
            Kind::If {
                cond,
                then_branch,
                else_branch,
            } => Kind::If {
                cond,
                then_branch: Box::new(self.affine(*then_branch)),
                else_branch: Box::new(self.affine(*else_branch)),
            },
            other => other,
        };
        e
    }

    /// Inserts share nodes for `x` at the innermost points that cover two or
    /// more of its uses.
    fn share_var(&mut self, x: &Name, mut e: CoreExpr) -> CoreExpr {
        if e.uses(x) <= 1 {
            return e;
        }
        let direct = e.direct_uses().into_iter().filter(|y| *y == x).count();
        let (child_uses, exclusive): (Vec<usize>, bool) = {
            let (scopes, exclusive) = e.scopes();
            let uses = scopes
                .into_iter()
                .map(|(c, bs)| if bs.contains(&x) { 0 } else { c.uses(x) })
                .collect();
            (uses, exclusive)
        };
        let child_parts = if exclusive {
            usize::from(child_uses.iter().any(|&u| u > 0))
        } else {
            child_uses.iter().filter(|&&u| u > 0).count()
        };
        if direct == 0 && child_parts == 1 {
            let (scopes, _) = e.scopes_mut();
            for ((child, _), &u) in scopes.into_iter().zip(&child_uses) {
                if u > 0 {
                    let c = std::mem::replace(child, CoreExpr::new(Kind::Unit, Span::default()));
                    *child = self.share_var(x, c);
                }
            }
            return e;
        }
        let mut names: Vec<Name> = Vec::new();
        for slot in e.direct_uses_mut() {
            if slot == x {
                let n = self.fresh.name("shr");
                *slot = n.clone();
                names.push(n);
            }
        }
        let group = if exclusive && child_parts == 1 {
            let n = self.fresh.name("shr");
            names.push(n.clone());
            Some(n)
        } else {
            None
        };
        let mut seq_names = Vec::new();
        {
            let (scopes, _) = e.scopes_mut();
            for ((child, _), &u) in scopes.into_iter().zip(&child_uses) {
                if u == 0 {
                    continue;
                }
                let n = match &group {
                    Some(g) => g.clone(),
                    None => {
                        let n = self.fresh.name("shr");
                        seq_names.push(n.clone());
                        n
                    }
                };
                child.rename(x, &n);
                let c = std::mem::replace(child, CoreExpr::new(Kind::Unit, Span::default()));
                *child = self.share_var(&n, c);
            }
        }
        names.extend(seq_names);
        self.share_chain(x.clone(), &names, e)
    }

    fn share_chain(&mut self, src: Name, names: &[Name], body: CoreExpr) -> CoreExpr {
        let span = body.span;
        let (left, rest) = names.split_first().expect("at least two parts");
        if rest.len() == 1 {
            return CoreExpr::new(
                Kind::Share {
                    src,
                    left: left.clone(),
                    right: rest[0].clone(),
                    body: Box::new(body),
                },
                span,
            );
        }
        let mid = self.fresh.name("shr");
        let inner = self.share_chain(mid.clone(), rest, body);
        CoreExpr::new(
            Kind::Share {
                src,
                left: left.clone(),
                right: mid,
                body: Box::new(inner),
            },
            span,
        )
    }
}

/// Assigns pre-order node ids and recomputes function captures.
fn finish(e: &mut CoreExpr, next: &mut u32) {
    e.id = NodeId(*next);
    *next += 1;
    if let Kind::Fun(fd) = &mut e.kind {
        let fd = Rc::make_mut(fd);
        finish(&mut fd.body, next);
        let mut captures: Vec<Name> = fd
            .body
            .free_vars()
            .into_iter()
            .filter(|x| *x != fd.name && !fd.params.contains(x))
            .collect();
        captures.sort();
        fd.captures = captures;
        return;
    }
    for (child, _) in e.scopes_mut().0 {
        finish(child, next);
    }
}

/// Elaborates an expression whose free variables are exactly `free`.
pub fn normalize_open(e: &SurfaceExpr, free: &[Name]) -> Result<CoreExpr, SyntaxError> {
    let mut el = Elaborator {
        fresh: Fresh {
            next: highest_reserved_suffix(e),
        },
        scope: free.to_vec(),
    };
    let core = el.expr(e)?;
    let mut core = el.affine(core);
    for x in core.free_vars() {
        core = el.share_var(&x, core);
    }
    let mut next = 0;
    finish(&mut core, &mut next);
    Ok(core)
}

/// Elaborates a closed program.
pub fn normalize(e: &SurfaceExpr) -> Result<CoreExpr, SyntaxError> {
    normalize_open(e, &[])
}

/// Views a core expression as surface syntax.
pub fn embed(e: &CoreExpr) -> SurfaceExpr {
    let var = |x: &Name| SurfaceExpr::new(SurfaceKind::Var(x.clone()), e.span);
    let b = |c: &CoreExpr| Box::new(embed(c));
    let kind = match &e.kind {
        Kind::Var(x) => SurfaceKind::Var(x.clone()),
        Kind::Unit => SurfaceKind::Unit,
        Kind::Nil => SurfaceKind::Nil,
        Kind::Int(n) => SurfaceKind::Int(*n),
        Kind::Bool(v) => SurfaceKind::Bool(*v),
        Kind::Prob(p) => SurfaceKind::Prob(p.clone()),
        Kind::Tick(q) => SurfaceKind::Tick(q.clone()),
        Kind::Cons(a, c) => SurfaceKind::Cons(Box::new(var(a)), Box::new(var(c))),
        Kind::MatchList {
            scrut,
            nil,
            head,
            tail,
            cons,
        } => SurfaceKind::MatchList {
            scrut: Box::new(var(scrut)),
            nil: b(nil),
            head: Binder::Named(head.clone()),
            tail: Binder::Named(tail.clone()),
            cons: b(cons),
        },
        Kind::Fun(fd) => SurfaceKind::Fun {
            name: Some(fd.name.clone()),
            params: fd.params.iter().map(|p| Binder::Named(p.clone())).collect(),
            body: b(&fd.body),
        },
        Kind::App { func, args } => SurfaceKind::App(Box::new(var(func)), args.iter().map(var).collect()),
        Kind::Let { name, def, body } => SurfaceKind::Let {
            binder: Binder::Named(name.clone()),
            def: b(def),
            body: b(body),
        },
        Kind::Share {
            src,
            left,
            right,
            body,
        } => SurfaceKind::Share {
            src: src.clone(),
            left: left.clone(),
            right: right.clone(),
            body: b(body),
        },
        Kind::Flip { p, heads, tails } => SurfaceKind::Flip {
            p: p.clone(),
            heads: b(heads),
            tails: b(tails),
        },
        Kind::FlipSym {
            scrut,
            heads,
            tails,
        } => SurfaceKind::FlipSym {
            scrut: Box::new(var(scrut)),
            heads: b(heads),
            tails: b(tails),
        },
        Kind::Consume { var: x, ty } => SurfaceKind::Consume {
            var: x.clone(),
            ty: ty.clone(),
        },
        Kind::Cmp { op, lhs, rhs } => SurfaceKind::Cmp(*op, Box::new(var(lhs)), Box::new(var(rhs))),
        Kind::If {
            cond,
            then_branch,
            else_branch,
        } => SurfaceKind::If(Box::new(var(cond)), b(then_branch), b(else_branch)),
    };
    SurfaceExpr::new(kind, e.span)
}
