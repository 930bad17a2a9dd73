//! Printing surface syntax back to parseable text.

use std::collections::BTreeSet;
use std::rc::Rc;

use super::core::{CoreExpr, Kind};
use super::normalize::embed;
use super::surface::{Binder, SurfaceExpr, SurfaceKind};
use super::{Name, RESERVED_PREFIX};
use crate::rat::render;

const EXPR: u8 = 0;
const CMP: u8 = 1;
const CONS: u8 = 2;
const APP: u8 = 3;
const ATOM: u8 = 4;

fn level(e: &SurfaceExpr) -> u8 {
    match &e.kind {
        SurfaceKind::Var(_)
        | SurfaceKind::Unit
        | SurfaceKind::Nil
        | SurfaceKind::Int(_)
        | SurfaceKind::Bool(_)
        | SurfaceKind::List(_) => ATOM,
        SurfaceKind::App(..) => APP,
        SurfaceKind::Cons(..) => CONS,
        SurfaceKind::Cmp(..) => CMP,
        _ => EXPR,
    }
}

struct Printer {
    out: String,
    indent: usize,
}

fn binder(b: &Binder) -> String {
    match b {
        Binder::Named(n) => n.to_string(),
        Binder::Wildcard => "_".into(),
        Binder::Unit => "()".into(),
    }
}

impl Printer {
    fn newline(&mut self) {
        self.out.push('\n');
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
    }

    fn at(&mut self, e: &SurfaceExpr, min: u8) {
        if level(e) < min {
            self.out.push('(');
            self.indent += 1;
            self.expr(e);
            self.indent -= 1;
            self.out.push(')');
        } else {
            self.expr(e);
        }
    }

    fn nested(&mut self, e: &SurfaceExpr) {
        self.indent += 1;
        self.newline();
        self.expr(e);
        self.indent -= 1;
    }

    fn params(&mut self, params: &[Binder]) {
        for p in params {
            self.out.push(' ');
            self.out.push_str(&binder(p));
        }
    }

    fn expr(&mut self, e: &SurfaceExpr) {
        match &e.kind {
            SurfaceKind::Var(x) => self.out.push_str(x),
            SurfaceKind::Unit => self.out.push_str("()"),
            SurfaceKind::Nil => self.out.push_str("[]"),
            SurfaceKind::Int(n) => self.out.push_str(&n.to_string()),
            SurfaceKind::Bool(b) => self.out.push_str(if *b { "true" } else { "false" }),
            SurfaceKind::Prob(p) => {
                self.out.push_str("prob ");
                self.out.push_str(&render(p));
            }
            SurfaceKind::Tick(q) => {
                self.out.push_str("tick ");
                self.out.push_str(&render(q));
            }
            SurfaceKind::List(items) => {
                self.out.push('[');
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str("; ");
                    }
                    self.expr(it);
                }
                self.out.push(']');
            }
            SurfaceKind::Cons(a, b) => {
                self.at(a, APP);
                self.out.push_str(" :: ");
                self.at(b, CONS);
            }
            SurfaceKind::Cmp(op, a, b) => {
                self.at(a, CONS);
                self.out.push(' ');
                self.out.push_str(op.symbol());
                self.out.push(' ');
                self.at(b, CONS);
            }
            SurfaceKind::App(f, args) => {
                self.at(f, ATOM);
                for a in args {
                    self.out.push(' ');
                    self.at(a, ATOM);
                }
            }
            SurfaceKind::Fun { name, params, body } => {
                self.out.push_str("fun ");
                self.out.push_str(name.as_deref().unwrap_or("anon"));
                self.params(params);
                self.out.push_str(" =");
                self.nested(body);
            }
            SurfaceKind::Let { binder: b, def, body } => {
                match (&def.kind, b) {
                    (
                        SurfaceKind::Fun {
                            name,
                            params,
                            body: fbody,
                        },
                        Binder::Named(f),
                    ) if name.as_ref().is_none_or(|g| g == f) => {
                        self.out.push_str(if name.is_some() { "let rec " } else { "let " });
                        self.out.push_str(f);
                        self.params(params);
                        self.out.push_str(" =");
                        self.nested(fbody);
                        self.newline();
                        self.out.push_str("in");
                    }
                    _ => {
                        self.out.push_str("let ");
                        self.out.push_str(&binder(b));
                        self.out.push_str(" = ");
                        self.indent += 1;
                        self.expr(def);
                        self.indent -= 1;
                        self.out.push_str(" in");
                    }
                }
                self.newline();
                self.expr(body);
            }
            SurfaceKind::MatchList {
                scrut,
                nil,
                head,
                tail,
                cons,
            } => {
                self.out.push_str("match ");
                self.expr(scrut);
                self.out.push_str(" with");
                self.newline();
                self.out.push_str("| [] ->");
                self.nested(nil);
                self.newline();
                self.out.push_str(&format!("| {} :: {} ->", binder(head), binder(tail)));
                self.nested(cons);
            }
            SurfaceKind::MatchBool {
                scrut,
                on_true,
                on_false,
            } => {
                self.out.push_str("match ");
                self.expr(scrut);
                self.out.push_str(" with");
                self.branch("true", on_true);
                self.branch("false", on_false);
            }
            SurfaceKind::Flip { p, heads, tails } => {
                self.out.push_str("match flip ");
                self.out.push_str(&render(p));
                self.out.push_str(" with");
                self.branch("H", heads);
                self.branch("T", tails);
            }
            SurfaceKind::FlipSym {
                scrut,
                heads,
                tails,
            } => {
                self.out.push_str("match flip ");
                self.at(scrut, ATOM);
                self.out.push_str(" with");
                self.branch("H", heads);
                self.branch("T", tails);
            }
            SurfaceKind::Consume { var, ty } => {
                self.out.push_str(&format!("consume {var} : {ty}"));
            }
            SurfaceKind::If(c, t, f) => {
                self.out.push_str("if ");
                self.expr(c);
                self.out.push_str(" then");
                self.nested(t);
                self.newline();
                self.out.push_str("else");
                self.nested(f);
            }
            SurfaceKind::Share {
                src,
                left,
                right,
                body,
            } => {
                self.out.push_str(&format!("share {src} as {left}, {right} in"));
                self.newline();
                self.expr(body);
            }
        }
    }

    fn branch(&mut self, label: &str, body: &SurfaceExpr) {
        self.newline();
        self.out.push_str("| ");
        self.out.push_str(label);
        self.out.push_str(" ->");
        self.nested(body);
    }
}

pub fn pretty(e: &SurfaceExpr) -> String {
    let mut p = Printer {
        out: String::new(),
        indent: 0,
    };
    p.expr(e);
    p.out.push('\n');
    p.out
}

fn collect_names(e: &SurfaceExpr, out: &mut BTreeSet<Name>) {
    let mut add = |n: &Name| {
        out.insert(n.clone());
    };
    match &e.kind {
        SurfaceKind::Var(x) => add(x),
        SurfaceKind::MatchList { head, tail, .. } => {
            head.name().map(&mut add);
            tail.name().map(&mut add);
        }
        SurfaceKind::Fun { name, params, .. } => {
            name.as_ref().map(&mut add);
            params.iter().filter_map(Binder::name).for_each(&mut add);
        }
        SurfaceKind::Let { binder, .. } => {
            binder.name().map(&mut add);
        }
        SurfaceKind::Consume { var, .. } => add(var),
        SurfaceKind::Share {
            src, left, right, ..
        } => {
            add(src);
            add(left);
            add(right);
        }
        _ => {}
    }
    for c in e.children() {
        collect_names(c, out);
    }
}

fn rename_all(e: &mut SurfaceExpr, f: &dyn Fn(&Name) -> Name) {
    let fb = |b: &mut Binder| {
        if let Binder::Named(n) = b {
            *n = f(n);
        }
    };
    match &mut e.kind {
        SurfaceKind::Var(x) => *x = f(x),
        SurfaceKind::MatchList { head, tail, .. } => {
            fb(head);
            fb(tail);
        }
        SurfaceKind::Fun { name, params, .. } => {
            if let Some(n) = name {
                *n = f(n);
            }
            params.iter_mut().for_each(fb);
        }
        SurfaceKind::Let { binder, .. } => fb(binder),
        SurfaceKind::Consume { var, .. } => *var = f(var),
        SurfaceKind::Share {
            src, left, right, ..
        } => {
            *src = f(src);
            *left = f(left);
            *right = f(right);
        }
        _ => {}
    }
    match &mut e.kind {
        SurfaceKind::Cons(a, b) | SurfaceKind::Cmp(_, a, b) => {
            rename_all(a, f);
            rename_all(b, f);
        }
        SurfaceKind::List(xs) => xs.iter_mut().for_each(|x| rename_all(x, f)),
        SurfaceKind::MatchList { scrut, nil, cons, .. } => {
            rename_all(scrut, f);
            rename_all(nil, f);
            rename_all(cons, f);
        }
        SurfaceKind::MatchBool {
            scrut,
            on_true,
            on_false,
        }
        | SurfaceKind::If(scrut, on_true, on_false)
        | SurfaceKind::FlipSym {
            scrut,
            heads: on_true,
            tails: on_false,
        } => {
            rename_all(scrut, f);
            rename_all(on_true, f);
            rename_all(on_false, f);
        }
        SurfaceKind::Fun { body, .. } | SurfaceKind::Share { body, .. } => rename_all(body, f),
        SurfaceKind::App(g, args) => {
            rename_all(g, f);
            args.iter_mut().for_each(|a| rename_all(a, f));
        }
        SurfaceKind::Let { def, body, .. } => {
            rename_all(def, f);
            rename_all(body, f);
        }
        SurfaceKind::Flip { heads, tails, .. } => {
            rename_all(heads, f);
            rename_all(tails, f);
        }
        _ => {}
    }
}

/// Drops the self-name of let-bound functions that never call themselves.
fn unrec(e: &CoreExpr, s: &mut SurfaceExpr) {
    if let (Kind::Let { def, body, .. }, SurfaceKind::Let { def: sdef, body: sbody, .. }) = (&e.kind, &mut s.kind) {
        if let (Kind::Fun(fd), SurfaceKind::Fun { name, body: fbody, .. }) = (&def.kind, &mut sdef.kind) {
            if !fd.body.free_vars().contains(&fd.name) {
                *name = None;
            }
            unrec(&fd.body, fbody);
        } else {
            unrec(def, sdef);
        }
        unrec(body, sbody);
        return;
    }
    match (&e.kind, &mut s.kind) {
        (Kind::Fun(fd), SurfaceKind::Fun { body, .. }) => unrec(&fd.body, body),
        (Kind::MatchList { nil, cons, .. }, SurfaceKind::MatchList { nil: sn, cons: sc, .. }) => {
            unrec(nil, sn);
            unrec(cons, sc);
        }
        (Kind::Share { body, .. }, SurfaceKind::Share { body: sb, .. }) => unrec(body, sb),
        (Kind::Flip { heads, tails, .. }, SurfaceKind::Flip { heads: sh, tails: st, .. })
        | (Kind::FlipSym { heads, tails, .. }, SurfaceKind::FlipSym { heads: sh, tails: st, .. })
        | (
            Kind::If {
                then_branch: heads,
                else_branch: tails,
                ..
            },
            SurfaceKind::If(_, sh, st),
        ) => {
            unrec(heads, sh);
            unrec(tails, st);
        }
        _ => {}
    }
}

/// Prints a core program as source text that parses again. Reserved
/// generated names are replaced by plain identifiers that do not clash with
/// any name already in the program.
pub fn render_core(e: &CoreExpr) -> String {
    let mut s = embed(e);
    unrec(e, &mut s);
    let mut used = BTreeSet::new();
    collect_names(&s, &mut used);
    let mut mapping: std::collections::BTreeMap<Name, Name> = Default::default();
    let reserved: Vec<Name> = used.iter().filter(|n| n.starts_with(RESERVED_PREFIX)).cloned().collect();
    for n in reserved {
        let mut cand = n.trim_start_matches(RESERVED_PREFIX).to_string();
        while used.contains(cand.as_str()) {
            cand.push('_');
        }
        let cand: Name = Rc::from(cand.as_str());
        used.insert(cand.clone());
        mapping.insert(n, cand);
    }
    rename_all(&mut s, &|n| mapping.get(n).cloned().unwrap_or_else(|| n.clone()));
    pretty(&s)
}
