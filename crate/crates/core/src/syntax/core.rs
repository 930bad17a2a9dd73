//! Share-let-normal form.

use std::collections::BTreeSet;
use std::rc::Rc;

use super::{CmpOp, Name, Span, TypeLit};
use crate::rat::Rat;

/// Pre-order position of a node, unique within one normalized program.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct NodeId(pub u32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreExpr {
    pub id: NodeId,
    pub span: Span,
    pub kind: Kind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunDef {
    pub name: Name,
    pub params: Vec<Name>,
    pub body: CoreExpr,
    /// Free variables of the function other than itself and its parameters,
    /// sorted by name.
    pub captures: Vec<Name>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Var(Name),
    Unit,
    Nil,
    Int(i64),
    Bool(bool),
    Prob(Rat),
    Tick(Rat),
    Cons(Name, Name),
    MatchList {
        scrut: Name,
        nil: Box<CoreExpr>,
        head: Name,
        tail: Name,
        cons: Box<CoreExpr>,
    },
    Fun(Rc<FunDef>),
    App {
        func: Name,
        args: Vec<Name>,
    },
    Let {
        name: Name,
        def: Box<CoreExpr>,
        body: Box<CoreExpr>,
    },
    Share {
        src: Name,
        left: Name,
        right: Name,
        body: Box<CoreExpr>,
    },
    Flip {
        p: Rat,
        heads: Box<CoreExpr>,
        tails: Box<CoreExpr>,
    },
    FlipSym {
        scrut: Name,
        heads: Box<CoreExpr>,
        tails: Box<CoreExpr>,
    },
    Consume {
        var: Name,
        ty: TypeLit,
    },
    Cmp {
        op: CmpOp,
        lhs: Name,
        rhs: Name,
    },
    If {
        cond: Name,
        then_branch: Box<CoreExpr>,
        else_branch: Box<CoreExpr>,
    },
}

impl CoreExpr {
    pub fn new(kind: Kind, span: Span) -> Self {
        CoreExpr {
            id: NodeId::default(),
            span,
            kind,
        }
    }

    /// Variables read directly by this node, not counting subexpressions.
    pub fn direct_uses(&self) -> Vec<&Name> {
        match &self.kind {
            Kind::Var(x) => vec![x],
            Kind::Cons(a, b) => vec![a, b],
            Kind::MatchList { scrut, .. } | Kind::FlipSym { scrut, .. } => vec![scrut],
            Kind::App { func, args } => std::iter::once(func).chain(args.iter()).collect(),
            Kind::Share { src, .. } => vec![src],
            Kind::Consume { var, .. } => vec![var],
            Kind::Cmp { lhs, rhs, .. } => vec![lhs, rhs],
            Kind::If { cond, .. } => vec![cond],
            _ => vec![],
        }
    }

    /// Subexpressions with the names each one binds. The flag is true when
    /// the subexpressions are mutually exclusive branches.
    pub fn scopes(&self) -> (Vec<(&CoreExpr, Vec<&Name>)>, bool) {
        match &self.kind {
            Kind::MatchList {
                nil, head, tail, cons, ..
            } => (vec![(nil, vec![]), (cons, vec![head, tail])], true),
            Kind::Let { name, def, body } => (vec![(def, vec![]), (body, vec![name])], false),
            Kind::Share {
                left, right, body, ..
            } => (vec![(body, vec![left, right])], false),
            Kind::Flip { heads, tails, .. } | Kind::FlipSym { heads, tails, .. } => {
                (vec![(heads, vec![]), (tails, vec![])], true)
            }
            Kind::If {
                then_branch,
                else_branch,
                ..
            } => (vec![(then_branch, vec![]), (else_branch, vec![])], true),
            _ => (vec![], false),
        }
    }

    pub fn direct_uses_mut(&mut self) -> Vec<&mut Name> {
        match &mut self.kind {
            Kind::Var(x) => vec![x],
            Kind::Cons(a, b) => vec![a, b],
            Kind::MatchList { scrut, .. } | Kind::FlipSym { scrut, .. } => vec![scrut],
            Kind::App { func, args } => std::iter::once(func).chain(args.iter_mut()).collect(),
            Kind::Share { src, .. } => vec![src],
            Kind::Consume { var, .. } => vec![var],
            Kind::Cmp { lhs, rhs, .. } => vec![lhs, rhs],
            Kind::If { cond, .. } => vec![cond],
            _ => vec![],
        }
    }

    pub fn scopes_mut(&mut self) -> (Vec<(&mut CoreExpr, Vec<Name>)>, bool) {
        match &mut self.kind {
            Kind::MatchList {
                nil, head, tail, cons, ..
            } => (
                vec![(&mut **nil, vec![]), (&mut **cons, vec![head.clone(), tail.clone()])],
                true,
            ),
            Kind::Let { name, def, body } => {
                (vec![(&mut **def, vec![]), (&mut **body, vec![name.clone()])], false)
            }
            Kind::Share {
                left, right, body, ..
            } => (vec![(&mut **body, vec![left.clone(), right.clone()])], false),
            Kind::Flip { heads, tails, .. } | Kind::FlipSym { heads, tails, .. } => {
                (vec![(&mut **heads, vec![]), (&mut **tails, vec![])], true)
            }
            Kind::If {
                then_branch,
                else_branch,
                ..
            } => (vec![(&mut **then_branch, vec![]), (&mut **else_branch, vec![])], true),
            _ => (vec![], false),
        }
    }

    /// Renames free occurrences of `from`.
    pub fn rename(&mut self, from: &Name, to: &Name) {
        for slot in self.direct_uses_mut() {
            if slot == from {
                *slot = to.clone();
            }
        }
        if let Kind::Fun(fd) = &mut self.kind {
            if fd.name != *from && !fd.params.contains(from) {
                let fd = Rc::make_mut(fd);
                fd.body.rename(from, to);
                for c in fd.captures.iter_mut() {
                    if c == from {
                        *c = to.clone();
                    }
                }
                fd.captures.sort();
            }
            return;
        }
        for (child, binders) in self.scopes_mut().0 {
            if !binders.contains(from) {
                child.rename(from, to);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        for x in self.direct_uses() {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        if let Kind::Fun(fd) = &self.kind {
            let n = bound.len();
            bound.push(fd.name.clone());
            bound.extend(fd.params.iter().cloned());
            fd.body.collect_free(bound, out);
            bound.truncate(n);
            return;
        }
        let (scopes, _) = self.scopes();
        for (child, binders) in scopes {
            let n = bound.len();
            bound.extend(binders.into_iter().cloned());
            child.collect_free(bound, out);
            bound.truncate(n);
        }
    }

    /// Number of free occurrences of `x`, counting branches by their maximum.
    pub fn uses(&self, x: &Name) -> usize {
        let direct = self.direct_uses().into_iter().filter(|y| *y == x).count();
        if let Kind::Fun(_) = &self.kind {
            return usize::from(self.free_vars().contains(x));
        }
        let (scopes, exclusive) = self.scopes();
        let counts = scopes
            .into_iter()
            .map(|(c, binders)| if binders.contains(&x) { 0 } else { c.uses(x) });
        let nested = if exclusive {
            counts.max().unwrap_or(0)
        } else {
            counts.sum()
        };
        direct + nested
    }

    /// Visits every node in pre-order, descending into function bodies.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a CoreExpr)) {
        f(self);
        if let Kind::Fun(fd) = &self.kind {
            fd.body.walk(f);
        }
        for (c, _) in self.scopes().0 {
            c.walk(f);
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    pub fn is_probabilistic(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e.kind, Kind::Flip { .. } | Kind::FlipSym { .. } | Kind::Prob(_)) {
                found = true;
            }
        });
        found
    }

    /// Checks the affine-occurrence invariant: every variable occurs at most
    /// once per scope. Returns the first offending variable.
    pub fn check_affine(&self) -> Result<(), Name> {
        let mut err = None;
        self.walk(&mut |e| {
            if err.is_some() {
                return;
            }
            let mut binders: Vec<Name> = Vec::new();
            match &e.kind {
                Kind::Fun(fd) => {
                    binders.push(fd.name.clone());
                    binders.extend(fd.params.iter().cloned());
                    binders.extend(fd.captures.iter().cloned());
                    for b in &binders {
                        if fd.body.uses(b) > 1 {
                            err = Some(b.clone());
                            return;
                        }
                    }
                }
                _ => {
                    for (c, bs) in e.scopes().0 {
                        for b in bs {
                            if c.uses(b) > 1 {
                                err = Some(b.clone());
                                return;
                            }
                        }
                    }
                }
            }
        });
        match err {
            Some(x) => Err(x),
            None => Ok(()),
        }
    }
}
