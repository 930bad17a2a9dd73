use super::{CmpOp, Name, Span, TypeLit};
use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binder {
    Named(Name),
    Wildcard,
    Unit,
}

impl Binder {
    pub fn name(&self) -> Option<&Name> {
        match self {
            Binder::Named(n) => Some(n),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceExpr {
    pub kind: SurfaceKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceKind {
    Var(Name),
    Unit,
    Nil,
    Cons(Box<SurfaceExpr>, Box<SurfaceExpr>),
    List(Vec<SurfaceExpr>),
    MatchList {
        scrut: Box<SurfaceExpr>,
        nil: Box<SurfaceExpr>,
        head: Binder,
        tail: Binder,
        cons: Box<SurfaceExpr>,
    },
    MatchBool {
        scrut: Box<SurfaceExpr>,
        on_true: Box<SurfaceExpr>,
        on_false: Box<SurfaceExpr>,
    },
    /// `fun f x y = e` when `name` is present (recursive), otherwise the
    /// non-recursive function of `let f x y = e in ...`.
    Fun {
        name: Option<Name>,
        params: Vec<Binder>,
        body: Box<SurfaceExpr>,
    },
    App(Box<SurfaceExpr>, Vec<SurfaceExpr>),
    Tick(Rat),
    Let {
        binder: Binder,
        def: Box<SurfaceExpr>,
        body: Box<SurfaceExpr>,
    },
    Flip {
        p: Rat,
        heads: Box<SurfaceExpr>,
        tails: Box<SurfaceExpr>,
    },
    Prob(Rat),
    FlipSym {
        scrut: Box<SurfaceExpr>,
        heads: Box<SurfaceExpr>,
        tails: Box<SurfaceExpr>,
    },
    Consume {
        var: Name,
        ty: TypeLit,
    },
    Int(i64),
    Bool(bool),
    Cmp(CmpOp, Box<SurfaceExpr>, Box<SurfaceExpr>),
    If(Box<SurfaceExpr>, Box<SurfaceExpr>, Box<SurfaceExpr>),
    Share {
        src: Name,
        left: Name,
        right: Name,
        body: Box<SurfaceExpr>,
    },
}

impl SurfaceExpr {
    pub fn new(kind: SurfaceKind, span: Span) -> Self {
        SurfaceExpr { kind, span }
    }

    /// Immediate subexpressions in evaluation order.
    pub fn children(&self) -> Vec<&SurfaceExpr> {
        use SurfaceKind::*;
        match &self.kind {
            Var(_) | Unit | Nil | Tick(_) | Prob(_) | Consume { .. } | Int(_) | Bool(_) => vec![],
            Cons(a, b) | Cmp(_, a, b) => vec![a, b],
            List(xs) => xs.iter().collect(),
            MatchList { scrut, nil, cons, .. } => vec![scrut, nil, cons],
            MatchBool {
                scrut,
                on_true,
                on_false,
            } => vec![scrut, on_true, on_false],
            Fun { body, .. } => vec![body],
            App(f, args) => std::iter::once(&**f).chain(args.iter()).collect(),
            Let { def, body, .. } => vec![def, body],
            Flip { heads, tails, .. } => vec![heads, tails],
            FlipSym {
                scrut,
                heads,
                tails,
            } => vec![scrut, heads, tails],
            If(c, t, e) => vec![c, t, e],
            Share { body, .. } => vec![body],
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}
