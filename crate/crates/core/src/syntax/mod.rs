//! Surface language, parser, and elaboration into share-let-normal form.

pub mod core;
mod lexer;
pub mod normalize;
mod parser;
pub mod pretty;
pub mod surface;

use std::fmt;
use std::rc::Rc;

use serde::Serialize;

use crate::rat::Rat;

pub use self::core::{CoreExpr, FunDef, Kind, NodeId};
pub use normalize::{embed, normalize, normalize_open};
pub use parser::{parse, parse_type_literal, parse_value_literals};
pub use surface::{Binder, SurfaceExpr, SurfaceKind};

pub type Name = Rc<str>;

/// Source location. Spans never take part in structural equality.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl Span {
    pub fn join(self, other: Span) -> Span {
        Span {
            start: self.start,
            end: other.end.max(self.end),
            line: self.line,
            col: self.col,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CmpOp {
    Lt,
    Gt,
    Eq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Eq => "=",
        }
    }
}

/// Annotated type as written after `consume x :`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeLit {
    Unit,
    Int,
    Bool,
    Prob { heads: Rat, tails: Rat },
    List { elem: Box<TypeLit>, per: Rat },
}

impl fmt::Display for TypeLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::rat::render;
        match self {
            TypeLit::Unit => write!(f, "unit"),
            TypeLit::Int => write!(f, "int"),
            TypeLit::Bool => write!(f, "bool"),
            TypeLit::Prob { heads, tails } => {
                write!(f, "prob{{{}}}{{{}}}", render(heads), render(tails))
            }
            TypeLit::List { elem, per } => write!(f, "L^{}({})", render(per), elem),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("{span}: {message}")]
    Parse { message: String, span: Span },
    #[error("{span}: unbound variable `{name}`")]
    Unbound { name: String, span: Span },
}

impl SyntaxError {
    pub fn span(&self) -> Span {
        match self {
            SyntaxError::Parse { span, .. } | SyntaxError::Unbound { span, .. } => *span,
        }
    }
}

pub(crate) const RESERVED_PREFIX: char = '%';
