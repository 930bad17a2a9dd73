//! Recursive-descent parser for the surface language.
//!
//! Match forms take exactly one branch per constructor, so nested matches in
//! the first branch need no parentheses: the inner match stops as soon as it
//! has both of its own branches.

use std::rc::Rc;

use super::lexer::{Lexer, Tok};
use super::surface::{Binder, SurfaceExpr, SurfaceKind};
use super::{CmpOp, Name, Span, SyntaxError, TypeLit};
use crate::rat::{self, Rat};

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

enum LetOut {
    Expr(SurfaceExpr),
    Decl(Binder, SurfaceExpr, Span),
}

enum BranchPat {
    Heads,
    Tails,
    Nil,
    Cons(Binder, Binder),
    True,
    False,
}

type PResult<T> = Result<T, SyntaxError>;

fn boxed(e: SurfaceExpr) -> Box<SurfaceExpr> {
    Box::new(e)
}

impl Parser {
    fn new(text: &str) -> PResult<Parser> {
        Ok(Parser {
            toks: Lexer::new(text).tokenize()?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(SyntaxError::Parse {
            message: message.into(),
            span: self.span(),
        })
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.error(format!("expected {}, found {}", t.describe(), self.peek().describe()))
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(Rc::from(s.as_str()))
            }
            other => self.error(format!("expected identifier, found {}", other.describe())),
        }
    }

    fn finish(&self, kind: SurfaceKind, start: Span) -> SurfaceExpr {
        SurfaceExpr::new(kind, start.join(self.prev_span()))
    }

    fn number(&mut self) -> PResult<(Rat, bool, Span)> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Num { text, integral } => {
                self.bump();
                let value = rat::parse(&text).ok_or_else(|| SyntaxError::Parse {
                    message: format!("malformed number `{text}`"),
                    span,
                })?;
                Ok((value, integral, span))
            }
            other => self.error(format!("expected number, found {}", other.describe())),
        }
    }

    fn probability(&mut self) -> PResult<Rat> {
        let (p, _, span) = self.number()?;
        if !rat::is_probability(&p) {
            return Err(SyntaxError::Parse {
                message: "probability out of range".into(),
                span,
            });
        }
        Ok(p)
    }

    fn program(&mut self) -> PResult<SurfaceExpr> {
        let mut decls: Vec<(Binder, SurfaceExpr, Span)> = Vec::new();
        let result = loop {
            if self.at(&Tok::Eof) {
                let Some((binder, _, span)) = decls.last() else {
                    return self.error("empty program");
                };
                let Some(name) = binder.name() else {
                    return Err(SyntaxError::Parse {
                        message: "the last declaration of a program must be named".into(),
                        span: *span,
                    });
                };
                break SurfaceExpr::new(SurfaceKind::Var(name.clone()), *span);
            }
            if self.at(&Tok::Let) {
                match self.let_form(true)? {
                    LetOut::Decl(b, def, span) => decls.push((b, def, span)),
                    LetOut::Expr(e) => {
                        self.expect(Tok::Eof)?;
                        break e;
                    }
                }
            } else {
                let e = self.expr()?;
                self.expect(Tok::Eof)?;
                break e;
            }
        };
        Ok(decls.into_iter().rev().fold(result, |body, (binder, def, span)| {
            let span = span.join(body.span);
            SurfaceExpr::new(
                SurfaceKind::Let {
                    binder,
                    def: boxed(def),
                    body: boxed(body),
                },
                span,
            )
        }))
    }

    fn at_param(&self) -> bool {
        match self.peek() {
            Tok::Ident(_) | Tok::Underscore => true,
            Tok::LParen => self.peek_at(1) == &Tok::RParen,
            _ => false,
        }
    }

    fn binder(&mut self) -> PResult<Binder> {
        match self.peek() {
            Tok::Ident(_) => Ok(Binder::Named(self.ident()?)),
            Tok::Underscore => {
                self.bump();
                Ok(Binder::Wildcard)
            }
            Tok::LParen if self.peek_at(1) == &Tok::RParen => {
                self.bump();
                self.bump();
                Ok(Binder::Unit)
            }
            other => self.error(format!("expected a pattern, found {}", other.describe())),
        }
    }

    fn params(&mut self) -> PResult<Vec<Binder>> {
        let mut ps = Vec::new();
        while self.at_param() {
            ps.push(self.binder()?);
        }
        if ps.is_empty() {
            return self.error("expected at least one parameter");
        }
        Ok(ps)
    }

    fn let_form(&mut self, top_level: bool) -> PResult<LetOut> {
        let start = self.span();
        self.expect(Tok::Let)?;
        let (binder, def) = if self.eat(&Tok::Rec) {
            let name = self.ident()?;
            let params = self.params()?;
            self.expect(Tok::Equals)?;
            let body = self.expr()?;
            let def = self.finish(
                SurfaceKind::Fun {
                    name: Some(name.clone()),
                    params,
                    body: boxed(body),
                },
                start,
            );
            (Binder::Named(name), def)
        } else {
            let binder = self.binder()?;
            if matches!(binder, Binder::Named(_)) && self.at_param() {
                let params = self.params()?;
                self.expect(Tok::Equals)?;
                let body = self.expr()?;
                let def = self.finish(
                    SurfaceKind::Fun {
                        name: None,
                        params,
                        body: boxed(body),
                    },
                    start,
                );
                (binder, def)
            } else {
                self.expect(Tok::Equals)?;
                (binder, self.expr()?)
            }
        };
        if self.eat(&Tok::In) {
            let body = self.expr()?;
            Ok(LetOut::Expr(self.finish(
                SurfaceKind::Let {
                    binder,
                    def: boxed(def),
                    body: boxed(body),
                },
                start,
            )))
        } else if top_level {
            Ok(LetOut::Decl(binder, def, start))
        } else {
            self.error(format!("expected `in`, found {}", self.peek().describe()))
        }
    }

    fn expr(&mut self) -> PResult<SurfaceExpr> {
        let start = self.span();
        match self.peek() {
            Tok::Let => match self.let_form(false)? {
                LetOut::Expr(e) => Ok(e),
                LetOut::Decl(..) => unreachable!(),
            },
            Tok::Fun => {
                self.bump();
                let name = self.ident()?;
                let params = self.params()?;
                self.expect(Tok::Equals)?;
                let body = self.expr()?;
                Ok(self.finish(
                    SurfaceKind::Fun {
                        name: Some(name),
                        params,
                        body: boxed(body),
                    },
                    start,
                ))
            }
            Tok::Match => {
                self.bump();
                if self.eat(&Tok::Flip) {
                    let target = self.flip_target()?;
                    self.expect(Tok::With)?;
                    self.eat(&Tok::Bar);
                    self.branches(start, BranchShape::Flip(target), None)
                } else {
                    let scrut = self.expr()?;
                    self.expect(Tok::With)?;
                    self.eat(&Tok::Bar);
                    self.branches(start, BranchShape::Data(scrut), None)
                }
            }
            Tok::Case => {
                self.bump();
                let scrut = self.expr()?;
                self.expect(Tok::LBrace)?;
                self.eat(&Tok::Bar);
                self.branches(start, BranchShape::Data(scrut), Some(Tok::RBrace))
            }
            Tok::Flip => {
                self.bump();
                let target = self.flip_target()?;
                self.expect(Tok::LBrace)?;
                self.eat(&Tok::Bar);
                self.branches(start, BranchShape::Flip(target), Some(Tok::RBrace))
            }
            Tok::If => {
                self.bump();
                let c = self.expr()?;
                self.expect(Tok::Then)?;
                let t = self.expr()?;
                self.expect(Tok::Else)?;
                let e = self.expr()?;
                Ok(self.finish(SurfaceKind::If(boxed(c), boxed(t), boxed(e)), start))
            }
            Tok::Share => {
                self.bump();
                let src = self.ident()?;
                self.expect(Tok::As)?;
                let left = self.ident()?;
                self.expect(Tok::Comma)?;
                let right = self.ident()?;
                self.expect(Tok::In)?;
                let body = self.expr()?;
                Ok(self.finish(
                    SurfaceKind::Share {
                        src,
                        left,
                        right,
                        body: boxed(body),
                    },
                    start,
                ))
            }
            Tok::Tick => {
                self.bump();
                let (q, _, span) = self.number()?;
                if q < rat::zero() {
                    return Err(SyntaxError::Parse {
                        message: "negative tick rejected".into(),
                        span,
                    });
                }
                Ok(self.finish(SurfaceKind::Tick(q), start))
            }
            Tok::Prob => {
                self.bump();
                let p = self.probability()?;
                Ok(self.finish(SurfaceKind::Prob(p), start))
            }
            Tok::Consume => {
                self.bump();
                let var = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.type_lit()?;
                Ok(self.finish(SurfaceKind::Consume { var, ty }, start))
            }
            _ => self.cmp(),
        }
    }

    fn flip_target(&mut self) -> PResult<FlipTarget> {
        if matches!(self.peek(), Tok::Num { .. }) {
            Ok(FlipTarget::Literal(self.probability()?))
        } else {
            Ok(FlipTarget::Symbolic(self.atom()?))
        }
    }

    fn branch_pattern(&mut self) -> PResult<(BranchPat, Span)> {
        let span = self.span();
        let pat = match self.peek().clone() {
            Tok::Ident(s) if s == "H" => {
                self.bump();
                BranchPat::Heads
            }
            Tok::Ident(s) if s == "T" => {
                self.bump();
                BranchPat::Tails
            }
            Tok::True => {
                self.bump();
                BranchPat::True
            }
            Tok::False => {
                self.bump();
                BranchPat::False
            }
            Tok::LBracket if self.peek_at(1) == &Tok::RBracket => {
                self.bump();
                self.bump();
                BranchPat::Nil
            }
            Tok::LParen if self.peek_at(1) == &Tok::RParen => {
                let head = self.binder()?;
                self.expect(Tok::ColonColon)?;
                let tail = self.binder()?;
                BranchPat::Cons(head, tail)
            }
            Tok::Ident(_) | Tok::Underscore => {
                let head = self.binder()?;
                self.expect(Tok::ColonColon)?;
                let tail = self.binder()?;
                BranchPat::Cons(head, tail)
            }
            Tok::LParen => {
                self.bump();
                let head = self.binder()?;
                self.expect(Tok::ColonColon)?;
                let tail = self.binder()?;
                self.expect(Tok::RParen)?;
                BranchPat::Cons(head, tail)
            }
            other => return self.error(format!("expected a branch pattern, found {}", other.describe())),
        };
        Ok((pat, span))
    }

    fn branches(&mut self, start: Span, shape: BranchShape, close: Option<Tok>) -> PResult<SurfaceExpr> {
        let mut arms: Vec<(BranchPat, Span, SurfaceExpr)> = Vec::new();
        for k in 0..2 {
            if k == 1 {
                self.expect(Tok::Bar)?;
            }
            let (pat, span) = self.branch_pattern()?;
            self.expect(Tok::Arrow)?;
            let body = self.expr()?;
            arms.push((pat, span, body));
        }
        if let Some(close) = close {
            self.expect(close)?;
        }
        let dup = |span: Span| SyntaxError::Parse {
            message: "duplicate or mismatched branch".into(),
            span,
        };
        let mut it = arms.into_iter();
        let (p1, s1, e1) = it.next().unwrap();
        let (p2, s2, e2) = it.next().unwrap();
        let kind = match shape {
            BranchShape::Flip(target) => {
                let (heads, tails) = match (p1, p2) {
                    (BranchPat::Heads, BranchPat::Tails) => (e1, e2),
                    (BranchPat::Tails, BranchPat::Heads) => (e2, e1),
                    (BranchPat::Heads | BranchPat::Tails, _) => return Err(dup(s2)),
                    _ => return Err(dup(s1)),
                };
                match target {
                    FlipTarget::Literal(p) => SurfaceKind::Flip {
                        p,
                        heads: boxed(heads),
                        tails: boxed(tails),
                    },
                    FlipTarget::Symbolic(scrut) => SurfaceKind::FlipSym {
                        scrut: boxed(scrut),
                        heads: boxed(heads),
                        tails: boxed(tails),
                    },
                }
            }
            BranchShape::Data(scrut) => match (p1, p2) {
                (BranchPat::Nil, BranchPat::Cons(head, tail)) => SurfaceKind::MatchList {
                    scrut: boxed(scrut),
                    nil: boxed(e1),
                    head,
                    tail,
                    cons: boxed(e2),
                },
                (BranchPat::Cons(head, tail), BranchPat::Nil) => SurfaceKind::MatchList {
                    scrut: boxed(scrut),
                    nil: boxed(e2),
                    head,
                    tail,
                    cons: boxed(e1),
                },
                (BranchPat::True, BranchPat::False) => SurfaceKind::MatchBool {
                    scrut: boxed(scrut),
                    on_true: boxed(e1),
                    on_false: boxed(e2),
                },
                (BranchPat::False, BranchPat::True) => SurfaceKind::MatchBool {
                    scrut: boxed(scrut),
                    on_true: boxed(e2),
                    on_false: boxed(e1),
                },
                (BranchPat::Heads | BranchPat::Tails, _) => {
                    return Err(SyntaxError::Parse {
                        message: "coin-flip branches need `match flip`".into(),
                        span: s1,
                    })
                }
                (BranchPat::Nil | BranchPat::Cons(..) | BranchPat::True | BranchPat::False, _) => {
                    return Err(dup(s2))
                }
            },
        };
        Ok(self.finish(kind, start))
    }

    fn cmp(&mut self) -> PResult<SurfaceExpr> {
        let start = self.span();
        let lhs = self.cons()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Gt => CmpOp::Gt,
            Tok::Equals => CmpOp::Eq,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.cons()?;
        Ok(self.finish(SurfaceKind::Cmp(op, boxed(lhs), boxed(rhs)), start))
    }

    fn cons(&mut self) -> PResult<SurfaceExpr> {
        let start = self.span();
        let head = self.app()?;
        if self.eat(&Tok::ColonColon) {
            let tail = self.cons()?;
            Ok(self.finish(SurfaceKind::Cons(boxed(head), boxed(tail)), start))
        } else {
            Ok(head)
        }
    }

    fn at_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::Num { .. } | Tok::True | Tok::False | Tok::LParen | Tok::LBracket
        )
    }

    fn app(&mut self) -> PResult<SurfaceExpr> {
        let start = self.span();
        let f = self.atom()?;
        let mut args = Vec::new();
        while self.at_atom() {
            args.push(self.atom()?);
        }
        if args.is_empty() {
            Ok(f)
        } else {
            Ok(self.finish(SurfaceKind::App(boxed(f), args), start))
        }
    }

    fn atom(&mut self) -> PResult<SurfaceExpr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Ident(_) => {
                let n = self.ident()?;
                Ok(self.finish(SurfaceKind::Var(n), start))
            }
            Tok::Num { .. } => {
                let (value, integral, span) = self.number()?;
                if integral {
                    let n: i64 = num::ToPrimitive::to_i64(&value.to_integer()).ok_or_else(|| {
                        SyntaxError::Parse {
                            message: "integer literal out of range".into(),
                            span,
                        }
                    })?;
                    Ok(self.finish(SurfaceKind::Int(n), start))
                } else if rat::is_probability(&value) {
                    Ok(self.finish(SurfaceKind::Prob(value), start))
                } else {
                    Err(SyntaxError::Parse {
                        message: "probability out of range".into(),
                        span,
                    })
                }
            }
            Tok::True => {
                self.bump();
                Ok(self.finish(SurfaceKind::Bool(true), start))
            }
            Tok::False => {
                self.bump();
                Ok(self.finish(SurfaceKind::Bool(false), start))
            }
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok(self.finish(SurfaceKind::Unit, start));
                }
                let mut e = self.expr()?;
                self.expect(Tok::RParen)?;
                e.span = start.join(self.prev_span());
                Ok(e)
            }
            Tok::LBracket => {
                self.bump();
                if self.eat(&Tok::RBracket) {
                    return Ok(self.finish(SurfaceKind::Nil, start));
                }
                let mut items = vec![self.expr()?];
                while self.eat(&Tok::Semi) {
                    if self.at(&Tok::RBracket) {
                        break;
                    }
                    items.push(self.expr()?);
                }
                self.expect(Tok::RBracket)?;
                Ok(self.finish(SurfaceKind::List(items), start))
            }
            other => self.error(format!("expected an expression, found {}", other.describe())),
        }
    }

    fn type_lit(&mut self) -> PResult<TypeLit> {
        match self.peek().clone() {
            Tok::Prob => {
                self.bump();
                self.expect(Tok::LBrace)?;
                let (heads, _, s1) = self.number()?;
                self.expect(Tok::RBrace)?;
                self.expect(Tok::LBrace)?;
                let (tails, _, s2) = self.number()?;
                self.expect(Tok::RBrace)?;
                for (v, s) in [(&heads, s1), (&tails, s2)] {
                    if *v < rat::zero() {
                        return Err(SyntaxError::Parse {
                            message: "negative annotation".into(),
                            span: s,
                        });
                    }
                }
                Ok(TypeLit::Prob { heads, tails })
            }
            Tok::Ident(s) if s == "unit" => {
                self.bump();
                Ok(TypeLit::Unit)
            }
            Tok::Ident(s) if s == "int" => {
                self.bump();
                Ok(TypeLit::Int)
            }
            Tok::Ident(s) if s == "bool" => {
                self.bump();
                Ok(TypeLit::Bool)
            }
            Tok::Ident(s) if s == "L" => {
                self.bump();
                let per = if self.eat(&Tok::Caret) {
                    let (q, _, span) = self.number()?;
                    if q < rat::zero() {
                        return Err(SyntaxError::Parse {
                            message: "negative annotation".into(),
                            span,
                        });
                    }
                    q
                } else {
                    rat::zero()
                };
                self.expect(Tok::LParen)?;
                let elem = self.type_lit()?;
                self.expect(Tok::RParen)?;
                Ok(TypeLit::List {
                    elem: Box::new(elem),
                    per,
                })
            }
            Tok::LParen => {
                self.bump();
                let t = self.type_lit()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            other => self.error(format!("expected a type, found {}", other.describe())),
        }
    }
}

enum FlipTarget {
    Literal(Rat),
    Symbolic(SurfaceExpr),
}

enum BranchShape {
    Flip(FlipTarget),
    Data(SurfaceExpr),
}

/// Parses a whole program: a sequence of top-level declarations, optionally
/// followed by a final expression. Without a final expression the program
/// denotes its last declaration.
pub fn parse(text: &str) -> Result<SurfaceExpr, SyntaxError> {
    Parser::new(text)?.program()
}

pub fn parse_type_literal(text: &str) -> Result<TypeLit, SyntaxError> {
    let mut p = Parser::new(text)?;
    let t = p.type_lit()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

/// Parses a whitespace-separated sequence of atomic literals, one per
/// argument, such as `0.3 [(); ()]`.
pub fn parse_value_literals(text: &str) -> Result<Vec<SurfaceExpr>, SyntaxError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    while !p.at(&Tok::Eof) {
        out.push(p.atom()?);
    }
    Ok(out)
}
