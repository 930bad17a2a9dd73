//! Plain-text LP dump.
//!
//! ```text
//! minimize
//!   obj: + 1 x0 + 1/2 x1
//! subject to
//!   c0 "L:Tick @3:9": + 1 x0 - 1 x1 >= 1
//! bounds
//!   x0 >= 0
//!   x1 >= 0
//! variables
//!   x0 "arg.q"
//!   x1 "ret.q"
//! end
//! ```
//!
//! Coefficients are exact rationals written `a/b`.

use std::fmt::Write as _;

use num::{BigInt, Signed, Zero};

use crate::expr::{Constraint, LinExpr, Rat, Relation, VarId};
use crate::LinearProgram;

pub fn render_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn render_terms(e: &LinExpr) -> String {
    let mut out = String::new();
    for (v, c) in e.terms() {
        if !out.is_empty() {
            out.push(' ');
        }
        let sign = if c.is_negative() { '-' } else { '+' };
        let _ = write!(out, "{sign} {} {v}", render_rat(&c.abs()));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn write_lp(lp: &LinearProgram) -> String {
    let mut out = String::from("minimize\n");
    let _ = writeln!(out, "  obj: {}", render_terms(lp.objective()));
    out.push_str("subject to\n");
    for (i, c) in lp.constraints().iter().enumerate() {
        let _ = writeln!(
            out,
            "  c{i} {}: {} {} {}",
            quote(&c.tag),
            render_terms(&c.coeffs),
            c.relation.symbol(),
            render_rat(&c.rhs)
        );
    }
    out.push_str("bounds\n");
    for i in 0..lp.num_vars() {
        let _ = writeln!(out, "  {} >= 0", VarId(i));
    }
    out.push_str("variables\n");
    for (i, name) in lp.names().iter().enumerate() {
        let _ = writeln!(out, "  {} {}", VarId(i), quote(name));
    }
    out.push_str("end\n");
    out
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Tok>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&ch) = chars.peek() {
        if ch.is_whitespace() {
            chars.next();
        } else if ch == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    Some('\\') => match chars.next() {
                        Some(c) => s.push(c),
                        None => break,
                    },
                    Some('"') => {
                        toks.push(Tok::Quoted(s));
                        break;
                    }
                    Some(c) => s.push(c),
                    None => {
                        return Err(ParseError {
                            line: lineno,
                            message: "unterminated string".into(),
                        })
                    }
                }
            }
        } else {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() || c == '"' {
                    break;
                }
                s.push(c);
                chars.next();
            }
            toks.push(Tok::Word(s));
        }
    }
    Ok(toks)
}

fn parse_rat(s: &str, line: usize) -> Result<Rat, ParseError> {
    let err = || ParseError {
        line,
        message: format!("bad rational `{s}`"),
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().map_err(|_| err())?;
            let d: BigInt = d.parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(Rat::new(n, d))
        }
        None => Ok(Rat::from_integer(s.parse().map_err(|_| err())?)),
    }
}

fn parse_var(s: &str, line: usize) -> Result<VarId, ParseError> {
    s.strip_prefix('x')
        .and_then(|d| d.parse().ok())
        .map(VarId)
        .ok_or_else(|| ParseError {
            line,
            message: format!("bad variable `{s}`"),
        })
}

fn parse_terms(words: &[&str], line: usize) -> Result<LinExpr, ParseError> {
    let mut e = LinExpr::zero();
    if words == ["0"] {
        return Ok(e);
    }
    if !words.len().is_multiple_of(3) {
        return Err(ParseError {
            line,
            message: "expected `± coeff var` triples".into(),
        });
    }
    for t in words.chunks(3) {
        let c = parse_rat(t[1], line)?;
        let c = match t[0] {
            "+" => c,
            "-" => -c,
            other => {
                return Err(ParseError {
                    line,
                    message: format!("expected sign, found `{other}`"),
                })
            }
        };
        e.add_term(parse_var(t[2], line)?, c);
    }
    Ok(e)
}

pub fn read_lp(text: &str) -> Result<LinearProgram, ParseError> {
    #[derive(PartialEq)]
    enum Section {
        Start,
        Objective,
        Rows,
        Bounds,
        Vars,
        End,
    }
    let mut section = Section::Start;
    let mut objective = LinExpr::zero();
    let mut rows = Vec::new();
    let mut names: Vec<(VarId, String)> = Vec::new();
    let mut max_var = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('\\') {
            continue;
        }
        match trimmed {
            "minimize" => {
                section = Section::Objective;
                continue;
            }
            "subject to" => {
                section = Section::Rows;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "variables" => {
                section = Section::Vars;
                continue;
            }
            "end" => {
                section = Section::End;
                continue;
            }
            _ => {}
        }
        let toks = tokenize(trimmed, line)?;
        match section {
            Section::Objective => {
                let words: Vec<&str> = toks
                    .iter()
                    .filter_map(|t| match t {
                        Tok::Word(w) => Some(w.as_str()),
                        Tok::Quoted(_) => None,
                    })
                    .collect();
                if words.first() != Some(&"obj:") {
                    return Err(ParseError {
                        line,
                        message: "expected `obj:`".into(),
                    });
                }
                objective = parse_terms(&words[1..], line)?;
            }
            Section::Rows => {
                let (tag, rest) = match toks.as_slice() {
                    [Tok::Word(_), Tok::Quoted(tag), rest @ ..] => (tag.clone(), rest),
                    _ => {
                        return Err(ParseError {
                            line,
                            message: "expected `cN \"tag\":`".into(),
                        })
                    }
                };
                let words: Vec<&str> = rest
                    .iter()
                    .map(|t| match t {
                        Tok::Word(w) | Tok::Quoted(w) => w.as_str(),
                    })
                    .collect();
                if words.first() != Some(&":") || words.len() < 4 {
                    return Err(ParseError {
                        line,
                        message: "malformed constraint".into(),
                    });
                }
                let n = words.len();
                let relation = match words[n - 2] {
                    ">=" => Relation::Ge,
                    "<=" => Relation::Le,
                    "=" => Relation::Eq,
                    other => {
                        return Err(ParseError {
                            line,
                            message: format!("bad relation `{other}`"),
                        })
                    }
                };
                let coeffs = parse_terms(&words[1..n - 2], line)?;
                let rhs = parse_rat(words[n - 1], line)?;
                for v in coeffs.vars() {
                    max_var = max_var.max(v.0 + 1);
                }
                rows.push(Constraint {
                    coeffs,
                    relation,
                    rhs,
                    tag,
                });
            }
            Section::Bounds => {
                if let Some(Tok::Word(w)) = toks.first() {
                    max_var = max_var.max(parse_var(w, line)?.0 + 1);
                }
            }
            Section::Vars => match toks.as_slice() {
                [Tok::Word(w), Tok::Quoted(name)] => {
                    let v = parse_var(w, line)?;
                    max_var = max_var.max(v.0 + 1);
                    names.push((v, name.clone()));
                }
                _ => {
                    return Err(ParseError {
                        line,
                        message: "expected `xN \"name\"`".into(),
                    })
                }
            },
            Section::Start | Section::End => {
                return Err(ParseError {
                    line,
                    message: "content outside of a section".into(),
                })
            }
        }
    }
    for v in objective.vars() {
        max_var = max_var.max(v.0 + 1);
    }
    let mut lp = LinearProgram::new();
    let mut slot_names: Vec<String> = (0..max_var).map(|i| format!("x{i}")).collect();
    for (v, n) in names {
        slot_names[v.0] = n;
    }
    for n in slot_names {
        lp.add_var(n);
    }
    for r in rows {
        lp.add_constraint(r);
    }
    lp.set_objective(objective);
    Ok(lp)
}
