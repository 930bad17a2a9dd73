//! Symbolic expected-cost bounds read off solved argument types.

use std::fmt;

use serde::Serialize;

use crate::potential::{AnnType, PotentialError};
use crate::rat::{self, Rat};
use crate::value::Value;

/// What a term measures at its path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Measure {
    /// Length of each list at the path.
    Length,
    /// Each probability `p` at the path.
    Heads,
    /// Each complement `1 - p` at the path.
    Tails,
}

/// `coeff` times the sum of `measure` over all values reached from argument
/// `arg` by descending `depth` times into list elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Term {
    pub arg: usize,
    pub name: String,
    pub depth: usize,
    pub measure: Measure,
    #[serde(serialize_with = "ser_rat")]
    pub coeff: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundExpr {
    #[serde(serialize_with = "ser_rat")]
    pub constant: Rat,
    pub terms: Vec<Term>,
    /// Number of arguments; decides whether sums name their argument.
    pub arity: usize,
}

fn ser_rat<S: serde::Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rat::render(r))
}

fn collect(t: &AnnType, arg: usize, name: &str, depth: usize, out: &mut Vec<Term>) -> Result<(), PotentialError> {
    let mut push = |measure, coeff: &Rat| {
        if *coeff != rat::zero() {
            out.push(Term {
                arg,
                name: name.to_string(),
                depth,
                measure,
                coeff: coeff.clone(),
            });
        }
    };
    match t {
        AnnType::Prob { heads, tails } => {
            push(Measure::Heads, heads.concrete()?);
            push(Measure::Tails, tails.concrete()?);
        }
        AnnType::List { elem, per } => {
            push(Measure::Length, per.concrete()?);
            collect(elem, arg, name, depth + 1, out)?;
        }
        _ => {}
    }
    Ok(())
}

/// Reads a bound off solved argument types and a constant potential.
pub fn extract(args: &[(String, AnnType)], constant: &Rat) -> Result<BoundExpr, PotentialError> {
    let mut terms = Vec::new();
    for (i, (name, t)) in args.iter().enumerate() {
        collect(t, i, name, 0, &mut terms)?;
    }
    Ok(BoundExpr {
        constant: constant.clone(),
        terms,
        arity: args.len(),
    })
}

fn at_depth<'v>(v: &'v Value, depth: usize, out: &mut Vec<&'v Value>) -> Result<(), String> {
    if depth == 0 {
        out.push(v);
        return Ok(());
    }
    let items = v.list_items().ok_or_else(|| format!("`{v}` is not a list"))?;
    for item in items {
        at_depth(item, depth - 1, out)?;
    }
    Ok(())
}

/// Evaluates the bound on concrete arguments.
pub fn evaluate(b: &BoundExpr, args: &[Value]) -> Result<Rat, String> {
    if args.len() != b.arity {
        return Err(format!("expected {} argument(s), got {}", b.arity, args.len()));
    }
    let mut total = b.constant.clone();
    for term in &b.terms {
        let mut vals = Vec::new();
        at_depth(&args[term.arg], term.depth, &mut vals)?;
        for v in vals {
            let m = match (term.measure, v) {
                (Measure::Length, _) => rat::int(v.list_len().ok_or_else(|| format!("`{v}` is not a list"))? as i64),
                (Measure::Heads, Value::Prob(p)) => p.clone(),
                (Measure::Tails, Value::Prob(p)) => rat::one() - p,
                _ => return Err(format!("`{v}` is not a probability")),
            };
            total += &term.coeff * m;
        }
    }
    Ok(total)
}

fn scaled(coeff: &Rat, body: &str) -> String {
    if *coeff == rat::one() {
        body.to_string()
    } else {
        format!("{}·{body}", rat::render(coeff))
    }
}

impl Term {
    fn render(&self, arity: usize) -> String {
        let idx = "ijklmn".chars().take(self.depth).collect::<String>();
        let elem = |base: &str| {
            if self.depth == 0 {
                base.to_string()
            } else {
                format!("{base}_{idx}")
            }
        };
        let body = match self.measure {
            Measure::Length => scaled(&self.coeff, &format!("|{}|", elem(&self.name))),
            Measure::Heads if self.depth == 0 => scaled(&self.coeff, &self.name),
            Measure::Tails if self.depth == 0 => scaled(&self.coeff, &format!("(1-{})", self.name)),
            Measure::Heads => scaled(&self.coeff, &elem("p")),
            Measure::Tails => scaled(&self.coeff, &format!("(1-{})", elem("p"))),
        };
        if self.depth == 0 {
            body
        } else if arity > 1 {
            format!("Σ_{} {body}", self.name)
        } else {
            format!("Σ {body}")
        }
    }
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.terms.iter().map(|t| t.render(self.arity)).collect();
        if self.constant != rat::zero() || parts.is_empty() {
            parts.push(rat::render_with_decimal(&self.constant));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl BoundExpr {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "text": self.to_string(),
            "constant": rat::render(&self.constant),
            "terms": self.terms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::int;

    #[test]
    fn render_examples() {
        let l = |t: AnnType| vec![("l".to_string(), t)];
        let b = extract(&l(AnnType::list(AnnType::Unit, int(2))), &int(0)).unwrap();
        assert_eq!(b.to_string(), "2·|l|");
        let b = extract(&l(AnnType::list(AnnType::prob(int(5), int(0)), int(1))), &int(0)).unwrap();
        assert_eq!(b.to_string(), "|l| + Σ 5·p_i");
        let b = extract(&l(AnnType::list(AnnType::Unit, int(0))), &int(1)).unwrap();
        assert_eq!(b.to_string(), "1");
    }
}
