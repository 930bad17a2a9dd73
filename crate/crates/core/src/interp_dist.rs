//! Depth-indexed distribution semantics, with and without the divergence
//! token, plus the orders on distributions and the expected-cost functional.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::potential::{self, AnnType, Pot, PotentialError};
use crate::rat::{self, Rat};
use crate::syntax::{CoreExpr, Kind};
use crate::value::{self, Env, Value};

/// Result of an execution: a value or the divergence token `∘`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Diverge,
    Value(Value),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Diverge => write!(f, "∘"),
            Outcome::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cost {
    Finite(Rat),
    Infinite,
}

impl Cost {
    pub fn zero() -> Cost {
        Cost::Finite(rat::zero())
    }

    pub fn add(&self, other: &Cost) -> Cost {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(q) => write!(f, "{}", rat::render(q)),
            Cost::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DistKind {
    /// Sub-probability distribution over values.
    Sub,
    /// Full distribution that may put mass on `∘`.
    Full,
}

/// Finite map from (outcome, cost) to positive probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostDist {
    kind: DistKind,
    entries: BTreeMap<(Outcome, Cost), Rat>,
}

impl CostDist {
    pub fn zero(kind: DistKind) -> Self {
        CostDist {
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn dirac(kind: DistKind, outcome: Outcome, cost: Cost) -> Self {
        let mut d = CostDist::zero(kind);
        d.add(outcome, cost, rat::one());
        d
    }

    /// The bottom element for the given kind: `0` or `δ(∘, 0)`.
    pub fn bottom(kind: DistKind) -> Self {
        match kind {
            DistKind::Sub => CostDist::zero(kind),
            DistKind::Full => CostDist::dirac(kind, Outcome::Diverge, Cost::zero()),
        }
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    /// Adds probability mass. Zero mass is ignored.
    pub fn add(&mut self, outcome: Outcome, cost: Cost, p: Rat) {
        if p == rat::zero() {
            return;
        }
        assert!(
            self.kind == DistKind::Full || (outcome != Outcome::Diverge && cost != Cost::Infinite),
            "sub-probability distributions hold values at finite cost only"
        );
        *self.entries.entry((outcome, cost)).or_insert_with(rat::zero) += p;
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Outcome, &Cost, &Rat)> {
        self.entries.iter().map(|((o, c), p)| (o, c, p))
    }

    pub fn get(&self, outcome: &Outcome, cost: &Cost) -> Rat {
        self.entries
            .get(&(outcome.clone(), cost.clone()))
            .cloned()
            .unwrap_or_else(rat::zero)
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass(&self) -> Rat {
        self.entries.values().sum()
    }

    pub fn diverge_mass(&self) -> Rat {
        self.entries
            .iter()
            .filter(|((o, _), _)| *o == Outcome::Diverge)
            .map(|(_, p)| p)
            .sum()
    }

    /// Adds `p · other` into `self`.
    pub fn add_scaled(&mut self, other: &CostDist, p: &Rat) {
        for ((o, c), q) in &other.entries {
            self.add(o.clone(), c.clone(), p * q);
        }
    }

    /// The value part as a sub-probability distribution.
    pub fn restrict_values(&self) -> CostDist {
        let mut out = CostDist::zero(DistKind::Sub);
        for ((o, c), p) in &self.entries {
            if *o != Outcome::Diverge && *c != Cost::Infinite {
                out.add(o.clone(), c.clone(), p.clone());
            }
        }
        out
    }

    /// Expected cost over all entries; `None` if some cost is infinite.
    pub fn expected_cost(&self) -> Option<Rat> {
        let mut total = rat::zero();
        for ((_, c), p) in &self.entries {
            match c {
                Cost::Finite(q) => total += p * q,
                Cost::Infinite => return None,
            }
        }
        Some(total)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|((o, c), p)| {
                serde_json::json!({
                    "value": o.to_string(),
                    "cost": c.to_string(),
                    "prob": rat::render(p),
                })
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

/// μ1 ≤ μ2 pointwise.
pub fn leq_pointwise(a: &CostDist, b: &CostDist) -> bool {
    a.entries.iter().all(|(k, p)| b.entries.get(k).is_some_and(|q| p <= q))
}

/// μ1 ⊑ μ2: value entries grow pointwise and, for every cost threshold, the
/// mass at or below it shrinks.
pub fn sq_leq(a: &CostDist, b: &CostDist) -> bool {
    let values_grow = a
        .entries
        .iter()
        .filter(|((o, _), _)| *o != Outcome::Diverge)
        .all(|(k, p)| b.entries.get(k).is_some_and(|q| p <= q));
    if !values_grow {
        return false;
    }
    let thresholds: BTreeSet<&Cost> = a.entries.keys().chain(b.entries.keys()).map(|(_, c)| c).collect();
    let below = |d: &CostDist, t: &Cost| -> Rat { d.entries.iter().filter(|((_, c), _)| c <= t).map(|(_, p)| p).sum() };
    thresholds
        .into_iter()
        .chain(std::iter::once(&Cost::Infinite))
        .all(|t| below(a, t) >= below(b, t))
}

/// h(μ) = Σ μ(∘,q)·q + Σ μ(v,q)·(Φ(v:A) + q). `None` stands for +∞.
pub fn expected_h(mu: &CostDist, result: &Pot) -> Result<Option<Rat>, PotentialError> {
    let mut total = rat::zero();
    for ((o, c), p) in &mu.entries {
        let Cost::Finite(q) = c else { return Ok(None) };
        total += p * q;
        if let Outcome::Value(v) = o {
            total += p * potential::phi_pot(v, result)?;
        }
    }
    Ok(Some(total))
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DistError {
    #[error("runtime error: {0}")]
    Runtime(String),
}

/// Evaluates at the given depth, producing a sub-probability distribution.
pub fn eval_dist(env: &Env, e: &CoreExpr, depth: usize) -> Result<CostDist, DistError> {
    Evaluator { kind: DistKind::Sub }.eval(env, e, depth)
}

/// Evaluates at the given depth, producing a full distribution in which
/// unfinished evaluations are recorded as `∘`.
pub fn eval_partial_dist(env: &Env, e: &CoreExpr, depth: usize) -> Result<CostDist, DistError> {
    Evaluator { kind: DistKind::Full }.eval(env, e, depth)
}

struct Evaluator {
    kind: DistKind,
}

fn lookup<'a>(env: &'a Env, x: &str) -> Result<&'a Value, DistError> {
    env.get(x)
        .ok_or_else(|| DistError::Runtime(format!("unbound variable `{x}`")))
}

impl Evaluator {
    fn leaf(&self, v: Value, cost: Rat) -> CostDist {
        CostDist::dirac(self.kind, Outcome::Value(v), Cost::Finite(cost))
    }

    fn branch(&self, env: &Env, p: &Rat, heads: &CoreExpr, tails: &CoreExpr, n: usize) -> Result<CostDist, DistError> {
        let mut out = CostDist::zero(self.kind);
        let q = rat::one() - p;
        if *p != rat::zero() {
            out.add_scaled(&self.eval(env, heads, n)?, p);
        }
        if q != rat::zero() {
            out.add_scaled(&self.eval(env, tails, n)?, &q);
        }
        Ok(out)
    }

    fn eval(&self, env: &Env, e: &CoreExpr, depth: usize) -> Result<CostDist, DistError> {
        if depth == 0 {
            return Ok(CostDist::bottom(self.kind));
        }
        let n = depth - 1;
        let rt = DistError::Runtime;
        Ok(match &e.kind {
            Kind::Var(x) => self.leaf(lookup(env, x)?.clone(), rat::zero()),
            Kind::Unit => self.leaf(Value::Unit, rat::zero()),
            Kind::Nil => self.leaf(Value::Nil, rat::zero()),
            Kind::Int(k) => self.leaf(Value::Int(*k), rat::zero()),
            Kind::Bool(b) => self.leaf(Value::Bool(*b), rat::zero()),
            Kind::Prob(p) => self.leaf(Value::Prob(p.clone()), rat::zero()),
            Kind::Tick(q) => self.leaf(Value::Unit, q.clone()),
            Kind::Cons(a, b) => {
                let v = Value::Cons(lookup(env, a)?.clone().into(), lookup(env, b)?.clone().into());
                self.leaf(v, rat::zero())
            }
            Kind::Fun(fd) => self.leaf(value::make_closure(e.id, fd, env).map_err(rt)?, rat::zero()),
            Kind::Consume { var, ty } => {
                let v = lookup(env, var)?;
                let cost = potential::phi(v, &AnnType::from_literal(ty)).map_err(|err| rt(err.to_string()))?;
                self.leaf(Value::Unit, cost)
            }
            Kind::Cmp { op, lhs, rhs } => {
                let b = value::compare(*op, lookup(env, lhs)?, lookup(env, rhs)?).map_err(rt)?;
                self.leaf(Value::Bool(b), rat::zero())
            }
            Kind::MatchList {
                scrut,
                nil,
                head,
                tail,
                cons,
            } => match lookup(env, scrut)? {
                Value::Nil => self.eval(env, nil, n)?,
                Value::Cons(h, t) => {
                    let env = env.bind(head.clone(), (**h).clone()).bind(tail.clone(), (**t).clone());
                    self.eval(&env, cons, n)?
                }
                v => return Err(rt(format!("match on non-list `{v}`"))),
            },
            Kind::If {
                cond,
                then_branch,
                else_branch,
            } => match lookup(env, cond)? {
                Value::Bool(true) => self.eval(env, then_branch, n)?,
                Value::Bool(false) => self.eval(env, else_branch, n)?,
                v => return Err(rt(format!("condition is not a bool: `{v}`"))),
            },
            Kind::App { func, args } => {
                let callee = lookup(env, func)?;
                let args = args.iter().map(|a| lookup(env, a).cloned()).collect::<Result<Vec<_>, _>>()?;
                let (body_env, fd) = value::enter(callee, args).map_err(rt)?;
                self.eval(&body_env, &fd.body, n)?
            }
            Kind::Share {
                src,
                left,
                right,
                body,
            } => {
                let v = lookup(env, src)?.clone();
                let env = env.bind(left.clone(), v.clone()).bind(right.clone(), v);
                self.eval(&env, body, n)?
            }
            Kind::Flip { p, heads, tails } => self.branch(env, p, heads, tails, n)?,
            Kind::FlipSym { scrut, heads, tails } => match lookup(env, scrut)? {
                Value::Prob(p) => {
                    let p = p.clone();
                    self.branch(env, &p, heads, tails, n)?
                }
                v => return Err(rt(format!("flip on non-probability `{v}`"))),
            },
            Kind::Let { name, def, body } => {
                let first = self.eval(env, def, n)?;
                let mut out = CostDist::zero(self.kind);
                let mut cache: BTreeMap<&Value, CostDist> = BTreeMap::new();
                for ((o1, c1), p1) in &first.entries {
                    let Outcome::Value(v1) = o1 else {
                        out.add(Outcome::Diverge, c1.clone(), p1.clone());
                        continue;
                    };
                    if !cache.contains_key(v1) {
                        let inner = self.eval(&env.bind(name.clone(), v1.clone()), body, n)?;
                        cache.insert(v1, inner);
                    }
                    for ((o2, c2), p2) in &cache[v1].entries {
                        out.add(o2.clone(), c1.add(c2), p1 * p2);
                    }
                }
                out
            }
        })
    }
}
