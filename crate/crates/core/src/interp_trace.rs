//! Trace-based cost semantics: replaying a coin-flip trace, sampling, and
//! enumerating all traces up to a length bound.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::interp_dist::{Cost, CostDist, DistKind, Outcome};
use crate::potential::{self, AnnType};
use crate::rat::{self, Rat};
use crate::syntax::{CoreExpr, Kind};
use crate::value::{self, Env, Value};

pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Coin {
    H,
    T,
}

pub type Trace = Vec<Coin>;

pub fn render_trace(t: &[Coin]) -> String {
    t.iter().map(|c| if *c == Coin::H { 'H' } else { 'T' }).collect()
}

pub fn parse_trace(text: &str) -> Option<Trace> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            'H' => Some(Coin::H),
            'T' => Some(Coin::T),
            _ => None,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub value: Value,
    pub cost: Rat,
    pub prob: Rat,
    pub trace: Trace,
}

impl fmt::Display for RunResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | cost {} | prob {} | trace {}",
            self.value,
            rat::render(&self.cost),
            rat::render(&self.prob),
            render_trace(&self.trace)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("trace not consumed exactly: trace too short")]
    TooShort,
    #[error("trace not consumed exactly: {0} coin(s) left over")]
    TooLong(usize),
    #[error("trace takes a branch of probability zero")]
    Impossible,
    #[error("possibly divergent: step budget of {0} exhausted")]
    Budget(usize),
    #[error("runtime error: {0}")]
    Runtime(String),
}

/// Callbacks for branch profiling.
pub trait Observer {
    /// A conditional at `site` took its then-branch (`taken`) or not. `size`
    /// is the length of the nearest enclosing list scrutinee.
    fn on_if(&mut self, site: &CoreExpr, taken: bool, size: Option<usize>);
}

enum Coins<'a> {
    Replay { trace: &'a [Coin], pos: usize },
    Sample(&'a mut dyn rand::RngCore),
}

struct Machine<'a> {
    coins: Coins<'a>,
    steps: usize,
    budget: usize,
    cost: Rat,
    prob: Rat,
    trace: Trace,
    observer: Option<&'a mut dyn Observer>,
    sizes: Vec<usize>,
}

fn lookup<'e>(env: &'e Env, x: &str) -> Result<&'e Value, TraceError> {
    env.get(x)
        .ok_or_else(|| TraceError::Runtime(format!("unbound variable `{x}`")))
}

impl Machine<'_> {
    fn coin(&mut self, p: &Rat) -> Result<Coin, TraceError> {
        let c = match &mut self.coins {
            Coins::Replay { trace, pos } => {
                let c = *trace.get(*pos).ok_or(TraceError::TooShort)?;
                *pos += 1;
                c
            }
            Coins::Sample(rng) => {
                let numer = p.numer().to_string().parse::<u128>();
                let denom = p.denom().to_string().parse::<u128>();
                let heads = match (numer, denom) {
                    (Ok(n), Ok(d)) => rng.gen_range(0..d) < n,
                    _ => rng.gen_bool(rat::to_f64(p)),
                };
                if heads {
                    Coin::H
                } else {
                    Coin::T
                }
            }
        };
        let w = match c {
            Coin::H => p.clone(),
            Coin::T => rat::one() - p,
        };
        if w == rat::zero() {
            return Err(TraceError::Impossible);
        }
        self.prob *= w;
        self.trace.push(c);
        Ok(c)
    }

    fn eval(&mut self, env: &Env, e: &CoreExpr) -> Result<Value, TraceError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(TraceError::Budget(self.budget));
        }
        let rt = TraceError::Runtime;
        Ok(match &e.kind {
            Kind::Var(x) => lookup(env, x)?.clone(),
            Kind::Unit => Value::Unit,
            Kind::Nil => Value::Nil,
            Kind::Int(k) => Value::Int(*k),
            Kind::Bool(b) => Value::Bool(*b),
            Kind::Prob(p) => Value::Prob(p.clone()),
            Kind::Tick(q) => {
                self.cost += q;
                Value::Unit
            }
            Kind::Cons(a, b) => Value::Cons(lookup(env, a)?.clone().into(), lookup(env, b)?.clone().into()),
            Kind::Fun(fd) => value::make_closure(e.id, fd, env).map_err(rt)?,
            Kind::Consume { var, ty } => {
                let v = lookup(env, var)?;
                self.cost += potential::phi(v, &AnnType::from_literal(ty)).map_err(|err| rt(err.to_string()))?;
                Value::Unit
            }
            Kind::Cmp { op, lhs, rhs } => {
                Value::Bool(value::compare(*op, lookup(env, lhs)?, lookup(env, rhs)?).map_err(rt)?)
            }
            Kind::MatchList {
                scrut,
                nil,
                head,
                tail,
                cons,
            } => {
                let v = lookup(env, scrut)?.clone();
                let tracking = self.observer.is_some();
                if tracking {
                    self.sizes.push(v.list_len().unwrap_or(0));
                }
                let out = match &v {
                    Value::Nil => self.eval(env, nil),
                    Value::Cons(h, t) => {
                        let env = env.bind(head.clone(), (**h).clone()).bind(tail.clone(), (**t).clone());
                        self.eval(&env, cons)
                    }
                    v => Err(rt(format!("match on non-list `{v}`"))),
                };
                if tracking {
                    self.sizes.pop();
                }
                out?
            }
            Kind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let taken = match lookup(env, cond)? {
                    Value::Bool(b) => *b,
                    v => return Err(rt(format!("condition is not a bool: `{v}`"))),
                };
                if let Some(obs) = self.observer.as_deref_mut() {
                    obs.on_if(e, taken, self.sizes.last().copied());
                }
                self.eval(env, if taken { then_branch } else { else_branch })?
            }
            Kind::App { func, args } => {
                let callee = lookup(env, func)?;
                let args = args.iter().map(|a| lookup(env, a).cloned()).collect::<Result<Vec<_>, _>>()?;
                let (body_env, fd) = value::enter(callee, args).map_err(rt)?;
                self.eval(&body_env, &fd.body)?
            }
            Kind::Let { name, def, body } => {
                let v = self.eval(env, def)?;
                self.eval(&env.bind(name.clone(), v), body)?
            }
            Kind::Share {
                src,
                left,
                right,
                body,
            } => {
                let v = lookup(env, src)?.clone();
                let env = env.bind(left.clone(), v.clone()).bind(right.clone(), v);
                self.eval(&env, body)?
            }
            Kind::Flip { p, heads, tails } => match self.coin(p)? {
                Coin::H => self.eval(env, heads)?,
                Coin::T => self.eval(env, tails)?,
            },
            Kind::FlipSym { scrut, heads, tails } => {
                let p = match lookup(env, scrut)? {
                    Value::Prob(p) => p.clone(),
                    v => return Err(rt(format!("flip on non-probability `{v}`"))),
                };
                match self.coin(&p)? {
                    Coin::H => self.eval(env, heads)?,
                    Coin::T => self.eval(env, tails)?,
                }
            }
        })
    }

    fn run(mut self, env: &Env, e: &CoreExpr) -> Result<RunResult, TraceError> {
        let value = self.eval(env, e)?;
        if let Coins::Replay { trace, pos } = &self.coins {
            if *pos < trace.len() {
                return Err(TraceError::TooLong(trace.len() - pos));
            }
        }
        Ok(RunResult {
            value,
            cost: self.cost,
            prob: self.prob,
            trace: self.trace,
        })
    }
}

fn machine<'a>(coins: Coins<'a>, budget: usize, observer: Option<&'a mut dyn Observer>) -> Machine<'a> {
    Machine {
        coins,
        steps: 0,
        budget,
        cost: rat::zero(),
        prob: rat::one(),
        trace: Vec::new(),
        observer,
        sizes: Vec::new(),
    }
}

/// Runs `e` consuming exactly the given trace.
pub fn replay(env: &Env, e: &CoreExpr, trace: &[Coin], budget: usize) -> Result<RunResult, TraceError> {
    machine(Coins::Replay { trace, pos: 0 }, budget, None).run(env, e)
}

/// Runs `e` drawing coins from `rng`.
pub fn sample_with(env: &Env, e: &CoreExpr, rng: &mut dyn rand::RngCore, budget: usize) -> Result<RunResult, TraceError> {
    machine(Coins::Sample(rng), budget, None).run(env, e)
}

/// One sampled run from a fresh generator seeded with `seed`.
pub fn sample(env: &Env, e: &CoreExpr, seed: u64, budget: usize) -> Result<RunResult, TraceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(env, e, &mut rng, budget)
}

/// Runs a deterministic program while reporting conditionals.
pub fn observe(env: &Env, e: &CoreExpr, observer: &mut dyn Observer, budget: usize) -> Result<RunResult, TraceError> {
    machine(Coins::Replay { trace: &[], pos: 0 }, budget, Some(observer)).run(env, e)
}

/// The distribution of terminating executions whose traces have length at
/// most `max_len`. Runs that exhaust the step budget are left out.
pub fn enumerate(env: &Env, e: &CoreExpr, max_len: usize, budget: usize) -> Result<CostDist, TraceError> {
    let mut dist = CostDist::zero(DistKind::Sub);
    let mut stack: Vec<Trace> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        match replay(env, e, &prefix, budget) {
            Ok(r) => dist.add(Outcome::Value(r.value), Cost::Finite(r.cost), r.prob),
            Err(TraceError::TooShort) if prefix.len() < max_len => {
                for c in [Coin::T, Coin::H] {
                    let mut next = prefix.clone();
                    next.push(c);
                    stack.push(next);
                }
            }
            Err(TraceError::Runtime(m)) => return Err(TraceError::Runtime(m)),
            Err(_) => {}
        }
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_text_round_trip() {
        let t = parse_trace("HTTH").unwrap();
        assert_eq!(render_trace(&t), "HTTH");
        assert!(parse_trace("HX").is_none());
    }
}
