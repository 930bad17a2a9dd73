//! A direct interpreter for surface syntax, written independently of
//! normalization. Used as an oracle for elaboration.

use std::collections::BTreeMap;
use std::rc::Rc;

use praml_core::potential::{self, AnnType};
use praml_core::rat::{self, Rat};
use praml_core::syntax::{Binder, CmpOp, Name, SurfaceExpr, SurfaceKind};
use praml_core::value::Value;

#[derive(Clone)]
pub enum SVal {
    Unit,
    Nil,
    Cons(Rc<SVal>, Rc<SVal>),
    Int(i64),
    Bool(bool),
    Prob(Rat),
    Clo(Rc<Clo>),
}

pub struct Clo {
    name: Option<Name>,
    params: Vec<Binder>,
    body: SurfaceExpr,
    env: SEnv,
}

pub type SEnv = Rc<BTreeMap<Name, SVal>>;

pub fn from_value(v: &Value) -> SVal {
    match v {
        Value::Unit => SVal::Unit,
        Value::Nil => SVal::Nil,
        Value::Cons(h, t) => SVal::Cons(Rc::new(from_value(h)), Rc::new(from_value(t))),
        Value::Int(k) => SVal::Int(*k),
        Value::Bool(b) => SVal::Bool(*b),
        Value::Prob(p) => SVal::Prob(p.clone()),
        Value::Closure(_) => panic!("closures are not first-order inputs"),
    }
}

pub fn to_value(v: &SVal) -> Option<Value> {
    Some(match v {
        SVal::Unit => Value::Unit,
        SVal::Nil => Value::Nil,
        SVal::Cons(h, t) => Value::Cons(Rc::new(to_value(h)?), Rc::new(to_value(t)?)),
        SVal::Int(k) => Value::Int(*k),
        SVal::Bool(b) => Value::Bool(*b),
        SVal::Prob(p) => Value::Prob(p.clone()),
        SVal::Clo(_) => return None,
    })
}

#[derive(Debug)]
pub enum Stop {
    /// The trace ran out before the program finished.
    Short,
    Impossible,
    Budget,
    Error(String),
}

struct Run<'a> {
    trace: &'a [bool],
    pos: usize,
    cost: Rat,
    prob: Rat,
    steps: usize,
    budget: usize,
}

fn bind(env: &SEnv, b: &Binder, v: SVal) -> SEnv {
    match b {
        Binder::Named(n) => {
            let mut m = (**env).clone();
            m.insert(n.clone(), v);
            Rc::new(m)
        }
        _ => env.clone(),
    }
}

impl Run<'_> {
    fn coin(&mut self, p: &Rat) -> Result<bool, Stop> {
        let heads = *self.trace.get(self.pos).ok_or(Stop::Short)?;
        self.pos += 1;
        let w = if heads { p.clone() } else { rat::one() - p };
        if w == rat::zero() {
            return Err(Stop::Impossible);
        }
        self.prob *= w;
        Ok(heads)
    }

    fn eval(&mut self, env: &SEnv, e: &SurfaceExpr) -> Result<SVal, Stop> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(Stop::Budget);
        }
        let err = |m: &str| Stop::Error(m.to_string());
        Ok(match &e.kind {
            SurfaceKind::Var(x) => env.get(x).cloned().ok_or_else(|| err("unbound"))?,
            SurfaceKind::Unit => SVal::Unit,
            SurfaceKind::Nil => SVal::Nil,
            SurfaceKind::Int(k) => SVal::Int(*k),
            SurfaceKind::Bool(b) => SVal::Bool(*b),
            SurfaceKind::Prob(p) => SVal::Prob(p.clone()),
            SurfaceKind::Tick(q) => {
                self.cost += q;
                SVal::Unit
            }
            SurfaceKind::Cons(a, b) => {
                let a = self.eval(env, a)?;
                let b = self.eval(env, b)?;
                SVal::Cons(Rc::new(a), Rc::new(b))
            }
            SurfaceKind::List(items) => {
                let vals = items.iter().map(|i| self.eval(env, i)).collect::<Result<Vec<_>, _>>()?;
                vals.into_iter().rev().fold(SVal::Nil, |t, h| SVal::Cons(Rc::new(h), Rc::new(t)))
            }
            SurfaceKind::MatchList { scrut, nil, head, tail, cons } => match self.eval(env, scrut)? {
                SVal::Nil => self.eval(env, nil)?,
                SVal::Cons(h, t) => {
                    let env = bind(&bind(env, head, (*h).clone()), tail, (*t).clone());
                    self.eval(&env, cons)?
                }
                _ => return Err(err("match on non-list")),
            },
            SurfaceKind::MatchBool { scrut, on_true, on_false } | SurfaceKind::If(scrut, on_true, on_false) => {
                match self.eval(env, scrut)? {
                    SVal::Bool(true) => self.eval(env, on_true)?,
                    SVal::Bool(false) => self.eval(env, on_false)?,
                    _ => return Err(err("condition is not a bool")),
                }
            }
            SurfaceKind::Fun { name, params, body } => SVal::Clo(Rc::new(Clo {
                name: name.clone(),
                params: params.clone(),
                body: (**body).clone(),
                env: env.clone(),
            })),
            SurfaceKind::App(f, args) => {
                let f = self.eval(env, f)?;
                let args = args.iter().map(|a| self.eval(env, a)).collect::<Result<Vec<_>, _>>()?;
                self.apply(f, args)?
            }
            SurfaceKind::Let { binder, def, body } => {
                let v = self.eval(env, def)?;
                self.eval(&bind(env, binder, v), body)?
            }
            SurfaceKind::Flip { p, heads, tails } => {
                if self.coin(p)? {
                    self.eval(env, heads)?
                } else {
                    self.eval(env, tails)?
                }
            }
            SurfaceKind::FlipSym { scrut, heads, tails } => {
                let SVal::Prob(p) = self.eval(env, scrut)? else {
                    return Err(err("flip on non-probability"));
                };
                if self.coin(&p)? {
                    self.eval(env, heads)?
                } else {
                    self.eval(env, tails)?
                }
            }
            SurfaceKind::Consume { var, ty } => {
                let v = env.get(var).and_then(to_value).ok_or_else(|| err("bad consume"))?;
                self.cost += potential::phi(&v, &AnnType::from_literal(ty)).map_err(|e| Stop::Error(e.to_string()))?;
                SVal::Unit
            }
            SurfaceKind::Cmp(op, a, b) => {
                let a = self.eval(env, a)?;
                let b = self.eval(env, b)?;
                let (SVal::Int(a), SVal::Int(b)) = (a, b) else {
                    return Err(err("comparison of non-integers"));
                };
                SVal::Bool(match op {
                    CmpOp::Lt => a < b,
                    CmpOp::Gt => a > b,
                    CmpOp::Eq => a == b,
                })
            }
            SurfaceKind::Share { src, left, right, body } => {
                let v = env.get(src).cloned().ok_or_else(|| err("unbound"))?;
                let mut m = (**env).clone();
                m.insert(left.clone(), v.clone());
                m.insert(right.clone(), v);
                self.eval(&Rc::new(m), body)?
            }
        })
    }

    fn apply(&mut self, f: SVal, args: Vec<SVal>) -> Result<SVal, Stop> {
        let SVal::Clo(c) = f else {
            return Err(Stop::Error("application of a non-function".into()));
        };
        if c.params.len() != args.len() {
            return Err(Stop::Error("arity mismatch".into()));
        }
        let mut env = c.env.clone();
        if let Some(n) = &c.name {
            env = bind(&env, &Binder::Named(n.clone()), SVal::Clo(c.clone()));
        }
        for (p, a) in c.params.iter().zip(args) {
            env = bind(&env, p, a);
        }
        self.eval(&env, &c.body)
    }
}

/// Runs `program` applied to `args` along the trace `trace` (true is heads).
/// Returns the result, cost and probability when the trace is consumed exactly.
pub fn run(program: &SurfaceExpr, args: &[Value], trace: &[bool], budget: usize) -> Result<(Value, Rat, Rat), Stop> {
    let mut r = Run {
        trace,
        pos: 0,
        cost: rat::zero(),
        prob: rat::one(),
        steps: 0,
        budget,
    };
    let empty: SEnv = Rc::new(BTreeMap::new());
    let f = r.eval(&empty, program)?;
    let v = if args.is_empty() && !matches!(f, SVal::Clo(_)) {
        f
    } else {
        r.apply(f, args.iter().map(from_value).collect())?
    };
    if r.pos != trace.len() {
        return Err(Stop::Error("trace too long".into()));
    }
    let v = to_value(&v).ok_or_else(|| Stop::Error("higher-order result".into()))?;
    Ok((v, r.cost, r.prob))
}

/// Distribution over (value, cost) of terminating runs with traces of length
/// at most `max_len`.
pub fn enumerate(program: &SurfaceExpr, args: &[Value], max_len: usize, budget: usize) -> BTreeMap<(Value, Rat), Rat> {
    let mut out: BTreeMap<(Value, Rat), Rat> = BTreeMap::new();
    let mut stack: Vec<Vec<bool>> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        match run(program, args, &prefix, budget) {
            Ok((v, c, p)) => *out.entry((v, c)).or_insert_with(rat::zero) += p,
            Err(Stop::Short) if prefix.len() < max_len => {
                for c in [false, true] {
                    let mut next = prefix.clone();
                    next.push(c);
                    stack.push(next);
                }
            }
            Err(Stop::Error(m)) => panic!("surface runtime error: {m}"),
            Err(_) => {}
        }
    }
    out
}
