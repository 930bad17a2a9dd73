//! Runtime values and evaluation environments.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use crate::rat::{self, Rat};
use crate::syntax::{CmpOp, FunDef, Name, NodeId, SurfaceExpr, SurfaceKind};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Unit,
    Nil,
    Cons(Rc<Value>, Rc<Value>),
    Closure(Rc<Closure>),
    Prob(Rat),
    Int(i64),
    Bool(bool),
}

/// A function value. Two closures are equal when they come from the same
/// function node and captured equal values.
#[derive(Clone, Debug)]
pub struct Closure {
    pub fun_id: NodeId,
    pub fun: Rc<FunDef>,
    pub env: BTreeMap<Name, Value>,
}

impl Closure {
    fn key(&self) -> (NodeId, &BTreeMap<Name, Value>) {
        (self.fun_id, &self.env)
    }
}

impl PartialEq for Closure {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Closure {}

impl PartialOrd for Closure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Closure {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl std::hash::Hash for Closure {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.fun_id.hash(state);
        self.env.hash(state);
    }
}

impl Value {
    pub fn list(items: impl IntoIterator<Item = Value>) -> Value {
        let items: Vec<Value> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .fold(Value::Nil, |tail, head| Value::Cons(Rc::new(head), Rc::new(tail)))
    }

    pub fn unit_list(n: usize) -> Value {
        Value::list(std::iter::repeat_n(Value::Unit, n))
    }

    /// Elements of a proper list, or `None` for non-lists.
    pub fn list_items(&self) -> Option<Vec<&Value>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Value::Nil => return Some(out),
                Value::Cons(h, t) => {
                    out.push(&**h);
                    cur = t;
                }
                _ => return None,
            }
        }
    }

    pub fn list_len(&self) -> Option<usize> {
        self.list_items().map(|v| v.len())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => write!(f, "()"),
            Value::Nil => write!(f, "[]"),
            Value::Cons(..) => match self.list_items() {
                Some(items) => {
                    write!(f, "[")?;
                    for (i, v) in items.iter().enumerate() {
                        if i > 0 {
                            write!(f, "; ")?;
                        }
                        write!(f, "{v}")?;
                    }
                    write!(f, "]")
                }
                None => {
                    let Value::Cons(h, t) = self else { unreachable!() };
                    write!(f, "({h} :: {t})")
                }
            },
            Value::Closure(c) => write!(f, "<fun {}>", c.fun.name),
            Value::Prob(p) if p.is_integer() => write!(f, "{}.0", p.to_integer()),
            Value::Prob(p) => write!(f, "{}", rat::render(p)),
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Converts a literal such as `[0.2; 0.4]` or `[(); ()]` to a value.
pub fn literal_value(e: &SurfaceExpr) -> Result<Value, String> {
    Ok(match &e.kind {
        SurfaceKind::Unit => Value::Unit,
        SurfaceKind::Nil => Value::Nil,
        SurfaceKind::Int(n) => Value::Int(*n),
        SurfaceKind::Bool(b) => Value::Bool(*b),
        SurfaceKind::Prob(p) => Value::Prob(p.clone()),
        SurfaceKind::List(items) => Value::list(items.iter().map(literal_value).collect::<Result<Vec<_>, _>>()?),
        SurfaceKind::Cons(h, t) => Value::Cons(Rc::new(literal_value(h)?), Rc::new(literal_value(t)?)),
        _ => return Err(format!("{}: not a value literal", e.span)),
    })
}

/// Parses whitespace-separated value literals.
pub fn parse_values(text: &str) -> Result<Vec<Value>, String> {
    crate::syntax::parse_value_literals(text)
        .map_err(|e| e.to_string())?
        .iter()
        .map(literal_value)
        .collect()
}

/// Builds the closure for a function node evaluated in `env`.
pub fn make_closure(fun_id: NodeId, fun: &Rc<FunDef>, env: &Env) -> Result<Value, String> {
    let mut captured = BTreeMap::new();
    for c in &fun.captures {
        let v = env.get(c).ok_or_else(|| format!("unbound variable `{c}`"))?;
        captured.insert(c.clone(), v.clone());
    }
    Ok(Value::Closure(Rc::new(Closure {
        fun_id,
        fun: fun.clone(),
        env: captured,
    })))
}

/// The environment in which a closure's body runs for the given arguments.
pub fn enter(callee: &Value, args: Vec<Value>) -> Result<(Env, Rc<FunDef>), String> {
    let Value::Closure(c) = callee else {
        return Err(format!("cannot apply non-function `{callee}`"));
    };
    if c.fun.params.len() != args.len() {
        return Err(format!(
            "`{}` expects {} argument(s), got {}",
            c.fun.name,
            c.fun.params.len(),
            args.len()
        ));
    }
    let mut env = Env::from_bindings(c.env.iter().map(|(k, v)| (k.clone(), v.clone())));
    env = env.bind(c.fun.name.clone(), callee.clone());
    for (p, a) in c.fun.params.iter().zip(args) {
        env = env.bind(p.clone(), a);
    }
    Ok((env, c.fun.clone()))
}

pub fn compare(op: CmpOp, a: &Value, b: &Value) -> Result<bool, String> {
    use std::cmp::Ordering::*;
    let ord = match (a, b) {
        (Value::Int(x), Value::Int(y)) => x.cmp(y),
        (Value::Prob(x), Value::Prob(y)) => x.cmp(y),
        _ if op == CmpOp::Eq && std::mem::discriminant(a) == std::mem::discriminant(b) => a.cmp(b),
        (Value::Nil | Value::Cons(..), Value::Nil | Value::Cons(..)) if op == CmpOp::Eq => a.cmp(b),
        _ => return Err(format!("cannot compare `{a}` {} `{b}`", op.symbol())),
    };
    Ok(match op {
        CmpOp::Lt => ord == Less,
        CmpOp::Gt => ord == Greater,
        CmpOp::Eq => ord == Equal,
    })
}

/// Persistent evaluation environment.
#[derive(Clone, Debug, Default)]
pub struct Env(Option<Rc<EnvNode>>);

#[derive(Debug)]
struct EnvNode {
    name: Name,
    value: Value,
    next: Env,
}

impl Env {
    pub fn new() -> Self {
        Env(None)
    }

    pub fn bind(&self, name: Name, value: Value) -> Env {
        Env(Some(Rc::new(EnvNode {
            name,
            value,
            next: self.clone(),
        })))
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if &*node.name == name {
                return Some(&node.value);
            }
            cur = &node.next.0;
        }
        None
    }

    pub fn from_bindings(bindings: impl IntoIterator<Item = (Name, Value)>) -> Env {
        bindings
            .into_iter()
            .fold(Env::new(), |env, (n, v)| env.bind(n, v))
    }

    /// Visible bindings, innermost first, without shadowed duplicates.
    pub fn bindings(&self) -> Vec<(Name, Value)> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        let mut cur = &self.0;
        while let Some(node) = cur {
            if seen.insert(node.name.clone()) {
                out.push((node.name.clone(), node.value.clone()));
            }
            cur = &node.next.0;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip_through_display() {
        let vs = parse_values("[0.2; 0.4] [(); ()] 3 true 1.0").unwrap();
        let text: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
        assert_eq!(text, ["[1/5; 2/5]", "[(); ()]", "3", "true", "1.0"]);
        let again = parse_values(&text.join(" ")).unwrap();
        assert_eq!(again, vs);
    }

    #[test]
    fn env_shadowing() {
        let env = Env::new().bind("x".into(), Value::Int(1)).bind("x".into(), Value::Int(2));
        assert_eq!(env.get("x"), Some(&Value::Int(2)));
        assert_eq!(env.bindings().len(), 1);
    }
}
