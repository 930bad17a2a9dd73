//! A parsed and elaborated program together with its entry function.

use std::rc::Rc;

use crate::infer::base::{infer_base_types, infer_base_types_generic, BaseTy, BaseTypes, TypeError};
use crate::interp_trace::{self, DEFAULT_BUDGET};
use crate::syntax::{self, CoreExpr, Kind, Name, NodeId, Span, SyntaxError};
use crate::value::{Env, Value};

pub const ENTRY: &str = "%entry";

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ProgramError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("{0}")]
    Type(#[from] TypeError),
    #[error("{0}")]
    Input(String),
}

#[derive(Clone, Debug)]
pub struct Program {
    /// The normalized program. Its value is the entry function.
    pub core: CoreExpr,
    /// Display names of the entry function's parameters.
    pub params: Vec<String>,
    pub arg_types: Vec<BaseTy>,
    /// `arg_types` before unconstrained variables default to unit. Inputs
    /// may hold any first-order value where these have a variable.
    pub arg_shapes: Vec<BaseTy>,
    pub ret_type: BaseTy,
    /// `let %entry = core in %entry %x1 .. %xk`, or `core` itself when the
    /// program is not a function.
    pub wrapper: CoreExpr,
    pub wrapper_types: BaseTypes,
    /// Free variables of `wrapper`, one per argument.
    pub arg_names: Vec<Name>,
}

fn entry_params(core: &CoreExpr) -> Option<Vec<Name>> {
    let mut defs: Vec<(&Name, &CoreExpr)> = Vec::new();
    let mut cur = core;
    loop {
        match &cur.kind {
            Kind::Let { name, def, body } => {
                defs.push((name, def));
                cur = body;
            }
            Kind::Fun(fd) => return Some(fd.params.clone()),
            Kind::Var(x) => {
                let (_, def) = defs.iter().rev().find(|(n, _)| *n == x)?;
                return entry_params(def);
            }
            _ => return None,
        }
    }
}

fn display_name(name: &Name, i: usize) -> String {
    if name.starts_with('%') {
        format!("x{}", i + 1)
    } else {
        name.to_string()
    }
}

fn max_id(e: &CoreExpr) -> u32 {
    let mut m = 0;
    e.walk(&mut |n| m = m.max(n.id.0));
    m
}

impl Program {
    pub fn parse(text: &str) -> Result<Program, ProgramError> {
        let surface = syntax::parse(text)?;
        let core = syntax::normalize(&surface)?;
        Program::from_core(core)
    }

    pub fn from_core(core: CoreExpr) -> Result<Program, ProgramError> {
        let (generic, ty, types) = infer_base_types_generic(&core, &[])?;
        let arg_shapes = match generic {
            BaseTy::Arrow(a, _) => a,
            _ => Vec::new(),
        };
        let BaseTy::Arrow(arg_types, ret) = ty else {
            return Ok(Program {
                wrapper: core.clone(),
                core,
                params: Vec::new(),
                arg_types: Vec::new(),
                arg_shapes,
                ret_type: ty,
                wrapper_types: types,
                arg_names: Vec::new(),
            });
        };
        let raw = entry_params(&core).unwrap_or_default();
        let params: Vec<String> = (0..arg_types.len())
            .map(|i| raw.get(i).map_or_else(|| format!("x{}", i + 1), |n| display_name(n, i)))
            .collect();
        let arg_names: Vec<Name> = (0..arg_types.len()).map(|i| Rc::from(format!("%x{}", i + 1))).collect();
        let span = core.span;
        let next = max_id(&core);
        let app = CoreExpr {
            id: NodeId(next + 2),
            span,
            kind: Kind::App {
                func: Rc::from(ENTRY),
                args: arg_names.clone(),
            },
        };
        let wrapper = CoreExpr {
            id: NodeId(next + 1),
            span,
            kind: Kind::Let {
                name: Rc::from(ENTRY),
                def: Box::new(core.clone()),
                body: Box::new(app),
            },
        };
        let free: Vec<(Name, BaseTy)> = arg_names.iter().cloned().zip(arg_types.iter().cloned()).collect();
        let (_, wrapper_types) = infer_base_types(&wrapper, &free)?;
        Ok(Program {
            core,
            params,
            arg_types,
            arg_shapes,
            ret_type: *ret,
            wrapper,
            wrapper_types,
            arg_names,
        })
    }

    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }

    pub fn span(&self) -> Span {
        self.core.span
    }

    /// The expression and environment that apply the entry function to
    /// `args`. The entry function itself is evaluated first, which must
    /// happen without coin flips.
    pub fn call(&self, args: &[Value]) -> Result<(Env, CoreExpr), ProgramError> {
        if args.len() != self.arity() {
            return Err(ProgramError::Input(format!(
                "expected {} input(s), got {}",
                self.arity(),
                args.len()
            )));
        }
        for (i, ((v, t), shape)) in args.iter().zip(&self.arg_types).zip(&self.arg_shapes).enumerate() {
            if !value_has_base_type(v, shape) {
                return Err(ProgramError::Input(format!("input {} `{v}` is not of type {t}", i + 1)));
            }
        }
        if self.arity() == 0 {
            return Ok((Env::new(), self.core.clone()));
        }
        let closure = interp_trace::replay(&Env::new(), &self.core, &[], DEFAULT_BUDGET)
            .map_err(|e| ProgramError::Input(format!("evaluating the entry function: {e}")))?
            .value;
        let mut env = Env::new().bind(Rc::from(ENTRY), closure);
        for (n, v) in self.arg_names.iter().zip(args) {
            env = env.bind(n.clone(), v.clone());
        }
        let Kind::Let { body, .. } = &self.wrapper.kind else { unreachable!() };
        Ok((env, (**body).clone()))
    }
}

pub fn value_has_base_type(v: &Value, t: &BaseTy) -> bool {
    match (v, t) {
        (Value::Unit, BaseTy::Unit)
        | (Value::Int(_), BaseTy::Int)
        | (Value::Bool(_), BaseTy::Bool)
        | (Value::Prob(_), BaseTy::Prob)
        | (Value::Nil, BaseTy::List(_)) => true,
        (Value::Cons(h, tl), BaseTy::List(e)) => value_has_base_type(h, e) && value_has_base_type(tl, t),
        (Value::Closure(c), BaseTy::Arrow(args, _)) => c.fun.params.len() == args.len(),
        (Value::Closure(_), BaseTy::Var(_)) => false,
        (_, BaseTy::Var(_)) => true,
        _ => false,
    }
}
