//! Bundled example programs with their expected bounds.

use std::time::Duration;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::infer::base::BaseTy;
use crate::infer::{self, AnalysisOutcome};
use crate::program::Program;
use crate::rat::{self, frac, Rat};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expected {
    /// The rendered bound.
    Bound(&'static str),
    /// The analysis must find the constraint system infeasible.
    NoBound,
}

#[derive(Clone, Copy, Debug)]
pub struct Entry {
    pub name: &'static str,
    pub source: &'static str,
    pub expected: Expected,
    /// A published two-decimal value of the constant bound, when there is one.
    pub decimal: Option<&'static str>,
}

macro_rules! entry {
    ($name:literal, $expected:expr) => {
        entry!($name, $expected, None)
    };
    ($name:literal, $expected:expr, $decimal:expr) => {
        Entry {
            name: $name,
            source: include_str!(concat!("../corpus/", $name, ".praml")),
            expected: $expected,
            decimal: $decimal,
        }
    };
}

use Expected::{Bound, NoBound};

pub const ENTRIES: &[Entry] = &[
    entry!("bernoulli", Bound("1")),
    entry!("brdwalk", Bound("2·|l|")),
    entry!("rdwalk", Bound("|l| + Σ 5·p_i")),
    entry!("sample_fast", Bound("2"), Some("2.00")),
    entry!("sample_slow", Bound("21/5 (4.20)"), Some("4.20")),
    entry!("sample_fast_red", Bound("3/10 (0.30)")),
    entry!("sample_fast_black", Bound("7/10 (0.70)")),
    entry!("sample_slow_red", Bound("3/10 (0.30)")),
    entry!("sample_slow_black", Bound("7/10 (0.70)")),
    entry!("dice", Bound("11/3 (3.67)"), Some("3.67")),
    entry!("binomial", Bound("|l|")),
    entry!("poisson_binomial", Bound("|l|")),
    entry!("poisson_binomial_e", Bound("Σ p_i")),
    entry!("isort_prob", Bound("10·|l|")),
    entry!("loop_half", Bound("0")),
    entry!("geometric", NoBound),
    entry!("negative_binomial", NoBound),
    entry!("von_neumann", NoBound),
    entry!("isort", NoBound),
];

pub fn get(name: &str) -> Option<&'static Entry> {
    ENTRIES.iter().find(|e| e.name == name)
}

impl Entry {
    pub fn program(&self) -> Program {
        Program::parse(self.source).unwrap_or_else(|e| panic!("bundled program {} is invalid: {e}", self.name))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub name: String,
    pub expected: String,
    pub bound: String,
    pub constraints: usize,
    pub variables: usize,
    #[serde(serialize_with = "ser_secs")]
    pub solve_time: Duration,
    pub pass: bool,
}

fn ser_secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

pub const NO_BOUND: &str = "no linear bound";

/// Analyzes one entry and compares against its expected outcome.
pub fn run_entry(e: &Entry) -> Row {
    let program = e.program();
    let expected = match e.expected {
        Bound(t) => t.to_string(),
        NoBound => NO_BOUND.to_string(),
    };
    let (bound, stats, pass) = match infer::analyze(&program) {
        Ok(AnalysisOutcome::Bound(a)) => {
            let text = a.bound.to_string();
            let decimal_ok = e
                .decimal
                .is_none_or(|d| a.bound.terms.is_empty() && rat::to_decimal(&a.bound.constant, 2) == d);
            let pass = text == expected && decimal_ok;
            (text, Some(a.stats), pass)
        }
        Ok(AnalysisOutcome::NoBound { stats, .. }) => (NO_BOUND.to_string(), Some(stats), e.expected == NoBound),
        Err(err) => (format!("error: {err}"), None, false),
    };
    Row {
        name: e.name.to_string(),
        expected,
        bound,
        constraints: stats.as_ref().map_or(0, |s| s.constraints),
        variables: stats.as_ref().map_or(0, |s| s.variables),
        solve_time: stats.map_or(Duration::ZERO, |s| s.solve_time),
        pass,
    }
}

pub fn run_all() -> Vec<Row> {
    ENTRIES.iter().map(run_entry).collect()
}

/// Probabilities drawn for random inputs.
pub fn sample_probs() -> Vec<Rat> {
    vec![
        rat::zero(),
        frac(1, 5),
        frac(1, 4),
        frac(1, 3),
        frac(1, 2),
        frac(3, 5),
        frac(3, 4),
        frac(9, 10),
        rat::one(),
    ]
}

/// A random value of base type `t` with lists of length at most `max_len`.
pub fn random_value(t: &BaseTy, max_len: usize, rng: &mut impl Rng) -> Value {
    match t {
        BaseTy::Unit | BaseTy::Var(_) | BaseTy::Arrow(..) => Value::Unit,
        BaseTy::Int => Value::Int(rng.gen_range(-5..=20)),
        BaseTy::Bool => Value::Bool(rng.gen()),
        BaseTy::Prob => Value::Prob(sample_probs().choose(rng).cloned().unwrap_or_else(rat::zero)),
        BaseTy::List(e) => {
            let n = rng.gen_range(0..=max_len);
            Value::list((0..n).map(|_| random_value(e, max_len, rng)).collect::<Vec<_>>())
        }
    }
}

/// Random arguments for a program's entry function.
pub fn random_inputs(program: &Program, max_len: usize, rng: &mut impl Rng) -> Vec<Value> {
    program.arg_types.iter().map(|t| random_value(t, max_len, rng)).collect()
}
