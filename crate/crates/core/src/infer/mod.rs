//! Automatic expected-cost analysis: base types, constraint generation and
//! LP solving.

pub mod base;
pub mod gen;

use std::time::{Duration, Instant};

use praml_lp::{self as lp, LinExpr, LinearProgram, Status};

use crate::bound::{self, BoundExpr};
use crate::potential::{AnnType, Pot};
use crate::program::Program;
use crate::rat::Rat;
use gen::{tag_class, Ctx, Gen, GenError, Judgment};

/// How the LP objective is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ObjectiveMode {
    /// Minimize argument potential first, then the constant, then each
    /// argument annotation outermost first.
    #[default]
    Staged,
    /// Minimize the plain sum of constant and argument annotations.
    Flat,
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub objective: ObjectiveMode,
    /// Remove every constraint of this class before solving.
    pub drop_class: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Stats {
    pub constraints: usize,
    pub variables: usize,
    pub pivots: usize,
    pub solve_time: Duration,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub bound: BoundExpr,
    /// Solved argument types, named by parameter.
    pub args: Vec<(String, AnnType)>,
    pub q: Rat,
    pub result: Pot,
    pub values: Vec<Rat>,
    pub stats: Stats,
}

#[derive(Clone, Debug)]
pub enum AnalysisOutcome {
    Bound(Analysis),
    /// The constraint system is infeasible. Holds the tags of an
    /// irreducible conflicting subset.
    NoBound { conflict: Vec<String>, stats: Stats },
}

impl AnalysisOutcome {
    pub fn bound(&self) -> Option<&Analysis> {
        match self {
            AnalysisOutcome::Bound(a) => Some(a),
            AnalysisOutcome::NoBound { .. } => None,
        }
    }

    pub fn stats(&self) -> &Stats {
        match self {
            AnalysisOutcome::Bound(a) => &a.stats,
            AnalysisOutcome::NoBound { stats, .. } => stats,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error("{0}")]
    Gen(#[from] GenError),
    #[error("{0}")]
    Lp(#[from] lp::LpError),
    #[error("LP unexpectedly unbounded")]
    Unbounded,
    #[error("{0}")]
    Bound(#[from] crate::potential::PotentialError),
}

/// The generated constraint system for a program.
pub struct System {
    pub lp: LinearProgram,
    pub args: Vec<AnnType>,
    pub judgment: Judgment,
}

pub fn generate(program: &Program) -> Result<System, GenError> {
    let mut g = Gen::new(&program.wrapper_types);
    let mut ctx = Ctx::new();
    let mut args = Vec::new();
    for (i, (name, t)) in program.arg_names.iter().zip(&program.arg_types).enumerate() {
        let at = g.template(t, &format!("arg{i}"));
        ctx.insert(name.clone(), at.clone());
        args.push(at);
    }
    let judgment = g.gen(&ctx, &program.wrapper)?;
    Ok(System {
        lp: g.lp,
        args,
        judgment,
    })
}

fn sum<'a>(annos: impl IntoIterator<Item = &'a crate::potential::Anno>) -> LinExpr {
    annos.into_iter().fold(LinExpr::zero(), |acc, a| acc + a.expr())
}

fn objectives(sys: &System, mode: ObjectiveMode) -> Vec<LinExpr> {
    let arg_annos: Vec<_> = sys.args.iter().flat_map(|t| t.annos()).collect();
    let q = sys.judgment.q.expr();
    let cosmetic = sum(sys.judgment.ty.annos()) + sys.judgment.out.expr();
    match mode {
        ObjectiveMode::Flat => vec![sum(arg_annos.iter().copied()) + q, cosmetic],
        ObjectiveMode::Staged => {
            let mut objs = vec![sum(arg_annos.iter().copied()), q];
            objs.extend(arg_annos.iter().map(|a| a.expr()));
            objs.push(cosmetic);
            objs
        }
    }
}

pub fn analyze(program: &Program) -> Result<AnalysisOutcome, AnalyzeError> {
    analyze_with(program, &Options::default())
}

pub fn analyze_with(program: &Program, opts: &Options) -> Result<AnalysisOutcome, AnalyzeError> {
    let mut sys = generate(program)?;
    if let Some(class) = &opts.drop_class {
        sys.lp = sys.lp.filter_constraints(|c| tag_class(&c.tag) != class);
    }
    let objs = objectives(&sys, opts.objective);
    let start = Instant::now();
    let (sol, _) = lp::solve_stages(&sys.lp, &objs)?;
    let stats = Stats {
        constraints: sys.lp.constraints().len(),
        variables: sys.lp.num_vars(),
        pivots: sol.pivots,
        solve_time: start.elapsed(),
    };
    match sol.status {
        Status::Infeasible => {
            let conflict = sol.conflict_tags(&sys.lp).into_iter().map(String::from).collect();
            Ok(AnalysisOutcome::NoBound { conflict, stats })
        }
        Status::Unbounded => Err(AnalyzeError::Unbounded),
        Status::Optimal => {
            let values = sol.values;
            let args: Vec<(String, AnnType)> = program
                .params
                .iter()
                .cloned()
                .zip(sys.args.iter().map(|t| t.resolve(&values)))
                .collect();
            let q = sys.judgment.q.resolve(&values).concrete()?.clone();
            let result = gen::resolve_pot(&sys.judgment.ty, &sys.judgment.out, &values);
            let bound = bound::extract(&args, &q)?;
            Ok(AnalysisOutcome::Bound(Analysis {
                bound,
                args,
                q,
                result,
                values,
                stats,
            }))
        }
    }
}

/// Independently re-derives a bound: regenerates the constraint system,
/// checks the reported assignment satisfies it exactly, and checks that the
/// reported argument types and constant admit a typing.
pub fn check(program: &Program, analysis: &Analysis) -> Result<(), String> {
    let sys = generate(program).map_err(|e| e.to_string())?;
    if !sys.lp.is_satisfied_by(&analysis.values) {
        let bad = sys
            .lp
            .constraints()
            .iter()
            .find(|c| !c.is_satisfied(&analysis.values))
            .map_or_else(|| "a negative value".to_string(), |c| c.tag.clone());
        return Err(format!("assignment violates {bad}"));
    }
    let mut pinned = sys.lp.clone();
    for (t, (_, solved)) in sys.args.iter().zip(&analysis.args) {
        for (a, v) in t.annos().into_iter().zip(solved.annos()) {
            let v = v.concrete().map_err(|e| e.to_string())?;
            pinned.add_constraint(lp::Constraint::eq(a.expr(), LinExpr::constant(v.clone()), "pin"));
        }
    }
    pinned.add_constraint(lp::Constraint::eq(
        sys.judgment.q.expr(),
        LinExpr::constant(analysis.q.clone()),
        "pin",
    ));
    match lp::is_feasible(&pinned) {
        Ok(true) => Ok(()),
        Ok(false) => Err("reported types admit no typing".into()),
        Err(e) => Err(e.to_string()),
    }
}

impl Analysis {
    /// The inferred type of the entry function, e.g. `<L^2(unit), 0> -> <unit, 0>`.
    pub fn signature(&self) -> String {
        let args: Vec<String> = self.args.iter().map(|(_, t)| t.to_string()).collect();
        let args = if args.is_empty() { "unit".to_string() } else { args.join(" * ") };
        format!("<{args}, {}> -> {}", crate::rat::render(&self.q), self.result)
    }
}

/// The constraint system with the first objective stage, for export.
pub fn export_lp(program: &Program, mode: ObjectiveMode) -> Result<LinearProgram, GenError> {
    let sys = generate(program)?;
    let mut lp = sys.lp.clone();
    if let Some(first) = objectives(&sys, mode).into_iter().next() {
        lp.set_objective(first);
    }
    Ok(lp)
}
