//! Two-phase primal simplex on a sparse tableau over exact rationals.
//!
//! Entering and leaving variables follow Bland's rule. Infeasible systems are
//! certified by the support of the phase-one dual, shrunk to an irreducible
//! subset with a deletion filter.

use num::{One, Signed, Zero};

use crate::expr::{LinExpr, Rat, Relation};
use crate::{LinearProgram, LpError, Solution, Status};

pub const PIVOT_LIMIT: usize = 1_000_000;

type Row = Vec<(usize, Rat)>;

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Row>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    /// Column holding the identity entry of each row in the initial basis.
    unit_col: Vec<usize>,
    n_struct: usize,
    reduced: Vec<Rat>,
    value: Rat,
    barred: Vec<bool>,
    pivots: usize,
}

enum Step {
    Optimal,
    Unbounded(usize),
}

fn lookup(row: &Row, col: usize) -> Option<&Rat> {
    row.binary_search_by_key(&col, |(c, _)| *c)
        .ok()
        .map(|i| &row[i].1)
}

/// `dst - k * src`, both sorted by column.
fn axpy(dst: &Row, k: &Rat, src: &Row) -> Row {
    let mut out = Vec::with_capacity(dst.len() + src.len());
    let (mut i, mut j) = (0, 0);
    while i < dst.len() || j < src.len() {
        let take_dst = j >= src.len() || (i < dst.len() && dst[i].0 < src[j].0);
        let take_src = i >= dst.len() || (j < src.len() && src[j].0 < dst[i].0);
        if take_dst {
            out.push(dst[i].clone());
            i += 1;
        } else if take_src {
            out.push((src[j].0, -(k * &src[j].1)));
            j += 1;
        } else {
            let v = &dst[i].1 - k * &src[j].1;
            if !v.is_zero() {
                out.push((dst[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl Tableau {
    /// Builds the phase-one tableau for the selected rows of `lp`.
    fn build(lp: &LinearProgram, selected: &[usize]) -> Tableau {
        let n = lp.num_vars();
        let mut kinds = vec![ColKind::Structural; n];
        let mut rows: Vec<Row> = Vec::with_capacity(selected.len());
        let mut rhs = Vec::with_capacity(selected.len());
        let mut normalized = Vec::with_capacity(selected.len());
        for &ci in selected {
            let (coeffs, rel, b) = lp.constraints()[ci].with_nonnegative_rhs();
            normalized.push(rel);
            rows.push(coeffs.terms().map(|(v, c)| (v.0, c.clone())).collect());
            rhs.push(b);
        }
        let mut unit_col = vec![usize::MAX; rows.len()];
        for (i, rel) in normalized.iter().enumerate() {
            let col = kinds.len();
            match rel {
                Relation::Le => {
                    kinds.push(ColKind::Slack);
                    rows[i].push((col, Rat::one()));
                    unit_col[i] = col;
                }
                Relation::Ge => {
                    kinds.push(ColKind::Slack);
                    rows[i].push((col, -Rat::one()));
                }
                Relation::Eq => {}
            }
        }
        for (i, rel) in normalized.iter().enumerate() {
            if *rel != Relation::Le {
                let col = kinds.len();
                kinds.push(ColKind::Artificial);
                rows[i].push((col, Rat::one()));
                unit_col[i] = col;
            }
        }
        let ncols = kinds.len();
        let basis = unit_col.clone();
        let mut t = Tableau {
            rows,
            rhs,
            basis,
            kinds,
            unit_col,
            n_struct: n,
            reduced: vec![Rat::zero(); ncols],
            value: Rat::zero(),
            barred: vec![false; ncols],
            pivots: 0,
        };
        let cost: Vec<Rat> = t
            .kinds
            .iter()
            .map(|k| {
                if *k == ColKind::Artificial {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            })
            .collect();
        t.price(&cost);
        t
    }

    /// Recomputes reduced costs and objective value for the cost vector.
    fn price(&mut self, cost: &[Rat]) {
        self.reduced = cost.to_vec();
        self.value = Rat::zero();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (c, a) in row {
                self.reduced[*c] -= cb * a;
            }
            self.value += cb * &self.rhs[i];
        }
    }

    fn pivot(&mut self, r: usize, col: usize) -> Result<(), LpError> {
        self.pivots += 1;
        if self.pivots > PIVOT_LIMIT {
            return Err(LpError::PivotLimit(PIVOT_LIMIT));
        }
        let piv = lookup(&self.rows[r], col).cloned().expect("pivot on zero");
        if !piv.is_one() {
            let inv = piv.recip();
            for (_, a) in self.rows[r].iter_mut() {
                *a *= &inv;
            }
            self.rhs[r] *= &inv;
        }
        let prow = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(a) = lookup(&self.rows[i], col).cloned() {
                self.rows[i] = axpy(&self.rows[i], &a, &prow);
                self.rhs[i] -= &a * &prhs;
            }
        }
        let d = self.reduced[col].clone();
        if !d.is_zero() {
            for (c, a) in &prow {
                self.reduced[*c] -= &d * a;
            }
            self.value += &d * &prhs;
        }
        self.rows[r] = prow;
        self.basis[r] = col;
        Ok(())
    }

    fn iterate(&mut self) -> Result<Step, LpError> {
        loop {
            let entering = (0..self.reduced.len())
                .find(|&j| !self.barred[j] && self.reduced[j].is_negative());
            let Some(col) = entering else {
                return Ok(Step::Optimal);
            };
            let mut best: Option<(usize, Rat)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let Some(a) = lookup(row, col) else { continue };
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col)?,
                None => return Ok(Step::Unbounded(col)),
            }
        }
    }

    /// Pivots artificial variables that sit in the basis at level zero onto
    /// any non-artificial column of their row.
    fn expel_artificials(&mut self) -> Result<(), LpError> {
        for r in 0..self.rows.len() {
            if self.kinds[self.basis[r]] != ColKind::Artificial {
                continue;
            }
            let col = self.rows[r]
                .iter()
                .find(|(c, a)| self.kinds[*c] != ColKind::Artificial && !a.is_zero())
                .map(|(c, _)| *c);
            if let Some(c) = col {
                self.pivot(r, c)?;
            }
        }
        Ok(())
    }

    /// Phase-one dual multipliers, recovered from the reduced costs of the
    /// columns that formed the initial identity basis.
    fn phase_one_duals(&self) -> Vec<Rat> {
        self.unit_col
            .iter()
            .map(|&c| match self.kinds[c] {
                ColKind::Artificial => Rat::one() - &self.reduced[c],
                _ => -self.reduced[c].clone(),
            })
            .collect()
    }

    fn structural_values(&self) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); self.n_struct];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                x[b] = self.rhs[i].clone();
            }
        }
        x
    }

    fn ray(&self, col: usize) -> Vec<Rat> {
        let mut r = vec![Rat::zero(); self.n_struct];
        if col < self.n_struct {
            r[col] = Rat::one();
        }
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                if let Some(a) = lookup(&self.rows[i], col) {
                    r[b] = -a.clone();
                }
            }
        }
        r
    }

    fn cost_vector(&self, objective: &LinExpr) -> Vec<Rat> {
        let mut cost = vec![Rat::zero(); self.kinds.len()];
        for (v, c) in objective.terms() {
            cost[v.0] = c.clone();
        }
        cost
    }

    fn bar_artificials(&mut self) {
        for (j, k) in self.kinds.iter().enumerate() {
            if *k == ColKind::Artificial {
                self.barred[j] = true;
            }
        }
    }
}

/// Rows whose coefficient vector is empty are decided on the spot.
fn split_trivial(lp: &LinearProgram, subset: &[usize]) -> (Vec<usize>, Option<usize>) {
    let mut keep = Vec::new();
    for &i in subset {
        let c = &lp.constraints()[i];
        if c.coeffs.is_constant() {
            if !c.relation.holds(&Rat::zero(), &c.rhs) {
                return (keep, Some(i));
            }
        } else {
            keep.push(i);
        }
    }
    (keep, None)
}

enum PhaseOne {
    Feasible(Tableau),
    Infeasible { support: Vec<usize>, pivots: usize },
}

fn phase_one(lp: &LinearProgram, subset: &[usize]) -> Result<PhaseOne, LpError> {
    let (rows, trivial) = split_trivial(lp, subset);
    if let Some(i) = trivial {
        return Ok(PhaseOne::Infeasible {
            support: vec![i],
            pivots: 0,
        });
    }
    let mut t = Tableau::build(lp, &rows);
    match t.iterate()? {
        Step::Optimal => {}
        Step::Unbounded(_) => unreachable!("phase one is bounded below by zero"),
    }
    if t.value.is_positive() {
        let duals = t.phase_one_duals();
        let support = rows
            .iter()
            .zip(duals)
            .filter(|(_, y)| !y.is_zero())
            .map(|(i, _)| *i)
            .collect();
        return Ok(PhaseOne::Infeasible {
            support,
            pivots: t.pivots,
        });
    }
    t.expel_artificials()?;
    t.bar_artificials();
    Ok(PhaseOne::Feasible(t))
}

fn feasible(lp: &LinearProgram, subset: &[usize]) -> Result<bool, LpError> {
    Ok(matches!(phase_one(lp, subset)?, PhaseOne::Feasible(_)))
}

/// Shrinks an infeasible row set to an irreducible infeasible subset.
fn deletion_filter(lp: &LinearProgram, mut set: Vec<usize>) -> Result<Vec<usize>, LpError> {
    let mut k = 0;
    while k < set.len() {
        let mut trial = set.clone();
        trial.remove(k);
        if feasible(lp, &trial)? {
            k += 1;
        } else {
            set = trial;
        }
    }
    Ok(set)
}

fn infeasible(lp: &LinearProgram, support: Vec<usize>, pivots: usize) -> Result<Solution, LpError> {
    let conflict = deletion_filter(lp, support)?;
    Ok(Solution {
        status: Status::Infeasible,
        values: Vec::new(),
        objective: Rat::zero(),
        conflict,
        ray: Vec::new(),
        pivots,
    })
}

/// Minimizes each objective in turn over the optimal face of the previous
/// ones. Later stages bar every nonbasic column with positive reduced cost,
/// which pins the earlier objectives at their optimal values.
pub fn solve_stages(lp: &LinearProgram, objectives: &[LinExpr]) -> Result<(Solution, Vec<Rat>), LpError> {
    let all: Vec<usize> = (0..lp.constraints().len()).collect();
    let mut t = match phase_one(lp, &all)? {
        PhaseOne::Feasible(t) => t,
        PhaseOne::Infeasible { support, pivots } => return Ok((infeasible(lp, support, pivots)?, Vec::new())),
    };
    let mut stage_values = Vec::with_capacity(objectives.len());
    for obj in objectives {
        let cost = t.cost_vector(obj);
        t.price(&cost);
        match t.iterate()? {
            Step::Optimal => {}
            Step::Unbounded(col) => {
                let sol = Solution {
                    status: Status::Unbounded,
                    values: t.structural_values(),
                    objective: Rat::zero(),
                    conflict: Vec::new(),
                    ray: t.ray(col),
                    pivots: t.pivots,
                };
                return Ok((sol, stage_values));
            }
        }
        stage_values.push(t.value.clone() + obj.constant_term());
        for j in 0..t.reduced.len() {
            if t.reduced[j].is_positive() {
                t.barred[j] = true;
            }
        }
    }
    let values = t.structural_values();
    let objective = stage_values.first().cloned().unwrap_or_else(Rat::zero);
    Ok((
        Solution {
            status: Status::Optimal,
            values,
            objective,
            conflict: Vec::new(),
            ray: Vec::new(),
            pivots: t.pivots,
        },
        stage_values,
    ))
}

pub fn solve(lp: &LinearProgram) -> Result<Solution, LpError> {
    let (sol, _) = solve_stages(lp, std::slice::from_ref(lp.objective()))?;
    Ok(sol)
}

pub fn is_feasible(lp: &LinearProgram) -> Result<bool, LpError> {
    let all: Vec<usize> = (0..lp.constraints().len()).collect();
    feasible(lp, &all)
}
