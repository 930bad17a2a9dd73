//! Brute-force LP oracle: enumerates every basic solution of a small system
//! and keeps the best feasible one. Only valid for bounded programs.

use num::{One, Signed, Zero};
use praml_lp::{LinearProgram, Rat, Relation};

#[derive(Debug, PartialEq)]
pub enum Oracle {
    Infeasible,
    Optimal(Rat),
}

fn solve_square(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for k in col..n {
            a[col][k] = &a[col][k] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for k in col..n {
                    let t = &f * &a[col][k];
                    a[r][k] -= t;
                }
                let t = &f * &b[col];
                b[r] -= t;
            }
        }
    }
    Some(b)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

pub fn vertex_enumeration(lp: &LinearProgram) -> Oracle {
    let n = lp.num_vars();
    // Hyperplanes: every row plus every coordinate plane x_j = 0.
    let mut planes: Vec<(Vec<Rat>, Rat)> = lp
        .constraints()
        .iter()
        .map(|c| {
            let row = (0..n)
                .map(|j| c.coeffs.coeff(praml_lp::VarId(j)))
                .collect();
            (row, c.rhs.clone())
        })
        .collect();
    for j in 0..n {
        let mut row = vec![Rat::zero(); n];
        row[j] = Rat::one();
        planes.push((row, Rat::zero()));
    }
    let mut best: Option<Rat> = None;
    for pick in combinations(planes.len(), n) {
        let a = pick.iter().map(|&i| planes[i].0.clone()).collect();
        let b = pick.iter().map(|&i| planes[i].1.clone()).collect();
        let Some(x) = solve_square(a, b) else { continue };
        if x.iter().any(|v| v.is_negative()) {
            continue;
        }
        let ok = lp.constraints().iter().all(|c| {
            let lhs = c.coeffs.eval(&x);
            match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Ge => lhs >= c.rhs,
                Relation::Eq => lhs == c.rhs,
            }
        });
        if !ok {
            continue;
        }
        let v = lp.objective().eval(&x);
        if best.as_ref().is_none_or(|b| v < *b) {
            best = Some(v);
        }
    }
    match best {
        Some(v) => Oracle::Optimal(v),
        None => Oracle::Infeasible,
    }
}

/// Random bounded LP with small integer data: up to 4 variables, up to 6
/// rows, plus the box `x_j <= 10` so that vertex enumeration is exhaustive.
pub fn random_lp<R: rand::Rng>(rng: &mut R) -> LinearProgram {
    use praml_lp::{Constraint, LinExpr, VarId};
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=6);
    let mut lp = LinearProgram::new();
    for j in 0..n {
        lp.add_var(format!("v{j}"));
    }
    for i in 0..m {
        let mut e = LinExpr::zero();
        for j in 0..n {
            let c: i64 = rng.gen_range(-3..=3);
            e.add_term(VarId(j), Rat::from_integer(c.into()));
        }
        let rhs: i64 = rng.gen_range(-4..=8);
        let rel = match rng.gen_range(0..5) {
            0 => Relation::Eq,
            1 | 2 => Relation::Le,
            _ => Relation::Ge,
        };
        lp.add_constraint(Constraint::new(
            e,
            rel,
            LinExpr::constant(Rat::from_integer(rhs.into())),
            format!("r{i}"),
        ));
    }
    for j in 0..n {
        lp.add_constraint(Constraint::new(
            LinExpr::var(VarId(j)),
            Relation::Le,
            LinExpr::constant(Rat::from_integer(10.into())),
            format!("box{j}"),
        ));
    }
    let mut obj = LinExpr::zero();
    for j in 0..n {
        let c: i64 = rng.gen_range(-3..=3);
        obj.add_term(VarId(j), Rat::from_integer(c.into()));
    }
    lp.set_objective(obj);
    lp
}
