use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num::{BigRational, Signed, Zero};

pub type Rat = BigRational;

/// Index of a registered LP variable. Every variable is implicitly `>= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// An affine expression `sum c_i * x_i + k` with exact coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinExpr {
    terms: BTreeMap<VarId, Rat>,
    constant: Rat,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr::default()
    }

    pub fn var(v: VarId) -> Self {
        LinExpr::term(v, Rat::from_integer(1.into()))
    }

    pub fn term(v: VarId, c: Rat) -> Self {
        let mut e = LinExpr::zero();
        e.add_term(v, c);
        e
    }

    pub fn constant(c: Rat) -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn add_term(&mut self, v: VarId, c: Rat) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(v).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&v);
        }
    }

    pub fn add_constant(&mut self, c: &Rat) {
        self.constant += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, &Rat)> {
        self.terms.iter().map(|(v, c)| (*v, c))
    }

    pub fn coeff(&self, v: VarId) -> Rat {
        self.terms.get(&v).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> &Rat {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.terms.keys().copied()
    }

    pub fn scale(&self, k: &Rat) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            terms: self.terms.iter().map(|(v, c)| (*v, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// Value of the expression under `values[v.0]`.
    pub fn eval(&self, values: &[Rat]) -> Rat {
        let mut acc = self.constant.clone();
        for (v, c) in &self.terms {
            acc += c * &values[v.0];
        }
        acc
    }
}

impl From<VarId> for LinExpr {
    fn from(v: VarId) -> Self {
        LinExpr::var(v)
    }
}

impl From<Rat> for LinExpr {
    fn from(c: Rat) -> Self {
        LinExpr::constant(c)
    }
}

impl AddAssign<&LinExpr> for LinExpr {
    fn add_assign(&mut self, rhs: &LinExpr) {
        for (v, c) in &rhs.terms {
            self.add_term(*v, c.clone());
        }
        self.constant += &rhs.constant;
    }
}

impl SubAssign<&LinExpr> for LinExpr {
    fn sub_assign(&mut self, rhs: &LinExpr) {
        for (v, c) in &rhs.terms {
            self.add_term(*v, -c.clone());
        }
        self.constant -= &rhs.constant;
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self += &rhs;
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self -= &rhs;
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scale(&-Rat::from_integer(1.into()))
    }
}

impl Mul<&Rat> for LinExpr {
    type Output = LinExpr;
    fn mul(self, k: &Rat) -> LinExpr {
        self.scale(k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }

    pub fn holds(self, lhs: &Rat, rhs: &Rat) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
        }
    }

    fn flipped(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }
}

/// A row `sum c_i * x_i  rel  rhs`, tagged with its provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: LinExpr,
    pub relation: Relation,
    pub rhs: Rat,
    pub tag: String,
}

impl Constraint {
    /// Builds `lhs rel rhs` and moves every constant to the right.
    pub fn new(lhs: LinExpr, relation: Relation, rhs: LinExpr, tag: impl Into<String>) -> Self {
        let mut coeffs = lhs - rhs;
        let k = coeffs.constant.clone();
        coeffs.constant = Rat::zero();
        Constraint {
            coeffs,
            relation,
            rhs: -k,
            tag: tag.into(),
        }
    }

    pub fn ge(lhs: LinExpr, rhs: LinExpr, tag: impl Into<String>) -> Self {
        Constraint::new(lhs, Relation::Ge, rhs, tag)
    }

    pub fn eq(lhs: LinExpr, rhs: LinExpr, tag: impl Into<String>) -> Self {
        Constraint::new(lhs, Relation::Eq, rhs, tag)
    }

    pub fn is_satisfied(&self, values: &[Rat]) -> bool {
        self.relation.holds(&self.coeffs.eval(values), &self.rhs)
    }

    /// The same constraint with both sides negated, so that `rhs >= 0`.
    pub(crate) fn with_nonnegative_rhs(&self) -> (LinExpr, Relation, Rat) {
        if self.rhs.is_negative() {
            (-self.coeffs.clone(), self.relation.flipped(), -self.rhs.clone())
        } else {
            (self.coeffs.clone(), self.relation, self.rhs.clone())
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            crate::format::render_terms(&self.coeffs),
            self.relation.symbol(),
            crate::format::render_rat(&self.rhs)
        )
    }
}
