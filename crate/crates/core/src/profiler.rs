//! Branch profiling of deterministic programs and the rewrite of profiled
//! conditionals into coin flips.

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::interp_trace::{self, Observer, DEFAULT_BUDGET};
use crate::program::Program;
use crate::rat::{self, Rat};
use crate::syntax::{CoreExpr, Kind, Span};
use crate::value::Value;

/// Number of equal-population size buckets used by the independence test.
pub const BUCKETS: usize = 4;

/// A conditional site, identified by its source position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    pub line: u32,
    pub col: u32,
}

impl Site {
    pub fn of(span: Span) -> Site {
        Site {
            line: span.line,
            col: span.col,
        }
    }

    pub fn parse(text: &str) -> Option<Site> {
        let (l, c) = text.split_once(':')?;
        Some(Site {
            line: l.trim().parse().ok()?,
            col: c.trim().parse().ok()?,
        })
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Then-branch and total counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub taken: u64,
    pub total: u64,
}

impl Counts {
    fn record(&mut self, taken: bool) {
        self.total += 1;
        self.taken += u64::from(taken);
    }

    fn merge(&mut self, other: Counts) {
        self.taken += other.taken;
        self.total += other.total;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SiteStats {
    pub counts: Counts,
    /// Counts keyed by the length of the nearest enclosing list scrutinee.
    /// Evaluations outside any list match are keyed by 0.
    pub by_size: BTreeMap<usize, Counts>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BranchStats {
    pub sites: BTreeMap<Site, SiteStats>,
}

impl BranchStats {
    /// Zero counts for every conditional of `e`.
    pub fn for_program(e: &CoreExpr) -> BranchStats {
        let mut sites = BTreeMap::new();
        e.walk(&mut |n| {
            if let Kind::If { .. } = n.kind {
                sites.insert(Site::of(n.span), SiteStats::default());
            }
        });
        BranchStats { sites }
    }

    pub fn merge(&mut self, other: &BranchStats) {
        for (site, s) in &other.sites {
            let mine = self.sites.entry(*site).or_default();
            mine.counts.merge(s.counts);
            for (size, c) in &s.by_size {
                mine.by_size.entry(*size).or_default().merge(*c);
            }
        }
    }
}

impl Observer for BranchStats {
    fn on_if(&mut self, site: &CoreExpr, taken: bool, size: Option<usize>) {
        let s = self.sites.entry(Site::of(site.span)).or_default();
        s.counts.record(taken);
        s.by_size.entry(size.unwrap_or(0)).or_default().record(taken);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ProfileError {
    #[error("profile requires deterministic program")]
    Probabilistic,
    #[error("input {index}: {message}")]
    Run { index: usize, message: String },
}

/// Runs the program on each input tuple and counts branch outcomes.
pub fn profile(program: &Program, inputs: &[Vec<Value>]) -> Result<BranchStats, ProfileError> {
    if program.core.is_probabilistic() {
        return Err(ProfileError::Probabilistic);
    }
    let mut stats = BranchStats::for_program(&program.core);
    for (index, args) in inputs.iter().enumerate() {
        let run_err = |message: String| ProfileError::Run { index, message };
        let (env, body) = program.call(args).map_err(|e| run_err(e.to_string()))?;
        interp_trace::observe(&env, &body, &mut stats, DEFAULT_BUDGET).map_err(|e| run_err(e.to_string()))?;
    }
    Ok(stats)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Constant,
    SizeDependent,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Constant => "constant",
            Verdict::SizeDependent => "size-dependent",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Counts over a contiguous range of sizes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bucket {
    pub min_size: usize,
    pub max_size: usize,
    pub taken: u64,
    pub total: u64,
}

/// Splits the size histogram into at most `k` contiguous buckets of roughly
/// equal population. A single size is never split across buckets.
pub fn buckets(s: &SiteStats, k: usize) -> Vec<Bucket> {
    let n = s.counts.total;
    let mut out: Vec<Bucket> = Vec::new();
    let mut seen = 0u64;
    let mut current = usize::MAX;
    for (&size, c) in &s.by_size {
        if c.total == 0 {
            continue;
        }
        let idx = ((seen as u128 * k as u128) / n as u128) as usize;
        if idx != current || out.is_empty() {
            current = idx;
            out.push(Bucket {
                min_size: size,
                max_size: size,
                taken: 0,
                total: 0,
            });
        }
        let b = out.last_mut().expect("bucket pushed above");
        b.max_size = size;
        b.taken += c.taken;
        b.total += c.total;
        seen += c.total;
    }
    out
}

/// Chi-square homogeneity statistic and p-value of a 2-by-k table whose
/// columns are the buckets. `None` with fewer than two non-empty buckets.
pub fn chi_square(buckets: &[Bucket]) -> Option<(f64, f64)> {
    let cols: Vec<&Bucket> = buckets.iter().filter(|b| b.total > 0).collect();
    if cols.len() < 2 {
        return None;
    }
    let n: f64 = cols.iter().map(|b| b.total as f64).sum();
    let taken: f64 = cols.iter().map(|b| b.taken as f64).sum();
    let rows = [taken, n - taken];
    let mut stat = 0.0;
    for b in &cols {
        let observed = [b.taken as f64, (b.total - b.taken) as f64];
        for (o, r) in observed.iter().zip(rows) {
            let e = r * b.total as f64 / n;
            if e > 0.0 {
                stat += (o - e) * (o - e) / e;
            }
        }
    }
    let df = (cols.len() - 1) as f64;
    let dist = ChiSquared::new(df).expect("positive degrees of freedom");
    Some((stat, 1.0 - dist.cdf(stat)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteReport {
    pub site: String,
    pub taken: u64,
    pub total: u64,
    pub buckets: Vec<Bucket>,
    /// Exact empirical then-branch frequency; absent when never executed.
    pub p_hat: Option<String>,
    pub p_value: Option<f64>,
    pub verdict: Verdict,
}

impl SiteReport {
    pub fn p_hat(&self) -> Option<Rat> {
        self.p_hat.as_deref().and_then(rat::parse)
    }
}

/// Frequencies and independence verdicts for each site at level `alpha`.
pub fn report(stats: &BranchStats, alpha: f64) -> Vec<SiteReport> {
    stats
        .sites
        .iter()
        .map(|(site, s)| {
            let bs = buckets(s, BUCKETS);
            let test = chi_square(&bs);
            let verdict = match test {
                None => Verdict::Inconclusive,
                Some((_, p)) if p >= alpha => Verdict::Constant,
                Some(_) => Verdict::SizeDependent,
            };
            SiteReport {
                site: site.to_string(),
                taken: s.counts.taken,
                total: s.counts.total,
                buckets: bs,
                p_hat: (s.counts.total > 0)
                    .then(|| rat::render(&rat::frac(s.counts.taken as i64, s.counts.total as i64))),
                p_value: test.map(|(_, p)| p),
                verdict,
            }
        })
        .collect()
}

#[derive(Clone, Debug, Default)]
pub struct TransformOptions {
    /// Round each frequency to this many decimal digits.
    pub round_digits: Option<u32>,
    /// Remove the evaluation of the condition along with its use.
    pub drop_scrutinee: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("size-dependent branch probability at site(s) {}", .0.join(", "))]
    SizeDependent(Vec<String>),
    #[error("bad stats entry for site {site}: {message}")]
    BadStats { site: String, message: String },
}

/// Replaces each profiled conditional by a flip with its empirical
/// frequency. Sites that never ran or are absent from `reports` stay as
/// they are.
pub fn transform(e: &CoreExpr, reports: &[SiteReport], opts: &TransformOptions) -> Result<CoreExpr, TransformError> {
    let dependent: Vec<String> = reports
        .iter()
        .filter(|r| r.verdict == Verdict::SizeDependent)
        .map(|r| r.site.clone())
        .collect();
    if !dependent.is_empty() {
        return Err(TransformError::SizeDependent(dependent));
    }
    let mut probs = BTreeMap::new();
    for r in reports {
        let bad = |message: &str| TransformError::BadStats {
            site: r.site.clone(),
            message: message.to_string(),
        };
        let site = Site::parse(&r.site).ok_or_else(|| bad("site is not line:col"))?;
        let Some(text) = &r.p_hat else { continue };
        let mut p = rat::parse(text).ok_or_else(|| bad("p_hat is not a rational"))?;
        if let Some(d) = opts.round_digits {
            p = rat::round_to_digits(&p, d);
        }
        if !rat::is_probability(&p) {
            return Err(bad("p_hat is not in [0, 1]"));
        }
        probs.insert(site, p);
    }
    let mut out = e.clone();
    rewrite(&mut out, &probs, opts.drop_scrutinee);
    Ok(out)
}

fn flip_of(e: &CoreExpr, probs: &BTreeMap<Site, Rat>) -> Option<Kind> {
    let Kind::If {
        then_branch,
        else_branch,
        ..
    } = &e.kind
    else {
        return None;
    };
    let p = probs.get(&Site::of(e.span))?;
    Some(Kind::Flip {
        p: p.clone(),
        heads: then_branch.clone(),
        tails: else_branch.clone(),
    })
}

fn rewrite(e: &mut CoreExpr, probs: &BTreeMap<Site, Rat>, drop: bool) {
    match &mut e.kind {
        Kind::Fun(fd) => {
            let f = Rc::make_mut(fd);
            rewrite(&mut f.body, probs, drop);
            let free = f.body.free_vars();
            f.captures.retain(|c| free.contains(c));
        }
        _ => {
            for (c, _) in e.scopes_mut().0 {
                rewrite(c, probs, drop);
            }
        }
    }
    if let Some(kind) = flip_of(e, probs) {
        e.kind = kind;
    }
    if !drop {
        return;
    }
    match &mut e.kind {
        Kind::Let { name, def, body }
            if matches!(def.kind, Kind::Cmp { .. })
                && matches!(body.kind, Kind::Flip { .. })
                && probs.contains_key(&Site::of(body.span))
                && body.uses(name) == 0 =>
        {
            *e = (**body).clone();
        }
        Kind::Share {
            src,
            left,
            right,
            body,
        } => {
            let (l, r) = (body.uses(left), body.uses(right));
            if l == 0 || r == 0 {
                let keep = if l == 0 { right.clone() } else { left.clone() };
                let src = src.clone();
                let mut inner = (**body).clone();
                inner.rename(&keep, &src);
                *e = inner;
            }
        }
        _ => {}
    }
}

/// A permutation of `0..n` that is misplaced by about `k` positions on
/// average. It is built back to front: each element is inserted into the
/// sorted suffix after passing each smaller element with probability
/// `(k-1)/k`, so insertion sort keeps walking at each comparison with that
/// probability regardless of the list length.
pub fn nearly_sorted(n: usize, k: usize, rng: &mut impl Rng) -> Vec<i64> {
    let k = k.max(1);
    let walk = (k - 1) as f64 / k as f64;
    let mut suffix: Vec<usize> = Vec::with_capacity(n);
    for id in (0..n).rev() {
        let mut pos = 0;
        while pos < suffix.len() && rng.gen_bool(walk) {
            pos += 1;
        }
        suffix.insert(pos, id);
    }
    let mut rank = vec![0i64; n];
    for (r, id) in suffix.into_iter().enumerate() {
        rank[id] = r as i64;
    }
    rank
}

/// Mean distance between each element's position and its sorted position.
pub fn mean_displacement(xs: &[i64]) -> f64 {
    let mut sorted: Vec<(i64, usize)> = xs.iter().copied().zip(0..).collect();
    sorted.sort();
    let total: usize = sorted.iter().enumerate().map(|(rank, (_, pos))| rank.abs_diff(*pos)).sum();
    total as f64 / xs.len().max(1) as f64
}
