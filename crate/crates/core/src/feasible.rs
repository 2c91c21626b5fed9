//! The feasible posterior set and its weight-matrix description.
//!
//! A posterior `mu` is feasible for prior `mu0`, graph `G` and budget
//! `t = e^eps` when every edge `{i, j}` satisfies
//! `1/t <= (mu_j / mu0_j) / (mu_i / mu0_i) <= t`. Log-ratios are never
//! computed; integer exponents of `t` stand in for them.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{Graph, UnionFind};
use crate::rational::{self, exact_log, Rational};

/// Interior prior distribution.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Prior {
    probs: Vec<Rational>,
}

impl Prior {
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidPrior(format!("needs at least two states, got {}", probs.len())));
        }
        if let Some(i) = probs.iter().position(|p| !p.is_positive()) {
            return Err(Error::InvalidPrior(format!("entry {i} is not positive")));
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidPrior(format!("entries sum to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        Self::new(vec![rational::ratio(1, len.max(1) as i64); len])
    }

    /// Normalizes positive integer weights into a prior.
    pub fn from_weights(weights: &[u64]) -> Result<Self> {
        let total: u64 = weights.iter().sum();
        if total == 0 {
            return Err(Error::InvalidPrior("weights sum to zero".into()));
        }
        Self::new(weights.iter().map(|&w| rational::ratio(w as i64, total as i64)).collect())
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// The prior viewed as a posterior (the no-information point).
    pub fn as_posterior(&self) -> Posterior {
        Posterior { probs: self.probs.clone() }
    }
}

/// Budget parameter `t = e^eps >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Budget {
    t: Rational,
}

impl Budget {
    pub fn new(t: Rational) -> Result<Self> {
        if t < Rational::one() {
            return Err(Error::InvalidBudget(t.to_string()));
        }
        Ok(Self { t })
    }

    pub fn t(&self) -> &Rational {
        &self.t
    }

    /// `t == 1`, where the feasible set collapses to the prior.
    pub fn is_degenerate(&self) -> bool {
        self.t.is_one()
    }

    pub(crate) fn require_nondegenerate(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::DegenerateBudget)
        } else {
            Ok(())
        }
    }
}

/// Probability vector over the states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Posterior {
    probs: Vec<Rational>,
}

impl Posterior {
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        if let Some(i) = probs.iter().position(|p| p.is_negative()) {
            return Err(Error::InvalidPosterior(format!("entry {i} is negative")));
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidPosterior(format!("entries sum to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Scales nonnegative weights (not all zero) to sum to one.
    pub fn normalized(weights: Vec<Rational>) -> Result<Self> {
        let total: Rational = weights.iter().sum();
        if !total.is_positive() || weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidPosterior("weights must be nonnegative and not all zero".into()));
        }
        Ok(Self { probs: weights.into_iter().map(|w| w / &total).collect() })
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(rational::to_f64).collect()
    }
}

impl fmt::Display for Posterior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, p) in self.probs.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Integer antisymmetric matrix `w` with `t^{w_ij}` equal to the pair quotient.
///
/// Always built from an integer potential `c` as `w_ij = c_j - c_i`, so
/// antisymmetry and path additivity hold by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMatrix {
    entries: Vec<Vec<i64>>,
}

impl WeightMatrix {
    pub fn from_potential(potential: &[i64]) -> Self {
        let entries = potential
            .iter()
            .map(|ci| potential.iter().map(|cj| cj - ci).collect())
            .collect();
        Self { entries }
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn is_antisymmetric(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| self.get(i, i) == 0 && (0..n).all(|j| self.get(i, j) == -self.get(j, i)))
    }

    /// `w_ij + w_jk == w_ik` for every triple.
    pub fn is_path_additive(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| self.get(i, j) + self.get(j, k) == self.get(i, k))))
    }
}

fn check_dims(mu: &Posterior, prior: &Prior) -> Result<()> {
    if mu.len() != prior.len() {
        return Err(Error::DimensionMismatch { expected: prior.len(), got: mu.len() });
    }
    Ok(())
}

/// `(mu_j / mu0_j) / (mu_i / mu0_i)`, exactly.
pub fn ratio_quotient(mu: &Posterior, prior: &Prior, i: usize, j: usize) -> Result<Rational> {
    check_dims(mu, prior)?;
    let (m, p) = (mu.probs(), prior.probs());
    if i >= m.len() || j >= m.len() {
        return Err(Error::IndexOutOfRange { index: i.max(j), len: m.len() });
    }
    if m[i].is_zero() {
        return Err(Error::DivideByZero(i));
    }
    Ok((&m[j] * &p[i]) / (&m[i] * &p[j]))
}

/// `mu_j mu0_i <= t mu_i mu0_j`: the one-sided edge constraint, valid with zeros.
fn edge_side_holds(mu: &[Rational], prior: &[Rational], t: &Rational, i: usize, j: usize) -> bool {
    &mu[j] * &prior[i] <= t * &mu[i] * &prior[j]
}

fn edge_side_binds(mu: &[Rational], prior: &[Rational], t: &Rational, i: usize, j: usize) -> bool {
    &mu[j] * &prior[i] == t * &mu[i] * &prior[j]
}

/// Membership in the feasible posterior set.
pub fn is_member(mu: &Posterior, prior: &Prior, g: &Graph, b: &Budget) -> bool {
    if mu.len() != prior.len() || mu.len() != g.num_states() {
        return false;
    }
    let (m, p, t) = (mu.probs(), prior.probs(), b.t());
    g.edges()
        .iter()
        .all(|&(i, j)| edge_side_holds(m, p, t, i, j) && edge_side_holds(m, p, t, j, i))
}

/// An edge constraint violated by a posterior: `quotient(from, to) > t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeViolation {
    pub from: usize,
    pub to: usize,
    /// `None` when the posterior vanishes on `from`.
    pub quotient: Option<Rational>,
}

/// Every oriented edge whose ratio bound fails.
pub fn violated_edges(mu: &Posterior, prior: &Prior, g: &Graph, b: &Budget) -> Vec<EdgeViolation> {
    let (m, p, t) = (mu.probs(), prior.probs(), b.t());
    let mut out = Vec::new();
    for &(a, c) in g.edges() {
        for (i, j) in [(a, c), (c, a)] {
            if !edge_side_holds(m, p, t, i, j) {
                let quotient = ratio_quotient(mu, prior, i, j).ok();
                out.push(EdgeViolation { from: i, to: j, quotient });
            }
        }
    }
    out
}

/// The integer weight matrix of `mu`, when every pair quotient is an exact power of `t`.
pub fn integer_weight_matrix(mu: &Posterior, prior: &Prior, b: &Budget) -> Result<Option<WeightMatrix>> {
    check_dims(mu, prior)?;
    if let Some(i) = mu.probs().iter().position(|p| p.is_zero()) {
        return Err(Error::NotInteriorPosterior(i));
    }
    b.require_nondegenerate()?;
    let mut potential = Vec::with_capacity(mu.len());
    for j in 0..mu.len() {
        let q = ratio_quotient(mu, prior, 0, j)?;
        match exact_log(b.t(), &q) {
            Some(k) => potential.push(k),
            None => return Ok(None),
        }
    }
    Ok(Some(WeightMatrix::from_potential(&potential)))
}

/// `mu` proportional to `t^{c(theta)} mu0(theta)`.
pub fn posterior_from_potential(prior: &Prior, b: &Budget, potential: &[i64]) -> Posterior {
    assert_eq!(prior.len(), potential.len(), "potential must cover every state");
    let base = potential.iter().copied().min().unwrap_or(0);
    let weights: Vec<Rational> = prior
        .probs()
        .iter()
        .zip(potential)
        .map(|(p, &c)| p * rational::pow(b.t(), c - base))
        .collect();
    Posterior::normalized(weights).expect("positive weights")
}

/// The unique posterior with `quotient(i, j) = t^w` on each oriented tree edge `(i, j, w)`.
///
/// The result need not be feasible: non-tree edges may exceed the bound.
pub fn posterior_from_tree_weights(
    g: &Graph,
    tree_edges: &[(usize, usize, i8)],
    prior: &Prior,
    b: &Budget,
) -> Result<Posterior> {
    let n = g.num_states();
    if prior.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: prior.len() });
    }
    if tree_edges.len() + 1 != n {
        return Err(Error::NotSpanningTree(format!("{} edges for {} states", tree_edges.len(), n)));
    }
    let mut uf = UnionFind::new(n);
    let mut adjacency: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for &(i, j, w) in tree_edges {
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange { index: i.max(j), len: n });
        }
        if !g.has_edge(i, j) {
            return Err(Error::NotSpanningTree(format!("({i}, {j}) is not an edge of the graph")));
        }
        if w != 1 && w != -1 {
            return Err(Error::NotSpanningTree(format!("weight {w} on ({i}, {j}) is not +-1")));
        }
        if !uf.union(i, j) {
            return Err(Error::NotSpanningTree(format!("({i}, {j}) closes a cycle")));
        }
        adjacency[i].push((j, w as i64));
        adjacency[j].push((i, -(w as i64)));
    }
    let mut potential = vec![None; n];
    potential[0] = Some(0i64);
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        let cu = potential[u].expect("visited");
        for &(v, w) in &adjacency[u] {
            if potential[v].is_none() {
                potential[v] = Some(cu + w);
                stack.push(v);
            }
        }
    }
    let potential: Vec<i64> = potential.into_iter().map(|c| c.expect("tree spans")).collect();
    Ok(posterior_from_potential(prior, b, &potential))
}

/// Extreme-point test: the binding edges (quotient exactly `t` or `1/t`) span and connect all states.
pub fn is_extreme(mu: &Posterior, prior: &Prior, g: &Graph, b: &Budget) -> Result<bool> {
    b.require_nondegenerate()?;
    if !is_member(mu, prior, g, b) {
        return Err(Error::NotMember);
    }
    let (m, p, t) = (mu.probs(), prior.probs(), b.t());
    let mut uf = UnionFind::new(g.num_states());
    for &(i, j) in g.edges() {
        if edge_side_binds(m, p, t, i, j) || edge_side_binds(m, p, t, j, i) {
            uf.union(i, j);
        }
    }
    Ok(uf.components() == 1)
}

/// Absolute tolerance used by the floating-point checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Floating-point membership: quotient bounds hold up to `tol`.
pub fn is_member_f64(mu: &[f64], prior: &[f64], g: &Graph, t: f64, tol: f64) -> bool {
    if mu.len() != prior.len() || mu.len() != g.num_states() {
        return false;
    }
    g.edges().iter().all(|&(i, j)| match quotient_f64(mu, prior, i, j) {
        Some(q) => q <= t + tol && q >= 1.0 / t - tol,
        None => mu[i].abs() <= tol && mu[j].abs() <= tol,
    })
}

/// Floating-point extremeness: members whose near-binding edges connect all states.
pub fn is_extreme_f64(mu: &[f64], prior: &[f64], g: &Graph, t: f64, tol: f64) -> bool {
    if t <= 1.0 || !is_member_f64(mu, prior, g, t, tol) {
        return false;
    }
    let mut uf = UnionFind::new(g.num_states());
    for &(i, j) in g.edges() {
        if let Some(q) = quotient_f64(mu, prior, i, j) {
            if (q - t).abs() <= tol || (q - 1.0 / t).abs() <= tol {
                uf.union(i, j);
            }
        }
    }
    uf.components() == 1
}

fn quotient_f64(mu: &[f64], prior: &[f64], i: usize, j: usize) -> Option<f64> {
    (mu[i] > 0.0).then(|| (mu[j] / prior[j]) / (mu[i] / prior[i]))
}
