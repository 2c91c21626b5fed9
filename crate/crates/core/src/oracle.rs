//! Brute-force ground truth for the feasible polytope.
//!
//! Vertices are found from the H-representation alone: pick `J - 1`
//! inequalities to hold with equality, add `sum(mu) = 1`, solve, and keep the
//! feasible solutions. Semi-chains are found by scanning level assignments.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::feasible::{posterior_from_potential, Budget, Posterior, Prior};
use crate::graph::{Graph, UnionFind};
use crate::linalg;
use crate::rational::Rational;
use crate::semichain::{
    enumerate_extreme_posteriors_with, is_strongly_connected, validate_semichain, EnumerateOptions, Enumeration,
    SemiChain,
};

/// Largest state count accepted by [`vertex_enumeration`].
pub const DEFAULT_ORACLE_CAP: usize = 8;
/// Largest state count accepted by [`exhaustive_semichain_scan`].
pub const DEFAULT_SCAN_CAP: usize = 9;

/// `mu_upper * mu0_lower <= t * mu_lower * mu0_upper`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inequality {
    pub upper: usize,
    pub lower: usize,
    /// Coefficient of `mu_upper` (`mu0_lower`).
    pub upper_coef: Rational,
    /// Coefficient of `mu_lower` (`-t * mu0_upper`).
    pub lower_coef: Rational,
}

impl Inequality {
    /// Left-hand side `a . mu`; feasible when `<= 0`.
    pub fn lhs(&self, mu: &[Rational]) -> Rational {
        &self.upper_coef * &mu[self.upper] + &self.lower_coef * &mu[self.lower]
    }

    pub fn dense(&self, n: usize) -> Vec<Rational> {
        let mut row = vec![Rational::zero(); n];
        row[self.upper] = self.upper_coef.clone();
        row[self.lower] = self.lower_coef.clone();
        row
    }
}

/// Two inequalities per edge plus `sum(mu) = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HRep {
    num_states: usize,
    inequalities: Vec<Inequality>,
}

impl HRep {
    /// Rows `2k` and `2k + 1` belong to edge `k`: `(i, j)` bounds `mu_j`, then `mu_i`.
    pub fn new(g: &Graph, prior: &Prior, b: &Budget) -> Result<Self> {
        if prior.len() != g.num_states() {
            return Err(Error::DimensionMismatch { expected: g.num_states(), got: prior.len() });
        }
        let (p, t) = (prior.probs(), b.t());
        let row = |upper: usize, lower: usize| Inequality {
            upper,
            lower,
            upper_coef: p[lower].clone(),
            lower_coef: -(t * &p[upper]),
        };
        let inequalities = g.edges().iter().flat_map(|&(i, j)| [row(j, i), row(i, j)]).collect();
        Ok(Self { num_states: g.num_states(), inequalities })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn inequalities(&self) -> &[Inequality] {
        &self.inequalities
    }

    /// All inequalities hold and every coordinate is nonnegative.
    pub fn contains(&self, mu: &[Rational]) -> bool {
        mu.iter().all(|x| !x.is_negative())
            && mu.iter().sum::<Rational>().is_one()
            && self.inequalities.iter().all(|r| !r.lhs(mu).is_positive())
    }

    /// Solves the given rows at equality together with the normalization.
    fn solve_binding(&self, rows: &[usize]) -> Option<Vec<Rational>> {
        let n = self.num_states;
        let mut a: Vec<Vec<Rational>> = rows.iter().map(|&r| self.inequalities[r].dense(n)).collect();
        a.push(vec![Rational::one(); n]);
        let mut rhs = vec![Rational::zero(); n];
        rhs[n - 1] = Rational::one();
        linalg::solve(a, rhs)
    }
}

fn check_size(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::InstanceTooLarge { states: n, cap });
    }
    Ok(())
}

/// Vertices of the feasible polytope, with the default state cap.
pub fn vertex_enumeration(g: &Graph, prior: &Prior, b: &Budget) -> Result<Vec<Posterior>> {
    vertex_enumeration_with_cap(g, prior, b, DEFAULT_ORACLE_CAP)
}

/// Vertices of the feasible polytope, sorted.
///
/// A depth-first search over the edges decides for each whether neither, the
/// first or the second of its inequalities binds. Branches are cut when the
/// chosen rows close a cycle (the system is then singular, or it forces zero
/// coordinates) or when a decided component already violates a row. Each
/// distinct leaf is then re-solved as a dense `J x J` system and re-checked
/// against every row.
pub fn vertex_enumeration_with_cap(g: &Graph, prior: &Prior, b: &Budget, cap: usize) -> Result<Vec<Posterior>> {
    b.require_nondegenerate()?;
    let n = g.num_states();
    check_size(n, cap)?;
    let hrep = HRep::new(g, prior, b)?;
    let mut search = BindingSearch {
        g,
        leaves: HashMap::new(),
        rows: Vec::with_capacity(n - 1),
    };
    let state = Components { comp: (0..n).collect(), exponent: vec![0; n] };
    search.descend(0, &state);

    let mut out = BTreeSet::new();
    for (exponents, rows) in search.leaves {
        let solved = hrep
            .solve_binding(&rows)
            .ok_or_else(|| Error::Invariant(format!("binding rows {rows:?} are singular")))?;
        if !hrep.contains(&solved) || solved.iter().any(|x| !x.is_positive()) {
            return Err(Error::Invariant(format!("binding rows {rows:?} give an infeasible point")));
        }
        let expected = posterior_from_potential(prior, b, &exponents);
        if expected.probs() != solved.as_slice() {
            return Err(Error::Invariant(format!("binding rows {rows:?} disagree with their exponents")));
        }
        out.insert(expected);
    }
    Ok(out.into_iter().collect())
}

/// Component labels and exponents: `mu_s / mu0_s = t^exponent[s] * (root ratio)`.
#[derive(Clone)]
struct Components {
    comp: Vec<usize>,
    exponent: Vec<i64>,
}

struct BindingSearch<'g> {
    g: &'g Graph,
    /// Normalized exponent vector to the first row set that produced it.
    leaves: HashMap<Vec<i64>, Vec<usize>>,
    rows: Vec<usize>,
}

impl BindingSearch<'_> {
    fn descend(&mut self, edge: usize, state: &Components) {
        let n = self.g.num_states();
        if self.rows.len() + 1 == n {
            let base = *state.exponent.iter().min().expect("nonempty");
            let key: Vec<i64> = state.exponent.iter().map(|e| e - base).collect();
            self.leaves.entry(key).or_insert_with(|| self.rows.clone());
            return;
        }
        let edges = self.g.edges();
        if edge == edges.len() {
            return;
        }
        let (i, j) = edges[edge];
        if state.comp[i] != state.comp[j] {
            // Row 2e binds mu_j / mu0_j = t mu_i / mu0_i; row 2e + 1 the reverse.
            for (row, lo, hi) in [(2 * edge, i, j), (2 * edge + 1, j, i)] {
                if let Some(next) = self.bind(state, lo, hi) {
                    self.rows.push(row);
                    self.descend(edge + 1, &next);
                    self.rows.pop();
                }
            }
        }
        if self.can_still_span(edge + 1, state) {
            self.descend(edge + 1, state);
        }
    }

    /// Merges the components of `lo` and `hi` with `exponent[hi] = exponent[lo] + 1`,
    /// rejecting the merge when an edge inside the result spans more than one step.
    fn bind(&self, state: &Components, lo: usize, hi: usize) -> Option<Components> {
        let mut next = state.clone();
        let (keep, moved) = (state.comp[lo], state.comp[hi]);
        let shift = state.exponent[lo] + 1 - state.exponent[hi];
        for s in 0..next.comp.len() {
            if next.comp[s] == moved {
                next.comp[s] = keep;
                next.exponent[s] += shift;
            }
        }
        let ok = self.g.edges().iter().all(|&(a, b)| {
            next.comp[a] != keep || next.comp[b] != keep || (next.exponent[a] - next.exponent[b]).abs() <= 1
        });
        ok.then_some(next)
    }

    fn can_still_span(&self, from: usize, state: &Components) -> bool {
        let n = self.g.num_states();
        let mut uf = UnionFind::new(n);
        for s in 0..n {
            uf.union(s, state.comp[s]);
        }
        for &(a, b) in &self.g.edges()[from..] {
            uf.union(a, b);
        }
        uf.components() == 1
    }
}

/// Vertex enumeration over every `(J-1)`-subset of rows, with no pruning.
///
/// Exponential in the row count; meant for cross-checking on small graphs.
pub fn vertex_enumeration_naive(g: &Graph, prior: &Prior, b: &Budget, cap: usize) -> Result<Vec<Posterior>> {
    b.require_nondegenerate()?;
    let n = g.num_states();
    check_size(n, cap)?;
    let hrep = HRep::new(g, prior, b)?;
    let m = hrep.inequalities.len();
    let mut out = BTreeSet::new();
    let mut subset: Vec<usize> = (0..n - 1).collect();
    if n - 1 > m {
        return Ok(Vec::new());
    }
    loop {
        if let Some(mu) = hrep.solve_binding(&subset) {
            if mu.iter().all(|x| x.is_positive()) && hrep.contains(&mu) {
                out.insert(Posterior::new(mu).expect("normalized and nonnegative"));
            }
        }
        // Advance to the next combination in lexicographic order.
        let k = subset.len();
        let Some(pos) = (0..k).rev().find(|&p| subset[p] < m - k + p) else {
            break;
        };
        subset[pos] += 1;
        for q in pos + 1..k {
            subset[q] = subset[q - 1] + 1;
        }
    }
    Ok(out.into_iter().collect())
}

/// Outcome of comparing the oracle with the semi-chain pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossCheckReport {
    pub oracle_vertices: Vec<Posterior>,
    pub chain_vertices: Vec<Posterior>,
    pub missing_from_chains: Vec<Posterior>,
    pub extra_in_chains: Vec<Posterior>,
    pub chain_collisions: Vec<Vec<SemiChain>>,
    /// Number of chains enumerated (one per record).
    pub chain_count: usize,
}

impl CrossCheckReport {
    fn build(oracle: Vec<Posterior>, enumeration: &Enumeration) -> Self {
        let chain: BTreeSet<Posterior> = enumeration.posteriors().into_iter().collect();
        let oracle_set: BTreeSet<Posterior> = oracle.into_iter().collect();
        Self {
            missing_from_chains: oracle_set.difference(&chain).cloned().collect(),
            extra_in_chains: chain.difference(&oracle_set).cloned().collect(),
            oracle_vertices: oracle_set.into_iter().collect(),
            chain_vertices: chain.into_iter().collect(),
            chain_collisions: enumeration.collisions().to_vec(),
            chain_count: enumeration.len(),
        }
    }

    /// Same vertex sets and no collisions.
    pub fn is_match(&self) -> bool {
        self.missing_from_chains.is_empty() && self.extra_in_chains.is_empty() && self.chain_collisions.is_empty()
    }
}

/// Runs both pipelines with the default cap.
pub fn cross_check(g: &Graph, prior: &Prior, b: &Budget) -> Result<CrossCheckReport> {
    cross_check_with_cap(g, prior, b, DEFAULT_ORACLE_CAP)
}

/// At `t = 1` both sides are the prior alone.
pub fn cross_check_with_cap(g: &Graph, prior: &Prior, b: &Budget, cap: usize) -> Result<CrossCheckReport> {
    check_size(g.num_states(), cap)?;
    let enumeration = enumerate_extreme_posteriors_with(g, prior, b, EnumerateOptions::default())?;
    let oracle = if b.is_degenerate() {
        let mu0 = prior.as_posterior();
        let hrep = HRep::new(g, prior, b)?;
        if !hrep.contains(mu0.probs()) {
            return Err(Error::Invariant("the prior violates its own constraints".into()));
        }
        vec![mu0]
    } else {
        vertex_enumeration_with_cap(g, prior, b, cap)?
    };
    Ok(CrossCheckReport::build(oracle, &enumeration))
}

/// Every strongly connected semi-chain, found by scanning level assignments.
///
/// States are assigned levels in index order; a partial assignment is
/// dropped as soon as an edge between assigned states skips a level. Complete
/// assignments whose lowest level is 1 are exactly the ordered partitions
/// satisfying the semi-chain condition (the level set of a connected graph
/// is an interval), and are then filtered for strong connectivity.
pub fn exhaustive_semichain_scan(g: &Graph, cap: usize) -> Result<Vec<SemiChain>> {
    let n = g.num_states();
    check_size(n, cap)?;
    let mut levels = vec![0usize; n];
    let mut out = Vec::new();
    scan(g, 0, &mut levels, &mut out)?;
    out.sort_by(|a: &SemiChain, b| a.num_levels().cmp(&b.num_levels()).then_with(|| a.cmp(b)));
    let unique: HashSet<&SemiChain> = out.iter().collect();
    if unique.len() != out.len() {
        return Err(Error::Invariant("scan produced a chain twice".into()));
    }
    Ok(out)
}

fn scan(g: &Graph, s: usize, levels: &mut Vec<usize>, out: &mut Vec<SemiChain>) -> Result<()> {
    let n = g.num_states();
    if s == n {
        if levels.iter().min() != Some(&1) || levels.iter().max() == Some(&1) {
            return Ok(());
        }
        let chain = SemiChain::from_level_map(levels)?;
        if validate_semichain(&chain, g)? && is_strongly_connected(&chain, g)? {
            out.push(chain);
        }
        return Ok(());
    }
    for l in 1..=n {
        let ok = g.neighbors(s).iter().all(|&v| v > s || levels[v].abs_diff(l) <= 1);
        if ok {
            levels[s] = l;
            scan(g, s + 1, levels, out)?;
        }
    }
    levels[s] = 0;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::StateSpace;
    use crate::rational::{int, ratio};

    fn states(n: usize) -> StateSpace {
        StateSpace::numbered(n).unwrap()
    }

    fn square() -> Graph {
        Graph::build(states(4), &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn post(v: &[(i64, i64)]) -> Posterior {
        Posterior::new(v.iter().map(|&(a, b)| ratio(a, b)).collect()).unwrap()
    }

    #[test]
    fn hrep_shape() {
        let g = square();
        let h = HRep::new(&g, &Prior::uniform(4).unwrap(), &Budget::new(int(2)).unwrap()).unwrap();
        assert_eq!(h.inequalities().len(), 8);
        assert!(h.contains(Prior::uniform(4).unwrap().probs()));
    }

    #[test]
    fn two_state_vertices() {
        let g = Graph::complete(states(2));
        let v = vertex_enumeration(&g, &Prior::uniform(2).unwrap(), &Budget::new(int(2)).unwrap()).unwrap();
        assert_eq!(v, vec![post(&[(1, 3), (2, 3)]), post(&[(2, 3), (1, 3)])]);
    }

    #[test]
    fn small_counts() {
        let b = Budget::new(int(2)).unwrap();
        let k3 = Graph::complete(states(3));
        assert_eq!(vertex_enumeration(&k3, &Prior::uniform(3).unwrap(), &b).unwrap().len(), 6);
        let sq = square();
        assert_eq!(vertex_enumeration(&sq, &Prior::uniform(4).unwrap(), &b).unwrap().len(), 6);
    }

    #[test]
    fn pruned_search_matches_naive_subsets() {
        let graphs = [
            Graph::complete(states(3)),
            Graph::complete(states(4)),
            Graph::path(states(4)),
            square(),
            Graph::build(states(5), &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]).unwrap(),
        ];
        for g in &graphs {
            let n = g.num_states();
            let weights: Vec<u64> = (1..=n as u64).collect();
            for prior in [Prior::uniform(n).unwrap(), Prior::from_weights(&weights).unwrap()] {
                for t in [ratio(3, 2), int(2)] {
                    let b = Budget::new(t).unwrap();
                    assert_eq!(
                        vertex_enumeration(g, &prior, &b).unwrap(),
                        vertex_enumeration_naive(g, &prior, &b, 6).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn caps_and_degenerate_budget() {
        let g = Graph::complete(states(9));
        let prior = Prior::uniform(9).unwrap();
        let b = Budget::new(int(2)).unwrap();
        assert_eq!(vertex_enumeration(&g, &prior, &b).unwrap_err(), Error::InstanceTooLarge { states: 9, cap: 8 });
        let small = Graph::complete(states(3));
        assert_eq!(
            vertex_enumeration(&small, &Prior::uniform(3).unwrap(), &Budget::new(int(1)).unwrap()).unwrap_err(),
            Error::DegenerateBudget
        );
        assert!(exhaustive_semichain_scan(&Graph::path(states(10)), DEFAULT_SCAN_CAP).is_err());
    }

    #[test]
    fn cross_check_examples() {
        let g = Graph::complete(states(4));
        let prior = Prior::from_weights(&[1, 2, 3, 4]).unwrap();
        let r = cross_check(&g, &prior, &Budget::new(ratio(3, 2)).unwrap()).unwrap();
        assert!(r.is_match());
        assert_eq!(r.oracle_vertices.len(), 14);

        let r = cross_check(&g, &prior, &Budget::new(int(1)).unwrap()).unwrap();
        assert!(r.is_match());
        assert_eq!(r.oracle_vertices, vec![prior.as_posterior()]);
    }

    #[test]
    fn scan_examples() {
        assert_eq!(exhaustive_semichain_scan(&Graph::complete(states(3)), 9).unwrap().len(), 6);
        assert_eq!(exhaustive_semichain_scan(&square(), 9).unwrap().len(), 6);
        assert_eq!(exhaustive_semichain_scan(&Graph::path(states(3)), 9).unwrap().len(), 4);
    }
}
