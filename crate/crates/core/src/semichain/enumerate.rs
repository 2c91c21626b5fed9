//! Enumeration of strongly connected semi-chains and the extreme posteriors they induce.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;

use super::spanning::{count_spanning_trees, enumerate_spanning_trees, two_chains_from_spanning_tree};
use super::{between_level_connected, posterior_from_chain, upward_unfoldings_unchecked, SemiChain};
use crate::error::{Error, Result};
use crate::feasible::{Budget, Posterior, Prior};
use crate::graph::Graph;

/// How strongly connected 2-semi-chains are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TwoChainStrategy {
    /// Two-colour every spanning tree, then deduplicate.
    SpanningTrees,
    /// Test all `2^(J-1)` unordered bipartitions directly.
    BipartitionScan,
    /// Whichever of the two has less work: `tau(G)` trees or `2^(J-1)` bipartitions.
    #[default]
    Auto,
}

/// Knobs for [`enumerate_extreme_posteriors_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnumerateOptions {
    pub strategy: TwoChainStrategy,
    /// Stop unfolding once chains reach this many levels.
    pub max_level: Option<usize>,
}

/// A strongly connected semi-chain and its posterior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremePosterior {
    pub chain: SemiChain,
    pub posterior: Posterior,
}

/// Result of enumerating the extreme posteriors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Enumeration {
    /// `t = 1`: the feasible set is the prior alone.
    Degenerate(Posterior),
    Extreme {
        /// One record per chain, in canonical chain order.
        records: Vec<ExtremePosterior>,
        /// Groups of distinct chains that produced the same posterior.
        collisions: Vec<Vec<SemiChain>>,
    },
}

impl Enumeration {
    /// Distinct posteriors, in record order.
    pub fn posteriors(&self) -> Vec<Posterior> {
        match self {
            Enumeration::Degenerate(mu) => vec![mu.clone()],
            Enumeration::Extreme { records, .. } => {
                let mut seen = HashSet::new();
                records
                    .iter()
                    .filter(|r| seen.insert(&r.posterior))
                    .map(|r| r.posterior.clone())
                    .collect()
            }
        }
    }

    pub fn records(&self) -> &[ExtremePosterior] {
        match self {
            Enumeration::Degenerate(_) => &[],
            Enumeration::Extreme { records, .. } => records,
        }
    }

    pub fn collisions(&self) -> &[Vec<SemiChain>] {
        match self {
            Enumeration::Degenerate(_) => &[],
            Enumeration::Extreme { collisions, .. } => collisions,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Enumeration::Degenerate(_))
    }

    /// Number of records (1 for the degenerate case).
    pub fn len(&self) -> usize {
        match self {
            Enumeration::Degenerate(_) => 1,
            Enumeration::Extreme { records, .. } => records.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// All strongly connected 2-semi-chains, sorted and duplicate-free.
pub fn enumerate_two_semichains(g: &Graph) -> Vec<SemiChain> {
    enumerate_two_semichains_with(g, TwoChainStrategy::Auto)
}

pub fn enumerate_two_semichains_with(g: &Graph, strategy: TwoChainStrategy) -> Vec<SemiChain> {
    let strategy = match strategy {
        TwoChainStrategy::Auto => auto_strategy(g),
        s => s,
    };
    let mut chains: Vec<SemiChain> = match strategy {
        TwoChainStrategy::SpanningTrees => {
            let mut set = HashSet::new();
            for tree in enumerate_spanning_trees(g) {
                let (a, b) = two_chains_from_spanning_tree(&tree);
                set.insert(a);
                set.insert(b);
            }
            set.into_iter().collect()
        }
        _ => bipartition_scan(g),
    };
    chains.sort();
    chains
}

fn auto_strategy(g: &Graph) -> TwoChainStrategy {
    let bipartitions = BigInt::from(1u8) << (g.num_states() - 1);
    if count_spanning_trees(g) <= bipartitions {
        TwoChainStrategy::SpanningTrees
    } else {
        TwoChainStrategy::BipartitionScan
    }
}

fn bipartition_scan(g: &Graph) -> Vec<SemiChain> {
    let n = g.num_states();
    assert!(n <= 63, "bipartition scan supports at most 63 states");
    let mut out = Vec::new();
    let mut level = vec![1usize; n];
    // State 0 always sits on level 1; bit k of the mask lifts state k + 1 to level 2.
    for mask in 1u64..(1u64 << (n - 1)) {
        for (s, l) in level.iter_mut().enumerate().skip(1) {
            *l = 1 + (mask >> (s - 1) & 1) as usize;
        }
        if between_level_connected(&level, g) {
            let chain = SemiChain::from_level_map(&level).expect("two nonempty levels");
            out.push(chain.reverse());
            out.push(chain);
        }
    }
    out
}

/// All strongly connected semi-chains of every length.
pub fn enumerate_all_semichains(g: &Graph) -> Result<Vec<SemiChain>> {
    enumerate_all_semichains_up_to(g, None, TwoChainStrategy::Auto)
}

/// Unfolding closure of the 2-semi-chains, breadth-first by level count.
///
/// Every chain has exactly one downward folding, so the closure is a forest
/// and no chain can be reached twice. A repeat is reported as an
/// [`Error::Invariant`]. Output is sorted by level count, then levels.
pub fn enumerate_all_semichains_up_to(
    g: &Graph,
    max_level: Option<usize>,
    strategy: TwoChainStrategy,
) -> Result<Vec<SemiChain>> {
    let cap = max_level.unwrap_or(usize::MAX);
    if cap < 2 {
        return Ok(Vec::new());
    }
    let mut frontier = enumerate_two_semichains_with(g, strategy);
    let mut seen: HashSet<SemiChain> = frontier.iter().cloned().collect();
    let mut all = frontier.clone();
    let mut levels = 2;
    while !frontier.is_empty() && levels < cap {
        let mut next = Vec::new();
        for chain in &frontier {
            for child in upward_unfoldings_unchecked(chain, g) {
                if !seen.insert(child.clone()) {
                    return Err(Error::Invariant(format!("unfolding reached {child} twice")));
                }
                next.push(child);
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
        levels += 1;
    }
    all.sort_by(|a, b| a.num_levels().cmp(&b.num_levels()).then_with(|| a.cmp(b)));
    Ok(all)
}

/// Extreme posteriors of the feasible set, one per strongly connected semi-chain.
pub fn enumerate_extreme_posteriors(g: &Graph, prior: &Prior, b: &Budget) -> Result<Enumeration> {
    enumerate_extreme_posteriors_with(g, prior, b, EnumerateOptions::default())
}

pub fn enumerate_extreme_posteriors_with(
    g: &Graph,
    prior: &Prior,
    b: &Budget,
    options: EnumerateOptions,
) -> Result<Enumeration> {
    if prior.len() != g.num_states() {
        return Err(Error::DimensionMismatch { expected: g.num_states(), got: prior.len() });
    }
    if b.is_degenerate() {
        return Ok(Enumeration::Degenerate(prior.as_posterior()));
    }
    let chains = enumerate_all_semichains_up_to(g, options.max_level, options.strategy)?;
    let records: Vec<ExtremePosterior> = chains
        .into_iter()
        .map(|chain| {
            let posterior = posterior_from_chain(&chain, prior, b);
            ExtremePosterior { chain, posterior }
        })
        .collect();
    let mut groups: BTreeMap<&Posterior, Vec<SemiChain>> = BTreeMap::new();
    for r in &records {
        groups.entry(&r.posterior).or_default().push(r.chain.clone());
    }
    let collisions = groups.into_values().filter(|v| v.len() > 1).collect();
    Ok(Enumeration::Extreme { records, collisions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasible::{is_extreme, is_member};
    use crate::graph::StateSpace;
    use crate::rational::{int, ratio};

    fn states(n: usize) -> StateSpace {
        StateSpace::numbered(n).unwrap()
    }

    fn square() -> Graph {
        Graph::build(states(4), &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn strategies_agree() {
        let graphs = [
            Graph::complete(states(4)),
            Graph::path(states(5)),
            Graph::cycle(states(5)),
            square(),
            Graph::build(states(5), &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap(),
        ];
        for g in &graphs {
            let a = enumerate_two_semichains_with(g, TwoChainStrategy::SpanningTrees);
            let b = enumerate_two_semichains_with(g, TwoChainStrategy::BipartitionScan);
            assert_eq!(a, b);
            assert_eq!(enumerate_two_semichains(g), a);
        }
    }

    #[test]
    fn complete_graph_two_chain_count() {
        for n in 2..=6usize {
            let chains = enumerate_two_semichains(&Graph::complete(states(n)));
            assert_eq!(chains.len(), (1 << n) - 2);
        }
    }

    #[test]
    fn square_has_two_plus_four_chains() {
        let g = square();
        assert_eq!(enumerate_two_semichains(&g).len(), 2);
        let all = enumerate_all_semichains(&g).unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(all.iter().filter(|c| c.num_levels() == 3).count(), 4);
        let capped = enumerate_all_semichains_up_to(&g, Some(2), TwoChainStrategy::Auto).unwrap();
        assert_eq!(capped.len(), 2);
    }

    #[test]
    fn path3_closure() {
        let g = Graph::path(states(3));
        let all = enumerate_all_semichains(&g).unwrap();
        let expected: Vec<SemiChain> = [
            vec![vec![0, 2], vec![1]],
            vec![vec![1], vec![0, 2]],
            vec![vec![0], vec![1], vec![2]],
            vec![vec![2], vec![1], vec![0]],
        ]
        .into_iter()
        .map(|l| SemiChain::new(l).unwrap())
        .collect();
        assert_eq!(all.len(), 4);
        for c in &expected {
            assert!(all.contains(c), "{c} missing");
        }
    }

    #[test]
    fn complete_graph_posteriors() {
        let g = Graph::complete(states(3));
        let prior = Prior::uniform(3).unwrap();
        let b = Budget::new(int(2)).unwrap();
        let e = enumerate_extreme_posteriors(&g, &prior, &b).unwrap();
        assert_eq!(e.len(), 6);
        assert!(e.collisions().is_empty());
        let posts = e.posteriors();
        assert!(posts.contains(&Posterior::new(vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)]).unwrap()));
        assert!(posts.contains(&Posterior::new(vec![ratio(1, 4), ratio(1, 4), ratio(1, 2)]).unwrap()));
        for mu in &posts {
            assert!(is_member(mu, &prior, &g, &b));
            assert!(is_extreme(mu, &prior, &g, &b).unwrap());
        }
    }

    #[test]
    fn square_parity_posterior() {
        let g = square();
        let prior = Prior::uniform(4).unwrap();
        let b = Budget::new(int(2)).unwrap();
        let e = enumerate_extreme_posteriors(&g, &prior, &b).unwrap();
        assert_eq!(e.posteriors().len(), 6);
        let parity = SemiChain::new(vec![vec![0, 3], vec![1, 2]]).unwrap();
        let rec = e.records().iter().find(|r| r.chain == parity).unwrap();
        assert_eq!(
            rec.posterior,
            Posterior::new(vec![ratio(1, 6), ratio(1, 3), ratio(1, 3), ratio(1, 6)]).unwrap()
        );
    }

    #[test]
    fn unit_budget_is_degenerate() {
        let g = Graph::path(states(4));
        let prior = Prior::from_weights(&[1, 2, 3, 4]).unwrap();
        let e = enumerate_extreme_posteriors(&g, &prior, &Budget::new(int(1)).unwrap()).unwrap();
        assert!(e.is_degenerate());
        assert_eq!(e.posteriors(), vec![prior.as_posterior()]);
    }

    #[test]
    fn closure_is_reversal_closed_and_sorted() {
        let g = Graph::path(states(5));
        let all = enumerate_all_semichains(&g).unwrap();
        let set: HashSet<_> = all.iter().cloned().collect();
        assert!(all.iter().all(|c| set.contains(&c.reverse())));
        assert!(all.windows(2).all(|w| (w[0].num_levels(), &w[0]) < (w[1].num_levels(), &w[1])));
    }
}
