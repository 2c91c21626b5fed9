//! Semi-chains: ordered partitions of the states into levels such that every
//! graph edge stays inside a level or joins two adjacent levels.
//!
//! Levels are numbered from 1. A semi-chain is *strongly connected* when its
//! between-level edges alone connect every state. Strongly connected
//! semi-chains are in bijection with the extreme posteriors; see
//! [`posterior_from_chain`].

mod enumerate;
mod spanning;

pub use enumerate::{
    enumerate_all_semichains, enumerate_all_semichains_up_to, enumerate_extreme_posteriors,
    enumerate_extreme_posteriors_with, enumerate_two_semichains, enumerate_two_semichains_with,
    Enumeration, EnumerateOptions, ExtremePosterior, TwoChainStrategy,
};
pub use spanning::{
    count_spanning_trees, enumerate_spanning_trees, two_chains_from_spanning_tree, SpanningTree,
    SpanningTrees,
};

use std::fmt;

use crate::error::{Error, Result};
use crate::feasible::{posterior_from_potential, Budget, Posterior, Prior};
use crate::graph::{Graph, StateSpace, UnionFind};

/// Ordered partition of the states `0..n` into `L >= 2` nonempty levels.
///
/// Each level is kept sorted, so structural equality is set equality and the
/// derived ordering is a canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SemiChain {
    levels: Vec<Vec<usize>>,
}

impl SemiChain {
    /// Validates the partition shape: at least two nonempty, disjoint levels covering `0..n`.
    pub fn new(mut levels: Vec<Vec<usize>>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidSemiChain(format!("{} level(s); at least 2 required", levels.len())));
        }
        let n: usize = levels.iter().map(Vec::len).sum();
        let mut seen = vec![false; n];
        for (l, level) in levels.iter_mut().enumerate() {
            if level.is_empty() {
                return Err(Error::InvalidSemiChain(format!("level {} is empty", l + 1)));
            }
            level.sort_unstable();
            for &s in level.iter() {
                if s >= n || seen[s] {
                    return Err(Error::InvalidSemiChain(format!(
                        "levels do not partition 0..{n} (state {s} repeated or out of range)"
                    )));
                }
                seen[s] = true;
            }
        }
        Ok(Self { levels })
    }

    /// Builds from a 1-based level number per state.
    pub fn from_level_map(level_of: &[usize]) -> Result<Self> {
        let top = level_of.iter().copied().max().unwrap_or(0);
        if level_of.contains(&0) {
            return Err(Error::InvalidSemiChain("level numbers start at 1".into()));
        }
        let mut levels = vec![Vec::new(); top];
        for (s, &l) in level_of.iter().enumerate() {
            levels[l - 1].push(s);
        }
        Self::new(levels)
    }

    /// Builds from levels of state labels.
    pub fn from_labels(states: &StateSpace, levels: &[Vec<&str>]) -> Result<Self> {
        let levels = levels
            .iter()
            .map(|level| level.iter().map(|l| states.index_of(l)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let chain = Self::new(levels)?;
        if chain.num_states() != states.len() {
            return Err(Error::StateSetMismatch { chain: chain.num_states(), graph: states.len() });
        }
        Ok(chain)
    }

    pub(crate) fn from_sorted_levels_unchecked(levels: Vec<Vec<usize>>) -> Self {
        debug_assert!(Self::new(levels.clone()).is_ok());
        Self { levels }
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn num_states(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    /// Level `l` (1-based).
    pub fn level(&self, l: usize) -> &[usize] {
        &self.levels[l - 1]
    }

    /// 1-based level number of each state.
    pub fn level_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.num_states()];
        for (l, level) in self.levels.iter().enumerate() {
            for &s in level {
                out[s] = l + 1;
            }
        }
        out
    }

    /// Levels in the opposite order.
    pub fn reverse(&self) -> SemiChain {
        Self { levels: self.levels.iter().rev().cloned().collect() }
    }

    /// `(L2, L1 ∪ L3, L4, ..., LL)`.
    pub fn downward_fold(&self) -> Result<SemiChain> {
        let l = self.num_levels();
        if l < 3 {
            return Err(Error::TooFewLevels(l));
        }
        let mut levels = Vec::with_capacity(l - 1);
        levels.push(self.levels[1].clone());
        levels.push(merge_sorted(&self.levels[0], &self.levels[2]));
        levels.extend(self.levels[3..].iter().cloned());
        Ok(Self { levels })
    }

    /// `(L1, ..., L(L-3), L(L-2) ∪ LL, L(L-1))`.
    pub fn upward_fold(&self) -> Result<SemiChain> {
        let l = self.num_levels();
        if l < 3 {
            return Err(Error::TooFewLevels(l));
        }
        let mut levels: Vec<Vec<usize>> = self.levels[..l - 3].to_vec();
        levels.push(merge_sorted(&self.levels[l - 3], &self.levels[l - 1]));
        levels.push(self.levels[l - 2].clone());
        Ok(Self { levels })
    }

    /// Renders as `({a,b},{c})` using state labels.
    pub fn display<'a>(&'a self, states: &'a StateSpace) -> impl fmt::Display + 'a {
        LabeledChain { chain: self, states }
    }

    /// Levels as lists of state labels.
    pub fn labeled_levels(&self, states: &StateSpace) -> Vec<Vec<String>> {
        self.levels
            .iter()
            .map(|level| level.iter().map(|&s| states.label(s).to_string()).collect())
            .collect()
    }
}

struct LabeledChain<'a> {
    chain: &'a SemiChain,
    states: &'a StateSpace,
}

impl fmt::Display for LabeledChain<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, level) in self.chain.levels.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (m, &s) in level.iter().enumerate() {
                if m > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.states.label(s))?;
            }
            write!(f, "}}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for SemiChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let levels: Vec<String> = self
            .levels
            .iter()
            .map(|l| format!("{{{}}}", l.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "({})", levels.join(","))
    }
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out
}

fn check_states(c: &SemiChain, g: &Graph) -> Result<()> {
    if c.num_states() != g.num_states() {
        return Err(Error::StateSetMismatch { chain: c.num_states(), graph: g.num_states() });
    }
    Ok(())
}

/// Every edge of `g` joins states whose levels differ by at most one.
pub fn validate_semichain(c: &SemiChain, g: &Graph) -> Result<bool> {
    check_states(c, g)?;
    let level = c.level_of();
    Ok(g.edges().iter().all(|&(i, j)| level[i].abs_diff(level[j]) <= 1))
}

/// The between-level edges connect all states.
pub fn is_strongly_connected(c: &SemiChain, g: &Graph) -> Result<bool> {
    if !validate_semichain(c, g)? {
        return Err(Error::InvalidSemiChain("an edge skips a level".into()));
    }
    let level = c.level_of();
    Ok(between_level_connected(&level, g))
}

pub(crate) fn between_level_connected(level: &[usize], g: &Graph) -> bool {
    let mut uf = UnionFind::new(g.num_states());
    for &(i, j) in g.edges() {
        if level[i] != level[j] && uf.union(i, j) && uf.components() == 1 {
            return true;
        }
    }
    uf.components() == 1
}

/// `mu(theta)` proportional to `t^{l(theta)} mu0(theta)` where `l` is the level of `theta`.
pub fn posterior_from_chain(c: &SemiChain, prior: &Prior, b: &Budget) -> Posterior {
    let potential: Vec<i64> = c.level_of().into_iter().map(|l| l as i64).collect();
    posterior_from_potential(prior, b, &potential)
}

/// All upward unfoldings `(S, L1, L2 \ S, L3, ..., LL)` of `c`.
///
/// `S` ranges over nonempty proper subsets of level 2 with no edge into
/// `(L2 \ S) ∪ L3`, returned in lexicographic order of `S`.
pub fn enumerate_upward_unfoldings(c: &SemiChain, g: &Graph) -> Result<Vec<SemiChain>> {
    if !validate_semichain(c, g)? {
        return Err(Error::InvalidSemiChain("an edge skips a level".into()));
    }
    Ok(upward_unfoldings_unchecked(c, g))
}

pub(crate) fn upward_unfoldings_unchecked(c: &SemiChain, g: &Graph) -> Vec<SemiChain> {
    let second = &c.levels[1];
    if second.len() < 2 {
        return Vec::new();
    }
    let level = c.level_of();
    // S must be a union of components of the subgraph induced on level 2, and
    // each such component must avoid level 3 entirely.
    let mut uf = UnionFind::new(g.num_states());
    for &(i, j) in g.edges() {
        if level[i] == 2 && level[j] == 2 {
            uf.union(i, j);
        }
    }
    let mut components: Vec<(usize, Vec<usize>, bool)> = Vec::new();
    for &s in second {
        let root = uf.find(s);
        let touches_third = g.neighbors(s).iter().any(|&v| level[v] == 3);
        match components.iter_mut().find(|(r, _, _)| *r == root) {
            Some((_, members, touches)) => {
                members.push(s);
                *touches |= touches_third;
            }
            None => components.push((root, vec![s], touches_third)),
        }
    }
    let free: Vec<&Vec<usize>> = components.iter().filter(|(_, _, t)| !t).map(|(_, m, _)| m).collect();
    assert!(free.len() < 64, "too many free components to enumerate");
    let mut splits: Vec<Vec<usize>> = Vec::new();
    for mask in 1u64..(1u64 << free.len()) {
        let mut lower: Vec<usize> = free
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .flat_map(|(_, m)| m.iter().copied())
            .collect();
        if lower.len() == second.len() {
            continue;
        }
        lower.sort_unstable();
        splits.push(lower);
    }
    splits.sort();
    splits
        .into_iter()
        .map(|lower| {
            let upper: Vec<usize> = second.iter().copied().filter(|s| lower.binary_search(s).is_err()).collect();
            let mut levels = Vec::with_capacity(c.num_levels() + 1);
            levels.push(lower);
            levels.push(c.levels[0].clone());
            levels.push(upper);
            levels.extend(c.levels[2..].iter().cloned());
            SemiChain::from_sorted_levels_unchecked(levels)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasible::Posterior;
    use crate::rational::{int, ratio};

    /// The binary 2x2 differential graph; states ordered 00, 01, 10, 11.
    fn square() -> Graph {
        let s = StateSpace::new(["00", "01", "10", "11"].map(String::from).to_vec()).unwrap();
        Graph::build_labeled(s, &[("00", "01"), ("00", "10"), ("01", "11"), ("10", "11")]).unwrap()
    }

    fn chain(g: &Graph, levels: &[&[&str]]) -> SemiChain {
        let levels: Vec<Vec<&str>> = levels.iter().map(|l| l.to_vec()).collect();
        SemiChain::from_labels(g.states(), &levels).unwrap()
    }

    fn path3() -> Graph {
        Graph::path(StateSpace::new(["t1", "t2", "t3"].map(String::from).to_vec()).unwrap())
    }

    #[test]
    fn shape_validation() {
        assert!(SemiChain::new(vec![vec![0, 1]]).is_err());
        assert!(SemiChain::new(vec![vec![0], vec![]]).is_err());
        assert!(SemiChain::new(vec![vec![0, 1], vec![1]]).is_err());
        assert!(SemiChain::new(vec![vec![0], vec![5]]).is_err());
        let c = SemiChain::new(vec![vec![2, 0], vec![1]]).unwrap();
        assert_eq!(c.levels(), &[vec![0, 2], vec![1]]);
        assert_eq!(c.level_of(), vec![1, 2, 1]);
        assert_eq!(SemiChain::from_level_map(&[1, 2, 1]).unwrap(), c);
    }

    #[test]
    fn any_two_partition_is_a_semichain() {
        let g = path3();
        for mask in 1u32..7 {
            let map: Vec<usize> = (0..3).map(|s| 1 + (mask >> s & 1) as usize).collect();
            let c = SemiChain::from_level_map(&map).unwrap();
            assert!(validate_semichain(&c, &g).unwrap());
        }
    }

    #[test]
    fn validation_examples() {
        let sq = square();
        assert!(validate_semichain(&chain(&sq, &[&["01"], &["00", "11"], &["10"]]), &sq).unwrap());
        let p = path3();
        assert!(!validate_semichain(&chain(&p, &[&["t1"], &["t3"], &["t2"]]), &p).unwrap());
        let small = SemiChain::new(vec![vec![0], vec![1]]).unwrap();
        assert_eq!(
            validate_semichain(&small, &p).unwrap_err(),
            Error::StateSetMismatch { chain: 2, graph: 3 }
        );
    }

    #[test]
    fn strong_connectivity_examples() {
        let sq = square();
        assert!(is_strongly_connected(&chain(&sq, &[&["00", "11"], &["01", "10"]]), &sq).unwrap());
        let k3 = Graph::complete(StateSpace::numbered(3).unwrap());
        let c = SemiChain::new(vec![vec![0], vec![1, 2]]).unwrap();
        assert!(is_strongly_connected(&c, &k3).unwrap());
        let p = path3();
        assert!(matches!(
            is_strongly_connected(&chain(&p, &[&["t1"], &["t3"], &["t2"]]), &p),
            Err(Error::InvalidSemiChain(_))
        ));
        // Within-level edge only: not strongly connected.
        let c = chain(&p, &[&["t1", "t2"], &["t3"]]);
        assert!(!is_strongly_connected(&c, &p).unwrap());
    }

    #[test]
    fn posterior_examples() {
        let prior = Prior::uniform(3).unwrap();
        let b = Budget::new(int(2)).unwrap();
        let c = SemiChain::new(vec![vec![0], vec![1], vec![2]]).unwrap();
        let expected = Posterior::new(vec![ratio(1, 7), ratio(2, 7), ratio(4, 7)]).unwrap();
        assert_eq!(posterior_from_chain(&c, &prior, &b), expected);

        let c = SemiChain::new(vec![vec![1, 2], vec![0]]).unwrap();
        let expected = Posterior::new(vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)]).unwrap();
        assert_eq!(posterior_from_chain(&c, &prior, &b), expected);

        let unit = Budget::new(int(1)).unwrap();
        assert_eq!(posterior_from_chain(&c, &prior, &unit), prior.as_posterior());
    }

    #[test]
    fn reverse_examples() {
        let c = SemiChain::new(vec![vec![0], vec![1]]).unwrap();
        assert_eq!(c.reverse(), SemiChain::new(vec![vec![1], vec![0]]).unwrap());
        let c = SemiChain::new(vec![vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(c.reverse().levels(), &[vec![2], vec![1], vec![0]]);
        assert_eq!(c.reverse().reverse(), c);
    }

    #[test]
    fn fold_examples() {
        let sq = square();
        let c = chain(&sq, &[&["01"], &["00", "11"], &["10"]]);
        assert_eq!(c.downward_fold().unwrap(), chain(&sq, &[&["00", "11"], &["01", "10"]]));
        assert_eq!(c.upward_fold().unwrap(), chain(&sq, &[&["01", "10"], &["00", "11"]]));

        let abc = SemiChain::new(vec![vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(abc.downward_fold().unwrap().levels(), &[vec![1], vec![0, 2]]);
        assert_eq!(abc.upward_fold().unwrap().levels(), &[vec![0, 2], vec![1]]);

        let two = SemiChain::new(vec![vec![0], vec![1]]).unwrap();
        assert_eq!(two.downward_fold().unwrap_err(), Error::TooFewLevels(2));
        assert_eq!(two.upward_fold().unwrap_err(), Error::TooFewLevels(2));
    }

    #[test]
    fn unfolding_examples() {
        let sq = square();
        let parity = chain(&sq, &[&["00", "11"], &["01", "10"]]);
        let got = enumerate_upward_unfoldings(&parity, &sq).unwrap();
        assert_eq!(
            got,
            vec![chain(&sq, &[&["01"], &["00", "11"], &["10"]]), chain(&sq, &[&["10"], &["00", "11"], &["01"]])]
        );
        for child in &got {
            assert_eq!(child.downward_fold().unwrap(), parity);
        }

        let k4 = Graph::complete(StateSpace::numbered(4).unwrap());
        let c = SemiChain::new(vec![vec![0], vec![1, 2, 3]]).unwrap();
        assert!(enumerate_upward_unfoldings(&c, &k4).unwrap().is_empty());

        let p = path3();
        let c = chain(&p, &[&["t2"], &["t1", "t3"]]);
        assert_eq!(
            enumerate_upward_unfoldings(&c, &p).unwrap(),
            vec![chain(&p, &[&["t1"], &["t2"], &["t3"]]), chain(&p, &[&["t3"], &["t2"], &["t1"]])]
        );
    }

    #[test]
    fn display_uses_labels() {
        let sq = square();
        let c = chain(&sq, &[&["00", "11"], &["01", "10"]]);
        assert_eq!(c.display(sq.states()).to_string(), "({00,11},{01,10})");
        assert_eq!(c.to_string(), "({0,3},{1,2})");
    }
}
