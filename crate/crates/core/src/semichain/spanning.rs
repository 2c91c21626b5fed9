//! Spanning-tree enumeration and the 2-semi-chains a tree induces.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::SemiChain;
use crate::graph::{Graph, UnionFind};

/// `n - 1` edges of a host graph forming a tree on all `n` states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpanningTree {
    num_states: usize,
    edges: Vec<(usize, usize)>,
}

impl SpanningTree {
    /// Checks that `edges` form a spanning tree on `num_states` nodes.
    pub fn new(num_states: usize, edges: Vec<(usize, usize)>) -> Option<Self> {
        if edges.len() + 1 != num_states {
            return None;
        }
        let mut uf = UnionFind::new(num_states);
        for &(a, b) in &edges {
            if a >= num_states || b >= num_states || !uf.union(a, b) {
                return None;
            }
        }
        let mut edges: Vec<_> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        edges.sort_unstable();
        Some(Self { num_states, edges })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }
}

/// Depth-first include/exclude search over the edge list.
///
/// A frame fixes decisions for edges `0..next`; `chosen` is the forest built so
/// far. Excluding an edge is only explored while the remaining edges can still
/// span, and including one only when it joins two components, so every leaf
/// is a distinct spanning tree.
pub struct SpanningTrees<'g> {
    graph: &'g Graph,
    stack: Vec<(usize, Vec<usize>)>,
}

pub fn enumerate_spanning_trees(g: &Graph) -> SpanningTrees<'_> {
    SpanningTrees { graph: g, stack: vec![(0, Vec::new())] }
}

impl Iterator for SpanningTrees<'_> {
    type Item = SpanningTree;

    fn next(&mut self) -> Option<SpanningTree> {
        let n = self.graph.num_states();
        let edges = self.graph.edges();
        while let Some((next, chosen)) = self.stack.pop() {
            if chosen.len() + 1 == n {
                let tree_edges = chosen.iter().map(|&k| edges[k]).collect();
                return Some(SpanningTree { num_states: n, edges: tree_edges });
            }
            if next == edges.len() {
                continue;
            }
            let mut uf = UnionFind::new(n);
            for &k in &chosen {
                uf.union(edges[k].0, edges[k].1);
            }
            let (a, b) = edges[next];
            let joins = uf.find(a) != uf.find(b);
            for &(x, y) in &edges[next + 1..] {
                uf.union(x, y);
            }
            // Pushed first so the include branch is explored first.
            if uf.components() == 1 {
                self.stack.push((next + 1, chosen.clone()));
            }
            if joins {
                let mut with = chosen;
                with.push(next);
                self.stack.push((next + 1, with));
            }
        }
        None
    }
}

/// Number of spanning trees by the matrix-tree theorem (any cofactor of the Laplacian).
pub fn count_spanning_trees(g: &Graph) -> BigInt {
    let n = g.num_states();
    if n == 1 {
        return BigInt::one();
    }
    let m = n - 1;
    let mut lap = vec![vec![BigInt::zero(); m]; m];
    for &(a, b) in g.edges() {
        // Drop row/column 0.
        if a > 0 {
            lap[a - 1][a - 1] += 1;
        }
        if b > 0 {
            lap[b - 1][b - 1] += 1;
        }
        if a > 0 && b > 0 {
            lap[a - 1][b - 1] -= 1;
            lap[b - 1][a - 1] -= 1;
        }
    }
    crate::linalg::bareiss_determinant(lap)
}

/// The tree's 2-colouring `(A, B)` (state 0 in `A`) and its reverse `(B, A)`.
pub fn two_chains_from_spanning_tree(tree: &SpanningTree) -> (SemiChain, SemiChain) {
    let n = tree.num_states;
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in &tree.edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut side = vec![usize::MAX; n];
    side[0] = 1;
    let mut stack = vec![0];
    while let Some(u) = stack.pop() {
        for &v in &adjacency[u] {
            if side[v] == usize::MAX {
                side[v] = 3 - side[u];
                stack.push(v);
            }
        }
    }
    let chain = SemiChain::from_level_map(&side).expect("a tree on >= 2 nodes has two colour classes");
    let reversed = chain.reverse();
    (chain, reversed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::StateSpace;
    use crate::semichain::is_strongly_connected;
    use std::collections::HashSet;

    fn states(n: usize) -> StateSpace {
        StateSpace::numbered(n).unwrap()
    }

    fn all_trees(g: &Graph) -> Vec<SpanningTree> {
        enumerate_spanning_trees(g).collect()
    }

    #[test]
    fn cycle_has_four_trees() {
        let g = Graph::cycle(states(4));
        let trees = all_trees(&g);
        assert_eq!(trees.len(), 4);
        assert_eq!(count_spanning_trees(&g), BigInt::from(4));
    }

    #[test]
    fn cayley_count_for_complete_graphs() {
        for n in 2..=6usize {
            let g = Graph::complete(states(n));
            let expected = BigInt::from(n.pow(n as u32 - 2));
            assert_eq!(count_spanning_trees(&g), expected);
            let trees = all_trees(&g);
            assert_eq!(BigInt::from(trees.len()), expected);
            let distinct: HashSet<_> = trees.iter().collect();
            assert_eq!(distinct.len(), trees.len());
            assert!(trees.iter().all(|t| SpanningTree::new(n, t.edges().to_vec()).is_some()));
        }
    }

    #[test]
    fn a_tree_has_one_spanning_tree() {
        let g = Graph::build(states(5), &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let trees = all_trees(&g);
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].edges(), g.edges());
    }

    #[test]
    fn tree_two_chains() {
        let t = SpanningTree::new(2, vec![(0, 1)]).unwrap();
        let (c, r) = two_chains_from_spanning_tree(&t);
        assert_eq!(c.levels(), &[vec![0], vec![1]]);
        assert_eq!(r.levels(), &[vec![1], vec![0]]);

        let t = SpanningTree::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let (c, r) = two_chains_from_spanning_tree(&t);
        assert_eq!(c.levels(), &[vec![0, 2], vec![1]]);
        assert_eq!(r, c.reverse());

        let t = SpanningTree::new(4, vec![(0, 1), (0, 2), (0, 3)]).unwrap();
        let (c, _) = two_chains_from_spanning_tree(&t);
        assert_eq!(c.levels(), &[vec![0], vec![1, 2, 3]]);
    }

    #[test]
    fn tree_chains_are_strongly_connected_in_the_host() {
        let g = Graph::build(states(5), &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        for tree in enumerate_spanning_trees(&g) {
            let (c, r) = two_chains_from_spanning_tree(&tree);
            assert!(is_strongly_connected(&c, &g).unwrap());
            assert!(is_strongly_connected(&r, &g).unwrap());
        }
    }

    #[test]
    fn spanning_tree_validation() {
        assert!(SpanningTree::new(3, vec![(0, 1)]).is_none());
        assert!(SpanningTree::new(3, vec![(0, 1), (1, 0)]).is_none());
        assert!(SpanningTree::new(3, vec![(0, 1), (2, 1)]).is_some());
    }
}
