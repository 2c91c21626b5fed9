//! State spaces and undirected privacy graphs.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};

/// Ordered, labeled finite set of states (indices `0..len`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::TooFewStates(labels.len()));
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// States labelled `0`, `1`, ..., `count - 1`.
    pub fn numbered(count: usize) -> Result<Self> {
        Self::new((0..count).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }
}

/// Undirected, connected, loop-free graph over a [`StateSpace`].
///
/// Edges are stored as `(i, j)` with `i < j`, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    states: StateSpace,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, bad indices and disconnected edge sets.
    pub fn build(states: StateSpace, edges: &[(usize, usize)]) -> Result<Self> {
        let n = states.len();
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            for index in [a, b] {
                if index >= n {
                    return Err(Error::IndexOutOfRange { index, len: n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let components = count_components(n, edges.iter().copied());
        if components != 1 {
            return Err(Error::DisconnectedGraph { components });
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self { states, edges, adjacency })
    }

    /// Builds a graph from label pairs.
    pub fn build_labeled(states: StateSpace, edges: &[(&str, &str)]) -> Result<Self> {
        let pairs = edges
            .iter()
            .map(|(a, b)| Ok((states.index_of(a)?, states.index_of(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::build(states, &pairs)
    }

    /// The complete graph: every pair of distinct states is linked.
    pub fn complete(states: StateSpace) -> Self {
        let n = states.len();
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self::build(states, &edges).expect("complete graph on >= 2 states is connected")
    }

    /// The path `0 - 1 - ... - (n-1)`.
    pub fn path(states: StateSpace) -> Self {
        let edges: Vec<_> = (1..states.len()).map(|i| (i - 1, i)).collect();
        Self::build(states, &edges).expect("path is connected")
    }

    /// The cycle `0 - 1 - ... - (n-1) - 0`.
    pub fn cycle(states: StateSpace) -> Self {
        let n = states.len();
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::build(states, &edges).expect("cycle is connected")
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, state: usize) -> &[usize] {
        &self.adjacency[state]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency
            .get(a)
            .is_some_and(|list| list.binary_search(&b).is_ok())
    }

    /// Maps `(min, max)` edge pairs to their position in [`Graph::edges`].
    pub fn edge_index(&self) -> HashMap<(usize, usize), usize> {
        self.edges.iter().enumerate().map(|(k, &e)| (e, k)).collect()
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n], components: n }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.components -= 1;
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }
}

/// Number of connected components of the graph on `n` nodes with the given edges.
pub fn count_components(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> usize {
    let mut uf = UnionFind::new(n);
    for (a, b) in edges {
        uf.union(a, b);
    }
    uf.components()
}

/// True when the edges connect all `n` nodes.
pub fn spans_connected(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> bool {
    count_components(n, edges) == 1
}
