//! Differential-privacy graphs on product state spaces.
//!
//! States are tuples over `sizes[0] x ... x sizes[K-1]`, indexed in row-major
//! order, and two states are neighbours when they differ in exactly one
//! coordinate. For two coordinates the strongly connected 2-semi-chains are
//! generated without repetition from division sequences.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{Graph, StateSpace};
use crate::semichain::SemiChain;

/// Coordinate sizes `|Theta^(1)|, ..., |Theta^(K)|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DimensionSpec {
    sizes: Vec<usize>,
}

impl DimensionSpec {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidDimensions("at least one coordinate is required".into()));
        }
        if let Some(s) = sizes.iter().find(|&&s| s < 2) {
            return Err(Error::InvalidDimensions(format!("coordinate size {s} is below 2")));
        }
        let mut total: usize = 1;
        for &s in &sizes {
            total = total
                .checked_mul(s)
                .filter(|&t| t <= 1 << 24)
                .ok_or_else(|| Error::InvalidDimensions("state space too large".into()))?;
        }
        Ok(Self { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of coordinates `K`.
    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn num_states(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Row-major index to tuple.
    pub fn tuple_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.k()];
        for (slot, &s) in out.iter_mut().zip(&self.sizes).rev() {
            *slot = index % s;
            index /= s;
        }
        out
    }

    /// Tuple to row-major index.
    pub fn index_of(&self, tuple: &[usize]) -> usize {
        tuple.iter().zip(&self.sizes).fold(0, |acc, (&v, &s)| acc * s + v)
    }

    /// Digits run together when every size is at most 10, comma-separated otherwise.
    pub fn label(&self, index: usize) -> String {
        let t = self.tuple_of(index);
        let parts: Vec<String> = t.iter().map(|v| v.to_string()).collect();
        if self.sizes.iter().all(|&s| s <= 10) {
            parts.concat()
        } else {
            parts.join(",")
        }
    }

    pub fn state_space(&self) -> StateSpace {
        StateSpace::new((0..self.num_states()).map(|i| self.label(i)).collect())
            .expect("tuple labels are distinct and there are at least two")
    }
}

/// Hamming-distance-one graph on the product space.
pub fn differential_graph(dims: &DimensionSpec) -> Graph {
    let n = dims.num_states();
    let mut edges = Vec::new();
    // Stride of coordinate k in the row-major index.
    let mut stride = 1;
    let mut strides = vec![0; dims.k()];
    for k in (0..dims.k()).rev() {
        strides[k] = stride;
        stride *= dims.sizes[k];
    }
    for i in 0..n {
        let tuple = dims.tuple_of(i);
        for (k, &v) in tuple.iter().enumerate() {
            for w in v + 1..dims.sizes[k] {
                edges.push((i, i + (w - v) * strides[k]));
            }
        }
    }
    Graph::build(dims.state_space(), &edges).expect("product graph is connected")
}

/// The largest level count of any strongly connected semi-chain: `K + 1`.
pub fn max_level(dims: &DimensionSpec) -> usize {
    dims.k() + 1
}

/// A strongly connected `(K+1)`-semi-chain built one coordinate at a time.
///
/// Start from `({0}, rest)` on the first coordinate. Adding a coordinate
/// copies the chain once per value; the copy at value 0 keeps its levels and
/// every other copy moves up by one.
pub fn construct_k_plus_1_chain(dims: &DimensionSpec) -> SemiChain {
    let mut levels: Vec<usize> = (0..dims.sizes[0]).map(|v| if v == 0 { 1 } else { 2 }).collect();
    for &size in &dims.sizes[1..] {
        let mut next = Vec::with_capacity(levels.len() * size);
        for &l in &levels {
            for v in 0..size {
                next.push(if v == 0 { l } else { l + 1 });
            }
        }
        levels = next;
    }
    SemiChain::from_level_map(&levels).expect("every level is populated")
}

/// The parity 2-semi-chain on the binary `K`-cube: even coordinate sums on level 1.
pub fn binary_two_chain(k: usize) -> Result<SemiChain> {
    if k == 0 || k > 24 {
        return Err(Error::InvalidDimensions(format!("binary cube dimension {k} out of range 1..=24")));
    }
    let levels: Vec<usize> = (0..1usize << k).map(|i| 1 + (i.count_ones() as usize & 1)).collect();
    SemiChain::from_level_map(&levels)
}

/// Lifts a 2-semi-chain `(A, B)` on the `(K-1)`-cube to `((A,0) ∪ (B,1), (B,0) ∪ (A,1))`
/// on the `K`-cube, with the new coordinate last.
pub fn lift_binary_chain(c: &SemiChain) -> Result<SemiChain> {
    if c.num_levels() != 2 {
        return Err(Error::InvalidSemiChain(format!("expected 2 levels, got {}", c.num_levels())));
    }
    let n = c.num_states();
    if !n.is_power_of_two() {
        return Err(Error::InvalidSemiChain(format!("{n} states is not a binary cube")));
    }
    let mut levels = vec![0; 2 * n];
    for (s, l) in c.level_of().into_iter().enumerate() {
        levels[2 * s] = l;
        levels[2 * s + 1] = 3 - l;
    }
    SemiChain::from_level_map(&levels)
}

/// An ordered split `(first, second)` of the column values `Y = {0, ..., n2-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DivisionPattern {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    /// 1-based position in [`division_patterns`].
    pub code: usize,
}

impl DivisionPattern {
    /// Both parts nonempty.
    pub fn is_divided(&self) -> bool {
        !self.first.is_empty() && !self.second.is_empty()
    }

    /// Level (1 or 2) of column value `y`.
    pub fn level_of(&self, y: usize) -> usize {
        if self.first.contains(&y) {
            1
        } else {
            2
        }
    }

    fn part(&self, l: usize) -> &[usize] {
        if l == 1 {
            &self.first
        } else {
            &self.second
        }
    }
}

impl fmt::Display for DivisionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |s: &[usize]| s.iter().map(|y| y.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "({{{}}},{{{}}})", set(&self.first), set(&self.second))
    }
}

/// Every division pattern of `Y`, coded `1..=2^n2`.
///
/// Divided patterns come first, ordered by the bitmask of `first` (bit `y`
/// set when `y` is on level 1). Codes `2^n2 - 1` and `2^n2` are `(Y, ∅)` and
/// `(∅, Y)`.
pub fn division_patterns(n2: usize) -> Result<Vec<DivisionPattern>> {
    if !(2..=20).contains(&n2) {
        return Err(Error::InvalidDimensions(format!("column size {n2} out of range 2..=20")));
    }
    let full = (1usize << n2) - 1;
    let split = |mask: usize, code: usize| DivisionPattern {
        first: (0..n2).filter(|y| mask >> y & 1 == 1).collect(),
        second: (0..n2).filter(|y| mask >> y & 1 == 0).collect(),
        code,
    };
    let mut out: Vec<DivisionPattern> = (1..full).map(|mask| split(mask, mask)).collect();
    out.push(split(full, full));
    out.push(split(0, full + 1));
    Ok(out)
}

/// One division pattern per `[x]` class, as a nondecreasing code sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DivisionSequence {
    patterns: Vec<DivisionPattern>,
}

impl DivisionSequence {
    pub fn new(patterns: Vec<DivisionPattern>) -> Self {
        Self { patterns }
    }

    pub fn patterns(&self) -> &[DivisionPattern] {
        &self.patterns
    }

    pub fn codes(&self) -> Vec<usize> {
        self.patterns.iter().map(|p| p.code).collect()
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

impl fmt::Display for DivisionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let codes: Vec<String> = self.patterns.iter().map(|p| format!("d{}", p.code)).collect();
        write!(f, "({})", codes.join(","))
    }
}

struct SequenceSearch<'a> {
    n1: usize,
    table: &'a [DivisionPattern],
    uncorrected: bool,
    out: Vec<Vec<usize>>,
}

impl SequenceSearch<'_> {
    fn divided(&self) -> usize {
        self.table.len() - 2
    }

    fn covers(&self, prefix: &[usize], l: usize) -> bool {
        let n2 = self.table[0].first.len() + self.table[0].second.len();
        let mut seen = vec![false; n2];
        for &t in prefix {
            for &y in self.table[t - 1].part(l) {
                seen[y] = true;
            }
        }
        seen.iter().all(|&s| s)
    }

    fn emit(&mut self, prefix: &[usize], fills: &[(usize, usize)]) {
        let mut seq = prefix.to_vec();
        for &(code, count) in fills {
            seq.extend(std::iter::repeat_n(code, count));
        }
        self.out.push(seq);
    }

    fn run(&mut self, z: usize, start: usize, prefix: &mut Vec<usize>) {
        let (d, n1) = (self.divided(), self.n1);
        let (all_first, all_second) = (d + 1, d + 2);
        for t in start..=d {
            prefix.push(t);
            // Category I: every class divided, at least two distinct patterns.
            if z == n1 && prefix.iter().any(|&c| c != prefix[0]) {
                self.emit(prefix, &[]);
            }
            // Category II: one level gets the undivided classes.
            if z < n1 || self.uncorrected {
                for l in [1, 2] {
                    if self.covers(prefix, l) {
                        let fill = match (self.uncorrected, l) {
                            (true, 1) | (false, 2) => all_first,
                            _ => all_second,
                        };
                        self.emit(prefix, &[(fill, n1 - z)]);
                    }
                }
            }
            // Category III: undivided classes on both levels.
            if z + 2 <= n1 {
                for count in 1..n1 - z {
                    self.emit(prefix, &[(all_first, count), (all_second, n1 - count - z)]);
                }
            }
            if z < n1 {
                self.run(z + 1, t, prefix);
            }
            prefix.pop();
        }
    }
}

fn division_sequences(n1: usize, n2: usize, uncorrected: bool) -> Result<Vec<DivisionSequence>> {
    if n1 < 2 {
        return Err(Error::InvalidDimensions(format!("row size {n1} is below 2")));
    }
    let table = division_patterns(n2)?;
    let mut search = SequenceSearch { n1, table: &table, uncorrected, out: Vec::new() };
    search.run(1, 1, &mut Vec::new());
    Ok(search
        .out
        .into_iter()
        .map(|codes| DivisionSequence::new(codes.into_iter().map(|c| table[c - 1].clone()).collect()))
        .collect())
}

/// All nondecreasing, strongly connected division sequences for an `n1 x n2` grid.
///
/// Category II places the undivided classes on the level opposite the one
/// whose divided parts cover `Y`, and is only tried while slots remain, so
/// the list is duplicate-free.
pub fn enumerate_division_sequences(n1: usize, n2: usize) -> Result<Vec<DivisionSequence>> {
    division_sequences(n1, n2, false)
}

/// The generator without its two guards, kept to exhibit their effect.
///
/// Differs from [`enumerate_division_sequences`] in two places: the
/// Category II branch also fires when no slots remain (re-emitting Category I
/// sequences), and it fills with `d_{2^n2 + l - 2}`, putting the undivided
/// classes on the covering level rather than the opposite one.
pub fn enumerate_division_sequences_uncorrected(n1: usize, n2: usize) -> Result<Vec<DivisionSequence>> {
    division_sequences(n1, n2, true)
}

/// Rearranges `v` into the next lexicographic permutation; false after the last.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("a larger element exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Every distinct assignment of each sequence's patterns to the `n1` row classes.
///
/// State `(x, y)` has index `x * n2 + y` and goes to level 1 when `y` is in
/// the first part of class `x`'s pattern. Different sequences must yield
/// disjoint chain sets; an overlap is reported as [`Error::Invariant`].
pub fn expand_sequences_to_chains(seqs: &[DivisionSequence], n1: usize) -> Result<Vec<SemiChain>> {
    let mut seen: HashSet<SemiChain> = HashSet::new();
    let mut out = Vec::new();
    for seq in seqs {
        if seq.len() != n1 {
            return Err(Error::LengthMismatch { expected: n1, got: seq.len() });
        }
        let n2 = seq.patterns[0].first.len() + seq.patterns[0].second.len();
        let mut order: Vec<usize> = (0..n1).collect();
        order.sort_by_key(|&k| seq.patterns[k].code);
        let mut codes: Vec<usize> = order.iter().map(|&k| seq.patterns[k].code).collect();
        let by_code = |c: usize| seq.patterns.iter().find(|p| p.code == c).expect("code from this sequence");
        loop {
            let mut levels = vec![0; n1 * n2];
            for (x, &c) in codes.iter().enumerate() {
                let p = by_code(c);
                for y in 0..n2 {
                    levels[x * n2 + y] = p.level_of(y);
                }
            }
            let chain = SemiChain::from_level_map(&levels)
                .map_err(|e| Error::Invariant(format!("sequence {seq} gives no 2-partition: {e}")))?;
            if !seen.insert(chain.clone()) {
                return Err(Error::Invariant(format!("sequence {seq} repeats chain {chain}")));
            }
            out.push(chain);
            if !next_permutation(&mut codes) {
                break;
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Strongly connected 2-semi-chains of the `[n1, n2]` grid via division sequences.
pub fn two_semichains_from_division_sequences(n1: usize, n2: usize) -> Result<Vec<SemiChain>> {
    expand_sequences_to_chains(&enumerate_division_sequences(n1, n2)?, n1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semichain::{enumerate_two_semichains, is_strongly_connected, validate_semichain};

    fn dims(s: &[usize]) -> DimensionSpec {
        DimensionSpec::new(s.to_vec()).unwrap()
    }

    #[test]
    fn graph_shapes() {
        let g = differential_graph(&dims(&[2, 2]));
        assert_eq!((g.num_states(), g.num_edges()), (4, 4));
        assert_eq!(g.states().labels(), &["00", "01", "10", "11"]);
        assert!(!g.has_edge(0, 3) && !g.has_edge(1, 2));

        let g = differential_graph(&dims(&[2, 2, 2]));
        assert_eq!((g.num_states(), g.num_edges()), (8, 12));

        let g = differential_graph(&dims(&[3]));
        assert_eq!(g, Graph::complete(dims(&[3]).state_space()));

        let g = differential_graph(&dims(&[3, 3]));
        assert_eq!(g.num_edges(), 18);
    }

    #[test]
    fn labels_and_indices() {
        let d = dims(&[2, 3]);
        assert_eq!(d.tuple_of(4), vec![1, 1]);
        assert_eq!(d.index_of(&[1, 2]), 5);
        assert_eq!(d.label(5), "12");
        let wide = dims(&[11, 2]);
        assert_eq!(wide.label(21), "10,1");
        assert!(DimensionSpec::new(vec![2, 1]).is_err());
        assert!(DimensionSpec::new(vec![]).is_err());
    }

    #[test]
    fn level_bound() {
        assert_eq!(max_level(&dims(&[2, 2])), 3);
        assert_eq!(max_level(&dims(&[3, 3, 3])), 4);
        assert_eq!(max_level(&dims(&[2])), 2);
    }

    #[test]
    fn k_plus_1_chain_examples() {
        assert_eq!(construct_k_plus_1_chain(&dims(&[2])).levels(), &[vec![0], vec![1]]);
        let d = dims(&[2, 2]);
        let c = construct_k_plus_1_chain(&d);
        let g = differential_graph(&d);
        assert_eq!(c.display(g.states()).to_string(), "({00},{01,10},{11})");
        for s in [&[3, 3][..], &[2, 3], &[2, 2, 2], &[3, 2, 2]] {
            let d = dims(s);
            let c = construct_k_plus_1_chain(&d);
            assert_eq!(c.num_levels(), d.k() + 1);
            assert!(is_strongly_connected(&c, &differential_graph(&d)).unwrap());
            for (i, l) in c.level_of().into_iter().enumerate() {
                let nonzero = d.tuple_of(i).iter().filter(|&&v| v != 0).count();
                assert_eq!(l, 1 + nonzero);
            }
        }
    }

    #[test]
    fn parity_chains() {
        assert_eq!(binary_two_chain(1).unwrap().levels(), &[vec![0], vec![1]]);
        let g2 = differential_graph(&dims(&[2, 2]));
        assert_eq!(binary_two_chain(2).unwrap().display(g2.states()).to_string(), "({00,11},{01,10})");
        let g3 = differential_graph(&dims(&[2, 2, 2]));
        assert_eq!(
            binary_two_chain(3).unwrap().display(g3.states()).to_string(),
            "({000,011,101,110},{001,010,100,111})"
        );
        for k in 1..=5 {
            let c = binary_two_chain(k).unwrap();
            let g = differential_graph(&DimensionSpec::new(vec![2; k]).unwrap());
            let level = c.level_of();
            assert!(g.edges().iter().all(|&(i, j)| level[i] != level[j]));
        }
        assert!(binary_two_chain(0).is_err());
    }

    #[test]
    fn lifting_gives_the_next_parity_chain() {
        for k in 2..=6 {
            let lifted = lift_binary_chain(&binary_two_chain(k - 1).unwrap()).unwrap();
            let target = binary_two_chain(k).unwrap();
            assert!(lifted == target || lifted == target.reverse());
        }
    }

    #[test]
    fn pattern_table() {
        let p = division_patterns(2).unwrap();
        let shape: Vec<(Vec<usize>, Vec<usize>)> = p.iter().map(|d| (d.first.clone(), d.second.clone())).collect();
        assert_eq!(
            shape,
            vec![(vec![0], vec![1]), (vec![1], vec![0]), (vec![0, 1], vec![]), (vec![], vec![0, 1])]
        );
        assert_eq!(p.iter().map(|d| d.code).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        let p3 = division_patterns(3).unwrap();
        assert_eq!(p3.len(), 8);
        assert_eq!(p3.iter().filter(|d| d.is_divided()).count(), 6);
        assert!(p3[..6].iter().all(DivisionPattern::is_divided));
        assert!(division_patterns(1).is_err());
    }

    fn codes(seqs: &[DivisionSequence]) -> Vec<Vec<usize>> {
        seqs.iter().map(DivisionSequence::codes).collect()
    }

    #[test]
    fn sequences_for_small_grids() {
        assert_eq!(codes(&enumerate_division_sequences(2, 2).unwrap()), vec![vec![1, 2]]);
        let mut got = codes(&enumerate_division_sequences(3, 2).unwrap());
        got.sort();
        assert_eq!(
            got,
            vec![vec![1, 1, 2], vec![1, 2, 2], vec![1, 2, 3], vec![1, 2, 4], vec![1, 3, 4], vec![2, 3, 4]]
        );
    }

    #[test]
    fn sequences_are_distinct_and_nondecreasing() {
        for n1 in 2..=4 {
            for n2 in 2..=3 {
                let seqs = codes(&enumerate_division_sequences(n1, n2).unwrap());
                let set: HashSet<_> = seqs.iter().collect();
                assert_eq!(set.len(), seqs.len(), "duplicates for ({n1},{n2})");
                assert!(seqs.iter().all(|s| s.len() == n1 && s.windows(2).all(|w| w[0] <= w[1])));
            }
        }
    }

    #[test]
    fn uncorrected_variant_repeats_sequences() {
        let seqs = codes(&enumerate_division_sequences_uncorrected(2, 2).unwrap());
        assert_eq!(seqs, vec![vec![1, 2], vec![1, 2], vec![1, 2]]);
    }

    #[test]
    fn uncorrected_variant_misplaces_undivided_rows() {
        // (d3 d5 ...) : first parts {0,1} and {0,2} cover Y on level 1 only;
        // filling level 1 leaves column 0 of the filled row without a between-level edge.
        let d = dims(&[3, 3]);
        let g = differential_graph(&d);
        let raw = enumerate_division_sequences_uncorrected(3, 3).unwrap();
        let chains = expand_sequences_to_chains(
            &raw.into_iter().filter(|s| s.codes() == vec![3, 5, 7]).collect::<Vec<_>>(),
            3,
        )
        .unwrap();
        assert!(!chains.is_empty());
        assert!(chains.iter().all(|c| !is_strongly_connected(c, &g).unwrap()));
    }

    #[test]
    fn expansion_counts() {
        let t = division_patterns(2).unwrap();
        let seq = |c: &[usize]| DivisionSequence::new(c.iter().map(|&k| t[k - 1].clone()).collect());
        assert_eq!(expand_sequences_to_chains(&[seq(&[1, 2])], 2).unwrap().len(), 2);
        assert_eq!(expand_sequences_to_chains(&[seq(&[1, 1, 2])], 3).unwrap().len(), 3);
        assert_eq!(
            expand_sequences_to_chains(&[seq(&[1, 2])], 3).unwrap_err(),
            Error::LengthMismatch { expected: 3, got: 2 }
        );
    }

    #[test]
    fn pipeline_matches_direct_enumeration() {
        for (n1, n2) in [(2, 2), (3, 2), (2, 3), (3, 3), (4, 2)] {
            let g = differential_graph(&dims(&[n1, n2]));
            let pipeline = two_semichains_from_division_sequences(n1, n2).unwrap();
            assert!(pipeline.iter().all(|c| validate_semichain(c, &g).unwrap()));
            assert_eq!(pipeline, enumerate_two_semichains(&g), "grid [{n1},{n2}]");
        }
    }
}
