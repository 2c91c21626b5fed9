#![allow(dead_code)]

use privacy_frontier::diffpriv::{differential_graph, DimensionSpec};
use privacy_frontier::feasible::{Budget, Prior};
use privacy_frontier::graph::{Graph, StateSpace};
use privacy_frontier::rational::{int, ratio};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Named {
    pub name: String,
    pub graph: Graph,
    /// Coordinate sizes for differential graphs.
    pub dims: Option<DimensionSpec>,
}

fn plain(name: &str, graph: Graph) -> Named {
    Named { name: name.to_string(), graph, dims: None }
}

fn numbered(n: usize) -> StateSpace {
    StateSpace::numbered(n).unwrap()
}

pub fn differential(sizes: &[usize]) -> Named {
    let dims = DimensionSpec::new(sizes.to_vec()).unwrap();
    Named { name: format!("differential {sizes:?}"), graph: differential_graph(&dims), dims: Some(dims) }
}

/// Complete J=3,4,5; path J=3,4; 4-cycle; differential [2,2], [2,3], [3,3], [2,2,2], [3,2].
pub fn graphs() -> Vec<Named> {
    vec![
        plain("complete 3", Graph::complete(numbered(3))),
        plain("complete 4", Graph::complete(numbered(4))),
        plain("complete 5", Graph::complete(numbered(5))),
        plain("path 3", Graph::path(numbered(3))),
        plain("path 4", Graph::path(numbered(4))),
        plain("cycle 4", Graph::cycle(numbered(4))),
        differential(&[2, 2]),
        differential(&[2, 3]),
        differential(&[3, 3]),
        differential(&[2, 2, 2]),
        differential(&[3, 2]),
    ]
}

/// Uniform plus two interior priors drawn from fixed seeds.
pub fn priors(n: usize) -> Vec<(String, Prior)> {
    let mut out = vec![("uniform".to_string(), Prior::uniform(n).unwrap())];
    for seed in [11u64, 29] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed * 1000 + n as u64);
        let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=20)).collect();
        out.push((format!("random(seed {seed})"), Prior::from_weights(&weights).unwrap()));
    }
    out
}

pub fn budgets() -> Vec<Budget> {
    vec![Budget::new(ratio(3, 2)).unwrap(), Budget::new(int(2)).unwrap()]
}
