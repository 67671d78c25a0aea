//! Seeded random instances for property checks, the `verify` suite and
//! benchmarks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::forms::{EdgeFunction, OneForm};
use crate::graph::WeightedGraph;
use crate::{Complex64, NodeFunction};

pub use crate::path::path_rng as rng;

/// Connected graph on `n` vertices: a random spanning tree plus each other
/// pair with probability `density`. Weights in `(0, 2]`, measures in `(0.5, 2]`.
pub fn connected_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> WeightedGraph {
    let mut pairs = Vec::new();
    for q in 1..n {
        let p = rng.random_range(0..q);
        pairs.push((p, q, weight(rng)));
    }
    for p in 0..n {
        for q in p + 1..n {
            if pairs.iter().any(|&(a, b, _)| (a, b) == (p, q) || (a, b) == (q, p)) {
                continue;
            }
            if rng.random::<f64>() < density {
                pairs.push((p, q, weight(rng)));
            }
        }
    }
    let mu = (0..n).map(|_| 2.0 - 1.5 * rng.random::<f64>()).collect();
    WeightedGraph::from_indices(mu, pairs).expect("indices in range")
}

/// Random tree with the same weight and measure ranges.
pub fn tree(rng: &mut ChaCha8Rng, n: usize) -> WeightedGraph {
    connected_graph(rng, n, 0.0)
}

fn weight(rng: &mut ChaCha8Rng) -> f64 {
    2.0 - 2.0 * rng.random::<f64>()
}

/// Real antisymmetric potential with values uniform in `[-scale, scale]`.
pub fn potential(rng: &mut ChaCha8Rng, g: &WeightedGraph, scale: f64) -> OneForm {
    OneForm::from_real_fn(g, |_, _| scale * (2.0 * rng.random::<f64>() - 1.0))
}

pub fn real_function(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> NodeFunction {
    NodeFunction::new(
        (0..n)
            .map(|_| Complex64::new(lo + (hi - lo) * rng.random::<f64>(), 0.0))
            .collect(),
    )
}

/// Entries with real and imaginary parts uniform in `[-1, 1]`.
pub fn complex_function(rng: &mut ChaCha8Rng, n: usize) -> NodeFunction {
    NodeFunction::new(
        (0..n)
            .map(|_| Complex64::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0))
            .collect(),
    )
}

/// Nonnegative edge function with values in `[0, 1)`.
pub fn nonnegative_edge_function(rng: &mut ChaCha8Rng, g: &WeightedGraph) -> EdgeFunction {
    let values: Vec<f64> = (0..g.num_slots()).map(|_| rng.random()).collect();
    EdgeFunction::from_fn(g, |p, q| Complex64::new(values[g.slot(p, q).unwrap()], 0.0))
}
