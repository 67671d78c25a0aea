//! Fixed benchmark instances shared by the criterion benches.

use magjump::graph::build_stable_lattice;
use magjump::{random, Complex64, NodeFunction, OneForm, WeightedGraph};

/// A magnetic problem instance.
pub struct Fixture {
    pub graph: WeightedGraph,
    pub a: OneForm,
    pub v: NodeFunction,
    pub f: NodeFunction,
}

/// Random connected graph on `n` vertices with a random potential of
/// amplitude π and a nonnegative electric potential.
pub fn random_instance(n: usize, density: f64, seed: u64) -> Fixture {
    let mut rng = random::rng(seed, 0);
    let graph = random::connected_graph(&mut rng, n, density);
    let a = random::potential(&mut rng, &graph, std::f64::consts::PI);
    let v = random::real_function(&mut rng, n, 0.0, 1.0);
    let f = random::complex_function(&mut rng, n);
    Fixture { graph, a, v, f }
}

/// Truncated α-stable lattice on `[0, 1)` with a constant potential.
pub fn lattice(num_points: usize, alpha: f64) -> Fixture {
    let graph = build_stable_lattice(num_points, 1.0 / num_points as f64, alpha, None).expect("valid lattice");
    let a = OneForm::from_real_fn(&graph, |p, q| if p < q { 0.1 } else { -0.1 });
    let n = graph.len();
    Fixture {
        v: NodeFunction::zeros(n),
        f: NodeFunction::constant(n, Complex64::new(1.0, 0.0)),
        graph,
        a,
    }
}
