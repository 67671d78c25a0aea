//! Finite weighted graphs `(V, b, μ)`, functions on their vertices, and the
//! objects derived from them: the Dirichlet energy, the jump kernel
//! `n(p,q) = 2 b(p,q) / μ(p)`, the generator `L` and energy densities.
//!
//! Every quantity in the crate uses the single normalization fixed here:
//! the energy is summed over *ordered* pairs without a factor ½, so that
//! `-⟨Lf, g⟩_μ = E(f, g)` holds exactly.

use std::collections::HashMap;
use std::fmt;
use std::ops::Index;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_len, param, Error, Result};

/// A problem with the raw data of a [`WeightedGraph`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    DiagonalWeight { vertex: String, weight: f64 },
    NonPositiveMeasure { vertex: String, mu: f64 },
    NegativeWeight { p: String, q: String, weight: f64 },
    NonFiniteWeight { p: String, q: String },
    DuplicatePair { p: String, q: String },
    DuplicateVertex { vertex: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "graph has no vertices"),
            Violation::DiagonalWeight { vertex, weight } => {
                write!(f, "diagonal weight b({vertex},{vertex}) = {weight} at {vertex}")
            }
            Violation::NonPositiveMeasure { vertex, mu } => {
                write!(f, "nonpositive measure mu({vertex}) = {mu} at {vertex}")
            }
            Violation::NegativeWeight { p, q, weight } => {
                write!(f, "negative weight b({p},{q}) = {weight}")
            }
            Violation::NonFiniteWeight { p, q } => write!(f, "non-finite weight b({p},{q})"),
            Violation::DuplicatePair { p, q } => write!(f, "duplicate pair {{{p},{q}}}"),
            Violation::DuplicateVertex { vertex } => write!(f, "duplicate vertex id `{vertex}`"),
        }
    }
}

/// An unordered pair `{lo, hi}` with `lo < hi` and positive weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub lo: usize,
    pub hi: usize,
    pub weight: f64,
}

/// One directed slot `p -> vertex` of the adjacency structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub vertex: usize,
    pub edge: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    ids: Vec<String>,
    mu: Vec<f64>,
    raw: Vec<(usize, usize, f64)>,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    adjacency: Vec<Neighbor>,
    slots: HashMap<(usize, usize), usize>,
}

impl WeightedGraph {
    /// Builds a graph from vertex ids, vertex measures and weighted pairs
    /// given by index. The data is stored as given; call [`validate`] to
    /// list invariant violations. Only pairs with `p != q` and a finite
    /// positive weight take part in the adjacency structure.
    ///
    /// [`validate`]: WeightedGraph::validate
    pub fn new(ids: Vec<String>, mu: Vec<f64>, pairs: Vec<(usize, usize, f64)>) -> Result<Self> {
        check_len(ids.len(), mu.len())?;
        let n = ids.len();
        if let Some(&(p, q, _)) = pairs.iter().find(|(p, q, _)| *p >= n || *q >= n) {
            return Err(Error::VertexOutOfRange(p.max(q)));
        }

        let mut edges: Vec<Edge> = Vec::new();
        let mut edge_of: HashMap<(usize, usize), usize> = HashMap::new();
        for &(p, q, w) in &pairs {
            if p == q || !w.is_finite() || w <= 0.0 {
                continue;
            }
            let (lo, hi) = if p < q { (p, q) } else { (q, p) };
            if edge_of.contains_key(&(lo, hi)) {
                continue;
            }
            edge_of.insert((lo, hi), edges.len());
            edges.push(Edge { lo, hi, weight: w });
        }

        let mut lists: Vec<Vec<Neighbor>> = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            lists[e.lo].push(Neighbor {
                vertex: e.hi,
                edge: k,
                weight: e.weight,
            });
            lists[e.hi].push(Neighbor {
                vertex: e.lo,
                edge: k,
                weight: e.weight,
            });
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut adjacency = Vec::with_capacity(2 * edges.len());
        let mut slots = HashMap::with_capacity(2 * edges.len());
        offsets.push(0);
        for (p, list) in lists.into_iter().enumerate() {
            for nb in list {
                slots.insert((p, nb.vertex), adjacency.len());
                adjacency.push(nb);
            }
            offsets.push(adjacency.len());
        }

        Ok(Self {
            ids,
            mu,
            raw: pairs,
            edges,
            offsets,
            adjacency,
            slots,
        })
    }

    /// Graph on vertices `"0", "1", ...` with the given measures.
    pub fn from_indices(mu: Vec<f64>, pairs: Vec<(usize, usize, f64)>) -> Result<Self> {
        let ids = (0..mu.len()).map(|i| i.to_string()).collect();
        Self::new(ids, mu, pairs)
    }

    /// Graph with unit vertex measure.
    pub fn unit_measure(n: usize, pairs: Vec<(usize, usize, f64)>) -> Result<Self> {
        Self::from_indices(vec![1.0; n], pairs)
    }

    /// Cycle `0 - 1 - ... - (n-1) - 0` with unit weights and unit measure.
    pub fn cycle(n: usize) -> Result<Self> {
        let pairs = (0..n).map(|p| (p, (p + 1) % n, 1.0)).collect();
        Self::unit_measure(n, pairs)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.ids.is_empty() {
            out.push(Violation::Empty);
        }
        let mut seen_ids = HashMap::new();
        for id in &self.ids {
            if seen_ids.insert(id.as_str(), ()).is_some() {
                out.push(Violation::DuplicateVertex { vertex: id.clone() });
            }
        }
        for (p, &m) in self.mu.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                out.push(Violation::NonPositiveMeasure {
                    vertex: self.ids[p].clone(),
                    mu: m,
                });
            }
        }
        let mut seen = HashMap::new();
        for &(p, q, w) in &self.raw {
            let (pid, qid) = (self.ids[p].clone(), self.ids[q].clone());
            if p == q {
                if w != 0.0 {
                    out.push(Violation::DiagonalWeight { vertex: pid, weight: w });
                }
                continue;
            }
            if !w.is_finite() {
                out.push(Violation::NonFiniteWeight { p: pid.clone(), q: qid.clone() });
            } else if w < 0.0 {
                out.push(Violation::NegativeWeight {
                    p: pid.clone(),
                    q: qid.clone(),
                    weight: w,
                });
            }
            let key = (p.min(q), p.max(q));
            if seen.insert(key, ()).is_some() {
                out.push(Violation::DuplicatePair { p: pid, q: qid });
            }
        }
        out
    }

    /// Returns the graph if [`validate`](Self::validate) reports nothing.
    pub fn validated(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidGraph(v))
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, p: usize) -> &str {
        &self.ids[p]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.ids
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn total_measure(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// Raw weighted pairs as supplied at construction.
    pub fn raw_pairs(&self) -> &[(usize, usize, f64)] {
        &self.raw
    }

    /// Unordered pairs with positive weight, in insertion order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, p: usize) -> &[Neighbor] {
        &self.adjacency[self.offsets[p]..self.offsets[p + 1]]
    }

    /// Range of directed slots leaving `p`.
    pub fn slot_range(&self, p: usize) -> std::ops::Range<usize> {
        self.offsets[p]..self.offsets[p + 1]
    }

    pub fn num_slots(&self) -> usize {
        self.adjacency.len()
    }

    pub fn slot(&self, p: usize, q: usize) -> Option<usize> {
        self.slots.get(&(p, q)).copied()
    }

    pub fn slot_neighbor(&self, slot: usize) -> &Neighbor {
        &self.adjacency[slot]
    }

    /// `b(p,q)`, zero when the pair carries no edge.
    pub fn weight(&self, p: usize, q: usize) -> f64 {
        self.slot(p, q).map_or(0.0, |s| self.adjacency[s].weight)
    }

    /// Total jump rate `Σ_q n(p,q)`.
    pub fn rate(&self, p: usize) -> f64 {
        self.neighbors(p).iter().map(|nb| nb.weight).sum::<f64>() * 2.0 / self.mu[p]
    }

    /// Connected component label of every vertex plus the number of components.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let n = self.len();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for root in 0..n {
            if label[root] != usize::MAX {
                continue;
            }
            label[root] = count;
            stack.push(root);
            while let Some(p) = stack.pop() {
                for nb in self.neighbors(p) {
                    if label[nb.vertex] == usize::MAX {
                        label[nb.vertex] = count;
                        stack.push(nb.vertex);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// True when the graph is connected and has `|V| - 1` edges.
    pub fn is_tree(&self) -> bool {
        self.components().1 == 1 && self.edges.len() + 1 == self.len()
    }
}

/// Complex-valued function on the vertices of a graph, in vertex index order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFunction(Vec<Complex64>);

impl NodeFunction {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Self(vec![c; n])
    }

    pub fn indicator(n: usize, p: usize) -> Self {
        let mut f = Self::zeros(n);
        f.0[p] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.0
    }

    pub fn abs(&self) -> Self {
        Self(self.0.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Real parts, or an error naming the first entry with nonzero imaginary part.
    pub fn to_real(&self, what: &'static str) -> Result<Vec<f64>> {
        if let Some((p, z)) = self.0.iter().enumerate().find(|(_, z)| z.im != 0.0) {
            return Err(Error::NonReal {
                what,
                location: format!("vertex {p}"),
                imag: z.im,
            });
        }
        Ok(self.0.iter().map(|z| z.re).collect())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self(self.0.iter().map(|&z| f(z)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }
}

impl Index<usize> for NodeFunction {
    type Output = Complex64;

    fn index(&self, p: usize) -> &Complex64 {
        &self.0[p]
    }
}

impl From<Vec<Complex64>> for NodeFunction {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

/// `⟨f, g⟩_μ = Σ_p f(p) conj(g(p)) μ(p)`.
pub fn inner_mu(g: &WeightedGraph, f: &NodeFunction, h: &NodeFunction) -> Result<Complex64> {
    check_len(g.len(), f.len())?;
    check_len(g.len(), h.len())?;
    Ok(f.0
        .iter()
        .zip(&h.0)
        .zip(g.mu())
        .map(|((a, b), m)| a * b.conj() * m)
        .sum())
}

pub fn norm_mu(g: &WeightedGraph, f: &NodeFunction) -> Result<f64> {
    Ok(inner_mu(g, f, f)?.re.max(0.0).sqrt())
}

/// Componentwise μ-weighted mean of `f`, broadcast back onto the vertices.
pub fn component_mean(g: &WeightedGraph, f: &NodeFunction) -> Result<NodeFunction> {
    check_len(g.len(), f.len())?;
    let (label, count) = g.components();
    let mut mass = vec![0.0; count];
    let mut sum = vec![Complex64::new(0.0, 0.0); count];
    for p in 0..g.len() {
        mass[label[p]] += g.mu()[p];
        sum[label[p]] += f[p] * g.mu()[p];
    }
    Ok(NodeFunction((0..g.len()).map(|p| sum[label[p]] / mass[label[p]]).collect()))
}

/// `E(f,g) = Σ_p Σ_q b(p,q) (f(p) - f(q)) conj(g(p) - g(q))` over ordered pairs.
pub fn dirichlet_energy(g: &WeightedGraph, f: &NodeFunction, h: &NodeFunction) -> Result<Complex64> {
    check_len(g.len(), f.len())?;
    check_len(g.len(), h.len())?;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..g.len() {
        for nb in g.neighbors(p) {
            let q = nb.vertex;
            acc += (f[p] - f[q]) * (h[p] - h[q]).conj() * nb.weight;
        }
    }
    Ok(acc)
}

/// The jump kernel `n(p,q) = 2 b(p,q) / μ(p)`, stored per directed slot.
#[derive(Debug, Clone)]
pub struct JumpKernel {
    rates: Vec<f64>,
}

impl JumpKernel {
    pub fn rate(&self, slot: usize) -> f64 {
        self.rates[slot]
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn get(&self, g: &WeightedGraph, p: usize, q: usize) -> f64 {
        g.slot(p, q).map_or(0.0, |s| self.rates[s])
    }
}

pub fn jump_kernel(g: &WeightedGraph) -> JumpKernel {
    let mut rates = vec![0.0; g.num_slots()];
    for p in 0..g.len() {
        for s in g.slot_range(p) {
            rates[s] = 2.0 * g.slot_neighbor(s).weight / g.mu()[p];
        }
    }
    JumpKernel { rates }
}

/// Dense generator `(Lf)(p) = Σ_q (f(q) - f(p)) n(p,q)`.
pub fn generator_matrix(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.len();
    let mut l = DMatrix::zeros(n, n);
    for p in 0..n {
        for nb in g.neighbors(p) {
            let rate = 2.0 * nb.weight / g.mu()[p];
            l[(p, nb.vertex)] += rate;
            l[(p, p)] -= rate;
        }
    }
    l
}

/// Applies the generator without forming the matrix.
pub fn apply_generator(g: &WeightedGraph, f: &NodeFunction) -> Result<NodeFunction> {
    check_len(g.len(), f.len())?;
    Ok(NodeFunction(
        (0..g.len())
            .map(|p| {
                g.neighbors(p)
                    .iter()
                    .map(|nb| (f[nb.vertex] - f[p]) * (2.0 * nb.weight / g.mu()[p]))
                    .sum()
            })
            .collect(),
    ))
}

/// One-dimensional lattice `x_p = p h` carrying the truncated α-stable
/// kernel `b(p,q) = ½ |x_p - x_q|^{-1-α} h²` and measure `μ(p) = h`.
/// Pairs farther apart than `cutoff` get no edge; `None` keeps all pairs.
pub fn build_stable_lattice(
    num_points: usize,
    spacing: f64,
    alpha: f64,
    cutoff: Option<f64>,
) -> Result<WeightedGraph> {
    if num_points < 2 {
        return Err(param("num_points", "at least two lattice points are required"));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(param("spacing", format!("must be positive, got {spacing}")));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(param("alpha", format!("must lie in (0, 2), got {alpha}")));
    }
    if let Some(c) = cutoff {
        if c.is_nan() || c <= 0.0 {
            return Err(param("cutoff", format!("must be positive, got {c}")));
        }
    }
    let mut pairs = Vec::new();
    for p in 0..num_points {
        for q in p + 1..num_points {
            let d = (q - p) as f64 * spacing;
            if cutoff.is_some_and(|c| d > c) {
                continue;
            }
            pairs.push((p, q, 0.5 * d.powf(-1.0 - alpha) * spacing * spacing));
        }
    }
    WeightedGraph::from_indices(vec![spacing; num_points], pairs)
}

/// Energy density `Γ(f)(p) = ½ Σ_q n(p,q) |f(p) - f(q)|²`.
pub fn energy_density(g: &WeightedGraph, f: &NodeFunction) -> Result<Vec<f64>> {
    check_len(g.len(), f.len())?;
    Ok((0..g.len())
        .map(|p| {
            0.5 * g
                .neighbors(p)
                .iter()
                .map(|nb| 2.0 * nb.weight / g.mu()[p] * (f[p] - f[nb.vertex]).norm_sqr())
                .sum::<f64>()
        })
        .collect())
}
