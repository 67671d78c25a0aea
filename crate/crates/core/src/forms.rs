//! Discrete 1-form calculus on a weighted graph.
//!
//! An [`EdgeFunction`] lives on ordered pairs `(p,q)` with `b(p,q) > 0` and
//! is stored per directed adjacency slot. A [`OneForm`] is antisymmetric by
//! construction and stores one value per unordered edge, oriented from the
//! lower to the higher vertex index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::graph::{component_mean, dirichlet_energy, WeightedGraph};
use crate::magnetic::magnetic_energy;
use crate::NodeFunction;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction(Vec<Complex64>);

impl EdgeFunction {
    pub fn zeros(g: &WeightedGraph) -> Self {
        Self(vec![ZERO; g.num_slots()])
    }

    /// Evaluates `w(p, q)` on every ordered pair carrying an edge.
    pub fn from_fn(g: &WeightedGraph, mut w: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(g.num_slots());
        for p in 0..g.len() {
            for nb in g.neighbors(p) {
                values.push(w(p, nb.vertex));
            }
        }
        Self(values)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value on `(p, q)`; zero on pairs without an edge.
    pub fn get(&self, g: &WeightedGraph, p: usize, q: usize) -> Complex64 {
        g.slot(p, q).map_or(ZERO, |s| self.0[s])
    }

    pub fn set(&mut self, g: &WeightedGraph, p: usize, q: usize, value: Complex64) -> Result<()> {
        let s = g.slot(p, q).ok_or(Error::VertexOutOfRange(p.max(q)))?;
        self.0[s] = value;
        Ok(())
    }

    pub fn at_slot(&self, slot: usize) -> Complex64 {
        self.0[slot]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneForm(Vec<Complex64>);

impl OneForm {
    pub fn zeros(g: &WeightedGraph) -> Self {
        Self(vec![ZERO; g.edges().len()])
    }

    /// Builds a form from its values on oriented edges `(lo, hi)`, `lo < hi`.
    pub fn from_fn(g: &WeightedGraph, mut w: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(g.edges().iter().map(|e| w(e.lo, e.hi)).collect())
    }

    pub fn from_real_fn(g: &WeightedGraph, mut w: impl FnMut(usize, usize) -> f64) -> Self {
        Self(g.edges().iter().map(|e| Complex64::new(w(e.lo, e.hi), 0.0)).collect())
    }

    /// Values per edge in the order of [`WeightedGraph::edges`].
    pub fn from_edge_values(g: &WeightedGraph, values: Vec<Complex64>) -> Result<Self> {
        check_len(g.edges().len(), values.len())?;
        Ok(Self(values))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `a(p, q)` with the sign fixed by orientation; zero off the edge set.
    pub fn get(&self, g: &WeightedGraph, p: usize, q: usize) -> Complex64 {
        match g.slot(p, q) {
            Some(s) => self.oriented(g.slot_neighbor(s).edge, p < q),
            None => ZERO,
        }
    }

    fn oriented(&self, edge: usize, forward: bool) -> Complex64 {
        if forward {
            self.0[edge]
        } else {
            -self.0[edge]
        }
    }

    /// Sets `a(p, q) = value`, hence `a(q, p) = -value`.
    pub fn set(&mut self, g: &WeightedGraph, p: usize, q: usize, value: Complex64) -> Result<()> {
        let s = g.slot(p, q).ok_or(Error::VertexOutOfRange(p.max(q)))?;
        let e = g.slot_neighbor(s).edge;
        self.0[e] = if p < q { value } else { -value };
        Ok(())
    }

    pub fn to_edge_function(&self, g: &WeightedGraph) -> EdgeFunction {
        let mut values = Vec::with_capacity(g.num_slots());
        for p in 0..g.len() {
            for nb in g.neighbors(p) {
                values.push(self.oriented(nb.edge, p < nb.vertex));
            }
        }
        EdgeFunction(values)
    }

    /// Per-slot real values `a(p, q)`, failing on any imaginary part.
    pub fn real_slot_values(&self, g: &WeightedGraph, what: &'static str) -> Result<Vec<f64>> {
        let re = self.to_real(g, what)?;
        let mut out = Vec::with_capacity(g.num_slots());
        for p in 0..g.len() {
            for nb in g.neighbors(p) {
                let x = re[nb.edge];
                out.push(if p < nb.vertex { x } else { -x });
            }
        }
        Ok(out)
    }

    pub fn to_real(&self, g: &WeightedGraph, what: &'static str) -> Result<Vec<f64>> {
        for (k, z) in self.0.iter().enumerate() {
            if z.im != 0.0 {
                let e = g.edges()[k];
                return Err(Error::NonReal {
                    what,
                    location: format!("edge ({},{})", g.id(e.lo), g.id(e.hi)),
                    imag: z.im,
                });
            }
        }
        Ok(self.0.iter().map(|z| z.re).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|a| a * s).collect())
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// `‖a‖² = ⟨a, a⟩` over ordered pairs.
    pub fn norm_sqr(&self, g: &WeightedGraph) -> f64 {
        self.0
            .iter()
            .zip(g.edges())
            .map(|(a, e)| 2.0 * a.norm_sqr() * e.weight)
            .sum()
    }

    /// `⟨a, c⟩` over ordered pairs.
    pub fn inner(&self, g: &WeightedGraph, other: &Self) -> Complex64 {
        self.0
            .iter()
            .zip(&other.0)
            .zip(g.edges())
            .map(|((a, c), e)| a * c.conj() * (2.0 * e.weight))
            .sum()
    }
}

/// `(Aw)(p, q) = ½ (w(p, q) - w(q, p))`.
pub fn antisymmetrize(g: &WeightedGraph, w: &EdgeFunction) -> Result<OneForm> {
    check_len(g.num_slots(), w.len())?;
    Ok(OneForm(
        g.edges()
            .iter()
            .map(|e| 0.5 * (w.get(g, e.lo, e.hi) - w.get(g, e.hi, e.lo)))
            .collect(),
    ))
}

/// `df(p, q) = f(p) - f(q)` on every ordered pair with an edge.
pub fn derive(g: &WeightedGraph, f: &NodeFunction) -> Result<EdgeFunction> {
    check_len(g.len(), f.len())?;
    Ok(EdgeFunction::from_fn(g, |p, q| f[p] - f[q]))
}

/// `df` stored as a 1-form.
pub fn exact_form(g: &WeightedGraph, f: &NodeFunction) -> Result<OneForm> {
    check_len(g.len(), f.len())?;
    Ok(OneForm::from_fn(g, |p, q| f[p] - f[q]))
}

/// `⟨w1, w2⟩ = Σ_p Σ_q w1(p,q) conj(w2(p,q)) b(p,q)`.
pub fn inner(g: &WeightedGraph, w1: &EdgeFunction, w2: &EdgeFunction) -> Result<Complex64> {
    check_len(g.num_slots(), w1.len())?;
    check_len(g.num_slots(), w2.len())?;
    Ok((0..g.num_slots())
        .map(|s| w1.0[s] * w2.0[s].conj() * g.slot_neighbor(s).weight)
        .sum())
}

/// Action of a function on a form in `H_a`: `½ (g(p) + g(q)) a(p, q)`.
pub fn act(g: &WeightedGraph, h: &NodeFunction, a: &OneForm) -> Result<OneForm> {
    check_len(g.len(), h.len())?;
    check_len(g.edges().len(), a.len())?;
    Ok(OneForm(
        g.edges()
            .iter()
            .zip(&a.0)
            .map(|(e, &x)| 0.5 * (h[e.lo] + h[e.hi]) * x)
            .collect(),
    ))
}

/// `∂*w(p) = Σ_q w(p, q) n(p, q)`.
pub fn divergence(g: &WeightedGraph, w: &EdgeFunction) -> Result<NodeFunction> {
    check_len(g.num_slots(), w.len())?;
    Ok(NodeFunction::new(
        (0..g.len())
            .map(|p| {
                g.slot_range(p)
                    .map(|s| w.0[s] * (2.0 * g.slot_neighbor(s).weight / g.mu()[p]))
                    .sum()
            })
            .collect(),
    ))
}

pub fn divergence_form(g: &WeightedGraph, a: &OneForm) -> Result<NodeFunction> {
    check_len(g.edges().len(), a.len())?;
    divergence(g, &a.to_edge_function(g))
}

/// Hodge splitting `ω = du + η` with `∂*η = 0` and `u` of zero μ-mean on
/// every connected component.
#[derive(Debug, Clone)]
pub struct HodgeDecomposition {
    pub potential: NodeFunction,
    pub exact: OneForm,
    pub harmonic: OneForm,
    /// Residual `‖(-L)u - ∂*ω‖_μ` of the normal equations.
    pub residual: f64,
}

/// Above this size the normal equations are solved by conjugate gradients.
pub const DIRECT_SOLVE_LIMIT: usize = 1000;

pub fn hodge(g: &WeightedGraph, omega: &OneForm) -> Result<HodgeDecomposition> {
    check_len(g.edges().len(), omega.len())?;
    let rhs = divergence_form(g, omega)?;
    let u = if g.len() <= DIRECT_SOLVE_LIMIT {
        solve_direct(g, &rhs)?
    } else {
        solve_cg(g, &rhs)?
    };
    // Pin the gauge exactly; isolated vertices get u = 0 from this as well.
    let mean = component_mean(g, &u)?;
    let u = u.zip_with(&mean, |a, m| a - m);

    let lu = crate::graph::apply_generator(g, &u)?;
    let resid = lu.zip_with(&rhs, |a, b| -a - b);
    let residual = crate::graph::norm_mu(g, &resid)?;
    let scale = crate::graph::norm_mu(g, &rhs)?.max(1.0);
    if residual.is_nan() || residual > 1e-8 * scale {
        return Err(Error::SolverFailure { residual });
    }

    let exact = exact_form(g, &u)?;
    let harmonic = omega.sub(&exact);
    Ok(HodgeDecomposition {
        potential: u,
        exact,
        harmonic,
        residual,
    })
}

// Symmetric system K u = μ∘rhs with K = diag(μ)(-L), made definite on each
// component by adding μ_c μ_c^T. The right side sums to zero on every
// component, so the solution automatically has zero μ-mean there.
fn solve_direct(g: &WeightedGraph, rhs: &NodeFunction) -> Result<NodeFunction> {
    let n = g.len();
    let (label, _) = g.components();
    let mut k = DMatrix::<f64>::zeros(n, n);
    for p in 0..n {
        for nb in g.neighbors(p) {
            k[(p, nb.vertex)] -= 2.0 * nb.weight;
            k[(p, p)] += 2.0 * nb.weight;
        }
    }
    let mu = g.mu();
    for p in 0..n {
        for q in 0..n {
            if label[p] == label[q] {
                k[(p, q)] += mu[p] * mu[q];
            }
        }
    }
    let chol = k.cholesky().ok_or(Error::SolverFailure { residual: f64::NAN })?;
    let re = DVector::from_iterator(n, (0..n).map(|p| rhs[p].re * mu[p]));
    let im = DVector::from_iterator(n, (0..n).map(|p| rhs[p].im * mu[p]));
    let ur = chol.solve(&re);
    let ui = chol.solve(&im);
    Ok(NodeFunction::new(
        (0..n).map(|p| Complex64::new(ur[p], ui[p])).collect(),
    ))
}

fn solve_cg(g: &WeightedGraph, rhs: &NodeFunction) -> Result<NodeFunction> {
    let n = g.len();
    let (label, count) = g.components();
    let mu = g.mu();
    // Operator K + Σ_c μ_c μ_c^T applied matrix-free.
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut mass = vec![0.0; count];
        for p in 0..n {
            mass[label[p]] += mu[p] * x[p];
        }
        (0..n)
            .map(|p| {
                let lap: f64 = g
                    .neighbors(p)
                    .iter()
                    .map(|nb| 2.0 * nb.weight * (x[p] - x[nb.vertex]))
                    .sum();
                lap + mu[p] * mass[label[p]]
            })
            .collect()
    };
    let solve = |b: Vec<f64>| -> Result<Vec<f64>> {
        let bnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut x = vec![0.0; n];
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut r = b;
        let mut d = r.clone();
        let mut rr: f64 = r.iter().map(|x| x * x).sum();
        for _ in 0..10 * n {
            let kd = apply(&d);
            let alpha = rr / d.iter().zip(&kd).map(|(a, b)| a * b).sum::<f64>();
            for i in 0..n {
                x[i] += alpha * d[i];
                r[i] -= alpha * kd[i];
            }
            let rr_new: f64 = r.iter().map(|x| x * x).sum();
            if rr_new.sqrt() <= 1e-13 * bnorm {
                return Ok(x);
            }
            let beta = rr_new / rr;
            for i in 0..n {
                d[i] = r[i] + beta * d[i];
            }
            rr = rr_new;
        }
        Err(Error::SolverFailure {
            residual: rr.sqrt() / bnorm,
        })
    };
    let ur = solve((0..n).map(|p| rhs[p].re * mu[p]).collect())?;
    let ui = solve((0..n).map(|p| rhs[p].im * mu[p]).collect())?;
    Ok(NodeFunction::new(
        (0..n).map(|p| Complex64::new(ur[p], ui[p])).collect(),
    ))
}

/// Outcome of comparing a quantity against an upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `E^a(f) ≤ 4 E(f) + 4 ‖f‖²_sup ‖a‖²` for a real potential `a`.
pub fn energy_bound_check(g: &WeightedGraph, a: &OneForm, f: &NodeFunction) -> Result<BoundCheck> {
    let zero_v = NodeFunction::zeros(g.len());
    let lhs = magnetic_energy(g, a, &zero_v, f, f)?.re;
    let free = dirichlet_energy(g, f, f)?.re;
    let sup = f.sup_norm();
    let rhs = 4.0 * free + 4.0 * sup * sup * a.norm_sqr(g);
    Ok(BoundCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12 * rhs,
    })
}
