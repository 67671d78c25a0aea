//! Magnetic energy forms and the Hermitian realization of
//! `(H^{a,v} f)(p) = Σ_q (f(p) - e^{i a(p,q)} f(q)) n(p,q) + v(p) f(p)`.
//!
//! `H` is self-adjoint in `L²(V, μ)`, not in the flat inner product. The
//! operator keeps the eigendecomposition of the similar Hermitian matrix
//! `D^{1/2} H D^{-1/2}` (`D = diag μ`) and maps its eigenvectors back, so the
//! stored eigenvectors are μ-orthonormal eigenvectors of `H` itself.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{check_len, param, Error, Result};
use crate::forms::{exact_form, BoundCheck, OneForm};
use crate::graph::{dirichlet_energy, inner_mu, WeightedGraph};
use crate::NodeFunction;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `E^{a,v}(f,g)`, summed edgewise over ordered pairs plus the potential term.
pub fn magnetic_energy(
    g: &WeightedGraph,
    a: &OneForm,
    v: &NodeFunction,
    f: &NodeFunction,
    h: &NodeFunction,
) -> Result<Complex64> {
    check_len(g.edges().len(), a.len())?;
    check_len(g.len(), v.len())?;
    check_len(g.len(), f.len())?;
    check_len(g.len(), h.len())?;
    let a_slots = a.real_slot_values(g, "magnetic potential")?;
    let v = v.to_real("electric potential")?;
    let mut acc = ZERO;
    for p in 0..g.len() {
        for s in g.slot_range(p) {
            let nb = g.slot_neighbor(s);
            let q = nb.vertex;
            let phase = Complex64::from_polar(1.0, a_slots[s]);
            acc += (f[p] - phase * f[q]) * (h[p] - phase * h[q]).conj() * nb.weight;
        }
    }
    for p in 0..g.len() {
        acc += f[p] * h[p].conj() * (v[p] * g.mu()[p]);
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct MagneticOperator {
    graph: WeightedGraph,
    a: Vec<f64>,
    v: Vec<f64>,
    v_neg_sup: f64,
    matrix: DMatrix<Complex64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl MagneticOperator {
    /// Builds `H^{a,v}` and its spectral decomposition.
    pub fn assemble(g: &WeightedGraph, a: &OneForm, v: &NodeFunction) -> Result<Self> {
        check_len(g.edges().len(), a.len())?;
        check_len(g.len(), v.len())?;
        let a_edges = a.to_real(g, "magnetic potential")?;
        let v_re = v.to_real("electric potential")?;
        if let Some(p) = v_re.iter().position(|x| !x.is_finite()) {
            return Err(param("v", format!("non-finite value at vertex {}", g.id(p))));
        }
        let a_slots = a.real_slot_values(g, "magnetic potential")?;

        let n = g.len();
        let mut h = DMatrix::from_element(n, n, ZERO);
        for p in 0..n {
            h[(p, p)] += Complex64::new(v_re[p], 0.0);
            for s in g.slot_range(p) {
                let nb = g.slot_neighbor(s);
                let rate = 2.0 * nb.weight / g.mu()[p];
                h[(p, p)] += rate;
                h[(p, nb.vertex)] -= Complex64::from_polar(rate, a_slots[s]);
            }
        }

        let sqrt_mu: Vec<f64> = g.mu().iter().map(|m| m.sqrt()).collect();
        let mut sym = DMatrix::from_fn(n, n, |p, q| h[(p, q)] * (sqrt_mu[p] / sqrt_mu[q]));
        let adj = sym.adjoint();
        sym = (sym + adj) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::try_new(sym, 1e-15, 0).ok_or(Error::EigenFailure)?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = DMatrix::from_fn(n, n, |p, k| eig.eigenvectors[(p, order[k])] / sqrt_mu[p]);

        let v_neg_sup = v_re.iter().map(|x| (-x).max(0.0)).fold(0.0, f64::max);
        Ok(Self {
            graph: g.clone(),
            a: a_edges,
            v: v_re,
            v_neg_sup,
            matrix: h,
            eigenvalues,
            eigenvectors,
        })
    }

    /// `H^{0,0} = -L`.
    pub fn free(g: &WeightedGraph) -> Result<Self> {
        Self::assemble(g, &OneForm::zeros(g), &NodeFunction::zeros(g.len()))
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Magnetic potential per edge, oriented from lower to higher index.
    pub fn potential(&self) -> &[f64] {
        &self.a
    }

    pub fn potential_form(&self) -> OneForm {
        OneForm::from_edge_values(
            &self.graph,
            self.a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
        .expect("stored potential matches the graph")
    }

    pub fn electric(&self) -> &[f64] {
        &self.v
    }

    pub fn electric_function(&self) -> NodeFunction {
        NodeFunction::from_real(&self.v)
    }

    /// `sup_p v_-(p)`.
    pub fn v_negative_sup(&self) -> f64 {
        self.v_neg_sup
    }

    /// Ascending eigenvalues.
    pub fn spectrum(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// μ-orthonormal eigenvectors as columns, matching [`spectrum`](Self::spectrum).
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn apply(&self, f: &NodeFunction) -> Result<NodeFunction> {
        check_len(self.graph.len(), f.len())?;
        let x = DVector::from_column_slice(f.values());
        Ok(NodeFunction::new((&self.matrix * x).iter().copied().collect()))
    }

    /// Largest `|H(p,q) μ(p) - conj(H(q,p)) μ(q)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mu = self.graph.mu();
        let n = self.graph.len();
        let mut worst: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                let d = self.matrix[(p, q)] * mu[p] - self.matrix[(q, p)].conj() * mu[q];
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Matrix of `e^{-tH}` acting on column vectors.
    pub fn semigroup_matrix(&self, t: f64) -> Result<DMatrix<Complex64>> {
        check_time(t)?;
        let n = self.graph.len();
        let phi = &self.eigenvectors;
        let scaled = DMatrix::from_fn(n, n, |p, k| phi[(p, k)] * (-t * self.eigenvalues[k]).exp());
        let mut right = phi.adjoint();
        for (q, m) in self.graph.mu().iter().enumerate() {
            right.column_mut(q).scale_mut(*m);
        }
        Ok(scaled * right)
    }

    /// `e^{-tH} f` through the spectral decomposition.
    pub fn semigroup_exact(&self, t: f64, f: &NodeFunction) -> Result<NodeFunction> {
        check_time(t)?;
        check_len(self.graph.len(), f.len())?;
        if t == 0.0 {
            return Ok(f.clone());
        }
        let mu = self.graph.mu();
        let weighted = DVector::from_iterator(f.len(), f.values().iter().zip(mu).map(|(z, m)| z * m));
        let mut coeff = self.eigenvectors.adjoint() * weighted;
        for (k, c) in coeff.iter_mut().enumerate() {
            *c *= (-t * self.eigenvalues[k]).exp();
        }
        Ok(NodeFunction::new((&self.eigenvectors * coeff).iter().copied().collect()))
    }

    /// The operator for the potential `a + du`.
    pub fn gauge_shift(&self, u: &NodeFunction) -> Result<Self> {
        check_len(self.graph.len(), u.len())?;
        u.to_real("gauge function")?;
        let shifted = self.potential_form().add(&exact_form(&self.graph, u)?);
        Self::assemble(&self.graph, &shifted, &self.electric_function())
    }

    /// The operator with the same electric potential and no magnetic field.
    pub fn without_field(&self) -> Result<Self> {
        Self::assemble(&self.graph, &OneForm::zeros(&self.graph), &self.electric_function())
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(param("t", format!("must be a nonnegative time, got {t}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
}

/// Compares `⟨Hf, g⟩_μ` with the edgewise energy `E^{a,v}(f, g)`.
pub fn quadratic_form_check(op: &MagneticOperator, f: &NodeFunction, h: &NodeFunction) -> Result<IdentityCheck> {
    let g = op.graph();
    let lhs = inner_mu(g, &op.apply(f)?, h)?;
    let rhs = magnetic_energy(g, &op.potential_form(), &op.electric_function(), f, h)?;
    Ok(IdentityCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).norm(),
    })
}

/// `max_p |e^{-tH^{a,v}} f(p)| - (e^{-tH^{0,v}} |f|)(p)`; nonpositive when
/// the diamagnetic inequality holds.
pub fn diamagnetic_check(op: &MagneticOperator, f: &NodeFunction, t: f64) -> Result<f64> {
    let free = op.without_field()?;
    diamagnetic_check_with(op, &free, f, t)
}

/// As [`diamagnetic_check`] with a caller-supplied `H^{0,v}`.
pub fn diamagnetic_check_with(
    op: &MagneticOperator,
    free: &MagneticOperator,
    f: &NodeFunction,
    t: f64,
) -> Result<f64> {
    if free.electric() != op.electric() || free.potential().iter().any(|&x| x != 0.0) {
        return Err(Error::MismatchedPotentials);
    }
    let lhs = op.semigroup_exact(t, f)?;
    let rhs = free.semigroup_exact(t, &f.abs())?;
    Ok((0..f.len())
        .map(|p| lhs[p].norm() - rhs[p].re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Checks `E(|f|) ≤ E^{a,0}(f)`; `lhs` is the free energy of `|f|`.
pub fn energy_diamag_check(g: &WeightedGraph, a: &OneForm, f: &NodeFunction) -> Result<BoundCheck> {
    let modulus = f.abs();
    let lhs = dirichlet_energy(g, &modulus, &modulus)?.re;
    let rhs = magnetic_energy(g, a, &NodeFunction::zeros(g.len()), f, f)?.re;
    Ok(BoundCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12 * rhs.abs(),
    })
}

/// `(1/t) Σ_q (f(p) - e^{i a(p,q)} f(q)) P_t(p,q) + v(p) f(p)` with
/// `P_t = e^{tL}` the free transition matrix. Tends to `H^{a,v} f` as `t → 0`.
pub fn generator_quotient(
    g: &WeightedGraph,
    a: &OneForm,
    v: &NodeFunction,
    f: &NodeFunction,
    t: f64,
) -> Result<NodeFunction> {
    let free = MagneticOperator::free(g)?;
    generator_quotient_with(&free, a, v, f, t)
}

/// As [`generator_quotient`], reusing the spectral data of `H^{0,0}`.
pub fn generator_quotient_with(
    free: &MagneticOperator,
    a: &OneForm,
    v: &NodeFunction,
    f: &NodeFunction,
    t: f64,
) -> Result<NodeFunction> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(param("t", format!("must be positive, got {t}")));
    }
    let g = free.graph();
    check_len(g.edges().len(), a.len())?;
    check_len(g.len(), v.len())?;
    check_len(g.len(), f.len())?;
    let v = v.to_real("electric potential")?;
    a.to_real(g, "magnetic potential")?;
    let pt = free.semigroup_matrix(t)?;
    let n = g.len();
    Ok(NodeFunction::new(
        (0..n)
            .map(|p| {
                let mut acc = ZERO;
                for q in 0..n {
                    if q == p {
                        continue;
                    }
                    let phase = Complex64::from_polar(1.0, a.get(g, p, q).re);
                    acc += (f[p] - phase * f[q]) * pt[(p, q)].re;
                }
                acc / t + f[p] * v[p]
            })
            .collect(),
    ))
}
