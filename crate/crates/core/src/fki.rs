//! Monte Carlo evaluation of the Feynman–Kac–Itô semigroup
//! `P_t^{a,v} f(x) = E_x[e^{i S_t - V_t} f(Y_t)]` and its comparison against
//! the exact matrix semigroup `e^{-tH^{a,v}}`.

use num_complex::Complex64;

use crate::error::{check_len, param, Error, Result};
use crate::forms::OneForm;
use crate::graph::WeightedGraph;
use crate::magnetic::MagneticOperator;
use crate::path::{reverse, JumpPath, LineIntegrator, Orientation, Simulator};
use crate::stats::{batch_means, complex_z_score, par_collect, StdErr};
use crate::NodeFunction;

/// Stream id of path `index` started at `vertex`.
pub fn stream_id(vertex: usize, index: usize) -> u64 {
    ((vertex as u64) << 40) | index as u64
}

/// Per-path sampler of the Feynman–Kac–Itô weight.
#[derive(Debug, Clone)]
pub struct FkiSampler<'g> {
    sim: Simulator<'g>,
    integ: LineIntegrator<'g>,
    a: Vec<f64>,
    v: Vec<f64>,
    f: NodeFunction,
}

impl<'g> FkiSampler<'g> {
    pub fn new(g: &'g WeightedGraph, a: &OneForm, v: &NodeFunction, f: &NodeFunction) -> Result<Self> {
        Self::with_orientation(g, a, v, f, Orientation::FromTo)
    }

    pub fn with_orientation(
        g: &'g WeightedGraph,
        a: &OneForm,
        v: &NodeFunction,
        f: &NodeFunction,
        orientation: Orientation,
    ) -> Result<Self> {
        check_len(g.len(), v.len())?;
        check_len(g.len(), f.len())?;
        Ok(Self {
            sim: Simulator::new(g),
            integ: LineIntegrator::with_orientation(g, a, orientation)?,
            a: a.to_real(g, "magnetic potential")?,
            v: v.to_real("electric potential")?,
            f: f.clone(),
        })
    }

    pub fn simulator(&self) -> &Simulator<'g> {
        &self.sim
    }

    /// `e^{i S_T - V_T}` along a path.
    pub fn weight(&self, path: &JumpPath) -> Complex64 {
        let s = self.integ.stratonovich(path);
        let v: f64 = path.segments().map(|(p, a, b)| self.v[p] * (b - a)).sum();
        Complex64::from_polar((-v).exp(), s)
    }

    /// `e^{i S_T - V_T} f(Y_T)` along a path.
    pub fn sample_path(&self, path: &JumpPath) -> Complex64 {
        self.weight(path) * self.f[path.end_state()]
    }

    /// Magnetic sample and the free sample `e^{-V_T} |f(Y_T)|` on the same path.
    pub fn sample_pair(&self, path: &JumpPath) -> (Complex64, f64) {
        let v: f64 = path.segments().map(|(p, a, b)| self.v[p] * (b - a)).sum();
        let x = self.f[path.end_state()];
        let s = self.integ.stratonovich(path);
        (Complex64::from_polar((-v).exp(), s) * x, (-v).exp() * x.norm())
    }

    pub fn samples(&self, x: usize, t: f64, num_paths: usize, seed: u64) -> Result<Vec<Complex64>> {
        par_collect(num_paths, |i| {
            let path = self.sim.simulate(x, t, seed, stream_id(x, i))?;
            Ok(self.sample_path(&path))
        })
        .into_iter()
        .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimate {
    pub mean: Complex64,
    pub stderr: StdErr,
}

fn check_args(t: f64, num_paths: usize) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(param("t", format!("must be positive, got {t}")));
    }
    if num_paths < 2 {
        return Err(param("num_paths", format!("need at least 2, got {num_paths}")));
    }
    Ok(())
}

/// Estimate of `P_t^{a,v} f(x)` from `num_paths` paths started at `x`.
#[allow(clippy::too_many_arguments)]
pub fn estimate(
    g: &WeightedGraph,
    a: &OneForm,
    v: &NodeFunction,
    f: &NodeFunction,
    x: usize,
    t: f64,
    num_paths: usize,
    seed: u64,
) -> Result<PointEstimate> {
    check_args(t, num_paths)?;
    if x >= g.len() {
        return Err(Error::VertexOutOfRange(x));
    }
    let sampler = FkiSampler::new(g, a, v, f)?;
    let samples = sampler.samples(x, t, num_paths, seed)?;
    let (mean, stderr) = batch_means(&samples);
    Ok(PointEstimate { mean, stderr })
}

/// Per-vertex estimates of `P_t^{a,v} f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupEstimate {
    pub mean: Vec<Complex64>,
    pub stderr: Vec<StdErr>,
    pub num_paths: usize,
    pub t: f64,
    pub seed: u64,
    potential: Vec<f64>,
    electric: Vec<f64>,
}

impl SemigroupEstimate {
    pub fn mean_function(&self) -> NodeFunction {
        NodeFunction::new(self.mean.clone())
    }
}

pub fn estimate_vector(
    g: &WeightedGraph,
    a: &OneForm,
    v: &NodeFunction,
    f: &NodeFunction,
    t: f64,
    num_paths: usize,
    seed: u64,
) -> Result<SemigroupEstimate> {
    estimate_vector_oriented(g, a, v, f, t, num_paths, seed, Orientation::FromTo)
}

#[allow(clippy::too_many_arguments)]
pub fn estimate_vector_oriented(
    g: &WeightedGraph,
    a: &OneForm,
    v: &NodeFunction,
    f: &NodeFunction,
    t: f64,
    num_paths: usize,
    seed: u64,
    orientation: Orientation,
) -> Result<SemigroupEstimate> {
    check_args(t, num_paths)?;
    let sampler = FkiSampler::with_orientation(g, a, v, f, orientation)?;
    let mut mean = Vec::with_capacity(g.len());
    let mut stderr = Vec::with_capacity(g.len());
    for x in 0..g.len() {
        let (m, se) = batch_means(&sampler.samples(x, t, num_paths, seed)?);
        mean.push(m);
        stderr.push(se);
    }
    Ok(SemigroupEstimate {
        mean,
        stderr,
        num_paths,
        t,
        seed,
        potential: sampler.a,
        electric: sampler.v,
    })
}

/// Per-vertex z-scores of an estimate against `e^{-tH} f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub exact: NodeFunction,
    pub z: Vec<f64>,
}

impl Comparison {
    pub fn fraction_within(&self, limit: f64) -> f64 {
        self.z.iter().filter(|&&z| z <= limit).count() as f64 / self.z.len() as f64
    }

    /// At least 95% of vertices with `z ≤ 4`.
    pub fn passes(&self) -> bool {
        self.fraction_within(4.0) >= 0.95
    }

    pub fn max_z(&self) -> f64 {
        self.z.iter().copied().fold(0.0, f64::max)
    }
}

pub fn compare_exact(est: &SemigroupEstimate, op: &MagneticOperator, f: &NodeFunction) -> Result<Comparison> {
    if est.potential != op.potential() || est.electric != op.electric() {
        return Err(Error::MismatchedPotentials);
    }
    let exact = op.semigroup_exact(est.t, f)?;
    let z = (0..exact.len())
        .map(|p| complex_z_score(est.mean[p], exact[p], est.stderr[p]))
        .collect();
    Ok(Comparison { exact, z })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryTest {
    /// Estimate of `⟨P_t f, g⟩_μ`.
    pub lhs: Complex64,
    /// Estimate of `⟨f, P_t g⟩_μ`.
    pub rhs: Complex64,
    pub z: f64,
}

/// Paired estimate of `⟨P_t f, g⟩_μ - ⟨f, P_t g⟩_μ` from μ-started paths.
/// Per path the two integrands are `e^{iS-V} f(Y_t) conj g(Y_0)` and
/// `f(Y_0) conj(e^{iS-V} g(Y_t))`; their means agree only through the
/// time-reversal invariance of the stationary chain.
#[allow(clippy::too_many_arguments)]
pub fn symmetry_test(
    g: &WeightedGraph,
    a: &OneForm,
    v: &NodeFunction,
    f: &NodeFunction,
    h: &NodeFunction,
    t: f64,
    num_paths: usize,
    seed: u64,
) -> Result<SymmetryTest> {
    check_args(t, num_paths)?;
    check_len(g.len(), h.len())?;
    let sampler = FkiSampler::new(g, a, v, f)?;
    let mass = g.total_measure();
    let pairs = par_collect(num_paths, |i| -> Result<(Complex64, Complex64)> {
        let path = sampler.sim.simulate_stationary(t, seed, i as u64)?;
        let w = sampler.weight(&path);
        let (y0, yt) = (path.start(), path.end_state());
        Ok((w * f[yt] * h[y0].conj() * mass, f[y0] * (w * h[yt]).conj() * mass))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let lhs_s: Vec<Complex64> = pairs.iter().map(|p| p.0).collect();
    let rhs_s: Vec<Complex64> = pairs.iter().map(|p| p.1).collect();
    let diff: Vec<Complex64> = pairs.iter().map(|p| p.0 - p.1).collect();
    let (lhs, _) = batch_means(&lhs_s);
    let (rhs, _) = batch_means(&rhs_s);
    let (d, se) = batch_means(&diff);
    Ok(SymmetryTest {
        lhs,
        rhs,
        z: complex_z_score(d, Complex64::new(0.0, 0.0), se),
    })
}

/// `max |S_T(r_T ω) + S_T(ω)|` over an ensemble.
pub fn antisymmetry_audit(g: &WeightedGraph, paths: &[JumpPath], a: &OneForm) -> Result<f64> {
    let integ = LineIntegrator::new(g, a)?;
    let mut worst: f64 = 0.0;
    for p in paths {
        let r = reverse(p, p.horizon())?;
        worst = worst.max((integ.stratonovich(&r) + integ.stratonovich(p)).abs());
    }
    Ok(worst)
}
