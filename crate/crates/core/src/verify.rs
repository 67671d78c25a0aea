//! The invariant suite behind `magjump verify`.
//!
//! Every check reports a measured quantity and the tolerance it was held to.
//! Deterministic identities use relative tolerances; Monte Carlo checks are
//! z-scores against exact values.

use std::fmt;

use crate::forms::{
    derive, divergence_form, energy_bound_check, exact_form, hodge, inner as edge_inner, OneForm,
};
use crate::graph::{apply_generator, dirichlet_energy, energy_density, inner_mu, NodeFunction, WeightedGraph};
use crate::magnetic::{
    diamagnetic_check_with, energy_diamag_check, generator_quotient_with, magnetic_energy, quadratic_form_check,
    MagneticOperator,
};
use crate::path::{
    fukushima_martingale_energy, jump_consistency_check, levy_system_estimate, line_martingale_energy, reverse,
    JumpPath, LineIntegrator, Simulator,
};
use crate::problem::{ProblemSpec, Tolerances};
use crate::random;
use crate::stats::par_collect;
use crate::{fki, Complex64, Result};

/// Seed used when neither the caller nor the problem file supplies one.
pub const DEFAULT_SEED: u64 = 0x6d61_676a;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
        }
    }

    fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            passed: measured >= tolerance,
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<36} measured {:>12.4e}  tolerance {:>10.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

fn rel(gap: f64, scale: f64) -> f64 {
    gap / (1.0 + scale)
}

/// Runs every check on the problem. Monte Carlo checks use
/// `run.num_paths` paths; pathwise checks use up to 1000 paths of length
/// `run.horizon`.
pub fn run_suite(spec: &ProblemSpec, seed: u64) -> Result<Vec<CheckResult>> {
    let tol = &spec.run.tolerances;
    let mut out = Vec::new();

    let g = spec.graph()?;
    out.push(CheckResult::at_most("graph violations", g.validate().len() as f64, 0.0));
    let a = spec.potential(&g)?;
    let v = spec.electric();
    let f = spec.test_function();
    let op = MagneticOperator::assemble(&g, &a, &v)?;
    let free = op.without_field()?;

    let mut rng = random::rng(seed, u64::MAX);
    let h = random::complex_function(&mut rng, g.len());
    let w = random::complex_function(&mut rng, g.len());

    deterministic_checks(&g, &a, &v, &f, &h, &w, &op, &free, tol, &mut rng, &mut out)?;
    pathwise_checks(&g, &a, &f, spec, seed, &mut out)?;
    monte_carlo_checks(&g, &a, &v, &f, &op, spec, seed, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn deterministic_checks(
    g: &WeightedGraph,
    a: &OneForm,
    v: &NodeFunction,
    f: &NodeFunction,
    h: &NodeFunction,
    w: &NodeFunction,
    op: &MagneticOperator,
    free: &MagneticOperator,
    tol: &Tolerances,
    rng: &mut rand_chacha::ChaCha8Rng,
    out: &mut Vec<CheckResult>,
) -> Result<()> {
    let e_hw = dirichlet_energy(g, h, w)?;
    let e_wh = dirichlet_energy(g, w, h)?;
    let m_hw = magnetic_energy(g, a, v, h, w)?;
    let m_wh = magnetic_energy(g, a, v, w, h)?;
    out.push(CheckResult::at_most(
        "energy conjugate symmetry",
        rel((e_hw - e_wh.conj()).norm() + (m_hw - m_wh.conj()).norm(), e_hw.norm() + m_hw.norm()),
        tol.identity,
    ));

    let lh = apply_generator(g, h)?;
    let lhs = inner_mu(g, &lh, w)?;
    out.push(CheckResult::at_most(
        "generator adjointness",
        rel((lhs + e_hw).norm(), e_hw.norm()),
        tol.identity,
    ));

    let omega = random::potential(rng, g, 1.0);
    let dh = derive(g, h)?;
    let left = edge_inner(g, &dh, &omega.to_edge_function(g))?;
    let right = inner_mu(g, h, &divergence_form(g, &omega)?)?;
    out.push(CheckResult::at_most(
        "divergence adjointness",
        rel((left - right).norm(), left.norm()),
        tol.identity,
    ));

    let fr = NodeFunction::new(f.values().iter().map(|z| Complex64::new(z.re, 0.0)).collect());
    let density: f64 = energy_density(g, &fr)?.iter().zip(g.mu()).map(|(d, m)| d * m).sum();
    let energy = dirichlet_energy(g, &fr, &fr)?.re;
    out.push(CheckResult::at_most(
        "energy density mass",
        rel((density - energy).abs(), energy),
        tol.identity,
    ));

    let scale = op.spectrum().iter().fold(1.0f64, |m, x| m.max(x.abs()));
    out.push(CheckResult::at_most(
        "hermiticity residual",
        op.hermiticity_residual() / scale,
        tol.identity,
    ));

    let mut worst: f64 = 0.0;
    for (x, y) in [(f, h), (h, w), (w, f)] {
        let c = quadratic_form_check(op, x, y)?;
        worst = worst.max(rel(c.gap, c.lhs.norm()));
    }
    out.push(CheckResult::at_most("quadratic form identity", worst, tol.operator));

    let u = random::real_function(rng, g.len(), -3.0, 3.0);
    let shifted = op.gauge_shift(&u)?;
    out.push(CheckResult::at_most(
        "gauge covariance (spectrum)",
        spectral_drift(op.spectrum(), shifted.spectrum()),
        tol.spectral,
    ));
    let reversed = MagneticOperator::assemble(g, &a.neg(), v)?;
    out.push(CheckResult::at_most(
        "a -> -a spectrum",
        spectral_drift(op.spectrum(), reversed.spectrum()),
        tol.spectral,
    ));

    for t in [0.01, 0.1, 1.0, 10.0] {
        let mut excess: f64 = 0.0;
        for x in [f, h, w] {
            excess = excess.max(diamagnetic_check_with(op, free, x, t)?);
        }
        out.push(CheckResult::at_most(
            format!("diamagnetic semigroup t={t}"),
            excess.max(0.0),
            tol.spectral,
        ));
    }

    let mut excess: f64 = 0.0;
    let mut bound_excess: f64 = 0.0;
    for x in [f, h, w] {
        let c = energy_diamag_check(g, a, x)?;
        excess = excess.max(rel(c.lhs - c.rhs, c.rhs));
        let b = energy_bound_check(g, a, x)?;
        bound_excess = bound_excess.max(rel(b.lhs - b.rhs, b.rhs));
    }
    out.push(CheckResult::at_most("diamagnetic energy", excess.max(0.0), tol.identity));
    out.push(CheckResult::at_most("magnetic energy bound", bound_excess.max(0.0), tol.identity));

    let split = hodge(g, a)?;
    let norm = a.norm_sqr(g).sqrt();
    let recomposed = split.exact.add(&split.harmonic).sub(a);
    let orth = split.exact.inner(g, &split.harmonic).norm();
    let div = divergence_form(g, &split.harmonic)?;
    out.push(CheckResult::at_most(
        "hodge recomposition",
        rel(recomposed.norm_sqr(g).sqrt(), norm),
        tol.residual,
    ));
    out.push(CheckResult::at_most("hodge orthogonality", rel(orth, norm * norm), tol.residual));
    out.push(CheckResult::at_most(
        "hodge divergence of harmonic part",
        crate::graph::norm_mu(g, &div)?,
        tol.divergence,
    ));
    let du = exact_form(g, &split.potential)?;
    out.push(CheckResult::at_most(
        "hodge exact part",
        rel(du.sub(&split.exact).norm_sqr(g).sqrt(), norm),
        tol.residual,
    ));

    let ratio = quotient_ratio(free, a, v, f, 1e-3)?;
    out.push(CheckResult {
        name: "generator quotient order".into(),
        measured: ratio.unwrap_or(2.0),
        tolerance: tol.ratio_min,
        passed: ratio.is_none_or(|r| (tol.ratio_min..=tol.ratio_max).contains(&r)),
    });
    Ok(())
}

/// Sorted-eigenvalue drift relative to the spectral scale.
pub fn spectral_drift(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(1.0f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// `err(t) / err(t/2)` for the generator quotient against `H^{a,v} f`,
/// or `None` when the error at `t` is already at rounding level.
pub fn quotient_ratio(
    free: &MagneticOperator,
    a: &OneForm,
    v: &NodeFunction,
    f: &NodeFunction,
    t: f64,
) -> Result<Option<f64>> {
    let g = free.graph();
    let op = MagneticOperator::assemble(g, a, v)?;
    let hf = op.apply(f)?;
    let err = |t: f64| -> Result<f64> {
        let q = generator_quotient_with(free, a, v, f, t)?;
        Ok((0..f.len()).map(|p| (q[p] - hf[p]).norm()).fold(0.0, f64::max))
    };
    let (e1, e2) = (err(t)?, err(t / 2.0)?);
    let scale = hf.sup_norm().max(f.sup_norm()).max(1.0);
    if e1 <= 1e-9 * scale {
        return Ok(None);
    }
    Ok(Some(e1 / e2))
}

fn pathwise_checks(
    g: &WeightedGraph,
    a: &OneForm,
    f: &NodeFunction,
    spec: &ProblemSpec,
    seed: u64,
    out: &mut Vec<CheckResult>,
) -> Result<()> {
    let tol = &spec.run.tolerances;
    let horizon = spec.run.horizon;
    let n = spec.run.num_paths.min(1000);
    let sim = Simulator::new(g);
    let paths: Vec<JumpPath> = par_collect(n, |i| sim.simulate_stationary(horizon, seed, i as u64))
        .into_iter()
        .collect::<Result<_>>()?;
    let integ = LineIntegrator::new(g, a)?;
    let min_a = a
        .values()
        .iter()
        .map(|x| x.re.abs())
        .filter(|&x| x > 0.0)
        .fold(f64::INFINITY, f64::min);
    let eps = if min_a.is_finite() { 0.5 * min_a } else { 1.0 };

    let (mut anti, mut sym, mut split, mut comp, mut cons) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut scale: f64 = 1.0;
    for p in &paths {
        let r = reverse(p, horizon)?;
        let (s, l) = (integ.stratonovich(p), integ.divergence_part(p));
        scale = scale.max(s.abs()).max(l.abs());
        anti = anti.max((integ.stratonovich(&r) + s).abs());
        sym = sym.max((integ.divergence_part(&r) - l).abs());
        split = split.max((s - integ.martingale(p) - l).abs());
        comp = comp.max((integ.compensated(p, eps)? - s).abs());
        cons = cons.max(jump_consistency_check(g, p, f)?);
    }
    let tol_path = tol.identity * scale;
    out.push(CheckResult::at_most("reversal antisymmetry of S", anti, tol_path));
    out.push(CheckResult::at_most("reversal symmetry of divergence part", sym, tol_path));
    out.push(CheckResult::at_most("S = M + divergence part", split, tol_path));
    out.push(CheckResult::at_most("compensated sum below min |a|", comp, tol_path));
    out.push(CheckResult::at_most(
        "Fukushima jump consistency",
        cons,
        tol.identity * f.sup_norm().max(1.0),
    ));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn monte_carlo_checks(
    g: &WeightedGraph,
    a: &OneForm,
    v: &NodeFunction,
    f: &NodeFunction,
    op: &MagneticOperator,
    spec: &ProblemSpec,
    seed: u64,
    out: &mut Vec<CheckResult>,
) -> Result<()> {
    let tol = &spec.run.tolerances;
    let n = spec.run.num_paths;
    for &t in &spec.run.times {
        let est = fki::estimate_vector(g, a, v, f, t, n, seed)?;
        let cmp = fki::compare_exact(&est, op, f)?;
        out.push(CheckResult::at_least(
            format!("FKI vs exact t={t} (fraction z<={})", tol.z_limit),
            cmp.fraction_within(tol.z_limit),
            tol.z_fraction,
        ));
    }

    let horizon = spec.run.horizon;
    let real_a = OneForm::from_edge_values(g, a.values().iter().map(|z| Complex64::new(z.re, 0.0)).collect())?;
    let m = line_martingale_energy(g, &real_a, horizon, n, seed ^ 1)?;
    out.push(CheckResult::at_most("line-integral martingale energy (z)", m.z, tol.sigma));
    let m = fukushima_martingale_energy(g, f, horizon, n, seed ^ 2)?;
    out.push(CheckResult::at_most("Fukushima martingale energy (z)", m.z, tol.sigma));

    let mut rng = random::rng(seed, u64::MAX - 1);
    let phi = random::nonnegative_edge_function(&mut rng, g);
    let m = levy_system_estimate(g, &phi, horizon, n, seed ^ 3)?;
    out.push(CheckResult::at_most("Levy system (z)", m.z, tol.z_limit));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_VERTEX: &str = r#"
[[nodes]]
id = "0"
mu = 1.0
f = 1.0

[[nodes]]
id = "1"
mu = 1.0
f = 0.0

[[edges]]
p = "0"
q = "1"
b = 1.0
a = 1.5707963267948966

[run]
times = [0.5]
num_paths = 20000
horizon = 0.5
"#;

    #[test]
    fn suite_passes_on_two_vertex_problem() {
        let spec = ProblemSpec::parse(TWO_VERTEX).unwrap();
        let results = run_suite(&spec, 11).unwrap();
        for r in &results {
            assert!(r.passed, "{r}");
        }
        assert!(results.len() > 20);
    }

    #[test]
    fn tight_tolerance_fails() {
        let mut spec = ProblemSpec::parse(TWO_VERTEX).unwrap();
        spec.run.tolerances.z_fraction = 1.1;
        let results = run_suite(&spec, 11).unwrap();
        assert!(results.iter().any(|r| !r.passed && r.name.starts_with("FKI")));
    }
}
