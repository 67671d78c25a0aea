//! Acceptance suite. Run with
//! `cargo test -p magjump --test acceptance -- --nocapture --test-threads=1`
//! to see one PASS/FAIL line per criterion.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use common::report;
use magjump::forms::{divergence_form, hodge, OneForm};
use magjump::graph::{build_stable_lattice, inner_mu, norm_mu};
use magjump::magnetic::{diamagnetic_check_with, energy_diamag_check, generator_quotient_with};
use magjump::path::{
    fukushima_martingale_energy, levy_system_estimate, line_martingale_energy, reverse, LineIntegrator, Simulator,
};
use magjump::stats::par_collect;
use magjump::{fki, random, Complex64, MagneticOperator, NodeFunction, WeightedGraph};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn real(v: &NodeFunction) -> Vec<f64> {
    v.values().iter().map(|z| z.re).collect()
}

fn spectral_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn criterion_01_operator_identity() {
    let clock = Instant::now();
    let mut rng = random::rng(101, 0);
    let (mut worst_lib, mut worst_oracle): (f64, f64) = (0.0, 0.0);
    for k in 0..50 {
        let n = 2 + k % 11;
        let g = random::connected_graph(&mut rng, n, 0.4);
        let a = random::potential(&mut rng, &g, PI);
        let v = random::real_function(&mut rng, n, 0.0, 2.0);
        let op = MagneticOperator::assemble(&g, &a, &v).unwrap();
        let dense = common::dense_hamiltonian(&g, &a, &real(&v));
        for _ in 0..20 {
            let f = random::complex_function(&mut rng, n);
            let h = random::complex_function(&mut rng, n);
            let lhs = inner_mu(&g, &op.apply(&f).unwrap(), &h).unwrap();
            let rhs = magjump::magnetic::magnetic_energy(&g, &a, &v, &f, &h).unwrap();
            let oracle_lhs = inner_mu(&g, &common::matvec(&dense, &f), &h).unwrap();
            let oracle_rhs = common::energy(&g, &a, &real(&v), &f, &h);
            let scale = 1.0 + lhs.norm();
            worst_lib = worst_lib.max((lhs - rhs).norm() / scale);
            worst_oracle = worst_oracle
                .max((oracle_lhs - lhs).norm() / scale)
                .max((oracle_rhs - rhs).norm() / scale);
        }
    }
    let ok = worst_lib <= 1e-11 && worst_oracle <= 1e-11;
    assert!(report(
        1,
        "<Hf,g> = E^{a,v}(f,g)",
        ok,
        format!(
            "max rel gap {worst_lib:.2e}, oracle gap {worst_oracle:.2e} (tol 1e-11), {:.2?}",
            clock.elapsed()
        )
    ));
}

#[test]
fn criterion_02_hermiticity_and_gauge() {
    let clock = Instant::now();
    let mut rng = random::rng(102, 0);
    let (mut herm, mut drift, mut tree_drift): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 0..50 {
        let n = 2 + k % 11;
        let g = random::connected_graph(&mut rng, n, 0.4);
        let a = random::potential(&mut rng, &g, PI);
        let v = random::real_function(&mut rng, n, 0.0, 2.0);
        let u = random::real_function(&mut rng, n, -5.0, 5.0);
        let op = MagneticOperator::assemble(&g, &a, &v).unwrap();
        herm = herm.max(op.hermiticity_residual());
        drift = drift.max(spectral_gap(op.spectrum(), op.gauge_shift(&u).unwrap().spectrum()));

        let t = random::tree(&mut rng, n);
        let ta = random::potential(&mut rng, &t, PI);
        let with = MagneticOperator::assemble(&t, &ta, &v).unwrap();
        let without = MagneticOperator::assemble(&t, &OneForm::zeros(&t), &v).unwrap();
        tree_drift = tree_drift.max(spectral_gap(with.spectrum(), without.spectrum()));
    }
    let ok = herm <= 1e-12 && drift <= 1e-10 && tree_drift <= 1e-10;
    assert!(report(
        2,
        "Hermiticity, gauge covariance, tree triviality",
        ok,
        format!(
            "hermiticity {herm:.2e} (tol 1e-12), gauge drift {drift:.2e}, tree drift {tree_drift:.2e} (tol 1e-10), {:.2?}",
            clock.elapsed()
        )
    ));
}

#[test]
fn criterion_03_cycle_flux_spectrum() {
    let clock = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [3, 4, 6, 8] {
        let g = WeightedGraph::cycle(n).unwrap();
        for phi in [0.0, PI / 3.0, PI / 2.0, PI] {
            let a = common::cycle_potential(&g, phi);
            let op = MagneticOperator::assemble(&g, &a, &NodeFunction::zeros(n)).unwrap();
            worst = worst.max(spectral_gap(op.spectrum(), &common::cycle_flux_spectrum(n, phi)));
        }
    }
    assert!(report(
        3,
        "cycle flux spectrum 4 - 4cos(2pi k/N + phi)",
        worst <= 1e-10,
        format!("max gap {worst:.2e} (tol 1e-10), {:.2?}", clock.elapsed())
    ));
}

#[test]
fn criterion_04_diamagnetic() {
    let clock = Instant::now();
    let mut rng = random::rng(104, 0);
    let mut violation = f64::NEG_INFINITY;
    let mut oracle_gap: f64 = 0.0;
    for k in 0..50 {
        let n = 2 + k % 9;
        let g = random::connected_graph(&mut rng, n, 0.4);
        let a = random::potential(&mut rng, &g, PI);
        let v = random::real_function(&mut rng, n, 0.0, 2.0);
        let f = random::complex_function(&mut rng, n);
        let op = MagneticOperator::assemble(&g, &a, &v).unwrap();
        let free = op.without_field().unwrap();
        for t in [0.01, 0.1, 1.0, 10.0] {
            violation = violation.max(diamagnetic_check_with(&op, &free, &f, t).unwrap());
            let exact = op.semigroup_exact(t, &f).unwrap();
            let oracle = common::semigroup(&g, &a, &real(&v), t, &f);
            for p in 0..n {
                oracle_gap = oracle_gap.max((exact[p] - oracle[p]).norm());
            }
        }
    }
    let mut energy_excess = f64::NEG_INFINITY;
    for k in 0..200 {
        let n = 2 + k % 9;
        let g = random::connected_graph(&mut rng, n, 0.4);
        let a = random::potential(&mut rng, &g, PI);
        let f = random::complex_function(&mut rng, n);
        let b = energy_diamag_check(&g, &a, &f).unwrap();
        energy_excess = energy_excess.max(b.lhs - b.rhs - 1e-12 * b.rhs);
    }
    let ok = violation <= 1e-10 && energy_excess <= 0.0 && oracle_gap <= 1e-10;
    assert!(report(
        4,
        "diamagnetic domination and energy inequality",
        ok,
        format!(
            "max |P^a f| - P^0|f| = {violation:.2e} (tol 1e-10), energy excess {energy_excess:.2e} (<= 0), \
             semigroup vs oracle {oracle_gap:.2e}, {:.2?}",
            clock.elapsed()
        )
    ));
}

fn reversal_audit(g: &WeightedGraph, a: &OneForm, horizon: f64, seed: u64) -> (f64, f64, f64) {
    let sim = Simulator::new(g);
    let integ = LineIntegrator::new(g, a).unwrap();
    let rows = par_collect(10_000, |i| {
        let path = sim.simulate_stationary(horizon, seed, i as u64).unwrap();
        let rev = reverse(&path, horizon).unwrap();
        let (s, l, m) = (integ.stratonovich(&path), integ.divergence_part(&path), integ.martingale(&path));
        // M computed independently as the jump sum minus the compensator.
        let jumps: f64 = path.transitions().map(|(_, p, q)| a.get(g, p, q).re).sum();
        let div = real(&divergence_form(g, a).unwrap());
        let comp: f64 = path.segments().map(|(p, t0, t1)| div[p] * (t1 - t0)).sum();
        (
            (integ.stratonovich(&rev) + s).abs(),
            (integ.divergence_part(&rev) - l).abs(),
            (s - m - l).abs().max((m - (jumps - comp)).abs()),
        )
    });
    rows.into_iter()
        .fold((0.0, 0.0, 0.0), |acc, r| (acc.0.max(r.0), acc.1.max(r.1), acc.2.max(r.2)))
}

#[test]
fn criterion_05_time_reversal() {
    let clock = Instant::now();
    let mut rng = random::rng(105, 0);
    let g6 = random::connected_graph(&mut rng, 6, 0.5);
    let a6 = random::potential(&mut rng, &g6, 1.0);
    let lattice = build_stable_lattice(16, 0.25, 1.0, None).unwrap();
    let al = random::potential(&mut rng, &lattice, 1.0);
    let r6 = reversal_audit(&g6, &a6, 1.0, 5);
    let rl = reversal_audit(&lattice, &al, 1.0, 6);
    let worst = (r6.0.max(rl.0), r6.1.max(rl.1), r6.2.max(rl.2));
    let ok = worst.0 <= 1e-12 && worst.1 <= 1e-12 && worst.2 <= 1e-12;
    assert!(report(
        5,
        "pathwise time reversal",
        ok,
        format!(
            "|S(rev)+S| {:.2e}, |L(rev)-L| {:.2e}, |S-M-L| {:.2e} (tol 1e-12), {:.2?}",
            worst.0,
            worst.1,
            worst.2,
            clock.elapsed()
        )
    ));
}

#[test]
fn criterion_06_fki_semigroup() {
    let clock = Instant::now();
    let g = WeightedGraph::cycle(8).unwrap();
    let a = common::cycle_potential(&g, PI / 3.0);
    let v = NodeFunction::indicator(8, 0);
    let mut rng = random::rng(106, 0);
    let f = random::complex_function(&mut rng, 8);
    let op = MagneticOperator::assemble(&g, &a, &v).unwrap();
    let mut fractions = Vec::new();
    let mut oracle_gap: f64 = 0.0;
    for (i, t) in [0.2, 1.0].into_iter().enumerate() {
        let est = fki::estimate_vector(&g, &a, &v, &f, t, 100_000, 600 + i as u64).unwrap();
        let cmp = fki::compare_exact(&est, &op, &f).unwrap();
        let oracle = common::semigroup(&g, &a, &real(&v), t, &f);
        for p in 0..8 {
            oracle_gap = oracle_gap.max((cmp.exact[p] - oracle[p]).norm());
        }
        fractions.push((t, cmp.fraction_within(4.0), cmp.max_z()));
    }
    let ones = NodeFunction::constant(8, c(1.0));
    let conservative = fki::estimate_vector(&g, &OneForm::zeros(&g), &NodeFunction::zeros(8), &ones, 1.0, 1000, 7).unwrap();
    let exact_one = conservative
        .mean
        .iter()
        .zip(&conservative.stderr)
        .all(|(m, s)| *m == c(1.0) && s.max() == 0.0);
    let ok = fractions.iter().all(|&(_, fr, _)| fr >= 0.95) && exact_one && oracle_gap <= 1e-10;
    let detail: Vec<String> = fractions
        .iter()
        .map(|(t, fr, z)| format!("t={t}: {:.0}% z<=4 (max z {z:.2})", 100.0 * fr))
        .collect();
    assert!(report(
        6,
        "FKI estimate vs e^{-tH} f",
        ok,
        format!(
            "{}; f=1 exact with zero variance: {exact_one}; exact vs oracle {oracle_gap:.2e}, {:.2?}",
            detail.join(", "),
            clock.elapsed()
        )
    ));
}

/// `‖a‖² = Σ_{ordered pairs} a(p,q)² b(p,q)` from the raw pair list.
fn form_energy(g: &WeightedGraph, a: &OneForm) -> f64 {
    g.raw_pairs()
        .iter()
        .map(|&(p, q, b)| 2.0 * a.get(g, p, q).re.powi(2) * b)
        .sum()
}

fn function_energy(g: &WeightedGraph, f: &NodeFunction) -> f64 {
    g.raw_pairs()
        .iter()
        .map(|&(p, q, b)| 2.0 * (f[p] - f[q]).norm_sqr() * b)
        .sum()
}

#[test]
fn criterion_07_martingale_energies() {
    let clock = Instant::now();
    let two = WeightedGraph::unit_measure(2, vec![(0, 1, 1.0)]).unwrap();
    let mut a2 = OneForm::zeros(&two);
    a2.set(&two, 0, 1, c(PI / 2.0)).unwrap();
    let f2 = NodeFunction::from_real(&[1.0, 0.0]);
    let mut rng = random::rng(107, 0);
    let g6 = random::connected_graph(&mut rng, 6, 0.5);
    let a6 = random::potential(&mut rng, &g6, 1.0);
    let f6 = random::complex_function(&mut rng, 6);

    let mut lines = Vec::new();
    let mut ok = true;
    for (name, g, a, f, seed) in [("2-vertex", &two, &a2, &f2, 70u64), ("6-vertex", &g6, &a6, &f6, 71)] {
        let m = line_martingale_energy(g, a, 0.05, 100_000, seed).unwrap();
        let n = fukushima_martingale_energy(g, f, 0.05, 100_000, seed + 100).unwrap();
        let (za, zf) = (
            (m.estimate - form_energy(g, a)).abs() / m.stderr,
            (n.estimate - function_energy(g, f)).abs() / n.stderr,
        );
        ok &= za <= 3.0 && zf <= 3.0;
        lines.push(format!("{name}: z(Theta(a)) {za:.2}, z(M^f) {zf:.2}"));
    }
    assert!(report(
        7,
        "martingale energies at T=0.05",
        ok,
        format!("{} (tol 3 sigma), {:.2?}", lines.join("; "), clock.elapsed())
    ));
}

#[test]
fn criterion_08_generator_quotient() {
    let clock = Instant::now();
    let mut rng = random::rng(108, 0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..10 {
        let n = 3 + k % 4;
        let g = random::connected_graph(&mut rng, n, 0.3);
        let a = random::potential(&mut rng, &g, PI);
        let v = random::real_function(&mut rng, n, 0.0, 1.0);
        let f = random::complex_function(&mut rng, n);
        let free = MagneticOperator::free(&g).unwrap();
        let hf = MagneticOperator::assemble(&g, &a, &v).unwrap().apply(&f).unwrap();
        let err = |t: f64| {
            let q = generator_quotient_with(&free, &a, &v, &f, t).unwrap();
            (0..n).map(|p| (q[p] - hf[p]).norm()).fold(0.0, f64::max)
        };
        for t in [1e-2, 1e-3, 1e-4] {
            let r = err(t) / err(t / 2.0);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    let ok = lo >= 1.8 && hi <= 2.2;
    assert!(report(
        8,
        "generator quotient error ratio",
        ok,
        format!("ratios in [{lo:.4}, {hi:.4}] (tol [1.8, 2.2]), {:.2?}", clock.elapsed())
    ));
}

#[test]
fn criterion_09_hodge() {
    let clock = Instant::now();
    let mut rng = random::rng(109, 0);
    let (mut residual, mut recon, mut orth, mut div): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..50 {
        let n = 2 + k % 15;
        let g = random::connected_graph(&mut rng, n, 0.4);
        let omega = random::potential(&mut rng, &g, 2.0);
        let h = hodge(&g, &omega).unwrap();
        residual = residual.max(h.residual);
        recon = recon.max(h.exact.add(&h.harmonic).sub(&omega).norm_sqr(&g).sqrt());
        orth = orth.max(h.exact.inner(&g, &h.harmonic).norm());
        div = div.max(norm_mu(&g, &divergence_form(&g, &h.harmonic).unwrap()).unwrap());
    }
    let tri = WeightedGraph::cycle(3).unwrap();
    let flow = common::cycle_potential(&tri, 1.0);
    let tri_u = hodge(&tri, &flow).unwrap().potential.sup_norm();
    let ok = residual <= 1e-10 && recon <= 1e-10 && orth <= 1e-10 && div <= 1e-8 && tri_u <= 1e-12;
    assert!(report(
        9,
        "Hodge decomposition",
        ok,
        format!(
            "solve residual {residual:.2e}, reconstruction {recon:.2e}, orthogonality {orth:.2e} (tol 1e-10), \
             |div eta| {div:.2e} (tol 1e-8), 3-cycle |u| {tri_u:.2e}, {:.2?}",
            clock.elapsed()
        )
    ));
}

#[test]
fn criterion_10_levy_system() {
    let clock = Instant::now();
    let mut rng = random::rng(110, 0);
    let graphs = [
        random::connected_graph(&mut rng, 6, 0.5),
        build_stable_lattice(16, 0.25, 1.0, Some(1.0)).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    let mut oracle_gap: f64 = 0.0;
    for (gi, g) in graphs.iter().enumerate() {
        for k in 0..5 {
            let phi = random::nonnegative_edge_function(&mut rng, g);
            let m = levy_system_estimate(g, &phi, 1.0, 100_000, 1000 + 10 * gi as u64 + k).unwrap();
            let oracle: f64 = g
                .raw_pairs()
                .iter()
                .map(|&(p, q, b)| (phi.get(g, p, q).re + phi.get(g, q, p).re) * 2.0 * b)
                .sum();
            oracle_gap = oracle_gap.max((oracle - m.exact).abs() / oracle);
            worst = worst.max((m.estimate - oracle).abs() / m.stderr);
        }
    }
    let ok = worst <= 4.0 && oracle_gap <= 1e-12;
    assert!(report(
        10,
        "Levy system formula",
        ok,
        format!("max z {worst:.2} (tol 4), exact vs oracle {oracle_gap:.2e}, {:.2?}", clock.elapsed())
    ));
}
