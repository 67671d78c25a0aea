//! Independent dense oracles built straight from the edge list, used to
//! cross-check the library's sparse and spectral code paths.
#![allow(dead_code)]

use magjump::{Complex64, NodeFunction, OneForm, WeightedGraph};

pub type Dense = Vec<Vec<Complex64>>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `H` as a dense row-major matrix: off-diagonal `-e^{ia(p,q)} 2b/μ(p)`,
/// diagonal `Σ_q 2b/μ(p) + v(p)`.
pub fn dense_hamiltonian(g: &WeightedGraph, a: &OneForm, v: &[f64]) -> Dense {
    let n = g.len();
    let mu = g.mu();
    let mut h = vec![vec![c(0.0); n]; n];
    for &(p, q, b) in g.raw_pairs() {
        if p == q || b <= 0.0 {
            continue;
        }
        for (x, y) in [(p, q), (q, p)] {
            let rate = 2.0 * b / mu[x];
            let phase = Complex64::from_polar(1.0, a.get(g, x, y).re);
            h[x][x] += c(rate);
            h[x][y] -= phase * rate;
        }
    }
    for p in 0..n {
        h[p][p] += c(v[p]);
    }
    h
}

/// `E^{a,v}(f,h)` summed over both orientations of every listed pair.
pub fn energy(g: &WeightedGraph, a: &OneForm, v: &[f64], f: &NodeFunction, h: &NodeFunction) -> Complex64 {
    let mut e = c(0.0);
    for &(p, q, b) in g.raw_pairs() {
        for (x, y) in [(p, q), (q, p)] {
            let phase = Complex64::from_polar(1.0, a.get(g, x, y).re);
            e += (f[x] - phase * f[y]) * (h[x] - phase * h[y]).conj() * b;
        }
    }
    for p in 0..g.len() {
        e += f[p] * h[p].conj() * (v[p] * g.mu()[p]);
    }
    e
}

pub fn matvec(m: &Dense, f: &NodeFunction) -> NodeFunction {
    NodeFunction::new(m.iter().map(|row| row.iter().zip(f.values()).map(|(x, y)| x * y).sum()).collect())
}

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// `e^{m}` by scaling and squaring of a truncated Taylor series.
pub fn expm(m: &Dense) -> Dense {
    let n = m.len();
    let norm = m
        .iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = (norm.max(1e-300).log2().ceil().max(0.0) as i32) + 4;
    let s = 0.5f64.powi(squarings);
    let scaled: Dense = m.iter().map(|r| r.iter().map(|z| z * s).collect()).collect();
    let mut result: Dense = (0..n)
        .map(|i| (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    let mut term = result.clone();
    for k in 1..=20 {
        term = matmul(&term, &scaled);
        for r in term.iter_mut() {
            for z in r.iter_mut() {
                *z /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// `e^{-tH} f` from the dense oracle.
pub fn semigroup(g: &WeightedGraph, a: &OneForm, v: &[f64], t: f64, f: &NodeFunction) -> NodeFunction {
    let h = dense_hamiltonian(g, a, v);
    let m: Dense = h.iter().map(|r| r.iter().map(|z| -z * t).collect()).collect();
    matvec(&expm(&m), f)
}

/// Closed-form spectrum of the unit `N`-cycle with `a(p, p+1) = φ`.
pub fn cycle_flux_spectrum(n: usize, phi: f64) -> Vec<f64> {
    let mut s: Vec<f64> = (0..n)
        .map(|k| 4.0 - 4.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64 + phi).cos())
        .collect();
    s.sort_by(f64::total_cmp);
    s
}

pub fn cycle_potential(g: &WeightedGraph, phi: f64) -> OneForm {
    let n = g.len();
    let mut a = OneForm::zeros(g);
    for p in 0..n {
        a.set(g, p, (p + 1) % n, c(phi)).unwrap();
    }
    a
}

/// Prints the criterion line and returns whether it passed.
pub fn report(id: u32, title: &str, passed: bool, detail: impl std::fmt::Display) -> bool {
    println!(
        "criterion {id:>2} [{}] {title}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    passed
}
