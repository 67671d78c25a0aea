//! Continuous-time Markov chain paths and the additive functionals evaluated
//! along them.
//!
//! The chain holds at `p` for an `Exp(rate(p))` time, `rate(p) = Σ_q n(p,q)`,
//! then jumps to `q` with probability `n(p,q) / rate(p)`. Each path draws from
//! its own ChaCha stream selected by `(seed, stream_id)`, so ensembles are
//! reproducible independently of how they are scheduled across threads.
//!
//! Line integrals use the increment `a(Y_{s-}, Y_s)` (from, to) by default.
//! Under this convention the Feynman–Kac–Itô generator is exactly `-H^{a,v}`
//! for the phase `e^{i a(p,q)}` used in [`crate::magnetic`].

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, param, Error, Result};
use crate::forms::{divergence_form, EdgeFunction, OneForm};
use crate::graph::{apply_generator, WeightedGraph};
use crate::stats::{mean_stderr, par_collect, z_score};
use crate::NodeFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub target: usize,
}

/// A realized trajectory on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpPath {
    start: usize,
    events: Vec<JumpEvent>,
    horizon: f64,
    stream_id: u64,
}

impl JumpPath {
    /// Checks that event times increase strictly inside `(0, horizon]` and
    /// that no event jumps onto the current state.
    pub fn new(start: usize, events: Vec<JumpEvent>, horizon: f64, stream_id: u64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(param("horizon", format!("must be positive, got {horizon}")));
        }
        let mut state = start;
        let mut last = 0.0;
        for (i, e) in events.iter().enumerate() {
            if !(e.time > last && e.time <= horizon) {
                return Err(param("events", format!("event {i} at time {} out of order", e.time)));
            }
            if e.target == state {
                return Err(param("events", format!("event {i} is a self-jump at {state}")));
            }
            state = e.target;
            last = e.time;
        }
        Ok(Self {
            start,
            events,
            horizon,
            stream_id,
        })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn events(&self) -> &[JumpEvent] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn num_jumps(&self) -> usize {
        self.events.len()
    }

    /// `Y_horizon`.
    pub fn end_state(&self) -> usize {
        self.events.last().map_or(self.start, |e| e.target)
    }

    /// `Y_t` (right-continuous: an event at `t` has already happened).
    pub fn state_at(&self, t: f64) -> usize {
        let k = self.events.partition_point(|e| e.time <= t);
        if k == 0 {
            self.start
        } else {
            self.events[k - 1].target
        }
    }

    /// `Y_{t-}`.
    pub fn state_before(&self, t: f64) -> usize {
        let k = self.events.partition_point(|e| e.time < t);
        if k == 0 {
            self.start
        } else {
            self.events[k - 1].target
        }
    }

    /// Jumps as `(time, from, to)`.
    pub fn transitions(&self) -> impl Iterator<Item = (f64, usize, usize)> + '_ {
        let mut state = self.start;
        self.events.iter().map(move |e| {
            let from = state;
            state = e.target;
            (e.time, from, e.target)
        })
    }

    /// Holding intervals as `(state, from_time, to_time)` covering `[0, horizon]`.
    pub fn segments(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        let states = std::iter::once(self.start).chain(self.events.iter().map(|e| e.target));
        let begins = std::iter::once(0.0).chain(self.events.iter().map(|e| e.time));
        let ends = self.events.iter().map(|e| e.time).chain(std::iter::once(self.horizon));
        states.zip(begins).zip(ends).map(|((p, a), b)| (p, a, b))
    }

    /// The path restricted to `[0, t]`.
    pub fn restrict(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t <= self.horizon) {
            return Err(param("t", format!("must lie in (0, {}], got {t}", self.horizon)));
        }
        Ok(Self {
            start: self.start,
            events: self.events.iter().copied().filter(|e| e.time <= t).collect(),
            horizon: t,
            stream_id: self.stream_id,
        })
    }

    /// Splits into `[0, s]` and the time-shifted remainder started at `Y_s`.
    pub fn split_at(&self, s: f64) -> Result<(Self, Self)> {
        if !(s > 0.0 && s < self.horizon) {
            return Err(param("s", format!("must lie in (0, {}), got {s}", self.horizon)));
        }
        let head = self.restrict(s)?;
        let tail = Self {
            start: self.state_at(s),
            events: self
                .events
                .iter()
                .filter(|e| e.time > s)
                .map(|e| JumpEvent {
                    time: e.time - s,
                    target: e.target,
                })
                .collect(),
            horizon: self.horizon - s,
            stream_id: self.stream_id,
        };
        Ok((head, tail))
    }
}

/// Time reversal `r_t`: the reversed path starts at `Y_t`, and every jump
/// `p → q` at time `s < t` becomes a jump `q → p` at time `t - s`. A jump at
/// exactly `t` (a null event) is dropped, so the start is `Y_{t-}` then.
pub fn reverse(path: &JumpPath, t: f64) -> Result<JumpPath> {
    if !(t > 0.0 && t <= path.horizon) {
        return Err(param("t", format!("must lie in (0, {}], got {t}", path.horizon)));
    }
    let trans: Vec<(f64, usize, usize)> = path.transitions().filter(|&(s, _, _)| s < t).collect();
    let start = trans.last().map_or(path.start, |&(_, _, to)| to);
    let events = trans
        .iter()
        .rev()
        .map(|&(s, from, _)| JumpEvent {
            time: t - s,
            target: from,
        })
        .collect();
    Ok(JumpPath {
        start,
        events,
        horizon: t,
        stream_id: path.stream_id,
    })
}

/// The RNG stream of one path.
pub fn path_rng(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Precomputed jump tables for one graph.
#[derive(Debug, Clone)]
pub struct Simulator<'g> {
    graph: &'g WeightedGraph,
    rates: Vec<f64>,
    cumulative: Vec<f64>,
    start_cdf: Vec<f64>,
}

impl<'g> Simulator<'g> {
    pub fn new(graph: &'g WeightedGraph) -> Self {
        let mut cumulative = vec![0.0; graph.num_slots()];
        let rates = (0..graph.len())
            .map(|p| {
                let mut acc = 0.0;
                for s in graph.slot_range(p) {
                    acc += 2.0 * graph.slot_neighbor(s).weight / graph.mu()[p];
                    cumulative[s] = acc;
                }
                acc
            })
            .collect();
        let total = graph.total_measure();
        let mut acc = 0.0;
        let start_cdf = graph
            .mu()
            .iter()
            .map(|m| {
                acc += m / total;
                acc
            })
            .collect();
        Self {
            graph,
            rates,
            cumulative,
            start_cdf,
        }
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn simulate(&self, x0: usize, horizon: f64, seed: u64, stream_id: u64) -> Result<JumpPath> {
        if x0 >= self.graph.len() {
            return Err(Error::VertexOutOfRange(x0));
        }
        check_horizon(horizon)?;
        let mut rng = path_rng(seed, stream_id);
        Ok(self.run(x0, horizon, stream_id, &mut rng))
    }

    /// Path whose start is drawn from the normalized vertex measure.
    pub fn simulate_stationary(&self, horizon: f64, seed: u64, stream_id: u64) -> Result<JumpPath> {
        check_horizon(horizon)?;
        let mut rng = path_rng(seed, stream_id);
        let u: f64 = rng.random();
        let x0 = self
            .start_cdf
            .partition_point(|&c| c <= u)
            .min(self.graph.len() - 1);
        Ok(self.run(x0, horizon, stream_id, &mut rng))
    }

    fn run(&self, x0: usize, horizon: f64, stream_id: u64, rng: &mut ChaCha8Rng) -> JumpPath {
        let mut events = Vec::new();
        let mut state = x0;
        let mut t = 0.0;
        loop {
            let rate = self.rates[state];
            if rate <= 0.0 {
                break;
            }
            let u: f64 = rng.random();
            t += -(1.0 - u).ln() / rate;
            if t > horizon {
                break;
            }
            let slots = self.graph.slot_range(state);
            let target = rng.random::<f64>() * rate;
            let cum = &self.cumulative[slots.clone()];
            let k = cum.partition_point(|&c| c <= target).min(cum.len() - 1);
            state = self.graph.slot_neighbor(slots.start + k).vertex;
            events.push(JumpEvent { time: t, target: state });
        }
        JumpPath {
            start: x0,
            events,
            horizon,
            stream_id,
        }
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(param("T", format!("must be positive, got {horizon}")));
    }
    Ok(())
}

pub fn simulate(g: &WeightedGraph, x0: usize, horizon: f64, seed: u64, stream_id: u64) -> Result<JumpPath> {
    Simulator::new(g).simulate(x0, horizon, seed, stream_id)
}

/// Which end of a jump indexes the line-integral increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// `a(Y_{s-}, Y_s)`.
    #[default]
    FromTo,
    /// `a(Y_s, Y_{s-})`.
    ToFrom,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::FromTo => 1.0,
            Orientation::ToFrom => -1.0,
        }
    }
}

/// A path functional together with its jumps, for auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFunctional {
    pub value: f64,
    pub jumps: Vec<(f64, f64)>,
}

/// Line-integral machinery for one real potential `a`.
#[derive(Debug, Clone)]
pub struct LineIntegrator<'g> {
    graph: &'g WeightedGraph,
    slot_values: Vec<f64>,
    divergence: Vec<f64>,
}

impl<'g> LineIntegrator<'g> {
    pub fn new(graph: &'g WeightedGraph, a: &OneForm) -> Result<Self> {
        Self::with_orientation(graph, a, Orientation::FromTo)
    }

    /// Under [`Orientation::ToFrom`] every quantity is that of `-a`.
    pub fn with_orientation(graph: &'g WeightedGraph, a: &OneForm, orientation: Orientation) -> Result<Self> {
        check_len(graph.edges().len(), a.len())?;
        let sign = orientation.sign();
        let slot_values = a
            .real_slot_values(graph, "magnetic potential")?
            .into_iter()
            .map(|x| sign * x)
            .collect();
        let divergence = divergence_form(graph, a)?.values().iter().map(|z| sign * z.re).collect();
        Ok(Self {
            graph,
            slot_values,
            divergence,
        })
    }

    /// Increment for a jump `from → to`.
    pub fn increment(&self, from: usize, to: usize) -> f64 {
        self.graph.slot(from, to).map_or(0.0, |s| self.slot_values[s])
    }

    /// `∂*a` per vertex.
    pub fn divergence(&self) -> &[f64] {
        &self.divergence
    }

    /// `S_T = Σ_{0<s≤T} a(Y_{s-}, Y_s)`.
    pub fn stratonovich(&self, path: &JumpPath) -> f64 {
        path.transitions().map(|(_, p, q)| self.increment(p, q)).sum()
    }

    pub fn stratonovich_trace(&self, path: &JumpPath) -> PathFunctional {
        let jumps: Vec<(f64, f64)> = path
            .transitions()
            .map(|(t, p, q)| (t, self.increment(p, q)))
            .collect();
        PathFunctional {
            value: jumps.iter().map(|j| j.1).sum(),
            jumps,
        }
    }

    /// `S_t` at each requested time.
    pub fn stratonovich_at(&self, path: &JumpPath, times: &[f64]) -> Vec<f64> {
        let mut cum = Vec::with_capacity(path.num_jumps() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for (_, p, q) in path.transitions() {
            acc += self.increment(p, q);
            cum.push(acc);
        }
        times
            .iter()
            .map(|&t| cum[path.events.partition_point(|e| e.time <= t)])
            .collect()
    }

    /// `Λ_T = ∫_0^T (∂*a)(Y_s) ds`.
    pub fn divergence_part(&self, path: &JumpPath) -> f64 {
        occupation_integral(path, &self.divergence)
    }

    /// `M_T = S_T - Λ_T`, the compensated jump sum.
    pub fn martingale(&self, path: &JumpPath) -> f64 {
        self.stratonovich(path) - self.divergence_part(path)
    }

    /// Jumps with `|a| > ε` summed directly plus the compensator
    /// `∫ Σ_{q: |a(Y_s,q)| ≤ ε} a(Y_s, q) n(Y_s, q) ds` of the small ones.
    pub fn compensated(&self, path: &JumpPath, eps: f64) -> Result<f64> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(param("epsilon", format!("must be positive, got {eps}")));
        }
        let g = self.graph;
        let small: Vec<f64> = (0..g.len())
            .map(|p| {
                g.slot_range(p)
                    .filter(|&s| self.slot_values[s].abs() <= eps)
                    .map(|s| self.slot_values[s] * 2.0 * g.slot_neighbor(s).weight / g.mu()[p])
                    .sum()
            })
            .collect();
        let big: f64 = path
            .transitions()
            .map(|(_, p, q)| self.increment(p, q))
            .filter(|x| x.abs() > eps)
            .sum();
        Ok(big + occupation_integral(path, &small))
    }
}

fn occupation_integral(path: &JumpPath, values: &[f64]) -> f64 {
    path.segments().map(|(p, a, b)| values[p] * (b - a)).sum()
}

pub fn stratonovich_integral(g: &WeightedGraph, path: &JumpPath, a: &OneForm) -> Result<f64> {
    Ok(LineIntegrator::new(g, a)?.stratonovich(path))
}

pub fn martingale_part(g: &WeightedGraph, path: &JumpPath, a: &OneForm) -> Result<f64> {
    Ok(LineIntegrator::new(g, a)?.martingale(path))
}

pub fn divergence_part(g: &WeightedGraph, path: &JumpPath, a: &OneForm) -> Result<f64> {
    Ok(LineIntegrator::new(g, a)?.divergence_part(path))
}

pub fn compensated_integral(g: &WeightedGraph, path: &JumpPath, a: &OneForm, eps: f64) -> Result<f64> {
    LineIntegrator::new(g, a)?.compensated(path, eps)
}

/// `V_T = ∫_0^T v(Y_s) ds` for a real potential.
pub fn potential_integral(path: &JumpPath, v: &NodeFunction) -> Result<f64> {
    let v = v.to_real("electric potential")?;
    if let Some(p) = path_vertex_bound(path) {
        if p >= v.len() {
            return Err(Error::VertexOutOfRange(p));
        }
    }
    Ok(occupation_integral(path, &v))
}

fn path_vertex_bound(path: &JumpPath) -> Option<usize> {
    path.events.iter().map(|e| e.target).chain([path.start]).max()
}

/// Fukushima decomposition `f(Y_T) - f(Y_0) = M_T + N_T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fukushima {
    /// `A_T = f(Y_T) - f(Y_0)`.
    pub additive: Complex64,
    /// `M_T = A_T - N_T`.
    pub martingale: Complex64,
    /// `N_T = ∫_0^T (Lf)(Y_s) ds`.
    pub drift: Complex64,
}

pub fn fukushima(g: &WeightedGraph, path: &JumpPath, f: &NodeFunction) -> Result<Fukushima> {
    let lf = apply_generator(g, f)?;
    Ok(fukushima_with(path, f, &lf))
}

fn fukushima_with(path: &JumpPath, f: &NodeFunction, lf: &NodeFunction) -> Fukushima {
    let additive = f[path.end_state()] - f[path.start()];
    let drift: Complex64 = path.segments().map(|(p, a, b)| lf[p] * (b - a)).sum();
    Fukushima {
        additive,
        martingale: additive - drift,
        drift,
    }
}

/// Largest deviation between the jump of `M^f` at an event and
/// `f(Y_s) - f(Y_{s-}) = -(df)(Y_{s-}, Y_s)`.
pub fn jump_consistency_check(g: &WeightedGraph, path: &JumpPath, f: &NodeFunction) -> Result<f64> {
    let lf = apply_generator(g, f)?;
    let df = crate::forms::derive(g, f)?;
    let mut worst: f64 = 0.0;
    // Drift accumulated up to the current event; it is continuous in time.
    let mut drift = Complex64::new(0.0, 0.0);
    let mut last = 0.0;
    let mut state = path.start();
    for e in path.events() {
        drift += lf[state] * (e.time - last);
        let before = f[state] - f[path.start()] - drift;
        let after = f[e.target] - f[path.start()] - drift;
        let expected = -df.get(g, state, e.target);
        worst = worst.max((after - before - expected).norm());
        state = e.target;
        last = e.time;
    }
    Ok(worst)
}

/// Monte Carlo estimate compared with an exact value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McCheck {
    pub estimate: f64,
    pub stderr: f64,
    pub exact: f64,
    pub z: f64,
}

impl McCheck {
    fn from_samples(samples: &[f64], exact: f64) -> Self {
        let (estimate, stderr) = mean_stderr(samples);
        Self {
            estimate,
            stderr,
            exact,
            z: z_score(estimate, exact, stderr),
        }
    }
}

fn check_paths(num_paths: usize) -> Result<()> {
    if num_paths < 2 {
        return Err(param("num_paths", format!("need at least 2, got {num_paths}")));
    }
    Ok(())
}

/// Lévy-system identity with stationary start:
/// `E_μ[Σ_{s≤T} φ(Y_{s-}, Y_s)] = T Σ_p μ(p) Σ_q φ(p,q) n(p,q)`.
pub fn levy_system_estimate(
    g: &WeightedGraph,
    phi: &EdgeFunction,
    horizon: f64,
    num_paths: usize,
    seed: u64,
) -> Result<McCheck> {
    check_len(g.num_slots(), phi.len())?;
    check_paths(num_paths)?;
    if let Some(z) = phi.values().iter().find(|z| z.im != 0.0 || z.re < 0.0) {
        return Err(param("phi", format!("must be real and nonnegative, found {z}")));
    }
    let exact = horizon
        * (0..g.num_slots())
            .map(|s| phi.at_slot(s).re * 2.0 * g.slot_neighbor(s).weight)
            .sum::<f64>();
    let sim = Simulator::new(g);
    let mass = g.total_measure();
    let samples = par_collect(num_paths, |i| -> Result<f64> {
        let path = sim.simulate_stationary(horizon, seed, i as u64)?;
        Ok(mass * path.transitions().map(|(_, p, q)| phi.get(g, p, q).re).sum::<f64>())
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(McCheck::from_samples(&samples, exact))
}

/// `(1/2T) E_μ[M_T²]` for `M = Θ(a)` against `‖a‖²`.
pub fn line_martingale_energy(
    g: &WeightedGraph,
    a: &OneForm,
    horizon: f64,
    num_paths: usize,
    seed: u64,
) -> Result<McCheck> {
    check_paths(num_paths)?;
    let integ = LineIntegrator::new(g, a)?;
    let sim = Simulator::new(g);
    let mass = g.total_measure();
    let samples = par_collect(num_paths, |i| -> Result<f64> {
        let path = sim.simulate_stationary(horizon, seed, i as u64)?;
        Ok(mass * integ.martingale(&path).powi(2) / (2.0 * horizon))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(McCheck::from_samples(&samples, a.norm_sqr(g)))
}

/// `(1/2T) E_μ[|M^f_T|²]` against `E(f)`.
pub fn fukushima_martingale_energy(
    g: &WeightedGraph,
    f: &NodeFunction,
    horizon: f64,
    num_paths: usize,
    seed: u64,
) -> Result<McCheck> {
    check_paths(num_paths)?;
    let lf = apply_generator(g, f)?;
    let sim = Simulator::new(g);
    let mass = g.total_measure();
    let samples = par_collect(num_paths, |i| -> Result<f64> {
        let path = sim.simulate_stationary(horizon, seed, i as u64)?;
        Ok(mass * fukushima_with(&path, f, &lf).martingale.norm_sqr() / (2.0 * horizon))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let exact = crate::graph::dirichlet_energy(g, f, f)?.re;
    Ok(McCheck::from_samples(&samples, exact))
}

/// `E_x[M^f_T]` over `x`-started paths, compared with 0.
pub fn fukushima_martingale_mean(
    g: &WeightedGraph,
    f: &NodeFunction,
    x0: usize,
    horizon: f64,
    num_paths: usize,
    seed: u64,
) -> Result<McCheck> {
    check_paths(num_paths)?;
    let lf = apply_generator(g, f)?;
    let sim = Simulator::new(g);
    let samples = par_collect(num_paths, |i| -> Result<f64> {
        let path = sim.simulate(x0, horizon, seed, i as u64)?;
        Ok(fukushima_with(&path, f, &lf).martingale.re)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(McCheck::from_samples(&samples, 0.0))
}
