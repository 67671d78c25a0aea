//! Problem files: one TOML document holding the graph, both potentials and
//! the run parameters.
//!
//! ```toml
//! [[nodes]]
//! id = "0"
//! mu = 1.0
//! v = 0.0          # optional, default 0
//! f = [1.0, 0.0]   # optional test function value (real or [re, im]), default 1
//!
//! [[nodes]]
//! id = "1"
//! mu = 1.0
//!
//! [[edges]]
//! p = "0"
//! q = "1"
//! b = 1.0
//! a = 1.5707963267948966   # a(p,q); a(q,p) = -a. Optional, default 0
//!
//! [run]
//! times = [0.5]
//! num_paths = 100000
//! seed = 7
//! ```
//!
//! Each edge record describes one unordered pair. Vertex ids may be written
//! as strings or integers; they are stored as strings.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};
use toml::Spanned;

use crate::forms::OneForm;
use crate::graph::WeightedGraph;
use crate::{Complex64, NodeFunction};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSpec {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
    pub run: RunParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    #[serde(deserialize_with = "vertex_id")]
    pub id: String,
    pub mu: f64,
    #[serde(default)]
    pub v: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    #[serde(deserialize_with = "vertex_id")]
    pub p: String,
    #[serde(deserialize_with = "vertex_id")]
    pub q: String,
    pub b: f64,
    #[serde(default)]
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    pub fn value(&self) -> Complex64 {
        match *self {
            Scalar::Real(x) => Complex64::new(x, 0.0),
            Scalar::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunParams {
    pub times: Vec<f64>,
    pub num_paths: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub epsilons: Vec<f64>,
    /// Horizon for `simulate` and the pathwise checks.
    pub horizon: f64,
    /// Start vertex for `simulate`; defaults to the first vertex.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    /// Number of paths written by `simulate`.
    pub num_dump: usize,
    pub tolerances: Tolerances,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            times: vec![0.2, 1.0],
            num_paths: 100_000,
            seed: None,
            epsilons: vec![1.0, 0.1, 0.01],
            horizon: 1.0,
            start: None,
            num_dump: 1,
            tolerances: Tolerances::default(),
        }
    }
}

/// Thresholds used by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative tolerance for exact identities.
    pub identity: f64,
    /// Relative gap allowed between `⟨Hf,g⟩_μ` and `E^{a,v}(f,g)`.
    pub operator: f64,
    /// Spectral drift and semigroup-level tolerance.
    pub spectral: f64,
    /// Least-squares residuals of the Hodge solve.
    pub residual: f64,
    /// `‖∂*η‖` after the Hodge solve.
    pub divergence: f64,
    /// Per-vertex z-score limit for Monte Carlo comparisons.
    pub z_limit: f64,
    /// Fraction of vertices that must fall under `z_limit`.
    pub z_fraction: f64,
    /// Sigma band for the martingale energy identities.
    pub sigma: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-12,
            operator: 1e-11,
            spectral: 1e-10,
            residual: 1e-10,
            divergence: 1e-8,
            z_limit: 4.0,
            z_fraction: 0.95,
            sigma: 3.0,
            ratio_min: 1.8,
            ratio_max: 2.2,
        }
    }
}

fn vertex_id<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Id {
        Int(i64),
        Str(String),
    }
    Ok(match Id::deserialize(d)? {
        Id::Int(i) => i.to_string(),
        Id::Str(s) => s,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    nodes: Vec<Spanned<NodeRecord>>,
    #[serde(default)]
    edges: Vec<Spanned<EdgeRecord>>,
    #[serde(default)]
    run: RunParams,
}

/// A schema violation located by record path and source line.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaViolation {
    pub field: String,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}: {}", self.line, self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{} schema violation(s):\n{}", .0.len(), .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Schema(Vec<SchemaViolation>),
    #[error("i/o error: {0}")]
    Io(String),
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<Self, ProblemError> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| ProblemError::Parse {
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;

        let mut errs = Vec::new();
        let mut push = |field: String, offset: usize, message: String| {
            errs.push(SchemaViolation {
                field,
                line: line_of(text, offset),
                message,
            })
        };

        let mut ids = HashSet::new();
        for (i, n) in raw.nodes.iter().enumerate() {
            let at = n.span().start;
            let n = n.get_ref();
            if !ids.insert(n.id.clone()) {
                push(format!("nodes[{i}].id"), at, format!("duplicate vertex `{}`", n.id));
            }
            if !(n.mu > 0.0 && n.mu.is_finite()) {
                push(format!("nodes[{i}].mu"), at, format!("must be positive, got {}", n.mu));
            }
            if !n.v.is_finite() {
                push(format!("nodes[{i}].v"), at, "must be finite".into());
            }
        }
        if raw.nodes.is_empty() {
            push("nodes".into(), 0, "at least one vertex is required".into());
        }

        let mut pairs = HashSet::new();
        for (i, e) in raw.edges.iter().enumerate() {
            let at = e.span().start;
            let e = e.get_ref();
            for (name, id) in [("p", &e.p), ("q", &e.q)] {
                if !ids.contains(id) {
                    push(format!("edges[{i}].{name}"), at, format!("unknown vertex `{id}`"));
                }
            }
            if e.p == e.q {
                push(format!("edges[{i}]"), at, format!("self-loop at `{}`", e.p));
            }
            let key = if e.p < e.q {
                (e.p.clone(), e.q.clone())
            } else {
                (e.q.clone(), e.p.clone())
            };
            if !pairs.insert(key) {
                push(format!("edges[{i}]"), at, format!("duplicate edge {{{},{}}}", e.p, e.q));
            }
            if !(e.b >= 0.0 && e.b.is_finite()) {
                push(format!("edges[{i}].b"), at, format!("must be nonnegative, got {}", e.b));
            }
            if !e.a.is_finite() {
                push(format!("edges[{i}].a"), at, "must be finite".into());
            }
        }

        let r = &raw.run;
        let run_at = text.find("[run").unwrap_or(0);
        if r.times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            push("run.times".into(), run_at, "times must be positive".into());
        }
        if r.num_paths < 2 {
            push("run.num_paths".into(), run_at, "need at least 2 paths".into());
        }
        if r.epsilons.iter().any(|e| e.is_nan() || *e <= 0.0) {
            push("run.epsilons".into(), run_at, "epsilons must be positive".into());
        }
        if !(r.horizon > 0.0 && r.horizon.is_finite()) {
            push("run.horizon".into(), run_at, "horizon must be positive".into());
        }
        if let Some(s) = &r.start {
            if !ids.contains(s) {
                push("run.start".into(), run_at, format!("unknown vertex `{s}`"));
            }
        }

        if !errs.is_empty() {
            return Err(ProblemError::Schema(errs));
        }
        Ok(Self {
            nodes: raw.nodes.into_iter().map(Spanned::into_inner).collect(),
            edges: raw.edges.into_iter().map(Spanned::into_inner).collect(),
            run: raw.run,
        })
    }

    pub fn read(path: &std::path::Path) -> Result<Self, ProblemError> {
        let text = std::fs::read_to_string(path).map_err(|e| ProblemError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Serializes back to the TOML schema accepted by [`parse`](Self::parse).
    pub fn emit(&self) -> String {
        toml::to_string(self).expect("problem specs serialize")
    }

    pub fn graph(&self) -> crate::Result<WeightedGraph> {
        let ids: Vec<String> = self.nodes.iter().map(|n| n.id.clone()).collect();
        let mu = self.nodes.iter().map(|n| n.mu).collect();
        let index = |id: &str| {
            ids.iter()
                .position(|x| x == id)
                .ok_or_else(|| crate::Error::UnknownVertex(id.to_string()))
        };
        let pairs = self
            .edges
            .iter()
            .map(|e| Ok((index(&e.p)?, index(&e.q)?, e.b)))
            .collect::<crate::Result<Vec<_>>>()?;
        WeightedGraph::new(ids.clone(), mu, pairs)
    }

    /// Magnetic potential with `a(p, q)` as written on each edge record.
    pub fn potential(&self, g: &WeightedGraph) -> crate::Result<OneForm> {
        let mut a = OneForm::zeros(g);
        for e in &self.edges {
            let (p, q) = (g.index_of(&e.p)?, g.index_of(&e.q)?);
            if g.slot(p, q).is_some() {
                a.set(g, p, q, Complex64::new(e.a, 0.0))?;
            }
        }
        Ok(a)
    }

    pub fn electric(&self) -> NodeFunction {
        NodeFunction::new(self.nodes.iter().map(|n| Complex64::new(n.v, 0.0)).collect())
    }

    /// The per-vertex test function `f`, 1 where unspecified.
    pub fn test_function(&self) -> NodeFunction {
        NodeFunction::new(
            self.nodes
                .iter()
                .map(|n| n.f.map_or(Complex64::new(1.0, 0.0), |s| s.value()))
                .collect(),
        )
    }

    /// Builds a spec from in-memory data, one edge record per unordered edge.
    pub fn from_parts(g: &WeightedGraph, a: &OneForm, v: &NodeFunction, f: Option<&NodeFunction>, run: RunParams) -> Self {
        let nodes = (0..g.len())
            .map(|p| NodeRecord {
                id: g.id(p).to_string(),
                mu: g.mu()[p],
                v: v[p].re,
                f: f.map(|f| {
                    if f[p].im == 0.0 {
                        Scalar::Real(f[p].re)
                    } else {
                        Scalar::Complex([f[p].re, f[p].im])
                    }
                }),
            })
            .collect();
        let edges = g
            .edges()
            .iter()
            .zip(a.values())
            .map(|(e, x)| EdgeRecord {
                p: g.id(e.lo).to_string(),
                q: g.id(e.hi).to_string(),
                b: e.weight,
                a: x.re,
            })
            .collect();
        Self { nodes, edges, run }
    }
}
