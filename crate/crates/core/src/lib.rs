//! Magnetic Schrödinger operators on finite weighted graphs and truncated
//! jump kernels, together with the continuous-time Markov chain that
//! represents their heat semigroups stochastically.
//!
//! The crate is organized bottom-up:
//!
//! * [`graph`]: weighted graphs `(V, b, μ)`, the Dirichlet energy, the jump
//!   kernel `n = 2b/μ` and the generator `L`.
//! * [`forms`]: discrete 1-forms, the derivation `d`, divergence `∂*` and the
//!   Hodge splitting `ω = du + η`.
//! * [`magnetic`]: the magnetic energy `E^{a,v}`, the operator `H^{a,v}`, its
//!   exact semigroup and the diamagnetic inequalities.
//! * [`path`]: simulation of the jump process and pathwise functionals (line
//!   integrals, time reversal, Fukushima decomposition, Lévy system).
//! * [`fki`]: the Feynman–Kac–Itô Monte Carlo semigroup and its comparison
//!   with `e^{-tH}`.
//! * [`problem`]: the problem file format consumed by the command-line tool.
//! * [`verify`]: the invariant suite run by `magjump verify`.
//!
//! ```
//! use magjump::{MagneticOperator, NodeFunction, OneForm, WeightedGraph};
//! use magjump::Complex64;
//!
//! let g = WeightedGraph::cycle(4).unwrap();
//! let mut a = OneForm::zeros(&g);
//! for p in 0..4 {
//!     a.set(&g, p, (p + 1) % 4, Complex64::new(std::f64::consts::FRAC_PI_2, 0.0)).unwrap();
//! }
//! let op = MagneticOperator::assemble(&g, &a, &NodeFunction::zeros(4)).unwrap();
//! let spec = op.spectrum();
//! assert!((spec[0] - 0.0).abs() < 1e-10 && (spec[3] - 8.0).abs() < 1e-10);
//! ```

pub mod error;
pub mod fki;
pub mod forms;
pub mod graph;
pub mod magnetic;
pub mod path;
pub mod problem;
pub mod random;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use fki::{compare_exact, estimate, estimate_vector, SemigroupEstimate};
pub use forms::{EdgeFunction, HodgeDecomposition, OneForm};
pub use graph::{NodeFunction, Violation, WeightedGraph};
pub use magnetic::MagneticOperator;
pub use path::{JumpEvent, JumpPath, LineIntegrator, Orientation, Simulator};
pub use problem::ProblemSpec;

pub use num_complex::Complex64;
