//! Information geometry of exponential families of Markov kernels on a
//! finite strongly connected directed graph.
//!
//! The building blocks:
//!
//! - [`graph`]: states, edges, kernels, stationary distributions, edge
//!   measures.
//! - [`function_space`]: edge functions and the orthogonal split into
//!   shift-invariant and potential-difference parts.
//! - [`pf`]: Perron-Frobenius normalization of positive edge functions
//!   into kernels.
//! - [`exp_family`]: parametric families log w = C + theta . F up to gauge.
//! - [`dual_geometry`]: Fisher metrics, expectation coordinates, the
//!   Legendre transform, and connection coefficients.
//! - [`geodesy`]: e/m-geodesics, the canonical divergence and its KL-rate
//!   form, finite-horizon joint KL, and maximum likelihood by moment
//!   matching.
//! - [`io`]: JSON documents and trajectory files.
//! - [`verify`]: the seeded randomized invariant suite behind
//!   `markov-infogeo verify`.

pub mod dual_geometry;
pub mod error;
pub mod exp_family;
pub mod function_space;
pub mod geodesy;
pub mod graph;
pub mod io;
pub(crate) mod numdiff;
pub mod pf;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use exp_family::{ExpectationParam, ExponentialFamily, FamilyPoint, NaturalParam};
pub use function_space::{subspace_dimensions, Decomposition, EdgeFunction, StatePotential};
pub use graph::{
    is_strongly_connected, Distribution, EdgeMeasure, KernelGraph, MarkovKernel,
};
pub use pf::{delta_map, gamma_normalize, quotient_equal, NormalizationResult};
