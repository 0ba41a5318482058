//! Constructive function approximation through space-filling
//! Kolmogorov-Arnold encodings.
//!
//! The crate decomposes a d-variate function into a fixed interior encoding
//! and a univariate outer function, then compiles the pair into an explicit
//! deep ReLU network with pinned architecture, weight bounds, and a
//! certified L^p approximation error. No training is involved: every weight
//! is written down in closed form.
//!
//! Module map:
//! - [`digits`]: exact B-adic digit expansions on the unit interval.
//! - [`encodings`]: Morton digit interleave, the Cantor encoding, inverses.
//! - [`outer`]: outer functions g = f ∘ Φ^{-1}, truncated approximation,
//!   breakpoints, piecewise-linear interpolant.
//! - [`relunet`]: network data model, evaluator, constructive builders,
//!   JSON serialization.
//! - [`measure`]: bad-set geometry, midpoint-grid L^p errors, rate fits,
//!   CSV reports.
//! - [`registry`]: named benchmark functions with documented metadata.

pub mod digits;
pub mod encodings;
pub mod measure;
pub mod outer;
pub mod registry;
pub mod relunet;

pub use digits::{digits_from_rational, digits_from_real, real_from_digits, DigitSequence, GridPoint};
pub use encodings::{
    cantor_holder_bound, phi, phi_combine, phi_inverse, phi_k, psi, psi_deinterleave,
    psi_interleave, CantorCode, MortonCode,
};
pub use measure::{bad_set_intervals, lp_error, mismatch_measure, rate_fit, ErrorReport};
pub use outer::{
    breakpoints, build_interpolant, ka_approx_eval, lipschitz_audit_pwc, morton_outer_eval,
    outer_g_eval, HolderFunction, PiecewiseConstantFunction, PiecewiseLinearG,
};
pub use relunet::{
    assemble_full, build_bit_extractor, build_outer_net, load_network, s1_reference,
    save_network, soft_threshold, st_recursion_reference, Architecture, BitExtractorPlan,
    NetworkMeta, ReluNetwork,
};
