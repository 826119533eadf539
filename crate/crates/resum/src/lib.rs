//! Generalized moment summation for divergent power series.
//!
//! The crate turns a formal Taylor jet with controlled coefficient growth
//! into function values through a three-step pipeline: divide out a moment
//! sequence built from a slowly varying weight (singular transform), evaluate
//! the resulting entire function, and integrate it against the weight's
//! moment kernel (regular transform). The classical factorial weight
//! reproduces Borel summation; iterated-logarithm weights push the same
//! machinery into quasianalytic-boundary territory.
//!
//! Module map:
//! - [`weights`]: weight construction (iterated-log, gamma-family, power,
//!   derived), closed-form logarithmic derivatives, duality, regularity checks.
//! - [`saddle_geometry`]: saddle solves for the kernel/series asymptotics,
//!   Legendre growth profiles, boundary contours and height profiles.
//! - [`special_functions`]: the moment kernel K (inverse Mellin) and the
//!   weighted entire series E and friends, with series / line-integral /
//!   saddle-asymptotic evaluation routes.
//! - [`transforms`]: singular/regular transforms, moment summation, contour
//!   variants.
//! - [`jets_and_classes`]: jets, Chebyshev expansions, coefficient-decay and
//!   membership diagnostics, growth-class scores, lacunary constructions.
//! - [`experiments`]: named check suites shared by the test harness and the
//!   CLI.

pub mod error;
pub mod gammafn;
pub mod interp;
pub mod logspace;
pub mod quadrature;

pub mod weights;

pub mod saddle_geometry;

pub mod special_functions;

pub mod transforms;

pub mod jets_and_classes;

pub mod report;

pub mod experiments;

pub use error::{Error, Result};
pub use logspace::LogComplex;
pub use quadrature::QuadratureSpec;
