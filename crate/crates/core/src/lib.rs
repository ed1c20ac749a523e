//! Resonances of three-dimensional Schrödinger operators with finitely many
//! point interactions.
//!
//! The resonances of the operator with strength tuple `α` and centers `Y` are
//! the zeros of `det Γ_{α,Y}(z)` in the closed lower half-plane. This crate
//! evaluates that determinant (directly and as an exponential polynomial),
//! locates its zeros with multiplicities, computes resonance-free strips, and
//! searches for resonances of minimal decay at a prescribed frequency.

pub mod bounds;
pub mod error;
pub mod exppoly;
pub mod gamma;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod optimize;
pub mod rootfinder;
pub mod tetra;

pub use bounds::{check_envelope, EnvelopeReport};
pub use error::{Error, Result};
pub use exppoly::{expand, uniform_envelope, ExponentialPolynomial, StripBounds};
pub use gamma::{
    bordered_minor, build_gamma, det_gamma, dz_log_det, first_minor, first_minors_at, green_kernel,
    regularized_det, BetaChart, GammaEvaluator, GammaMatrix,
};
pub use geometry::{
    chordal_distance, diameter, reduce, tuple_distance, CenterConfiguration, ExtendedComplex, FeasibleClass, Point3,
    StrengthTuple,
};
pub use io::Problem;
pub use num_complex::Complex64;
pub use optimize::{
    certify, energy_width, frontier_csv, frontier_table, perturb_first_order, persistence_check, refine_extremal, refine_on,
    sample_frontier, width_frontier, Bins, CertMode, Constraint, FrontierBin, FrontierRow, FrontierTable, OptimalityCertificate, ParetoPoint,
    Refinement, RowStatus, SamplingOptions,
};
pub use rootfinder::{
    find_zeros, resonances, roots_to_json, winding_count, AnalyticTarget, DetTarget, Rect, RootRecord, SearchWindow,
    ZeroSet,
};
pub use tetra::{
    det_identity, det_identity_two, nmin_classify, optimal_alpha_oracle, optimum_multiplicity, rmin_oracle,
    tetra_vertices, Branch, OptimalAlpha,
};
