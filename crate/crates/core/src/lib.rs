//! Fixed-point computation and verification toolkit for bipolar metric spaces.
//!
//! The crate has three legs:
//!
//! * exhaustive certification of polynomial-type contraction inequalities on
//!   finite bipolar metric spaces ([`space`], [`contraction`]),
//! * Picard bisequence iteration with geometric a-priori error bounds, cycle
//!   detection, and fixed-point census ([`picard`]),
//! * a successive-approximation solver for a nonlinear fractional two-point
//!   boundary value problem driven through a Green's-function integral
//!   operator ([`fractional`], [`expr`]).
//!
//! [`corpus`] holds machine-checked reconstructions of the worked examples
//! the other modules are tested against, and [`io`] the file schemas consumed
//! by the `bfp` binary.

pub mod contraction;
pub mod corpus;
pub mod expr;
pub mod fractional;
pub mod io;
pub mod picard;
pub mod runtime;
pub mod space;
pub mod testgen;

pub use contraction::{
    check_side_conditions, implied_continuity, verify_almost_pc, verify_pc, CertificateKind,
    CoefficientFamily, ContractionCertificate, ContractionError, ContractionSpec, MappingSpec,
    SideConditionReport, Variance,
};
pub use expr::{eval, parse, EvalError, Expr, ParseError};
pub use fractional::{
    apply_operator, build_kernel, condition2_audit, lipschitz_audit, solve, FracError,
    FractionalBvp, GreenKernel, GridFunction, SolveReport,
};
pub use picard::{
    a_priori_bound, all_fixed_points, check_picard_continuity_finite,
    check_picard_continuity_interval, check_weakly_picard, compute_m, iterate, uniqueness_check,
    Bisequence, ErrorBoundParams, IterationConfig, IterationOutcome, IterationStatus, PicardError,
};
pub use space::{check_axioms, AxiomReport, FiniteBipolarSpace, SpaceError};

/// Default absolute tolerance on inequality slack; corpus values are small
/// integers, so this only absorbs float noise in derived tables.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Formats a value with 17 significant digits so text output is byte-stable
/// across runs and platforms.
pub fn fmt17(x: f64) -> String {
    // normalize -0.0 so goldens do not depend on the sign of a zero
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}
