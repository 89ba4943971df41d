//! Partial positivity of line bundles on discretized flat complex tori.
//!
//! The crate samples Hermitian metrics `h = e^{−φ} h₀` on line bundles over
//! `C^n / Λ`, computes their Chern curvature spectrally, and implements:
//!
//! * pointwise and uniform q-positivity checks, and the metric change that
//!   turns a q-positive curvature into a uniformly q-positive one
//!   ([`q_positivity`]);
//! * the degree pairing against constant (hence Gauduchon) metrics and its
//!   exterior-algebra cross-check ([`curvature`]);
//! * the conformal normalization producing constant scalar curvature, and the
//!   `(n−1)`-positivity certificate built on it ([`normalizer`]);
//! * pseudo-effectivity decisions and the four-way equivalence suite
//!   ([`psef`], [`corpus`]).

pub mod certificate;
pub mod corpus;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod exterior;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod normalizer;
pub mod psef;
pub mod q_positivity;
pub mod tolerance;

pub use certificate::{CertificateKind, CertificateSummary, FailureReason, PositivityCertificate};
pub use curvature::{
    chern_curvature, degree_integral, gauduchon_defect, scalar_curvature, wedge_degree_check,
    LineBundleMetric,
};
pub use error::{Error, Result};
pub use lattice::{
    dbar_del_hessian, integrate, poisson_solve, HermitianMatrixField, MetricField, ScalarField,
    TorusGeometry,
};
pub use normalizer::{certify_n_minus_1_positive, normalize_scalar, target_constant};
pub use psef::{dual_not_psef_test, equivalence_suite, torus_psef_oracle, SuiteReport};
pub use q_positivity::{
    check_q_positive, check_uniform_q_positive, generalized_eigenvalues, lambda0,
    uniformize_metric, EigenvalueField,
};
pub use tolerance::Tolerances;
