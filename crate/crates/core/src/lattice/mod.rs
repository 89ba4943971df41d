//! Discretized flat tori: geometry, sampled fields, spectral operators and
//! quadrature.

pub mod field;
pub mod geometry;
pub mod quadrature;
pub mod spectral;

pub use field::{HermitianMatrixField, MetricField, ScalarField};
pub use geometry::{Part, TorusGeometry};
pub use quadrature::{integrate, integrate_lebesgue};
pub use spectral::{
    dbar_del_hessian, poisson_solve, poisson_solve_with_tolerance, trace_field, PoissonSolution,
};
