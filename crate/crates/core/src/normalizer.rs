//! Constant scalar curvature by a conformal change of the bundle metric.
//!
//! Against a constant metric `ω`, the equation
//! `tr_ω √−1∂∂̄f = tr_ω R₀ − c` with `c = n ∫c₁(L)∧ω^{n−1} / ∫ω^n` has zero
//! mean, so it is solvable; `h = e^f h₀` then has `tr_ω R^{(L,h)} ≡ c`.

use crate::certificate::{CertificateKind, FailureReason, FieldExtrema, PositivityCertificate};
use crate::curvature::{degree_integral, metric_volume, scalar_curvature, LineBundleMetric};
use crate::error::{Error, Result};
use crate::lattice::spectral::MEAN_TOLERANCE;
use crate::lattice::{poisson_solve_with_tolerance, MetricField, ScalarField};
use crate::linalg::{self, CMatrix};
use crate::tolerance::Tolerances;

/// Relative bound on `max |tr_ω R^{(L,h)} − c|` after normalization.
pub const CONSTANCY_TOLERANCE: f64 = 1e-7;

/// The constant `n ∫ c₁(L) ∧ ω^{n−1} / ∫ ω^n` (for constant `ω`).
pub fn target_constant(bundle: &LineBundleMetric, metric: &MetricField) -> Result<f64> {
    let n = bundle.dim() as f64;
    Ok(n * degree_integral(bundle, metric)? / metric_volume(metric)?)
}

#[derive(Clone, Debug)]
pub struct ScalarNormalization {
    /// `f` with `h = e^f h₀`; mean zero.
    pub weight_shift: ScalarField,
    /// The bundle with weight `φ − f`.
    pub normalized: LineBundleMetric,
    pub target: f64,
    pub scalar_curvature: ScalarField,
    pub certificate: PositivityCertificate,
}

pub fn normalize_scalar(
    bundle: &LineBundleMetric,
    metric: &MetricField,
    tol: &Tolerances,
) -> Result<ScalarNormalization> {
    tol.validate()?;
    metric.require_constant()?;
    let target = target_constant(bundle, metric)?;
    let initial = scalar_curvature(bundle, metric)?;
    // The right-hand side has zero mean up to quadrature round-off, which is
    // measured against the size of the curvature rather than of the difference.
    let scale = bundle.class_scale().max(initial.sup_norm());
    let residual_mean = initial.mean() - target;
    let bound = MEAN_TOLERANCE * scale.max(target.abs());
    if residual_mean.abs() > bound {
        return Err(Error::MeanNotZero {
            mean: residual_mean,
            bound,
        });
    }
    let rhs = initial.map(|s| s - target - residual_mean)?;
    let solved = poisson_solve_with_tolerance(&rhs, metric, tol.solver_residual)?;
    let normalized = bundle.rescaled_by(&solved.solution)?;
    let scalar = scalar_curvature(&normalized, metric)?;

    let deviation = scalar
        .values()
        .iter()
        .fold(0.0f64, |m, s| m.max((s - target).abs()));
    let allowed = CONSTANCY_TOLERANCE * (1.0 + target.abs());
    if deviation > allowed {
        return Err(Error::InvariantViolation(format!(
            "normalized scalar curvature deviates by {deviation:e} from {target} (allowed {allowed:e})"
        )));
    }

    let margin = target.min(scalar.min());
    let mut cert =
        PositivityCertificate::new(CertificateKind::ScalarCurvature, margin, tol.eps_pos(scale));
    cert.q = Some(bundle.dim() - 1);
    cert.target_constant = Some(target);
    cert.residuals = vec![solved.relative_residual, deviation];
    cert.extrema = vec![
        FieldExtrema::of("scalar_curvature_initial", &initial),
        FieldExtrema::of("scalar_curvature", &scalar),
    ];
    cert.witness_metric = Some(metric.clone());
    cert.witness_weight = Some(solved.solution.clone());
    Ok(ScalarNormalization {
        weight_shift: solved.solution,
        normalized,
        target,
        scalar_curvature: scalar,
        certificate: cert,
    })
}

/// Constant metric concentrating on the positive eigendirections of
/// `r_const`, or `None` when there are none above `ε_pos`.
///
/// With `r_const = U diag(μ) U*`, the inverse metric is `U diag(w) U*` where
/// `w = 1` on directions with `μ > ε_pos` and a small `δ` elsewhere, chosen so
/// that `tr_ω r_const ≥ (1 − δ_rel) Σ_{μ>0} μ`. Because `tr_ω r_const` is
/// linear in `Ω^{-1}`, a positive trace exists for some constant metric iff
/// this one has it.
pub fn eigen_aligned_metric(r_const: &CMatrix, tol: &Tolerances) -> Option<CMatrix> {
    let (mu, u) = linalg::hermitian_eigen(r_const);
    let eps = tol.eps_pos(linalg::spectral_radius(r_const));
    if mu[0] <= eps {
        return None;
    }
    let positive: f64 = mu.iter().filter(|&&m| m > eps).sum();
    let negative: f64 = mu.iter().filter(|&&m| m <= eps).map(|m| m.abs()).sum();
    let delta = if negative > 0.0 {
        tol.delta * (positive / negative).min(1.0)
    } else {
        tol.delta
    };
    let inv_weights: Vec<f64> = mu
        .iter()
        .map(|&m| if m > eps { 1.0 } else { 1.0 / delta })
        .collect();
    Some(linalg::symmetrize(
        &(&u * linalg::real_diagonal(&inv_weights) * u.adjoint()),
    ))
}

/// Searches for `(h, ω)` with positive scalar curvature, which certifies
/// `(n−1)`-positivity.
///
/// The witness metric is [`eigen_aligned_metric`]; when `r_const` has no
/// positive eigenvalue the identity metric is used for diagnostics and the
/// verdict is [`FailureReason::DualPseudoEffective`].
pub fn certify_n_minus_1_positive(
    bundle: &LineBundleMetric,
    tol: &Tolerances,
) -> Result<PositivityCertificate> {
    Ok(certify_with_witness(bundle, tol)?.0)
}

/// Certificate plus the normalized bundle it refers to.
pub fn certify_with_witness(
    bundle: &LineBundleMetric,
    tol: &Tolerances,
) -> Result<(PositivityCertificate, ScalarNormalization)> {
    let geometry = bundle.geometry();
    let (metric, has_direction) = match eigen_aligned_metric(bundle.r_const(), tol) {
        Some(omega) => (MetricField::constant(geometry, &omega)?, true),
        None => (MetricField::identity(geometry), false),
    };
    let norm = normalize_scalar(bundle, &metric, tol)?;
    let cert = if has_direction {
        norm.certificate.clone()
    } else {
        norm.certificate
            .clone()
            .reject(FailureReason::DualPseudoEffective)
    };
    Ok((cert, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::TorusGeometry;
    use crate::linalg::real_diagonal;

    #[test]
    fn target_constant_examples() {
        let g = TorusGeometry::with_period(2, 4, 1.0).unwrap();
        let id = MetricField::identity(&g);
        let zero = LineBundleMetric::flat_weight(&g, real_diagonal(&[0.0, 0.0])).unwrap();
        assert_eq!(target_constant(&zero, &id).unwrap(), 0.0);
        let l = LineBundleMetric::flat_weight(&g, real_diagonal(&[1.0, -2.0])).unwrap();
        assert!((target_constant(&l, &id).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_curvature_needs_no_shift() {
        let g = TorusGeometry::uniform(2, 8).unwrap();
        let l = LineBundleMetric::flat_weight(&g, real_diagonal(&[2.0, -0.5])).unwrap();
        let out = normalize_scalar(&l, &MetricField::identity(&g), &Tolerances::default()).unwrap();
        assert!(out.weight_shift.sup_norm() < 1e-15);
        assert!(out.certificate.verdict);
        assert!((out.target - 1.5).abs() < 1e-14);
    }

    #[test]
    fn negative_target_still_normalizes() {
        let g = TorusGeometry::uniform(2, 8).unwrap();
        let phi = ScalarField::from_fn(&g, |x| (x[0] - x[3]).sin()).unwrap();
        let l = LineBundleMetric::new(real_diagonal(&[1.0, -2.0]), phi).unwrap();
        let out = normalize_scalar(&l, &MetricField::identity(&g), &Tolerances::default()).unwrap();
        assert!((out.target + 1.0).abs() < 1e-12);
        assert!(!out.certificate.verdict);
        assert!(out
            .scalar_curvature
            .values()
            .iter()
            .all(|s| (s + 1.0).abs() < 1e-12));
    }

    #[test]
    fn certify_examples() {
        let g = TorusGeometry::uniform(2, 8).unwrap();
        let tol = Tolerances::default();
        let l = LineBundleMetric::flat_weight(&g, real_diagonal(&[1.0, -5.0])).unwrap();
        let cert = certify_n_minus_1_positive(&l, &tol).unwrap();
        assert!(cert.verdict);
        assert!(cert.target_constant.unwrap() > 0.99);

        let l = LineBundleMetric::flat_weight(&g, -CMatrix::identity(2, 2)).unwrap();
        let cert = certify_n_minus_1_positive(&l, &tol).unwrap();
        assert!(!cert.verdict);
        assert_eq!(cert.reason, Some(FailureReason::DualPseudoEffective));

        let l = LineBundleMetric::flat_weight(&g, CMatrix::zeros(2, 2)).unwrap();
        let cert = certify_n_minus_1_positive(&l, &tol).unwrap();
        assert!(!cert.verdict);
        assert_eq!(cert.target_constant, Some(0.0));
    }

    #[test]
    fn eigen_aligned_trace_is_positive() {
        let tol = Tolerances::default();
        let r = real_diagonal(&[1.0, -5.0]);
        let omega = eigen_aligned_metric(&r, &tol).unwrap();
        let tr = (omega.try_inverse().unwrap() * &r).trace().re;
        assert!(tr >= (1.0 - tol.delta) * 1.0 - 1e-12);
        assert!(eigen_aligned_metric(&real_diagonal(&[0.0, -1.0]), &tol).is_none());
    }
}
