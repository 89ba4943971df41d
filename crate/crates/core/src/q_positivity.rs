//! Pointwise q-positivity, uniform q-positivity, and the metric change that
//! turns the former into the latter.
//!
//! Curvature eigenvalues are always taken with respect to a base metric: the
//! roots of `det(R − λΩ) = 0`, i.e. the eigenvalues of `RΩ^{-1}`. They are
//! computed by reducing the pencil with the Cholesky factor `Ω = LL*` to the
//! Hermitian matrix `L^{-1} R L^{-*}`.

use rayon::prelude::*;

use crate::certificate::{CertificateKind, FieldExtrema, PositivityCertificate};
use crate::curvature::{chern_curvature, LineBundleMetric};
use crate::error::{Error, Result};
use crate::lattice::{HermitianMatrixField, MetricField, ScalarField, TorusGeometry};
use crate::linalg::{self, CMatrix};
use crate::tolerance::ensure_threshold;

/// Eigen-decomposition of a Hermitian pencil `(R, Ω)` with `Ω` positive
/// definite.
#[derive(Clone, Debug)]
pub struct PencilEigen {
    /// Generalized eigenvalues, descending.
    pub values: Vec<f64>,
    /// Lower Cholesky factor `L` of `Ω`.
    pub factor: CMatrix,
    /// Orthonormal eigenvectors `V` of `L^{-1} R L^{-*}`, columns matching
    /// `values`.
    pub vectors: CMatrix,
}

pub fn pencil_eigen(r: &CMatrix, omega: &CMatrix) -> Option<PencilEigen> {
    let l = linalg::cholesky(omega)?;
    let y = linalg::solve_lower(&l, r);
    let reduced = linalg::solve_lower(&l, &y.adjoint()).adjoint();
    let (values, vectors) = linalg::hermitian_eigen(&reduced);
    Some(PencilEigen {
        values,
        factor: l,
        vectors,
    })
}

/// `n` generalized eigenvalues per grid point, each list sorted descending.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenvalueField {
    geometry: TorusGeometry,
    values: Vec<f64>,
}

impl EigenvalueField {
    pub fn from_rows(geometry: TorusGeometry, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = geometry.complex_dim();
        if rows.len() != geometry.num_points() {
            return Err(Error::DimensionMismatch {
                expected: geometry.num_points(),
                found: rows.len(),
            });
        }
        if let Some(p) = rows
            .iter()
            .position(|r| r.len() != n || r.windows(2).any(|w| w[0] < w[1]))
        {
            return Err(Error::InvariantViolation(format!(
                "eigenvalues at point {p} are not a sorted list of length {n}"
            )));
        }
        Ok(Self {
            geometry,
            values: rows.concat(),
        })
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geometry
    }

    pub fn dim(&self) -> usize {
        self.geometry.complex_dim()
    }

    pub fn at(&self, point: usize) -> &[f64] {
        let n = self.dim();
        &self.values[point * n..(point + 1) * n]
    }

    /// The field of the `i`-th largest eigenvalue (zero-based).
    pub fn component(&self, i: usize) -> ScalarField {
        let values = self.values.chunks_exact(self.dim()).map(|r| r[i]).collect();
        ScalarField::new(self.geometry.clone(), values).expect("eigenvalues are finite")
    }

    /// Pointwise sum of the `count` smallest eigenvalues.
    pub fn smallest_sum(&self, count: usize) -> ScalarField {
        let n = self.dim();
        let values = self
            .values
            .chunks_exact(n)
            .map(|r| r[n - count..].iter().sum())
            .collect();
        ScalarField::new(self.geometry.clone(), values).expect("eigenvalues are finite")
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn extrema(&self, prefix: &str) -> Vec<FieldExtrema> {
        (0..self.dim())
            .map(|i| FieldExtrema::of(format!("{prefix}_{}", i + 1), &self.component(i)))
            .collect()
    }
}

/// Pointwise eigenvalues of the pencil `(R, Ω)`.
pub fn generalized_eigenvalues(
    r: &HermitianMatrixField,
    metric: &MetricField,
) -> Result<EigenvalueField> {
    if r.geometry() != metric.geometry() {
        return Err(Error::GeometryMismatch);
    }
    let constant_factor = metric.constant_value().map(|m| linalg::cholesky(&m));
    if let Some(None) = constant_factor {
        return Err(Error::NotPositiveDefinite { point: 0 });
    }
    let rows = (0..r.num_points())
        .into_par_iter()
        .map(|p| {
            let l = match &constant_factor {
                Some(Some(l)) => l.clone(),
                _ => linalg::cholesky(&metric.at(p))
                    .ok_or(Error::NotPositiveDefinite { point: p })?,
            };
            let y = linalg::solve_lower(&l, &r.at(p));
            let reduced = linalg::solve_lower(&l, &y.adjoint()).adjoint();
            Ok(linalg::hermitian_eigenvalues(&reduced))
        })
        .collect::<Result<Vec<_>>>()?;
    EigenvalueField::from_rows(r.geometry().clone(), rows)
}

fn check_q(q: usize, n: usize) -> Result<()> {
    if q < n {
        Ok(())
    } else {
        Err(Error::QOutOfRange { q, n })
    }
}

/// Curvature has at least `n − q` eigenvalues above `eps` at every grid point.
pub fn check_q_positive(
    bundle: &LineBundleMetric,
    metric: &MetricField,
    q: usize,
    eps: f64,
) -> Result<PositivityCertificate> {
    let n = bundle.dim();
    check_q(q, n)?;
    ensure_threshold(eps)?;
    let ev = generalized_eigenvalues(&chern_curvature(bundle)?, metric)?;
    let margin = ev.component(n - q - 1).min();
    let mut cert = PositivityCertificate::new(CertificateKind::QPositive, margin, eps);
    cert.q = Some(q);
    cert.witness_metric = Some(metric.clone());
    cert.extrema = ev.extrema("lambda");
    Ok(cert)
}

/// The sum of the `q + 1` smallest eigenvalues, which is the least sum of
/// `q + 1` distinct eigenvalues, exceeds `eps` at every grid point.
pub fn check_uniform_q_positive(
    bundle: &LineBundleMetric,
    metric: &MetricField,
    q: usize,
    eps: f64,
) -> Result<PositivityCertificate> {
    let n = bundle.dim();
    check_q(q, n)?;
    ensure_threshold(eps)?;
    let ev = generalized_eigenvalues(&chern_curvature(bundle)?, metric)?;
    let sums = ev.smallest_sum(q + 1);
    let mut cert = PositivityCertificate::new(CertificateKind::UniformQPositive, sums.min(), eps);
    cert.q = Some(q);
    cert.witness_metric = Some(metric.clone());
    cert.extrema = ev.extrema("lambda");
    cert.extrema
        .push(FieldExtrema::of(format!("smallest_{}_sum", q + 1), &sums));
    Ok(cert)
}

/// `log(n + 1) / min_X λ_{n−q}`.
pub fn lambda0(ev: &EigenvalueField, q: usize, eps: f64) -> Result<f64> {
    let n = ev.dim();
    check_q(q, n)?;
    ensure_threshold(eps)?;
    let infimum = ev.component(n - q - 1).min();
    if infimum > eps {
        Ok(((n + 1) as f64).ln() / infimum)
    } else {
        Err(Error::NotQPositive {
            infimum,
            threshold: eps,
        })
    }
}

/// `ψ(x) = (eˣ − 1)/x`, `ψ(0) = 1`; strictly positive on the real line.
pub fn psi(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

/// Curvature eigenvalue after uniformization: `(e^{λ₀λ} − 1)/λ₀`.
pub fn uniformized_eigenvalue(lambda: f64, lambda0: f64) -> f64 {
    (lambda0 * lambda).exp_m1() / lambda0
}

/// Lower bound on the least `(q+1)`-sum after uniformization at a point
/// where the `(n−q)`-th eigenvalue was `lambda_nq`.
pub fn uniform_margin_bound(lambda_nq: f64, lambda0: f64, q: usize) -> f64 {
    ((lambda0 * lambda_nq).exp() - (q + 1) as f64) / lambda0
}

#[derive(Clone, Debug)]
pub struct UniformizedMetric {
    pub metric: MetricField,
    pub lambda0: f64,
    /// Eigenvalues of the curvature with respect to the original metric.
    pub base_eigenvalues: EigenvalueField,
}

impl UniformizedMetric {
    /// Eigenvalues with respect to the new metric predicted by the closed form.
    pub fn predicted_eigenvalues(&self) -> EigenvalueField {
        let geometry = self.base_eigenvalues.geometry().clone();
        let rows = (0..geometry.num_points())
            .map(|p| {
                self.base_eigenvalues
                    .at(p)
                    .iter()
                    .map(|&l| uniformized_eigenvalue(l, self.lambda0))
                    .collect()
            })
            .collect();
        EigenvalueField::from_rows(geometry, rows).expect("the eigenvalue map is increasing")
    }
}

/// Builds `ω̃` with `Ω̃^{-1} = Ω^{-1} ψ(λ₀ RΩ^{-1})`.
///
/// With `Ω = LL*` and `L^{-1}RL^{-*} = V diag(λ) V*` this is
/// `Ω̃ = L V diag(1/ψ(λ₀λᵢ)) V* L*`, positive definite because `ψ > 0`, and
/// the pencil `(R, Ω̃)` has eigenvalues `λᵢ ψ(λ₀λᵢ) = (e^{λ₀λᵢ} − 1)/λ₀`.
pub fn uniformize_metric(
    bundle: &LineBundleMetric,
    metric: &MetricField,
    q: usize,
    eps: f64,
) -> Result<UniformizedMetric> {
    let n = bundle.dim();
    check_q(q, n)?;
    let curvature = chern_curvature(bundle)?;
    if curvature.geometry() != metric.geometry() {
        return Err(Error::GeometryMismatch);
    }
    let decomps = (0..curvature.num_points())
        .into_par_iter()
        .map(|p| {
            pencil_eigen(&curvature.at(p), &metric.at(p))
                .ok_or(Error::NotPositiveDefinite { point: p })
        })
        .collect::<Result<Vec<_>>>()?;
    let base_eigenvalues = EigenvalueField::from_rows(
        curvature.geometry().clone(),
        decomps.iter().map(|d| d.values.clone()).collect(),
    )?;
    let l0 = lambda0(&base_eigenvalues, q, eps)?;

    let blocks: Vec<Vec<num_complex::Complex64>> = decomps
        .par_iter()
        .map(|d| {
            let weights: Vec<f64> = d.values.iter().map(|&l| 1.0 / psi(l0 * l)).collect();
            let lv = &d.factor * &d.vectors;
            let m = &lv * linalg::real_diagonal(&weights) * lv.adjoint();
            linalg::row_major(&linalg::symmetrize(&m))
        })
        .collect();
    let field = HermitianMatrixField::new(curvature.geometry().clone(), blocks.concat())?;
    Ok(UniformizedMetric {
        metric: MetricField::new(field)?,
        lambda0: l0,
        base_eigenvalues,
    })
}
