//! Hermitian metrics on line bundles over the torus and their Chern
//! curvature, scalar curvature and degree pairings.
//!
//! Volume convention: `ω^n` is identified with `det(Ω) dV` (the `n!` and the
//! `2π` of the first Chern class are dropped). Every identity checked by the
//! crate is a ratio or a sign, so only consistency matters; see
//! `docs/CONVENTIONS.md`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::Form;
use crate::lattice::quadrature::{compensated_sum, integrate};
use crate::lattice::spectral::trace_field;
use crate::lattice::{
    dbar_del_hessian, HermitianMatrixField, MetricField, ScalarField, TorusGeometry,
};
use crate::linalg::{self, CMatrix};

/// A Hermitian metric `h = e^{−φ} h₀` on a line bundle over the torus, where
/// `h₀` has constant curvature `r_const`. Its Chern curvature is
/// `r_const + √−1∂∂̄φ`.
///
/// The same type carries a bare (1,1) Bott–Chern class: `r_const` is the
/// constant representative and `φ` a potential for another representative.
#[derive(Clone, Debug, PartialEq)]
pub struct LineBundleMetric {
    r_const: CMatrix,
    phi: ScalarField,
}

impl LineBundleMetric {
    pub fn new(r_const: CMatrix, phi: ScalarField) -> Result<Self> {
        let n = phi.geometry().complex_dim();
        if r_const.nrows() != n || r_const.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r_const.nrows(),
            });
        }
        if r_const
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite {
                what: "constant curvature",
                point: 0,
            });
        }
        linalg::ensure_hermitian(&r_const, 0)?;
        Ok(Self {
            r_const: linalg::symmetrize(&r_const),
            phi,
        })
    }

    /// Metric with zero weight: curvature is `r_const` everywhere.
    pub fn flat_weight(geometry: &TorusGeometry, r_const: CMatrix) -> Result<Self> {
        Self::new(r_const, ScalarField::zeros(geometry))
    }

    pub fn r_const(&self) -> &CMatrix {
        &self.r_const
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    pub fn geometry(&self) -> &TorusGeometry {
        self.phi.geometry()
    }

    pub fn dim(&self) -> usize {
        self.r_const.nrows()
    }

    pub fn with_weight(&self, phi: ScalarField) -> Result<Self> {
        phi.ensure_same_geometry(self.geometry())?;
        Self::new(self.r_const.clone(), phi)
    }

    /// `h ↦ e^{f} h`, i.e. weight `φ − f`; curvature drops by `√−1∂∂̄f`.
    pub fn rescaled_by(&self, f: &ScalarField) -> Result<Self> {
        self.with_weight(self.phi.sub(f)?)
    }

    /// The dual bundle `L^{-1}` with the dual metric.
    pub fn dual(&self) -> Self {
        Self {
            r_const: -self.r_const.clone(),
            phi: self.phi.map(|v| -v).expect("negation preserves finiteness"),
        }
    }

    /// Spectral norm of `r_const`.
    pub fn class_scale(&self) -> f64 {
        linalg::spectral_radius(&self.r_const)
    }
}

pub fn chern_curvature(bundle: &LineBundleMetric) -> Result<HermitianMatrixField> {
    let hess = dbar_del_hessian(bundle.phi())?;
    let constant = HermitianMatrixField::constant(bundle.geometry(), bundle.r_const())?;
    constant.add(&hess)
}

/// `tr_ω R^{(L,h)}` pointwise.
pub fn scalar_curvature(bundle: &LineBundleMetric, metric: &MetricField) -> Result<ScalarField> {
    if bundle.geometry() != metric.geometry() {
        return Err(Error::GeometryMismatch);
    }
    trace_field(&chern_curvature(bundle)?, metric)
}

/// `∫_X ω^n` in the crate's normalization.
pub fn metric_volume(metric: &MetricField) -> Result<f64> {
    let density = metric.volume_density()?;
    integrate(&ScalarField::constant(metric.geometry(), 1.0), &density)
}

/// `∫_X c₁(L) ∧ ω^{n−1}`, computed as `(1/n) ∫ tr_ω R · ω^n`.
///
/// Only constant metrics are accepted: they are Kähler on the torus and hence
/// Gauduchon, which is what makes the pairing depend on the class alone.
pub fn degree_integral(bundle: &LineBundleMetric, metric: &MetricField) -> Result<f64> {
    metric.require_constant()?;
    let trace = scalar_curvature(bundle, metric)?;
    let density = metric.volume_density()?;
    Ok(integrate(&trace, &density)? / bundle.dim() as f64)
}

/// The same pairing as [`degree_integral`], evaluated by expanding
/// `R ∧ ω^{n−1}` in the exterior algebra. Supports `n ≤ 2`.
pub fn wedge_degree_check(bundle: &LineBundleMetric, metric: &MetricField) -> Result<f64> {
    let n = bundle.dim();
    if n > 2 {
        return Err(Error::UnsupportedDimension { n, max: 2 });
    }
    if bundle.geometry() != metric.geometry() {
        return Err(Error::GeometryMismatch);
    }
    let omega = metric.require_constant()?;
    let omega_power = Form::from_hermitian(&omega).power(n - 1);
    // e = (√−1)^n dz_1∧dz̄_1∧..., and ω^n = n! det Ω e ↔ det Ω dV.
    let unit = num_complex::Complex64::new(0.0, 1.0).powu(n as u32) * factorial(n);
    let curvature = chern_curvature(bundle)?;
    let densities: Vec<f64> = (0..curvature.num_points())
        .into_par_iter()
        .map(|p| {
            let top = Form::from_hermitian(&curvature.at(p))
                .wedge(&omega_power)
                .top_coefficient(n);
            (top / unit).re
        })
        .collect();
    Ok(compensated_sum(densities) * bundle.geometry().cell_volume())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `max_X |∂∂̄ω^{n−1}|`, measured as the modulus of the coefficient of
/// `dz_1∧dz̄_1∧dz_2∧dz̄_2`. Zero exactly when `ω` is Gauduchon.
///
/// For `n = 1` the form `ω^0` is the constant 1 and the defect is 0.
pub fn gauduchon_defect(metric: &MetricField) -> Result<f64> {
    let n = metric.dim();
    match n {
        1 => return Ok(0.0),
        2 => {}
        _ => return Err(Error::UnsupportedDimension { n, max: 2 }),
    }
    if metric.is_constant() {
        return Ok(0.0);
    }
    let geometry = metric.geometry();
    let field = metric.field();
    let i = num_complex::Complex64::new(0.0, 1.0);

    // ω^{n−1} = ω = Σ_{jk} c_{jk} dz_j∧dz̄_k with c_{jk} = √−1 Ω_{jk}.
    let mut pieces = Vec::new();
    for j in 0..n {
        for k in 0..n {
            let coef: Vec<num_complex::Complex64> = (0..geometry.num_points())
                .map(|p| i * field.entry(p, j, k))
                .collect();
            let re = ScalarField::new(geometry.clone(), coef.iter().map(|z| z.re).collect())?;
            let im = ScalarField::new(geometry.clone(), coef.iter().map(|z| z.im).collect())?;
            pieces.push((j, k, dbar_del_hessian(&re)?, dbar_del_hessian(&im)?));
        }
    }
    let defects: Vec<f64> = (0..geometry.num_points())
        .into_par_iter()
        .map(|p| {
            let mut form = Form::zero();
            for (j, k, h_re, h_im) in &pieces {
                let ddbar_coef = h_re.at(p) + h_im.at(p) * i;
                // √−1∂∂̄g = Σ √−1 g_{ab̄} dz_a∧dz̄_b, so strip the √−1.
                let ddbar = Form::from_hermitian(&ddbar_coef).scaled(-i);
                let basis = Form::monomial(
                    &[crate::exterior::dz(*j), crate::exterior::dzbar(*k)],
                    1.0.into(),
                );
                form.add_assign(&ddbar.wedge(&basis));
            }
            form.top_coefficient(n).norm()
        })
        .collect();
    Ok(defects.into_iter().fold(0.0, f64::max))
}
