use serde::Serialize;

use crate::io::ComplexMatrixRepr;
use crate::lattice::{MetricField, ScalarField, TorusGeometry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// At least `n − q` positive curvature eigenvalues at every point.
    QPositive,
    /// Every sum of `q + 1` curvature eigenvalues positive at every point.
    UniformQPositive,
    /// Positive constant scalar curvature after normalization.
    ScalarCurvature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// Margin did not clear the threshold somewhere on the grid.
    MarginNotPositive,
    /// `r_const` has no positive eigenvalue: the dual class is
    /// pseudo-effective, so no metric pair can have positive scalar curvature.
    DualPseudoEffective,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldExtrema {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl FieldExtrema {
    pub fn of(name: impl Into<String>, field: &ScalarField) -> Self {
        Self {
            name: name.into(),
            min: field.min(),
            max: field.max(),
        }
    }
}

/// Outcome of a positivity check together with what was used to reach it.
///
/// `verdict` is only ever true when `margin > threshold`.
#[derive(Clone, Debug)]
pub struct PositivityCertificate {
    pub kind: CertificateKind,
    pub verdict: bool,
    pub margin: f64,
    pub threshold: f64,
    pub q: Option<usize>,
    pub lambda0: Option<f64>,
    pub target_constant: Option<f64>,
    pub reason: Option<FailureReason>,
    pub witness_metric: Option<MetricField>,
    pub witness_weight: Option<ScalarField>,
    pub residuals: Vec<f64>,
    pub extrema: Vec<FieldExtrema>,
}

impl PositivityCertificate {
    pub fn new(kind: CertificateKind, margin: f64, threshold: f64) -> Self {
        let verdict = margin > threshold;
        Self {
            kind,
            verdict,
            margin,
            threshold,
            q: None,
            lambda0: None,
            target_constant: None,
            reason: (!verdict).then_some(FailureReason::MarginNotPositive),
            witness_metric: None,
            witness_weight: None,
            residuals: Vec::new(),
            extrema: Vec::new(),
        }
    }

    /// Forces a negative verdict (keeps `margin` as a diagnostic).
    pub fn reject(mut self, reason: FailureReason) -> Self {
        self.verdict = false;
        self.reason = Some(reason);
        self
    }

    pub fn summary(&self) -> CertificateSummary {
        let witness_metric = self
            .witness_metric
            .as_ref()
            .map(|m| match m.constant_value() {
                Some(c) => WitnessMetric::Constant(ComplexMatrixRepr::from(&c)),
                None => WitnessMetric::Field {
                    min_eigenvalue: m.min_eigenvalue(),
                },
            });
        CertificateSummary {
            kind: self.kind,
            verdict: self.verdict,
            q: self.q,
            margin: self.margin,
            threshold: self.threshold,
            lambda0: self.lambda0,
            target_constant: self.target_constant,
            reason: self.reason,
            residuals: self.residuals.clone(),
            extrema: self.extrema.clone(),
            witness_metric,
            witness_weight: self
                .witness_weight
                .as_ref()
                .map(|w| FieldExtrema::of("witness_weight", w)),
            grid: self
                .witness_metric
                .as_ref()
                .map(|m| m.geometry().clone())
                .or_else(|| self.witness_weight.as_ref().map(|w| w.geometry().clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessMetric {
    Constant(ComplexMatrixRepr),
    Field { min_eigenvalue: f64 },
}

/// Serializable view of a [`PositivityCertificate`] for JSON reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub kind: CertificateKind,
    pub verdict: bool,
    pub q: Option<usize>,
    pub margin: f64,
    pub threshold: f64,
    pub lambda0: Option<f64>,
    pub target_constant: Option<f64>,
    pub reason: Option<FailureReason>,
    pub residuals: Vec<f64>,
    pub extrema: Vec<FieldExtrema>,
    pub witness_metric: Option<WitnessMetric>,
    pub witness_weight: Option<FieldExtrema>,
    pub grid: Option<TorusGeometry>,
}
