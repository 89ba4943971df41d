//! Pseudo-effectivity on flat tori and the executable equivalence between
//! "dual not pseudo-effective", "positive Gauduchon degree", "positive scalar
//! curvature" and "(n−1)-positive".
//!
//! On `C^n / Λ` a class with constant representative `r_const` is
//! pseudo-effective iff `r_const ≥ 0`. If `r_const + √−1∂∂̄ψ ≥ 0` as a
//! current, averaging over all translations of the torus keeps the current
//! positive, fixes the translation-invariant `r_const`, and turns `ψ` into a
//! constant, so `r_const ≥ 0`; the converse is the smooth metric with
//! curvature `r_const` itself. Classes carried by [`LineBundleMetric`] are
//! treated the same way whether or not they come from a line bundle.

use serde::Serialize;

use crate::curvature::{degree_integral, metric_volume, scalar_curvature, LineBundleMetric};
use crate::error::Result;
use crate::io::ComplexMatrixRepr;
use crate::lattice::MetricField;
use crate::linalg::{self, CMatrix};
use crate::normalizer::{certify_with_witness, eigen_aligned_metric};
use crate::q_positivity::check_q_positive;
use crate::tolerance::Tolerances;

/// Exact pseudo-effectivity decision on the torus: `r_const` is positive
/// semidefinite up to a relative slack of `10⁻¹²`.
pub fn torus_psef_oracle(bundle: &LineBundleMetric) -> bool {
    torus_psef_with_slack(bundle, Tolerances::default().psd_rel * bundle.class_scale())
}

/// `λ_min(r_const) ≥ −slack`.
pub fn torus_psef_with_slack(bundle: &LineBundleMetric, slack: f64) -> bool {
    let eig = linalg::hermitian_eigenvalues(bundle.r_const());
    eig[eig.len() - 1] >= -slack
}

#[derive(Clone, Debug)]
pub struct DualPsefTest {
    /// A constant (hence Gauduchon) metric with positive degree was found.
    pub dual_not_psef: bool,
    pub witness: Option<CMatrix>,
    /// `∫ c₁(L) ∧ ω^{n−1}` for the metric tried.
    pub degree: f64,
    /// `n · degree / ∫ ω^n`, the number compared against `ε_pos`.
    pub normalized_degree: f64,
    pub threshold: f64,
}

/// Looks for a Gauduchon metric pairing positively with `c₁(L)`; the search
/// runs over the eigen-aligned constant metrics.
pub fn dual_not_psef_test(bundle: &LineBundleMetric, tol: &Tolerances) -> Result<DualPsefTest> {
    let geometry = bundle.geometry();
    let candidate = eigen_aligned_metric(bundle.r_const(), tol);
    let metric = match &candidate {
        Some(omega) => MetricField::constant(geometry, omega)?,
        None => MetricField::identity(geometry),
    };
    let degree = degree_integral(bundle, &metric)?;
    let normalized_degree = bundle.dim() as f64 * degree / metric_volume(&metric)?;
    let scale = bundle
        .class_scale()
        .max(scalar_curvature(bundle, &metric)?.sup_norm());
    let threshold = tol.eps_pos(scale);
    let dual_not_psef = normalized_degree > threshold;
    Ok(DualPsefTest {
        dual_not_psef,
        witness: candidate.filter(|_| dual_not_psef),
        degree,
        normalized_degree,
        threshold,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Statement {
    DualNotPseudoEffective,
    PositiveGauduchonDegree,
    PositiveScalarCurvature,
    NMinusOnePositive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteItem {
    pub statement: Statement,
    pub verdict: bool,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub items: Vec<SuiteItem>,
    /// All four statements agree.
    pub pass: bool,
    pub target_constant: f64,
    pub witness_metric: ComplexMatrixRepr,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SuiteReport {
    pub fn verdicts(&self) -> [bool; 4] {
        [0, 1, 2, 3].map(|i| self.items[i].verdict)
    }

    /// Common verdict when the statements agree.
    pub fn consensus(&self) -> Option<bool> {
        self.pass.then(|| self.items[0].verdict)
    }

    pub fn status(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// Evaluates the four equivalent statements independently.
///
/// 1. the dual class is not pseudo-effective (oracle, strict margin `ε_pos`);
/// 2. some Gauduchon metric pairs positively with `c₁(L)`;
/// 3. some `(h, ω)` has positive scalar curvature;
/// 4. the curvature of the witness `(h, ω)` from 3 has a positive eigenvalue
///    everywhere.
pub fn equivalence_suite(bundle: &LineBundleMetric, tol: &Tolerances) -> Result<SuiteReport> {
    tol.validate()?;
    let n = bundle.dim();
    let top = linalg::hermitian_eigenvalues(bundle.r_const())[0];
    let class_eps = tol.eps_pos(bundle.class_scale());
    let item1 = SuiteItem {
        statement: Statement::DualNotPseudoEffective,
        verdict: !torus_psef_with_slack(&bundle.dual(), class_eps),
        margin: top,
    };

    let dual = dual_not_psef_test(bundle, tol)?;
    let item2 = SuiteItem {
        statement: Statement::PositiveGauduchonDegree,
        verdict: dual.dual_not_psef,
        margin: dual.normalized_degree,
    };

    let (cert, normalization) = certify_with_witness(bundle, tol)?;
    let item3 = SuiteItem {
        statement: Statement::PositiveScalarCurvature,
        verdict: cert.verdict,
        margin: cert.margin,
    };

    let witness = cert
        .witness_metric
        .clone()
        .expect("normalization always records its metric");
    let qpos = check_q_positive(&normalization.normalized, &witness, n - 1, cert.threshold)?;
    let item4 = SuiteItem {
        statement: Statement::NMinusOnePositive,
        verdict: qpos.verdict,
        margin: qpos.margin,
    };

    let items = vec![item1, item2, item3, item4];
    let pass = items.iter().all(|i| i.verdict == items[0].verdict);
    Ok(SuiteReport {
        items,
        pass,
        target_constant: normalization.target,
        witness_metric: ComplexMatrixRepr::from(&witness.require_constant()?),
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ScalarField, TorusGeometry};
    use crate::linalg::real_diagonal;

    #[test]
    fn oracle_examples() {
        let g = TorusGeometry::uniform(2, 4).unwrap();
        let zero = LineBundleMetric::flat_weight(&g, CMatrix::zeros(2, 2)).unwrap();
        assert!(torus_psef_oracle(&zero));
        let mixed = LineBundleMetric::flat_weight(&g, real_diagonal(&[1.0, -5.0])).unwrap();
        assert!(!torus_psef_oracle(&mixed));
        assert!(!torus_psef_oracle(&mixed.dual()));
    }

    #[test]
    fn dual_test_examples() {
        let g = TorusGeometry::uniform(2, 8).unwrap();
        let tol = Tolerances::default();
        let mixed = LineBundleMetric::flat_weight(&g, real_diagonal(&[1.0, -5.0])).unwrap();
        let base = dual_not_psef_test(&mixed, &tol).unwrap();
        assert!(base.dual_not_psef);
        assert!(base.witness.is_some());
        let neg = LineBundleMetric::flat_weight(&g, -CMatrix::identity(2, 2)).unwrap();
        let t = dual_not_psef_test(&neg, &tol).unwrap();
        assert!(!t.dual_not_psef);
        assert!(t.witness.is_none());

        let phi = ScalarField::from_fn(&g, |x| 3.0 * (x[1] + x[2]).cos()).unwrap();
        let perturbed = dual_not_psef_test(&mixed.with_weight(phi).unwrap(), &tol).unwrap();
        assert!(perturbed.dual_not_psef);
        assert!((perturbed.degree - base.degree).abs() < 1e-9);
    }

    #[test]
    fn suite_examples() {
        let g = TorusGeometry::uniform(2, 8).unwrap();
        let tol = Tolerances::default();
        for (r, expected) in [
            (real_diagonal(&[1.0, -5.0]), true),
            (-CMatrix::identity(2, 2), false),
            (CMatrix::zeros(2, 2), false),
        ] {
            let phi = ScalarField::from_fn(&g, |x| 0.7 * x[0].sin() * x[3].cos()).unwrap();
            let report = equivalence_suite(&LineBundleMetric::new(r, phi).unwrap(), &tol).unwrap();
            assert!(report.pass, "{report:?}");
            assert_eq!(report.consensus(), Some(expected));
            assert_eq!(report.status(), "PASS");
        }
    }
}
