use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every positivity decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Margins must exceed `eps_pos_rel · scale` to certify strict positivity.
    pub eps_pos_rel: f64,
    /// Absolute floor added under the relative margin.
    pub eps_pos_abs: f64,
    /// Relative weight put on non-positive eigendirections by the
    /// eigen-aligned witness metric.
    pub delta: f64,
    /// Accepted relative residual of the constant-coefficient solve.
    pub solver_residual: f64,
    /// Relative slack of the semidefiniteness test in the flat-torus
    /// pseudo-effectivity oracle.
    pub psd_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_pos_rel: 1e-9,
            eps_pos_abs: 0.0,
            delta: 1e-3,
            solver_residual: 1e-8,
            psd_rel: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidTolerance(format!("{name} = {v}")))
            }
        };
        check("eps_pos_rel", self.eps_pos_rel)?;
        check("eps_pos_abs", self.eps_pos_abs)?;
        check("solver_residual", self.solver_residual)?;
        check("psd_rel", self.psd_rel)?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidTolerance(format!(
                "delta = {} not in (0, 1)",
                self.delta
            )));
        }
        Ok(())
    }

    /// Positivity threshold `ε_pos` for quantities of magnitude `scale`.
    pub fn eps_pos(&self, scale: f64) -> f64 {
        self.eps_pos_abs + self.eps_pos_rel * scale.abs()
    }
}

pub(crate) fn ensure_threshold(eps: f64) -> Result<()> {
    if eps.is_finite() && eps >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(format!("threshold {eps}")))
    }
}
