//! Frequency-space differential operators on the periodic grid.
//!
//! First derivatives use the symbol `i k`, with the Nyquist bin zeroed so that
//! real fields stay real; pure second derivatives `∂_a²` keep the Nyquist bin
//! (`-k²`). Mixed derivatives along distinct axes are products of first
//! derivatives.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::{HermitianMatrixField, MetricField, ScalarField};
use super::geometry::TorusGeometry;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Bound on `|mean(g)| / ‖g‖∞` accepted by [`poisson_solve`].
pub const MEAN_TOLERANCE: f64 = 1e-8;
/// Bound on the relative residual `‖tr_Ω(√−1∂∂̄f) − g‖∞ / ‖g‖∞`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

pub(crate) struct SpectralGrid {
    geometry: TorusGeometry,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    /// Per axis: full wavenumbers and wavenumbers with the Nyquist bin zeroed.
    full: Vec<Vec<f64>>,
    truncated: Vec<Vec<f64>>,
}

impl SpectralGrid {
    pub(crate) fn new(geometry: &TorusGeometry) -> Self {
        let mut planner = FftPlanner::new();
        let shape = geometry.grid_shape();
        let forward = shape.iter().map(|&s| planner.plan_fft_forward(s)).collect();
        let inverse = shape.iter().map(|&s| planner.plan_fft_inverse(s)).collect();
        let full: Vec<Vec<f64>> = (0..geometry.real_dim())
            .map(|a| (0..shape[a]).map(|b| geometry.wavenumber(a, b)).collect())
            .collect();
        let truncated = full
            .iter()
            .enumerate()
            .map(|(a, ks)| {
                ks.iter()
                    .enumerate()
                    .map(|(b, &k)| if geometry.is_nyquist(a, b) { 0.0 } else { k })
                    .collect()
            })
            .collect();
        Self {
            geometry: geometry.clone(),
            forward,
            inverse,
            full,
            truncated,
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let shape = self.geometry.grid_shape();
        let strides = self.geometry.strides();
        let mut line = Vec::new();
        for axis in 0..shape.len() {
            let len = shape[axis];
            let stride = strides[axis];
            let plan = if inverse {
                &self.inverse[axis]
            } else {
                &self.forward[axis]
            };
            line.resize(len, Complex64::new(0.0, 0.0));
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            let outer = data.len() / (len * stride);
            for o in 0..outer {
                for i in 0..stride {
                    let base = o * len * stride + i;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + k * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        data[base + k * stride] = *v;
                    }
                }
            }
        }
        if inverse {
            let norm = 1.0 / data.len() as f64;
            data.iter_mut().for_each(|z| *z *= norm);
        }
    }

    pub(crate) fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    pub(crate) fn inverse(&self, mut spectrum: Vec<Complex64>) -> Vec<Complex64> {
        self.transform(&mut spectrum, true);
        spectrum
    }

    /// FFT bin of each real axis for a flat spectral index.
    fn bins(&self, index: usize, out: &mut [usize]) {
        let mut rest = index;
        for (slot, &stride) in out.iter_mut().zip(self.geometry.strides()) {
            *slot = rest / stride;
            rest %= stride;
        }
    }

    /// `ζ_j = k_{x_j} − i k_{y_j}` built from Nyquist-truncated wavenumbers.
    fn zeta(&self, bins: &[usize], j: usize) -> Complex64 {
        Complex64::new(
            self.truncated[2 * j][bins[2 * j]],
            -self.truncated[2 * j + 1][bins[2 * j + 1]],
        )
    }

    /// Symbol of `∂²/∂z_j∂z̄_k`.
    fn hessian_symbol(&self, bins: &[usize], j: usize, k: usize) -> Complex64 {
        if j == k {
            let kx = self.full[2 * j][bins[2 * j]];
            let ky = self.full[2 * j + 1][bins[2 * j + 1]];
            Complex64::new(-0.25 * (kx * kx + ky * ky), 0.0)
        } else {
            -0.25 * self.zeta(bins, j) * self.zeta(bins, k).conj()
        }
    }

    /// Symbol of `f ↦ tr(Ω^{-1} · √−1∂∂̄f)` for constant `Ω^{-1}`.
    fn trace_symbol(&self, bins: &[usize], omega_inv: &CMatrix) -> f64 {
        let n = self.geometry.complex_dim();
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                s += omega_inv[(k, j)] * self.hessian_symbol(bins, j, k);
            }
        }
        s.re
    }
}

/// Matrix field of `∂²φ/∂z_j∂z̄_k`, i.e. the coefficients of `√−1∂∂̄φ`.
pub fn dbar_del_hessian(phi: &ScalarField) -> Result<HermitianMatrixField> {
    if let Some(point) = phi.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "weight",
            point,
        });
    }
    let geometry = phi.geometry();
    let grid = SpectralGrid::new(geometry);
    let n = geometry.complex_dim();
    let npts = geometry.num_points();
    let spectrum = grid.forward_real(phi.values());

    let mut data = vec![Complex64::new(0.0, 0.0); npts * n * n];
    let mut bins = vec![0; geometry.real_dim()];
    for j in 0..n {
        for k in j..n {
            let mut filtered = spectrum.clone();
            for (idx, z) in filtered.iter_mut().enumerate() {
                grid.bins(idx, &mut bins);
                *z *= grid.hessian_symbol(&bins, j, k);
            }
            let entry = grid.inverse(filtered);
            for (p, z) in entry.into_iter().enumerate() {
                let block = &mut data[p * n * n..(p + 1) * n * n];
                if j == k {
                    block[j * n + j] = Complex64::new(z.re, 0.0);
                } else {
                    block[j * n + k] = z;
                    block[k * n + j] = z.conj();
                }
            }
        }
    }
    Ok(HermitianMatrixField::from_raw(geometry.clone(), data))
}

/// Pointwise `tr_ω A = tr(Ω^{-1} A)`.
pub fn trace_field(a: &HermitianMatrixField, metric: &MetricField) -> Result<ScalarField> {
    if a.geometry() != metric.geometry() {
        return Err(Error::GeometryMismatch);
    }
    if let Some(omega) = metric.constant_value() {
        let l = linalg::cholesky(&omega).ok_or(Error::NotPositiveDefinite { point: 0 })?;
        a.map_points(|m| linalg::trace_against(m, &l))
    } else {
        use rayon::prelude::*;
        let values = (0..a.num_points())
            .into_par_iter()
            .map(|p| {
                let l = linalg::cholesky(&metric.at(p))
                    .ok_or(Error::NotPositiveDefinite { point: p })?;
                Ok(linalg::trace_against(&a.at(p), &l))
            })
            .collect::<Result<Vec<f64>>>()?;
        ScalarField::new(a.geometry().clone(), values)
    }
}

/// Output of [`poisson_solve`].
#[derive(Clone, Debug)]
pub struct PoissonSolution {
    pub solution: ScalarField,
    /// `‖tr_Ω(√−1∂∂̄f) − g‖∞`, re-evaluated through [`dbar_del_hessian`].
    pub residual: f64,
    /// `residual / ‖g‖∞` (zero when `g ≡ 0`).
    pub relative_residual: f64,
}

/// Solves `tr_Ω(√−1∂∂̄f) = g` for mean-zero `f`, with `Ω` constant.
///
/// The symbol `-¼ ζ*Ω^{-1}ζ` is strictly negative on every non-zero
/// frequency when `Ω` is positive definite, including Nyquist bins where the
/// cross terms are dropped, so the only obstruction is `mean(g) ≠ 0`.
pub fn poisson_solve(g: &ScalarField, metric: &MetricField) -> Result<PoissonSolution> {
    poisson_solve_with_tolerance(g, metric, RESIDUAL_TOLERANCE)
}

/// [`poisson_solve`] with an explicit bound on the relative residual.
pub fn poisson_solve_with_tolerance(
    g: &ScalarField,
    metric: &MetricField,
    residual_tolerance: f64,
) -> Result<PoissonSolution> {
    g.ensure_same_geometry(metric.geometry())?;
    let omega = metric.require_constant()?;
    let omega_inv = omega
        .clone()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite { point: 0 })?;
    let scale = g.sup_norm();
    let mean = g.mean();
    let bound = MEAN_TOLERANCE * scale;
    if mean.abs() > bound {
        return Err(Error::MeanNotZero { mean, bound });
    }

    let geometry = g.geometry();
    let grid = SpectralGrid::new(geometry);
    let mut spectrum = grid.forward_real(g.values());
    let mut bins = vec![0; geometry.real_dim()];
    for (idx, z) in spectrum.iter_mut().enumerate() {
        if idx == 0 {
            *z = Complex64::new(0.0, 0.0);
            continue;
        }
        grid.bins(idx, &mut bins);
        let sigma = grid.trace_symbol(&bins, &omega_inv);
        if sigma.is_nan() || sigma >= 0.0 {
            return Err(Error::SingularSymbol);
        }
        *z /= sigma;
    }
    let raw: Vec<f64> = grid.inverse(spectrum).into_iter().map(|z| z.re).collect();
    let solution = ScalarField::new(geometry.clone(), raw)?;
    let shift = solution.mean();
    let solution = solution.map(|v| v - shift)?;

    let applied = trace_field(&dbar_del_hessian(&solution)?, metric)?;
    let residual = applied.sub(g)?.sup_norm();
    let relative_residual = if scale > 0.0 {
        residual / scale
    } else {
        residual
    };
    if relative_residual > residual_tolerance {
        return Err(Error::InvariantViolation(format!(
            "Poisson residual {relative_residual:e} exceeds {residual_tolerance:e}"
        )));
    }
    Ok(PoissonSolution {
        solution,
        residual,
        relative_residual,
    })
}
