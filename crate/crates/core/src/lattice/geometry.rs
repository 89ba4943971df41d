use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which real coordinate of `z_j = x_j + i y_j` an axis carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// A flat complex torus `C^n / Λ` sampled on a uniform grid.
///
/// Real axes are ordered `x_1, y_1, x_2, y_2, ...`; grid points are stored
/// row-major with the last axis varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeometry", into = "RawGeometry")]
pub struct TorusGeometry {
    complex_dim: usize,
    grid_shape: Vec<usize>,
    periods: Vec<f64>,
    strides: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawGeometry {
    complex_dim: usize,
    grid_shape: Vec<usize>,
    periods: Vec<f64>,
}

impl TryFrom<RawGeometry> for TorusGeometry {
    type Error = Error;

    fn try_from(raw: RawGeometry) -> Result<Self> {
        TorusGeometry::new(raw.complex_dim, raw.grid_shape, raw.periods)
    }
}

impl From<TorusGeometry> for RawGeometry {
    fn from(g: TorusGeometry) -> Self {
        RawGeometry {
            complex_dim: g.complex_dim,
            grid_shape: g.grid_shape,
            periods: g.periods,
        }
    }
}

impl TorusGeometry {
    pub fn new(complex_dim: usize, grid_shape: Vec<usize>, periods: Vec<f64>) -> Result<Self> {
        if complex_dim == 0 {
            return Err(Error::InvalidGeometry(
                "complex dimension must be at least 1".into(),
            ));
        }
        let real_dim = 2 * complex_dim;
        if grid_shape.len() != real_dim {
            return Err(Error::InvalidGeometry(format!(
                "expected {real_dim} grid sizes, got {}",
                grid_shape.len()
            )));
        }
        if periods.len() != real_dim {
            return Err(Error::InvalidGeometry(format!(
                "expected {real_dim} periods, got {}",
                periods.len()
            )));
        }
        if let Some(&bad) = grid_shape.iter().find(|&&s| s < 4 || s % 2 != 0) {
            return Err(Error::InvalidGeometry(format!(
                "grid size {bad} must be even and at least 4"
            )));
        }
        if let Some(&bad) = periods.iter().find(|&&p| !(p.is_finite() && p > 0.0)) {
            return Err(Error::InvalidGeometry(format!(
                "period {bad} must be positive"
            )));
        }
        grid_shape
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .ok_or_else(|| Error::InvalidGeometry("grid too large".into()))?;

        let mut strides = vec![1; real_dim];
        for a in (0..real_dim - 1).rev() {
            strides[a] = strides[a + 1] * grid_shape[a + 1];
        }
        Ok(Self {
            complex_dim,
            grid_shape,
            periods,
            strides,
        })
    }

    /// `samples` points along every real axis, period 2π.
    pub fn uniform(complex_dim: usize, samples: usize) -> Result<Self> {
        Self::with_period(complex_dim, samples, TAU)
    }

    pub fn with_period(complex_dim: usize, samples: usize, period: f64) -> Result<Self> {
        let real_dim = 2 * complex_dim;
        Self::new(complex_dim, vec![samples; real_dim], vec![period; real_dim])
    }

    pub fn complex_dim(&self) -> usize {
        self.complex_dim
    }

    pub fn real_dim(&self) -> usize {
        2 * self.complex_dim
    }

    pub fn grid_shape(&self) -> &[usize] {
        &self.grid_shape
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn num_points(&self) -> usize {
        self.grid_shape.iter().product()
    }

    /// Real axis index carrying the given part of `z_j` (`j` is zero-based).
    pub fn axis(&self, j: usize, part: Part) -> usize {
        match part {
            Part::Re => 2 * j,
            Part::Im => 2 * j + 1,
        }
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.periods[axis] / self.grid_shape[axis] as f64
    }

    /// Lebesgue measure of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        (0..self.real_dim()).map(|a| self.spacing(a)).product()
    }

    pub fn total_volume(&self) -> f64 {
        self.periods.iter().product()
    }

    pub fn multi_index(&self, point: usize) -> Vec<usize> {
        let mut rest = point;
        self.strides
            .iter()
            .zip(&self.grid_shape)
            .map(|(&stride, &size)| {
                let i = rest / stride;
                rest %= stride;
                debug_assert!(i < size);
                i
            })
            .collect()
    }

    pub fn coordinates(&self, point: usize) -> Vec<f64> {
        self.multi_index(point)
            .into_iter()
            .enumerate()
            .map(|(a, i)| i as f64 * self.spacing(a))
            .collect()
    }

    /// Signed integer frequency of FFT bin `bin` along `axis`
    /// (`0, 1, .., N/2, -N/2+1, .., -1`).
    pub fn signed_frequency(&self, axis: usize, bin: usize) -> i64 {
        let size = self.grid_shape[axis];
        if bin <= size / 2 {
            bin as i64
        } else {
            bin as i64 - size as i64
        }
    }

    pub fn is_nyquist(&self, axis: usize, bin: usize) -> bool {
        bin == self.grid_shape[axis] / 2
    }

    /// Angular wavenumber `2π m / P` of FFT bin `bin`.
    pub fn wavenumber(&self, axis: usize, bin: usize) -> f64 {
        TAU * self.signed_frequency(axis, bin) as f64 / self.periods[axis]
    }

    /// Same geometry with every axis resampled to `samples` points.
    pub fn resampled(&self, samples: usize) -> Result<Self> {
        Self::new(
            self.complex_dim,
            vec![samples; self.real_dim()],
            self.periods.clone(),
        )
    }
}
