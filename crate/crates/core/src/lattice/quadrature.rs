use super::field::ScalarField;
use crate::error::{Error, Result};

/// Neumaier-compensated running sum. Order of accumulation is the order of
/// the iterator, so grid reductions are bit-stable across runs.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = NeumaierSum::default();
    values.into_iter().for_each(|v| acc.add(v));
    acc.total()
}

/// `∫_X g · vol` by the rectangle rule, which is spectrally exact for
/// trigonometric polynomials resolved by the grid.
pub fn integrate(g: &ScalarField, vol: &ScalarField) -> Result<f64> {
    g.ensure_same_geometry(vol.geometry())?;
    if let Some(point) = vol.values().iter().position(|&v| v <= 0.0) {
        return Err(Error::NonPositiveVolume { point });
    }
    let cell = g.geometry().cell_volume();
    let s = compensated_sum(g.values().iter().zip(vol.values()).map(|(a, b)| a * b));
    Ok(s * cell)
}

/// `∫_X g` against Lebesgue measure.
pub fn integrate_lebesgue(g: &ScalarField) -> f64 {
    compensated_sum(g.values().iter().copied()) * g.geometry().cell_volume()
}
