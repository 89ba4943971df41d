use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::geometry::TorusGeometry;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Real-valued function sampled on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    geometry: TorusGeometry,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(geometry: TorusGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.num_points() {
            return Err(Error::DimensionMismatch {
                expected: geometry.num_points(),
                found: values.len(),
            });
        }
        if let Some(point) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "scalar field",
                point,
            });
        }
        Ok(Self { geometry, values })
    }

    pub fn constant(geometry: &TorusGeometry, value: f64) -> Self {
        Self {
            geometry: geometry.clone(),
            values: vec![value; geometry.num_points()],
        }
    }

    pub fn zeros(geometry: &TorusGeometry) -> Self {
        Self::constant(geometry, 0.0)
    }

    /// Samples `f` at the grid coordinates `(x_1, y_1, ..., x_n, y_n)`.
    pub fn from_fn<F>(geometry: &TorusGeometry, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let values = (0..geometry.num_points())
            .into_par_iter()
            .map(|p| f(&geometry.coordinates(p)))
            .collect();
        Self::new(geometry.clone(), values)
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Result<Self> {
        Self::new(
            self.geometry.clone(),
            self.values.par_iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        self.ensure_same_geometry(other.geometry())?;
        Self::new(
            self.geometry.clone(),
            self.values
                .par_iter()
                .zip(other.values.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        self.map(|v| s * v)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Arithmetic mean over grid points, compensated.
    pub fn mean(&self) -> f64 {
        super::quadrature::compensated_sum(self.values.iter().copied()) / self.values.len() as f64
    }

    pub(crate) fn ensure_same_geometry(&self, other: &TorusGeometry) -> Result<()> {
        if &self.geometry == other {
            Ok(())
        } else {
            Err(Error::GeometryMismatch)
        }
    }
}

/// Field of `n x n` Hermitian matrices, stored contiguously row-major per point.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrixField {
    geometry: TorusGeometry,
    data: Vec<Complex64>,
}

/// Relative Hermitian-symmetry tolerance for matrix fields.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

impl HermitianMatrixField {
    pub fn new(geometry: TorusGeometry, data: Vec<Complex64>) -> Result<Self> {
        let n = geometry.complex_dim();
        let expected = geometry.num_points() * n * n;
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: data.len(),
            });
        }
        let field = Self { geometry, data };
        field.validate()?;
        Ok(field)
    }

    /// Builds a field without validation; callers guarantee symmetry.
    pub(crate) fn from_raw(geometry: TorusGeometry, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(
            data.len(),
            geometry.num_points() * geometry.complex_dim().pow(2)
        );
        Self { geometry, data }
    }

    pub fn constant(geometry: &TorusGeometry, matrix: &CMatrix) -> Result<Self> {
        let n = geometry.complex_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        linalg::ensure_hermitian(matrix, 0)?;
        let block = linalg::row_major(matrix);
        let data = block
            .iter()
            .copied()
            .cycle()
            .take(block.len() * geometry.num_points())
            .collect();
        Ok(Self::from_raw(geometry.clone(), data))
    }

    pub fn zeros(geometry: &TorusGeometry) -> Self {
        let n = geometry.complex_dim();
        Self::from_raw(
            geometry.clone(),
            vec![Complex64::new(0.0, 0.0); geometry.num_points() * n * n],
        )
    }

    pub fn from_fn<F>(geometry: &TorusGeometry, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> CMatrix + Sync,
    {
        let n = geometry.complex_dim();
        let blocks: Vec<Vec<Complex64>> = (0..geometry.num_points())
            .into_par_iter()
            .map(|p| {
                let m = f(&geometry.coordinates(p));
                assert_eq!((m.nrows(), m.ncols()), (n, n), "matrix size mismatch");
                linalg::row_major(&m)
            })
            .collect();
        Self::new(geometry.clone(), blocks.concat())
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geometry
    }

    pub fn dim(&self) -> usize {
        self.geometry.complex_dim()
    }

    pub fn num_points(&self) -> usize {
        self.geometry.num_points()
    }

    pub fn raw(&self) -> &[Complex64] {
        &self.data
    }

    pub fn block(&self, point: usize) -> &[Complex64] {
        let nn = self.dim() * self.dim();
        &self.data[point * nn..(point + 1) * nn]
    }

    pub fn entry(&self, point: usize, row: usize, col: usize) -> Complex64 {
        self.block(point)[row * self.dim() + col]
    }

    pub fn at(&self, point: usize) -> CMatrix {
        let n = self.dim();
        DMatrix::from_row_slice(n, n, self.block(point))
    }

    pub fn is_constant(&self) -> bool {
        let nn = self.dim() * self.dim();
        let first = &self.data[..nn];
        self.data.chunks_exact(nn).all(|b| b == first)
    }

    /// The common value when the field is constant over the grid.
    pub fn constant_value(&self) -> Option<CMatrix> {
        self.is_constant().then(|| self.at(0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_raw(
            self.geometry.clone(),
            self.data.iter().map(|z| z * s).collect(),
        )
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch);
        }
        Ok(Self::from_raw(
            self.geometry.clone(),
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// Largest entry modulus over the whole field.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Pointwise real scalar obtained from each matrix.
    pub fn map_points(&self, f: impl Fn(&CMatrix) -> f64 + Sync) -> Result<ScalarField> {
        let values = (0..self.num_points())
            .into_par_iter()
            .map(|p| f(&self.at(p)))
            .collect();
        ScalarField::new(self.geometry.clone(), values)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(idx) = self
            .data
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite {
                what: "matrix field",
                point: idx / (self.dim() * self.dim()),
            });
        }
        (0..self.num_points())
            .into_par_iter()
            .try_for_each(|p| linalg::ensure_hermitian(&self.at(p), p))
    }
}

/// A positive-definite [`HermitianMatrixField`]: the local matrix of a
/// Hermitian metric on the torus.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    inner: HermitianMatrixField,
}

impl MetricField {
    pub fn new(field: HermitianMatrixField) -> Result<Self> {
        if let Some(m) = field.constant_value() {
            linalg::cholesky(&m).ok_or(Error::NotPositiveDefinite { point: 0 })?;
        } else {
            (0..field.num_points()).into_par_iter().try_for_each(|p| {
                linalg::cholesky(&field.at(p))
                    .map(|_| ())
                    .ok_or(Error::NotPositiveDefinite { point: p })
            })?;
        }
        Ok(Self { inner: field })
    }

    pub fn constant(geometry: &TorusGeometry, matrix: &CMatrix) -> Result<Self> {
        Self::new(HermitianMatrixField::constant(geometry, matrix)?)
    }

    pub fn identity(geometry: &TorusGeometry) -> Self {
        let n = geometry.complex_dim();
        Self::constant(geometry, &CMatrix::identity(n, n)).expect("identity is a metric")
    }

    /// `e^u · ω`.
    pub fn conformal(&self, u: &ScalarField) -> Result<Self> {
        u.ensure_same_geometry(self.geometry())?;
        let nn = self.dim() * self.dim();
        let data = self
            .inner
            .raw()
            .chunks_exact(nn)
            .zip(u.values())
            .flat_map(|(b, &uv)| {
                let s = uv.exp();
                b.iter().map(move |z| z * s)
            })
            .collect();
        Self::new(HermitianMatrixField::new(self.geometry().clone(), data)?)
    }

    pub fn field(&self) -> &HermitianMatrixField {
        &self.inner
    }

    pub fn geometry(&self) -> &TorusGeometry {
        self.inner.geometry()
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn at(&self, point: usize) -> CMatrix {
        self.inner.at(point)
    }

    pub fn is_constant(&self) -> bool {
        self.inner.is_constant()
    }

    pub fn constant_value(&self) -> Option<CMatrix> {
        self.inner.constant_value()
    }

    /// Constant value, or [`Error::NonConstantMetric`].
    pub fn require_constant(&self) -> Result<CMatrix> {
        self.constant_value().ok_or(Error::NonConstantMetric)
    }

    /// Pointwise `det Ω`, the density of `ω^n` in this crate's normalization.
    pub fn volume_density(&self) -> Result<ScalarField> {
        self.inner.map_points(|m| m.determinant().re)
    }

    /// Smallest eigenvalue over the grid.
    pub fn min_eigenvalue(&self) -> f64 {
        (0..self.inner.num_points())
            .into_par_iter()
            .map(|p| linalg::hermitian_eigenvalues(&self.at(p))[self.dim() - 1])
            .collect::<Vec<_>>()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}
