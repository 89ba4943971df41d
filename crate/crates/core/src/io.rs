//! Serialized forms: complex matrices, line-bundle documents and CSV field
//! snapshots.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curvature::LineBundleMetric;
use crate::error::{Error, Result};
use crate::expr::WeightExpression;
use crate::lattice::{ScalarField, TorusGeometry};
use crate::linalg::{c, CMatrix};
use crate::q_positivity::EigenvalueField;

/// Complex matrix as nested rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexMatrixRepr(pub Vec<Vec<[f64; 2]>>);

impl From<&CMatrix> for ComplexMatrixRepr {
    fn from(m: &CMatrix) -> Self {
        Self(
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| [m[(i, j)].re, m[(i, j)].im])
                        .collect()
                })
                .collect(),
        )
    }
}

impl ComplexMatrixRepr {
    pub fn real_diagonal(values: &[f64]) -> Self {
        Self::from(&crate::linalg::real_diagonal(values))
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.0.len();
        if let Some(row) = self.0.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
        Ok(CMatrix::from_fn(n, n, |i, j| {
            c(self.0[i][j][0], self.0[i][j][1])
        }))
    }
}

/// Source of the weight `φ` in `h = e^{−φ} h₀`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSpec {
    #[default]
    Zero,
    /// Analytic expression, see [`crate::expr`].
    Expression(String),
    /// CSV snapshot written by [`write_fields_csv`]; relative paths resolve
    /// against the document's directory.
    File(PathBuf),
}

/// Structured text form of a [`LineBundleMetric`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineBundleDocument {
    pub r_const: ComplexMatrixRepr,
    #[serde(default)]
    pub phi: WeightSpec,
}

impl LineBundleDocument {
    pub fn resolve(&self, geometry: &TorusGeometry, base_dir: &Path) -> Result<LineBundleMetric> {
        let phi = match &self.phi {
            WeightSpec::Zero => ScalarField::zeros(geometry),
            WeightSpec::Expression(src) => {
                WeightExpression::parse(src, geometry.complex_dim())?.sample(geometry)?
            }
            WeightSpec::File(path) => {
                let path = if path.is_absolute() {
                    path.clone()
                } else {
                    base_dir.join(path)
                };
                read_field_csv(&path, geometry, "value")?
            }
        };
        LineBundleMetric::new(self.r_const.to_matrix()?, phi)
    }
}

fn coordinate_headers(geometry: &TorusGeometry) -> Vec<String> {
    (1..=geometry.complex_dim())
        .flat_map(|j| [format!("x{j}"), format!("y{j}")])
        .collect()
}

/// One row per grid point: coordinates, then one column per field.
pub fn write_fields_csv(path: &Path, columns: &[(&str, &ScalarField)]) -> Result<()> {
    let geometry = match columns.first() {
        Some((_, f)) => f.geometry(),
        None => return Err(Error::Format("no columns to write".into())),
    };
    for (_, f) in columns {
        f.ensure_same_geometry(geometry)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    let mut header = coordinate_headers(geometry);
    header.extend(columns.iter().map(|(name, _)| name.to_string()));
    w.write_record(&header)?;
    for p in 0..geometry.num_points() {
        let mut row: Vec<String> = geometry
            .coordinates(p)
            .iter()
            .map(|v| v.to_string())
            .collect();
        row.extend(columns.iter().map(|(_, f)| f.values()[p].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_eigenvalues_csv(path: &Path, ev: &EigenvalueField, prefix: &str) -> Result<()> {
    let comps: Vec<(String, ScalarField)> = (0..ev.dim())
        .map(|i| (format!("{prefix}_{}", i + 1), ev.component(i)))
        .collect();
    let cols: Vec<(&str, &ScalarField)> = comps.iter().map(|(n, f)| (n.as_str(), f)).collect();
    write_fields_csv(path, &cols)
}

/// Reads the named column of a CSV snapshot, checking that the coordinate
/// columns match the grid.
pub fn read_field_csv(path: &Path, geometry: &TorusGeometry, column: &str) -> Result<ScalarField> {
    let mut r = csv::Reader::from_reader(File::open(path)?);
    let headers = r.headers()?.clone();
    let coords = coordinate_headers(geometry);
    for (i, name) in coords.iter().enumerate() {
        if headers.get(i) != Some(name.as_str()) {
            return Err(Error::Format(format!(
                "{}: column {i} should be '{name}'",
                path.display()
            )));
        }
    }
    let idx = headers
        .iter()
        .position(|h| h == column)
        .or_else(|| (headers.len() == coords.len() + 1).then_some(coords.len()))
        .ok_or_else(|| Error::Format(format!("{}: no column '{column}'", path.display())))?;
    let mut values = Vec::with_capacity(geometry.num_points());
    for (p, record) in r.records().enumerate() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| {
                    Error::Format(format!("{}: bad number in row {}", path.display(), p + 1))
                })
        };
        if p < geometry.num_points() {
            let expected = geometry.coordinates(p);
            for (a, &x) in expected.iter().enumerate() {
                if (parse(a)? - x).abs() > 1e-9 * (1.0 + x.abs()) {
                    return Err(Error::Format(format!(
                        "{}: row {} does not match grid coordinates",
                        path.display(),
                        p + 1
                    )));
                }
            }
        }
        values.push(parse(idx)?);
    }
    ScalarField::new(geometry.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_document_file_weight() {
        let dir = tempfile::tempdir().unwrap();
        let g = TorusGeometry::uniform(1, 8).unwrap();
        let phi = ScalarField::from_fn(&g, |x| x[0].sin() + 0.25 * x[1].cos()).unwrap();
        let path = dir.path().join("phi.csv");
        write_fields_csv(&path, &[("value", &phi)]).unwrap();
        assert_eq!(read_field_csv(&path, &g, "value").unwrap(), phi);

        let doc: LineBundleDocument =
            serde_json::from_str(r#"{"r_const": [[[2.0, 0.0]]], "phi": {"file": "phi.csv"}}"#)
                .unwrap();
        let bundle = doc.resolve(&g, dir.path()).unwrap();
        assert_eq!(bundle.phi(), &phi);

        let other = TorusGeometry::uniform(1, 4).unwrap();
        assert!(read_field_csv(&path, &other, "value").is_err());
    }

    #[test]
    fn document_expression_and_validation() {
        let g = TorusGeometry::uniform(2, 4).unwrap();
        let doc: LineBundleDocument = serde_json::from_str(
            r#"{"r_const": [[[1.0, 0.0], [0.0, 0.5]], [[0.0, -0.5], [-5.0, 0.0]]],
                "phi": {"expression": "2*cos(x1)"}}"#,
        )
        .unwrap();
        let b = doc.resolve(&g, Path::new(".")).unwrap();
        assert_eq!(b.r_const()[(0, 1)], c(0.0, 0.5));
        assert_eq!(b.phi().values()[0], 2.0);

        let bad: LineBundleDocument = serde_json::from_str(
            r#"{"r_const": [[[1.0, 0.0], [0.0, 0.5]], [[0.0, 0.5], [1.0, 0.0]]]}"#,
        )
        .unwrap();
        assert!(matches!(
            bad.resolve(&g, Path::new(".")),
            Err(Error::NotHermitian { .. })
        ));
        assert_eq!(bad.phi, WeightSpec::Zero);
    }
}
