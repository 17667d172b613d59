//! Triangular interpolation tables, node polynomials and counting measures.

use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpair;
use crate::geometry::CompactSet;
use crate::poly::Polynomial;

/// Row cap for catalog tables, which are otherwise unbounded.
pub const DEFAULT_MAX_ROW: usize = 4096;

/// Points within this distance of a region's boundary count as inside.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("row {n} out of range 1..={max_row}")]
    OutOfRange { n: usize, max_row: usize },
    #[error("table CSV line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("explicit table row {row} has {got} points, expected {row}")]
    RowSize { row: usize, got: usize },
    #[error("explicit table needs exactly one of `path` and `rows`")]
    ExplicitSource,
    #[error("invalid table parameters: {0}")]
    Invalid(String),
    #[error("table point {0} lies outside E")]
    OutsideE(Complex64),
    #[error("cannot read table file: {0}")]
    Io(#[from] std::io::Error),
}

/// Configuration form of a table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TableSpec {
    /// Row `n`: `center + radius * exp(i (2 pi k / n + rotation))`.
    RootsOfUnity {
        #[serde(with = "cpair::one")]
        center: Complex64,
        radius: f64,
        #[serde(default)]
        rotation: f64,
    },
    /// Every node at `point`.
    Confluent {
        #[serde(with = "cpair::one")]
        point: Complex64,
    },
    /// Row `n`: midpoint angles of `n` equal subarcs of `theta`.
    Arc {
        #[serde(with = "cpair::one")]
        center: Complex64,
        radius: f64,
        theta: [f64; 2],
    },
    /// Rows from a CSV file `(row, k, re, im)` or given inline.
    Explicit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rows")]
        rows: Option<Vec<Vec<Complex64>>>,
    },
}

mod opt_rows {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rows: &Option<Vec<Vec<Complex64>>>, s: S) -> Result<S::Ok, S::Error> {
        match rows {
            Some(r) => cpair::rows::serialize(r, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Vec<Complex64>>>, D::Error> {
        cpair::rows::deserialize(d).map(Some)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Generator {
    RootsOfUnity {
        center: Complex64,
        radius: f64,
        rotation: f64,
    },
    Confluent(Complex64),
    Arc {
        center: Complex64,
        radius: f64,
        theta: [f64; 2],
    },
    Explicit(Vec<Vec<Complex64>>),
}

/// Where a table's nodes sit relative to E.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportClass {
    /// Every node lies on the boundary of E.
    Boundary,
    /// Every node lies in E, some off its boundary.
    Interior,
}

/// The scheme `beta`: row `n` holds exactly `n` nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularTable {
    generator: Generator,
    max_row: usize,
}

impl TriangularTable {
    pub fn roots_of_unity(center: Complex64, radius: f64, rotation: f64) -> Self {
        Self {
            generator: Generator::RootsOfUnity {
                center,
                radius,
                rotation,
            },
            max_row: DEFAULT_MAX_ROW,
        }
    }

    pub fn confluent(point: Complex64) -> Self {
        Self {
            generator: Generator::Confluent(point),
            max_row: DEFAULT_MAX_ROW,
        }
    }

    pub fn arc(center: Complex64, radius: f64, theta: [f64; 2]) -> Self {
        Self {
            generator: Generator::Arc { center, radius, theta },
            max_row: DEFAULT_MAX_ROW,
        }
    }

    /// `rows[n - 1]` is row `n`.
    pub fn explicit(rows: Vec<Vec<Complex64>>) -> Result<Self, TableError> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(TableError::RowSize {
                    row: i + 1,
                    got: row.len(),
                });
            }
        }
        let max_row = rows.len();
        Ok(Self {
            generator: Generator::Explicit(rows),
            max_row,
        })
    }

    /// Parse `(row, k, re, im)` records; `k` runs over `1..=row`.
    pub fn from_csv(text: &str) -> Result<Self, TableError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| TableError::Csv {
                line,
                message: e.to_string(),
            })?;
            if record.len() != 4 {
                return Err(TableError::Csv {
                    line,
                    message: format!("expected 4 fields, found {}", record.len()),
                });
            }
            let field = |j: usize| record[j].to_string();
            let parse_usize = |j: usize| {
                field(j).parse::<usize>().map_err(|e| TableError::Csv {
                    line,
                    message: format!("field {}: {e}", j + 1),
                })
            };
            let parse_f64 = |j: usize| {
                field(j)
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| TableError::Csv {
                        line,
                        message: format!("field {} is not a finite number", j + 1),
                    })
            };
            let (row, k) = (parse_usize(0)?, parse_usize(1)?);
            if row == 0 || k == 0 || k > row {
                return Err(TableError::Csv {
                    line,
                    message: format!("index k = {k} outside 1..={row}"),
                });
            }
            entries.push((row, k, Complex64::new(parse_f64(2)?, parse_f64(3)?)));
        }
        entries.sort_by_key(|&(row, k, _)| (row, k));
        let max_row = entries.last().map_or(0, |e| e.0);
        let mut rows = vec![Vec::new(); max_row];
        for (row, k, z) in entries {
            let slot = &mut rows[row - 1];
            if slot.len() + 1 != k {
                return Err(TableError::Csv {
                    line: 0,
                    message: format!("row {row}: entry k = {k} missing or duplicated"),
                });
            }
            slot.push(z);
        }
        Self::explicit(rows)
    }

    /// Resolve a spec; relative CSV paths are taken from `base_dir`.
    pub fn from_spec(spec: &TableSpec, base_dir: &Path) -> Result<Self, TableError> {
        let table = match spec {
            TableSpec::RootsOfUnity {
                center,
                radius,
                rotation,
            } => Self::roots_of_unity(*center, *radius, *rotation),
            TableSpec::Confluent { point } => Self::confluent(*point),
            TableSpec::Arc { center, radius, theta } => Self::arc(*center, *radius, *theta),
            TableSpec::Explicit {
                path: Some(path),
                rows: None,
            } => Self::from_csv(&std::fs::read_to_string(base_dir.join(path))?)?,
            TableSpec::Explicit {
                path: None,
                rows: Some(rows),
            } => Self::explicit(rows.clone())?,
            TableSpec::Explicit { .. } => return Err(TableError::ExplicitSource),
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<(), TableError> {
        let positive = |r: f64| r.is_finite() && r > 0.0;
        match &self.generator {
            Generator::RootsOfUnity { radius, rotation, .. } => {
                if !positive(*radius) || !rotation.is_finite() {
                    return Err(TableError::Invalid("radius must be positive, rotation finite".into()));
                }
            }
            Generator::Arc { radius, theta, .. } => {
                if !positive(*radius)
                    || theta[0].partial_cmp(&theta[1]) != Some(std::cmp::Ordering::Less)
                    || theta[1] - theta[0] > TAU
                {
                    return Err(TableError::Invalid(
                        "arc needs a positive radius and theta0 < theta1 <= theta0 + 2 pi".into(),
                    ));
                }
            }
            Generator::Confluent(_) | Generator::Explicit(_) => {}
        }
        Ok(())
    }

    /// Cap the table at `max_row` rows (explicit tables cannot grow).
    pub fn with_max_row(mut self, max_row: usize) -> Self {
        self.max_row = match self.generator {
            Generator::Explicit(ref rows) => max_row.min(rows.len()),
            _ => max_row,
        };
        self
    }

    pub fn max_row(&self) -> usize {
        self.max_row
    }

    /// The `n` nodes of row `n`.
    pub fn row(&self, n: usize) -> Result<Vec<Complex64>, TableError> {
        if n == 0 || n > self.max_row {
            return Err(TableError::OutOfRange {
                n,
                max_row: self.max_row,
            });
        }
        Ok(match &self.generator {
            Generator::RootsOfUnity {
                center,
                radius,
                rotation,
            } => (0..n)
                .map(|k| center + Complex64::from_polar(*radius, TAU * k as f64 / n as f64 + rotation))
                .collect(),
            Generator::Confluent(point) => vec![*point; n],
            Generator::Arc { center, radius, theta } => (0..n)
                .map(|k| {
                    let t = theta[0] + (theta[1] - theta[0]) * (k as f64 + 0.5) / n as f64;
                    center + Complex64::from_polar(*radius, t)
                })
                .collect(),
            Generator::Explicit(rows) => rows[n - 1].clone(),
        })
    }

    /// Classify rows `1..=min(max_row, rows)` against `e`.
    ///
    /// Nodes outside `e` are an error: no table may have limit points off E.
    pub fn support_class(&self, e: &CompactSet, rows: usize) -> Result<SupportClass, TableError> {
        let mut boundary = true;
        for n in 1..=rows.min(self.max_row) {
            for z in self.row(n)? {
                if !e.contains(z, 1e-9) {
                    return Err(TableError::OutsideE(z));
                }
                boundary &= e.on_boundary(z, 1e-9);
            }
        }
        Ok(if boundary {
            SupportClass::Boundary
        } else {
            SupportClass::Interior
        })
    }
}

pub fn table_row(t: &TriangularTable, n: usize) -> Result<Vec<Complex64>, TableError> {
    t.row(n)
}

/// `prod_k (z - beta_{n,k})`.
pub fn omega_poly(t: &TriangularTable, n: usize) -> Result<Polynomial, TableError> {
    Ok(Polynomial::from_root_values(&t.row(n)?, Complex64::one()))
}

/// Equal-weight measure on a finite point list (repeats count repeatedly).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretePointMeasure {
    #[serde(with = "cpair::many")]
    points: Vec<Complex64>,
}

impl DiscretePointMeasure {
    /// `None` for an empty point list, which carries no unit measure.
    pub fn new(points: Vec<Complex64>) -> Option<Self> {
        (!points.is_empty()).then_some(Self { points })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.points.len() as f64
    }
}

/// Closed regions for counting-measure masses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Disk { center: Complex64, radius: f64 },
    Annulus { center: Complex64, inner: f64, outer: f64 },
}

impl Region {
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Region::Disk { center, radius } => (z - center).norm() <= radius + BOUNDARY_TOL,
            Region::Annulus { center, inner, outer } => {
                let d = (z - center).norm();
                d >= inner - BOUNDARY_TOL && d <= outer + BOUNDARY_TOL
            }
        }
    }
}

/// Fraction of points in the closed region.
pub fn counting_measure_mass(m: &DiscretePointMeasure, region: &Region) -> f64 {
    m.points.iter().filter(|&&z| region.contains(z)).count() as f64 / m.points.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn row_examples() {
        let t = TriangularTable::roots_of_unity(c(0.0, 0.0), 1.0, 0.0);
        let row = table_row(&t, 4).unwrap();
        for (z, want) in row.iter().zip([c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]) {
            assert!((z - want).norm() < 1e-15);
        }
        let conf = TriangularTable::confluent(c(0.0, 0.0));
        assert_eq!(table_row(&conf, 3).unwrap(), vec![c(0.0, 0.0); 3]);
        let arc = TriangularTable::arc(c(0.0, 0.0), 1.0, [0.0, PI]);
        let row = table_row(&arc, 8).unwrap();
        assert_eq!(row.len(), 8);
        assert!(row
            .iter()
            .all(|z| (0.0..=PI).contains(&z.arg()) && (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn row_out_of_range() {
        let t = TriangularTable::confluent(c(0.0, 0.0)).with_max_row(5);
        assert!(matches!(t.row(0), Err(TableError::OutOfRange { .. })));
        assert!(matches!(t.row(6), Err(TableError::OutOfRange { .. })));
    }

    #[test]
    fn omega_examples() {
        let t = TriangularTable::roots_of_unity(c(0.0, 0.0), 1.0, 0.0);
        let w = omega_poly(&t, 6).unwrap();
        let coeffs = w.coeffs();
        assert!((coeffs[0] + c(1.0, 0.0)).norm() < 1e-14);
        assert!(coeffs[1..6].iter().all(|z| z.norm() < 1e-14));
        assert_eq!(coeffs[6], c(1.0, 0.0));
        let conf = TriangularTable::confluent(c(0.0, 0.0));
        let w = omega_poly(&conf, 3).unwrap();
        assert_eq!(w.coeffs(), &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)][..]);
        let ex = TriangularTable::explicit(vec![vec![c(2.0, 0.0)]]).unwrap();
        assert_eq!(omega_poly(&ex, 1).unwrap().coeffs(), &[c(-2.0, 0.0), c(1.0, 0.0)][..]);
    }

    #[test]
    fn mass_examples() {
        let cube = DiscretePointMeasure::new(
            (0..3)
                .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / 3.0))
                .collect(),
        )
        .unwrap();
        let unit = Region::Disk {
            center: c(0.0, 0.0),
            radius: 1.0,
        };
        assert_eq!(counting_measure_mass(&cube, &unit), 1.0);
        let far = Region::Disk {
            center: c(5.0, 0.0),
            radius: 1.0,
        };
        assert_eq!(counting_measure_mass(&cube, &far), 0.0);
        let two = DiscretePointMeasure::new(vec![c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        let near = Region::Disk {
            center: c(2.0, 0.0),
            radius: 0.5,
        };
        assert_eq!(counting_measure_mass(&two, &near), 0.5);
        let ring = Region::Annulus {
            center: c(0.0, 0.0),
            inner: 2.5,
            outer: 3.0,
        };
        assert_eq!(counting_measure_mass(&two, &ring), 0.5);
    }

    #[test]
    fn csv_rows() {
        let text = "row,k,re,im\n1,1,2.0,0.0\n2,2,0.0,1.0\n2,1,1.0,0.0\n";
        let t = TriangularTable::from_csv(text).unwrap();
        assert_eq!(t.max_row(), 2);
        assert_eq!(t.row(2).unwrap(), vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let bad = "row,k,re,im\n1,1,2.0,0.0\n2,1,1.0,0.0\n";
        assert!(matches!(
            TriangularTable::from_csv(bad),
            Err(TableError::RowSize { row: 2, got: 1 })
        ));
        let garbage = "row,k,re,im\n1,1,abc,0\n";
        assert!(matches!(
            TriangularTable::from_csv(garbage),
            Err(TableError::Csv { line: 2, .. })
        ));
    }

    #[test]
    fn support_classes() {
        let disk = CompactSet::disk(c(0.0, 0.0), 1.0);
        let t = TriangularTable::roots_of_unity(c(0.0, 0.0), 1.0, 0.3);
        assert_eq!(t.support_class(&disk, 32).unwrap(), SupportClass::Boundary);
        let conf = TriangularTable::confluent(c(0.0, 0.0));
        assert_eq!(conf.support_class(&disk, 32).unwrap(), SupportClass::Interior);
        let wide = TriangularTable::roots_of_unity(c(0.0, 0.0), 2.0, 0.0);
        assert!(matches!(wide.support_class(&disk, 4), Err(TableError::OutsideE(_))));
    }

    #[test]
    fn spec_json() {
        let spec: TableSpec = serde_json::from_str(r#"{"kind":"roots_of_unity","center":[0,0],"radius":1.0}"#).unwrap();
        assert_eq!(
            spec,
            TableSpec::RootsOfUnity {
                center: c(0.0, 0.0),
                radius: 1.0,
                rotation: 0.0
            }
        );
        let inline: TableSpec = serde_json::from_str(r#"{"kind":"explicit","rows":[[[2,0]]]}"#).unwrap();
        let t = TriangularTable::from_spec(&inline, Path::new(".")).unwrap();
        assert_eq!(t.row(1).unwrap(), vec![c(2.0, 0.0)]);
    }
}
