//! Systems × dimensions value tables shared by proxy scores and human ratings.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, Error, Result};

/// Whether larger or smaller values are preferable on a dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Higher,
    Lower,
}

impl Direction {
    /// Orders `a` relative to `b` so that `Greater` always means "a is better".
    pub fn compare<T: PartialOrd>(self, a: &T, b: &T) -> Option<std::cmp::Ordering> {
        let ord = a.partial_cmp(b)?;
        Some(match self {
            Direction::Higher => ord,
            Direction::Lower => ord.reverse(),
        })
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Higher => "higher",
            Direction::Lower => "lower",
        })
    }
}

/// One entry of a direction spec file: `{"name": "...", "direction": "higher"|"lower"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub name: String,
    pub direction: Direction,
}

pub fn parse_direction_spec(text: &str) -> Result<Vec<DimensionSpec>> {
    let specs: Vec<DimensionSpec> =
        serde_json::from_str(text).map_err(|e| Error::json(text, &e))?;
    let mut seen = HashSet::new();
    for spec in &specs {
        if !seen.insert(spec.name.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "direction declared twice for {:?}",
                spec.name
            )));
        }
    }
    Ok(specs)
}

pub fn load_direction_spec(path: impl AsRef<Path>) -> Result<Vec<DimensionSpec>> {
    parse_direction_spec(&read_to_string(path.as_ref())?)
}

/// A dense systems × dimensions table. Cells may be absent (e.g. a system that
/// produced no supporting facts has no SP scores); rating tables reject absent
/// cells at load time.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<T = f64> {
    systems: Vec<String>,
    dimensions: Vec<String>,
    directions: Vec<Direction>,
    values: Vec<Vec<Option<T>>>,
}

impl<T> Table<T> {
    pub fn new(
        systems: Vec<String>,
        dimensions: Vec<String>,
        directions: Vec<Direction>,
        values: Vec<Vec<Option<T>>>,
    ) -> Result<Self> {
        if dimensions.len() != directions.len() {
            return Err(Error::DimensionMismatch {
                left: dimensions.len(),
                right: directions.len(),
            });
        }
        if systems.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} systems but {} value rows",
                systems.len(),
                values.len()
            )));
        }
        for row in &values {
            if row.len() != dimensions.len() {
                return Err(Error::DimensionMismatch {
                    left: dimensions.len(),
                    right: row.len(),
                });
            }
        }
        let mut seen = HashSet::new();
        for s in &systems {
            if !seen.insert(s.as_str()) {
                return Err(Error::DuplicateSystem(s.clone()));
            }
        }
        let mut seen = HashSet::new();
        for d in &dimensions {
            if !seen.insert(d.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate dimension {d:?}")));
            }
        }
        Ok(Self {
            systems,
            dimensions,
            directions,
            values,
        })
    }

    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    pub fn dimensions(&self) -> &[String] {
        &self.dimensions
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn rows(&self) -> &[Vec<Option<T>>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn dimension_index(&self, name: &str) -> Result<usize> {
        self.dimensions
            .iter()
            .position(|d| d == name)
            .ok_or_else(|| Error::UnknownDimension(name.to_string()))
    }

    pub fn system_index(&self, system: &str) -> Option<usize> {
        self.systems.iter().position(|s| s == system)
    }

    pub fn direction(&self, name: &str) -> Result<Direction> {
        Ok(self.directions[self.dimension_index(name)?])
    }

    pub fn get(&self, system: &str, dimension: &str) -> Option<&T> {
        let row = self.system_index(system)?;
        let col = self.dimensions.iter().position(|d| d == dimension)?;
        self.values[row][col].as_ref()
    }

    /// Direction map keyed by dimension name.
    pub fn direction_map(&self) -> BTreeMap<String, Direction> {
        self.dimensions
            .iter()
            .cloned()
            .zip(self.directions.iter().copied())
            .collect()
    }
}

impl<T: Clone> Table<T> {
    pub fn column(&self, name: &str) -> Result<Vec<Option<T>>> {
        let col = self.dimension_index(name)?;
        Ok(self.values.iter().map(|row| row[col].clone()).collect())
    }

    /// Keeps only `dims`, in the given order.
    pub fn select(&self, dims: &[String]) -> Result<Self> {
        let idx = dims
            .iter()
            .map(|d| self.dimension_index(d))
            .collect::<Result<Vec<_>>>()?;
        Table::new(
            self.systems.clone(),
            dims.to_vec(),
            idx.iter().map(|&i| self.directions[i]).collect(),
            self.values
                .iter()
                .map(|row| idx.iter().map(|&i| row[i].clone()).collect())
                .collect(),
        )
    }

    /// Column-wise union of two tables over the systems present in both, in
    /// the order of `self`.
    pub fn inner_join(&self, other: &Table<T>) -> Result<Self> {
        let pos: HashMap<&str, usize> = other
            .systems
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut systems = Vec::new();
        let mut values = Vec::new();
        for (i, s) in self.systems.iter().enumerate() {
            if let Some(&j) = pos.get(s.as_str()) {
                systems.push(s.clone());
                let mut row = self.values[i].clone();
                row.extend(other.values[j].iter().cloned());
                values.push(row);
            }
        }
        let mut dimensions = self.dimensions.clone();
        dimensions.extend(other.dimensions.iter().cloned());
        let mut directions = self.directions.clone();
        directions.extend(other.directions.iter().copied());
        Table::new(systems, dimensions, directions, values)
    }
}

/// Options controlling how a CSV table is read.
#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    /// Accept empty cells as absent values instead of failing.
    pub allow_missing: bool,
}

impl<T> Table<T>
where
    T: FromStr,
{
    /// Reads `system_id,<dim1>,<dim2>,...` CSV text. With `directions = None`
    /// every dimension is treated as higher-is-better.
    pub fn from_csv_str(
        text: &str,
        directions: Option<&[DimensionSpec]>,
        options: CsvOptions,
    ) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(Error::csv)?.clone();
        let mut columns = header.iter();
        match columns.next() {
            Some("system_id") => {}
            other => {
                return Err(Error::InvalidArgument(format!(
                    "first CSV column must be \"system_id\", found {:?}",
                    other.unwrap_or("")
                )))
            }
        }
        let dimensions: Vec<String> = columns.map(str::to_string).collect();
        let dirs = match directions {
            Some(spec) => dimensions
                .iter()
                .map(|d| {
                    spec.iter()
                        .find(|s| &s.name == d)
                        .map(|s| s.direction)
                        .ok_or_else(|| Error::UndeclaredDimension(d.clone()))
                })
                .collect::<Result<Vec<_>>>()?,
            None => vec![Direction::Higher; dimensions.len()],
        };
        let mut systems = Vec::new();
        let mut values = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(Error::csv)?;
            let row_no = i + 1;
            let system = record.get(0).unwrap_or("").to_string();
            if system.is_empty() {
                return Err(Error::MissingCell {
                    record: row_no,
                    column: "system_id".into(),
                });
            }
            let mut row = Vec::with_capacity(dimensions.len());
            for (j, dim) in dimensions.iter().enumerate() {
                let cell = record.get(j + 1).unwrap_or("");
                if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
                    if options.allow_missing {
                        row.push(None);
                        continue;
                    }
                    return Err(Error::MissingCell {
                        record: row_no,
                        column: dim.clone(),
                    });
                }
                let value = cell.parse::<T>().map_err(|_| Error::NonNumeric {
                    record: row_no,
                    column: dim.clone(),
                    value: cell.to_string(),
                })?;
                row.push(Some(value));
            }
            systems.push(system);
            values.push(row);
        }
        Table::new(systems, dimensions, dirs, values)
    }

    pub fn load_csv(
        path: impl AsRef<Path>,
        directions: Option<&[DimensionSpec]>,
        options: CsvOptions,
    ) -> Result<Self> {
        Self::from_csv_str(&read_to_string(path.as_ref())?, directions, options)
    }
}

impl<T: fmt::Display> Table<T> {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("system_id");
        for d in &self.dimensions {
            out.push(',');
            out.push_str(&csv_field(d));
        }
        out.push('\n');
        for (s, row) in self.systems.iter().zip(&self.values) {
            out.push_str(&csv_field(s));
            for v in row {
                out.push(',');
                if let Some(v) = v {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn direction_spec(&self) -> Vec<DimensionSpec> {
        self.dimensions
            .iter()
            .zip(&self.directions)
            .map(|(name, &direction)| DimensionSpec {
                name: name.clone(),
                direction,
            })
            .collect()
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
