//! Exploratory factor analysis: factor-count selection (Kaiser, parallel
//! analysis), principal-component extraction and varimax rotation.

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::linalg::{identity, symmetric_eigen, Matrix};
use crate::error::{read_to_string, Error, Result};
use crate::rng::substream;
use crate::scalar::Real;

/// Samples × variables observations.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<F = f64> {
    pub names: Vec<String>,
    pub rows: Vec<Vec<F>>,
}

impl<F: Real> DataMatrix<F> {
    pub fn new(names: Vec<String>, rows: Vec<Vec<F>>) -> Result<Self> {
        for row in &rows {
            if row.len() != names.len() {
                return Err(Error::DimensionMismatch {
                    left: names.len(),
                    right: row.len(),
                });
            }
        }
        Ok(Self { names, rows })
    }

    /// Numeric CSV with a header row. A leading `system_id` column is
    /// treated as a row label and dropped.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(Error::csv)?.clone();
        let skip = usize::from(header.get(0) == Some("system_id"));
        let names: Vec<String> = header.iter().skip(skip).map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(Error::csv)?;
            let row = names
                .iter()
                .enumerate()
                .map(|(j, name)| {
                    let cell = record.get(j + skip).unwrap_or("");
                    if cell.is_empty() {
                        return Err(Error::MissingCell {
                            record: i + 1,
                            column: name.clone(),
                        });
                    }
                    cell.parse::<f64>()
                        .map(F::of)
                        .map_err(|_| Error::NonNumeric {
                            record: i + 1,
                            column: name.clone(),
                            value: cell.to_string(),
                        })
                })
                .collect::<Result<Vec<F>>>()?;
            rows.push(row);
        }
        Self::new(names, rows)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_str(&read_to_string(path.as_ref())?)
    }

    pub fn samples(&self) -> usize {
        self.rows.len()
    }

    pub fn variables(&self) -> usize {
        self.names.len()
    }
}

/// Pearson correlation matrix of the variables.
pub fn correlation_of<F: Real>(data: &DataMatrix<F>) -> Result<Matrix<F>> {
    let (n, p) = (data.samples(), data.variables());
    if p < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 variables, got {p}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    let nf = F::of_usize(n);
    let mut centered = vec![vec![F::zero(); n]; p];
    for j in 0..p {
        let mean = data.rows.iter().map(|r| r[j]).sum::<F>() / nf;
        let col: Vec<F> = data.rows.iter().map(|r| r[j] - mean).collect();
        let norm = col.iter().map(|&v| v * v).sum::<F>().sqrt();
        if norm == F::zero() {
            return Err(Error::ConstantColumn(data.names[j].clone()));
        }
        centered[j] = col.into_iter().map(|v| v / norm).collect();
    }
    let mut r = identity::<F>(p);
    for a in 0..p {
        for b in a + 1..p {
            let c: F = centered[a]
                .iter()
                .zip(&centered[b])
                .map(|(&x, &y)| x * y)
                .sum();
            let c = c.max(-F::one()).min(F::one());
            r[a][b] = c;
            r[b][a] = c;
        }
    }
    Ok(r)
}

fn sample_eigenvalues<F: Real>(data: &DataMatrix<F>) -> Result<Vec<F>> {
    Ok(symmetric_eigen(&correlation_of(data)?).0)
}

/// Kaiser criterion: number of correlation-matrix eigenvalues strictly above 1.
pub fn kaiser_count<F: Real>(data: &DataMatrix<F>) -> Result<usize> {
    Ok(sample_eigenvalues(data)?
        .into_iter()
        .filter(|&e| e > F::one())
        .count())
}

/// Mean eigenvalues (descending, per index) of `replicates` standard-normal
/// datasets of shape `samples × variables`. Replicate `r` draws from its own
/// substream, so results do not depend on evaluation order.
pub fn random_eigenvalue_means<F: Real>(
    samples: usize,
    variables: usize,
    replicates: usize,
    seed: u64,
) -> Result<Vec<F>> {
    let mut sums = vec![F::zero(); variables];
    let names: Vec<String> = (0..variables).map(|j| format!("v{j}")).collect();
    for r in 0..replicates {
        let mut rng = substream(seed, &[b"parallel-analysis", &(r as u64).to_le_bytes()]);
        let rows = (0..samples)
            .map(|_| {
                (0..variables)
                    .map(|_| F::of(rng.sample::<f64, _>(StandardNormal)))
                    .collect()
            })
            .collect();
        let eig = sample_eigenvalues(&DataMatrix::new(names.clone(), rows)?)?;
        for (s, e) in sums.iter_mut().zip(eig) {
            *s = *s + e;
        }
    }
    let n = F::of_usize(replicates);
    Ok(sums.into_iter().map(|s| s / n).collect())
}

/// Horn's parallel analysis with the mean rule: the number of leading sample
/// eigenvalues that exceed the mean eigenvalue at the same index.
pub fn parallel_analysis<F: Real>(
    data: &DataMatrix<F>,
    replicates: usize,
    seed: u64,
) -> Result<usize> {
    if replicates == 0 {
        return Err(Error::InvalidArgument(
            "replicates must be at least 1".into(),
        ));
    }
    let sample = sample_eigenvalues(data)?;
    let reference =
        random_eigenvalue_means::<F>(data.samples(), data.variables(), replicates, seed)?;
    Ok(sample
        .iter()
        .zip(&reference)
        .take_while(|(s, r)| s > r)
        .count())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarimaxConfig {
    /// Stop once a sweep changes the varimax criterion by less than this.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Kaiser row normalization.
    pub normalize: bool,
}

impl Default for VarimaxConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_sweeps: 100,
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rotation<F = f64> {
    pub loadings: Matrix<F>,
    /// Orthogonal k × k matrix with `rotated = unrotated · rotation`.
    pub rotation: Matrix<F>,
    pub sweeps: usize,
}

fn varimax_criterion<F: Real>(x: &Matrix<F>, k: usize) -> F {
    let p = F::of_usize(x.len());
    (0..k)
        .map(|j| {
            let sq: F = x.iter().map(|r| r[j] * r[j]).sum();
            let qu: F = x.iter().map(|r| r[j].powi(4)).sum();
            qu / p - (sq / p) * (sq / p)
        })
        .sum()
}

fn rotate_columns<F: Real>(m: &mut Matrix<F>, j: usize, l: usize, c: F, s: F) {
    for row in m.iter_mut() {
        let (a, b) = (row[j], row[l]);
        row[j] = a * c + b * s;
        row[l] = b * c - a * s;
    }
}

/// Orthogonal varimax rotation by successive planar rotations of factor pairs.
pub fn varimax<F: Real>(loadings: &Matrix<F>, config: VarimaxConfig) -> Result<Rotation<F>> {
    let p = loadings.len();
    let k = loadings.first().map_or(0, Vec::len);
    let norms: Vec<F> = loadings
        .iter()
        .map(|r| {
            let h = r.iter().map(|&v| v * v).sum::<F>().sqrt();
            if config.normalize && h > F::zero() {
                h
            } else {
                F::one()
            }
        })
        .collect();
    let mut x: Matrix<F> = loadings
        .iter()
        .zip(&norms)
        .map(|(r, &h)| r.iter().map(|&v| v / h).collect())
        .collect();
    let mut rotation = identity::<F>(k);
    let pf = F::of_usize(p);
    let tol = F::of(config.tolerance);
    let two = F::of(2.0);

    let mut criterion = varimax_criterion(&x, k);
    let mut sweeps = 0;
    loop {
        if sweeps == config.max_sweeps {
            return Err(Error::NotConverged(config.max_sweeps));
        }
        sweeps += 1;
        for j in 0..k {
            for l in j + 1..k {
                let (mut a, mut b, mut c, mut d) = (F::zero(), F::zero(), F::zero(), F::zero());
                for row in &x {
                    let u = row[j] * row[j] - row[l] * row[l];
                    let v = two * row[j] * row[l];
                    a = a + u;
                    b = b + v;
                    c = c + u * u - v * v;
                    d = d + two * u * v;
                }
                let num = d - two * a * b / pf;
                let den = c - (a * a - b * b) / pf;
                let phi = num.atan2(den) / F::of(4.0);
                if phi.abs() <= F::epsilon() {
                    continue;
                }
                let (s, cs) = phi.sin_cos();
                rotate_columns(&mut x, j, l, cs, s);
                rotate_columns(&mut rotation, j, l, cs, s);
            }
        }
        let next = varimax_criterion(&x, k);
        let change = (next - criterion).abs();
        criterion = next;
        if change < tol {
            break;
        }
    }
    let loadings = x
        .into_iter()
        .zip(&norms)
        .map(|(r, &h)| r.into_iter().map(|v| v * h).collect())
        .collect();
    Ok(Rotation {
        loadings,
        rotation,
        sweeps,
    })
}

/// Rotated k-factor solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorModel<F = f64> {
    pub variables: Vec<String>,
    pub k: usize,
    /// All eigenvalues of the correlation matrix, descending.
    pub eigenvalues: Vec<F>,
    pub unrotated: Matrix<F>,
    /// Variables × k rotated loadings.
    pub loadings: Matrix<F>,
    pub rotation: Matrix<F>,
    /// Sum of squared rotated loadings per factor.
    pub explained_variance: Vec<F>,
    /// Factor (0-based) with the largest absolute loading, per variable.
    pub assignments: Vec<usize>,
}

impl<F: Real> FactorModel<F> {
    /// Row sums of squared loadings.
    pub fn communalities(&self) -> Vec<F> {
        communalities(&self.loadings)
    }
}

pub(crate) fn communalities<F: Real>(m: &Matrix<F>) -> Vec<F> {
    m.iter().map(|r| r.iter().map(|&v| v * v).sum()).collect()
}

/// Principal-component extraction of `k` factors from the correlation matrix
/// followed by Kaiser-normalized varimax. Factors are reordered by explained
/// variance and signed so each factor's largest-magnitude loading is positive.
pub fn extract_and_rotate<F: Real>(data: &DataMatrix<F>, k: usize) -> Result<FactorModel<F>> {
    extract_and_rotate_with(data, k, VarimaxConfig::default())
}

pub fn extract_and_rotate_with<F: Real>(
    data: &DataMatrix<F>,
    k: usize,
    config: VarimaxConfig,
) -> Result<FactorModel<F>> {
    let p = data.variables();
    if k == 0 || k > p {
        return Err(Error::InvalidArgument(format!(
            "factor count must be in 1..={p}, got {k}"
        )));
    }
    let (eigenvalues, vectors) = symmetric_eigen(&correlation_of(data)?);
    let unrotated: Matrix<F> = (0..p)
        .map(|i| {
            (0..k)
                .map(|j| vectors[i][j] * eigenvalues[j].max(F::zero()).sqrt())
                .collect()
        })
        .collect();
    let Rotation {
        mut loadings,
        mut rotation,
        ..
    } = varimax(&unrotated, config)?;

    for j in 0..k {
        let peak = loadings.iter().map(|r| r[j]).fold(F::zero(), |best, v| {
            if v.abs() > best.abs() {
                v
            } else {
                best
            }
        });
        if peak < F::zero() {
            loadings.iter_mut().for_each(|r| r[j] = -r[j]);
            rotation.iter_mut().for_each(|r| r[j] = -r[j]);
        }
    }
    let variance: Vec<F> = (0..k)
        .map(|j| loadings.iter().map(|r| r[j] * r[j]).sum())
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        variance[b]
            .partial_cmp(&variance[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let permute = |m: &Matrix<F>| -> Matrix<F> {
        m.iter()
            .map(|r| order.iter().map(|&j| r[j]).collect())
            .collect()
    };
    let loadings = permute(&loadings);
    let rotation = permute(&rotation);
    let explained_variance = order.iter().map(|&j| variance[j]).collect();
    let assignments = loadings
        .iter()
        .map(|r| {
            (0..k).fold(
                0,
                |best, j| if r[j].abs() > r[best].abs() { j } else { best },
            )
        })
        .collect();
    Ok(FactorModel {
        variables: data.names.clone(),
        k,
        eigenvalues,
        unrotated,
        loadings,
        rotation,
        explained_variance,
        assignments,
    })
}
