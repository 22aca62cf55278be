use std::collections::{BTreeMap, HashMap};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::correlation::kendall_tau_b;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::metrics::SystemEvaluation;
use crate::rng::substream;
use crate::scalar::Real;

/// Per-question proxy scores and human ratings for a set of systems.
/// Matrices are indexed `[system][question]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolData<F = f64> {
    pub systems: Vec<String>,
    pub questions: Vec<String>,
    pub metric: Vec<Vec<F>>,
    pub ratings: Vec<(String, Vec<Vec<F>>)>,
}

impl<F: Real> PoolData<F> {
    pub fn new(
        systems: Vec<String>,
        questions: Vec<String>,
        metric: Vec<Vec<F>>,
        ratings: Vec<(String, Vec<Vec<F>>)>,
    ) -> Result<Self> {
        let shape_ok = |m: &Vec<Vec<F>>| {
            m.len() == systems.len() && m.iter().all(|r| r.len() == questions.len())
        };
        if !shape_ok(&metric) || !ratings.iter().all(|(_, m)| shape_ok(m)) {
            return Err(Error::InvalidArgument(format!(
                "pool matrices must be {} systems x {} questions",
                systems.len(),
                questions.len()
            )));
        }
        Ok(Self {
            systems,
            questions,
            metric,
            ratings,
        })
    }

    /// Joins per-instance evaluations with a per-question ratings CSV
    /// (`system_id,instance_id,<dim>,...`). Questions are the corpus
    /// instances rated for every evaluated system, in corpus order.
    pub fn from_evaluations(
        corpus: &Corpus,
        evaluations: &[SystemEvaluation<F>],
        metric: &str,
        ratings_csv: &str,
    ) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(ratings_csv.as_bytes());
        let header = reader.headers().map_err(Error::csv)?.clone();
        if header.get(0) != Some("system_id") || header.get(1) != Some("instance_id") {
            return Err(Error::InvalidArgument(
                "per-question ratings CSV must start with \"system_id,instance_id\"".into(),
            ));
        }
        let dims: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let mut cells: HashMap<(String, String), Vec<F>> = HashMap::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(Error::csv)?;
            let key = (
                record.get(0).unwrap_or("").to_string(),
                record.get(1).unwrap_or("").to_string(),
            );
            let values = dims
                .iter()
                .enumerate()
                .map(|(j, d)| {
                    let cell = record.get(j + 2).unwrap_or("");
                    cell.parse::<f64>()
                        .map(F::of)
                        .map_err(|_| Error::NonNumeric {
                            record: i + 1,
                            column: d.clone(),
                            value: cell.to_string(),
                        })
                })
                .collect::<Result<Vec<F>>>()?;
            if cells.insert(key.clone(), values).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate rating row for ({:?}, {:?})",
                    key.0, key.1
                )));
            }
        }

        let systems: Vec<String> = evaluations
            .iter()
            .map(|e| e.scores.system_id.clone())
            .collect();
        let questions: Vec<String> = corpus
            .iter()
            .map(|i| i.id.clone())
            .filter(|q| {
                systems
                    .iter()
                    .all(|s| cells.contains_key(&(s.clone(), q.clone())))
            })
            .collect();
        if questions.is_empty() {
            return Err(Error::InvalidArgument(
                "no question is rated for every system".into(),
            ));
        }
        let metric_rows = evaluations
            .iter()
            .map(|e| {
                let by_id: BTreeMap<&str, F> = e
                    .instances
                    .iter()
                    .filter_map(|(id, s)| Some((id.as_str(), s.value(metric)?)))
                    .collect();
                questions
                    .iter()
                    .map(|q| {
                        by_id
                            .get(q.as_str())
                            .copied()
                            .ok_or_else(|| Error::UnknownDimension(metric.to_string()))
                    })
                    .collect::<Result<Vec<F>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let ratings = dims
            .iter()
            .enumerate()
            .map(|(j, d)| {
                let m = systems
                    .iter()
                    .map(|s| {
                        questions
                            .iter()
                            .map(|q| cells[&(s.clone(), q.clone())][j])
                            .collect()
                    })
                    .collect();
                (d.clone(), m)
            })
            .collect();
        Self::new(systems, questions, metric_rows, ratings)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolPoint<F = f64> {
    pub pool_size: usize,
    pub rating: String,
    pub mean_tau: Option<F>,
    /// Population standard deviation over the defined replicates.
    pub sd_tau: Option<F>,
    /// Replicates whose τ was defined.
    pub valid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolCurve<F = f64> {
    pub points: Vec<PoolPoint<F>>,
    /// τ on all questions, per rating.
    pub full: Vec<(String, Option<F>)>,
}

impl<F: Real> PoolCurve<F> {
    pub fn for_rating<'a>(
        &'a self,
        rating: &'a str,
    ) -> impl Iterator<Item = &'a PoolPoint<F>> + 'a {
        self.points.iter().filter(move |p| p.rating == rating)
    }
}

fn subset_tau<F: Real>(metric: &[Vec<F>], rating: &[Vec<F>], subset: &[usize]) -> Option<F> {
    let m = F::of_usize(subset.len());
    let mean = |row: &Vec<F>| subset.iter().map(|&q| row[q]).sum::<F>() / m;
    let x: Vec<F> = metric.iter().map(mean).collect();
    let y: Vec<F> = rating.iter().map(mean).collect();
    kendall_tau_b(&x, &y).ok().map(|r| r.coefficient)
}

/// Mean and population SD computed from deviations to the first value, so a
/// constant sample yields exactly that value and zero spread.
fn mean_sd<F: Real>(values: &[F]) -> Option<(F, F)> {
    let first = *values.first()?;
    let n = F::of_usize(values.len());
    let d: Vec<F> = values.iter().map(|&v| v - first).collect();
    let md = d.iter().copied().sum::<F>() / n;
    let var = (d.iter().map(|&v| v * v).sum::<F>() / n - md * md).max(F::zero());
    Some((first + md, var.sqrt()))
}

/// For every pool size, draws `repeats` question subsets without replacement,
/// recomputes per-system means of the metric and of each rating on the subset
/// and records τ-b between them.
pub fn question_pool_simulation<F: Real>(
    data: &PoolData<F>,
    pool_sizes: &[usize],
    repeats: usize,
    seed: u64,
) -> Result<PoolCurve<F>> {
    let q = data.questions.len();
    if let Some(&bad) = pool_sizes.iter().find(|&&m| m == 0 || m > q) {
        return Err(Error::InvalidArgument(format!(
            "pool size {bad} outside 1..={q}"
        )));
    }
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    let all: Vec<usize> = (0..q).collect();
    let full = data
        .ratings
        .iter()
        .map(|(name, r)| (name.clone(), subset_tau(&data.metric, r, &all)))
        .collect();

    let mut points = Vec::new();
    for &size in pool_sizes {
        let samples: Vec<Vec<usize>> = (0..repeats)
            .map(|rep| {
                let mut rng = substream(
                    seed,
                    &[
                        b"pool",
                        &(size as u64).to_le_bytes(),
                        &(rep as u64).to_le_bytes(),
                    ],
                );
                let mut s = index::sample(&mut rng, q, size).into_vec();
                s.sort_unstable();
                s
            })
            .collect();
        for (name, rating) in &data.ratings {
            let taus: Vec<F> = samples
                .iter()
                .filter_map(|s| subset_tau(&data.metric, rating, s))
                .collect();
            let stats = mean_sd(&taus);
            points.push(PoolPoint {
                pool_size: size,
                rating: name.clone(),
                mean_tau: stats.map(|s| s.0),
                sd_tau: stats.map(|s| s.1),
                valid: taus.len(),
            });
        }
    }
    Ok(PoolCurve { points, full })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monotone(systems: usize, questions: usize) -> PoolData<f64> {
        let metric = (0..systems)
            .map(|s| {
                (0..questions)
                    .map(|q| s as f64 * 10.0 + (q % 3) as f64)
                    .collect()
            })
            .collect();
        let rating = (0..systems)
            .map(|s| {
                (0..questions)
                    .map(|q| s as f64 + (q % 5) as f64 * 0.1)
                    .collect()
            })
            .collect();
        PoolData::new(
            (0..systems).map(|s| format!("s{s}")).collect(),
            (0..questions).map(|q| format!("q{q}")).collect(),
            metric,
            vec![("utility".into(), rating)],
        )
        .unwrap()
    }

    #[test]
    fn exhaustive_pool_has_no_spread() {
        let d = monotone(5, 12);
        let curve = question_pool_simulation(&d, &[12], 7, 1).unwrap();
        let p = &curve.points[0];
        assert_eq!(p.sd_tau, Some(0.0));
        assert_eq!(p.mean_tau, curve.full[0].1);
        assert_eq!(p.valid, 7);
    }

    #[test]
    fn monotone_link_is_perfect_everywhere() {
        let d = monotone(6, 30);
        let curve = question_pool_simulation(&d, &[1, 5, 30], 20, 4).unwrap();
        for p in &curve.points {
            assert_eq!((p.mean_tau, p.sd_tau), (Some(1.0), Some(0.0)));
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        let d = monotone(3, 4);
        assert!(question_pool_simulation(&d, &[5], 1, 0).is_err());
        assert!(question_pool_simulation(&d, &[0], 1, 0).is_err());
        assert!(question_pool_simulation(&d, &[2], 0, 0).is_err());
    }

    #[test]
    fn mean_sd_of_constant() {
        assert_eq!(mean_sd(&[0.3, 0.3, 0.3]), Some((0.3, 0.0)));
        let (m, s) = mean_sd(&[1.0, 3.0]).unwrap();
        assert_eq!((m, s), (2.0, 1.0));
    }
}
