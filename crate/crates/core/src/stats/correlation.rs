use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::table::Table;

/// How a p-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    /// Normal approximation with tie-corrected variance.
    NormalApprox,
    /// t approximation with n − 2 degrees of freedom.
    StudentT,
    /// Full permutation enumeration.
    Exact,
    /// Too few pairs for any test; p is reported as 1.
    Insufficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult<F = f64> {
    pub coefficient: F,
    pub n: usize,
    pub p_raw: F,
    pub p_adjusted: Option<F>,
    pub p_method: PValueMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    Kendall,
    Spearman,
}

impl fmt::Display for CorrelationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationMethod::Kendall => "kendall",
            CorrelationMethod::Spearman => "spearman",
        })
    }
}

impl std::str::FromStr for CorrelationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kendall" => Ok(CorrelationMethod::Kendall),
            "spearman" => Ok(CorrelationMethod::Spearman),
            _ => Err(Error::InvalidArgument(format!(
                "unknown correlation method {s:?}"
            ))),
        }
    }
}

fn check_pairs<F: Real>(x: &[F], y: &[F]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 2 pairs, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::UndefinedCorrelation("input contains NaN".into()));
    }
    Ok(())
}

/// Sizes of groups of exactly equal values.
fn tie_groups<F: Real>(v: &[F]) -> Vec<u64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mut groups = Vec::new();
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            if run > 1 {
                groups.push(run);
            }
            run = 1;
        }
    }
    if run > 1 {
        groups.push(run);
    }
    groups
}

fn sign<F: Real>(d: F) -> i8 {
    if d > F::zero() {
        1
    } else if d < F::zero() {
        -1
    } else {
        0
    }
}

/// (concordant − discordant, pairs tied in x, pairs tied in y, total pairs).
fn pair_counts<F: Real>(x: &[F], y: &[F]) -> (i64, i64, i64, i64) {
    let n = x.len();
    let (mut s, mut tx, mut ty) = (0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = sign(x[i] - x[j]);
            let dy = sign(y[i] - y[j]);
            if dx == 0 {
                tx += 1;
            }
            if dy == 0 {
                ty += 1;
            }
            s += i64::from(dx * dy);
        }
    }
    let n = n as i64;
    (s, tx, ty, n * (n - 1) / 2)
}

fn tau_b_value<F: Real>(x: &[F], y: &[F]) -> Result<F> {
    let (s, tx, ty, n0) = pair_counts(x, y);
    let denom = ((n0 - tx) as f64) * ((n0 - ty) as f64);
    if denom == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input".into()));
    }
    Ok(F::of(s as f64) / F::of(denom).sqrt())
}

/// Kendall's τ-b over all pairs with tie corrections, plus a two-sided p-value
/// from the normal approximation with tie-adjusted variance.
pub fn kendall_tau_b<F: Real>(x: &[F], y: &[F]) -> Result<CorrelationResult<F>> {
    check_pairs(x, y)?;
    let coefficient = tau_b_value(x, y)?;
    let (s, ..) = pair_counts(x, y);

    let n = x.len() as f64;
    let tx: Vec<f64> = tie_groups(x).into_iter().map(|t| t as f64).collect();
    let ty: Vec<f64> = tie_groups(y).into_iter().map(|t| t as f64).collect();
    let sum = |g: &[f64], f: &dyn Fn(f64) -> f64| g.iter().map(|&t| f(t)).sum::<f64>();
    let v0 = n * (n - 1.0) * (2.0 * n + 5.0);
    let vt = sum(&tx, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = sum(&ty, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let v1 = sum(&tx, &|t| t * (t - 1.0)) * sum(&ty, &|t| t * (t - 1.0)) / (2.0 * n * (n - 1.0));
    let v2 = if n > 2.0 {
        sum(&tx, &|t| t * (t - 1.0) * (t - 2.0)) * sum(&ty, &|t| t * (t - 1.0) * (t - 2.0))
            / (9.0 * n * (n - 1.0) * (n - 2.0))
    } else {
        0.0
    };
    let var = (v0 - vt - vu) / 18.0 + v1 + v2;
    let p = if var > 0.0 {
        let z = (s as f64) / var.sqrt();
        erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(CorrelationResult {
        coefficient,
        n: x.len(),
        p_raw: F::of(p),
        p_adjusted: None,
        p_method: PValueMethod::NormalApprox,
    })
}

/// Largest input size accepted by [`kendall_tau_b_exact_p`] (8! permutations).
pub const EXACT_MAX_N: usize = 8;

/// Kendall's τ-b with an exact two-sided permutation p-value: the share of all
/// orderings of `y` whose |τ-b| reaches the observed |τ-b|.
pub fn kendall_tau_b_exact_p<F: Real>(x: &[F], y: &[F]) -> Result<CorrelationResult<F>> {
    check_pairs(x, y)?;
    if x.len() > EXACT_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "exact enumeration supports n <= {EXACT_MAX_N}, got {}",
            x.len()
        )));
    }
    let observed = tau_b_value(x, y)?;
    let threshold = observed.abs() - F::of(1e-12);
    let mut perm = y.to_vec();
    let (mut hits, mut total) = (0u64, 0u64);
    heap_permutations(&mut perm, &mut |p| {
        total += 1;
        if tau_b_value(x, p)
            .map(|t| t.abs() >= threshold)
            .unwrap_or(false)
        {
            hits += 1;
        }
    });
    Ok(CorrelationResult {
        coefficient: observed,
        n: x.len(),
        p_raw: F::of(hits as f64 / total as f64),
        p_adjusted: None,
        p_method: PValueMethod::Exact,
    })
}

fn heap_permutations<T>(v: &mut [T], visit: &mut dyn FnMut(&[T])) {
    let n = v.len();
    let mut c = vec![0usize; n];
    visit(v);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                v.swap(0, i);
            } else {
                v.swap(c[i], i);
            }
            visit(v);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Mid-ranks (1-based, ties share their average rank).
pub(crate) fn mid_ranks<F: Real>(v: &[F]) -> Vec<F> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![F::zero(); v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = F::of((i + j) as f64 / 2.0 + 1.0);
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson<F: Real>(x: &[F], y: &[F]) -> Option<F> {
    let n = F::of_usize(x.len());
    let mx = x.iter().copied().sum::<F>() / n;
    let my = y.iter().copied().sum::<F>() / n;
    let (mut sxy, mut sxx, mut syy) = (F::zero(), F::zero(), F::zero());
    for (&a, &b) in x.iter().zip(y) {
        sxy = sxy + (a - mx) * (b - my);
        sxx = sxx + (a - mx) * (a - mx);
        syy = syy + (b - my) * (b - my);
    }
    if sxx == F::zero() || syy == F::zero() {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).max(-F::one()).min(F::one()))
}

/// Spearman's ρ: Pearson correlation of mid-ranks, with a t-approximation p-value.
pub fn spearman_rho<F: Real>(x: &[F], y: &[F]) -> Result<CorrelationResult<F>> {
    check_pairs(x, y)?;
    let rho = pearson(&mid_ranks(x), &mid_ranks(y))
        .ok_or_else(|| Error::UndefinedCorrelation("constant input".into()))?;
    let n = x.len();
    let (p, method) = if n < 3 {
        (1.0, PValueMethod::Insufficient)
    } else {
        let r = rho.as_f64();
        let df = (n - 2) as f64;
        let p = if r.abs() >= 1.0 {
            0.0
        } else {
            let t = r * (df / (1.0 - r * r)).sqrt();
            let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
            (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0)
        };
        (p, PValueMethod::StudentT)
    };
    Ok(CorrelationResult {
        coefficient: rho,
        n,
        p_raw: F::of(p),
        p_adjusted: None,
        p_method: method,
    })
}

/// Bonferroni adjustment `min(1, p·m)` for a family of `m` tests.
///
/// Panics if `m` is smaller than the number of p-values.
pub fn bonferroni<F: Real>(p_values: &[F], m: usize) -> Vec<F> {
    assert!(
        m >= p_values.len(),
        "family size {m} smaller than {} tests",
        p_values.len()
    );
    let m = F::of_usize(m);
    p_values.iter().map(|&p| (p * m).min(F::one())).collect()
}

/// Metric × rating correlations. Undefined cells (constant columns, fewer than
/// two complete pairs) are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix<F = f64> {
    pub method: CorrelationMethod,
    pub metrics: Vec<String>,
    pub ratings: Vec<String>,
    pub cells: Vec<Vec<Option<CorrelationResult<F>>>>,
    pub systems: Vec<String>,
}

impl<F: Real> CorrelationMatrix<F> {
    pub fn get(&self, metric: &str, rating: &str) -> Option<&CorrelationResult<F>> {
        let i = self.metrics.iter().position(|m| m == metric)?;
        let j = self.ratings.iter().position(|r| r == rating)?;
        self.cells[i][j].as_ref()
    }
}

pub(crate) fn correlate<F: Real>(
    x: &[F],
    y: &[F],
    method: CorrelationMethod,
) -> Result<CorrelationResult<F>> {
    match method {
        CorrelationMethod::Kendall => kendall_tau_b(x, y),
        CorrelationMethod::Spearman => spearman_rho(x, y),
    }
}

/// Correlates every score column with every rating column over the systems
/// present in both tables. The Bonferroni family is the whole matrix.
pub fn correlation_matrix<F: Real>(
    scores: &Table<F>,
    ratings: &Table<F>,
    method: CorrelationMethod,
) -> Result<CorrelationMatrix<F>> {
    let rating_rows: HashMap<&str, usize> = ratings
        .systems()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let joined: Vec<(usize, usize)> = scores
        .systems()
        .iter()
        .enumerate()
        .filter_map(|(i, s)| rating_rows.get(s.as_str()).map(|&j| (i, j)))
        .collect();
    if joined.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 systems present in both tables, found {}",
            joined.len()
        )));
    }

    let mut cells = Vec::with_capacity(scores.dimensions().len());
    for m in 0..scores.dimensions().len() {
        let mut row = Vec::with_capacity(ratings.dimensions().len());
        for r in 0..ratings.dimensions().len() {
            let (x, y): (Vec<F>, Vec<F>) = joined
                .iter()
                .filter_map(|&(i, j)| Some((scores.rows()[i][m]?, ratings.rows()[j][r]?)))
                .unzip();
            row.push(correlate(&x, &y, method).ok());
        }
        cells.push(row);
    }

    let family = scores.dimensions().len() * ratings.dimensions().len();
    for cell in cells.iter_mut().flatten().flatten() {
        cell.p_adjusted = Some(bonferroni(&[cell.p_raw], family)[0]);
    }
    Ok(CorrelationMatrix {
        method,
        metrics: scores.dimensions().to_vec(),
        ratings: ratings.dimensions().to_vec(),
        cells,
        systems: joined
            .iter()
            .map(|&(i, _)| scores.systems()[i].clone())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tau_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(kendall_tau_b(&x, &x).unwrap().coefficient, 1.0);
        assert_eq!(
            kendall_tau_b(&x, &[4.0, 3.0, 2.0, 1.0])
                .unwrap()
                .coefficient,
            -1.0
        );
        assert_abs_diff_eq!(
            kendall_tau_b(&x, &[1.0, 3.0, 2.0, 4.0])
                .unwrap()
                .coefficient,
            4.0 / 6.0,
            epsilon = 1e-15
        );
        assert!(matches!(
            kendall_tau_b(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(kendall_tau_b(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn tau_p_value_without_ties() {
        // n = 10, S = 45 (perfect): var = n(n-1)(2n+5)/18 = 125, z = 45/sqrt(125)
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let r = kendall_tau_b(&x, &x).unwrap();
        let z: f64 = 45.0 / 125f64.sqrt();
        assert_abs_diff_eq!(r.p_raw, erfc(z / std::f64::consts::SQRT_2), epsilon = 1e-15);
        assert!(r.p_raw < 1e-4);
    }

    #[test]
    fn exact_p_matches_enumeration() {
        // For n = 4 without ties, |τ| = 1 occurs for 2 of 24 orderings.
        let x = [1.0, 2.0, 3.0, 4.0];
        let r = kendall_tau_b_exact_p(&x, &x).unwrap();
        assert_abs_diff_eq!(r.p_raw, 2.0 / 24.0, epsilon = 1e-15);
        assert_eq!(r.p_method, PValueMethod::Exact);
        assert!(kendall_tau_b_exact_p(&[0.0; 9], &[0.0; 9]).is_err());
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0];
        assert_abs_diff_eq!(
            spearman_rho(&x, &x).unwrap().coefficient,
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            spearman_rho(&x, &[3.0, 2.0, 1.0]).unwrap().coefficient,
            -1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            spearman_rho(&x, &[1.0, 3.0, 2.0]).unwrap().coefficient,
            0.5,
            epsilon = 1e-15
        );
        assert!(spearman_rho(&[2.0, 2.0], &[1.0, 3.0]).is_err());
    }

    #[test]
    fn mid_ranks_average_ties() {
        assert_eq!(
            mid_ranks(&[10.0, 20.0, 20.0, 5.0]),
            vec![2.0, 3.5, 3.5, 1.0]
        );
    }

    #[test]
    fn bonferroni_examples() {
        assert_abs_diff_eq!(bonferroni(&[0.01], 10)[0], 0.1, epsilon = 1e-15);
        assert_eq!(bonferroni(&[0.5], 4), vec![1.0]);
        assert!(bonferroni::<f64>(&[], 3).is_empty());
    }

    #[test]
    fn matrix_joins_and_adjusts() {
        let scores = Table::<f64>::from_csv_str(
            "system_id,m1,m2\nA,1,5\nB,2,5\nC,3,5\nZ,9,9\n",
            None,
            Default::default(),
        )
        .unwrap();
        let ratings = Table::<f64>::from_csv_str(
            "system_id,r1\nC,30\nB,20\nA,10\n",
            None,
            Default::default(),
        )
        .unwrap();
        let m = correlation_matrix(&scores, &ratings, CorrelationMethod::Kendall).unwrap();
        assert_eq!(m.systems, ["A", "B", "C"]);
        let cell = m.get("m1", "r1").unwrap();
        assert_eq!(cell.coefficient, 1.0);
        assert_eq!(cell.p_adjusted, Some((cell.p_raw * 2.0).min(1.0)));
        assert!(m.get("m2", "r1").is_none());
    }
}
