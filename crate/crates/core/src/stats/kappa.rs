use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Disagreement weights for ordinal categories `i`, `j` out of `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaWeights {
    /// `|i − j| / (k − 1)`
    Linear,
    /// `((i − j) / (k − 1))²`
    Quadratic,
}

impl KappaWeights {
    fn weight<F: Real>(self, i: usize, j: usize, k: usize) -> F {
        if k < 2 {
            return F::zero();
        }
        let d = F::of_usize(i.abs_diff(j)) / F::of_usize(k - 1);
        match self {
            KappaWeights::Linear => d,
            KappaWeights::Quadratic => d * d,
        }
    }
}

/// Cohen's weighted κ: `1 − Σ w·o / Σ w·e` over the observed and
/// chance-expected agreement matrices.
pub fn weighted_kappa<C: PartialEq + std::fmt::Debug, F: Real>(
    rater_a: &[C],
    rater_b: &[C],
    weights: KappaWeights,
    categories: &[C],
) -> Result<F> {
    if rater_a.len() != rater_b.len() {
        return Err(Error::DimensionMismatch {
            left: rater_a.len(),
            right: rater_b.len(),
        });
    }
    if rater_a.is_empty() {
        return Err(Error::InvalidArgument(
            "kappa needs at least one rated item".into(),
        ));
    }
    let k = categories.len();
    let pos = |c: &C| {
        categories.iter().position(|x| x == c).ok_or_else(|| {
            Error::InvalidArgument(format!("rating {c:?} is not a declared category"))
        })
    };
    let n = F::of_usize(rater_a.len());
    let mut observed = vec![vec![F::zero(); k]; k];
    let mut row = vec![F::zero(); k];
    let mut col = vec![F::zero(); k];
    for (a, b) in rater_a.iter().zip(rater_b) {
        let (i, j) = (pos(a)?, pos(b)?);
        observed[i][j] = observed[i][j] + F::one() / n;
        row[i] = row[i] + F::one() / n;
        col[j] = col[j] + F::one() / n;
    }
    let (mut num, mut den) = (F::zero(), F::zero());
    for i in 0..k {
        for j in 0..k {
            let w: F = weights.weight(i, j, k);
            num = num + w * observed[i][j];
            den = den + w * row[i] * col[j];
        }
    }
    if den == F::zero() {
        return Err(Error::UndefinedKappa);
    }
    Ok(F::one() - num / den)
}

/// Mean pairwise weighted κ over all rater pairs within each group, averaged
/// over groups. Each group holds one rating sequence per rater over the same
/// items. Pairs with undefined κ are skipped; `None` if no pair is defined.
pub fn grouped_weighted_kappa<C: PartialEq + std::fmt::Debug, F: Real>(
    groups: &[Vec<Vec<C>>],
    weights: KappaWeights,
    categories: &[C],
) -> Result<Option<F>> {
    let mut group_means = Vec::new();
    for raters in groups {
        let mut values = Vec::new();
        for a in 0..raters.len() {
            for b in a + 1..raters.len() {
                match weighted_kappa::<C, F>(&raters[a], &raters[b], weights, categories) {
                    Ok(v) => values.push(v),
                    Err(Error::UndefinedKappa) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        if !values.is_empty() {
            let n = F::of_usize(values.len());
            group_means.push(values.into_iter().sum::<F>() / n);
        }
    }
    if group_means.is_empty() {
        return Ok(None);
    }
    let n = F::of_usize(group_means.len());
    Ok(Some(group_means.into_iter().sum::<F>() / n))
}

/// Sample standard deviation (n − 1 denominator); `None` for fewer than two values.
pub fn standard_deviation<F: Real>(values: &[F]) -> Option<F> {
    if values.len() < 2 {
        return None;
    }
    let n = F::of_usize(values.len());
    let mean = values.iter().copied().sum::<F>() / n;
    let ss: F = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
    Some((ss / (n - F::one())).sqrt())
}
