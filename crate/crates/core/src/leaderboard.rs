//! Leaderboards: single-score, (weighted) averages and ranked Pareto fronts.
//!
//! Pareto ranking peels the non-dominated set off the remaining systems until
//! none are left; each peel is one rank. Systems with identical vectors never
//! dominate each other and therefore share a front. Listing order within a
//! front or tie group is ascending system id and carries no meaning.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt::Debug;
use std::ops::Neg;

use num_traits::Num;
use serde::Serialize;

use crate::corpus::Warning;
use crate::error::{Error, Result};
use crate::table::{Direction, Table};

/// Values a leaderboard can order. Any partially ordered type works for Pareto
/// and single-score rankings, including exact rationals.
pub trait Score: Clone + PartialOrd + Debug {}

impl<T: Clone + PartialOrd + Debug> Score for T {}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingInput<T = f64> {
    systems: Vec<String>,
    dimensions: Vec<String>,
    directions: Vec<Direction>,
    values: Vec<Vec<T>>,
}

impl<T: Score> RankingInput<T> {
    pub fn new(
        systems: Vec<String>,
        dimensions: Vec<String>,
        directions: Vec<Direction>,
        values: Vec<Vec<T>>,
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
        let mut seen = HashSet::new();
        for (system, row) in systems.iter().zip(&values) {
            if !seen.insert(system) {
                return Err(Error::DuplicateSystem(system.clone()));
            }
            if row.len() != dimensions.len() {
                return Err(Error::DimensionMismatch {
                    left: dimensions.len(),
                    right: row.len(),
                });
            }
            for (v, d) in row.iter().zip(&dimensions) {
                if v.partial_cmp(v).is_none() {
                    return Err(Error::NonComparable {
                        system: system.clone(),
                        dimension: d.clone(),
                    });
                }
            }
        }
        Ok(Self {
            systems,
            dimensions,
            directions,
            values,
        })
    }

    /// Builds an input from a table, optionally restricted to `dims`. Systems
    /// lacking a value fail the build unless `drop_incomplete` is set, in which
    /// case they are dropped with a warning.
    pub fn from_table(
        table: &Table<T>,
        dims: Option<&[String]>,
        drop_incomplete: bool,
    ) -> Result<(Self, Vec<Warning>)> {
        let table = match dims {
            Some(d) => table.select(d)?,
            None => table.clone(),
        };
        let mut warnings = Vec::new();
        let mut systems = Vec::new();
        let mut values = Vec::new();
        'rows: for (system, row) in table.systems().iter().zip(table.rows()) {
            let mut complete = Vec::with_capacity(row.len());
            for (v, dim) in row.iter().zip(table.dimensions()) {
                match v {
                    Some(v) => complete.push(v.clone()),
                    None if drop_incomplete => {
                        warnings.push(Warning::DroppedIncomplete {
                            system: system.clone(),
                            dimension: dim.clone(),
                        });
                        continue 'rows;
                    }
                    None => {
                        return Err(Error::IncompleteSystem {
                            system: system.clone(),
                            dimension: dim.clone(),
                        })
                    }
                }
            }
            systems.push(system.clone());
            values.push(complete);
        }
        let input = Self::new(
            systems,
            table.dimensions().to_vec(),
            table.directions().to_vec(),
            values,
        )?;
        Ok((input, warnings))
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

    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    pub fn vector(&self, system: &str) -> Option<&[T]> {
        let i = self.systems.iter().position(|s| s == system)?;
        Some(&self.values[i])
    }

    fn dimension_index(&self, name: &str) -> Result<usize> {
        self.dimensions
            .iter()
            .position(|d| d == name)
            .ok_or_else(|| Error::UnknownDimension(name.to_string()))
    }
}

/// `a` dominates `b` when it is at least as good on every dimension and
/// strictly better on at least one.
pub fn dominates<T: PartialOrd>(a: &[T], b: &[T], directions: &[Direction]) -> Result<bool> {
    if a.len() != b.len() || a.len() != directions.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: if a.len() != b.len() {
                b.len()
            } else {
                directions.len()
            },
        });
    }
    let mut strictly = false;
    for ((x, y), dir) in a.iter().zip(b).zip(directions) {
        match dir.compare(x, y) {
            Some(Ordering::Less) | None => return Ok(false),
            Some(Ordering::Greater) => strictly = true,
            Some(Ordering::Equal) => {}
        }
    }
    Ok(strictly)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParetoRanking {
    /// Fronts in rank order; members sorted by system id.
    pub fronts: Vec<Vec<String>>,
    /// 1-based front index per system.
    pub rank: BTreeMap<String, usize>,
}

/// Ranked Pareto fronts by iterated peeling of non-dominated systems.
pub fn ranked_pareto_fronts<T: Score>(input: &RankingInput<T>) -> ParetoRanking {
    let dirs = &input.directions;
    let dominated = |a: usize, b: usize| {
        dominates(&input.values[a], &input.values[b], dirs).expect("validated shapes")
    };
    let mut remaining: Vec<usize> = (0..input.systems.len()).collect();
    let mut fronts = Vec::new();
    let mut rank = BTreeMap::new();
    while !remaining.is_empty() {
        let (front, rest): (Vec<usize>, Vec<usize>) = remaining
            .iter()
            .partition(|&&i| !remaining.iter().any(|&j| j != i && dominated(j, i)));
        let mut names: Vec<String> = front.iter().map(|&i| input.systems[i].clone()).collect();
        names.sort();
        for n in &names {
            rank.insert(n.clone(), fronts.len() + 1);
        }
        fronts.push(names);
        remaining = rest;
    }
    ParetoRanking { fronts, rank }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankGroup<T = f64> {
    /// Competition rank: one plus the number of systems ranked strictly ahead.
    pub rank: usize,
    pub systems: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderedRanking<T = f64> {
    pub strategy: String,
    pub order: Vec<RankGroup<T>>,
}

impl<T> OrderedRanking<T> {
    /// Systems in rank order, ties in id order.
    pub fn flattened(&self) -> Vec<&str> {
        self.order
            .iter()
            .flat_map(|g| g.systems.iter().map(String::as_str))
            .collect()
    }
}

/// Sorts `idx` best-first by `cmp`, breaking remaining ties by system id, and
/// groups entries `cmp` considers equal.
fn group_by_key<T>(
    input: &RankingInput<impl Score>,
    mut idx: Vec<usize>,
    cmp: impl Fn(usize, usize) -> Ordering,
    score: impl Fn(usize) -> Option<T>,
) -> Vec<RankGroup<T>> {
    idx.sort_by(|&a, &b| cmp(a, b).then_with(|| input.systems[a].cmp(&input.systems[b])));
    let mut groups: Vec<RankGroup<T>> = Vec::new();
    let mut last: Option<usize> = None;
    for (placed, i) in idx.into_iter().enumerate() {
        match last {
            Some(prev) if cmp(prev, i) == Ordering::Equal => {
                groups
                    .last_mut()
                    .expect("group exists")
                    .systems
                    .push(input.systems[i].clone());
            }
            _ => groups.push(RankGroup {
                rank: placed + 1,
                systems: vec![input.systems[i].clone()],
                score: score(i),
            }),
        }
        last = Some(i);
    }
    groups
}

/// Orders systems on one dimension, then on each tiebreaker in turn; systems
/// equal on every key form one tie group.
pub fn rank_single<T: Score>(
    input: &RankingInput<T>,
    dimension: &str,
    tiebreakers: &[String],
) -> Result<OrderedRanking<T>> {
    let keys: Vec<usize> = std::iter::once(dimension)
        .chain(tiebreakers.iter().map(String::as_str))
        .map(|d| input.dimension_index(d))
        .collect::<Result<_>>()?;
    let cmp = |a: usize, b: usize| {
        keys.iter()
            .map(|&k| {
                // best first: reverse the "a is better" ordering
                input.directions[k]
                    .compare(&input.values[b][k], &input.values[a][k])
                    .unwrap_or(Ordering::Equal)
            })
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    };
    let order = group_by_key(input, (0..input.systems.len()).collect(), cmp, |i| {
        Some(input.values[i][keys[0]].clone())
    });
    Ok(OrderedRanking {
        strategy: format!("single:{dimension}"),
        order,
    })
}

/// Weighted sum of direction-oriented values (lower-is-better dimensions are
/// negated), best first. Dimensions without a weight are ignored.
pub fn rank_weighted<T>(
    input: &RankingInput<T>,
    weights: &BTreeMap<String, T>,
) -> Result<OrderedRanking<T>>
where
    T: Score + Num + Neg<Output = T>,
{
    let weighted: Vec<(usize, T)> = weights
        .iter()
        .map(|(d, w)| Ok((input.dimension_index(d)?, w.clone())))
        .collect::<Result<_>>()?;
    let scores: Vec<T> = input
        .values
        .iter()
        .map(|row| {
            weighted.iter().fold(T::zero(), |acc, (k, w)| {
                let v = row[*k].clone();
                let oriented = match input.directions[*k] {
                    Direction::Higher => v,
                    Direction::Lower => -v,
                };
                acc + w.clone() * oriented
            })
        })
        .collect();
    let cmp = |a: usize, b: usize| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal);
    let spec = weights
        .iter()
        .map(|(d, w)| format!("{d}={w:?}"))
        .collect::<Vec<_>>()
        .join(",");
    Ok(OrderedRanking {
        strategy: format!("weighted:{spec}"),
        order: group_by_key(input, (0..input.systems.len()).collect(), cmp, |i| {
            Some(scores[i].clone())
        }),
    })
}

/// Unweighted mean of all oriented dimensions.
pub fn rank_average<T>(input: &RankingInput<T>) -> Result<OrderedRanking<T>>
where
    T: Score + Num + Neg<Output = T>,
{
    let weights = input
        .dimensions
        .iter()
        .map(|d| (d.clone(), T::one()))
        .collect();
    let mut ranking = rank_weighted(input, &weights)?;
    let count = input
        .dimensions
        .iter()
        .fold(T::zero(), |acc, _| acc + T::one());
    if count != T::zero() {
        for g in &mut ranking.order {
            g.score = g.score.take().map(|s| s / count.clone());
        }
    }
    ranking.strategy = "average".into();
    Ok(ranking)
}
