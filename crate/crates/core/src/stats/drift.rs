use chrono::{Datelike, NaiveDate};

use super::correlation::{kendall_tau_b, CorrelationResult};
use crate::corpus::{SubmissionLog, Warning};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DriftConfig {
    pub target_metric: String,
    pub window_months: u32,
    pub step_months: u32,
    /// Windows with fewer systems carry no correlation.
    pub min_systems: usize,
}

impl DriftConfig {
    pub fn new(target_metric: impl Into<String>) -> Self {
        Self {
            target_metric: target_metric.into(),
            window_months: 12,
            step_months: 1,
            min_systems: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftWindow<F = f64> {
    pub start: NaiveDate,
    /// Exclusive.
    pub end: NaiveDate,
    pub systems: Vec<String>,
    /// τ-b between the target metric and each rating, `None` when the window
    /// is too sparse or the correlation is undefined.
    pub correlations: Vec<(String, Option<CorrelationResult<F>>)>,
}

impl<F> DriftWindow<F> {
    pub fn systems_in_window(&self) -> usize {
        self.systems.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftSeries<F = f64> {
    pub target_metric: String,
    pub windows: Vec<DriftWindow<F>>,
    pub warnings: Vec<Warning>,
}

impl<F: Real> DriftSeries<F> {
    /// Coefficient sequence for one rating (absent windows as `None`).
    pub fn coefficients(&self, rating: &str) -> Vec<Option<F>> {
        self.windows
            .iter()
            .map(|w| {
                w.correlations
                    .iter()
                    .find(|(r, _)| r == rating)
                    .and_then(|(_, c)| c.map(|c| c.coefficient))
            })
            .collect()
    }
}

fn month_index(d: NaiveDate) -> i64 {
    i64::from(d.year()) * 12 + i64::from(d.month0())
}

fn month_start(index: i64) -> NaiveDate {
    let year = index.div_euclid(12) as i32;
    let month = index.rem_euclid(12) as u32 + 1;
    NaiveDate::from_ymd_opt(year, month, 1).expect("valid first of month")
}

/// Sliding-window τ-b between a proxy score and every human rating over
/// systems ordered by submission date.
///
/// Windows span `window_months` calendar months starting on the first of the
/// month of the earliest submission and advance by `step_months`, as long as
/// they fit before the end of the latest submission's month. A timeline
/// shorter than one window yields a single window.
pub fn drift_analysis<F: Real>(
    scores: &Table<F>,
    ratings: &Table<F>,
    submissions: &SubmissionLog,
    config: &DriftConfig,
) -> Result<DriftSeries<F>> {
    if config.window_months == 0 || config.step_months == 0 {
        return Err(Error::InvalidArgument(
            "window and step must be at least one month".into(),
        ));
    }
    let metric = scores.dimension_index(&config.target_metric)?;
    let mut warnings = Vec::new();
    // (system, month, metric value, rating row)
    let mut dated = Vec::new();
    for (i, system) in scores.systems().iter().enumerate() {
        let (Some(value), Some(r)) = (scores.rows()[i][metric], ratings.system_index(system))
        else {
            continue;
        };
        match submissions.get(system) {
            Some(date) => dated.push((system.clone(), month_index(date), value, r)),
            None => warnings.push(Warning::Undated {
                system: system.clone(),
            }),
        }
    }
    if dated.is_empty() {
        return Err(Error::InvalidArgument(
            "no scored and rated system has a submission date".into(),
        ));
    }
    let first = dated.iter().map(|d| d.1).min().expect("non-empty");
    let end = dated.iter().map(|d| d.1).max().expect("non-empty") + 1;
    let (window, step) = (
        i64::from(config.window_months),
        i64::from(config.step_months),
    );

    let mut starts: Vec<i64> = (0..)
        .map(|i| first + i * step)
        .take_while(|s| s + window <= end)
        .collect();
    if starts.is_empty() {
        starts.push(first);
    }

    let windows = starts
        .into_iter()
        .map(|s| {
            let members: Vec<_> = dated
                .iter()
                .filter(|d| d.1 >= s && d.1 < s + window)
                .collect();
            let correlations = ratings
                .dimensions()
                .iter()
                .enumerate()
                .map(|(j, name)| {
                    let (x, y): (Vec<F>, Vec<F>) = members
                        .iter()
                        .filter_map(|d| Some((d.2, ratings.rows()[d.3][j]?)))
                        .unzip();
                    let result = if x.len() >= config.min_systems.max(2) {
                        kendall_tau_b(&x, &y).ok()
                    } else {
                        None
                    };
                    (name.clone(), result)
                })
                .collect();
            DriftWindow {
                start: month_start(s),
                end: month_start(s + window),
                systems: members.iter().map(|d| d.0.clone()).collect(),
                correlations,
            }
        })
        .collect();
    Ok(DriftSeries {
        target_metric: config.target_metric.clone(),
        windows,
        warnings,
    })
}
