//! Proxy scores for explainable QA.
//!
//! Three levels are scored per instance: the answer (token overlap), the
//! supporting facts (sentence-set overlap) and their instance-wise product
//! ("joint"). LocA measures how often a predicted answer actually occurs in
//! the predicted explanation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, FactSet, Instance, Prediction, PredictionSet};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// SQuAD-style answer normalization: lowercase, strip ASCII punctuation, drop
/// the articles "a"/"an"/"the" as whole tokens and collapse whitespace.
pub fn normalize_answer(raw: &str) -> String {
    let lowered = raw.to_lowercase();
    let no_punct: String = lowered
        .chars()
        .filter(|c| !c.is_ascii_punctuation())
        .collect();
    no_punct
        .split_whitespace()
        .filter(|t| !matches!(*t, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// EM, precision, recall and F1 at one level.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LevelScores<F = f64> {
    pub em: F,
    pub precision: F,
    pub recall: F,
    pub f1: F,
}

impl<F: Real> LevelScores<F> {
    pub fn zero() -> Self {
        Self {
            em: F::zero(),
            precision: F::zero(),
            recall: F::zero(),
            f1: F::zero(),
        }
    }

    pub fn perfect() -> Self {
        Self {
            em: F::one(),
            precision: F::one(),
            recall: F::one(),
            f1: F::one(),
        }
    }

    fn from_pr(em: bool, precision: F, recall: F) -> Self {
        Self {
            em: if em { F::one() } else { F::zero() },
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
        }
    }
}

fn harmonic_mean<F: Real>(p: F, r: F) -> F {
    if p + r == F::zero() {
        F::zero()
    } else {
        F::of(2.0) * p * r / (p + r)
    }
}

fn ratio<F: Real>(num: usize, den: usize) -> F {
    if den == 0 {
        F::zero()
    } else {
        F::of_usize(num) / F::of_usize(den)
    }
}

pub fn answer_scores<F: Real>(pred: &str, gold: &str) -> LevelScores<F> {
    let pred = normalize_answer(pred);
    let gold = normalize_answer(gold);
    let pred_tokens: Vec<&str> = pred.split_whitespace().collect();
    let gold_tokens: Vec<&str> = gold.split_whitespace().collect();

    let mut bag: HashMap<&str, usize> = HashMap::new();
    for t in &gold_tokens {
        *bag.entry(t).or_default() += 1;
    }
    let mut overlap = 0;
    for t in &pred_tokens {
        if let Some(n) = bag.get_mut(t) {
            if *n > 0 {
                *n -= 1;
                overlap += 1;
            }
        }
    }
    LevelScores::from_pr(
        pred == gold,
        ratio(overlap, pred_tokens.len()),
        ratio(overlap, gold_tokens.len()),
    )
}

/// Set overlap of predicted and gold facts. Two empty sets count as a perfect match.
pub fn sp_scores<F: Real>(pred: &FactSet, gold: &FactSet) -> LevelScores<F> {
    if pred.is_empty() && gold.is_empty() {
        return LevelScores::perfect();
    }
    let overlap = pred.intersection(gold).count();
    LevelScores::from_pr(
        pred == gold,
        ratio(overlap, pred.len()),
        ratio(overlap, gold.len()),
    )
}

/// Instance-wise products of answer and SP EM, precision and recall; F1 is
/// recomposed from the products.
pub fn joint_scores<F: Real>(answer: &LevelScores<F>, sp: &LevelScores<F>) -> LevelScores<F> {
    let precision = answer.precision * sp.precision;
    let recall = answer.recall * sp.recall;
    LevelScores {
        em: answer.em * sp.em,
        precision,
        recall,
        f1: harmonic_mean(precision, recall),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SurfaceStats {
    pub num_facts: usize,
    pub num_words: usize,
    pub num_excess_facts: i64,
}

pub fn surface_stats(
    pred_facts: &FactSet,
    gold_facts: &FactSet,
    instance: &Instance,
) -> SurfaceStats {
    let num_words = pred_facts
        .iter()
        .filter_map(|f| instance.sentence(f))
        .map(|s| s.split_whitespace().count())
        .sum();
    SurfaceStats {
        num_facts: pred_facts.len(),
        num_words,
        num_excess_facts: pred_facts.len() as i64 - gold_facts.len() as i64,
    }
}

/// Where a predicted answer was found relative to the predicted facts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerLocation {
    Inside,
    Outside,
    /// Yes/no or empty answers carry no string to locate.
    NotCounted,
}

impl fmt::Display for AnswerLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnswerLocation::Inside => "inside",
            AnswerLocation::Outside => "outside",
            AnswerLocation::NotCounted => "not_counted",
        })
    }
}

/// Matches the normalized answer against the normalized, space-joined predicted
/// fact sentences (taken in context order).
pub fn answer_inside(
    pred_answer: &str,
    pred_facts: &FactSet,
    instance: &Instance,
) -> AnswerLocation {
    let answer = normalize_answer(pred_answer);
    if matches!(answer.as_str(), "" | "yes" | "no") {
        return AnswerLocation::NotCounted;
    }
    let evidence = normalize_answer(&instance.sentences_in_order(pred_facts).join(" "));
    if evidence.contains(&answer) {
        AnswerLocation::Inside
    } else {
        AnswerLocation::Outside
    }
}

/// Inside (I), outside (O) and counted (A = I + O) answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LocaCounts {
    #[serde(rename = "I")]
    pub inside: usize,
    #[serde(rename = "O")]
    pub outside: usize,
    #[serde(rename = "A")]
    pub total: usize,
}

impl LocaCounts {
    pub fn tally(flags: impl IntoIterator<Item = AnswerLocation>) -> Self {
        let mut c = LocaCounts::default();
        for f in flags {
            match f {
                AnswerLocation::Inside => c.inside += 1,
                AnswerLocation::Outside => c.outside += 1,
                AnswerLocation::NotCounted => continue,
            }
            c.total += 1;
        }
        c
    }

    /// `(I/A) / (1 + O/A)`, which simplifies to `I / (A + O)`.
    pub fn score<F: Real>(&self) -> Result<F> {
        if self.total == 0 {
            return Err(Error::UndefinedLoca);
        }
        Ok(F::of_usize(self.inside) / F::of_usize(self.total + self.outside))
    }
}

pub fn loca<F: Real>(flags: impl IntoIterator<Item = AnswerLocation>) -> Result<(F, LocaCounts)> {
    let counts = LocaCounts::tally(flags);
    Ok((counts.score()?, counts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceScores<F = f64> {
    pub answer: LevelScores<F>,
    pub sp: LevelScores<F>,
    pub joint: LevelScores<F>,
    pub location: AnswerLocation,
    #[serde(flatten)]
    pub surface: SurfaceStats,
}

/// Every per-system metric produced by [`evaluate_system`], in report order.
pub const METRIC_NAMES: [&str; 16] = [
    "answer_em",
    "answer_precision",
    "answer_recall",
    "answer_f1",
    "sp_em",
    "sp_precision",
    "sp_recall",
    "sp_f1",
    "joint_em",
    "joint_precision",
    "joint_recall",
    "joint_f1",
    "loca",
    "num_facts",
    "num_words",
    "num_excess_facts",
];

impl<F: Real> InstanceScores<F> {
    /// Named per-instance values; `loca` is per-system only and is absent here.
    pub fn values(&self) -> [(&'static str, F); 15] {
        let (a, s, j) = (&self.answer, &self.sp, &self.joint);
        [
            ("answer_em", a.em),
            ("answer_precision", a.precision),
            ("answer_recall", a.recall),
            ("answer_f1", a.f1),
            ("sp_em", s.em),
            ("sp_precision", s.precision),
            ("sp_recall", s.recall),
            ("sp_f1", s.f1),
            ("joint_em", j.em),
            ("joint_precision", j.precision),
            ("joint_recall", j.recall),
            ("joint_f1", j.f1),
            ("num_facts", F::of_usize(self.surface.num_facts)),
            ("num_words", F::of_usize(self.surface.num_words)),
            (
                "num_excess_facts",
                F::of(self.surface.num_excess_facts as f64),
            ),
        ]
    }

    pub fn value(&self, metric: &str) -> Option<F> {
        self.values()
            .into_iter()
            .find(|(n, _)| *n == metric)
            .map(|(_, v)| v)
    }
}

/// Scores one instance. Missing halves of a prediction score zero and leave the
/// answer uncounted for LocA.
pub fn score_instance<F: Real>(
    instance: &Instance,
    prediction: Option<&Prediction>,
) -> InstanceScores<F> {
    let empty = FactSet::new();
    let answer_text = prediction.and_then(|p| p.answer.as_deref());
    let facts = prediction.and_then(|p| p.facts.as_ref());

    let answer = match answer_text {
        Some(a) => answer_scores(a, &instance.gold_answer),
        None => LevelScores::zero(),
    };
    let sp = match facts {
        Some(f) => sp_scores(f, &instance.gold_facts),
        None => LevelScores::zero(),
    };
    let facts = facts.unwrap_or(&empty);
    InstanceScores {
        answer,
        sp,
        joint: joint_scores(&answer, &sp),
        location: answer_text
            .map(|a| answer_inside(a, facts, instance))
            .unwrap_or(AnswerLocation::NotCounted),
        surface: surface_stats(facts, &instance.gold_facts, instance),
    }
}

/// Per-system means plus LocA. `loca` is `None` when no answer was counted.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemScores<F = f64> {
    pub system_id: String,
    pub metrics: BTreeMap<String, F>,
    pub loca: Option<F>,
    pub loca_counts: LocaCounts,
}

impl<F: Real> SystemScores<F> {
    pub fn get(&self, metric: &str) -> Option<F> {
        if metric == "loca" {
            self.loca
        } else {
            self.metrics.get(metric).copied()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemEvaluation<F = f64> {
    pub scores: SystemScores<F>,
    /// Per-instance scores in corpus order.
    pub instances: Vec<(String, InstanceScores<F>)>,
}

/// Scores every corpus instance and averages in corpus order.
pub fn evaluate_system<F: Real>(
    corpus: &Corpus,
    preds: &PredictionSet,
) -> Result<SystemEvaluation<F>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let instances: Vec<(String, InstanceScores<F>)> = corpus
        .iter()
        .map(|inst| (inst.id.clone(), score_instance(inst, preds.get(&inst.id))))
        .collect();

    let n = F::of_usize(instances.len());
    let mut sums: Vec<(&'static str, F)> = instances[0]
        .1
        .values()
        .iter()
        .map(|(k, _)| (*k, F::zero()))
        .collect();
    for (_, s) in &instances {
        for (acc, (_, v)) in sums.iter_mut().zip(s.values()) {
            acc.1 = acc.1 + v;
        }
    }
    let metrics = sums
        .into_iter()
        .map(|(k, v)| (k.to_string(), v / n))
        .collect();
    let loca_counts = LocaCounts::tally(instances.iter().map(|(_, s)| s.location));
    Ok(SystemEvaluation {
        scores: SystemScores {
            system_id: preds.system_id.clone(),
            metrics,
            loca: loca_counts.score().ok(),
            loca_counts,
        },
        instances,
    })
}
