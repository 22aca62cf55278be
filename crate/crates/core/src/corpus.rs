//! Gold data, predictions, human ratings and submission dates.
//!
//! Gold and prediction files follow the HotpotQA distractor-setting layout
//! and the official submission format. Titles are compared after Unicode NFC
//! normalization. Loaded structures are immutable.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{read_to_string, Error, Result};
use crate::table::{CsvOptions, DimensionSpec, Table};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Article {
    pub title: String,
    pub sentences: Vec<String>,
}

impl Article {
    /// An article without sentences. Allowed, but reported when loading.
    pub fn is_degenerate(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Reference to one context sentence: article title plus 0-based sentence index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(String, usize)", into = "(String, usize)")]
pub struct FactRef {
    pub title: String,
    pub sentence_index: usize,
}

impl FactRef {
    pub fn new(title: impl Into<String>, sentence_index: usize) -> Self {
        Self {
            title: nfc(&title.into()),
            sentence_index,
        }
    }
}

impl From<(String, usize)> for FactRef {
    fn from((title, sentence_index): (String, usize)) -> Self {
        FactRef::new(title, sentence_index)
    }
}

impl From<FactRef> for (String, usize) {
    fn from(f: FactRef) -> Self {
        (f.title, f.sentence_index)
    }
}

impl fmt::Display for FactRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {})", self.title, self.sentence_index)
    }
}

pub type FactSet = BTreeSet<FactRef>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: String,
    pub question: String,
    pub context: Vec<Article>,
    pub gold_answer: String,
    pub gold_facts: FactSet,
}

impl Instance {
    pub fn article(&self, title: &str) -> Option<&Article> {
        self.context.iter().find(|a| a.title == title)
    }

    /// (article position, sentence index) of a fact within the context.
    pub fn position(&self, fact: &FactRef) -> Option<(usize, usize)> {
        let a = self.context.iter().position(|a| a.title == fact.title)?;
        (fact.sentence_index < self.context[a].sentences.len()).then_some((a, fact.sentence_index))
    }

    pub fn sentence(&self, fact: &FactRef) -> Option<&str> {
        let (a, s) = self.position(fact)?;
        Some(&self.context[a].sentences[s])
    }

    pub fn resolves(&self, fact: &FactRef) -> bool {
        self.position(fact).is_some()
    }

    /// Every sentence of the context as a fact, in context order.
    pub fn all_facts(&self) -> impl Iterator<Item = FactRef> + '_ {
        self.context.iter().flat_map(|a| {
            (0..a.sentences.len()).map(move |i| FactRef {
                title: a.title.clone(),
                sentence_index: i,
            })
        })
    }

    pub fn sentence_count(&self) -> usize {
        self.context.iter().map(|a| a.sentences.len()).sum()
    }

    /// Sentences referenced by `facts`, ordered by their position in the context.
    /// Unresolvable references are skipped.
    pub fn sentences_in_order<'a>(&'a self, facts: &FactSet) -> Vec<&'a str> {
        let mut pos: Vec<(usize, usize)> = facts.iter().filter_map(|f| self.position(f)).collect();
        pos.sort_unstable();
        pos.into_iter()
            .map(|(a, s)| self.context[a].sentences[s].as_str())
            .collect()
    }

    fn check_fact(&self, fact: &FactRef) -> Result<()> {
        if self.resolves(fact) {
            Ok(())
        } else {
            Err(Error::DanglingFact {
                instance: self.id.clone(),
                title: fact.title.clone(),
                index: fact.sentence_index,
            })
        }
    }
}

/// Non-fatal conditions noticed while loading or scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    EmptyCorpus,
    DegenerateArticle { instance: String, title: String },
    MissingPrediction { instance: String },
    MissingAnswer { instance: String },
    MissingSupportingFacts { instance: String },
    IgnoredDirection { dimension: String },
    DroppedIncomplete { system: String, dimension: String },
    Undated { system: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::EmptyCorpus => write!(f, "gold file contains no instances"),
            Warning::DegenerateArticle { instance, title } => {
                write!(
                    f,
                    "instance {instance:?}: article {title:?} has no sentences"
                )
            }
            Warning::MissingPrediction { instance } => {
                write!(f, "no prediction for instance {instance:?}; scored as zero")
            }
            Warning::MissingAnswer { instance } => {
                write!(
                    f,
                    "no predicted answer for instance {instance:?}; answer scored as zero"
                )
            }
            Warning::MissingSupportingFacts { instance } => write!(
                f,
                "no predicted supporting facts for instance {instance:?}; SP scored as zero"
            ),
            Warning::IgnoredDirection { dimension } => {
                write!(
                    f,
                    "direction for {dimension:?} does not match any column; ignored"
                )
            }
            Warning::DroppedIncomplete { system, dimension } => {
                write!(f, "dropped system {system:?}: no value for {dimension:?}")
            }
            Warning::Undated { system } => {
                write!(f, "system {system:?} has no submission date; skipped")
            }
        }
    }
}

/// A loaded value together with the warnings produced while loading it.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    instances: Vec<Instance>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    #[serde(rename = "_id")]
    id: String,
    question: String,
    answer: String,
    context: Vec<(String, Vec<String>)>,
    supporting_facts: Vec<FactRef>,
}

impl Corpus {
    /// Validates instances: unique ids, non-empty titles, non-empty and
    /// resolvable gold facts.
    pub fn new(instances: Vec<Instance>) -> Result<Self> {
        let mut index = HashMap::with_capacity(instances.len());
        for (i, inst) in instances.iter().enumerate() {
            if index.insert(inst.id.clone(), i).is_some() {
                return Err(Error::DuplicateInstance(inst.id.clone()));
            }
            if inst.context.iter().any(|a| a.title.is_empty()) {
                return Err(Error::EmptyTitle(inst.id.clone()));
            }
            if inst.gold_facts.is_empty() {
                return Err(Error::NoGoldFacts(inst.id.clone()));
            }
            for f in &inst.gold_facts {
                inst.check_fact(f)?;
            }
        }
        Ok(Self { instances, index })
    }

    pub fn from_json_str(text: &str) -> Result<Loaded<Self>> {
        let raw: Vec<RawInstance> =
            serde_json::from_str(text).map_err(|e| Error::json(text, &e))?;
        let mut warnings = Vec::new();
        if raw.is_empty() {
            warnings.push(Warning::EmptyCorpus);
        }
        let instances: Vec<Instance> = raw
            .into_iter()
            .map(|r| Instance {
                context: r
                    .context
                    .into_iter()
                    .map(|(title, sentences)| Article {
                        title: nfc(&title),
                        sentences,
                    })
                    .collect(),
                gold_facts: r.supporting_facts.into_iter().collect(),
                id: r.id,
                question: r.question,
                gold_answer: r.answer,
            })
            .collect();
        for inst in &instances {
            for a in inst.context.iter().filter(|a| a.is_degenerate()) {
                warnings.push(Warning::DegenerateArticle {
                    instance: inst.id.clone(),
                    title: a.title.clone(),
                });
            }
        }
        Ok(Loaded {
            value: Corpus::new(instances)?,
            warnings,
        })
    }

    pub fn to_json_string(&self) -> String {
        let raw: Vec<RawInstance> = self
            .instances
            .iter()
            .map(|i| RawInstance {
                id: i.id.clone(),
                question: i.question.clone(),
                answer: i.gold_answer.clone(),
                context: i
                    .context
                    .iter()
                    .map(|a| (a.title.clone(), a.sentences.clone()))
                    .collect(),
                supporting_facts: i.gold_facts.iter().cloned().collect(),
            })
            .collect();
        serde_json::to_string(&raw).expect("corpus serialization is infallible")
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Instance> {
        self.index.get(id).map(|&i| &self.instances[i])
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Instance> {
        self.instances.iter()
    }

    /// Equality ignoring instance order.
    pub fn same_instances(&self, other: &Corpus) -> bool {
        self.len() == other.len()
            && self
                .instances
                .iter()
                .all(|i| other.get(&i.id).is_some_and(|o| o == i))
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Instance;
    type IntoIter = std::slice::Iter<'a, Instance>;

    fn into_iter(self) -> Self::IntoIter {
        self.instances.iter()
    }
}

pub fn load_gold(path: impl AsRef<Path>) -> Result<Loaded<Corpus>> {
    Corpus::from_json_str(&read_to_string(path.as_ref())?)
}

/// One system's output for one instance. Either half may be absent
/// (e.g. answer-only systems).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Prediction {
    pub answer: Option<String>,
    pub facts: Option<FactSet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionSet {
    pub system_id: String,
    entries: BTreeMap<String, Prediction>,
    missing: Vec<String>,
}

#[derive(Serialize, Deserialize, Default)]
struct RawPredictions {
    #[serde(default)]
    answer: BTreeMap<String, String>,
    #[serde(default)]
    sp: BTreeMap<String, Vec<FactRef>>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PredictionOptions {
    /// Fail instead of warning when an instance lacks an answer or supporting facts.
    pub strict: bool,
}

impl PredictionSet {
    /// Builds a prediction set from per-instance predictions, validating ids and
    /// fact references against `corpus`.
    pub fn new(
        system_id: impl Into<String>,
        corpus: &Corpus,
        entries: BTreeMap<String, Prediction>,
    ) -> Result<Self> {
        for (id, p) in &entries {
            let inst = corpus
                .get(id)
                .ok_or_else(|| Error::UnknownInstance(id.clone()))?;
            for f in p.facts.iter().flatten() {
                inst.check_fact(f)?;
            }
        }
        let missing = corpus
            .iter()
            .filter(|i| !entries.contains_key(&i.id))
            .map(|i| i.id.clone())
            .collect();
        Ok(Self {
            system_id: system_id.into(),
            entries,
            missing,
        })
    }

    pub fn from_json_str(
        text: &str,
        system_id: impl Into<String>,
        corpus: &Corpus,
        options: PredictionOptions,
    ) -> Result<Loaded<Self>> {
        let raw: RawPredictions = serde_json::from_str(text).map_err(|e| Error::json(text, &e))?;
        let mut entries: BTreeMap<String, Prediction> = BTreeMap::new();
        for (id, answer) in raw.answer {
            entries.entry(id).or_default().answer = Some(answer);
        }
        for (id, facts) in raw.sp {
            entries.entry(id).or_default().facts = Some(facts.into_iter().collect());
        }
        let set = PredictionSet::new(system_id, corpus, entries)?;

        let mut warnings = Vec::new();
        let mut incomplete = Vec::new();
        for inst in corpus {
            match set.entries.get(&inst.id) {
                None => warnings.push(Warning::MissingPrediction {
                    instance: inst.id.clone(),
                }),
                Some(p) if p.answer.is_none() => warnings.push(Warning::MissingAnswer {
                    instance: inst.id.clone(),
                }),
                Some(p) if p.facts.is_none() => warnings.push(Warning::MissingSupportingFacts {
                    instance: inst.id.clone(),
                }),
                Some(_) => continue,
            }
            incomplete.push(inst.id.clone());
        }
        if options.strict && !incomplete.is_empty() {
            return Err(Error::MissingPredictions(incomplete));
        }
        Ok(Loaded {
            value: set,
            warnings,
        })
    }

    /// Serializes to the official submission format. Absent halves are omitted.
    pub fn to_json_string(&self) -> String {
        let mut raw = RawPredictions::default();
        for (id, p) in &self.entries {
            if let Some(a) = &p.answer {
                raw.answer.insert(id.clone(), a.clone());
            }
            if let Some(f) = &p.facts {
                raw.sp.insert(id.clone(), f.iter().cloned().collect());
            }
        }
        serde_json::to_string(&raw).expect("prediction serialization is infallible")
    }

    pub fn get(&self, id: &str) -> Option<&Prediction> {
        self.entries.get(id)
    }

    pub fn entries(&self) -> &BTreeMap<String, Prediction> {
        &self.entries
    }

    /// Corpus instances without any prediction, in corpus order.
    pub fn missing(&self) -> &[String] {
        &self.missing
    }
}

pub fn load_predictions(
    path: impl AsRef<Path>,
    system_id: impl Into<String>,
    corpus: &Corpus,
    options: PredictionOptions,
) -> Result<Loaded<PredictionSet>> {
    PredictionSet::from_json_str(&read_to_string(path.as_ref())?, system_id, corpus, options)
}

/// Reads a complete human-rating table. Direction entries naming no column
/// are ignored with a warning.
pub fn parse_ratings(text: &str, directions: &[DimensionSpec]) -> Result<Loaded<Table<f64>>> {
    let table = Table::from_csv_str(text, Some(directions), CsvOptions::default())?;
    let warnings = directions
        .iter()
        .filter(|d| !table.dimensions().contains(&d.name))
        .map(|d| Warning::IgnoredDirection {
            dimension: d.name.clone(),
        })
        .collect();
    Ok(Loaded {
        value: table,
        warnings,
    })
}

pub fn load_ratings(
    path: impl AsRef<Path>,
    directions: &[DimensionSpec],
) -> Result<Loaded<Table<f64>>> {
    parse_ratings(&read_to_string(path.as_ref())?, directions)
}

/// Submission date per system.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubmissionLog {
    dates: BTreeMap<String, NaiveDate>,
}

impl SubmissionLog {
    pub fn new(entries: impl IntoIterator<Item = (String, NaiveDate)>) -> Result<Self> {
        let mut dates = BTreeMap::new();
        for (s, d) in entries {
            if dates.insert(s.clone(), d).is_some() {
                return Err(Error::DuplicateSystem(s));
            }
        }
        Ok(Self { dates })
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(Error::csv)?;
        if header.iter().collect::<Vec<_>>() != ["system_id", "submitted_on"] {
            return Err(Error::InvalidArgument(
                "submission CSV header must be \"system_id,submitted_on\"".into(),
            ));
        }
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(Error::csv)?;
            let system = record.get(0).unwrap_or("").to_string();
            let raw = record.get(1).unwrap_or("");
            let date = NaiveDate::parse_from_str(raw, "%Y-%m-%d").map_err(|_| Error::BadDate {
                record: i + 1,
                value: raw.to_string(),
            })?;
            if !seen.insert(system.clone()) {
                return Err(Error::DuplicateSystem(system));
            }
            entries.push((system, date));
        }
        Self::new(entries)
    }

    pub fn get(&self, system: &str) -> Option<NaiveDate> {
        self.dates.get(system).copied()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, NaiveDate)> {
        self.dates.iter().map(|(s, d)| (s.as_str(), *d))
    }
}

pub fn load_submissions(path: impl AsRef<Path>) -> Result<SubmissionLog> {
    SubmissionLog::from_csv_str(&read_to_string(path.as_ref())?)
}

fn nfc(s: &str) -> String {
    s.nfc().collect()
}
