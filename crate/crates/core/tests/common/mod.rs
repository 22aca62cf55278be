#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use pareval::corpus::{Article, Corpus, FactRef, FactSet, Instance, Prediction, PredictionSet};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const VOCAB: &[&str] = &[
    "The", "the", "a", "An", "desert", "Desert.", "river", "Kalahari", "town,", "Botswana", "lies",
    "in", "of", "yes", "no", "km²", "900000", "it's", "(large)", "sandy", "ÉCOLE", "école",
];

fn words(rng: &mut ChaCha8Rng, min: usize, max: usize) -> String {
    let n = rng.random_range(min..=max);
    (0..n)
        .map(|_| *VOCAB.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn all_facts(context: &[Article]) -> Vec<FactRef> {
    context
        .iter()
        .flat_map(|a| (0..a.sentences.len()).map(move |i| FactRef::new(a.title.clone(), i)))
        .collect()
}

fn random_subset(rng: &mut ChaCha8Rng, facts: &[FactRef], p: f64) -> FactSet {
    facts
        .iter()
        .filter(|_| rng.random_bool(p))
        .cloned()
        .collect()
}

/// A context span, a yes/no answer or loose vocabulary.
fn random_answer(rng: &mut ChaCha8Rng, context: &[Article]) -> String {
    match rng.random_range(0..4) {
        0 => ["yes", "no", "Yes."].choose(rng).unwrap().to_string(),
        1 => words(rng, 0, 3),
        _ => {
            let art = context.choose(rng).unwrap();
            let sentence = art.sentences.choose(rng).unwrap();
            let toks: Vec<&str> = sentence.split_whitespace().collect();
            if toks.is_empty() {
                return String::new();
            }
            let start = rng.random_range(0..toks.len());
            let end = rng.random_range(start + 1..=toks.len().min(start + 3));
            toks[start..end].join(" ")
        }
    }
}

/// Up to `max_instances` instances of up to `max_articles` articles with up to
/// `max_sentences` sentences each.
pub fn random_corpus(
    rng: &mut ChaCha8Rng,
    max_instances: usize,
    max_articles: usize,
    max_sentences: usize,
) -> Corpus {
    let n = rng.random_range(1..=max_instances);
    let instances = (0..n)
        .map(|i| {
            let n_articles = rng.random_range(1..=max_articles);
            let context: Vec<Article> = (0..n_articles)
                .map(|a| Article {
                    title: format!("T{a}"),
                    sentences: (0..rng.random_range(1..=max_sentences))
                        .map(|_| words(rng, 1, 8))
                        .collect(),
                })
                .collect();
            let facts = all_facts(&context);
            let mut gold = random_subset(rng, &facts, 0.3);
            if gold.is_empty() {
                gold.insert(facts.choose(rng).unwrap().clone());
            }
            Instance {
                id: format!("i{i}"),
                question: "?".into(),
                gold_answer: random_answer(rng, &context),
                context,
                gold_facts: gold,
            }
        })
        .collect();
    Corpus::new(instances).unwrap()
}

/// Predictions that are sometimes missing, partial, gold or random.
pub fn random_predictions(rng: &mut ChaCha8Rng, corpus: &Corpus) -> PredictionSet {
    let mut entries = BTreeMap::new();
    for inst in corpus {
        let roll = rng.random_range(0..10);
        if roll == 0 {
            continue;
        }
        let facts = all_facts(&inst.context);
        let answer = match rng.random_range(0..5) {
            0 => None,
            1 => Some(inst.gold_answer.clone()),
            _ => Some(random_answer(rng, &inst.context)),
        };
        let facts = match rng.random_range(0..5) {
            0 => None,
            1 => Some(inst.gold_facts.clone()),
            _ => Some(random_subset(rng, &facts, 0.4)),
        };
        entries.insert(inst.id.clone(), Prediction { answer, facts });
    }
    PredictionSet::new("random", corpus, entries).unwrap()
}

/// `n` instances of 10 articles each: 2 gold articles and 8 distractors.
pub fn distractor_corpus(n: usize, seed: u64) -> Corpus {
    let mut rng = rng(seed);
    let instances = (0..n)
        .map(|i| {
            let context: Vec<Article> = (0..10)
                .map(|a| Article {
                    title: format!("Article {i}-{a}"),
                    sentences: (0..rng.random_range(2..=5))
                        .map(|_| words(&mut rng, 4, 12))
                        .collect(),
                })
                .collect();
            let gold: FactSet = [
                FactRef::new(context[0].title.clone(), 0),
                FactRef::new(context[1].title.clone(), 1),
            ]
            .into_iter()
            .collect();
            let answer = if i % 7 == 0 {
                "yes".to_string()
            } else {
                let toks: Vec<&str> = context[1].sentences[1]
                    .split_whitespace()
                    .filter(|t| !oracle::normalize(t).is_empty())
                    .collect();
                match toks.len() {
                    0 => "Botswana".to_string(),
                    n => toks[..n.min(1 + i % 3)].join(" "),
                }
            };
            Instance {
                id: format!("q{i:03}"),
                question: "?".into(),
                context,
                gold_answer: answer,
                gold_facts: gold,
            }
        })
        .collect();
    Corpus::new(instances).unwrap()
}

pub mod oracle {
    //! Straightforward re-derivation of every per-instance metric.

    use super::*;

    const PUNCT: &str = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

    pub fn normalize(s: &str) -> String {
        let mut kept = String::new();
        for c in s.to_lowercase().chars() {
            if !PUNCT.contains(c) {
                kept.push(c);
            }
        }
        let mut out: Vec<&str> = Vec::new();
        for tok in kept.split_whitespace() {
            if tok != "a" && tok != "an" && tok != "the" {
                out.push(tok);
            }
        }
        out.join(" ")
    }

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Level {
        pub em: f64,
        pub p: f64,
        pub r: f64,
        pub f1: f64,
    }

    fn level(em: bool, p: f64, r: f64) -> Level {
        Level {
            em: if em { 1.0 } else { 0.0 },
            p,
            r,
            f1: if p + r > 0.0 {
                2.0 * p * r / (p + r)
            } else {
                0.0
            },
        }
    }

    const ZERO: Level = Level {
        em: 0.0,
        p: 0.0,
        r: 0.0,
        f1: 0.0,
    };

    pub fn answer(pred: &str, gold: &str) -> Level {
        let (np, ng) = (normalize(pred), normalize(gold));
        let pt: Vec<&str> = np.split_whitespace().collect();
        let mut gt: Vec<&str> = ng.split_whitespace().collect();
        let gold_len = gt.len();
        let mut common = 0usize;
        for t in &pt {
            if let Some(pos) = gt.iter().position(|g| g == t) {
                gt.remove(pos);
                common += 1;
            }
        }
        let p = if pt.is_empty() {
            0.0
        } else {
            common as f64 / pt.len() as f64
        };
        let r = if gold_len == 0 {
            0.0
        } else {
            common as f64 / gold_len as f64
        };
        level(np == ng, p, r)
    }

    pub fn sp(pred: &[(String, usize)], gold: &[(String, usize)]) -> Level {
        if pred.is_empty() && gold.is_empty() {
            return level(true, 1.0, 1.0);
        }
        let common = pred.iter().filter(|f| gold.contains(f)).count();
        let same = pred.len() == gold.len() && common == pred.len();
        let p = if pred.is_empty() {
            0.0
        } else {
            common as f64 / pred.len() as f64
        };
        let r = if gold.is_empty() {
            0.0
        } else {
            common as f64 / gold.len() as f64
        };
        level(same, p, r)
    }

    #[derive(Debug, Clone, PartialEq)]
    pub struct Scores {
        pub answer: Level,
        pub sp: Level,
        pub joint: Level,
        /// Some(true) inside, Some(false) outside, None not counted.
        pub inside: Option<bool>,
        pub num_facts: usize,
        pub num_words: usize,
        pub num_excess: i64,
    }

    fn pairs(facts: &FactSet) -> Vec<(String, usize)> {
        facts
            .iter()
            .map(|f| (f.title.clone(), f.sentence_index))
            .collect()
    }

    pub fn score(inst: &Instance, pred: Option<&Prediction>) -> Scores {
        let answer_text = pred.and_then(|p| p.answer.clone());
        let pred_facts = pred.and_then(|p| p.facts.as_ref()).map(pairs);
        let gold = pairs(&inst.gold_facts);
        let a = answer_text
            .as_deref()
            .map_or(ZERO, |t| answer(t, &inst.gold_answer));
        let s = pred_facts.as_deref().map_or(ZERO, |f| sp(f, &gold));
        let jp = a.p * s.p;
        let jr = a.r * s.r;
        let joint = Level {
            em: a.em * s.em,
            p: jp,
            r: jr,
            f1: if jp + jr > 0.0 {
                2.0 * jp * jr / (jp + jr)
            } else {
                0.0
            },
        };
        let chosen = pred_facts.unwrap_or_default();
        let mut sentences = Vec::new();
        for art in &inst.context {
            for (i, s) in art.sentences.iter().enumerate() {
                if chosen.contains(&(art.title.clone(), i)) {
                    sentences.push(s.as_str());
                }
            }
        }
        let inside = answer_text.and_then(|t| {
            let n = normalize(&t);
            if n.is_empty() || n == "yes" || n == "no" {
                None
            } else {
                Some(normalize(&sentences.join(" ")).contains(&n))
            }
        });
        Scores {
            answer: a,
            sp: s,
            joint,
            inside,
            num_facts: chosen.len(),
            num_words: sentences.iter().map(|s| s.split_whitespace().count()).sum(),
            num_excess: chosen.len() as i64 - gold.len() as i64,
        }
    }
}
