//! Synthetic baseline systems derived from gold annotations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, FactRef, FactSet, Instance, Prediction, PredictionSet};
use crate::error::{Error, Result};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SyntheticVariant {
    GoldGold,
    GoldAnswersRandomFacts,
    RandomAnswersGoldFacts,
    RandomAnswersRandomFacts,
    GoldAnswersAllFacts,
}

impl SyntheticVariant {
    pub const ALL: [SyntheticVariant; 5] = [
        SyntheticVariant::GoldGold,
        SyntheticVariant::GoldAnswersRandomFacts,
        SyntheticVariant::RandomAnswersGoldFacts,
        SyntheticVariant::RandomAnswersRandomFacts,
        SyntheticVariant::GoldAnswersAllFacts,
    ];

    /// Snake-case name, used as the system id of derived prediction sets.
    pub fn name(self) -> &'static str {
        match self {
            SyntheticVariant::GoldGold => "gold_gold",
            SyntheticVariant::GoldAnswersRandomFacts => "gold_answers_random_facts",
            SyntheticVariant::RandomAnswersGoldFacts => "random_answers_gold_facts",
            SyntheticVariant::RandomAnswersRandomFacts => "random_answers_random_facts",
            SyntheticVariant::GoldAnswersAllFacts => "gold_answers_all_facts",
        }
    }

    fn random_answers(self) -> bool {
        matches!(
            self,
            SyntheticVariant::RandomAnswersGoldFacts | SyntheticVariant::RandomAnswersRandomFacts
        )
    }

    fn random_facts(self) -> bool {
        matches!(
            self,
            SyntheticVariant::GoldAnswersRandomFacts | SyntheticVariant::RandomAnswersRandomFacts
        )
    }
}

impl fmt::Display for SyntheticVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticVariant {
    type Err = Error;

    /// Accepts snake-case or kebab-case names.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        SyntheticVariant::ALL
            .into_iter()
            .find(|v| v.name() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown synthetic variant {s:?}")))
    }
}

/// Uniform contiguous span of `len` whitespace tokens over all
/// (article, start-token) positions of the context.
fn random_span(instance: &Instance, len: usize, rng: &mut ChaCha8Rng) -> Option<String> {
    if len == 0 {
        return Some(String::new());
    }
    let articles: Vec<Vec<&str>> = instance
        .context
        .iter()
        .map(|a| {
            a.sentences
                .iter()
                .flat_map(|s| s.split_whitespace())
                .collect()
        })
        .collect();
    let starts = |tokens: &Vec<&str>| (tokens.len() + 1).saturating_sub(len);
    let total: usize = articles.iter().map(starts).sum();
    if total == 0 {
        return None;
    }
    let mut pick = rng.random_range(0..total);
    for tokens in &articles {
        let n = starts(tokens);
        if pick < n {
            return Some(tokens[pick..pick + len].join(" "));
        }
        pick -= n;
    }
    unreachable!("pick < total")
}

/// `|gold|` facts drawn without replacement from articles holding no gold fact.
fn random_facts(instance: &Instance, rng: &mut ChaCha8Rng) -> Option<FactSet> {
    let eligible: Vec<FactRef> = instance
        .context
        .iter()
        .filter(|a| !instance.gold_facts.iter().any(|f| f.title == a.title))
        .flat_map(|a| {
            (0..a.sentences.len()).map(|i| FactRef {
                title: a.title.clone(),
                sentence_index: i,
            })
        })
        .collect();
    let k = instance.gold_facts.len();
    if eligible.len() < k {
        return None;
    }
    Some(
        index::sample(rng, eligible.len(), k)
            .into_iter()
            .map(|i| eligible[i].clone())
            .collect(),
    )
}

fn derive_instance(
    instance: &Instance,
    variant: SyntheticVariant,
    seed: u64,
) -> Option<Prediction> {
    let id = instance.id.as_bytes();
    let answer = if variant.random_answers() {
        let len = instance.gold_answer.split_whitespace().count();
        random_span(instance, len, &mut substream(seed, &[id, b"answer"]))?
    } else {
        instance.gold_answer.clone()
    };
    let facts = match variant {
        SyntheticVariant::GoldAnswersAllFacts => instance.all_facts().collect(),
        v if v.random_facts() => random_facts(instance, &mut substream(seed, &[id, b"facts"]))?,
        _ => instance.gold_facts.clone(),
    };
    Some(Prediction {
        answer: Some(answer),
        facts: Some(facts),
    })
}

/// Derives one synthetic system. Each instance draws from its own substream
/// keyed by instance id, so results do not depend on corpus order or size.
pub fn derive_synthetic(
    corpus: &Corpus,
    variant: SyntheticVariant,
    seed: u64,
) -> Result<PredictionSet> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut entries = BTreeMap::new();
    let mut infeasible = Vec::new();
    for inst in corpus {
        match derive_instance(inst, variant, seed) {
            Some(p) => {
                entries.insert(inst.id.clone(), p);
            }
            None => infeasible.push(inst.id.clone()),
        }
    }
    if !infeasible.is_empty() {
        return Err(Error::InfeasibleSampling(infeasible));
    }
    PredictionSet::new(variant.name(), corpus, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Article;
    use crate::metrics::{evaluate_system, SystemEvaluation};

    fn inst(id: &str, answer: &str) -> Instance {
        Instance {
            id: id.into(),
            question: "?".into(),
            context: vec![
                Article {
                    title: "Gold1".into(),
                    sentences: vec!["Alpha beta gamma.".into(), "Delta epsilon.".into()],
                },
                Article {
                    title: "Gold2".into(),
                    sentences: vec!["Zeta eta theta iota.".into()],
                },
                Article {
                    title: "Other".into(),
                    sentences: vec![
                        "Kappa lambda.".into(),
                        "Mu nu xi.".into(),
                        "Omicron pi.".into(),
                    ],
                },
            ],
            gold_answer: answer.into(),
            gold_facts: [FactRef::new("Gold1", 0), FactRef::new("Gold2", 0)]
                .into_iter()
                .collect(),
        }
    }

    fn corpus() -> Corpus {
        Corpus::new(vec![
            inst("a", "beta gamma"),
            inst("b", "yes"),
            inst("c", "eta theta iota"),
        ])
        .unwrap()
    }

    #[test]
    fn names_parse_both_ways() {
        for v in SyntheticVariant::ALL {
            assert_eq!(v.name().parse::<SyntheticVariant>().unwrap(), v);
            assert_eq!(
                v.name()
                    .replace('_', "-")
                    .parse::<SyntheticVariant>()
                    .unwrap(),
                v
            );
        }
        assert!("random-answers-all-facts"
            .parse::<SyntheticVariant>()
            .is_err());
    }

    #[test]
    fn gold_gold_is_perfect() {
        let c = corpus();
        let p = derive_synthetic(&c, SyntheticVariant::GoldGold, 1).unwrap();
        let e: SystemEvaluation = evaluate_system(&c, &p).unwrap();
        assert_eq!(e.scores.get("joint_f1"), Some(1.0));
        assert_eq!(e.scores.get("sp_em"), Some(1.0));
    }

    #[test]
    fn random_facts_avoid_gold_articles() {
        let c = corpus();
        for seed in 0..20 {
            let p = derive_synthetic(&c, SyntheticVariant::GoldAnswersRandomFacts, seed).unwrap();
            for i in &c {
                let facts = p.get(&i.id).unwrap().facts.as_ref().unwrap();
                assert_eq!(facts.len(), 2);
                assert!(facts.iter().all(|f| f.title == "Other"));
            }
        }
    }

    #[test]
    fn random_answers_keep_length() {
        let c = corpus();
        let p = derive_synthetic(&c, SyntheticVariant::RandomAnswersRandomFacts, 3).unwrap();
        for i in &c {
            let a = p.get(&i.id).unwrap().answer.as_ref().unwrap();
            assert_eq!(
                a.split_whitespace().count(),
                i.gold_answer.split_whitespace().count()
            );
        }
    }

    #[test]
    fn all_facts_covers_context() {
        let c = corpus();
        let p = derive_synthetic(&c, SyntheticVariant::GoldAnswersAllFacts, 0).unwrap();
        for i in &c {
            assert_eq!(p.get(&i.id).unwrap().facts.as_ref().unwrap().len(), 6);
        }
    }

    #[test]
    fn infeasible_sampling_lists_ids() {
        let mut tight = inst("t", "x");
        tight.context.truncate(2);
        let c = Corpus::new(vec![inst("a", "beta"), tight]).unwrap();
        match derive_synthetic(&c, SyntheticVariant::GoldAnswersRandomFacts, 0).unwrap_err() {
            Error::InfeasibleSampling(ids) => assert_eq!(ids, ["t"]),
            e => panic!("unexpected {e:?}"),
        }
        let mut long = inst("l", "one two three four five six seven eight");
        long.gold_answer = "w ".repeat(50);
        let c = Corpus::new(vec![long]).unwrap();
        assert!(derive_synthetic(&c, SyntheticVariant::RandomAnswersGoldFacts, 0).is_err());
    }

    #[test]
    fn draws_depend_only_on_instance_id() {
        let c = corpus();
        let small = Corpus::new(vec![inst("c", "eta theta iota")]).unwrap();
        let v = SyntheticVariant::RandomAnswersRandomFacts;
        let big = derive_synthetic(&c, v, 11).unwrap();
        let one = derive_synthetic(&small, v, 11).unwrap();
        assert_eq!(big.get("c"), one.get("c"));
    }
}
