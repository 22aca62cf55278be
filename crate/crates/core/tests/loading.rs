mod common;

use std::fs;

use pareval::corpus::{
    load_gold, load_predictions, load_ratings, load_submissions, Corpus, PredictionOptions,
    PredictionSet, Warning,
};
use pareval::metrics::evaluate_system;
use pareval::synth::{derive_synthetic, SyntheticVariant};
use pareval::table::load_direction_spec;
use pareval::Error;
use proptest::prelude::*;

use common::{fixture, random_corpus, random_predictions, rng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corpus_and_predictions_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let corpus = random_corpus(&mut r, 6, 3, 4);
        let again = Corpus::from_json_str(&corpus.to_json_string()).unwrap().value;
        prop_assert_eq!(&again, &corpus);

        let preds = random_predictions(&mut r, &corpus);
        let text = preds.to_json_string();
        let reloaded = PredictionSet::from_json_str(&text, "random", &corpus, PredictionOptions::default()).unwrap().value;
        prop_assert_eq!(reloaded.to_json_string(), text);
        for inst in &corpus {
            let (a, b) = (preds.get(&inst.id), reloaded.get(&inst.id));
            let a_empty = a.is_none_or(|p| p.answer.is_none() && p.facts.is_none());
            let b_empty = b.is_none_or(|p| p.answer.is_none() && p.facts.is_none());
            if !(a_empty && b_empty) {
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn instance_order_does_not_change_scores(seed in any::<u64>(), shift in 1usize..6) {
        let mut r = rng(seed);
        let corpus = random_corpus(&mut r, 6, 3, 4);
        let preds = random_predictions(&mut r, &corpus);
        let mut rotated = corpus.instances().to_vec();
        let k = shift % rotated.len();
        rotated.rotate_left(k);
        let permuted = Corpus::new(rotated).unwrap();
        prop_assert!(permuted.same_instances(&corpus));
        let preds2 = PredictionSet::from_json_str(&preds.to_json_string(), "random", &permuted, PredictionOptions::default()).unwrap().value;
        let a = evaluate_system::<f64>(&corpus, &preds).unwrap().scores;
        let b = evaluate_system::<f64>(&permuted, &preds2).unwrap().scores;
        prop_assert_eq!(a.loca_counts, b.loca_counts);
        for (name, v) in &a.metrics {
            prop_assert!((v - b.metrics[name]).abs() < 1e-12, "{}", name);
        }
    }
}

#[test]
fn fixture_gold_loads_and_scores_itself() {
    let corpus = load_gold(fixture("toy_gold.json")).unwrap();
    assert!(corpus.warnings.is_empty());
    let corpus = corpus.value;
    assert_eq!(corpus.len(), 3);
    let gold = derive_synthetic(&corpus, SyntheticVariant::GoldGold, 0).unwrap();
    let eval = evaluate_system::<f64>(&corpus, &gold).unwrap();
    assert_eq!(eval.scores.get("joint_f1"), Some(1.0));
    assert_eq!(eval.scores.loca, Some(1.0));
    // the yes/no question is not counted
    assert_eq!(
        (
            eval.scores.loca_counts.inside,
            eval.scores.loca_counts.total
        ),
        (2, 2)
    );
}

#[test]
fn file_loaders_report_problems() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = load_gold(fixture("toy_gold.json")).unwrap().value;

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "[\n  {\"_id\": \"x\",,}\n]").unwrap();
    match load_gold(&bad) {
        Err(Error::Parse { line, offset, .. }) => assert_eq!((line, offset), (2, 16)),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        load_gold(dir.path().join("absent.json")),
        Err(Error::Io { .. })
    ));

    let partial = dir.path().join("partial.json");
    fs::write(&partial, r#"{"answer": {"q1": "Kalahari", "q2": "yes"}, "sp": {"q1": [["Ghanzi", 0]], "q2": [["Namib", 0]]}}"#).unwrap();
    let loaded = load_predictions(&partial, "p", &corpus, PredictionOptions::default()).unwrap();
    assert_eq!(loaded.value.missing(), ["q3"]);
    assert!(matches!(
        loaded.warnings[..],
        [Warning::MissingPrediction { .. }]
    ));
    assert!(matches!(
        load_predictions(&partial, "p", &corpus, PredictionOptions { strict: true }),
        Err(Error::MissingPredictions(ref ids)) if ids == &["q3".to_string()]
    ));

    let spec = load_direction_spec(fixture("human_ratings_directions.json")).unwrap();
    let ratings = load_ratings(fixture("human_ratings.csv"), &spec)
        .unwrap()
        .value;
    assert_eq!((ratings.len(), ratings.dimensions().len()), (15, 6));

    let subs = dir.path().join("subs.csv");
    fs::write(&subs, "system_id,submitted_on\nsysA,2020-03-01\n").unwrap();
    assert_eq!(load_submissions(&subs).unwrap().len(), 1);
    fs::write(&subs, "system_id,submitted_on\nsysA,March 2020\n").unwrap();
    assert!(matches!(
        load_submissions(&subs),
        Err(Error::BadDate { .. })
    ));
}
