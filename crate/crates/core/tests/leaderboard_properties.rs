mod common;

use std::collections::BTreeMap;

use num_rational::Ratio;
use pareval::leaderboard::{
    dominates, rank_average, rank_single, rank_weighted, ranked_pareto_fronts, RankingInput,
};
use pareval::table::{load_direction_spec, CsvOptions, Direction, Table};
use proptest::prelude::*;

use common::fixture;

fn input_strategy() -> impl Strategy<Value = (Vec<Direction>, Vec<Vec<i64>>)> {
    (1usize..=5, 1usize..=20).prop_flat_map(|(d, n)| {
        (
            prop::collection::vec(
                prop::bool::ANY.prop_map(|h| {
                    if h {
                        Direction::Higher
                    } else {
                        Direction::Lower
                    }
                }),
                d,
            ),
            prop::collection::vec(prop::collection::vec(0i64..5, d), n),
        )
    })
}

fn build<T: Clone + PartialOrd + std::fmt::Debug>(
    dirs: &[Direction],
    values: Vec<Vec<T>>,
) -> RankingInput<T> {
    let n = values.len();
    RankingInput::new(
        (0..n).map(|i| format!("s{i:02}")).collect(),
        (0..dirs.len()).map(|k| format!("d{k}")).collect(),
        dirs.to_vec(),
        values,
    )
    .unwrap()
}

proptest! {
    #[test]
    fn extra_dimensions_keep_front_one((dirs, values) in input_strategy(), extra in prop::collection::vec(0i64..5, 20)) {
        let base = ranked_pareto_fronts(&build(&dirs, values.clone()));
        let mut wider_dirs = dirs.clone();
        wider_dirs.push(Direction::Lower);
        let wider_values = values.iter().zip(&extra).map(|(r, e)| {
            let mut r = r.clone();
            r.push(*e);
            r
        }).collect();
        let wider = ranked_pareto_fronts(&build(&wider_dirs, wider_values));
        // Holds for systems whose vector no other system repeats on the
        // original dimensions; a tie can be broken by the new dimension.
        for s in &base.fronts[0] {
            let i: usize = s[1..].parse().unwrap();
            let tied = values.iter().enumerate().any(|(j, v)| j != i && *v == values[i]);
            if !tied {
                prop_assert_eq!(wider.rank[s], 1);
            }
        }
    }

    #[test]
    fn input_order_is_irrelevant((dirs, values) in input_strategy(), shift in 0usize..20) {
        let forward = build(&dirs, values.clone());
        let n = values.len();
        let order: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let shuffled = RankingInput::new(
            order.iter().map(|&i| format!("s{i:02}")).collect(),
            forward.dimensions().to_vec(),
            dirs.clone(),
            order.iter().map(|&i| values[i].clone()).collect(),
        ).unwrap();
        prop_assert_eq!(ranked_pareto_fronts(&forward), ranked_pareto_fronts(&shuffled));
        let a = rank_single(&forward, "d0", &[]).unwrap();
        let b = rank_single(&shuffled, "d0", &[]).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn exact_and_float_rankings_agree((dirs, values) in input_strategy()) {
        let floats = build(&dirs, values.iter().map(|r| r.iter().map(|v| *v as f64).collect()).collect());
        let exact = build(&dirs, values.iter().map(|r| r.iter().map(|v| Ratio::from_integer(*v)).collect()).collect());
        prop_assert_eq!(ranked_pareto_fronts(&floats), ranked_pareto_fronts(&exact));
        let fa: Vec<Vec<String>> = rank_average(&floats).unwrap().order.into_iter().map(|g| g.systems).collect();
        let ea: Vec<Vec<String>> = rank_average(&exact).unwrap().order.into_iter().map(|g| g.systems).collect();
        prop_assert_eq!(fa, ea);
    }

    #[test]
    fn single_score_groups_are_ordered((dirs, values) in input_strategy()) {
        let input = build(&dirs, values.iter().map(|r| r.iter().map(|v| *v as f64).collect()).collect());
        let ranked = rank_single(&input, "d0", &[]).unwrap();
        let mut seen = 0;
        for pair in ranked.order.windows(2) {
            let (a, b) = (pair[0].score.unwrap(), pair[1].score.unwrap());
            prop_assert!(dirs[0].compare(&a, &b) == Some(std::cmp::Ordering::Greater));
        }
        for g in &ranked.order {
            prop_assert_eq!(g.rank, seen + 1);
            seen += g.systems.len();
        }
        prop_assert_eq!(seen, values.len());
    }
}

fn human_ratings() -> RankingInput<f64> {
    let spec = load_direction_spec(fixture("human_ratings_directions.json")).unwrap();
    let table = Table::load_csv(
        fixture("human_ratings.csv"),
        Some(&spec),
        CsvOptions::default(),
    )
    .unwrap();
    RankingInput::from_table(&table, None, false).unwrap().0
}

#[test]
fn usability_has_a_four_way_tie() {
    let ranked = rank_single(&human_ratings(), "usability", &[]).unwrap();
    let tie = ranked.order.iter().find(|g| g.score == Some(86.7)).unwrap();
    assert_eq!(tie.systems, ["amgn", "longformer", "sae", "text_can"]);
    assert_eq!(ranked.order[0].systems, ["fe2h_albert"]);
}

#[test]
fn printed_ratings_make_hgn_dominate_irc() {
    let input = human_ratings();
    let hgn = input.vector("hgn").unwrap();
    let irc = input.vector("irc").unwrap();
    assert!(dominates(hgn, irc, input.directions()).unwrap());
}

#[test]
fn weighted_score_is_f1_minus_time() {
    let input = RankingInput::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec!["f1".into(), "time".into()],
        vec![Direction::Higher, Direction::Lower],
        vec![vec![0.8, 0.3], vec![0.5, 0.1], vec![0.9, 0.9]],
    )
    .unwrap();
    let w: BTreeMap<String, f64> = [("f1".into(), 1.0), ("time".into(), 1.0)]
        .into_iter()
        .collect();
    let ranked = rank_weighted(&input, &w).unwrap();
    let scores: Vec<(String, f64)> = ranked
        .order
        .iter()
        .map(|g| (g.systems[0].clone(), g.score.unwrap()))
        .collect();
    assert_eq!(scores[0].0, "a");
    assert!((scores[0].1 - 0.5).abs() < 1e-15);
    assert_eq!(scores[1].0, "b");
    assert!((scores[1].1 - 0.4).abs() < 1e-15);
    assert_eq!(scores[2].0, "c");
    assert!(scores[2].1.abs() < 1e-15);
}
