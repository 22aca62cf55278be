//! Serialization of results into the on-disk artifact formats.
//!
//! JSON artifacts carry a top-level `format_version` and are emitted with
//! sorted object keys, so two runs with equal results produce equal bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::leaderboard::{OrderedRanking, ParetoRanking, RankingInput, Score};
use crate::metrics::{LocaCounts, SystemEvaluation, SystemScores, METRIC_NAMES};
use crate::scalar::Real;
use crate::stats::{CorrelationMatrix, CorrelationResult, DriftSeries, FactorModel, PoolCurve};
use crate::table::{Direction, Table};
use crate::FORMAT_VERSION;

/// Loadings below this magnitude are blanked in Markdown factor tables.
pub const DEFAULT_LOADING_THRESHOLD: f64 = 0.3;

fn number<F: Real>(x: F) -> Value {
    serde_json::Number::from_f64(x.as_f64()).map_or(Value::Null, Value::Number)
}

fn to_pretty(value: &Value) -> Result<String> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Serialize(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn versioned(mut body: Map<String, Value>) -> Value {
    body.insert("format_version".into(), json!(FORMAT_VERSION));
    Value::Object(body)
}

fn cell<F: Real>(x: Option<F>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

pub fn system_scores_json<F: Real>(scores: &SystemScores<F>) -> Result<String> {
    let mut metrics = Map::new();
    for (name, v) in &scores.metrics {
        metrics.insert(name.clone(), number(*v));
    }
    metrics.insert("loca".into(), scores.loca.map_or(Value::Null, number));
    let mut body = Map::new();
    body.insert("system_id".into(), json!(scores.system_id));
    body.insert("metrics".into(), Value::Object(metrics));
    body.insert(
        "loca_counts".into(),
        serde_json::to_value(scores.loca_counts).map_err(|e| Error::Serialize(e.to_string()))?,
    );
    to_pretty(&versioned(body))
}

#[derive(serde::Deserialize)]
struct ScoresFile {
    system_id: String,
    metrics: BTreeMap<String, Option<f64>>,
    #[serde(default)]
    loca_counts: LocaCounts,
}

/// Reads a system score file written by [`system_scores_json`].
pub fn parse_system_scores(text: &str) -> Result<SystemScores<f64>> {
    let file: ScoresFile = serde_json::from_str(text).map_err(|e| Error::json(text, &e))?;
    let mut metrics = BTreeMap::new();
    let mut loca = None;
    for (name, v) in file.metrics {
        if name == "loca" {
            loca = v;
        } else if let Some(v) = v {
            metrics.insert(name, v);
        }
    }
    Ok(SystemScores {
        system_id: file.system_id,
        metrics,
        loca,
        loca_counts: file.loca_counts,
    })
}

/// One row per instance: every per-instance metric plus the answer location.
pub fn instance_csv<F: Real>(evaluation: &SystemEvaluation<F>) -> String {
    let mut out = String::from("instance_id");
    for name in METRIC_NAMES.iter().filter(|n| **n != "loca") {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",location\n");
    for (id, scores) in &evaluation.instances {
        out.push_str(&crate::table::csv_field(id));
        for (_, v) in scores.values() {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{}", scores.location);
    }
    out
}

/// Stacks per-system scores into a table with one column per metric, in
/// metric-name order. Every metric is treated as higher-is-better unless
/// listed in `lower`.
pub fn score_table<F: Real>(scores: &[SystemScores<F>], lower: &[String]) -> Result<Table<F>> {
    let mut names: Vec<String> = METRIC_NAMES
        .iter()
        .filter(|m| scores.iter().any(|s| s.get(m).is_some()))
        .map(|m| m.to_string())
        .collect();
    for s in scores {
        for m in s.metrics.keys() {
            if !names.contains(m) {
                names.push(m.clone());
            }
        }
    }
    let directions = names
        .iter()
        .map(|n| {
            if lower.contains(n) {
                Direction::Lower
            } else {
                Direction::Higher
            }
        })
        .collect();
    let values = scores
        .iter()
        .map(|s| names.iter().map(|n| s.get(n)).collect())
        .collect();
    Table::new(
        scores.iter().map(|s| s.system_id.clone()).collect(),
        names,
        directions,
        values,
    )
}

fn correlation_cell<F: Real>(r: Option<&CorrelationResult<F>>) -> String {
    match r {
        Some(r) => format!(
            "{};{};{};{}",
            r.coefficient,
            r.p_raw,
            cell(r.p_adjusted),
            r.n
        ),
        None => "NA".into(),
    }
}

/// Rows are metrics, columns are ratings; cells read `coef;p_raw;p_adj;n`.
pub fn correlation_csv<F: Real>(matrix: &CorrelationMatrix<F>) -> String {
    let mut out = String::from("metric");
    for r in &matrix.ratings {
        out.push(',');
        out.push_str(&crate::table::csv_field(r));
    }
    out.push('\n');
    for (m, row) in matrix.metrics.iter().zip(&matrix.cells) {
        out.push_str(&crate::table::csv_field(m));
        for c in row {
            out.push(',');
            out.push_str(&correlation_cell(c.as_ref()));
        }
        out.push('\n');
    }
    out
}

pub fn correlation_json<F: Real>(matrix: &CorrelationMatrix<F>) -> Result<String> {
    let mut cells = Map::new();
    for (m, row) in matrix.metrics.iter().zip(&matrix.cells) {
        let mut by_rating = Map::new();
        for (r, c) in matrix.ratings.iter().zip(row) {
            let v = match c {
                Some(c) => json!({
                    "coefficient": number(c.coefficient),
                    "p_raw": number(c.p_raw),
                    "p_adjusted": c.p_adjusted.map_or(Value::Null, number),
                    "n": c.n,
                    "p_method": c.p_method,
                }),
                None => Value::Null,
            };
            by_rating.insert(r.clone(), v);
        }
        cells.insert(m.clone(), Value::Object(by_rating));
    }
    let mut body = Map::new();
    body.insert("method".into(), json!(matrix.method.to_string()));
    body.insert("systems".into(), json!(matrix.systems));
    body.insert("cells".into(), Value::Object(cells));
    to_pretty(&versioned(body))
}

pub fn correlation_markdown<F: Real>(matrix: &CorrelationMatrix<F>) -> String {
    let mut out = String::from("| metric |");
    for r in &matrix.ratings {
        let _ = write!(out, " {r} |");
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(matrix.ratings.len()));
    out.push('\n');
    for (m, row) in matrix.metrics.iter().zip(&matrix.cells) {
        let _ = write!(out, "| {m} |");
        for c in row {
            match c {
                Some(c) => {
                    let star = match c.p_adjusted {
                        Some(p) if p.as_f64() < 0.05 => "*",
                        _ => "",
                    };
                    let _ = write!(out, " {:.2}{star} |", c.coefficient.as_f64());
                }
                None => out.push_str(" NA |"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn drift_csv<F: Real>(series: &DriftSeries<F>) -> String {
    let mut out = String::from("window_start,window_end,rating,coef,p,n\n");
    for w in &series.windows {
        for (rating, r) in &w.correlations {
            let (coef, p, n) = match r {
                Some(r) => (r.coefficient.to_string(), r.p_raw.to_string(), r.n),
                None => ("NA".into(), "NA".into(), w.systems.len()),
            };
            let _ = writeln!(
                out,
                "{},{},{},{coef},{p},{n}",
                w.start.format("%Y-%m-%d"),
                w.end.format("%Y-%m-%d"),
                crate::table::csv_field(rating)
            );
        }
    }
    out
}

pub fn drift_json<F: Real>(series: &DriftSeries<F>) -> Result<String> {
    let windows: Vec<Value> = series
        .windows
        .iter()
        .map(|w| {
            let mut cors = Map::new();
            for (rating, r) in &w.correlations {
                cors.insert(
                    rating.clone(),
                    match r {
                        Some(r) => json!({"coefficient": number(r.coefficient), "p": number(r.p_raw), "n": r.n}),
                        None => Value::Null,
                    },
                );
            }
            json!({
                "start": w.start.format("%Y-%m-%d").to_string(),
                "end": w.end.format("%Y-%m-%d").to_string(),
                "systems": w.systems,
                "correlations": cors,
            })
        })
        .collect();
    let mut body = Map::new();
    body.insert("target_metric".into(), json!(series.target_metric));
    body.insert("windows".into(), Value::Array(windows));
    to_pretty(&versioned(body))
}

fn matrix_json<F: Real>(m: &[Vec<F>]) -> Value {
    Value::Array(
        m.iter()
            .map(|row| Value::Array(row.iter().map(|v| number(*v)).collect()))
            .collect(),
    )
}

pub fn factor_json<F: Real>(model: &FactorModel<F>) -> Result<String> {
    let mut body = Map::new();
    body.insert("variables".into(), json!(model.variables));
    body.insert("k".into(), json!(model.k));
    body.insert(
        "eigenvalues".into(),
        Value::Array(model.eigenvalues.iter().map(|v| number(*v)).collect()),
    );
    body.insert("loadings".into(), matrix_json(&model.loadings));
    body.insert("unrotated_loadings".into(), matrix_json(&model.unrotated));
    body.insert("rotation".into(), matrix_json(&model.rotation));
    body.insert(
        "explained_variance".into(),
        Value::Array(
            model
                .explained_variance
                .iter()
                .map(|v| number(*v))
                .collect(),
        ),
    );
    body.insert(
        "communalities".into(),
        Value::Array(model.communalities().into_iter().map(number).collect()),
    );
    let assignments: Map<String, Value> = model
        .variables
        .iter()
        .zip(&model.assignments)
        .map(|(v, f)| (v.clone(), json!(f + 1)))
        .collect();
    body.insert("assignments".into(), Value::Object(assignments));
    to_pretty(&versioned(body))
}

/// Rotated loadings with one column per factor; loadings whose magnitude is
/// below `threshold` are left blank.
pub fn factor_markdown<F: Real>(model: &FactorModel<F>, threshold: f64) -> String {
    let mut out = String::from("| variable |");
    for f in 1..=model.k {
        let _ = write!(out, " F{f} |");
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(model.k));
    out.push('\n');
    for (v, row) in model.variables.iter().zip(&model.loadings) {
        let _ = write!(out, "| {v} |");
        for l in row {
            let l = l.as_f64();
            if l.abs() < threshold {
                out.push_str("  |");
            } else {
                let _ = write!(out, " {l:.2} |");
            }
        }
        out.push('\n');
    }
    out.push_str("| explained variance |");
    for e in &model.explained_variance {
        let _ = write!(out, " {:.2} |", e.as_f64());
    }
    out.push('\n');
    out
}

pub fn pareto_json(ranking: &ParetoRanking) -> Result<String> {
    let mut body = Map::new();
    body.insert("strategy".into(), json!("pareto"));
    body.insert("fronts".into(), json!(ranking.fronts));
    to_pretty(&versioned(body))
}

pub fn ordered_json<T: Score + Serialize>(ranking: &OrderedRanking<T>) -> Result<String> {
    let order: Vec<Value> = ranking
        .order
        .iter()
        .map(|g| json!({"rank": g.rank, "systems": g.systems}))
        .collect();
    let mut body = Map::new();
    body.insert("strategy".into(), json!(ranking.strategy));
    body.insert("order".into(), Value::Array(order));
    to_pretty(&versioned(body))
}

fn value_columns<T: Score>(
    input: &RankingInput<T>,
    system: &str,
    fmt: &dyn Fn(&T) -> String,
) -> String {
    input
        .vector(system)
        .map(|v| v.iter().map(|x| format!(" {} |", fmt(x))).collect())
        .unwrap_or_default()
}

fn header<T: Score>(first: &str, input: &RankingInput<T>) -> String {
    let mut out = format!("| {first} | system |");
    for (d, dir) in input.dimensions().iter().zip(input.directions()) {
        let arrow = match dir {
            Direction::Higher => "↑",
            Direction::Lower => "↓",
        };
        let _ = write!(out, " {d} {arrow} |");
    }
    out.push_str("\n|---:|---|");
    out.push_str(&"---:|".repeat(input.dimensions().len()));
    out.push('\n');
    out
}

/// One row per system grouped by front, followed by its dimension values.
pub fn pareto_markdown<T: Score>(
    ranking: &ParetoRanking,
    input: &RankingInput<T>,
    fmt: &dyn Fn(&T) -> String,
) -> String {
    let mut out = header("front", input);
    for (i, front) in ranking.fronts.iter().enumerate() {
        for s in front {
            let _ = writeln!(out, "| {} | {s} |{}", i + 1, value_columns(input, s, fmt));
        }
    }
    out
}

pub fn ordered_markdown<T: Score>(
    ranking: &OrderedRanking<T>,
    input: &RankingInput<T>,
    fmt: &dyn Fn(&T) -> String,
) -> String {
    let mut out = header("rank", input);
    for g in &ranking.order {
        for s in &g.systems {
            let _ = writeln!(out, "| {} | {s} |{}", g.rank, value_columns(input, s, fmt));
        }
    }
    out
}

pub fn pool_csv<F: Real>(curve: &PoolCurve<F>) -> String {
    let mut out = String::from("pool_size,rating,mean_tau,sd_tau,valid\n");
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.pool_size,
            crate::table::csv_field(&p.rating),
            cell(p.mean_tau),
            cell(p.sd_tau),
            p.valid
        );
    }
    out
}

pub fn pool_json<F: Real>(curve: &PoolCurve<F>) -> Result<String> {
    let points: Vec<Value> = curve
        .points
        .iter()
        .map(|p| {
            json!({
                "pool_size": p.pool_size,
                "rating": p.rating,
                "mean_tau": p.mean_tau.map_or(Value::Null, number),
                "sd_tau": p.sd_tau.map_or(Value::Null, number),
                "valid": p.valid,
            })
        })
        .collect();
    let full: Map<String, Value> = curve
        .full
        .iter()
        .map(|(r, t)| (r.clone(), t.map_or(Value::Null, number)))
        .collect();
    let mut body = Map::new();
    body.insert("points".into(), Value::Array(points));
    body.insert("full_pool".into(), Value::Object(full));
    to_pretty(&versioned(body))
}

/// Markdown leaderboard of a score table, one row per system, four decimals.
pub fn table_markdown<F: Real>(table: &Table<F>) -> String {
    let mut out = String::from("| system |");
    for d in table.dimensions() {
        let _ = write!(out, " {d} |");
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(table.dimensions().len()));
    out.push('\n');
    for (s, row) in table.systems().iter().zip(table.rows()) {
        let _ = write!(out, "| {s} |");
        for v in row {
            match v {
                Some(v) => {
                    let _ = write!(out, " {:.4} |", v.as_f64());
                }
                None => out.push_str(" NA |"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn table_json<F: Real>(table: &Table<F>) -> Result<String> {
    let mut systems = Map::new();
    for (s, row) in table.systems().iter().zip(table.rows()) {
        let values: Map<String, Value> = table
            .dimensions()
            .iter()
            .zip(row)
            .map(|(d, v)| (d.clone(), v.map_or(Value::Null, number)))
            .collect();
        systems.insert(s.clone(), Value::Object(values));
    }
    let mut body = Map::new();
    body.insert("directions".into(), json!(table.direction_map()));
    body.insert("systems".into(), Value::Object(systems));
    to_pretty(&versioned(body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leaderboard::ranked_pareto_fronts;

    fn scores() -> SystemScores<f64> {
        SystemScores {
            system_id: "gold".into(),
            metrics: [
                ("joint_f1".to_string(), 1.0),
                ("num_words".to_string(), 3.5),
            ]
            .into_iter()
            .collect(),
            loca: Some(0.75),
            loca_counts: LocaCounts {
                inside: 3,
                outside: 1,
                total: 4,
            },
        }
    }

    #[test]
    fn score_json_round_trip() {
        let text = system_scores_json(&scores()).unwrap();
        assert!(text.contains("\"format_version\": 1"));
        assert!(text.contains("\"I\": 3"));
        let back = parse_system_scores(&text).unwrap();
        assert_eq!(back, scores());
    }

    #[test]
    fn keys_are_sorted() {
        let text = system_scores_json(&scores()).unwrap();
        let f = text.find("format_version").unwrap();
        let l = text.find("loca_counts").unwrap();
        let m = text.find("\"metrics\"").unwrap();
        let s = text.find("system_id").unwrap();
        assert!(f < l && l < m && m < s);
    }

    #[test]
    fn score_table_keeps_metric_order() {
        let t = score_table(&[scores()], &["num_words".to_string()]).unwrap();
        assert_eq!(t.dimensions(), ["joint_f1", "loca", "num_words"]);
        assert_eq!(t.direction("num_words").unwrap(), Direction::Lower);
    }

    #[test]
    fn ranking_outputs() {
        let input = RankingInput::new(
            vec!["a".into(), "b".into()],
            vec!["x".into()],
            vec![Direction::Lower],
            vec![vec![1.0], vec![2.0]],
        )
        .unwrap();
        let r = ranked_pareto_fronts(&input);
        let j: Value = serde_json::from_str(&pareto_json(&r).unwrap()).unwrap();
        assert_eq!(j["fronts"], json!([["a"], ["b"]]));
        assert_eq!(j["strategy"], "pareto");
        let md = pareto_markdown(&r, &input, &|v| format!("{v:.1}"));
        assert!(md.contains("| 2 | b | 2.0 |"));
        assert!(md.contains("x ↓"));
    }
}
