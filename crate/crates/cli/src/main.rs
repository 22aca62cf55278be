//! `pareval`: evaluate, rank and validate explainable multi-hop QA systems.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;

use pareval::corpus::{self, Corpus, Loaded, PredictionOptions, SubmissionLog, Warning};
use pareval::leaderboard::{self, RankingInput};
use pareval::metrics::evaluate_system;
use pareval::report;
use pareval::stats::{self, CorrelationMethod, DataMatrix, DriftConfig, PoolData};
use pareval::synth::{derive_synthetic, SyntheticVariant};
use pareval::table::{load_direction_spec, CsvOptions, DimensionSpec, Table};
use pareval::{Error, Result, DEFAULT_SEED};

#[derive(Parser)]
#[command(name = "pareval", version, about)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "PAREVAL_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Md,
}

#[derive(Clone, Copy, ValueEnum)]
enum Selector {
    Kaiser,
    Parallel,
}

#[derive(Subcommand)]
enum Command {
    /// Score a prediction file against gold annotations.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// System id; defaults to the prediction file stem.
        #[arg(long)]
        system_id: Option<String>,
        /// Fail on instances without an answer or supporting facts.
        #[arg(long)]
        strict: bool,
        /// Also write one CSV row per instance to this path.
        #[arg(long)]
        per_instance: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Derive a synthetic system from gold annotations.
    Synth {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        variant: SyntheticVariant,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank systems from a score or rating table.
    Rank {
        /// CSV with a `system_id` column followed by one column per dimension.
        #[arg(long)]
        table: PathBuf,
        /// JSON list of {"name", "direction"}; all dimensions are higher-is-better without it.
        #[arg(long)]
        directions: Option<PathBuf>,
        /// single:<dim>, average, weighted:<dim>=<w>,... or pareto.
        #[arg(long)]
        strategy: String,
        /// Restrict to these dimensions.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<String>>,
        /// Tiebreak dimensions for single-score rankings.
        #[arg(long, value_delimiter = ',')]
        tiebreak: Vec<String>,
        /// Drop systems with missing values instead of failing.
        #[arg(long)]
        drop_incomplete: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Correlate proxy scores with human ratings across systems.
    Correlate {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long, default_value = "kendall")]
        method: CorrelationMethod,
        #[command(flatten)]
        output: Output,
    },
    /// Correlation of one proxy score with every rating over sliding windows.
    Drift {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        ratings: PathBuf,
        /// CSV of `system_id,submitted_on`.
        #[arg(long)]
        submissions: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long, default_value_t = 12)]
        window_months: u32,
        #[arg(long, default_value_t = 1)]
        step_months: u32,
        #[arg(long, default_value_t = 4)]
        min_systems: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Exploratory factor analysis with varimax rotation.
    Factor {
        /// CSV of observations, one column per variable.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "parallel")]
        selector: Selector,
        /// Fixed number of factors; overrides the selector.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        /// Loadings below this magnitude are blanked in Markdown output.
        #[arg(long, default_value_t = report::DEFAULT_LOADING_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Rank stability of a proxy score on question subsets of growing size.
    Poolsim {
        #[arg(long)]
        gold: PathBuf,
        /// Prediction files; system ids are the file stems.
        #[arg(long = "pred", required = true)]
        preds: Vec<PathBuf>,
        /// CSV of `system_id,instance_id,<rating>,...`.
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long, default_value = "joint_f1")]
        metric: String,
        #[arg(long, value_delimiter = ',', required = true)]
        pool_sizes: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        repeats: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Merge per-system score files into one table.
    Report {
        #[arg(required = true)]
        scores: Vec<PathBuf>,
        /// Metrics where lower is better, recorded in the table's directions.
        #[arg(long, value_delimiter = ',')]
        lower: Vec<String>,
        #[command(flatten)]
        output: Output,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Output {
            path: path.to_path_buf(),
            source: e,
        }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Output {
                path: PathBuf::from("<stdout>"),
                source: e,
            }),
    }
}

fn report_warnings(warnings: &[Warning]) {
    for w in warnings {
        warn!("{w}");
    }
}

fn take<T>(loaded: Loaded<T>) -> T {
    report_warnings(&loaded.warnings);
    loaded.value
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn format_or(output: &Output, default: Format, allowed: &[Format]) -> Result<Format> {
    let f = output.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Error::InvalidArgument(format!(
            "format {} is not available for this command",
            f.to_possible_value()
                .map(|v| v.get_name().to_string())
                .unwrap_or_default()
        )))
    }
}

fn load_gold(path: &Path) -> Result<Corpus> {
    Ok(take(corpus::load_gold(path)?))
}

fn load_table(path: &Path, directions: Option<&[DimensionSpec]>) -> Result<Table<f64>> {
    Table::load_csv(
        path,
        directions,
        CsvOptions {
            allow_missing: true,
        },
    )
}

fn parse_weights(spec: &str) -> Result<BTreeMap<String, f64>> {
    spec.split(',')
        .map(|pair| {
            let (name, w) = pair.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("weight {pair:?} is not of the form <dim>=<weight>"))
            })?;
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("weight {w:?} is not a number")))?;
            Ok((name.trim().to_string(), w))
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Evaluate {
            gold,
            pred,
            system_id,
            strict,
            per_instance,
            output,
        } => {
            let format = format_or(
                &output,
                Format::Json,
                &[Format::Json, Format::Csv, Format::Md],
            )?;
            let corpus = load_gold(&gold)?;
            let system = system_id.unwrap_or_else(|| stem(&pred));
            let preds = take(corpus::load_predictions(
                &pred,
                system,
                &corpus,
                PredictionOptions { strict },
            )?);
            let evaluation = evaluate_system::<f64>(&corpus, &preds)?;
            if let Some(path) = per_instance {
                emit(Some(&path), &report::instance_csv(&evaluation))?;
            }
            let text = match format {
                Format::Json => report::system_scores_json(&evaluation.scores)?,
                Format::Csv => report::score_table(&[evaluation.scores], &[])?.to_csv_string(),
                Format::Md => {
                    report::table_markdown(&report::score_table(&[evaluation.scores], &[])?)
                }
            };
            emit(output.out.as_deref(), &text)
        }
        Command::Synth { gold, variant, out } => {
            let corpus = load_gold(&gold)?;
            let preds = derive_synthetic(&corpus, variant, seed)?;
            emit(out.as_deref(), &preds.to_json_string())
        }
        Command::Rank {
            table,
            directions,
            strategy,
            dims,
            tiebreak,
            drop_incomplete,
            output,
        } => {
            let format = format_or(&output, Format::Json, &[Format::Json, Format::Md])?;
            let spec = directions.map(load_direction_spec).transpose()?;
            let table = load_table(&table, spec.as_deref())?;
            let (input, warnings) =
                RankingInput::from_table(&table, dims.as_deref(), drop_incomplete)?;
            report_warnings(&warnings);
            let show = |v: &f64| v.to_string();
            let text = if strategy == "pareto" {
                let ranking = leaderboard::ranked_pareto_fronts(&input);
                match format {
                    Format::Md => report::pareto_markdown(&ranking, &input, &show),
                    _ => report::pareto_json(&ranking)?,
                }
            } else {
                let ranking = if let Some(dim) = strategy.strip_prefix("single:") {
                    leaderboard::rank_single(&input, dim, &tiebreak)?
                } else if let Some(spec) = strategy.strip_prefix("weighted:") {
                    leaderboard::rank_weighted(&input, &parse_weights(spec)?)?
                } else if strategy == "average" {
                    leaderboard::rank_average(&input)?
                } else {
                    return Err(Error::InvalidArgument(format!(
                        "unknown strategy {strategy:?}; expected single:<dim>, average, weighted:<spec> or pareto"
                    )));
                };
                match format {
                    Format::Md => report::ordered_markdown(&ranking, &input, &show),
                    _ => report::ordered_json(&ranking)?,
                }
            };
            emit(output.out.as_deref(), &text)
        }
        Command::Correlate {
            scores,
            ratings,
            method,
            output,
        } => {
            let format = format_or(
                &output,
                Format::Csv,
                &[Format::Json, Format::Csv, Format::Md],
            )?;
            let scores = load_table(&scores, None)?;
            let ratings = load_table(&ratings, None)?;
            let matrix = stats::correlation_matrix(&scores, &ratings, method)?;
            let text = match format {
                Format::Json => report::correlation_json(&matrix)?,
                Format::Csv => report::correlation_csv(&matrix),
                Format::Md => report::correlation_markdown(&matrix),
            };
            emit(output.out.as_deref(), &text)
        }
        Command::Drift {
            scores,
            ratings,
            submissions,
            metric,
            window_months,
            step_months,
            min_systems,
            output,
        } => {
            let format = format_or(&output, Format::Csv, &[Format::Json, Format::Csv])?;
            let scores = load_table(&scores, None)?;
            let ratings = load_table(&ratings, None)?;
            let log: SubmissionLog = corpus::load_submissions(&submissions)?;
            let config = DriftConfig {
                window_months,
                step_months,
                min_systems,
                ..DriftConfig::new(metric)
            };
            let series = stats::drift_analysis(&scores, &ratings, &log, &config)?;
            report_warnings(&series.warnings);
            let text = match format {
                Format::Json => report::drift_json(&series)?,
                _ => report::drift_csv(&series),
            };
            emit(output.out.as_deref(), &text)
        }
        Command::Factor {
            data,
            selector,
            k,
            replicates,
            threshold,
            output,
        } => {
            let format = format_or(&output, Format::Json, &[Format::Json, Format::Md])?;
            let data = DataMatrix::<f64>::load_csv(&data)?;
            let k = match (k, selector) {
                (Some(k), _) => k,
                (None, Selector::Kaiser) => stats::kaiser_count(&data)?,
                (None, Selector::Parallel) => stats::parallel_analysis(&data, replicates, seed)?,
            };
            if k == 0 {
                return Err(Error::InvalidArgument(
                    "the selector retained no factors; pass --k to force a count".into(),
                ));
            }
            let model = stats::extract_and_rotate(&data, k)?;
            let text = match format {
                Format::Md => report::factor_markdown(&model, threshold),
                _ => report::factor_json(&model)?,
            };
            emit(output.out.as_deref(), &text)
        }
        Command::Poolsim {
            gold,
            preds,
            ratings,
            metric,
            pool_sizes,
            repeats,
            output,
        } => {
            let format = format_or(&output, Format::Csv, &[Format::Json, Format::Csv])?;
            let corpus = load_gold(&gold)?;
            let evaluations = preds
                .iter()
                .map(|p| {
                    let set = take(corpus::load_predictions(
                        p,
                        stem(p),
                        &corpus,
                        PredictionOptions::default(),
                    )?);
                    evaluate_system::<f64>(&corpus, &set)
                })
                .collect::<Result<Vec<_>>>()?;
            let ratings_text = fs::read_to_string(&ratings).map_err(|e| Error::Io {
                path: ratings.clone(),
                source: e,
            })?;
            let data = PoolData::from_evaluations(&corpus, &evaluations, &metric, &ratings_text)?;
            let curve = stats::question_pool_simulation(&data, &pool_sizes, repeats, seed)?;
            let text = match format {
                Format::Json => report::pool_json(&curve)?,
                _ => report::pool_csv(&curve),
            };
            emit(output.out.as_deref(), &text)
        }
        Command::Report {
            scores,
            lower,
            output,
        } => {
            let format = format_or(
                &output,
                Format::Csv,
                &[Format::Json, Format::Csv, Format::Md],
            )?;
            let parsed = scores
                .iter()
                .map(|p| {
                    let text = fs::read_to_string(p).map_err(|e| Error::Io {
                        path: p.clone(),
                        source: e,
                    })?;
                    report::parse_system_scores(&text)
                })
                .collect::<Result<Vec<_>>>()?;
            let table = report::score_table(&parsed, &lower)?;
            let text = match format {
                Format::Json => report::table_json(&table)?,
                Format::Csv => table.to_csv_string(),
                Format::Md => report::table_markdown(&table),
            };
            emit(output.out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Warn)
        .parse_env("PAREVAL_LOG")
        .format(|buf, record| {
            let level = match record.level() {
                log::Level::Warn => "warning",
                log::Level::Error => "error",
                log::Level::Info => "info",
                log::Level::Debug => "debug",
                log::Level::Trace => "trace",
            };
            writeln!(buf, "{level}: {}", record.args())
        })
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_internal() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
