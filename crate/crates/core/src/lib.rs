//! Deterministic evaluation engine for explainable multi-hop question answering.
//!
//! The crate covers the whole pipeline from HotpotQA-style gold data to
//! leaderboards:
//!
//! * [`corpus`] loads and validates gold instances, predictions, human rating
//!   tables and submission dates.
//! * [`metrics`] computes answer, supporting-fact and joint EM/precision/recall/F1,
//!   the LocA answer-explanation coupling score and surface statistics.
//! * [`synth`] derives the five synthetic baseline systems from gold annotations.
//! * [`stats`] validates proxy scores against human ratings: Kendall's τ-b,
//!   Spearman's ρ, Bonferroni correction, weighted κ, sliding-window drift,
//!   factor analysis with varimax rotation and question-pool simulations.
//! * [`leaderboard`] ranks systems by a single score, a weighted average, or by
//!   ranked Pareto fronts that never collapse several dimensions into one number.
//!
//! Numerical code is generic over the scalar type through [`Real`] (floating
//! point) and [`leaderboard::Score`] (anything ordered, including exact
//! rationals). The aliases at the crate root fix the scalar to `f64`.
//!
//! ```
//! use pareval::leaderboard::{ranked_pareto_fronts, RankingInput};
//! use pareval::Direction;
//!
//! let input = RankingInput::new(
//!     vec!["A".into(), "B".into(), "C".into()],
//!     vec!["q1".into(), "q2".into()],
//!     vec![Direction::Higher, Direction::Higher],
//!     vec![vec![3.0, 1.0], vec![1.0, 3.0], vec![1.0, 1.0]],
//! )
//! .unwrap();
//! let ranking = ranked_pareto_fronts(&input);
//! assert_eq!(ranking.fronts, vec![vec!["A".to_string(), "B".into()], vec!["C".into()]]);
//! ```

pub mod corpus;
pub mod error;
pub mod leaderboard;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod synth;
pub mod table;

pub use error::{Error, Result};
pub use scalar::Real;
pub use table::{DimensionSpec, Direction, Table};

/// Seed used by every randomized operation when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_230_601;

/// Version number written into every JSON artifact this crate emits.
pub const FORMAT_VERSION: u32 = 1;

pub type ScoreTable = table::Table<f64>;
pub type RatingTable = table::Table<f64>;
pub type InstanceScores = metrics::InstanceScores<f64>;
pub type SystemScores = metrics::SystemScores<f64>;
pub type SystemEvaluation = metrics::SystemEvaluation<f64>;
pub type LevelScores = metrics::LevelScores<f64>;
pub type RankingInput = leaderboard::RankingInput<f64>;
pub type CorrelationResult = stats::CorrelationResult<f64>;
pub type CorrelationMatrix = stats::CorrelationMatrix<f64>;
pub type FactorModel = stats::FactorModel<f64>;
pub type DataMatrix = stats::DataMatrix<f64>;
pub type DriftSeries = stats::DriftSeries<f64>;
pub type PoolCurve = stats::PoolCurve<f64>;
