//! Weighted point-differential indicators of team strength.
//!
//! A team-season's first half is summarized by an indicator (win fraction,
//! mean margin, mean of a weighted margin, Pythagorean expectation) and
//! judged by its Pearson correlation with the second-half win fraction.
//!
//! - [`games`]: CSV ingestion, team-season assembly, half splits
//! - [`weighting`]: identity, hard cap, tanh/erf/exp soft caps, lookup tables
//! - [`indicators`]: per-team-season indicator values
//! - [`regression`]: margin histograms and ridge-regression weight fitting
//! - [`evaluation`]: correlation, parameter sweeps, summary table
//! - [`synth`]: seeded synthetic seasons

pub mod error;
pub mod evaluation;
pub mod games;
pub mod indicators;
pub mod linalg;
pub mod regression;
pub mod synth;
pub mod weighting;

pub use error::{Error, ErrorClass, Result};
pub use evaluation::{
    evaluate_indicator, pearson, sweep_cap, sweep_pythagorean, sweep_softcap, table1_report, Dataset, Indicator,
    IndicatorReport, SweepResult,
};
pub use games::{build_team_seasons, parse_games, GameResult, HalfSplit, SeasonKey, TeamSeason};
pub use indicators::{pythagorean, win_loss_indicator, wpd, IndicatorValue};
pub use regression::{
    featurize, learned_weights_indicator, ridge_closed_form, ridge_gd_fit, DesignMatrix, FitResult, GdConfig,
    OobPolicy, TargetVector,
};
pub use synth::{generate, SynthConfig};
pub use weighting::{SoftCap, WeightFunction, WeightVector};
