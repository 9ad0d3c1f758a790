//! Per-margin weights learned by ridge regression.
//!
//! Each team-season becomes a row of first-half margin counts (81 bins for
//! margins -40..=40) and the target is its second-half win fraction. The
//! weights minimize `||Y - XW||^2 + lambda ||W||^2` by full-batch gradient
//! descent; [`ridge_closed_form`] solves the normal equations directly and
//! serves as the reference solution.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::pearson;
use crate::games::{SeasonKey, TeamSeason};
use crate::indicators::IndicatorValue;
use crate::linalg::{self, Matrix};
use crate::weighting::{margin_bin, WeightFunction, WeightVector, MAX_MARGIN, N_BINS};

/// What to do with games whose margin exceeds 40 points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OobPolicy {
    /// Count them in the edge bin.
    #[default]
    Clamp,
    /// Leave them out of the counts.
    Drop,
}

impl FromStr for OobPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clamp" => Ok(OobPolicy::Clamp),
            "drop" => Ok(OobPolicy::Drop),
            other => Err(Error::Parameter(format!("unknown oob policy {other:?}; use clamp or drop"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub counts: Matrix,
    pub row_keys: Vec<SeasonKey>,
    /// First-half game count per row, including any dropped games.
    pub first_half_games: Vec<usize>,
    pub oob: OobPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetVector {
    pub values: Vec<f64>,
}

pub fn featurize(seasons: &[TeamSeason]) -> Result<(DesignMatrix, TargetVector)> {
    featurize_with(seasons, OobPolicy::Clamp)
}

/// Histogram of first-half margins per team-season, plus second-half win fractions.
pub fn featurize_with(seasons: &[TeamSeason], oob: OobPolicy) -> Result<(DesignMatrix, TargetVector)> {
    let mut counts = Matrix::zeros(seasons.len(), N_BINS);
    let mut targets = Vec::with_capacity(seasons.len());
    let mut first_half_games = Vec::with_capacity(seasons.len());
    for (r, season) in seasons.iter().enumerate() {
        let split = season.split_half()?;
        let row = counts.row_mut(r);
        for pm in split.first_half_margins() {
            if oob == OobPolicy::Drop && pm.abs() > MAX_MARGIN {
                continue;
            }
            row[margin_bin(pm)] += 1.0;
        }
        first_half_games.push(split.first_half.len());
        targets.push(split.second_half_win_fraction);
    }
    Ok((
        DesignMatrix {
            counts,
            row_keys: seasons.iter().map(TeamSeason::key).collect(),
            first_half_games,
            oob,
        },
        TargetVector { values: targets },
    ))
}

/// Ridge objective `||y - Xw||^2 + lambda ||w||^2`.
pub fn ridge_loss(x: &Matrix, y: &[f64], w: &[f64], lambda: f64) -> f64 {
    let pred = x.mul_vec(w);
    let rss: f64 = y.iter().zip(&pred).map(|(a, b)| (a - b) * (a - b)).sum();
    rss + lambda * linalg::dot(w, w)
}

/// Gradient of [`ridge_loss`]: `-2 X^T (y - Xw) + 2 lambda w`.
pub fn ridge_gradient(x: &Matrix, y: &[f64], w: &[f64], lambda: f64) -> Vec<f64> {
    let pred = x.mul_vec(w);
    let resid: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
    x.tr_mul_vec(&resid)
        .iter()
        .zip(w)
        .map(|(g, wi)| -2.0 * g + 2.0 * lambda * wi)
        .collect()
}

/// Solves `(X^T X + lambda I) w = X^T y` directly.
pub fn ridge_closed_form(x: &Matrix, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    check_problem(x, y, lambda)?;
    let mut a = x.gram();
    for i in 0..a.rows() {
        a[(i, i)] += lambda;
    }
    linalg::solve(&a, &x.tr_mul_vec(y))
}

fn check_problem(x: &Matrix, y: &[f64], lambda: f64) -> Result<()> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::Dimension("design matrix is empty".into()));
    }
    if y.len() != x.rows() {
        return Err(Error::Dimension(format!(
            "{} targets for {} rows",
            y.len(),
            x.rows()
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    Ok(())
}

/// Step size `1 / (2 (trace(X^T X) + lambda * cols))`.
///
/// The denominator bounds the Lipschitz constant of the gradient, so the
/// loss decreases monotonically at this rate.
pub fn default_learning_rate(x: &Matrix, lambda: f64) -> Result<f64> {
    let tr: f64 = x.as_slice().iter().map(|v| v * v).sum();
    let bound = 2.0 * (tr + lambda * x.cols() as f64);
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::Numeric(format!(
            "cannot derive a learning rate (trace bound {bound})"
        )));
    }
    Ok(1.0 / bound)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdConfig {
    pub lambda: f64,
    /// `None` picks [`default_learning_rate`].
    pub learning_rate: Option<f64>,
    pub max_iterations: usize,
    /// Record a training correlation every this many iterations (0 = final only).
    pub trace_every: usize,
    /// Loss is evaluated every this many iterations for the stopping tests.
    pub check_every: usize,
    /// Stop once the relative loss change and the relative weight change
    /// between checks both fall below this.
    pub tolerance: f64,
    /// Consecutive loss increases tolerated before declaring divergence.
    pub divergence_patience: usize,
}

impl Default for GdConfig {
    fn default() -> Self {
        GdConfig {
            lambda: 1.0,
            learning_rate: None,
            max_iterations: 50_000,
            trace_every: 100,
            check_every: 10,
            tolerance: 1e-12,
            divergence_patience: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdOutcome {
    pub weights: Vec<f64>,
    pub learning_rate: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(iteration, loss)` at every check.
    pub losses: Vec<(usize, f64)>,
    /// `(iteration, training correlation)`.
    pub trace: Vec<(usize, f64)>,
}

/// Full-batch gradient descent on the ridge objective, starting from zero.
///
/// `row_scale`, when given, divides each prediction before the trace
/// correlation is taken (it does not affect the fit).
pub fn ridge_gd(x: &Matrix, y: &[f64], cfg: &GdConfig, row_scale: Option<&[f64]>) -> Result<GdOutcome> {
    check_problem(x, y, cfg.lambda)?;
    if cfg.max_iterations == 0 {
        return Err(Error::Parameter("iterations must be positive".into()));
    }
    if let Some(s) = row_scale {
        if s.len() != x.rows() {
            return Err(Error::Dimension(format!("{} row scales for {} rows", s.len(), x.rows())));
        }
    }
    let lr = match cfg.learning_rate {
        Some(lr) if lr > 0.0 && lr.is_finite() => lr,
        Some(lr) => return Err(Error::Parameter(format!("learning rate must be positive, got {lr}"))),
        None => default_learning_rate(x, cfg.lambda)?,
    };
    let check_every = cfg.check_every.max(1);
    let lambda = cfg.lambda;

    // The gradient only needs X^T X and X^T y.
    let gram = x.gram();
    let xty = x.tr_mul_vec(y);
    let p = x.cols();

    let mut w = vec![0.0; p];
    let mut w_at_check = w.clone();
    let mut prev_loss = ridge_loss(x, y, &w, lambda);
    let mut losses = vec![(0, prev_loss)];
    let mut trace = Vec::new();
    let mut increases = 0;
    let mut converged = false;
    let mut iteration = 0;

    let record = |w: &[f64], it: usize, trace: &mut Vec<(usize, f64)>| {
        let mut pred = x.mul_vec(w);
        if let Some(s) = row_scale {
            pred.iter_mut().zip(s).for_each(|(v, d)| *v /= d);
        }
        if let Ok(r) = pearson(&pred, y) {
            trace.push((it, r));
        }
    };

    while iteration < cfg.max_iterations {
        let gw = gram.mul_vec(&w);
        for j in 0..p {
            let grad = 2.0 * (gw[j] - xty[j]) + 2.0 * lambda * w[j];
            w[j] -= lr * grad;
        }
        iteration += 1;

        if cfg.trace_every > 0 && iteration % cfg.trace_every == 0 {
            record(&w, iteration, &mut trace);
        }
        if iteration % check_every != 0 && iteration != cfg.max_iterations {
            continue;
        }
        let loss = ridge_loss(x, y, &w, lambda);
        if !loss.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "loss became {loss} at iteration {iteration}; try a smaller learning rate"
            )));
        }
        losses.push((iteration, loss));
        // Rounding noise near the optimum is not divergence.
        if loss > prev_loss * (1.0 + 1e-12) {
            increases += 1;
            if increases >= cfg.divergence_patience.max(1) {
                return Err(Error::Divergence { iteration, loss });
            }
        } else {
            increases = 0;
        }
        let loss_change = if prev_loss > 0.0 { (prev_loss - loss).abs() / prev_loss } else { 0.0 };
        let step: Vec<f64> = w.iter().zip(&w_at_check).map(|(a, b)| a - b).collect();
        let w_norm = linalg::norm(&w);
        let step_change = if w_norm > 0.0 { linalg::norm(&step) / w_norm } else { linalg::norm(&step) };
        prev_loss = loss;
        w_at_check.copy_from_slice(&w);
        if loss_change < cfg.tolerance && step_change < cfg.tolerance {
            converged = true;
            break;
        }
    }
    if trace.last().map(|t| t.0) != Some(iteration) {
        record(&w, iteration, &mut trace);
    }
    Ok(GdOutcome {
        weights: w,
        learning_rate: lr,
        iterations: iteration,
        converged,
        losses,
        trace,
    })
}

/// Learned per-margin weights and the training trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub lambda: f64,
    pub learning_rate: f64,
    /// Iterations actually run.
    pub iterations: usize,
    pub weights: WeightVector,
    /// `(iteration, in-sample correlation)` pairs, ascending.
    pub trace: Vec<(usize, f64)>,
    #[serde(skip)]
    pub converged: bool,
}

impl FitResult {
    /// In-sample correlation at the last recorded iteration.
    pub fn final_correlation(&self) -> Option<f64> {
        self.trace.last().map(|t| t.1)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Fits the 81 margin weights.
///
/// The trace correlates per-game averaged predictions (`(XW)_r` over the
/// row's first-half game count) with the targets, which is exactly the
/// correlation of [`learned_weights_indicator`] on the training data.
pub fn ridge_gd_fit(design: &DesignMatrix, target: &TargetVector, cfg: &GdConfig) -> Result<FitResult> {
    let scale: Vec<f64> = design.first_half_games.iter().map(|&n| n as f64).collect();
    let out = ridge_gd(&design.counts, &target.values, cfg, Some(&scale))?;
    Ok(FitResult {
        lambda: cfg.lambda,
        learning_rate: out.learning_rate,
        iterations: out.iterations,
        weights: WeightVector::new(out.weights)?,
        trace: out.trace,
        converged: out.converged,
    })
}

/// First-half weighted point differential using the learned lookup table.
pub fn learned_weights_indicator(seasons: &[TeamSeason], fit: &FitResult) -> Result<Vec<IndicatorValue>> {
    learned_weights_indicator_with(seasons, &fit.weights, OobPolicy::Clamp)
}

/// As [`learned_weights_indicator`], but games beyond +-40 contribute zero
/// under [`OobPolicy::Drop`], matching a fit made with that policy.
pub fn learned_weights_indicator_with(
    seasons: &[TeamSeason],
    weights: &WeightVector,
    oob: OobPolicy,
) -> Result<Vec<IndicatorValue>> {
    let lookup = WeightFunction::lookup(weights.clone());
    seasons
        .iter()
        .map(|s| {
            let split = s.split_half()?;
            let sum: f64 = split
                .first_half_margins()
                .filter(|pm| oob == OobPolicy::Clamp || pm.abs() <= MAX_MARGIN)
                .map(|pm| lookup.eval(pm))
                .sum();
            Ok(IndicatorValue {
                key: s.key(),
                value: sum / split.first_half.len() as f64,
            })
        })
        .collect()
}
