//! Correlation of first-half indicators with second-half record, parameter
//! sweeps over the weighting families, and the summary comparison table.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{HalfSplit, SeasonKey, TeamSeason};
use crate::indicators::{self, check_exponent, IndicatorValue};
use crate::weighting::{SoftCap, WeightFunction};

/// Sample Pearson correlation coefficient.
///
/// Errors if the lengths differ, fewer than two points are given, or either
/// input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "pearson inputs differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!("{} point(s); need at least 2", x.len())));
    }
    if is_constant(x) {
        return Err(Error::UndefinedCorrelation("indicator values are constant".into()));
    }
    if is_constant(y) {
        return Err(Error::UndefinedCorrelation("target values are constant".into()));
    }
    if let Some(bad) = x.iter().chain(y).find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("pearson input contains {bad}")));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance after centering".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

/// A first-half indicator, with its parameter if it has one.
#[derive(Debug, Clone, PartialEq)]
pub enum Indicator {
    WinLoss,
    Weighted(WeightFunction),
    Pythagorean(f64),
}

impl Indicator {
    pub fn describe(&self) -> String {
        match self {
            Indicator::WinLoss => "win-loss".into(),
            Indicator::Weighted(w) => format!("wpd[{}]", w.describe()),
            Indicator::Pythagorean(e) => format!("pythagorean({e})"),
        }
    }
}

/// Half-split view of a set of team-seasons, shared by every sweep point.
#[derive(Debug, Clone)]
pub struct Dataset<'a> {
    splits: Vec<HalfSplit<'a>>,
    keys: Vec<SeasonKey>,
    targets: Vec<f64>,
}

impl<'a> Dataset<'a> {
    pub fn new(seasons: &'a [TeamSeason]) -> Result<Self> {
        let splits = seasons
            .iter()
            .map(TeamSeason::split_half)
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            targets: splits.iter().map(|s| s.second_half_win_fraction).collect(),
            keys: seasons.iter().map(TeamSeason::key).collect(),
            splits,
        })
    }

    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }

    /// Second-half win fractions, one per team-season.
    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn keys(&self) -> &[SeasonKey] {
        &self.keys
    }

    /// Largest absolute first-half margin in the data.
    pub fn max_abs_margin(&self) -> u32 {
        self.splits
            .iter()
            .flat_map(|s| s.first_half_margins())
            .map(i32::unsigned_abs)
            .max()
            .unwrap_or(0)
    }

    pub fn indicator_values(&self, indicator: &Indicator) -> Result<Vec<f64>> {
        match indicator {
            Indicator::WinLoss => Ok(self.splits.iter().map(indicators::win_fraction_of_split).collect()),
            Indicator::Weighted(w) => Ok(self.splits.iter().map(|s| indicators::wpd_of_split(s, w)).collect()),
            Indicator::Pythagorean(exponent) => self
                .splits
                .iter()
                .zip(&self.keys)
                .map(|(s, key)| {
                    let (scored, allowed) = indicators::first_half_totals(s);
                    indicators::pythagorean_from_totals(scored, allowed, *exponent).map_err(|e| match e {
                        Error::DegenerateInput(msg) => Error::DegenerateInput(format!("{key}: {msg}")),
                        other => other,
                    })
                })
                .collect(),
        }
    }

    pub fn keyed_values(&self, indicator: &Indicator) -> Result<Vec<IndicatorValue>> {
        Ok(self
            .indicator_values(indicator)?
            .into_iter()
            .zip(&self.keys)
            .map(|(value, key)| IndicatorValue { key: key.clone(), value })
            .collect())
    }

    /// Pearson r between the indicator and second-half win fraction.
    pub fn correlation(&self, indicator: &Indicator) -> Result<f64> {
        pearson(&self.indicator_values(indicator)?, &self.targets)
    }

    pub fn sweep_cap(&self, cap_min: i64, cap_max: i64) -> Result<SweepResult> {
        if cap_min < 1 || cap_max < cap_min {
            return Err(Error::Parameter(format!(
                "cap range must satisfy 1 <= min <= max, got {cap_min}..={cap_max}"
            )));
        }
        let caps: Vec<f64> = (cap_min..=cap_max).map(|c| c as f64).collect();
        self.sweep("cap", &caps, |c| Ok(Indicator::Weighted(WeightFunction::hard_cap(c as i64)?)))
    }

    pub fn sweep_softcap(&self, kind: SoftCap, d_values: &[f64]) -> Result<SweepResult> {
        self.sweep("d", d_values, |d| Ok(Indicator::Weighted(WeightFunction::soft(kind, d)?)))
    }

    pub fn sweep_pythagorean(&self, exponents: &[f64]) -> Result<SweepResult> {
        self.sweep("exp", exponents, |e| {
            check_exponent(e)?;
            Ok(Indicator::Pythagorean(e))
        })
    }

    fn sweep<F>(&self, name: &str, grid: &[f64], make: F) -> Result<SweepResult>
    where
        F: Fn(f64) -> Result<Indicator> + Sync,
    {
        if grid.is_empty() {
            return Err(Error::Parameter(format!("empty {name} grid")));
        }
        let mut grid = grid.to_vec();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let indicators = grid.iter().map(|&v| make(v)).collect::<Result<Vec<_>>>()?;
        let results: Vec<Result<f64>> = indicators.par_iter().map(|ind| self.correlation(ind)).collect();
        let points = grid
            .into_iter()
            .zip(results)
            .map(|(parameter, r)| r.map(|correlation| SweepPoint { parameter, correlation }))
            .collect::<Result<Vec<_>>>()?;
        SweepResult::new(name, points)
    }
}

pub fn evaluate_indicator(seasons: &[TeamSeason], indicator: &Indicator) -> Result<f64> {
    Dataset::new(seasons)?.correlation(indicator)
}

pub fn sweep_cap(seasons: &[TeamSeason], cap_min: i64, cap_max: i64) -> Result<SweepResult> {
    Dataset::new(seasons)?.sweep_cap(cap_min, cap_max)
}

pub fn sweep_softcap(seasons: &[TeamSeason], kind: SoftCap, d_values: &[f64]) -> Result<SweepResult> {
    Dataset::new(seasons)?.sweep_softcap(kind, d_values)
}

pub fn sweep_pythagorean(seasons: &[TeamSeason], exponents: &[f64]) -> Result<SweepResult> {
    Dataset::new(seasons)?.sweep_pythagorean(exponents)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub parameter: f64,
    pub correlation: f64,
}

/// Correlation as a function of one parameter, ascending in the parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter_name: String,
    pub points: Vec<SweepPoint>,
    /// Highest correlation; the smallest parameter wins ties.
    pub argmax: SweepPoint,
}

impl SweepResult {
    pub fn new(parameter_name: &str, points: Vec<SweepPoint>) -> Result<Self> {
        let first = *points
            .first()
            .ok_or_else(|| Error::Parameter("sweep has no points".into()))?;
        let argmax = points
            .iter()
            .fold(first, |best, p| if p.correlation > best.correlation { *p } else { best });
        Ok(SweepResult {
            parameter_name: parameter_name.to_string(),
            points,
            argmax,
        })
    }

    /// `parameter,correlation` rows.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["parameter", "correlation"])
            .map_err(crate::games::csv_io)?;
        for p in &self.points {
            w.write_record([p.parameter.to_string(), p.correlation.to_string()])
                .map_err(crate::games::csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>12}  {:>12}", self.parameter_name, "correlation");
        for p in &self.points {
            let _ = writeln!(out, "{:>12}  {:>12}", sig6(p.parameter), sig6(p.correlation));
        }
        let _ = writeln!(
            out,
            "argmax: {} = {}, r = {}",
            self.parameter_name,
            sig6(self.argmax.parameter),
            sig6(self.argmax.correlation)
        );
        out
    }
}

/// Evenly spaced grid from `start` to `stop` inclusive.
///
/// When `1/step` is an integer the points are computed as `k / (1/step)`,
/// so a 0.05 grid yields `2.4` rather than `2.4000000000000004`.
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) || stop < start {
        return Err(Error::Parameter(format!(
            "invalid grid start={start} stop={stop} step={step}"
        )));
    }
    let inv = 1.0 / step;
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if (inv - inv.round()).abs() < 1e-9 && (start * inv - (start * inv).round()).abs() < 1e-9 {
        let denom = inv.round();
        let k0 = (start * inv).round() as i64;
        Ok((0..count as i64).map(|i| (k0 + i) as f64 / denom).collect())
    } else {
        Ok((0..count).map(|i| start + i as f64 * step).collect())
    }
}

/// Grids for the summary table's parameter searches.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Grids {
    pub cap_min: i64,
    pub cap_max: i64,
    pub d_values: Vec<f64>,
    pub exponents: Vec<f64>,
}

impl Default for Table1Grids {
    fn default() -> Self {
        Table1Grids {
            cap_min: 1,
            cap_max: 40,
            d_values: default_d_grid(),
            exponents: default_exponent_grid(),
        }
    }
}

/// 0.5, 1.0, ..., 40.0
pub fn default_d_grid() -> Vec<f64> {
    grid(0.5, 40.0, 0.5).expect("static grid")
}

/// 0.5, 0.55, ..., 5.0
pub fn default_exponent_grid() -> Vec<f64> {
    grid(0.5, 5.0, 0.05).expect("static grid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub indicator: String,
    pub parameter_name: Option<String>,
    pub best_parameter: Option<f64>,
    pub correlation: Option<f64>,
    /// Set when the row's correlation could not be computed.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorReport {
    pub rows: Vec<ReportRow>,
}

impl IndicatorReport {
    pub fn row(&self, indicator: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.indicator == indicator)
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let name_w = self.rows.iter().map(|r| r.indicator.len()).max().unwrap_or(9).max(9);
        let mut out = String::new();
        let _ = writeln!(out, "{:<name_w$}  {:>12}  {:>12}", "indicator", "parameter", "correlation");
        for r in &self.rows {
            let param = match (&r.parameter_name, r.best_parameter) {
                (Some(n), Some(p)) => format!("{n}={}", sig6(p)),
                _ => "-".into(),
            };
            let corr = match (r.correlation, &r.error) {
                (Some(c), _) => sig6(c),
                (None, Some(e)) => format!("undefined ({e})"),
                (None, None) => "-".into(),
            };
            let _ = writeln!(out, "{:<name_w$}  {:>12}  {:>12}", r.indicator, param, corr);
        }
        out
    }

    /// `indicator,parameter_name,parameter,correlation,error` rows.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["indicator", "parameter_name", "parameter", "correlation", "error"])
            .map_err(crate::games::csv_io)?;
        for r in &self.rows {
            w.write_record([
                r.indicator.clone(),
                r.parameter_name.clone().unwrap_or_default(),
                r.best_parameter.map(|p| p.to_string()).unwrap_or_default(),
                r.correlation.map(|c| c.to_string()).unwrap_or_default(),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(crate::games::csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const TABLE1_ROWS: [&str; 7] = [
    "win-loss",
    "point-differential",
    "capped-point-differential",
    "tanh",
    "erf",
    "exp",
    "pythagorean",
];

pub fn table1_report(seasons: &[TeamSeason]) -> Result<IndicatorReport> {
    table1_report_with(seasons, &Table1Grids::default())
}

/// One row per indicator family; parameterized families report their sweep maximum.
///
/// Undefined correlations are recorded on the affected row rather than aborting the report.
pub fn table1_report_with(seasons: &[TeamSeason], grids: &Table1Grids) -> Result<IndicatorReport> {
    let data = Dataset::new(seasons)?;
    let fixed = |name: &str, ind: Indicator| -> Result<ReportRow> {
        row_from(name, None, data.correlation(&ind).map(|r| (None, r)))
    };
    let swept = |name: &str, param: &str, sweep: Result<SweepResult>| -> Result<ReportRow> {
        row_from(
            name,
            Some(param),
            sweep.map(|s| (Some(s.argmax.parameter), s.argmax.correlation)),
        )
    };
    let mut rows = vec![
        fixed(TABLE1_ROWS[0], Indicator::WinLoss)?,
        fixed(TABLE1_ROWS[1], Indicator::Weighted(WeightFunction::Identity))?,
        swept(TABLE1_ROWS[2], "cap", data.sweep_cap(grids.cap_min, grids.cap_max))?,
    ];
    for (name, kind) in TABLE1_ROWS[3..6].iter().zip(SoftCap::ALL) {
        rows.push(swept(name, "d", data.sweep_softcap(kind, &grids.d_values))?);
    }
    rows.push(swept(TABLE1_ROWS[6], "exp", data.sweep_pythagorean(&grids.exponents))?);
    Ok(IndicatorReport { rows })
}

fn row_from(name: &str, param: Option<&str>, outcome: Result<(Option<f64>, f64)>) -> Result<ReportRow> {
    let mut row = ReportRow {
        indicator: name.to_string(),
        parameter_name: param.map(str::to_string),
        best_parameter: None,
        correlation: None,
        error: None,
    };
    match outcome {
        Ok((p, r)) => {
            row.best_parameter = p;
            row.correlation = Some(r);
        }
        Err(e @ (Error::UndefinedCorrelation(_) | Error::DegenerateInput(_))) => row.error = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(row)
}

/// Six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..=9).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0]), Err(Error::Dimension(_))));
        assert!(matches!(pearson(&[1.0], &[1.0]), Err(Error::UndefinedCorrelation(_))));
        assert!(matches!(
            pearson(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0, 3.0], &[0.5; 3]),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn grids() {
        let d = default_d_grid();
        assert_eq!(d.len(), 80);
        assert_eq!((d[0], d[23], d[79]), (0.5, 12.0, 40.0));
        let e = default_exponent_grid();
        assert_eq!(e.len(), 91);
        assert_eq!((e[0], e[38], e[90]), (0.5, 2.4, 5.0));
        assert_eq!(grid(1.0, 2.0, 0.3).unwrap().len(), 4);
        assert!(grid(2.0, 1.0, 0.5).is_err());
        assert!(grid(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn sweep_argmax_prefers_first() {
        let pts = vec![
            SweepPoint { parameter: 1.0, correlation: 0.2 },
            SweepPoint { parameter: 2.0, correlation: 0.5 },
            SweepPoint { parameter: 3.0, correlation: 0.5 },
        ];
        let s = SweepResult::new("x", pts).unwrap();
        assert_eq!(s.argmax.parameter, 2.0);
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(sig6(0.7741234567), "0.774123");
        assert_eq!(sig6(12.0), "12.0000");
        assert_eq!(sig6(-0.5), "-0.500000");
        assert_eq!(sig6(0.0), "0");
    }
}
