//! Python bindings: `import pdrank`.

use std::fs::File;
use std::io::BufReader;

use pdrank::evaluation::{default_d_grid, default_exponent_grid, table1_report_with, Table1Grids};
use pdrank::games::{build_team_seasons, parse_games, write_games_csv, TeamSeason};
use pdrank::regression::{featurize_with, learned_weights_indicator_with, ridge_gd_fit, GdConfig, OobPolicy};
use pdrank::weighting::{SoftCap, WeightVector};
use pdrank::{ErrorClass, SynthConfig};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: pdrank::Error) -> PyErr {
    let msg = e.to_string();
    match e.class() {
        ErrorClass::Validation | ErrorClass::DataIntegrity => PyValueError::new_err(msg),
        ErrorClass::Numeric => PyArithmeticError::new_err(msg),
        ErrorClass::Io => PyOSError::new_err(msg),
    }
}

fn parse<T: std::str::FromStr<Err = pdrank::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

/// Per-margin weighting `w(pm)`.
#[pyclass(name = "WeightFunction", module = "pdrank", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWeightFunction(pdrank::WeightFunction);

#[pymethods]
impl PyWeightFunction {
    #[staticmethod]
    fn identity() -> Self {
        Self(pdrank::WeightFunction::Identity)
    }

    #[staticmethod]
    fn hard_cap(cap: i64) -> PyResult<Self> {
        pdrank::WeightFunction::hard_cap(cap).map(Self).map_err(err)
    }

    #[staticmethod]
    fn tanh(d: f64) -> PyResult<Self> {
        pdrank::WeightFunction::tanh(d).map(Self).map_err(err)
    }

    #[staticmethod]
    fn erf(d: f64) -> PyResult<Self> {
        pdrank::WeightFunction::erf(d).map(Self).map_err(err)
    }

    #[staticmethod]
    fn exp(d: f64) -> PyResult<Self> {
        pdrank::WeightFunction::exp(d).map(Self).map_err(err)
    }

    /// 81 weights for margins -40..=40; larger margins use the edge weight.
    #[staticmethod]
    fn lookup(weights: Vec<f64>) -> PyResult<Self> {
        let table = WeightVector::new(weights).map_err(err)?;
        Ok(Self(pdrank::WeightFunction::lookup(table)))
    }

    fn __call__(&self, pm: i32) -> f64 {
        self.0.eval(pm)
    }

    fn __repr__(&self) -> String {
        format!("WeightFunction({})", self.0.describe())
    }
}

#[pyclass(name = "Indicator", module = "pdrank", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyIndicator(pdrank::Indicator);

#[pymethods]
impl PyIndicator {
    #[staticmethod]
    fn win_loss() -> Self {
        Self(pdrank::Indicator::WinLoss)
    }

    #[staticmethod]
    fn weighted(w: PyRef<'_, PyWeightFunction>) -> Self {
        Self(pdrank::Indicator::Weighted(w.0.clone()))
    }

    #[staticmethod]
    fn pythagorean(exponent: f64) -> PyResult<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(PyValueError::new_err(format!("exponent must be positive, got {exponent}")));
        }
        Ok(Self(pdrank::Indicator::Pythagorean(exponent)))
    }

    fn __repr__(&self) -> String {
        format!("Indicator({})", self.0.describe())
    }
}

#[pyclass(name = "SweepResult", module = "pdrank", frozen, skip_from_py_object)]
struct PySweepResult(pdrank::SweepResult);

#[pymethods]
impl PySweepResult {
    #[getter]
    fn parameter_name(&self) -> &str {
        &self.0.parameter_name
    }

    /// `[(parameter, correlation), ...]` in ascending parameter order.
    #[getter]
    fn points(&self) -> Vec<(f64, f64)> {
        self.0.points.iter().map(|p| (p.parameter, p.correlation)).collect()
    }

    /// `(parameter, correlation)` at the maximum; the smallest parameter wins ties.
    #[getter]
    fn best(&self) -> (f64, f64) {
        (self.0.argmax.parameter, self.0.argmax.correlation)
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.0.write_csv(&mut buf).map_err(err)?;
        Ok(String::from_utf8_lossy(&buf).into_owned())
    }

    fn __repr__(&self) -> String {
        format!(
            "SweepResult({}={}, r={})",
            self.0.parameter_name, self.0.argmax.parameter, self.0.argmax.correlation
        )
    }
}

#[pyclass(name = "FitResult", module = "pdrank", frozen, skip_from_py_object)]
struct PyFitResult(pdrank::FitResult);

#[pymethods]
impl PyFitResult {
    #[getter]
    fn ridge_lambda(&self) -> f64 {
        self.0.lambda
    }

    #[getter]
    fn learning_rate(&self) -> f64 {
        self.0.learning_rate
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.0.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }

    /// Weights for margins -40..=40.
    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights.as_slice().to_vec()
    }

    #[getter]
    fn trace(&self) -> Vec<(usize, f64)> {
        self.0.trace.clone()
    }

    /// In-sample correlation at the last traced iteration.
    #[getter]
    fn final_correlation(&self) -> Option<f64> {
        self.0.final_correlation()
    }

    fn weight_function(&self) -> PyWeightFunction {
        PyWeightFunction(pdrank::WeightFunction::lookup(self.0.weights.clone()))
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        pdrank::FitResult::from_json(text).map(Self).map_err(err)
    }
}

/// Team-seasons loaded from a games CSV or generated synthetically.
#[pyclass(name = "Dataset", module = "pdrank", frozen, skip_from_py_object)]
struct PyDataset {
    seasons: Vec<TeamSeason>,
}

impl PyDataset {
    fn from_games(games: &[pdrank::GameResult]) -> PyResult<Self> {
        let seasons = build_team_seasons(games).map_err(err)?;
        Ok(Self { seasons })
    }

    fn view(&self) -> PyResult<pdrank::Dataset<'_>> {
        pdrank::Dataset::new(&self.seasons).map_err(err)
    }
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    fn from_csv(path: &str) -> PyResult<Self> {
        let file = File::open(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        Self::from_games(&parse_games(BufReader::new(file)).map_err(err)?)
    }

    #[staticmethod]
    fn from_csv_text(text: &str) -> PyResult<Self> {
        Self::from_games(&parse_games(text.as_bytes()).map_err(err)?)
    }

    #[staticmethod]
    #[pyo3(signature = (seed=0, teams=30, games=82, seasons=20, spread=5.0, noise=12.0, first_season=1990))]
    fn synthetic(
        seed: u64,
        teams: usize,
        games: usize,
        seasons: usize,
        spread: f64,
        noise: f64,
        first_season: i32,
    ) -> PyResult<Self> {
        let cfg = synth_config(seed, teams, games, seasons, spread, noise, first_season);
        Self::from_games(&pdrank::generate(&cfg).map_err(err)?)
    }

    fn __len__(&self) -> usize {
        self.seasons.len()
    }

    /// `[(season, team), ...]` in row order.
    fn keys(&self) -> Vec<(i32, String)> {
        self.seasons.iter().map(|s| (s.season_year, s.team_id.clone())).collect()
    }

    /// Second-half win fractions in row order.
    fn targets(&self) -> PyResult<Vec<f64>> {
        Ok(self.view()?.targets().to_vec())
    }

    fn values(&self, indicator: PyRef<'_, PyIndicator>) -> PyResult<Vec<f64>> {
        self.view()?.indicator_values(&indicator.0).map_err(err)
    }

    fn correlation(&self, indicator: PyRef<'_, PyIndicator>) -> PyResult<f64> {
        self.view()?.correlation(&indicator.0).map_err(err)
    }

    #[pyo3(signature = (cap_min=1, cap_max=40))]
    fn sweep_cap(&self, cap_min: i64, cap_max: i64) -> PyResult<PySweepResult> {
        self.view()?.sweep_cap(cap_min, cap_max).map(PySweepResult).map_err(err)
    }

    /// `kind` is "tanh", "erf" or "exp"; `d_values` defaults to 0.5..=40 by 0.5.
    #[pyo3(signature = (kind, d_values=None))]
    fn sweep_soft(&self, kind: &str, d_values: Option<Vec<f64>>) -> PyResult<PySweepResult> {
        let kind: SoftCap = parse(kind)?;
        let grid = d_values.unwrap_or_else(default_d_grid);
        self.view()?.sweep_softcap(kind, &grid).map(PySweepResult).map_err(err)
    }

    /// `exponents` defaults to 0.5..=5 by 0.05.
    #[pyo3(signature = (exponents=None))]
    fn sweep_pythagorean(&self, exponents: Option<Vec<f64>>) -> PyResult<PySweepResult> {
        let grid = exponents.unwrap_or_else(default_exponent_grid);
        self.view()?.sweep_pythagorean(&grid).map(PySweepResult).map_err(err)
    }

    /// One dict per indicator family with its best parameter and correlation.
    #[pyo3(signature = (cap_min=1, cap_max=40, d_values=None, exponents=None))]
    fn table1<'py>(
        &self,
        py: Python<'py>,
        cap_min: i64,
        cap_max: i64,
        d_values: Option<Vec<f64>>,
        exponents: Option<Vec<f64>>,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let grids = Table1Grids {
            cap_min,
            cap_max,
            d_values: d_values.unwrap_or_else(default_d_grid),
            exponents: exponents.unwrap_or_else(default_exponent_grid),
        };
        let report = table1_report_with(&self.seasons, &grids).map_err(err)?;
        report
            .rows
            .iter()
            .map(|row| {
                let d = PyDict::new(py);
                d.set_item("indicator", &row.indicator)?;
                d.set_item("parameter_name", &row.parameter_name)?;
                d.set_item("best_parameter", row.best_parameter)?;
                d.set_item("correlation", row.correlation)?;
                d.set_item("error", &row.error)?;
                Ok(d)
            })
            .collect()
    }

    /// Ridge-regularized gradient-descent fit of the 81 margin weights.
    #[pyo3(signature = (ridge_lambda=1.0, learning_rate=None, max_iterations=50_000, trace_every=100, oob="clamp"))]
    fn fit_weights(
        &self,
        ridge_lambda: f64,
        learning_rate: Option<f64>,
        max_iterations: usize,
        trace_every: usize,
        oob: &str,
    ) -> PyResult<PyFitResult> {
        let oob: OobPolicy = parse(oob)?;
        let (x, y) = featurize_with(&self.seasons, oob).map_err(err)?;
        let cfg = GdConfig {
            lambda: ridge_lambda,
            learning_rate,
            max_iterations,
            trace_every,
            ..GdConfig::default()
        };
        ridge_gd_fit(&x, &y, &cfg).map(PyFitResult).map_err(err)
    }

    /// Learned-weights indicator values in row order.
    #[pyo3(signature = (fit, oob="clamp"))]
    fn learned_values(&self, fit: PyRef<'_, PyFitResult>, oob: &str) -> PyResult<Vec<f64>> {
        let oob: OobPolicy = parse(oob)?;
        let values = learned_weights_indicator_with(&self.seasons, &fit.0.weights, oob).map_err(err)?;
        Ok(values.into_iter().map(|v| v.value).collect())
    }
}

fn synth_config(
    seed: u64,
    teams: usize,
    games: usize,
    seasons: usize,
    spread: f64,
    noise: f64,
    first_season: i32,
) -> SynthConfig {
    SynthConfig {
        n_teams: teams,
        n_games: games,
        n_seasons: seasons,
        strength_spread: spread,
        noise_std: noise,
        seed,
        first_season,
    }
}

/// Pearson correlation coefficient.
#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    pdrank::pearson(&x, &y).map_err(err)
}

/// Synthetic games in the canonical `season,team,game_no,pts_for,pts_against` CSV.
#[pyfunction]
#[pyo3(signature = (seed=0, teams=30, games=82, seasons=20, spread=5.0, noise=12.0, first_season=1990))]
fn synth_csv(
    seed: u64,
    teams: usize,
    games: usize,
    seasons: usize,
    spread: f64,
    noise: f64,
    first_season: i32,
) -> PyResult<String> {
    let cfg = synth_config(seed, teams, games, seasons, spread, noise, first_season);
    let rows = pdrank::generate(&cfg).map_err(err)?;
    let mut buf = Vec::new();
    write_games_csv(&rows, &mut buf).map_err(err)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

/// Pythagorean expectation from point totals.
#[pyfunction]
fn pythagorean_from_totals(scored: u64, allowed: u64, exponent: f64) -> PyResult<f64> {
    pdrank::indicators::pythagorean_from_totals(scored, allowed, exponent).map_err(err)
}

#[pymodule]
#[pyo3(name = "pdrank")]
fn pdrank_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWeightFunction>()?;
    m.add_class::<PyIndicator>()?;
    m.add_class::<PySweepResult>()?;
    m.add_class::<PyFitResult>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(synth_csv, m)?)?;
    m.add_function(wrap_pyfunction!(pythagorean_from_totals, m)?)?;
    Ok(())
}
