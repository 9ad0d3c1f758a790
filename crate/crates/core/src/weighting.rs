//! Odd weighting functions applied to single-game point margins.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest margin with its own bin; larger margins share the edge bins.
pub const MAX_MARGIN: i32 = 40;
pub const N_BINS: usize = (2 * MAX_MARGIN + 1) as usize;

/// Bin index for a margin, clamped to `0..N_BINS`.
pub fn margin_bin(pm: i32) -> usize {
    (pm.clamp(-MAX_MARGIN, MAX_MARGIN) + MAX_MARGIN) as usize
}

/// Margin represented by a bin index.
pub fn bin_margin(index: usize) -> i32 {
    index as i32 - MAX_MARGIN
}

/// One weight per margin in `-40..=40`; index 0 is margin -40.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() != N_BINS {
            return Err(Error::Dimension(format!(
                "weight vector needs {N_BINS} entries, got {}",
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::Numeric(format!(
                "weight for margin {} is {}",
                bin_margin(i),
                weights[i]
            )));
        }
        Ok(WeightVector { weights })
    }

    pub fn zeros() -> Self {
        WeightVector {
            weights: vec![0.0; N_BINS],
        }
    }

    /// Weights equal to the margin itself; reproduces plain point differential.
    pub fn linear() -> Self {
        WeightVector {
            weights: (0..N_BINS).map(|i| bin_margin(i) as f64).collect(),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn margin_of(index: usize) -> i32 {
        bin_margin(index)
    }

    /// Weight for `pm`, clamping out-of-range margins to the edge entries.
    pub fn get(&self, pm: i32) -> f64 {
        self.weights[margin_bin(pm)]
    }

    /// Writes `margin,weight` rows for margins -40..=40 after a header line.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["margin", "weight"]).map_err(crate::games::csv_io)?;
        for (i, weight) in self.weights.iter().enumerate() {
            w.write_record([bin_margin(i).to_string(), weight.to_string()])
                .map_err(crate::games::csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format written by [`WeightVector::write_csv`]. The header is optional.
    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(source);
        let mut weights = Vec::with_capacity(N_BINS);
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(row as u64 + 1, |p| p.line());
            if row == 0 && &record[0] == "margin" {
                continue;
            }
            if record.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 2 columns, found {}", record.len()),
                });
            }
            let margin: i32 = record[0].parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad margin {:?}", &record[0]),
            })?;
            let weight: f64 = record[1].parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad weight {:?}", &record[1]),
            })?;
            let expected = bin_margin(weights.len());
            if margin != expected {
                return Err(Error::Validation {
                    line,
                    message: format!("expected margin {expected}, found {margin}"),
                });
            }
            weights.push(weight);
        }
        WeightVector::new(weights)
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        WeightVector::new(weights)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.weights
    }
}

/// The soft-cap families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SoftCap {
    Tanh,
    Erf,
    Exp,
}

impl SoftCap {
    pub const ALL: [SoftCap; 3] = [SoftCap::Tanh, SoftCap::Erf, SoftCap::Exp];

    pub fn name(self) -> &'static str {
        match self {
            SoftCap::Tanh => "tanh",
            SoftCap::Erf => "erf",
            SoftCap::Exp => "exp",
        }
    }

    /// Slope at the origin for `D = 1`.
    pub fn slope_at_zero(self) -> f64 {
        match self {
            SoftCap::Tanh | SoftCap::Exp => 1.0,
            SoftCap::Erf => std::f64::consts::FRAC_2_SQRT_PI,
        }
    }

    fn eval_unchecked(self, pm: i32, d: f64) -> f64 {
        let x = pm as f64 / d;
        match self {
            SoftCap::Tanh => libm::tanh(x),
            SoftCap::Erf => libm::erf(x),
            SoftCap::Exp => {
                if pm == 0 {
                    0.0
                } else {
                    // -expm1(-|x|) == 1 - e^{-|x|}
                    x.signum() * -libm::expm1(-x.abs())
                }
            }
        }
    }
}

impl std::str::FromStr for SoftCap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(SoftCap::Tanh),
            "erf" => Ok(SoftCap::Erf),
            "exp" => Ok(SoftCap::Exp),
            other => Err(Error::Parameter(format!("unknown soft cap {other:?}; use tanh, erf or exp"))),
        }
    }
}

impl std::fmt::Display for SoftCap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A map from point margin to per-game weight.
///
/// Construct through the checked constructors so parameters are always valid.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFunction {
    Identity,
    HardCap(u32),
    Soft(SoftCap, f64),
    Lookup(WeightVector),
}

impl WeightFunction {
    pub fn hard_cap(cap: i64) -> Result<Self> {
        check_cap(cap)?;
        Ok(WeightFunction::HardCap(cap as u32))
    }

    pub fn soft(kind: SoftCap, d: f64) -> Result<Self> {
        check_scale(d)?;
        Ok(WeightFunction::Soft(kind, d))
    }

    pub fn tanh(d: f64) -> Result<Self> {
        Self::soft(SoftCap::Tanh, d)
    }

    pub fn erf(d: f64) -> Result<Self> {
        Self::soft(SoftCap::Erf, d)
    }

    pub fn exp(d: f64) -> Result<Self> {
        Self::soft(SoftCap::Exp, d)
    }

    pub fn lookup(table: WeightVector) -> Self {
        WeightFunction::Lookup(table)
    }

    pub fn eval(&self, pm: i32) -> f64 {
        match self {
            WeightFunction::Identity => pm as f64,
            WeightFunction::HardCap(cap) => {
                let cap = *cap as i64;
                (pm as i64).clamp(-cap, cap) as f64
            }
            WeightFunction::Soft(kind, d) => kind.eval_unchecked(pm, *d),
            WeightFunction::Lookup(table) => table.get(pm),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            WeightFunction::Identity => "identity".into(),
            WeightFunction::HardCap(cap) => format!("hard_cap({cap})"),
            WeightFunction::Soft(kind, d) => format!("{kind}({d})"),
            WeightFunction::Lookup(_) => "lookup".into(),
        }
    }
}

fn check_cap(cap: i64) -> Result<()> {
    if !(1..=u32::MAX as i64).contains(&cap) {
        return Err(Error::Parameter(format!("cap must be a positive integer, got {cap}")));
    }
    Ok(())
}

fn check_scale(d: f64) -> Result<()> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Parameter(format!("scale D must be positive and finite, got {d}")));
    }
    Ok(())
}

pub fn w_identity(pm: i32) -> f64 {
    pm as f64
}

pub fn w_hard_cap(pm: i32, cap: i64) -> Result<f64> {
    Ok(WeightFunction::hard_cap(cap)?.eval(pm))
}

pub fn w_tanh(pm: i32, d: f64) -> Result<f64> {
    check_scale(d)?;
    Ok(SoftCap::Tanh.eval_unchecked(pm, d))
}

/// `erf(pm / D)`, i.e. the integral of `exp(-t^2) / sqrt(pi)` over `[-pm/D, pm/D]`.
///
/// Evaluated with the fdlibm rational approximations (via `libm`), which are
/// accurate to about one ulp over the whole real line.
pub fn w_erf(pm: i32, d: f64) -> Result<f64> {
    check_scale(d)?;
    Ok(SoftCap::Erf.eval_unchecked(pm, d))
}

/// `sign(pm) * (1 - exp(-|pm| / D))`, with `sign(0) = 0`.
pub fn w_exp(pm: i32, d: f64) -> Result<f64> {
    check_scale(d)?;
    Ok(SoftCap::Exp.eval_unchecked(pm, d))
}

pub fn w_lookup(pm: i32, table: &WeightVector) -> f64 {
    table.get(pm)
}
