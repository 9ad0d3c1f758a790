//! First-half indicators of team strength.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{HalfSplit, SeasonKey, TeamSeason};
use crate::weighting::WeightFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorValue {
    pub key: SeasonKey,
    pub value: f64,
}

/// Weighted point differential: mean of `w(margin)` over the first-half games.
pub fn wpd(season: &TeamSeason, w: &WeightFunction) -> Result<IndicatorValue> {
    let split = season.split_half()?;
    Ok(IndicatorValue {
        key: season.key(),
        value: wpd_of_split(&split, w),
    })
}

pub(crate) fn wpd_of_split(split: &HalfSplit<'_>, w: &WeightFunction) -> f64 {
    let sum: f64 = split.first_half_margins().map(|pm| w.eval(pm)).sum();
    sum / split.first_half.len() as f64
}

/// First-half winning fraction.
pub fn win_loss_indicator(season: &TeamSeason) -> Result<IndicatorValue> {
    let split = season.split_half()?;
    Ok(IndicatorValue {
        key: season.key(),
        value: win_fraction_of_split(&split),
    })
}

pub(crate) fn win_fraction_of_split(split: &HalfSplit<'_>) -> f64 {
    split.first_half_wins() as f64 / split.first_half.len() as f64
}

/// Pythagorean winning percentage from first-half point totals.
pub fn pythagorean(season: &TeamSeason, exponent: f64) -> Result<IndicatorValue> {
    check_exponent(exponent)?;
    let split = season.split_half()?;
    let (scored, allowed) = first_half_totals(&split);
    Ok(IndicatorValue {
        key: season.key(),
        value: pythagorean_from_totals(scored, allowed, exponent).map_err(|e| match e {
            Error::DegenerateInput(msg) => Error::DegenerateInput(format!("{}: {msg}", season.key())),
            other => other,
        })?,
    })
}

pub(crate) fn check_exponent(exponent: f64) -> Result<()> {
    if !(exponent > 0.0 && exponent.is_finite()) {
        return Err(Error::Parameter(format!(
            "exponent must be positive and finite, got {exponent}"
        )));
    }
    Ok(())
}

pub(crate) fn first_half_totals(split: &HalfSplit<'_>) -> (u64, u64) {
    split.first_half.iter().fold((0, 0), |(s, a), g| {
        (s + g.points_for as u64, a + g.points_against as u64)
    })
}

/// `scored^e / (scored^e + allowed^e)`, evaluated as `1 / (1 + (allowed/scored)^e)`.
pub fn pythagorean_from_totals(scored: u64, allowed: u64, exponent: f64) -> Result<f64> {
    check_exponent(exponent)?;
    if scored == 0 || allowed == 0 {
        return Err(Error::DegenerateInput(format!(
            "point totals must be positive (scored {scored}, allowed {allowed})"
        )));
    }
    let ratio = libm::pow(allowed as f64 / scored as f64, exponent);
    Ok(1.0 / (1.0 + ratio))
}

/// Writes `season,team,value` rows.
pub fn write_indicator_csv<W: Write>(values: &[IndicatorValue], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["season", "team", "value"])
        .map_err(crate::games::csv_io)?;
    for v in values {
        w.write_record([
            v.key.season_year.to_string(),
            v.key.team_id.clone(),
            v.value.to_string(),
        ])
        .map_err(crate::games::csv_io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::GameResult;
    use crate::weighting::WeightVector;

    fn season(first: &[(u32, u32)], second: &[(u32, u32)]) -> TeamSeason {
        let games = first
            .iter()
            .chain(second)
            .enumerate()
            .map(|(i, &(pf, pa))| GameResult::new(2000, "NYK", i as u32 + 1, pf, pa))
            .collect();
        TeamSeason::new(2000, "NYK", games).unwrap()
    }

    fn from_margins(first: &[i32]) -> TeamSeason {
        let to_pts = |m: i32| if m > 0 { (100 + m as u32, 100) } else { (100, 100 + (-m) as u32) };
        let first: Vec<_> = first.iter().map(|&m| to_pts(m)).collect();
        let second = vec![(101, 100); first.len()];
        season(&first, &second)
    }

    #[test]
    fn wpd_examples() {
        let s = from_margins(&[4, -4]);
        assert_eq!(wpd(&s, &WeightFunction::Identity).unwrap().value, 0.0);
        let s = from_margins(&[45, 5]);
        assert_eq!(wpd(&s, &WeightFunction::hard_cap(20).unwrap()).unwrap().value, 12.5);
    }

    #[test]
    fn cap_one_is_wins_minus_losses() {
        let s = from_margins(&[3, -8, 12, 1, -1, 30, -2]);
        let v = wpd(&s, &WeightFunction::hard_cap(1).unwrap()).unwrap().value;
        assert_eq!(v, (4.0 - 3.0) / 7.0);
    }

    #[test]
    fn win_loss_boundaries() {
        let all_wins = from_margins(&[5; 41]);
        assert_eq!(win_loss_indicator(&all_wins).unwrap().value, 1.0);
        let all_losses = from_margins(&[-5; 41]);
        assert_eq!(win_loss_indicator(&all_losses).unwrap().value, 0.0);
    }

    #[test]
    fn wpd_identity_is_mean_margin() {
        let margins = [7, -3, 22, -15, 1, 9];
        let s = from_margins(&margins);
        let mean = margins.iter().sum::<i32>() as f64 / margins.len() as f64;
        assert!((wpd(&s, &WeightFunction::Identity).unwrap().value - mean).abs() < 1e-12);
    }

    #[test]
    fn wpd_lookup_matches_linear_within_range() {
        let s = from_margins(&[7, -3, 55, -15]);
        let v = wpd(&s, &WeightFunction::lookup(WeightVector::linear())).unwrap().value;
        assert_eq!(v, (7.0 - 3.0 + 40.0 - 15.0) / 4.0);
    }

    #[test]
    fn pythagorean_examples() {
        let even = season(&[(100, 90), (90, 100)], &[(1, 0), (1, 0)]);
        assert_eq!(pythagorean(&even, 2.4).unwrap().value, 0.5);
        assert_eq!(pythagorean(&even, 13.0).unwrap().value, 0.5);
        assert!((pythagorean_from_totals(200, 100, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pythagorean_errors() {
        let shutout = season(&[(0, 10), (0, 5)], &[(1, 0), (1, 0)]);
        assert!(matches!(pythagorean(&shutout, 2.0), Err(Error::DegenerateInput(_))));
        let s = from_margins(&[1, 2]);
        assert!(matches!(pythagorean(&s, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(pythagorean(&s, -1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn degenerate_season_propagates() {
        let s = season(&[(100, 90)], &[]);
        assert!(matches!(wpd(&s, &WeightFunction::Identity), Err(Error::DegenerateSeason { .. })));
        assert!(matches!(win_loss_indicator(&s), Err(Error::DegenerateSeason { .. })));
    }

    #[test]
    fn csv_export() {
        let values = vec![IndicatorValue {
            key: SeasonKey {
                season_year: 1994,
                team_id: "CHI".into(),
            },
            value: 0.25,
        }];
        let mut buf = Vec::new();
        write_indicator_csv(&values, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "season,team,value\n1994,CHI,0.25\n");
    }
}
