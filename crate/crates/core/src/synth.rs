//! Seeded synthetic seasons for exercising the pipeline without real data.
//!
//! Each team draws a latent strength (in points) per season; a game's margin
//! is the strength difference plus Gaussian noise, rounded to a nonzero
//! integer. Both sides of every game are emitted, so league margins sum to zero.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::GameResult;

const BASE_POINTS: i64 = 100;
const TIE_REROLLS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_teams: usize,
    /// Games per team-season.
    pub n_games: usize,
    pub n_seasons: usize,
    /// Standard deviation of latent strength, in margin points.
    pub strength_spread: f64,
    /// Standard deviation of per-game margin noise.
    pub noise_std: f64,
    pub seed: u64,
    pub first_season: i32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_teams: 30,
            n_games: 82,
            n_seasons: 20,
            strength_spread: 5.0,
            noise_std: 12.0,
            seed: 0,
            first_season: 1990,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_teams < 2 {
            return Err(Error::Parameter(format!("need at least 2 teams, got {}", self.n_teams)));
        }
        if self.n_games < 1 || self.n_seasons < 1 {
            return Err(Error::Parameter("games and seasons must be at least 1".into()));
        }
        if self.n_games > u32::MAX as usize {
            return Err(Error::Parameter(format!("too many games per season: {}", self.n_games)));
        }
        if !(self.n_teams * self.n_games).is_multiple_of(2) {
            return Err(Error::Parameter(format!(
                "{} teams x {} games is odd; every game needs two teams",
                self.n_teams, self.n_games
            )));
        }
        for (name, v) in [("strength spread", self.strength_spread), ("noise std", self.noise_std)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn team_ids(&self) -> Vec<String> {
        let width = (self.n_teams as f64).log10().floor() as usize + 1;
        (1..=self.n_teams).map(|i| format!("T{i:0width$}")).collect()
    }
}

/// Generates team-game rows. Identical configs give identical output.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<GameResult>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let strength_dist = Normal::new(0.0, cfg.strength_spread).map_err(|e| Error::Parameter(e.to_string()))?;
    let noise_dist = Normal::new(0.0, cfg.noise_std).map_err(|e| Error::Parameter(e.to_string()))?;
    let teams = cfg.team_ids();
    let mut out = Vec::with_capacity(cfg.n_seasons * cfg.n_teams * cfg.n_games);

    for season_offset in 0..cfg.n_seasons {
        let season = cfg.first_season + season_offset as i32;
        let strengths: Vec<f64> = (0..cfg.n_teams).map(|_| strength_dist.sample(&mut rng)).collect();
        let mut remaining = vec![cfg.n_games; cfg.n_teams];
        let mut played = vec![0u32; cfg.n_teams];

        while remaining.iter().any(|&r| r > 0) {
            for (a, b) in round_pairings(&remaining, &mut rng) {
                let margin = draw_margin(strengths[a] - strengths[b], &noise_dist, &mut rng);
                let loser_pts = (BASE_POINTS - margin.abs() / 2 + rng.random_range(-6..=6)).max(0);
                let winner_pts = loser_pts + margin.abs();
                let (a_pts, b_pts) = if margin > 0 { (winner_pts, loser_pts) } else { (loser_pts, winner_pts) };
                for (team, pf, pa) in [(a, a_pts, b_pts), (b, b_pts, a_pts)] {
                    played[team] += 1;
                    remaining[team] -= 1;
                    out.push(GameResult::new(season, teams[team].clone(), played[team], pf as u32, pa as u32));
                }
            }
        }
    }
    Ok(out)
}

/// Pairs every team with games left, most-remaining first. With an odd
/// number of such teams the one with the fewest remaining sits out, which
/// keeps remaining counts within one of each other so every team finishes.
fn round_pairings(remaining: &[usize], rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut active: Vec<usize> = (0..remaining.len()).filter(|&t| remaining[t] > 0).collect();
    active.shuffle(rng);
    active.sort_by_key(|&t| std::cmp::Reverse(remaining[t]));
    if active.len() % 2 == 1 {
        active.pop();
    }
    assert!(!active.is_empty(), "schedule stalled with games remaining");
    active.chunks_exact(2).map(|p| (p[0], p[1])).collect()
}

/// Rounded margin from `diff + noise`; zero is redrawn a few times, then
/// resolved toward the stronger side (or a coin flip on equal strength).
fn draw_margin(diff: f64, noise: &Normal<f64>, rng: &mut ChaCha8Rng) -> i64 {
    for _ in 0..=TIE_REROLLS {
        let m = (diff + noise.sample(rng)).round() as i64;
        if m != 0 {
            return m;
        }
    }
    if diff > 0.0 {
        1
    } else if diff < 0.0 {
        -1
    } else if rng.random_bool(0.5) {
        1
    } else {
        -1
    }
}
