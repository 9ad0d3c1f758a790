//! Per-game score ingestion and team-season assembly.
//!
//! Two CSV layouts are accepted, told apart by their header row:
//!
//! * team-game rows: `season,team,game_no,pts_for,pts_against`
//! * game rows: `season,game_no_home,game_no_away,home,away,home_pts,away_pts`,
//!   each expanded into one team-game row per side.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TEAM_GAME_HEADER: [&str; 5] = ["season", "team", "game_no", "pts_for", "pts_against"];
pub const GAME_HEADER: [&str; 7] = [
    "season",
    "game_no_home",
    "game_no_away",
    "home",
    "away",
    "home_pts",
    "away_pts",
];

/// One team's view of one game.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameResult {
    pub season_year: i32,
    pub team_id: String,
    /// 1-based position in the team's schedule.
    pub game_index: u32,
    pub points_for: u32,
    pub points_against: u32,
}

impl GameResult {
    pub fn new(
        season_year: i32,
        team_id: impl Into<String>,
        game_index: u32,
        points_for: u32,
        points_against: u32,
    ) -> Self {
        GameResult {
            season_year,
            team_id: team_id.into(),
            game_index,
            points_for,
            points_against,
        }
    }

    /// Signed point margin from this team's perspective (+4 for a 4-point win).
    pub fn margin(&self) -> i32 {
        self.points_for as i32 - self.points_against as i32
    }

    pub fn is_win(&self) -> bool {
        self.points_for > self.points_against
    }
}

pub fn margin(game: &GameResult) -> i32 {
    game.margin()
}

/// Key identifying a team-season.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeasonKey {
    pub season_year: i32,
    pub team_id: String,
}

impl std::fmt::Display for SeasonKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", self.season_year, self.team_id)
    }
}

/// All games of one team in one season, ordered by `game_index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamSeason {
    pub season_year: i32,
    pub team_id: String,
    games: Vec<GameResult>,
}

impl TeamSeason {
    /// Builds a team-season from games of a single (season, team) group.
    ///
    /// Games may arrive in any order; their indices must form exactly `1..=n`.
    pub fn new(season_year: i32, team_id: impl Into<String>, mut games: Vec<GameResult>) -> Result<Self> {
        let team_id = team_id.into();
        let integrity = |message: String| Error::Integrity {
            season: season_year,
            team: team_id.clone(),
            message,
        };
        if let Some(g) = games
            .iter()
            .find(|g| g.season_year != season_year || g.team_id != team_id)
        {
            return Err(integrity(format!(
                "game {} belongs to {} {}",
                g.game_index, g.season_year, g.team_id
            )));
        }
        games.sort_by_key(|g| g.game_index);
        if let Some(pair) = games.windows(2).find(|p| p[0].game_index == p[1].game_index) {
            return Err(integrity(format!("duplicate game_no {}", pair[0].game_index)));
        }
        for (expected, g) in (1u32..).zip(&games) {
            if g.game_index != expected {
                return Err(integrity(format!("missing game_no {expected}")));
            }
        }
        Ok(TeamSeason {
            season_year,
            team_id,
            games,
        })
    }

    pub fn games(&self) -> &[GameResult] {
        &self.games
    }

    pub fn n_games(&self) -> usize {
        self.games.len()
    }

    pub fn key(&self) -> SeasonKey {
        SeasonKey {
            season_year: self.season_year,
            team_id: self.team_id.clone(),
        }
    }

    /// Splits the season into a predictor half (first `floor(N/2)` games)
    /// and a target half (the rest).
    pub fn split_half(&self) -> Result<HalfSplit<'_>> {
        let n = self.games.len();
        if n < 2 {
            return Err(Error::DegenerateSeason {
                season: self.season_year,
                team: self.team_id.clone(),
                message: format!("{n} game(s); at least 2 are needed to split halves"),
            });
        }
        let (first_half, second_half) = self.games.split_at(n / 2);
        let wins = second_half.iter().filter(|g| g.is_win()).count();
        Ok(HalfSplit {
            first_half,
            second_half_games: second_half.len(),
            second_half_wins: wins,
            second_half_win_fraction: wins as f64 / second_half.len() as f64,
        })
    }
}

pub fn split_half(season: &TeamSeason) -> Result<HalfSplit<'_>> {
    season.split_half()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfSplit<'a> {
    pub first_half: &'a [GameResult],
    pub second_half_games: usize,
    pub second_half_wins: usize,
    /// Wins over games in the second half, in `[0, 1]`.
    pub second_half_win_fraction: f64,
}

impl HalfSplit<'_> {
    pub fn first_half_margins(&self) -> impl Iterator<Item = i32> + '_ {
        self.first_half.iter().map(GameResult::margin)
    }

    pub fn first_half_wins(&self) -> usize {
        self.first_half.iter().filter(|g| g.is_win()).count()
    }
}

/// Groups games into team-seasons, sorted by (season, team).
pub fn build_team_seasons(games: &[GameResult]) -> Result<Vec<TeamSeason>> {
    let mut groups: BTreeMap<SeasonKey, Vec<GameResult>> = BTreeMap::new();
    for g in games {
        groups
            .entry(SeasonKey {
                season_year: g.season_year,
                team_id: g.team_id.clone(),
            })
            .or_default()
            .push(g.clone());
    }
    groups
        .into_iter()
        .map(|(key, games)| TeamSeason::new(key.season_year, key.team_id, games))
        .collect()
}

enum Layout {
    TeamGame,
    Game,
}

/// Parses either CSV layout into team-game results, preserving row order.
///
/// Game rows expand to the home row followed by the away row. An empty
/// source yields an empty list.
pub fn parse_games<R: Read>(source: R) -> Result<Vec<GameResult>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let mut layout = None;
    let mut out = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let more = reader.read_record(&mut record).map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let Some(layout) = &layout else {
            layout = Some(detect_layout(&record, line)?);
            continue;
        };
        match layout {
            Layout::TeamGame => out.push(parse_team_game(&record, line)?),
            Layout::Game => {
                let (home, away) = parse_game_row(&record, line)?;
                out.push(home);
                out.push(away);
            }
        }
    }
    Ok(out)
}

fn detect_layout(header: &csv::StringRecord, line: u64) -> Result<Layout> {
    let fields: Vec<&str> = header.iter().collect();
    if fields == TEAM_GAME_HEADER {
        Ok(Layout::TeamGame)
    } else if fields == GAME_HEADER {
        Ok(Layout::Game)
    } else {
        Err(Error::Validation {
            line,
            message: format!(
                "unrecognized header {:?}; expected `{}` or `{}`",
                fields.join(","),
                TEAM_GAME_HEADER.join(","),
                GAME_HEADER.join(",")
            ),
        })
    }
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, name: &str, line: u64) -> Result<T> {
    let raw = &record[idx];
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("field `{name}`: expected an integer, got {raw:?}"),
    })
}

fn check_columns(record: &csv::StringRecord, expected: usize, line: u64) -> Result<()> {
    if record.len() != expected {
        return Err(Error::Parse {
            line,
            message: format!("expected {expected} columns, found {}", record.len()),
        });
    }
    Ok(())
}

fn check_game_index(index: u32, line: u64) -> Result<()> {
    if index == 0 {
        return Err(Error::Validation {
            line,
            message: "game_no is 1-based; got 0".into(),
        });
    }
    Ok(())
}

fn check_team(team: &str, line: u64) -> Result<()> {
    if team.is_empty() {
        return Err(Error::Validation {
            line,
            message: "empty team identifier".into(),
        });
    }
    Ok(())
}

fn check_no_tie(pf: u32, pa: u32, line: u64) -> Result<()> {
    if pf == pa {
        return Err(Error::Validation {
            line,
            message: format!("tie score {pf}-{pa}; games cannot end tied"),
        });
    }
    Ok(())
}

fn parse_team_game(record: &csv::StringRecord, line: u64) -> Result<GameResult> {
    check_columns(record, TEAM_GAME_HEADER.len(), line)?;
    let season = field(record, 0, "season", line)?;
    let team = record[1].to_string();
    check_team(&team, line)?;
    let game_index = field(record, 2, "game_no", line)?;
    let pf = field(record, 3, "pts_for", line)?;
    let pa = field(record, 4, "pts_against", line)?;
    check_game_index(game_index, line)?;
    check_no_tie(pf, pa, line)?;
    Ok(GameResult::new(season, team, game_index, pf, pa))
}

fn parse_game_row(record: &csv::StringRecord, line: u64) -> Result<(GameResult, GameResult)> {
    check_columns(record, GAME_HEADER.len(), line)?;
    let season = field(record, 0, "season", line)?;
    let home_index = field(record, 1, "game_no_home", line)?;
    let away_index = field(record, 2, "game_no_away", line)?;
    let home = record[3].to_string();
    let away = record[4].to_string();
    let home_pts = field(record, 5, "home_pts", line)?;
    let away_pts = field(record, 6, "away_pts", line)?;
    check_team(&home, line)?;
    check_team(&away, line)?;
    check_game_index(home_index, line)?;
    check_game_index(away_index, line)?;
    check_no_tie(home_pts, away_pts, line)?;
    if home == away {
        return Err(Error::Validation {
            line,
            message: format!("team {home} listed as both home and away"),
        });
    }
    Ok((
        GameResult::new(season, home, home_index, home_pts, away_pts),
        GameResult::new(season, away, away_index, away_pts, home_pts),
    ))
}

/// Writes games in the canonical team-game layout.
pub fn write_games_csv<W: Write>(games: &[GameResult], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TEAM_GAME_HEADER).map_err(csv_io)?;
    for g in games {
        w.write_record([
            g.season_year.to_string(),
            g.team_id.clone(),
            g.game_index.to_string(),
            g.points_for.to_string(),
            g.points_against.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}
