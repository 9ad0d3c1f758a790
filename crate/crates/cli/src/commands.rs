use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::Path;

use pdrank::evaluation::{grid, table1_report_with, Dataset, Indicator, SweepResult, Table1Grids};
use pdrank::games::{build_team_seasons, parse_games, write_games_csv, TeamSeason};
use pdrank::indicators::write_indicator_csv;
use pdrank::regression::{featurize_with, ridge_gd_fit, GdConfig, OobPolicy};
use pdrank::synth::{generate, SynthConfig};
use pdrank::weighting::{SoftCap, WeightFunction, WeightVector};
use pdrank::{Error, Result};

use crate::{Command, DGrid, ExpGrid, Format, IndicatorKind, OobArg, SoftCapArg};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::IngestCheck { io, format } => {
            let seasons = load(&io.input)?;
            let text = ingest_summary(&seasons, format)?;
            emit(io.out.as_deref(), text.as_bytes())
        }
        Command::SweepCap {
            io,
            cap_min,
            cap_max,
            format,
        } => {
            if cap_min < 1 || cap_max < cap_min {
                return Err(Error::Parameter(format!(
                    "cap range must satisfy 1 <= cap-min <= cap-max, got {cap_min}..={cap_max}"
                )));
            }
            let seasons = load(&io.input)?;
            let sweep = Dataset::new(&seasons)?.sweep_cap(cap_min, cap_max)?;
            emit(io.out.as_deref(), &render_sweep(&sweep, format)?)
        }
        Command::SweepSoft { io, kind, grid, format } => {
            let d_values = d_grid(&grid)?;
            let seasons = load(&io.input)?;
            let sweep = Dataset::new(&seasons)?.sweep_softcap(soft_cap(kind), &d_values)?;
            emit(io.out.as_deref(), &render_sweep(&sweep, format)?)
        }
        Command::SweepPyth { io, grid, format } => {
            let exponents = exp_grid(&grid)?;
            let seasons = load(&io.input)?;
            let sweep = Dataset::new(&seasons)?.sweep_pythagorean(&exponents)?;
            emit(io.out.as_deref(), &render_sweep(&sweep, format)?)
        }
        Command::FitWeights {
            io,
            lambda,
            lr,
            iterations,
            trace_every,
            oob,
            weights_out,
            format,
        } => {
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return Err(Error::Parameter(format!("--lambda must be finite and >= 0, got {lambda}")));
            }
            if let Some(lr) = lr {
                if !(lr > 0.0 && lr.is_finite()) {
                    return Err(Error::Parameter(format!("--lr must be positive, got {lr}")));
                }
            }
            if iterations == 0 {
                return Err(Error::Parameter("--iterations must be positive".into()));
            }
            let oob = match oob {
                OobArg::Clamp => OobPolicy::Clamp,
                OobArg::Drop => OobPolicy::Drop,
            };
            let seasons = load(&io.input)?;
            let (x, y) = featurize_with(&seasons, oob)?;
            let cfg = GdConfig {
                lambda,
                learning_rate: lr,
                max_iterations: iterations,
                trace_every,
                ..GdConfig::default()
            };
            let fit = ridge_gd_fit(&x, &y, &cfg)?;
            if let Some(path) = weights_out {
                let mut buf = Vec::new();
                fit.weights.write_csv(&mut buf)?;
                emit(Some(&path), &buf)?;
            }
            let out = match format {
                Format::Json => {
                    let mut s = fit.to_json()?;
                    s.push('\n');
                    s.into_bytes()
                }
                Format::Csv => {
                    let mut buf = Vec::new();
                    fit.weights.write_csv(&mut buf)?;
                    buf
                }
                Format::Text => {
                    let r = fit
                        .final_correlation()
                        .map_or_else(|| "undefined".to_string(), pdrank::evaluation::sig6);
                    format!(
                        "team-seasons: {}\nlambda: {}\nlearning rate: {}\niterations: {}{}\nin-sample correlation: {}\n",
                        x.counts.rows(),
                        pdrank::evaluation::sig6(fit.lambda),
                        pdrank::evaluation::sig6(fit.learning_rate),
                        fit.iterations,
                        if fit.converged { " (converged)" } else { "" },
                        r
                    )
                    .into_bytes()
                }
            };
            emit(io.out.as_deref(), &out)
        }
        Command::Table1 {
            io,
            cap_min,
            cap_max,
            d_grid: dg,
            exp_grid: eg,
            format,
        } => {
            if cap_min < 1 || cap_max < cap_min {
                return Err(Error::Parameter(format!(
                    "cap range must satisfy 1 <= cap-min <= cap-max, got {cap_min}..={cap_max}"
                )));
            }
            let grids = Table1Grids {
                cap_min,
                cap_max,
                d_values: d_grid(&dg)?,
                exponents: exp_grid(&eg)?,
            };
            let seasons = load(&io.input)?;
            let report = table1_report_with(&seasons, &grids)?;
            let out = match format {
                Format::Text => report.to_text().into_bytes(),
                Format::Csv => {
                    let mut buf = Vec::new();
                    report.write_csv(&mut buf)?;
                    buf
                }
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&report)?;
                    s.push('\n');
                    s.into_bytes()
                }
            };
            emit(io.out.as_deref(), &out)
        }
        Command::Indicator {
            io,
            kind,
            cap,
            d,
            exp,
            weights,
        } => {
            let need = |v: Option<f64>, flag: &str| {
                v.ok_or_else(|| Error::Parameter(format!("--kind {} requires --{flag}", kind.name())))
            };
            let indicator = match kind {
                IndicatorKind::WinLoss => Indicator::WinLoss,
                IndicatorKind::Pd => Indicator::Weighted(WeightFunction::Identity),
                IndicatorKind::Cap => Indicator::Weighted(WeightFunction::hard_cap(
                    cap.ok_or_else(|| Error::Parameter("--kind cap requires --cap".into()))?,
                )?),
                IndicatorKind::Tanh => Indicator::Weighted(WeightFunction::tanh(need(d, "d")?)?),
                IndicatorKind::Erf => Indicator::Weighted(WeightFunction::erf(need(d, "d")?)?),
                IndicatorKind::Exp => Indicator::Weighted(WeightFunction::exp(need(d, "d")?)?),
                IndicatorKind::Pyth => {
                    let e = need(exp, "exp")?;
                    if !(e > 0.0 && e.is_finite()) {
                        return Err(Error::Parameter(format!("--exp must be positive, got {e}")));
                    }
                    Indicator::Pythagorean(e)
                }
                IndicatorKind::Lookup => {
                    let path = weights.ok_or_else(|| Error::Parameter("--kind lookup requires --weights".into()))?;
                    let table = WeightVector::read_csv(BufReader::new(File::open(&path).map_err(|e| io_err(&path, e))?))?;
                    Indicator::Weighted(WeightFunction::lookup(table))
                }
            };
            let seasons = load(&io.input)?;
            let values = Dataset::new(&seasons)?.keyed_values(&indicator)?;
            let mut buf = Vec::new();
            write_indicator_csv(&values, &mut buf)?;
            emit(io.out.as_deref(), &buf)
        }
        Command::Synth {
            seed,
            teams,
            games,
            seasons,
            spread,
            noise,
            first_season,
            out,
        } => {
            let cfg = SynthConfig {
                n_teams: teams,
                n_games: games,
                n_seasons: seasons,
                strength_spread: spread,
                noise_std: noise,
                seed,
                first_season,
            };
            cfg.validate()?;
            let rows = generate(&cfg)?;
            let mut buf = Vec::new();
            write_games_csv(&rows, &mut buf)?;
            emit(out.as_deref(), &buf)
        }
    }
}

fn soft_cap(kind: SoftCapArg) -> SoftCap {
    match kind {
        SoftCapArg::Tanh => SoftCap::Tanh,
        SoftCapArg::Erf => SoftCap::Erf,
        SoftCapArg::Exp => SoftCap::Exp,
    }
}

fn positive_list(values: &[f64], flag: &str) -> Result<Vec<f64>> {
    if let Some(bad) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Parameter(format!("--{flag} values must be positive, got {bad}")));
    }
    Ok(values.to_vec())
}

fn d_grid(g: &DGrid) -> Result<Vec<f64>> {
    if !g.d.is_empty() {
        return positive_list(&g.d, "d");
    }
    positive_list(&grid(g.d_min, g.d_max, g.d_step)?, "d-min")
}

fn exp_grid(g: &ExpGrid) -> Result<Vec<f64>> {
    if !g.exp.is_empty() {
        return positive_list(&g.exp, "exp");
    }
    positive_list(&grid(g.exp_min, g.exp_max, g.exp_step)?, "exp-min")
}

fn io_err(path: &Path, e: io::Error) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Vec<TeamSeason>> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let games = parse_games(BufReader::new(file))?;
    build_team_seasons(&games)
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| io_err(p, e)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn render_sweep(sweep: &SweepResult, format: Format) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Csv => {
            let mut buf = Vec::new();
            sweep.write_csv(&mut buf)?;
            buf
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(sweep)?;
            s.push('\n');
            s.into_bytes()
        }
        Format::Text => sweep.to_text().into_bytes(),
    })
}

fn ingest_summary(seasons: &[TeamSeason], format: Format) -> Result<String> {
    let games: usize = seasons.iter().map(TeamSeason::n_games).sum();
    let years: Vec<i32> = seasons.iter().map(|s| s.season_year).collect();
    let (first, last) = (years.iter().min().copied(), years.iter().max().copied());
    let mut lengths = std::collections::BTreeMap::new();
    for s in seasons {
        *lengths.entry(s.n_games()).or_insert(0usize) += 1;
    }
    let degenerate = seasons.iter().filter(|s| s.n_games() < 2).count();
    Ok(match format {
        Format::Json => {
            let v = serde_json::json!({
                "team_seasons": seasons.len(),
                "team_games": games,
                "first_season": first,
                "last_season": last,
                "season_lengths": lengths.iter().map(|(n, c)| serde_json::json!([n, c])).collect::<Vec<_>>(),
                "degenerate_seasons": degenerate,
            });
            format!("{}\n", serde_json::to_string_pretty(&v)?)
        }
        Format::Text | Format::Csv => {
            let mut s = format!("team-seasons: {}\nteam-games: {games}\n", seasons.len());
            if let (Some(a), Some(b)) = (first, last) {
                s += &format!("seasons: {a}..={b}\n");
            }
            for (n, c) in &lengths {
                s += &format!("  {c} team-season(s) with {n} games\n");
            }
            if degenerate > 0 {
                s += &format!("degenerate (fewer than 2 games): {degenerate}\n");
            }
            s
        }
    })
}
