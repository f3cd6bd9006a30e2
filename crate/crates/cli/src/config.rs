//! Run configuration: a TOML file with `[parameters]`, `[grid]`,
//! `[initial]`, `[solver]`, `[sweep]` and `[output]` sections.
//!
//! Rate profiles are a number, an inline list of `[age, value]` pairs, or a
//! path (relative to the config file) to a CSV with `age,value` columns.

use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use relapse::bifurcation::{ProbeOptions, SweepMode, SweepSpec};
use relapse::{AgeProfile, GridSpec, InitialCondition, Mixing, ParameterSet, Rate};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("{0}")]
    Syntax(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ProfileSpec {
    Constant(f64),
    Table(Vec<[f64; 2]>),
    File(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParameters {
    mu: Spanned<ProfileSpec>,
    beta: Spanned<ProfileSpec>,
    phi: Spanned<ProfileSpec>,
    gamma: Spanned<ProfileSpec>,
    rho: Spanned<ProfileSpec>,
    contact: Option<Spanned<ProfileSpec>>,
    birth_rate: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    max_age: f64,
    max_time: f64,
    age_intervals: usize,
    /// Chosen from the stability bound when absent.
    time_steps: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawInitial {
    Zero,
    Bump { amplitude: f64, center: f64, width: f64 },
    Table { infected: ProfileSpec, recovered: Option<ProfileSpec> },
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MixingMode {
    #[default]
    Stationary,
    Full,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(default)]
    mixing: MixingMode,
    /// Initial total population `n0(a)`, required by full mixing.
    population: Option<ProfileSpec>,
    tol: Option<f64>,
    store_every: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: Rate,
    values: Option<Vec<f64>>,
    from: Option<f64>,
    to: Option<f64>,
    count: Option<usize>,
    #[serde(default)]
    mode: SweepMode,
    #[serde(default = "yes")]
    probe: bool,
    epsilon: Option<f64>,
    horizon: Option<f64>,
    #[serde(default)]
    skip_cross_check: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    parameters: Spanned<RawParameters>,
    grid: Option<Spanned<RawGrid>>,
    initial: Option<Spanned<RawInitial>>,
    #[serde(default)]
    solver: Option<Spanned<RawSolver>>,
    sweep: Option<Spanned<RawSweep>>,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub spec: SweepSpec,
    pub probe: Option<ProbeOptions>,
    pub skip_cross_check: bool,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ParameterSet,
    pub grid: Option<GridSpec>,
    pub initial: InitialCondition,
    pub mixing: Mixing,
    pub tol: f64,
    pub store_every: usize,
    pub sweep: Option<SweepConfig>,
    pub output_dir: Option<PathBuf>,
}

pub const DEFAULT_TOL: f64 = 1e-10;
/// Stored time rows for trajectories when the config does not say.
pub const DEFAULT_STORED_ROWS: usize = 100;

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Parses and validates `text`; CSV profile paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| syntax(text, e))?;
    let at = |span: Range<usize>| line_of(text, span.start);
    let invalid = |span: Range<usize>, message: String| ConfigError::Invalid {
        line: at(span),
        message,
    };

    let pspan = raw.parameters.span();
    let p = raw.parameters.into_inner();
    let profile = |spec: Spanned<ProfileSpec>, name: &str| -> Result<AgeProfile, ConfigError> {
        let span = spec.span();
        resolve(spec.into_inner(), base).map_err(|m| invalid(span, format!("{name}: {m}")))
    };
    let params = ParameterSet {
        mu: profile(p.mu, "mu")?,
        beta: profile(p.beta, "beta")?,
        phi: profile(p.phi, "phi")?,
        gamma: profile(p.gamma, "gamma")?,
        rho: profile(p.rho, "rho")?,
        contact: match p.contact {
            Some(c) => profile(c, "contact")?,
            None => AgeProfile::constant(1.0).expect("valid"),
        },
        birth_rate: p.birth_rate.unwrap_or(1.0),
    };
    params.check().map_err(|e| invalid(pspan.clone(), e.to_string()))?;

    let grid = raw
        .grid
        .map(|g| {
            let span = g.span();
            let g = g.into_inner();
            let built = match g.time_steps {
                Some(n) => GridSpec::new(g.max_age, g.max_time, g.age_intervals, n),
                None => relapse::transport::auto_grid(&params, g.max_age, g.max_time, g.age_intervals),
            };
            built.map_err(|e| invalid(span, e.to_string()))
        })
        .transpose()?;

    let initial = match raw.initial {
        None => InitialCondition::Zero,
        Some(i) => {
            let span = i.span();
            let cond = match i.into_inner() {
                RawInitial::Zero => InitialCondition::Zero,
                RawInitial::Bump {
                    amplitude,
                    center,
                    width,
                } => InitialCondition::Bump {
                    amplitude,
                    center,
                    width,
                },
                RawInitial::Table { infected, recovered } => InitialCondition::Table {
                    infected: resolve(infected, base).map_err(|m| invalid(span.clone(), m))?,
                    recovered: recovered
                        .map(|r| resolve(r, base))
                        .transpose()
                        .map_err(|m| invalid(span.clone(), m))?,
                },
            };
            cond.check().map_err(|e| invalid(span, e.to_string()))?;
            cond
        }
    };

    let (mixing, tol, store_every) = match raw.solver {
        None => (Mixing::Stationary, DEFAULT_TOL, None),
        Some(s) => {
            let span = s.span();
            let s = s.into_inner();
            let mixing = match (s.mixing, s.population) {
                (MixingMode::Stationary, None) => Mixing::Stationary,
                (MixingMode::Stationary, Some(_)) => {
                    return Err(invalid(span, "population is only used with mixing = \"full\"".into()))
                }
                (MixingMode::Full, None) => {
                    return Err(invalid(span, "mixing = \"full\" needs a population profile".into()))
                }
                (MixingMode::Full, Some(n0)) => Mixing::Full {
                    population: resolve(n0, base).map_err(|m| invalid(span.clone(), m))?,
                },
            };
            let tol = s.tol.unwrap_or(DEFAULT_TOL);
            if !(tol > 0.0) {
                return Err(invalid(span, format!("tol must be > 0, got {tol}")));
            }
            (mixing, tol, s.store_every)
        }
    };
    let store_every = store_every.unwrap_or_else(|| {
        grid.as_ref()
            .map_or(1, |g| (g.time_steps / DEFAULT_STORED_ROWS).max(1))
    });

    let sweep = raw
        .sweep
        .map(|s| {
            let span = s.span();
            let s = s.into_inner();
            let values = match (s.values, s.from, s.to, s.count) {
                (Some(v), None, None, None) => v,
                (None, Some(from), Some(to), Some(count)) if count >= 2 => (0..count)
                    .map(|k| from + (to - from) * k as f64 / (count - 1) as f64)
                    .collect(),
                (None, Some(_), Some(_), Some(_)) => {
                    return Err(invalid(span, "count must be at least 2".into()))
                }
                _ => {
                    return Err(invalid(
                        span,
                        "give either values = [...] or all of from, to, count".into(),
                    ))
                }
            };
            let defaults = ProbeOptions::default();
            let probe = s.probe.then(|| ProbeOptions {
                epsilon: s.epsilon.unwrap_or(defaults.epsilon),
                horizon: s.horizon.unwrap_or(defaults.horizon),
            });
            Ok(SweepConfig {
                spec: SweepSpec {
                    parameter: s.parameter,
                    values,
                    mode: s.mode,
                },
                probe,
                skip_cross_check: s.skip_cross_check,
            })
        })
        .transpose()?;

    Ok(RunConfig {
        params,
        grid,
        initial,
        mixing,
        tol,
        store_every,
        sweep,
        output_dir: raw.output.dir.map(|d| base.join(d)),
    })
}

fn resolve(spec: ProfileSpec, base: &Path) -> Result<AgeProfile, String> {
    match spec {
        ProfileSpec::Constant(v) => AgeProfile::constant(v).map_err(|e| e.to_string()),
        ProfileSpec::Table(knots) => {
            AgeProfile::table(knots.into_iter().map(|[a, v]| (a, v)).collect()).map_err(|e| e.to_string())
        }
        ProfileSpec::File(name) => {
            let path = base.join(&name);
            read_profile_csv(&path).map_err(|e| format!("{}: {e}", path.display()))
        }
    }
}

/// Reads an `age,value` CSV into a table profile.
pub fn read_profile_csv(path: &Path) -> Result<AgeProfile, String> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != ["age", "value"] {
        return Err(format!("expected columns age,value, found {}", headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut knots = Vec::new();
    for (n, record) in reader.deserialize::<(f64, f64)>().enumerate() {
        knots.push(record.map_err(|e| format!("row {}: {e}", n + 2))?);
    }
    AgeProfile::table(knots).map_err(|e| e.to_string())
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn syntax(text: &str, e: toml::de::Error) -> ConfigError {
    match e.span() {
        Some(span) => ConfigError::Invalid {
            line: line_of(text, span.start),
            message: e.message().to_string(),
        },
        None => ConfigError::Syntax(e.message().to_string()),
    }
}
