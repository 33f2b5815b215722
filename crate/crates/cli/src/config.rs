//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Values from later
//! sources override earlier ones, so command-line flags are applied after
//! the config file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use emg_core::{GameError, GameParams, Objective, PaymentMode, SearchConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(line: Option<usize>, key: &str, message: impl Into<String>) -> Self {
        ConfigError { line, key: key.to_string(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

/// Recognized keys and their documented defaults (`-` means "unset").
pub const KEYS: &[(&str, &str)] = &[
    ("kind", "-"),
    ("fixed_reward", "10"),
    ("tx_reward", "2"),
    ("poisson_rate", "0.01"),
    ("delay_factor", "1"),
    ("tx_per_block", "10"),
    ("mobile_tx_load", "tx_per_block"),
    ("edge_overhead", "0"),
    ("min_consumption", "0"),
    ("edge_power", "50"),
    ("fee", "-"),
    ("unit_cost", "0.001"),
    ("fees", "-"),
    ("miners", "5"),
    ("fee_weights", "evenly spaced over [0.8, 1.2]"),
    ("payment", "lump-sum"),
    ("objective", "full"),
    ("method", "golden"),
    ("fee_lo", "max(min_consumption, 1e-6)"),
    ("fee_hi", "100 * (R+TR) * e^(-γ z T_m)"),
    ("initial_fee", "1.05 * participation threshold"),
    ("step_factor", "0.05"),
    ("tolerance", "1e-6"),
    ("max_iters", "10000"),
    ("powers", "50,25,25"),
    ("n_blocks", "1000"),
    ("seed", "1"),
    ("seeds", "10"),
    ("grid_start", "per experiment"),
    ("grid_stop", "per experiment"),
    ("grid_steps", "per experiment"),
    ("fixed_power", "50"),
    ("edge_fractions", "0.1,0.5,0.9"),
    ("fee_model", "uniform"),
    ("mdg_delay_mult", "1.5"),
    ("out", "-"),
    ("format", "csv"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Fig(u8),
    SolveUniform,
    SolveDisc,
    Simulate,
    CompareMdg,
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "solve-uniform" => Ok(ExperimentKind::SolveUniform),
            "solve-disc" => Ok(ExperimentKind::SolveDisc),
            "simulate" => Ok(ExperimentKind::Simulate),
            "compare-mdg" => Ok(ExperimentKind::CompareMdg),
            _ => match s.strip_prefix("fig").and_then(|n| n.parse::<u8>().ok()) {
                Some(n @ 1..=6) => Ok(ExperimentKind::Fig(n)),
                _ => Err(format!("unknown experiment kind `{s}`")),
            },
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentKind::Fig(n) => write!(f, "fig{n}"),
            ExperimentKind::SolveUniform => f.write_str("solve-uniform"),
            ExperimentKind::SolveDisc => f.write_str("solve-disc"),
            ExperimentKind::Simulate => f.write_str("simulate"),
            ExperimentKind::CompareMdg => f.write_str("compare-mdg"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv|json)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeeMethod {
    Golden,
    Ascent,
}

impl FromStr for FeeMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "golden" => Ok(FeeMethod::Golden),
            "ascent" => Ok(FeeMethod::Ascent),
            other => Err(format!("unknown method `{other}` (expected golden|ascent)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeeModelKind {
    Uniform,
    Discriminatory,
}

impl FromStr for FeeModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(FeeModelKind::Uniform),
            "discriminatory" => Ok(FeeModelKind::Discriminatory),
            other => Err(format!("unknown fee model `{other}` (expected uniform|discriminatory)")),
        }
    }
}

/// Evenly spaced sweep axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let span = self.stop - self.start;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.stop
                } else {
                    self.start + span * k as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub params: GameParams,
    pub edge_power: f64,
    pub fee: Option<f64>,
    pub unit_cost: f64,
    pub fees: Option<Vec<f64>>,
    pub miners: usize,
    pub fee_weights: Vec<f64>,
    pub payment: PaymentMode,
    pub objective: Objective,
    pub method: FeeMethod,
    pub fee_lo: Option<f64>,
    pub fee_hi: Option<f64>,
    pub initial_fee: Option<f64>,
    pub search: SearchConfig,
    pub powers: Vec<f64>,
    pub n_blocks: u64,
    pub seed: u64,
    pub seeds: u64,
    pub grid: Grid,
    pub fixed_power: f64,
    pub edge_fractions: Vec<f64>,
    pub fee_model: FeeModelKind,
    pub mdg_delay_mult: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// One `key = value` assignment and where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: Option<usize>,
    pub key: String,
    pub value: String,
}

impl Entry {
    pub fn flag(key: &str, value: impl Into<String>) -> Self {
        Entry { line: None, key: key.to_string(), value: value.into() }
    }
}

/// Splits config text into entries; rejects malformed lines and unknown keys.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| ConfigError::new(Some(line), trimmed, "expected `key = value`"))?;
        let key = key.trim();
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError::new(Some(line), key, "unknown key"));
        }
        entries.push(Entry { line: Some(line), key: key.to_string(), value: value.trim().to_string() });
    }
    Ok(entries)
}

/// Parses raw config text that names its own `kind`.
pub fn validate_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    build_config(None, &parse_entries(text)?)
}

struct Lookup<'a> {
    values: BTreeMap<&'a str, &'a Entry>,
}

impl<'a> Lookup<'a> {
    fn raw(&self, key: &str) -> Option<&'a Entry> {
        self.values.get(key).copied()
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|err| ConfigError::new(e.line, key, format!("cannot parse `{}`: {err}", e.value))),
        }
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|err| ConfigError::new(e.line, key, format!("cannot parse list `{}`: {err}", e.value))),
        }
    }

    fn fail(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::new(self.raw(key).and_then(|e| e.line), key, message)
    }

    fn check(&self, ok: bool, key: &str, message: &str) -> Result<(), ConfigError> {
        if ok {
            Ok(())
        } else {
            Err(self.fail(key, message))
        }
    }
}

fn default_grid(kind: ExperimentKind) -> Grid {
    match kind {
        ExperimentKind::Fig(1) => Grid { start: 1.0, stop: 100.0, steps: 100 },
        ExperimentKind::Fig(2) => Grid { start: 1.0, stop: 50.0, steps: 50 },
        ExperimentKind::Fig(3) | ExperimentKind::Fig(4) => Grid { start: 0.0, stop: 100.0, steps: 101 },
        _ => Grid { start: 10.0, stop: 200.0, steps: 20 },
    }
}

/// Weights evenly spaced over `[0.8, 1.2]`.
pub fn default_weights(miners: usize) -> Vec<f64> {
    (0..miners)
        .map(|i| 0.8 + 0.4 * i as f64 / (miners.max(2) - 1) as f64)
        .collect()
}

/// Builds a validated config from entries; later entries win. `kind`
/// overrides any `kind` entry.
pub fn build_config(kind: Option<ExperimentKind>, entries: &[Entry]) -> Result<ExperimentConfig, ConfigError> {
    let mut values = BTreeMap::new();
    for e in entries {
        if !KEYS.iter().any(|(k, _)| *k == e.key) {
            return Err(ConfigError::new(e.line, &e.key, "unknown key"));
        }
        values.insert(e.key.as_str(), e);
    }
    let cfg = Lookup { values };

    let kind = match kind {
        Some(k) => k,
        None => cfg
            .get::<ExperimentKind>("kind")?
            .ok_or_else(|| ConfigError::new(None, "kind", "missing experiment kind"))?,
    };

    let tx_per_block: u32 = cfg.or("tx_per_block", 10)?;
    let params = GameParams {
        fixed_reward: cfg.or("fixed_reward", 10.0)?,
        tx_reward: cfg.or("tx_reward", 2.0)?,
        poisson_rate: cfg.or("poisson_rate", 0.01)?,
        delay_factor: cfg.or("delay_factor", 1.0)?,
        tx_per_block,
        mobile_tx_load: cfg.or("mobile_tx_load", tx_per_block)?,
        edge_overhead: cfg.or("edge_overhead", 0.0)?,
        min_consumption: cfg.or("min_consumption", 0.0)?,
    };
    if let Err(GameError::InvalidParameter { name, value, reason }) = params.validate() {
        return Err(cfg.fail(name, format!("{value}: {reason}")));
    }

    let positive = |key: &str, v: f64| cfg.check(v.is_finite() && v > 0.0, key, "must be finite and > 0");

    let edge_power = cfg.or("edge_power", 50.0)?;
    positive("edge_power", edge_power)?;
    let fee = cfg.get::<f64>("fee")?;
    if let Some(f) = fee {
        positive("fee", f)?;
    }
    let unit_cost = cfg.or("unit_cost", 0.001)?;
    positive("unit_cost", unit_cost)?;
    let fees = cfg.list("fees")?;
    if let Some(f) = &fees {
        cfg.check(f.len() >= 2, "fees", "at least two fees are required")?;
        cfg.check(f.iter().all(|p| p.is_finite() && *p > 0.0), "fees", "fees must be finite and > 0")?;
    }
    let miners: usize = cfg.or("miners", 5)?;
    cfg.check(miners >= 2, "miners", "at least two miners are required")?;
    let fee_weights = cfg.list("fee_weights")?.unwrap_or_else(|| default_weights(miners));
    cfg.check(fee_weights.len() >= 2, "fee_weights", "at least two weights are required")?;
    cfg.check(fee_weights.iter().all(|w| w.is_finite() && *w > 0.0), "fee_weights", "weights must be finite and > 0")?;

    let search = SearchConfig {
        initial_fee: 1.0,
        step_factor: cfg.or("step_factor", 0.05)?,
        tolerance: cfg.or("tolerance", 1e-6)?,
        max_iters: cfg.or("max_iters", 10_000)?,
    };
    cfg.check(search.step_factor > 0.0 && search.step_factor < 1.0, "step_factor", "must lie strictly inside (0, 1)")?;
    positive("tolerance", search.tolerance)?;
    cfg.check(search.max_iters >= 1, "max_iters", "must be >= 1")?;
    let initial_fee = cfg.get::<f64>("initial_fee")?;
    if let Some(p) = initial_fee {
        positive("initial_fee", p)?;
    }
    let fee_lo = cfg.get::<f64>("fee_lo")?;
    let fee_hi = cfg.get::<f64>("fee_hi")?;
    if let Some(lo) = fee_lo {
        positive("fee_lo", lo)?;
        cfg.check(lo >= params.min_consumption, "fee_lo", "must be >= min_consumption")?;
    }
    if let (Some(lo), Some(hi)) = (fee_lo, fee_hi) {
        cfg.check(lo < hi, "fee_hi", "must exceed fee_lo")?;
    }

    let powers = cfg.list("powers")?.unwrap_or_else(|| vec![50.0, 25.0, 25.0]);
    cfg.check(powers.iter().all(|x| x.is_finite() && *x >= 0.0), "powers", "powers must be finite and >= 0")?;
    cfg.check(powers.iter().any(|x| *x > 0.0), "powers", "at least one power must be positive")?;
    let n_blocks: u64 = cfg.or("n_blocks", 1000)?;
    cfg.check(n_blocks >= 1, "n_blocks", "must be >= 1")?;
    let seeds: u64 = cfg.or("seeds", 10)?;
    cfg.check(seeds >= 1, "seeds", "must be >= 1")?;

    let defaults = default_grid(kind);
    let grid = Grid {
        start: cfg.or("grid_start", defaults.start)?,
        stop: cfg.or("grid_stop", defaults.stop)?,
        steps: cfg.or("grid_steps", defaults.steps)?,
    };
    cfg.check(grid.steps >= 2, "grid_steps", "a sweep needs at least 2 points")?;
    cfg.check(grid.start.is_finite() && grid.stop.is_finite() && grid.start < grid.stop, "grid_stop", "grid_start must be below grid_stop")?;
    cfg.check(grid.start >= 0.0, "grid_start", "must be >= 0")?;

    let fixed_power = cfg.or("fixed_power", 50.0)?;
    positive("fixed_power", fixed_power)?;
    let edge_fractions = cfg.list("edge_fractions")?.unwrap_or_else(|| vec![0.1, 0.5, 0.9]);
    cfg.check(!edge_fractions.is_empty(), "edge_fractions", "must not be empty")?;
    cfg.check(edge_fractions.iter().all(|f| *f > 0.0 && *f < 1.0), "edge_fractions", "fractions must lie strictly inside (0, 1)")?;
    let mdg_delay_mult: f64 = cfg.or("mdg_delay_mult", 1.5)?;
    cfg.check(mdg_delay_mult.is_finite() && mdg_delay_mult >= 1.0, "mdg_delay_mult", "must be finite and >= 1")?;

    Ok(ExperimentConfig {
        kind,
        params,
        edge_power,
        fee,
        unit_cost,
        fees,
        miners,
        fee_weights,
        payment: cfg.or("payment", PaymentMode::LumpSum)?,
        objective: cfg.or("objective", Objective::Full)?,
        method: cfg.or("method", FeeMethod::Golden)?,
        fee_lo,
        fee_hi,
        initial_fee,
        search,
        powers,
        n_blocks,
        seed: cfg.or("seed", 1)?,
        seeds,
        grid,
        fixed_power,
        edge_fractions,
        fee_model: cfg.or("fee_model", FeeModelKind::Uniform)?,
        mdg_delay_mult,
        out: cfg.get::<PathBuf>("out")?,
        format: cfg.or("format", Format::Csv)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_fig1_config_gets_defaults() {
        let cfg = validate_config("kind = fig1\n").unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Fig(1));
        assert_eq!(cfg.n_blocks, 1000);
        assert_eq!(cfg.params.tx_per_block, 10);
        assert_eq!(cfg.params.mobile_tx_load, 10);
        assert_eq!(cfg.grid, Grid { start: 1.0, stop: 100.0, steps: 100 });
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn negative_rate_names_key() {
        let err = validate_config("kind = fig1\n# comment\npoisson_rate = -0.5\n").unwrap_err();
        assert_eq!(err.key, "poisson_rate");
        assert_eq!(err.line, Some(3));
    }

    #[test]
    fn step_factor_outside_unit_interval() {
        let err = validate_config("kind = solve-uniform\nstep_factor = 1.5\n").unwrap_err();
        assert_eq!(err.key, "step_factor");
        assert_eq!(err.line, Some(2));
    }

    #[test]
    fn unknown_key_and_malformed_line() {
        let err = validate_config("kind = fig1\nbogus = 3\n").unwrap_err();
        assert_eq!((err.line, err.key.as_str()), (Some(2), "bogus"));
        let err = validate_config("kind = fig1\njust words\n").unwrap_err();
        assert_eq!(err.line, Some(2));
    }

    #[test]
    fn empty_grid_rejected() {
        let err = validate_config("kind = fig2\ngrid_steps = 0\n").unwrap_err();
        assert_eq!(err.key, "grid_steps");
        let err = validate_config("kind = fig2\ngrid_start = 5\ngrid_stop = 5\n").unwrap_err();
        assert_eq!(err.key, "grid_stop");
    }

    #[test]
    fn later_entries_override() {
        let mut entries = parse_entries("kind = fig2\nfixed_reward = 3\n").unwrap();
        entries.push(Entry::flag("fixed_reward", "7"));
        let cfg = build_config(None, &entries).unwrap();
        assert_eq!(cfg.params.fixed_reward, 7.0);
        let cfg = build_config(Some(ExperimentKind::Simulate), &entries).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Simulate);
    }

    #[test]
    fn grid_points_include_endpoints() {
        let pts = Grid { start: 1.0, stop: 100.0, steps: 100 }.points();
        assert_eq!(pts.len(), 100);
        assert_eq!(pts[0], 1.0);
        assert_eq!(pts[99], 100.0);
        assert_eq!(pts[1], 2.0);
    }

    #[test]
    fn kinds_round_trip() {
        for k in ["fig1", "fig6", "solve-uniform", "solve-disc", "simulate", "compare-mdg"] {
            assert_eq!(k.parse::<ExperimentKind>().unwrap().to_string(), k);
        }
        assert!("fig7".parse::<ExperimentKind>().is_err());
    }
}
