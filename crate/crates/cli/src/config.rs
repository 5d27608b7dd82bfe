//! Scenario files: TOML with unit-suffixed keys.
//!
//! A key ending in a unit (`t_span_ps`, `omega_bar_GHz_over_2pi`) is converted to SI on
//! load and stored under its bare name (`t_span`, `omega_bar`). Seconds are spelled `sec`
//! so that parameter names like `chi_s` stay untouched. `_over_2pi` marks a value
//! quoted as f = ω/2π, so it is multiplied by 2π.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use qtomo::dynamics::HamiltonianSpec;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Evolve,
    Tomogram,
    Indicators,
    Squeeze,
    Sweep,
    Timeseries,
    Chrono,
    Ingest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Tomogram => "tomogram",
            Command::Indicators => "indicators",
            Command::Squeeze => "squeeze",
            Command::Sweep => "sweep",
            Command::Timeseries => "timeseries",
            Command::Chrono => "chrono",
            Command::Ingest => "ingest",
        }
    }

    /// Products written when `outputs` is absent.
    pub fn default_outputs(self) -> &'static [&'static str] {
        match self {
            Command::Evolve => &["observables"],
            Command::Tomogram => &["tomogram"],
            Command::Indicators => &["indicators"],
            Command::Squeeze => &["squeezing"],
            Command::Sweep => &["spectrum", "svne"],
            Command::Timeseries => &["mi", "lambda", "fit"],
            Command::Chrono => &["profile", "eps"],
            Command::Ingest => &["density", "summary"],
        }
    }

    /// Every product the command knows how to write.
    pub fn known_outputs(self) -> &'static [&'static str] {
        match self {
            Command::Evolve => &["observables", "density", "damping"],
            Command::Tomogram => &["tomogram", "tomogram_json"],
            Command::Indicators => &["indicators", "slices"],
            Command::Squeeze => &["squeezing"],
            Command::Sweep => &["spectrum", "svne"],
            Command::Timeseries => &["mi", "lambda", "fit", "spectrum"],
            Command::Chrono => &["profile", "eps"],
            Command::Ingest => &["density", "summary", "spin_tomogram"],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub command: Command,
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub outputs: Option<Vec<String>>,
    pub system: Option<HamiltonianSpec>,
    pub state: Option<StateRecipe>,
    pub time: Option<TimeSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub indicators: IndicatorSpec,
    pub damping: Option<DampingSpec>,
    #[serde(default)]
    pub squeeze: SqueezeSpec,
    pub sweep: Option<SweepSpec>,
    pub timeseries: Option<TimeseriesSpec>,
    pub chrono: Option<ChronoSpec>,
    pub ingest: Option<IngestSpec>,
}

fn default_name() -> String {
    "run".into()
}

fn default_seed() -> u64 {
    7
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateRecipe {
    /// |α⟩, α = [re, im]
    Coherent { alpha: [f64; 2], cutoff: usize },
    /// m-photon-added coherent state
    Pacs { alpha: [f64; 2], m: usize, cutoff: usize },
    Fock { n: usize, cutoff: usize },
    Binomial { n: usize, cutoff: usize },
    /// |α_a⟩ ⊗ |α_b⟩
    TwoModeCoherent { alpha_a: [f64; 2], alpha_b: [f64; 2], cutoff: usize },
    TwoModeSqueezed { zeta: [f64; 2], cutoff: usize },
}

impl StateRecipe {
    pub fn cutoff(&self) -> usize {
        match self {
            StateRecipe::Coherent { cutoff, .. }
            | StateRecipe::Pacs { cutoff, .. }
            | StateRecipe::Fock { cutoff, .. }
            | StateRecipe::Binomial { cutoff, .. }
            | StateRecipe::TwoModeCoherent { cutoff, .. }
            | StateRecipe::TwoModeSqueezed { cutoff, .. } => *cutoff,
        }
    }
}

/// Instants as absolute times, as fractions "p/q" of the revival time, or both.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default)]
    pub instants: Vec<f64>,
    #[serde(default)]
    pub revival_fractions: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub n_theta: usize,
    /// Angles over [0, 2π) instead of [0, π).
    pub full_circle: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { x_min: -10.0, x_max: 10.0, n_x: 1001, n_theta: 4, full_circle: false }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndicatorSpec {
    pub n_angles: usize,
    pub n_x: usize,
    pub x_max: f64,
}

impl Default for IndicatorSpec {
    fn default() -> Self {
        Self { n_angles: 10, n_x: 121, x_max: 8.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingSpec {
    /// "amplitude" or "phase"
    pub kind: String,
    pub mode: usize,
    /// Values of Γτ.
    pub gamma_tau: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SqueezeSpec {
    pub orders: Vec<usize>,
    pub theta: f64,
}

impl Default for SqueezeSpec {
    fn default() -> Self {
        Self { orders: vec![1, 2], theta: 0.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: String,
    pub start: f64,
    pub step: f64,
    pub count: usize,
    pub cutoff: usize,
    /// Conserved-charge sector, e.g. [4] for N = 4.
    pub charge: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeriesSource {
    Logistic { r: f64, x0: f64, n: usize, discard: usize },
    Ar1 { a: f64, noise: f64, n: usize },
    /// One number per line.
    File { path: PathBuf },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeseriesSpec {
    pub source: SeriesSource,
    #[serde(default = "one")]
    pub dt: f64,
    #[serde(default = "default_max_delay")]
    pub max_delay: usize,
    #[serde(default = "default_bins")]
    pub n_bins: usize,
    #[serde(default = "one_usize")]
    pub smooth: usize,
    #[serde(default = "default_ls")]
    pub ls: Vec<usize>,
    #[serde(default = "default_starts")]
    pub n_starts: usize,
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn default_max_delay() -> usize {
    40
}
fn default_bins() -> usize {
    32
}
fn default_ls() -> Vec<usize> {
    vec![2, 4, 6, 8, 10, 12, 14, 16, 20, 24, 30, 40, 50, 60, 80, 100]
}
fn default_starts() -> usize {
    100
}

/// Angular frequencies in rad/s (after unit conversion), times in s.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChronoSpec {
    pub omega_p: f64,
    pub omega_bar: f64,
    pub d_omega: f64,
    pub omega_0: f64,
    pub d_big_omega: f64,
    /// "alpha", "beta" or both when absent.
    pub states: Option<Vec<String>>,
    pub t_span: Option<f64>,
    pub n_t: Option<usize>,
    #[serde(default)]
    pub refine: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestSpec {
    pub path: PathBuf,
    /// Subsystem partition for ξ_SVNE, ξ_QMI and negativity.
    pub part_a: Option<Vec<usize>>,
}

const UNITS: [(&str, f64); 11] = [
    ("Hz", 1.0),
    ("kHz", 1e3),
    ("MHz", 1e6),
    ("GHz", 1e9),
    ("THz", 1e12),
    ("sec", 1.0),
    ("ms", 1e-3),
    ("us", 1e-6),
    ("ns", 1e-9),
    ("ps", 1e-12),
    ("fs", 1e-15),
];

/// Splits `base_UNIT[_over_2pi]` into (base, factor to SI angular/seconds).
pub fn unit_suffix(key: &str) -> Option<(&str, f64)> {
    let (stem, two_pi) = match key.strip_suffix("_over_2pi") {
        Some(s) => (s, TAU),
        None => (key, 1.0),
    };
    let (base, unit) = stem.rsplit_once('_')?;
    let scale = UNITS.iter().find(|(u, _)| *u == unit)?.1;
    (!base.is_empty()).then_some((base, scale * two_pi))
}

fn convert_units(table: &mut Table, path: &str) -> Result<()> {
    let keys: Vec<String> = table.keys().cloned().collect();
    for key in keys {
        if let Some(Value::Table(inner)) = table.get_mut(&key) {
            convert_units(inner, &format!("{path}{key}."))?;
            continue;
        }
        let Some((base, scale)) = unit_suffix(&key) else { continue };
        let raw = table.remove(&key).expect("key listed above");
        let x = match raw {
            Value::Float(f) => f,
            Value::Integer(i) => i as f64,
            other => bail!("{path}{key}: expected a number, found {}", other.type_str()),
        };
        if table.contains_key(base) {
            bail!("{path}{base} given twice (plain and as {key})");
        }
        table.insert(base.to_string(), Value::Float(x * scale));
    }
    Ok(())
}

/// Parses `section.key=value`; the value is read as TOML, falling back to a string.
pub fn parse_override(s: &str) -> Result<(Vec<String>, Value)> {
    let (k, v) = s.split_once('=').ok_or_else(|| anyhow!("override '{s}' is not key=value"))?;
    let path: Vec<String> = k.trim().split('.').map(str::to_string).collect();
    if path.iter().any(|p| p.is_empty()) {
        bail!("override '{s}' has an empty key segment");
    }
    let v = v.trim();
    let value = format!("x = {v}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("x"))
        .unwrap_or_else(|| Value::String(v.to_string()));
    Ok((path, value))
}

/// Applies overrides that the file does not already set. Conflicts keep the file's value
/// and come back as warnings.
pub fn merge_overrides(table: &mut Table, overrides: &[(Vec<String>, Value)]) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    for (path, value) in overrides {
        let mut cur = &mut *table;
        for seg in &path[..path.len() - 1] {
            let entry = cur.entry(seg.clone()).or_insert_with(|| Value::Table(Table::new()));
            cur = entry.as_table_mut().ok_or_else(|| anyhow!("override {}: '{seg}' is not a table", path.join(".")))?;
        }
        let last = path.last().expect("nonempty path");
        let clash = cur.contains_key(last) || unit_suffix_clash(cur, last);
        if clash {
            warnings.push(format!("{} set in the config file and on the command line; keeping the file value", path.join(".")));
        } else {
            cur.insert(last.clone(), value.clone());
        }
    }
    Ok(warnings)
}

fn unit_suffix_clash(t: &Table, key: &str) -> bool {
    let base = unit_suffix(key).map(|(b, _)| b).unwrap_or(key);
    t.keys().any(|k| k == base || unit_suffix(k).map(|(b, _)| b) == Some(base))
}

pub struct Loaded {
    pub config: ScenarioConfig,
    pub warnings: Vec<String>,
}

/// Builds the resolved config from an optional file, the subcommand and flag overrides.
pub fn load(path: Option<&Path>, command: Command, overrides: &[String]) -> Result<Loaded> {
    let mut table = match path {
        Some(p) => std::fs::read_to_string(p)
            .with_context(|| format!("reading scenario {}", p.display()))?
            .parse::<Table>()
            .with_context(|| format!("scenario {} is not valid TOML", p.display()))?,
        None => Table::new(),
    };
    match table.get("command") {
        Some(Value::String(c)) if c != command.name() => {
            bail!("scenario declares command '{c}' but was run as '{}'", command.name())
        }
        Some(Value::String(_)) => {}
        Some(_) => bail!("'command' must be a string"),
        None => {
            table.insert("command".into(), Value::String(command.name().into()));
        }
    }
    let parsed: Vec<_> = overrides.iter().map(|s| parse_override(s)).collect::<Result<_>>()?;
    let warnings = merge_overrides(&mut table, &parsed)?;
    convert_units(&mut table, "")?;
    let config: ScenarioConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| anyhow!("scenario schema: {}", e.message()))?;
    validate(&config)?;
    Ok(Loaded { config, warnings })
}

fn validate(c: &ScenarioConfig) -> Result<()> {
    if let Some(outs) = &c.outputs {
        let known = c.command.known_outputs();
        for o in outs {
            if !known.contains(&o.as_str()) {
                bail!("'{}' does not produce '{o}'; known outputs: {}", c.command.name(), known.join(", "));
            }
        }
    }
    if let Some(s) = &c.system {
        s.validate().map_err(|e| anyhow!("system: {e}"))?;
    }
    Ok(())
}

/// Parses "p/q" or an integer into (p, q).
pub fn parse_fraction(s: &str) -> Result<(u64, u64)> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim().parse::<u64>()?, q.trim().parse::<u64>()?),
        None => (s.parse::<u64>()?, 1),
    };
    if q == 0 {
        bail!("revival fraction '{s}' has zero denominator");
    }
    Ok((p, q))
}

/// Flattened key listing, for messages.
pub fn describe(c: &ScenarioConfig) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    if let Ok(serde_json::Value::Object(m)) = serde_json::to_value(c) {
        for (k, v) in m {
            if !v.is_null() {
                out.insert(k, v.to_string());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_keys() {
        assert_eq!(unit_suffix("t_span_ps"), Some(("t_span", 1e-12)));
        let (b, f) = unit_suffix("omega_bar_GHz_over_2pi").unwrap();
        assert_eq!(b, "omega_bar");
        assert!((f - TAU * 1e9).abs() < 1.0);
        assert_eq!(unit_suffix("n_x"), None);
        // model parameters such as chi_s and lambda_s are not units
        assert_eq!(unit_suffix("chi_s"), None);
        assert_eq!(unit_suffix("lambda_s"), None);
    }

    #[test]
    fn overrides_lose_to_file() {
        let mut t: Table = "seed = 3\n[grid]\nn_x = 11".parse().unwrap();
        let ov = vec![parse_override("seed=9").unwrap(), parse_override("grid.n_theta=6").unwrap()];
        let w = merge_overrides(&mut t, &ov).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(t["seed"].as_integer(), Some(3));
        assert_eq!(t["grid"]["n_theta"].as_integer(), Some(6));
    }

    #[test]
    fn fractions() {
        assert_eq!(parse_fraction("1/3").unwrap(), (1, 3));
        assert_eq!(parse_fraction("0").unwrap(), (0, 1));
        assert!(parse_fraction("1/0").is_err());
    }
}
