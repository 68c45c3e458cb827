//! Experiment configuration: a flat `section.key = value` text format with
//! `#` comments and comma-separated lists.
//!
//! Every key has a documented default, so the empty file is a valid
//! three-tier experiment. Unknown keys are rejected with their line
//! number, parsing collects all problems instead of stopping at the first,
//! and `render` emits the canonical normalized form (fixed key order,
//! shortest round-tripping numbers) that the config digest is computed
//! over — so the digest is stable under key reordering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use converge_core::metrics::Scheme;
use converge_core::model::{validate_scenario, FrequencyPlan, TierId};
use converge_core::{ChannelModel, MobilityParams, Point, ScenarioConfig, SimWindow, TierConfig};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Per-tier parameters; the station intensity is a multiple of the
/// scenario base density.
#[derive(Debug, Clone, PartialEq)]
pub struct TierSpec {
    pub tx_power_w: f64,
    pub intensity_factor: f64,
    pub bandwidth_hz: f64,
    pub circuit_power_w: f64,
    pub tolerance_w: f64,
}

/// Which tiers sampled users may attach to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AccessPolicy {
    All,
    Subset(BTreeSet<u32>),
}

impl AccessPolicy {
    pub fn tiers_for(&self, tier_count: usize) -> BTreeSet<TierId> {
        match self {
            AccessPolicy::All => (1..=tier_count as u32).map(TierId).collect(),
            AccessPolicy::Subset(ids) => ids.iter().map(|k| TierId(*k)).collect(),
        }
    }
}

/// Inner-loop iteration budget; `Auto` resolves to `#users × #tiers`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterationCap {
    Auto,
    Fixed(u32),
}

impl IterationCap {
    pub fn resolve(&self, users: usize, tiers: usize) -> usize {
        match self {
            IterationCap::Auto => (users * tiers).max(1),
            IterationCap::Fixed(n) => *n as usize,
        }
    }
}

/// The full experiment description: scenario, channel sweep, user
/// population, mobility, Monte Carlo shape and outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub window_side_km: f64,
    pub base_density_per_km2: f64,
    pub frequency_plan: FrequencyPlan,
    pub sinr_ceiling: f64,
    pub tiers: Vec<TierSpec>,
    pub alphas: Vec<f64>,
    pub noise_w: f64,
    pub d_min_km: f64,
    /// User intensities as multiples of the tier-1 station intensity.
    pub lambda_factors: Vec<f64>,
    pub accessible_tiers: AccessPolicy,
    pub mobility_beta: f64,
    pub mobility_mean_kmps: (f64, f64),
    pub mobility_sigma_kmps: f64,
    pub drops: u32,
    pub time_steps: u32,
    pub master_seed: u64,
    pub iteration_cap: IterationCap,
    pub schemes: Vec<Scheme>,
    pub output_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            window_side_km: 12.0,
            base_density_per_km2: 0.1,
            frequency_plan: FrequencyPlan::PerTierBands,
            sinr_ceiling: 1.0e6,
            tiers: vec![
                TierSpec {
                    tx_power_w: 10.0,
                    intensity_factor: 1.0,
                    bandwidth_hz: 1.0e7,
                    circuit_power_w: 0.0,
                    tolerance_w: 1.0e6,
                },
                TierSpec {
                    tx_power_w: 1.0,
                    intensity_factor: 10.0,
                    bandwidth_hz: 1.0e7,
                    circuit_power_w: 9.0,
                    tolerance_w: 1.0e6,
                },
                TierSpec {
                    tx_power_w: 0.1,
                    intensity_factor: 100.0,
                    bandwidth_hz: 1.0e7,
                    circuit_power_w: 10.0,
                    tolerance_w: 1.0e6,
                },
            ],
            alphas: vec![3.0, 4.0],
            noise_w: 1.0e-12,
            d_min_km: 0.1,
            lambda_factors: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            accessible_tiers: AccessPolicy::All,
            mobility_beta: 0.85,
            mobility_mean_kmps: (0.0, 0.0),
            mobility_sigma_kmps: 0.02,
            drops: 100,
            time_steps: 10,
            master_seed: 1,
            iteration_cap: IterationCap::Auto,
            schemes: vec![Scheme::MaxSinr, Scheme::InterferenceMin, Scheme::EnergyOpt],
            output_dir: "out".to_string(),
        }
    }
}

/// One parse or validation problem, with the offending line when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}", .issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
    issues: Vec<ConfigIssue>,
}

impl RawConfig {
    fn parse(text: &str) -> Self {
        let mut entries = BTreeMap::new();
        let mut issues = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                issues.push(ConfigIssue {
                    line: Some(line_no),
                    message: format!("expected 'key = value', got '{line}'"),
                });
                continue;
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if entries.contains_key(&key) {
                issues.push(ConfigIssue {
                    line: Some(line_no),
                    message: format!("duplicate key '{key}'"),
                });
                continue;
            }
            entries.insert(key, (line_no, value));
        }
        Self { entries, issues }
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|(line, _)| *line)
    }
}

struct Extractor<'a> {
    raw: &'a RawConfig,
    issues: Vec<ConfigIssue>,
    consumed: BTreeSet<String>,
}

impl<'a> Extractor<'a> {
    fn new(raw: &'a RawConfig) -> Self {
        Self {
            raw,
            issues: Vec::new(),
            consumed: BTreeSet::new(),
        }
    }

    fn issue(&mut self, line: Option<usize>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            line,
            message: message.into(),
        });
    }

    fn take<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        self.consumed.insert(key.to_string());
        let (line, value) = self.raw.entries.get(key)?;
        match value.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.issue(
                    Some(*line),
                    format!("'{key}' expects {what}, got '{value}'"),
                );
                None
            }
        }
    }

    fn take_list<T: FromStr>(&mut self, key: &str, what: &str) -> Option<Vec<T>> {
        self.consumed.insert(key.to_string());
        let (line, value) = self.raw.entries.get(key)?;
        let mut out = Vec::new();
        for token in value.split(',') {
            let token = token.trim();
            if token.is_empty() {
                self.issue(Some(*line), format!("'{key}' has an empty list entry"));
                return None;
            }
            match token.parse::<T>() {
                Ok(v) => out.push(v),
                Err(_) => {
                    self.issue(
                        Some(*line),
                        format!("'{key}' expects a list of {what}, got '{token}'"),
                    );
                    return None;
                }
            }
        }
        if out.is_empty() {
            self.issue(Some(*line), format!("'{key}' must list at least one value"));
            return None;
        }
        Some(out)
    }

    fn finish_unknown_keys(&mut self) {
        for (key, (line, _)) in &self.raw.entries {
            if !self.consumed.contains(key) {
                self.issues.push(ConfigIssue {
                    line: Some(*line),
                    message: format!("unknown key '{key}'"),
                });
            }
        }
    }
}

/// Parse a config text, filling unset keys with defaults and validating
/// the result. All problems are reported together.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw = RawConfig::parse(text);
    let mut ex = Extractor::new(&raw);
    let mut cfg = ExperimentConfig::default();

    if let Some(v) = ex.take::<f64>("window.side_km", "a number") {
        cfg.window_side_km = v;
    }
    if let Some(v) = ex.take::<f64>("scenario.base_density_per_km2", "a number") {
        cfg.base_density_per_km2 = v;
    }
    let tier_count = ex
        .take::<usize>("scenario.tier_count", "a positive integer")
        .unwrap_or(cfg.tiers.len());
    if let Some(v) = ex.take::<String>("scenario.frequency_plan", "a token") {
        match v.as_str() {
            "per-tier-bands" => cfg.frequency_plan = FrequencyPlan::PerTierBands,
            "full-reuse" => cfg.frequency_plan = FrequencyPlan::FullReuse,
            other => ex.issue(
                raw.line_of("scenario.frequency_plan"),
                format!(
                    "'scenario.frequency_plan' expects per-tier-bands or full-reuse, got '{other}'"
                ),
            ),
        }
    }
    if let Some(v) = ex.take::<f64>("scenario.sinr_ceiling", "a number") {
        cfg.sinr_ceiling = v;
    }

    if tier_count == 0 {
        ex.issue(
            raw.line_of("scenario.tier_count"),
            "'scenario.tier_count' must be >= 1",
        );
    }
    let defaults = ExperimentConfig::default().tiers;
    let mut tiers = Vec::with_capacity(tier_count);
    for k in 1..=tier_count {
        let mut spec = defaults.get(k - 1).cloned().unwrap_or(TierSpec {
            tx_power_w: f64::NAN,
            intensity_factor: f64::NAN,
            bandwidth_hz: f64::NAN,
            circuit_power_w: f64::NAN,
            tolerance_w: f64::NAN,
        });
        let beyond_defaults = k > defaults.len();
        for (field, slot) in [
            ("tx_power_w", 0u8),
            ("intensity", 1),
            ("bandwidth_hz", 2),
            ("circuit_power_w", 3),
            ("tolerance_w", 4),
        ] {
            let key = format!("tier.{k}.{field}");
            let value = ex.take::<f64>(&key, "a number");
            match value {
                Some(v) => match slot {
                    0 => spec.tx_power_w = v,
                    1 => spec.intensity_factor = v,
                    2 => spec.bandwidth_hz = v,
                    3 => spec.circuit_power_w = v,
                    _ => spec.tolerance_w = v,
                },
                None if beyond_defaults && !raw.entries.contains_key(&key) => {
                    ex.issue(
                        None,
                        format!("tier {k} has no default; '{key}' must be set"),
                    );
                }
                None => {}
            }
        }
        tiers.push(spec);
    }
    cfg.tiers = tiers;
    // reject tier keys beyond the configured count
    for key in raw.entries.keys() {
        if let Some(rest) = key.strip_prefix("tier.") {
            if let Some((idx, _)) = rest.split_once('.') {
                if let Ok(idx) = idx.parse::<usize>() {
                    if idx == 0 || idx > tier_count {
                        ex.consumed.insert(key.clone());
                        ex.issue(
                            raw.line_of(key),
                            format!("'{key}' is outside tier range 1..={tier_count}"),
                        );
                    }
                }
            }
        }
    }

    if let Some(v) = ex.take_list::<f64>("channel.alpha", "numbers") {
        cfg.alphas = v;
    }
    if let Some(v) = ex.take::<f64>("channel.noise_w", "a number") {
        cfg.noise_w = v;
    }
    if let Some(v) = ex.take::<f64>("channel.d_min_km", "a number") {
        cfg.d_min_km = v;
    }

    if let Some(v) = ex.take_list::<f64>("users.lambda", "numbers") {
        cfg.lambda_factors = v;
    }
    if let Some(v) = ex.take::<String>("users.accessible_tiers", "a token or tier list") {
        if v == "all" {
            cfg.accessible_tiers = AccessPolicy::All;
        } else {
            let mut ids = BTreeSet::new();
            let mut ok = true;
            for token in v.split(',') {
                match token.trim().parse::<u32>() {
                    Ok(id) => {
                        ids.insert(id);
                    }
                    Err(_) => {
                        ex.issue(
                            raw.line_of("users.accessible_tiers"),
                            format!(
                                "'users.accessible_tiers' expects 'all' or tier ids, got '{token}'"
                            ),
                        );
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                cfg.accessible_tiers = AccessPolicy::Subset(ids);
            }
        }
    }

    if let Some(v) = ex.take::<f64>("mobility.beta", "a number") {
        cfg.mobility_beta = v;
    }
    if let Some(v) = ex.take_list::<f64>("mobility.mean_velocity_kmps", "two numbers") {
        if v.len() == 2 {
            cfg.mobility_mean_kmps = (v[0], v[1]);
        } else {
            ex.issue(
                raw.line_of("mobility.mean_velocity_kmps"),
                "'mobility.mean_velocity_kmps' expects exactly two numbers",
            );
        }
    }
    if let Some(v) = ex.take::<f64>("mobility.sigma_kmps", "a number") {
        cfg.mobility_sigma_kmps = v;
    }

    if let Some(v) = ex.take::<u32>("sim.drops", "a positive integer") {
        cfg.drops = v;
    }
    if let Some(v) = ex.take::<u32>("sim.time_steps", "a positive integer") {
        cfg.time_steps = v;
    }
    if let Some(v) = ex.take::<u64>("sim.master_seed", "an unsigned integer") {
        cfg.master_seed = v;
    }
    if let Some(v) = ex.take::<String>("sim.iteration_cap", "'auto' or an integer") {
        if v == "auto" {
            cfg.iteration_cap = IterationCap::Auto;
        } else {
            match v.parse::<u32>() {
                Ok(n) => cfg.iteration_cap = IterationCap::Fixed(n),
                Err(_) => ex.issue(
                    raw.line_of("sim.iteration_cap"),
                    format!("'sim.iteration_cap' expects 'auto' or an integer, got '{v}'"),
                ),
            }
        }
    }

    if let Some(tokens) = ex.take_list::<String>("run.schemes", "scheme names") {
        let mut schemes = Vec::new();
        for token in tokens {
            match token.parse::<Scheme>() {
                Ok(s) => {
                    if !schemes.contains(&s) {
                        schemes.push(s);
                    }
                }
                Err(e) => ex.issue(raw.line_of("run.schemes"), e),
            }
        }
        if !schemes.is_empty() {
            cfg.schemes = schemes;
        }
    }
    if let Some(v) = ex.take::<String>("output.dir", "a path") {
        cfg.output_dir = v;
    }

    ex.finish_unknown_keys();

    let mut issues = raw.issues.clone();
    issues.extend(ex.issues);
    validate(&cfg, &raw, &mut issues);
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { issues })
    }
}

/// Semantic validation on the assembled config; scenario-level violations
/// are attributed to the config key (and its line) that set them.
fn validate(cfg: &ExperimentConfig, raw: &RawConfig, issues: &mut Vec<ConfigIssue>) {
    let mut push = |line: Option<usize>, message: String| {
        issues.push(ConfigIssue { line, message });
    };

    if !(cfg.base_density_per_km2 > 0.0) {
        push(
            raw.line_of("scenario.base_density_per_km2"),
            "'scenario.base_density_per_km2' must be > 0".into(),
        );
    }
    if cfg.alphas.is_empty() {
        push(
            raw.line_of("channel.alpha"),
            "'channel.alpha' must list at least one value".into(),
        );
    }
    if cfg.lambda_factors.is_empty() {
        push(
            raw.line_of("users.lambda"),
            "'users.lambda' must list at least one value".into(),
        );
    }
    for factor in &cfg.lambda_factors {
        if !(*factor > 0.0) {
            push(
                raw.line_of("users.lambda"),
                "'users.lambda' entries must be > 0".into(),
            );
            break;
        }
    }
    if cfg.drops == 0 {
        push(raw.line_of("sim.drops"), "'sim.drops' must be >= 1".into());
    }
    if cfg.time_steps == 0 {
        push(
            raw.line_of("sim.time_steps"),
            "'sim.time_steps' must be >= 1".into(),
        );
    }
    if let IterationCap::Fixed(0) = cfg.iteration_cap {
        push(
            raw.line_of("sim.iteration_cap"),
            "'sim.iteration_cap' must be >= 1".into(),
        );
    }
    if !(0.0..=1.0).contains(&cfg.mobility_beta) {
        push(
            raw.line_of("mobility.beta"),
            "'mobility.beta' must lie in [0, 1]".into(),
        );
    }
    if !(cfg.mobility_sigma_kmps >= 0.0) {
        push(
            raw.line_of("mobility.sigma_kmps"),
            "'mobility.sigma_kmps' must be >= 0".into(),
        );
    }
    if let AccessPolicy::Subset(ids) = &cfg.accessible_tiers {
        if ids.is_empty() {
            push(
                raw.line_of("users.accessible_tiers"),
                "'users.accessible_tiers' must allow at least one tier".into(),
            );
        }
        for id in ids {
            if *id == 0 || *id as usize > cfg.tiers.len() {
                push(
                    raw.line_of("users.accessible_tiers"),
                    format!(
                        "'users.accessible_tiers' references tier {id} outside 1..={}",
                        cfg.tiers.len()
                    ),
                );
            }
        }
    }

    // Scenario invariants for every α in the sweep.
    for alpha in &cfg.alphas {
        match validate_scenario(cfg.scenario_for_alpha(*alpha)) {
            Ok(_) => {}
            Err(err) => {
                for violation in err.violations {
                    let key = scenario_field_to_key(&violation.field);
                    push(
                        key.as_deref().and_then(|k| raw.line_of(k)),
                        format!("{violation} (alpha = {alpha})"),
                    );
                }
            }
        }
    }
}

fn scenario_field_to_key(field: &str) -> Option<String> {
    if let Some(rest) = field.strip_prefix("tier[") {
        let (idx, tail) = rest.split_once("].")?;
        let config_field = match tail {
            "tx_power_w" => "tx_power_w",
            "station_intensity" => "intensity",
            "bandwidth_hz" => "bandwidth_hz",
            "circuit_power_w" => "circuit_power_w",
            "interference_tolerance_w" => "tolerance_w",
            _ => return None,
        };
        return Some(format!("tier.{idx}.{config_field}"));
    }
    match field {
        "window.side_km" => Some("window.side_km".into()),
        "channel.path_loss_exponent" => Some("channel.alpha".into()),
        "channel.noise_power_w" => Some("channel.noise_w".into()),
        "channel.reference_distance_km" => Some("channel.d_min_km".into()),
        "sinr_ceiling" => Some("scenario.sinr_ceiling".into()),
        "tiers" => Some("scenario.tier_count".into()),
        _ => None,
    }
}

fn float_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl ExperimentConfig {
    /// Canonical normalized rendering; `parse(render(c)) == c`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut kv = |key: &str, value: String| {
            writeln!(out, "{key} = {value}").expect("string write");
        };
        kv("window.side_km", self.window_side_km.to_string());
        kv(
            "scenario.base_density_per_km2",
            self.base_density_per_km2.to_string(),
        );
        kv("scenario.tier_count", self.tiers.len().to_string());
        kv(
            "scenario.frequency_plan",
            match self.frequency_plan {
                FrequencyPlan::PerTierBands => "per-tier-bands".into(),
                FrequencyPlan::FullReuse => "full-reuse".into(),
            },
        );
        kv("scenario.sinr_ceiling", self.sinr_ceiling.to_string());
        for (i, tier) in self.tiers.iter().enumerate() {
            let k = i + 1;
            kv(&format!("tier.{k}.tx_power_w"), tier.tx_power_w.to_string());
            kv(
                &format!("tier.{k}.intensity"),
                tier.intensity_factor.to_string(),
            );
            kv(
                &format!("tier.{k}.bandwidth_hz"),
                tier.bandwidth_hz.to_string(),
            );
            kv(
                &format!("tier.{k}.circuit_power_w"),
                tier.circuit_power_w.to_string(),
            );
            kv(
                &format!("tier.{k}.tolerance_w"),
                tier.tolerance_w.to_string(),
            );
        }
        kv("channel.alpha", float_list(&self.alphas));
        kv("channel.noise_w", self.noise_w.to_string());
        kv("channel.d_min_km", self.d_min_km.to_string());
        kv("users.lambda", float_list(&self.lambda_factors));
        kv(
            "users.accessible_tiers",
            match &self.accessible_tiers {
                AccessPolicy::All => "all".into(),
                AccessPolicy::Subset(ids) => ids
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(", "),
            },
        );
        kv("mobility.beta", self.mobility_beta.to_string());
        kv(
            "mobility.mean_velocity_kmps",
            format!(
                "{}, {}",
                self.mobility_mean_kmps.0, self.mobility_mean_kmps.1
            ),
        );
        kv("mobility.sigma_kmps", self.mobility_sigma_kmps.to_string());
        kv("sim.drops", self.drops.to_string());
        kv("sim.time_steps", self.time_steps.to_string());
        kv("sim.master_seed", self.master_seed.to_string());
        kv(
            "sim.iteration_cap",
            match self.iteration_cap {
                IterationCap::Auto => "auto".into(),
                IterationCap::Fixed(n) => n.to_string(),
            },
        );
        kv(
            "run.schemes",
            self.schemes
                .iter()
                .map(|s| s.name().to_string())
                .collect::<Vec<_>>()
                .join(", "),
        );
        kv("output.dir", self.output_dir.clone());
        out
    }

    /// SHA-256 over the canonical rendering, hex-encoded. The output
    /// directory is excluded: it locates results but is not part of the
    /// experiment's identity.
    pub fn digest(&self) -> String {
        let mut identity = self.clone();
        identity.output_dir = String::new();
        let hash = Sha256::digest(identity.render().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The scenario with a concrete path-loss exponent from the α sweep.
    pub fn scenario_for_alpha(&self, alpha: f64) -> ScenarioConfig {
        let tiers = self
            .tiers
            .iter()
            .enumerate()
            .map(|(i, spec)| TierConfig {
                tier_id: TierId(i as u32 + 1),
                tx_power_w: spec.tx_power_w,
                station_intensity: spec.intensity_factor * self.base_density_per_km2,
                bandwidth_hz: spec.bandwidth_hz,
                circuit_power_w: spec.circuit_power_w,
                interference_tolerance_w: spec.tolerance_w,
            })
            .collect();
        ScenarioConfig {
            tiers,
            window: SimWindow::new(self.window_side_km),
            channel: ChannelModel {
                path_loss_exponent: alpha,
                noise_power_w: self.noise_w,
                reference_distance_km: self.d_min_km,
            },
            frequency_plan: self.frequency_plan,
            sinr_ceiling: self.sinr_ceiling,
        }
    }

    /// Tier-1 station intensity in stations per km².
    pub fn lambda_tier1(&self) -> f64 {
        self.tiers
            .first()
            .map(|t| t.intensity_factor * self.base_density_per_km2)
            .unwrap_or(0.0)
    }

    /// Absolute user intensity for a sweep factor.
    pub fn lambda_users(&self, factor: f64) -> f64 {
        factor * self.lambda_tier1()
    }

    pub fn mobility_params(&self) -> MobilityParams {
        MobilityParams {
            memory: self.mobility_beta,
            mean_velocity: Point::new(self.mobility_mean_kmps.0, self.mobility_mean_kmps.1),
            sigma: self.mobility_sigma_kmps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default_experiment() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.tiers.len(), 3);
        assert_eq!(cfg.tiers[0].tx_power_w, 10.0);
        assert_eq!(cfg.tiers[2].tx_power_w, 0.1);
    }

    #[test]
    fn alpha_two_fails_at_parse_time_with_line() {
        let err = parse_config("channel.alpha = 2.0\n").unwrap_err();
        assert_eq!(err.issues.len(), 1);
        assert_eq!(err.issues[0].line, Some(1));
        assert!(err.issues[0]
            .message
            .contains("path_loss_exponent must exceed 2"));
    }

    #[test]
    fn unknown_and_malformed_keys_are_reported_together() {
        let text = "sim.drops = 5\nnot a kv line\nchannel.bogus = 3\nsim.time_steps = zero\n";
        let err = parse_config(text).unwrap_err();
        let lines: Vec<Option<usize>> = err.issues.iter().map(|i| i.line).collect();
        assert!(lines.contains(&Some(2)));
        assert!(lines.contains(&Some(3)));
        assert!(lines.contains(&Some(4)));
    }

    #[test]
    fn duplicate_keys_rejected() {
        let err = parse_config("sim.drops = 5\nsim.drops = 6\n").unwrap_err();
        assert!(err.issues[0].message.contains("duplicate"));
        assert_eq!(err.issues[0].line, Some(2));
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let cfg = parse_config("# a comment\n\nsim.drops = 7 # trailing\n").unwrap();
        assert_eq!(cfg.drops, 7);
    }

    #[test]
    fn render_parse_round_trip_is_stable() {
        let texts = [
            "",
            "sim.drops = 3\nchannel.alpha = 3.25\nusers.lambda = 1, 2\n",
            "scenario.frequency_plan = full-reuse\nusers.accessible_tiers = 1, 2\nsim.iteration_cap = 17\n",
        ];
        for text in texts {
            let once = parse_config(text).unwrap();
            let rendered = once.render();
            let twice = parse_config(&rendered).unwrap();
            assert_eq!(once, twice);
            assert_eq!(rendered, twice.render());
            assert_eq!(once.digest(), twice.digest());
        }
    }

    #[test]
    fn digest_independent_of_key_order() {
        let a = parse_config("sim.drops = 9\nchannel.noise_w = 1e-9\n").unwrap();
        let b = parse_config("channel.noise_w = 1e-9\nsim.drops = 9\n").unwrap();
        assert_eq!(a.digest(), b.digest());
    }

    #[test]
    fn tier_count_extension_requires_full_specification() {
        let err = parse_config("scenario.tier_count = 4\n").unwrap_err();
        assert!(err
            .issues
            .iter()
            .any(|i| i.message.contains("tier 4 has no default")));

        let full = "scenario.tier_count = 4\n\
                    tier.4.tx_power_w = 0.01\n\
                    tier.4.intensity = 1000\n\
                    tier.4.bandwidth_hz = 1e7\n\
                    tier.4.circuit_power_w = 0.1\n\
                    tier.4.tolerance_w = 1e6\n";
        let cfg = parse_config(full).unwrap();
        assert_eq!(cfg.tiers.len(), 4);
        assert_eq!(cfg.tiers[3].tx_power_w, 0.01);
    }

    #[test]
    fn tier_keys_outside_range_rejected() {
        let err = parse_config("tier.5.tx_power_w = 1\n").unwrap_err();
        assert!(err.issues[0].message.contains("outside tier range"));
    }

    #[test]
    fn shrinking_to_two_tiers_works() {
        let cfg = parse_config("scenario.tier_count = 2\n").unwrap();
        assert_eq!(cfg.tiers.len(), 2);
        let scenario = cfg.scenario_for_alpha(4.0);
        assert_eq!(scenario.tier_count(), 2);
    }

    #[test]
    fn scenario_materialization_scales_intensities() {
        let cfg = parse_config("scenario.base_density_per_km2 = 0.2\n").unwrap();
        let sc = cfg.scenario_for_alpha(3.0);
        assert_eq!(sc.tiers[0].station_intensity, 0.2);
        assert_eq!(sc.tiers[1].station_intensity, 2.0);
        assert_eq!(sc.tiers[2].station_intensity, 20.0);
        assert_eq!(cfg.lambda_users(2.0), 0.4);
    }

    #[test]
    fn lambda_zero_rejected() {
        let err = parse_config("users.lambda = 0, 1\n").unwrap_err();
        assert!(err.issues[0].message.contains("must be > 0"));
    }

    #[test]
    fn access_subset_validated_against_tiers() {
        let err = parse_config("users.accessible_tiers = 1, 7\n").unwrap_err();
        assert!(err.issues[0].message.contains("tier 7"));
        let cfg = parse_config("users.accessible_tiers = 1, 2\n").unwrap();
        let tiers = cfg.accessible_tiers.tiers_for(cfg.tiers.len());
        assert_eq!(tiers.len(), 2);
    }

    #[test]
    fn iteration_cap_parses_auto_and_fixed() {
        assert_eq!(
            parse_config("sim.iteration_cap = auto\n")
                .unwrap()
                .iteration_cap,
            IterationCap::Auto
        );
        assert_eq!(
            parse_config("sim.iteration_cap = 12\n")
                .unwrap()
                .iteration_cap,
            IterationCap::Fixed(12)
        );
        assert!(parse_config("sim.iteration_cap = 0\n").is_err());
        assert_eq!(IterationCap::Auto.resolve(4, 3), 12);
        assert_eq!(IterationCap::Auto.resolve(0, 3), 1);
        assert_eq!(IterationCap::Fixed(5).resolve(100, 3), 5);
    }

    mod roundtrip {
        use super::*;
        use proptest::prelude::*;

        fn config_strategy() -> impl Strategy<Value = ExperimentConfig> {
            (
                (2.0f64..50.0, 0.01f64..1.0, 1u8..=2),
                proptest::collection::vec(2.1f64..6.0, 1..4),
                proptest::collection::vec(0.1f64..10.0, 1..6),
                (1u32..50, 1u32..8, proptest::num::u64::ANY),
                prop_oneof![
                    Just(IterationCap::Auto),
                    (1u32..500).prop_map(IterationCap::Fixed)
                ],
                proptest::sample::subsequence(Scheme::ALL.to_vec(), 1..=3),
                (1e-15f64..1e-6, 1e-4f64..0.5, 0.0f64..=1.0, 0.0f64..0.2),
            )
                .prop_map(
                    |(
                        (side, base, plan),
                        mut alphas,
                        mut lambdas,
                        (drops, steps, seed),
                        cap,
                        schemes,
                        (noise, d_min, beta, sigma),
                    )| {
                        alphas.dedup_by(|a, b| a == b);
                        lambdas.dedup_by(|a, b| a == b);
                        ExperimentConfig {
                            window_side_km: side,
                            base_density_per_km2: base,
                            frequency_plan: if plan == 1 {
                                FrequencyPlan::PerTierBands
                            } else {
                                FrequencyPlan::FullReuse
                            },
                            alphas,
                            lambda_factors: lambdas,
                            noise_w: noise,
                            d_min_km: d_min,
                            mobility_beta: beta,
                            mobility_sigma_kmps: sigma,
                            drops,
                            time_steps: steps,
                            master_seed: seed,
                            iteration_cap: cap,
                            schemes,
                            ..ExperimentConfig::default()
                        }
                    },
                )
        }

        proptest! {
            // parse ∘ render is the identity on the normalized form
            #[test]
            fn render_parse_identity(config in config_strategy()) {
                let rendered = config.render();
                let parsed = parse_config(&rendered).unwrap();
                prop_assert_eq!(&parsed, &config);
                prop_assert_eq!(parsed.render(), rendered);
                prop_assert_eq!(parsed.digest(), config.digest());
            }
        }
    }
}
