//! Flat `key = value` experiment configuration.
//!
//! Lines are `key = value`, `#` starts a comment, blank lines are ignored.
//! Unknown keys and malformed values are reported with their line number.

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

use audit_game::sim::{Role, StrategyKind, StrategySpec};

/// Which payoff model a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Deterministic,
    Probabilistic,
}

/// Parsed experiment configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub model: ModelChoice,
    pub t_d: f64,
    pub t_m: f64,
    pub c: f64,
    pub r_a: f64,
    pub s_a: f64,
    pub strict: bool,
    pub tau: f64,
    pub delta: f64,
    pub defender: String,
    pub attacker: String,
    pub rounds: u32,
    pub repetitions: u32,
    pub seed: u64,
    pub out: PathBuf,
    pub p1: f64,
    pub p4: f64,
    pub phi: f64,
    /// Explicit phi grid; `None` means the single `phi` value, the string
    /// `default` selects the built-in log-spaced grid.
    pub phi_grid: Option<Vec<f64>>,
    pub p_step: f64,
    pub q_step: f64,
    pub thresholds: usize,
    pub standard_labels: bool,
    /// Sweep declaration: which variable the sweep files restrict, and the
    /// domain and resolution to use for it.
    #[serde(rename = "variable")]
    pub sweep_variable: Option<String>,
    #[serde(rename = "lo")]
    pub sweep_lo: f64,
    #[serde(rename = "hi")]
    pub sweep_hi: f64,
    #[serde(rename = "steps")]
    pub sweep_steps: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelChoice::Probabilistic,
            t_d: 8.0,
            t_m: 5.0,
            c: 2.0,
            r_a: 10.0,
            s_a: 5.0,
            strict: true,
            tau: 0.6,
            delta: 0.2,
            defender: "rand".into(),
            attacker: "rand".into(),
            rounds: 50,
            repetitions: 50,
            seed: 42,
            out: PathBuf::from("out"),
            p1: 0.5,
            p4: 0.5,
            phi: -1.0,
            phi_grid: None,
            p_step: 0.1,
            q_step: 0.25,
            thresholds: 101,
            standard_labels: false,
            sweep_variable: None,
            sweep_lo: 0.0,
            sweep_hi: 1.0,
            sweep_steps: 101,
        }
    }
}

/// Configuration error with key and, when parsed from a file, line context.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(
                f,
                "config error at line {line}, key `{}`: {}",
                self.key, self.message
            ),
            None => write!(f, "config error, key `{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(key: &str, line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        line,
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Parse a config file body over the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(line, Some(line_no), "expected `key = value`"));
            };
            let key = key.trim();
            let value = value.trim();
            cfg.set(key, value, Some(line_no))?;
        }
        Ok(cfg)
    }

    /// Apply a single `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<(), ConfigError> {
        let parse_f64 = |v: &str| -> Result<f64, ConfigError> {
            v.parse::<f64>()
                .map_err(|_| err(key, line, format!("`{v}` is not a number")))
        };
        match key {
            "model" => {
                self.model = match value {
                    "deterministic" => ModelChoice::Deterministic,
                    "probabilistic" => ModelChoice::Probabilistic,
                    other => {
                        return Err(err(
                            key,
                            line,
                            format!("`{other}` is not `deterministic` or `probabilistic`"),
                        ))
                    }
                };
            }
            "t_d" => self.t_d = parse_f64(value)?,
            "t_m" => self.t_m = parse_f64(value)?,
            "c" => self.c = parse_f64(value)?,
            "r_a" => self.r_a = parse_f64(value)?,
            "s_a" => self.s_a = parse_f64(value)?,
            "strict" => self.strict = parse_bool(key, value, line)?,
            "tau" => self.tau = parse_f64(value)?,
            "delta" => self.delta = parse_f64(value)?,
            "defender" => self.defender = value.to_string(),
            "attacker" => self.attacker = value.to_string(),
            "rounds" => {
                self.rounds = parse_int(key, value, line)?;
                if self.rounds == 0 {
                    return Err(err(key, line, "rounds must be at least 1"));
                }
            }
            "repetitions" => {
                self.repetitions = parse_int(key, value, line)?;
                if self.repetitions == 0 {
                    return Err(err(key, line, "repetitions must be at least 1"));
                }
            }
            "seed" => {
                self.seed = value
                    .parse::<u64>()
                    .map_err(|_| err(key, line, format!("`{value}` is not a seed")))?;
            }
            "out" => self.out = PathBuf::from(value),
            "p1" => self.p1 = parse_f64(value)?,
            "p4" => self.p4 = parse_f64(value)?,
            "phi" => self.phi = parse_f64(value)?,
            "phi_grid" => {
                if value == "default" {
                    self.phi_grid = Some(audit_game::optimizer::default_phi_grid());
                } else {
                    let mut grid = Vec::new();
                    for part in value.split(',') {
                        grid.push(parse_f64(part.trim())?);
                    }
                    self.phi_grid = Some(grid);
                }
            }
            "p_step" => self.p_step = parse_f64(value)?,
            "q_step" => self.q_step = parse_f64(value)?,
            "thresholds" => {
                self.thresholds = parse_int::<usize>(key, value, line)?;
                if self.thresholds < 2 {
                    return Err(err(key, line, "thresholds must be at least 2"));
                }
            }
            "standard_labels" => self.standard_labels = parse_bool(key, value, line)?,
            "variable" => {
                if !["p1", "p4", "tau"].contains(&value) {
                    return Err(err(key, line, format!("`{value}` is not p1, p4, or tau")));
                }
                self.sweep_variable = Some(value.to_string());
            }
            "lo" => self.sweep_lo = parse_f64(value)?,
            "hi" => self.sweep_hi = parse_f64(value)?,
            "steps" => {
                self.sweep_steps = parse_int::<usize>(key, value, line)?;
                if self.sweep_steps < 2 {
                    return Err(err(key, line, "steps must be at least 2"));
                }
            }
            other => return Err(err(other, line, "unknown key")),
        }
        Ok(())
    }

    /// The phi grid this config selects.
    pub fn effective_phi_grid(&self) -> Vec<f64> {
        self.phi_grid.clone().unwrap_or_else(|| vec![self.phi])
    }
}

fn parse_bool(key: &str, value: &str, line: Option<usize>) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(err(key, line, format!("`{other}` is not a boolean"))),
    }
}

fn parse_int<T: std::str::FromStr>(
    key: &str,
    value: &str,
    line: Option<usize>,
) -> Result<T, ConfigError> {
    value
        .parse::<T>()
        .map_err(|_| err(key, line, format!("`{value}` is not a valid integer")))
}

/// Parse a strategy spec string such as `all1`, `tft`,
/// `mixed:0.5,0.5,0.5,0.5`, `zd-equalizer:0.5,0.5,clamp`, or
/// `zd-diffmax:-1,clamp`.
pub fn parse_strategy(role: Role, text: &str) -> Result<StrategySpec, ConfigError> {
    let key = match role {
        Role::Defender => "defender",
        Role::Attacker => "attacker",
    };
    let (head, args) = match text.split_once(':') {
        Some((h, a)) => (h.trim(), Some(a.trim())),
        None => (text.trim(), None),
    };
    let kind = match (head, args) {
        ("all0", None) => StrategyKind::All0,
        ("all1", None) => StrategyKind::All1,
        ("rand", None) => StrategyKind::Rand,
        ("tft", None) => StrategyKind::Tft,
        ("wsls", None) => StrategyKind::Wsls,
        ("wsls", Some(args)) => {
            let t = args
                .parse::<f64>()
                .map_err(|_| err(key, None, format!("`{args}` is not a win threshold")))?;
            StrategyKind::WslsAt(t)
        }
        ("mixed", Some(args)) => {
            let mut probs = Vec::new();
            for part in args.split(',') {
                probs.push(
                    part.trim()
                        .parse::<f64>()
                        .map_err(|_| err(key, None, format!("`{part}` is not a probability")))?,
                );
            }
            StrategyKind::Mixed(probs)
        }
        ("zd-equalizer", Some(args)) => {
            let (nums, clamp) = split_clamp(args);
            if nums.len() != 2 {
                return Err(err(key, None, "zd-equalizer needs `p1,p4[,clamp]`"));
            }
            StrategyKind::ZdEqualizer {
                p1: nums[0],
                p4: nums[1],
                clamp,
            }
        }
        ("zd-diffmax", Some(args)) => {
            let (nums, clamp) = split_clamp(args);
            if nums.len() != 1 {
                return Err(err(key, None, "zd-diffmax needs `phi[,clamp]`"));
            }
            StrategyKind::ZdDiffMax {
                phi: nums[0],
                clamp,
            }
        }
        _ => {
            return Err(err(
                key,
                None,
                format!("`{text}` is not a recognized strategy"),
            ))
        }
    };
    Ok(StrategySpec { role, kind })
}

fn split_clamp(args: &str) -> (Vec<f64>, bool) {
    let mut clamp = false;
    let mut nums = Vec::new();
    for part in args.split(',') {
        let part = part.trim();
        if part == "clamp" || part == "clamped" {
            clamp = true;
        } else if let Ok(x) = part.parse::<f64>() {
            nums.push(x);
        }
    }
    (nums, clamp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_empty_config() {
        assert_eq!(
            ExperimentConfig::parse("").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn comments_and_overrides() {
        let cfg = ExperimentConfig::parse(
            "# experiment\nmodel = deterministic\nrounds = 100 # inline\nseed = 7\n",
        )
        .unwrap();
        assert_eq!(cfg.model, ModelChoice::Deterministic);
        assert_eq!(cfg.rounds, 100);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn unknown_key_names_line() {
        let e = ExperimentConfig::parse("rounds = 10\nbogus = 3\n").unwrap_err();
        assert_eq!(e.key, "bogus");
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn bad_number_reports_key() {
        let e = ExperimentConfig::parse("tau = fast\n").unwrap_err();
        assert_eq!(e.key, "tau");
    }

    #[test]
    fn strategy_specs_parse() {
        let spec = parse_strategy(Role::Defender, "zd-equalizer:0.5,0.5,clamp").unwrap();
        assert_eq!(
            spec.kind,
            StrategyKind::ZdEqualizer {
                p1: 0.5,
                p4: 0.5,
                clamp: true
            }
        );
        let spec = parse_strategy(Role::Attacker, "mixed:0.2,0.8").unwrap();
        assert_eq!(spec.kind, StrategyKind::Mixed(vec![0.2, 0.8]));
        assert!(parse_strategy(Role::Attacker, "zd-unknown:1").is_err());
    }
}
