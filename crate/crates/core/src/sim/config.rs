//! Simulation parameters and their flat `key = value` text form.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectionPolicy {
    Fifo,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectionPolicy {
    /// The arriving manuscript is turned away when the queue is full.
    Lifo,
    /// One of the queued manuscripts or the arrival is dropped uniformly.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueueCap {
    Bounded(usize),
    Unbounded,
}

impl QueueCap {
    pub fn admits(&self, len: usize) -> bool {
        match self {
            QueueCap::Bounded(cap) => len < *cap,
            QueueCap::Unbounded => true,
        }
    }

    pub fn limit(&self) -> Option<usize> {
        match self {
            QueueCap::Bounded(cap) => Some(*cap),
            QueueCap::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Expected arrivals per publishing period (λ).
    pub lambda_per_period: f64,
    /// Manuscripts accepted per meeting (μ, the issue volume).
    pub capacity_per_meeting: usize,
    /// Days between consecutive meetings (T).
    pub period_days: f64,
    pub queue_cap: QueueCap,
    pub selection_policy: SelectionPolicy,
    pub rejection_policy: RejectionPolicy,
    /// Number of meetings simulated.
    pub horizon_periods: u64,
    /// Meetings at the start whose decisions are left out of statistics.
    pub warmup_periods: u64,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            lambda_per_period: 10.0,
            capacity_per_meeting: 10,
            period_days: 30.0,
            queue_cap: QueueCap::Bounded(50),
            selection_policy: SelectionPolicy::Random,
            rejection_policy: RejectionPolicy::Random,
            horizon_periods: 10_000,
            warmup_periods: 100,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
}

impl ConfigError {
    fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field,
            message: message.into(),
        }
    }

    /// Name of the offending field, when the error is about a single field.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } => Some(field),
            ConfigError::UnknownKey { key, .. } | ConfigError::DuplicateKey { key, .. } => {
                Some(key)
            }
            ConfigError::Syntax { .. } => None,
        }
    }
}

const KEYS: [&str; 9] = [
    "lambda_per_period",
    "capacity_per_meeting",
    "period_days",
    "queue_cap",
    "selection_policy",
    "rejection_policy",
    "horizon_periods",
    "warmup_periods",
    "seed",
];

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.lambda_per_period.is_finite() && self.lambda_per_period >= 0.0) {
            return Err(ConfigError::invalid(
                "lambda_per_period",
                format!("must be a finite number >= 0, got {}", self.lambda_per_period),
            ));
        }
        if self.capacity_per_meeting == 0 {
            return Err(ConfigError::invalid("capacity_per_meeting", "must be >= 1"));
        }
        if !(self.period_days.is_finite() && self.period_days > 0.0) {
            return Err(ConfigError::invalid(
                "period_days",
                format!("must be a finite number > 0, got {}", self.period_days),
            ));
        }
        if self.queue_cap == QueueCap::Bounded(0) {
            return Err(ConfigError::invalid("queue_cap", "must be >= 1 or `unbounded`"));
        }
        if self.horizon_periods == 0 {
            return Err(ConfigError::invalid("horizon_periods", "must be >= 1"));
        }
        if self.warmup_periods >= self.horizon_periods {
            return Err(ConfigError::invalid(
                "warmup_periods",
                format!(
                    "must be smaller than horizon_periods ({}), got {}",
                    self.horizon_periods, self.warmup_periods
                ),
            ));
        }
        Ok(())
    }

    pub fn traffic_intensity(&self) -> f64 {
        super::traffic_intensity(self.lambda_per_period, self.capacity_per_meeting)
    }

    /// Parses the `key = value` format. Missing keys keep their defaults;
    /// `#` starts a comment. The result is validated.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = SimulationConfig::default();
        let mut seen = [false; KEYS.len()];
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })?;
            if std::mem::replace(&mut seen[slot], true) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
            cfg.set(KEYS[slot], value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &'static str, value: &str) -> Result<(), ConfigError> {
        fn num<T: FromStr>(key: &'static str, value: &str) -> Result<T, ConfigError> {
            value
                .parse()
                .map_err(|_| ConfigError::invalid(key, format!("cannot parse `{value}`")))
        }
        match key {
            "lambda_per_period" => self.lambda_per_period = num(key, value)?,
            "capacity_per_meeting" => self.capacity_per_meeting = num(key, value)?,
            "period_days" => self.period_days = num(key, value)?,
            "queue_cap" => {
                self.queue_cap = if value.eq_ignore_ascii_case("unbounded") {
                    QueueCap::Unbounded
                } else {
                    QueueCap::Bounded(num(key, value)?)
                }
            }
            "selection_policy" => {
                self.selection_policy = value
                    .parse()
                    .map_err(|m: String| ConfigError::invalid(key, m))?
            }
            "rejection_policy" => {
                self.rejection_policy = value
                    .parse()
                    .map_err(|m: String| ConfigError::invalid(key, m))?
            }
            "horizon_periods" => self.horizon_periods = num(key, value)?,
            "warmup_periods" => self.warmup_periods = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => unreachable!("key list and setter out of sync"),
        }
        Ok(())
    }

    /// Renders every field in the same format [`SimulationConfig::parse`] reads.
    pub fn to_config_text(&self) -> String {
        let cap = match self.queue_cap {
            QueueCap::Bounded(c) => c.to_string(),
            QueueCap::Unbounded => "unbounded".to_string(),
        };
        format!(
            "lambda_per_period = {}\n\
             capacity_per_meeting = {}\n\
             period_days = {}\n\
             queue_cap = {}\n\
             selection_policy = {}\n\
             rejection_policy = {}\n\
             horizon_periods = {}\n\
             warmup_periods = {}\n\
             seed = {}\n",
            self.lambda_per_period,
            self.capacity_per_meeting,
            self.period_days,
            cap,
            self.selection_policy,
            self.rejection_policy,
            self.horizon_periods,
            self.warmup_periods,
            self.seed,
        )
    }
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionPolicy::Fifo => "fifo",
            SelectionPolicy::Random => "random",
        })
    }
}

impl FromStr for SelectionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fifo" => Ok(SelectionPolicy::Fifo),
            "random" => Ok(SelectionPolicy::Random),
            _ => Err(format!("expected `fifo` or `random`, got `{s}`")),
        }
    }
}

impl fmt::Display for RejectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectionPolicy::Lifo => "lifo",
            RejectionPolicy::Random => "random",
        })
    }
}

impl FromStr for RejectionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lifo" => Ok(RejectionPolicy::Lifo),
            "random" => Ok(RejectionPolicy::Random),
            _ => Err(format!("expected `lifo` or `random`, got `{s}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        SimulationConfig::default().validate().unwrap();
    }

    #[test]
    fn text_round_trip() {
        let cfg = SimulationConfig {
            lambda_per_period: 7.25,
            capacity_per_meeting: 12,
            period_days: 14.5,
            queue_cap: QueueCap::Unbounded,
            selection_policy: SelectionPolicy::Fifo,
            rejection_policy: RejectionPolicy::Lifo,
            horizon_periods: 300,
            warmup_periods: 3,
            seed: u64::MAX,
        };
        assert_eq!(SimulationConfig::parse(&cfg.to_config_text()).unwrap(), cfg);
    }

    #[test]
    fn comments_and_defaults() {
        let cfg = SimulationConfig::parse("# monthly journal\n\nseed = 9 # fixed\nqueue_cap=unbounded\n")
            .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.queue_cap, QueueCap::Unbounded);
        assert_eq!(cfg.period_days, 30.0);
    }

    #[test]
    fn negative_period_names_field() {
        let err = SimulationConfig::parse("period_days = -1").unwrap_err();
        assert_eq!(err.field(), Some("period_days"));
    }

    #[test]
    fn warmup_must_precede_horizon() {
        let err = SimulationConfig::parse("horizon_periods = 10\nwarmup_periods = 10").unwrap_err();
        assert_eq!(err.field(), Some("warmup_periods"));
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(matches!(
            SimulationConfig::parse("mu = 3"),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            SimulationConfig::parse("seed = 1\nseed = 2"),
            Err(ConfigError::DuplicateKey { line: 2, .. })
        ));
        assert!(matches!(
            SimulationConfig::parse("seed 1"),
            Err(ConfigError::Syntax { line: 1 })
        ));
    }

    #[test]
    fn rejects_bad_values() {
        for (text, field) in [
            ("capacity_per_meeting = 0", "capacity_per_meeting"),
            ("lambda_per_period = -0.5", "lambda_per_period"),
            ("lambda_per_period = NaN", "lambda_per_period"),
            ("queue_cap = 0", "queue_cap"),
            ("selection_policy = lifo", "selection_policy"),
            ("rejection_policy = fifo", "rejection_policy"),
            ("horizon_periods = 0", "horizon_periods"),
        ] {
            assert_eq!(SimulationConfig::parse(text).unwrap_err().field(), Some(field), "{text}");
        }
    }
}
