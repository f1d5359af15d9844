use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

/// The six instruction strategies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptStrategy {
    #[default]
    Vanilla,
    IclOneShot,
    IclFewShot,
    CotZeroShot,
    CotOneShot,
    CotFewShot,
}

impl PromptStrategy {
    pub const ALL: [PromptStrategy; 6] = [
        PromptStrategy::Vanilla,
        PromptStrategy::IclOneShot,
        PromptStrategy::IclFewShot,
        PromptStrategy::CotZeroShot,
        PromptStrategy::CotOneShot,
        PromptStrategy::CotFewShot,
    ];

    pub fn exemplar_count(self) -> usize {
        match self {
            PromptStrategy::Vanilla | PromptStrategy::CotZeroShot => 0,
            PromptStrategy::IclOneShot | PromptStrategy::CotOneShot => 1,
            PromptStrategy::IclFewShot | PromptStrategy::CotFewShot => 3,
        }
    }

    /// Chain-of-thought strategies also ask for an adjacency list.
    pub fn is_cot(self) -> bool {
        matches!(
            self,
            PromptStrategy::CotZeroShot | PromptStrategy::CotOneShot | PromptStrategy::CotFewShot
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PromptStrategy::Vanilla => "vanilla",
            PromptStrategy::IclOneShot => "icl-one-shot",
            PromptStrategy::IclFewShot => "icl-few-shot",
            PromptStrategy::CotZeroShot => "cot-zero-shot",
            PromptStrategy::CotOneShot => "cot-one-shot",
            PromptStrategy::CotFewShot => "cot-few-shot",
        }
    }
}

impl fmt::Display for PromptStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown strategy {0:?}; expected one of vanilla, icl-one-shot, icl-few-shot, cot-zero-shot, cot-one-shot, cot-few-shot")]
pub struct UnknownStrategy(pub String);

impl FromStr for PromptStrategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        PromptStrategy::ALL
            .into_iter()
            .find(|p| p.as_str() == norm)
            .ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

/// Sampling and transport settings for one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub temperature: f64,
    pub repetitions: usize,
    pub max_output_tokens: u32,
    #[serde(with = "secs")]
    pub request_timeout: Duration,
    /// Extra attempts after a transport or rate-limit failure.
    pub retry_limit: u32,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            temperature: 0.7,
            repetitions: 3,
            max_output_tokens: 4096,
            request_timeout: Duration::from_secs(120),
            retry_limit: 3,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ParamsError {
    #[error("temperature must be a finite value >= 0, got {0}")]
    Temperature(f64),
    #[error("repetitions must be at least 1")]
    Repetitions,
}

impl GenerationParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(ParamsError::Temperature(self.temperature));
        }
        if self.repetitions == 0 {
            return Err(ParamsError::Repetitions);
        }
        Ok(())
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}
