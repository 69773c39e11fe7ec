//! The 2x2 scenario matrix: public sentiment trend against reopening
//! timing. Timing is an exogenous input; only the trend comes from data.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytics::Shares;
use crate::emotion::{dominant_classes, Category, EmotionProfile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentTrend {
    pub direction: Direction,
    pub pos_share: f64,
    pub neg_share: f64,
    /// Top-two emotion classes; informational only.
    pub dominant_emotions: Vec<Category>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Timing {
    Now,
    Later,
}

impl FromStr for Timing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "now" => Ok(Timing::Now),
            "later" => Ok(Timing::Later),
            other => Err(Error::Config(format!(
                "timing must be `now` or `later`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioId {
    S1,
    S2,
    S3,
    S4,
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NarrativeKey {
    A,
    B,
    C,
    D,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub id: ScenarioId,
    pub label: String,
    pub narrative_key: NarrativeKey,
}

impl ScenarioOutcome {
    /// One-line reading of the scenario for report text.
    pub fn summary(&self) -> &'static str {
        match self.narrative_key {
            NarrativeKey::A => "supportive sentiment meets an early reopening; public backing is available for the restart",
            NarrativeKey::B => "supportive sentiment but reopening is deferred; the window of support may close",
            NarrativeKey::C => "reopening without sentiment support; a volatile restart is likely",
            NarrativeKey::D => "negative sentiment with an open-ended delay; the most adverse combination",
        }
    }
}

/// Direction from the positive/negative share comparison. Exact ties are an
/// error; callers decide how to break them.
pub fn derive_trend(shares: &Shares, agg: &EmotionProfile) -> Result<SentimentTrend> {
    let valid = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);
    if !valid(shares.positive) || !valid(shares.negative) || !valid(shares.neutral) {
        return Err(Error::Schema(format!("invalid polarity shares {shares:?}")));
    }
    let direction = if shares.positive > shares.negative {
        Direction::Positive
    } else if shares.negative > shares.positive {
        Direction::Negative
    } else {
        return Err(Error::TiedTrend(shares.positive));
    };
    Ok(SentimentTrend {
        direction,
        pos_share: shares.positive,
        neg_share: shares.negative,
        dominant_emotions: dominant_classes(agg, 2)
            .into_iter()
            .map(|(c, _)| c)
            .collect(),
    })
}

/// Aggregates read from a saved report: `shares` at the top level or under
/// `distribution`, and optional `emotion_totals`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInputs {
    pub shares: Shares,
    pub emotion_totals: EmotionProfile,
}

impl ScenarioInputs {
    pub fn from_json(v: &serde_json::Value) -> Result<ScenarioInputs> {
        let shares = v
            .get("shares")
            .or_else(|| v.pointer("/distribution/shares"))
            .ok_or_else(|| Error::Schema("report has no `shares` object".into()))?;
        let shares: Shares = serde_json::from_value(shares.clone())?;
        let emotion_totals = match v.get("emotion_totals") {
            Some(e) => serde_json::from_value(e.clone())?,
            None => EmotionProfile::default(),
        };
        Ok(ScenarioInputs {
            shares,
            emotion_totals,
        })
    }
}

pub fn classify_scenario(trend: &SentimentTrend, timing: Timing) -> ScenarioOutcome {
    let (id, key, label) = match (trend.direction, timing) {
        (Direction::Positive, Timing::Now) => (
            ScenarioId::S1,
            NarrativeKey::A,
            "positive trend, reopen now",
        ),
        (Direction::Positive, Timing::Later) => (
            ScenarioId::S2,
            NarrativeKey::B,
            "positive trend, reopen later",
        ),
        (Direction::Negative, Timing::Now) => (
            ScenarioId::S3,
            NarrativeKey::C,
            "negative trend, reopen now",
        ),
        (Direction::Negative, Timing::Later) => (
            ScenarioId::S4,
            NarrativeKey::D,
            "negative trend, reopen later",
        ),
    };
    ScenarioOutcome {
        id,
        label: label.to_string(),
        narrative_key: key,
    }
}
