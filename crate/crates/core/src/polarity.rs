//! Signed sentence scoring with valence shifters.
//!
//! Each polarized word looks at a context cluster around itself (four
//! tokens before, two after by default, clipped to the sentence). With `c`
//! negators, `A` amplifiers and `D` de-amplifiers in the cluster and weight
//! `z`:
//!
//! ```text
//! a = z * A                       (0 when c is odd)
//! d = max(-1, -z * D')            D' = D, or D + A when c is odd
//! w = (1 + a + d) * p * (-1)^c
//! ```
//!
//! An adversative conjunction before the word scales `w` by
//! `1 + 0.25 * adversative_weight`, one after it by
//! `1 - 0.25 * adversative_weight`. The sentence score is the sum of the
//! weighted polarities divided by the square root of the sentence length.
//! This is a simplified take on sentimentr's cluster scoring.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::emotion::read_lexicon;
use crate::error::{Error, Result};
use crate::textprep::TokenStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShifterKind {
    Negator,
    Amplifier,
    Deamplifier,
    Adversative,
}

impl ShifterKind {
    /// Numeric coding used in shifter files (1..=4).
    pub fn from_code(code: u8) -> Option<ShifterKind> {
        match code {
            1 => Some(ShifterKind::Negator),
            2 => Some(ShifterKind::Amplifier),
            3 => Some(ShifterKind::Deamplifier),
            4 => Some(ShifterKind::Adversative),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolarityLexicon {
    entries: HashMap<String, f64>,
    shifters: HashMap<String, ShifterKind>,
}

impl PolarityLexicon {
    /// Validates that polarities are finite and non-zero and that no term is
    /// both polarized and a shifter.
    pub fn new(
        entries: HashMap<String, f64>,
        shifters: HashMap<String, ShifterKind>,
    ) -> Result<PolarityLexicon> {
        for (term, &p) in &entries {
            if !p.is_finite() || p == 0.0 {
                return Err(Error::Schema(format!(
                    "polarity for `{term}` must be finite and non-zero, got {p}"
                )));
            }
            if shifters.contains_key(term) {
                return Err(Error::Schema(format!(
                    "`{term}` is both a polarized term and a valence shifter"
                )));
            }
        }
        Ok(PolarityLexicon { entries, shifters })
    }

    pub fn from_pairs<'a>(
        entries: impl IntoIterator<Item = (&'a str, f64)>,
        shifters: impl IntoIterator<Item = (&'a str, ShifterKind)>,
    ) -> Result<PolarityLexicon> {
        PolarityLexicon::new(
            entries
                .into_iter()
                .map(|(t, p)| (t.to_lowercase(), p))
                .collect(),
            shifters
                .into_iter()
                .map(|(t, k)| (t.to_lowercase(), k))
                .collect(),
        )
    }

    /// Parse `term,score` and `term,kind` CSV texts (header rows required).
    pub fn parse_csv(polarity: &str, shifters: &str, origin: &str) -> Result<PolarityLexicon> {
        let mut entries = HashMap::new();
        for (line, term, value) in csv_pairs(polarity, &format!("{origin} (polarity)"))? {
            let score: f64 = value.parse().map_err(|_| Error::Lexicon {
                path: origin.to_string(),
                line,
                message: format!("score `{value}` is not a number"),
            })?;
            entries.insert(term, score);
        }
        let mut shift = HashMap::new();
        for (line, term, value) in csv_pairs(shifters, &format!("{origin} (shifters)"))? {
            let kind = value
                .parse::<u8>()
                .ok()
                .and_then(ShifterKind::from_code)
                .ok_or_else(|| Error::Lexicon {
                    path: origin.to_string(),
                    line,
                    message: format!("shifter kind `{value}` is not in 1..=4"),
                })?;
            shift.insert(term, kind);
        }
        PolarityLexicon::new(entries, shift)
    }

    pub fn load(polarity: &Path, shifters: &Path) -> Result<PolarityLexicon> {
        let p = read_lexicon(polarity)?;
        let s = read_lexicon(shifters)?;
        PolarityLexicon::parse_csv(&p, &s, &polarity.display().to_string())
    }

    pub fn bundled() -> PolarityLexicon {
        PolarityLexicon::parse_csv(
            crate::data::POLARITY_LEXICON,
            crate::data::VALENCE_SHIFTERS,
            "bundled",
        )
        .expect("bundled polarity lexicon parses")
    }

    pub fn polarity(&self, term: &str) -> Option<f64> {
        self.entries.get(term).copied()
    }

    pub fn shifter(&self, term: &str) -> Option<ShifterKind> {
        self.shifters.get(term).copied()
    }

    pub fn polarized_terms(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(t, p)| (t.as_str(), *p))
    }

    pub fn shifter_terms(&self) -> impl Iterator<Item = (&str, ShifterKind)> {
        self.shifters.iter().map(|(t, k)| (t.as_str(), *k))
    }
}

fn csv_pairs(text: &str, origin: &str) -> Result<Vec<(usize, String, String)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != 2 {
            return Err(Error::Lexicon {
                path: origin.to_string(),
                line,
                message: format!("expected 2 columns, got {}", row.len()),
            });
        }
        let term = row[0].to_lowercase();
        if term.is_empty() {
            continue;
        }
        out.push((line, term, row[1].to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringParams {
    pub window_before: usize,
    pub window_after: usize,
    pub amplifier_weight: f64,
    pub adversative_weight: f64,
}

impl Default for ScoringParams {
    fn default() -> Self {
        ScoringParams {
            window_before: 4,
            window_after: 2,
            amplifier_weight: 0.8,
            adversative_weight: 0.85,
        }
    }
}

impl ScoringParams {
    /// Windows up to 50 tokens, amplifier weight in [0, 2], adversative
    /// weight in [0, 4] (so the after-word factor stays non-negative).
    pub fn validate(&self) -> Result<()> {
        if self.window_before > 50 || self.window_after > 50 {
            return Err(Error::Config(
                "context windows must be at most 50 tokens".into(),
            ));
        }
        if !(0.0..=2.0).contains(&self.amplifier_weight) {
            return Err(Error::Config(format!(
                "amplifier_weight {} outside [0, 2]",
                self.amplifier_weight
            )));
        }
        if !(0.0..=4.0).contains(&self.adversative_weight) {
            return Err(Error::Config(format!(
                "adversative_weight {} outside [0, 4]",
                self.adversative_weight
            )));
        }
        Ok(())
    }
}

pub fn score_sentence(tokens: &[String], lex: &PolarityLexicon, params: &ScoringParams) -> f64 {
    if tokens.is_empty() {
        return 0.0;
    }
    let z = params.amplifier_weight;
    let adv_up = 1.0 + params.adversative_weight * 0.25;
    let adv_down = 1.0 - params.adversative_weight * 0.25;

    let mut sum = 0.0;
    for (i, tok) in tokens.iter().enumerate() {
        let Some(p) = lex.polarity(tok) else { continue };
        let lo = i.saturating_sub(params.window_before);
        let hi = (i + params.window_after).min(tokens.len() - 1);

        let (mut negators, mut amps, mut deamps) = (0u32, 0u32, 0u32);
        let mut adversative = 1.0;
        for (j, ctx) in tokens.iter().enumerate().take(hi + 1).skip(lo) {
            match lex.shifter(ctx) {
                Some(ShifterKind::Negator) => negators += 1,
                Some(ShifterKind::Amplifier) => amps += 1,
                Some(ShifterKind::Deamplifier) => deamps += 1,
                Some(ShifterKind::Adversative) if j < i => adversative *= adv_up,
                Some(ShifterKind::Adversative) if j > i => adversative *= adv_down,
                _ => {}
            }
        }
        let odd = negators % 2 == 1;
        if odd {
            deamps += amps;
            amps = 0;
        }
        let a = z * f64::from(amps);
        let d = (-z * f64::from(deamps)).max(-1.0);
        let sign = if odd { -1.0 } else { 1.0 };
        sum += (1.0 + a + d) * p * sign * adversative;
    }
    sum / (tokens.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarityScore {
    pub value: f64,
    pub n_sentences: usize,
    pub per_sentence: Vec<f64>,
}

pub fn score_text(
    ts: &TokenStream,
    lex: &PolarityLexicon,
    params: &ScoringParams,
) -> PolarityScore {
    let per_sentence: Vec<f64> = ts
        .sentences()
        .map(|s| score_sentence(s, lex, params))
        .collect();
    PolarityScore {
        value: per_sentence.iter().sum(),
        n_sentences: per_sentence.len(),
        per_sentence,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarityClass {
    Positive,
    Negative,
    Neutral,
}

impl PolarityClass {
    pub fn name(self) -> &'static str {
        match self {
            PolarityClass::Positive => "positive",
            PolarityClass::Negative => "negative",
            PolarityClass::Neutral => "neutral",
        }
    }
}

/// Exact-zero neutral band.
pub fn classify_polarity(score: &PolarityScore) -> PolarityClass {
    if score.value > 0.0 {
        PolarityClass::Positive
    } else if score.value < 0.0 {
        PolarityClass::Negative
    } else {
        PolarityClass::Neutral
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremes {
    pub min_index: usize,
    pub min_value: f64,
    pub max_index: usize,
    pub max_value: f64,
}

/// Lowest and highest scores; ties go to the first occurrence.
pub fn extremes(scores: &[PolarityScore]) -> Result<Extremes> {
    let first = scores.first().ok_or(Error::EmptyInput("no scores"))?;
    let mut ex = Extremes {
        min_index: 0,
        min_value: first.value,
        max_index: 0,
        max_value: first.value,
    };
    for (i, s) in scores.iter().enumerate().skip(1) {
        if s.value < ex.min_value {
            ex.min_index = i;
            ex.min_value = s.value;
        }
        if s.value > ex.max_value {
            ex.max_index = i;
            ex.max_value = s.value;
        }
    }
    Ok(ex)
}
