//! Fixture access and brute-force oracles shared by the integration tests.
//! The oracles deliberately avoid the library's own data structures.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use newnormal::corpus::{load_corpus, normalize_for_dedup, Corpus, InputFormat, TweetRecord};
use newnormal::pipeline::RunConfig;
use newnormal::polarity::ScoringParams;
use newnormal::synth::PlantingLedger;
use newnormal::textprep::{load_word_list, TokenStream, WordSet};

pub const GOLDEN_MANIFEST_SHA256: &str = include_str!("../../fixtures/golden_manifest.sha256");

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn seed42_corpus() -> Corpus {
    load_corpus(&fixture("synthetic_seed42.csv"), InputFormat::Csv).expect("fixture corpus loads")
}

pub fn seed42_ledger() -> PlantingLedger {
    let text = std::fs::read_to_string(fixture("synthetic_seed42_ledger.json")).expect("ledger");
    serde_json::from_str(&text).expect("ledger parses")
}

pub fn abusive_lexicon() -> WordSet {
    load_word_list(&fixture("abusive_test.txt")).expect("abusive fixture")
}

/// The pinned golden configuration, writing into `out`.
pub fn golden_config(out: &Path) -> RunConfig {
    let mut cfg = RunConfig::load(&fixture("golden.toml")).expect("golden config");
    cfg.output_dir = out.to_path_buf();
    cfg
}

/// Brute-force n-gram count: walk each sentence by explicit index ranges
/// and key grams by their space-joined text. Sorted by count descending,
/// then gram ascending.
pub fn ngram_oracle(streams: &[TokenStream], n: usize) -> Vec<(String, u64)> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for ts in streams {
        let mut bounds = ts.sentence_boundaries.clone();
        bounds.push(ts.tokens.len());
        for w in bounds.windows(2) {
            let (start, end) = (w[0], w[1]);
            let mut i = start;
            while i + n <= end {
                let key = ts.tokens[i..i + n].join(" ");
                *counts.entry(key).or_insert(0) += 1;
                i += 1;
            }
        }
    }
    let mut out: Vec<(String, u64)> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

/// Independent reading of the bundled polarity and shifter CSVs, plus a
/// direct transcription of the scoring formula.
pub struct PolarityOracle {
    pub polarity: HashMap<String, f64>,
    /// 1 negator, 2 amplifier, 3 deamplifier, 4 adversative.
    pub shifter: HashMap<String, u8>,
}

impl PolarityOracle {
    pub fn bundled() -> PolarityOracle {
        let rows = |text: &str| -> Vec<(String, String)> {
            text.lines()
                .skip(1)
                .filter(|l| !l.trim().is_empty())
                .map(|l| {
                    let (a, b) = l.rsplit_once(',').expect("two columns");
                    (
                        a.trim().trim_matches('"').to_lowercase(),
                        b.trim().to_string(),
                    )
                })
                .collect()
        };
        PolarityOracle {
            polarity: rows(newnormal::data::POLARITY_LEXICON)
                .into_iter()
                .map(|(t, v)| (t, v.parse().expect("score")))
                .collect(),
            shifter: rows(newnormal::data::VALENCE_SHIFTERS)
                .into_iter()
                .map(|(t, v)| (t, v.parse().expect("kind")))
                .collect(),
        }
    }

    pub fn score(&self, tokens: &[String], p: &ScoringParams) -> f64 {
        let n = tokens.len();
        if n == 0 {
            return 0.0;
        }
        let mut total = 0.0;
        for i in 0..n {
            let Some(&base) = self.polarity.get(&tokens[i]) else {
                continue;
            };
            let lo = i.saturating_sub(p.window_before);
            let hi = std::cmp::min(n - 1, i + p.window_after);
            let (mut neg, mut amp, mut deamp, mut adv_before, mut adv_after) =
                (0i32, 0i32, 0i32, 0i32, 0i32);
            for (j, tok) in tokens.iter().enumerate().take(hi + 1).skip(lo) {
                match self.shifter.get(tok) {
                    Some(1) => neg += 1,
                    Some(2) => amp += 1,
                    Some(3) => deamp += 1,
                    Some(4) if j < i => adv_before += 1,
                    Some(4) if j > i => adv_after += 1,
                    _ => {}
                }
            }
            if neg % 2 == 1 {
                deamp += amp;
                amp = 0;
            }
            let a = p.amplifier_weight * amp as f64;
            let d = f64::max(-1.0, -p.amplifier_weight * deamp as f64);
            let sign = if neg % 2 == 0 { 1.0 } else { -1.0 };
            let adv = (1.0 + 0.25 * p.adversative_weight).powi(adv_before)
                * (1.0 - 0.25 * p.adversative_weight).powi(adv_after);
            total += (1.0 + a + d) * base * sign * adv;
        }
        total / (n as f64).sqrt()
    }
}

/// Record-by-record reference for the full filter chain with default bot
/// thresholds. Returns surviving ids in input order.
pub fn reference_filter(records: &[TweetRecord], cfg: &RunConfig) -> Vec<String> {
    let kw = cfg.keyword.to_lowercase();
    let early: Vec<&TweetRecord> = records
        .iter()
        .filter(|r| {
            let d = r.created_at.date_naive();
            d >= cfg.start_date && d <= cfg.end_date
        })
        .filter(|r| r.text.to_lowercase().contains(&kw))
        .filter(|r| {
            r.country_code
                .as_deref()
                .map(|c| c.eq_ignore_ascii_case(&cfg.country))
                .unwrap_or(false)
        })
        .collect();

    // Burst: any user with more than the threshold inside a 60 s span.
    let mut bursty: HashSet<&str> = HashSet::new();
    for a in &early {
        let t0 = a.created_at.timestamp();
        let in_span = early
            .iter()
            .filter(|b| b.user_id == a.user_id)
            .filter(|b| {
                let t = b.created_at.timestamp();
                t >= t0 && t - t0 < 60
            })
            .count();
        if in_span > cfg.burst_per_minute {
            bursty.insert(a.user_id.as_str());
        }
    }
    let after_burst: Vec<(usize, &TweetRecord)> = early
        .iter()
        .enumerate()
        .filter(|(_, r)| !bursty.contains(r.user_id.as_str()))
        .map(|(i, r)| (i, *r))
        .collect();
    let norm: Vec<String> = after_burst
        .iter()
        .map(|(_, r)| normalize_for_dedup(&r.text))
        .collect();

    let mut keep = Vec::new();
    for (k, (i, r)) in after_burst.iter().enumerate() {
        let t = r.created_at.timestamp();
        // Immediate predecessor with the same normalized text.
        let pred = after_burst
            .iter()
            .enumerate()
            .filter(|(m, (j, o))| norm[*m] == norm[k] && (o.created_at.timestamp(), *j) < (t, *i))
            .map(|(_, (j, o))| (o.created_at.timestamp(), *j))
            .max();
        if let Some((pt, _)) = pred {
            if t - pt <= cfg.duplicate_window_secs {
                continue;
            }
        }
        let distinct: HashSet<&str> = norm[k].split(' ').filter(|w| !w.is_empty()).collect();
        if distinct.len() < cfg.min_distinct_tokens {
            continue;
        }
        keep.push(r.id.clone());
    }
    keep
}
