//! Descriptive aggregations: rankings, device groups, daily emotion
//! proportions and the positive/negative/neutral split.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, TweetRecord};
use crate::emotion::{Category, EmotionProfile};
use crate::error::{Error, Result};
use crate::polarity::{classify_polarity, PolarityClass, PolarityScore};
use crate::textprep::{clean_text, CleanOptions, MASK_PREFIX};

pub const IPHONE: &str = "Twitter for iPhone";
pub const ANDROID: &str = "Twitter for Android";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedRow {
    pub key: String,
    pub count: u64,
    pub rank: usize,
}

/// Rows by count descending, ties lexicographic, ranks `1..=len`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedTable {
    pub label: String,
    pub rows: Vec<RankedRow>,
}

impl RankedTable {
    pub fn from_counts<'a, I>(label: &str, keys: I, k: usize) -> RankedTable
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for key in keys {
            *counts.entry(key).or_default() += 1;
        }
        let mut sorted: Vec<(&str, u64)> = counts.into_iter().collect();
        sorted.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        RankedTable {
            label: label.to_string(),
            rows: sorted
                .into_iter()
                .take(k)
                .enumerate()
                .map(|(i, (key, count))| RankedRow {
                    key: key.to_string(),
                    count,
                    rank: i + 1,
                })
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["rank", &self.label, "count"])?;
        for r in &self.rows {
            wtr.write_record([r.rank.to_string(), r.key.clone(), r.count.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn rank_mentions(c: &Corpus, k: usize) -> RankedTable {
    RankedTable::from_counts(
        "mention",
        c.records
            .iter()
            .flat_map(|r| r.mentions.iter().map(String::as_str)),
        k,
    )
}

pub fn rank_hashtags(c: &Corpus, k: usize) -> RankedTable {
    RankedTable::from_counts(
        "hashtag",
        c.records
            .iter()
            .flat_map(|r| r.hashtags.iter().map(String::as_str)),
        k,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocationField {
    /// Location strings of records that carry a country tag.
    Tagged,
    /// Every self-reported location string.
    Stated,
}

/// Location strings ranked verbatim, with no cleanup or geocoding.
pub fn rank_locations(c: &Corpus, k: usize, field: LocationField) -> RankedTable {
    let keys = c.records.iter().filter_map(|r| match field {
        LocationField::Stated => r.user_location.as_deref(),
        LocationField::Tagged => r.country_code.as_ref().and(r.user_location.as_deref()),
    });
    RankedTable::from_counts("location", keys, k)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordCategory {
    pub name: String,
    pub keywords: Vec<String>,
}

impl KeywordCategory {
    pub fn new(name: &str, keywords: &[&str]) -> KeywordCategory {
        KeywordCategory {
            name: name.to_string(),
            keywords: keywords.iter().map(|k| k.to_lowercase()).collect(),
        }
    }

    fn matches(&self, cleaned: &str) -> bool {
        self.keywords.iter().any(|k| cleaned.contains(k.as_str()))
    }
}

/// Default keyword categories for the device comparison.
pub fn default_keyword_categories() -> Vec<KeywordCategory> {
    vec![
        KeywordCategory::new("reopen", &["reopen"]),
        KeywordCategory::new("business", &["business"]),
        KeywordCategory::new("time", &["time"]),
        KeywordCategory::new("work", &["work", "job"]),
        KeywordCategory::new("trump", &["trump"]),
        KeywordCategory::new(
            "politics",
            &["politic", "democrat", "republican", "governor"],
        ),
        KeywordCategory::new("covid", &["covid", "coronavirus"]),
        KeywordCategory::new("economy", &["econom"]),
        KeywordCategory::new("abusive", &[MASK_PREFIX]),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRatio {
    pub category: String,
    pub matches: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceGroup {
    pub device: String,
    pub n_records: u64,
    pub ratios: Vec<CategoryRatio>,
}

/// iPhone and Android groups, always in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceGroupReport {
    pub groups: Vec<DeviceGroup>,
}

impl DeviceGroupReport {
    pub fn group(&self, device: &str) -> Option<&DeviceGroup> {
        self.groups.iter().find(|g| g.device == device)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["device", "n_records", "category", "matches", "ratio"])?;
        for g in &self.groups {
            for r in &g.ratios {
                wtr.write_record([
                    g.device.clone(),
                    g.n_records.to_string(),
                    r.category.clone(),
                    r.matches.to_string(),
                    r.ratio.to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Within-group share of records whose cleaned text contains any keyword of
/// each category. Devices other than iPhone and Android are ignored.
pub fn device_group_report(
    c: &Corpus,
    categories: &[KeywordCategory],
) -> Result<DeviceGroupReport> {
    if categories.is_empty() {
        return Err(Error::Config(
            "at least one keyword category is required".into(),
        ));
    }
    let opts = CleanOptions::default();
    let groups = [IPHONE, ANDROID]
        .into_iter()
        .map(|device| {
            let members: Vec<&TweetRecord> = c
                .records
                .iter()
                .filter(|r| r.source_device == device)
                .collect();
            let cleaned: Vec<String> = members.iter().map(|r| clean_text(&r.text, &opts)).collect();
            let n = members.len() as u64;
            let ratios = categories
                .iter()
                .map(|cat| {
                    let matches = cleaned.iter().filter(|t| cat.matches(t)).count() as u64;
                    CategoryRatio {
                        category: cat.name.clone(),
                        matches,
                        ratio: if n == 0 {
                            0.0
                        } else {
                            matches as f64 / n as f64
                        },
                    }
                })
                .collect();
            DeviceGroup {
                device: device.to_string(),
                n_records: n,
                ratios,
            }
        })
        .collect();
    Ok(DeviceGroupReport { groups })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub days: Vec<NaiveDate>,
    /// Sum of the eight emotion counts per day.
    pub totals: Vec<u64>,
    /// Per emotion class, the day's share of emotion hits.
    pub values: BTreeMap<Category, Vec<f64>>,
}

impl DailySeries {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["date".to_string(), "emotion_hits".to_string()];
        header.extend(Category::EMOTIONS.iter().map(|c| c.name().to_string()));
        wtr.write_record(&header)?;
        for (i, day) in self.days.iter().enumerate() {
            let mut row = vec![day.to_string(), self.totals[i].to_string()];
            row.extend(
                Category::EMOTIONS
                    .iter()
                    .map(|c| self.values[c][i].to_string()),
            );
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Bucket by UTC date and turn each day's emotion counts into proportions
/// of that day's total emotion hits.
pub fn daily_emotion_series(c: &Corpus, profiles: &[EmotionProfile]) -> Result<DailySeries> {
    if profiles.len() != c.records.len() {
        return Err(Error::Schema(format!(
            "{} profiles for {} records",
            profiles.len(),
            c.records.len()
        )));
    }
    let mut per_day: BTreeMap<NaiveDate, EmotionProfile> = BTreeMap::new();
    for (r, p) in c.records.iter().zip(profiles) {
        per_day.entry(r.date()).or_default().add(p);
    }
    let days: Vec<NaiveDate> = per_day.keys().copied().collect();
    let totals: Vec<u64> = per_day
        .values()
        .map(EmotionProfile::emotion_total)
        .collect();
    let values = Category::EMOTIONS
        .iter()
        .map(|&cat| {
            let series = per_day
                .values()
                .zip(&totals)
                .map(|(p, &t)| {
                    if t == 0 {
                        0.0
                    } else {
                        p.get(cat) as f64 / t as f64
                    }
                })
                .collect();
            (cat, series)
        })
        .collect();
    Ok(DailySeries {
        days,
        totals,
        values,
    })
}

pub const HISTOGRAM_BIN_WIDTH: f64 = 0.25;

/// Fixed-width histogram over `[lo, hi]`; the last bin is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn edges(&self, i: usize) -> (f64, f64) {
        let a = self.lo + i as f64 * self.bin_width;
        (a, a + self.bin_width)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["bin_lo", "bin_hi", "count"])?;
        for (i, c) in self.counts.iter().enumerate() {
            let (a, b) = self.edges(i);
            wtr.write_record([a.to_string(), b.to_string(), c.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shares {
    pub positive: f64,
    pub negative: f64,
    pub neutral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarityDistribution {
    pub n: u64,
    pub positive: u64,
    pub negative: u64,
    pub neutral: u64,
    pub shares: Shares,
    pub histogram: Histogram,
}

pub fn polarity_distribution(scores: &[PolarityScore]) -> Result<PolarityDistribution> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("no polarity scores"));
    }
    let (mut pos, mut neg, mut neu) = (0u64, 0u64, 0u64);
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for s in scores {
        match classify_polarity(s) {
            PolarityClass::Positive => pos += 1,
            PolarityClass::Negative => neg += 1,
            PolarityClass::Neutral => neu += 1,
        }
        min = min.min(s.value);
        max = max.max(s.value);
    }
    let n = scores.len() as u64;
    let shares = Shares {
        positive: pos as f64 / n as f64,
        negative: neg as f64 / n as f64,
        neutral: neu as f64 / n as f64,
    };

    let lo = min.floor();
    let mut hi = max.ceil();
    if hi <= lo {
        hi = lo + HISTOGRAM_BIN_WIDTH;
    }
    let n_bins = ((hi - lo) / HISTOGRAM_BIN_WIDTH).round() as usize;
    let mut counts = vec![0u64; n_bins];
    for s in scores {
        let idx = ((s.value - lo) / HISTOGRAM_BIN_WIDTH).floor() as usize;
        counts[idx.min(n_bins - 1)] += 1;
    }
    Ok(PolarityDistribution {
        n,
        positive: pos,
        negative: neg,
        neutral: neu,
        shares,
        histogram: Histogram {
            lo,
            hi,
            bin_width: HISTOGRAM_BIN_WIDTH,
            counts,
        },
    })
}
