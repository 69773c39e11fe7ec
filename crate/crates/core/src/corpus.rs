//! Post records, ingestion and the filter chain.
//!
//! Every filter consumes a [`Corpus`] and returns a new one, appending a
//! [`StageCount`] to the provenance so record counts always reconcile:
//! `parsed = records + skipped + sum(removed)`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::textprep::{clean_text, CleanOptions};

/// Column names of the tabular schema, in file order.
pub const COLUMNS: [&str; 10] = [
    "status_id",
    "created_at",
    "text",
    "source",
    "location",
    "country_code",
    "hashtags",
    "mentions",
    "user_id",
    "is_retweet",
];

/// Columns that must be present in a CSV header.
pub const REQUIRED_COLUMNS: [&str; 5] = ["status_id", "created_at", "text", "source", "user_id"];

pub const STAGE_DATE_RANGE: &str = "date_range";
pub const STAGE_KEYWORD: &str = "keyword";
pub const STAGE_COUNTRY: &str = "country";
pub const STAGE_BOT_BURST: &str = "bot_burst";
pub const STAGE_BOT_DUPLICATE: &str = "bot_duplicate";
pub const STAGE_BOT_LOW_TOKEN: &str = "bot_low_token";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub source_device: String,
    pub user_location: Option<String>,
    pub country_code: Option<String>,
    pub hashtags: Vec<String>,
    pub mentions: Vec<String>,
    pub user_id: String,
    pub is_retweet: bool,
}

impl TweetRecord {
    pub fn date(&self) -> NaiveDate {
        self.created_at.date_naive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl InputFormat {
    /// Guess the format from a file extension (`.csv`, `.jsonl`, `.ndjson`).
    pub fn from_path(path: &Path) -> Option<InputFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(InputFormat::Csv),
            "jsonl" | "ndjson" => Some(InputFormat::Jsonl),
            _ => None,
        }
    }
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(InputFormat::Csv),
            "jsonl" | "ndjson" => Ok(InputFormat::Jsonl),
            other => Err(Error::Config(format!("unknown input format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCount {
    pub stage: String,
    pub removed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    /// Data rows read from the source (blank lines excluded).
    pub parsed: usize,
    pub skipped: usize,
    pub skip_reasons: BTreeMap<String, usize>,
    pub stages: Vec<StageCount>,
}

impl Provenance {
    pub fn filtered_total(&self) -> usize {
        self.stages.iter().map(|s| s.removed).sum()
    }

    pub fn removed_by(&self, stage: &str) -> usize {
        self.stages
            .iter()
            .filter(|s| s.stage == stage)
            .map(|s| s.removed)
            .sum()
    }

    fn skip(&mut self, reason: &str) {
        self.skipped += 1;
        *self.skip_reasons.entry(reason.to_string()).or_default() += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub records: Vec<TweetRecord>,
    pub provenance: Provenance,
}

impl Corpus {
    /// Wrap in-memory records, treating each as a parsed row.
    pub fn from_records(records: Vec<TweetRecord>, source: impl Into<String>) -> Corpus {
        let provenance = Provenance {
            source: source.into(),
            parsed: records.len(),
            ..Provenance::default()
        };
        Corpus {
            records,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// True when `parsed = records + skipped + sum(removed)`.
    pub fn reconciles(&self) -> bool {
        let p = &self.provenance;
        p.parsed == self.records.len() + p.skipped + p.filtered_total()
    }

    fn retain_stage(mut self, stage: &str, keep: impl Fn(&TweetRecord) -> bool + Sync) -> Corpus {
        let mask: Vec<bool> = self.records.par_iter().map(&keep).collect();
        let before = self.records.len();
        let mut it = mask.into_iter();
        self.records.retain(|_| it.next().unwrap_or(false));
        self.provenance.stages.push(StageCount {
            stage: stage.to_string(),
            removed: before - self.records.len(),
        });
        self
    }

    /// Keep records whose UTC calendar date lies in `[start, end]`.
    pub fn filter_date_range(self, start: NaiveDate, end: NaiveDate) -> Result<Corpus> {
        if start > end {
            return Err(Error::InvalidRange { start, end });
        }
        Ok(self.retain_stage(STAGE_DATE_RANGE, |r| {
            let d = r.date();
            start <= d && d <= end
        }))
    }

    /// Keep records whose lowercased text contains the lowercased keyword.
    pub fn filter_keyword(self, keyword: &str) -> Result<Corpus> {
        if keyword.trim().is_empty() {
            return Err(Error::Config("keyword must be non-empty".into()));
        }
        let needle = keyword.to_lowercase();
        Ok(self.retain_stage(STAGE_KEYWORD, |r| r.text.to_lowercase().contains(&needle)))
    }

    /// Keep records tagged with `code` (case-insensitive). Untagged records
    /// are dropped.
    pub fn filter_country(self, code: &str) -> Result<Corpus> {
        if code.chars().count() != 2 || !code.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(Error::Config(format!(
                "country code `{code}` is not a two-letter code"
            )));
        }
        Ok(self.retain_stage(STAGE_COUNTRY, |r| {
            r.country_code
                .as_deref()
                .is_some_and(|cc| cc.eq_ignore_ascii_case(code))
        }))
    }

    /// Apply the three bot rules, recording each as its own stage.
    pub fn filter_bots_and_duplicates(mut self, policy: &BotPolicy) -> Corpus {
        let removals = bot_removals(&self.records, policy);
        let mut category: Vec<Option<&str>> = vec![None; self.records.len()];
        for &i in &removals.burst {
            category[i] = Some(STAGE_BOT_BURST);
        }
        for &i in &removals.duplicate {
            category[i] = Some(STAGE_BOT_DUPLICATE);
        }
        for &i in &removals.low_token {
            category[i] = Some(STAGE_BOT_LOW_TOKEN);
        }
        for (stage, list) in [
            (STAGE_BOT_BURST, &removals.burst),
            (STAGE_BOT_DUPLICATE, &removals.duplicate),
            (STAGE_BOT_LOW_TOKEN, &removals.low_token),
        ] {
            self.provenance.stages.push(StageCount {
                stage: stage.to_string(),
                removed: list.len(),
            });
        }
        let mut it = category.into_iter();
        self.records.retain(|_| it.next().flatten().is_none());
        self
    }

    /// Replace every record's text, keeping all other fields.
    pub fn map_text(mut self, texts: Vec<String>) -> Corpus {
        assert_eq!(texts.len(), self.records.len(), "text count mismatch");
        for (r, t) in self.records.iter_mut().zip(texts) {
            r.text = t;
        }
        self
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_records_csv(&self.records, w)
    }
}

/// Thresholds for the heuristic bot filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BotPolicy {
    /// A record whose normalized text matches an earlier record's within
    /// this many seconds is a duplicate.
    pub duplicate_window_secs: i64,
    /// A user with more than this many posts inside any 60 s span is a bot.
    pub burst_per_minute: usize,
    pub min_distinct_tokens: usize,
}

impl Default for BotPolicy {
    fn default() -> Self {
        BotPolicy {
            duplicate_window_secs: 3600,
            burst_per_minute: 10,
            min_distinct_tokens: 3,
        }
    }
}

/// Indices (into the input slice) removed by each bot rule. The rules run
/// in the order burst, duplicate, low-token; a record is attributed to the
/// first rule that removes it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BotRemovals {
    pub burst: Vec<usize>,
    pub duplicate: Vec<usize>,
    pub low_token: Vec<usize>,
}

/// Text form used for duplicate and token-count checks.
pub fn normalize_for_dedup(text: &str) -> String {
    clean_text(text, &CleanOptions::default())
}

pub fn bot_removals(records: &[TweetRecord], policy: &BotPolicy) -> BotRemovals {
    let mut out = BotRemovals::default();

    let mut by_user: HashMap<&str, Vec<i64>> = HashMap::new();
    for r in records {
        by_user
            .entry(r.user_id.as_str())
            .or_default()
            .push(r.created_at.timestamp());
    }
    let bursty: HashSet<&str> = by_user
        .into_iter()
        .filter(|(_, times)| max_posts_per_minute(times) > policy.burst_per_minute)
        .map(|(u, _)| u)
        .collect();

    let mut alive = vec![true; records.len()];
    for (i, r) in records.iter().enumerate() {
        if bursty.contains(r.user_id.as_str()) {
            out.burst.push(i);
            alive[i] = false;
        }
    }

    let normalized: Vec<String> = records
        .par_iter()
        .map(|r| normalize_for_dedup(&r.text))
        .collect();

    let mut by_text: HashMap<&str, Vec<(i64, usize)>> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        if alive[i] {
            by_text
                .entry(normalized[i].as_str())
                .or_default()
                .push((r.created_at.timestamp(), i));
        }
    }
    let mut dups = Vec::new();
    for group in by_text.values_mut() {
        if group.len() < 2 {
            continue;
        }
        group.sort_unstable();
        for pair in group.windows(2) {
            if pair[1].0 - pair[0].0 <= policy.duplicate_window_secs {
                dups.push(pair[1].1);
            }
        }
    }
    dups.sort_unstable();
    for &i in &dups {
        alive[i] = false;
    }
    out.duplicate = dups;

    for (i, text) in normalized.iter().enumerate() {
        if !alive[i] {
            continue;
        }
        let distinct: HashSet<&str> = text.split_whitespace().collect();
        if distinct.len() < policy.min_distinct_tokens {
            out.low_token.push(i);
        }
    }
    out
}

fn max_posts_per_minute(times: &[i64]) -> usize {
    let mut t = times.to_vec();
    t.sort_unstable();
    let mut best = 0;
    let mut lo = 0;
    for hi in 0..t.len() {
        while t[hi] - t[lo] >= 60 {
            lo += 1;
        }
        best = best.max(hi - lo + 1);
    }
    best
}

/// Load a corpus from CSV or JSONL. Malformed rows are skipped and counted
/// by reason; duplicate ids keep the first occurrence.
pub fn load_corpus(path: &Path, format: InputFormat) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let source = path.display().to_string();
    read_corpus(BufReader::new(file), format, &source)
}

pub fn read_corpus<R: Read>(reader: R, format: InputFormat, source: &str) -> Result<Corpus> {
    let mut provenance = Provenance {
        source: source.to_string(),
        ..Provenance::default()
    };
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut accept = |row: std::result::Result<RawRow, &'static str>,
                      provenance: &mut Provenance| {
        provenance.parsed += 1;
        match row.and_then(RawRow::into_record) {
            Ok(rec) => {
                if seen.insert(rec.id.clone()) {
                    records.push(rec);
                } else {
                    provenance.skip("duplicate_id");
                }
            }
            Err(reason) => provenance.skip(reason),
        }
    };

    match format {
        InputFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new()
                .flexible(true)
                .has_headers(true)
                .from_reader(reader);
            let headers = rdr.headers()?.clone();
            let index: HashMap<&str, usize> = headers
                .iter()
                .enumerate()
                .map(|(i, h)| (h.trim(), i))
                .collect();
            let missing: Vec<&str> = REQUIRED_COLUMNS
                .iter()
                .copied()
                .filter(|c| !index.contains_key(c))
                .collect();
            if !missing.is_empty() {
                return Err(Error::Schema(format!(
                    "missing required column(s): {}",
                    missing.join(", ")
                )));
            }
            let col = |name: &str| index.get(name).copied();
            let cols: Vec<Option<usize>> = COLUMNS.iter().map(|c| col(c)).collect();
            for row in rdr.records() {
                let parsed = match row {
                    Ok(row) if row.len() != headers.len() => Err("field_count"),
                    Ok(row) => Ok(RawRow::from_csv(&row, &cols)),
                    Err(_) => Err("malformed_csv"),
                };
                accept(parsed, &mut provenance);
            }
        }
        InputFormat::Jsonl => {
            for line in BufReader::new(reader).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let parsed = match serde_json::from_str::<Value>(&line) {
                    Ok(Value::Object(map)) => RawRow::from_json(&map),
                    _ => Err("malformed_json"),
                };
                accept(parsed, &mut provenance);
            }
        }
    }

    if records.is_empty() {
        return Err(Error::EmptyCorpus(format!("no rows parsed from {source}")));
    }
    Ok(Corpus {
        records,
        provenance,
    })
}

#[derive(Debug, Default)]
struct RawRow {
    status_id: String,
    created_at: String,
    text: String,
    source: String,
    location: String,
    country_code: String,
    hashtags: Vec<String>,
    mentions: Vec<String>,
    user_id: String,
    is_retweet: String,
}

fn split_list(s: &str) -> Vec<String> {
    s.split('|')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect()
}

fn non_empty(s: String) -> Option<String> {
    let t = s.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("na") {
        None
    } else {
        Some(t.to_string())
    }
}

impl RawRow {
    fn from_csv(row: &csv::StringRecord, cols: &[Option<usize>]) -> RawRow {
        let get = |k: usize| {
            cols[k]
                .and_then(|i| row.get(i))
                .unwrap_or_default()
                .to_string()
        };
        RawRow {
            status_id: get(0),
            created_at: get(1),
            text: get(2),
            source: get(3),
            location: get(4),
            country_code: get(5),
            hashtags: split_list(&get(6)),
            mentions: split_list(&get(7)),
            user_id: get(8),
            is_retweet: get(9),
        }
    }

    fn from_json(
        map: &serde_json::Map<String, Value>,
    ) -> std::result::Result<RawRow, &'static str> {
        fn scalar(v: Option<&Value>) -> std::result::Result<String, &'static str> {
            match v {
                None | Some(Value::Null) => Ok(String::new()),
                Some(Value::String(s)) => Ok(s.clone()),
                Some(Value::Number(n)) => Ok(n.to_string()),
                Some(Value::Bool(b)) => Ok(b.to_string()),
                Some(_) => Err("bad_field_type"),
            }
        }
        fn list(v: Option<&Value>) -> std::result::Result<Vec<String>, &'static str> {
            match v {
                None | Some(Value::Null) => Ok(Vec::new()),
                Some(Value::String(s)) => Ok(split_list(s)),
                Some(Value::Array(items)) => items
                    .iter()
                    .map(|i| i.as_str().map(String::from).ok_or("bad_field_type"))
                    .collect(),
                Some(_) => Err("bad_field_type"),
            }
        }
        Ok(RawRow {
            status_id: scalar(map.get("status_id"))?,
            created_at: scalar(map.get("created_at"))?,
            text: scalar(map.get("text"))?,
            source: scalar(map.get("source"))?,
            location: scalar(map.get("location"))?,
            country_code: scalar(map.get("country_code"))?,
            hashtags: list(map.get("hashtags"))?,
            mentions: list(map.get("mentions"))?,
            user_id: scalar(map.get("user_id"))?,
            is_retweet: scalar(map.get("is_retweet"))?,
        })
    }

    fn into_record(self) -> std::result::Result<TweetRecord, &'static str> {
        let id = self.status_id.trim().to_string();
        if id.is_empty() {
            return Err("missing_id");
        }
        if self.text.trim().is_empty() {
            return Err("missing_text");
        }
        let user_id = self.user_id.trim().to_string();
        if user_id.is_empty() {
            return Err("missing_user_id");
        }
        let created_at = DateTime::parse_from_rfc3339(self.created_at.trim())
            .map_err(|_| "bad_timestamp")?
            .with_timezone(&Utc);
        let is_retweet = match self.is_retweet.trim().to_ascii_lowercase().as_str() {
            "" | "false" | "0" | "na" => false,
            "true" | "1" => true,
            _ => return Err("bad_is_retweet"),
        };
        Ok(TweetRecord {
            id,
            created_at,
            text: self.text,
            source_device: self.source.trim().to_string(),
            user_location: non_empty(self.location),
            country_code: non_empty(self.country_code),
            hashtags: self.hashtags,
            mentions: self.mentions,
            user_id,
            is_retweet,
        })
    }
}

pub fn write_records_csv<W: Write>(records: &[TweetRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(COLUMNS)?;
    for r in records {
        wtr.write_record([
            r.id.as_str(),
            &r.created_at.to_rfc3339_opts(SecondsFormat::Secs, true),
            &r.text,
            &r.source_device,
            r.user_location.as_deref().unwrap_or(""),
            r.country_code.as_deref().unwrap_or(""),
            &r.hashtags.join("|"),
            &r.mentions.join("|"),
            &r.user_id,
            if r.is_retweet { "true" } else { "false" },
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
