//! End-to-end runs: configuration, the staged pipeline, report files and
//! the run manifest.
//!
//! All report bytes are produced in memory first. They are then written to
//! a staging directory inside the output directory and renamed into place,
//! so a failed run never leaves partial reports behind.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{
    daily_emotion_series, default_keyword_categories, device_group_report, polarity_distribution,
    rank_hashtags, rank_locations, rank_mentions, DailySeries, DeviceGroupReport, LocationField,
    PolarityDistribution, RankedTable,
};
use crate::corpus::{read_corpus, BotPolicy, Corpus, InputFormat, Provenance};
use crate::data;
use crate::emotion::{
    aggregate_profiles, classify, dominant_classes, Category, EmotionLexicon, EmotionProfile,
};
use crate::error::{Error, Result};
use crate::export::{
    json_bytes, sha256_hex, write_emotions_csv, write_polarity_csv, write_word_cloud_csv,
};
use crate::ngram::{build_table, NgramTable, MAX_N, MIN_N};
use crate::polarity::{extremes, score_text, PolarityLexicon, PolarityScore, ScoringParams};
use crate::scenario::{derive_trend, Direction};
use crate::textprep::{
    mask_abusive, parse_word_list, prepare, remove_stopwords, CleanOptions, MaskLedger, TokenStream,
};

pub const STAGE_CONFIG: &str = "config";
pub const STAGE_LEXICONS: &str = "lexicons";
pub const STAGE_LOAD: &str = "load";
pub const STAGE_FILTER: &str = "filter";
pub const STAGE_NGRAMS: &str = "ngrams";
pub const STAGE_EMOTION: &str = "emotion";
pub const STAGE_POLARITY: &str = "polarity";
pub const STAGE_ANALYTICS: &str = "analytics";
pub const STAGE_SUMMARY: &str = "summary";
pub const STAGE_WRITE: &str = "write";

pub const MANIFEST_FILE: &str = "manifest.json";

/// Flat run configuration. Every key is optional in a config file; missing
/// keys take the defaults below. Relative paths in a file are resolved
/// against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: PathBuf,
    /// Guessed from the input extension when unset.
    pub format: Option<InputFormat>,
    #[serde(deserialize_with = "de_date")]
    pub start_date: NaiveDate,
    #[serde(deserialize_with = "de_date")]
    pub end_date: NaiveDate,
    pub keyword: String,
    pub country: String,
    /// Lexicon paths; unset means the bundled file.
    pub stopwords: Option<PathBuf>,
    pub abusive: Option<PathBuf>,
    pub emotion_lexicon: Option<PathBuf>,
    pub polarity_lexicon: Option<PathBuf>,
    pub shifters: Option<PathBuf>,
    pub window_before: usize,
    pub window_after: usize,
    pub amplifier_weight: f64,
    pub adversative_weight: f64,
    pub duplicate_window_secs: i64,
    pub burst_per_minute: usize,
    pub min_distinct_tokens: usize,
    pub output_dir: PathBuf,
    /// Only used by synthetic-corpus generation.
    pub seed: u64,
    /// Rows kept in ranked tables.
    pub top_k: usize,
    /// Terms kept in the word-cloud export.
    pub cloud_k: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let scoring = ScoringParams::default();
        let bots = BotPolicy::default();
        RunConfig {
            input: PathBuf::new(),
            format: None,
            start_date: NaiveDate::from_ymd_opt(2020, 4, 30).expect("valid date"),
            end_date: NaiveDate::from_ymd_opt(2020, 5, 8).expect("valid date"),
            keyword: "reopen".into(),
            country: "US".into(),
            stopwords: None,
            abusive: None,
            emotion_lexicon: None,
            polarity_lexicon: None,
            shifters: None,
            window_before: scoring.window_before,
            window_after: scoring.window_after,
            amplifier_weight: scoring.amplifier_weight,
            adversative_weight: scoring.adversative_weight,
            duplicate_window_secs: bots.duplicate_window_secs,
            burst_per_minute: bots.burst_per_minute,
            min_distinct_tokens: bots.min_distinct_tokens,
            output_dir: PathBuf::from("out"),
            seed: 42,
            top_k: 25,
            cloud_k: 100,
        }
    }
}

/// Accept both bare TOML dates and quoted `YYYY-MM-DD` strings.
fn de_date<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<NaiveDate, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Toml(toml::value::Datetime),
    }
    let text = match Raw::deserialize(d)? {
        Raw::Text(s) => s,
        Raw::Toml(dt) => dt.to_string(),
    };
    text.parse().map_err(serde::de::Error::custom)
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => {
                Error::Config(format!("config file {} not found", path.display()))
            }
            _ => Error::Io(e),
        })?;
        let mut cfg = RunConfig::from_toml_str(&text)?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if !p.as_os_str().is_empty() && p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.input);
        fix(&mut self.output_dir);
        for p in [
            &mut self.stopwords,
            &mut self.abusive,
            &mut self.emotion_lexicon,
            &mut self.polarity_lexicon,
            &mut self.shifters,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn scoring(&self) -> ScoringParams {
        ScoringParams {
            window_before: self.window_before,
            window_after: self.window_after,
            amplifier_weight: self.amplifier_weight,
            adversative_weight: self.adversative_weight,
        }
    }

    pub fn bot_policy(&self) -> BotPolicy {
        BotPolicy {
            duplicate_window_secs: self.duplicate_window_secs,
            burst_per_minute: self.burst_per_minute,
            min_distinct_tokens: self.min_distinct_tokens,
        }
    }

    pub fn input_format(&self) -> Result<InputFormat> {
        match self.format {
            Some(f) => Ok(f),
            None => InputFormat::from_path(&self.input).ok_or_else(|| {
                Error::Config(format!(
                    "cannot infer input format from {}; set `format`",
                    self.input.display()
                ))
            }),
        }
    }

    /// Referenced files must exist and parameters must be in range.
    pub fn validate(&self) -> Result<()> {
        if self.input.as_os_str().is_empty() {
            return Err(Error::Config("`input` is required".into()));
        }
        let lexicons = [
            &self.stopwords,
            &self.abusive,
            &self.emotion_lexicon,
            &self.polarity_lexicon,
            &self.shifters,
        ];
        for p in std::iter::once(&self.input).chain(lexicons.into_iter().flatten()) {
            if !p.is_file() {
                return Err(Error::Config(format!(
                    "file {} does not exist",
                    p.display()
                )));
            }
        }
        self.input_format()?;
        if self.start_date > self.end_date {
            return Err(Error::InvalidRange {
                start: self.start_date,
                end: self.end_date,
            });
        }
        if self.keyword.trim().is_empty() {
            return Err(Error::Config("keyword must be non-empty".into()));
        }
        if self.country.len() != 2 || !self.country.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(Error::Config(format!(
                "country `{}` is not a two-letter code",
                self.country
            )));
        }
        if self.duplicate_window_secs < 0 {
            return Err(Error::Config(
                "duplicate_window_secs must be non-negative".into(),
            ));
        }
        if self.burst_per_minute == 0 {
            return Err(Error::Config("burst_per_minute must be at least 1".into()));
        }
        if self.top_k == 0 || self.cloud_k == 0 {
            return Err(Error::Config("top_k and cloud_k must be at least 1".into()));
        }
        self.scoring().validate()
    }
}

/// Name and content hash of an input file. Names are basenames so the
/// manifest does not depend on where the run happened.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub input: FileDigest,
    pub format: InputFormat,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub keyword: String,
    pub country: String,
    pub stopwords: FileDigest,
    pub abusive: FileDigest,
    pub emotion_lexicon: FileDigest,
    pub polarity_lexicon: FileDigest,
    pub shifters: FileDigest,
    pub scoring: ScoringParams,
    pub bot_policy: BotPolicy,
    pub top_k: usize,
    pub cloud_k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ConfigEcho,
    pub provenance: Provenance,
    pub final_records: usize,
    /// Distinct words replaced by mask tokens.
    pub masked_terms: usize,
    /// Report file name to sha256 of its bytes.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        json_bytes(self)
    }

    /// sha256 of the serialized manifest, as written to disk.
    pub fn hash(&self) -> Result<String> {
        Ok(sha256_hex(&self.to_bytes()?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeRecord {
    pub id: String,
    pub value: f64,
}

/// Corpus-level aggregates; the input expected by the scenario command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub records: usize,
    pub distribution: PolarityDistribution,
    pub emotion_totals: EmotionProfile,
    pub dominant_emotions: Vec<Category>,
    pub most_negative: ExtremeRecord,
    pub most_positive: ExtremeRecord,
    /// `positive`, `negative` or `tied`.
    pub trend: String,
}

/// Everything computed by a run, before it is written anywhere.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub corpus: Corpus,
    pub streams: Vec<TokenStream>,
    pub content_streams: Vec<TokenStream>,
    pub profiles: Vec<EmotionProfile>,
    pub scores: Vec<PolarityScore>,
    /// N-gram tables for n = 1..=4, in order.
    pub tables: Vec<NgramTable>,
    pub mentions: RankedTable,
    pub hashtags: RankedTable,
    pub locations_tagged: RankedTable,
    pub locations_stated: RankedTable,
    pub devices: DeviceGroupReport,
    pub daily: DailySeries,
    pub summary: RunSummary,
    pub files: BTreeMap<String, Vec<u8>>,
    pub manifest: RunManifest,
}

struct Lexicons {
    stopwords: crate::textprep::WordSet,
    abusive: crate::textprep::WordSet,
    emotion: EmotionLexicon,
    polarity: PolarityLexicon,
    digests: [FileDigest; 5],
}

fn basename(p: &Path) -> String {
    p.file_name().map_or_else(
        || p.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

/// File contents plus digest, or the bundled text when no path is set.
fn source_text(
    path: Option<&Path>,
    bundled_name: &str,
    bundled: &str,
) -> Result<(String, FileDigest)> {
    match path {
        Some(p) => {
            let text = read_text(p)?;
            let digest = FileDigest {
                name: basename(p),
                sha256: sha256_hex(text.as_bytes()),
            };
            Ok((text, digest))
        }
        None => Ok((
            bundled.to_string(),
            FileDigest {
                name: format!("bundled:{bundled_name}"),
                sha256: sha256_hex(bundled.as_bytes()),
            },
        )),
    }
}

fn load_lexicons(cfg: &RunConfig) -> Result<Lexicons> {
    let (stop, stop_d) = source_text(
        cfg.stopwords.as_deref(),
        "stopwords_en.txt",
        data::STOPWORDS_EN,
    )?;
    let (abusive, abusive_d) = source_text(
        cfg.abusive.as_deref(),
        "abusive.txt",
        data::ABUSIVE_PLACEHOLDER,
    )?;
    let (emo, emo_d) = source_text(
        cfg.emotion_lexicon.as_deref(),
        "emotion_lexicon.tsv",
        data::EMOTION_LEXICON,
    )?;
    let (pol, pol_d) = source_text(
        cfg.polarity_lexicon.as_deref(),
        "polarity_lexicon.csv",
        data::POLARITY_LEXICON,
    )?;
    let (shift, shift_d) = source_text(
        cfg.shifters.as_deref(),
        "valence_shifters.csv",
        data::VALENCE_SHIFTERS,
    )?;
    let abusive = parse_word_list(&abusive)
        .into_iter()
        .map(|w| w.to_lowercase())
        .collect();
    Ok(Lexicons {
        stopwords: parse_word_list(&stop),
        abusive,
        emotion: EmotionLexicon::parse_tsv(&emo, &emo_d.name)?,
        polarity: PolarityLexicon::parse_csv(&pol, &shift, &pol_d.name)?,
        digests: [stop_d, abusive_d, emo_d, pol_d, shift_d],
    })
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Read and parse the configured input. Errors carry the `load` stage.
pub fn load_input(cfg: &RunConfig) -> Result<(Corpus, FileDigest)> {
    let format = cfg.input_format().map_err(|e| e.at_stage(STAGE_CONFIG))?;
    let name = basename(&cfg.input);
    (|| {
        let bytes = fs::read(&cfg.input).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::FileNotFound(cfg.input.clone()),
            _ => Error::Io(e),
        })?;
        let digest = FileDigest {
            sha256: sha256_hex(&bytes),
            name: name.clone(),
        };
        Ok((read_corpus(bytes.as_slice(), format, &name)?, digest))
    })()
    .map_err(|e: Error| e.at_stage(STAGE_LOAD))
}

/// Date, keyword, country and bot filters in that order. An empty result
/// is an error carrying the `filter` stage.
pub fn apply_filters(corpus: Corpus, cfg: &RunConfig) -> Result<Corpus> {
    (|| {
        let source = corpus.provenance.source.clone();
        let c = corpus
            .filter_date_range(cfg.start_date, cfg.end_date)?
            .filter_keyword(&cfg.keyword)?
            .filter_country(&cfg.country)?
            .filter_bots_and_duplicates(&cfg.bot_policy());
        if c.is_empty() {
            return Err(Error::EmptyCorpus(format!(
                "no records of {source} survived filtering"
            )));
        }
        Ok(c)
    })()
    .map_err(|e| e.at_stage(STAGE_FILTER))
}

/// Run every stage and build all report bytes without touching the disk.
pub fn compute_run(cfg: &RunConfig) -> Result<RunArtifacts> {
    cfg.validate().map_err(|e| e.at_stage(STAGE_CONFIG))?;
    let format = cfg.input_format().map_err(|e| e.at_stage(STAGE_CONFIG))?;
    let lex = load_lexicons(cfg).map_err(|e| e.at_stage(STAGE_LEXICONS))?;

    let (corpus, input_digest) = load_input(cfg)?;
    let corpus = apply_filters(corpus, cfg)?;
    debug_assert!(corpus.reconciles());

    // Mask numbering follows record order, so this stays sequential.
    let mut ledger = MaskLedger::new();
    let masked: Vec<String> = corpus
        .records
        .iter()
        .map(|r| mask_abusive(&r.text, &lex.abusive, &mut ledger))
        .collect();
    let corpus = corpus.map_text(masked);

    let opts = CleanOptions::default();
    let streams: Vec<TokenStream> = corpus
        .records
        .par_iter()
        .map(|r| prepare(&r.text, &opts))
        .collect();
    let content_streams: Vec<TokenStream> = streams
        .par_iter()
        .map(|s| remove_stopwords(s, &lex.stopwords))
        .collect();

    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();

    let tables = (MIN_N..=MAX_N)
        .map(|n| {
            // Short grams drop stopwords; longer phrases keep them.
            let src = if n <= 2 { &content_streams } else { &streams };
            build_table(src, n)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage(STAGE_NGRAMS))?;
    for t in &tables {
        files.insert(
            format!("ngrams_{}.csv", t.n),
            csv_bytes(|b| t.write_csv(cfg.top_k, b)).map_err(|e| e.at_stage(STAGE_NGRAMS))?,
        );
    }
    let cloud = tables[0]
        .word_cloud_weights(cfg.cloud_k)
        .map_err(|e| e.at_stage(STAGE_NGRAMS))?;
    files.insert(
        "wordcloud.csv".into(),
        csv_bytes(|b| write_word_cloud_csv(&cloud, b)).map_err(|e| e.at_stage(STAGE_NGRAMS))?,
    );

    let profiles: Vec<EmotionProfile> = content_streams
        .par_iter()
        .map(|s| classify(s, &lex.emotion))
        .collect();
    let emotion_totals = aggregate_profiles(&profiles);
    (|| {
        files.insert(
            "emotions.csv".into(),
            csv_bytes(|b| write_emotions_csv(&corpus.records, &profiles, b))?,
        );
        files.insert("emotion_totals.json".into(), json_bytes(&emotion_totals)?);
        Ok::<_, Error>(())
    })()
    .map_err(|e| e.at_stage(STAGE_EMOTION))?;

    let scoring = cfg.scoring();
    let scores: Vec<PolarityScore> = streams
        .par_iter()
        .map(|s| score_text(s, &lex.polarity, &scoring))
        .collect();
    files.insert(
        "polarity.csv".into(),
        csv_bytes(|b| write_polarity_csv(&corpus.records, &scores, b))
            .map_err(|e| e.at_stage(STAGE_POLARITY))?,
    );

    let k = cfg.top_k;
    let mentions = rank_mentions(&corpus, k);
    let hashtags = rank_hashtags(&corpus, k);
    let locations_tagged = rank_locations(&corpus, k, LocationField::Tagged);
    let locations_stated = rank_locations(&corpus, k, LocationField::Stated);
    let (devices, daily, distribution) = (|| {
        files.insert("mentions.csv".into(), csv_bytes(|b| mentions.write_csv(b))?);
        files.insert("hashtags.csv".into(), csv_bytes(|b| hashtags.write_csv(b))?);
        files.insert(
            "locations_tagged.csv".into(),
            csv_bytes(|b| locations_tagged.write_csv(b))?,
        );
        files.insert(
            "locations_stated.csv".into(),
            csv_bytes(|b| locations_stated.write_csv(b))?,
        );
        let devices = device_group_report(&corpus, &default_keyword_categories())?;
        files.insert("devices.csv".into(), csv_bytes(|b| devices.write_csv(b))?);
        let daily = daily_emotion_series(&corpus, &profiles)?;
        files.insert(
            "daily_emotions.csv".into(),
            csv_bytes(|b| daily.write_csv(b))?,
        );
        let dist = polarity_distribution(&scores)?;
        files.insert("distribution.json".into(), json_bytes(&dist)?);
        files.insert(
            "histogram.csv".into(),
            csv_bytes(|b| dist.histogram.write_csv(b))?,
        );
        Ok::<_, Error>((devices, daily, dist))
    })()
    .map_err(|e| e.at_stage(STAGE_ANALYTICS))?;

    let summary = (|| {
        let ex = extremes(&scores)?;
        let trend = match derive_trend(&distribution.shares, &emotion_totals) {
            Ok(t) => match t.direction {
                Direction::Positive => "positive",
                Direction::Negative => "negative",
            },
            Err(Error::TiedTrend(_)) => "tied",
            Err(e) => return Err(e),
        };
        let summary = RunSummary {
            records: corpus.len(),
            distribution: distribution.clone(),
            emotion_totals,
            dominant_emotions: dominant_classes(&emotion_totals, 2)
                .into_iter()
                .map(|(c, _)| c)
                .collect(),
            most_negative: ExtremeRecord {
                id: corpus.records[ex.min_index].id.clone(),
                value: ex.min_value,
            },
            most_positive: ExtremeRecord {
                id: corpus.records[ex.max_index].id.clone(),
                value: ex.max_value,
            },
            trend: trend.to_string(),
        };
        files.insert("summary.json".into(), json_bytes(&summary)?);
        files.insert("provenance.json".into(), json_bytes(&corpus.provenance)?);
        files.insert(
            "corpus_filtered.csv".into(),
            csv_bytes(|b| corpus.write_csv(b))?,
        );
        Ok::<_, Error>(summary)
    })()
    .map_err(|e| e.at_stage(STAGE_SUMMARY))?;

    let [stop_d, abusive_d, emo_d, pol_d, shift_d] = lex.digests;
    let manifest = RunManifest {
        config: ConfigEcho {
            input: input_digest,
            format,
            start_date: cfg.start_date,
            end_date: cfg.end_date,
            keyword: cfg.keyword.clone(),
            country: cfg.country.clone(),
            stopwords: stop_d,
            abusive: abusive_d,
            emotion_lexicon: emo_d,
            polarity_lexicon: pol_d,
            shifters: shift_d,
            scoring,
            bot_policy: cfg.bot_policy(),
            top_k: cfg.top_k,
            cloud_k: cfg.cloud_k,
        },
        provenance: corpus.provenance.clone(),
        final_records: corpus.len(),
        masked_terms: ledger.len(),
        outputs: files
            .iter()
            .map(|(k, v)| (k.clone(), sha256_hex(v)))
            .collect(),
    };
    files.insert(
        MANIFEST_FILE.into(),
        manifest.to_bytes().map_err(|e| e.at_stage(STAGE_SUMMARY))?,
    );

    Ok(RunArtifacts {
        corpus,
        streams,
        content_streams,
        profiles,
        scores,
        tables,
        mentions,
        hashtags,
        locations_tagged,
        locations_stated,
        devices,
        daily,
        summary,
        files,
        manifest,
    })
}

/// Write `files` into `dir` through a staging directory. On failure the
/// staging directory is removed, and so is `dir` if this call created it.
pub fn write_outputs(dir: &Path, files: &BTreeMap<String, Vec<u8>>) -> Result<()> {
    let created = !dir.exists();
    let result = (|| {
        fs::create_dir_all(dir)?;
        let staging = tempfile::Builder::new()
            .prefix(".staging-")
            .tempdir_in(dir)?;
        for (name, bytes) in files {
            fs::write(staging.path().join(name), bytes)?;
        }
        for name in files.keys() {
            fs::rename(staging.path().join(name), dir.join(name))?;
        }
        Ok(())
    })();
    if result.is_err() && created {
        let _ = fs::remove_dir_all(dir);
    }
    result
}

/// Run the pipeline and write every report plus `manifest.json` into
/// `cfg.output_dir`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunManifest> {
    let artifacts = compute_run(cfg)?;
    write_outputs(&cfg.output_dir, &artifacts.files).map_err(|e| e.at_stage(STAGE_WRITE))?;
    Ok(artifacts.manifest)
}
