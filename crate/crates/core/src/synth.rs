//! Deterministic synthetic corpus with planted ground truth.
//!
//! Every record gets a role. Roles other than [`Role::Normal`] are designed
//! to be removed by exactly one stage of the default filter chain (date
//! range 2020-04-30..=2020-05-08, keyword `reopen`, country `US`, default
//! [`BotPolicy`](crate::corpus::BotPolicy)), and the [`PlantingLedger`]
//! lists the ids per role so tests can compare removals by set equality.
//!
//! Planting rates for `n` records (integer division):
//! duplicates `5n/100`, burst bots `n/500` users x 20 posts, low-token
//! `2n/100`, off-date `3n/100`, off-keyword `3n/100`, off-country `4n/100`.
//! Devices: 66.6 % iPhone, 23.4 % Android, 10 % web client, so the two
//! phone classes split 74/26.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::{ANDROID, IPHONE};
use crate::corpus::{normalize_for_dedup, write_records_csv, Corpus, TweetRecord};
use crate::error::{Error, Result};

pub const WEB_CLIENT: &str = "Twitter Web App";

/// Mild stand-ins used as the abusive-word test lexicon.
pub const PLANTED_ABUSIVE: [&str; 50] = [
    "idiot",
    "moron",
    "dimwit",
    "nitwit",
    "halfwit",
    "dunce",
    "buffoon",
    "clown",
    "jerk",
    "loser",
    "numbskull",
    "bonehead",
    "blockhead",
    "knucklehead",
    "airhead",
    "dingbat",
    "doofus",
    "dolt",
    "imbecile",
    "ignoramus",
    "nincompoop",
    "simpleton",
    "twit",
    "twerp",
    "scumbag",
    "sleazeball",
    "creep",
    "lowlife",
    "weasel",
    "rat",
    "snake",
    "pig",
    "slob",
    "freak",
    "crook",
    "dirtbag",
    "jackass",
    "bozo",
    "chump",
    "sucker",
    "cretin",
    "goon",
    "punk",
    "hack",
    "windbag",
    "blowhard",
    "gasbag",
    "dummy",
    "dork",
    "nerd",
];

const OPENERS: &[&str] = &[
    "Time to reopen",
    "It is time to reopen now",
    "We need to reopen the economy",
    "Reopen America",
    "Reopen the country",
    "States reopen soon",
    "People want to reopen the country",
    "I want to reopen",
    "When do the bars reopen",
    "Reopening plan from the governor",
    "Ready to reopen our country",
    "Reopen everything now",
    "NO state is ready to reopen",
    "Reopening businesses",
    "Do not reopen yet",
    "Governors reopen states",
];

const TOPICS: &[&str] = &[
    "economy",
    "business",
    "businesses",
    "work",
    "jobs",
    "governor",
    "states",
    "country",
    "covid",
    "coronavirus",
    "Trump",
    "politics",
    "plan",
    "time",
    "back",
    "home",
    "order",
    "health",
    "people",
    "America",
    "workers",
    "stores",
    "salons",
    "bars",
    "restaurants",
    "schools",
    "rights",
    "constitution",
    "testing",
    "vaccine",
    "unemployment",
    "paycheck",
    "money",
    "taxes",
    "democrats",
    "republicans",
    "beaches",
    "parks",
    "churches",
    "summer",
    "week",
    "today",
    "families",
    "kids",
    "nurses",
    "doctors",
    "hospitals",
    "cases",
    "numbers",
    "data",
];

const SENTIMENT: &[&str] = &[
    "good",
    "great",
    "safe",
    "hope",
    "hopeful",
    "ready",
    "freedom",
    "love",
    "support",
    "happy",
    "proud",
    "confident",
    "opportunity",
    "recovery",
    "thank",
    "excited",
    "beautiful",
    "trust",
    "better",
    "strong",
    "glad",
    "win",
    "best",
    "smart",
    "help",
    "success",
    "wonderful",
    "healthy",
    "improve",
    "protect",
    "relief",
    "grateful",
    "bad",
    "terrible",
    "fear",
    "afraid",
    "die",
    "death",
    "risk",
    "dangerous",
    "crisis",
    "sad",
    "angry",
    "stupid",
    "worse",
    "panic",
    "despair",
    "disaster",
    "struggle",
    "broke",
    "unfair",
    "worried",
    "chaos",
    "hate",
    "anxiety",
    "uncertain",
    "lose",
    "hurt",
];

const EMOTIVE: &[&str] = &[
    "faith",
    "peace",
    "calm",
    "patience",
    "celebrate",
    "cure",
    "respect",
    "safety",
    "liberty",
    "victory",
    "tyranny",
    "violence",
    "threat",
    "poverty",
    "tragedy",
    "illness",
    "pandemic",
    "lockdown",
    "shutdown",
    "virus",
    "curfew",
    "protest",
    "deal",
    "future",
    "wait",
    "want",
];

const SHIFTERS: &[&str] = &[
    "not", "never", "really", "very", "so", "totally", "barely", "hardly", "but", "however",
    "don't", "can't", "won't",
];

const FUNCTION_WORDS: &[&str] = &[
    "the", "a", "to", "and", "we", "is", "are", "it", "for", "of", "this", "that", "our", "my",
    "they", "be", "will", "can", "with", "just", "all", "in", "on", "at", "you", "i", "have",
    "get", "now", "more", "must", "need", "let",
];

const PHRASES: &[&str] = &[
    "open economy",
    "social distancing",
    "get back to work",
    "stay home order",
    "can't happen forever",
    "can’t happen forever",
    "constitutional rights must stop",
    "open up",
    "flatten the curve",
    "time reopen",
    "want reopen",
];

const MENTIONS: &[(&str, u32)] = &[
    ("realDonaldTrump", 30),
    ("GovMikeDeWine", 10),
    ("NYGovCuomo", 12),
    ("GavinNewsom", 9),
    ("CNN", 8),
    ("FoxNews", 8),
    ("GovWhitmer", 7),
    ("JoeBiden", 6),
    ("POTUS", 5),
];

const HASHTAGS: &[(&str, u32, bool)] = &[
    ("COVID19", 30, false),
    ("reopen", 20, true),
    ("ReopenAmerica", 15, true),
    ("coronavirus", 12, false),
    ("StayHome", 8, false),
    ("lockdown", 8, false),
    ("MAGA", 6, false),
    ("economy", 5, false),
];

const US_LOCATIONS: &[(&str, u32)] = &[
    ("Los Angeles, CA", 20),
    ("Brooklyn, NY", 14),
    ("United States", 13),
    ("Chicago, IL", 11),
    ("New York, NY", 10),
    ("Florida, USA", 9),
    ("Pennsylvania, USA", 8),
    ("Manhattan, NY", 7),
    ("Las Vegas, NV", 7),
    ("North Carolina, USA", 6),
    ("Houston, TX", 6),
    ("Orlando, FL", 5),
    ("San Francisco, CA", 5),
    ("Dallas, TX", 5),
];

const EMOJI: &[&str] = &["😷", "🇺🇸", "🙏", "😡", "💯"];

/// Why a record was planted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Normal,
    OffDate,
    OffKeyword,
    OffCountry,
    Duplicate,
    Burst,
    LowToken,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantingLedger {
    pub seed: u64,
    pub n: usize,
    pub off_date: Vec<String>,
    pub off_keyword: Vec<String>,
    pub off_country: Vec<String>,
    pub duplicates: Vec<String>,
    pub burst: Vec<String>,
    pub low_token: Vec<String>,
    /// Ids of records that should survive the whole chain.
    pub survivors: Vec<String>,
    /// Device label to survivor count.
    pub survivor_devices: BTreeMap<String, usize>,
    /// Survivor ids whose text carries a planted abusive word.
    pub abusive: Vec<String>,
}

impl PlantingLedger {
    pub fn ids(&self, role: Role) -> &[String] {
        match role {
            Role::Normal => &self.survivors,
            Role::OffDate => &self.off_date,
            Role::OffKeyword => &self.off_keyword,
            Role::OffCountry => &self.off_country,
            Role::Duplicate => &self.duplicates,
            Role::Burst => &self.burst,
            Role::LowToken => &self.low_token,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub records: Vec<TweetRecord>,
    pub roles: Vec<Role>,
    pub ledger: PlantingLedger,
}

impl SyntheticCorpus {
    pub fn corpus(&self) -> Corpus {
        Corpus::from_records(
            self.records.clone(),
            format!("synthetic(seed={})", self.ledger.seed),
        )
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_records_csv(&self.records, w)
    }
}

struct Draft {
    created_at: DateTime<Utc>,
    text: String,
    device: &'static str,
    location: Option<String>,
    country: Option<String>,
    user_id: String,
    is_retweet: bool,
    role: Role,
    abusive: bool,
}

struct Generator {
    rng: ChaCha8Rng,
    seen: HashSet<String>,
    mentions: WeightedIndex<u32>,
    hashtags: WeightedIndex<u32>,
    locations: WeightedIndex<u32>,
    n_users: usize,
}

fn window_start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 4, 30, 0, 0, 0).unwrap()
}

/// Seconds from the window start covered by in-range timestamps. Ends at
/// 22:00 on May 8 so planted duplicates (at most 3000 s later) stay in range.
const IN_RANGE_SECS: i64 = 8 * 86_400 + 22 * 3_600;

impl Generator {
    fn new(seed: u64, n: usize) -> Generator {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seen: HashSet::new(),
            mentions: WeightedIndex::new(MENTIONS.iter().map(|m| m.1)).expect("weights"),
            hashtags: WeightedIndex::new(HASHTAGS.iter().map(|h| h.1)).expect("weights"),
            locations: WeightedIndex::new(US_LOCATIONS.iter().map(|l| l.1)).expect("weights"),
            n_users: (n / 2).max(1),
        }
    }

    fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        *items.choose(&mut self.rng).expect("non-empty pool")
    }

    fn in_range_time(&mut self) -> DateTime<Utc> {
        window_start() + Duration::seconds(self.rng.gen_range(0..IN_RANGE_SECS))
    }

    fn off_range_time(&mut self) -> DateTime<Utc> {
        let secs = self.rng.gen_range(0..4 * 86_400);
        if self.rng.gen_bool(0.5) {
            window_start() - Duration::seconds(secs + 1)
        } else {
            Utc.with_ymd_and_hms(2020, 5, 9, 0, 0, 0).unwrap() + Duration::seconds(secs)
        }
    }

    fn device(&mut self) -> &'static str {
        let r: f64 = self.rng.gen();
        if r < 0.666 {
            IPHONE
        } else if r < 0.9 {
            ANDROID
        } else {
            WEB_CLIENT
        }
    }

    fn user(&mut self) -> String {
        format!("u{}", self.rng.gen_range(0..self.n_users))
    }

    fn us_location(&mut self) -> Option<String> {
        if self.rng.gen_bool(0.3) {
            None
        } else {
            Some(
                US_LOCATIONS[self.locations.sample(&mut self.rng)]
                    .0
                    .to_string(),
            )
        }
    }

    fn body_unit(&mut self) -> &'static str {
        let r = self.rng.gen_range(0..100);
        match r {
            0..=29 => self.pick(TOPICS),
            30..=49 => self.pick(SENTIMENT),
            50..=59 => self.pick(EMOTIVE),
            60..=84 => self.pick(FUNCTION_WORDS),
            85..=92 => self.pick(SHIFTERS),
            _ => self.pick(PHRASES),
        }
    }

    fn sentence(&mut self, lead: Option<&str>, min: usize, max: usize) -> String {
        let mut words: Vec<String> = lead.map(String::from).into_iter().collect();
        let k = self.rng.gen_range(min..=max);
        for _ in 0..k {
            let unit = self.body_unit();
            words.push(unit.to_string());
        }
        let mut s = words.join(" ");
        if let Some(first) = s.get(..1) {
            let upper = first.to_ascii_uppercase();
            s.replace_range(..1, &upper);
        }
        s
    }

    fn terminal(&mut self) -> &'static str {
        self.pick(&[".", ".", "!", "?", "!!", "..."])
    }

    /// A post body. With `keyword` it leads with a reopening phrase;
    /// without it no part of the text contains the keyword.
    fn post_text(&mut self, keyword: bool, abusive: bool) -> String {
        let mut sentences = Vec::new();
        let lead = if keyword {
            Some(self.pick(OPENERS))
        } else {
            None
        };
        sentences.push(self.sentence(lead, 2, 7));
        for _ in 0..self.rng.gen_range(0..=2) {
            sentences.push(self.sentence(None, 3, 9));
        }
        if abusive {
            let idx = self.rng.gen_range(0..sentences.len());
            let word = self.pick(&PLANTED_ABUSIVE);
            let word = if self.rng.gen_bool(0.3) {
                word.to_ascii_uppercase()
            } else {
                word.to_string()
            };
            sentences[idx] = format!("{} {word}", sentences[idx]);
        }
        let last = sentences.len() - 1;
        let mut text = String::new();
        for (i, s) in sentences.iter().enumerate() {
            text.push_str(s);
            if i < last || self.rng.gen_bool(0.7) {
                text.push_str(self.terminal());
            }
            text.push(' ');
        }
        let mut text = text.trim_end().to_string();

        if self.rng.gen_bool(0.25) {
            let m = MENTIONS[self.mentions.sample(&mut self.rng)].0;
            if self.rng.gen_bool(0.5) {
                text = format!("@{m} {text}");
            } else {
                text = format!("{text} @{m}");
            }
        }
        if self.rng.gen_bool(0.3) {
            let (tag, _, has_kw) = HASHTAGS[self.hashtags.sample(&mut self.rng)];
            if keyword || !has_kw {
                text = format!("{text} #{tag}");
            }
        }
        if self.rng.gen_bool(0.05) {
            let e = self.pick(EMOJI);
            text = format!("{text} {e}");
        }
        if self.rng.gen_bool(0.15) {
            let code: u32 = self.rng.gen_range(100_000..999_999);
            text = format!("{text} https://t.co/x{code}");
        }
        text
    }

    /// Draw texts until the normalized form is new.
    fn unique_text(&mut self, keyword: bool, abusive: bool) -> String {
        loop {
            let t = self.post_text(keyword, abusive);
            let norm = normalize_for_dedup(&t);
            let distinct: HashSet<&str> = norm.split_whitespace().collect();
            if distinct.len() < 3 {
                continue;
            }
            if !keyword && t.to_lowercase().contains("reopen") {
                continue;
            }
            if self.seen.insert(norm) {
                return t;
            }
        }
    }

    fn low_token_text(&mut self) -> String {
        loop {
            let lead = self.pick(&["Reopen", "reopen!", "#reopen", "REOPEN"]);
            let word = self.pick(TOPICS);
            let t = if self.rng.gen_bool(0.5) {
                format!("{lead} {word}")
            } else {
                format!("{lead} {word}{}", self.rng.gen_range(0..100_000))
            };
            let norm = normalize_for_dedup(&t);
            if self.seen.insert(norm) {
                return t;
            }
        }
    }

    fn abusive_for(&mut self, device: &str) -> bool {
        let rate = match device {
            IPHONE => 0.08,
            ANDROID => 0.04,
            _ => 0.06,
        };
        self.rng.gen_bool(rate)
    }

    fn normal_like(&mut self, role: Role, keyword: bool) -> Draft {
        let device = self.device();
        let abusive = self.abusive_for(device);
        Draft {
            created_at: self.in_range_time(),
            text: self.unique_text(keyword, abusive),
            device,
            location: self.us_location(),
            country: Some("US".into()),
            user_id: self.user(),
            is_retweet: self.rng.gen_bool(0.08),
            role,
            abusive,
        }
    }
}

fn extract_tags(text: &str, sigil: char) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|w| w.strip_prefix(sigil))
        .map(|w| {
            w.trim_end_matches(|c: char| !c.is_ascii_alphanumeric() && c != '_')
                .to_string()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

/// Generate `n` records from `seed`. Output is sorted by timestamp and ids
/// increase with time.
pub fn generate_synthetic_corpus(seed: u64, n: usize) -> Result<SyntheticCorpus> {
    if n == 0 {
        return Err(Error::Config(
            "synthetic corpus size must be at least 1".into(),
        ));
    }
    let mut g = Generator::new(seed, n);

    let n_dup = n * 5 / 100;
    let n_bots = n / 500;
    let n_low = n * 2 / 100;
    let n_off_date = n * 3 / 100;
    let n_off_kw = n * 3 / 100;
    let n_off_country = n * 4 / 100;
    let n_normal = n - n_dup - 20 * n_bots - n_low - n_off_date - n_off_kw - n_off_country;

    let mut drafts: Vec<Draft> = Vec::with_capacity(n);
    for _ in 0..n_normal {
        let d = g.normal_like(Role::Normal, true);
        drafts.push(d);
    }
    for _ in 0..n_dup {
        let src = g.rng.gen_range(0..n_normal);
        let base = &drafts[src];
        let offset = Duration::seconds(g.rng.gen_range(10..=3000));
        let (created_at, src_text) = (base.created_at + offset, base.text.clone());
        let text = match g.rng.gen_range(0..3) {
            0 => {
                let m = MENTIONS[g.mentions.sample(&mut g.rng)].0;
                format!("@{m} {src_text}")
            }
            1 => format!(
                "{src_text} https://t.co/d{}",
                g.rng.gen_range(100_000..999_999)
            ),
            _ => src_text,
        };
        let device = g.device();
        drafts.push(Draft {
            created_at,
            text,
            device,
            location: g.us_location(),
            country: Some("US".into()),
            user_id: g.user(),
            is_retweet: false,
            role: Role::Duplicate,
            abusive: false,
        });
    }
    for b in 0..n_bots {
        let base = g.in_range_time();
        let device = g.device();
        for i in 0..20 {
            let text = g.unique_text(true, false);
            drafts.push(Draft {
                created_at: base + Duration::seconds(3 * i),
                text,
                device,
                location: None,
                country: Some("US".into()),
                user_id: format!("newsbot{b}"),
                is_retweet: false,
                role: Role::Burst,
                abusive: false,
            });
        }
    }
    for _ in 0..n_low {
        let mut d = g.normal_like(Role::LowToken, true);
        d.text = g.low_token_text();
        d.abusive = false;
        drafts.push(d);
    }
    for _ in 0..n_off_date {
        let mut d = g.normal_like(Role::OffDate, true);
        d.created_at = g.off_range_time();
        drafts.push(d);
    }
    for _ in 0..n_off_kw {
        let d = g.normal_like(Role::OffKeyword, false);
        drafts.push(d);
    }
    for i in 0..n_off_country {
        let mut d = g.normal_like(Role::OffCountry, true);
        match i % 3 {
            0 => {
                d.country = Some("CA".into());
                d.location = Some("Toronto, Ontario".into());
            }
            1 => d.country = Some("GB".into()),
            _ => d.country = None,
        }
        drafts.push(d);
    }

    drafts.sort_by_key(|d| d.created_at);

    let mut ledger = PlantingLedger {
        seed,
        n,
        ..PlantingLedger::default()
    };
    let mut records = Vec::with_capacity(n);
    let mut roles = Vec::with_capacity(n);
    for (i, d) in drafts.into_iter().enumerate() {
        let id = (1_255_900_000_000_000_000u64 + i as u64 * 1_000).to_string();
        let list = match d.role {
            Role::Normal => &mut ledger.survivors,
            Role::OffDate => &mut ledger.off_date,
            Role::OffKeyword => &mut ledger.off_keyword,
            Role::OffCountry => &mut ledger.off_country,
            Role::Duplicate => &mut ledger.duplicates,
            Role::Burst => &mut ledger.burst,
            Role::LowToken => &mut ledger.low_token,
        };
        list.push(id.clone());
        if d.role == Role::Normal {
            *ledger
                .survivor_devices
                .entry(d.device.to_string())
                .or_default() += 1;
            if d.abusive {
                ledger.abusive.push(id.clone());
            }
        }
        records.push(TweetRecord {
            id,
            created_at: d.created_at,
            hashtags: extract_tags(&d.text, '#'),
            mentions: extract_tags(&d.text, '@'),
            text: d.text,
            source_device: d.device.to_string(),
            user_location: d.location,
            country_code: d.country,
            user_id: d.user_id,
            is_retweet: d.is_retweet,
        });
        roles.push(d.role);
    }
    Ok(SyntheticCorpus {
        records,
        roles,
        ledger,
    })
}
