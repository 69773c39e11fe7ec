//! Eight-class emotion counting with positive/negative unit sums over an
//! NRC-layout lexicon.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::textprep::TokenStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Anger,
    Anticipation,
    Disgust,
    Fear,
    Joy,
    Sadness,
    Surprise,
    Trust,
    Positive,
    Negative,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::Anger,
        Category::Anticipation,
        Category::Disgust,
        Category::Fear,
        Category::Joy,
        Category::Sadness,
        Category::Surprise,
        Category::Trust,
        Category::Positive,
        Category::Negative,
    ];

    /// The eight emotion classes, in tie-break order.
    pub const EMOTIONS: [Category; 8] = [
        Category::Anger,
        Category::Anticipation,
        Category::Disgust,
        Category::Fear,
        Category::Joy,
        Category::Sadness,
        Category::Surprise,
        Category::Trust,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Anger => "anger",
            Category::Anticipation => "anticipation",
            Category::Disgust => "disgust",
            Category::Fear => "fear",
            Category::Joy => "joy",
            Category::Sadness => "sadness",
            Category::Surprise => "surprise",
            Category::Trust => "trust",
            Category::Positive => "positive",
            Category::Negative => "negative",
        }
    }

    pub fn is_emotion(self) -> bool {
        !matches!(self, Category::Positive | Category::Negative)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Schema(format!("unknown emotion category `{s}`")))
    }
}

/// Bit set over the ten categories.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CategorySet(u16);

impl CategorySet {
    pub fn insert(&mut self, c: Category) {
        self.0 |= 1 << c.index();
    }

    pub fn contains(self, c: Category) -> bool {
        self.0 & (1 << c.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Category> {
        Category::ALL.into_iter().filter(move |&c| self.contains(c))
    }
}

impl FromIterator<Category> for CategorySet {
    fn from_iter<I: IntoIterator<Item = Category>>(iter: I) -> Self {
        let mut s = CategorySet::default();
        for c in iter {
            s.insert(c);
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmotionLexicon {
    entries: HashMap<String, CategorySet>,
}

impl EmotionLexicon {
    /// Entries with empty category sets are dropped.
    pub fn from_entries<I, S>(entries: I) -> EmotionLexicon
    where
        I: IntoIterator<Item = (S, CategorySet)>,
        S: Into<String>,
    {
        EmotionLexicon {
            entries: entries
                .into_iter()
                .filter(|(_, set)| !set.is_empty())
                .map(|(t, set)| (t.into().to_lowercase(), set))
                .collect(),
        }
    }

    /// Parse the three-column TSV layout `term<TAB>category<TAB>flag`.
    /// Rows with flag 1 define membership.
    pub fn parse_tsv(text: &str, origin: &str) -> Result<EmotionLexicon> {
        let err = |line: usize, message: String| Error::Lexicon {
            path: origin.to_string(),
            line,
            message,
        };
        let mut entries: HashMap<String, CategorySet> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(err(
                    line_no,
                    format!("expected 3 tab-separated columns, got {}", cols.len()),
                ));
            }
            let term = cols[0].trim().to_lowercase();
            if term.is_empty() || term.contains(char::is_whitespace) {
                return Err(err(
                    line_no,
                    format!("term `{}` must be a single word", cols[0]),
                ));
            }
            let category: Category = cols[1]
                .parse()
                .map_err(|_| err(line_no, format!("unknown category `{}`", cols[1])))?;
            let set = entries.entry(term).or_default();
            match cols[2].trim() {
                "1" => set.insert(category),
                "0" => {}
                other => return Err(err(line_no, format!("flag must be 0 or 1, got `{other}`"))),
            }
        }
        entries.retain(|_, s| !s.is_empty());
        Ok(EmotionLexicon { entries })
    }

    pub fn load(path: &Path) -> Result<EmotionLexicon> {
        let text = read_lexicon(path)?;
        EmotionLexicon::parse_tsv(&text, &path.display().to_string())
    }

    pub fn bundled() -> EmotionLexicon {
        EmotionLexicon::parse_tsv(crate::data::EMOTION_LEXICON, "bundled")
            .expect("bundled emotion lexicon parses")
    }

    pub fn get(&self, term: &str) -> Option<CategorySet> {
        self.entries.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, CategorySet)> {
        self.entries.iter().map(|(t, s)| (t.as_str(), *s))
    }
}

pub(crate) fn read_lexicon(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

/// Per-category unit counts. Serialises as a flat object with all ten
/// categories plus `token_total`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct EmotionProfile {
    counts: [u64; 10],
    pub token_total: u64,
}

impl EmotionProfile {
    pub fn get(&self, c: Category) -> u64 {
        self.counts[c.index()]
    }

    pub fn set(&mut self, c: Category, v: u64) {
        self.counts[c.index()] = v;
    }

    pub fn emotion_total(&self) -> u64 {
        Category::EMOTIONS.iter().map(|&c| self.get(c)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Category, u64)> + '_ {
        Category::ALL.into_iter().map(|c| (c, self.get(c)))
    }

    pub fn add(&mut self, other: &EmotionProfile) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.token_total += other.token_total;
    }
}

impl Serialize for EmotionProfile {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(11))?;
        for (c, v) in self.iter() {
            map.serialize_entry(c.name(), &v)?;
        }
        map.serialize_entry("token_total", &self.token_total)?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for EmotionProfile {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: BTreeMap<String, u64> = BTreeMap::deserialize(d)?;
        let mut p = EmotionProfile::default();
        for (k, v) in raw {
            if k == "token_total" {
                p.token_total = v;
            } else {
                let c: Category = k.parse().map_err(serde::de::Error::custom)?;
                p.set(c, v);
            }
        }
        Ok(p)
    }
}

/// Every token occurrence that hits the lexicon adds one to each of its
/// categories.
pub fn classify(ts: &TokenStream, lex: &EmotionLexicon) -> EmotionProfile {
    let mut p = EmotionProfile {
        token_total: ts.len() as u64,
        ..EmotionProfile::default()
    };
    for tok in &ts.tokens {
        if let Some(set) = lex.get(tok) {
            for c in set.iter() {
                p.counts[c.index()] += 1;
            }
        }
    }
    p
}

pub fn aggregate_profiles<'a, I>(profiles: I) -> EmotionProfile
where
    I: IntoIterator<Item = &'a EmotionProfile>,
{
    profiles
        .into_iter()
        .fold(EmotionProfile::default(), |mut acc, p| {
            acc.add(p);
            acc
        })
}

/// Top-`k` of the eight emotion classes; ties keep the fixed class order.
pub fn dominant_classes(p: &EmotionProfile, k: usize) -> Vec<(Category, u64)> {
    let mut ranked: Vec<(Category, u64)> =
        Category::EMOTIONS.iter().map(|&c| (c, p.get(c))).collect();
    ranked.sort_by_key(|&(_, n)| std::cmp::Reverse(n));
    ranked.truncate(k);
    ranked
}
