//! Text cleaning, tokenisation, stopword removal and abusive-word masking.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prefix of every mask token.
pub const MASK_PREFIX: &str = "abuvs";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanOptions {
    pub remove_mentions: bool,
}

impl Default for CleanOptions {
    fn default() -> Self {
        CleanOptions {
            remove_mentions: true,
        }
    }
}

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(?:https?://|www\.)\S*").expect("url regex"))
}

fn mention_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"@\w+").expect("mention regex"))
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{2018}')
}

/// Cleaning rules, in order: drop URLs, drop `@mentions` (optional), strip
/// `#`, drop punctuation and non-ASCII symbols (keeping intra-word
/// apostrophes), lowercase, collapse whitespace.
pub fn clean_text(raw: &str, options: &CleanOptions) -> String {
    let no_urls = url_re().replace_all(raw, " ");
    let no_mentions = if options.remove_mentions {
        mention_re().replace_all(&no_urls, " ")
    } else {
        no_urls
    };

    let chars: Vec<char> = no_mentions.chars().collect();
    let mut out = String::with_capacity(chars.len());
    for (i, &c) in chars.iter().enumerate() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if is_apostrophe(c)
            && i > 0
            && chars[i - 1].is_ascii_alphanumeric()
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_alphanumeric())
        {
            out.push('\'');
        } else {
            out.push(' ');
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Tokens with sentence starts. `sentence_boundaries` is strictly
/// increasing and begins at 0 whenever there are tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub tokens: Vec<String>,
    pub sentence_boundaries: Vec<usize>,
}

impl TokenStream {
    /// Build from per-sentence token lists; empty sentences vanish.
    pub fn from_sentences<I, S, T>(sentences: I) -> TokenStream
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let mut ts = TokenStream::default();
        for sentence in sentences {
            let start = ts.tokens.len();
            ts.tokens.extend(sentence.into_iter().map(Into::into));
            if ts.tokens.len() > start {
                ts.sentence_boundaries.push(start);
            }
        }
        ts
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn n_sentences(&self) -> usize {
        self.sentence_boundaries.len()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &[String]> + '_ {
        let ends = self
            .sentence_boundaries
            .iter()
            .skip(1)
            .copied()
            .chain(std::iter::once(self.tokens.len()));
        self.sentence_boundaries
            .iter()
            .zip(ends)
            .map(move |(&s, e)| &self.tokens[s..e])
    }

    /// Concatenate, keeping each stream's sentences separate.
    pub fn concat(&self, other: &TokenStream) -> TokenStream {
        TokenStream::from_sentences(
            self.sentences()
                .chain(other.sentences())
                .map(|s| s.iter().cloned()),
        )
    }

    pub fn is_well_formed(&self) -> bool {
        let increasing = self.sentence_boundaries.windows(2).all(|w| w[0] < w[1]);
        let in_range = self
            .sentence_boundaries
            .last()
            .is_none_or(|&b| b < self.tokens.len());
        let starts = if self.tokens.is_empty() {
            self.sentence_boundaries.is_empty()
        } else {
            self.sentence_boundaries.first() == Some(&0)
        };
        let tokens_ok = self
            .tokens
            .iter()
            .all(|t| !t.is_empty() && !t.chars().any(char::is_whitespace));
        increasing && in_range && starts && tokens_ok
    }
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Split on whitespace; a token ending in `.`, `!` or `?` closes its
/// sentence and the terminal marks are stripped.
pub fn tokenize(text: &str) -> TokenStream {
    let mut sentences: Vec<Vec<String>> = vec![Vec::new()];
    for piece in text.split_whitespace() {
        let word = piece.trim_end_matches(is_terminal);
        if !word.is_empty() {
            sentences
                .last_mut()
                .expect("non-empty")
                .push(word.to_string());
        }
        if word.len() < piece.len() {
            sentences.push(Vec::new());
        }
    }
    TokenStream::from_sentences(sentences)
}

/// Split raw text into sentence segments. A run of terminal punctuation
/// ends a sentence when followed by whitespace or the end of text; URLs are
/// removed first so their dots never split.
pub fn split_sentences(raw: &str) -> Vec<String> {
    let text = url_re().replace_all(raw, " ");
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if is_terminal(c) {
            let mut j = i;
            while j < chars.len() && is_terminal(chars[j]) {
                j += 1;
            }
            if j == chars.len() || chars[j].is_whitespace() {
                out.push(std::mem::take(&mut cur));
            } else {
                cur.extend(&chars[i..j]);
            }
            i = j;
            continue;
        }
        cur.push(c);
        i += 1;
    }
    if !cur.trim().is_empty() {
        out.push(cur);
    }
    out
}

/// Full preparation of one raw text: sentence split on the raw form, then
/// clean and tokenise each sentence.
pub fn prepare(raw: &str, options: &CleanOptions) -> TokenStream {
    TokenStream::from_sentences(split_sentences(raw).iter().map(|s| {
        clean_text(s, options)
            .split_whitespace()
            .map(String::from)
            .collect::<Vec<_>>()
    }))
}

pub type WordSet = HashSet<String>;

/// Parse a one-word-per-line list. Blank lines and `#` comments are
/// ignored; entries are lowercased.
pub fn parse_word_list(text: &str) -> WordSet {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.replace('\u{2019}', "'").to_lowercase())
        .collect()
}

pub fn load_word_list(path: &Path) -> Result<WordSet> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    Ok(parse_word_list(&text))
}

pub fn default_stopwords() -> WordSet {
    parse_word_list(crate::data::STOPWORDS_EN)
}

pub fn remove_stopwords(ts: &TokenStream, stoplist: &WordSet) -> TokenStream {
    TokenStream::from_sentences(
        ts.sentences()
            .map(|s| s.iter().filter(|t| !stoplist.contains(t.as_str())).cloned()),
    )
}

/// Original word to mask token assignments for one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskLedger {
    replacements: Vec<(String, String)>,
    #[serde(skip)]
    lookup: HashMap<String, usize>,
    /// Number the next new word will receive.
    counter: u32,
}

impl Default for MaskLedger {
    fn default() -> Self {
        MaskLedger {
            replacements: Vec::new(),
            lookup: HashMap::new(),
            counter: 1,
        }
    }
}

impl MaskLedger {
    pub fn new() -> MaskLedger {
        MaskLedger::default()
    }

    pub fn replacements(&self) -> &[(String, String)] {
        &self.replacements
    }

    pub fn counter(&self) -> u32 {
        self.counter
    }

    pub fn len(&self) -> usize {
        self.replacements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replacements.is_empty()
    }

    pub fn mask_for(&self, word: &str) -> Option<&str> {
        self.lookup
            .get(word)
            .map(|&i| self.replacements[i].1.as_str())
    }

    fn assign(&mut self, word: &str) -> &str {
        let idx = match self.lookup.get(word) {
            Some(&i) => i,
            None => {
                let mask = format!("{MASK_PREFIX}{}", self.counter);
                self.counter += 1;
                self.replacements.push((word.to_string(), mask));
                self.lookup
                    .insert(word.to_string(), self.replacements.len() - 1);
                self.replacements.len() - 1
            }
        };
        &self.replacements[idx].1
    }
}

/// Byte spans of words in `raw`: runs of ASCII alphanumerics joined by
/// single intra-word apostrophes. This matches what [`clean_text`] keeps
/// together as a token.
pub fn word_spans(raw: &str) -> Vec<(usize, usize)> {
    let chars: Vec<(usize, char)> = raw.char_indices().collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_ascii_alphanumeric() {
            i += 1;
            continue;
        }
        let start = chars[i].0;
        let mut j = i + 1;
        while j < chars.len() {
            let c = chars[j].1;
            if c.is_ascii_alphanumeric() {
                j += 1;
            } else if is_apostrophe(c)
                && chars
                    .get(j + 1)
                    .is_some_and(|n| n.1.is_ascii_alphanumeric())
            {
                j += 2;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(raw.len(), |c| c.0);
        spans.push((start, end));
        i = j;
    }
    spans
}

fn fold_word(word: &str) -> String {
    word.chars()
        .map(|c| {
            if is_apostrophe(c) {
                '\''
            } else {
                c.to_ascii_lowercase()
            }
        })
        .collect()
}

/// Replace whole-word, case-insensitive hits of `lexicon` with their mask
/// tokens, assigning new masks in order of first appearance.
pub fn mask_abusive(raw: &str, lexicon: &WordSet, ledger: &mut MaskLedger) -> String {
    if lexicon.is_empty() {
        return raw.to_string();
    }
    let mut out = String::with_capacity(raw.len());
    let mut last = 0;
    for (s, e) in word_spans(raw) {
        let folded = fold_word(&raw[s..e]);
        if lexicon.contains(&folded) {
            out.push_str(&raw[last..s]);
            out.push_str(ledger.assign(&folded));
            last = e;
        }
    }
    out.push_str(&raw[last..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn opts() -> CleanOptions {
        CleanOptions::default()
    }

    fn words(ws: &[&str]) -> WordSet {
        ws.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn clean_examples() {
        assert_eq!(
            clean_text("Reopen NOW!! https://t.co/x @gov", &opts()),
            "reopen now"
        );
        assert_eq!(
            clean_text("#reopen the economy", &opts()),
            "reopen the economy"
        );
        assert_eq!(clean_text("", &opts()), "");
    }

    #[test]
    fn clean_keeps_mentions_when_asked() {
        let keep = CleanOptions {
            remove_mentions: false,
        };
        assert_eq!(clean_text("thanks @Gov_NY!", &keep), "thanks gov ny");
    }

    #[test]
    fn clean_apostrophes_and_symbols() {
        assert_eq!(
            clean_text("It can’t happen forever…", &opts()),
            "it can't happen forever"
        );
        assert_eq!(clean_text("'quoted' don't", &opts()), "quoted don't");
        assert_eq!(clean_text("open😀now café", &opts()), "open now caf");
        assert_eq!(
            clean_text("visit www.example.com today", &opts()),
            "visit today"
        );
    }

    #[test]
    fn tokenize_examples() {
        let ts = tokenize("reopen the economy");
        assert_eq!(ts.tokens, ["reopen", "the", "economy"]);
        assert_eq!(ts.sentence_boundaries, [0]);

        let ts = tokenize("open now. stay safe.");
        assert_eq!(ts.tokens, ["open", "now", "stay", "safe"]);
        assert_eq!(ts.sentence_boundaries, [0, 2]);

        let ts = tokenize("");
        assert!(ts.tokens.is_empty());
        assert!(ts.sentence_boundaries.is_empty());
    }

    #[test]
    fn prepare_splits_raw_sentences() {
        let ts = prepare(
            "Reopen. Let owner make a living!! https://t.co/abc.def",
            &opts(),
        );
        assert_eq!(ts.sentence_boundaries, [0, 1]);
        assert_eq!(ts.tokens[0], "reopen");
        let ts = prepare("Prices rose 3.5 percent... but why? ok", &opts());
        assert_eq!(ts.sentence_boundaries, [0, 5, 7]);
        assert_eq!(&ts.tokens[2..4], ["3", "5"]);
        let ts = prepare("no terminal punctuation here", &opts());
        assert_eq!(ts.n_sentences(), 1);
        assert!(prepare("!!! ...", &opts()).is_empty());
    }

    #[test]
    fn stopword_examples() {
        let ts = TokenStream::from_sentences([["reopen", "the", "economy"]]);
        let out = remove_stopwords(&ts, &words(&["the"]));
        assert_eq!(out.tokens, ["reopen", "economy"]);

        let all = remove_stopwords(&ts, &words(&["reopen", "the", "economy"]));
        assert!(all.is_empty() && all.sentence_boundaries.is_empty());

        assert_eq!(remove_stopwords(&ts, &WordSet::new()), ts);
    }

    #[test]
    fn stopwords_reindex_boundaries() {
        let ts = TokenStream::from_sentences(vec![vec!["the", "a"], vec!["open", "the", "door"]]);
        let out = remove_stopwords(&ts, &words(&["the", "a"]));
        assert_eq!(out.tokens, ["open", "door"]);
        assert_eq!(out.sentence_boundaries, [0]);
    }

    #[test]
    fn bundled_stoplist_has_174_words() {
        assert_eq!(default_stopwords().len(), 174);
    }

    #[test]
    fn mask_first_word_gets_one() {
        let lex = words(&["idiot", "clown"]);
        let mut ledger = MaskLedger::new();
        let out = mask_abusive("What an IDIOT move", &lex, &mut ledger);
        assert_eq!(out, "What an abuvs1 move");
        assert_eq!(
            ledger.replacements(),
            [("idiot".to_string(), "abuvs1".to_string())]
        );
        assert_eq!(ledger.counter(), 2);
    }

    #[test]
    fn mask_same_word_same_token() {
        let lex = words(&["idiot", "clown"]);
        let mut ledger = MaskLedger::new();
        let a = mask_abusive("clown idiot, Clown!", &lex, &mut ledger);
        let b = mask_abusive("#idiot again", &lex, &mut ledger);
        assert_eq!(a, "abuvs1 abuvs2, abuvs1!");
        assert_eq!(b, "#abuvs2 again");
        assert_eq!(ledger.len(), 2);
    }

    #[test]
    fn mask_whole_words_only() {
        let lex = words(&["rat"]);
        let mut ledger = MaskLedger::new();
        let out = mask_abusive("pirate rat's rat_2 rat😀 Rat’", &lex, &mut ledger);
        assert_eq!(out, "pirate rat's abuvs1_2 abuvs1😀 abuvs1’");
    }

    #[test]
    fn mask_no_hits_is_identity() {
        let lex = words(&["idiot"]);
        let mut ledger = MaskLedger::new();
        assert_eq!(
            mask_abusive("all good here", &lex, &mut ledger),
            "all good here"
        );
        assert!(ledger.is_empty());
        assert_eq!(ledger.counter(), 1);
    }

    proptest! {
        #[test]
        fn clean_is_idempotent(s in "\\PC{0,80}") {
            let once = clean_text(&s, &opts());
            prop_assert_eq!(clean_text(&once, &opts()), once.clone());
        }

        #[test]
        fn prepared_streams_are_well_formed(s in "[a-zA-Z .!?'#@,:/]{0,80}") {
            let ts = prepare(&s, &opts());
            prop_assert!(ts.is_well_formed());
        }

        #[test]
        fn stopword_removal_order_and_count(
            toks in proptest::collection::vec("[a-e]{1,2}", 0..30),
            stop in proptest::collection::hash_set("[a-e]{1,2}", 0..6),
        ) {
            let ts = TokenStream::from_sentences([toks.clone()]);
            let out = remove_stopwords(&ts, &stop);
            let expected: Vec<String> = toks.iter().filter(|t| !stop.contains(*t)).cloned().collect();
            prop_assert_eq!(&out.tokens, &expected);
            let hits = toks.iter().filter(|t| stop.contains(*t)).count();
            prop_assert_eq!(out.len() == ts.len(), hits == 0);
            prop_assert!(out.is_well_formed());
        }

        #[test]
        fn masking_leaves_no_lexicon_tokens(s in "[a-zA-Z' #@!.]{0,60}") {
            let lex = words(&["ab", "cd", "x'y"]);
            let mut ledger = MaskLedger::new();
            let masked = mask_abusive(&s, &lex, &mut ledger);
            let ts = prepare(&masked, &opts());
            prop_assert!(ts.tokens.iter().all(|t| !lex.contains(t)));
        }
    }
}
