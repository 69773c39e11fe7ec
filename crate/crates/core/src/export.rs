//! Per-record report writers and hashing helpers shared by the pipeline
//! and the CLI.

use std::io::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::corpus::TweetRecord;
use crate::emotion::{Category, EmotionProfile};
use crate::error::Result;
use crate::polarity::{classify_polarity, PolarityScore};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Columns: `id`, one per category, `token_total`.
pub fn write_emotions_csv<W: Write>(
    records: &[TweetRecord],
    profiles: &[EmotionProfile],
    w: W,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["id"];
    header.extend(Category::ALL.iter().map(|c| c.name()));
    header.push("token_total");
    out.write_record(&header)?;
    for (r, p) in records.iter().zip(profiles) {
        let mut row = vec![r.id.clone()];
        row.extend(p.iter().map(|(_, v)| v.to_string()));
        row.push(p.token_total.to_string());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Columns: `id`, `score`, `n_sentences`, `class`.
pub fn write_polarity_csv<W: Write>(
    records: &[TweetRecord],
    scores: &[PolarityScore],
    w: W,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id", "score", "n_sentences", "class"])?;
    for (r, s) in records.iter().zip(scores) {
        out.write_record([
            r.id.as_str(),
            &format!("{:.6}", s.value),
            &s.n_sentences.to_string(),
            classify_polarity(s).name(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Columns: `term`, `weight`.
pub fn write_word_cloud_csv<W: Write>(weights: &[(String, f64)], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["term", "weight"])?;
    for (term, weight) in weights {
        out.write_record([term.as_str(), &format!("{weight:.6}")])?;
    }
    out.flush()?;
    Ok(())
}
