//! Ranked n-gram frequency tables.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::TokenStream;

pub const MIN_N: usize = 1;
pub const MAX_N: usize = 4;

fn check_n(n: usize) -> Result<()> {
    if (MIN_N..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidN(n))
    }
}

/// Sliding windows of width `n` that stay inside one sentence.
pub fn extract_ngrams(ts: &TokenStream, n: usize) -> Result<Vec<&[String]>> {
    check_n(n)?;
    Ok(ts.sentences().flat_map(|s| s.windows(n)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramEntry {
    pub gram: Vec<String>,
    pub count: u64,
}

impl NgramEntry {
    pub fn joined(&self) -> String {
        self.gram.join(" ")
    }
}

/// Entries sorted by count descending, ties by the space-joined gram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramTable {
    pub n: usize,
    pub entries: Vec<NgramEntry>,
    pub total_grams: u64,
}

pub fn build_table(streams: &[TokenStream], n: usize) -> Result<NgramTable> {
    check_n(n)?;
    let counts: HashMap<&[String], u64> = streams
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<&[String], u64>, ts| {
            for s in ts.sentences() {
                for g in s.windows(n) {
                    *acc.entry(g).or_default() += 1;
                }
            }
            acc
        })
        .reduce(HashMap::new, |a, b| {
            if a.len() >= b.len() {
                merge_counts(a, b)
            } else {
                merge_counts(b, a)
            }
        });

    let total_grams = counts.values().sum();
    let mut keyed: Vec<(String, NgramEntry)> = counts
        .into_iter()
        .map(|(g, count)| {
            let entry = NgramEntry {
                gram: g.to_vec(),
                count,
            };
            (entry.joined(), entry)
        })
        .collect();
    keyed.sort_unstable_by(|(ka, a), (kb, b)| b.count.cmp(&a.count).then_with(|| ka.cmp(kb)));
    Ok(NgramTable {
        n,
        entries: keyed.into_iter().map(|(_, e)| e).collect(),
        total_grams,
    })
}

fn merge_counts<'a>(
    mut a: HashMap<&'a [String], u64>,
    b: HashMap<&'a [String], u64>,
) -> HashMap<&'a [String], u64> {
    for (k, v) in b {
        *a.entry(k).or_default() += v;
    }
    a
}

impl NgramTable {
    pub fn top(&self, k: usize) -> &[NgramEntry] {
        &self.entries[..k.min(self.entries.len())]
    }

    /// Top-`k` unigrams weighted by `count / max count`.
    pub fn word_cloud_weights(&self, k: usize) -> Result<Vec<(String, f64)>> {
        if self.n != 1 {
            return Err(Error::InvalidN(self.n));
        }
        let Some(max) = self.entries.first().map(|e| e.count as f64) else {
            return Ok(Vec::new());
        };
        Ok(self
            .top(k)
            .iter()
            .map(|e| (e.gram[0].clone(), e.count as f64 / max))
            .collect())
    }

    /// CSV with columns `rank,gram,count` for the top `k` entries.
    pub fn write_csv<W: Write>(&self, k: usize, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["rank", "gram", "count"])?;
        for (i, e) in self.top(k).iter().enumerate() {
            wtr.write_record([(i + 1).to_string(), e.joined(), e.count.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self, k: usize) -> serde_json::Value {
        serde_json::Value::Array(
            self.top(k)
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    serde_json::json!({ "rank": i + 1, "gram": e.joined(), "count": e.count })
                })
                .collect(),
        )
    }
}
