//! Acceptance suite. Runs every criterion, prints one line each and exits
//! non-zero if any fails.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use newnormal::analytics::{
    default_keyword_categories, device_group_report, Shares, ANDROID, IPHONE,
};
use newnormal::corpus::{bot_removals, BotPolicy, Corpus};
use newnormal::emotion::{classify, Category, EmotionLexicon, EmotionProfile};
use newnormal::ngram::build_table;
use newnormal::pipeline::{run_pipeline, RunConfig};
use newnormal::polarity::{score_sentence, PolarityLexicon, ScoringParams, ShifterKind};
use newnormal::scenario::{classify_scenario, derive_trend, NarrativeKey, ScenarioId, Timing};
use newnormal::synth::generate_synthetic_corpus;
use newnormal::textprep::{
    default_stopwords, mask_abusive, prepare, remove_stopwords, CleanOptions, MaskLedger,
    TokenStream,
};
use newnormal::Error;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn full_and_content(c: &Corpus) -> (Vec<TokenStream>, Vec<TokenStream>) {
    let stop = default_stopwords();
    let opts = CleanOptions::default();
    let full: Vec<TokenStream> = c.records.iter().map(|r| prepare(&r.text, &opts)).collect();
    let content = full.iter().map(|s| remove_stopwords(s, &stop)).collect();
    (full, content)
}

fn ngram_oracle_criterion() -> Outcome {
    let corpus = seed42_corpus();
    ensure(corpus.len() == 1000, || {
        format!("fixture has {} records", corpus.len())
    })?;
    let started = Instant::now();
    let (full, content) = full_and_content(&corpus);
    let mut grams = 0;
    for n in 1..=4 {
        let streams = if n <= 2 { &content } else { &full };
        let table = build_table(streams, n).map_err(|e| e.to_string())?;
        let got: Vec<(String, u64)> = table
            .entries
            .iter()
            .map(|e| (e.joined(), e.count))
            .collect();
        let want = ngram_oracle(streams, n);
        ensure(got == want, || {
            format!("n={n}: table differs from brute-force count")
        })?;
        let total: u64 = want.iter().map(|(_, c)| c).sum();
        ensure(table.total_grams == total, || {
            format!("n={n}: total {} vs {total}", table.total_grams)
        })?;
        grams += want.len();
    }
    let took = started.elapsed();
    ensure(took < Duration::from_secs(5), || format!("took {took:?}"))?;
    Ok(format!(
        "{grams} distinct grams over n=1..4 match exactly in {took:.2?}"
    ))
}

fn polarity_oracle_criterion() -> Outcome {
    let lex = PolarityLexicon::bundled();
    let oracle = PolarityOracle::bundled();
    let mut rng = ChaCha8Rng::seed_from_u64(2020);
    let mut polar: Vec<&String> = oracle.polarity.keys().collect();
    let mut shifters: Vec<&String> = oracle.shifter.keys().collect();
    polar.sort();
    shifters.sort();
    let neutral = [
        "reopen", "state", "week", "plan", "table", "city", "open", "street",
    ];

    let mut cases = Vec::with_capacity(1000);
    for i in 0..1000 {
        let len = rng.gen_range(0..=30);
        let tokens: Vec<String> = (0..len)
            .map(|_| match rng.gen_range(0..10) {
                0..=2 => polar.choose(&mut rng).unwrap().to_string(),
                3..=5 => shifters.choose(&mut rng).unwrap().to_string(),
                _ => neutral.choose(&mut rng).unwrap().to_string(),
            })
            .collect();
        let params = if i % 2 == 0 {
            ScoringParams::default()
        } else {
            ScoringParams {
                window_before: rng.gen_range(0..=8),
                window_after: rng.gen_range(0..=8),
                amplifier_weight: rng.gen_range(0.0..=2.0),
                adversative_weight: rng.gen_range(0.0..=4.0),
            }
        };
        cases.push((tokens, params));
    }

    let started = Instant::now();
    let scores: Vec<f64> = cases
        .iter()
        .map(|(t, p)| score_sentence(t, &lex, p))
        .collect();
    let took = started.elapsed();
    let mut max_diff: f64 = 0.0;
    for ((tokens, params), got) in cases.iter().zip(&scores) {
        let want = oracle.score(tokens, params);
        max_diff = max_diff.max((got - want).abs());
    }
    ensure(max_diff < 1e-12, || format!("max abs diff {max_diff:e}"))?;
    ensure(took < Duration::from_secs(2), || format!("took {took:?}"))?;
    Ok(format!(
        "1000 sentences, max abs diff {max_diff:e}, scored in {took:.2?}"
    ))
}

fn hand_trace_criterion() -> Outcome {
    let lex = PolarityLexicon::from_pairs(
        [("good", 1.0)],
        [
            ("not", ShifterKind::Negator),
            ("really", ShifterKind::Amplifier),
        ],
    )
    .map_err(|e| e.to_string())?;
    let p = ScoringParams::default();
    // Published four-decimal values, not the constants they approximate.
    #[allow(clippy::approx_constant)]
    let cases: [(&[&str], f64); 4] = [
        (&["good"], 1.0),
        (&["not", "good"], -0.7071),
        (&["really", "good"], 1.2728),
        (&[], 0.0),
    ];
    let mut got = Vec::new();
    for (tokens, want) in cases {
        let tokens: Vec<String> = tokens.iter().map(|s| s.to_string()).collect();
        let v = score_sentence(&tokens, &lex, &p);
        ensure((v - want).abs() < 5e-5, || {
            format!("{tokens:?}: {v} vs {want}")
        })?;
        got.push(format!("{v:.4}"));
    }
    Ok(format!("[{}]", got.join(", ")))
}

fn emotion_criterion() -> Outcome {
    // Independent TSV reading: term -> categories flagged 1.
    let mut oracle: HashMap<&str, Vec<&str>> = HashMap::new();
    for line in newnormal::data::EMOTION_LEXICON.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() == 3 && cols[2].trim() == "1" {
            oracle.entry(cols[0]).or_default().push(cols[1]);
        }
    }
    let lex = EmotionLexicon::bundled();
    let corpus = seed42_corpus();
    let (_, content) = full_and_content(&corpus);
    let mut hits = 0u64;
    for (r, ts) in corpus.records.iter().zip(&content) {
        let p = classify(ts, &lex);
        let mut want: HashMap<&str, u64> = HashMap::new();
        for tok in &ts.tokens {
            for cat in oracle.get(tok.as_str()).into_iter().flatten() {
                *want.entry(cat).or_insert(0) += 1;
            }
        }
        for c in Category::ALL {
            let w = want.get(c.name()).copied().unwrap_or(0);
            ensure(p.get(c) == w, || {
                format!("record {}: {} = {} vs {w}", r.id, c.name(), p.get(c))
            })?;
            hits += w;
        }
        ensure(p.token_total == ts.len() as u64, || {
            format!("record {}: token_total", r.id)
        })?;
    }

    let tweet = "Beautiful day to reopen the economy, we have hope, but people will die.";
    let ts = remove_stopwords(
        &prepare(tweet, &CleanOptions::default()),
        &default_stopwords(),
    );
    let p = classify(&ts, &lex);
    ensure(
        p.get(Category::Positive) == 2 && p.get(Category::Negative) == 1,
        || {
            format!(
                "fixture tweet scored positive={} negative={}",
                p.get(Category::Positive),
                p.get(Category::Negative)
            )
        },
    )?;
    Ok(format!(
        "{} records, {hits} category hits match; mixed tweet positive=2 negative=1",
        corpus.len()
    ))
}

fn negation_criterion() -> Outcome {
    let lex = PolarityLexicon::bundled();
    let oracle = PolarityOracle::bundled();
    let p = ScoringParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut polar: Vec<(&String, &f64)> = oracle.polarity.iter().collect();
    polar.sort_by(|a, b| a.0.cmp(b.0));
    let negators: Vec<String> = {
        let mut v: Vec<String> = oracle
            .shifter
            .iter()
            .filter(|(_, &k)| k == 1)
            .map(|(t, _)| t.clone())
            .collect();
        v.sort();
        v
    };
    let fillers = [
        "reopen", "state", "week", "plan", "city", "street", "table", "monday",
    ];
    for f in fillers {
        ensure(
            lex.polarity(f).is_none() && lex.shifter(f).is_none(),
            || format!("filler `{f}` is in the lexicon"),
        )?;
    }

    for case in 0..200 {
        let (word, &base) = polar[rng.gen_range(0..polar.len())];
        let before = rng.gen_range(0..5);
        let after = rng.gen_range(0..5);
        let mut tokens: Vec<String> = (0..before)
            .map(|_| fillers.choose(&mut rng).unwrap().to_string())
            .collect();
        let at = tokens.len();
        tokens.push(word.clone());
        tokens.extend((0..after).map(|_| fillers.choose(&mut rng).unwrap().to_string()));
        let n = tokens.len() as f64;
        let s0 = score_sentence(&tokens, &lex, &p);
        ensure(s0 == base / n.sqrt(), || {
            format!("case {case}: base score {s0}")
        })?;

        let mut one = tokens.clone();
        one.insert(at, negators.choose(&mut rng).unwrap().clone());
        let s1 = score_sentence(&one, &lex, &p);
        ensure(s1.signum() == -s0.signum(), || {
            format!("case {case}: {one:?} did not flip ({s0} -> {s1})")
        })?;
        ensure(s1 == -base / (n + 1.0).sqrt(), || {
            format!("case {case}: flipped magnitude {s1}")
        })?;

        let mut two = one.clone();
        two.insert(at, negators.choose(&mut rng).unwrap().clone());
        let s2 = score_sentence(&two, &lex, &p);
        ensure(s2.signum() == s0.signum(), || {
            format!("case {case}: double negation {two:?} gave {s2}")
        })?;
        ensure(s2 == base / (n + 2.0).sqrt(), || {
            format!("case {case}: double-negation magnitude {s2}")
        })?;
    }
    Ok("200 cases: single negator flips sign, double negator restores it".into())
}

fn scenario_criterion() -> Outcome {
    let shares = |p, n| Shares {
        positive: p,
        negative: n,
        neutral: 1.0 - p - n,
    };
    let empty = EmotionProfile::default();
    let pos = derive_trend(&shares(0.4827, 0.3682), &empty).map_err(|e| e.to_string())?;
    let neg = derive_trend(&shares(0.2, 0.5), &empty).map_err(|e| e.to_string())?;
    let expected = [
        (&pos, Timing::Now, ScenarioId::S1, NarrativeKey::A),
        (&pos, Timing::Later, ScenarioId::S2, NarrativeKey::B),
        (&neg, Timing::Now, ScenarioId::S3, NarrativeKey::C),
        (&neg, Timing::Later, ScenarioId::S4, NarrativeKey::D),
    ];
    for (trend, timing, id, key) in expected {
        let out = classify_scenario(trend, timing);
        ensure(out.id == id && out.narrative_key == key, || {
            format!(
                "{:?}/{timing:?} -> {:?}/{:?}",
                trend.direction, out.id, out.narrative_key
            )
        })?;
    }
    let tied = derive_trend(&shares(0.4, 0.4), &empty);
    ensure(matches!(tied, Err(Error::TiedTrend(_))), || {
        format!("tie gave {tied:?}")
    })?;
    Ok("S1..S4 mapped exactly; tie raises TiedTrend".into())
}

fn masking_criterion() -> Outcome {
    let lexicon = abusive_lexicon();
    ensure(lexicon.len() == 50, || {
        format!("lexicon has {} words", lexicon.len())
    })?;
    let corpus = seed42_corpus();
    let mut ledger = MaskLedger::new();
    let masked: Vec<String> = corpus
        .records
        .iter()
        .map(|r| mask_abusive(&r.text, &lexicon, &mut ledger))
        .collect();
    let mut found = Vec::new();
    let mut planted_hits = 0;
    for (r, text) in corpus.records.iter().zip(&masked) {
        let lower = text.to_lowercase();
        let words = lower
            .split(|c: char| !(c.is_ascii_alphanumeric() || c == '\'' || c == '\u{2019}'))
            .filter(|w| !w.is_empty());
        for w in words {
            if lexicon.contains(w) {
                found.push(format!("{}: {w}", r.id));
            }
        }
        if lower.contains("abuvs") {
            planted_hits += 1;
        }
    }
    ensure(found.is_empty(), || {
        format!("unmasked words remain: {found:?}")
    })?;
    ensure(planted_hits > 0 && !ledger.is_empty(), || {
        "nothing was masked".into()
    })?;
    Ok(format!(
        "0 lexicon words left in {} records; {} distinct words masked in {planted_hits} records",
        corpus.len(),
        ledger.len()
    ))
}

fn planted_truth_criterion() -> Outcome {
    let corpus = seed42_corpus();
    let ledger = seed42_ledger();
    let cfg = RunConfig::default();
    let pre_bot = corpus
        .filter_date_range(cfg.start_date, cfg.end_date)
        .and_then(|c| c.filter_keyword(&cfg.keyword))
        .and_then(|c| c.filter_country(&cfg.country))
        .map_err(|e| e.to_string())?;
    let removals = bot_removals(&pre_bot.records, &BotPolicy::default());
    let ids = |idx: &[usize]| -> BTreeSet<String> {
        idx.iter().map(|&i| pre_bot.records[i].id.clone()).collect()
    };
    let set = |v: &[String]| -> BTreeSet<String> { v.iter().cloned().collect() };

    ensure(ids(&removals.duplicate) == set(&ledger.duplicates), || {
        format!(
            "duplicates: removed {} vs planted {}",
            removals.duplicate.len(),
            ledger.duplicates.len()
        )
    })?;
    ensure(ids(&removals.burst) == set(&ledger.burst), || {
        format!(
            "burst: removed {} vs planted {}",
            removals.burst.len(),
            ledger.burst.len()
        )
    })?;
    ensure(ids(&removals.low_token) == set(&ledger.low_token), || {
        "low-token set differs".into()
    })?;

    let filtered = pre_bot.filter_bots_and_duplicates(&BotPolicy::default());
    let survivors: BTreeSet<String> = filtered.records.iter().map(|r| r.id.clone()).collect();
    ensure(survivors == set(&ledger.survivors), || {
        "survivor set differs from ledger".into()
    })?;

    let report =
        device_group_report(&filtered, &default_keyword_categories()).map_err(|e| e.to_string())?;
    for device in [IPHONE, ANDROID] {
        let got = report.group(device).map_or(0, |g| g.n_records) as usize;
        let want = ledger.survivor_devices.get(device).copied().unwrap_or(0);
        ensure(got == want, || format!("{device}: {got} vs ledger {want}"))?;
    }
    Ok(format!(
        "{} duplicates and {} burst posts removed exactly; iPhone {} / Android {}",
        ledger.duplicates.len(),
        ledger.burst.len(),
        ledger.survivor_devices[IPHONE],
        ledger.survivor_devices[ANDROID]
    ))
}

fn determinism_criterion() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = run_pipeline(&golden_config(&dir.path().join("a"))).map_err(|e| e.to_string())?;
    let b = run_pipeline(&golden_config(&dir.path().join("b"))).map_err(|e| e.to_string())?;
    let read = |d: &str| {
        std::fs::read(dir.path().join(d).join("manifest.json")).map_err(|e| e.to_string())
    };
    let (ma, mb) = (read("a")?, read("b")?);
    ensure(ma == mb, || "manifests differ".into())?;
    ensure(a == b, || "in-memory manifests differ".into())?;
    let hash = a.hash().map_err(|e| e.to_string())?;
    Ok(format!(
        "manifests byte-identical ({} bytes, sha256 {})",
        ma.len(),
        &hash[..16]
    ))
}

fn throughput_criterion() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("synthetic_100k.csv");
    let synth = generate_synthetic_corpus(7, 100_000).map_err(|e| e.to_string())?;
    synth
        .write_csv(std::fs::File::create(&input).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let cfg = RunConfig {
        input,
        abusive: Some(fixture("abusive_test.txt")),
        output_dir: dir.path().join("out"),
        ..RunConfig::default()
    };
    let started = Instant::now();
    let manifest = run_pipeline(&cfg).map_err(|e| e.to_string())?;
    let took = started.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    ensure(
        manifest.final_records == synth.ledger.survivors.len(),
        || {
            format!(
                "{} survivors vs ledger {}",
                manifest.final_records,
                synth.ledger.survivors.len()
            )
        },
    )?;
    Ok(format!(
        "100000 records -> {} in {took:.2?} on {} worker thread(s)",
        manifest.final_records,
        rayon::current_num_threads()
    ))
}

type Criterion = fn() -> Outcome;

fn main() {
    // Sanity check the shared fixture against the generator before anything
    // depends on it.
    let regenerated = generate_synthetic_corpus(42, 1000).expect("generator");
    let committed = seed42_corpus();
    assert_eq!(
        regenerated.records, committed.records,
        "fixture drifted from generator"
    );

    let criteria: [(&str, Criterion); 10] = [
        ("n-gram oracle", ngram_oracle_criterion),
        ("polarity oracle", polarity_oracle_criterion),
        ("hand-trace vector", hand_trace_criterion),
        ("emotion unit-sum conservation", emotion_criterion),
        ("negation flip / double negation", negation_criterion),
        ("scenario mapping", scenario_criterion),
        ("masking completeness", masking_criterion),
        ("planted ground truth", planted_truth_criterion),
        ("determinism", determinism_criterion),
        ("throughput", throughput_criterion),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
