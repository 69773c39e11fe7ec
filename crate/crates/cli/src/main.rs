use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use newnormal::corpus::InputFormat;
use newnormal::emotion::Category;
use newnormal::export::{json_bytes, write_emotions_csv};
use newnormal::pipeline::{
    apply_filters, compute_run, load_input, run_pipeline, RunArtifacts, RunConfig,
};
use newnormal::polarity::classify_polarity;
use newnormal::scenario::{classify_scenario, derive_trend, ScenarioInputs, Timing};
use newnormal::synth::generate_synthetic_corpus;
use newnormal::{Error, ErrorClass, Result};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "newnormal",
    version,
    about = "Lexicon-driven sentiment analytics for post corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and filter a corpus, writing the surviving records as CSV.
    Ingest {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Filtered corpus destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write stage-by-stage record counts as JSON.
        #[arg(long)]
        provenance: Option<PathBuf>,
    },
    /// Ranked n-gram table.
    Ngrams {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 25)]
        top: usize,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-record polarity score, class and emotion counts.
    Sentiment {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Descriptive reports.
    Report {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_enum)]
        what: ReportKind,
        #[arg(long, default_value_t = 25)]
        top: usize,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scenario from a saved distribution report or run summary.
    Scenario {
        /// JSON from `report --what distribution --format json` or a run's summary.json.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_timing)]
        timing: Timing,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline: every report plus manifest.json in the output directory.
    Run {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Deterministic synthetic corpus with planted ground truth.
    Synth {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// Planting ledger (ids per role) as JSON.
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
}

/// Input selection and filter overrides. Flags win over config-file values.
#[derive(Args)]
struct CorpusArgs {
    /// Flat TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_parser = parse_input_format)]
    input_format: Option<InputFormat>,
    #[arg(long)]
    start: Option<NaiveDate>,
    #[arg(long)]
    end: Option<NaiveDate>,
    #[arg(long)]
    keyword: Option<String>,
    #[arg(long)]
    country: Option<String>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    abusive: Option<PathBuf>,
    #[arg(long)]
    emotion_lexicon: Option<PathBuf>,
    #[arg(long)]
    polarity_lexicon: Option<PathBuf>,
    #[arg(long)]
    shifters: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportKind {
    Mentions,
    Hashtags,
    Locations,
    Devices,
    Daily,
    Distribution,
}

fn parse_timing(s: &str) -> std::result::Result<Timing, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_input_format(s: &str) -> std::result::Result<InputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl CorpusArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.input {
            cfg.input = v.clone();
        }
        if let Some(v) = self.input_format {
            cfg.format = Some(v);
        }
        if let Some(v) = self.start {
            cfg.start_date = v;
        }
        if let Some(v) = self.end {
            cfg.end_date = v;
        }
        if let Some(v) = &self.keyword {
            cfg.keyword = v.clone();
        }
        if let Some(v) = &self.country {
            cfg.country = v.clone();
        }
        for (flag, slot) in [
            (&self.stopwords, &mut cfg.stopwords),
            (&self.abusive, &mut cfg.abusive),
            (&self.emotion_lexicon, &mut cfg.emotion_lexicon),
            (&self.polarity_lexicon, &mut cfg.polarity_lexicon),
            (&self.shifters, &mut cfg.shifters),
        ] {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        }
        Ok(cfg)
    }
}

/// Write to `path`, or stdout when `None`.
fn emit(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn emit_json(path: Option<&Path>, v: &impl serde::Serialize) -> Result<()> {
    let bytes = json_bytes(v)?;
    emit(path, |w| Ok(w.write_all(&bytes)?))
}

fn analyse(corpus: &CorpusArgs, top: usize) -> Result<RunArtifacts> {
    let mut cfg = corpus.config()?;
    cfg.top_k = top;
    compute_run(&cfg)
}

fn sentiment_rows(a: &RunArtifacts) -> Vec<Value> {
    a.corpus
        .records
        .iter()
        .zip(&a.scores)
        .zip(&a.profiles)
        .map(|((r, s), p)| {
            json!({
                "id": r.id,
                "score": s.value,
                "class": classify_polarity(s).name(),
                "emotions": p,
            })
        })
        .collect()
}

fn write_sentiment_csv(a: &RunArtifacts, w: &mut dyn Write) -> Result<()> {
    // Emotion columns come from the shared writer; score and class are
    // appended from the polarity results.
    let mut emotions = Vec::new();
    write_emotions_csv(&a.corpus.records, &a.profiles, &mut emotions)?;
    let mut rdr = csv::ReaderBuilder::new().from_reader(emotions.as_slice());
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    header.extend(["score".to_string(), "class".to_string()]);
    out.write_record(&header)?;
    for (row, s) in rdr.records().zip(&a.scores) {
        let mut row: Vec<String> = row?.iter().map(String::from).collect();
        row.push(format!("{:.6}", s.value));
        row.push(classify_polarity(s).name().to_string());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

fn report(a: &RunArtifacts, what: ReportKind, format: OutFormat, out: Option<&Path>) -> Result<()> {
    match (what, format) {
        (ReportKind::Mentions, OutFormat::Csv) => emit(out, |w| a.mentions.write_csv(w)),
        (ReportKind::Mentions, OutFormat::Json) => emit_json(out, &a.mentions),
        (ReportKind::Hashtags, OutFormat::Csv) => emit(out, |w| a.hashtags.write_csv(w)),
        (ReportKind::Hashtags, OutFormat::Json) => emit_json(out, &a.hashtags),
        (ReportKind::Locations, OutFormat::Csv) => emit(out, |w| {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(["field", "rank", "location", "count"])?;
            for (field, table) in [
                ("tagged", &a.locations_tagged),
                ("stated", &a.locations_stated),
            ] {
                for r in &table.rows {
                    wtr.write_record([field, &r.rank.to_string(), &r.key, &r.count.to_string()])?;
                }
            }
            wtr.flush()?;
            Ok(())
        }),
        (ReportKind::Locations, OutFormat::Json) => emit_json(
            out,
            &json!({ "tagged": a.locations_tagged, "stated": a.locations_stated }),
        ),
        (ReportKind::Devices, OutFormat::Csv) => emit(out, |w| a.devices.write_csv(w)),
        (ReportKind::Devices, OutFormat::Json) => emit_json(out, &a.devices),
        (ReportKind::Daily, OutFormat::Csv) => emit(out, |w| a.daily.write_csv(w)),
        (ReportKind::Daily, OutFormat::Json) => emit_json(out, &a.daily),
        (ReportKind::Distribution, OutFormat::Csv) => emit(out, |w| {
            let d = &a.summary.distribution;
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(["class", "count", "share"])?;
            for (name, count, share) in [
                ("positive", d.positive, d.shares.positive),
                ("negative", d.negative, d.shares.negative),
                ("neutral", d.neutral, d.shares.neutral),
            ] {
                wtr.write_record([name, &count.to_string(), &share.to_string()])?;
            }
            wtr.flush()?;
            Ok(())
        }),
        (ReportKind::Distribution, OutFormat::Json) => {
            let mut v = serde_json::to_value(&a.summary.distribution)?;
            v["emotion_totals"] = serde_json::to_value(a.summary.emotion_totals)?;
            v["dominant_emotions"] = serde_json::to_value(&a.summary.dominant_emotions)?;
            emit_json(out, &v)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest {
            corpus,
            out,
            provenance,
        } => {
            let cfg = corpus.config()?;
            cfg.validate()?;
            let (c, _) = load_input(&cfg)?;
            let c = apply_filters(c, &cfg)?;
            emit(out.as_deref(), |w| c.write_csv(w))?;
            if let Some(p) = provenance {
                emit_json(Some(&p), &c.provenance)?;
            }
            eprintln!("{} of {} records kept", c.len(), c.provenance.parsed);
            Ok(())
        }
        Command::Ngrams {
            corpus,
            n,
            top,
            format,
            out,
        } => {
            if !(newnormal::ngram::MIN_N..=newnormal::ngram::MAX_N).contains(&n) {
                return Err(Error::InvalidN(n));
            }
            let a = analyse(&corpus, top)?;
            let table = &a.tables[n - 1];
            match format {
                OutFormat::Csv => emit(out.as_deref(), |w| table.write_csv(top, w)),
                OutFormat::Json => emit_json(out.as_deref(), &table.to_json(top)),
            }
        }
        Command::Sentiment {
            corpus,
            format,
            out,
        } => {
            let a = analyse(&corpus, 25)?;
            match format {
                OutFormat::Csv => emit(out.as_deref(), |w| write_sentiment_csv(&a, w)),
                OutFormat::Json => emit_json(out.as_deref(), &sentiment_rows(&a)),
            }
        }
        Command::Report {
            corpus,
            what,
            top,
            format,
            out,
        } => {
            let a = analyse(&corpus, top)?;
            report(&a, what, format, out.as_deref())
        }
        Command::Scenario { input, timing, out } => {
            let text = std::fs::read_to_string(&input).map_err(|e| match e.kind() {
                io::ErrorKind::NotFound => Error::FileNotFound(input.clone()),
                _ => Error::Io(e),
            })?;
            let v: Value = serde_json::from_str(&text)?;
            let inputs = ScenarioInputs::from_json(&v)?;
            let trend = derive_trend(&inputs.shares, &inputs.emotion_totals)?;
            let outcome = classify_scenario(&trend, timing);
            let dominant: Vec<&str> = trend
                .dominant_emotions
                .iter()
                .map(|c: &Category| c.name())
                .collect();
            emit_json(
                out.as_deref(),
                &json!({
                    "id": outcome.id,
                    "label": outcome.label,
                    "narrative_key": outcome.narrative_key,
                    "summary": outcome.summary(),
                    "inputs": {
                        "timing": timing,
                        "direction": trend.direction,
                        "pos_share": trend.pos_share,
                        "neg_share": trend.neg_share,
                        "dominant_emotions": dominant,
                    },
                }),
            )
        }
        Command::Run { corpus, output_dir } => {
            let mut cfg = corpus.config()?;
            if let Some(d) = output_dir {
                cfg.output_dir = d;
            }
            let manifest = run_pipeline(&cfg)?;
            println!(
                "{} records -> {} (manifest sha256 {})",
                manifest.final_records,
                cfg.output_dir.display(),
                manifest.hash()?
            );
            Ok(())
        }
        Command::Synth {
            seed,
            n,
            out,
            ledger,
        } => {
            let s = generate_synthetic_corpus(seed, n)?;
            emit(Some(&out), |w| s.write_csv(w))?;
            if let Some(p) = ledger {
                emit_json(Some(&p), &s.ledger)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Data => 3,
                ErrorClass::Internal => 4,
            })
        }
    }
}
