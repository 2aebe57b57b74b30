//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when input fails validation, 2 on I/O or
//! format errors. Diagnostics go to stderr, data to stdout or `-o`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::conllu::{validate_sentence, ParseError, ParseOptions, Reader, Sentence};
use crate::correct::{self, AuxAnnotation};
use crate::eval::{self, ScoreOptions};
use crate::features::{self, load_rule_pack, RulePack};
use crate::instruct::{self, DEFAULT_INSTRUCTION};

const BATCH: usize = 256;

#[derive(Parser, Debug)]
#[command(
    name = "unidive",
    version,
    about = "Korean treebank enrichment, correction and evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ReadArgs {
    /// Map unknown tags and misaligned rows to warnings, and skip tree checks
    #[arg(long)]
    pub lenient: bool,
    /// Accept a leading byte order mark
    #[arg(long)]
    pub strip_bom: bool,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Input CoNLL-U file, `-` for stdin
    #[arg(default_value = "-")]
    pub input: PathBuf,
    /// Output file (default stdout)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Worker threads over sentences; 0 uses every core
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub read: ReadArgs,
}

#[derive(Args, Debug, Clone)]
pub struct PackArgs {
    /// Rule pack (default: the built-in Korean pack)
    #[arg(long, env = "UNIDIVE_RULES")]
    pub rules: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PredictionFormat {
    /// CoNLL-U parser output
    Conllu,
    /// Generated output blocks separated by blank lines
    Text,
    /// JSON Lines with the generation in an `output` field
    Jsonl,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check CoNLL-U files; exit 0 iff no diagnostics
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        read: ReadArgs,
    },
    /// Assign morphosyntactic features and mark functional words
    Enrich {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        pack: PackArgs,
    },
    /// Apply POS corrections, optionally writing a correction log
    Correct {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        pack: PackArgs,
        /// Sidecar TSV: sent_id, token_id, ner_label, ext_xpos
        #[arg(long)]
        aux: Option<PathBuf>,
        /// Where to write the correction log
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Summarize a correction log into conversion counts and ratios
    Stats {
        /// Correction log written by `correct --log`
        log: PathBuf,
        /// Corpus token count (default: the log's trailer)
        #[arg(long)]
        total_tokens: Option<usize>,
        /// Keep only the N most frequent rows per field
        #[arg(long)]
        top: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render sentences as instruction-tuning JSONL
    ConvertIt {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = DEFAULT_INSTRUCTION)]
        instruction: String,
    },
    /// Score predictions against gold trees
    Eval {
        gold: PathBuf,
        predictions: PathBuf,
        #[arg(long, value_enum, default_value_t = PredictionFormat::Conllu)]
        format: PredictionFormat,
        /// Leave PUNCT words out of the scores
        #[arg(long)]
        exclude_punct: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        read: ReadArgs,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{0}")]
    Format(String),
    #[error("{0} invalid sentence(s)")]
    Invalid(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            _ => 2,
        }
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: display(path),
        source,
    }
}

fn open_input(path: &Path) -> Result<Box<dyn BufRead>, CliError> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path).map_err(io_err(path))?;
    Ok(Box::new(BufReader::new(file)))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    let mut text = String::new();
    open_input(path)?
        .read_to_string(&mut text)
        .map_err(io_err(path))?;
    Ok(text)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err(p))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn load_pack(args: &PackArgs) -> Result<RulePack, CliError> {
    match &args.rules {
        None => Ok(RulePack::korean()),
        Some(path) => {
            let text = read_text(path)?;
            load_rule_pack(&text).map_err(|e| CliError::Format(format!("{}: {e}", display(path))))
        }
    }
}

fn pool(jobs: usize) -> Result<Option<rayon::ThreadPool>, CliError> {
    if jobs == 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map(Some)
        .map_err(|e| CliError::Format(e.to_string()))
}

fn map_batch<T, F>(pool: Option<&rayon::ThreadPool>, batch: &[Sentence], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&Sentence) -> T + Sync + Send,
{
    match pool {
        Some(p) => p.install(|| batch.par_iter().map(&f).collect()),
        None => batch.iter().map(f).collect(),
    }
}

/// Streams sentences in batches, reporting warnings and, unless lenient,
/// stopping at the first sentence that fails validation.
fn for_each_batch(
    path: &Path,
    read: &ReadArgs,
    mut handle: impl FnMut(Vec<Sentence>) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let options = ParseOptions {
        lenient: read.lenient,
        strip_bom: read.strip_bom,
    };
    let mut reader = Reader::with_options(open_input(path)?, options);
    let mut batch = Vec::with_capacity(BATCH);
    loop {
        let next = reader.read_sentence().map_err(|source| CliError::Parse {
            path: display(path),
            source,
        })?;
        for w in reader.take_warnings() {
            eprintln!("{}: {w}", display(path));
        }
        let Some(sentence) = next else { break };
        if !read.lenient {
            let diagnostics = validate_sentence(&sentence);
            if !diagnostics.is_empty() {
                for d in &diagnostics {
                    eprintln!("{}: {d}", display(path));
                }
                return Err(CliError::Invalid(1));
            }
        }
        batch.push(sentence);
        if batch.len() == BATCH {
            handle(std::mem::take(&mut batch))?;
        }
    }
    if !batch.is_empty() {
        handle(batch)?;
    }
    Ok(())
}

fn read_all(path: &Path, read: &ReadArgs) -> Result<Vec<Sentence>, CliError> {
    let mut all = Vec::new();
    for_each_batch(path, read, |batch| {
        all.extend(batch);
        Ok(())
    })?;
    Ok(all)
}

fn validate_files(files: &[PathBuf], read: &ReadArgs) -> Result<(), CliError> {
    let mut readers = Vec::new();
    for path in files {
        readers.push((path, open_input(path)?));
    }
    let options = ParseOptions {
        lenient: read.lenient,
        strip_bom: read.strip_bom,
    };
    let mut invalid = 0;
    for (path, input) in readers {
        let mut reader = Reader::with_options(input, options);
        loop {
            let next = reader.read_sentence().map_err(|source| CliError::Parse {
                path: display(path),
                source,
            })?;
            for w in reader.take_warnings() {
                eprintln!("{}: {w}", display(path));
            }
            let Some(sentence) = next else { break };
            let diagnostics = validate_sentence(&sentence);
            for d in &diagnostics {
                eprintln!("{}: {d}", display(path));
            }
            invalid += usize::from(!diagnostics.is_empty());
        }
    }
    if invalid > 0 {
        return Err(CliError::Invalid(invalid));
    }
    Ok(())
}

fn write_err(e: io::Error) -> CliError {
    CliError::Io {
        path: "output".into(),
        source: e,
    }
}

fn enrich(run: &RunArgs, pack: &PackArgs) -> Result<(), CliError> {
    let pack = load_pack(pack)?;
    let pool = pool(run.jobs)?;
    let mut out = open_output(run.output.as_deref())?;
    for_each_batch(&run.input, &run.read, |batch| {
        for s in map_batch(pool.as_ref(), &batch, |s| features::enrich(s, &pack)) {
            write!(out, "{s}").map_err(write_err)?;
        }
        Ok(())
    })?;
    out.flush().map_err(write_err)
}

fn correct(
    run: &RunArgs,
    pack: &PackArgs,
    aux: Option<&Path>,
    log: Option<&Path>,
) -> Result<(), CliError> {
    let pack = load_pack(pack)?;
    let mut by_sentence: BTreeMap<String, Vec<AuxAnnotation>> = BTreeMap::new();
    if let Some(path) = aux {
        let entries = correct::parse_aux(&read_text(path)?)
            .map_err(|e| CliError::Format(format!("{}: {e}", display(path))))?;
        for a in entries {
            by_sentence.entry(a.sent_id.clone()).or_default().push(a);
        }
    }
    let pool = pool(run.jobs)?;
    let mut out = open_output(run.output.as_deref())?;
    let mut records = Vec::new();
    let mut total_tokens = 0;
    let mut seen = BTreeSet::new();
    for_each_batch(&run.input, &run.read, |batch| {
        let results = map_batch(pool.as_ref(), &batch, |s| {
            let aux = s
                .sent_id()
                .and_then(|id| by_sentence.get(id))
                .map_or(&[][..], Vec::as_slice);
            correct::correct_sentence(s, aux, &pack)
        });
        for (source, result) in batch.iter().zip(results) {
            let (sentence, recs) = result.map_err(|e| CliError::Format(e.to_string()))?;
            total_tokens += source.len();
            if let Some(id) = source.sent_id() {
                seen.insert(id.to_owned());
            }
            write!(out, "{sentence}").map_err(write_err)?;
            records.extend(recs);
        }
        Ok(())
    })?;
    out.flush().map_err(write_err)?;
    if let Some(missing) = by_sentence.keys().find(|id| !seen.contains(*id)) {
        return Err(CliError::Format(format!(
            "sidecar refers to sentence `{missing}`, which is not in the input"
        )));
    }
    if let Some(path) = log {
        std::fs::write(path, correct::write_record_log(&records, total_tokens))
            .map_err(io_err(path))?;
    }
    Ok(())
}

fn stats(
    log: &Path,
    total_tokens: Option<usize>,
    top: Option<usize>,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let (records, trailer) = correct::parse_record_log(&read_text(log)?)
        .map_err(|e| CliError::Format(format!("{}: {e}", display(log))))?;
    let total = total_tokens.or(trailer).ok_or_else(|| {
        CliError::Format(format!(
            "{}: no total_tokens trailer; pass --total-tokens",
            display(log)
        ))
    })?;
    let stats =
        correct::aggregate_stats(&records, total).map_err(|e| CliError::Format(e.to_string()))?;
    let mut out = open_output(output)?;
    out.write_all(stats.to_tsv(top).as_bytes())
        .map_err(write_err)?;
    out.flush().map_err(write_err)
}

fn convert_it(run: &RunArgs, instruction: &str) -> Result<(), CliError> {
    let pool = pool(run.jobs)?;
    let mut out = open_output(run.output.as_deref())?;
    for_each_batch(&run.input, &run.read, |batch| {
        let records = map_batch(pool.as_ref(), &batch, |s| {
            instruct::to_it_record(s, instruction)
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Format(e.to_string()))?;
        instruct::emit_jsonl(&records, &mut out).map_err(write_err)?;
        Ok(())
    })?;
    out.flush().map_err(write_err)
}

/// Splits generated text into per-sentence blocks at blank lines.
fn text_blocks(text: &str) -> Vec<Vec<instruct::ParsedRow>> {
    let mut blocks = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(instruct::from_it_output(&current));
                current.clear();
            }
        } else {
            current.push_str(line);
            current.push('\n');
        }
    }
    if !current.is_empty() {
        blocks.push(instruct::from_it_output(&current));
    }
    blocks
}

fn jsonl_blocks(path: &Path, text: &str) -> Result<Vec<Vec<instruct::ParsedRow>>, CliError> {
    let mut blocks = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |m: String| CliError::Format(format!("{}: line {}: {m}", display(path), i + 1));
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let output = value
            .get("output")
            .and_then(serde_json::Value::as_str)
            .ok_or_else(|| err("missing string field `output`".into()))?;
        blocks.push(instruct::from_it_output(output));
    }
    Ok(blocks)
}

fn evaluate(
    gold: &Path,
    predictions: &Path,
    format: PredictionFormat,
    exclude_punct: bool,
    output: Option<&Path>,
    read: &ReadArgs,
) -> Result<(), CliError> {
    // fail on a missing predictions file before reading gold
    let pred_input = open_input(predictions)?;
    drop(pred_input);
    let gold = read_all(gold, read)?;
    let predicted = match format {
        PredictionFormat::Conllu => {
            let lenient = ReadArgs {
                lenient: true,
                ..read.clone()
            };
            read_all(predictions, &lenient)?
                .iter()
                .map(eval::rows_of)
                .collect()
        }
        PredictionFormat::Text => text_blocks(&read_text(predictions)?),
        PredictionFormat::Jsonl => jsonl_blocks(predictions, &read_text(predictions)?)?,
    };
    let report = eval::score(&gold, &predicted, ScoreOptions { exclude_punct })
        .map_err(|e| CliError::Format(e.to_string()))?;
    let mut out = open_output(output)?;
    out.write_all(report.render().as_bytes())
        .map_err(write_err)?;
    out.flush().map_err(write_err)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { files, read } => validate_files(&files, &read),
        Command::Enrich { run, pack } => enrich(&run, &pack),
        Command::Correct {
            run,
            pack,
            aux,
            log,
        } => correct(&run, &pack, aux.as_deref(), log.as_deref()),
        Command::Stats {
            log,
            total_tokens,
            top,
            output,
        } => stats(&log, total_tokens, top, output.as_deref()),
        Command::ConvertIt { run, instruction } => convert_it(&run, &instruction),
        Command::Eval {
            gold,
            predictions,
            format,
            exclude_punct,
            output,
            read,
        } => evaluate(
            &gold,
            &predictions,
            format,
            exclude_punct,
            output.as_deref(),
            &read,
        ),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("unidive: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
