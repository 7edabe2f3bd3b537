//! The `allusio` command line: `stats`, `search` and `explain`.
//!
//! Exit codes: 0 on success (including searches with no hits), 2 for usage
//! and input errors, 1 for internal failures. Results go to stdout and all
//! diagnostics to stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::corpus::{load_corpus, read_utf8, Corpus, NormalizationOptions};
use crate::error::Error;
use crate::lexicon::{compute_frequencies, load_lexicon, Lexicon, LexiconPaths};
use crate::scoring::{density_points, Query, ScoreBreakdown};
use crate::search::{score_document_window, search, RankedResult, SearchParams};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ALLUSIO_THREADS";

#[derive(Debug, Parser)]
#[command(name = "allusio", version, about = "Find and rank quotations and allusions in a text corpus")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Summarize a corpus and lexicon
    Stats(StatsArgs),
    /// Rank corpus windows by how closely they quote the query
    Search(SearchArgs),
    /// Show the score arithmetic for one window
    Explain(ExplainArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Corpus directory (every *.txt file below it is a document)
    corpus: PathBuf,
    /// Directory holding lemmas.tsv and optionally stems.tsv, synonyms.tsv, freq.tsv
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Remove diacritics before matching
    #[arg(long)]
    strip_diacritics: bool,
    /// Match case-sensitively
    #[arg(long)]
    no_fold_case: bool,
}

impl InputArgs {
    fn options(&self) -> NormalizationOptions {
        NormalizationOptions {
            fold_case: !self.no_fold_case,
            strip_diacritics: self.strip_diacritics,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
struct QueryArgs {
    /// Source passage
    #[arg(long)]
    query: Option<String>,
    /// File containing the source passage
    #[arg(long)]
    query_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// Window size in tokens [default: max(30, 3 x query length)]
    #[arg(long)]
    window: Option<usize>,
    /// Window stride in tokens [default: window / 2]
    #[arg(long)]
    stride: Option<usize>,
    /// Maximum number of results
    #[arg(long)]
    top: Option<usize>,
    /// Drop results scoring below this
    #[arg(long)]
    min_score: Option<f64>,
}

impl ParamArgs {
    fn params(&self, query_len: usize) -> SearchParams {
        let mut p = SearchParams::for_query(query_len);
        if let Some(w) = self.window {
            p.window_size = w;
            p.stride = (w / 2).max(1);
        }
        if let Some(s) = self.stride {
            p.stride = s;
        }
        if let Some(k) = self.top {
            p.top_k = k;
        }
        if let Some(m) = self.min_score {
            p.min_score = m;
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Human,
    Json,
    Tsv,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of most frequent lemmas to list
    #[arg(long, default_value_t = 10)]
    top: usize,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    query: QueryArgs,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct ExplainArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    query: QueryArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Document id as printed by `search`
    #[arg(long)]
    doc: String,
    /// Window start position as printed by `search`
    #[arg(long)]
    start: usize,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Internal(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Internal(format!("write failed: {e}"))
    }
}

/// Parse `args` (program name first) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };

    let mut buffer = Vec::new();
    let result = match threads_from_env() {
        Ok(None) => dispatch(&cli.command, &mut buffer),
        Ok(Some(n)) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command, &mut buffer)),
            Err(e) => Err(Failure::Internal(format!("cannot start worker threads: {e}"))),
        },
        Err(f) => Err(f),
    };
    let result = result.and_then(|()| out.write_all(&buffer).and_then(|()| out.flush()).map_err(Failure::from));
    match result {
        Ok(()) => 0,
        Err(f) => {
            let (Failure::Input(msg) | Failure::Internal(msg)) = &f;
            let _ = writeln!(err, "allusio: {msg}");
            f.code()
        }
    }
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Input(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Stats(a) => cmd_stats(a, out),
        Command::Search(a) => cmd_search(a, out),
        Command::Explain(a) => cmd_explain(a, out),
    }
}

struct Inputs {
    corpus: Corpus,
    lexicon: Lexicon,
    options: NormalizationOptions,
    frequencies_from_file: bool,
}

fn load_inputs(args: &InputArgs) -> Result<Inputs, Failure> {
    let options = args.options();
    if !args.corpus.is_dir() {
        return Err(Failure::Input(format!("corpus directory {} not found", args.corpus.display())));
    }
    let corpus = load_corpus(&args.corpus, &options)?;
    let (mut lexicon, frequencies_from_file) = match &args.lexicon {
        Some(dir) => {
            let paths = LexiconPaths::in_dir(dir);
            (load_lexicon(&paths, &options)?, paths.frequencies.is_some())
        }
        None => (Lexicon::new(), false),
    };
    if !frequencies_from_file {
        let table = compute_frequencies(&corpus, &lexicon);
        lexicon.set_frequencies(table);
    }
    Ok(Inputs {
        corpus,
        lexicon,
        options,
        frequencies_from_file,
    })
}

fn load_query(args: &QueryArgs, options: &NormalizationOptions) -> Result<Query, Failure> {
    let text = match (&args.query, &args.query_file) {
        (Some(_), Some(_)) => return Err(Failure::Input("give either --query or --query-file, not both".into())),
        (None, None) => return Err(Failure::Input("a query is required (--query or --query-file)".into())),
        (Some(q), None) => q.clone(),
        (None, Some(path)) => read_utf8(path)?,
    };
    Ok(Query::parse(&text, options)?)
}

fn cmd_stats(args: &StatsArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let inputs = load_inputs(&args.input)?;
    let lex = &inputs.lexicon;
    writeln!(out, "documents: {}", inputs.corpus.documents.len())?;
    writeln!(out, "tokens: {}", inputs.corpus.total_tokens)?;
    writeln!(out, "lemma entries: {}", lex.lemma_count())?;
    writeln!(out, "stem entries: {}", lex.stem_count())?;
    writeln!(out, "synonym sets: {}", lex.synonym_set_count())?;
    writeln!(
        out,
        "frequency entries: {} ({})",
        lex.frequency_count(),
        if inputs.frequencies_from_file { "from freq.tsv" } else { "counted in corpus" }
    )?;
    writeln!(out, "most frequent lemmas:")?;
    for (i, (lemma, count)) in lex.most_frequent(args.top).into_iter().enumerate() {
        writeln!(out, "{:>4}. {}\t{}", i + 1, lemma, count)?;
    }
    Ok(())
}

/// Scores are shown with four decimals; exact ties round half to even.
pub fn format_score(x: f64) -> String {
    format!("{x:.4}")
}

#[derive(Serialize)]
struct JsonResult<'a> {
    rank: usize,
    score: f64,
    #[serde(flatten)]
    result: &'a RankedResult,
}

fn cmd_search(args: &SearchArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let inputs = load_inputs(&args.input)?;
    let query = load_query(&args.query, &inputs.options)?;
    let params = args.params.params(query.len());
    let results = search(&inputs.corpus, &query, &inputs.lexicon, &params)?;

    match args.format {
        OutputFormat::Human => write_human(&results, out)?,
        OutputFormat::Tsv => {
            writeln!(out, "rank\tscore\tdoc\tstart\tend\texcerpt")?;
            for (i, r) in results.iter().enumerate() {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    i + 1,
                    format_score(r.breakdown.combined),
                    r.document_id,
                    r.window_start,
                    r.window_end,
                    r.excerpt
                )?;
            }
        }
        OutputFormat::Json => {
            let rows: Vec<JsonResult> = results
                .iter()
                .enumerate()
                .map(|(i, result)| JsonResult {
                    rank: i + 1,
                    score: format_score(result.breakdown.combined).parse().unwrap_or(result.breakdown.combined),
                    result,
                })
                .collect();
            let text = serde_json::to_string_pretty(&rows).map_err(|e| Failure::Internal(e.to_string()))?;
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

fn marked_excerpt(r: &RankedResult) -> String {
    let matched = r.matched_positions();
    r.excerpt
        .split(' ')
        .enumerate()
        .map(|(i, w)| {
            if matched.binary_search(&(r.window_start + i)).is_ok() {
                format!("[{w}]")
            } else {
                w.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn citation(r: &RankedResult) -> String {
    match (r.author.is_empty(), r.work.is_empty()) {
        (true, true) => "-".to_string(),
        (false, true) => r.author.clone(),
        (true, false) => r.work.clone(),
        (false, false) => format!("{}, {}", r.author, r.work),
    }
}

fn write_human(results: &[RankedResult], out: &mut dyn Write) -> io::Result<()> {
    if results.is_empty() {
        return writeln!(out, "no results");
    }
    for (i, r) in results.iter().enumerate() {
        writeln!(
            out,
            "#{} score {}  {}  {} lines {}-{} tokens {}-{}",
            i + 1,
            format_score(r.breakdown.combined),
            citation(r),
            r.document_id,
            r.first_line,
            r.last_line,
            r.window_start,
            r.window_end
        )?;
        writeln!(out, "    {}", marked_excerpt(r))?;
    }
    Ok(())
}

/// `x` with at least `min_decimals` decimals, widened to the shortest
/// round-trip representation when that many digits would not be exact.
fn exact_number(x: f64, min_decimals: usize) -> String {
    let short = format!("{x:.min_decimals$}");
    if short.parse::<f64>().ok() == Some(x) {
        short
    } else {
        format!("{x}")
    }
}

/// The combined-score formula with this breakdown's values filled in.
pub fn arithmetic_line(b: &ScoreBreakdown) -> String {
    format!(
        "({} + {} + {})/3 + 2\u{d7}{} + {} = {}",
        b.quantity,
        b.quality_sum,
        exact_number(b.rarity_sum, 0),
        exact_number(b.density_total, 4),
        exact_number(b.order_total, 4),
        format_score(b.combined)
    )
}

fn cmd_explain(args: &ExplainArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let inputs = load_inputs(&args.input)?;
    let query = load_query(&args.query, &inputs.options)?;
    let params = args.params.params(query.len());
    params.validate()?;
    let doc = inputs
        .corpus
        .document(&args.doc)
        .ok_or_else(|| Failure::Input(format!("no document with id {:?}", args.doc)))?;
    let result = score_document_window(doc, args.start, &query, &inputs.lexicon, &params).ok_or_else(|| {
        Failure::Input(format!(
            "{} is not a window start in {:?} ({} tokens, stride {})",
            args.start,
            args.doc,
            doc.len(),
            params.stride
        ))
    })?;

    let b = &result.breakdown;
    writeln!(
        out,
        "{} tokens {}-{} lines {}-{}  {}",
        result.document_id,
        result.window_start,
        result.window_end,
        result.first_line,
        result.last_line,
        citation(&result)
    )?;
    let Some(core) = b.core else {
        writeln!(out, "no matches; score 0")?;
        return Ok(());
    };
    writeln!(out, "core offset: {}", core.offset)?;

    let density = density_points(&b.matches);
    let mut table = String::new();
    let _ = writeln!(table, "source\ttarget\ttier\trarity\tdensity\torder");
    for (m, d) in b.matches.matches.iter().zip(density) {
        let source = &query.tokens()[m.source_index].surface;
        let target = &doc.tokens[result.window_start + m.target_index].surface;
        let order = 1.0 / (core.stray(m) as f64 + 1.0);
        let _ = writeln!(
            table,
            "{source}\t{target}\t{}\t{}\t{}\t{}",
            m.tier.points(),
            format_score(m.rarity),
            format_score(d),
            format_score(order)
        );
    }
    write!(out, "{table}")?;
    writeln!(out, "{}", arithmetic_line(b))?;
    Ok(())
}
