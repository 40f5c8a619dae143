//! Command-line front end: `subalign align | eval ... | gen`.
//!
//! Exit codes: 0 on success, 1 on I/O or validation errors, 2 on usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::align::{align_timings, AlignInput, AlignOptions, Method, Vocab};
use crate::error::{Error, Result};
use crate::eval::{
    block_similarities, conformity, file_provider, kappa_report, remote_provider, shift_stats,
    EmbeddingProvider, DEFAULT_CPL, DEFAULT_CPS, DEFAULT_SHIFT_THRESHOLD_MS,
};
use crate::signal::{
    format_attention, read_matrix, BlockTimings, FrameTimeMap, DEFAULT_CLIP_EPS,
    DEFAULT_MEDIAN_WIDTH,
};
use crate::subtitle::{assemble_document, parse_srt, tokens_from_tagged_text, write_srt, SubtitleDocument, TaggedTokens};
use crate::synth::{gen_block_diag, SyntheticAlignment};

pub const PROVIDER_URL_ENV: &str = "SUBALIGN_PROVIDER_URL";

#[derive(Debug, Parser)]
#[command(name = "subalign", version, about = "Subtitle timestamp alignment and timing evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate block timestamps for tagged subtitle text.
    Align(AlignArgs),
    /// Score subtitle files.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Write a synthetic block-diagonal attention fixture.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["attention", "posterior"]))]
pub struct AlignArgs {
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Tagged subtitle text (`<eol>` / `<eob>` markers).
    #[arg(long)]
    pub tokens: PathBuf,
    /// Use only this line (1-based) of the tokens file.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub line: Option<u64>,
    /// Cross-attention matrix (dtw, sbaam).
    #[arg(long)]
    pub attention: Option<PathBuf>,
    /// CTC log-posteriors (ctcseg).
    #[arg(long)]
    pub posterior: Option<PathBuf>,
    /// `label_id<TAB>token` vocabulary (ctcseg).
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Override the input's frame timing with a uniform frame length.
    #[arg(long, value_parser = positive_f64, allow_negative_numbers = true)]
    pub frame_ms: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_CLIP_EPS, value_parser = positive_f64, allow_negative_numbers = true)]
    pub eps: f64,
    #[arg(long, default_value_t = DEFAULT_MEDIAN_WIDTH, value_parser = odd_width)]
    pub median_width: usize,
    /// Stretch the final block to the last frame.
    #[arg(long)]
    pub extend_last: bool,
    /// Start each SBAAM block after the previous `<eob>` row.
    #[arg(long)]
    pub skip_eob_row: bool,
    /// Output SRT, or `-` for per-block TSV on standard output.
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
    #[arg(short, long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Characters-per-line and characters-per-second conformity.
    Conformity(ConformityArgs),
    /// Timestamp shifts between a hypothesis and its post-edited reference.
    Shift(ShiftArgs),
    /// Block-level text/audio embedding similarity.
    Subsonar(SubsonarArgs),
    /// Cohen's kappa between two binary annotations.
    Kappa(KappaArgs),
}

#[derive(Debug, Args)]
pub struct ConformityArgs {
    pub srt: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CPL)]
    pub cpl: usize,
    #[arg(long, default_value_t = DEFAULT_CPS, value_parser = positive_f64, allow_negative_numbers = true)]
    pub cps: f64,
    #[arg(short, long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct ShiftArgs {
    #[arg(long)]
    pub hyp: PathBuf,
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Shifts up to this magnitude do not count as edits (120 ms is the
    /// perception threshold).
    #[arg(long, default_value_t = DEFAULT_SHIFT_THRESHOLD_MS)]
    pub threshold_ms: u64,
    #[arg(short, long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct SubsonarArgs {
    /// Subtitle file(s); repeat to score several.
    #[arg(long, required = true)]
    pub srt: Vec<PathBuf>,
    /// Audio reference per subtitle file, or one shared by all.
    #[arg(long, required = true)]
    pub audio: Vec<String>,
    #[arg(long)]
    pub lang: String,
    /// Precomputed embeddings (JSON lines).
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Embedding service base URL.
    #[arg(long, env = PROVIDER_URL_ENV)]
    pub provider_url: Option<String>,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 30.0, value_parser = positive_f64, allow_negative_numbers = true)]
    pub timeout: f64,
    #[arg(short, long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct KappaArgs {
    /// Labels of the first annotator (1/0, true/false, yes/no).
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(short, long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub blocks: usize,
    #[arg(long)]
    pub frames: usize,
    /// Gaussian noise std added to the attention.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {s}"))
    }
}

fn odd_width(s: &str) -> std::result::Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("{s:?} is not a positive integer"))?;
    if v % 2 == 1 {
        Ok(v)
    } else {
        Err(format!("must be odd, got {v}"))
    }
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Align(a) => cmd_align(&a),
        Command::Eval(EvalCommand::Conformity(a)) => cmd_conformity(&a),
        Command::Eval(EvalCommand::Shift(a)) => cmd_shift(&a),
        Command::Eval(EvalCommand::Subsonar(a)) => cmd_subsonar(&a),
        Command::Eval(EvalCommand::Kappa(a)) => cmd_kappa(&a),
        Command::Gen(a) => cmd_gen(&a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("subalign: usage error: {msg}");
            2
        }
        Err(Failure::Run(e)) => {
            eprintln!("subalign: error: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_srt(path: &Path) -> Result<SubtitleDocument> {
    parse_srt(&read_text(path)?)
}

fn read_tokens(path: &Path, line: Option<u64>) -> Result<TaggedTokens> {
    let text = read_text(path)?;
    match line {
        None => tokens_from_tagged_text(&text),
        Some(n) => {
            let selected = text.lines().nth(n as usize - 1).ok_or_else(|| {
                Error::Tagged(format!("{} has no line {n}", path.display()))
            })?;
            tokens_from_tagged_text(selected)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn emit_json(report: &Value) {
    // serde_json maps are key-sorted, which keeps reports diff-stable
    println!("{report}");
}

fn cmd_align(args: &AlignArgs) -> CmdResult {
    let input = match (args.method.uses_posterior(), &args.attention, &args.posterior) {
        (false, Some(path), _) => {
            let mut a = read_matrix(path)?.into_attention()?;
            if let Some(ms) = args.frame_ms {
                a = a.with_frame_map(FrameTimeMap::uniform(ms)?)?;
            }
            AlignInput::Attention(a)
        }
        (true, _, Some(path)) => {
            let vocab_path = args.vocab.as_ref().ok_or_else(|| {
                Failure::Usage("--method ctcseg requires --vocab".into())
            })?;
            let mut posterior = read_matrix(path)?.into_posterior()?;
            if let Some(ms) = args.frame_ms {
                posterior = posterior.with_frame_map(FrameTimeMap::uniform(ms)?)?;
            }
            AlignInput::Posterior {
                posterior,
                vocab: Vocab::read(vocab_path)?,
            }
        }
        (true, _, None) => {
            return Err(Failure::Usage("--method ctcseg requires --posterior and --vocab".into()))
        }
        (false, None, _) => {
            return Err(Failure::Usage(format!("--method {} requires --attention", args.method)))
        }
    };
    let tokens = read_tokens(&args.tokens, args.line)?;
    let opts = AlignOptions {
        median_width: args.median_width,
        eps: args.eps,
        skip_eob_row: args.skip_eob_row,
        extend_last: args.extend_last,
        ..AlignOptions::default()
    };
    let timings = align_timings(args.method, &input, &tokens, &opts)?;
    let doc = assemble_document(&tokens, &timings)?;

    if args.output.as_os_str() == "-" {
        let tsv = timings_tsv(&timings, &doc);
        std::io::stdout()
            .write_all(tsv.as_bytes())
            .map_err(|e| Error::io("<stdout>", e))?;
    } else {
        write_file(&args.output, &write_srt(&doc))?;
    }
    if !args.quiet {
        eprintln!("{} blocks aligned with {}", doc.len(), args.method);
        for b in doc.blocks() {
            eprintln!("{:>4}  {} --> {}  {}", b.index(), b.start(), b.end(), b.text());
        }
    }
    Ok(())
}

/// `index, start_frame, end_frame, start_ms, end_ms` per block.
pub fn timings_tsv(timings: &BlockTimings, doc: &SubtitleDocument) -> String {
    let mut out = String::from("index\tstart_frame\tend_frame\tstart_ms\tend_ms\n");
    for (&(s, e), b) in timings.intervals().iter().zip(doc.blocks()) {
        let _ = writeln!(out, "{}\t{s}\t{e}\t{}\t{}", b.index(), b.start().ms(), b.end().ms());
    }
    out
}

fn cmd_conformity(args: &ConformityArgs) -> CmdResult {
    let doc = read_srt(&args.srt)?;
    let r = conformity(&doc, args.cpl, args.cps)?;
    emit_json(&json!({
        "blocks": r.blocks.len(),
        "cpl_conform_pct": r.cpl_conform_pct,
        "cps_conform_pct": r.cps_conform_pct,
        "cpl_limit": r.cpl_limit,
        "cps_limit": r.cps_limit,
    }));
    if !args.quiet {
        eprintln!("block  max_cpl     cps  cpl_ok  cps_ok");
        for b in &r.blocks {
            eprintln!(
                "{:>5}  {:>7}  {:>6.2}  {:>6}  {:>6}",
                b.index, b.max_line_chars, b.cps, b.cpl_ok, b.cps_ok
            );
        }
        eprintln!(
            "CPL <= {}: {:.1}%   CPS <= {}: {:.1}%",
            r.cpl_limit, r.cpl_conform_pct, r.cps_limit, r.cps_conform_pct
        );
    }
    Ok(())
}

fn cmd_shift(args: &ShiftArgs) -> CmdResult {
    let hyp = read_srt(&args.hyp)?;
    let reference = read_srt(&args.reference)?;
    let r = shift_stats(&hyp, &reference, args.threshold_ms)?;
    emit_json(&json!({
        "blocks": r.start_shifts_ms.len(),
        "edited_avg_pct": r.edited_avg_pct,
        "edited_end_pct": r.edited_end_pct,
        "edited_start_pct": r.edited_start_pct,
        "mean_abs_shift_ms": r.mean_abs_shift_ms,
        "std_abs_shift_ms": r.std_abs_shift_ms,
        "threshold_ms": r.threshold_ms,
    }));
    if !args.quiet {
        eprintln!("block  start_shift_ms  end_shift_ms");
        for (i, (s, e)) in r.start_shifts_ms.iter().zip(&r.end_shifts_ms).enumerate() {
            eprintln!("{:>5}  {s:>14}  {e:>12}", i + 1);
        }
        eprintln!(
            "edited (> {} ms): start {:.1}%  end {:.1}%  avg {:.1}%",
            r.threshold_ms, r.edited_start_pct, r.edited_end_pct, r.edited_avg_pct
        );
    }
    Ok(())
}

fn cmd_subsonar(args: &SubsonarArgs) -> CmdResult {
    if args.audio.len() != 1 && args.audio.len() != args.srt.len() {
        return Err(Failure::Usage(format!(
            "give one --audio for all files or one per --srt ({} files, {} audio references)",
            args.srt.len(),
            args.audio.len()
        )));
    }
    let provider: Box<dyn EmbeddingProvider> = match (&args.embeddings, &args.provider_url) {
        (Some(path), _) => Box::new(file_provider(path)?),
        (None, Some(url)) => Box::new(remote_provider(url, args.timeout).map_err(Error::from)?),
        (None, None) => {
            return Err(Failure::Usage(format!(
                "one of --embeddings or --provider-url (or {PROVIDER_URL_ENV}) is required"
            )))
        }
    };

    let mut files = Vec::new();
    let mut pooled = Vec::new();
    for (i, path) in args.srt.iter().enumerate() {
        let audio = &args.audio[if args.audio.len() == 1 { 0 } else { i }];
        let doc = read_srt(path)?;
        let sims = block_similarities(&doc, audio, &args.lang, provider.as_ref())?;
        let score = sims.iter().sum::<f64>() / sims.len() as f64;
        if !args.quiet {
            eprintln!("{}: {score:.4} over {} blocks", path.display(), sims.len());
        }
        files.push(json!({
            "audio": audio,
            "blocks": sims.len(),
            "path": path.display().to_string(),
            "score": score,
        }));
        pooled.extend(sims);
    }
    let per_file: Vec<f64> = files.iter().map(|f| f["score"].as_f64().unwrap_or(0.0)).collect();
    emit_json(&json!({
        "blocks": pooled.len(),
        "files": files,
        "lang": args.lang,
        "mean_per_file": per_file.iter().sum::<f64>() / per_file.len() as f64,
        "pooled_mean": pooled.iter().sum::<f64>() / pooled.len() as f64,
    }));
    Ok(())
}

/// Reads whitespace-separated binary labels.
pub fn parse_labels(text: &str) -> Result<Vec<bool>> {
    text.split_whitespace()
        .enumerate()
        .map(|(i, t)| match t.to_ascii_lowercase().as_str() {
            "1" | "true" | "yes" | "y" => Ok(true),
            "0" | "false" | "no" | "n" => Ok(false),
            _ => Err(Error::Eval(format!("label {} ({t:?}) is not binary", i + 1))),
        })
        .collect()
}

fn cmd_kappa(args: &KappaArgs) -> CmdResult {
    let a = parse_labels(&read_text(&args.a)?)?;
    let b = parse_labels(&read_text(&args.b)?)?;
    let r = kappa_report(&a, &b)?;
    emit_json(&serde_json::to_value(r).map_err(|e| Error::Eval(e.to_string()))?);
    if !args.quiet {
        eprintln!(
            "kappa {:.4}  (observed {:.4}, chance {:.4}, n = {})",
            r.kappa, r.observed_agreement, r.expected_agreement, r.n
        );
    }
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> CmdResult {
    let spec = SyntheticAlignment::random(args.blocks, args.frames, args.noise, args.seed)?;
    let (attention, tokens) = gen_block_diag(&spec)?;
    let dir = &args.output;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(&dir.join("attention.tsv"), &format_attention(&attention))?;
    write_file(&dir.join("tokens.txt"), &(tokens.to_tagged_text() + "\n"))?;
    let spec_json = serde_json::to_string_pretty(&spec).map_err(|e| Error::Synth(e.to_string()))?;
    write_file(&dir.join("spec.json"), &(spec_json + "\n"))?;
    Ok(())
}
