use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use retrans_core::metrics::{bleu_stats, corpus_gleu, corpus_wer};
use retrans_core::session::total_corrections;
use retrans_core::{
    align_corpus, evaluate_sessions, generate_partial, mix_rows, read_alignments, read_events,
    read_parallel, resegment, run_session, train_model1, BleuOptions, CommandTranslator, DictionaryTranslator,
    IdentityTranslator, PrefixMethod, ScriptedTranslator, SessionReport, TokenSentence, TrainingRow, Translator,
};
use thiserror::Error;

use crate::args::{
    AlignArgs, GenPartialArgs, Metric, MixArgs, ResegArgs, ScoreArgs, SimulateArgs, TranslatorSpec,
};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag combination; reported with the subcommand's usage line.
    #[error("{message}")]
    Usage {
        subcommand: &'static str,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{context}: {source}")]
    Data {
        context: String,
        source: retrans_core::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 1,
            CliError::Io { .. } | CliError::Data { .. } => 2,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn data_err(context: impl AsRef<Path>) -> impl FnOnce(retrans_core::Error) -> CliError {
    let context = context.as_ref().display().to_string();
    move |source| CliError::Data { context, source }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn read_lines(path: &Path) -> CliResult<Vec<String>> {
    Ok(read_text(path)?.lines().map(str::to_owned).collect())
}

fn write_text(path: &Path, text: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_owned(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn join_lines<I, S>(lines: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = String::new();
    for l in lines {
        out.push_str(l.as_ref());
        out.push('\n');
    }
    out
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn read_corpus(src: &Path, tgt: &Path) -> CliResult<retrans_core::ParallelCorpus> {
    let s = read_lines(src)?;
    let t = read_lines(tgt)?;
    let context = format!("{} / {}", src.display(), tgt.display());
    read_parallel(&s, &t).map_err(data_err(context))
}

pub fn align(args: &AlignArgs) -> CliResult {
    let corpus = read_corpus(&args.src, &args.tgt)?;
    let table = train_model1(&corpus, args.iterations, args.epsilon).map_err(data_err(&args.src))?;
    let alignments = align_corpus(&table, &corpus);
    write_text(&args.out, &join_lines(alignments.iter().map(|a| a.to_pharaoh())))?;
    if let Some(path) = &args.table_out {
        write_text(path, &table.to_tsv())?;
    }
    log::info!("aligned {} sentence pairs", corpus.len());
    Ok(())
}

pub fn gen_partial(args: &GenPartialArgs) -> CliResult {
    let method = PrefixMethod::from(args.method);
    if method == PrefixMethod::Alignment && args.alignments.is_none() {
        return Err(CliError::Usage {
            subcommand: "gen-partial",
            message: "--method alignment requires --alignments FILE".into(),
        });
    }
    let corpus = read_corpus(&args.src, &args.tgt)?;
    let alignments = match &args.alignments {
        Some(path) if method == PrefixMethod::Alignment => {
            Some(read_alignments(&read_lines(path)?, &corpus).map_err(data_err(path))?)
        }
        _ => None,
    };
    let min_i = usize::try_from(args.min_i).unwrap_or(usize::MAX);
    let partial = generate_partial(&corpus, method, alignments.as_deref(), min_i)
        .map_err(data_err(args.alignments.as_deref().unwrap_or(&args.src)))?;
    write_text(
        &with_suffix(&args.out_prefix, ".src"),
        &join_lines(partial.iter().map(|p| p.source_prefix.detokenize())),
    )?;
    write_text(
        &with_suffix(&args.out_prefix, ".tgt"),
        &join_lines(partial.iter().map(|p| p.target_prefix.detokenize())),
    )?;
    write_text(&with_suffix(&args.out_prefix, ".tsv"), &partial.manifest_tsv())?;
    log::info!("wrote {} partial pairs", partial.len());
    Ok(())
}

/// Partial corpora may have blank target lines; sources must be non-empty.
fn read_partial_rows(src: &Path, tgt: &Path) -> CliResult<Vec<TrainingRow>> {
    let s = read_lines(src)?;
    let t = read_lines(tgt)?;
    if s.len() != t.len() {
        return Err(data_err(format!("{} / {}", src.display(), tgt.display()))(
            retrans_core::Error::CorpusMismatch {
                src_count: s.len(),
                tgt_count: t.len(),
            },
        ));
    }
    s.iter()
        .zip(&t)
        .enumerate()
        .map(|(n, (a, b))| {
            let source = retrans_core::tokenize(a).map_err(|e| data_err(src)(e.at_line(n + 1)))?;
            Ok(TrainingRow::partial(source, TokenSentence::from_line(b)))
        })
        .collect()
}

pub fn mix_cmd(args: &MixArgs, seed: u64) -> CliResult {
    let full = read_corpus(&args.full_src, &args.full_tgt)?;
    let partial = read_partial_rows(&args.partial_src, &args.partial_tgt)?;
    let full_rows = full
        .iter()
        .map(|p| TrainingRow::full(p.source.clone(), p.target.clone()))
        .collect();
    let (rows, manifest) = mix_rows(full_rows, partial, seed);
    write_text(
        &with_suffix(&args.out_prefix, ".src"),
        &join_lines(rows.iter().map(|r| r.source.detokenize())),
    )?;
    write_text(
        &with_suffix(&args.out_prefix, ".tgt"),
        &join_lines(rows.iter().map(|r| r.target.detokenize())),
    )?;
    write_text(&with_suffix(&args.out_prefix, ".manifest"), &manifest.to_text())?;
    Ok(())
}

pub fn score(args: &ScoreArgs) -> CliResult<String> {
    let hyp_lines = read_lines(&args.hyp)?;
    let ref_lines = read_lines(&args.reference)?;
    let context = format!("{} / {}", args.hyp.display(), args.reference.display());
    if hyp_lines.len() != ref_lines.len() {
        return Err(CliError::Data {
            context,
            source: retrans_core::Error::InvalidArgument(format!(
                "{} hypothesis lines vs {} reference lines",
                hyp_lines.len(),
                ref_lines.len()
            )),
        });
    }
    let hyps: Vec<TokenSentence> = hyp_lines.iter().map(|l| TokenSentence::from_line(l)).collect();
    let refs: Vec<TokenSentence> = ref_lines.iter().map(|l| TokenSentence::from_line(l)).collect();
    let out = match args.metric {
        Metric::Bleu => {
            let stats = bleu_stats(&hyps, &refs).map_err(data_err(&context))?;
            let b = stats.score(BleuOptions { smooth: args.smooth });
            format!("bleu\t{b:.4}\nbleu100\t{:.4}\n", b * 100.0)
        }
        Metric::Gleu => {
            let g = corpus_gleu(&hyps, &refs).map_err(data_err(&context))?;
            format!("gleu\t{g:.4}\n")
        }
        Metric::Wer => {
            let (_, rate) = corpus_wer(&hyps, &refs).map_err(data_err(&context))?;
            format!("wer\t{rate:.4}\n")
        }
    };
    Ok(out)
}

pub fn reseg(args: &ResegArgs) -> CliResult<String> {
    let stream = TokenSentence::from_line(&read_text(&args.hyp_stream)?);
    let refs: Vec<TokenSentence> = read_lines(&args.refs)?
        .iter()
        .map(|l| TokenSentence::from_line(l))
        .collect();
    let result = resegment(&stream, &refs).map_err(data_err(&args.refs))?;
    write_text(&args.out, &join_lines(result.segments.iter().map(|s| s.detokenize())))?;
    Ok(format!("reseg_edits\t{}\n", result.edits))
}

fn build_translator(spec: &TranslatorSpec, timeout: Duration) -> CliResult<Box<dyn Translator>> {
    Ok(match spec {
        TranslatorSpec::Identity => Box::new(IdentityTranslator),
        TranslatorSpec::Dict(path) => {
            Box::new(DictionaryTranslator::from_tsv(&read_text(path)?).map_err(data_err(path))?)
        }
        TranslatorSpec::Script(path) => {
            Box::new(ScriptedTranslator::from_tsv(&read_text(path)?).map_err(data_err(path))?)
        }
        TranslatorSpec::Cmd(cmd) => Box::new(CommandTranslator::spawn(cmd, timeout).map_err(|source| {
            CliError::Io {
                path: PathBuf::from(cmd),
                source,
            }
        })?),
    })
}

pub fn simulate(args: &SimulateArgs) -> CliResult<Option<String>> {
    let events = read_events(&read_text(&args.events)?).map_err(data_err(&args.events))?;
    let translator = build_translator(&args.translator, Duration::from_secs(args.timeout_secs))?;
    let logs = run_session(&events, &translator).map_err(data_err(&args.events))?;
    let report = match &args.refs {
        Some(path) => {
            let refs: Vec<TokenSentence> = read_lines(path)?
                .iter()
                .map(|l| TokenSentence::from_line(l))
                .collect();
            evaluate_sessions(&logs, &refs).map_err(data_err(path))?
        }
        None => SessionReport {
            corrections: total_corrections(&logs),
            bleu: None,
            reseg_edits: None,
        },
    };
    if let Some(path) = &args.log_out {
        let text: String = logs.iter().map(|l| l.to_jsonl()).collect();
        write_text(path, &text)?;
    }
    if let Some(path) = &args.final_out {
        write_text(path, &join_lines(logs.iter().map(|l| l.final_translation().detokenize())))?;
    }
    let text = report.to_text();
    match &args.report_out {
        Some(path) => {
            write_text(path, &text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}
