use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use retrans_core::PrefixMethod;

#[derive(Debug, Parser)]
#[command(name = "retrans", version, about = "Partial-sentence corpora and retranslation stability metrics")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 17)]
    pub seed: u64,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train IBM Model 1 and write one Pharaoh alignment line per pair.
    Align(AlignArgs),
    /// Generate prefix pairs for every source prefix of every sentence.
    GenPartial(GenPartialArgs),
    /// Join a full corpus with an equally sized sample of a partial corpus.
    Mix(MixArgs),
    /// Score hypotheses against references.
    Score(ScoreArgs),
    /// Re-split a hypothesis stream to match reference segments.
    Reseg(ResegArgs),
    /// Replay source update events through a translator.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub iterations: usize,
    /// Probability floor for unseen word pairs.
    #[arg(long, default_value_t = retrans_core::aligner::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also dump the translation table as TSV.
    #[arg(long)]
    pub table_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ratio,
    Alignment,
}

impl From<MethodArg> for PrefixMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ratio => PrefixMethod::Ratio,
            MethodArg::Alignment => PrefixMethod::Alignment,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenPartialArgs {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Pharaoh alignment file, required by the alignment method.
    #[arg(long)]
    pub alignments: Option<PathBuf>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub min_i: u64,
    /// Writes PREFIX.src, PREFIX.tgt and the PREFIX.tsv manifest.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Args)]
pub struct MixArgs {
    #[arg(long)]
    pub full_src: PathBuf,
    #[arg(long)]
    pub full_tgt: PathBuf,
    #[arg(long)]
    pub partial_src: PathBuf,
    #[arg(long)]
    pub partial_tgt: PathBuf,
    /// Writes PREFIX.src, PREFIX.tgt and PREFIX.manifest.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Bleu,
    Gleu,
    Wer,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub hyp: PathBuf,
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long, value_enum, default_value_t = Metric::Bleu)]
    pub metric: Metric,
    /// Add-one smoothing for BLEU.
    #[arg(long)]
    pub smooth: bool,
}

#[derive(Debug, Args)]
pub struct ResegArgs {
    /// Hypothesis text; all lines are joined into one stream.
    #[arg(long)]
    pub hyp_stream: PathBuf,
    /// One reference segment per line.
    #[arg(long)]
    pub refs: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslatorSpec {
    Identity,
    Dict(PathBuf),
    Script(PathBuf),
    Cmd(String),
}

impl FromStr for TranslatorSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "identity" {
            return Ok(TranslatorSpec::Identity);
        }
        match s.split_once(':') {
            Some(("dict", p)) if !p.is_empty() => Ok(TranslatorSpec::Dict(p.into())),
            Some(("script", p)) if !p.is_empty() => Ok(TranslatorSpec::Script(p.into())),
            Some(("cmd", c)) if !c.trim().is_empty() => Ok(TranslatorSpec::Cmd(c.into())),
            _ => Err(format!(
                "`{s}` is not one of identity, dict:FILE, script:FILE, cmd:COMMAND"
            )),
        }
    }
}

impl fmt::Display for TranslatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranslatorSpec::Identity => f.write_str("identity"),
            TranslatorSpec::Dict(p) => write!(f, "dict:{}", p.display()),
            TranslatorSpec::Script(p) => write!(f, "script:{}", p.display()),
            TranslatorSpec::Cmd(c) => write!(f, "cmd:{c}"),
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Line-delimited JSON events: {"utterance_id", "kind", "text"}.
    #[arg(long)]
    pub events: PathBuf,
    /// identity, dict:FILE, script:FILE or cmd:"COMMAND".
    #[arg(long, default_value = "identity")]
    pub translator: TranslatorSpec,
    /// Per-line timeout for cmd: translators, in seconds.
    #[arg(long, default_value_t = 30)]
    pub timeout_secs: u64,
    /// Reference segments; enables BLEU after resegmentation.
    #[arg(long)]
    pub refs: Option<PathBuf>,
    /// Every step as a JSON line.
    #[arg(long)]
    pub log_out: Option<PathBuf>,
    /// key: value metrics. Printed to stdout when omitted.
    #[arg(long)]
    pub report_out: Option<PathBuf>,
    /// Final translation of each utterance, one per line.
    #[arg(long)]
    pub final_out: Option<PathBuf>,
}
