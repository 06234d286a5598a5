use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty sentence{}", line_suffix(*.line))]
    EmptySentence { line: Option<usize> },

    #[error("parallel corpus mismatch: {src_count} source lines vs {tgt_count} target lines")]
    CorpusMismatch { src_count: usize, tgt_count: usize },

    #[error("bad alignment token `{token}`{}", line_suffix(*.line))]
    AlignmentParse { token: String, line: Option<usize> },

    #[error("no usable alignment for sentence pair {0}")]
    AlignmentMissing(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("event stream line {line}: {message}")]
    EventParse { line: usize, message: String },

    #[error("translator failed on utterance {utterance_id}, step {step}: {message}")]
    Translator {
        utterance_id: u64,
        step: usize,
        message: String,
    },
}

fn line_suffix(line: Option<usize>) -> String {
    match line {
        Some(n) => format!(" at line {n}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attaches a 1-based line number to errors that carry one.
    pub fn at_line(self, n: usize) -> Self {
        match self {
            Error::EmptySentence { .. } => Error::EmptySentence { line: Some(n) },
            Error::AlignmentParse { token, .. } => Error::AlignmentParse {
                token,
                line: Some(n),
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
