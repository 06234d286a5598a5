//! Tooling for partial-sentence translation data and retranslation
//! stability.
//!
//! * [`text`]: whitespace tokenization, parallel corpora, Pharaoh alignments.
//! * [`aligner`]: IBM Model 1 EM training and Viterbi alignment.
//! * [`partial`]: prefix-pair corpus generation (length ratio or alignment).
//! * [`mixer`]: full + partial multi-task training set mixing.
//! * [`metrics`]: BLEU, GLEU, corrected words/messages, WER, resegmentation.
//! * [`session`]: replay of source update streams through a [`Translator`].

pub mod aligner;
pub mod error;
pub mod metrics;
pub mod mixer;
pub mod partial;
pub mod session;
pub mod text;

pub use aligner::{align_corpus, train_model1, viterbi_align, Model1Trainer, TranslationTable};
pub use error::{Error, Result};
pub use metrics::{
    bleu, bleu_with, corpus_gleu, corpus_wer, corrected_words, correction_report, gleu, resegment, wer,
    BleuOptions, CorrectionReport, NGramProfile, Resegmentation,
};
pub use mixer::{mix, mix_rows, subsample, MixManifest, RowOrigin, TrainingRow};
pub use partial::{
    alignment_prefix_len, generate_partial, ratio_prefix_len, PartialCorpus, PartialPair, PrefixMethod,
};
pub use session::{
    apply_event, evaluate_sessions, read_events, run_session, CommandTranslator, DictionaryTranslator,
    EventKind, IdentityTranslator, ScriptedTranslator, SessionLog, SessionReport, SessionStep,
    TranslateError, Translator, UpdateEvent,
};
pub use text::{
    read_alignment_line, read_alignments, read_parallel, tokenize, Alignment, ParallelCorpus, SentencePair,
    TokenSentence,
};
