//! Retranslation session replay.
//!
//! Source updates arrive as events that either replace the current source
//! or extend it. After every event the whole current source is translated
//! again and the result is recorded as the newly displayed translation.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::metrics::{bleu, correction_report, resegment, CorrectionReport};
use crate::text::TokenSentence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Replace,
    Extend,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateEvent {
    pub utterance_id: u64,
    pub kind: EventKind,
    pub text: String,
}

impl UpdateEvent {
    pub fn replace(utterance_id: u64, text: impl Into<String>) -> Self {
        UpdateEvent {
            utterance_id,
            kind: EventKind::Replace,
            text: text.into(),
        }
    }

    pub fn extend(utterance_id: u64, text: impl Into<String>) -> Self {
        UpdateEvent {
            utterance_id,
            kind: EventKind::Extend,
            text: text.into(),
        }
    }
}

/// Parses a line-delimited JSON event stream. Blank lines are skipped.
pub fn read_events(text: &str) -> Result<Vec<UpdateEvent>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| Error::EventParse {
                line: n + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventWarning {
    /// An extend event carried no tokens; the source is unchanged.
    NoOpEvent,
}

/// Folds one event into the current source.
pub fn apply_event(current: &TokenSentence, event: &UpdateEvent) -> (TokenSentence, Option<EventWarning>) {
    let text = TokenSentence::from_line(&event.text);
    match event.kind {
        EventKind::Replace => (text, None),
        EventKind::Extend if text.is_empty() => (current.clone(), Some(EventWarning::NoOpEvent)),
        EventKind::Extend => (current.concat(&text), None),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct TranslateError(pub String);

/// Anything that maps a (possibly partial) source sentence to a translation.
///
/// Implementations must be deterministic for a fixed configuration.
pub trait Translator {
    fn translate(&self, source: &TokenSentence) -> Result<TokenSentence, TranslateError>;
}

impl<T: Translator + ?Sized> Translator for &T {
    fn translate(&self, source: &TokenSentence) -> Result<TokenSentence, TranslateError> {
        (**self).translate(source)
    }
}

impl<T: Translator + ?Sized> Translator for Box<T> {
    fn translate(&self, source: &TokenSentence) -> Result<TokenSentence, TranslateError> {
        (**self).translate(source)
    }
}

/// Copies the source through.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTranslator;

impl Translator for IdentityTranslator {
    fn translate(&self, source: &TokenSentence) -> Result<TokenSentence, TranslateError> {
        Ok(source.clone())
    }
}

fn parse_tsv_pairs(text: &str) -> Result<Vec<(&str, &str)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            l.split_once('\t').ok_or_else(|| {
                Error::invalid(format!("line {}: expected `source<TAB>target`", n + 1))
            })
        })
        .collect()
}

/// Word-by-word lookup; unknown words are copied through. A lexicon entry
/// may map to several words or to none.
#[derive(Debug, Clone, Default)]
pub struct DictionaryTranslator {
    lexicon: HashMap<String, TokenSentence>,
}

impl DictionaryTranslator {
    pub fn new<I, K, V>(lexicon: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: AsRef<str>,
    {
        DictionaryTranslator {
            lexicon: lexicon
                .into_iter()
                .map(|(k, v)| (k.into(), TokenSentence::from_line(v.as_ref())))
                .collect(),
        }
    }

    /// `source<TAB>target` lines; the source side must be a single word.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let pairs = parse_tsv_pairs(text)?;
        for (k, _) in &pairs {
            if TokenSentence::from_line(k).len() != 1 {
                return Err(Error::invalid(format!("lexicon key `{k}` is not one word")));
            }
        }
        Ok(DictionaryTranslator::new(pairs.into_iter().map(|(k, v)| (k.trim(), v))))
    }
}

impl Translator for DictionaryTranslator {
    fn translate(&self, source: &TokenSentence) -> Result<TokenSentence, TranslateError> {
        let mut out = Vec::with_capacity(source.len());
        for w in source.tokens() {
            match self.lexicon.get(w) {
                Some(t) => out.extend(t.tokens().iter().cloned()),
                None => out.push(w.clone()),
            }
        }
        Ok(TokenSentence::new(out).expect("tokens come from valid sentences"))
    }
}

/// Replays recorded outputs keyed by exact detokenized source. Unscripted
/// inputs fall back to the identity.
#[derive(Debug, Clone, Default)]
pub struct ScriptedTranslator {
    script: HashMap<String, TokenSentence>,
}

impl ScriptedTranslator {
    pub fn new<I, K, V>(script: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        ScriptedTranslator {
            script: script
                .into_iter()
                .map(|(k, v)| {
                    (
                        TokenSentence::from_line(k.as_ref()).detokenize(),
                        TokenSentence::from_line(v.as_ref()),
                    )
                })
                .collect(),
        }
    }

    /// `source<TAB>translation` lines.
    pub fn from_tsv(text: &str) -> Result<Self> {
        Ok(ScriptedTranslator::new(parse_tsv_pairs(text)?))
    }
}

impl Translator for ScriptedTranslator {
    fn translate(&self, source: &TokenSentence) -> Result<TokenSentence, TranslateError> {
        Ok(self
            .script
            .get(&source.detokenize())
            .cloned()
            .unwrap_or_else(|| source.clone()))
    }
}

pub const DEFAULT_COMMAND_TIMEOUT: Duration = Duration::from_secs(30);

struct Pipe {
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

/// Talks to a child process over stdin/stdout, one sentence per line each
/// way. The process must flush after every output line.
pub struct CommandTranslator {
    child: Child,
    pipe: Mutex<Pipe>,
    timeout: Duration,
}

impl CommandTranslator {
    /// Starts `command` through `sh -c`.
    pub fn spawn(command: &str, timeout: Duration) -> std::io::Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(CommandTranslator {
            child,
            pipe: Mutex::new(Pipe { stdin, lines: rx }),
            timeout,
        })
    }
}

impl Translator for CommandTranslator {
    fn translate(&self, source: &TokenSentence) -> Result<TokenSentence, TranslateError> {
        let mut pipe = self
            .pipe
            .lock()
            .map_err(|_| TranslateError("translator pipe poisoned".into()))?;
        writeln!(pipe.stdin, "{}", source.detokenize())
            .and_then(|_| pipe.stdin.flush())
            .map_err(|e| TranslateError(format!("write to translator: {e}")))?;
        match pipe.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(TokenSentence::from_line(&line)),
            Ok(Err(e)) => Err(TranslateError(format!("read from translator: {e}"))),
            Err(RecvTimeoutError::Timeout) => Err(TranslateError(format!(
                "no answer within {:?}",
                self.timeout
            ))),
            Err(RecvTimeoutError::Disconnected) => {
                Err(TranslateError("translator process closed its output".into()))
            }
        }
    }
}

impl Drop for CommandTranslator {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionStep {
    pub source: TokenSentence,
    pub translation: TokenSentence,
}

/// Everything displayed for one utterance, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionLog {
    pub utterance_id: u64,
    pub steps: Vec<SessionStep>,
}

impl SessionLog {
    /// Translation after the last step; empty if there were no steps.
    pub fn final_translation(&self) -> TokenSentence {
        self.steps
            .last()
            .map(|s| s.translation.clone())
            .unwrap_or_default()
    }

    pub fn translations(&self) -> Vec<TokenSentence> {
        self.steps.iter().map(|s| s.translation.clone()).collect()
    }

    pub fn corrections(&self) -> CorrectionReport {
        correction_report(&self.translations())
    }

    /// One JSON object per step.
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            utterance_id: u64,
            step: usize,
            source: &'a TokenSentence,
            translation: &'a TokenSentence,
        }
        let mut out = String::new();
        for (step, s) in self.steps.iter().enumerate() {
            let line = Line {
                utterance_id: self.utterance_id,
                step,
                source: &s.source,
                translation: &s.translation,
            };
            out.push_str(&serde_json::to_string(&line).expect("plain data serializes"));
            out.push('\n');
        }
        out
    }
}

/// Replays `events` through `translator`, translating after every event.
///
/// Events are grouped per utterance in order of first appearance; within an
/// utterance they keep their arrival order.
pub fn run_session<T: Translator + ?Sized>(events: &[UpdateEvent], translator: &T) -> Result<Vec<SessionLog>> {
    let mut order: Vec<u64> = Vec::new();
    let mut grouped: HashMap<u64, Vec<&UpdateEvent>> = HashMap::new();
    for e in events {
        grouped
            .entry(e.utterance_id)
            .or_insert_with(|| {
                order.push(e.utterance_id);
                Vec::new()
            })
            .push(e);
    }
    order
        .into_iter()
        .map(|id| {
            let mut source = TokenSentence::empty();
            let mut steps = Vec::new();
            for (step, event) in grouped[&id].iter().enumerate() {
                let (next, warning) = apply_event(&source, event);
                if let Some(w) = warning {
                    log::warn!("utterance {id}, step {step}: {w:?}");
                }
                source = next;
                let translation = translator.translate(&source).map_err(|e| Error::Translator {
                    utterance_id: id,
                    step,
                    message: e.0,
                })?;
                steps.push(SessionStep {
                    source: source.clone(),
                    translation,
                });
            }
            Ok(SessionLog {
                utterance_id: id,
                steps,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionReport {
    pub corrections: CorrectionReport,
    /// Corpus BLEU of the resegmented final translations, when references
    /// were supplied.
    pub bleu: Option<f64>,
    pub reseg_edits: Option<usize>,
}

impl SessionReport {
    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(b) = self.bleu {
            out.push_str(&format!("bleu: {b:.4}\nbleu100: {:.2}\n", b * 100.0));
        }
        out.push_str(&format!(
            "word_up: {}\nmssg_up: {}\nupdates_total: {}\n",
            self.corrections.words_updated,
            self.corrections.messages_updated,
            self.corrections.updates_total
        ));
        if let Some(e) = self.reseg_edits {
            out.push_str(&format!("reseg_edits: {e}\n"));
        }
        out
    }
}

/// Summed correction counts over all utterances.
pub fn total_corrections(logs: &[SessionLog]) -> CorrectionReport {
    logs.iter().map(SessionLog::corrections).sum()
}

/// Sums the corrections over all logs, then joins the final translations
/// into one stream, resegments it against `references` and scores BLEU.
pub fn evaluate_sessions(logs: &[SessionLog], references: &[TokenSentence]) -> Result<SessionReport> {
    if logs.is_empty() {
        return Err(Error::invalid("no session logs to evaluate"));
    }
    if references.is_empty() {
        return Err(Error::invalid("no reference segments"));
    }
    let stream = logs
        .iter()
        .fold(TokenSentence::empty(), |acc, l| acc.concat(&l.final_translation()));
    let reseg = resegment(&stream, references)?;
    Ok(SessionReport {
        corrections: total_corrections(logs),
        bleu: Some(bleu(&reseg.segments, references)?),
        reseg_edits: Some(reseg.edits),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(line: &str) -> TokenSentence {
        TokenSentence::from_line(line)
    }

    fn encourage_script() -> ScriptedTranslator {
        ScriptedTranslator::new([
            ("I", "yo"),
            ("I encourage all of", "yo animo a todo el mundo"),
            ("I encourage all of you", "yo animo a todos ustedes"),
        ])
    }

    fn encourage_events() -> Vec<UpdateEvent> {
        vec![
            UpdateEvent::replace(0, "I"),
            UpdateEvent::replace(0, "I encourage all of"),
            UpdateEvent::replace(0, "I encourage all of you"),
        ]
    }

    #[test]
    fn apply_event_semantics() {
        let (out, w) = apply_event(&s("I"), &UpdateEvent::replace(0, "I encourage all of"));
        assert_eq!(out, s("I encourage all of"));
        assert!(w.is_none());
        let (out, _) = apply_event(&s("I encourage"), &UpdateEvent::extend(0, "all of"));
        assert_eq!(out, s("I encourage all of"));
        let (out, _) = apply_event(&TokenSentence::empty(), &UpdateEvent::replace(0, "I"));
        assert_eq!(out, s("I"));
        let (out, w) = apply_event(&s("a"), &UpdateEvent::extend(0, "  "));
        assert_eq!(out, s("a"));
        assert_eq!(w, Some(EventWarning::NoOpEvent));
    }

    #[test]
    fn worked_session() {
        let logs = run_session(&encourage_events(), &encourage_script()).unwrap();
        assert_eq!(logs.len(), 1);
        let shown: Vec<String> = logs[0].steps.iter().map(|s| s.translation.detokenize()).collect();
        assert_eq!(shown, ["yo", "yo animo a todo el mundo", "yo animo a todos ustedes"]);
        let c = logs[0].corrections();
        assert_eq!((c.words_updated, c.messages_updated), (3, 1));

        let report = evaluate_sessions(&logs, &[s("yo animo a todos ustedes")]).unwrap();
        assert_eq!(report.bleu, Some(1.0));
        assert_eq!(report.corrections.words_updated, 3);
        assert_eq!(report.corrections.messages_updated, 1);
    }

    #[test]
    fn single_event_utterance() {
        let logs = run_session(&[UpdateEvent::replace(4, "hello there")], &IdentityTranslator).unwrap();
        assert_eq!(logs[0].steps.len(), 1);
        assert_eq!(logs[0].corrections(), CorrectionReport::default());
        assert_eq!(logs[0].final_translation(), s("hello there"));
    }

    #[test]
    fn identity_on_extensions_is_stable() {
        let events = vec![
            UpdateEvent::extend(1, "a"),
            UpdateEvent::extend(1, "b c"),
            UpdateEvent::extend(2, "x"),
            UpdateEvent::extend(1, "d"),
            UpdateEvent::extend(2, "y"),
        ];
        let logs = run_session(&events, &IdentityTranslator).unwrap();
        assert_eq!(logs.iter().map(|l| l.utterance_id).collect::<Vec<_>>(), [1, 2]);
        assert_eq!(logs[0].steps.len(), 3);
        assert_eq!(logs[0].final_translation(), s("a b c d"));
        assert_eq!(total_corrections(&logs).words_updated, 0);
    }

    #[test]
    fn dictionary_translator() {
        let t = DictionaryTranslator::new([("I", "yo")]);
        assert_eq!(t.translate(&s("I you")).unwrap(), s("yo you"));
        let empty = DictionaryTranslator::default();
        assert_eq!(empty.translate(&s("a b")).unwrap(), s("a b"));
        let t = DictionaryTranslator::from_tsv("the\tla\ndog\tel perro\n\n").unwrap();
        assert_eq!(t.translate(&s("the dog")).unwrap(), s("la el perro"));
        assert!(DictionaryTranslator::from_tsv("no tab here").is_err());
        assert!(DictionaryTranslator::from_tsv("two words\tx").is_err());
    }

    #[test]
    fn scripted_translator() {
        let t = ScriptedTranslator::from_tsv(
            "now, I should\tahora debería , debería , debería .\n",
        )
        .unwrap();
        assert_eq!(t.translate(&s("now, I should")).unwrap(), s("ahora debería , debería , debería ."));
        assert_eq!(t.translate(&s("hello")).unwrap(), s("hello"));
        let m = ScriptedTranslator::new([("now,  I should", "ahora debería")]);
        assert_eq!(m.translate(&s("now, I should")).unwrap(), s("ahora debería"));
    }

    #[test]
    fn evaluate_rejects_empty() {
        assert!(evaluate_sessions(&[], &[s("a")]).is_err());
        let logs = run_session(&encourage_events(), &IdentityTranslator).unwrap();
        assert!(evaluate_sessions(&logs, &[]).is_err());
    }

    #[test]
    fn evaluation_absorbs_segmentation() {
        let refs = vec![s("a b c"), s("d e")];
        let one = run_session(&[UpdateEvent::replace(0, "a b c d e")], &IdentityTranslator).unwrap();
        let split = run_session(
            &[UpdateEvent::replace(0, "a"), UpdateEvent::replace(1, "b c d e")],
            &IdentityTranslator,
        )
        .unwrap();
        let a = evaluate_sessions(&one, &refs).unwrap();
        let b = evaluate_sessions(&split, &refs).unwrap();
        assert_eq!(a.bleu, b.bleu);
        assert_eq!(a.bleu, Some(1.0));
    }

    struct Failing;

    impl Translator for Failing {
        fn translate(&self, source: &TokenSentence) -> Result<TokenSentence, TranslateError> {
            if source.len() > 1 {
                Err(TranslateError("too long".into()))
            } else {
                Ok(source.clone())
            }
        }
    }

    #[test]
    fn translator_failure_names_step() {
        let events = vec![UpdateEvent::extend(7, "a"), UpdateEvent::extend(7, "b")];
        assert_eq!(
            run_session(&events, &Failing),
            Err(Error::Translator {
                utterance_id: 7,
                step: 1,
                message: "too long".into()
            })
        );
    }

    #[test]
    fn events_jsonl() {
        let text = r#"{"utterance_id": 0, "kind": "replace", "text": "I"}

{"utterance_id": 0, "kind": "extend", "text": "encourage"}
"#;
        let events = read_events(text).unwrap();
        assert_eq!(events, vec![UpdateEvent::replace(0, "I"), UpdateEvent::extend(0, "encourage")]);
        let err = read_events("{\"utterance_id\": 0, \"kind\": \"swap\", \"text\": \"\"}").unwrap_err();
        assert!(matches!(err, Error::EventParse { line: 1, .. }));
    }

    #[test]
    fn log_lines() {
        let logs = run_session(&encourage_events(), &encourage_script()).unwrap();
        let text = logs[0].to_jsonl();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with(r#"{"utterance_id":0,"step":0,"source":"I","translation":"yo"}"#));
    }

    #[test]
    fn report_text() {
        let logs = run_session(&encourage_events(), &encourage_script()).unwrap();
        let r = evaluate_sessions(&logs, &[s("yo animo a todos ustedes")]).unwrap();
        assert_eq!(
            r.to_text(),
            "bleu: 1.0000\nbleu100: 100.00\nword_up: 3\nmssg_up: 1\nupdates_total: 2\nreseg_edits: 0\n"
        );
    }

    #[test]
    fn command_translator_round_trip() {
        let t = CommandTranslator::spawn("cat", DEFAULT_COMMAND_TIMEOUT).unwrap();
        assert_eq!(t.translate(&s("a  b")).unwrap(), s("a b"));
        assert_eq!(t.translate(&s("c")).unwrap(), s("c"));
    }

    #[test]
    fn command_translator_times_out() {
        let t = CommandTranslator::spawn("sleep 5", Duration::from_millis(200)).unwrap();
        let err = t.translate(&s("a")).unwrap_err();
        assert!(err.0.contains("no answer"), "{err}");
    }

    #[test]
    fn command_translator_reports_exit() {
        let t = CommandTranslator::spawn("true", Duration::from_secs(5)).unwrap();
        assert!(t.translate(&s("a")).is_err());
    }
}
