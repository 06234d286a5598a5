//! Whitespace-token sentences, parallel corpora and Pharaoh-style word
//! alignments.
//!
//! Token positions are 1-based everywhere inside the crate. The external
//! alignment format is 0-based and is converted on read and write only.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered sequence of non-empty, whitespace-free tokens.
///
/// A sentence may be empty (an empty translation is a legal output), but
/// [`tokenize`] refuses empty input lines.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub struct TokenSentence(Vec<String>);

impl TokenSentence {
    pub fn empty() -> Self {
        TokenSentence(Vec::new())
    }

    /// Builds a sentence from pre-split tokens, rejecting empty tokens and
    /// tokens with embedded whitespace.
    pub fn new<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        for t in &tokens {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(Error::invalid(format!("bad token {t:?}")));
            }
        }
        Ok(TokenSentence(tokens))
    }

    /// Splits on whitespace runs; a blank line gives the empty sentence.
    pub fn from_line(line: &str) -> Self {
        TokenSentence(line.split_whitespace().map(str::to_owned).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Single-space join.
    pub fn detokenize(&self) -> String {
        self.0.join(" ")
    }

    /// The first `n` tokens (all of them if `n` exceeds the length).
    pub fn prefix(&self, n: usize) -> TokenSentence {
        TokenSentence(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn common_prefix_len(&self, other: &TokenSentence) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .take_while(|(a, b)| a == b)
            .count()
    }

    pub fn is_prefix_of(&self, other: &TokenSentence) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn concat(&self, tail: &TokenSentence) -> TokenSentence {
        let mut tokens = self.0.clone();
        tokens.extend_from_slice(&tail.0);
        TokenSentence(tokens)
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }
}

impl fmt::Display for TokenSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.detokenize())
    }
}

impl From<TokenSentence> for String {
    fn from(s: TokenSentence) -> String {
        s.detokenize()
    }
}

impl From<String> for TokenSentence {
    fn from(s: String) -> Self {
        TokenSentence::from_line(&s)
    }
}

/// Splits a line on runs of Unicode whitespace.
pub fn tokenize(line: &str) -> Result<TokenSentence> {
    let s = TokenSentence::from_line(line);
    if s.is_empty() {
        return Err(Error::EmptySentence { line: None });
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub id: usize,
    pub source: TokenSentence,
    pub target: TokenSentence,
}

impl SentencePair {
    pub fn new(id: usize, source: TokenSentence, target: TokenSentence) -> Result<Self> {
        if source.is_empty() || target.is_empty() {
            return Err(Error::EmptySentence { line: Some(id + 1) });
        }
        Ok(SentencePair { id, source, target })
    }
}

/// Sentence pairs whose ids are their 0-based line numbers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pairs: Vec<SentencePair>,
}

impl ParallelCorpus {
    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SentencePair> {
        self.pairs.iter()
    }

    /// Builds a corpus from (source, target) sentences, numbering them in order.
    pub fn from_sentences<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (TokenSentence, TokenSentence)>,
    {
        let pairs = rows
            .into_iter()
            .enumerate()
            .map(|(id, (s, t))| SentencePair::new(id, s, t))
            .collect::<Result<_>>()?;
        Ok(ParallelCorpus { pairs })
    }

    /// Source and target sides as detokenized lines.
    pub fn to_lines(&self) -> (Vec<String>, Vec<String>) {
        self.pairs
            .iter()
            .map(|p| (p.source.detokenize(), p.target.detokenize()))
            .unzip()
    }
}

impl<'a> IntoIterator for &'a ParallelCorpus {
    type Item = &'a SentencePair;
    type IntoIter = std::slice::Iter<'a, SentencePair>;

    fn into_iter(self) -> Self::IntoIter {
        self.pairs.iter()
    }
}

/// Pairs up two line sequences. Errors carry 1-based line numbers.
pub fn read_parallel<S, T>(src_lines: &[S], tgt_lines: &[T]) -> Result<ParallelCorpus>
where
    S: AsRef<str>,
    T: AsRef<str>,
{
    if src_lines.len() != tgt_lines.len() {
        return Err(Error::CorpusMismatch {
            src_count: src_lines.len(),
            tgt_count: tgt_lines.len(),
        });
    }
    let pairs = src_lines
        .iter()
        .zip(tgt_lines)
        .enumerate()
        .map(|(id, (s, t))| {
            let source = tokenize(s.as_ref()).map_err(|e| e.at_line(id + 1))?;
            let target = tokenize(t.as_ref()).map_err(|e| e.at_line(id + 1))?;
            Ok(SentencePair { id, source, target })
        })
        .collect::<Result<_>>()?;
    Ok(ParallelCorpus { pairs })
}

/// Word alignment for one sentence pair. Links are `(source_pos, target_pos)`,
/// both 1-based. Many-to-many links and unaligned positions are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    src_len: usize,
    tgt_len: usize,
    links: BTreeSet<(usize, usize)>,
}

impl Alignment {
    pub fn new<I>(src_len: usize, tgt_len: usize, links: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let links: BTreeSet<_> = links.into_iter().collect();
        if let Some(&(i, j)) = links
            .iter()
            .find(|&&(i, j)| i == 0 || i > src_len || j == 0 || j > tgt_len)
        {
            return Err(Error::invalid(format!(
                "link ({i}, {j}) outside {src_len}x{tgt_len} alignment"
            )));
        }
        Ok(Alignment {
            src_len,
            tgt_len,
            links,
        })
    }

    pub fn unaligned(src_len: usize, tgt_len: usize) -> Self {
        Alignment {
            src_len,
            tgt_len,
            links: BTreeSet::new(),
        }
    }

    pub fn src_len(&self) -> usize {
        self.src_len
    }

    pub fn tgt_len(&self) -> usize {
        self.tgt_len
    }

    pub fn links(&self) -> &BTreeSet<(usize, usize)> {
        &self.links
    }

    /// For each target position `1..=tgt_len`, the largest source position
    /// linked to it, or 0 when it is unaligned. Index 0 of the result is unused.
    pub fn max_source_per_target(&self) -> Vec<usize> {
        let mut out = vec![0; self.tgt_len + 1];
        for &(i, j) in &self.links {
            out[j] = out[j].max(i);
        }
        out
    }

    /// Pharaoh form: space separated 0-based `i-j` pairs.
    pub fn to_pharaoh(&self) -> String {
        let parts: Vec<String> = self
            .links
            .iter()
            .map(|(i, j)| format!("{}-{}", i - 1, j - 1))
            .collect();
        parts.join(" ")
    }
}

/// Parses one Pharaoh alignment line against the pair's lengths.
pub fn read_alignment_line(line: &str, src_len: usize, tgt_len: usize) -> Result<Alignment> {
    let mut links = BTreeSet::new();
    for token in line.split_whitespace() {
        let bad = || Error::AlignmentParse {
            token: token.to_owned(),
            line: None,
        };
        let (i, j) = token.split_once('-').ok_or_else(bad)?;
        let i: usize = i.parse().map_err(|_| bad())?;
        let j: usize = j.parse().map_err(|_| bad())?;
        if i >= src_len || j >= tgt_len {
            return Err(bad());
        }
        links.insert((i + 1, j + 1));
    }
    Ok(Alignment {
        src_len,
        tgt_len,
        links,
    })
}

/// Parses an alignment file line by line against the corpus it belongs to.
pub fn read_alignments<S: AsRef<str>>(lines: &[S], corpus: &ParallelCorpus) -> Result<Vec<Alignment>> {
    if lines.len() != corpus.len() {
        return Err(Error::AlignmentMissing(lines.len().min(corpus.len())));
    }
    corpus
        .iter()
        .zip(lines)
        .map(|(p, l)| {
            read_alignment_line(l.as_ref(), p.source.len(), p.target.len())
                .map_err(|e| e.at_line(p.id + 1))
        })
        .collect()
}
