//! Artificial partial-sentence corpora: every source prefix paired with a
//! prefix of the reference translation.
//!
//! Two ways of choosing the target prefix length are supported. The ratio
//! method keeps the source's proportion of words; the alignment method keeps
//! the longest target prefix whose aligned words all point inside the source
//! prefix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{Alignment, ParallelCorpus, SentencePair, TokenSentence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrefixMethod {
    Ratio,
    Alignment,
}

impl fmt::Display for PrefixMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrefixMethod::Ratio => "ratio",
            PrefixMethod::Alignment => "alignment",
        })
    }
}

impl FromStr for PrefixMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio" => Ok(PrefixMethod::Ratio),
            "alignment" => Ok(PrefixMethod::Alignment),
            other => Err(Error::invalid(format!("unknown prefix method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialPair {
    pub parent_id: usize,
    /// Number of source tokens kept.
    pub i: usize,
    pub source_prefix: TokenSentence,
    /// May be empty.
    pub target_prefix: TokenSentence,
    pub method: PrefixMethod,
}

impl PartialPair {
    /// Number of target tokens kept.
    pub fn j(&self) -> usize {
        self.target_prefix.len()
    }
}

/// Partial pairs ordered by parent, then by increasing prefix length.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialCorpus {
    pub items: Vec<PartialPair>,
}

impl PartialCorpus {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PartialPair> {
        self.items.iter()
    }

    /// Tab-separated `parent_id, i, j, method` rows with a header line.
    pub fn manifest_tsv(&self) -> String {
        let mut out = String::from("parent_id\ti\tj\tmethod\n");
        for p in &self.items {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", p.parent_id, p.i, p.j(), p.method));
        }
        out
    }
}

/// Target prefix length proportional to the source prefix length, rounding
/// halves up: `j = round(i * J / I)`.
pub fn ratio_prefix_len(src_len: usize, i: usize, tgt_len: usize) -> Result<usize> {
    if src_len == 0 || i == 0 || i > src_len || tgt_len == 0 {
        return Err(Error::invalid(format!(
            "ratio prefix needs 1 <= i <= I and J >= 1 (I={src_len}, i={i}, J={tgt_len})"
        )));
    }
    // floor((2 i J + I) / 2I) == round_half_up(i J / I), exact in integers
    Ok((2 * i * tgt_len + src_len) / (2 * src_len))
}

/// Longest target prefix in which no target word is linked to a source word
/// beyond position `i`. Unaligned target words never block.
pub fn alignment_prefix_len(alignment: &Alignment, i: usize) -> Result<usize> {
    if i == 0 || i > alignment.src_len() {
        return Err(Error::invalid(format!(
            "alignment prefix needs 1 <= i <= {} (got {i})",
            alignment.src_len()
        )));
    }
    let reach = alignment.max_source_per_target();
    Ok(reach[1..].iter().take_while(|&&src| src <= i).count())
}

fn partials_for_pair(
    pair: &SentencePair,
    method: PrefixMethod,
    alignment: Option<&Alignment>,
    min_i: usize,
) -> Result<Vec<PartialPair>> {
    let src_len = pair.source.len();
    let tgt_len = pair.target.len();
    let reach = alignment.map(Alignment::max_source_per_target);
    (min_i..=src_len)
        .map(|i| {
            let j = match &reach {
                None => ratio_prefix_len(src_len, i, tgt_len)?,
                Some(reach) => reach[1..].iter().take_while(|&&src| src <= i).count(),
            };
            Ok(PartialPair {
                parent_id: pair.id,
                i,
                source_prefix: pair.source.prefix(i),
                target_prefix: pair.target.prefix(j),
                method,
            })
        })
        .collect()
}

/// Emits one partial pair for every source prefix length in `min_i..=I` of
/// every sentence pair. The alignment method needs one alignment per pair,
/// sized to match it.
pub fn generate_partial(
    corpus: &ParallelCorpus,
    method: PrefixMethod,
    alignments: Option<&[Alignment]>,
    min_i: usize,
) -> Result<PartialCorpus> {
    if min_i == 0 {
        return Err(Error::invalid("min_i must be at least 1"));
    }
    let mut items = Vec::new();
    for (k, pair) in corpus.iter().enumerate() {
        let alignment = match method {
            PrefixMethod::Ratio => None,
            PrefixMethod::Alignment => {
                let a = alignments
                    .and_then(|all| all.get(k))
                    .filter(|a| a.src_len() == pair.source.len() && a.tgt_len() == pair.target.len())
                    .ok_or(Error::AlignmentMissing(pair.id))?;
                Some(a)
            }
        };
        items.extend(partials_for_pair(pair, method, alignment, min_i)?);
    }
    if method == PrefixMethod::Alignment {
        if let Some(all) = alignments {
            if all.len() > corpus.len() {
                return Err(Error::AlignmentMissing(corpus.len()));
            }
        }
    }
    Ok(PartialCorpus { items })
}
