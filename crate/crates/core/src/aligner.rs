//! IBM Model 1 lexical translation probabilities trained by EM, and
//! per-target-word Viterbi alignment extraction.
//!
//! The source side carries an explicit NULL word so that target words can
//! stay unaligned. Training is fully deterministic: corpus order drives the
//! expected-count accumulation and every table is laid out in a fixed order.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::text::{Alignment, ParallelCorpus, SentencePair, TokenSentence};

/// Floor used for unseen (source, target) pairs at alignment time.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Label used for the NULL source word in TSV dumps.
pub const NULL_LABEL: &str = "<null>";

const NULL_ID: u32 = 0;

#[derive(Debug, Clone, Default)]
struct Vocab {
    ids: HashMap<String, u32>,
    words: Vec<String>,
}

impl Vocab {
    fn intern(&mut self, w: &str) -> u32 {
        if let Some(&id) = self.ids.get(w) {
            return id;
        }
        let id = self.words.len() as u32;
        self.ids.insert(w.to_owned(), id);
        self.words.push(w.to_owned());
        id
    }

    /// Reserves id 0 for NULL without making it reachable by name.
    fn with_null() -> Self {
        Vocab {
            ids: HashMap::new(),
            words: vec![NULL_LABEL.to_owned()],
        }
    }

    fn get(&self, w: &str) -> Option<u32> {
        self.ids.get(w).copied()
    }
}

/// Conditional probabilities t(target | source), stored sparsely over the
/// pairs that co-occurred in training.
#[derive(Debug, Clone)]
pub struct TranslationTable {
    // source id 0 is NULL; `src.words[0]` holds a placeholder
    src: Vocab,
    tgt: Vocab,
    // sorted by (source id, target id)
    entries: Vec<(u32, u32)>,
    probs: Vec<f64>,
    index: HashMap<(u32, u32), usize>,
    // row r spans entries[row_start[r]..row_start[r + 1]]
    row_start: Vec<usize>,
    epsilon: f64,
}

impl TranslationTable {
    fn build(src: Vocab, tgt: Vocab, cooc: BTreeSet<(u32, u32)>, epsilon: f64) -> Self {
        let entries: Vec<(u32, u32)> = cooc.into_iter().collect();
        let index = entries.iter().enumerate().map(|(k, &e)| (e, k)).collect();
        let mut row_start = vec![0; src.words.len() + 1];
        for &(e, _) in &entries {
            row_start[e as usize + 1] += 1;
        }
        for r in 1..row_start.len() {
            row_start[r] += row_start[r - 1];
        }
        let mut probs = vec![0.0; entries.len()];
        for r in 0..src.words.len() {
            let span = row_start[r]..row_start[r + 1];
            let uniform = 1.0 / span.len() as f64;
            probs[span].fill(uniform);
        }
        TranslationTable {
            src,
            tgt,
            entries,
            probs,
            index,
            row_start,
            epsilon,
        }
    }

    /// Builds a table from explicit `(source, target, probability)` rows,
    /// where a `None` source is the NULL word. Every source row must sum to 1.
    pub fn from_entries<'a, I>(rows: I, epsilon: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (Option<&'a str>, &'a str, f64)>,
    {
        let mut src = Vocab::with_null();
        let mut tgt = Vocab::default();
        let mut given = HashMap::new();
        for (s, t, p) in rows {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("probability {p} out of range")));
            }
            let e = s.map_or(NULL_ID, |s| src.intern(s));
            let f = tgt.intern(t);
            given.insert((e, f), p);
        }
        let cooc = given.keys().copied().collect();
        let mut table = TranslationTable::build(src, tgt, cooc, epsilon);
        for (k, e) in table.entries.iter().enumerate() {
            table.probs[k] = given[e];
        }
        for r in 0..table.src.words.len() {
            let span = table.row_start[r]..table.row_start[r + 1];
            if span.is_empty() {
                continue;
            }
            let sum: f64 = table.probs[span].iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::invalid(format!(
                    "row `{}` sums to {sum}",
                    table.src.words[r]
                )));
            }
        }
        Ok(table)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn lookup(&self, e: Option<u32>, f: Option<u32>) -> f64 {
        match (e, f) {
            (Some(e), Some(f)) => self.index.get(&(e, f)).map_or(0.0, |&k| self.probs[k]),
            _ => 0.0,
        }
    }

    /// t(target | source); 0 for pairs never seen together.
    pub fn prob(&self, source: &str, target: &str) -> f64 {
        self.lookup(self.src.get(source), self.tgt.get(target))
    }

    /// t(target | NULL).
    pub fn null_prob(&self, target: &str) -> f64 {
        self.lookup(Some(NULL_ID), self.tgt.get(target))
    }

    /// All stored probabilities in table order. A `None` source is NULL.
    pub fn entries(&self) -> impl Iterator<Item = (Option<&str>, &str, f64)> + '_ {
        self.entries.iter().zip(&self.probs).map(|(&(e, f), &p)| {
            let s = (e != NULL_ID).then(|| self.src.words[e as usize].as_str());
            (s, self.tgt.words[f as usize].as_str(), p)
        })
    }

    /// Sum of each source row, NULL first. Useful for checking normalization.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.src.words.len())
            .map(|r| self.probs[self.row_start[r]..self.row_start[r + 1]].iter().sum())
            .filter(|&s: &f64| s > 0.0)
            .collect()
    }

    /// One `source<TAB>target<TAB>probability` line per entry.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (s, t, p) in self.entries() {
            out.push_str(s.unwrap_or(NULL_LABEL));
            out.push('\t');
            out.push_str(t);
            out.push('\t');
            out.push_str(&p.to_string());
            out.push('\n');
        }
        out
    }

    /// Model 1 log-likelihood of the corpus (without the length term):
    /// Σ_pairs Σ_j ln( Σ_{i=0..I} t(f_j | e_i) / (I + 1) ).
    pub fn log_likelihood(&self, corpus: &ParallelCorpus) -> f64 {
        corpus
            .iter()
            .map(|pair| {
                let sources: Vec<Option<u32>> = std::iter::once(Some(NULL_ID))
                    .chain(pair.source.tokens().iter().map(|w| self.src.get(w)))
                    .collect();
                let norm = (sources.len() as f64).ln();
                pair.target
                    .tokens()
                    .iter()
                    .map(|f| {
                        let f = self.tgt.get(f);
                        let total: f64 = sources.iter().map(|&e| self.lookup(e, f)).sum();
                        total.ln() - norm
                    })
                    .sum::<f64>()
            })
            .sum()
    }
}

/// Stepwise EM trainer; [`train_model1`] is the one-shot entry point.
pub struct Model1Trainer<'c> {
    corpus: &'c ParallelCorpus,
    table: TranslationTable,
    // per pair: for each target position, entry indices of (NULL, s_1..s_I)
    links: Vec<Vec<Vec<usize>>>,
    iterations: usize,
}

impl<'c> Model1Trainer<'c> {
    /// Initializes t(f|e) uniformly over the targets co-occurring with e.
    pub fn new(corpus: &'c ParallelCorpus, epsilon: f64) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::invalid("cannot train on an empty corpus"));
        }
        let mut src = Vocab::with_null();
        let mut tgt = Vocab::default();
        let mut cooc = BTreeSet::new();
        let encoded: Vec<(Vec<u32>, Vec<u32>)> = corpus
            .iter()
            .map(|p| {
                let mut e: Vec<u32> = vec![NULL_ID];
                e.extend(p.source.tokens().iter().map(|w| src.intern(w)));
                let f: Vec<u32> = p.target.tokens().iter().map(|w| tgt.intern(w)).collect();
                for &ei in &e {
                    for &fj in &f {
                        cooc.insert((ei, fj));
                    }
                }
                (e, f)
            })
            .collect();
        let table = TranslationTable::build(src, tgt, cooc, epsilon);
        let links = encoded
            .iter()
            .map(|(e, f)| {
                f.iter()
                    .map(|&fj| e.iter().map(|&ei| table.index[&(ei, fj)]).collect())
                    .collect()
            })
            .collect();
        Ok(Model1Trainer {
            corpus,
            table,
            links,
            iterations: 0,
        })
    }

    /// One E-step over the corpus followed by row renormalization.
    pub fn step(&mut self) {
        let probs = &self.table.probs;
        let mut counts = vec![0.0; probs.len()];
        for pair in &self.links {
            for row in pair {
                let denom: f64 = row.iter().map(|&k| probs[k]).sum();
                if denom <= 0.0 {
                    continue;
                }
                for &k in row {
                    counts[k] += probs[k] / denom;
                }
            }
        }
        let rows = self.table.row_start.len() - 1;
        for r in 0..rows {
            let span = self.table.row_start[r]..self.table.row_start[r + 1];
            let total: f64 = counts[span.clone()].iter().sum();
            if total > 0.0 {
                for k in span {
                    self.table.probs[k] = counts[k] / total;
                }
            }
        }
        self.iterations += 1;
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn log_likelihood(&self) -> f64 {
        self.table.log_likelihood(self.corpus)
    }

    pub fn table(&self) -> &TranslationTable {
        &self.table
    }

    pub fn into_table(self) -> TranslationTable {
        self.table
    }
}

/// Runs `iterations` rounds of Model 1 EM over `corpus`.
pub fn train_model1(
    corpus: &ParallelCorpus,
    iterations: usize,
    epsilon: f64,
) -> Result<TranslationTable> {
    if iterations < 1 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    let mut trainer = Model1Trainer::new(corpus, epsilon)?;
    for _ in 0..iterations {
        trainer.step();
        log::debug!(
            "model1 iteration {}: log-likelihood {:.6}",
            trainer.iterations(),
            trainer.log_likelihood()
        );
    }
    Ok(trainer.into_table())
}

/// Links each target word to its most probable source word.
///
/// Probabilities are floored at the table's epsilon. Among source words the
/// smallest position wins ties; the word stays unaligned only when NULL is
/// strictly more probable than the best source word.
pub fn viterbi_align(table: &TranslationTable, pair: &SentencePair) -> Alignment {
    align_sentences(table, &pair.source, &pair.target)
}

fn align_sentences(table: &TranslationTable, source: &TokenSentence, target: &TokenSentence) -> Alignment {
    let eps = table.epsilon;
    let src_ids: Vec<Option<u32>> = source
        .tokens()
        .iter()
        .map(|w| table.src.get(w))
        .collect();
    let mut links = Vec::new();
    for (j, f) in target.tokens().iter().enumerate() {
        let f = table.tgt.get(f);
        let null = table.lookup(Some(NULL_ID), f).max(eps);
        let mut best: Option<(usize, f64)> = None;
        for (i, &e) in src_ids.iter().enumerate() {
            let p = table.lookup(e, f).max(eps);
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((i, p));
            }
        }
        if let Some((i, p)) = best {
            if p >= null {
                links.push((i + 1, j + 1));
            }
        }
    }
    Alignment::new(source.len(), target.len(), links).expect("positions in range")
}

/// [`viterbi_align`] over every pair, in corpus order.
pub fn align_corpus(table: &TranslationTable, corpus: &ParallelCorpus) -> Vec<Alignment> {
    corpus.iter().map(|p| viterbi_align(table, p)).collect()
}
