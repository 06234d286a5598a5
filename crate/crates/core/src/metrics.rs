//! Translation quality and stability scores: corpus BLEU, sentence GLEU,
//! corrected words and messages between consecutive displayed translations,
//! word error rate, and WER-minimizing resegmentation of a hypothesis stream.
//!
//! All matching is case sensitive.

use std::collections::HashMap;
use std::iter::Sum;
use std::ops::AddAssign;

use crate::error::{Error, Result};
use crate::text::TokenSentence;

pub const MAX_ORDER: usize = 4;

/// Counts of every n-gram (orders 1 to `MAX_ORDER`) in one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramProfile<'a> {
    counts: HashMap<&'a [String], usize>,
    totals: [usize; MAX_ORDER],
}

impl<'a> NGramProfile<'a> {
    pub fn new(sentence: &'a TokenSentence) -> Self {
        let tokens = sentence.tokens();
        let mut counts = HashMap::new();
        let mut totals = [0; MAX_ORDER];
        for n in 1..=MAX_ORDER {
            for gram in tokens.windows(n) {
                *counts.entry(gram).or_insert(0) += 1;
                totals[n - 1] += 1;
            }
        }
        NGramProfile { counts, totals }
    }

    pub fn count(&self, gram: &[String]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    /// Number of n-gram occurrences of order `n`.
    pub fn total(&self, n: usize) -> usize {
        self.totals[n - 1]
    }

    /// Σ min(self count, other count) over n-grams of order `n`.
    pub fn clipped_matches(&self, other: &NGramProfile<'_>, n: usize) -> usize {
        self.counts
            .iter()
            .filter(|(g, _)| g.len() == n)
            .map(|(g, &c)| c.min(other.count(g)))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuOptions {
    /// Add-one smoothing of the precisions for orders 2 and up.
    pub smooth: bool,
}

/// Sufficient statistics of corpus BLEU.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuStats {
    pub fn add_sentence(&mut self, hyp: &TokenSentence, reference: &TokenSentence) {
        let h = NGramProfile::new(hyp);
        let r = NGramProfile::new(reference);
        for n in 1..=MAX_ORDER {
            self.matches[n - 1] += h.clipped_matches(&r, n);
            self.totals[n - 1] += h.total(n);
        }
        self.hyp_len += hyp.len();
        self.ref_len += reference.len();
    }

    pub fn brevity_penalty(&self) -> f64 {
        if self.hyp_len == 0 {
            0.0
        } else {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).min(0.0).exp()
        }
    }

    /// Geometric mean of the precisions times the brevity penalty.
    ///
    /// Orders for which the hypotheses contain no n-gram at all are left out
    /// of the mean, so a corpus of short sentences still scores 1 against
    /// itself. Any zero precision gives 0 unless smoothing is on.
    pub fn score(&self, options: BleuOptions) -> f64 {
        let order = self.totals.iter().take_while(|&&t| t > 0).count();
        if order == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        for n in 0..order {
            let (m, t) = if options.smooth && n > 0 {
                (self.matches[n] + 1, self.totals[n] + 1)
            } else {
                (self.matches[n], self.totals[n])
            };
            if m == 0 {
                return 0.0;
            }
            log_sum += (m as f64 / t as f64).ln();
        }
        (log_sum / order as f64).exp() * self.brevity_penalty()
    }
}

fn check_parallel(hyps: usize, refs: usize) -> Result<()> {
    if hyps != refs {
        return Err(Error::invalid(format!(
            "{hyps} hypotheses vs {refs} references"
        )));
    }
    if hyps == 0 {
        return Err(Error::invalid("no sentences to score"));
    }
    Ok(())
}

pub fn bleu_stats(hypotheses: &[TokenSentence], references: &[TokenSentence]) -> Result<BleuStats> {
    check_parallel(hypotheses.len(), references.len())?;
    let mut stats = BleuStats::default();
    for (h, r) in hypotheses.iter().zip(references) {
        stats.add_sentence(h, r);
    }
    Ok(stats)
}

/// Corpus BLEU in `[0, 1]`, unsmoothed.
pub fn bleu(hypotheses: &[TokenSentence], references: &[TokenSentence]) -> Result<f64> {
    bleu_with(hypotheses, references, BleuOptions::default())
}

pub fn bleu_with(
    hypotheses: &[TokenSentence],
    references: &[TokenSentence],
    options: BleuOptions,
) -> Result<f64> {
    Ok(bleu_stats(hypotheses, references)?.score(options))
}

/// Sentence GLEU: the smaller of n-gram precision and recall, pooling orders
/// 1 to 4.
pub fn gleu(hypothesis: &TokenSentence, reference: &TokenSentence) -> Result<f64> {
    if hypothesis.is_empty() || reference.is_empty() {
        return Err(Error::invalid("gleu needs non-empty sentences"));
    }
    let h = NGramProfile::new(hypothesis);
    let r = NGramProfile::new(reference);
    let (mut matched, mut hyp_total, mut ref_total) = (0, 0, 0);
    for n in 1..=MAX_ORDER {
        matched += h.clipped_matches(&r, n);
        hyp_total += h.total(n);
        ref_total += r.total(n);
    }
    let precision = matched as f64 / hyp_total as f64;
    let recall = matched as f64 / ref_total as f64;
    Ok(precision.min(recall))
}

/// Mean sentence GLEU. An empty hypothesis scores 0 against its reference.
pub fn corpus_gleu(hypotheses: &[TokenSentence], references: &[TokenSentence]) -> Result<f64> {
    check_parallel(hypotheses.len(), references.len())?;
    let mut sum = 0.0;
    for (h, r) in hypotheses.iter().zip(references) {
        if !h.is_empty() {
            sum += gleu(h, r)?;
        } else if r.is_empty() {
            return Err(Error::invalid("gleu needs a non-empty reference"));
        }
    }
    Ok(sum / hypotheses.len() as f64)
}

/// Words of `prev` that must be rewritten to display `next`: everything from
/// the first differing position on.
pub fn corrected_words(prev: &TokenSentence, next: &TokenSentence) -> usize {
    prev.len() - prev.common_prefix_len(next)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorrectionReport {
    pub words_updated: usize,
    pub messages_updated: usize,
    pub updates_total: usize,
}

impl AddAssign for CorrectionReport {
    fn add_assign(&mut self, rhs: Self) {
        self.words_updated += rhs.words_updated;
        self.messages_updated += rhs.messages_updated;
        self.updates_total += rhs.updates_total;
    }
}

impl Sum for CorrectionReport {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        let mut total = CorrectionReport::default();
        for r in iter {
            total += r;
        }
        total
    }
}

/// Correction counts over the successive translations shown for one
/// utterance.
pub fn correction_report(translations: &[TokenSentence]) -> CorrectionReport {
    let mut report = CorrectionReport::default();
    for w in translations.windows(2) {
        let words = corrected_words(&w[0], &w[1]);
        report.words_updated += words;
        report.messages_updated += usize::from(words > 0);
        report.updates_total += 1;
    }
    report
}

/// Token-level Levenshtein distance with unit costs.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = diag + usize::from(x != y);
            diag = row[j + 1];
            row[j + 1] = sub.min(row[j] + 1).min(diag + 1);
        }
    }
    row[b.len()]
}

/// Edit count and rate `edits / len(reference)`.
pub fn wer(hyp: &TokenSentence, reference: &TokenSentence) -> Result<(usize, f64)> {
    if reference.is_empty() {
        return Err(Error::invalid("word error rate needs a non-empty reference"));
    }
    let edits = edit_distance(hyp.tokens(), reference.tokens());
    Ok((edits, edits as f64 / reference.len() as f64))
}

/// Total edits over total reference words.
pub fn corpus_wer(hypotheses: &[TokenSentence], references: &[TokenSentence]) -> Result<(usize, f64)> {
    check_parallel(hypotheses.len(), references.len())?;
    let edits: usize = hypotheses
        .iter()
        .zip(references)
        .map(|(h, r)| edit_distance(h.tokens(), r.tokens()))
        .sum();
    let words: usize = references.iter().map(TokenSentence::len).sum();
    if words == 0 {
        return Err(Error::invalid("word error rate needs non-empty references"));
    }
    Ok((edits, edits as f64 / words as f64))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resegmentation {
    pub segments: Vec<TokenSentence>,
    /// Σ edit_distance(segment_k, reference_k).
    pub edits: usize,
}

const INF: u32 = u32::MAX / 2;

/// Splits `stream` into one contiguous (possibly empty) segment per
/// reference, minimizing the summed edit distance. Among optimal splits the
/// one with the lexicographically smallest boundary vector is returned.
///
/// A backward pass computes, for each segment `k` and stream position `n`,
/// the cheapest way to cover `stream[n..]` with references `k..`. The split
/// is then rebuilt front to back, each boundary placed at the first position
/// that still reaches the optimum. Time is O(N·L) for a stream of N tokens
/// and L reference tokens in total; memory is O(N·K).
pub fn resegment(stream: &TokenSentence, references: &[TokenSentence]) -> Result<Resegmentation> {
    if references.is_empty() {
        return Err(Error::invalid("resegmentation needs at least one reference"));
    }
    let mut vocab = HashMap::new();
    let hyp = encode(&mut vocab, stream);
    let refs: Vec<Vec<u32>> = references.iter().map(|r| encode(&mut vocab, r)).collect();

    let n_hyp = hyp.len();
    let k_refs = refs.len();
    let mut base = Vec::with_capacity(k_refs + 1);
    base.push(0usize);
    for r in &refs {
        base.push(base.last().unwrap() + r.len() + 1);
    }
    let states = base[k_refs];
    // seg_cost[k][n]: cheapest cover of hyp[n..] by refs[k..]
    let mut seg_cost = vec![vec![INF; n_hyp + 1]; k_refs];
    let mut next = vec![INF; states];
    let mut cur = vec![INF; states];
    for n in (0..=n_hyp).rev() {
        for k in (0..k_refs).rev() {
            let len = refs[k].len();
            for r in (0..=len).rev() {
                let s = base[k] + r;
                let mut v = INF;
                if r == len {
                    if k + 1 == k_refs {
                        if n == n_hyp {
                            v = 0;
                        }
                    } else {
                        v = cur[base[k + 1]];
                    }
                } else {
                    v = v.min(cur[s + 1] + 1);
                    if n < n_hyp {
                        v = v.min(next[s + 1] + u32::from(hyp[n] != refs[k][r]));
                    }
                }
                if n < n_hyp {
                    v = v.min(next[s] + 1);
                }
                cur[s] = v;
            }
            seg_cost[k][n] = cur[base[k]];
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let optimum = seg_cost[0][0];

    let mut segments = Vec::with_capacity(k_refs);
    let mut start = 0;
    let mut remaining = optimum;
    for (k, reference) in refs.iter().enumerate().take(k_refs - 1) {
        // column[r] = edit_distance(hyp[start..b], reference[..r]) as b advances
        let mut column: Vec<u32> = (0..=reference.len() as u32).collect();
        let mut b = start;
        loop {
            let here = column[reference.len()];
            if here + seg_cost[k + 1][b] == remaining {
                remaining -= here;
                break;
            }
            debug_assert!(b < n_hyp, "optimum must be reachable");
            let mut diag = column[0];
            column[0] += 1;
            for (r, &tok) in reference.iter().enumerate() {
                let sub = diag + u32::from(hyp[b] != tok);
                diag = column[r + 1];
                column[r + 1] = sub.min(column[r] + 1).min(diag + 1);
            }
            b += 1;
        }
        segments.push(slice_sentence(stream, start, b));
        start = b;
    }
    segments.push(slice_sentence(stream, start, n_hyp));
    Ok(Resegmentation {
        segments,
        edits: optimum as usize,
    })
}

fn encode<'a>(vocab: &mut HashMap<&'a str, u32>, s: &'a TokenSentence) -> Vec<u32> {
    s.tokens()
        .iter()
        .map(|t| {
            let next = vocab.len() as u32;
            *vocab.entry(t.as_str()).or_insert(next)
        })
        .collect()
}

fn slice_sentence(s: &TokenSentence, from: usize, to: usize) -> TokenSentence {
    TokenSentence::new(s.tokens()[from..to].iter().cloned()).expect("tokens already valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(line: &str) -> TokenSentence {
        TokenSentence::from_line(line)
    }

    fn corpus(lines: &[&str]) -> Vec<TokenSentence> {
        lines.iter().map(|l| s(l)).collect()
    }

    #[test]
    fn bleu_identity() {
        let c = corpus(&["a b c d e", "x y z w"]);
        assert_eq!(bleu(&c, &c).unwrap(), 1.0);
        let short = corpus(&["a", "b c"]);
        assert_eq!(bleu(&short, &short).unwrap(), 1.0);
    }

    #[test]
    fn bleu_brevity_fixture() {
        // all precisions are 1; BP = exp(1 - 8/4) = 1/e
        let got = bleu(&corpus(&["a b c d"]), &corpus(&["a b c d e f g h"])).unwrap();
        assert!((got - 0.367_879_441_171_442_3).abs() < 1e-4);
    }

    #[test]
    fn bleu_zero_and_errors() {
        assert_eq!(bleu(&corpus(&["a b"]), &corpus(&["c d"])).unwrap(), 0.0);
        assert!(bleu(&corpus(&["a"]), &corpus(&["a", "b"])).is_err());
        assert!(bleu(&[], &[]).is_err());
        assert_eq!(bleu(&[TokenSentence::empty()], &corpus(&["a"])).unwrap(), 0.0);
    }

    #[test]
    fn bleu_smoothing_rescues_missing_high_orders() {
        let h = corpus(&["a b x d e"]);
        let r = corpus(&["a b c d e"]);
        // no 3- or 4-gram matches
        assert_eq!(bleu(&h, &r).unwrap(), 0.0);
        let smoothed = bleu_with(&h, &r, BleuOptions { smooth: true }).unwrap();
        assert!(smoothed > 0.0 && smoothed < 1.0);
    }

    #[test]
    fn gleu_examples() {
        assert_eq!(gleu(&s("a b c"), &s("a b c")).unwrap(), 1.0);
        // hyp 18 n-grams, ref 6, 6 matched: min(1/3, 1)
        let g = gleu(&s("yo animo a todo el mundo"), &s("yo animo a")).unwrap();
        assert!((g - 1.0 / 3.0).abs() < 1e-6);
        assert_eq!(gleu(&s("a"), &s("b")).unwrap(), 0.0);
        assert!(gleu(&TokenSentence::empty(), &s("b")).is_err());
    }

    #[test]
    fn corpus_gleu_averages() {
        let h = vec![s("a"), TokenSentence::empty()];
        let r = corpus(&["a", "b"]);
        assert_eq!(corpus_gleu(&h, &r).unwrap(), 0.5);
    }

    #[test]
    fn corrected_words_examples() {
        assert_eq!(
            corrected_words(&s("yo animo a todo el mundo"), &s("yo animo a todos ustedes")),
            3
        );
        assert_eq!(corrected_words(&s("yo"), &s("yo animo a")), 0);
        assert_eq!(corrected_words(&s("a b c"), &TokenSentence::empty()), 3);
    }

    #[test]
    fn correction_report_examples() {
        let r = correction_report(&corpus(&["yo", "yo animo a todo el mundo", "yo animo a todos ustedes"]));
        assert_eq!(
            r,
            CorrectionReport {
                words_updated: 3,
                messages_updated: 1,
                updates_total: 2
            }
        );
        let r = correction_report(&corpus(&["a b", "c", "c d"]));
        assert_eq!((r.words_updated, r.messages_updated), (2, 1));
        let r = correction_report(&corpus(&["a", "a b", "a b c"]));
        assert_eq!((r.words_updated, r.messages_updated, r.updates_total), (0, 0, 2));
        assert_eq!(correction_report(&corpus(&["a"])), CorrectionReport::default());
    }

    #[test]
    fn wer_examples() {
        assert_eq!(wer(&s("a b"), &s("a b")).unwrap(), (0, 0.0));
        let (e, r) = wer(&s("a x c"), &s("a b c")).unwrap();
        assert_eq!(e, 1);
        assert!((r - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(wer(&TokenSentence::empty(), &s("a b")).unwrap(), (2, 1.0));
        assert!(wer(&s("a"), &TokenSentence::empty()).is_err());
    }

    #[test]
    fn resegment_examples() {
        let refs = corpus(&["a b", "c", "d e f"]);
        let out = resegment(&s("a b c d e f"), &refs).unwrap();
        assert_eq!(out.segments, refs);
        assert_eq!(out.edits, 0);

        let out = resegment(&s("a b c d"), &corpus(&["a b", "x d"])).unwrap();
        assert_eq!(out.segments, corpus(&["a b", "c d"]));
        assert_eq!(out.edits, 1);

        let out = resegment(&s("p q r"), &corpus(&["z"])).unwrap();
        assert_eq!(out.segments, corpus(&["p q r"]));

        assert!(resegment(&s("a"), &[]).is_err());
    }

    #[test]
    fn resegment_empty_stream() {
        let out = resegment(&TokenSentence::empty(), &corpus(&["a", "b c"])).unwrap();
        assert_eq!(out.segments, vec![TokenSentence::empty(); 2]);
        assert_eq!(out.edits, 3);
    }

    #[test]
    fn resegment_prefers_earliest_boundary() {
        // "b" costs one edit in either segment
        let out = resegment(&s("a b c"), &corpus(&["a", "c"])).unwrap();
        assert_eq!(out.segments, corpus(&["a", "b c"]));
        assert_eq!(out.edits, 1);
    }

    fn words() -> impl Strategy<Value = TokenSentence> {
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]), 0..8)
            .prop_map(|v| TokenSentence::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn scores_bounded(h in words(), r in words()) {
            if !h.is_empty() && !r.is_empty() {
                let g = gleu(&h, &r).unwrap();
                prop_assert!((0.0..=1.0).contains(&g));
                let same = NGramProfile::new(&h) == NGramProfile::new(&r);
                prop_assert_eq!(g == 1.0, same);
                prop_assert_eq!(gleu(&h, &h).unwrap(), 1.0);
            }
            let b = bleu(&[h.clone()], &[r.clone()]).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&b));
        }

        #[test]
        fn corrected_words_properties(p in words(), n in words()) {
            let c = corrected_words(&p, &n);
            prop_assert!(c <= p.len());
            prop_assert_eq!(c == 0, p.is_prefix_of(&n));
        }

        #[test]
        fn edit_distance_is_a_metric(a in words(), b in words(), c in words()) {
            let d = |x: &TokenSentence, y: &TokenSentence| edit_distance(x.tokens(), y.tokens());
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert_eq!(d(&a, &a), 0);
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        }
    }
}
