//! Cross-module properties checked against independent brute-force oracles.

use proptest::prelude::*;
use retrans_core::aligner::{Model1Trainer, DEFAULT_EPSILON};
use retrans_core::metrics::edit_distance;
use retrans_core::session::total_corrections;
use retrans_core::*;

fn sentence(vocab: &'static [&'static str], max_len: usize) -> impl Strategy<Value = TokenSentence> {
    prop::collection::vec(prop::sample::select(vocab), 1..=max_len)
        .prop_map(|v| TokenSentence::new(v).unwrap())
}

fn toy_corpus() -> impl Strategy<Value = ParallelCorpus> {
    const SRC: &[&str] = &["a", "b", "c", "d", "e"];
    const TGT: &[&str] = &["v", "w", "x", "y", "z"];
    prop::collection::vec((sentence(SRC, 5), sentence(TGT, 5)), 1..8)
        .prop_map(|rows| ParallelCorpus::from_sentences(rows).unwrap())
}

/// Exhaustive split search: every non-decreasing boundary vector, in
/// lexicographic order, keeping the first minimum.
fn brute_resegment(stream: &TokenSentence, refs: &[TokenSentence]) -> (Vec<usize>, usize) {
    fn walk(
        n: usize,
        k: usize,
        from: usize,
        acc: &mut Vec<usize>,
        cost: &dyn Fn(&[usize]) -> usize,
        best: &mut Option<(Vec<usize>, usize)>,
    ) {
        if acc.len() == k {
            let c = cost(acc);
            if best.as_ref().map_or(true, |(_, b)| c < *b) {
                *best = Some((acc.clone(), c));
            }
            return;
        }
        for b in from..=n {
            acc.push(b);
            walk(n, k, b, acc, cost, best);
            acc.pop();
        }
    }
    let toks = stream.tokens();
    let cost = |bounds: &[usize]| {
        let mut edges = vec![0];
        edges.extend_from_slice(bounds);
        edges.push(toks.len());
        refs.iter()
            .enumerate()
            .map(|(k, r)| edit_distance(&toks[edges[k]..edges[k + 1]], r.tokens()))
            .sum()
    };
    let mut best = None;
    walk(toks.len(), refs.len() - 1, 0, &mut Vec::new(), &cost, &mut best);
    best.unwrap()
}

fn boundaries(segments: &[TokenSentence]) -> Vec<usize> {
    let mut acc = 0;
    segments[..segments.len() - 1]
        .iter()
        .map(|s| {
            acc += s.len();
            acc
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn em_likelihood_never_decreases(corpus in toy_corpus()) {
        let mut trainer = Model1Trainer::new(&corpus, DEFAULT_EPSILON).unwrap();
        let mut last = trainer.log_likelihood();
        for _ in 0..6 {
            trainer.step();
            let ll = trainer.log_likelihood();
            prop_assert!(ll >= last - 1e-9 * last.abs().max(1.0), "{} -> {}", last, ll);
            for s in trainer.table().row_sums() {
                prop_assert!((s - 1.0).abs() < 1e-6);
            }
            last = ll;
        }
    }

    #[test]
    fn viterbi_links_each_target_at_most_once(corpus in toy_corpus()) {
        let table = train_model1(&corpus, 4, DEFAULT_EPSILON).unwrap();
        for a in align_corpus(&table, &corpus) {
            let mut seen = std::collections::HashSet::new();
            for &(_, j) in a.links() {
                prop_assert!(seen.insert(j));
            }
        }
    }

    #[test]
    fn resegment_matches_exhaustive_search(
        stream in prop::collection::vec(prop::sample::select(&["a", "b", "c"][..]), 0..=12),
        refs in prop::collection::vec(sentence(&["a", "b", "c", "d"], 4), 1..=4),
    ) {
        let stream = TokenSentence::new(stream).unwrap();
        let got = resegment(&stream, &refs).unwrap();
        let (bounds, cost) = brute_resegment(&stream, &refs);
        prop_assert_eq!(got.edits, cost);
        prop_assert_eq!(boundaries(&got.segments), bounds);
        let joined = got.segments.iter().fold(TokenSentence::empty(), |a, s| a.concat(s));
        prop_assert_eq!(joined, stream);
    }

    #[test]
    fn resegment_beats_proportional_split(
        stream in prop::collection::vec(prop::sample::select(&["a", "b", "c"][..]), 0..30),
        refs in prop::collection::vec(sentence(&["a", "b", "c", "d"], 6), 1..6),
    ) {
        let stream = TokenSentence::new(stream).unwrap();
        let got = resegment(&stream, &refs).unwrap();
        let total_ref: usize = refs.iter().map(TokenSentence::len).sum();
        let mut start = 0;
        let mut acc_ref = 0;
        let mut naive = 0;
        for r in &refs {
            acc_ref += r.len();
            let end = stream.len() * acc_ref / total_ref;
            naive += edit_distance(&stream.tokens()[start..end], r.tokens());
            start = end;
        }
        prop_assert!(got.edits <= naive);
    }

    #[test]
    fn partial_targets_are_nested(
        corpus in toy_corpus(),
        raw_links in prop::collection::vec((0usize..5, 0usize..5), 0..12),
    ) {
        let alignments: Vec<Alignment> = corpus
            .iter()
            .map(|p| {
                let (i_max, j_max) = (p.source.len(), p.target.len());
                Alignment::new(i_max, j_max, raw_links.iter().map(|&(i, j)| (i % i_max + 1, j % j_max + 1))).unwrap()
            })
            .collect();
        for method in [PrefixMethod::Ratio, PrefixMethod::Alignment] {
            let out = generate_partial(&corpus, method, Some(&alignments), 1).unwrap();
            for pair in corpus.iter() {
                let rows: Vec<&PartialPair> = out.iter().filter(|p| p.parent_id == pair.id).collect();
                prop_assert_eq!(rows.len(), pair.source.len());
                for w in rows.windows(2) {
                    prop_assert!(w[0].i < w[1].i);
                    prop_assert!(w[0].target_prefix.is_prefix_of(&w[1].target_prefix));
                }
                prop_assert_eq!(&rows.last().unwrap().target_prefix, &pair.target);
            }
        }
    }

    #[test]
    fn replay_is_deterministic(words in prop::collection::vec(prop::sample::select(&["a", "b", "c"][..]), 1..10)) {
        let events: Vec<UpdateEvent> = words.iter().map(|w| UpdateEvent::extend(0, *w)).collect();
        let t = DictionaryTranslator::new([("a", "x y"), ("b", "")]);
        let first = run_session(&events, &t).unwrap();
        prop_assert_eq!(first[0].steps.len(), events.len());
        prop_assert_eq!(total_corrections(&first).words_updated, 0);
        prop_assert_eq!(first[0].to_jsonl(), run_session(&events, &t).unwrap()[0].to_jsonl());
    }
}
