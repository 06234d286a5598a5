//! Synthetic inputs for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use retrans_core::{ParallelCorpus, TokenSentence};

fn sentence(rng: &mut ChaCha8Rng, prefix: char, vocab: usize, len: usize) -> TokenSentence {
    TokenSentence::new((0..len).map(|_| format!("{prefix}{}", rng.gen_range(0..vocab)))).unwrap()
}

/// `pairs` sentence pairs of 5..=`max_len` tokens drawn from `vocab` words per side.
pub fn corpus(pairs: usize, vocab: usize, max_len: usize, seed: u64) -> ParallelCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<_> = (0..pairs)
        .map(|_| {
            let src_len = rng.gen_range(5..=max_len);
            let tgt_len = rng.gen_range(5..=max_len);
            (
                sentence(&mut rng, 's', vocab, src_len),
                sentence(&mut rng, 't', vocab, tgt_len),
            )
        })
        .collect();
    ParallelCorpus::from_sentences(rows).unwrap()
}

/// Random hypothesis/reference sentences over a small shared vocabulary.
pub fn sentences(count: usize, vocab: usize, max_len: usize, seed: u64) -> Vec<TokenSentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            sentence(&mut rng, 'w', vocab, len)
        })
        .collect()
}
