//! Multi-task training set construction: the full-sentence corpus joined with
//! an equally sized random sample of the partial-sentence corpus.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::partial::PartialCorpus;
use crate::text::{ParallelCorpus, TokenSentence};

/// The one generator used for every seeded operation.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOrigin {
    Full,
    Partial,
}

/// One line pair of a training file. The target may be empty for partial rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingRow {
    pub source: TokenSentence,
    pub target: TokenSentence,
    pub origin: RowOrigin,
}

impl TrainingRow {
    pub fn full(source: TokenSentence, target: TokenSentence) -> Self {
        TrainingRow {
            source,
            target,
            origin: RowOrigin::Full,
        }
    }

    pub fn partial(source: TokenSentence, target: TokenSentence) -> Self {
        TrainingRow {
            source,
            target,
            origin: RowOrigin::Partial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixManifest {
    pub full_count: usize,
    pub partial_total: usize,
    pub partial_sampled: usize,
    pub seed: u64,
}

impl MixManifest {
    pub fn output_len(&self) -> usize {
        self.full_count + self.partial_sampled
    }

    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        format!(
            "full_count: {}\npartial_total: {}\npartial_sampled: {}\nseed: {}\n",
            self.full_count, self.partial_total, self.partial_sampled, self.seed
        )
    }
}

/// Uniform sample of `min(n, len)` items without replacement, kept in their
/// original relative order.
pub fn sample_in_order<T: Clone>(items: &[T], n: usize, rng: &mut SeededRng) -> Vec<T> {
    if n >= items.len() {
        return items.to_vec();
    }
    let mut picked = index::sample(rng, items.len(), n).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|k| items[k].clone()).collect()
}

pub fn subsample(partial: &PartialCorpus, n: usize, seed: u64) -> PartialCorpus {
    PartialCorpus {
        items: sample_in_order(&partial.items, n, &mut seeded_rng(seed)),
    }
}

/// Joins `full` with a sample of `partial` of the same size and shuffles the
/// result. Sampling and shuffling draw from one generator seeded by `seed`.
pub fn mix_rows(full: Vec<TrainingRow>, partial: Vec<TrainingRow>, seed: u64) -> (Vec<TrainingRow>, MixManifest) {
    let mut rng = seeded_rng(seed);
    let sampled = sample_in_order(&partial, full.len(), &mut rng);
    let manifest = MixManifest {
        full_count: full.len(),
        partial_total: partial.len(),
        partial_sampled: sampled.len(),
        seed,
    };
    let mut rows = full;
    rows.extend(sampled);
    rows.shuffle(&mut rng);
    (rows, manifest)
}

pub fn mix(full: &ParallelCorpus, partial: &PartialCorpus, seed: u64) -> (Vec<TrainingRow>, MixManifest) {
    let full_rows = full
        .iter()
        .map(|p| TrainingRow::full(p.source.clone(), p.target.clone()))
        .collect();
    let partial_rows = partial
        .iter()
        .map(|p| TrainingRow::partial(p.source_prefix.clone(), p.target_prefix.clone()))
        .collect();
    mix_rows(full_rows, partial_rows, seed)
}
