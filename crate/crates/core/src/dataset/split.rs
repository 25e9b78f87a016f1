use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::labeling::LabeledSequence;

use super::DatasetError;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<LabeledSequence>,
    pub dev: Vec<LabeledSequence>,
    pub test: Vec<LabeledSequence>,
}

impl Splits {
    pub fn parts(&self) -> [&[LabeledSequence]; 3] {
        [&self.train, &self.dev, &self.test]
    }
}

/// Partitions sequences so that each source lands in exactly one split.
///
/// Sources are shuffled by `seed`, then each goes to the split furthest below its
/// target sequence count (lower index on ties). When the remaining sources are just
/// enough to give every still-empty nonzero split one source, they are handed out
/// in split order. Input order is kept within each split.
pub fn split_by_source(
    dataset: Vec<LabeledSequence>,
    fractions: [f64; 3],
    seed: u64,
) -> Result<Splits, DatasetError> {
    let mut sizes: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &dataset {
        *sizes.entry(s.provenance.source_id.as_str()).or_default() += 1;
    }
    let wanted: Vec<usize> = (0..3).filter(|&k| fractions[k] > 0.0).collect();
    if sizes.len() < wanted.len() {
        return Err(DatasetError::TooFewSources {
            sources: sizes.len(),
            splits: wanted.len(),
        });
    }
    let mut sources: Vec<(&str, usize)> = sizes.into_iter().collect();
    sources.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let total = dataset.len() as f64;
    let target: Vec<f64> = fractions.iter().map(|f| f * total).collect();
    let mut filled = [0usize; 3];
    let mut has_source = [false; 3];
    let mut assignment: HashMap<String, usize> = HashMap::new();
    for (pos, &(src, size)) in sources.iter().enumerate() {
        let remaining = sources.len() - pos;
        let empty: Vec<usize> = wanted.iter().copied().filter(|&k| !has_source[k]).collect();
        let k = if remaining == empty.len() {
            empty[0]
        } else {
            let mut best = wanted[0];
            for &k in &wanted[1..] {
                if target[k] - filled[k] as f64 > target[best] - filled[best] as f64 {
                    best = k;
                }
            }
            best
        };
        filled[k] += size;
        has_source[k] = true;
        assignment.insert(src.to_string(), k);
    }

    let mut out = Splits::default();
    for s in dataset {
        match assignment[&s.provenance.source_id] {
            0 => out.train.push(s),
            1 => out.dev.push(s),
            _ => out.test.push(s),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::Provenance;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn seqs(sources: &[(&str, usize)]) -> Vec<LabeledSequence> {
        sources
            .iter()
            .flat_map(|&(src, n)| {
                (0..n).map(move |i| {
                    LabeledSequence::new(
                        vec!["x".into()],
                        vec!["O".into()],
                        Provenance {
                            cite_key: format!("{src}-{i}"),
                            source_id: src.into(),
                            ..Provenance::default()
                        },
                    )
                    .unwrap()
                })
            })
            .collect()
    }

    fn sources_of(part: &[LabeledSequence]) -> HashSet<String> {
        part.iter().map(|s| s.provenance.source_id.clone()).collect()
    }

    #[test]
    fn two_sources_half_half() {
        for seed in 0..10 {
            let s = split_by_source(seqs(&[("a", 3), ("b", 5)]), [0.5, 0.5, 0.0], seed).unwrap();
            assert_eq!(sources_of(&s.train).len(), 1);
            assert_eq!(sources_of(&s.dev).len(), 1);
            assert!(s.test.is_empty());
        }
    }

    #[test]
    fn single_source_all_train() {
        let s = split_by_source(seqs(&[("a", 4)]), [1.0, 0.0, 0.0], 0).unwrap();
        assert_eq!(s.train.len(), 4);
        assert!(s.dev.is_empty() && s.test.is_empty());
    }

    #[test]
    fn ten_equal_sources() {
        let names: Vec<String> = (0..10).map(|i| format!("s{i}")).collect();
        let spec: Vec<(&str, usize)> = names.iter().map(|n| (n.as_str(), 7)).collect();
        for seed in 0..20 {
            let s = split_by_source(seqs(&spec), [0.8, 0.1, 0.1], seed).unwrap();
            // Walking the greedy rule by hand: train takes eight sources, then dev and test one each.
            assert_eq!([s.train.len(), s.dev.len(), s.test.len()], [56, 7, 7]);
        }
    }

    #[test]
    fn too_few_sources() {
        assert!(matches!(
            split_by_source(seqs(&[("a", 4)]), [0.8, 0.1, 0.1], 0),
            Err(DatasetError::TooFewSources { sources: 1, splits: 3 })
        ));
    }

    proptest! {
        #[test]
        fn sources_are_disjoint(sizes in prop::collection::vec(1usize..20, 3..15), seed in any::<u64>()) {
            let names: Vec<String> = (0..sizes.len()).map(|i| format!("s{i}")).collect();
            let spec: Vec<(&str, usize)> = names.iter().map(String::as_str).zip(sizes.iter().copied()).collect();
            let total: usize = sizes.iter().sum();
            let s = split_by_source(seqs(&spec), [0.7, 0.15, 0.15], seed).unwrap();
            let (a, b, c) = (sources_of(&s.train), sources_of(&s.dev), sources_of(&s.test));
            prop_assert!(a.is_disjoint(&b) && a.is_disjoint(&c) && b.is_disjoint(&c));
            prop_assert!(!a.is_empty() && !b.is_empty() && !c.is_empty());
            prop_assert_eq!(s.train.len() + s.dev.len() + s.test.len(), total);
        }
    }
}
