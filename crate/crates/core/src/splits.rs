//! Out-of-vocabulary train/validation/test partitions over WiC datasets.
//!
//! Every split combines a dictionary-derived WiC dataset with a manually
//! annotated one. They differ in how target lemmas of the test portion may
//! reappear in training:
//!
//! * pure-OOV: never;
//! * partial-OOV: only through the dictionary-derived portion;
//! * non-OOV: always.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::forge::{sample_without_replacement, WicPair};
use crate::text::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitType {
    PureOov,
    PartialOov,
    NonOov,
}

impl SplitType {
    /// Short label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            SplitType::PureOov => "Pure-OOV",
            SplitType::PartialOov => "Part-OOV",
            SplitType::NonOov => "Non-OOV",
        }
    }
}

impl std::str::FromStr for SplitType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pure-oov" => Ok(Self::PureOov),
            "partial-oov" | "part-oov" => Ok(Self::PartialOov),
            "non-oov" => Ok(Self::NonOov),
            other => Err(format!("unknown split type {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaSets {
    pub train: BTreeSet<String>,
    pub validation: BTreeSet<String>,
    pub test: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    #[serde(rename = "type")]
    pub split_type: SplitType,
    pub seed: u64,
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
    pub lemmas: LemmaSets,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error("{0} dataset is empty")]
    EmptyInput(&'static str),
    #[error("no training pairs remain after excluding test lemmas")]
    EmptyTrain,
    #[error("need at least two annotated lemmas, found {0}")]
    TooFewLemmas(usize),
    #[error("pair id {0:?} occurs more than once across the inputs")]
    DuplicateId(String),
    #[error("validation fraction must lie in (0, 1), got {0}")]
    FractionOutOfRange(f64),
    #[error("manifest already has a validation partition")]
    ValidationExists,
    #[error("manifest references unknown pair id {0:?}")]
    UnknownId(String),
}

/// The dictionary-derived and the manually annotated WiC datasets.
#[derive(Debug, Clone, Copy)]
pub struct SplitInputs<'a> {
    pub sskj: &'a [WicPair],
    pub elexis: &'a [WicPair],
}

impl<'a> SplitInputs<'a> {
    pub fn new(sskj: &'a [WicPair], elexis: &'a [WicPair]) -> Self {
        Self { sskj, elexis }
    }

    fn check(&self) -> Result<HashMap<&'a str, &'a str>, SplitError> {
        if self.sskj.is_empty() {
            return Err(SplitError::EmptyInput("dictionary WiC"));
        }
        if self.elexis.is_empty() {
            return Err(SplitError::EmptyInput("annotated WiC"));
        }
        let mut lemma_of = HashMap::with_capacity(self.sskj.len() + self.elexis.len());
        for p in self.sskj.iter().chain(self.elexis) {
            if lemma_of.insert(p.id.as_str(), p.lemma.as_str()).is_some() {
                return Err(SplitError::DuplicateId(p.id.clone()));
            }
        }
        Ok(lemma_of)
    }
}

fn lemma_set(ids: &[String], lemma_of: &HashMap<&str, &str>) -> Result<BTreeSet<String>, SplitError> {
    ids.iter()
        .map(|id| {
            lemma_of
                .get(id.as_str())
                .map(|l| l.to_string())
                .ok_or_else(|| SplitError::UnknownId(id.clone()))
        })
        .collect()
}

fn assemble(
    split_type: SplitType,
    seed: u64,
    train: Vec<String>,
    validation: Vec<String>,
    test: Vec<String>,
    lemma_of: &HashMap<&str, &str>,
) -> Result<SplitManifest, SplitError> {
    let lemmas = LemmaSets {
        train: lemma_set(&train, lemma_of)?,
        validation: lemma_set(&validation, lemma_of)?,
        test: lemma_set(&test, lemma_of)?,
    };
    Ok(SplitManifest {
        split_type,
        seed,
        train,
        validation,
        test,
        lemmas,
    })
}

fn ids(pairs: &[WicPair]) -> Vec<String> {
    pairs.iter().map(|p| p.id.clone()).collect()
}

/// Test on all annotated pairs; train on dictionary pairs of other lemmas.
pub fn split_pure_oov(inputs: &SplitInputs<'_>, seed: u64) -> Result<SplitManifest, SplitError> {
    let lemma_of = inputs.check()?;
    let test_lemmas: HashSet<&str> = inputs.elexis.iter().map(|p| p.lemma.as_str()).collect();
    let train: Vec<String> = inputs
        .sskj
        .iter()
        .filter(|p| !test_lemmas.contains(p.lemma.as_str()))
        .map(|p| p.id.clone())
        .collect();
    if train.is_empty() {
        return Err(SplitError::EmptyTrain);
    }
    assemble(SplitType::PureOov, seed, train, Vec::new(), ids(inputs.elexis), &lemma_of)
}

/// Divides annotated lemmas into two sides of near-equal pair count. Lemmas
/// are shuffled, stably sorted by descending pair count, then each goes to
/// the side with the smaller running total (ties to the first side).
pub fn partition_lemmas_by_count(counts: &BTreeMap<String, usize>, seed: u64) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut lemmas: Vec<(&String, usize)> = counts.iter().map(|(l, c)| (l, *c)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "partial-oov"));
    lemmas.shuffle(&mut rng);
    lemmas.sort_by_key(|l| std::cmp::Reverse(l.1));
    let (mut a, mut b) = (BTreeSet::new(), BTreeSet::new());
    let (mut total_a, mut total_b) = (0usize, 0usize);
    for (lemma, count) in lemmas {
        if total_a <= total_b {
            a.insert(lemma.clone());
            total_a += count;
        } else {
            b.insert(lemma.clone());
            total_b += count;
        }
    }
    (a, b)
}

/// Train on dictionary pairs plus one lemma-disjoint half of the annotated
/// pairs, test on the other half.
pub fn split_partial_oov(inputs: &SplitInputs<'_>, seed: u64) -> Result<SplitManifest, SplitError> {
    let lemma_of = inputs.check()?;
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for p in inputs.elexis {
        *counts.entry(p.lemma.clone()).or_default() += 1;
    }
    if counts.len() < 2 {
        return Err(SplitError::TooFewLemmas(counts.len()));
    }
    let (train_side, _) = partition_lemmas_by_count(&counts, seed);
    let mut train = ids(inputs.sskj);
    let mut test = Vec::new();
    for p in inputs.elexis {
        if train_side.contains(&p.lemma) {
            train.push(p.id.clone());
        } else {
            test.push(p.id.clone());
        }
    }
    assemble(SplitType::PartialOov, seed, train, Vec::new(), test, &lemma_of)
}

/// Every annotated lemma's pairs are shuffled and halved between train and
/// test; odd counts give the extra pair to train.
pub fn split_non_oov(inputs: &SplitInputs<'_>, seed: u64) -> Result<SplitManifest, SplitError> {
    let lemma_of = inputs.check()?;
    let mut by_lemma: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for p in inputs.elexis {
        by_lemma.entry(&p.lemma).or_default().push(&p.id);
    }
    let mut test_ids: HashSet<&str> = HashSet::new();
    for (lemma, mut members) in by_lemma {
        if members.len() < 2 {
            log::info!("lemma {lemma:?} has a single annotated pair; assigning it to train");
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("non-oov\u{1f}{lemma}")));
        members.shuffle(&mut rng);
        let n_train = members.len().div_ceil(2);
        test_ids.extend(&members[n_train..]);
    }
    let mut train = ids(inputs.sskj);
    let mut test = Vec::new();
    for p in inputs.elexis {
        if test_ids.contains(p.id.as_str()) {
            test.push(p.id.clone());
        } else {
            train.push(p.id.clone());
        }
    }
    assemble(SplitType::NonOov, seed, train, Vec::new(), test, &lemma_of)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoldoutConfig {
    pub fraction: f64,
    pub seed: u64,
    /// Take whole lemmas so validation shares no lemma with test or with
    /// the annotated part of train.
    pub lemma_disjoint: bool,
}

impl Default for HoldoutConfig {
    fn default() -> Self {
        Self {
            fraction: 0.10,
            seed: 0,
            lemma_disjoint: false,
        }
    }
}

/// Largest-remainder apportionment of `total` over `counts` proportional to
/// `fraction`, never exceeding a group's size.
fn apportion(counts: &BTreeMap<&str, usize>, fraction: f64, total: usize) -> BTreeMap<String, usize> {
    let mut quotas: BTreeMap<String, usize> = BTreeMap::new();
    let mut remainders: Vec<(f64, &str)> = Vec::new();
    let mut assigned = 0;
    for (&lemma, &n) in counts {
        let exact = fraction * n as f64;
        let base = ((exact + 1e-9).floor() as usize).min(n);
        quotas.insert(lemma.to_string(), base);
        assigned += base;
        remainders.push((exact - base as f64, lemma));
    }
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    while assigned < total {
        let before = assigned;
        for (_, lemma) in &remainders {
            if assigned == total {
                break;
            }
            let q = quotas.get_mut(*lemma).expect("lemma present");
            if *q < counts[lemma] {
                *q += 1;
                assigned += 1;
            }
        }
        if assigned == before {
            break;
        }
    }
    quotas
}

/// For every test lemma, the first train id of that lemma, so the lemma
/// keeps training support after a hold-out.
fn last_train_support<'a>(manifest: &'a SplitManifest, lemma_of: &HashMap<&str, &str>) -> HashSet<&'a str> {
    let test_lemmas: HashSet<&str> = manifest.test.iter().map(|id| lemma_of[id.as_str()]).collect();
    let mut covered: HashSet<&str> = HashSet::new();
    let mut keep = HashSet::new();
    for id in &manifest.train {
        let lemma = lemma_of[id.as_str()];
        if test_lemmas.contains(lemma) && covered.insert(lemma) {
            keep.insert(id.as_str());
        }
    }
    keep
}

/// Moves `ceil(fraction * n)` annotated pairs from train/test into a new
/// validation partition, sampled per lemma in proportion to its size. In
/// Non-OOV splits one train pair of every test lemma stays in train.
pub fn holdout_validation(
    manifest: &SplitManifest,
    inputs: &SplitInputs<'_>,
    config: &HoldoutConfig,
) -> Result<SplitManifest, SplitError> {
    if !(config.fraction > 0.0 && config.fraction < 1.0) {
        return Err(SplitError::FractionOutOfRange(config.fraction));
    }
    if !manifest.validation.is_empty() {
        return Err(SplitError::ValidationExists);
    }
    let lemma_of = inputs.check()?;
    let in_use: HashSet<&str> = manifest.train.iter().chain(&manifest.test).map(String::as_str).collect();
    let candidates: Vec<&WicPair> = inputs.elexis.iter().filter(|p| in_use.contains(p.id.as_str())).collect();
    let total = ((config.fraction * candidates.len() as f64) - 1e-9).ceil().max(0.0) as usize;
    let protected = if manifest.split_type == SplitType::NonOov && !config.lemma_disjoint {
        last_train_support(manifest, &lemma_of)
    } else {
        HashSet::new()
    };

    let mut by_lemma: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for p in candidates.iter().filter(|p| !protected.contains(p.id.as_str())) {
        by_lemma.entry(&p.lemma).or_default().push(&p.id);
    }
    let mut chosen: HashSet<&str> = HashSet::new();
    if config.lemma_disjoint {
        let mut lemmas: Vec<&str> = by_lemma.keys().copied().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "holdout-lemmas"));
        lemmas.shuffle(&mut rng);
        for lemma in lemmas {
            if chosen.len() >= total {
                break;
            }
            chosen.extend(by_lemma[lemma].iter().copied());
        }
    } else {
        let counts: BTreeMap<&str, usize> = by_lemma.iter().map(|(l, v)| (*l, v.len())).collect();
        let quotas = apportion(&counts, config.fraction, total);
        for (lemma, members) in &by_lemma {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &format!("holdout\u{1f}{lemma}")));
            chosen.extend(sample_without_replacement(&mut rng, members.clone(), quotas[*lemma]));
        }
    }

    let keep = |list: &[String]| -> Vec<String> { list.iter().filter(|id| !chosen.contains(id.as_str())).cloned().collect() };
    let train = keep(&manifest.train);
    let test = keep(&manifest.test);
    // validation follows dataset order
    let validation = candidates
        .iter()
        .filter(|p| chosen.contains(p.id.as_str()))
        .map(|p| p.id.clone())
        .collect();
    assemble(manifest.split_type, manifest.seed, train, validation, test, &lemma_of)
}

/// Builds the requested split.
pub fn split(split_type: SplitType, inputs: &SplitInputs<'_>, seed: u64) -> Result<SplitManifest, SplitError> {
    match split_type {
        SplitType::PureOov => split_pure_oov(inputs, seed),
        SplitType::PartialOov => split_partial_oov(inputs, seed),
        SplitType::NonOov => split_non_oov(inputs, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::Provenance;

    fn pair(id: &str, lemma: &str) -> WicPair {
        WicPair {
            id: id.into(),
            lemma: lemma.into(),
            s1: format!("{lemma} a"),
            s1_start: 0,
            s1_end: lemma.len(),
            s2: format!("{lemma} b"),
            s2_start: 0,
            s2_end: lemma.len(),
            label: 0,
            provenance: Provenance {
                src: vec!["x".into()],
                ex: ["a".into(), "b".into()],
            },
        }
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn pure_oov_excludes_test_lemmas() {
        let sskj = vec![pair("s1", "a"), pair("s2", "b"), pair("s3", "c")];
        let elexis = vec![pair("e1", "b")];
        let m = split_pure_oov(&SplitInputs::new(&sskj, &elexis), 1).unwrap();
        assert_eq!(m.lemmas.train, set(&["a", "c"]));
        assert_eq!(m.lemmas.test, set(&["b"]));
        assert_eq!(m.test, ["e1"]);

        let disjoint = vec![pair("e1", "z")];
        let m = split_pure_oov(&SplitInputs::new(&sskj, &disjoint), 1).unwrap();
        assert_eq!(m.train, ["s1", "s2", "s3"]);

        let only_b = vec![pair("s1", "b")];
        assert_eq!(split_pure_oov(&SplitInputs::new(&only_b, &elexis), 1), Err(SplitError::EmptyTrain));
    }

    #[test]
    fn partial_oov_two_lemmas() {
        let sskj = vec![pair("s1", "a")];
        let elexis = vec![pair("e1", "a"), pair("e2", "b")];
        let m = split_partial_oov(&SplitInputs::new(&sskj, &elexis), 5).unwrap();
        assert_eq!(m.test.len(), 1);
        assert_eq!(m.train.len(), 2);
        let single = vec![pair("e1", "a"), pair("e2", "a")];
        assert_eq!(
            split_partial_oov(&SplitInputs::new(&sskj, &single), 5),
            Err(SplitError::TooFewLemmas(1))
        );
    }

    #[test]
    fn greedy_partition_matches_best_two_way_split() {
        let counts: BTreeMap<String, usize> = [("a", 10), ("b", 1), ("c", 9)].iter().map(|(l, c)| (l.to_string(), *c)).collect();
        for seed in 0..5 {
            let (x, y) = partition_lemmas_by_count(&counts, seed);
            assert_eq!(x, set(&["a"]));
            assert_eq!(y, set(&["b", "c"]));
        }
        // brute force over all 2-partitions
        let lemmas: Vec<_> = counts.iter().collect();
        let best = (1..(1u32 << lemmas.len()) - 1)
            .map(|mask| {
                let a: usize = lemmas.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, (_, c))| **c).sum();
                let total: usize = counts.values().sum();
                (total as i64 - 2 * a as i64).unsigned_abs()
            })
            .min()
            .unwrap();
        assert_eq!(best, 0);
    }

    #[test]
    fn non_oov_halves_each_lemma() {
        let sskj = vec![pair("s1", "q")];
        let elexis: Vec<_> = (0..4)
            .map(|i| pair(&format!("a{i}"), "a"))
            .chain((0..3).map(|i| pair(&format!("b{i}"), "b")))
            .chain([pair("c0", "c")])
            .collect();
        let m = split_non_oov(&SplitInputs::new(&sskj, &elexis), 9).unwrap();
        let count = |list: &[String], p: &str| list.iter().filter(|id| id.starts_with(p)).count();
        assert_eq!((count(&m.train, "a"), count(&m.test, "a")), (2, 2));
        assert_eq!((count(&m.train, "b"), count(&m.test, "b")), (2, 1));
        assert_eq!((count(&m.train, "c"), count(&m.test, "c")), (1, 0));
        assert!(m.lemmas.test.is_subset(&m.lemmas.train));
    }

    #[test]
    fn holdout_takes_ten_percent() {
        let sskj = vec![pair("s1", "q")];
        let elexis: Vec<_> = (0..100).map(|i| pair(&format!("e{i}"), &format!("l{}", i % 7))).collect();
        let inputs = SplitInputs::new(&sskj, &elexis);
        let m = split_pure_oov(&inputs, 2).unwrap();
        let cfg = HoldoutConfig {
            fraction: 0.10,
            seed: 4,
            lemma_disjoint: false,
        };
        let h = holdout_validation(&m, &inputs, &cfg).unwrap();
        assert_eq!(h.validation.len(), 10);
        assert_eq!(h.test.len(), 90);
        let v: HashSet<_> = h.validation.iter().collect();
        assert!(h.test.iter().all(|id| !v.contains(id)));
        assert_eq!(holdout_validation(&h, &inputs, &cfg), Err(SplitError::ValidationExists));
        for bad in [0.0, 1.0, -0.5, 1.5] {
            let cfg = HoldoutConfig { fraction: bad, ..cfg.clone() };
            assert_eq!(holdout_validation(&m, &inputs, &cfg), Err(SplitError::FractionOutOfRange(bad)));
        }
    }

    #[test]
    fn lemma_disjoint_holdout() {
        let sskj = vec![pair("s1", "q")];
        let elexis: Vec<_> = (0..60).map(|i| pair(&format!("e{i}"), &format!("l{}", i % 6))).collect();
        let inputs = SplitInputs::new(&sskj, &elexis);
        let m = split_non_oov(&inputs, 2).unwrap();
        let cfg = HoldoutConfig {
            fraction: 0.10,
            seed: 4,
            lemma_disjoint: true,
        };
        let h = holdout_validation(&m, &inputs, &cfg).unwrap();
        assert_eq!(h.validation.len(), 10);
        assert!(h.lemmas.validation.is_disjoint(&h.lemmas.test));
        assert!(h.lemmas.validation.is_disjoint(&h.lemmas.train));
    }

    #[test]
    fn apportionment_sums_to_total() {
        let counts: BTreeMap<&str, usize> = [("a", 3), ("b", 3), ("c", 4)].into_iter().collect();
        let q = apportion(&counts, 0.25, 3);
        assert_eq!(q.values().sum::<usize>(), 3);
        assert!(q.iter().all(|(l, n)| *n <= counts[l.as_str()]));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let sskj = vec![pair("x", "a")];
        let elexis = vec![pair("x", "b")];
        assert_eq!(split_pure_oov(&SplitInputs::new(&sskj, &elexis), 0), Err(SplitError::DuplicateId("x".into())));
    }
}
