//! Sense-labeled sentence datasets and balanced Word-in-Context pairs.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dict::UsageSnippet;
use crate::expansion::{GeneratedSentence, GenerationStatus, LemmaMatcher};
use crate::text::{derive_seed, is_nfc, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleSource {
    Generated,
    DictionarySnippet,
    Corpus,
}

/// One sentence with a located target word and its gold sense. Serializes
/// as a WSD JSONL record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SenseExample {
    pub id: String,
    pub lemma: String,
    pub sentence: String,
    #[serde(rename = "target_start")]
    pub start: usize,
    #[serde(rename = "target_end")]
    pub end: usize,
    pub sense_id: String,
    #[serde(rename = "inventory")]
    pub inventory_id: String,
    pub source: ExampleSource,
}

impl SenseExample {
    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }

    pub fn target(&self) -> Option<&str> {
        self.span().slice(&self.sentence)
    }
}

/// Sense id for a numbered dictionary sense.
pub fn dictionary_sense_id(lemma: &str, ordinal: u32) -> String {
    format!("{lemma}#{ordinal}")
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenseInventory {
    pub id: String,
    pub senses: BTreeMap<String, BTreeSet<String>>,
}

impl SenseInventory {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            senses: BTreeMap::new(),
        }
    }

    pub fn from_examples(id: &str, examples: &[SenseExample]) -> Self {
        let mut inv = Self::new(id);
        for ex in examples.iter().filter(|e| e.inventory_id == id) {
            inv.insert(&ex.lemma, &ex.sense_id);
        }
        inv
    }

    pub fn insert(&mut self, lemma: &str, sense_id: &str) {
        self.senses.entry(lemma.to_string()).or_default().insert(sense_id.to_string());
    }

    pub fn contains(&self, lemma: &str, sense_id: &str) -> bool {
        self.senses.get(lemma).is_some_and(|s| s.contains(sense_id))
    }

    pub fn is_empty(&self) -> bool {
        self.senses.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WsdDataset {
    pub examples: Vec<SenseExample>,
    pub inventory: SenseInventory,
    /// `(id, reason)` for inputs that did not become examples.
    pub excluded: Vec<(String, String)>,
}

fn finish_wsd(inventory_id: &str, examples: Vec<SenseExample>, mut excluded: Vec<(String, String)>) -> WsdDataset {
    let mut senses_per_lemma: HashMap<&str, HashSet<&str>> = HashMap::new();
    for ex in &examples {
        senses_per_lemma.entry(&ex.lemma).or_default().insert(&ex.sense_id);
    }
    let single: HashSet<String> = senses_per_lemma
        .iter()
        .filter(|(_, s)| s.len() < 2)
        .map(|(l, _)| l.to_string())
        .collect();
    let (examples, dropped): (Vec<_>, Vec<_>) = examples.into_iter().partition(|e| !single.contains(&e.lemma));
    excluded.extend(dropped.into_iter().map(|e| (e.id, "lemma has a single sense".to_string())));
    let inventory = SenseInventory::from_examples(inventory_id, &examples);
    WsdDataset {
        examples,
        inventory,
        excluded,
    }
}

/// One example per kept generation. Lemmas left with a single sense are
/// excluded.
pub fn build_wsd_dataset(generations: &[GeneratedSentence], inventory_id: &str, matcher: &LemmaMatcher) -> WsdDataset {
    let mut examples = Vec::new();
    let mut excluded = Vec::new();
    for g in generations.iter().filter(|g| g.status == GenerationStatus::Kept) {
        let id = format!(
            "{inventory_id}:{}:{}:{}:{}",
            g.source.lemma, g.source.sense, g.source.snippet_index, g.generation_index
        );
        match matcher.locate(&g.text, &g.source.lemma) {
            Ok(span) => examples.push(SenseExample {
                id,
                lemma: g.source.lemma.clone(),
                sentence: g.text.clone(),
                start: span.start,
                end: span.end,
                sense_id: dictionary_sense_id(&g.source.lemma, g.source.sense),
                inventory_id: inventory_id.to_string(),
                source: ExampleSource::Generated,
            }),
            Err(e) => {
                log::warn!("excluding {id}: {e}");
                excluded.push((id, e.to_string()));
            }
        }
    }
    finish_wsd(inventory_id, examples, excluded)
}

/// Uses the raw usage snippets themselves as example sentences.
pub fn build_snippet_dataset(snippets: &[UsageSnippet], inventory_id: &str, matcher: &LemmaMatcher) -> WsdDataset {
    let mut examples = Vec::new();
    let mut excluded = Vec::new();
    for s in snippets {
        let id = format!("{inventory_id}:{}:{}:{}:snippet", s.lemma, s.sense, s.index);
        match matcher.locate(&s.text, &s.lemma) {
            Ok(span) => examples.push(SenseExample {
                id,
                lemma: s.lemma.clone(),
                sentence: s.text.clone(),
                start: span.start,
                end: span.end,
                sense_id: dictionary_sense_id(&s.lemma, s.sense),
                inventory_id: inventory_id.to_string(),
                source: ExampleSource::DictionarySnippet,
            }),
            Err(e) => excluded.push((id, e.to_string())),
        }
    }
    finish_wsd(inventory_id, examples, excluded)
}

/// Keeps the first `k` examples of every (lemma, sense), in dataset order.
pub fn cap_examples_per_sense(examples: &[SenseExample], k: usize) -> Vec<SenseExample> {
    let mut counts: HashMap<(&str, &str, &str), usize> = HashMap::new();
    examples
        .iter()
        .filter(|e| {
            let n = counts.entry((&e.inventory_id, &e.lemma, &e.sense_id)).or_insert(0);
            *n += 1;
            *n <= k
        })
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Source dataset (inventory) ids.
    pub src: Vec<String>,
    /// Ids of the two source examples.
    pub ex: [String; 2],
}

/// Two sentences sharing a lemma, labeled 1 when the lemma has the same
/// sense in both. Serializes as a WiC JSONL record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WicPair {
    pub id: String,
    pub lemma: String,
    pub s1: String,
    pub s1_start: usize,
    pub s1_end: usize,
    pub s2: String,
    pub s2_start: usize,
    pub s2_end: usize,
    pub label: u8,
    pub provenance: Provenance,
}

impl WicPair {
    pub fn from_examples(a: &SenseExample, b: &SenseExample) -> Self {
        let label = u8::from(a.inventory_id == b.inventory_id && a.sense_id == b.sense_id);
        let mut src = vec![a.inventory_id.clone()];
        if b.inventory_id != a.inventory_id {
            src.push(b.inventory_id.clone());
        }
        Self {
            id: format!("{}~{}", a.id, b.id),
            lemma: a.lemma.clone(),
            s1: a.sentence.clone(),
            s1_start: a.start,
            s1_end: a.end,
            s2: b.sentence.clone(),
            s2_start: b.start,
            s2_end: b.end,
            label,
            provenance: Provenance {
                src,
                ex: [a.id.clone(), b.id.clone()],
            },
        }
    }

    pub fn span1(&self) -> Span {
        Span::new(self.s1_start, self.s1_end)
    }

    pub fn span2(&self) -> Span {
        Span::new(self.s2_start, self.s2_end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForgeConfig {
    /// Partners drawn per anchor, half same-sense and half different-sense.
    pub partners_per_anchor: usize,
    /// Cap on same-sense pairs per sense.
    pub max_pairs_per_sense: usize,
    pub max_examples_per_sense: usize,
    pub seed: u64,
}

impl Default for ForgeConfig {
    fn default() -> Self {
        Self {
            partners_per_anchor: 12,
            max_pairs_per_sense: 100,
            max_examples_per_sense: 6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ForgeError {
    #[error("partners_per_anchor must be a positive even number, got {0}")]
    OddPartnerQuota(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedLemma {
    pub inventory: String,
    pub lemma: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ForgeOutput {
    pub pairs: Vec<WicPair>,
    pub skipped: Vec<SkippedLemma>,
}

/// Partial Fisher-Yates: a uniformly random `k`-subset of `items`, in draw order.
pub(crate) fn sample_without_replacement<T>(rng: &mut ChaCha8Rng, mut items: Vec<T>, k: usize) -> Vec<T> {
    let k = k.min(items.len());
    for i in 0..k {
        let j = rng.random_range(i..items.len());
        items.swap(i, j);
    }
    items.truncate(k);
    items
}

/// Per-(inventory, lemma) RNG stream.
pub fn lemma_rng(seed: u64, inventory: &str, lemma: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("{inventory}\u{1f}{lemma}")))
}

/// Forges a balanced WiC dataset.
///
/// Examples are grouped by (inventory, lemma) and ordered by (sense id,
/// example id). Each example in turn acts as an anchor and draws up to
/// `partners_per_anchor / 2` same-sense and as many different-sense partners
/// without replacement. Unordered duplicates are dropped, each sense keeps at
/// most `max_pairs_per_sense` same-sense pairs (lowest positions first), and
/// the majority label of the lemma is downsampled to the minority count.
pub fn build_wic_pairs(examples: &[SenseExample], config: &ForgeConfig) -> Result<ForgeOutput, ForgeError> {
    if config.partners_per_anchor == 0 || !config.partners_per_anchor.is_multiple_of(2) {
        return Err(ForgeError::OddPartnerQuota(config.partners_per_anchor));
    }
    let mut groups: BTreeMap<(&str, &str), Vec<&SenseExample>> = BTreeMap::new();
    for ex in examples {
        groups.entry((&ex.inventory_id, &ex.lemma)).or_default().push(ex);
    }
    let groups: Vec<_> = groups.into_iter().collect();
    let results: Vec<Result<Vec<WicPair>, SkippedLemma>> = groups
        .par_iter()
        .map(|((inventory, lemma), members)| forge_lemma(inventory, lemma, members.clone(), config))
        .collect();
    let mut out = ForgeOutput::default();
    for r in results {
        match r {
            Ok(pairs) => out.pairs.extend(pairs),
            Err(skip) => {
                log::info!("skipping lemma {:?} ({}): {}", skip.lemma, skip.inventory, skip.reason);
                out.skipped.push(skip);
            }
        }
    }
    Ok(out)
}

fn forge_lemma(
    inventory: &str,
    lemma: &str,
    mut members: Vec<&SenseExample>,
    config: &ForgeConfig,
) -> Result<Vec<WicPair>, SkippedLemma> {
    let skip = |reason: &str| SkippedLemma {
        inventory: inventory.to_string(),
        lemma: lemma.to_string(),
        reason: reason.to_string(),
    };
    members.sort_by(|a, b| (&a.sense_id, &a.id).cmp(&(&b.sense_id, &b.id)));
    let senses: BTreeSet<&str> = members.iter().map(|e| e.sense_id.as_str()).collect();
    if senses.len() < 2 {
        return Err(skip("fewer than two senses"));
    }

    let mut rng = lemma_rng(config.seed, inventory, lemma);
    let quota = config.partners_per_anchor / 2;
    let n = members.len();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut positives: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
    let mut negatives: Vec<(usize, usize)> = Vec::new();
    for a in 0..n {
        let anchor = members[a];
        let eligible = |b: &usize| *b != a && members[*b].sentence != anchor.sentence;
        let same: Vec<usize> = (0..n)
            .filter(eligible)
            .filter(|&b| members[b].sense_id == anchor.sense_id)
            .collect();
        let diff: Vec<usize> = (0..n)
            .filter(eligible)
            .filter(|&b| members[b].sense_id != anchor.sense_id)
            .collect();
        let same = sample_without_replacement(&mut rng, same, quota);
        let diff = sample_without_replacement(&mut rng, diff, quota);
        for b in same {
            let key = (a.min(b), a.max(b));
            if seen.insert(key) {
                positives.entry(anchor.sense_id.as_str()).or_default().push(key);
            }
        }
        for b in diff {
            let key = (a.min(b), a.max(b));
            if seen.insert(key) {
                negatives.push(key);
            }
        }
    }

    let mut positives: Vec<(usize, usize)> = positives
        .into_values()
        .flat_map(|mut v| {
            v.sort_unstable();
            v.truncate(config.max_pairs_per_sense);
            v
        })
        .collect();
    positives.sort_unstable();
    negatives.sort_unstable();
    if positives.is_empty() || negatives.is_empty() {
        return Err(skip("cannot produce both labels"));
    }
    let keep = positives.len().min(negatives.len());
    if positives.len() > keep {
        positives = sample_without_replacement(&mut rng, positives, keep);
        positives.sort_unstable();
    } else if negatives.len() > keep {
        negatives = sample_without_replacement(&mut rng, negatives, keep);
        negatives.sort_unstable();
    }

    let mut keys = positives;
    keys.extend(negatives);
    keys.sort_unstable();
    Ok(keys
        .into_iter()
        .map(|(i, j)| WicPair::from_examples(members[i], members[j]))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WicDataset {
    pub id: String,
    pub pairs: Vec<WicPair>,
}

/// Concatenates WiC datasets. Labels are kept as computed in each source;
/// a pair id that already occurred is prefixed with its dataset id (and a
/// counter if that still collides).
pub fn merge_wic(datasets: &[WicDataset]) -> WicDataset {
    let mut used: HashSet<String> = HashSet::new();
    let mut pairs = Vec::new();
    for ds in datasets {
        for p in &ds.pairs {
            let mut id = p.id.clone();
            if used.contains(&id) {
                id = format!("{}:{}", ds.id, p.id);
                let base = id.clone();
                let mut k = 1;
                while used.contains(&id) {
                    id = format!("{base}#{k}");
                    k += 1;
                }
            }
            used.insert(id.clone());
            pairs.push(WicPair { id, ..p.clone() });
        }
    }
    WicDataset {
        id: datasets.iter().map(|d| d.id.as_str()).collect::<Vec<_>>().join("+"),
        pairs,
    }
}

/// Counts reported alongside a forged dataset. `sentences` is the number of
/// distinct source examples used by the pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForgeSummary {
    pub pairs: usize,
    pub positives: usize,
    pub negatives: usize,
    pub sentences: usize,
    pub lemmas: usize,
}

pub fn summarize(pairs: &[WicPair]) -> ForgeSummary {
    let positives = pairs.iter().filter(|p| p.label == 1).count();
    let sentences: HashSet<&str> = pairs.iter().flat_map(|p| p.provenance.ex.iter().map(String::as_str)).collect();
    let lemmas: HashSet<&str> = pairs.iter().map(|p| p.lemma.as_str()).collect();
    ForgeSummary {
        pairs: pairs.len(),
        positives,
        negatives: pairs.len() - positives,
        sentences: sentences.len(),
        lemmas: lemmas.len(),
    }
}

/// A WSD JSONL record as found in external corpora.
#[derive(Debug, Clone, Deserialize)]
struct ExternalRecord {
    id: String,
    lemma: String,
    sentence: String,
    target_start: usize,
    target_end: usize,
    sense_id: String,
    #[serde(default)]
    #[allow(dead_code)]
    inventory: Option<String>,
    #[serde(default)]
    #[allow(dead_code)]
    source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub line: usize,
    pub id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImportOutcome {
    pub examples: Vec<SenseExample>,
    pub inventory: SenseInventory,
    pub rejected: Vec<Rejection>,
}

/// Imports sense-annotated corpus records (WSD JSONL), validating schema,
/// normalization and target spans. All examples are tagged `inventory_id`.
pub fn import_external_wsd(input: &str, inventory_id: &str, matcher: &LemmaMatcher) -> ImportOutcome {
    let mut out = ImportOutcome {
        inventory: SenseInventory::new(inventory_id),
        ..Default::default()
    };
    let mut ids: HashSet<String> = HashSet::new();
    for (i, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let reject = |id: Option<String>, reason: String| Rejection {
            line: i + 1,
            id,
            reason,
        };
        let rec: ExternalRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                out.rejected.push(reject(None, format!("schema violation: {e}")));
                continue;
            }
        };
        let id = Some(rec.id.clone());
        let problem = if rec.id.is_empty() || rec.lemma.trim().is_empty() || rec.sense_id.is_empty() {
            Some("empty id, lemma or sense_id".to_string())
        } else if ids.contains(&rec.id) {
            Some("duplicate id".to_string())
        } else if !is_nfc(&rec.sentence) || !is_nfc(&rec.lemma) {
            Some("text is not NFC-normalized".to_string())
        } else {
            let span = Span::new(rec.target_start, rec.target_end);
            match span.slice(&rec.sentence) {
                None => Some(format!("span {}..{} outside sentence", rec.target_start, rec.target_end)),
                Some(target) if !matcher.is_present(target, &rec.lemma) => {
                    Some(format!("span text {target:?} does not match lemma {:?}", rec.lemma))
                }
                Some(_) => None,
            }
        };
        if let Some(reason) = problem {
            out.rejected.push(reject(id, reason));
            continue;
        }
        ids.insert(rec.id.clone());
        out.inventory.insert(&rec.lemma, &rec.sense_id);
        out.examples.push(SenseExample {
            id: rec.id,
            lemma: rec.lemma,
            sentence: rec.sentence,
            start: rec.target_start,
            end: rec.target_end,
            sense_id: rec.sense_id,
            inventory_id: inventory_id.to_string(),
            source: ExampleSource::Corpus,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::SnippetSource;

    fn ex(id: &str, lemma: &str, sense: &str) -> SenseExample {
        let sentence = format!("{lemma} in context {id}");
        SenseExample {
            id: id.into(),
            lemma: lemma.into(),
            start: 0,
            end: lemma.chars().count(),
            sentence,
            sense_id: sense.into(),
            inventory_id: "inv".into(),
            source: ExampleSource::Corpus,
        }
    }

    fn kept(lemma: &str, sense: u32, i: u32) -> GeneratedSentence {
        GeneratedSentence {
            text: format!("To je {lemma} številka {i}."),
            source: SnippetSource {
                lemma: lemma.into(),
                sense,
                snippet_index: 0,
            },
            snippet_text: lemma.into(),
            generation_index: i,
            status: GenerationStatus::Kept,
            error: None,
        }
    }

    #[test]
    fn wsd_dataset_from_kept_generations() {
        let gens: Vec<_> = (1..=2).flat_map(|s| (0..3).map(move |i| kept("banka", s, i))).collect();
        let ds = build_wsd_dataset(&gens, "sskj", &LemmaMatcher::default());
        assert_eq!(ds.examples.len(), 6);
        assert_eq!(ds.inventory.senses["banka"].len(), 2);
        assert_eq!(ds.examples[0].target(), Some("banka"));
        assert_eq!(ds.examples[0].span(), Span::new(6, 11));

        let empty = build_wsd_dataset(&[], "sskj", &LemmaMatcher::default());
        assert!(empty.examples.is_empty() && empty.inventory.is_empty());
    }

    #[test]
    fn wsd_dataset_drops_single_sense_lemmas_and_unkept() {
        let mut gens = vec![kept("miza", 1, 0), kept("miza", 1, 1), kept("banka", 1, 0), kept("banka", 2, 0)];
        gens.push(GeneratedSentence {
            status: GenerationStatus::DroppedDuplicate,
            ..kept("banka", 2, 1)
        });
        let ds = build_wsd_dataset(&gens, "sskj", &LemmaMatcher::default());
        assert_eq!(ds.examples.len(), 2);
        assert!(ds.examples.iter().all(|e| e.lemma == "banka"));
        assert_eq!(ds.excluded.len(), 2);
    }

    #[test]
    fn cap_keeps_first_k() {
        let exs: Vec<_> = (0..10).map(|i| ex(&format!("a{i}"), "l", "A")).chain([ex("b0", "l", "B"), ex("b1", "l", "B")]).collect();
        let capped = cap_examples_per_sense(&exs, 6);
        let ids: Vec<_> = capped.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["a0", "a1", "a2", "a3", "a4", "a5", "b0", "b1"]);
    }

    #[test]
    fn single_sense_lemma_yields_nothing() {
        let exs = vec![ex("a", "l", "A"), ex("b", "l", "A"), ex("c", "l", "A")];
        let out = build_wic_pairs(&exs, &ForgeConfig::default()).unwrap();
        assert!(out.pairs.is_empty());
        assert_eq!(out.skipped.len(), 1);
    }

    #[test]
    fn odd_quota_is_rejected() {
        let cfg = ForgeConfig {
            partners_per_anchor: 5,
            ..Default::default()
        };
        assert!(build_wic_pairs(&[], &cfg).is_err());
    }

    #[test]
    fn pairs_are_balanced_and_labeled_by_sense() {
        let exs: Vec<_> = ["A", "A", "A", "B", "B", "B", "C"]
            .iter()
            .enumerate()
            .map(|(i, s)| ex(&format!("e{i}"), "bank", s))
            .collect();
        let out = build_wic_pairs(&exs, &ForgeConfig { seed: 3, ..Default::default() }).unwrap();
        let pos = out.pairs.iter().filter(|p| p.label == 1).count();
        assert!(pos > 0);
        assert_eq!(pos * 2, out.pairs.len());
        let by_id: HashMap<_, _> = exs.iter().map(|e| (e.id.as_str(), e)).collect();
        for p in &out.pairs {
            let a = by_id[p.provenance.ex[0].as_str()];
            let b = by_id[p.provenance.ex[1].as_str()];
            assert_eq!(p.label == 1, a.sense_id == b.sense_id);
            assert_ne!(p.s1, p.s2);
        }
        let again = build_wic_pairs(&exs, &ForgeConfig { seed: 3, ..Default::default() }).unwrap();
        assert_eq!(again, out);
    }

    #[test]
    fn merge_reidentifies_collisions() {
        let exs: Vec<_> = ["A", "A", "B", "B"].iter().enumerate().map(|(i, s)| ex(&format!("e{i}"), "l", s)).collect();
        let pairs = build_wic_pairs(&exs, &ForgeConfig::default()).unwrap().pairs;
        let d = WicDataset {
            id: "d".into(),
            pairs: pairs.clone(),
        };
        let merged = merge_wic(&[d.clone(), WicDataset { id: "e".into(), pairs: vec![] }]);
        assert_eq!(merged.pairs, pairs);
        let twice = merge_wic(&[d.clone(), d.clone()]);
        assert_eq!(twice.pairs.len(), 2 * pairs.len());
        let ids: HashSet<_> = twice.pairs.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids.len(), twice.pairs.len());
        assert!(twice.pairs[pairs.len()].id.starts_with("d:"));
        let summary = summarize(&twice.pairs);
        assert_eq!(summary.positives, summary.negatives);
    }

    #[test]
    fn import_validates_records() {
        let good = r#"{"id":"1","lemma":"banka","sentence":"Šla je v banko.","target_start":9,"target_end":14,"sense_id":"b.1","inventory":"elexis","source":"wikimatrix"}"#;
        let outside = r#"{"id":"2","lemma":"banka","sentence":"banka","target_start":0,"target_end":9,"sense_id":"b.1","inventory":"elexis","source":"x"}"#;
        let mismatch = r#"{"id":"3","lemma":"banka","sentence":"Šla je v banko.","target_start":0,"target_end":3,"sense_id":"b.1","inventory":"elexis","source":"x"}"#;
        let schema = r#"{"id":"4","lemma":"banka"}"#;
        let input = [good, outside, mismatch, schema, good].join("\n");
        let out = import_external_wsd(&input, "elexis", &LemmaMatcher::default());
        assert_eq!(out.examples.len(), 1);
        assert_eq!(out.examples[0].target(), Some("banko"));
        assert_eq!(out.examples[0].inventory_id, "elexis");
        let lines: Vec<_> = out.rejected.iter().map(|r| r.line).collect();
        assert_eq!(lines, [2, 3, 4, 5]);
        assert!(out.rejected[3].reason.contains("duplicate"));
    }
}
