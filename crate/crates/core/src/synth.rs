//! Seeded synthetic corpus: a small dictionary, a generation cache standing
//! in for the LLM, and a sense-annotated corpus sharing part of the lemmas.

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dict::{extract_snippets, serialize_dictionary, DictionaryEntry, Sense, SnippetMode, UsageSnippet};
use crate::expansion::{CacheRecord, ExpansionSettings};
use crate::forge::{dictionary_sense_id, ExampleSource, SenseExample};
use crate::jsonl::to_jsonl;

const SYLLABLES: &[&str] = &[
    "ba", "ko", "ri", "ta", "me", "lu", "so", "ve", "zi", "po", "na", "dre", "gla", "ste", "pli", "mu", "ša", "če",
];
const CODAS: &[&str] = &["k", "n", "r", "t", "c"];
const OPENERS: &[&str] = &[
    "Včeraj", "Danes", "Pogosto", "Nato", "Vedno", "Zjutraj", "Zvečer", "Tudi", "Kasneje", "Redko",
];
const FILLERS: &[&str] = &[
    "hiša", "voda", "mesto", "okno", "miza", "reka", "gora", "luč", "zemlja", "vrt", "cesta", "polje",
];
const CLOSERS: &[&str] = &["ob reki", "v mestu", "pred hišo", "na polju", "za mizo", "pod goro"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub dictionary_lemmas: usize,
    /// Dictionary lemmas that also appear in the corpus.
    pub shared_lemmas: usize,
    /// Corpus lemmas absent from the dictionary.
    pub corpus_only_lemmas: usize,
    /// Shared lemmas whose corpus sentences include one sense the
    /// dictionary lacks.
    pub novel_sense_lemmas: usize,
    pub min_senses: usize,
    pub max_senses: usize,
    pub snippets_per_sense: usize,
    pub corpus_sentences_per_sense: usize,
    pub lemma_missing_rate: f64,
    pub duplicate_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            dictionary_lemmas: 20,
            shared_lemmas: 14,
            corpus_only_lemmas: 6,
            novel_sense_lemmas: 4,
            min_senses: 2,
            max_senses: 4,
            snippets_per_sense: 2,
            corpus_sentences_per_sense: 4,
            lemma_missing_rate: 0.10,
            duplicate_rate: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub dictionary: Vec<DictionaryEntry>,
    pub cache: Vec<CacheRecord>,
    pub corpus: Vec<SenseExample>,
}

impl SynthCorpus {
    pub fn dictionary_text(&self) -> String {
        serialize_dictionary(&self.dictionary)
    }

    pub fn cache_jsonl(&self) -> String {
        to_jsonl(&self.cache)
    }

    pub fn corpus_jsonl(&self) -> String {
        to_jsonl(&self.corpus)
    }
}

/// Pseudo-words whose first four letters are unique and shared with no
/// filler word, so stem matching never confuses them.
fn make_words(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let mut stems: HashSet<String> = FILLERS
        .iter()
        .chain(OPENERS)
        .map(|w| w.to_lowercase().chars().take(4).collect())
        .collect();
    let mut words = Vec::with_capacity(n);
    while words.len() < n {
        let mut w = String::new();
        for _ in 0..3 {
            w.push_str(SYLLABLES.choose(rng).expect("non-empty"));
        }
        w.push_str(CODAS.choose(rng).expect("non-empty"));
        let stem: String = w.chars().take(4).collect();
        if stems.insert(stem) {
            words.push(w);
        }
    }
    words
}

struct LemmaPlan {
    lemma: String,
    cues: Vec<String>,
}

/// Builds the corpus. Cache records are keyed for `settings`, so expanding
/// the dictionary with the same settings replays them without a backend.
pub fn generate(config: &SynthConfig, settings: &ExpansionSettings) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_lemmas = config.dictionary_lemmas + config.corpus_only_lemmas;
    let n_novel = config.novel_sense_lemmas.min(config.shared_lemmas);
    let mut words = make_words(&mut rng, n_lemmas * (1 + config.max_senses) + n_novel);
    let mut cues = words.split_off(n_lemmas + n_novel).into_iter();
    let novel_cues = words.split_off(n_lemmas);
    let lemmas = words;
    let plans: Vec<LemmaPlan> = lemmas
        .into_iter()
        .map(|lemma| {
            let k = rng.random_range(config.min_senses..=config.max_senses.max(config.min_senses));
            LemmaPlan {
                lemma,
                cues: (0..k).map(|_| cues.next().expect("enough cue words")).collect(),
            }
        })
        .collect();

    let dictionary: Vec<DictionaryEntry> = plans[..config.dictionary_lemmas]
        .iter()
        .map(|p| DictionaryEntry {
            lemma: p.lemma.clone(),
            senses: p
                .cues
                .iter()
                .enumerate()
                .map(|(i, cue)| Sense {
                    ordinal: i as u32 + 1,
                    definition: format!("pomen {cue}"),
                    snippets: (0..config.snippets_per_sense)
                        .map(|j| UsageSnippet {
                            text: format!("{} {cue} {}", p.lemma, FILLERS[(i * 3 + j) % FILLERS.len()]),
                            lemma: p.lemma.clone(),
                            sense: i as u32 + 1,
                            group_id: j as u32,
                            index: j as u32,
                        })
                        .collect(),
                    special_examples: Vec::new(),
                })
                .collect(),
        })
        .collect();

    let mut cache = Vec::new();
    for s in extract_snippets(&dictionary, SnippetMode::CoreOnly) {
        let prompt = settings.template.render(&s.text);
        let words: Vec<&str> = s.text.split(' ').collect();
        let mut kept: Vec<String> = Vec::new();
        for i in 0..settings.n_generations {
            let opener = OPENERS[i as usize % OPENERS.len()];
            let closer = CLOSERS.choose(&mut rng).expect("non-empty");
            let roll: f64 = rng.random();
            let text = if roll < config.lemma_missing_rate {
                format!("{opener} je bil {} {closer}.", words[1..].join(" "))
            } else if roll < config.lemma_missing_rate + config.duplicate_rate && !kept.is_empty() {
                let earlier = kept.choose(&mut rng).expect("non-empty");
                format!("  {}", earlier.to_uppercase())
            } else {
                let t = format!("{opener} {} {closer}.", s.text);
                kept.push(t.clone());
                t
            };
            cache.push(CacheRecord::new(&settings.model_id, &prompt, settings.temperature, i, text));
        }
    }

    let corpus_plans = plans[..config.shared_lemmas.min(config.dictionary_lemmas)]
        .iter()
        .chain(&plans[config.dictionary_lemmas..]);
    let mut corpus = Vec::new();
    for (n, p) in corpus_plans.enumerate() {
        let mut senses = p.cues.clone();
        if let Some(extra) = novel_cues.get(n) {
            senses.push(extra.clone());
        }
        for (i, cue) in senses.iter().enumerate() {
            for j in 0..config.corpus_sentences_per_sense {
                let opener = OPENERS.choose(&mut rng).expect("non-empty");
                let filler = FILLERS.choose(&mut rng).expect("non-empty");
                let prefix = format!("{opener} je ");
                let start = prefix.chars().count();
                let end = start + p.lemma.chars().count();
                let sentence = format!("{prefix}{} {cue} {filler} {}.", p.lemma, CLOSERS[j % CLOSERS.len()]);
                corpus.push(SenseExample {
                    id: format!("elexis:{}:{}:{j}", p.lemma, i + 1),
                    lemma: p.lemma.clone(),
                    sentence,
                    start,
                    end,
                    sense_id: dictionary_sense_id(&p.lemma, i as u32 + 1),
                    inventory_id: "elexis".to_string(),
                    source: ExampleSource::Corpus,
                });
            }
        }
    }

    SynthCorpus {
        dictionary,
        cache,
        corpus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dict::{parse_dictionary, ParseMode};

    #[test]
    fn deterministic_and_parseable() {
        let settings = ExpansionSettings::default();
        let a = generate(&SynthConfig::default(), &settings);
        let b = generate(&SynthConfig::default(), &settings);
        assert_eq!(a, b);
        let parsed = parse_dictionary(&a.dictionary_text(), ParseMode::Strict).unwrap();
        assert_eq!(parsed.entries, a.dictionary);
        assert_eq!(a.dictionary.len(), 20);
        let corpus_lemmas: HashSet<&str> = a.corpus.iter().map(|e| e.lemma.as_str()).collect();
        assert_eq!(corpus_lemmas.len(), 20);
        for e in &a.corpus {
            assert_eq!(e.target(), Some(e.lemma.as_str()));
        }
        let dict_senses: HashSet<String> = a
            .dictionary
            .iter()
            .flat_map(|d| d.senses.iter().map(|s| dictionary_sense_id(&d.lemma, s.ordinal)))
            .collect();
        let novel: HashSet<&str> = a
            .corpus
            .iter()
            .filter(|e| dict_senses.iter().any(|s| s.starts_with(&format!("{}#", e.lemma))))
            .filter(|e| !dict_senses.contains(&e.sense_id))
            .map(|e| e.sense_id.as_str())
            .collect();
        assert_eq!(novel.len(), 4);
    }
}
