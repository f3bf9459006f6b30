//! Stage helpers shared by the command-line tool and tests: dictionary
//! expansion, selection of resolution inputs from a split, and provenance
//! sidecars.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dict::{extract_snippets, filter_multisense, DictionaryEntry, SnippetMode};
use crate::expansion::{filter_candidates, Expander, ExpansionRequest, ExpansionSettings, GeneratedSentence, LemmaMatcher};
use crate::forge::{SenseExample, WicPair};
use crate::resolver::{score_checked, PairQuery, ScorerBackend, ScorerError, SupportIndex, WsiCase};
use crate::splits::SplitManifest;
use crate::text::sha256_hex;

/// Expands every snippet of the multi-sense entries and filters the
/// results per lemma. Output order follows (entry, sense, snippet,
/// generation index).
pub fn expand_dictionary(
    entries: &[DictionaryEntry],
    settings: &ExpansionSettings,
    mode: SnippetMode,
    expander: &Expander<'_>,
    matcher: &LemmaMatcher,
) -> Vec<GeneratedSentence> {
    let entries = filter_multisense(entries);
    let requests: Vec<ExpansionRequest> = extract_snippets(&entries, mode)
        .into_iter()
        .map(|s| ExpansionRequest::new(s, settings))
        .collect();
    let raw: Vec<GeneratedSentence> = expander.expand_all(&requests).into_iter().flatten().collect();

    let mut by_lemma: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, g) in raw.iter().enumerate() {
        by_lemma.entry(&g.source.lemma).or_default().push(i);
    }
    let mut out = raw.clone();
    for (lemma, idx) in by_lemma {
        let group: Vec<GeneratedSentence> = idx.iter().map(|&i| raw[i].clone()).collect();
        for (i, g) in idx.into_iter().zip(filter_candidates(&group, lemma, matcher)) {
            out[i] = g;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelectionError {
    #[error("manifest references {} unknown pair ids (first: {})", .0.len(), .0[0])]
    UnknownPairs(Vec<String>),
    #[error("pairs reference {} unknown example ids (first: {})", .0.len(), .0[0])]
    UnknownExamples(Vec<String>),
}

/// Examples behind the train, test and validation pairs of a split. Every
/// example of a test pair is a target and is removed from support and from
/// the validation targets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResolutionInputs {
    pub support: Vec<SenseExample>,
    pub targets: Vec<SenseExample>,
    pub validation_pairs: Vec<WicPair>,
    pub validation_targets: Vec<SenseExample>,
}

pub fn resolution_inputs(
    manifest: &SplitManifest,
    pairs: &[WicPair],
    examples: &[SenseExample],
) -> Result<ResolutionInputs, SelectionError> {
    let by_id: HashMap<&str, &WicPair> = pairs.iter().map(|p| (p.id.as_str(), p)).collect();
    let unknown: Vec<String> = manifest
        .train
        .iter()
        .chain(&manifest.test)
        .chain(&manifest.validation)
        .filter(|id| !by_id.contains_key(id.as_str()))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(SelectionError::UnknownPairs(unknown));
    }
    let example_ids = |ids: &[String]| -> BTreeSet<String> {
        ids.iter()
            .flat_map(|id| by_id[id.as_str()].provenance.ex.iter().cloned())
            .collect()
    };
    let test = example_ids(&manifest.test);
    let train: BTreeSet<String> = example_ids(&manifest.train).difference(&test).cloned().collect();
    let validation: BTreeSet<String> = example_ids(&manifest.validation).difference(&test).cloned().collect();

    let known: HashSet<&str> = examples.iter().map(|e| e.id.as_str()).collect();
    let missing: Vec<String> = train
        .iter()
        .chain(&test)
        .chain(&validation)
        .filter(|id| !known.contains(id.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(SelectionError::UnknownExamples(missing));
    }
    let pick = |ids: &BTreeSet<String>| -> Vec<SenseExample> {
        examples.iter().filter(|e| ids.contains(&e.id)).cloned().collect()
    };
    Ok(ResolutionInputs {
        support: pick(&train),
        targets: pick(&test),
        validation_pairs: manifest
            .validation
            .iter()
            .map(|id| by_id[id.as_str()].clone())
            .collect(),
        validation_targets: pick(&validation),
    })
}

/// Induction cases for targets that have support for their lemma.
pub fn wsi_cases(targets: &[SenseExample], support: &SupportIndex) -> Vec<WsiCase> {
    targets
        .iter()
        .filter_map(|t| {
            let sup: Vec<SenseExample> = support.get(&t.lemma).iter().filter(|s| s.id != t.id).cloned().collect();
            (!sup.is_empty()).then(|| WsiCase {
                target: t.clone(),
                support: sup,
            })
        })
        .collect()
}

/// A scored WiC prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WicPrediction {
    pub id: String,
    pub score: f64,
    pub label: u8,
}

/// Scores pairs and labels them 1 when the score reaches `threshold`.
pub fn predict_wic(pairs: &[WicPair], scorer: &dyn ScorerBackend, threshold: f64) -> Result<Vec<WicPrediction>, ScorerError> {
    let queries: Vec<PairQuery> = pairs.iter().map(PairQuery::from_pair).collect();
    let scores = score_checked(scorer, &queries)?;
    Ok(pairs
        .iter()
        .zip(scores)
        .map(|(p, score)| WicPrediction {
            id: p.id.clone(),
            score,
            label: u8::from(score >= threshold),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputHash {
    /// File name without directories, so sidecars do not depend on where a
    /// run happened.
    pub name: String,
    pub sha256: String,
}

impl InputHash {
    pub fn of_file(path: &Path) -> std::io::Result<Self> {
        let bytes = std::fs::read(path)?;
        Ok(Self {
            name: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: sha256_hex(&bytes),
        })
    }
}

/// Provenance written next to every stage output as `<output>.meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageMeta {
    pub command: String,
    pub config_digest: String,
    pub settings: serde_json::Value,
    pub inputs: Vec<InputHash>,
    pub stats: serde_json::Value,
}

pub fn meta_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    output.with_file_name(name)
}
