//! Word-sense disambiguation and new-sense induction on top of a WiC scorer.
//!
//! A target sentence is paired with every sense-labeled support sentence of
//! its lemma. Each pair gets a WiC score, scores are aggregated per sense
//! (max by default), and the best sense wins. For induction the winner is
//! replaced by [`NEW_SENSE`] when its score falls below `c * mean`, where
//! `mean` is the scorer's average output on validation pairs.

mod scorers;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use scorers::{token_jaccard, Health, OracleScorer, OverlapScorer, RandomScorer, RemoteScorer, RemoteScorerConfig};

use crate::forge::{SenseExample, WicPair};

pub const NEW_SENSE: &str = "NEW_SENSE";

/// Multiplier used when there is nothing to calibrate it on.
pub const DEFAULT_MULTIPLIER: f64 = 1.2;

/// A WiC query: two sentences sharing a lemma, without a label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairQuery {
    pub left_id: String,
    pub right_id: String,
    pub lemma: String,
    pub s1: String,
    pub s1_start: usize,
    pub s1_end: usize,
    pub s2: String,
    pub s2_start: usize,
    pub s2_end: usize,
}

impl PairQuery {
    pub fn from_examples(a: &SenseExample, b: &SenseExample) -> Self {
        Self {
            left_id: a.id.clone(),
            right_id: b.id.clone(),
            lemma: a.lemma.clone(),
            s1: a.sentence.clone(),
            s1_start: a.start,
            s1_end: a.end,
            s2: b.sentence.clone(),
            s2_start: b.start,
            s2_end: b.end,
        }
    }

    pub fn from_pair(p: &WicPair) -> Self {
        Self {
            left_id: p.provenance.ex[0].clone(),
            right_id: p.provenance.ex[1].clone(),
            lemma: p.lemma.clone(),
            s1: p.s1.clone(),
            s1_start: p.s1_start,
            s1_end: p.s1_end,
            s2: p.s2.clone(),
            s2_start: p.s2_start,
            s2_end: p.s2_end,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScorerError {
    #[error("query references unknown example {0:?}")]
    UnknownExample(String),
    #[error("scorer protocol error: {0}")]
    Protocol(String),
    #[error("scorer unreachable: {message} ({} queries failed)", failed_ids.len())]
    Transport { message: String, failed_ids: Vec<String> },
}

/// Anything that maps WiC queries to same-sense probabilities.
pub trait ScorerBackend: Send + Sync {
    fn name(&self) -> &str;

    /// One score in `[0, 1]` per query, in input order.
    fn score_batch(&self, queries: &[PairQuery]) -> Result<Vec<f64>, ScorerError>;
}

/// Calls the scorer and enforces its output contract.
pub fn score_checked(scorer: &dyn ScorerBackend, queries: &[PairQuery]) -> Result<Vec<f64>, ScorerError> {
    if queries.is_empty() {
        return Ok(Vec::new());
    }
    let scores = scorer.score_batch(queries)?;
    if scores.len() != queries.len() {
        return Err(ScorerError::Protocol(format!(
            "{} returned {} scores for {} queries",
            scorer.name(),
            scores.len(),
            queries.len()
        )));
    }
    if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(ScorerError::Protocol(format!("{} returned out-of-range score {bad}", scorer.name())));
    }
    Ok(scores)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Max,
    Mean,
}

impl std::str::FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(Self::Max),
            "mean" => Ok(Self::Mean),
            other => Err(format!("unknown aggregation {other:?}")),
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Max => "max",
            Aggregation::Mean => "mean",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Prediction {
    Sense(String),
    NewSense,
}

impl Prediction {
    pub fn as_str(&self) -> &str {
        match self {
            Prediction::Sense(s) => s,
            Prediction::NewSense => NEW_SENSE,
        }
    }

    pub fn is_new(&self) -> bool {
        matches!(self, Prediction::NewSense)
    }
}

impl Serialize for Prediction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Prediction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(if s == NEW_SENSE { Prediction::NewSense } else { Prediction::Sense(s) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub id: String,
    pub predicted: Prediction,
    pub scores: BTreeMap<String, f64>,
    pub threshold: Option<f64>,
    pub aggregation: Aggregation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub multiplier: f64,
    /// Mean scorer output on validation pairs; `None` until calibrated.
    pub validation_mean: Option<f64>,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            multiplier: DEFAULT_MULTIPLIER,
            validation_mean: None,
        }
    }
}

impl ThresholdConfig {
    pub fn new(multiplier: f64, validation_mean: f64) -> Self {
        Self {
            multiplier,
            validation_mean: Some(validation_mean),
        }
    }

    /// `multiplier * validation_mean`, once calibrated.
    pub fn threshold(&self) -> Option<f64> {
        self.validation_mean.map(|mu| self.multiplier * mu)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ResolveError {
    #[error("target {0:?} has no support examples")]
    EmptySupport(String),
    #[error("support example {support:?} has lemma {found:?}, target {target:?} has {expected:?}")]
    LemmaMismatch {
        target: String,
        support: String,
        expected: String,
        found: String,
    },
    #[error("threshold is not calibrated")]
    Uncalibrated,
    #[error("validation set is empty")]
    EmptyValidation,
    #[error("scoring failed for target {target:?}: {source}")]
    Scorer {
        target: String,
        #[source]
        source: ScorerError,
    },
}

fn check_support(target: &SenseExample, support: &[&SenseExample]) -> Result<(), ResolveError> {
    if support.is_empty() {
        return Err(ResolveError::EmptySupport(target.id.clone()));
    }
    if let Some(bad) = support.iter().find(|s| s.lemma != target.lemma) {
        return Err(ResolveError::LemmaMismatch {
            target: target.id.clone(),
            support: bad.id.clone(),
            expected: target.lemma.clone(),
            found: bad.lemma.clone(),
        });
    }
    Ok(())
}

/// Per-sense reduction of pair scores.
pub fn aggregate(support: &[&SenseExample], scores: &[f64], aggregation: Aggregation) -> BTreeMap<String, f64> {
    let mut per_sense: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (ex, &s) in support.iter().zip(scores) {
        per_sense.entry(ex.sense_id.clone()).or_default().push(s);
    }
    per_sense
        .into_iter()
        .map(|(sense, v)| {
            let agg = match aggregation {
                Aggregation::Max => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                Aggregation::Mean => v.iter().sum::<f64>() / v.len() as f64,
            };
            (sense, agg)
        })
        .collect()
}

/// Highest-scoring sense; ties go to the lexicographically smallest id.
pub fn argmax(scores: &BTreeMap<String, f64>) -> Option<(&str, f64)> {
    let mut best: Option<(&str, f64)> = None;
    for (sense, &score) in scores {
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((sense, score));
        }
    }
    best
}

fn decide(
    id: &str,
    scores: BTreeMap<String, f64>,
    threshold: Option<f64>,
    aggregation: Aggregation,
) -> Resolution {
    let (best, best_score) = argmax(&scores).expect("support covers at least one sense");
    let predicted = match threshold {
        Some(tau) if best_score < tau => Prediction::NewSense,
        _ => Prediction::Sense(best.to_string()),
    };
    Resolution {
        id: id.to_string(),
        predicted,
        scores,
        threshold,
        aggregation,
    }
}

/// Resolves a target against same-lemma support examples.
pub fn resolve_wsd(
    target: &SenseExample,
    support: &[SenseExample],
    scorer: &dyn ScorerBackend,
    aggregation: Aggregation,
) -> Result<Resolution, ResolveError> {
    let support: Vec<&SenseExample> = support.iter().collect();
    resolve_one(target, &support, scorer, None, aggregation)
}

/// Like [`resolve_wsd`], but predicts [`NEW_SENSE`] when the best aggregated
/// score is below the calibrated threshold.
pub fn resolve_wsi(
    target: &SenseExample,
    support: &[SenseExample],
    scorer: &dyn ScorerBackend,
    threshold: &ThresholdConfig,
    aggregation: Aggregation,
) -> Result<Resolution, ResolveError> {
    let tau = threshold.threshold().ok_or(ResolveError::Uncalibrated)?;
    let support: Vec<&SenseExample> = support.iter().collect();
    resolve_one(target, &support, scorer, Some(tau), aggregation)
}

fn resolve_one(
    target: &SenseExample,
    support: &[&SenseExample],
    scorer: &dyn ScorerBackend,
    threshold: Option<f64>,
    aggregation: Aggregation,
) -> Result<Resolution, ResolveError> {
    check_support(target, support)?;
    let queries: Vec<PairQuery> = support.iter().map(|s| PairQuery::from_examples(target, s)).collect();
    let scores = score_checked(scorer, &queries).map_err(|source| ResolveError::Scorer {
        target: target.id.clone(),
        source,
    })?;
    Ok(decide(&target.id, aggregate(support, &scores, aggregation), threshold, aggregation))
}

/// Support examples grouped by lemma.
#[derive(Debug, Clone, Default)]
pub struct SupportIndex {
    by_lemma: HashMap<String, Vec<SenseExample>>,
}

impl SupportIndex {
    pub fn new(examples: &[SenseExample]) -> Self {
        let mut by_lemma: HashMap<String, Vec<SenseExample>> = HashMap::new();
        for e in examples {
            by_lemma.entry(e.lemma.clone()).or_default().push(e.clone());
        }
        Self { by_lemma }
    }

    pub fn get(&self, lemma: &str) -> &[SenseExample] {
        self.by_lemma.get(lemma).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Senses attested for `lemma`.
    pub fn senses(&self, lemma: &str) -> impl Iterator<Item = &str> {
        self.get(lemma).iter().map(|e| e.sense_id.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchOutcome {
    pub resolutions: Vec<Resolution>,
    /// Targets that could not be resolved (for example, no support).
    pub skipped: Vec<(String, String)>,
}

/// Resolves many targets with a single scorer call. With a threshold the
/// run is an induction run, otherwise plain disambiguation. A target never
/// serves as its own support.
pub fn resolve_batch(
    targets: &[SenseExample],
    support: &SupportIndex,
    scorer: &dyn ScorerBackend,
    aggregation: Aggregation,
    threshold: Option<&ThresholdConfig>,
) -> Result<BatchOutcome, ResolveError> {
    let tau = match threshold {
        Some(t) => Some(t.threshold().ok_or(ResolveError::Uncalibrated)?),
        None => None,
    };
    let mut outcome = BatchOutcome::default();
    let mut plans: Vec<(&SenseExample, Vec<&SenseExample>, usize)> = Vec::new();
    let mut queries = Vec::new();
    for t in targets {
        let sup: Vec<&SenseExample> = support.get(&t.lemma).iter().filter(|s| s.id != t.id).collect();
        if let Err(e) = check_support(t, &sup) {
            outcome.skipped.push((t.id.clone(), e.to_string()));
            continue;
        }
        plans.push((t, sup.clone(), queries.len()));
        queries.extend(sup.iter().map(|s| PairQuery::from_examples(t, s)));
    }
    let scores = score_checked(scorer, &queries).map_err(|source| ResolveError::Scorer {
        target: format!("batch of {} targets", plans.len()),
        source,
    })?;
    for (t, sup, offset) in plans {
        let s = &scores[offset..offset + sup.len()];
        outcome.resolutions.push(decide(&t.id, aggregate(&sup, s, aggregation), tau, aggregation));
    }
    Ok(outcome)
}

/// The multiplier grid 1.0, 1.1, ..., 2.0.
pub fn default_multiplier_grid() -> Vec<f64> {
    (10..=20).map(|i| i as f64 / 10.0).collect()
}

/// A labeled induction case: the target's gold sense may or may not be
/// among the senses of its support.
#[derive(Debug, Clone)]
pub struct WsiCase {
    pub target: SenseExample,
    pub support: Vec<SenseExample>,
}

impl WsiCase {
    pub fn gold_is_known(&self) -> bool {
        self.support.iter().any(|s| s.sense_id == self.target.sense_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub config: ThresholdConfig,
    /// `(multiplier, accuracy)` for every grid point evaluated.
    pub grid: Vec<(f64, f64)>,
}

/// Whether an induction decision is right: a known gold sense must be
/// predicted exactly, an unknown one must yield [`NEW_SENSE`].
pub fn wsi_correct(predicted: &Prediction, gold: &str, gold_known: bool) -> bool {
    match predicted {
        Prediction::NewSense => !gold_known,
        Prediction::Sense(s) => gold_known && s == gold,
    }
}

/// Sets the validation mean and picks the multiplier from `grid` with the
/// best induction accuracy on `cases` (smallest on ties). Without cases the
/// multiplier defaults to [`DEFAULT_MULTIPLIER`].
pub fn calibrate_threshold(
    scorer: &dyn ScorerBackend,
    validation_pairs: &[WicPair],
    grid: &[f64],
    cases: &[WsiCase],
    aggregation: Aggregation,
) -> Result<Calibration, ResolveError> {
    if validation_pairs.is_empty() {
        return Err(ResolveError::EmptyValidation);
    }
    let queries: Vec<PairQuery> = validation_pairs.iter().map(PairQuery::from_pair).collect();
    let scores = score_checked(scorer, &queries).map_err(|source| ResolveError::Scorer {
        target: "validation pairs".to_string(),
        source,
    })?;
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;

    if cases.is_empty() || grid.is_empty() {
        return Ok(Calibration {
            config: ThresholdConfig::new(DEFAULT_MULTIPLIER, mean),
            grid: Vec::new(),
        });
    }

    let mut vectors = Vec::with_capacity(cases.len());
    for case in cases {
        let sup: Vec<&SenseExample> = case.support.iter().collect();
        let r = resolve_one(&case.target, &sup, scorer, None, aggregation)?;
        vectors.push((r.scores, case.gold_is_known()));
    }

    let mut sorted_grid = grid.to_vec();
    sorted_grid.sort_by(f64::total_cmp);
    let mut evaluated = Vec::with_capacity(sorted_grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &c in &sorted_grid {
        let tau = c * mean;
        let correct = cases
            .iter()
            .zip(&vectors)
            .filter(|(case, (scores, known))| {
                let r = decide(&case.target.id, scores.clone(), Some(tau), aggregation);
                wsi_correct(&r.predicted, &case.target.sense_id, *known)
            })
            .count();
        let acc = correct as f64 / cases.len() as f64;
        evaluated.push((c, acc));
        if best.is_none_or(|(_, b)| acc > b) {
            best = Some((c, acc));
        }
    }
    let (c, _) = best.expect("grid is non-empty");
    Ok(Calibration {
        config: ThresholdConfig::new(c, mean),
        grid: evaluated,
    })
}
