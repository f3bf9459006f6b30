//! Accuracy reports for WiC, WSD and WSI runs, plus table and CSV rendering.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::forge::{SenseExample, WicPair};
use crate::resolver::{wsi_correct, Prediction, Resolution};
use crate::splits::SplitType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Wic,
    Wsd,
    Wsi,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Wic => "wic",
            Task::Wsd => "wsd",
            Task::Wsi => "wsi",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wic" => Ok(Task::Wic),
            "wsd" => Ok(Task::Wsd),
            "wsi" => Ok(Task::Wsi),
            other => Err(format!("unknown task {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LemmaAccuracy {
    pub correct: usize,
    pub n: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub split_type: Option<SplitType>,
    pub dataset_desc: String,
    pub accuracy: f64,
    pub baseline_accuracy: f64,
    pub baseline: String,
    pub correct: usize,
    pub n_instances: usize,
    pub per_lemma: BTreeMap<String, LemmaAccuracy>,
    pub config_digest: String,
}

impl EvalReport {
    pub fn with_context(mut self, split_type: Option<SplitType>, dataset_desc: &str, config_digest: &str) -> Self {
        self.split_type = split_type;
        self.dataset_desc = dataset_desc.to_string();
        self.config_digest = config_digest.to_string();
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("nothing to evaluate")]
    Empty,
    #[error("missing predictions for {} ids: {}", .0.len(), .0.join(", "))]
    MissingPredictions(Vec<String>),
    #[error("no gold sense for {} ids: {}", .0.len(), .0.join(", "))]
    MissingGold(Vec<String>),
    #[error("{} resolutions predict NEW_SENSE; evaluate them as induction", .0.len())]
    NewSenseInWsd(Vec<String>),
}

fn build_report(
    task: Task,
    outcomes: &[(String, bool)],
    baseline_correct: usize,
    baseline: &str,
) -> Result<EvalReport, EvalError> {
    if outcomes.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut per_lemma: BTreeMap<String, LemmaAccuracy> = BTreeMap::new();
    for (lemma, ok) in outcomes {
        let e = per_lemma.entry(lemma.clone()).or_default();
        e.n += 1;
        e.correct += usize::from(*ok);
    }
    for e in per_lemma.values_mut() {
        e.accuracy = e.correct as f64 / e.n as f64;
    }
    let n = outcomes.len();
    let correct = outcomes.iter().filter(|(_, ok)| *ok).count();
    Ok(EvalReport {
        task,
        split_type: None,
        dataset_desc: String::new(),
        accuracy: correct as f64 / n as f64,
        baseline_accuracy: baseline_correct as f64 / n as f64,
        baseline: baseline.to_string(),
        correct,
        n_instances: n,
        per_lemma,
        config_digest: String::new(),
    })
}

/// Binary WiC accuracy against gold pair labels.
pub fn eval_wic(predictions: &HashMap<String, u8>, gold: &[WicPair]) -> Result<EvalReport, EvalError> {
    let missing: Vec<String> = gold
        .iter()
        .filter(|p| !predictions.contains_key(&p.id))
        .map(|p| p.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingPredictions(missing));
    }
    let outcomes: Vec<(String, bool)> = gold
        .iter()
        .map(|p| (p.lemma.clone(), predictions[&p.id] == p.label))
        .collect();
    let positives = gold.iter().filter(|p| p.label == 1).count();
    build_report(Task::Wic, &outcomes, positives.max(gold.len() - positives), "majority label")
}

fn gold_for<'a>(
    resolutions: &[Resolution],
    gold: &'a [SenseExample],
) -> Result<Vec<&'a SenseExample>, EvalError> {
    let by_id: HashMap<&str, &SenseExample> = gold.iter().map(|e| (e.id.as_str(), e)).collect();
    let missing: Vec<String> = resolutions
        .iter()
        .filter(|r| !by_id.contains_key(r.id.as_str()))
        .map(|r| r.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingGold(missing));
    }
    Ok(resolutions.iter().map(|r| by_id[r.id.as_str()]).collect())
}

/// Most frequent sense per lemma in `train`; ties go to the smallest sense id.
pub fn most_frequent_senses(train: &[SenseExample]) -> HashMap<String, String> {
    let mut counts: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
    for e in train {
        *counts.entry(&e.lemma).or_default().entry(&e.sense_id).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(lemma, senses)| {
            let mut best: Option<(&str, usize)> = None;
            for (sense, n) in senses {
                if best.is_none_or(|(_, b)| n > b) {
                    best = Some((sense, n));
                }
            }
            (lemma.to_string(), best.expect("non-empty").0.to_string())
        })
        .collect()
}

/// Disambiguation accuracy; the baseline predicts each lemma's most
/// frequent training sense.
pub fn eval_wsd(
    resolutions: &[Resolution],
    gold: &[SenseExample],
    train: &[SenseExample],
) -> Result<EvalReport, EvalError> {
    let new: Vec<String> = resolutions
        .iter()
        .filter(|r| r.predicted.is_new())
        .map(|r| r.id.clone())
        .collect();
    if !new.is_empty() {
        return Err(EvalError::NewSenseInWsd(new));
    }
    let golds = gold_for(resolutions, gold)?;
    let mfs = most_frequent_senses(train);
    let outcomes: Vec<(String, bool)> = resolutions
        .iter()
        .zip(&golds)
        .map(|(r, g)| (g.lemma.clone(), r.predicted.as_str() == g.sense_id))
        .collect();
    let baseline_correct = golds
        .iter()
        .filter(|g| mfs.get(&g.lemma).is_some_and(|s| *s == g.sense_id))
        .count();
    build_report(Task::Wsd, &outcomes, baseline_correct, "most frequent sense")
}

/// Induction accuracy: a target whose gold sense was among the senses it
/// was scored against must get that sense, any other target must get
/// NEW_SENSE. The baseline always gives the more common of the two
/// decisions.
pub fn eval_wsi(resolutions: &[Resolution], gold: &[SenseExample]) -> Result<EvalReport, EvalError> {
    let golds = gold_for(resolutions, gold)?;
    let mut known = 0;
    let outcomes: Vec<(String, bool)> = resolutions
        .iter()
        .zip(&golds)
        .map(|(r, g)| {
            let is_known = r.scores.contains_key(&g.sense_id);
            known += usize::from(is_known);
            (g.lemma.clone(), wsi_correct(&r.predicted, &g.sense_id, is_known))
        })
        .collect();
    let unknown = outcomes.len() - known;
    build_report(Task::Wsi, &outcomes, known.max(unknown), "majority known/new")
}

/// Fraction of predictions equal to NEW_SENSE.
pub fn new_sense_rate(resolutions: &[Resolution]) -> f64 {
    if resolutions.is_empty() {
        return 0.0;
    }
    resolutions.iter().filter(|r| r.predicted == Prediction::NewSense).count() as f64 / resolutions.len() as f64
}

fn ordered(reports: &[EvalReport]) -> Vec<&EvalReport> {
    let mut v: Vec<&EvalReport> = reports.iter().collect();
    // unlabeled splits last; otherwise input order
    v.sort_by_key(|r| (r.task, r.split_type.is_none(), r.split_type));
    v
}

fn split_label(r: &EvalReport) -> &'static str {
    r.split_type.map(SplitType::label).unwrap_or("-")
}

pub const CSV_HEADER: [&str; 7] = ["task", "split_type", "dataset_desc", "accuracy", "baseline", "n", "config_digest"];

/// One row per report, ordered by task then split type.
pub fn render_csv(reports: &[EvalReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in ordered(reports) {
        w.write_record([
            r.task.as_str(),
            split_label(r),
            &r.dataset_desc,
            &format!("{:.4}", r.accuracy),
            &format!("{:.4}", r.baseline_accuracy),
            &r.n_instances.to_string(),
            &r.config_digest,
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

/// Aligned text tables, one per task: Dataset used | Task type | CA | Default.
pub fn render_table(reports: &[EvalReport]) -> String {
    let rows = ordered(reports);
    let mut out = String::new();
    let mut start = 0;
    while start < rows.len() {
        let task = rows[start].task;
        let end = start + rows[start..].iter().take_while(|r| r.task == task).count();
        let group = &rows[start..end];
        let baseline = group[0].baseline.clone();
        let header = [
            "Dataset used".to_string(),
            "Task type".to_string(),
            "CA".to_string(),
            format!("Default ({baseline})"),
        ];
        let body: Vec<[String; 4]> = group
            .iter()
            .map(|r| {
                [
                    if r.dataset_desc.is_empty() { "-".to_string() } else { r.dataset_desc.clone() },
                    split_label(r).to_string(),
                    format!("{:.3}", r.accuracy),
                    format!("{:.3}", r.baseline_accuracy),
                ]
            })
            .collect();
        let mut widths = header.clone().map(|h| h.chars().count());
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String; 4]| -> String {
            let parts: Vec<String> = cells
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                .collect();
            parts.join(" | ").trim_end().to_string()
        };
        if !out.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "[{}]", task.as_str().to_uppercase());
        let _ = writeln!(out, "{}", line(&header));
        let _ = writeln!(out, "{}", widths.map(|w| "-".repeat(w)).join("-+-"));
        for row in &body {
            let _ = writeln!(out, "{}", line(row));
        }
        start = end;
    }
    out
}
