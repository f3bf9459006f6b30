//! WiC scorer backends: test doubles, baselines and the HTTP client.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PairQuery, ScorerBackend, ScorerError};
use crate::forge::SenseExample;
use crate::retry::RetryPolicy;
use crate::text::tokenize;

/// Scores 1.0 when both examples carry the same gold sense, else 0.0.
#[derive(Debug, Clone, Default)]
pub struct OracleScorer {
    gold: HashMap<String, String>,
}

impl OracleScorer {
    /// `gold` maps example ids to sense ids.
    pub fn new(gold: impl IntoIterator<Item = (String, String)>) -> Self {
        Self {
            gold: gold.into_iter().collect(),
        }
    }

    pub fn from_examples<'a>(examples: impl IntoIterator<Item = &'a SenseExample>) -> Self {
        Self::new(
            examples
                .into_iter()
                .map(|e| (e.id.clone(), e.sense_id.clone())),
        )
    }

    fn sense(&self, id: &str) -> Result<&String, ScorerError> {
        self.gold.get(id).ok_or_else(|| ScorerError::UnknownExample(id.to_string()))
    }
}

impl ScorerBackend for OracleScorer {
    fn name(&self) -> &str {
        "oracle"
    }

    fn score_batch(&self, queries: &[PairQuery]) -> Result<Vec<f64>, ScorerError> {
        queries
            .iter()
            .map(|q| {
                let a = self.sense(&q.left_id)?;
                let b = self.sense(&q.right_id)?;
                Ok(if a == b { 1.0 } else { 0.0 })
            })
            .collect()
    }
}

/// Uniform pseudo-random scores determined by the seed and the query content.
#[derive(Debug, Clone, Copy)]
pub struct RandomScorer {
    seed: u64,
}

impl RandomScorer {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn score(&self, q: &PairQuery) -> f64 {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        for part in [&q.left_id, &q.right_id, &q.lemma, &q.s1, &q.s2] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part.as_bytes());
        }
        for n in [q.s1_start, q.s1_end, q.s2_start, q.s2_end] {
            h.update((n as u64).to_le_bytes());
        }
        let digest = h.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        // 53 random mantissa bits -> [0, 1)
        (u64::from_le_bytes(bytes) >> 11) as f64 / (1u64 << 53) as f64
    }
}

impl ScorerBackend for RandomScorer {
    fn name(&self) -> &str {
        "random"
    }

    fn score_batch(&self, queries: &[PairQuery]) -> Result<Vec<f64>, ScorerError> {
        Ok(queries.iter().map(|q| self.score(q)).collect())
    }
}

/// Jaccard overlap of the two sentences' lowercased token sets.
#[derive(Debug, Clone, Copy, Default)]
pub struct OverlapScorer;

pub fn token_jaccard(a: &str, b: &str) -> f64 {
    let set = |s: &str| -> HashSet<String> { tokenize(s).into_iter().map(|t| t.text.to_lowercase()).collect() };
    let (a, b) = (set(a), set(b));
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

impl ScorerBackend for OverlapScorer {
    fn name(&self) -> &str {
        "overlap"
    }

    fn score_batch(&self, queries: &[PairQuery]) -> Result<Vec<f64>, ScorerError> {
        Ok(queries.iter().map(|q| token_jaccard(&q.s1, &q.s2)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteScorerConfig {
    /// Service root, e.g. `http://127.0.0.1:8080`.
    pub url: String,
    pub batch_size: usize,
    pub max_concurrent: usize,
    pub timeout_secs: u64,
    pub retry: RetryPolicy,
}

impl Default for RemoteScorerConfig {
    fn default() -> Self {
        Self {
            url: "http://127.0.0.1:8080".to_string(),
            batch_size: 100,
            max_concurrent: 2,
            timeout_secs: 120,
            retry: RetryPolicy::default(),
        }
    }
}

#[derive(Serialize)]
struct WirePair<'a> {
    s1: &'a str,
    s1_start: usize,
    s1_end: usize,
    s2: &'a str,
    s2_start: usize,
    s2_end: usize,
    lemma: &'a str,
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    pairs: Vec<WirePair<'a>>,
}

#[derive(Deserialize)]
struct ScoreResponse {
    scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Health {
    pub status: String,
    #[serde(default)]
    pub model: Option<String>,
}

enum Attempt {
    Transient(String),
    Fatal(String),
}

/// Client for a scoring service speaking `POST /v1/score`.
pub struct RemoteScorer {
    config: RemoteScorerConfig,
    agent: ureq::Agent,
    requests: AtomicUsize,
}

impl RemoteScorer {
    pub fn new(config: RemoteScorerConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            config,
            agent,
            requests: AtomicUsize::new(0),
        }
    }

    fn endpoint(&self, path: &str) -> String {
        format!("{}{path}", self.config.url.trim_end_matches('/'))
    }

    /// HTTP requests issued so far, including retries.
    pub fn requests_made(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }

    pub fn health(&self) -> Result<Health, ScorerError> {
        let mut resp = self
            .agent
            .get(&self.endpoint("/v1/health"))
            .call()
            .map_err(|e| ScorerError::Protocol(e.to_string()))?;
        resp.body_mut()
            .read_json::<Health>()
            .map_err(|e| ScorerError::Protocol(e.to_string()))
    }

    fn post_batch(&self, batch: &[PairQuery]) -> Result<Vec<f64>, Attempt> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        let body = ScoreRequest {
            pairs: batch
                .iter()
                .map(|q| WirePair {
                    s1: &q.s1,
                    s1_start: q.s1_start,
                    s1_end: q.s1_end,
                    s2: &q.s2,
                    s2_start: q.s2_start,
                    s2_end: q.s2_end,
                    lemma: &q.lemma,
                })
                .collect(),
        };
        let mut resp = self
            .agent
            .post(&self.endpoint("/v1/score"))
            .send_json(&body)
            .map_err(|e| Attempt::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Attempt::Transient(e.to_string()))?;
        match status {
            200..=299 => {}
            408 | 429 | 500..=599 => return Err(Attempt::Transient(format!("HTTP {status}: {text}"))),
            _ => return Err(Attempt::Fatal(format!("HTTP {status}: {text}"))),
        }
        let parsed: ScoreResponse = serde_json::from_str(&text).map_err(|e| Attempt::Fatal(format!("bad response body: {e}")))?;
        if parsed.scores.len() != batch.len() {
            return Err(Attempt::Fatal(format!(
                "sent {} pairs but received {} scores",
                batch.len(),
                parsed.scores.len()
            )));
        }
        Ok(parsed.scores)
    }

    fn score_chunk(&self, batch: &[PairQuery]) -> Result<Vec<f64>, ScorerError> {
        let failed_ids = || batch.iter().map(|q| format!("{}~{}", q.left_id, q.right_id)).collect();
        self.config
            .retry
            .run(|_| self.post_batch(batch), |e| matches!(e, Attempt::Transient(_)))
            .map_err(|e| match e {
                Attempt::Fatal(message) => ScorerError::Protocol(message),
                Attempt::Transient(message) => ScorerError::Transport {
                    message,
                    failed_ids: failed_ids(),
                },
            })
    }
}

impl ScorerBackend for RemoteScorer {
    fn name(&self) -> &str {
        "remote"
    }

    fn score_batch(&self, queries: &[PairQuery]) -> Result<Vec<f64>, ScorerError> {
        let chunks: Vec<&[PairQuery]> = queries.chunks(self.config.batch_size.max(1)).collect();
        let mut results: Vec<Option<Result<Vec<f64>, ScorerError>>> = (0..chunks.len()).map(|_| None).collect();
        for (wave_idx, wave) in chunks.chunks(self.config.max_concurrent.max(1)).enumerate() {
            let base = wave_idx * self.config.max_concurrent.max(1);
            let outputs: Vec<_> = std::thread::scope(|scope| {
                let handles: Vec<_> = wave.iter().map(|chunk| scope.spawn(|| self.score_chunk(chunk))).collect();
                handles.into_iter().map(|h| h.join().expect("scorer thread")).collect()
            });
            for (k, out) in outputs.into_iter().enumerate() {
                results[base + k] = Some(out);
            }
        }
        let mut scores = Vec::with_capacity(queries.len());
        for r in results {
            scores.extend(r.expect("every chunk scored")?);
        }
        Ok(scores)
    }
}
