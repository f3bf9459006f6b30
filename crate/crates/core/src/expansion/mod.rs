//! Expanding dictionary usage snippets into full sentences with an LLM, and
//! filtering the generations.

mod backend;
mod cache;
mod matching;

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

pub use backend::{BackendError, ChatCompletionsBackend, ChatEndpointConfig, CompletionRequest, LlmBackend, OfflineBackend};
pub use cache::{cache_key, CacheRecord, GenerationCache};
pub use matching::{
    lemma_present, locate_target, LemmaMatchPolicy, LemmaMatcher, Lemmatizer, MatchKind, TableLemmatizer, TargetNotFound,
};

use crate::dict::UsageSnippet;
use crate::retry::RetryPolicy;
use crate::text::{dedup_key, normalize};

/// Slovene "Expand [usage example] into a full sentence".
pub const DEFAULT_PROMPT_TEMPLATE: &str = "Razširi {} v polno poved";

/// Describes how duplicate generations are detected.
pub const DEDUP_NORMALIZATION: &str = "nfc+trim+collapse-whitespace+lowercase";

/// Prompt with a `{}` placeholder for the snippet text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PromptTemplate(String);

impl Default for PromptTemplate {
    fn default() -> Self {
        Self(DEFAULT_PROMPT_TEMPLATE.to_string())
    }
}

impl PromptTemplate {
    pub fn new(template: impl Into<String>) -> Self {
        Self(template.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn render(&self, snippet: &str) -> String {
        if self.0.contains("{}") {
            self.0.replacen("{}", snippet, 1)
        } else {
            format!("{} {}", self.0, snippet)
        }
    }
}

/// The default-template prompt for `snippet`.
pub fn build_prompt(snippet: &UsageSnippet) -> String {
    PromptTemplate::default().render(&snippet.text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpansionSettings {
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub n_generations: u32,
    pub template: PromptTemplate,
}

impl Default for ExpansionSettings {
    fn default() -> Self {
        Self {
            model_id: "gpt-3.5-turbo".to_string(),
            temperature: 1.0,
            max_tokens: 256,
            n_generations: 10,
            template: PromptTemplate::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRequest {
    pub snippet: UsageSnippet,
    pub prompt: String,
    pub n_generations: u32,
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ExpansionRequest {
    pub fn new(snippet: UsageSnippet, settings: &ExpansionSettings) -> Self {
        let prompt = settings.template.render(&snippet.text);
        Self {
            snippet,
            prompt,
            n_generations: settings.n_generations.max(1),
            model_id: settings.model_id.clone(),
            temperature: settings.temperature,
            max_tokens: settings.max_tokens,
        }
    }
}

/// Which snippet a generation was expanded from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SnippetSource {
    pub lemma: String,
    pub sense: u32,
    pub snippet_index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationStatus {
    /// Not yet filtered.
    Pending,
    Kept,
    DroppedLemmaMissing,
    DroppedDuplicate,
    DroppedEmpty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedSentence {
    pub text: String,
    pub source: SnippetSource,
    /// The snippet the sentence was expanded from.
    pub snippet_text: String,
    pub generation_index: u32,
    pub status: GenerationStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Runs expansion requests against a backend through a cache.
pub struct Expander<'a> {
    backend: &'a dyn LlmBackend,
    cache: &'a GenerationCache,
    retry: RetryPolicy,
    max_in_flight: usize,
    network_calls: AtomicUsize,
}

impl<'a> Expander<'a> {
    pub fn new(backend: &'a dyn LlmBackend, cache: &'a GenerationCache) -> Self {
        Self {
            backend,
            cache,
            retry: RetryPolicy::default(),
            max_in_flight: 4,
            network_calls: AtomicUsize::new(0),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_max_in_flight(mut self, n: usize) -> Self {
        self.max_in_flight = n.max(1);
        self
    }

    /// Backend calls made so far, including retries.
    pub fn network_calls(&self) -> usize {
        self.network_calls.load(Ordering::Relaxed)
    }

    fn generate(&self, request: &ExpansionRequest, index: u32) -> GeneratedSentence {
        let source = SnippetSource {
            lemma: request.snippet.lemma.clone(),
            sense: request.snippet.sense,
            snippet_index: request.snippet.index,
        };
        let key = cache_key(&request.model_id, &request.prompt, request.temperature, index);
        let result = match self.cache.get(&key) {
            Some(text) => Ok(text),
            None => {
                let completion = CompletionRequest {
                    model: &request.model_id,
                    prompt: &request.prompt,
                    temperature: request.temperature,
                    max_tokens: request.max_tokens,
                };
                let result = self.retry.run(
                    |_| {
                        self.network_calls.fetch_add(1, Ordering::Relaxed);
                        self.backend.complete(&completion)
                    },
                    BackendError::is_retryable,
                );
                if let Ok(text) = &result {
                    let record = CacheRecord::new(&request.model_id, &request.prompt, request.temperature, index, text.clone());
                    if let Err(e) = self.cache.insert(record) {
                        log::error!("failed to write generation cache: {e}");
                    }
                }
                result
            }
        };
        let (text, error) = match result {
            Ok(text) => (normalize(&text), None),
            Err(e) => {
                log::warn!("generation {index} for {:?} failed: {e}", request.prompt);
                (String::new(), Some(e.to_string()))
            }
        };
        GeneratedSentence {
            text,
            source,
            snippet_text: request.snippet.text.clone(),
            generation_index: index,
            status: GenerationStatus::Pending,
            error,
        }
    }

    /// Produces `n_generations` unfiltered sentences for one request.
    pub fn expand_snippet(&self, request: &ExpansionRequest) -> Vec<GeneratedSentence> {
        (0..request.n_generations).map(|i| self.generate(request, i)).collect()
    }

    /// Expands many requests with at most `max_in_flight` concurrent backend
    /// calls. Output order follows `(request, generation_index)`.
    pub fn expand_all(&self, requests: &[ExpansionRequest]) -> Vec<Vec<GeneratedSentence>> {
        let jobs: Vec<(usize, u32)> = requests
            .iter()
            .enumerate()
            .flat_map(|(r, req)| (0..req.n_generations).map(move |g| (r, g)))
            .collect();
        let slots: Mutex<Vec<Option<GeneratedSentence>>> = Mutex::new(vec![None; jobs.len()]);
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..self.max_in_flight.min(jobs.len().max(1)) {
                scope.spawn(|| loop {
                    let j = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&(r, g)) = jobs.get(j) else { break };
                    let sentence = self.generate(&requests[r], g);
                    slots.lock().expect("slots lock")[j] = Some(sentence);
                });
            }
        });
        let mut flat = slots.into_inner().expect("slots lock").into_iter();
        requests
            .iter()
            .map(|req| {
                (0..req.n_generations)
                    .map(|_| flat.next().flatten().expect("every job completes"))
                    .collect()
            })
            .collect()
    }
}

/// Applies the two generation filters. First pass: empty text is
/// `DroppedEmpty`, text without the lemma is `DroppedLemmaMissing`. Second
/// pass: a sentence whose [`dedup_key`] equals that of an earlier kept
/// sentence of the same (lemma, sense) is `DroppedDuplicate`. Existing
/// statuses are ignored, so filtering is idempotent.
pub fn filter_candidates(candidates: &[GeneratedSentence], lemma: &str, matcher: &LemmaMatcher) -> Vec<GeneratedSentence> {
    let mut seen: HashSet<(String, u32, String)> = HashSet::new();
    candidates
        .iter()
        .map(|c| {
            let status = if c.text.trim().is_empty() {
                GenerationStatus::DroppedEmpty
            } else if !matcher.is_present(&c.text, lemma) {
                GenerationStatus::DroppedLemmaMissing
            } else if !seen.insert((c.source.lemma.clone(), c.source.sense, dedup_key(&c.text))) {
                GenerationStatus::DroppedDuplicate
            } else {
                GenerationStatus::Kept
            };
            GeneratedSentence { status, ..c.clone() }
        })
        .collect()
}
