//! Deciding whether, and where, a lemma occurs in a sentence.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::text::{tokenize, Span, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchKind {
    /// Some token equals the lemma.
    ExactToken,
    /// Some token starts with the lemma's stem.
    StemPrefix,
    /// Some token lemmatizes to the lemma.
    #[serde(alias = "lemmatizer")]
    ExternalLemmatizer,
}

impl std::str::FromStr for MatchKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact-token" => Ok(Self::ExactToken),
            "stem-prefix" => Ok(Self::StemPrefix),
            "lemmatizer" | "external-lemmatizer" => Ok(Self::ExternalLemmatizer),
            other => Err(format!("unknown match policy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct LemmaMatchPolicy {
    pub kind: MatchKind,
    pub min_stem_length: usize,
    pub case_sensitive: bool,
}

impl Default for LemmaMatchPolicy {
    fn default() -> Self {
        Self {
            kind: MatchKind::StemPrefix,
            min_stem_length: 4,
            case_sensitive: false,
        }
    }
}

impl LemmaMatchPolicy {
    pub fn exact() -> Self {
        Self {
            kind: MatchKind::ExactToken,
            ..Self::default()
        }
    }

    pub fn stem_prefix(min_stem_length: usize) -> Self {
        Self {
            kind: MatchKind::StemPrefix,
            min_stem_length,
            ..Self::default()
        }
    }

    /// Number of leading characters of a lemma word that a token must share:
    /// `max(min_stem_length, ceil(0.7 * len))`, capped at the word length.
    pub fn stem_len(&self, lemma_word_chars: usize) -> usize {
        let proportional = (7 * lemma_word_chars).div_ceil(10);
        self.min_stem_length.max(proportional).min(lemma_word_chars)
    }
}

/// Maps inflected word forms to their lemma.
pub trait Lemmatizer: Send + Sync {
    fn lemma_of(&self, token: &str) -> Option<String>;
}

/// Lemmatizer backed by a form → lemma table, e.g. loaded from a
/// tab-separated `form<TAB>lemma` file.
#[derive(Debug, Clone, Default)]
pub struct TableLemmatizer {
    forms: HashMap<String, String>,
}

impl TableLemmatizer {
    pub fn new(forms: impl IntoIterator<Item = (String, String)>) -> Self {
        Self {
            forms: forms.into_iter().map(|(f, l)| (f.to_lowercase(), l)).collect(),
        }
    }

    pub fn from_tsv(input: &str) -> Self {
        Self::new(input.lines().filter_map(|line| {
            let (form, lemma) = line.split_once('\t')?;
            Some((form.trim().to_string(), lemma.trim().to_string()))
        }))
    }
}

impl Lemmatizer for TableLemmatizer {
    fn lemma_of(&self, token: &str) -> Option<String> {
        self.forms.get(&token.to_lowercase()).cloned()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("lemma {lemma:?} not found in sentence {sentence:?}")]
pub struct TargetNotFound {
    pub lemma: String,
    pub sentence: String,
}

/// A match policy bound to an optional lemmatizer.
#[derive(Clone)]
pub struct LemmaMatcher {
    policy: LemmaMatchPolicy,
    lemmatizer: Option<Arc<dyn Lemmatizer>>,
    warning: Option<String>,
}

impl fmt::Debug for LemmaMatcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LemmaMatcher")
            .field("policy", &self.policy)
            .field("lemmatizer", &self.lemmatizer.is_some())
            .field("warning", &self.warning)
            .finish()
    }
}

impl Default for LemmaMatcher {
    fn default() -> Self {
        Self::new(LemmaMatchPolicy::default(), None)
    }
}

impl LemmaMatcher {
    /// An external-lemmatizer policy without a lemmatizer degrades to
    /// stem-prefix matching; the fallback is reported by [`Self::warning`].
    pub fn new(policy: LemmaMatchPolicy, lemmatizer: Option<Arc<dyn Lemmatizer>>) -> Self {
        let mut policy = policy;
        let mut warning = None;
        if policy.kind == MatchKind::ExternalLemmatizer && lemmatizer.is_none() {
            let msg = "external lemmatizer unavailable; falling back to stem-prefix matching".to_string();
            log::warn!("{msg}");
            warning = Some(msg);
            policy.kind = MatchKind::StemPrefix;
        }
        Self {
            policy,
            lemmatizer,
            warning,
        }
    }

    pub fn from_policy(policy: LemmaMatchPolicy) -> Self {
        Self::new(policy, None)
    }

    /// The policy actually applied, after any fallback.
    pub fn policy(&self) -> &LemmaMatchPolicy {
        &self.policy
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    fn fold(&self, s: &str) -> String {
        if self.policy.case_sensitive {
            s.to_string()
        } else {
            s.to_lowercase()
        }
    }

    fn token_matches(&self, token: &str, lemma_word: &str) -> bool {
        let token_f = self.fold(token);
        let lemma_f = self.fold(lemma_word);
        match self.policy.kind {
            MatchKind::ExactToken => token_f == lemma_f,
            MatchKind::StemPrefix => {
                let n = self.policy.stem_len(lemma_f.chars().count());
                let stem: String = lemma_f.chars().take(n).collect();
                token_f.starts_with(&stem)
            }
            MatchKind::ExternalLemmatizer => {
                token_f == lemma_f
                    || self
                        .lemmatizer
                        .as_ref()
                        .and_then(|l| l.lemma_of(token))
                        .is_some_and(|l| self.fold(&l) == lemma_f)
            }
        }
    }

    /// Span of the first token window matching the lemma's words.
    pub fn find(&self, sentence: &str, lemma: &str) -> Option<Span> {
        let lemma_words: Vec<Token<'_>> = tokenize(lemma);
        if lemma_words.is_empty() {
            return None;
        }
        let tokens = tokenize(sentence);
        tokens.windows(lemma_words.len()).find_map(|window| {
            window
                .iter()
                .zip(&lemma_words)
                .all(|(t, l)| self.token_matches(t.text, l.text))
                .then(|| Span::new(window[0].span.start, window[window.len() - 1].span.end))
        })
    }

    pub fn is_present(&self, sentence: &str, lemma: &str) -> bool {
        self.find(sentence, lemma).is_some()
    }

    pub fn locate(&self, sentence: &str, lemma: &str) -> Result<Span, TargetNotFound> {
        self.find(sentence, lemma).ok_or_else(|| TargetNotFound {
            lemma: lemma.to_string(),
            sentence: sentence.to_string(),
        })
    }
}

/// Whether `lemma` occurs in `sentence` under `policy` (no lemmatizer).
pub fn lemma_present(sentence: &str, lemma: &str, policy: &LemmaMatchPolicy) -> bool {
    LemmaMatcher::from_policy(*policy).is_present(sentence, lemma)
}

/// Character span of the first token matching `lemma`.
pub fn locate_target(sentence: &str, lemma: &str, policy: &LemmaMatchPolicy) -> Result<Span, TargetNotFound> {
    LemmaMatcher::from_policy(*policy).locate(sentence, lemma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_token_case_insensitive() {
        assert!(lemma_present("Slovar ima sto tisoč besed.", "slovar", &LemmaMatchPolicy::exact()));
        let sensitive = LemmaMatchPolicy {
            case_sensitive: true,
            ..LemmaMatchPolicy::exact()
        };
        assert!(!lemma_present("Slovar ima sto tisoč besed.", "slovar", &sensitive));
        assert!(!lemma_present("slovarji so tu", "slovar", &LemmaMatchPolicy::exact()));
    }

    #[test]
    fn empty_sentence_never_matches() {
        for policy in [LemmaMatchPolicy::exact(), LemmaMatchPolicy::stem_prefix(4)] {
            assert!(!lemma_present("", "slovar", &policy));
        }
    }

    #[test]
    fn stem_prefix_handles_inflection() {
        let p = LemmaMatchPolicy::stem_prefix(4);
        // 7 chars -> ceil(4.9) = 5 -> "pozna"
        assert_eq!(p.stem_len(7), 5);
        assert!(lemma_present("Nihče ga ne pozna, niti njegovi sosedje.", "poznati", &p));
        assert!(lemma_present("prevajati s slovarji", "slovar", &p));
        assert!(!lemma_present("poz je kratek", "poznati", &p));
        // short lemmas are matched whole
        assert_eq!(p.stem_len(2), 2);
        assert!(lemma_present("Veliki Z je bil", "z", &p));
    }

    #[test]
    fn locate_returns_char_spans() {
        let p = LemmaMatchPolicy::default();
        assert_eq!(locate_target("slovar ima sto tisoč besed", "slovar", &p).unwrap(), Span::new(0, 6));
        assert_eq!(locate_target("ima slovar", "slovar", &p).unwrap(), Span::new(4, 10));
        assert_eq!(locate_target("Čaša in čaše", "čaša", &LemmaMatchPolicy::exact()).unwrap(), Span::new(0, 4));
        assert!(locate_target("nič", "slovar", &p).is_err());
    }

    #[test]
    fn multiword_lemmas_match_windows() {
        let p = LemmaMatchPolicy::exact();
        let s = "Zvezna cesta Ljubljana–Celje je pomembna.";
        assert_eq!(locate_target(s, "zvezna cesta", &p).unwrap(), Span::new(0, 12));
        assert!(!lemma_present(s, "cesta zvezna", &p));
    }

    #[test]
    fn lemmatizer_policy_and_fallback() {
        let lem = TableLemmatizer::from_tsv("šel\titi\nbesed\tbeseda\n");
        let policy = LemmaMatchPolicy {
            kind: MatchKind::ExternalLemmatizer,
            ..LemmaMatchPolicy::default()
        };
        let m = LemmaMatcher::new(policy, Some(Arc::new(lem)));
        assert!(m.warning().is_none());
        assert!(m.is_present("Včeraj je šel domov.", "iti"));
        assert!(!m.is_present("Včeraj je prišel domov.", "iti"));

        let fallback = LemmaMatcher::new(policy, None);
        assert!(fallback.warning().is_some());
        assert_eq!(fallback.policy().kind, MatchKind::StemPrefix);
        assert!(fallback.is_present("Nihče ga ne pozna.", "poznati"));
    }
}
