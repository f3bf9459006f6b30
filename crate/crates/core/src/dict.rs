//! Parser and writer for plain-text dictionaries in the canonical
//! "SSKJ-lite" layout, plus a line-delimited JSON alternative.
//!
//! ```text
//! slovar
//! 1. knjiga, v kateri so besede razvrščene po abecedi in pojasnjene: slovar ima sto tisoč besed; izdati, sestavljati slovar / obsežen slovar
//! * jezikosl. avtorski slovar; jezikosl. obrnjeni slovar
//! 2. besedni zaklad: imeti bogat slovar / njen slovar ni bil ravno izbran
//! ```
//!
//! Entries are separated by a blank line and the first line of an entry is
//! its lemma. A sense starts with `<ordinal>. `, its definition runs up to the
//! first `:` and the remainder holds usage snippets: `;` separates groups and
//! `/` separates related snippets inside a group. Lines starting with `* ` or
//! `** ` hold special examples (`<category>. <text>` items separated by `;`)
//! for the sense above them. Any other line continues the previous logical line.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::text::normalize;

/// Elided content in quoted dictionary excerpts; never a snippet.
const ELISION: &str = "[...]";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryEntry {
    pub lemma: String,
    pub senses: Vec<Sense>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sense {
    pub ordinal: u32,
    pub definition: String,
    pub snippets: Vec<UsageSnippet>,
    pub special_examples: Vec<SpecialExample>,
}

/// A short usage example attached to one sense.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UsageSnippet {
    pub text: String,
    pub lemma: String,
    /// Ordinal of the owning sense.
    pub sense: u32,
    /// Snippets joined by `/` inside one `;`-group share a group id.
    pub group_id: u32,
    /// Position of the snippet within its sense, starting at 0.
    pub index: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpecialMarker {
    #[serde(rename = "*")]
    #[default]
    Single,
    #[serde(rename = "**")]
    Double,
}

impl SpecialMarker {
    pub fn as_str(self) -> &'static str {
        match self {
            SpecialMarker::Single => "*",
            SpecialMarker::Double => "**",
        }
    }
}

/// Phrase, idiom or terminology example from a `*`/`**` section.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpecialExample {
    #[serde(default)]
    pub marker: SpecialMarker,
    pub tag: String,
    pub text: String,
}

impl DictionaryEntry {
    pub fn snippet_count(&self) -> usize {
        self.senses.iter().map(|s| s.snippets.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Skip malformed entries and keep going, recording an error for each.
    #[default]
    Lenient,
    /// Abort on the first error.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum ParseErrorKind {
    MissingLemma,
    MissingSenseNumber,
    DefinitionWithoutColon,
    EmptyDefinition,
    NonContiguousOrdinal { expected: u32, found: u32 },
    SpecialBeforeSense,
    MissingCategoryTag,
    NoSenses,
    LeakedMarker(String),
    InvalidJson(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MissingLemma => write!(f, "entry starts with a sense line instead of a lemma"),
            Self::MissingSenseNumber => write!(f, "expected a numbered sense line"),
            Self::DefinitionWithoutColon => write!(f, "sense definition is not terminated by ':'"),
            Self::EmptyDefinition => write!(f, "sense definition is empty"),
            Self::NonContiguousOrdinal { expected, found } => {
                write!(f, "expected sense {expected}, found {found}")
            }
            Self::SpecialBeforeSense => write!(f, "special-example line before any sense"),
            Self::MissingCategoryTag => write!(f, "special example without a category tag"),
            Self::NoSenses => write!(f, "entry has no senses"),
            Self::LeakedMarker(s) => write!(f, "snippet contains a structural marker: {s:?}"),
            Self::InvalidJson(e) => write!(f, "invalid JSON entry: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number in the input.
    pub line: usize,
    pub lemma: Option<String>,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedDictionary {
    pub entries: Vec<DictionaryEntry>,
    /// Problems skipped over in lenient mode.
    pub errors: Vec<ParseError>,
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

enum LogicalKind {
    Sense(u32),
    Special(SpecialMarker),
}

struct Logical {
    line: usize,
    kind: LogicalKind,
    body: String,
}

/// Parses canonical dictionary text.
pub fn parse_dictionary(input: &str, mode: ParseMode) -> Result<ParsedDictionary, ParseError> {
    let mut out = ParsedDictionary::default();
    for block in blocks(input) {
        let mut warnings = Vec::new();
        match parse_block(&block, &mut warnings) {
            Ok(entry) => {
                if mode == ParseMode::Strict {
                    if let Some(w) = warnings.into_iter().next() {
                        return Err(w);
                    }
                } else {
                    out.errors.extend(warnings);
                }
                out.entries.push(entry);
            }
            Err(e) => {
                if mode == ParseMode::Strict {
                    return Err(e);
                }
                log::warn!("skipping malformed dictionary entry: {e}");
                out.errors.extend(warnings);
                out.errors.push(e);
            }
        }
    }
    Ok(out)
}

fn blocks(input: &str) -> Vec<Vec<Line<'_>>> {
    let mut blocks = Vec::new();
    let mut current = Vec::new();
    for (i, raw) in input.lines().enumerate() {
        let text = raw.trim_end_matches('\r');
        if text.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            current.push(Line { number: i + 1, text });
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    blocks
}

/// Splits `<digits>. rest` into the ordinal and the rest.
fn sense_prefix(line: &str) -> Option<(u32, &str)> {
    let digits = line.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let rest = line[digits..].strip_prefix(". ")?;
    let ordinal = line[..digits].parse().ok()?;
    Some((ordinal, rest))
}

fn special_prefix(line: &str) -> Option<(SpecialMarker, &str)> {
    if let Some(rest) = line.strip_prefix("** ") {
        Some((SpecialMarker::Double, rest))
    } else {
        line.strip_prefix("* ").map(|rest| (SpecialMarker::Single, rest))
    }
}

fn parse_block(block: &[Line<'_>], warnings: &mut Vec<ParseError>) -> Result<DictionaryEntry, ParseError> {
    let head = &block[0];
    if sense_prefix(head.text).is_some() {
        return Err(ParseError {
            line: head.number,
            lemma: None,
            kind: ParseErrorKind::MissingLemma,
        });
    }
    let lemma = normalize(head.text);
    let err = |line: usize, kind| ParseError {
        line,
        lemma: Some(lemma.clone()),
        kind,
    };

    let mut logical: Vec<Logical> = Vec::new();
    for line in &block[1..] {
        if let Some((ordinal, rest)) = sense_prefix(line.text) {
            logical.push(Logical {
                line: line.number,
                kind: LogicalKind::Sense(ordinal),
                body: rest.to_string(),
            });
        } else if let Some((marker, rest)) = special_prefix(line.text) {
            if logical.is_empty() {
                return Err(err(line.number, ParseErrorKind::SpecialBeforeSense));
            }
            logical.push(Logical {
                line: line.number,
                kind: LogicalKind::Special(marker),
                body: rest.to_string(),
            });
        } else if let Some(last) = logical.last_mut() {
            last.body.push(' ');
            last.body.push_str(line.text);
        } else {
            return Err(err(line.number, ParseErrorKind::MissingSenseNumber));
        }
    }
    if logical.is_empty() {
        return Err(err(head.number, ParseErrorKind::NoSenses));
    }

    let mut senses: Vec<Sense> = Vec::new();
    for item in logical {
        match item.kind {
            LogicalKind::Sense(ordinal) => {
                let expected = senses.len() as u32 + 1;
                if ordinal != expected {
                    return Err(err(
                        item.line,
                        ParseErrorKind::NonContiguousOrdinal {
                            expected,
                            found: ordinal,
                        },
                    ));
                }
                let Some((definition, examples)) = item.body.split_once(':') else {
                    return Err(err(item.line, ParseErrorKind::DefinitionWithoutColon));
                };
                let definition = normalize(definition);
                if definition.is_empty() {
                    return Err(err(item.line, ParseErrorKind::EmptyDefinition));
                }
                let snippets = split_snippets(examples, &lemma, ordinal, item.line, warnings);
                senses.push(Sense {
                    ordinal,
                    definition,
                    snippets,
                    special_examples: Vec::new(),
                });
            }
            LogicalKind::Special(marker) => {
                let sense = senses.last_mut().expect("specials follow a sense");
                let mut tag: Option<String> = None;
                for part in item.body.split(';') {
                    let part = normalize(part);
                    if part.is_empty() || part == ELISION {
                        continue;
                    }
                    let text = match split_tag(&part) {
                        Some((t, rest)) => {
                            tag = Some(t.to_string());
                            rest.to_string()
                        }
                        None => part,
                    };
                    let Some(tag) = tag.clone() else {
                        return Err(err(item.line, ParseErrorKind::MissingCategoryTag));
                    };
                    sense.special_examples.push(SpecialExample { marker, tag, text });
                }
            }
        }
    }
    Ok(DictionaryEntry { lemma, senses })
}

/// `tag. text` where the tag is a single token without dots.
fn split_tag(item: &str) -> Option<(&str, &str)> {
    let (tag, rest) = item.split_once(". ")?;
    if tag.is_empty() || tag.chars().any(|c| c.is_whitespace() || c == '.' || c == ';') {
        return None;
    }
    let rest = rest.trim();
    (!rest.is_empty()).then_some((tag, rest))
}

fn split_snippets(
    examples: &str,
    lemma: &str,
    sense: u32,
    line: usize,
    warnings: &mut Vec<ParseError>,
) -> Vec<UsageSnippet> {
    let mut snippets = Vec::new();
    let mut group_id = 0;
    for group in examples.split(';') {
        let mut any = false;
        for raw in group.split('/') {
            let text = normalize(raw);
            if text.is_empty() || text == ELISION {
                continue;
            }
            if text.contains('*') || sense_prefix(&text).is_some() {
                warnings.push(ParseError {
                    line,
                    lemma: Some(lemma.to_string()),
                    kind: ParseErrorKind::LeakedMarker(text),
                });
                continue;
            }
            snippets.push(UsageSnippet {
                text,
                lemma: lemma.to_string(),
                sense,
                group_id,
                index: snippets.len() as u32,
            });
            any = true;
        }
        if any {
            group_id += 1;
        }
    }
    snippets
}

/// Writes entries in the canonical text layout. Entries must satisfy the
/// type invariants (no `:` in definitions, no `;` or `/` in snippets).
pub fn serialize_dictionary(entries: &[DictionaryEntry]) -> String {
    let mut out = String::new();
    for (i, entry) in entries.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&entry.lemma);
        out.push('\n');
        for sense in &entry.senses {
            out.push_str(&format!("{}. {}:", sense.ordinal, sense.definition));
            let mut prev_group = None;
            for (j, snippet) in sense.snippets.iter().enumerate() {
                let sep = match prev_group {
                    None => " ",
                    Some(g) if g == snippet.group_id => " / ",
                    Some(_) => "; ",
                };
                debug_assert!(j > 0 || sep == " ");
                out.push_str(sep);
                out.push_str(&snippet.text);
                prev_group = Some(snippet.group_id);
            }
            out.push('\n');
            let mut specials = sense.special_examples.iter().peekable();
            while let Some(first) = specials.next() {
                out.push_str(&format!("{} {}. {}", first.marker.as_str(), first.tag, first.text));
                while let Some(next) = specials.next_if(|s| s.marker == first.marker) {
                    out.push_str(&format!("; {}. {}", next.tag, next.text));
                }
                out.push('\n');
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct JsonEntry {
    lemma: String,
    senses: Vec<JsonSense>,
}

#[derive(Serialize, Deserialize)]
struct JsonSense {
    ordinal: u32,
    definition: String,
    #[serde(default)]
    snippets: Vec<JsonGroup>,
    #[serde(default)]
    special: Vec<SpecialExample>,
}

/// A `;`-group: a lone snippet or several `/`-related ones.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonGroup {
    One(String),
    Many(Vec<String>),
}

/// Parses the structured alternative: one JSON entry object per line.
pub fn parse_dictionary_jsonl(input: &str, mode: ParseMode) -> Result<ParsedDictionary, ParseError> {
    let mut out = ParsedDictionary::default();
    for (i, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut warnings = Vec::new();
        let result = serde_json::from_str::<JsonEntry>(line)
            .map_err(|e| ParseError {
                line: i + 1,
                lemma: None,
                kind: ParseErrorKind::InvalidJson(e.to_string()),
            })
            .and_then(|raw| entry_from_json(raw, i + 1, &mut warnings));
        match result {
            Ok(entry) => {
                if mode == ParseMode::Strict && !warnings.is_empty() {
                    return Err(warnings.remove(0));
                }
                out.errors.extend(warnings);
                out.entries.push(entry);
            }
            Err(e) if mode == ParseMode::Strict => return Err(e),
            Err(e) => {
                out.errors.extend(warnings);
                out.errors.push(e);
            }
        }
    }
    Ok(out)
}

fn entry_from_json(raw: JsonEntry, line: usize, warnings: &mut Vec<ParseError>) -> Result<DictionaryEntry, ParseError> {
    let lemma = normalize(&raw.lemma);
    let err = |kind| ParseError {
        line,
        lemma: Some(lemma.clone()),
        kind,
    };
    if lemma.is_empty() {
        return Err(err(ParseErrorKind::MissingLemma));
    }
    if raw.senses.is_empty() {
        return Err(err(ParseErrorKind::NoSenses));
    }
    let mut senses = Vec::with_capacity(raw.senses.len());
    for (i, s) in raw.senses.into_iter().enumerate() {
        let expected = i as u32 + 1;
        if s.ordinal != expected {
            return Err(err(ParseErrorKind::NonContiguousOrdinal {
                expected,
                found: s.ordinal,
            }));
        }
        let definition = normalize(&s.definition);
        if definition.is_empty() {
            return Err(err(ParseErrorKind::EmptyDefinition));
        }
        let mut snippets: Vec<UsageSnippet> = Vec::new();
        let mut group_id = 0;
        for group in s.snippets {
            let texts = match group {
                JsonGroup::One(t) => vec![t],
                JsonGroup::Many(ts) => ts,
            };
            let before = snippets.len();
            for t in texts {
                let text = normalize(&t);
                if text.is_empty() {
                    continue;
                }
                if text.contains('*') || sense_prefix(&text).is_some() {
                    warnings.push(err(ParseErrorKind::LeakedMarker(text)));
                    continue;
                }
                snippets.push(UsageSnippet {
                    text,
                    lemma: lemma.clone(),
                    sense: expected,
                    group_id,
                    index: snippets.len() as u32,
                });
            }
            if snippets.len() > before {
                group_id += 1;
            }
        }
        let special_examples = s
            .special
            .into_iter()
            .map(|sp| SpecialExample {
                marker: sp.marker,
                tag: normalize(&sp.tag),
                text: normalize(&sp.text),
            })
            .filter(|sp| !sp.text.is_empty())
            .collect();
        senses.push(Sense {
            ordinal: expected,
            definition,
            snippets,
            special_examples,
        });
    }
    Ok(DictionaryEntry { lemma, senses })
}

/// Writes entries in the structured JSON-lines form.
pub fn write_dictionary_jsonl(entries: &[DictionaryEntry]) -> String {
    let mut out = String::new();
    for entry in entries {
        let senses = entry
            .senses
            .iter()
            .map(|s| {
                let mut groups: Vec<Vec<String>> = Vec::new();
                let mut last = None;
                for sn in &s.snippets {
                    if last == Some(sn.group_id) {
                        groups.last_mut().expect("group exists").push(sn.text.clone());
                    } else {
                        groups.push(vec![sn.text.clone()]);
                    }
                    last = Some(sn.group_id);
                }
                JsonSense {
                    ordinal: s.ordinal,
                    definition: s.definition.clone(),
                    snippets: groups
                        .into_iter()
                        .map(|mut g| {
                            if g.len() == 1 {
                                JsonGroup::One(g.remove(0))
                            } else {
                                JsonGroup::Many(g)
                            }
                        })
                        .collect(),
                    special: s.special_examples.clone(),
                }
            })
            .collect();
        let json = JsonEntry {
            lemma: entry.lemma.clone(),
            senses,
        };
        out.push_str(&serde_json::to_string(&json).expect("entries serialize"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnippetMode {
    /// Only snippets of numbered senses.
    #[default]
    CoreOnly,
    /// Numbered-sense snippets followed by the special examples of each sense.
    CoreAndSpecial,
}

/// Flattens entries into their usage snippets, in dictionary order.
pub fn extract_snippets(entries: &[DictionaryEntry], mode: SnippetMode) -> Vec<UsageSnippet> {
    let mut out = Vec::new();
    for entry in entries {
        for sense in &entry.senses {
            out.extend(sense.snippets.iter().cloned());
            if mode == SnippetMode::CoreAndSpecial {
                let first_group = sense.snippets.last().map_or(0, |s| s.group_id + 1);
                let first_index = sense.snippets.len() as u32;
                for (k, special) in (0u32..).zip(&sense.special_examples) {
                    out.push(UsageSnippet {
                        text: special.text.clone(),
                        lemma: entry.lemma.clone(),
                        sense: sense.ordinal,
                        group_id: first_group + k,
                        index: first_index + k,
                    });
                }
            }
        }
    }
    out
}

/// Keeps entries with at least two senses.
pub fn filter_multisense(entries: &[DictionaryEntry]) -> Vec<DictionaryEntry> {
    entries.iter().filter(|e| e.senses.len() >= 2).cloned().collect()
}

pub fn restrict_to_lemmas(entries: &[DictionaryEntry], allowlist: &HashSet<String>) -> Vec<DictionaryEntry> {
    entries.iter().filter(|e| allowlist.contains(&e.lemma)).cloned().collect()
}
