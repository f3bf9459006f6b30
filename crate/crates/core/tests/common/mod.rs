//! Shared generators, reference implementations and a tiny HTTP server.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wic_forge::dict::{DictionaryEntry, Sense, SpecialExample, SpecialMarker, UsageSnippet};
use wic_forge::expansion::{BackendError, CompletionRequest, LlmBackend};
use wic_forge::forge::{ExampleSource, Provenance, SenseExample, WicPair};
use wic_forge::splits::{SplitManifest, SplitType};
use wic_forge::text::derive_seed;

pub const SLOVAR: &str = include_str!("../../fixtures/slovar.txt");

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic")
}

// ---------------------------------------------------------------- dictionary

const LETTERS: &str = "abcčdefghijklmnoprsštuvzž";

fn word() -> impl Strategy<Value = String> {
    proptest::collection::vec(proptest::sample::select(LETTERS.chars().collect::<Vec<_>>()), 1..8)
        .prop_map(|c| c.into_iter().collect())
}

fn phrase(max_words: usize) -> impl Strategy<Value = String> {
    (proptest::collection::vec(word(), 1..=max_words), any::<bool>()).prop_map(|(w, comma)| {
        let mut s = w.join(" ");
        if comma && w.len() > 1 {
            let first = w[0].len();
            s.insert(first, ',');
        }
        s
    })
}

fn special() -> impl Strategy<Value = SpecialExample> {
    (any::<bool>(), word(), phrase(5)).prop_map(|(double, tag, text)| SpecialExample {
        marker: if double { SpecialMarker::Double } else { SpecialMarker::Single },
        tag,
        text,
    })
}

fn sense_body() -> impl Strategy<Value = (String, Vec<Vec<String>>, Vec<SpecialExample>)> {
    (
        phrase(6),
        proptest::collection::vec(proptest::collection::vec(phrase(5), 1..4), 0..5),
        proptest::collection::vec(special(), 0..4),
    )
}

/// Entries satisfying the text-format invariants.
pub fn entry_strategy() -> impl Strategy<Value = DictionaryEntry> {
    let lemma = proptest::collection::vec(word(), 1..=2).prop_map(|w| w.join(" "));
    (lemma, proptest::collection::vec(sense_body(), 1..5)).prop_map(|(lemma, bodies)| {
        let senses = bodies
            .into_iter()
            .enumerate()
            .map(|(i, (definition, groups, special_examples))| {
                let ordinal = i as u32 + 1;
                let mut snippets = Vec::new();
                for (g, group) in groups.into_iter().enumerate() {
                    for text in group {
                        snippets.push(UsageSnippet {
                            text,
                            lemma: lemma.clone(),
                            sense: ordinal,
                            group_id: g as u32,
                            index: snippets.len() as u32,
                        });
                    }
                }
                Sense {
                    ordinal,
                    definition,
                    snippets,
                    special_examples,
                }
            })
            .collect();
        DictionaryEntry { lemma, senses }
    })
}

/// `n` entries drawn deterministically from [`entry_strategy`].
pub fn sample_entries(n: usize) -> Vec<DictionaryEntry> {
    let mut runner = TestRunner::deterministic();
    let strategy = entry_strategy();
    (0..n)
        .map(|_| strategy.new_tree(&mut runner).expect("strategy samples").current())
        .collect()
}

// ---------------------------------------------------------------- lemma matching reference

fn words_of(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

/// Reference stem-prefix presence check with minimum stem length 4.
pub fn reference_stem_present(sentence: &str, lemma: &str) -> bool {
    let lemma_words = words_of(lemma);
    let tokens = words_of(sentence);
    let stem = |w: &str| -> String {
        let n = w.chars().count();
        let k = n.min(4.max((n * 7).div_ceil(10)));
        w.chars().take(k).collect()
    };
    let stems: Vec<String> = lemma_words.iter().map(|w| stem(w)).collect();
    if stems.is_empty() || tokens.len() < stems.len() {
        return false;
    }
    tokens
        .windows(stems.len())
        .any(|win| win.iter().zip(&stems).all(|(t, s)| t.starts_with(s.as_str())))
}

/// Reference dedup key: trim, collapse whitespace, lowercase.
pub fn reference_dedup_key(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

// ---------------------------------------------------------------- mock LLM

/// LLM stand-in answering the default expansion prompt. About
/// `missing_rate` of its answers omit the lemma and `duplicate_rate` repeat
/// an earlier answer for the same prompt with different case and spacing.
pub struct PlantedBackend {
    seed: u64,
    missing_rate: f64,
    duplicate_rate: f64,
    history: Mutex<HashMap<String, Vec<String>>>,
    pub planted_missing: AtomicUsize,
    pub planted_duplicates: AtomicUsize,
}

impl PlantedBackend {
    pub fn new(seed: u64, missing_rate: f64, duplicate_rate: f64) -> Self {
        Self {
            seed,
            missing_rate,
            duplicate_rate,
            history: Mutex::new(HashMap::new()),
            planted_missing: AtomicUsize::new(0),
            planted_duplicates: AtomicUsize::new(0),
        }
    }
}

impl LlmBackend for PlantedBackend {
    fn complete(&self, req: &CompletionRequest<'_>) -> Result<String, BackendError> {
        let snippet = req
            .prompt
            .strip_prefix("Razširi ")
            .and_then(|p| p.strip_suffix(" v polno poved"))
            .expect("default prompt");
        let lemma = snippet.split(' ').next().unwrap();
        let mut history = self.history.lock().unwrap();
        let earlier = history.entry(req.prompt.to_string()).or_default();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &format!("{}\u{1f}{}", req.prompt, earlier.len())));
        let roll: f64 = rng.random();
        let opener = SENTENCE_WORDS.choose(&mut rng).unwrap();
        let filler = SENTENCE_WORDS.choose(&mut rng).unwrap();
        let text = if roll < self.missing_rate {
            self.planted_missing.fetch_add(1, Ordering::Relaxed);
            format!("{opener} je {filler} tam.")
        } else if roll < self.missing_rate + self.duplicate_rate && !earlier.is_empty() {
            self.planted_duplicates.fetch_add(1, Ordering::Relaxed);
            let e = earlier.choose(&mut rng).unwrap();
            if rng.random_bool(0.5) {
                e.to_uppercase()
            } else {
                format!("  {}  ", e.replace(' ', "   "))
            }
        } else {
            let mut form: String = lemma.to_string();
            match rng.random_range(0..4) {
                0 => form.push('a'),
                1 => form.push_str("om"),
                2 => {
                    form.pop();
                    form.push('i');
                }
                _ => {}
            }
            let rest = &snippet[lemma.len()..];
            format!("{opener} {form}{rest} {filler} {}.", rng.random_range(0..1000))
        };
        earlier.push(text.clone());
        Ok(text)
    }
}

/// Dictionary of `n_lemmas` two-sense entries with `snippets` snippets per
/// sense, each starting with its lemma.
pub fn planted_dictionary(seed: u64, n_lemmas: usize, snippets: usize) -> Vec<DictionaryEntry> {
    let mut rng = rng(seed);
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    while entries.len() < n_lemmas {
        let len = rng.random_range(3..=8);
        let lemma: String = (0..len).map(|_| *LETTERS.chars().collect::<Vec<_>>().choose(&mut rng).unwrap()).collect();
        if !seen.insert(lemma.clone()) {
            continue;
        }
        let senses = (1..=2u32)
            .map(|ordinal| Sense {
                ordinal,
                definition: format!("pomen {ordinal}"),
                snippets: (0..snippets)
                    .map(|i| UsageSnippet {
                        text: format!("{lemma} {} {i}", SENTENCE_WORDS[(i + ordinal as usize) % SENTENCE_WORDS.len()]),
                        lemma: lemma.clone(),
                        sense: ordinal,
                        group_id: i as u32,
                        index: i as u32,
                    })
                    .collect(),
                special_examples: Vec::new(),
            })
            .collect();
        entries.push(DictionaryEntry { lemma, senses });
    }
    entries
}

// ---------------------------------------------------------------- corpora

const SENTENCE_WORDS: &[&str] = &["danes", "včeraj", "hiša", "voda", "luč", "reka", "gora", "pot", "okno", "vrt"];

fn pseudo_lemma(rng: &mut ChaCha8Rng, i: usize) -> String {
    let syl = ["ka", "lo", "mi", "ne", "pu", "ri", "so", "te", "vi", "za"];
    let mut s = String::new();
    for _ in 0..3 {
        s.push_str(syl.choose(rng).unwrap());
    }
    format!("{s}{}", ["", "k", "n", "r"][i % 4])
}

/// A random sense-labeled corpus, possibly with several inventories,
/// repeated sentences and lemmas that cannot be forged.
pub fn random_examples(rng: &mut ChaCha8Rng) -> Vec<SenseExample> {
    let inventories = ["sskj", "elexis"];
    let n_lemmas = rng.random_range(1..=6);
    let mut out = Vec::new();
    for l in 0..n_lemmas {
        let lemma = format!("{}{l}", pseudo_lemma(rng, l));
        let inv = inventories[rng.random_range(0..inventories.len())];
        let n_senses = rng.random_range(1..=4);
        for s in 0..n_senses {
            let n = rng.random_range(0..=12);
            for j in 0..n {
                let filler = SENTENCE_WORDS.choose(rng).unwrap();
                // occasionally reuse a sentence verbatim
                let sentence = if rng.random_bool(0.1) {
                    format!("{lemma} {filler}")
                } else {
                    format!("{lemma} {filler} {j} {s}")
                };
                out.push(SenseExample {
                    id: format!("{inv}:{lemma}:{s}:{j}"),
                    lemma: lemma.clone(),
                    end: lemma.chars().count(),
                    start: 0,
                    sentence,
                    sense_id: format!("{lemma}#{s}"),
                    inventory_id: inv.to_string(),
                    source: ExampleSource::Corpus,
                });
            }
        }
    }
    out
}

pub fn pair(id: &str, lemma: &str, label: u8, inventory: &str) -> WicPair {
    WicPair {
        id: id.to_string(),
        lemma: lemma.to_string(),
        s1: format!("{lemma} a"),
        s1_start: 0,
        s1_end: lemma.chars().count(),
        s2: format!("{lemma} b"),
        s2_start: 0,
        s2_end: lemma.chars().count(),
        label,
        provenance: Provenance {
            src: vec![inventory.to_string()],
            ex: [format!("{id}/l"), format!("{id}/r")],
        },
    }
}

/// Random dictionary-side and corpus-side pair sets. Corpus lemmas come
/// from a random prefix of the dictionary lemma pool.
pub fn random_split_inputs(rng: &mut ChaCha8Rng) -> (Vec<WicPair>, Vec<WicPair>) {
    let pool: Vec<String> = (0..rng.random_range(2..=12)).map(|i| format!("l{i}")).collect();
    let corpus_pool = &pool[..rng.random_range(1..=pool.len())];
    let make = |prefix: &str, lemmas: &[String], n: usize, rng: &mut ChaCha8Rng| -> Vec<WicPair> {
        (0..n)
            .map(|i| {
                let lemma = lemmas.choose(rng).unwrap();
                pair(&format!("{prefix}{i}"), lemma, rng.random_range(0..=1), prefix)
            })
            .collect()
    };
    let n_sskj = rng.random_range(1..=60);
    let n_elexis = rng.random_range(1..=60);
    let sskj = make("s", &pool, n_sskj, rng);
    let elexis = make("e", corpus_pool, n_elexis, rng);
    (sskj, elexis)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n_lemmas` lemmas with 2..=4 senses and 2..=4 examples per sense.
pub fn wsd_fixture(seed: u64, n_lemmas: usize) -> Vec<SenseExample> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for l in 0..n_lemmas {
        let lemma = format!("lema{l}");
        for s in 1..=rng.random_range(2..=4) {
            for j in 0..rng.random_range(2..=4) {
                let filler = SENTENCE_WORDS.choose(&mut rng).unwrap();
                out.push(SenseExample {
                    id: format!("{lemma}:{s}:{j}"),
                    lemma: lemma.clone(),
                    sentence: format!("{lemma} {filler} {s} {j}"),
                    start: 0,
                    end: lemma.chars().count(),
                    sense_id: format!("{lemma}#{s}"),
                    inventory_id: "fixture".into(),
                    source: ExampleSource::Corpus,
                });
            }
        }
    }
    out
}

/// Groups examples by lemma, keeping order.
pub fn by_lemma(examples: &[SenseExample]) -> BTreeMap<String, Vec<SenseExample>> {
    let mut m: BTreeMap<String, Vec<SenseExample>> = BTreeMap::new();
    for e in examples {
        m.entry(e.lemma.clone()).or_default().push(e.clone());
    }
    m
}

// ---------------------------------------------------------------- HTTP mock

#[derive(Debug, Clone)]
pub struct Request {
    pub method: String,
    pub path: String,
    pub body: String,
}

type Handler = dyn Fn(&Request, usize) -> (u16, String) + Send + Sync;

/// Single-threaded HTTP/1.1 server answering from a handler. The handler
/// gets the request and its zero-based sequence number.
pub struct MockServer {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Request>>>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(handler: impl Fn(&Request, usize) -> (u16, String) + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let requests = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let handler: Arc<Handler> = Arc::new(handler);
        let (log, flag) = (requests.clone(), stop.clone());
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let _ = serve(stream, &handler, &log);
            }
        });
        Self {
            url: format!("http://{addr}"),
            requests,
            stop,
            handle: Some(handle),
        }
    }

    pub fn bodies(&self, path: &str) -> Vec<serde_json::Value> {
        self.requests
            .lock()
            .unwrap()
            .iter()
            .filter(|r| r.path == path)
            .map(|r| serde_json::from_str(&r.body).unwrap())
            .collect()
    }

    pub fn count(&self, path: &str) -> usize {
        self.requests.lock().unwrap().iter().filter(|r| r.path == path).count()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.url.trim_start_matches("http://"));
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn serve(stream: TcpStream, handler: &Arc<Handler>, log: &Arc<Mutex<Vec<Request>>>) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or_default().to_string();
    let path = parts.next().unwrap_or_default().to_string();
    let mut length = 0;
    loop {
        let mut h = String::new();
        reader.read_line(&mut h)?;
        let h = h.trim_end();
        if h.is_empty() {
            break;
        }
        if let Some((k, v)) = h.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                length = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body)?;
    let req = Request {
        method,
        path,
        body: String::from_utf8_lossy(&body).into_owned(),
    };
    let seq = {
        let mut log = log.lock().unwrap();
        log.push(req.clone());
        log.len() - 1
    };
    let (status, body) = handler(&req, seq);
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    stream.flush()
}

/// Parses a score request and answers `score_of(pair)` for every pair.
pub fn score_response(body: &str, score_of: impl Fn(&serde_json::Value) -> f64) -> String {
    let v: serde_json::Value = serde_json::from_str(body).unwrap();
    let scores: Vec<f64> = v["pairs"].as_array().unwrap().iter().map(score_of).collect();
    serde_json::json!({ "scores": scores }).to_string()
}

// ---------------------------------------------------------------- CLI

pub fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wic-forge"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

pub fn cli_ok(dir: &Path, args: &[&str]) -> Output {
    let out = cli(dir, args);
    assert!(
        out.status.success(),
        "wic-forge {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Runs the whole pipeline on the bundled synthetic corpus inside `dir`
/// with the oracle scorer and returns the rendered report CSV.
pub fn run_pipeline(dir: &Path, seed: u64) -> String {
    let fx = fixture_dir();
    std::fs::copy(fx.join("cache.jsonl"), dir.join("cache.jsonl")).unwrap();
    let dict = fx.join("dictionary.txt");
    let corpus = fx.join("corpus.jsonl");
    let seed = seed.to_string();
    let s = |a: &[&str]| {
        let mut v = vec!["--seed", seed.as_str()];
        v.extend_from_slice(a);
        cli_ok(dir, &v);
    };
    s(&["parse", "--in", dict.to_str().unwrap(), "--out", "entries.jsonl"]);
    s(&["expand", "--in", "entries.jsonl", "--out", "generations.jsonl", "--cache", "cache.jsonl", "--offline"]);
    s(&["forge-wsd", "--in", "generations.jsonl", "--out", "sskj_wsd.jsonl"]);
    s(&["forge-wsd", "--source", "corpus", "--in", corpus.to_str().unwrap(), "--out", "elexis_wsd.jsonl"]);
    s(&["forge-wic", "--in", "sskj_wsd.jsonl", "--out", "sskj_wic.jsonl"]);
    s(&["forge-wic", "--in", "elexis_wsd.jsonl", "--out", "elexis_wic.jsonl"]);
    for t in ["pure-oov", "partial-oov", "non-oov"] {
        s(&["split", "--sskj", "sskj_wic.jsonl", "--elexis", "elexis_wic.jsonl", "--type", t, "--out", &format!("{t}.json")]);
        s(&[
            "eval", "--task", "wic", "--gold", "elexis_wic.jsonl", "--manifest", &format!("{t}.json"), "--scorer", "random",
            "--split-type", t, "--desc", "ElexisWiC", "--out", &format!("wic_{t}.json"),
        ]);
    }
    s(&["resolve-wsd", "--scorer", "oracle", "--targets", "elexis_wsd.jsonl", "--support", "sskj_wsd.jsonl", "--out", "wsd.jsonl"]);
    s(&[
        "eval", "--task", "wsd", "--gold", "elexis_wsd.jsonl", "--predictions", "wsd.jsonl", "--train", "sskj_wsd.jsonl",
        "--split-type", "non-oov", "--desc", "ElexisWSD", "--out", "wsd_report.json",
    ]);
    s(&[
        "resolve-wsi", "--scorer", "oracle", "--targets", "elexis_wsd.jsonl", "--support", "sskj_wsd.jsonl", "--manifest",
        "non-oov.json", "--pairs", "sskj_wic.jsonl", "--pairs", "elexis_wic.jsonl", "--out", "wsi.jsonl",
    ]);
    s(&[
        "eval", "--task", "wsi", "--gold", "elexis_wsd.jsonl", "--predictions", "wsi.jsonl",
        "--split-type", "non-oov", "--desc", "ElexisWSI", "--out", "wsi_report.json",
    ]);
    s(&[
        "report", "--in", "wic_pure-oov.json", "--in", "wic_partial-oov.json", "--in", "wic_non-oov.json", "--in",
        "wsd_report.json", "--in", "wsi_report.json", "--out", "report.csv", "--table", "report.txt",
    ]);
    std::fs::read_to_string(dir.join("report.csv")).unwrap()
}

// ---------------------------------------------------------------- invariant checks

/// Violations of the forging invariants: balance per (inventory, lemma)
/// and overall, same-lemma pairs, labels and text matching provenance, no
/// repeated unordered pair.
pub fn forge_violations(examples: &[SenseExample], pairs: &[WicPair]) -> Vec<String> {
    let mut v = Vec::new();
    let by_id: HashMap<&str, &SenseExample> = examples.iter().map(|e| (e.id.as_str(), e)).collect();
    let mut per_group: BTreeMap<(String, String), [usize; 2]> = BTreeMap::new();
    let mut seen = HashSet::new();
    for p in pairs {
        let (Some(a), Some(b)) = (by_id.get(p.provenance.ex[0].as_str()), by_id.get(p.provenance.ex[1].as_str())) else {
            v.push(format!("{}: unknown provenance", p.id));
            continue;
        };
        if a.lemma != b.lemma || a.lemma != p.lemma {
            v.push(format!("{}: lemmas differ", p.id));
        }
        let truth = u8::from(a.sense_id == b.sense_id && a.inventory_id == b.inventory_id);
        if p.label != truth {
            v.push(format!("{}: label {} disagrees with provenance", p.id, p.label));
        }
        if p.s1 != a.sentence || p.s2 != b.sentence || (p.s1_start, p.s1_end) != (a.start, a.end) {
            v.push(format!("{}: text does not match provenance", p.id));
        }
        let key = if a.id <= b.id { (a.id.clone(), b.id.clone()) } else { (b.id.clone(), a.id.clone()) };
        if !seen.insert(key) {
            v.push(format!("{}: duplicate unordered pair", p.id));
        }
        per_group.entry((a.inventory_id.clone(), p.lemma.clone())).or_default()[p.label as usize] += 1;
    }
    for ((inv, lemma), [neg, pos]) in per_group {
        if neg != pos {
            v.push(format!("{inv}/{lemma}: {pos} positives vs {neg} negatives"));
        }
    }
    let total_pos = pairs.iter().filter(|p| p.label == 1).count();
    if total_pos * 2 != pairs.len() {
        v.push(format!("{total_pos} positives of {}", pairs.len()));
    }
    v
}

fn lemmas_of(ids: &[String], lemma_of: &HashMap<&str, &str>) -> BTreeSet<String> {
    ids.iter().map(|id| lemma_of[id.as_str()].to_string()).collect()
}

pub fn split_violations(t: SplitType, sskj: &[WicPair], elexis: &[WicPair], m: &SplitManifest) -> Vec<String> {
    let mut v = Vec::new();
    let lemma_of: HashMap<&str, &str> = sskj.iter().chain(elexis).map(|p| (p.id.as_str(), p.lemma.as_str())).collect();
    let all: HashSet<&str> = lemma_of.keys().copied().collect();
    let mut seen = HashSet::new();
    for id in m.train.iter().chain(&m.validation).chain(&m.test) {
        if !all.contains(id.as_str()) {
            v.push(format!("unknown id {id}"));
            return v;
        }
        if !seen.insert(id.as_str()) {
            v.push(format!("id {id} in two partitions"));
        }
    }
    let train = lemmas_of(&m.train, &lemma_of);
    let test = lemmas_of(&m.test, &lemma_of);
    let elexis_ids: HashSet<&str> = elexis.iter().map(|p| p.id.as_str()).collect();
    match t {
        SplitType::PureOov => {
            if let Some(l) = train.intersection(&test).next() {
                v.push(format!("lemma {l} in train and test"));
            }
        }
        SplitType::PartialOov => {
            let elexis_train: Vec<String> = m.train.iter().filter(|id| elexis_ids.contains(id.as_str())).cloned().collect();
            let side = lemmas_of(&elexis_train, &lemma_of);
            if let Some(l) = side.intersection(&test).next() {
                v.push(format!("annotated lemma {l} on both sides"));
            }
        }
        SplitType::NonOov => {
            if let Some(l) = test.difference(&train).next() {
                v.push(format!("test lemma {l} missing from train"));
            }
        }
    }
    v
}
