//! Append-only, content-addressed store of LLM generations.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use crate::text::sha256_hex;

/// One cached generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub key: String,
    pub model: String,
    pub prompt: String,
    pub temperature: f64,
    pub index: u32,
    pub text: String,
}

impl CacheRecord {
    pub fn new(model: &str, prompt: &str, temperature: f64, index: u32, text: String) -> Self {
        Self {
            key: cache_key(model, prompt, temperature, index),
            model: model.to_string(),
            prompt: prompt.to_string(),
            temperature,
            index,
            text,
        }
    }
}

/// Hash of `(model, prompt, temperature, index)`.
pub fn cache_key(model: &str, prompt: &str, temperature: f64, index: u32) -> String {
    let material = format!("{model}\u{1f}{prompt}\u{1f}{temperature}\u{1f}{index}");
    sha256_hex(material.as_bytes())
}

/// JSONL-backed generation cache. Records are appended one line per write,
/// so a crash can at worst leave a torn final line, which is skipped on load.
#[derive(Debug, Default)]
pub struct GenerationCache {
    path: Option<PathBuf>,
    entries: RwLock<HashMap<String, String>>,
    writer: Mutex<Option<File>>,
}

impl GenerationCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheRecord>(&line) {
                    Ok(rec) => {
                        entries.entry(rec.key).or_insert(rec.text);
                    }
                    Err(e) => log::warn!("{}:{}: skipping unreadable cache record: {e}", path.display(), i + 1),
                }
            }
        } else if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
        if ends_without_newline(&path)? {
            // terminate a torn record so the next append starts on a fresh line
            file.write_all(b"\n")?;
        }
        Ok(Self {
            path: Some(path),
            entries: RwLock::new(entries),
            writer: Mutex::new(Some(file)),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.entries.read().expect("cache lock").get(key).cloned()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stores a record unless its key is already present.
    pub fn insert(&self, record: CacheRecord) -> io::Result<()> {
        let mut entries = self.entries.write().expect("cache lock");
        if entries.contains_key(&record.key) {
            return Ok(());
        }
        if let Some(file) = self.writer.lock().expect("writer lock").as_mut() {
            let mut line = serde_json::to_string(&record).map_err(io::Error::other)?;
            line.push('\n');
            file.write_all(line.as_bytes())?;
            file.flush()?;
        }
        entries.insert(record.key, record.text);
        Ok(())
    }
}

fn ends_without_newline(path: &Path) -> io::Result<bool> {
    let mut f = File::open(path)?;
    if f.metadata()?.len() == 0 {
        return Ok(false);
    }
    f.seek(SeekFrom::End(-1))?;
    let mut last = [0u8; 1];
    f.read_exact(&mut last)?;
    Ok(last[0] != b'\n')
}
