//! Build word-sense datasets from dictionary entries, forge Word-in-Context
//! pair datasets and out-of-vocabulary splits from them, and use any WiC
//! scorer for sense disambiguation and new-sense induction.

pub mod dict;
pub mod text;
pub mod expansion;
pub mod retry;
pub mod forge;
pub mod jsonl;
pub mod splits;
pub mod resolver;
pub mod eval;
pub mod synth;
pub mod config;
pub mod pipeline;
