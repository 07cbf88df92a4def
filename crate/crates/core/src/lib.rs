//! Translation-lexicon induction from sentence-aligned bitexts.
//!
//! Token pairs are linked one-to-one within each segment by competitive
//! linking, and the link counts are explained by a two-parameter binomial
//! mixture per word class. Alternating the two steps re-scores every pair
//! type by a likelihood ratio until the mixture likelihood stops improving.

pub mod bitext;
pub mod cooc;
pub mod error;
pub mod estimation;
pub mod evalkit;
pub mod induction;
pub mod lexicon;
pub mod linking;
pub mod scoring;

pub use bitext::{Bitext, FunctionWords, LinkClass, PerClass, Side, TokenizerOptions};
pub use error::{Error, Result};
pub use estimation::{ClassParams, SearchConfig};
pub use induction::{induce, load_model, save_model, InduceConfig, Model, ModelEntry};
pub use lexicon::{export_lexicon, export_lexicon_ln, Lexicon};
