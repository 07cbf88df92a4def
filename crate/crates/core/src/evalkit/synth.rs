//! Synthetic bitexts with a known one-to-one lexicon.
//!
//! Entry `r` pairs source word `s{r}` with target word `t{r}`. Source words
//! are drawn Zipf-distributed by rank, each is translated, the target side is
//! shuffled, and each target token is replaced by a different random target
//! word with probability `noise`. The most frequent `function_fraction` of
//! entries form the function-word class. Collocation heads are always
//! followed by their partner entry, which manufactures indirect associations.

use std::collections::HashSet;
use std::io::{self, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::bitext::{Bitext, FunctionWords, LinkClass};
use crate::cooc::CoocTable;
use crate::error::{Error, Result};
use crate::induction::Model;
use crate::lexicon::{export_lexicon_ln, Lexicon};
use crate::linking::LinkStats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationSpec {
    /// Lexicon entries (vocabulary size per side).
    pub entries: usize,
    pub segments: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub zipf_exponent: f64,
    /// Per-token probability of replacing a target word.
    pub noise: f64,
    pub function_fraction: f64,
    /// Number of collocation heads; head `r` is always followed by `r + 1`.
    pub collocations: usize,
}

impl Default for GenerationSpec {
    fn default() -> Self {
        GenerationSpec {
            entries: 500,
            segments: 5000,
            min_len: 5,
            max_len: 15,
            zipf_exponent: 1.0,
            noise: 0.0,
            function_fraction: 0.1,
            collocations: 0,
        }
    }
}

impl GenerationSpec {
    fn function_entries(&self) -> usize {
        (self.entries as f64 * self.function_fraction).round() as usize
    }

    /// Ranks of collocation heads: every third content entry from the first
    /// content rank.
    pub fn collocation_heads(&self) -> Vec<usize> {
        let first = self.function_entries();
        (0..self.collocations).map(|i| first + 3 * i).collect()
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if self.entries < 10 {
            return bad("entries must be at least 10");
        }
        if self.segments == 0 {
            return bad("segments must be at least 1");
        }
        if !(0.0..1.0).contains(&self.noise) {
            return bad("noise must lie in [0, 1)");
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return bad("need 1 <= min_len <= max_len");
        }
        if !(0.0..1.0).contains(&self.function_fraction) {
            return bad("function_fraction must lie in [0, 1)");
        }
        if self.zipf_exponent.is_nan() || self.zipf_exponent < 0.0 {
            return bad("zipf_exponent must be non-negative");
        }
        if self.collocations > 0 {
            let last = self.collocation_heads().last().copied().unwrap_or(0) + 1;
            if last >= self.entries {
                return bad("too many collocations for the content vocabulary");
            }
        }
        Ok(())
    }
}

pub fn source_word(rank: usize) -> String {
    format!("s{rank}")
}

pub fn target_word(rank: usize) -> String {
    format!("t{rank}")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruePair {
    pub u: String,
    pub v: String,
    pub class: LinkClass,
    /// Segments in which `u` and `v` co-occur.
    pub cooccurring_segments: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec: GenerationSpec,
    pub seed: u64,
    pub pairs: Vec<TruePair>,
    pub source_function_words: Vec<String>,
    pub target_function_words: Vec<String>,
    /// Target tokens replaced by noise.
    pub replaced_tokens: u64,
    pub target_tokens: u64,
}

impl GroundTruth {
    pub fn function_words(&self) -> FunctionWords {
        FunctionWords::new(&self.source_function_words, &self.target_function_words, true)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        super::write_json(self, path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        super::read_json(path)
    }
}

pub struct Synthetic {
    pub bitext: Bitext,
    pub truth: GroundTruth,
    pub source_lines: Vec<String>,
    pub target_lines: Vec<String>,
}

impl Synthetic {
    pub fn write_text(&self, source: &Path, target: &Path) -> Result<()> {
        let write = |path: &Path, lines: &[String]| -> Result<()> {
            let mut out = io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
            for l in lines {
                writeln!(out, "{l}").map_err(|e| Error::io(path, e))?;
            }
            out.flush().map_err(|e| Error::io(path, e))
        };
        write(source, &self.source_lines)?;
        write(target, &self.target_lines)
    }
}

pub fn generate_synthetic_bitext(spec: &GenerationSpec, seed: u64) -> Result<Synthetic> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zipf = Zipf::new(spec.entries as f64, spec.zipf_exponent).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let draw = |rng: &mut ChaCha8Rng| zipf.sample(rng) as usize - 1;
    let heads: HashSet<usize> = spec.collocation_heads().into_iter().collect();

    let mut source_lines = Vec::with_capacity(spec.segments);
    let mut target_lines = Vec::with_capacity(spec.segments);
    let mut cooccurring = vec![0u64; spec.entries];
    let (mut replaced, mut target_tokens) = (0u64, 0u64);
    let mut tokens = Vec::new();
    for _ in 0..spec.segments {
        let len = rng.random_range(spec.min_len..=spec.max_len);
        tokens.clear();
        while tokens.len() < len {
            let r = draw(&mut rng);
            tokens.push(r);
            if heads.contains(&r) {
                tokens.push(r + 1);
            }
        }
        let mut target = tokens.clone();
        target.shuffle(&mut rng);
        for t in target.iter_mut() {
            if rng.random_bool(spec.noise) {
                let mut other = draw(&mut rng);
                while other == *t {
                    other = draw(&mut rng);
                }
                *t = other;
                replaced += 1;
            }
        }
        target_tokens += target.len() as u64;
        let in_target: HashSet<usize> = target.iter().copied().collect();
        let in_source: HashSet<usize> = tokens.iter().copied().collect();
        for r in in_source.intersection(&in_target) {
            cooccurring[*r] += 1;
        }
        source_lines.push(tokens.iter().map(|&r| source_word(r)).collect::<Vec<_>>().join(" "));
        target_lines.push(target.iter().map(|&r| target_word(r)).collect::<Vec<_>>().join(" "));
    }

    let function_entries = spec.function_entries();
    let truth = GroundTruth {
        spec: spec.clone(),
        seed,
        pairs: (0..spec.entries)
            .map(|r| TruePair {
                u: source_word(r),
                v: target_word(r),
                class: if r < function_entries {
                    LinkClass::Function
                } else {
                    LinkClass::Content
                },
                cooccurring_segments: cooccurring[r],
            })
            .collect(),
        source_function_words: (0..function_entries).map(source_word).collect(),
        target_function_words: (0..function_entries).map(target_word).collect(),
        replaced_tokens: replaced,
        target_tokens,
    };
    let bitext = Bitext::from_lines(
        source_lines
            .iter()
            .map(String::as_str)
            .zip(target_lines.iter().map(String::as_str)),
        &Default::default(),
        &truth.function_words(),
    );
    Ok(Synthetic {
        bitext,
        truth,
        source_lines,
        target_lines,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthScore {
    /// `|entries ∩ truth| / |entries|`; 1.0 for an empty lexicon.
    pub precision: f64,
    /// `|entries ∩ truth| / |co-occurring truth pairs|`.
    pub recall: f64,
    /// The lexicon was empty, so precision makes no claim.
    pub empty: bool,
    pub true_positives: usize,
    pub entries: usize,
    pub reachable: usize,
}

pub fn score_against_truth(lexicon: &Lexicon, truth: &GroundTruth) -> TruthScore {
    let reachable: HashSet<(&str, &str)> = truth
        .pairs
        .iter()
        .filter(|p| p.cooccurring_segments > 0)
        .map(|p| (p.u.as_str(), p.v.as_str()))
        .collect();
    let all: HashSet<(&str, &str)> = truth.pairs.iter().map(|p| (p.u.as_str(), p.v.as_str())).collect();
    let hits = lexicon
        .entries
        .iter()
        .filter(|e| all.contains(&(e.u.as_str(), e.v.as_str())))
        .count();
    let empty = lexicon.entries.is_empty();
    TruthScore {
        precision: if empty { 1.0 } else { hits as f64 / lexicon.len() as f64 },
        recall: if reachable.is_empty() {
            0.0
        } else {
            hits as f64 / reachable.len() as f64
        },
        empty,
        true_positives: hits,
        entries: lexicon.len(),
        reachable: reachable.len(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// `ln L` threshold.
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

/// `points` geometrically spaced `ln L` thresholds from the induction cutoff
/// to the highest finite entry score, so low-scoring entries get as much
/// resolution as the few very frequent ones. A cutoff of at most 1 falls
/// back to even spacing.
pub fn threshold_grid(model: &Model, points: usize) -> Vec<f64> {
    let lo = model.config.cutoff.ln();
    let hi = model
        .entries
        .iter()
        .map(|e| e.log_l)
        .filter(|s| s.is_finite())
        .fold(lo, f64::max);
    let steps = points.max(2) - 1;
    if lo <= 0.0 {
        return (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect();
    }
    let ratio = hi / lo;
    (0..=steps).map(|i| lo * ratio.powf(i as f64 / steps as f64)).collect()
}

/// Precision and recall against the truth at each `ln L` threshold.
pub fn precision_recall_curve(model: &Model, truth: &GroundTruth, thresholds: &[f64]) -> Vec<CurvePoint> {
    thresholds
        .iter()
        .map(|&threshold| {
            let score = score_against_truth(&export_lexicon_ln(model, threshold), truth);
            CurvePoint {
                threshold,
                recall: score.recall,
                precision: score.precision,
            }
        })
        .collect()
}

/// `threshold,recall,precision` with a header line; thresholds are `ln L`.
pub fn write_curve_csv<W: Write>(points: &[CurvePoint], mut out: W) -> io::Result<()> {
    writeln!(out, "threshold,recall,precision")?;
    for p in points {
        writeln!(out, "{},{},{}", p.threshold, p.recall, p.precision)?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bimodality {
    /// Pair types with `n >= min_n`.
    pub considered: usize,
    /// Of those, pairs with `k/n` inside the band.
    pub in_band: usize,
    pub fraction: f64,
}

/// How many pair types with `n(u,v) >= min_n` have a link ratio `k/n` in
/// `[lo, hi]`.
pub fn bimodality(cooc: &CoocTable, links: &LinkStats, min_n: u64, lo: f64, hi: f64) -> Bimodality {
    let (mut considered, mut in_band) = (0, 0);
    for class in LinkClass::ALL {
        for ((u, v), n) in cooc.class(class).pairs() {
            if n < min_n {
                continue;
            }
            considered += 1;
            let ratio = links.k(class, u, v) as f64 / n as f64;
            if (lo..=hi).contains(&ratio) {
                in_band += 1;
            }
        }
    }
    Bimodality {
        considered,
        in_band,
        fraction: if considered == 0 {
            0.0
        } else {
            in_band as f64 / considered as f64
        },
    }
}
