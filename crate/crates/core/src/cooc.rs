//! Per-class co-occurrence counts over aligned segment pairs.
//!
//! Every source token `u` and target token `v` of the same class in one
//! segment pair contribute one co-occurrence, so a segment holding `a` tokens
//! of `u` and `b` tokens of `v` adds `a * b` to `n(u,v)`. `n(u)` is the sum of
//! `n(u,v)` over `v`, not the corpus frequency of `u`.

use std::collections::HashMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitext::{Bitext, LinkClass, PerClass, SegmentPair, Side};
use crate::error::{Error, Result};

/// `(source type id, target type id)`.
pub type PairKey = (u32, u32);

/// Which source/target class combinations may co-occur.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassPolicy {
    /// Only same-class pairs are counted.
    #[default]
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoocConfig {
    pub policy: ClassPolicy,
    /// Segment pairs with more tokens than this on either side are skipped.
    pub max_segment_len: usize,
}

impl Default for CoocConfig {
    fn default() -> Self {
        CoocConfig {
            policy: ClassPolicy::Strict,
            max_segment_len: 100,
        }
    }
}

pub fn within_cap(segment: &SegmentPair, max_segment_len: usize) -> bool {
    segment.source.len() <= max_segment_len && segment.target.len() <= max_segment_len
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClassCooc {
    pairs: HashMap<PairKey, u64>,
    source_marginals: HashMap<u32, u64>,
    target_marginals: HashMap<u32, u64>,
    total: u64,
}

impl ClassCooc {
    pub fn n(&self, u: u32, v: u32) -> u64 {
        self.pairs.get(&(u, v)).copied().unwrap_or(0)
    }

    pub fn n_source(&self, u: u32) -> u64 {
        self.source_marginals.get(&u).copied().unwrap_or(0)
    }

    pub fn n_target(&self, v: u32) -> u64 {
        self.target_marginals.get(&v).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Unordered iteration over `((u, v), n)`.
    pub fn pairs(&self) -> impl Iterator<Item = (PairKey, u64)> + '_ {
        self.pairs.iter().map(|(&k, &n)| (k, n))
    }

    pub fn sorted_pairs(&self) -> Vec<(PairKey, u64)> {
        let mut v: Vec<_> = self.pairs().collect();
        v.sort_unstable_by_key(|&(k, _)| k);
        v
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn source_marginals(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.source_marginals.iter().map(|(&k, &n)| (k, n))
    }

    pub fn target_marginals(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.target_marginals.iter().map(|(&k, &n)| (k, n))
    }

    fn merge(mut self, other: ClassCooc) -> ClassCooc {
        for (k, n) in other.pairs {
            *self.pairs.entry(k).or_default() += n;
        }
        for (k, n) in other.source_marginals {
            *self.source_marginals.entry(k).or_default() += n;
        }
        for (k, n) in other.target_marginals {
            *self.target_marginals.entry(k).or_default() += n;
        }
        self.total += other.total;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoocTable {
    classes: PerClass<ClassCooc>,
    config: CoocConfig,
    skipped: Vec<usize>,
}

impl CoocTable {
    pub fn class(&self, class: LinkClass) -> &ClassCooc {
        &self.classes[class]
    }

    /// Total co-occurrences over all classes.
    pub fn grand_total(&self) -> u64 {
        self.classes.iter().map(|(_, c)| c.total).sum()
    }

    pub fn config(&self) -> &CoocConfig {
        &self.config
    }

    /// Line numbers of segment pairs skipped by the length cap.
    pub fn skipped(&self) -> &[usize] {
        &self.skipped
    }

    /// Debug dump: `class<TAB>u<TAB>v<TAB>n`, sorted by class then ids.
    pub fn write_tsv<W: Write>(&self, bitext: &Bitext, mut out: W) -> io::Result<()> {
        let (sv, tv) = (bitext.vocab(Side::Source), bitext.vocab(Side::Target));
        for (class, table) in self.classes.iter() {
            for ((u, v), n) in table.sorted_pairs() {
                writeln!(out, "{class}\t{}\t{}\t{n}", sv.surface(u), tv.surface(v))?;
            }
        }
        Ok(())
    }
}

fn count_segments(bitext: &Bitext, segments: &[SegmentPair], cap: usize) -> PerClass<ClassCooc> {
    let (sv, tv) = (bitext.vocab(Side::Source), bitext.vocab(Side::Target));
    let mut acc = PerClass::<ClassCooc>::default();
    for seg in segments.iter().filter(|s| within_cap(s, cap)) {
        let mut target_by_class = PerClass::<u64>::default();
        for &v in &seg.target {
            target_by_class[tv.class(v)] += 1;
        }
        let mut source_by_class = PerClass::<u64>::default();
        for &u in &seg.source {
            source_by_class[sv.class(u)] += 1;
        }
        for &u in &seg.source {
            let class = sv.class(u);
            let table = &mut acc[class];
            for &v in &seg.target {
                if tv.class(v) == class {
                    *table.pairs.entry((u, v)).or_default() += 1;
                }
            }
            *table.source_marginals.entry(u).or_default() += target_by_class[class];
            table.total += target_by_class[class];
        }
        for &v in &seg.target {
            let class = tv.class(v);
            *acc[class].target_marginals.entry(v).or_default() += source_by_class[class];
        }
    }
    acc
}

const CHUNK: usize = 512;

pub fn build_cooc(bitext: &Bitext, config: &CoocConfig) -> Result<CoocTable> {
    if bitext.is_empty() {
        return Err(Error::EmptyBitext);
    }
    let cap = config.max_segment_len;
    let skipped: Vec<usize> = bitext
        .segments()
        .iter()
        .filter(|s| !within_cap(s, cap))
        .map(|s| s.index)
        .collect();
    if !skipped.is_empty() {
        log::warn!("skipped {} segment pair(s) longer than {cap} tokens", skipped.len());
    }
    let classes = bitext
        .segments()
        .par_chunks(CHUNK)
        .map(|chunk| count_segments(bitext, chunk, cap))
        .reduce(PerClass::default, |a, b| {
            let [a0, a1] = a.0;
            let [b0, b1] = b.0;
            PerClass([a0.merge(b0), a1.merge(b1)])
        });
    Ok(CoocTable {
        classes,
        config: *config,
        skipped,
    })
}
