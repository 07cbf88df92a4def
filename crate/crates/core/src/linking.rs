//! Competitive linking.
//!
//! Within each aligned segment pair, candidate token pairs whose type pair has
//! a score are ranked, and the best remaining candidate is linked repeatedly
//! until no candidate has both tokens free. A token takes part in at most one
//! link. Candidates are ordered by score (descending), then type pair
//! `(u, v)`, then positions `(i, j)`, which makes the result independent of
//! enumeration order and pairs repeated tokens leftmost-first.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::bitext::{Bitext, LinkClass, PerClass, SegmentPair, Side};
use crate::cooc::{within_cap, PairKey};
use crate::scoring::ScoreTable;

#[derive(Clone, Debug, PartialEq)]
pub struct TokenLink {
    pub segment: usize,
    pub source_pos: usize,
    pub target_pos: usize,
    pub u: u32,
    pub v: u32,
    pub class: LinkClass,
    pub score: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SegmentLinks {
    pub segment: usize,
    /// In emission order.
    pub links: Vec<TokenLink>,
    pub unlinked_source: Vec<usize>,
    pub unlinked_target: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Candidate {
    pub score: f64,
    pub u: u32,
    pub v: u32,
    pub i: usize,
    pub j: usize,
}

/// Total order used for the competition: higher score first.
pub(crate) fn candidate_order(a: &Candidate, b: &Candidate) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.u.cmp(&b.u))
        .then(a.v.cmp(&b.v))
        .then(a.i.cmp(&b.i))
        .then(a.j.cmp(&b.j))
}

/// Every `(i, j)` whose type pair is scored in a shared class, unsorted.
pub(crate) fn candidates(pair: &SegmentPair, bitext: &Bitext, scores: &ScoreTable) -> Vec<Candidate> {
    let (sv, tv) = (bitext.vocab(Side::Source), bitext.vocab(Side::Target));
    let mut out = Vec::new();
    for (i, &u) in pair.source.iter().enumerate() {
        let class = sv.class(u);
        let table = scores.class(class);
        if table.is_empty() {
            continue;
        }
        for (j, &v) in pair.target.iter().enumerate() {
            if tv.class(v) != class {
                continue;
            }
            if let Some(&score) = table.get(&(u, v)) {
                out.push(Candidate { score, u, v, i, j });
            }
        }
    }
    out
}

pub fn link_segment(pair: &SegmentPair, bitext: &Bitext, scores: &ScoreTable) -> SegmentLinks {
    let (l, m) = (pair.source.len(), pair.target.len());
    let mut result = SegmentLinks {
        segment: pair.index,
        ..Default::default()
    };
    let mut source_free = vec![true; l];
    let mut target_free = vec![true; m];
    if within_cap(pair, scores.max_segment_len()) {
        let mut cands = candidates(pair, bitext, scores);
        cands.sort_unstable_by(candidate_order);
        let most = l.min(m);
        let sv = bitext.vocab(Side::Source);
        for c in cands {
            if result.links.len() == most {
                break;
            }
            if source_free[c.i] && target_free[c.j] {
                source_free[c.i] = false;
                target_free[c.j] = false;
                result.links.push(TokenLink {
                    segment: pair.index,
                    source_pos: c.i,
                    target_pos: c.j,
                    u: c.u,
                    v: c.v,
                    class: sv.class(c.u),
                    score: c.score,
                });
            }
        }
    }
    result.unlinked_source = (0..l).filter(|&i| source_free[i]).collect();
    result.unlinked_target = (0..m).filter(|&j| target_free[j]).collect();
    result
}

/// Per-class link counts `k(u,v)` and totals `K_c`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinkStats {
    classes: PerClass<HashMap<PairKey, u64>>,
    totals: PerClass<u64>,
}

impl LinkStats {
    pub fn k(&self, class: LinkClass, u: u32, v: u32) -> u64 {
        self.classes[class].get(&(u, v)).copied().unwrap_or(0)
    }

    pub fn total(&self, class: LinkClass) -> u64 {
        self.totals[class]
    }

    pub fn grand_total(&self) -> u64 {
        self.totals.iter().map(|(_, &k)| k).sum()
    }

    pub fn class(&self, class: LinkClass) -> &HashMap<PairKey, u64> {
        &self.classes[class]
    }

    pub fn add(&mut self, link: &TokenLink) {
        *self.classes[link.class].entry((link.u, link.v)).or_default() += 1;
        self.totals[link.class] += 1;
    }

    fn merge(&mut self, other: LinkStats) {
        for class in LinkClass::ALL {
            let target = &mut self.classes[class];
            for (&key, &k) in &other.classes[class] {
                *target.entry(key).or_default() += k;
            }
            self.totals[class] += other.totals[class];
        }
    }
}

pub struct LinkOutput {
    pub stats: LinkStats,
    /// Per-segment links in segment order, when requested.
    pub segments: Option<Vec<SegmentLinks>>,
}

const CHUNK: usize = 256;

pub fn link_bitext(bitext: &Bitext, scores: &ScoreTable, collect: bool) -> LinkOutput {
    link_bitext_chunked(bitext, scores, collect, CHUNK)
}

/// Links segment batches of `chunk` pairs concurrently and concatenates the
/// results by segment order.
pub fn link_bitext_chunked(bitext: &Bitext, scores: &ScoreTable, collect: bool, chunk: usize) -> LinkOutput {
    let parts: Vec<(LinkStats, Vec<SegmentLinks>)> = bitext
        .segments()
        .par_chunks(chunk.max(1))
        .map(|batch| {
            let mut stats = LinkStats::default();
            let mut kept = Vec::new();
            for seg in batch {
                let out = link_segment(seg, bitext, scores);
                out.links.iter().for_each(|l| stats.add(l));
                if collect {
                    kept.push(out);
                }
            }
            (stats, kept)
        })
        .collect();
    let mut stats = LinkStats::default();
    let mut segments = collect.then(Vec::new);
    for (part, kept) in parts {
        stats.merge(part);
        if let Some(all) = segments.as_mut() {
            all.extend(kept);
        }
    }
    LinkOutput { stats, segments }
}

/// Token-link dump: `segment<TAB>src_pos<TAB>tgt_pos<TAB>u<TAB>v<TAB>class<TAB>logL`.
pub fn write_links_tsv<W: Write>(bitext: &Bitext, segments: &[SegmentLinks], mut out: W) -> io::Result<()> {
    let (sv, tv) = (bitext.vocab(Side::Source), bitext.vocab(Side::Target));
    for seg in segments {
        let mut links: Vec<&TokenLink> = seg.links.iter().collect();
        links.sort_by_key(|l| l.source_pos);
        for l in links {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                l.segment,
                l.source_pos,
                l.target_pos,
                sv.surface(l.u),
                tv.surface(l.v),
                l.class,
                l.score
            )?;
        }
    }
    Ok(())
}
