#![allow(dead_code)]

use std::collections::HashSet;

use lexlink::bitext::{Bitext, FunctionWords, LinkClass, Side};
use lexlink::linking::SegmentLinks;
use lexlink::scoring::{ScoreKind, ScoreTable};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small two-class vocabulary with dense score ties, repeated tokens and
/// infinite scores, so every tie-break path is exercised.
pub fn random_linking_case(seed: u64, segments: usize, max_len: usize) -> (Bitext, ScoreTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let source: Vec<String> = (0..6)
        .map(|i| format!("a{i}"))
        .chain((0..2).map(|i| format!("f{i}")))
        .collect();
    let target: Vec<String> = (0..6)
        .map(|i| format!("x{i}"))
        .chain((0..2).map(|i| format!("g{i}")))
        .collect();
    let fw = FunctionWords::new(["f0", "f1"], ["g0", "g1"], true);
    let lines: Vec<(String, String)> = (0..segments)
        .map(|_| {
            let mut side = |words: &[String]| {
                let len = rng.random_range(1..=max_len);
                (0..len)
                    .map(|_| words.choose(&mut rng).unwrap().as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            (side(&source), side(&target))
        })
        .collect();
    let bitext = Bitext::from_lines(
        lines.iter().map(|(s, t)| (s.as_str(), t.as_str())),
        &Default::default(),
        &fw,
    );
    let (sv, tv) = (bitext.vocab(Side::Source), bitext.vocab(Side::Target));
    let palette = [0.5, 1.0, 1.0, 2.0, 3.5, f64::INFINITY];
    let mut entries = Vec::new();
    for (u, _, uc) in sv.iter() {
        for (v, _, vc) in tv.iter() {
            if uc == vc && rng.random_bool(0.6) {
                let score = if rng.random_bool(0.3) {
                    rng.random_range(0.0..5.0)
                } else {
                    *palette.choose(&mut rng).unwrap()
                };
                entries.push((uc, (u, v), score));
            }
        }
    }
    let scores = ScoreTable::from_entries(entries, ScoreKind::LogLikelihoodRatio, 1.0, 100);
    (bitext, scores)
}

/// Checks one segment's links against an independent replay of the greedy
/// rule: each emitted link joins two free tokens, no free candidate scores
/// strictly higher at that moment, and no candidate is left with both tokens
/// free. Returns a description of the first violation.
pub fn replay_greedy(bitext: &Bitext, scores: &ScoreTable, out: &SegmentLinks) -> Result<(), String> {
    let Some(seg) = bitext.segments().iter().find(|s| s.index == out.segment) else {
        return Err(format!("segment {} is not in the bitext", out.segment));
    };
    let (sv, tv) = (bitext.vocab(Side::Source), bitext.vocab(Side::Target));
    let score = |i: usize, j: usize| -> Option<f64> {
        let (u, v) = (seg.source[i], seg.target[j]);
        let class: LinkClass = sv.class(u);
        if tv.class(v) != class {
            return None;
        }
        scores.get(class, u, v)
    };
    let mut used_s = HashSet::new();
    let mut used_t = HashSet::new();
    let best_free = |used_s: &HashSet<usize>, used_t: &HashSet<usize>| -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..seg.source.len() {
            for j in 0..seg.target.len() {
                if used_s.contains(&i) || used_t.contains(&j) {
                    continue;
                }
                if let Some(s) = score(i, j) {
                    best = Some(best.map_or(s, |b: f64| b.max(s)));
                }
            }
        }
        best
    };
    if out.links.len() > seg.source.len().min(seg.target.len()) {
        return Err(format!("segment {}: more links than min(l, m)", out.segment));
    }
    for link in &out.links {
        let (i, j) = (link.source_pos, link.target_pos);
        if used_s.contains(&i) || used_t.contains(&j) {
            return Err(format!("segment {}: token reused at ({i}, {j})", out.segment));
        }
        let Some(s) = score(i, j) else {
            return Err(format!("segment {}: unscored link ({i}, {j})", out.segment));
        };
        if s != link.score || link.u != seg.source[i] || link.v != seg.target[j] {
            return Err(format!(
                "segment {}: link record disagrees with the segment",
                out.segment
            ));
        }
        if let Some(best) = best_free(&used_s, &used_t) {
            if best > s {
                return Err(format!(
                    "segment {}: linked ({i}, {j}) at {s} while {best} was available",
                    out.segment
                ));
            }
        }
        used_s.insert(i);
        used_t.insert(j);
    }
    if best_free(&used_s, &used_t).is_some() {
        return Err(format!("segment {}: a linkable pair was left unlinked", out.segment));
    }
    Ok(())
}
