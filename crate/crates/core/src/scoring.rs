//! Association scores and likelihood ratios.
//!
//! The first linking pass is driven by signed G² association scores. After
//! that, every co-occurring type pair is scored by the log likelihood ratio
//! `log B(k|n,λ⁺) - log B(k|n,λ⁻)` and kept only if it clears the cutoff.

use std::collections::HashMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::bitext::{Bitext, LinkClass, PerClass, Side};
use crate::cooc::{CoocTable, PairKey};
use crate::error::{Error, Result};
use crate::estimation::ClassParams;
use crate::linking::LinkStats;

/// Signed log-likelihood-ratio statistic G² of the 2×2 contingency table of
/// `u` and `v`. Negative when the pair co-occurs less often than expected
/// under independence.
pub fn g2_score(n_uv: u64, n_u: u64, n_v: u64, total: u64) -> Result<f64> {
    if total == 0 {
        return Err(Error::InvalidContingency("N must be positive".into()));
    }
    if n_uv > n_u || n_uv > n_v {
        return Err(Error::InvalidContingency(format!(
            "n(u,v)={n_uv} exceeds a marginal (n(u)={n_u}, n(v)={n_v})"
        )));
    }
    if n_u > total || n_v > total {
        return Err(Error::InvalidContingency(format!(
            "marginal exceeds N={total} (n(u)={n_u}, n(v)={n_v})"
        )));
    }
    if n_u - n_uv + n_v > total {
        return Err(Error::InvalidContingency(format!(
            "cell (!u,!v) is negative: N={total} < n(u)+n(v)-n(u,v)={}",
            n_u - n_uv + n_v
        )));
    }

    let n = total as f64;
    let (u, v) = (n_u as f64, n_v as f64);
    let term = |observed: u64, expected: f64| {
        if observed == 0 {
            0.0
        } else {
            let o = observed as f64;
            o * (o / expected).ln()
        }
    };
    // Off-diagonal cells are added together first so that swapping u and v
    // yields a bitwise-identical result.
    let sum = term(n_uv, u * v / n)
        + (term(n_u - n_uv, u * (n - v) / n) + term(n_v - n_uv, (n - u) * v / n))
        + term(total - (n_u - n_uv + n_v), (n - u) * (n - v) / n);
    let g2 = (2.0 * sum).max(0.0);
    let below = (n_uv as u128) * (total as u128) < (n_u as u128) * (n_v as u128);
    Ok(if below { -g2 } else { g2 })
}

/// `log B(k | n, p)` with the binomial coefficient from log-gamma.
pub fn log_binomial_pmf(k: u64, n: u64, p: f64) -> Result<f64> {
    if k > n || !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidBinomial { k, n, p });
    }
    if p == 0.0 {
        return Ok(if k == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if p == 1.0 {
        return Ok(if k == n { 0.0 } else { f64::NEG_INFINITY });
    }
    Ok(ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p())
}

/// `log B(k|n,λ⁺) - log B(k|n,λ⁻)`; the binomial coefficients cancel.
///
/// With `λ⁻ = 0` and `k > 0` the false-positive hypothesis has probability
/// zero and the ratio saturates at `+∞`.
pub fn likelihood_ratio(k: u64, n: u64, params: &ClassParams) -> f64 {
    let (plus, minus) = (params.lambda_plus, params.lambda_minus);
    debug_assert!(k <= n);
    debug_assert!(plus > minus, "λ+ must exceed λ-");
    if minus == 0.0 && k > 0 {
        return f64::INFINITY;
    }
    let mut ratio = 0.0;
    if k > 0 {
        ratio += k as f64 * (plus.ln() - minus.ln());
    }
    if n > k {
        ratio += (n - k) as f64 * ((-plus).ln_1p() - (-minus).ln_1p());
    }
    ratio
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    /// Signed G², used before any parameters are estimated.
    Association,
    /// `log L(u,v)`.
    LogLikelihoodRatio,
}

/// Per-class sparse scores. For [`ScoreKind::LogLikelihoodRatio`] every entry
/// satisfies `score >= ln(cutoff)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTable {
    classes: PerClass<HashMap<PairKey, f64>>,
    kind: ScoreKind,
    cutoff: f64,
    max_segment_len: usize,
}

impl ScoreTable {
    /// Builds a table from explicit entries, e.g. loaded from a model file.
    pub fn from_entries(
        entries: impl IntoIterator<Item = (LinkClass, PairKey, f64)>,
        kind: ScoreKind,
        cutoff: f64,
        max_segment_len: usize,
    ) -> Self {
        let mut classes = PerClass::<HashMap<PairKey, f64>>::default();
        for (class, key, score) in entries {
            classes[class].insert(key, score);
        }
        ScoreTable {
            classes,
            kind,
            cutoff,
            max_segment_len,
        }
    }

    pub fn empty(max_segment_len: usize) -> Self {
        ScoreTable::from_entries([], ScoreKind::Association, 1.0, max_segment_len)
    }

    pub fn get(&self, class: LinkClass, u: u32, v: u32) -> Option<f64> {
        self.classes[class].get(&(u, v)).copied()
    }

    pub fn class(&self, class: LinkClass) -> &HashMap<PairKey, f64> {
        &self.classes[class]
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    /// Cutoff in likelihood-ratio units (not log).
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn max_segment_len(&self) -> usize {
        self.max_segment_len
    }

    pub fn len(&self) -> usize {
        self.classes.iter().map(|(_, m)| m.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All entries sorted by class, then ids.
    pub fn sorted_entries(&self) -> Vec<(LinkClass, PairKey, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for (class, map) in self.classes.iter() {
            let mut part: Vec<_> = map.iter().map(|(&k, &s)| (class, k, s)).collect();
            part.sort_unstable_by_key(|&(_, k, _)| k);
            out.extend(part);
        }
        out
    }

    /// Score dump: `class<TAB>u<TAB>v<TAB>n<TAB>k<TAB>logL`.
    pub fn write_tsv<W: Write>(
        &self,
        bitext: &Bitext,
        cooc: &CoocTable,
        links: &LinkStats,
        mut out: W,
    ) -> io::Result<()> {
        let (sv, tv) = (bitext.vocab(Side::Source), bitext.vocab(Side::Target));
        for (class, (u, v), score) in self.sorted_entries() {
            writeln!(
                out,
                "{class}\t{}\t{}\t{}\t{}\t{score}",
                sv.surface(u),
                tv.surface(v),
                cooc.class(class).n(u, v),
                links.k(class, u, v),
            )?;
        }
        Ok(())
    }
}

/// Iteration-one scores: signed G² for every co-occurring pair, keeping pairs
/// that co-occur at least as often as independence predicts.
pub fn initial_scores(cooc: &CoocTable) -> ScoreTable {
    let classes = PerClass::from_fn(|class| {
        let table = cooc.class(class);
        let total = table.total();
        table
            .pairs()
            .collect::<Vec<_>>()
            .into_par_iter()
            .filter_map(|((u, v), n)| {
                let g2 = g2_score(n, table.n_source(u), table.n_target(v), total)
                    .expect("co-occurrence table marginals are consistent");
                (g2 >= 0.0).then_some(((u, v), g2))
            })
            .collect()
    });
    ScoreTable {
        classes,
        kind: ScoreKind::Association,
        cutoff: 1.0,
        max_segment_len: cooc.config().max_segment_len,
    }
}

/// Re-scores every co-occurring pair with the likelihood ratio under the
/// class parameters. Classes without parameters get no entries.
pub fn rebuild_scores(
    cooc: &CoocTable,
    links: &LinkStats,
    params: &PerClass<Option<ClassParams>>,
    cutoff: f64,
) -> ScoreTable {
    let floor = cutoff.ln();
    let classes = PerClass::from_fn(|class| {
        let Some(p) = &params[class] else {
            return HashMap::new();
        };
        cooc.class(class)
            .pairs()
            .collect::<Vec<_>>()
            .into_par_iter()
            .filter_map(|((u, v), n)| {
                let score = likelihood_ratio(links.k(class, u, v), n, p);
                (score >= floor).then_some(((u, v), score))
            })
            .collect()
    });
    ScoreTable {
        classes,
        kind: ScoreKind::LogLikelihoodRatio,
        cutoff,
        max_segment_len: cooc.config().max_segment_len,
    }
}
