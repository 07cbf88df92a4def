//! The outer training loop and the model file.
//!
//! Scores start as signed G² associations. Each iteration links the bitext
//! with the current scores, fits `(λ⁺, λ⁻)` per class from the resulting
//! `(k, n)` statistics, and rescores every co-occurring pair with the
//! likelihood ratio, discarding pairs below the cutoff. The loop stops when
//! the summed mixture log-likelihood stops increasing or after `max_iters`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bitext::{Bitext, LinkClass, PerClass, Side, TokenizerOptions};
use crate::cooc::{build_cooc, CoocConfig, CoocTable};
use crate::error::{Error, Result};
use crate::estimation::{estimate_class, ClassParams, SearchConfig};
use crate::linking::{link_bitext, LinkStats};
use crate::scoring::{initial_scores, rebuild_scores, ScoreKind, ScoreTable};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InduceConfig {
    pub tokenizer: TokenizerOptions,
    pub source_function_words: Option<PathBuf>,
    pub target_function_words: Option<PathBuf>,
    /// Likelihood-ratio cutoff (not log). Pairs with `L(u,v) < cutoff` are
    /// discarded after every iteration.
    pub cutoff: f64,
    pub max_iters: usize,
    pub search: SearchConfig,
    pub max_segment_len: usize,
    pub seed: u64,
    /// Worker threads; 0 means one per available core.
    pub threads: usize,
}

impl Default for InduceConfig {
    fn default() -> Self {
        InduceConfig {
            tokenizer: TokenizerOptions::default(),
            source_function_words: None,
            target_function_words: None,
            cutoff: 1.0,
            max_iters: 20,
            search: SearchConfig::default(),
            max_segment_len: 100,
            seed: 0,
            threads: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Total links `K`.
    pub links: u64,
    /// Total co-occurrences `N`.
    pub cooccurrences: u64,
    /// Parameters of every class that could be estimated.
    pub params: Vec<ClassParams>,
    /// Summed mixture log-likelihood at the fitted parameters.
    pub objective: f64,
    pub score_table_size: usize,
}

/// One scored link type in portable (surface) form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub u: String,
    pub v: String,
    pub class: LinkClass,
    pub n: u64,
    pub k: u64,
    pub log_l: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub format_version: u32,
    pub config: InduceConfig,
    pub params: Vec<ClassParams>,
    pub history: Vec<IterationRecord>,
    /// Iteration whose parameters and scores this model carries.
    pub selected_iteration: usize,
    /// Stopped because the objective stopped increasing, not on `max_iters`.
    pub converged: bool,
    /// The objective decreased at some iteration.
    pub non_monotonic: bool,
    /// Sorted by `log_l` descending, then `u`, then `v`.
    pub entries: Vec<ModelEntry>,
}

impl Model {
    pub fn params_for(&self, class: LinkClass) -> Option<&ClassParams> {
        self.params.iter().find(|p| p.class == class)
    }

    /// Rebuilds an id-keyed score table against `bitext`'s vocabularies.
    /// Entries whose words or class do not occur in `bitext` are skipped.
    pub fn score_table(&self, bitext: &Bitext) -> ScoreTable {
        let (sv, tv) = (bitext.vocab(Side::Source), bitext.vocab(Side::Target));
        let entries = self.entries.iter().filter_map(|e| {
            let u = sv.id(&e.u)?;
            let v = tv.id(&e.v)?;
            (sv.class(u) == e.class && tv.class(v) == e.class).then_some((e.class, (u, v), e.log_l))
        });
        ScoreTable::from_entries(
            entries,
            ScoreKind::LogLikelihoodRatio,
            self.config.cutoff,
            self.config.max_segment_len,
        )
    }
}

/// One evaluated point of the parameter search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub class: LinkClass,
    pub iteration: usize,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub log_likelihood: f64,
}

pub fn induce(bitext: &Bitext, config: &InduceConfig) -> Result<Model> {
    induce_traced(bitext, config, &mut |_| {})
}

struct Iterate {
    params: PerClass<Option<ClassParams>>,
    scores: ScoreTable,
    links: LinkStats,
    iteration: usize,
    objective: f64,
}

pub fn induce_traced(bitext: &Bitext, config: &InduceConfig, trace: &mut dyn FnMut(TracePoint)) -> Result<Model> {
    if bitext.is_empty() {
        return Err(Error::EmptyBitext);
    }
    let cooc = build_cooc(
        bitext,
        &CoocConfig {
            max_segment_len: config.max_segment_len,
            ..Default::default()
        },
    )?;
    let mut scores = initial_scores(&cooc);
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut best: Option<Iterate> = None;
    let mut converged = false;
    let mut non_monotonic = false;

    for iteration in 1..=config.max_iters.max(1) {
        let links = link_bitext(bitext, &scores, false).stats;
        let params = fit_classes(&cooc, &links, &config.search, iteration, trace)?;
        let objective: f64 = params.iter().flat_map(|(_, p)| p).map(|p| p.log_likelihood).sum();
        let next = rebuild_scores(&cooc, &links, &params, config.cutoff);
        log::info!(
            "iteration {iteration}: K={} N={} objective={objective:.6} scores={}",
            links.grand_total(),
            cooc.grand_total(),
            next.len()
        );
        history.push(IterationRecord {
            iteration,
            links: links.grand_total(),
            cooccurrences: cooc.grand_total(),
            params: params.iter().flat_map(|(_, p)| p.clone()).collect(),
            objective,
            score_table_size: next.len(),
        });

        let previous = history.len().checked_sub(2).map(|i| history[i].objective);
        if best.as_ref().is_none_or(|b| objective >= b.objective) {
            best = Some(Iterate {
                params,
                scores: next.clone(),
                links,
                iteration,
                objective,
            });
        }
        if let Some(prev) = previous {
            if objective < prev {
                non_monotonic = true;
                log::warn!("objective decreased at iteration {iteration} ({prev} -> {objective})");
            }
            if objective <= prev {
                converged = true;
                break;
            }
        }
        scores = next;
    }

    let best = best.expect("at least one iteration ran");
    Ok(Model {
        format_version: MODEL_FORMAT_VERSION,
        config: config.clone(),
        params: best.params.iter().flat_map(|(_, p)| p.clone()).collect(),
        history,
        selected_iteration: best.iteration,
        converged,
        non_monotonic,
        entries: model_entries(bitext, &cooc, &best.links, &best.scores),
    })
}

fn fit_classes(
    cooc: &CoocTable,
    links: &LinkStats,
    search: &SearchConfig,
    iteration: usize,
    trace: &mut dyn FnMut(TracePoint),
) -> Result<PerClass<Option<ClassParams>>> {
    let mut params = PerClass::<Option<ClassParams>>::default();
    for class in LinkClass::ALL {
        let mut emit = |lambda_plus, lambda_minus, log_likelihood| {
            trace(TracePoint {
                class,
                iteration,
                lambda_plus,
                lambda_minus,
                log_likelihood,
            })
        };
        match estimate_class(cooc, links, class, search, &mut emit) {
            Ok(p) => params[class] = Some(p),
            Err(Error::NoCooccurrences(_)) => {}
            Err(Error::NoLinks(_)) => {
                log::warn!("iteration {iteration}: class {class} has no links; excluded")
            }
            Err(e) => return Err(e),
        }
    }
    if params.iter().all(|(_, p)| p.is_none()) {
        let detail: Vec<String> = LinkClass::ALL
            .iter()
            .map(|&c| format!("{c}: K={} N={}", links.total(c), cooc.class(c).total()))
            .collect();
        return Err(Error::InductionFailed(format!(
            "no class could be estimated at iteration {iteration} ({})",
            detail.join(", ")
        )));
    }
    Ok(params)
}

fn model_entries(bitext: &Bitext, cooc: &CoocTable, links: &LinkStats, scores: &ScoreTable) -> Vec<ModelEntry> {
    let (sv, tv) = (bitext.vocab(Side::Source), bitext.vocab(Side::Target));
    let mut entries: Vec<ModelEntry> = scores
        .sorted_entries()
        .into_iter()
        .map(|(class, (u, v), log_l)| ModelEntry {
            u: sv.surface(u).to_string(),
            v: tv.surface(v).to_string(),
            class,
            n: cooc.class(class).n(u, v),
            k: links.k(class, u, v),
            log_l,
        })
        .collect();
    entries.sort_by(|a, b| {
        b.log_l
            .total_cmp(&a.log_l)
            .then_with(|| a.u.cmp(&b.u))
            .then_with(|| a.v.cmp(&b.v))
    });
    entries
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, model).map_err(|e| Error::malformed(path, e))?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: Option<u32>,
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let probe: VersionProbe = serde_json::from_str(&text).map_err(|e| Error::malformed(path, e))?;
    match probe.format_version {
        None => return Err(Error::malformed(path, "missing format_version")),
        Some(v) if v != MODEL_FORMAT_VERSION => {
            return Err(Error::ModelVersion {
                found: v,
                expected: MODEL_FORMAT_VERSION,
            })
        }
        Some(_) => {}
    }
    serde_json::from_str(&text).map_err(|e| Error::malformed(path, e))
}
