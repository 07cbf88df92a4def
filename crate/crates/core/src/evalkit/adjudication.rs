use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitext::{Bitext, LinkClass, Side};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

/// `sets` independent samples of `size` distinct entry indices each.
pub fn sample_link_types(lexicon: &Lexicon, sets: usize, size: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if lexicon.len() < size {
        return Err(Error::SampleTooLarge {
            available: lexicon.len(),
            requested: size,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..sets)
        .map(|_| rand::seq::index::sample(&mut rng, lexicon.len(), size).into_vec())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concordance {
    pub segment: usize,
    /// Space-joined tokens; highlight positions index into them.
    pub source: String,
    pub target: String,
    pub source_highlight: Vec<usize>,
    pub target_highlight: Vec<usize>,
}

/// Up to `max_contexts` segments, in segment order, where `u` and `v`
/// co-occur.
pub fn concordances(bitext: &Bitext, u: &str, v: &str, max_contexts: usize) -> Vec<Concordance> {
    let (sv, tv) = (bitext.vocab(Side::Source), bitext.vocab(Side::Target));
    let (Some(uid), Some(vid)) = (sv.id(u), tv.id(v)) else {
        return Vec::new();
    };
    bitext
        .segments()
        .iter()
        .filter_map(|seg| {
            let src: Vec<usize> = positions(&seg.source, uid);
            let tgt: Vec<usize> = positions(&seg.target, vid);
            if src.is_empty() || tgt.is_empty() {
                return None;
            }
            let join = |ids: &[u32], side| {
                let vocab = bitext.vocab(side);
                ids.iter().map(|&id| vocab.surface(id)).collect::<Vec<_>>().join(" ")
            };
            Some(Concordance {
                segment: seg.index,
                source: join(&seg.source, Side::Source),
                target: join(&seg.target, Side::Target),
                source_highlight: src,
                target_highlight: tgt,
            })
        })
        .take(max_contexts)
        .collect()
}

fn positions(ids: &[u32], id: u32) -> Vec<usize> {
    ids.iter()
        .enumerate()
        .filter(|&(_, &x)| x == id)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LexiconSummary {
    /// `ln L` threshold of the sampled lexicon.
    pub log_threshold: f64,
    pub entries: usize,
    /// Pooled vocabulary recall of the sampled lexicon.
    pub recall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleItem {
    /// `"<set>-<position>"`, unique within the bundle.
    pub id: String,
    pub u: String,
    pub v: String,
    pub class: LinkClass,
    pub n: u64,
    pub k: u64,
    pub log_l: f64,
    pub concordances: Vec<Concordance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub set: usize,
    pub items: Vec<BundleItem>,
}

/// Sampled link types with their contexts, handed to a human judge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjudicationBundle {
    pub format_version: u32,
    pub bundle_id: String,
    pub lexicon: LexiconSummary,
    pub seed: u64,
    pub recall_level: f64,
    pub samples: Vec<SampleSet>,
}

impl AdjudicationBundle {
    pub fn items(&self) -> impl Iterator<Item = &BundleItem> {
        self.samples.iter().flat_map(|s| s.items.iter())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        super::write_json(self, path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bundle: AdjudicationBundle = super::read_json(path)?;
        if bundle.format_version != BUNDLE_FORMAT_VERSION {
            return Err(Error::malformed(
                path,
                format!("unsupported bundle format_version {}", bundle.format_version),
            ));
        }
        Ok(bundle)
    }
}

pub fn build_bundle(
    lexicon: &Lexicon,
    bitext: &Bitext,
    sets: usize,
    size: usize,
    seed: u64,
    max_contexts: usize,
) -> Result<AdjudicationBundle> {
    let samples = sample_link_types(lexicon, sets, size, seed)?;
    let recall = crate::lexicon::recall(lexicon, bitext);
    let samples = samples
        .into_iter()
        .enumerate()
        .map(|(set, picks)| SampleSet {
            set,
            items: picks
                .into_iter()
                .enumerate()
                .map(|(pos, idx)| {
                    let e = &lexicon.entries[idx];
                    BundleItem {
                        id: format!("{set}-{pos}"),
                        u: e.u.clone(),
                        v: e.v.clone(),
                        class: e.class,
                        n: e.n,
                        k: e.k,
                        log_l: e.log_l,
                        concordances: concordances(bitext, &e.u, &e.v, max_contexts),
                    }
                })
                .collect(),
        })
        .collect();
    Ok(AdjudicationBundle {
        format_version: BUNDLE_FORMAT_VERSION,
        bundle_id: format!("seed{seed}-{sets}x{size}-n{}", lexicon.len()),
        lexicon: LexiconSummary {
            log_threshold: lexicon.log_threshold,
            entries: lexicon.len(),
            recall,
        },
        seed,
        recall_level: recall,
        samples,
    })
}
