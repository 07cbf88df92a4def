//! Evaluation protocol: sampled link types with bilingual concordances for
//! human judgment, precision with 95% confidence intervals, and automated
//! scoring against the ground truth of synthetic bitexts.

mod adjudication;
mod precision;
mod synth;

pub use adjudication::{
    build_bundle, concordances, sample_link_types, AdjudicationBundle, BundleItem, Concordance, LexiconSummary,
    SampleSet, BUNDLE_FORMAT_VERSION,
};
pub use precision::{
    precision_ci, score_bundle, wilson_interval, IncompletePolicy, Judgment, JudgmentSet, PrecisionReport, ScoreReport,
    Verdict, JUDGMENT_FORMAT_VERSION,
};
pub use synth::{
    bimodality, generate_synthetic_bitext, precision_recall_curve, score_against_truth, threshold_grid,
    write_curve_csv, Bimodality, CurvePoint, GenerationSpec, GroundTruth, Synthetic, TruePair, TruthScore,
};

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub(crate) fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::malformed(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::malformed(path, e))
}
