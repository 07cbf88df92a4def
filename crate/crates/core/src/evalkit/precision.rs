use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AdjudicationBundle;
use crate::error::{Error, Result};

pub const JUDGMENT_FORMAT_VERSION: u32 = 1;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959963984540054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Correct,
    /// Part of a multi-word correspondence.
    Incomplete,
    Incorrect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IncompletePolicy {
    Correct,
    Incorrect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub item: String,
    /// `null` marks an item left unjudged in a partial export.
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JudgmentSet {
    pub format_version: u32,
    pub bundle_id: String,
    pub judge: String,
    pub judgments: Vec<Judgment>,
}

impl JudgmentSet {
    pub fn save(&self, path: &Path) -> Result<()> {
        super::write_json(self, path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let set: JudgmentSet = super::read_json(path)?;
        if set.format_version != JUDGMENT_FORMAT_VERSION {
            return Err(Error::malformed(
                path,
                format!("unsupported judgment format_version {}", set.format_version),
            ));
        }
        Ok(set)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionReport {
    pub precision: f64,
    pub lower: f64,
    pub upper: f64,
    pub judged: usize,
    pub unjudged: usize,
}

/// 95% Wilson score interval for `successes` out of `total`.
pub fn wilson_interval(successes: usize, total: usize) -> (f64, f64) {
    assert!(total > 0 && successes <= total);
    let n = total as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lower = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let upper = if successes == total {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lower, upper)
}

/// Precision of the judged items, counting `incomplete` per `policy`.
/// Unjudged items are left out of the denominator and reported.
pub fn precision_ci(judgments: &JudgmentSet, policy: IncompletePolicy) -> Result<PrecisionReport> {
    let verdicts: Vec<Verdict> = judgments.judgments.iter().filter_map(|j| j.verdict).collect();
    let unjudged = judgments.judgments.len() - verdicts.len();
    if verdicts.is_empty() {
        return Err(Error::NoJudgments);
    }
    let good = verdicts
        .iter()
        .filter(|&&v| match v {
            Verdict::Correct => true,
            Verdict::Incomplete => policy == IncompletePolicy::Correct,
            Verdict::Incorrect => false,
        })
        .count();
    let (lower, upper) = wilson_interval(good, verdicts.len());
    Ok(PrecisionReport {
        precision: good as f64 / verdicts.len() as f64,
        lower,
        upper,
        judged: verdicts.len(),
        unjudged,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub bundle_id: String,
    pub judge: String,
    /// Incomplete links counted as correct.
    pub upper_curve: PrecisionReport,
    /// Incomplete links counted as incorrect.
    pub lower_curve: PrecisionReport,
    /// Per sample set, incomplete counted as incorrect.
    pub per_set: Vec<PrecisionReport>,
    /// Bundle items without a verdict (missing or explicitly unjudged).
    pub unjudged: usize,
}

/// Matches judgments to bundle items and scores them under both incomplete
/// policies.
pub fn score_bundle(bundle: &AdjudicationBundle, judgments: &JudgmentSet) -> Result<ScoreReport> {
    if bundle.bundle_id != judgments.bundle_id {
        return Err(Error::malformed(
            "judgments",
            format!(
                "judgments reference bundle `{}`, not `{}`",
                judgments.bundle_id, bundle.bundle_id
            ),
        ));
    }
    let mut by_item: HashMap<&str, &Judgment> = HashMap::new();
    for j in &judgments.judgments {
        if bundle.items().all(|i| i.id != j.item) {
            return Err(Error::malformed("judgments", format!("unknown item `{}`", j.item)));
        }
        if by_item.insert(j.item.as_str(), j).is_some() {
            return Err(Error::malformed(
                "judgments",
                format!("item `{}` judged more than once", j.item),
            ));
        }
    }
    let aligned = |items: &mut dyn Iterator<Item = &super::BundleItem>| JudgmentSet {
        format_version: JUDGMENT_FORMAT_VERSION,
        bundle_id: bundle.bundle_id.clone(),
        judge: judgments.judge.clone(),
        judgments: items
            .map(|i| Judgment {
                item: i.id.clone(),
                verdict: by_item.get(i.id.as_str()).and_then(|j| j.verdict),
                note: None,
            })
            .collect(),
    };
    let all = aligned(&mut bundle.items());
    let unjudged = all.judgments.iter().filter(|j| j.verdict.is_none()).count();
    if unjudged > 0 {
        log::warn!("{unjudged} bundle item(s) have no verdict");
    }
    let per_set = bundle
        .samples
        .iter()
        .filter_map(|s| precision_ci(&aligned(&mut s.items.iter()), IncompletePolicy::Incorrect).ok())
        .collect();
    Ok(ScoreReport {
        bundle_id: bundle.bundle_id.clone(),
        judge: judgments.judge.clone(),
        upper_curve: precision_ci(&all, IncompletePolicy::Correct)?,
        lower_curve: precision_ci(&all, IncompletePolicy::Incorrect)?,
        per_set,
        unjudged,
    })
}
