//! Thresholded translation lexicons and type-level recall.

use std::collections::HashSet;
use std::io::{self, BufRead, Write};
use std::path::Path;

use crate::bitext::{Bitext, Side};
use crate::error::{Error, Result};
use crate::induction::{Model, ModelEntry};

pub type LexiconEntry = ModelEntry;

pub const LEXICON_HEADER: &str = "u\tv\tclass\tn\tk\tlogL";

#[derive(Clone, Debug, PartialEq)]
pub struct Lexicon {
    /// Sorted by `log_l` descending, then `u`, then `v`.
    pub entries: Vec<LexiconEntry>,
    /// `ln L` threshold actually applied.
    pub log_threshold: f64,
}

/// Entries of `model` with `L(u,v) >= threshold`.
///
/// Types discarded during induction cannot come back, so a threshold below
/// the induction cutoff is raised to it.
pub fn export_lexicon(model: &Model, threshold: f64) -> Lexicon {
    export_lexicon_ln(model, threshold.ln())
}

/// [`export_lexicon`] with the threshold given as `ln L`, which stays finite
/// where `L` itself overflows.
pub fn export_lexicon_ln(model: &Model, log_threshold: f64) -> Lexicon {
    let mut floor = log_threshold;
    let cutoff = model.config.cutoff.ln();
    if floor < cutoff {
        log::warn!(
            "threshold {} is below the induction cutoff {}; using the cutoff",
            floor.exp(),
            model.config.cutoff
        );
        floor = cutoff;
    }
    Lexicon {
        entries: model.entries.iter().filter(|e| e.log_l >= floor).cloned().collect(),
        log_threshold: floor,
    }
}

impl Lexicon {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{LEXICON_HEADER}")?;
        for e in &self.entries {
            writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", e.u, e.v, e.class, e.n, e.k, e.log_l)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = io::BufWriter::new(file);
        self.write_tsv(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// Reads a lexicon TSV. The threshold is not stored in the file; the
    /// smallest entry score is reported instead (0 for an empty file).
    pub fn load(path: &Path) -> Result<Lexicon> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = io::BufReader::new(file).lines();
        match lines.next() {
            Some(Ok(h)) if h == LEXICON_HEADER => {}
            Some(Err(e)) => return Err(Error::io(path, e)),
            _ => return Err(Error::malformed(path, "missing lexicon header")),
        }
        let mut entries = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let bad = |what: &str| Error::malformed(path, format!("line {}: {what}", i + 2));
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 6 {
                return Err(bad("expected 6 columns"));
            }
            entries.push(LexiconEntry {
                u: cols[0].to_string(),
                v: cols[1].to_string(),
                class: cols[2].parse().map_err(|e: String| bad(&e))?,
                n: cols[3].parse().map_err(|_| bad("bad n"))?,
                k: cols[4].parse().map_err(|_| bad("bad k"))?,
                log_l: cols[5].parse().map_err(|_| bad("bad logL"))?,
            });
        }
        let log_threshold = entries.iter().map(|e| e.log_l).fold(f64::INFINITY, f64::min);
        Ok(Lexicon {
            entries,
            log_threshold: if log_threshold.is_finite() { log_threshold } else { 0.0 },
        })
    }
}

/// Fraction of the pooled (source + target) bitext vocabulary that appears
/// in at least one lexicon entry.
pub fn recall(lexicon: &Lexicon, bitext: &Bitext) -> f64 {
    let (sv, tv) = (bitext.vocab(Side::Source), bitext.vocab(Side::Target));
    let total = sv.len() + tv.len();
    if total == 0 {
        return 0.0;
    }
    let sources: HashSet<&str> = lexicon
        .entries
        .iter()
        .map(|e| e.u.as_str())
        .filter(|u| sv.id(u).is_some())
        .collect();
    let targets: HashSet<&str> = lexicon
        .entries
        .iter()
        .map(|e| e.v.as_str())
        .filter(|v| tv.id(v).is_some())
        .collect();
    (sources.len() + targets.len()) as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitext::{FunctionWords, LinkClass};
    use crate::induction::{InduceConfig, MODEL_FORMAT_VERSION};

    fn entry(u: &str, v: &str, log_l: f64) -> ModelEntry {
        ModelEntry {
            u: u.into(),
            v: v.into(),
            class: LinkClass::Content,
            n: 3,
            k: 2,
            log_l,
        }
    }

    fn model(entries: Vec<ModelEntry>) -> Model {
        Model {
            format_version: MODEL_FORMAT_VERSION,
            config: InduceConfig::default(),
            params: vec![],
            history: vec![],
            selected_iteration: 1,
            converged: true,
            non_monotonic: false,
            entries,
        }
    }

    fn sample() -> Model {
        model(vec![
            entry("a", "x", 9.0),
            entry("b", "y", 2.0),
            entry("c", "z", 0.5),
            entry("d", "w", 0.0),
        ])
    }

    #[test]
    fn cutoff_threshold_keeps_everything() {
        let m = sample();
        assert_eq!(export_lexicon(&m, 1.0).entries, m.entries);
    }

    #[test]
    fn infinite_threshold_is_empty() {
        assert!(export_lexicon(&sample(), f64::INFINITY).is_empty());
    }

    #[test]
    fn thresholds_nest() {
        let m = sample();
        let lo = export_lexicon(&m, 2.0);
        let hi = export_lexicon(&m, 10.0);
        assert_eq!(lo.len(), 2);
        assert!(hi.entries.iter().all(|e| lo.entries.contains(e)));
        assert_eq!(hi.len(), 1);
    }

    #[test]
    fn low_threshold_is_raised() {
        let lex = export_lexicon(&sample(), 0.1);
        assert_eq!(lex.log_threshold, 0.0);
        assert_eq!(lex.len(), 4);
    }

    #[test]
    fn recall_pools_both_sides() {
        let b = Bitext::from_lines(
            [("a b", "x y"), ("c", "q")],
            &Default::default(),
            &FunctionWords::default(),
        );
        let full = Lexicon {
            entries: vec![entry("a", "x", 1.0), entry("b", "y", 1.0), entry("c", "q", 1.0)],
            log_threshold: 0.0,
        };
        assert_eq!(recall(&full, &b), 1.0);
        let empty = Lexicon {
            entries: vec![],
            log_threshold: 0.0,
        };
        assert_eq!(recall(&empty, &b), 0.0);
        let half = Lexicon {
            entries: vec![entry("a", "x", 1.0)],
            log_threshold: 0.0,
        };
        assert_eq!(recall(&half, &b), 2.0 / 6.0);
    }

    #[test]
    fn tsv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.tsv");
        let lex = export_lexicon(&sample(), 1.0);
        lex.save(&path).unwrap();
        let back = Lexicon::load(&path).unwrap();
        assert_eq!(back.entries, lex.entries);
        assert!(std::fs::read_to_string(&path).unwrap().starts_with(LEXICON_HEADER));
    }

    #[test]
    fn tsv_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.tsv");
        std::fs::write(&path, format!("{LEXICON_HEADER}\na\tb\n")).unwrap();
        assert!(matches!(Lexicon::load(&path), Err(Error::Malformed { .. })));
        std::fs::write(&path, "no header\n").unwrap();
        assert!(matches!(Lexicon::load(&path), Err(Error::Malformed { .. })));
    }
}
