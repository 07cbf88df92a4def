//! Line-aligned bitext loading, tokenization, type interning and link classes.
//!
//! A bitext is read from two UTF-8 files where line `i` of the source file is
//! the translation of line `i` of the target file. Every word type is interned
//! per side into a dense id and tagged with the [`LinkClass`] returned by a
//! [`Classifier`] at interning time.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Index, IndexMut};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Partition of word types whose hidden parameters are estimated separately.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkClass {
    Content,
    Function,
}

impl LinkClass {
    pub const COUNT: usize = 2;
    pub const ALL: [LinkClass; LinkClass::COUNT] = [LinkClass::Content, LinkClass::Function];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LinkClass::Content => "content",
            LinkClass::Function => "function",
        }
    }
}

impl fmt::Display for LinkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "content" => Ok(LinkClass::Content),
            "function" => Ok(LinkClass::Function),
            other => Err(format!("unknown link class `{other}`")),
        }
    }
}

/// One value per [`LinkClass`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerClass<T>(pub [T; LinkClass::COUNT]);

impl<T> PerClass<T> {
    pub fn from_fn(mut f: impl FnMut(LinkClass) -> T) -> Self {
        PerClass([f(LinkClass::Content), f(LinkClass::Function)])
    }

    pub fn iter(&self) -> impl Iterator<Item = (LinkClass, &T)> {
        LinkClass::ALL.into_iter().zip(self.0.iter())
    }

    pub fn map<U>(&self, mut f: impl FnMut(LinkClass, &T) -> U) -> PerClass<U> {
        PerClass::from_fn(|c| f(c, &self[c]))
    }
}

impl<T> Index<LinkClass> for PerClass<T> {
    type Output = T;

    fn index(&self, class: LinkClass) -> &T {
        &self.0[class.index()]
    }
}

impl<T> IndexMut<LinkClass> for PerClass<T> {
    fn index_mut(&mut self, class: LinkClass) -> &mut T {
        &mut self.0[class.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Target,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenizerOptions {
    pub lowercase: bool,
    pub split_hyphens: bool,
}

impl Default for TokenizerOptions {
    fn default() -> Self {
        TokenizerOptions {
            lowercase: true,
            split_hyphens: true,
        }
    }
}

/// Whitespace split, optional hyphen split, then trim non-alphanumeric
/// characters from both ends of every piece. Empty pieces are dropped.
pub fn tokenize(line: &str, options: &TokenizerOptions) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in line.split_whitespace() {
        let mut push = |piece: &str| {
            let trimmed = piece.trim_matches(|c: char| !c.is_alphanumeric());
            if !trimmed.is_empty() {
                tokens.push(if options.lowercase {
                    trimmed.to_lowercase()
                } else {
                    trimmed.to_string()
                });
            }
        };
        if options.split_hyphens {
            word.split('-').for_each(&mut push);
        } else {
            push(word);
        }
    }
    tokens
}

/// Assigns a [`LinkClass`] to a surface form.
pub trait Classifier {
    fn classify(&self, surface: &str, side: Side) -> LinkClass;
}

/// Function-word lists, one per side. The shipped two-class classifier.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FunctionWords {
    source: BTreeSet<String>,
    target: BTreeSet<String>,
    lowercase: bool,
}

impl FunctionWords {
    pub fn new<I, J, S, T>(source: I, target: J, lowercase: bool) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let fold = |s: &str| {
            if lowercase {
                s.to_lowercase()
            } else {
                s.to_string()
            }
        };
        FunctionWords {
            source: source.into_iter().map(|s| fold(s.as_ref().trim())).collect(),
            target: target.into_iter().map(|s| fold(s.as_ref().trim())).collect(),
            lowercase,
        }
    }

    /// Reads one surface per line; a missing path means an empty list.
    pub fn load(source: Option<&Path>, target: Option<&Path>, lowercase: bool) -> Result<Self> {
        let read = |path: Option<&Path>| -> Result<Vec<String>> {
            match path {
                None => Ok(Vec::new()),
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                    Ok(text
                        .lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty())
                        .map(String::from)
                        .collect())
                }
            }
        };
        Ok(FunctionWords::new(read(source)?, read(target)?, lowercase))
    }

    pub fn list(&self, side: Side) -> &BTreeSet<String> {
        match side {
            Side::Source => &self.source,
            Side::Target => &self.target,
        }
    }

    pub fn lowercase(&self) -> bool {
        self.lowercase
    }
}

impl Classifier for FunctionWords {
    fn classify(&self, surface: &str, side: Side) -> LinkClass {
        assign_class(surface, side, self)
    }
}

/// `Function` iff the (case-folded) surface is on the side's function-word list.
pub fn assign_class(surface: &str, side: Side, fw: &FunctionWords) -> LinkClass {
    let list = fw.list(side);
    let hit = if fw.lowercase {
        list.contains(&surface.to_lowercase())
    } else {
        list.contains(surface)
    };
    if hit {
        LinkClass::Function
    } else {
        LinkClass::Content
    }
}

/// Dense interning table for one side of the bitext.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Vocab {
    surfaces: Vec<String>,
    classes: Vec<LinkClass>,
    #[serde(skip)]
    ids: HashMap<String, u32>,
}

impl PartialEq for Vocab {
    fn eq(&self, other: &Self) -> bool {
        self.surfaces == other.surfaces && self.classes == other.classes
    }
}

impl Vocab {
    pub fn intern(&mut self, surface: &str, class: impl FnOnce() -> LinkClass) -> u32 {
        if let Some(&id) = self.ids.get(surface) {
            return id;
        }
        let id = self.surfaces.len() as u32;
        self.surfaces.push(surface.to_string());
        self.classes.push(class());
        self.ids.insert(surface.to_string(), id);
        id
    }

    pub fn id(&self, surface: &str) -> Option<u32> {
        self.ids.get(surface).copied()
    }

    pub fn surface(&self, id: u32) -> &str {
        &self.surfaces[id as usize]
    }

    pub fn class(&self, id: u32) -> LinkClass {
        self.classes[id as usize]
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str, LinkClass)> {
        self.surfaces
            .iter()
            .zip(&self.classes)
            .enumerate()
            .map(|(i, (s, &c))| (i as u32, s.as_str(), c))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SegmentPair {
    /// Zero-based line number in the input files.
    pub index: usize,
    pub source: Vec<u32>,
    pub target: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Bitext {
    segments: Vec<SegmentPair>,
    source_vocab: Vocab,
    target_vocab: Vocab,
    /// Line numbers dropped because one side was empty after tokenization.
    dropped: Vec<usize>,
}

impl Bitext {
    /// Builds a bitext from already tokenized line pairs. Pairs with an empty
    /// side are dropped and recorded.
    pub fn from_tokens<I, S>(pairs: I, classifier: &dyn Classifier) -> Self
    where
        I: IntoIterator<Item = (Vec<S>, Vec<S>)>,
        S: AsRef<str>,
    {
        let mut bitext = Bitext::default();
        for (line, (src, tgt)) in pairs.into_iter().enumerate() {
            if src.is_empty() || tgt.is_empty() {
                bitext.dropped.push(line);
                continue;
            }
            let source = src
                .iter()
                .map(|s| {
                    let s = s.as_ref();
                    bitext.source_vocab.intern(s, || classifier.classify(s, Side::Source))
                })
                .collect();
            let target = tgt
                .iter()
                .map(|s| {
                    let s = s.as_ref();
                    bitext.target_vocab.intern(s, || classifier.classify(s, Side::Target))
                })
                .collect();
            bitext.segments.push(SegmentPair {
                index: line,
                source,
                target,
            });
        }
        if !bitext.dropped.is_empty() {
            log::info!(
                "dropped {} segment pair(s) empty after tokenization",
                bitext.dropped.len()
            );
        }
        bitext
    }

    pub fn from_lines<'a, I>(pairs: I, options: &TokenizerOptions, classifier: &dyn Classifier) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        Bitext::from_tokens(
            pairs
                .into_iter()
                .map(|(s, t)| (tokenize(s, options), tokenize(t, options))),
            classifier,
        )
    }

    pub fn segments(&self) -> &[SegmentPair] {
        &self.segments
    }

    pub fn vocab(&self, side: Side) -> &Vocab {
        match side {
            Side::Source => &self.source_vocab,
            Side::Target => &self.target_vocab,
        }
    }

    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Same vocabularies, segments reordered by `order` (indices into the
    /// current segment list).
    pub fn with_segment_order(&self, order: &[usize]) -> Bitext {
        Bitext {
            segments: order.iter().map(|&i| self.segments[i].clone()).collect(),
            source_vocab: self.source_vocab.clone(),
            target_vocab: self.target_vocab.clone(),
            dropped: self.dropped.clone(),
        }
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut raw: Vec<&[u8]> = bytes.split(|&b| b == b'\n').collect();
    if raw.last().is_some_and(|l| l.is_empty()) {
        raw.pop();
    }
    raw.into_iter()
        .enumerate()
        .map(|(i, line)| {
            let line = line.strip_suffix(b"\r").unwrap_or(line);
            String::from_utf8(line.to_vec()).map_err(|_| Error::InvalidUtf8 {
                path: path.to_path_buf(),
                line: i + 1,
            })
        })
        .collect()
}

pub fn load_bitext(
    source_path: &Path,
    target_path: &Path,
    options: &TokenizerOptions,
    classifier: &dyn Classifier,
) -> Result<Bitext> {
    let source = read_lines(source_path)?;
    let target = read_lines(target_path)?;
    if source.len() != target.len() {
        return Err(Error::LineCountMismatch {
            source_lines: source.len(),
            target_lines: target.len(),
        });
    }
    Ok(Bitext::from_lines(
        source.iter().map(String::as_str).zip(target.iter().map(String::as_str)),
        options,
        classifier,
    ))
}
