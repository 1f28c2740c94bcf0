//! Parallel and multi-reference simplification corpora.
//!
//! Pairs live in TSV files (`complex<TAB>simple`, one pair per line). Multi-reference
//! data lives in JSON Lines, one `{"src": ..., "refs": [...]}` object per line.
//! Both sides are trimmed at load; interior whitespace is kept byte-for-byte.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::rng::{DetRng, SHUFFLE_ALGORITHM};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing file: {0}")]
    MissingFile(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed line {0}")]
    MalformedLine(usize),
    #[error("malformed record on line {0}")]
    MalformedRecord(usize),
    #[error("record on line {0} has no references")]
    EmptyReferences(usize),
    #[error("validation size {validation_size} out of range for corpus of {corpus_size}")]
    SizeOutOfRange {
        validation_size: usize,
        corpus_size: usize,
    },
    #[error("invalid sentence: {0}")]
    InvalidSentence(String),
    #[error("language mismatch: {0} vs {1}")]
    LangMismatch(String, String),
    #[error("corpus is empty")]
    Empty,
}

pub type Result<T> = std::result::Result<T, CorpusError>;

/// Language tag in FLORES-200 style (`eng_Latn`, `deu_Latn`, ...).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lang(String);

impl Lang {
    pub fn new(tag: impl Into<String>) -> Self {
        Self(tag.into())
    }

    /// Tag used when a source carries no language information.
    pub fn undetermined() -> Self {
        Self("und".to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True for any English tag (`eng_*` or bare `en`/`eng`).
    pub fn is_english(&self) -> bool {
        let base = self.0.split(['_', '-']).next().unwrap_or("");
        base.eq_ignore_ascii_case("eng") || base.eq_ignore_ascii_case("en")
    }
}

impl Default for Lang {
    fn default() -> Self {
        Self::new("eng_Latn")
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A single line of text with its language tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    text: String,
    lang: Lang,
}

impl Sentence {
    /// Trims the text and checks it is non-empty and single-line.
    pub fn new(text: &str, lang: Lang) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(CorpusError::InvalidSentence("empty text".into()));
        }
        if text.contains(['\n', '\r']) {
            return Err(CorpusError::InvalidSentence(format!(
                "line break inside {text:?}"
            )));
        }
        Ok(Self {
            text: text.to_string(),
            lang,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn lang(&self) -> &Lang {
        &self.lang
    }

    pub fn with_lang(mut self, lang: Lang) -> Self {
        self.lang = lang;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub complex: Sentence,
    pub simple: Sentence,
}

impl SentencePair {
    pub fn new(complex: Sentence, simple: Sentence) -> Result<Self> {
        if complex.lang != simple.lang {
            return Err(CorpusError::LangMismatch(
                complex.lang.to_string(),
                simple.lang.to_string(),
            ));
        }
        Ok(Self { complex, simple })
    }
}

/// Ordered aligned pairs of complex-original and simple-target sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelCorpus {
    name: String,
    pairs: Vec<SentencePair>,
    /// How this corpus was derived, e.g. the split generator and seed.
    pub metadata: Vec<(String, String)>,
}

impl ParallelCorpus {
    pub fn new(name: impl Into<String>, pairs: Vec<SentencePair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(CorpusError::Empty);
        }
        Ok(Self {
            name: name.into(),
            pairs,
            metadata: Vec::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn lang(&self) -> &Lang {
        &self.pairs[0].complex.lang
    }

    pub fn complex(&self) -> Vec<Sentence> {
        self.pairs.iter().map(|p| p.complex.clone()).collect()
    }

    pub fn simple(&self) -> Vec<Sentence> {
        self.pairs.iter().map(|p| p.simple.clone()).collect()
    }

    /// Writes the corpus back out as TSV.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for p in &self.pairs {
            writeln!(out, "{}\t{}", p.complex.text, p.simple.text)?;
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Sources with one or more reference simplifications each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiRefCorpus {
    name: String,
    sources: Vec<Sentence>,
    refs: Vec<Vec<Sentence>>,
}

impl MultiRefCorpus {
    pub fn new(
        name: impl Into<String>,
        sources: Vec<Sentence>,
        refs: Vec<Vec<Sentence>>,
    ) -> Result<Self> {
        if sources.is_empty() {
            return Err(CorpusError::Empty);
        }
        if sources.len() != refs.len() {
            return Err(CorpusError::MalformedRecord(
                sources.len().min(refs.len()) + 1,
            ));
        }
        if let Some(i) = refs.iter().position(Vec::is_empty) {
            return Err(CorpusError::EmptyReferences(i + 1));
        }
        Ok(Self {
            name: name.into(),
            sources,
            refs,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sources(&self) -> &[Sentence] {
        &self.sources
    }

    pub fn refs(&self) -> &[Vec<Sentence>] {
        &self.refs
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn lang(&self) -> &Lang {
        &self.sources[0].lang
    }
}

impl From<&ParallelCorpus> for MultiRefCorpus {
    fn from(c: &ParallelCorpus) -> Self {
        Self {
            name: c.name.clone(),
            sources: c.complex(),
            refs: c.pairs.iter().map(|p| vec![p.simple.clone()]).collect(),
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    if !path.is_file() {
        return Err(CorpusError::MissingFile(path.display().to_string()));
    }
    Ok(fs::read_to_string(path)?)
}

fn corpus_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Iterates lines split on LF, tolerating a trailing CR and a final newline.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let empty = body.is_empty();
    body.split('\n')
        .filter(move |_| !empty)
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .map(|(i, l)| (i + 1, l))
}

pub fn load_parallel_tsv(path: &Path, lang: &Lang) -> Result<ParallelCorpus> {
    let text = read_text(path)?;
    let mut pairs = Vec::new();
    for (no, line) in lines(&text) {
        let mut parts = line.split('\t');
        let (Some(c), Some(s), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(CorpusError::MalformedLine(no));
        };
        let complex = Sentence::new(c, lang.clone()).map_err(|_| CorpusError::MalformedLine(no))?;
        let simple = Sentence::new(s, lang.clone()).map_err(|_| CorpusError::MalformedLine(no))?;
        pairs.push(SentencePair { complex, simple });
    }
    ParallelCorpus::new(corpus_name(path), pairs)
}

#[derive(Deserialize)]
struct RefRecord {
    src: String,
    refs: Vec<String>,
}

pub fn load_multi_ref(path: &Path, lang: &Lang) -> Result<MultiRefCorpus> {
    let text = read_text(path)?;
    let mut sources = Vec::new();
    let mut refs = Vec::new();
    for (no, line) in lines(&text) {
        let rec: RefRecord =
            serde_json::from_str(line).map_err(|_| CorpusError::MalformedRecord(no))?;
        if rec.refs.is_empty() {
            return Err(CorpusError::EmptyReferences(no));
        }
        sources.push(
            Sentence::new(&rec.src, lang.clone()).map_err(|_| CorpusError::MalformedRecord(no))?,
        );
        let r = rec
            .refs
            .iter()
            .map(|t| Sentence::new(t, lang.clone()))
            .collect::<Result<Vec<_>>>()
            .map_err(|_| CorpusError::MalformedRecord(no))?;
        refs.push(r);
    }
    MultiRefCorpus::new(corpus_name(path), sources, refs)
}

/// Reads a plain sentence file: one sentence per line.
pub fn load_sentences(path: &Path, lang: &Lang) -> Result<Vec<Sentence>> {
    let text = read_text(path)?;
    lines(&text)
        .map(|(no, l)| Sentence::new(l, lang.clone()).map_err(|_| CorpusError::MalformedLine(no)))
        .collect()
}

/// Writes sentences one per line with LF endings.
pub fn write_sentences(path: &Path, sentences: &[Sentence]) -> Result<()> {
    fs::write(path, sentences_to_string(sentences))?;
    Ok(())
}

pub fn sentences_to_string(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&s.text);
        out.push('\n');
    }
    out
}

/// Seeded shuffle-and-cut into `(train, validation)`.
///
/// Indices are permuted with [`DetRng::shuffle`]; the first `validation_size`
/// permuted indices form the validation set. Both halves keep original file
/// order so that diffs against the source stay readable.
pub fn split_corpus(
    corpus: &ParallelCorpus,
    validation_size: usize,
    seed: u64,
) -> Result<(ParallelCorpus, ParallelCorpus)> {
    let n = corpus.len();
    if validation_size == 0 || validation_size >= n {
        return Err(CorpusError::SizeOutOfRange {
            validation_size,
            corpus_size: n,
        });
    }
    let perm = DetRng::new(seed).permutation(n);
    let mut in_val = vec![false; n];
    for &i in &perm[..validation_size] {
        in_val[i] = true;
    }
    let (mut train, mut val) = (Vec::with_capacity(n - validation_size), Vec::new());
    for (pair, v) in corpus.pairs.iter().zip(&in_val) {
        if *v { &mut val } else { &mut train }.push(pair.clone());
    }
    let meta = vec![
        ("split.algorithm".to_string(), SHUFFLE_ALGORITHM.to_string()),
        ("split.seed".to_string(), seed.to_string()),
        (
            "split.validation_size".to_string(),
            validation_size.to_string(),
        ),
    ];
    let mut t = ParallelCorpus::new(format!("{}.train", corpus.name), train)?;
    let mut v = ParallelCorpus::new(format!("{}.val", corpus.name), val)?;
    t.metadata = meta.clone();
    v.metadata = meta;
    Ok((t, v))
}

/// Pairs each source with its reference at index 0.
pub fn first_reference(corpus: &MultiRefCorpus) -> ParallelCorpus {
    let pairs = corpus
        .sources
        .iter()
        .zip(&corpus.refs)
        .map(|(s, r)| SentencePair {
            complex: s.clone(),
            simple: r[0].clone(),
        })
        .collect();
    ParallelCorpus {
        name: corpus.name.clone(),
        pairs,
        metadata: vec![("reference_index".into(), "0".into())],
    }
}
