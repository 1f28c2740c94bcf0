//! Reconstruction and simplification experiments over any coder.
//!
//! Each run computes everything in memory first and returns an
//! [`ExperimentOutput`]; nothing touches the output directory until
//! [`ExperimentOutput::persist`] is called, so a failing coder never leaves a
//! partial report behind.

mod coder;
mod report;

pub use coder::{CoderHandle, CoderKind, ExternalCommand};
pub use report::{format_number, render_report, ExperimentReport, MetricRow, ReportFormat};

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus::{sentences_to_string, CorpusError, Lang, ParallelCorpus, Sentence};
use crate::embedding::EmbeddingError;
use crate::metrics::{
    corpus_readability, delta_report, sari_corpus, MetricsError, ReadabilityReport,
};
use crate::simplifier::{load_model, transform_embeddings, SimplifierError};
use crate::toy_coder::ToyCoderError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("coder failure: {0}")]
    CoderFailure(String),
    #[error("dimension mismatch: model {model}, coder {coder}")]
    DimMismatch { model: usize, coder: usize },
    #[error("language mismatch: coder {coder}, corpus {corpus}")]
    LangMismatch { coder: String, corpus: String },
    #[error("{sources} sources but {refs} reference lists")]
    LengthMismatch { sources: usize, refs: usize },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Simplifier(#[from] SimplifierError),
    #[error(transparent)]
    ToyCoder(#[from] ToyCoderError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// A finished run: the report plus the decoded texts it was computed from.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    /// `(file name, contents)` for each decoded sentence file.
    pub texts: Vec<(String, Vec<Sentence>)>,
}

impl ExperimentOutput {
    /// Writes `report.<ext>` and every decoded text file into `dir`.
    pub fn persist(&self, dir: &Path, format: ReportFormat) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        for (name, sentences) in &self.texts {
            write_atomic(&dir.join(name), sentences_to_string(sentences).as_bytes())?;
        }
        let path = dir.join(format!("report.{}", format.extension()));
        write_atomic(&path, render_report(&self.report, format).as_bytes())?;
        Ok(path)
    }

    pub fn text(&self, name: &str) -> Option<&[Sentence]> {
        self.texts
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s.as_slice())
    }
}

/// Writes through a temp file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    use std::io::Write;
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn check_lang(coder: &CoderHandle, corpus: &Lang) -> Result<()> {
    if coder.lang != *corpus {
        return Err(ExperimentError::LangMismatch {
            coder: coder.lang.to_string(),
            corpus: corpus.to_string(),
        });
    }
    Ok(())
}

fn texts(s: &[Sentence]) -> Vec<&str> {
    s.iter().map(Sentence::text).collect()
}

fn distinct(groups: &[&[Sentence]]) -> Vec<Sentence> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for g in groups {
        for s in *g {
            if seen.insert(s.text().to_string()) {
                out.push(s.clone());
            }
        }
    }
    out
}

fn round_trip(
    sentences: &[Sentence],
    coder: &CoderHandle,
    pool: &[Sentence],
    workdir: &Path,
) -> Result<Vec<Sentence>> {
    let e = coder.encode(sentences, workdir)?;
    coder.decode(&e, pool, workdir)
}

/// Encodes and decodes both sides of `corpus` with no transform, and
/// compares readability of the originals with their reconstructions.
///
/// The toy coder's default pool is every distinct sentence in the corpus.
pub fn run_reconstruction(
    corpus: &ParallelCorpus,
    coder: &CoderHandle,
) -> Result<ExperimentOutput> {
    check_lang(coder, corpus.lang())?;
    let work = tempfile::tempdir()?;
    let complex = corpus.complex();
    let simple = corpus.simple();
    let pool = distinct(&[&complex, &simple]);

    let complex_rec = round_trip(&complex, coder, &pool, work.path())?;
    let simple_rec = round_trip(&simple, coder, &pool, work.path())?;

    let c = corpus_readability(&texts(&complex))?;
    let c2 = corpus_readability(&texts(&complex_rec))?;
    let s = corpus_readability(&texts(&simple))?;
    let s2 = corpus_readability(&texts(&simple_rec))?;
    let dc = delta_report(&c, &c2);
    let ds = delta_report(&s, &s2);

    let mut report = ExperimentReport::new(
        format!("Reconstruction: {}", corpus.name()),
        &["C", "C′", "ΔC", "S", "S′", "ΔS"],
    );
    report.add_row(
        "FKGL",
        [c.fkgl, c2.fkgl, dc.fkgl, s.fkgl, s2.fkgl, ds.fkgl]
            .map(Some)
            .to_vec(),
    );
    report.add_row(
        "ARI",
        [c.ari, c2.ari, dc.ari, s.ari, s2.ari, ds.ari]
            .map(Some)
            .to_vec(),
    );
    report.provenance = base_provenance("reconstruction", corpus.name(), corpus.len(), coder);
    report.provenance.extend(corpus.metadata.iter().cloned());

    Ok(ExperimentOutput {
        report,
        texts: vec![
            ("complex_reconstructed.txt".into(), complex_rec),
            ("simple_reconstructed.txt".into(), simple_rec),
        ],
    })
}

fn base_provenance(
    kind: &str,
    corpus: &str,
    n: usize,
    coder: &CoderHandle,
) -> Vec<(String, String)> {
    let mut p = vec![
        ("experiment".to_string(), kind.to_string()),
        ("corpus".to_string(), corpus.to_string()),
        ("corpus.size".to_string(), n.to_string()),
        (
            "tool".to_string(),
            format!("embsimp {}", env!("CARGO_PKG_VERSION")),
        ),
    ];
    p.extend(coder.provenance());
    p
}

/// Scores system outputs against sources and references: readability of
/// sources, first references and outputs (English only), plus SARI.
pub fn evaluate_outputs(
    name: &str,
    sources: &[Sentence],
    outputs: &[Sentence],
    refs: &[Vec<Sentence>],
    lang: &Lang,
) -> Result<ExperimentReport> {
    if sources.len() != refs.len() {
        return Err(ExperimentError::LengthMismatch {
            sources: sources.len(),
            refs: refs.len(),
        });
    }
    let ref_texts: Vec<Vec<&str>> = refs.iter().map(|r| texts(r)).collect();
    let sari = sari_corpus(&texts(sources), &texts(outputs), &ref_texts)?;

    let mut report = ExperimentReport::new(name.to_string(), &["C", "S", "system"]);
    if lang.is_english() {
        let first: Vec<&str> = refs.iter().map(|r| r[0].text()).collect();
        let c = corpus_readability(&texts(sources))?;
        let s = corpus_readability(&first)?;
        let o: ReadabilityReport = corpus_readability(&texts(outputs))?;
        report.add_row("FKGL", vec![Some(c.fkgl), Some(s.fkgl), Some(o.fkgl)]);
        report.add_row("ARI", vec![Some(c.ari), Some(s.ari), Some(o.ari)]);
    }
    report.add_row("SARI-Add", vec![None, None, Some(sari.add)]);
    report.add_row("SARI-Keep", vec![None, None, Some(sari.keep)]);
    report.add_row("SARI-Del", vec![None, None, Some(sari.del)]);
    report.add_row("SARI", vec![None, None, Some(sari.sari)]);
    Ok(report)
}

/// Full pipeline: encode sources, apply the trained transform, decode, score.
///
/// The toy coder's default pool is every distinct reference sentence.
pub fn run_simplification(
    name: &str,
    sources: &[Sentence],
    refs: &[Vec<Sentence>],
    model_path: &Path,
    coder: &CoderHandle,
) -> Result<ExperimentOutput> {
    if sources.len() != refs.len() {
        return Err(ExperimentError::LengthMismatch {
            sources: sources.len(),
            refs: refs.len(),
        });
    }
    if let Some(first) = sources.first() {
        check_lang(coder, first.lang())?;
    }
    let model = load_model(model_path)?;
    if let Some(d) = coder.dim() {
        if d != model.dim() {
            return Err(ExperimentError::DimMismatch {
                model: model.dim(),
                coder: d,
            });
        }
    }
    let work = tempfile::tempdir()?;
    let encoded = coder.encode(sources, work.path())?;
    if encoded.dim() != model.dim() {
        return Err(ExperimentError::DimMismatch {
            model: model.dim(),
            coder: encoded.dim(),
        });
    }
    let transformed = transform_embeddings(&model, &encoded)?;
    let ref_groups: Vec<&[Sentence]> = refs.iter().map(Vec::as_slice).collect();
    let pool = distinct(&ref_groups);
    let outputs = coder.decode(&transformed, &pool, work.path())?;

    let mut report = evaluate_outputs(name, sources, &outputs, refs, &coder.lang)?;
    report.provenance = base_provenance("simplification", name, sources.len(), coder);
    report
        .provenance
        .push(("model.path".into(), model_path.display().to_string()));
    report
        .provenance
        .push(("model.dim".into(), model.dim().to_string()));
    report
        .provenance
        .push(("model.hidden".into(), model.hidden().to_string()));
    report
        .provenance
        .push(("model.xxh3".into(), file_digest(model_path)?));
    report
        .provenance
        .push(("readability.reference_index".into(), "0".into()));

    Ok(ExperimentOutput {
        report,
        texts: vec![("outputs.txt".into(), outputs)],
    })
}

/// [`run_simplification`] with sources, references and coder all tagged
/// `lang`. English-only readability rows are dropped for other languages.
pub fn run_multilingual(
    name: &str,
    sources: &[Sentence],
    refs: &[Vec<Sentence>],
    model_path: &Path,
    coder: &CoderHandle,
    lang: &Lang,
) -> Result<ExperimentOutput> {
    let retag = |s: &Sentence| s.clone().with_lang(lang.clone());
    let sources: Vec<Sentence> = sources.iter().map(retag).collect();
    let refs: Vec<Vec<Sentence>> = refs.iter().map(|r| r.iter().map(retag).collect()).collect();
    let mut out = run_simplification(
        name,
        &sources,
        &refs,
        model_path,
        &coder.with_lang(lang.clone()),
    )?;
    out.report.provenance[0].1 = "multilingual".into();
    Ok(out)
}

fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(format!("{:016x}", xxhash_rust::xxh3::xxh3_64(&bytes)))
}
