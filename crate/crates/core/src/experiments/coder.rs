//! Encoder/decoder selection: the in-process toy coder or an external
//! program speaking the batch file protocol
//!
//! ```text
//! <cmd> encode --lang <tag> --in <sentences.txt> --out <file.emb>
//! <cmd> decode --lang <tag> --in <file.emb> --out <sentences.txt>
//! ```
//!
//! Sentence files are UTF-8, one per line, LF-terminated; embedding files are
//! EMB1. Any nonzero exit status or malformed output is a coder failure.

use std::fs;
use std::path::Path;
use std::process::Command;

use super::ExperimentError;
use crate::corpus::{self, Lang, Sentence};
use crate::embedding::{read_embeddings, write_embeddings, EmbeddingMatrix};
use crate::toy_coder::{toy_decode_batch, toy_encode_batch, DecodePool, ToyCoderConfig};

/// Program plus leading arguments, e.g. `python3 bridge.py`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalCommand {
    pub program: String,
    pub args: Vec<String>,
}

impl ExternalCommand {
    /// Splits on whitespace. Quoting is not interpreted.
    pub fn parse(spec: &str) -> Result<Self, ExperimentError> {
        let mut parts = spec.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| ExperimentError::CoderFailure("empty coder command".into()))?;
        Ok(Self {
            program,
            args: parts.collect(),
        })
    }

    fn run(
        &self,
        op: &str,
        lang: &Lang,
        input: &Path,
        output: &Path,
    ) -> Result<(), ExperimentError> {
        let status = Command::new(&self.program)
            .args(&self.args)
            .arg(op)
            .arg("--lang")
            .arg(lang.as_str())
            .arg("--in")
            .arg(input)
            .arg("--out")
            .arg(output)
            .status()
            .map_err(|e| ExperimentError::CoderFailure(format!("{}: {e}", self.program)))?;
        if !status.success() {
            return Err(ExperimentError::CoderFailure(format!(
                "{} {op} exited with {status}",
                self.program
            )));
        }
        Ok(())
    }

    pub fn display(&self) -> String {
        std::iter::once(self.program.as_str())
            .chain(self.args.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone)]
pub enum CoderKind {
    /// `pool`, when set, replaces the decode pool an experiment would pick.
    Toy {
        config: ToyCoderConfig,
        pool: Option<Vec<Sentence>>,
    },
    External(ExternalCommand),
}

#[derive(Debug, Clone)]
pub struct CoderHandle {
    pub kind: CoderKind,
    pub lang: Lang,
}

impl CoderHandle {
    pub fn toy(config: ToyCoderConfig, lang: Lang) -> Self {
        Self {
            kind: CoderKind::Toy { config, pool: None },
            lang,
        }
    }

    pub fn toy_with_pool(config: ToyCoderConfig, pool: Vec<Sentence>, lang: Lang) -> Self {
        Self {
            kind: CoderKind::Toy {
                config,
                pool: Some(pool),
            },
            lang,
        }
    }

    pub fn external(cmd: ExternalCommand, lang: Lang) -> Self {
        Self {
            kind: CoderKind::External(cmd),
            lang,
        }
    }

    pub fn is_toy(&self) -> bool {
        matches!(self.kind, CoderKind::Toy { .. })
    }

    /// Same coder, different language tag.
    pub fn with_lang(&self, lang: Lang) -> Self {
        Self {
            kind: self.kind.clone(),
            lang,
        }
    }

    pub(crate) fn provenance(&self) -> Vec<(String, String)> {
        let mut out = vec![("coder.lang".to_string(), self.lang.to_string())];
        match &self.kind {
            CoderKind::Toy { config, pool } => {
                out.push(("coder.kind".into(), "toy".into()));
                out.push(("coder.dim".into(), config.dim.to_string()));
                out.push(("coder.seed".into(), config.seed.to_string()));
                out.push(("coder.ngram_order".into(), config.ngram_order.to_string()));
                out.push((
                    "coder.pool".into(),
                    match pool {
                        Some(p) => format!("explicit ({} sentences)", p.len()),
                        None => "experiment default".into(),
                    },
                ));
            }
            CoderKind::External(cmd) => {
                out.push(("coder.kind".into(), "external".into()));
                out.push(("coder.command".into(), cmd.display()));
            }
        }
        out
    }

    pub fn encode(
        &self,
        sentences: &[Sentence],
        workdir: &Path,
    ) -> Result<EmbeddingMatrix, ExperimentError> {
        match &self.kind {
            CoderKind::Toy { config, .. } => {
                config.validate()?;
                Ok(toy_encode_batch(sentences, config, &self.lang))
            }
            CoderKind::External(cmd) => {
                let input = workdir.join("encode_in.txt");
                let output = workdir.join("encode_out.emb");
                corpus::write_sentences(&input, sentences)?;
                cmd.run("encode", &self.lang, &input, &output)?;
                let m = read_embeddings(&output)
                    .map_err(|e| ExperimentError::CoderFailure(format!("encode output: {e}")))?;
                if m.rows() != sentences.len() {
                    return Err(ExperimentError::CoderFailure(format!(
                        "encode produced {} rows for {} sentences",
                        m.rows(),
                        sentences.len()
                    )));
                }
                Ok(m.with_lang(self.lang.clone()))
            }
        }
    }

    /// Decodes each row. `default_pool` is the toy coder's retrieval pool when
    /// the handle does not carry one; external coders ignore it.
    pub fn decode(
        &self,
        m: &EmbeddingMatrix,
        default_pool: &[Sentence],
        workdir: &Path,
    ) -> Result<Vec<Sentence>, ExperimentError> {
        match &self.kind {
            CoderKind::Toy { config, pool } => {
                let sentences = pool.clone().unwrap_or_else(|| default_pool.to_vec());
                let pool = DecodePool::build(sentences, config)?;
                let m = m.clone().with_lang(self.lang.clone());
                Ok(toy_decode_batch(&m, &pool)?)
            }
            CoderKind::External(cmd) => {
                let input = workdir.join("decode_in.emb");
                let output = workdir.join("decode_out.txt");
                write_embeddings(m, &input)?;
                cmd.run("decode", &self.lang, &input, &output)?;
                let text = fs::read_to_string(&output)
                    .map_err(|e| ExperimentError::CoderFailure(format!("decode output: {e}")))?;
                let body = text.strip_suffix('\n').unwrap_or(&text);
                let lines: Vec<&str> = if body.is_empty() {
                    Vec::new()
                } else {
                    body.split('\n').collect()
                };
                if lines.len() != m.rows() {
                    return Err(ExperimentError::CoderFailure(format!(
                        "decode produced {} lines for {} rows",
                        lines.len(),
                        m.rows()
                    )));
                }
                lines
                    .iter()
                    .enumerate()
                    .map(|(i, l)| {
                        Sentence::new(l, self.lang.clone()).map_err(|_| {
                            ExperimentError::CoderFailure(format!(
                                "decode output line {} is empty",
                                i + 1
                            ))
                        })
                    })
                    .collect()
            }
        }
    }

    /// Embedding width, when known without running the coder.
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            CoderKind::Toy { config, .. } => Some(config.dim),
            CoderKind::External(_) => None,
        }
    }
}
