//! Corpus-level FKGL and ARI over pooled counts.
//!
//! ```text
//! FKGL = 0.39 * (W/S) + 11.8 * (Y/W) - 15.59
//! ARI  = 4.71 * (L/W) + 0.5  * (W/S) - 21.43
//! ```
//!
//! with W, S, Y, L the corpus totals of words, sentences, syllables and
//! letters. Totals are summed sentence by sentence in input order.

use serde::Serialize;

use super::tokenize::tokenize;
use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReadabilityReport {
    pub fkgl: f64,
    pub ari: f64,
    pub word_total: usize,
    pub sentence_total: usize,
    pub syllable_total: usize,
    pub letter_total: usize,
}

/// `b - a` for each grade-level metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReadabilityDelta {
    pub fkgl: f64,
    pub ari: f64,
}

pub fn fkgl(words: usize, sentences: usize, syllables: usize) -> f64 {
    let (w, s, y) = (words as f64, sentences as f64, syllables as f64);
    0.39 * (w / s) + 11.8 * (y / w) - 15.59
}

pub fn ari(words: usize, sentences: usize, letters: usize) -> f64 {
    let (w, s, l) = (words as f64, sentences as f64, letters as f64);
    4.71 * (l / w) + 0.5 * (w / s) - 21.43
}

impl ReadabilityReport {
    /// Builds a report from already-summed totals.
    pub fn from_totals(
        word_total: usize,
        sentence_total: usize,
        syllable_total: usize,
        letter_total: usize,
    ) -> Result<Self, MetricsError> {
        if word_total == 0 {
            return Err(MetricsError::ZeroWords);
        }
        Ok(Self {
            fkgl: fkgl(word_total, sentence_total, syllable_total),
            ari: ari(word_total, sentence_total, letter_total),
            word_total,
            sentence_total,
            syllable_total,
            letter_total,
        })
    }
}

pub fn corpus_readability<S: AsRef<str>>(
    sentences: &[S],
) -> Result<ReadabilityReport, MetricsError> {
    if sentences.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let (mut w, mut s, mut y, mut l) = (0, 0, 0, 0);
    for text in sentences {
        let t = tokenize(text.as_ref());
        w += t.words.len();
        s += t.sentence_count;
        y += t.syllable_count;
        l += t.letter_count;
    }
    ReadabilityReport::from_totals(w, s, y, l)
}

pub fn delta_report(a: &ReadabilityReport, b: &ReadabilityReport) -> ReadabilityDelta {
    ReadabilityDelta {
        fkgl: b.fkgl - a.fkgl,
        ari: b.ari - a.ari,
    }
}
