//! SARI: Add / Keep / Delete n-gram scores of a system output against its
//! source and references.
//!
//! Tokens are whitespace-separated and compared code-point exact. For each
//! order n = 1..=4, with `R` references, source counts `s`, output counts `c`
//! and reference counts `r` summed over all references:
//!
//! * keep: `k = (s·R) ∧ (c·R)`, good `k ∧ r`, ideal `(s·R) ∧ r`.
//!   Precision averages `good/k` over the keys of `k`; recall averages
//!   `good/ideal` over the ideal keys. Scored as F1.
//! * delete: `d = (s·R) − (c·R)`, good `d − r`, ideal `(s·R) − r`.
//!   Precision only, averaged over the keys of `d`.
//! * add (sets): `a = c \ s`, good `a ∩ r`, ideal `r \ s`. Scored as F1.
//!
//! `∧` is the multiset minimum and `−` truncated subtraction. A precision or
//! recall whose denominator is zero is 1 when the matching ideal set is empty
//! and 0 otherwise. Each operation is averaged over the four orders and
//! scaled to 0..100; SARI is the mean of the three.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::MetricsError;

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SariScore {
    pub add: f64,
    pub keep: f64,
    pub del: f64,
    pub sari: f64,
}

impl SariScore {
    pub fn from_components(add: f64, keep: f64, del: f64) -> Self {
        Self {
            add,
            keep,
            del,
            sari: (add + keep + del) / 3.0,
        }
    }
}

type Counts<'a> = HashMap<&'a [&'a str], usize>;

fn ngrams<'a>(tokens: &'a [&'a str], n: usize) -> Counts<'a> {
    let mut out = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w).or_insert(0) += 1;
        }
    }
    out
}

fn ratio_or_vacuous(num: f64, denom: usize, ideal_empty: bool) -> f64 {
    if denom == 0 {
        if ideal_empty {
            1.0
        } else {
            0.0
        }
    } else {
        num / denom as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

struct OrderScores {
    keep: f64,
    del: f64,
    add: f64,
}

fn score_order(src: &Counts, out: &Counts, refs: &Counts, num_refs: usize) -> OrderScores {
    let get = |m: &Counts, k: &[&str]| m.get(k).copied().unwrap_or(0);

    let mut keep_p_sum = 0.0;
    let mut keep_r_sum = 0.0;
    let mut keep_keys = 0usize;
    let mut del_p_sum = 0.0;
    let mut del_keys = 0usize;
    let mut keep_ideal_keys = 0usize;
    let mut del_ideal_keys = 0usize;

    for (&gram, &sc) in src {
        let s_rep = sc * num_refs;
        let c_rep = get(out, gram) * num_refs;
        let r = get(refs, gram);

        let ideal_keep = s_rep.min(r);
        if ideal_keep > 0 {
            keep_ideal_keys += 1;
        }
        if s_rep > r {
            del_ideal_keys += 1;
        }

        let kept = s_rep.min(c_rep);
        if kept > 0 {
            keep_keys += 1;
            let good = kept.min(r);
            keep_p_sum += good as f64 / kept as f64;
            if good > 0 {
                keep_r_sum += good as f64 / ideal_keep as f64;
            }
        }

        let deleted = s_rep.saturating_sub(c_rep);
        if deleted > 0 {
            del_keys += 1;
            let good = deleted.saturating_sub(r);
            del_p_sum += good as f64 / deleted as f64;
        }
    }

    let keep_p = ratio_or_vacuous(keep_p_sum, keep_keys, keep_ideal_keys == 0);
    let keep_r = ratio_or_vacuous(keep_r_sum, keep_ideal_keys, true);
    let del_p = ratio_or_vacuous(del_p_sum, del_keys, del_ideal_keys == 0);

    let added: HashSet<_> = out.keys().filter(|g| !src.contains_key(*g)).collect();
    let add_ideal: HashSet<_> = refs.keys().filter(|g| !src.contains_key(*g)).collect();
    let add_good = added.intersection(&add_ideal).count();
    let add_p = ratio_or_vacuous(add_good as f64, added.len(), add_ideal.is_empty());
    let add_r = ratio_or_vacuous(add_good as f64, add_ideal.len(), true);

    OrderScores {
        keep: f1(keep_p, keep_r),
        del: del_p,
        add: f1(add_p, add_r),
    }
}

/// Sentence-level SARI of `output` given `source` and its references.
pub fn sari_sentence<S: AsRef<str>>(
    source: &str,
    output: &str,
    refs: &[S],
) -> Result<SariScore, MetricsError> {
    if refs.is_empty() {
        return Err(MetricsError::EmptyRefs);
    }
    let src_tok: Vec<&str> = source.split_whitespace().collect();
    let out_tok: Vec<&str> = output.split_whitespace().collect();
    let ref_tok: Vec<Vec<&str>> = refs
        .iter()
        .map(|r| r.as_ref().split_whitespace().collect())
        .collect();

    let (mut add, mut keep, mut del) = (0.0, 0.0, 0.0);
    for n in 1..=MAX_ORDER {
        let s = ngrams(&src_tok, n);
        let c = ngrams(&out_tok, n);
        let mut r: Counts = HashMap::new();
        for t in &ref_tok {
            for (g, k) in ngrams(t, n) {
                *r.entry(g).or_insert(0) += k;
            }
        }
        let o = score_order(&s, &c, &r, refs.len());
        add += o.add;
        keep += o.keep;
        del += o.del;
    }
    let scale = 100.0 / MAX_ORDER as f64;
    Ok(SariScore::from_components(
        add * scale,
        keep * scale,
        del * scale,
    ))
}

/// Mean of sentence-level scores, summed in index order.
pub fn sari_corpus<A, B, C>(
    sources: &[A],
    outputs: &[B],
    refs: &[Vec<C>],
) -> Result<SariScore, MetricsError>
where
    A: AsRef<str>,
    B: AsRef<str>,
    C: AsRef<str>,
{
    if sources.len() != outputs.len() || sources.len() != refs.len() {
        return Err(MetricsError::LengthMismatch {
            sources: sources.len(),
            outputs: outputs.len(),
            refs: refs.len(),
        });
    }
    if sources.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let (mut add, mut keep, mut del, mut sari) = (0.0, 0.0, 0.0, 0.0);
    for ((s, o), r) in sources.iter().zip(outputs).zip(refs) {
        let sc = sari_sentence(s.as_ref(), o.as_ref(), r)?;
        add += sc.add;
        keep += sc.keep;
        del += sc.del;
        sari += sc.sari;
    }
    let n = sources.len() as f64;
    Ok(SariScore {
        add: add / n,
        keep: keep / n,
        del: del / n,
        sari: sari / n,
    })
}
