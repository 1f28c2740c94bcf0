//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use embsimp::corpus::{Lang, ParallelCorpus, Sentence, SentencePair};
use embsimp::simplifier::MlpParams;
use embsimp::EmbeddingMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

pub fn eng() -> Lang {
    Lang::new("eng_Latn")
}

pub fn sentence(t: &str) -> Sentence {
    Sentence::new(t, eng()).unwrap()
}

pub fn matrix(rows: usize, dim: usize, seed: u64) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * dim)
        .map(|_| rng.gen_range(-1.0f32..1.0))
        .collect();
    EmbeddingMatrix::from_flat(data, dim, eng()).unwrap()
}

pub struct AffineTask {
    pub train_x: EmbeddingMatrix,
    pub train_y: EmbeddingMatrix,
    pub val_x: EmbeddingMatrix,
    pub val_y: EmbeddingMatrix,
}

/// `y = A x + b + N(0, sigma²)` with `x` uniform on the unit sphere, like a
/// normalized sentence embedding. `A` has entries `U(-1,1)/√dim`, `b` entries
/// `U(-0.1, 0.1)`.
pub fn affine_task(dim: usize, train: usize, val: usize, sigma: f64, seed: u64) -> AffineTask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (dim as f64).sqrt();
    let a: Vec<f64> = (0..dim * dim)
        .map(|_| rng.gen_range(-1.0..1.0) / scale)
        .collect();
    let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.1..0.1)).collect();
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut draw = |n: usize| {
        let mut xs = Vec::with_capacity(n * dim);
        let mut ys = Vec::with_capacity(n * dim);
        for _ in 0..n {
            let mut x: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
            for i in 0..dim {
                let y: f64 = b[i] + (0..dim).map(|j| a[i * dim + j] * x[j]).sum::<f64>();
                ys.push((y + noise.sample(&mut rng)) as f32);
            }
            xs.extend(x.iter().map(|&v| v as f32));
        }
        (
            EmbeddingMatrix::from_flat(xs, dim, eng()).unwrap(),
            EmbeddingMatrix::from_flat(ys, dim, eng()).unwrap(),
        )
    };
    let (train_x, train_y) = draw(train);
    let (val_x, val_y) = draw(val);
    AffineTask {
        train_x,
        train_y,
        val_x,
        val_y,
    }
}

const ADJ: &[&str] = &[
    "ancient",
    "luminous",
    "meticulous",
    "cantankerous",
    "gregarious",
    "indefatigable",
    "perspicacious",
    "ostentatious",
    "recalcitrant",
    "magnanimous",
    "obstreperous",
    "surreptitious",
];
const NOUN: &[&str] = &[
    "archivist",
    "cartographer",
    "veterinarian",
    "philanthropist",
    "horticulturist",
    "magistrate",
    "apothecary",
    "locksmith",
    "astronomer",
    "choreographer",
    "lighthouse keeper",
    "sommelier",
];
const VERB: &[(&str, &str)] = &[
    ("scrutinized", "looked at"),
    ("commandeered", "took"),
    ("relinquished", "gave up"),
    ("disseminated", "spread"),
    ("fabricated", "made"),
    ("procured", "got"),
    ("ameliorated", "fixed"),
    ("expedited", "sped up"),
];
const OBJ: &[(&str, &str)] = &[
    ("the voluminous manuscript", "the big book"),
    ("an antiquated telescope", "an old telescope"),
    ("the municipal ordinance", "the town rule"),
    ("a labyrinthine itinerary", "a twisty plan"),
    ("the effervescent beverage", "the fizzy drink"),
    ("an exorbitant invoice", "a huge bill"),
    ("the dilapidated greenhouse", "the broken greenhouse"),
    ("a cacophonous instrument", "a loud instrument"),
];

/// `n` distinct complex/simple pairs built from word templates: the complex
/// side carries an adjective and a long verb, the simple side drops the
/// adjective and uses a plain verb and object.
pub fn synthetic_corpus(n: usize, seed: u64) -> ParallelCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::new();
    while pairs.len() < n {
        let adj = ADJ.choose(&mut rng).unwrap();
        let noun = NOUN.choose(&mut rng).unwrap();
        let (v, sv) = VERB.choose(&mut rng).unwrap();
        let (o, so) = OBJ.choose(&mut rng).unwrap();
        let complex = format!("The {adj} {noun} {v} {o}.");
        if !seen.insert(complex.clone()) {
            continue;
        }
        let simple = format!("The {noun} {sv} {so}.");
        pairs.push(SentencePair::new(sentence(&complex), sentence(&simple)).unwrap());
    }
    ParallelCorpus::new("synthetic", pairs).unwrap()
}

/// Sentence-level SARI by explicit enumeration. Every n-gram is a `Vec` of
/// tokens, multisets are lists scanned linearly, and the formulas follow the
/// metric definition term by term.
pub fn sari_oracle(source: &str, output: &str, refs: &[&str]) -> (f64, f64, f64, f64) {
    fn grams(text: &str, n: usize) -> Vec<Vec<String>> {
        let t: Vec<String> = text.split_whitespace().map(str::to_string).collect();
        if t.len() < n {
            return vec![];
        }
        (0..=t.len() - n).map(|i| t[i..i + n].to_vec()).collect()
    }
    fn count(list: &[Vec<String>], g: &[String]) -> f64 {
        list.iter().filter(|x| x.as_slice() == g).count() as f64
    }
    fn uniq(list: &[Vec<String>]) -> Vec<Vec<String>> {
        let mut u: Vec<Vec<String>> = Vec::new();
        for g in list {
            if !u.contains(g) {
                u.push(g.clone());
            }
        }
        u
    }
    fn vac(num: f64, den: f64, ideal_empty: bool) -> f64 {
        if den == 0.0 {
            if ideal_empty {
                1.0
            } else {
                0.0
            }
        } else {
            num / den
        }
    }
    fn f1(p: f64, r: f64) -> f64 {
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    let nr = refs.len() as f64;
    let (mut add, mut keep, mut del) = (0.0, 0.0, 0.0);
    for n in 1..=4 {
        let s = grams(source, n);
        let o = grams(output, n);
        let r: Vec<Vec<String>> = refs.iter().flat_map(|t| grams(t, n)).collect();
        let su = uniq(&s);

        // Keep: rescaled source and output counts against summed ref counts.
        let (mut kp, mut kp_n, mut kr, mut kr_n) = (0.0, 0.0, 0.0, 0.0);
        for g in &su {
            let sc = count(&s, g) * nr;
            let oc = count(&o, g) * nr;
            let rc = count(&r, g);
            let kept = sc.min(oc);
            let ideal = sc.min(rc);
            if kept > 0.0 {
                kp += kept.min(rc) / kept;
                kp_n += 1.0;
            }
            if ideal > 0.0 {
                kr += kept.min(rc) / ideal;
                kr_n += 1.0;
            }
        }
        keep += f1(vac(kp, kp_n, kr_n == 0.0), vac(kr, kr_n, true));

        // Delete: precision over grams the output dropped.
        let (mut dp, mut dp_n, mut d_ideal) = (0.0, 0.0, 0.0);
        for g in &su {
            let sc = count(&s, g) * nr;
            let oc = count(&o, g) * nr;
            let rc = count(&r, g);
            let dropped = (sc - oc).max(0.0);
            if dropped > 0.0 {
                dp += (dropped - rc).max(0.0) / dropped;
                dp_n += 1.0;
            }
            if sc - rc > 0.0 {
                d_ideal += 1.0;
            }
        }
        del += vac(dp, dp_n, d_ideal == 0.0);

        // Add: sets of new grams.
        let added: Vec<_> = uniq(&o)
            .into_iter()
            .filter(|g| count(&s, g) == 0.0)
            .collect();
        let ideal: Vec<_> = uniq(&r)
            .into_iter()
            .filter(|g| count(&s, g) == 0.0)
            .collect();
        let good = added.iter().filter(|g| ideal.contains(g)).count() as f64;
        let p = vac(good, added.len() as f64, ideal.is_empty());
        let rr = vac(good, ideal.len() as f64, true);
        add += f1(p, rr);
    }
    let (a, k, d) = (add * 25.0, keep * 25.0, del * 25.0);
    (a, k, d, (a + k + d) / 3.0)
}

/// Per-element MSE of `W2·relu(W1·x + b1) + b2`, computed with plain loops.
pub fn oracle_forward(p: &MlpParams, x: &[f64]) -> Vec<f64> {
    let (h, d) = p.w1.dim();
    let hid: Vec<f64> = (0..h)
        .map(|k| ((0..d).map(|j| p.w1[[k, j]] * x[j]).sum::<f64>() + p.b1[k]).max(0.0))
        .collect();
    (0..d)
        .map(|i| (0..h).map(|k| p.w2[[i, k]] * hid[k]).sum::<f64>() + p.b2[i])
        .collect()
}

pub fn oracle_mse(p: &MlpParams, x: &EmbeddingMatrix, y: &EmbeddingMatrix) -> f64 {
    let mut acc = 0.0;
    for r in 0..x.rows() {
        let xr: Vec<f64> = x.row(r).iter().map(|&v| v as f64).collect();
        let out = oracle_forward(p, &xr);
        for (o, &t) in out.iter().zip(y.row(r)) {
            acc += (o - t as f64).powi(2);
        }
    }
    acc / (x.rows() * x.dim()) as f64
}

/// Random words over a small alphabet, for SARI fuzzing.
pub fn tiny_sentence(
    rng: &mut impl Rng,
    vocab: usize,
    max_len: usize,
    allow_empty: bool,
) -> String {
    let lo = if allow_empty { 0 } else { 1 };
    let len = rng.gen_range(lo..=max_len);
    (0..len)
        .map(|_| ((b'a' + rng.gen_range(0..vocab as u8)) as char).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}
