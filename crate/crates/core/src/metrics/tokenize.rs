//! Word, letter, syllable and sentence counts feeding the readability formulas.

/// Counts extracted from one piece of text.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenizedSentence {
    pub words: Vec<String>,
    /// Alphanumeric characters across all words (apostrophes excluded).
    pub letter_count: usize,
    pub syllable_count: usize,
    /// Runs of terminal punctuation (`.`, `!`, `?`), at least 1.
    pub sentence_count: usize,
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Splits `text` into words: maximal runs of alphanumerics, with apostrophes
/// allowed only between two alphanumerics (`don't`, `O'Neil`).
pub fn words(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let inner_apostrophe = is_apostrophe(c)
            && !cur.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() || inner_apostrophe {
            cur.push(c);
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn sentence_runs(text: &str) -> usize {
    let mut runs = 0;
    let mut prev = false;
    for c in text.chars() {
        let t = is_terminal(c);
        if t && !prev {
            runs += 1;
        }
        prev = t;
    }
    runs.max(1)
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel-group syllable heuristic.
///
/// Counts maximal runs of `aeiouy` (case-insensitive). A final lone `e`
/// (the last group is exactly that `e` at the end of the word) is treated as
/// silent when the word has more than one group. Never returns less than 1.
pub fn count_syllables(word: &str) -> usize {
    let lower: Vec<char> = word.chars().flat_map(char::to_lowercase).collect();
    let mut groups = 0;
    let mut last_group_len = 0;
    let mut prev = false;
    for &c in &lower {
        let v = is_vowel(c);
        if v && !prev {
            groups += 1;
            last_group_len = 0;
        }
        if v {
            last_group_len += 1;
        }
        prev = v;
    }
    let silent_e = lower.last() == Some(&'e') && last_group_len == 1;
    if silent_e && groups > 1 {
        groups -= 1;
    }
    groups.max(1)
}

pub fn tokenize(text: &str) -> TokenizedSentence {
    let words = words(text);
    let letter_count = words
        .iter()
        .map(|w| w.chars().filter(|c| c.is_alphanumeric()).count())
        .sum();
    let syllable_count = words.iter().map(|w| count_syllables(w)).sum();
    TokenizedSentence {
        letter_count,
        syllable_count,
        sentence_count: sentence_runs(text),
        words,
    }
}
