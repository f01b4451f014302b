//! Sentence segmentation, tokenization and repeated-letter spelling correction.

use crate::lexicon::Recognizer;

/// Placeholder form given to URL tokens. It never matches a lexicon entry.
pub const URL_TOKEN: &str = "<url>";

/// Above this many doubled-letter runs only single collapses are searched.
const MAX_EXHAUSTIVE_RUNS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub raw: String,
    pub normalized: String,
    pub letters_removed: usize,
    pub is_punct_run: bool,
}

impl Token {
    fn punct(raw: &str) -> Self {
        Token {
            raw: raw.to_string(),
            normalized: raw.to_string(),
            letters_removed: 0,
            is_punct_run: true,
        }
    }

    fn word(raw: &str) -> Self {
        Token {
            raw: raw.to_string(),
            normalized: raw.to_lowercase(),
            letters_removed: 0,
            is_punct_run: false,
        }
    }

    pub fn is_url(&self) -> bool {
        self.normalized == URL_TOKEN
    }

    /// Hashtags and @-mentions are kept verbatim and never spell-corrected.
    pub fn is_tag(&self) -> bool {
        !self.is_punct_run && (self.raw.starts_with('#') || self.raw.starts_with('@'))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenizedText {
    pub sentences: Vec<Vec<Token>>,
}

impl TokenizedText {
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flatten()
    }
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}')
}

fn is_url(chunk: &str) -> bool {
    let lower = chunk.to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

/// A character that forms part of a word rather than a punctuation run.
fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Split text into sentences on runs of `.`, `!`, `?` and on newlines.
///
/// The terminator run stays with the sentence it ends. URLs are never split.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    let mut chunk_start = true;
    let mut in_url = false;

    let push = |from: usize, to: usize, out: &mut Vec<String>| {
        let s = text[from..to].trim();
        if !s.is_empty() {
            out.push(s.to_string());
        }
    };

    while let Some((i, c)) = chars.next() {
        if c.is_whitespace() {
            chunk_start = true;
            in_url = false;
            if c == '\n' {
                push(start, i, &mut sentences);
                start = i + c.len_utf8();
            }
            continue;
        }
        if chunk_start {
            chunk_start = false;
            let end = text[i..]
                .find(char::is_whitespace)
                .map_or(text.len(), |n| i + n);
            in_url = is_url(&text[i..end]);
        }
        if in_url || !is_terminator(c) {
            continue;
        }
        let mut end = i + c.len_utf8();
        while let Some(&(j, d)) = chars.peek() {
            if is_terminator(d) {
                end = j + d.len_utf8();
                chars.next();
            } else {
                break;
            }
        }
        push(start, end, &mut sentences);
        start = end;
    }
    push(start, text.len(), &mut sentences);
    sentences
}

/// Split one sentence into tokens (before spelling correction).
///
/// Whitespace separates chunks; inside a chunk maximal punctuation runs become
/// their own tokens so `:)` and `!!!` survive as units. An apostrophe between
/// two word characters stays inside the word.
pub fn tokenize(sentence: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    for chunk in sentence.split_whitespace() {
        if is_url(chunk) {
            tokens.push(Token {
                raw: chunk.to_string(),
                normalized: URL_TOKEN.to_string(),
                letters_removed: 0,
                is_punct_run: false,
            });
            continue;
        }
        tokenize_chunk(chunk, &mut tokens);
    }
    tokens
}

fn tokenize_chunk(chunk: &str, out: &mut Vec<Token>) {
    let chars: Vec<(usize, char)> = chunk.char_indices().collect();
    let byte_at = |k: usize| chars.get(k).map_or(chunk.len(), |&(b, _)| b);
    let mut k = 0;
    while k < chars.len() {
        let start = k;
        let c = chars[k].1;
        // '#' or '@' directly followed by a word character opens a tag
        let opens_tag = (c == '#' || c == '@')
            && chars.get(k + 1).is_some_and(|&(_, d)| is_word_char(d));
        if opens_tag || is_word_char(c) {
            k += 1;
            while k < chars.len() {
                let d = chars[k].1;
                let inner_apostrophe = is_apostrophe(d)
                    && chars.get(k + 1).is_some_and(|&(_, e)| is_word_char(e));
                if is_word_char(d) {
                    k += 1;
                } else if inner_apostrophe {
                    k += 2;
                } else {
                    break;
                }
            }
            out.push(Token::word(&chunk[byte_at(start)..byte_at(k)]));
        } else {
            k += 1;
            while k < chars.len() {
                let d = chars[k].1;
                let next_opens_tag = (d == '#' || d == '@')
                    && chars.get(k + 1).is_some_and(|&(_, e)| is_word_char(e));
                if is_word_char(d) || next_opens_tag {
                    break;
                }
                k += 1;
            }
            out.push(Token::punct(&chunk[byte_at(start)..byte_at(k)]));
        }
    }
}

/// Letter runs of a lowercase word as (char, run length).
fn runs(word: &str) -> Vec<(char, usize)> {
    let mut out: Vec<(char, usize)> = Vec::new();
    for c in word.chars() {
        match out.last_mut() {
            Some((p, n)) if *p == c && c.is_alphabetic() => *n += 1,
            _ => out.push((c, 1)),
        }
    }
    out
}

fn render(runs: &[(char, usize)]) -> String {
    runs.iter()
        .flat_map(|&(c, n)| std::iter::repeat_n(c, n))
        .collect()
}

/// Delete repeated letters to reach a recognised word.
///
/// Runs longer than two are first capped at two. If that word is not
/// recognised, doubled runs are collapsed to one letter: fewer collapses are
/// tried before more, and within the same count the leftmost choices come
/// first. The first recognised candidate wins; when none is, the capped form
/// is returned. Returns the corrected form and the number of characters
/// deleted from the lowercased input.
pub fn correct_spelling<R: Recognizer + ?Sized>(raw: &str, recognised: &R) -> (String, usize) {
    let lower = raw.to_lowercase();
    let original_len = lower.chars().count();
    let mut capped = runs(&lower);
    for run in &mut capped {
        if run.0.is_alphabetic() {
            run.1 = run.1.min(2);
        }
    }
    let capped_word = render(&capped);
    let removed = |w: &str| original_len - w.chars().count();
    if recognised.recognises(&capped_word) {
        let r = removed(&capped_word);
        return (capped_word, r);
    }

    let doubles: Vec<usize> = capped
        .iter()
        .enumerate()
        .filter(|(_, r)| r.1 == 2)
        .map(|(i, _)| i)
        .collect();
    let max_collapses = if doubles.len() > MAX_EXHAUSTIVE_RUNS {
        1
    } else {
        doubles.len()
    };
    for size in 1..=max_collapses {
        let mut found = None;
        for_each_combination(doubles.len(), size, &mut |combo| {
            let mut candidate = capped.clone();
            for &c in combo {
                candidate[doubles[c]].1 = 1;
            }
            let word = render(&candidate);
            if recognised.recognises(&word) {
                found = Some(word);
                true
            } else {
                false
            }
        });
        if let Some(word) = found {
            let r = removed(&word);
            return (word, r);
        }
    }
    let r = removed(&capped_word);
    (capped_word, r)
}

/// Visit k-combinations of `0..n` in lexicographic order until `visit` returns true.
fn for_each_combination(n: usize, k: usize, visit: &mut dyn FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if visit(&idx) {
            return;
        }
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Segment, tokenize and spell-correct a text.
pub fn process<R: Recognizer + ?Sized>(text: &str, recognised: &R) -> TokenizedText {
    let sentences = segment_sentences(text)
        .iter()
        .map(|s| {
            let mut tokens = tokenize(s);
            for t in &mut tokens {
                if !t.is_punct_run && !t.is_url() && !t.is_tag() {
                    let (normalized, removed) = correct_spelling(&t.raw, recognised);
                    t.normalized = normalized;
                    t.letters_removed = removed;
                }
            }
            tokens
        })
        .filter(|tokens| !tokens.is_empty())
        .collect();
    TokenizedText { sentences }
}
