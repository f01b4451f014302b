//! Lexical resources: affect terms, boosters, negators, idioms, emoticons and
//! the dictionary of recognised words.
//!
//! A lexicon lives on disk as a directory of seven small UTF-8 files:
//!
//! | file               | columns                               |
//! |--------------------|---------------------------------------|
//! | `stress_terms.tsv` | `pattern<TAB>strength`                |
//! | `relax_terms.tsv`  | `pattern<TAB>strength`                |
//! | `boosters.tsv`     | `word<TAB>delta`                      |
//! | `negators.txt`     | one word per line                     |
//! | `idioms.tsv`       | `phrase<TAB>kind<TAB>strength`        |
//! | `emoticons.tsv`    | `glyph<TAB>kind<TAB>strength`         |
//! | `dictionary.txt`   | one word per line                     |
//!
//! Lines starting with `#` are comments. A term pattern may end in a single
//! `*`, which matches any suffix (including the empty one).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

pub const STRESS_FILE: &str = "stress_terms.tsv";
pub const RELAX_FILE: &str = "relax_terms.tsv";
pub const BOOSTER_FILE: &str = "boosters.tsv";
pub const NEGATOR_FILE: &str = "negators.txt";
pub const IDIOM_FILE: &str = "idioms.tsv";
pub const EMOTICON_FILE: &str = "emoticons.tsv";
pub const DICTIONARY_FILE: &str = "dictionary.txt";

pub const LEXICON_FILES: [&str; 7] = [
    STRESS_FILE,
    RELAX_FILE,
    BOOSTER_FILE,
    NEGATOR_FILE,
    IDIOM_FILE,
    EMOTICON_FILE,
    DICTIONARY_FILE,
];

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("missing lexicon resource {}", .0.display())]
    MissingResource(PathBuf),
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{file}:{line}: duplicate entry `{pattern}`")]
    DuplicateTerm {
        file: String,
        line: usize,
        pattern: String,
    },
    #[error("no {kind} term with pattern `{pattern}`")]
    UnknownTerm { kind: TermKind, pattern: String },
    #[error("strength {0} is outside 1..=5")]
    Range(i64),
    #[error("invalid pattern `{0}`")]
    InvalidPattern(String),
    #[error("failed to read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("failed to write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
}

/// Which affect scale a lexicon term feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Stress,
    Relaxation,
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermKind::Stress => f.write_str("stress"),
            TermKind::Relaxation => f.write_str("relax"),
        }
    }
}

/// Kind of an idiom or emoticon; these may also be explicitly neutral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhraseKind {
    Stress,
    Relaxation,
    Neutral,
}

impl PhraseKind {
    pub fn term_kind(self) -> Option<TermKind> {
        match self {
            PhraseKind::Stress => Some(TermKind::Stress),
            PhraseKind::Relaxation => Some(TermKind::Relaxation),
            PhraseKind::Neutral => None,
        }
    }
}

impl fmt::Display for PhraseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhraseKind::Stress => f.write_str("stress"),
            PhraseKind::Relaxation => f.write_str("relax"),
            PhraseKind::Neutral => f.write_str("neutral"),
        }
    }
}

impl FromStr for PhraseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stress" => Ok(PhraseKind::Stress),
            "relax" | "relaxation" => Ok(PhraseKind::Relaxation),
            "neutral" => Ok(PhraseKind::Neutral),
            other => Err(format!("unknown kind `{other}` (expected stress, relax or neutral)")),
        }
    }
}

/// Term strength magnitude, always in `1..=5`. The sign is applied at scoring
/// time (stress is reported negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Strength(u8);

impl Strength {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 5;

    pub fn new(value: i64) -> Result<Self, LexiconError> {
        if (Self::MIN as i64..=Self::MAX as i64).contains(&value) {
            Ok(Strength(value as u8))
        } else {
            Err(LexiconError::Range(value))
        }
    }

    /// Clamp an arbitrary adjusted strength into range.
    pub fn clamped(value: i32) -> Self {
        Strength(value.clamp(Self::MIN as i32, Self::MAX as i32) as u8)
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl fmt::Display for Strength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LexiconEntry {
    pub pattern: String,
    pub kind: TermKind,
    pub strength: Strength,
}

impl LexiconEntry {
    pub fn new(pattern: &str, kind: TermKind, strength: Strength) -> Result<Self, LexiconError> {
        let pattern = normalize_pattern(pattern)?;
        Ok(LexiconEntry {
            pattern,
            kind,
            strength,
        })
    }

    pub fn is_wildcard(&self) -> bool {
        self.pattern.ends_with('*')
    }

    /// The pattern without its trailing wildcard marker.
    pub fn stem(&self) -> &str {
        self.pattern.strip_suffix('*').unwrap_or(&self.pattern)
    }

    pub fn matches(&self, token: &str) -> bool {
        if self.is_wildcard() {
            token.starts_with(self.stem())
        } else {
            token == self.pattern
        }
    }
}

fn normalize_pattern(raw: &str) -> Result<String, LexiconError> {
    let pattern = raw.trim().to_lowercase();
    let stem = pattern.strip_suffix('*').unwrap_or(&pattern);
    if stem.is_empty() || stem.contains('*') || pattern.chars().any(char::is_whitespace) {
        return Err(LexiconError::InvalidPattern(raw.to_string()));
    }
    Ok(pattern)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoosterEntry {
    pub word: String,
    pub delta: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdiomEntry {
    pub tokens: Vec<String>,
    pub kind: PhraseKind,
    pub strength: Strength,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EmoticonEntry {
    pub glyph: String,
    pub kind: PhraseKind,
    pub strength: Strength,
}

/// Reference lookup over a plain slice of entries: an exact pattern wins,
/// otherwise the wildcard with the longest stem.
pub fn lookup<'a>(token: &str, entries: &'a [LexiconEntry]) -> Option<(&'a LexiconEntry, u8)> {
    if let Some(e) = entries
        .iter()
        .find(|e| !e.is_wildcard() && e.pattern == token)
    {
        return Some((e, e.strength.get()));
    }
    entries
        .iter()
        .filter(|e| e.is_wildcard() && e.matches(token))
        .max_by(|a, b| {
            a.stem()
                .len()
                .cmp(&b.stem().len())
                .then_with(|| b.pattern.cmp(&a.pattern))
        })
        .map(|e| (e, e.strength.get()))
}

/// One list of affect terms, kept sorted by pattern with indexes for fast lookup.
#[derive(Debug, Clone)]
pub struct TermList {
    kind: TermKind,
    entries: Vec<LexiconEntry>,
    exact: HashMap<String, usize>,
    // (stem, index) ordered by descending stem length, then pattern
    wildcards: Vec<(String, usize)>,
}

impl PartialEq for TermList {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.entries == other.entries
    }
}

impl Eq for TermList {}

impl TermList {
    pub fn new(kind: TermKind) -> Self {
        TermList {
            kind,
            entries: Vec::new(),
            exact: HashMap::new(),
            wildcards: Vec::new(),
        }
    }

    /// Build from `(pattern, strength)` pairs; fails on duplicates.
    pub fn from_pairs<'a, I>(kind: TermKind, pairs: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (&'a str, u8)>,
    {
        let mut entries = Vec::new();
        for (pattern, strength) in pairs {
            entries.push(LexiconEntry::new(pattern, kind, Strength::new(strength as i64)?)?);
        }
        Self::from_entries(kind, entries).map_err(|(pattern, _)| LexiconError::DuplicateTerm {
            file: "<memory>".into(),
            line: 0,
            pattern,
        })
    }

    /// Returns the duplicated pattern and its position on failure.
    fn from_entries(
        kind: TermKind,
        entries: Vec<LexiconEntry>,
    ) -> Result<Self, (String, usize)> {
        let mut seen = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if seen.insert(e.pattern.clone(), i).is_some() {
                return Err((e.pattern.clone(), i));
            }
        }
        let mut entries = entries;
        entries.sort_by(|a, b| a.pattern.cmp(&b.pattern));
        let mut list = TermList::new(kind);
        list.entries = entries;
        list.reindex();
        Ok(list)
    }

    fn reindex(&mut self) {
        self.exact.clear();
        self.wildcards.clear();
        for (i, e) in self.entries.iter().enumerate() {
            if e.is_wildcard() {
                self.wildcards.push((e.stem().to_string(), i));
            } else {
                self.exact.insert(e.pattern.clone(), i);
            }
        }
        let entries = &self.entries;
        self.wildcards.sort_by(|a, b| {
            b.0.len()
                .cmp(&a.0.len())
                .then_with(|| entries[a.1].pattern.cmp(&entries[b.1].pattern))
        });
    }

    pub fn kind(&self) -> TermKind {
        self.kind
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> &LexiconEntry {
        &self.entries[index]
    }

    pub fn position(&self, pattern: &str) -> Option<usize> {
        self.entries
            .binary_search_by(|e| e.pattern.as_str().cmp(pattern))
            .ok()
    }

    /// Index of the entry matching `token`, if any.
    pub fn lookup_index(&self, token: &str) -> Option<usize> {
        if let Some(&i) = self.exact.get(token) {
            return Some(i);
        }
        self.wildcards
            .iter()
            .find(|(stem, _)| token.starts_with(stem.as_str()))
            .map(|&(_, i)| i)
    }

    pub fn lookup(&self, token: &str) -> Option<(&LexiconEntry, u8)> {
        self.lookup_index(token).map(|i| {
            let e = &self.entries[i];
            (e, e.strength.get())
        })
    }

    fn set(&mut self, index: usize, strength: Strength) {
        self.entries[index].strength = strength;
    }
}

/// The full set of lexical resources used by the scorer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconSet {
    pub stress_terms: TermList,
    pub relax_terms: TermList,
    pub boosters: BTreeMap<String, i8>,
    pub negators: BTreeSet<String>,
    pub idioms: Vec<IdiomEntry>,
    pub emoticons: Vec<EmoticonEntry>,
    pub dictionary: BTreeSet<String>,
}

impl Default for LexiconSet {
    fn default() -> Self {
        LexiconSet {
            stress_terms: TermList::new(TermKind::Stress),
            relax_terms: TermList::new(TermKind::Relaxation),
            boosters: BTreeMap::new(),
            negators: BTreeSet::new(),
            idioms: Vec::new(),
            emoticons: Vec::new(),
            dictionary: BTreeSet::new(),
        }
    }
}

impl LexiconSet {
    pub fn terms(&self, kind: TermKind) -> &TermList {
        match kind {
            TermKind::Stress => &self.stress_terms,
            TermKind::Relaxation => &self.relax_terms,
        }
    }

    fn terms_mut(&mut self, kind: TermKind) -> &mut TermList {
        match kind {
            TermKind::Stress => &mut self.stress_terms,
            TermKind::Relaxation => &mut self.relax_terms,
        }
    }

    /// Restores the invariant that every non-wildcard pattern is a dictionary word
    /// and keeps idioms and emoticons in canonical order.
    pub fn canonicalize(&mut self) {
        for list in [&self.stress_terms, &self.relax_terms] {
            for e in list.entries() {
                if !e.is_wildcard() {
                    self.dictionary.insert(e.pattern.clone());
                }
            }
        }
        self.idioms.sort();
        self.idioms.dedup_by(|a, b| a.tokens == b.tokens);
        self.emoticons.sort();
        self.emoticons.dedup_by(|a, b| a.glyph == b.glyph);
    }

    /// Lookup against the named term list.
    pub fn lookup(&self, kind: TermKind, token: &str) -> Option<(&LexiconEntry, u8)> {
        self.terms(kind).lookup(token)
    }

    pub fn booster_delta(&self, word: &str) -> Option<i8> {
        self.boosters.get(word).copied()
    }

    pub fn is_negator(&self, word: &str) -> bool {
        self.negators.contains(word)
    }

    /// Returns a copy with one term's strength changed; `self` is untouched.
    pub fn set_strength(
        &self,
        kind: TermKind,
        pattern: &str,
        strength: i64,
    ) -> Result<LexiconSet, LexiconError> {
        let strength = Strength::new(strength)?;
        let index = self
            .terms(kind)
            .position(pattern)
            .ok_or_else(|| LexiconError::UnknownTerm {
                kind,
                pattern: pattern.to_string(),
            })?;
        let mut next = self.clone();
        next.terms_mut(kind).set(index, strength);
        Ok(next)
    }

    /// Words the spelling corrector may aim for.
    pub fn recognised(&self) -> Recognised {
        let mut words: BTreeSet<String> = self.dictionary.clone();
        let mut stems = BTreeSet::new();
        for list in [&self.stress_terms, &self.relax_terms] {
            for e in list.entries() {
                if e.is_wildcard() {
                    stems.insert(e.stem().to_string());
                } else {
                    words.insert(e.pattern.clone());
                }
            }
        }
        words.extend(self.boosters.keys().cloned());
        words.extend(self.negators.iter().cloned());
        for idiom in &self.idioms {
            words.extend(idiom.tokens.iter().cloned());
        }
        Recognised {
            words: words.into_iter().collect(),
            stems: stems.into_iter().collect(),
        }
    }
}

/// Anything that can tell whether a lowercase word is known.
pub trait Recognizer {
    fn recognises(&self, word: &str) -> bool;
}

impl Recognizer for std::collections::HashSet<String> {
    fn recognises(&self, word: &str) -> bool {
        self.contains(word)
    }
}

impl Recognizer for BTreeSet<String> {
    fn recognises(&self, word: &str) -> bool {
        self.contains(word)
    }
}

/// Recognised words: plain dictionary words plus wildcard stems.
#[derive(Debug, Clone, Default)]
pub struct Recognised {
    words: std::collections::HashSet<String>,
    stems: Vec<String>,
}

impl Recognizer for Recognised {
    fn recognises(&self, word: &str) -> bool {
        self.words.contains(word) || self.stems.iter().any(|s| word.starts_with(s.as_str()))
    }
}

struct DataLine<'a> {
    number: usize,
    text: &'a str,
}

fn data_lines(content: &str) -> impl Iterator<Item = DataLine<'_>> {
    content.lines().enumerate().filter_map(|(i, line)| {
        let text = line.trim_end_matches('\r');
        if text.trim().is_empty() || text.starts_with('#') {
            None
        } else {
            Some(DataLine { number: i + 1, text })
        }
    })
}

fn read_resource(dir: &Path, name: &str) -> Result<String, LexiconError> {
    let path = dir.join(name);
    match fs::read_to_string(&path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Err(LexiconError::MissingResource(path)),
        Err(source) => Err(LexiconError::Read { path, source }),
    }
}

fn parse_error(file: &str, line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Parse {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn split_columns<'a>(
    file: &str,
    line: &DataLine<'a>,
    expected: usize,
) -> Result<Vec<&'a str>, LexiconError> {
    let cols: Vec<&str> = line.text.split('\t').collect();
    if cols.len() != expected {
        return Err(parse_error(
            file,
            line.number,
            format!("expected {expected} tab-separated columns, found {}", cols.len()),
        ));
    }
    Ok(cols)
}

fn parse_strength(file: &str, line: usize, raw: &str) -> Result<Strength, LexiconError> {
    let value: i64 = raw
        .trim()
        .parse()
        .map_err(|_| parse_error(file, line, format!("strength `{raw}` is not an integer")))?;
    Strength::new(value)
        .map_err(|_| parse_error(file, line, format!("strength {value} is outside 1..=5")))
}

fn parse_terms(file: &str, kind: TermKind, content: &str) -> Result<TermList, LexiconError> {
    let mut entries = Vec::new();
    let mut lines = Vec::new();
    for line in data_lines(content) {
        let cols = split_columns(file, &line, 2)?;
        let strength = parse_strength(file, line.number, cols[1])?;
        let entry = LexiconEntry::new(cols[0], kind, strength)
            .map_err(|e| parse_error(file, line.number, e.to_string()))?;
        entries.push(entry);
        lines.push(line.number);
    }
    TermList::from_entries(kind, entries).map_err(|(pattern, i)| LexiconError::DuplicateTerm {
        file: file.to_string(),
        line: lines[i],
        pattern,
    })
}

fn parse_words(file: &str, content: &str) -> Result<BTreeSet<String>, LexiconError> {
    let mut words = BTreeSet::new();
    for line in data_lines(content) {
        let word = line.text.trim().to_lowercase();
        if word.chars().any(char::is_whitespace) {
            return Err(parse_error(file, line.number, "expected a single word"));
        }
        words.insert(word);
    }
    Ok(words)
}

/// Load and validate a lexicon directory.
pub fn load_lexicon_set(dir: impl AsRef<Path>) -> Result<LexiconSet, LexiconError> {
    let dir = dir.as_ref();
    let contents: Vec<String> = LEXICON_FILES
        .iter()
        .map(|name| read_resource(dir, name))
        .collect::<Result<_, _>>()?;

    let stress_terms = parse_terms(STRESS_FILE, TermKind::Stress, &contents[0])?;
    let relax_terms = parse_terms(RELAX_FILE, TermKind::Relaxation, &contents[1])?;

    let mut boosters = BTreeMap::new();
    for line in data_lines(&contents[2]) {
        let cols = split_columns(BOOSTER_FILE, &line, 2)?;
        let word = cols[0].trim().to_lowercase();
        let delta: i8 = cols[1].trim().trim_start_matches('+').parse().map_err(|_| {
            parse_error(BOOSTER_FILE, line.number, format!("delta `{}` is not an integer", cols[1]))
        })?;
        if delta == 0 || !(-2..=2).contains(&delta) {
            return Err(parse_error(
                BOOSTER_FILE,
                line.number,
                format!("delta {delta} must be one of -2, -1, +1, +2"),
            ));
        }
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(parse_error(BOOSTER_FILE, line.number, "expected a single word"));
        }
        if boosters.insert(word.clone(), delta).is_some() {
            return Err(LexiconError::DuplicateTerm {
                file: BOOSTER_FILE.into(),
                line: line.number,
                pattern: word,
            });
        }
    }

    let negators = parse_words(NEGATOR_FILE, &contents[3])?;

    let mut idioms = Vec::new();
    let mut idiom_seen = BTreeSet::new();
    for line in data_lines(&contents[4]) {
        let cols = split_columns(IDIOM_FILE, &line, 3)?;
        let tokens: Vec<String> = cols[0].split_whitespace().map(str::to_lowercase).collect();
        if tokens.len() < 2 {
            return Err(parse_error(IDIOM_FILE, line.number, "an idiom needs at least two words"));
        }
        let kind: PhraseKind = cols[1]
            .parse()
            .map_err(|m: String| parse_error(IDIOM_FILE, line.number, m))?;
        let strength = parse_strength(IDIOM_FILE, line.number, cols[2])?;
        if !idiom_seen.insert(tokens.clone()) {
            return Err(LexiconError::DuplicateTerm {
                file: IDIOM_FILE.into(),
                line: line.number,
                pattern: tokens.join(" "),
            });
        }
        idioms.push(IdiomEntry {
            tokens,
            kind,
            strength,
        });
    }

    let mut emoticons = Vec::new();
    let mut glyph_seen = BTreeSet::new();
    for line in data_lines(&contents[5]) {
        let cols = split_columns(EMOTICON_FILE, &line, 3)?;
        let glyph = cols[0].trim().to_string();
        if glyph.is_empty() {
            return Err(parse_error(EMOTICON_FILE, line.number, "empty glyph"));
        }
        let kind: PhraseKind = cols[1]
            .parse()
            .map_err(|m: String| parse_error(EMOTICON_FILE, line.number, m))?;
        let strength = parse_strength(EMOTICON_FILE, line.number, cols[2])?;
        if !glyph_seen.insert(glyph.clone()) {
            return Err(LexiconError::DuplicateTerm {
                file: EMOTICON_FILE.into(),
                line: line.number,
                pattern: glyph,
            });
        }
        emoticons.push(EmoticonEntry {
            glyph,
            kind,
            strength,
        });
    }

    let dictionary = parse_words(DICTIONARY_FILE, &contents[6])?;

    let mut set = LexiconSet {
        stress_terms,
        relax_terms,
        boosters,
        negators,
        idioms,
        emoticons,
        dictionary,
    };
    set.canonicalize();
    Ok(set)
}

fn write_resource(dir: &Path, name: &str, body: String) -> Result<(), LexiconError> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|source| LexiconError::Write { path, source })
}

/// Write a lexicon directory in canonical (sorted) order.
pub fn save_lexicon_set(set: &LexiconSet, dir: impl AsRef<Path>) -> Result<(), LexiconError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| LexiconError::Write {
        path: dir.to_path_buf(),
        source,
    })?;

    let terms = |list: &TermList| {
        list.entries()
            .iter()
            .map(|e| format!("{}\t{}\n", e.pattern, e.strength))
            .collect::<String>()
    };
    write_resource(dir, STRESS_FILE, terms(&set.stress_terms))?;
    write_resource(dir, RELAX_FILE, terms(&set.relax_terms))?;
    write_resource(
        dir,
        BOOSTER_FILE,
        set.boosters
            .iter()
            .map(|(w, d)| format!("{w}\t{d:+}\n"))
            .collect(),
    )?;
    write_resource(
        dir,
        NEGATOR_FILE,
        set.negators.iter().map(|w| format!("{w}\n")).collect(),
    )?;
    let mut idioms = set.idioms.clone();
    idioms.sort();
    write_resource(
        dir,
        IDIOM_FILE,
        idioms
            .iter()
            .map(|i| format!("{}\t{}\t{}\n", i.tokens.join(" "), i.kind, i.strength))
            .collect(),
    )?;
    let mut emoticons = set.emoticons.clone();
    emoticons.sort();
    write_resource(
        dir,
        EMOTICON_FILE,
        emoticons
            .iter()
            .map(|e| format!("{}\t{}\t{}\n", e.glyph, e.kind, e.strength))
            .collect(),
    )?;
    write_resource(
        dir,
        DICTIONARY_FILE,
        set.dictionary.iter().map(|w| format!("{w}\n")).collect(),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_dir(files: &[(&str, &str)]) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for name in LEXICON_FILES {
            fs::write(dir.path().join(name), "").unwrap();
        }
        for (name, body) in files {
            fs::write(dir.path().join(name), body).unwrap();
        }
        dir
    }

    fn entries(kind: TermKind, pairs: &[(&str, u8)]) -> Vec<LexiconEntry> {
        pairs
            .iter()
            .map(|&(p, s)| LexiconEntry::new(p, kind, Strength::new(s as i64).unwrap()).unwrap())
            .collect()
    }

    #[test]
    fn loads_stress_term() {
        let dir = write_dir(&[(STRESS_FILE, "# comment\ndelayed\t3\n")]);
        let lex = load_lexicon_set(dir.path()).unwrap();
        assert_eq!(lex.lookup(TermKind::Stress, "delayed").unwrap().1, 3);
        assert!(lex.dictionary.contains("delayed"));
    }

    #[test]
    fn empty_directory_files_load() {
        let dir = write_dir(&[]);
        let lex = load_lexicon_set(dir.path()).unwrap();
        assert_eq!(lex, LexiconSet::default());
    }

    #[test]
    fn missing_file_is_reported() {
        let dir = write_dir(&[]);
        fs::remove_file(dir.path().join(IDIOM_FILE)).unwrap();
        match load_lexicon_set(dir.path()) {
            Err(LexiconError::MissingResource(p)) => assert!(p.ends_with(IDIOM_FILE)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_pattern_names_second_line() {
        let dir = write_dir(&[(STRESS_FILE, "worr*\t4\nworr*\t4\n")]);
        match load_lexicon_set(dir.path()) {
            Err(LexiconError::DuplicateTerm { line, pattern, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(pattern, "worr*");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_are_parse_errors() {
        for (file, body, bad_line) in [
            (STRESS_FILE, "ok\t2\nbad\t6\n", 2),
            (RELAX_FILE, "calm\n", 1),
            (BOOSTER_FILE, "very\t0\n", 1),
            (IDIOM_FILE, "single\tstress\t2\n", 1),
            (EMOTICON_FILE, ":)\thappy\t2\n", 1),
            (STRESS_FILE, "a*b\t2\n", 1),
        ] {
            let dir = write_dir(&[(file, body)]);
            match load_lexicon_set(dir.path()) {
                Err(LexiconError::Parse { line, .. }) => assert_eq!(line, bad_line, "{file}"),
                other => panic!("{file}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn exact_beats_wildcard() {
        let list = entries(TermKind::Stress, &[("worr*", 4), ("worried", 3)]);
        let (e, s) = lookup("worried", &list).unwrap();
        assert_eq!((e.pattern.as_str(), s), ("worried", 3));
        let tl = TermList::from_entries(TermKind::Stress, list).unwrap();
        assert_eq!(tl.lookup("worried").unwrap().1, 3);
        assert_eq!(tl.lookup("worrying").unwrap().1, 4);
        assert!(tl.lookup("zzz").is_none());
    }

    #[test]
    fn longest_stem_wins() {
        let list = entries(TermKind::Stress, &[("stress*", 3), ("stressf*", 5)]);
        assert_eq!(lookup("stressful", &list).unwrap().1, 5);
        let tl = TermList::from_entries(TermKind::Stress, list).unwrap();
        assert_eq!(tl.lookup("stressful").unwrap().1, 5);
        assert_eq!(tl.lookup("stressed").unwrap().1, 3);
        assert_eq!(tl.lookup("stress").unwrap().1, 3);
    }

    #[test]
    fn set_strength_is_value_semantics() {
        let mut lex = LexiconSet::default();
        lex.stress_terms = TermList::from_pairs(TermKind::Stress, [("delayed", 3)]).unwrap();
        let next = lex.set_strength(TermKind::Stress, "delayed", 4).unwrap();
        assert_eq!(next.lookup(TermKind::Stress, "delayed").unwrap().1, 4);
        assert_eq!(lex.lookup(TermKind::Stress, "delayed").unwrap().1, 3);
        assert!(matches!(
            lex.set_strength(TermKind::Stress, "delayed", 6),
            Err(LexiconError::Range(6))
        ));
        assert!(matches!(
            lex.set_strength(TermKind::Stress, "nosuchword", 3),
            Err(LexiconError::UnknownTerm { .. })
        ));
        assert!(matches!(
            lex.set_strength(TermKind::Relaxation, "delayed", 3),
            Err(LexiconError::UnknownTerm { .. })
        ));
    }

    #[test]
    fn save_writes_sorted_patterns() {
        let mut lex = LexiconSet::default();
        lex.stress_terms =
            TermList::from_pairs(TermKind::Stress, [("zoo", 2), ("anger", 4), ("late", 3)])
                .unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_lexicon_set(&lex, dir.path()).unwrap();
        let body = fs::read_to_string(dir.path().join(STRESS_FILE)).unwrap();
        let mut expected: Vec<&str> = vec!["zoo\t2", "anger\t4", "late\t3"];
        expected.sort();
        assert_eq!(body.lines().collect::<Vec<_>>(), expected);
    }

    #[test]
    fn save_empty_set_writes_seven_empty_files() {
        let dir = tempfile::tempdir().unwrap();
        save_lexicon_set(&LexiconSet::default(), dir.path()).unwrap();
        for name in LEXICON_FILES {
            let body = fs::read_to_string(dir.path().join(name)).unwrap();
            assert_eq!(data_lines(&body).count(), 0, "{name}");
        }
    }

    #[test]
    fn round_trip_small_set() {
        let dir = write_dir(&[
            (STRESS_FILE, "delayed\t3\nworr*\t4\n"),
            (RELAX_FILE, "calm\t3\n"),
            (BOOSTER_FILE, "very\t+1\nslightly\t-1\n"),
            (NEGATOR_FILE, "never\nnot\n"),
            (IDIOM_FILE, "chill out\trelax\t3\n"),
            (EMOTICON_FILE, ":)\trelax\t2\n:(\tstress\t2\n"),
            (DICTIONARY_FILE, "hello\n"),
        ]);
        let lex = load_lexicon_set(dir.path()).unwrap();
        let out = tempfile::tempdir().unwrap();
        save_lexicon_set(&lex, out.path()).unwrap();
        assert_eq!(load_lexicon_set(out.path()).unwrap(), lex);
        assert_eq!(lex.booster_delta("slightly"), Some(-1));
        assert!(lex.is_negator("never"));
    }

    #[test]
    fn recognised_includes_terms_and_stems() {
        let mut lex = LexiconSet::default();
        lex.stress_terms =
            TermList::from_pairs(TermKind::Stress, [("delayed", 3), ("worr*", 4)]).unwrap();
        lex.dictionary.insert("hello".into());
        let r = lex.recognised();
        assert!(r.recognises("delayed"));
        assert!(r.recognises("hello"));
        assert!(r.recognises("worrying"));
        assert!(!r.recognises("calm"));
    }
}
