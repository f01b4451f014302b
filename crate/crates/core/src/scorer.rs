//! The rule engine: dual stress/relaxation scores for sentences and texts.
//!
//! Scoring happens in two steps. [`compile_sentence`] resolves everything that
//! depends only on the lexicon's *patterns* (idiom spans, emoticons, which
//! term each token matches, boosters, negation, repeated letters). Evaluating a
//! compiled sentence then only needs the current term strengths, which is what
//! lets the optimizer re-score a corpus cheaply after each strength change.

use std::fmt::{self, Write as _};

use crate::lexicon::{LexiconSet, Recognised, TermKind};
use crate::textproc::{self, Token, TokenizedText};

/// Scale a contribution is counted on.
pub type Scale = TermKind;

/// A (stress, relaxation) pair with stress in `-5..=-1` and relaxation in `1..=5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DualScore {
    stress: i8,
    relaxation: i8,
}

impl DualScore {
    pub const NEUTRAL: DualScore = DualScore {
        stress: -1,
        relaxation: 1,
    };

    pub fn new(stress: i8, relaxation: i8) -> Option<Self> {
        if (-5..=-1).contains(&stress) && (1..=5).contains(&relaxation) {
            Some(DualScore { stress, relaxation })
        } else {
            None
        }
    }

    fn from_magnitudes(stress: u8, relaxation: u8) -> Self {
        DualScore {
            stress: -(stress.clamp(1, 5) as i8),
            relaxation: relaxation.clamp(1, 5) as i8,
        }
    }

    pub fn stress(self) -> i8 {
        self.stress
    }

    pub fn relaxation(self) -> i8 {
        self.relaxation
    }

    pub fn get(self, scale: Scale) -> i8 {
        match scale {
            TermKind::Stress => self.stress,
            TermKind::Relaxation => self.relaxation,
        }
    }

    /// Combine sentence scores: the strongest value on each scale wins.
    pub fn strongest(self, other: DualScore) -> DualScore {
        DualScore {
            stress: self.stress.min(other.stress),
            relaxation: self.relaxation.max(other.relaxation),
        }
    }
}

impl Default for DualScore {
    fn default() -> Self {
        DualScore::NEUTRAL
    }
}

impl fmt::Display for DualScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.stress, self.relaxation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContributionSource {
    StressTerm,
    RelaxTerm,
    Idiom,
    Emoticon,
    NegatedRelax,
    NegatedStress,
}

impl fmt::Display for ContributionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ContributionSource::StressTerm => "StressTerm",
            ContributionSource::RelaxTerm => "RelaxTerm",
            ContributionSource::Idiom => "Idiom",
            ContributionSource::Emoticon => "Emoticon",
            ContributionSource::NegatedRelax => "NegatedRelax",
            ContributionSource::NegatedStress => "NegatedStress",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermContribution {
    pub token_index: usize,
    /// Matched surface text (token, idiom phrase or glyph).
    pub text: String,
    pub source: ContributionSource,
    pub base_strength: u8,
    pub booster_delta: i8,
    pub repeat_boost: u8,
    /// `clamp(base + booster + repeat, 1, 5)`.
    pub final_strength: u8,
    pub scale: Scale,
}

impl TermContribution {
    /// Strength counted on the scale; a negated stress term is neutralised to 1.
    pub fn effective_strength(&self) -> u8 {
        match self.source {
            ContributionSource::NegatedStress => 1,
            _ => self.final_strength,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceTrace {
    pub contributions: Vec<TermContribution>,
    /// Idioms with neutral kind that masked their words without contributing.
    pub neutral_idioms: Vec<String>,
    pub exclamation: bool,
    pub stress_boosted: bool,
    pub relax_boosted: bool,
    pub score: DualScore,
}

impl SentenceTrace {
    /// Recompute the sentence score from the recorded contributions and boosts.
    pub fn replay(&self) -> DualScore {
        let max_on = |scale: Scale| {
            self.contributions
                .iter()
                .filter(|c| c.scale == scale)
                .map(TermContribution::effective_strength)
                .max()
                .unwrap_or(1)
        };
        let stress = max_on(TermKind::Stress) + self.stress_boosted as u8;
        let relax = max_on(TermKind::Relaxation) + self.relax_boosted as u8;
        DualScore::from_magnitudes(stress, relax)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScoreTrace {
    pub sentences: Vec<SentenceTrace>,
    pub score: DualScore,
}

impl ScoreTrace {
    pub fn replay(&self) -> DualScore {
        self.sentences
            .iter()
            .map(SentenceTrace::replay)
            .fold(DualScore::NEUTRAL, DualScore::strongest)
    }
}

/// Source of current term strengths, by term list and entry index.
pub trait Strengths {
    fn strength(&self, kind: TermKind, index: usize) -> u8;
}

impl Strengths for LexiconSet {
    fn strength(&self, kind: TermKind, index: usize) -> u8 {
        self.terms(kind).get(index).strength.get()
    }
}

/// Mutable strength arrays mirroring a lexicon's two term lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrengthTable {
    pub stress: Vec<u8>,
    pub relax: Vec<u8>,
}

impl StrengthTable {
    pub fn from_lexicon(lex: &LexiconSet) -> Self {
        let pick = |kind| lex.terms(kind).entries().iter().map(|e| e.strength.get()).collect();
        StrengthTable {
            stress: pick(TermKind::Stress),
            relax: pick(TermKind::Relaxation),
        }
    }

    pub fn get_mut(&mut self, kind: TermKind) -> &mut Vec<u8> {
        match kind {
            TermKind::Stress => &mut self.stress,
            TermKind::Relaxation => &mut self.relax,
        }
    }
}

impl Strengths for StrengthTable {
    fn strength(&self, kind: TermKind, index: usize) -> u8 {
        match kind {
            TermKind::Stress => self.stress[index],
            TermKind::Relaxation => self.relax[index],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct FixedMatch {
    token_index: usize,
    text: String,
    source: ContributionSource,
    scale: Scale,
    strength: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct TermMatch {
    token_index: usize,
    text: String,
    kind: TermKind,
    entry: usize,
    booster_delta: i8,
    repeat_boost: u8,
    negated: bool,
}

/// A sentence with all pattern-level decisions already made.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CompiledSentence {
    fixed: Vec<FixedMatch>,
    terms: Vec<TermMatch>,
    neutral_idioms: Vec<String>,
    exclamation: bool,
}

impl CompiledSentence {
    /// Lexicon terms (list, entry index) that this sentence's score depends on.
    pub fn term_refs(&self) -> impl Iterator<Item = (TermKind, usize)> + '_ {
        self.terms.iter().map(|t| (t.kind, t.entry))
    }

    pub fn evaluate<S: Strengths + ?Sized>(&self, strengths: &S) -> DualScore {
        self.run(strengths, None)
    }

    pub fn evaluate_traced<S: Strengths + ?Sized>(&self, strengths: &S) -> SentenceTrace {
        let mut contributions = Vec::new();
        let score = self.run(strengths, Some(&mut contributions));
        let max_on = |scale| {
            contributions
                .iter()
                .filter(|c: &&TermContribution| c.scale == scale)
                .map(TermContribution::effective_strength)
                .max()
                .unwrap_or(1)
        };
        let stress_boosted = self.exclamation && max_on(TermKind::Stress) >= 2;
        let relax_boosted = self.exclamation && max_on(TermKind::Relaxation) >= 2;
        SentenceTrace {
            contributions,
            neutral_idioms: self.neutral_idioms.clone(),
            exclamation: self.exclamation,
            stress_boosted,
            relax_boosted,
            score,
        }
    }

    fn run<S: Strengths + ?Sized>(
        &self,
        strengths: &S,
        mut trace: Option<&mut Vec<TermContribution>>,
    ) -> DualScore {
        let mut stress = 1u8;
        let mut relax = 1u8;

        for m in &self.fixed {
            match m.scale {
                TermKind::Stress => stress = stress.max(m.strength),
                TermKind::Relaxation => relax = relax.max(m.strength),
            }
            if let Some(out) = trace.as_deref_mut() {
                out.push(TermContribution {
                    token_index: m.token_index,
                    text: m.text.clone(),
                    source: m.source,
                    base_strength: m.strength,
                    booster_delta: 0,
                    repeat_boost: 0,
                    final_strength: m.strength,
                    scale: m.scale,
                });
            }
        }

        for m in &self.terms {
            let base = strengths.strength(m.kind, m.entry);
            let adjusted = base as i32 + m.booster_delta as i32 + m.repeat_boost as i32;
            let final_strength = adjusted.clamp(1, 5) as u8;
            let (source, scale, effective) = match (m.kind, m.negated) {
                (TermKind::Stress, false) => {
                    (ContributionSource::StressTerm, TermKind::Stress, final_strength)
                }
                (TermKind::Stress, true) => (ContributionSource::NegatedStress, TermKind::Stress, 1),
                (TermKind::Relaxation, false) => (
                    ContributionSource::RelaxTerm,
                    TermKind::Relaxation,
                    final_strength,
                ),
                (TermKind::Relaxation, true) => {
                    (ContributionSource::NegatedRelax, TermKind::Stress, final_strength)
                }
            };
            match scale {
                TermKind::Stress => stress = stress.max(effective),
                TermKind::Relaxation => relax = relax.max(effective),
            }
            if let Some(out) = trace.as_deref_mut() {
                out.push(TermContribution {
                    token_index: m.token_index,
                    text: m.text.clone(),
                    source,
                    base_strength: base,
                    booster_delta: m.booster_delta,
                    repeat_boost: m.repeat_boost,
                    final_strength,
                    scale,
                });
            }
        }

        if self.exclamation {
            if stress >= 2 {
                stress += 1;
            }
            if relax >= 2 {
                relax += 1;
            }
        }
        DualScore::from_magnitudes(stress, relax)
    }
}

fn is_exclamation_run(token: &Token) -> bool {
    token.is_punct_run && token.raw.contains('!')
}

/// Resolve idioms, emoticons, term matches and modifiers for one sentence.
pub fn compile_sentence(tokens: &[Token], lex: &LexiconSet) -> CompiledSentence {
    let mut masked = vec![false; tokens.len()];
    let mut compiled = CompiledSentence {
        exclamation: tokens.iter().any(is_exclamation_run),
        ..CompiledSentence::default()
    };

    // idioms: longest first, then leftmost, without overlap
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for (idiom_index, idiom) in lex.idioms.iter().enumerate() {
        let len = idiom.tokens.len();
        if len > tokens.len() {
            continue;
        }
        for start in 0..=tokens.len() - len {
            let hit = tokens[start..start + len]
                .iter()
                .zip(&idiom.tokens)
                .all(|(t, w)| !t.is_punct_run && t.normalized == *w);
            if hit {
                candidates.push((start, idiom_index));
            }
        }
    }
    candidates.sort_by(|a, b| {
        let la = lex.idioms[a.1].tokens.len();
        let lb = lex.idioms[b.1].tokens.len();
        lb.cmp(&la).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1))
    });
    for (start, idiom_index) in candidates {
        let idiom = &lex.idioms[idiom_index];
        let span = start..start + idiom.tokens.len();
        if masked[span.clone()].iter().any(|&m| m) {
            continue;
        }
        masked[span].iter_mut().for_each(|m| *m = true);
        let text = idiom.tokens.join(" ");
        match idiom.kind.term_kind() {
            Some(scale) => compiled.fixed.push(FixedMatch {
                token_index: start,
                text,
                source: ContributionSource::Idiom,
                scale,
                strength: idiom.strength.get(),
            }),
            None => compiled.neutral_idioms.push(text),
        }
    }

    for (i, token) in tokens.iter().enumerate() {
        if masked[i] {
            continue;
        }
        if token.is_punct_run {
            if let Some(e) = lex.emoticons.iter().find(|e| e.glyph == token.raw) {
                if let Some(scale) = e.kind.term_kind() {
                    compiled.fixed.push(FixedMatch {
                        token_index: i,
                        text: token.raw.clone(),
                        source: ContributionSource::Emoticon,
                        scale,
                        strength: e.strength.get(),
                    });
                }
            }
            continue;
        }
        if token.is_url() {
            continue;
        }
        for kind in [TermKind::Stress, TermKind::Relaxation] {
            if let Some(entry) = lex.terms(kind).lookup_index(&token.normalized) {
                let (booster_delta, negated) = modifiers(tokens, &masked, i, lex);
                compiled.terms.push(TermMatch {
                    token_index: i,
                    text: token.normalized.clone(),
                    kind,
                    entry,
                    booster_delta,
                    repeat_boost: u8::from(token.letters_removed >= 2),
                    negated,
                });
            }
        }
    }
    compiled
}

/// Booster delta and negation flag for the term at `i`.
///
/// The booster is the nearest preceding token that is not a negator; a
/// negator counts when it directly precedes the term or precedes its booster.
fn modifiers(tokens: &[Token], masked: &[bool], i: usize, lex: &LexiconSet) -> (i8, bool) {
    let word = |j: usize| -> Option<&str> {
        let t = &tokens[j];
        (!t.is_punct_run && !masked[j]).then_some(t.normalized.as_str())
    };
    let is_negator = |j: usize| word(j).is_some_and(|w| lex.is_negator(w));
    let booster = |j: usize| word(j).and_then(|w| lex.booster_delta(w));

    if i == 0 {
        return (0, false);
    }
    let prev = i - 1;
    if is_negator(prev) {
        let delta = prev.checked_sub(1).and_then(booster).unwrap_or(0);
        return (delta, true);
    }
    match booster(prev) {
        Some(delta) => {
            let negated = prev.checked_sub(1).is_some_and(is_negator);
            (delta, negated)
        }
        None => (0, false),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CompiledText {
    pub sentences: Vec<CompiledSentence>,
}

impl CompiledText {
    pub fn evaluate<S: Strengths + ?Sized>(&self, strengths: &S) -> DualScore {
        self.sentences
            .iter()
            .map(|s| s.evaluate(strengths))
            .fold(DualScore::NEUTRAL, DualScore::strongest)
    }

    pub fn evaluate_traced<S: Strengths + ?Sized>(&self, strengths: &S) -> ScoreTrace {
        let sentences: Vec<SentenceTrace> = self
            .sentences
            .iter()
            .map(|s| s.evaluate_traced(strengths))
            .collect();
        let score = sentences
            .iter()
            .map(|s| s.score)
            .fold(DualScore::NEUTRAL, DualScore::strongest);
        ScoreTrace { sentences, score }
    }

    pub fn term_refs(&self) -> impl Iterator<Item = (TermKind, usize)> + '_ {
        self.sentences.iter().flat_map(CompiledSentence::term_refs)
    }
}

pub fn compile_text(tokens: &TokenizedText, lex: &LexiconSet) -> CompiledText {
    CompiledText {
        sentences: tokens
            .sentences
            .iter()
            .map(|s| compile_sentence(s, lex))
            .collect(),
    }
}

/// Score one tokenized sentence.
pub fn score_sentence(tokens: &[Token], lex: &LexiconSet) -> (DualScore, SentenceTrace) {
    let trace = compile_sentence(tokens, lex).evaluate_traced(lex);
    (trace.score, trace)
}

/// A lexicon bundled with its spelling-correction vocabulary, for scoring
/// many texts.
#[derive(Debug, Clone)]
pub struct Scorer<'a> {
    lex: &'a LexiconSet,
    recognised: Recognised,
}

impl<'a> Scorer<'a> {
    pub fn new(lex: &'a LexiconSet) -> Self {
        Scorer {
            lex,
            recognised: lex.recognised(),
        }
    }

    pub fn lexicon(&self) -> &LexiconSet {
        self.lex
    }

    pub fn tokenize(&self, text: &str) -> TokenizedText {
        textproc::process(text, &self.recognised)
    }

    pub fn compile(&self, text: &str) -> CompiledText {
        compile_text(&self.tokenize(text), self.lex)
    }

    pub fn score(&self, text: &str) -> DualScore {
        self.compile(text).evaluate(self.lex)
    }

    pub fn score_traced(&self, text: &str) -> (DualScore, ScoreTrace) {
        let trace = self.compile(text).evaluate_traced(self.lex);
        (trace.score, trace)
    }

    pub fn explain(&self, text: &str) -> String {
        let (_, trace) = self.score_traced(text);
        render_trace(text, &trace)
    }
}

/// Score a whole text. Stress is the most negative sentence stress and
/// relaxation the highest sentence relaxation.
pub fn score_text(text: &str, lex: &LexiconSet) -> (DualScore, ScoreTrace) {
    Scorer::new(lex).score_traced(text)
}

/// Human-readable rendering of a text's scoring trace.
pub fn explain(text: &str, lex: &LexiconSet) -> String {
    Scorer::new(lex).explain(text)
}

fn render_trace(text: &str, trace: &ScoreTrace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "text: {text}");
    for (n, s) in trace.sentences.iter().enumerate() {
        let _ = writeln!(out, "  sentence {}: {}", n + 1, s.score);
        for c in &s.contributions {
            let _ = writeln!(
                out,
                "    [{}] {} `{}` on {}: base {} booster {:+} repeat +{} -> {} (counts {})",
                c.token_index,
                c.source,
                c.text,
                c.scale,
                c.base_strength,
                c.booster_delta,
                c.repeat_boost,
                c.final_strength,
                c.effective_strength()
            );
        }
        for idiom in &s.neutral_idioms {
            let _ = writeln!(out, "    NeutralIdiom `{idiom}` masks its words");
        }
        if s.stress_boosted {
            let _ = writeln!(out, "    ExclamationBoost on stress +1");
        }
        if s.relax_boosted {
            let _ = writeln!(out, "    ExclamationBoost on relax +1");
        }
    }
    let _ = writeln!(out, "  result: {}", trace.score);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{
        EmoticonEntry, IdiomEntry, LexiconSet, PhraseKind, Strength, TermList,
    };
    use proptest::prelude::*;

    fn lexicon(stress: &[(&str, u8)], relax: &[(&str, u8)]) -> LexiconSet {
        let mut lex = LexiconSet::default();
        lex.stress_terms = TermList::from_pairs(TermKind::Stress, stress.iter().copied()).unwrap();
        lex.relax_terms =
            TermList::from_pairs(TermKind::Relaxation, relax.iter().copied()).unwrap();
        for w in ["not", "never", "don't", "no"] {
            lex.negators.insert(w.into());
        }
        lex.boosters.insert("very".into(), 1);
        lex.boosters.insert("extremely".into(), 2);
        lex.boosters.insert("slightly".into(), -1);
        lex.canonicalize();
        lex
    }

    fn fixture_lexicon() -> LexiconSet {
        lexicon(&[("delayed", 3), ("filthy", 2)], &[("asleep", 4), ("trust", 2)])
    }

    fn score(text: &str, lex: &LexiconSet) -> (i8, i8) {
        let (s, trace) = score_text(text, lex);
        assert_eq!(trace.replay(), s, "replay mismatch for {text:?}");
        (s.stress(), s.relaxation())
    }

    #[test]
    fn worked_examples() {
        let lex = fixture_lexicon();
        assert_eq!(score("Almost home and the train is delayed", &lex), (-3, 1));
        assert_eq!(score("Fell asleep and messed my hair up", &lex), (-1, 4));
        assert_eq!(score("Never trust a man with a filthy kitchen", &lex), (-2, 1));
    }

    #[test]
    fn empty_token_list_is_neutral() {
        let (s, trace) = score_sentence(&[], &fixture_lexicon());
        assert_eq!(s, DualScore::NEUTRAL);
        assert!(trace.contributions.is_empty());
        assert_eq!(score("", &fixture_lexicon()), (-1, 1));
    }

    #[test]
    fn max_over_sentences_with_exclamation() {
        let lex = lexicon(&[("delayed", 3)], &[("calm", 3)]);
        assert_eq!(score("I am calm. The train is delayed!", &lex), (-4, 3));
    }

    #[test]
    fn single_sentence_text_matches_sentence_scoring() {
        let lex = fixture_lexicon();
        let text = "Never trust a man with a filthy kitchen";
        let tokens = textproc::process(text, &lex.recognised());
        let (sentence, _) = score_sentence(&tokens.sentences[0], &lex);
        assert_eq!(score_text(text, &lex).0, sentence);
    }

    #[test]
    fn explain_names_rules() {
        let lex = fixture_lexicon();
        let out = explain("Never trust a man with a filthy kitchen", &lex);
        assert!(out.contains("NegatedRelax `trust`"), "{out}");
        assert!(out.contains("StressTerm `filthy`"), "{out}");

        let out = explain("delayed again!!!", &lex);
        assert!(out.contains("ExclamationBoost on stress"), "{out}");

        let (s, trace) = score_text("a perfectly ordinary sentence", &lex);
        assert_eq!(s, DualScore::NEUTRAL);
        assert!(trace.sentences.iter().all(|s| s.contributions.is_empty()));
    }

    #[test]
    fn boosters_and_negation_window() {
        let lex = lexicon(&[("late", 3)], &[("relaxed", 3)]);
        assert_eq!(score("very late", &lex), (-4, 1));
        assert_eq!(score("slightly late", &lex), (-2, 1));
        assert_eq!(score("extremely relaxed", &lex), (-1, 5));
        // negation carries the boosted strength over to stress
        assert_eq!(score("not very relaxed", &lex), (-4, 1));
        assert_eq!(score("not relaxed", &lex), (-3, 1));
        assert_eq!(score("not late", &lex), (-1, 1));
        // negator too far away
        assert_eq!(score("not the relaxed", &lex), (-1, 3));
        // booster before the negator still applies
        assert_eq!(score("very not relaxed", &lex), (-4, 1));
    }

    #[test]
    fn repeated_letters_boost_by_one() {
        let lex = lexicon(&[("worried", 3)], &[]);
        assert_eq!(score("worried", &lex), (-3, 1));
        assert_eq!(score("wooorried", &lex), (-4, 1));
        // a single extra letter is not enough
        assert_eq!(score("woorried", &lex), (-3, 1));
    }

    #[test]
    fn idioms_override_words() {
        let mut lex = lexicon(&[("hell", 3)], &[("chill", 2)]);
        lex.idioms.push(IdiomEntry {
            tokens: vec!["chill".into(), "out".into()],
            kind: PhraseKind::Relaxation,
            strength: Strength::new(4).unwrap(),
        });
        lex.idioms.push(IdiomEntry {
            tokens: vec!["hell".into(), "yeah".into()],
            kind: PhraseKind::Neutral,
            strength: Strength::new(1).unwrap(),
        });
        lex.canonicalize();
        assert_eq!(score("time to chill out", &lex), (-1, 4));
        assert_eq!(score("hell yeah", &lex), (-1, 1));
        assert_eq!(score("hell no", &lex), (-3, 1));
    }

    #[test]
    fn overlapping_idioms_prefer_longest() {
        let mut lex = lexicon(&[], &[]);
        for (words, kind, s) in [
            ("a b", PhraseKind::Stress, 2),
            ("b c d", PhraseKind::Stress, 4),
        ] {
            lex.idioms.push(IdiomEntry {
                tokens: words.split(' ').map(String::from).collect(),
                kind,
                strength: Strength::new(s).unwrap(),
            });
        }
        lex.canonicalize();
        let (_, trace) = score_text("a b c d", &lex);
        let c = &trace.sentences[0].contributions;
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].text, "b c d");
    }

    #[test]
    fn emoticons_match_punct_runs() {
        let mut lex = lexicon(&[], &[]);
        lex.emoticons.push(EmoticonEntry {
            glyph: ":)".into(),
            kind: PhraseKind::Relaxation,
            strength: Strength::new(2).unwrap(),
        });
        lex.emoticons.push(EmoticonEntry {
            glyph: ":(".into(),
            kind: PhraseKind::Stress,
            strength: Strength::new(3).unwrap(),
        });
        lex.canonicalize();
        assert_eq!(score("home :)", &lex), (-1, 2));
        assert_eq!(score("late :(", &lex), (-3, 1));
    }

    #[test]
    fn exclamation_only_boosts_active_scales() {
        let lex = lexicon(&[("late", 3)], &[("calm", 1)]);
        assert_eq!(score("hello!!", &lex), (-1, 1));
        assert_eq!(score("late!", &lex), (-4, 1));
        assert_eq!(score("late!!!", &lex), (-4, 1));
        assert_eq!(score("late ?!? !!", &lex), (-4, 1));
        assert_eq!(score("late???", &lex), (-3, 1));
        // strength 1 terms are known but neutral
        assert_eq!(score("calm!", &lex), (-1, 1));
    }

    #[test]
    fn clamped_at_five() {
        let lex = lexicon(&[("panic", 5)], &[]);
        assert_eq!(score("extremely paaaanic!!!", &lex), (-5, 1));
    }

    #[test]
    fn urls_never_match() {
        let lex = lexicon(&[("http", 3), ("www", 3)], &[]);
        assert_eq!(score("see http://late.com www.x.org", &lex), (-1, 1));
    }

    proptest! {
        #[test]
        fn negation_inverts_relaxation(r in 2u8..=5) {
            let lex = lexicon(&[], &[("serene", r)]);
            prop_assert_eq!(score("serene", &lex), (-1, r as i8));
            prop_assert_eq!(score("not serene", &lex), (-(r as i8), 1));
        }

        #[test]
        fn sentence_order_is_irrelevant(
            idx in proptest::collection::vec(0usize..6, 1..6),
        ) {
            let lex = lexicon(&[("late", 3), ("angry", 4)], &[("calm", 2), ("asleep", 4)]);
            let pool = [
                "I am late!", "so calm.", "very angry?", "not calm.", "fell asleep.", "nothing here.",
            ];
            let forward: Vec<&str> = idx.iter().map(|&i| pool[i]).collect();
            let mut backward = forward.clone();
            backward.reverse();
            prop_assert_eq!(
                score(&forward.join(" "), &lex),
                score(&backward.join(" "), &lex)
            );
        }

        #[test]
        fn raising_a_stress_term_never_lowers_stress(
            words in proptest::collection::vec(prop::sample::select(vec![
                "late", "not", "very", "calm", "the", "!", "slightly", "looong", "late!!",
            ]), 0..10),
            s in 1u8..5,
        ) {
            let low = lexicon(&[("late", s), ("long", 2)], &[("calm", 3)]);
            let high = low.set_strength(TermKind::Stress, "late", s as i64 + 1).unwrap();
            let text = words.join(" ");
            let a = score_text(&text, &low).0;
            let b = score_text(&text, &high).0;
            prop_assert!(b.stress() <= a.stress());
        }

        #[test]
        fn arbitrary_bytes_stay_in_range(bytes in proptest::collection::vec(any::<u8>(), 0..80)) {
            let lex = fixture_lexicon();
            let text = String::from_utf8_lossy(&bytes);
            let (s, trace) = score_text(&text, &lex);
            prop_assert!((-5..=-1).contains(&s.stress()));
            prop_assert!((1..=5).contains(&s.relaxation()));
            prop_assert_eq!(trace.replay(), s);
            prop_assert_eq!(score_text(&text, &lex), (s, trace));
        }
    }
}
