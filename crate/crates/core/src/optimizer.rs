//! Supervised mode: hill-climbing of term strengths against a coded corpus.
//!
//! Each pass visits every stress and relaxation term in a fresh seeded random
//! order. A term's strength is raised by one and the change is kept only if
//! the corpus error drops by at least `min_improvement`; otherwise lowering by
//! one is tried under the same rule, and failing that the term is restored.
//! Climbing stops after a pass with no kept change.
//!
//! The term order comes from a ChaCha8 stream (`rand_chacha::ChaCha8Rng`)
//! seeded with [`OptimizerConfig::seed`] and a Fisher-Yates shuffle of the
//! canonical term order (stress terms by pattern, then relaxation terms) at
//! the start of every pass.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::AnnotatedExample;
use crate::lexicon::{LexiconSet, TermKind};
use crate::scorer::{CompiledText, DualScore, Scorer, StrengthTable};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OptimizerError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("min_improvement must be at least 1")]
    InvalidConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimizerConfig {
    pub seed: u64,
    pub min_improvement: u64,
    pub max_passes: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            seed: 0,
            min_improvement: 2,
            max_passes: 1000,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        OptimizerConfig {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeRecord {
    pub pass: usize,
    pub kind: TermKind,
    pub pattern: String,
    pub old_strength: u8,
    pub new_strength: u8,
    pub error_before: u64,
    pub error_after: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimizationReport {
    pub passes_run: usize,
    pub changes_made: usize,
    pub initial_error: u64,
    pub final_error: u64,
    /// True when the last pass made no change (as opposed to hitting `max_passes`).
    pub converged: bool,
    pub changes_per_pass: Vec<usize>,
    pub changes: Vec<ChangeRecord>,
    pub seed: u64,
}

impl OptimizationReport {
    /// Line-oriented log: a summary block then one TSV line per kept change.
    pub fn to_log(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed\t{}", self.seed);
        let _ = writeln!(out, "term_order\treshuffled every pass");
        let _ = writeln!(out, "passes_run\t{}", self.passes_run);
        let _ = writeln!(out, "converged\t{}", self.converged);
        let _ = writeln!(out, "changes_made\t{}", self.changes_made);
        let _ = writeln!(out, "initial_error\t{}", self.initial_error);
        let _ = writeln!(out, "final_error\t{}", self.final_error);
        let per_pass: Vec<String> = self.changes_per_pass.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "changes_per_pass\t{}", per_pass.join(","));
        let _ = writeln!(
            out,
            "pass\tkind\tpattern\told_strength\tnew_strength\terror_before\terror_after"
        );
        for c in &self.changes {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                c.pass,
                c.kind,
                c.pattern,
                c.old_strength,
                c.new_strength,
                c.error_before,
                c.error_after
            );
        }
        out
    }
}

fn example_error(pred: DualScore, gold: (i32, i32)) -> u64 {
    (pred.stress() as i32 - gold.0).unsigned_abs() as u64
        + (pred.relaxation() as i32 - gold.1).unsigned_abs() as u64
}

/// Sum over examples of stress plus relaxation absolute error.
pub fn total_absolute_error(
    lex: &LexiconSet,
    corpus: &[AnnotatedExample],
) -> Result<u64, OptimizerError> {
    if corpus.is_empty() {
        return Err(OptimizerError::EmptyCorpus);
    }
    let scorer = Scorer::new(lex);
    Ok(corpus
        .iter()
        .map(|ex| example_error(scorer.score(&ex.text), ex.gold()))
        .sum())
}

/// A compiled text with its gold (stress, relaxation) codes.
#[derive(Debug, Clone, Copy)]
pub struct TrainingExample<'a> {
    pub text: &'a CompiledText,
    pub gold: (i32, i32),
}

/// Hill-climb on texts already compiled against `lex`. Returns the final
/// strengths rather than a new lexicon.
pub fn hill_climb_compiled(
    lex: &LexiconSet,
    examples: &[TrainingExample<'_>],
    cfg: &OptimizerConfig,
) -> Result<(StrengthTable, OptimizationReport), OptimizerError> {
    if examples.is_empty() {
        return Err(OptimizerError::EmptyCorpus);
    }
    if cfg.min_improvement == 0 {
        return Err(OptimizerError::InvalidConfig);
    }
    let mut strengths = StrengthTable::from_lexicon(lex);

    // which examples each term can influence
    let mut affected: [Vec<Vec<usize>>; 2] = [
        vec![Vec::new(); lex.stress_terms.len()],
        vec![Vec::new(); lex.relax_terms.len()],
    ];
    for (i, ex) in examples.iter().enumerate() {
        for (kind, entry) in ex.text.term_refs() {
            let list = &mut affected[kind_slot(kind)][entry];
            if list.last() != Some(&i) {
                list.push(i);
            }
        }
    }

    let mut errors: Vec<u64> = examples
        .iter()
        .map(|ex| example_error(ex.text.evaluate(&strengths), ex.gold))
        .collect();
    let mut total: u64 = errors.iter().sum();
    let initial_error = total;

    let canonical: Vec<(TermKind, usize)> = (0..lex.stress_terms.len())
        .map(|i| (TermKind::Stress, i))
        .chain((0..lex.relax_terms.len()).map(|i| (TermKind::Relaxation, i)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = OptimizationReport {
        passes_run: 0,
        changes_made: 0,
        initial_error,
        final_error: initial_error,
        converged: false,
        changes_per_pass: Vec::new(),
        changes: Vec::new(),
        seed: cfg.seed,
    };
    let mut scratch: Vec<u64> = Vec::new();

    for pass in 1..=cfg.max_passes {
        let mut order = canonical.clone();
        order.shuffle(&mut rng);
        let mut changes = 0;
        for (kind, index) in order {
            let old = strengths.strength_of(kind, index);
            let touched = &affected[kind_slot(kind)][index];
            for candidate in [old.saturating_add(1).min(5), old.saturating_sub(1).max(1)] {
                if candidate == old {
                    continue;
                }
                strengths.get_mut(kind)[index] = candidate;
                scratch.clear();
                let mut new_total = total;
                for &i in touched {
                    let e = example_error(examples[i].text.evaluate(&strengths), examples[i].gold);
                    new_total = new_total - errors[i] + e;
                    scratch.push(e);
                }
                if new_total + cfg.min_improvement <= total {
                    for (&i, &e) in touched.iter().zip(&scratch) {
                        errors[i] = e;
                    }
                    report.changes.push(ChangeRecord {
                        pass,
                        kind,
                        pattern: lex.terms(kind).get(index).pattern.clone(),
                        old_strength: old,
                        new_strength: candidate,
                        error_before: total,
                        error_after: new_total,
                    });
                    total = new_total;
                    changes += 1;
                    break;
                }
                strengths.get_mut(kind)[index] = old;
            }
        }
        report.passes_run = pass;
        report.changes_per_pass.push(changes);
        report.changes_made += changes;
        if changes == 0 {
            report.converged = true;
            break;
        }
    }
    report.final_error = total;
    Ok((strengths, report))
}

fn kind_slot(kind: TermKind) -> usize {
    match kind {
        TermKind::Stress => 0,
        TermKind::Relaxation => 1,
    }
}

impl StrengthTable {
    fn strength_of(&self, kind: TermKind, index: usize) -> u8 {
        match kind {
            TermKind::Stress => self.stress[index],
            TermKind::Relaxation => self.relax[index],
        }
    }
}

/// Copy `strengths` into a lexicon with the same patterns as `lex`.
pub fn apply_strengths(lex: &LexiconSet, strengths: &StrengthTable) -> LexiconSet {
    let mut out = lex.clone();
    for kind in [TermKind::Stress, TermKind::Relaxation] {
        let values = match kind {
            TermKind::Stress => &strengths.stress,
            TermKind::Relaxation => &strengths.relax,
        };
        for (i, &s) in values.iter().enumerate() {
            let entry = lex.terms(kind).get(i);
            if entry.strength.get() != s {
                out = out
                    .set_strength(kind, &entry.pattern, s as i64)
                    .expect("pattern exists and strength in range");
            }
        }
    }
    out
}

/// Refine `lex` against `corpus`. The input lexicon is not modified.
pub fn hill_climb(
    lex: &LexiconSet,
    corpus: &[AnnotatedExample],
    cfg: &OptimizerConfig,
) -> Result<(LexiconSet, OptimizationReport), OptimizerError> {
    if corpus.is_empty() {
        return Err(OptimizerError::EmptyCorpus);
    }
    let scorer = Scorer::new(lex);
    let compiled: Vec<CompiledText> = corpus.iter().map(|ex| scorer.compile(&ex.text)).collect();
    let examples: Vec<TrainingExample<'_>> = compiled
        .iter()
        .zip(corpus)
        .map(|(text, ex)| TrainingExample {
            text,
            gold: ex.gold(),
        })
        .collect();
    let (strengths, report) = hill_climb_compiled(lex, &examples, cfg)?;
    Ok((apply_strengths(lex, &strengths), report))
}
