//! Coded corpora, gold aggregation, sub-corpus slices, folds and repeated
//! cross-validation of the lexicon scorer.
//!
//! Corpus files are UTF-8 TSV with the header
//! `id<TAB>subcorpus<TAB>text<TAB>stress_codes<TAB>relax_codes`, where the code
//! columns are comma-separated per-coder integers (`-1,-2,-2` and `1,1,2`).
//! Lines starting with `#` are comments.
//!
//! Seeds: repetition `r` of a cross-validation run uses
//! `splitmix64(base_seed + r * 0x9E3779B97F4A7C15)` to shuffle its folds, and
//! the hill-climb on fold `f` of that repetition uses
//! `splitmix64(rep_seed ^ (f + 1))`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::lexicon::LexiconSet;
use crate::metrics::{CodingMatrix, MetricsError, MetricsReport, PairedSeries};
use crate::optimizer::{self, OptimizerConfig, OptimizerError, TrainingExample};
use crate::scalar::Real;
use crate::scorer::{CompiledText, DualScore, Scorer, Strengths};

pub const CORPUS_HEADER: &str = "id\tsubcorpus\ttext\tstress_codes\trelax_codes";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("corpus has {len} examples, fewer than k = {k}")]
    TooSmall { len: usize, k: usize },
    #[error("k must be at least 2")]
    InvalidK,
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// One coded text. Gold codes are the coder mean rounded half away from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedExample {
    pub id: String,
    pub text: String,
    pub coder_stress: Vec<i32>,
    pub coder_relax: Vec<i32>,
    pub subcorpus: String,
    pub gold_stress: i32,
    pub gold_relax: i32,
    pub gold_stress_raw: f64,
    pub gold_relax_raw: f64,
}

/// `round(sum / n)` with halves rounded away from zero, in integers.
fn rounded_mean(codes: &[i32]) -> i32 {
    let n = codes.len() as i64;
    let sum: i64 = codes.iter().map(|&c| c as i64).sum();
    let magnitude = (2 * sum.abs() + n) / (2 * n);
    (sum.signum() * magnitude) as i32
}

impl AnnotatedExample {
    pub fn new(
        id: String,
        text: String,
        coder_stress: Vec<i32>,
        coder_relax: Vec<i32>,
        subcorpus: String,
    ) -> Result<Self, String> {
        if coder_stress.is_empty() {
            return Err("at least one coder is required".into());
        }
        if coder_stress.len() != coder_relax.len() {
            return Err(format!(
                "{} stress codes but {} relaxation codes",
                coder_stress.len(),
                coder_relax.len()
            ));
        }
        if let Some(c) = coder_stress.iter().find(|c| !(-5..=-1).contains(*c)) {
            return Err(format!("stress code {c} outside -5..-1"));
        }
        if let Some(c) = coder_relax.iter().find(|c| !(1..=5).contains(*c)) {
            return Err(format!("relaxation code {c} outside 1..5"));
        }
        let mean = |xs: &[i32]| xs.iter().map(|&x| x as f64).sum::<f64>() / xs.len() as f64;
        Ok(AnnotatedExample {
            gold_stress: rounded_mean(&coder_stress),
            gold_relax: rounded_mean(&coder_relax),
            gold_stress_raw: mean(&coder_stress),
            gold_relax_raw: mean(&coder_relax),
            id,
            text,
            coder_stress,
            coder_relax,
            subcorpus,
        })
    }

    pub fn gold(&self) -> (i32, i32) {
        (self.gold_stress, self.gold_relax)
    }
}

fn parse_code_list(field: &str, allow_missing: bool) -> Result<Vec<Option<i32>>, String> {
    field
        .split(',')
        .map(|c| {
            let c = c.trim();
            if allow_missing && (c.is_empty() || c.eq_ignore_ascii_case("na")) {
                return Ok(None);
            }
            c.parse::<i32>()
                .map(Some)
                .map_err(|_| format!("`{c}` is not an integer code"))
        })
        .collect()
}

struct Row<'a> {
    line: usize,
    id: &'a str,
    subcorpus: &'a str,
    text: &'a str,
    stress: &'a str,
    relax: &'a str,
}

fn rows(content: &str) -> Result<Vec<Row<'_>>, CorpusError> {
    let mut out = Vec::new();
    let mut header_seen = false;
    for (i, raw) in content.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim_end_matches('\r');
        if text.starts_with('#') || text.trim().is_empty() {
            continue;
        }
        if !header_seen {
            if text.trim_start_matches('\u{feff}') != CORPUS_HEADER {
                return Err(CorpusError::Parse {
                    line,
                    message: format!("expected header `{}`", CORPUS_HEADER.replace('\t', "<TAB>")),
                });
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = text.split('\t').collect();
        if cols.len() != 5 {
            return Err(CorpusError::Parse {
                line,
                message: format!("expected 5 tab-separated columns, found {}", cols.len()),
            });
        }
        out.push(Row {
            line,
            id: cols[0],
            subcorpus: cols[1],
            text: cols[2],
            stress: cols[3],
            relax: cols[4],
        });
    }
    Ok(out)
}

/// Parse corpus TSV text.
pub fn parse_corpus(content: &str) -> Result<Vec<AnnotatedExample>, CorpusError> {
    rows(content)?
        .into_iter()
        .map(|r| {
            let err = |message: String| CorpusError::Parse {
                line: r.line,
                message,
            };
            let codes = |f: &str| -> Result<Vec<i32>, CorpusError> {
                parse_code_list(f, false)
                    .map(|v| v.into_iter().flatten().collect())
                    .map_err(err)
            };
            AnnotatedExample::new(
                r.id.to_string(),
                r.text.to_string(),
                codes(r.stress)?,
                codes(r.relax)?,
                r.subcorpus.to_string(),
            )
            .map_err(err)
        })
        .collect()
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<AnnotatedExample>, CorpusError> {
    parse_corpus(&read(path.as_ref())?)
}

/// Serialize examples back to the corpus TSV format.
pub fn write_corpus(examples: &[AnnotatedExample]) -> String {
    let join = |xs: &[i32]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let mut out = format!("{CORPUS_HEADER}\n");
    for ex in examples {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            ex.id,
            ex.subcorpus,
            ex.text,
            join(&ex.coder_stress),
            join(&ex.coder_relax)
        );
    }
    out
}

/// Per-coder codes for agreement statistics. Same file format as a corpus,
/// but individual codes may be `NA` (or empty) when a coder skipped an item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingTable {
    pub ids: Vec<String>,
    pub stress: CodingMatrix,
    pub relax: CodingMatrix,
}

pub fn parse_coding_table(content: &str) -> Result<CodingTable, CorpusError> {
    let mut ids = Vec::new();
    let mut stress = Vec::new();
    let mut relax = Vec::new();
    for r in rows(content)? {
        let err = |message: String| CorpusError::Parse {
            line: r.line,
            message,
        };
        let s = parse_code_list(r.stress, true).map_err(err)?;
        let x = parse_code_list(r.relax, true).map_err(err)?;
        if s.len() != x.len() {
            return Err(err(format!("{} stress codes but {} relaxation codes", s.len(), x.len())));
        }
        if let Some(c) = s.iter().flatten().find(|c| !(-5..=-1).contains(*c)) {
            return Err(err(format!("stress code {c} outside -5..-1")));
        }
        if let Some(c) = x.iter().flatten().find(|c| !(1..=5).contains(*c)) {
            return Err(err(format!("relaxation code {c} outside 1..5")));
        }
        ids.push(r.id.to_string());
        stress.push(s);
        relax.push(x);
    }
    Ok(CodingTable {
        ids,
        stress: CodingMatrix::new(stress)?,
        relax: CodingMatrix::new(relax)?,
    })
}

pub fn load_coding_table(path: impl AsRef<Path>) -> Result<CodingTable, CorpusError> {
    parse_coding_table(&read(path.as_ref())?)
}

/// Result of [`slice`]: the matching rows and whether the label was unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub examples: Vec<AnnotatedExample>,
    pub unknown_label: bool,
}

/// Rows whose sub-corpus label matches `label` (case-insensitive).
pub fn slice(corpus: &[AnnotatedExample], label: &str) -> Slice {
    let examples: Vec<AnnotatedExample> = corpus
        .iter()
        .filter(|ex| ex.subcorpus.eq_ignore_ascii_case(label))
        .cloned()
        .collect();
    Slice {
        unknown_label: examples.is_empty(),
        examples,
    }
}

/// Distinct sub-corpus labels in first-seen order.
pub fn labels(corpus: &[AnnotatedExample]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for ex in corpus {
        if !out.iter().any(|l| l.eq_ignore_ascii_case(&ex.subcorpus)) {
            out.push(ex.subcorpus.clone());
        }
    }
    out
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn repetition_seed(base_seed: u64, rep: usize) -> u64 {
    splitmix64(base_seed.wrapping_add((rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

pub fn fold_optimizer_seed(rep_seed: u64, fold: usize) -> u64 {
    splitmix64(rep_seed ^ (fold as u64 + 1))
}

/// One repetition's assignment of examples to folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// `assignment[i]` is the fold of example `i`.
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }

    /// (training indices, held-out indices) for one fold.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignment.len()).partition(|&i| self.assignment[i] != fold)
    }
}

/// Seeded shuffle, then round-robin assignment to `k` folds.
pub fn make_folds<T>(corpus: &[T], k: usize, seed: u64) -> Result<FoldPlan, CorpusError> {
    if k < 2 {
        return Err(CorpusError::InvalidK);
    }
    if corpus.len() < k {
        return Err(CorpusError::TooSmall {
            len: corpus.len(),
            k,
        });
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; corpus.len()];
    for (position, &example) in order.iter().enumerate() {
        assignment[example] = position % k;
    }
    Ok(FoldPlan {
        k,
        seed,
        assignment,
    })
}

/// Which gold values metrics are computed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GoldMode {
    #[default]
    Rounded,
    Unrounded,
}

fn series<F: Real>(
    corpus: &[AnnotatedExample],
    indices: &[usize],
    predictions: &[DualScore],
    mode: GoldMode,
) -> Result<(PairedSeries<F>, PairedSeries<F>), MetricsError> {
    let int = |x: i8| F::from_i64_lossy(x as i64);
    let gold = |ex: &AnnotatedExample| -> (F, F) {
        match mode {
            GoldMode::Rounded => (
                F::from_i64_lossy(ex.gold_stress as i64),
                F::from_i64_lossy(ex.gold_relax as i64),
            ),
            GoldMode::Unrounded => (
                F::from_f64_lossy(ex.gold_stress_raw),
                F::from_f64_lossy(ex.gold_relax_raw),
            ),
        }
    };
    let (mut ps, mut gs, mut pr, mut gr) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (&i, p) in indices.iter().zip(predictions) {
        let (s, r) = gold(&corpus[i]);
        ps.push(int(p.stress()));
        pr.push(int(p.relaxation()));
        gs.push(s);
        gr.push(r);
    }
    Ok((PairedSeries::new(ps, gs)?, PairedSeries::new(pr, gr)?))
}

/// Metrics for both scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualReport<F> {
    pub stress: MetricsReport<F>,
    pub relax: MetricsReport<F>,
}

/// Score every example with `lex` as-is and compare with the golds.
pub fn evaluate_unsupervised<F: Real>(
    lex: &LexiconSet,
    corpus: &[AnnotatedExample],
    mode: GoldMode,
) -> Result<DualReport<F>, CorpusError> {
    let scorer = Scorer::new(lex);
    let predictions: Vec<DualScore> = corpus.par_iter().map(|ex| scorer.score(&ex.text)).collect();
    let all: Vec<usize> = (0..corpus.len()).collect();
    let (s, r) = series::<F>(corpus, &all, &predictions, mode)?;
    Ok(DualReport {
        stress: MetricsReport::evaluate(&s),
        relax: MetricsReport::evaluate(&r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossvalOptions {
    pub k: usize,
    pub reps: usize,
    pub base_seed: u64,
    /// Hill-climb on the training folds; when false the lexicon is used as-is.
    pub supervised: bool,
    pub gold: GoldMode,
    /// Optimizer settings; the seed is replaced per fold.
    pub optimizer: OptimizerConfig,
}

impl Default for CrossvalOptions {
    fn default() -> Self {
        CrossvalOptions {
            k: 10,
            reps: 30,
            base_seed: 0,
            supervised: true,
            gold: GoldMode::Rounded,
            optimizer: OptimizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult<F> {
    pub rep: usize,
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub changes_made: usize,
    pub report: DualReport<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionResult<F> {
    pub rep: usize,
    pub seed: u64,
    /// Metrics over the pooled held-out predictions of all folds.
    pub report: DualReport<F>,
    pub folds: Vec<FoldResult<F>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossvalReport<F> {
    /// Arithmetic mean of the repetition-level metrics.
    pub mean: DualReport<F>,
    /// Repetitions whose Pearson r was undefined and left out of the mean.
    pub stress_pearson_skipped: usize,
    pub relax_pearson_skipped: usize,
    pub repetitions: Vec<RepetitionResult<F>>,
}

pub const CV_LOG_HEADER: &str = "rep\tfold\tscale\tn\texact\twithin1\tpearson\tmad";

impl<F: Real> CrossvalReport<F> {
    /// One row per (rep, fold, scale); fold `all` rows hold the pooled
    /// repetition-level metrics that are averaged into [`Self::mean`].
    pub fn log_tsv(&self) -> String {
        let mut out = format!("{CV_LOG_HEADER}\n");
        for rep in &self.repetitions {
            for f in &rep.folds {
                let _ = writeln!(out, "{}\t{}\tstress\t{}", rep.rep, f.fold, f.report.stress.to_tsv_row());
                let _ = writeln!(out, "{}\t{}\trelax\t{}", rep.rep, f.fold, f.report.relax.to_tsv_row());
            }
            let _ = writeln!(out, "{}\tall\tstress\t{}", rep.rep, full_row(&rep.report.stress));
            let _ = writeln!(out, "{}\tall\trelax\t{}", rep.rep, full_row(&rep.report.relax));
        }
        out
    }
}

/// Like [`MetricsReport::to_tsv_row`] at full precision, for recomputation.
fn full_row<F: Real>(r: &MetricsReport<F>) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}",
        r.n,
        r.exact_pct,
        r.within1_pct,
        r.pearson.map_or_else(|| "NA".to_string(), |p| p.to_string()),
        r.mad
    )
}

fn average<F: Real>(reports: &[MetricsReport<F>], n: usize) -> (MetricsReport<F>, usize) {
    let count = F::from_usize_lossy(reports.len());
    let mean = |f: fn(&MetricsReport<F>) -> F| reports.iter().map(f).sum::<F>() / count;
    let defined: Vec<F> = reports.iter().filter_map(|r| r.pearson).collect();
    let skipped = reports.len() - defined.len();
    let pearson = crate::scalar::mean(&defined);
    (
        MetricsReport {
            n,
            exact_pct: mean(|r| r.exact_pct),
            within1_pct: mean(|r| r.within1_pct),
            pearson,
            mad: mean(|r| r.mad),
        },
        skipped,
    )
}

/// Repeated k-fold cross-validation of the (optionally hill-climbed) lexicon.
///
/// For each repetition and fold the lexicon is refined on the other folds and
/// used to score the held-out fold. Held-out predictions are pooled per
/// repetition, metrics are computed per repetition, and the repetition-level
/// values are averaged. Repetitions run in parallel; the result is identical
/// to a sequential run.
pub fn crossval_supervised<F: Real>(
    lex: &LexiconSet,
    corpus: &[AnnotatedExample],
    opts: &CrossvalOptions,
) -> Result<CrossvalReport<F>, CorpusError> {
    if opts.k < 2 {
        return Err(CorpusError::InvalidK);
    }
    if corpus.len() < opts.k {
        return Err(CorpusError::TooSmall {
            len: corpus.len(),
            k: opts.k,
        });
    }
    let scorer = Scorer::new(lex);
    let compiled: Vec<CompiledText> = corpus.par_iter().map(|ex| scorer.compile(&ex.text)).collect();

    let repetitions: Vec<RepetitionResult<F>> = (0..opts.reps)
        .into_par_iter()
        .map(|rep| run_repetition(lex, corpus, &compiled, opts, rep))
        .collect::<Result<_, _>>()?;

    let stress: Vec<MetricsReport<F>> = repetitions.iter().map(|r| r.report.stress).collect();
    let relax: Vec<MetricsReport<F>> = repetitions.iter().map(|r| r.report.relax).collect();
    let (stress_mean, stress_skipped) = average(&stress, corpus.len());
    let (relax_mean, relax_skipped) = average(&relax, corpus.len());
    Ok(CrossvalReport {
        mean: DualReport {
            stress: stress_mean,
            relax: relax_mean,
        },
        stress_pearson_skipped: stress_skipped,
        relax_pearson_skipped: relax_skipped,
        repetitions,
    })
}

fn run_repetition<F: Real>(
    lex: &LexiconSet,
    corpus: &[AnnotatedExample],
    compiled: &[CompiledText],
    opts: &CrossvalOptions,
    rep: usize,
) -> Result<RepetitionResult<F>, CorpusError> {
    let seed = repetition_seed(opts.base_seed, rep);
    let plan = make_folds(corpus, opts.k, seed)?;
    let mut pooled_index = Vec::with_capacity(corpus.len());
    let mut pooled_pred = Vec::with_capacity(corpus.len());
    let mut folds = Vec::with_capacity(opts.k);

    for fold in 0..opts.k {
        let (train, test) = plan.split(fold);
        let (predictions, changes_made) = if opts.supervised {
            let examples: Vec<TrainingExample<'_>> = train
                .iter()
                .map(|&i| TrainingExample {
                    text: &compiled[i],
                    gold: corpus[i].gold(),
                })
                .collect();
            let cfg = OptimizerConfig {
                seed: fold_optimizer_seed(seed, fold),
                ..opts.optimizer
            };
            let (strengths, report) = optimizer::hill_climb_compiled(lex, &examples, &cfg)?;
            (predict(&strengths, compiled, &test), report.changes_made)
        } else {
            (predict(lex, compiled, &test), 0)
        };
        let (s, r) = series::<F>(corpus, &test, &predictions, opts.gold)?;
        folds.push(FoldResult {
            rep,
            fold,
            changes_made,
            report: DualReport {
                stress: MetricsReport::evaluate(&s),
                relax: MetricsReport::evaluate(&r),
            },
            train,
            test: test.clone(),
        });
        pooled_index.extend(test);
        pooled_pred.extend(predictions);
    }

    let (s, r) = series::<F>(corpus, &pooled_index, &pooled_pred, opts.gold)?;
    Ok(RepetitionResult {
        rep,
        seed,
        report: DualReport {
            stress: MetricsReport::evaluate(&s),
            relax: MetricsReport::evaluate(&r),
        },
        folds,
    })
}

fn predict<S: Strengths + ?Sized>(strengths: &S, compiled: &[CompiledText], idx: &[usize]) -> Vec<DualScore> {
    idx.iter().map(|&i| compiled[i].evaluate(strengths)).collect()
}
