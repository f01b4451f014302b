//! Generic machine-learning comparison: n-gram features, information-gain
//! feature selection and two classifiers (multinomial Naive Bayes and
//! one-vs-rest logistic regression) predicting the five codes of one scale.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{self, AnnotatedExample, CorpusError};
use crate::lexicon::TermKind;
use crate::metrics::{MetricsError, MetricsReport, PairedSeries};
use crate::scalar::Real;
use crate::textproc;

/// Format tag written at the top of serialized models.
pub const MODEL_MAGIC: &str = "tensilex-model";
pub const MODEL_VERSION: u32 = 1;

/// Feature-set sizes swept by default.
pub const SWEEP_SIZES: [usize; 10] = [100, 200, 300, 400, 500, 600, 700, 800, 900, 1000];

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("information gain needs at least two distinct labels")]
    DegenerateLabels,
    #[error("training set is empty")]
    EmptyCorpus,
    #[error("{0} documents but {1} labels")]
    LengthMismatch(usize, usize),
    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },
    #[error("model I/O on {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// N-gram counts of one text plus its unigram, bigram and trigram totals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureVector {
    pub ngrams: BTreeMap<String, u32>,
    /// Total number of unigrams, bigrams and trigrams in the text.
    pub dense: [u32; 3],
}

/// Unigrams, bigrams and trigrams of a text. Punctuation runs are single
/// terms, and bigrams and trigrams never cross a sentence boundary.
pub fn extract_features(text: &str) -> FeatureVector {
    let mut fv = FeatureVector::default();
    for sentence in textproc::segment_sentences(text) {
        let tokens: Vec<String> = textproc::tokenize(&sentence)
            .into_iter()
            .map(|t| t.normalized)
            .collect();
        for n in 1..=3 {
            for window in tokens.windows(n) {
                *fv.ngrams.entry(window.join(" ")).or_insert(0) += 1;
                fv.dense[n - 1] += 1;
            }
        }
    }
    fv
}

fn entropy<F: Real>(counts: &[usize]) -> F {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return F::zero();
    }
    let total = F::from_usize_lossy(total);
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = F::from_usize_lossy(c) / total;
            -p * p.log2()
        })
        .sum()
}

/// Vocabulary with document frequencies and information gain.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable<F> {
    /// Feature id `i` is `vocabulary[i]`; sorted lexicographically.
    pub vocabulary: Vec<String>,
    pub doc_freq: Vec<usize>,
    pub gain: Vec<F>,
    /// Entropy of the label distribution in bits.
    pub label_entropy: F,
}

impl<F> FeatureTable<F> {
    pub fn id(&self, ngram: &str) -> Option<usize> {
        self.vocabulary
            .binary_search_by(|v| v.as_str().cmp(ngram))
            .ok()
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }
}

/// Information gain of each n-gram's presence about the label, in bits.
pub fn information_gain<F: Real>(
    docs: &[FeatureVector],
    labels: &[i32],
) -> Result<FeatureTable<F>, BaselineError> {
    if docs.len() != labels.len() {
        return Err(BaselineError::LengthMismatch(docs.len(), labels.len()));
    }
    let mut classes: Vec<i32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(BaselineError::DegenerateLabels);
    }
    let class_of = |l: i32| classes.binary_search(&l).expect("label present");
    let mut class_totals = vec![0usize; classes.len()];
    for &l in labels {
        class_totals[class_of(l)] += 1;
    }

    let mut present: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (doc, &l) in docs.iter().zip(labels) {
        let c = class_of(l);
        for (ngram, &count) in &doc.ngrams {
            if count > 0 {
                present
                    .entry(ngram.as_str())
                    .or_insert_with(|| vec![0; classes.len()])[c] += 1;
            }
        }
    }

    let n = F::from_usize_lossy(docs.len());
    let label_entropy: F = entropy(&class_totals);
    let mut vocabulary = Vec::with_capacity(present.len());
    let mut doc_freq = Vec::with_capacity(present.len());
    let mut gain = Vec::with_capacity(present.len());
    let mut absent = vec![0usize; classes.len()];
    for (ngram, with) in present {
        let df: usize = with.iter().sum();
        for (a, (&t, &w)) in absent.iter_mut().zip(class_totals.iter().zip(&with)) {
            *a = t - w;
        }
        let p = F::from_usize_lossy(df) / n;
        let conditional = p * entropy::<F>(&with) + (F::one() - p) * entropy::<F>(&absent);
        vocabulary.push(ngram.to_string());
        doc_freq.push(df);
        gain.push((label_entropy - conditional).max(F::zero()));
    }
    Ok(FeatureTable {
        vocabulary,
        doc_freq,
        gain,
        label_entropy,
    })
}

/// The n-grams a model is trained on. The three count features are always
/// available in addition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSubset {
    pub ngrams: Vec<String>,
}

/// Top `n` features by gain; equal gains keep the lexicographically smaller
/// n-gram first.
pub fn select_top<F: Real>(table: &FeatureTable<F>, n: usize) -> FeatureSubset {
    let mut order: Vec<usize> = (0..table.len()).collect();
    order.sort_by(|&a, &b| {
        table.gain[b]
            .partial_cmp(&table.gain[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| table.vocabulary[a].cmp(&table.vocabulary[b]))
    });
    FeatureSubset {
        ngrams: order
            .into_iter()
            .take(n)
            .map(|i| table.vocabulary[i].clone())
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifierKind {
    NaiveBayes,
    Logistic,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "nb",
            ClassifierKind::Logistic => "logistic",
        }
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nb" | "naive_bayes" | "bayes" => Ok(ClassifierKind::NaiveBayes),
            "logistic" | "lr" => Ok(ClassifierKind::Logistic),
            other => Err(format!("unknown classifier `{other}`")),
        }
    }
}

/// Repo defaults for logistic regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticConfig {
    pub l2: f64,
    pub step: f64,
    pub max_epochs: usize,
    /// Stop once the per-epoch loss change is below this.
    pub tolerance: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            l2: 1e-2,
            step: 0.1,
            max_epochs: 500,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Params<F> {
    NaiveBayes {
        log_prior: Vec<F>,
        /// `[class][feature]`
        log_likelihood: Vec<Vec<F>>,
    },
    Logistic {
        /// Divisors applied to the three count features before normalisation.
        dense_scale: [F; 3],
        /// `[class][feature]`, n-gram columns then the three count columns.
        weights: Vec<Vec<F>>,
        bias: Vec<F>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel<F> {
    kind: ClassifierKind,
    classes: Vec<i32>,
    features: Vec<String>,
    index: HashMap<String, usize>,
    params: Params<F>,
    /// Per class, training loss after each epoch (logistic only; not persisted).
    losses: Vec<Vec<F>>,
}

fn index_of(features: &[String]) -> HashMap<String, usize> {
    features
        .iter()
        .enumerate()
        .map(|(i, f)| (f.clone(), i))
        .collect()
}

/// Sparse n-gram counts restricted to the frozen subset.
fn sparse_counts<F: Real>(index: &HashMap<String, usize>, fv: &FeatureVector) -> Vec<(usize, F)> {
    let mut out: Vec<(usize, F)> = fv
        .ngrams
        .iter()
        .filter_map(|(g, &c)| index.get(g).map(|&i| (i, F::from_usize_lossy(c as usize))))
        .collect();
    out.sort_by_key(|&(i, _)| i);
    out
}

/// Logistic input: counts plus scaled totals, normalised to unit length.
fn logistic_input<F: Real>(
    index: &HashMap<String, usize>,
    dense_scale: &[F; 3],
    fv: &FeatureVector,
) -> Vec<(usize, F)> {
    let n = index.len();
    let mut x = sparse_counts::<F>(index, fv);
    for (j, (&d, &s)) in fv.dense.iter().zip(dense_scale).enumerate() {
        if d > 0 {
            x.push((n + j, F::from_usize_lossy(d as usize) / s));
        }
    }
    let norm = x.iter().map(|&(_, v)| v * v).sum::<F>().sqrt();
    if norm > F::zero() {
        for (_, v) in &mut x {
            *v = *v / norm;
        }
    }
    x
}

fn sigmoid<F: Real>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus<F: Real>(z: F) -> F {
    if z > F::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Index of the best score; ties go to the code nearest neutral, then to the
/// lower index.
fn argmax_neutral<F: Real>(scores: &[F], classes: &[i32]) -> usize {
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best]
            || (scores[i] == scores[best] && classes[i].abs() < classes[best].abs())
        {
            best = i;
        }
    }
    best
}

/// Train a classifier on documents with the given frozen feature subset.
pub fn train<F: Real>(
    kind: ClassifierKind,
    docs: &[FeatureVector],
    labels: &[i32],
    subset: &FeatureSubset,
    config: &LogisticConfig,
) -> Result<TrainedModel<F>, BaselineError> {
    if docs.len() != labels.len() {
        return Err(BaselineError::LengthMismatch(docs.len(), labels.len()));
    }
    if docs.is_empty() {
        return Err(BaselineError::EmptyCorpus);
    }
    let mut classes: Vec<i32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let class_of = |l: i32| classes.binary_search(&l).expect("label present");
    let features = subset.ngrams.clone();
    let index = index_of(&features);
    let v = features.len();

    let (params, losses) = match kind {
        ClassifierKind::NaiveBayes => {
            let mut class_docs = vec![0usize; classes.len()];
            let mut counts = vec![vec![F::zero(); v]; classes.len()];
            for (doc, &l) in docs.iter().zip(labels) {
                let c = class_of(l);
                class_docs[c] += 1;
                for (i, x) in sparse_counts::<F>(&index, doc) {
                    counts[c][i] = counts[c][i] + x;
                }
            }
            let n = F::from_usize_lossy(docs.len());
            let log_prior = class_docs
                .iter()
                .map(|&d| (F::from_usize_lossy(d) / n).ln())
                .collect();
            let log_likelihood = counts
                .iter()
                .map(|row| {
                    let total = row.iter().copied().sum::<F>() + F::from_usize_lossy(v);
                    row.iter().map(|&c| ((c + F::one()) / total).ln()).collect()
                })
                .collect();
            (
                Params::NaiveBayes {
                    log_prior,
                    log_likelihood,
                },
                Vec::new(),
            )
        }
        ClassifierKind::Logistic => {
            let mut dense_scale = [F::one(); 3];
            for (j, s) in dense_scale.iter_mut().enumerate() {
                let max = docs.iter().map(|d| d.dense[j]).max().unwrap_or(0);
                *s = F::from_usize_lossy(max.max(1) as usize);
            }
            let inputs: Vec<Vec<(usize, F)>> = docs
                .iter()
                .map(|d| logistic_input(&index, &dense_scale, d))
                .collect();
            let dims = v + 3;
            let mut weights = Vec::with_capacity(classes.len());
            let mut bias = Vec::with_capacity(classes.len());
            let mut losses = Vec::with_capacity(classes.len());
            for &class in &classes {
                let targets: Vec<F> = labels
                    .iter()
                    .map(|&l| if l == class { F::one() } else { F::zero() })
                    .collect();
                let (w, b, history) = fit_binary(&inputs, &targets, dims, config);
                weights.push(w);
                bias.push(b);
                losses.push(history);
            }
            (
                Params::Logistic {
                    dense_scale,
                    weights,
                    bias,
                },
                losses,
            )
        }
    };
    Ok(TrainedModel {
        kind,
        classes,
        features,
        index,
        params,
        losses,
    })
}

fn binary_loss<F: Real>(
    inputs: &[Vec<(usize, F)>],
    targets: &[F],
    w: &[F],
    b: F,
    l2: F,
) -> F {
    let n = F::from_usize_lossy(inputs.len());
    let data: F = inputs
        .iter()
        .zip(targets)
        .map(|(x, &y)| {
            let z = x.iter().map(|&(i, v)| w[i] * v).sum::<F>() + b;
            // y ? log(1+e^-z) : log(1+e^z)
            if y > F::half() {
                softplus(-z)
            } else {
                softplus(z)
            }
        })
        .sum::<F>()
        / n;
    data + l2 * F::half() * w.iter().map(|&x| x * x).sum::<F>()
}

/// Full-batch gradient descent on L2-regularised log loss from zero weights.
fn fit_binary<F: Real>(
    inputs: &[Vec<(usize, F)>],
    targets: &[F],
    dims: usize,
    config: &LogisticConfig,
) -> (Vec<F>, F, Vec<F>) {
    let l2 = F::from_f64_lossy(config.l2);
    let step = F::from_f64_lossy(config.step);
    let tolerance = F::from_f64_lossy(config.tolerance);
    let n = F::from_usize_lossy(inputs.len());
    let mut w = vec![F::zero(); dims];
    let mut b = F::zero();
    let mut history = Vec::new();
    let mut previous = binary_loss(inputs, targets, &w, b, l2);
    let mut grad = vec![F::zero(); dims];
    for _ in 0..config.max_epochs {
        grad.iter_mut().for_each(|g| *g = F::zero());
        let mut grad_b = F::zero();
        for (x, &y) in inputs.iter().zip(targets) {
            let z = x.iter().map(|&(i, v)| w[i] * v).sum::<F>() + b;
            let err = sigmoid(z) - y;
            for &(i, v) in x {
                grad[i] = grad[i] + err * v;
            }
            grad_b = grad_b + err;
        }
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi = *wi - step * (*gi / n + l2 * *wi);
        }
        b = b - step * grad_b / n;
        let loss = binary_loss(inputs, targets, &w, b, l2);
        history.push(loss);
        let delta = (previous - loss).abs();
        previous = loss;
        if delta < tolerance {
            break;
        }
    }
    (w, b, history)
}

fn model_err(line: usize, message: String) -> BaselineError {
    BaselineError::ModelFormat { line, message }
}

struct ModelReader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> ModelReader<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str), BaselineError> {
        let line = self.lines.get(self.pos).copied().ok_or_else(|| {
            model_err(self.pos + 1, format!("unexpected end of file, expected {what}"))
        })?;
        self.pos += 1;
        Ok((self.pos, line))
    }

    fn field(&mut self, key: &str) -> Result<(usize, Vec<&'a str>), BaselineError> {
        let (n, line) = self.next(key)?;
        let mut cols = line.split('\t');
        if cols.next() != Some(key) {
            return Err(model_err(n, format!("expected `{key}`")));
        }
        Ok((n, cols.collect()))
    }

    fn floats<F: Real>(&mut self, key: &str, len: Option<usize>) -> Result<Vec<F>, BaselineError> {
        let (n, cols) = self.field(key)?;
        let values = cols
            .iter()
            .map(|c| c.parse::<F>().map_err(|_| model_err(n, format!("bad number `{c}`"))))
            .collect::<Result<Vec<F>, _>>()?;
        match len {
            Some(l) if l != values.len() => Err(model_err(
                n,
                format!("`{key}` has {} values, expected {l}", values.len()),
            )),
            _ => Ok(values),
        }
    }
}

impl<F: Real> TrainedModel<F> {
    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    pub fn classes(&self) -> &[i32] {
        &self.classes
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn training_losses(&self) -> &[Vec<F>] {
        &self.losses
    }

    /// Per-class decision scores (log joint for Naive Bayes, logits for
    /// logistic regression).
    pub fn scores(&self, fv: &FeatureVector) -> Vec<F> {
        match &self.params {
            Params::NaiveBayes {
                log_prior,
                log_likelihood,
            } => {
                let x = sparse_counts::<F>(&self.index, fv);
                log_prior
                    .iter()
                    .zip(log_likelihood)
                    .map(|(&p, ll)| p + x.iter().map(|&(i, c)| c * ll[i]).sum::<F>())
                    .collect()
            }
            Params::Logistic {
                dense_scale,
                weights,
                bias,
            } => {
                let x = logistic_input(&self.index, dense_scale, fv);
                weights
                    .iter()
                    .zip(bias)
                    .map(|(w, &b)| x.iter().map(|&(i, v)| w[i] * v).sum::<F>() + b)
                    .collect()
            }
        }
    }

    /// Class probabilities: the Naive Bayes posterior, or normalised
    /// one-vs-rest sigmoids for logistic regression.
    pub fn probabilities(&self, fv: &FeatureVector) -> Vec<F> {
        let scores = self.scores(fv);
        let probs: Vec<F> = match self.params {
            Params::NaiveBayes { .. } => {
                let max = scores.iter().copied().fold(F::neg_infinity(), F::max);
                scores.iter().map(|&s| (s - max).exp()).collect()
            }
            Params::Logistic { .. } => scores.iter().map(|&s| sigmoid(s)).collect(),
        };
        let total: F = probs.iter().copied().sum();
        probs.iter().map(|&p| p / total).collect()
    }

    pub fn predict(&self, fv: &FeatureVector) -> i32 {
        if self.classes.len() == 1 {
            return self.classes[0];
        }
        self.classes[argmax_neutral(&self.scores(fv), &self.classes)]
    }

    /// Versioned flat text serialization.
    pub fn to_model_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_MAGIC}\t{MODEL_VERSION}");
        let _ = writeln!(out, "kind\t{}", self.kind.name());
        let join = |xs: &[F]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("\t");
        let classes: Vec<String> = self.classes.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "classes\t{}", classes.join("\t"));
        let _ = writeln!(out, "features\t{}", self.features.len());
        for f in &self.features {
            let _ = writeln!(out, "{f}");
        }
        match &self.params {
            Params::NaiveBayes {
                log_prior,
                log_likelihood,
            } => {
                let _ = writeln!(out, "log_prior\t{}", join(log_prior));
                for row in log_likelihood {
                    let _ = writeln!(out, "row\t{}", join(row));
                }
            }
            Params::Logistic {
                dense_scale,
                weights,
                bias,
            } => {
                let _ = writeln!(out, "dense_scale\t{}", join(dense_scale));
                let _ = writeln!(out, "bias\t{}", join(bias));
                for row in weights {
                    let _ = writeln!(out, "row\t{}", join(row));
                }
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_model_string(s: &str) -> Result<Self, BaselineError> {
        let mut r = ModelReader {
            lines: s.lines().collect(),
            pos: 0,
        };
        let (n, header) = r.next("header")?;
        if header != format!("{MODEL_MAGIC}\t{MODEL_VERSION}") {
            return Err(model_err(n, format!("unsupported header `{header}`")));
        }
        let (n, cols) = r.field("kind")?;
        let kind: ClassifierKind = cols
            .first()
            .ok_or_else(|| model_err(n, "missing kind".into()))?
            .parse()
            .map_err(|m| model_err(n, m))?;
        let (n, cols) = r.field("classes")?;
        let classes = cols
            .iter()
            .map(|c| c.parse::<i32>().map_err(|_| model_err(n, format!("bad class `{c}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if classes.is_empty() {
            return Err(model_err(n, "no classes".into()));
        }
        let (n, cols) = r.field("features")?;
        let count: usize = cols
            .first()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| model_err(n, "bad feature count".into()))?;
        let mut features = Vec::with_capacity(count);
        for _ in 0..count {
            features.push(r.next("feature")?.1.to_string());
        }

        let params = match kind {
            ClassifierKind::NaiveBayes => {
                let log_prior = r.floats("log_prior", Some(classes.len()))?;
                let log_likelihood = (0..classes.len())
                    .map(|_| r.floats("row", Some(count)))
                    .collect::<Result<_, _>>()?;
                Params::NaiveBayes {
                    log_prior,
                    log_likelihood,
                }
            }
            ClassifierKind::Logistic => {
                let ds = r.floats("dense_scale", Some(3))?;
                let dense_scale = [ds[0], ds[1], ds[2]];
                let bias = r.floats("bias", Some(classes.len()))?;
                let weights = (0..classes.len())
                    .map(|_| r.floats("row", Some(count + 3)))
                    .collect::<Result<_, _>>()?;
                Params::Logistic {
                    dense_scale,
                    weights,
                    bias,
                }
            }
        };
        let (n, line) = r.next("end")?;
        if line != "end" {
            return Err(model_err(n, "expected `end`".into()));
        }
        Ok(TrainedModel {
            kind,
            index: index_of(&features),
            classes,
            features,
            params,
            losses: Vec::new(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BaselineError> {
        let path = path.as_ref();
        fs::write(path, self.to_model_string()).map_err(|source| BaselineError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BaselineError> {
        let path = path.as_ref();
        let s = fs::read_to_string(path).map_err(|source| BaselineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_model_string(&s)
    }
}

fn gold_code(ex: &AnnotatedExample, scale: TermKind) -> i32 {
    match scale {
        TermKind::Stress => ex.gold_stress,
        TermKind::Relaxation => ex.gold_relax,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOptions {
    pub k: usize,
    pub reps: usize,
    pub base_seed: u64,
    pub classifiers: Vec<ClassifierKind>,
    pub feature_counts: Vec<usize>,
    pub scales: Vec<TermKind>,
    pub logistic: LogisticConfig,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        BaselineOptions {
            k: 10,
            reps: 30,
            base_seed: 0,
            classifiers: vec![ClassifierKind::NaiveBayes, ClassifierKind::Logistic],
            feature_counts: SWEEP_SIZES.to_vec(),
            scales: vec![TermKind::Stress, TermKind::Relaxation],
            logistic: LogisticConfig::default(),
        }
    }
}

/// Cross-validated metrics for one (classifier, feature count, scale).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell<F> {
    pub classifier: ClassifierKind,
    pub n_features: usize,
    pub scale: TermKind,
    /// Mean of the repetition-level metrics.
    pub report: MetricsReport<F>,
    pub pearson_skipped: usize,
}

pub const SWEEP_TSV_HEADER: &str =
    "classifier\tn_features\tscale\tn\texact\twithin1\tpearson\tmad\tbest";

/// Metric names each cell is best at within its (classifier, scale) group.
/// Higher is better except for MAD; ties go to the smaller feature count.
pub fn best_marks<F: Real>(cells: &[SweepCell<F>]) -> Vec<Vec<&'static str>> {
    let mut marks = vec![Vec::new(); cells.len()];
    let mut groups: Vec<(ClassifierKind, TermKind)> = Vec::new();
    for c in cells {
        if !groups.contains(&(c.classifier, c.scale)) {
            groups.push((c.classifier, c.scale));
        }
    }
    type Pick<F> = fn(&MetricsReport<F>) -> Option<F>;
    let metrics: [(&str, Pick<F>, bool); 4] = [
        ("exact", |r| Some(r.exact_pct), true),
        ("within1", |r| Some(r.within1_pct), true),
        ("pearson", |r| r.pearson, true),
        ("mad", |r| Some(r.mad), false),
    ];
    for (classifier, scale) in groups {
        let members: Vec<usize> = (0..cells.len())
            .filter(|&i| cells[i].classifier == classifier && cells[i].scale == scale)
            .collect();
        for (name, pick, higher) in metrics {
            let mut best: Option<(usize, F)> = None;
            for &i in &members {
                let Some(v) = pick(&cells[i].report) else { continue };
                let better = match best {
                    None => true,
                    Some((j, b)) => {
                        (if higher { v > b } else { v < b })
                            || (v == b && cells[i].n_features < cells[j].n_features)
                    }
                };
                if better {
                    best = Some((i, v));
                }
            }
            if let Some((i, _)) = best {
                marks[i].push(name);
            }
        }
    }
    marks
}

pub fn sweep_tsv<F: Real>(cells: &[SweepCell<F>]) -> String {
    let marks = best_marks(cells);
    let mut out = format!("{SWEEP_TSV_HEADER}\n");
    for (c, m) in cells.iter().zip(marks) {
        let best = if m.is_empty() { "-".to_string() } else { m.join(",") };
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            c.classifier.name(),
            c.n_features,
            c.scale,
            c.report.to_tsv_row(),
            best
        );
    }
    out
}

type CellKey = (usize, usize, usize); // (classifier, n_features, scale) positions

/// Repeated k-fold cross-validation of the baseline classifiers. Feature
/// selection is redone inside every training fold.
pub fn crossval_baseline<F: Real>(
    corpus: &[AnnotatedExample],
    opts: &BaselineOptions,
) -> Result<Vec<SweepCell<F>>, BaselineError> {
    let features: Vec<FeatureVector> = corpus.par_iter().map(|ex| extract_features(&ex.text)).collect();
    let per_rep: Vec<BTreeMap<CellKey, MetricsReport<F>>> = (0..opts.reps)
        .into_par_iter()
        .map(|rep| baseline_repetition(corpus, &features, opts, rep))
        .collect::<Result<_, _>>()?;

    let mut cells = Vec::new();
    for (ci, &classifier) in opts.classifiers.iter().enumerate() {
        for (si, &scale) in opts.scales.iter().enumerate() {
            for (ni, &n_features) in opts.feature_counts.iter().enumerate() {
                let reports: Vec<MetricsReport<F>> =
                    per_rep.iter().map(|m| m[&(ci, ni, si)]).collect();
                let count = F::from_usize_lossy(reports.len());
                let mean = |f: fn(&MetricsReport<F>) -> F| reports.iter().map(f).sum::<F>() / count;
                let defined: Vec<F> = reports.iter().filter_map(|r| r.pearson).collect();
                cells.push(SweepCell {
                    classifier,
                    n_features,
                    scale,
                    report: MetricsReport {
                        n: corpus.len(),
                        exact_pct: mean(|r| r.exact_pct),
                        within1_pct: mean(|r| r.within1_pct),
                        pearson: crate::scalar::mean(&defined),
                        mad: mean(|r| r.mad),
                    },
                    pearson_skipped: reports.len() - defined.len(),
                });
            }
        }
    }
    Ok(cells)
}

fn baseline_repetition<F: Real>(
    corpus: &[AnnotatedExample],
    features: &[FeatureVector],
    opts: &BaselineOptions,
    rep: usize,
) -> Result<BTreeMap<CellKey, MetricsReport<F>>, BaselineError> {
    let plan = corpus::make_folds(corpus, opts.k, corpus::repetition_seed(opts.base_seed, rep))?;
    let mut pooled: BTreeMap<CellKey, (Vec<i32>, Vec<i32>)> = BTreeMap::new();
    for fold in 0..opts.k {
        let (train_idx, test) = plan.split(fold);
        let train_docs: Vec<FeatureVector> = train_idx.iter().map(|&i| features[i].clone()).collect();
        for (si, &scale) in opts.scales.iter().enumerate() {
            let labels: Vec<i32> = train_idx.iter().map(|&i| gold_code(&corpus[i], scale)).collect();
            // a single-label training fold has no informative features
            let table = match information_gain::<F>(&train_docs, &labels) {
                Ok(t) => Some(t),
                Err(BaselineError::DegenerateLabels) => None,
                Err(e) => return Err(e),
            };
            for (ni, &n_features) in opts.feature_counts.iter().enumerate() {
                let subset = table.as_ref().map_or(FeatureSubset { ngrams: Vec::new() }, |t| {
                    select_top(t, n_features)
                });
                for (ci, &kind) in opts.classifiers.iter().enumerate() {
                    let model = train::<F>(kind, &train_docs, &labels, &subset, &opts.logistic)?;
                    let entry = pooled.entry((ci, ni, si)).or_default();
                    for &i in &test {
                        entry.0.push(model.predict(&features[i]));
                        entry.1.push(gold_code(&corpus[i], scale));
                    }
                }
            }
        }
    }
    pooled
        .into_iter()
        .map(|(key, (pred, gold))| {
            let s = PairedSeries::<F>::from_codes(&pred, &gold)?;
            Ok((key, MetricsReport::evaluate(&s)))
        })
        .collect()
}

/// Train one model on the whole corpus for `scale` with the top `n` features.
pub fn train_full<F: Real>(
    corpus: &[AnnotatedExample],
    kind: ClassifierKind,
    scale: TermKind,
    n_features: usize,
    logistic: &LogisticConfig,
) -> Result<TrainedModel<F>, BaselineError> {
    let docs: Vec<FeatureVector> = corpus.iter().map(|ex| extract_features(&ex.text)).collect();
    let labels: Vec<i32> = corpus.iter().map(|ex| gold_code(ex, scale)).collect();
    let subset = match information_gain::<F>(&docs, &labels) {
        Ok(t) => select_top(&t, n_features),
        Err(BaselineError::DegenerateLabels) => FeatureSubset { ngrams: Vec::new() },
        Err(e) => return Err(e),
    };
    train(kind, &docs, &labels, &subset, logistic)
}
