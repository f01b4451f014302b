//! Evaluation statistics: exact and within-1 accuracy, Pearson correlation,
//! mean absolute deviation, weighted Krippendorff's alpha and cross-tabulation.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("empty series")]
    EmptySeries,
    #[error("length mismatch: {0} predictions vs {1} golds")]
    LengthError(usize, usize),
    #[error("non-finite value in series")]
    NonFinite,
    #[error("value {0} outside the range {1}..={2}")]
    OutOfRange(i32, i32, i32),
    #[error("coding matrix needs at least two coders, found {0}")]
    TooFewCoders(usize),
    #[error("row {0} has {1} cells, expected {2}")]
    RaggedRow(usize, usize, usize),
    #[error("no item has two or more codes")]
    InsufficientData,
}

/// Paired predictions and gold values on one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries<F> {
    predictions: Vec<F>,
    golds: Vec<F>,
}

impl<F: Real> PairedSeries<F> {
    pub fn new(predictions: Vec<F>, golds: Vec<F>) -> Result<Self, MetricsError> {
        if predictions.len() != golds.len() {
            return Err(MetricsError::LengthError(predictions.len(), golds.len()));
        }
        if predictions.is_empty() {
            return Err(MetricsError::EmptySeries);
        }
        if predictions.iter().chain(&golds).any(|x| !x.is_finite()) {
            return Err(MetricsError::NonFinite);
        }
        Ok(PairedSeries { predictions, golds })
    }

    pub fn from_codes(predictions: &[i32], golds: &[i32]) -> Result<Self, MetricsError> {
        let conv = |xs: &[i32]| xs.iter().map(|&x| F::from_i64_lossy(x as i64)).collect();
        Self::new(conv(predictions), conv(golds))
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    pub fn predictions(&self) -> &[F] {
        &self.predictions
    }

    pub fn golds(&self) -> &[F] {
        &self.golds
    }

    fn pairs(&self) -> impl Iterator<Item = (F, F)> + '_ {
        self.predictions.iter().copied().zip(self.golds.iter().copied())
    }
}

/// Mean absolute deviation `(1/n) Σ |pred - gold|`.
pub fn mad<F: Real>(s: &PairedSeries<F>) -> F {
    s.pairs().map(|(p, g)| (p - g).abs()).sum::<F>() / F::from_usize_lossy(s.len())
}

/// Sample Pearson correlation; `None` when either side has zero variance.
pub fn pearson<F: Real>(s: &PairedSeries<F>) -> Option<F> {
    let n = F::from_usize_lossy(s.len());
    let mp = s.predictions.iter().copied().sum::<F>() / n;
    let mg = s.golds.iter().copied().sum::<F>() / n;
    let (mut sxy, mut sxx, mut syy) = (F::zero(), F::zero(), F::zero());
    for (p, g) in s.pairs() {
        let (dp, dg) = (p - mp, g - mg);
        sxy = sxy + dp * dg;
        sxx = sxx + dp * dp;
        syy = syy + dg * dg;
    }
    if sxx <= F::zero() || syy <= F::zero() {
        return None;
    }
    // the n-1 factors of the sample covariance and deviations cancel
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Some(r.max(-F::one()).min(F::one()))
}

fn tolerance<F: Real>(a: F, b: F) -> F {
    F::epsilon() * F::from_f64_lossy(16.0) * a.abs().max(b.abs()).max(F::one())
}

/// Percentages of exact matches and of predictions within 1 of gold.
pub fn exact_within1<F: Real>(s: &PairedSeries<F>) -> (F, F) {
    let mut exact = 0usize;
    let mut within = 0usize;
    for (p, g) in s.pairs() {
        let d = (p - g).abs();
        let tol = tolerance(p, g);
        if d <= tol {
            exact += 1;
        }
        if d <= F::one() + tol {
            within += 1;
        }
    }
    let n = F::from_usize_lossy(s.len());
    (
        F::from_usize_lossy(exact) * F::hundred() / n,
        F::from_usize_lossy(within) * F::hundred() / n,
    )
}

/// Exact %, within-1 %, Pearson r and MAD for one scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport<F> {
    pub n: usize,
    pub exact_pct: F,
    pub within1_pct: F,
    pub pearson: Option<F>,
    pub mad: F,
}

pub const REPORT_TSV_HEADER: &str = "n\texact\twithin1\tpearson\tmad";

impl<F: Real> MetricsReport<F> {
    pub fn evaluate(s: &PairedSeries<F>) -> Self {
        let (exact_pct, within1_pct) = exact_within1(s);
        MetricsReport {
            n: s.len(),
            exact_pct,
            within1_pct,
            pearson: pearson(s),
            mad: mad(s),
        }
    }

    /// Count of exact matches implied by the percentage (may be fractional
    /// for averaged reports).
    pub fn exact_count(&self) -> F {
        self.exact_pct * F::from_usize_lossy(self.n) / F::hundred()
    }

    pub fn within1_count(&self) -> F {
        self.within1_pct * F::from_usize_lossy(self.n) / F::hundred()
    }

    /// `n, exact, within1, pearson, mad` as one TSV row, three decimals.
    pub fn to_tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.n,
            fmt3(self.exact_pct),
            fmt3(self.within1_pct),
            fmt_opt3(self.pearson),
            fmt3(self.mad)
        )
    }
}

pub fn fmt3<F: Real>(x: F) -> String {
    format!("{:.3}", x.to_f64().unwrap_or(f64::NAN))
}

pub fn fmt_opt3<F: Real>(x: Option<F>) -> String {
    x.map_or_else(|| "NA".to_string(), fmt3)
}

/// Render labelled reports as an aligned plain-text table.
pub fn render_table<F: Real>(rows: &[(String, MetricsReport<F>)]) -> String {
    let label_width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(5);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<w$}  {:>6}  {:>8}  {:>8}  {:>8}  {:>6}",
        "scale",
        "n",
        "corr",
        "exact%",
        "within1%",
        "mad",
        w = label_width
    );
    for (label, r) in rows {
        let _ = writeln!(
            out,
            "{:<w$}  {:>6}  {:>8}  {:>8}  {:>8}  {:>6}",
            label,
            r.n,
            fmt_opt3(r.pearson),
            format!("{:.1}", r.exact_pct.to_f64().unwrap_or(f64::NAN)),
            format!("{:.1}", r.within1_pct.to_f64().unwrap_or(f64::NAN)),
            fmt3(r.mad),
            w = label_width
        );
    }
    out
}

/// Items (rows) by coders (columns); `None` marks a missing code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingMatrix {
    rows: Vec<Vec<Option<i32>>>,
    coders: usize,
}

impl CodingMatrix {
    pub fn new(rows: Vec<Vec<Option<i32>>>) -> Result<Self, MetricsError> {
        let coders = rows.first().map_or(0, Vec::len);
        if coders < 2 {
            return Err(MetricsError::TooFewCoders(coders));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != coders {
                return Err(MetricsError::RaggedRow(i, r.len(), coders));
            }
        }
        if !rows
            .iter()
            .any(|r| r.iter().filter(|c| c.is_some()).count() >= 2)
        {
            return Err(MetricsError::InsufficientData);
        }
        Ok(CodingMatrix { rows, coders })
    }

    pub fn from_complete(rows: &[Vec<i32>]) -> Result<Self, MetricsError> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().copied().map(Some).collect())
                .collect(),
        )
    }

    pub fn coders(&self) -> usize {
        self.coders
    }

    pub fn rows(&self) -> &[Vec<Option<i32>>] {
        &self.rows
    }

    /// Two-coder submatrix, or `None` when it has no pairable item.
    pub fn pair(&self, a: usize, b: usize) -> Option<CodingMatrix> {
        CodingMatrix::new(self.rows.iter().map(|r| vec![r[a], r[b]]).collect()).ok()
    }

    /// Codes of coders `a` and `b` on items both coded.
    pub fn paired_codes(&self, a: usize, b: usize) -> (Vec<i32>, Vec<i32>) {
        self.rows
            .iter()
            .filter_map(|r| Some((r[a]?, r[b]?)))
            .unzip()
    }
}

/// Disagreement metric for alpha.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distance {
    /// `|c - k|`, weights equal to the difference between categories.
    #[default]
    Linear,
    /// `(c - k)^2`, the usual interval metric.
    Interval,
}

impl Distance {
    pub fn delta<F: Real>(self, c: i32, k: i32) -> F {
        let d = F::from_i64_lossy((c - k).abs() as i64);
        match self {
            Distance::Linear => d,
            Distance::Interval => d * d,
        }
    }
}

/// Weighted Krippendorff's alpha from the coincidence matrix.
///
/// Items with fewer than two codes are not pairable and are skipped. When all
/// pairable codes are identical the expected disagreement is zero and alpha is
/// defined as 1.
pub fn krippendorff_alpha<F: Real>(m: &CodingMatrix, distance: Distance) -> Result<F, MetricsError> {
    let mut values: Vec<i32> = m.rows.iter().flatten().filter_map(|c| *c).collect();
    values.sort_unstable();
    values.dedup();
    let index = |v: i32| values.binary_search(&v).expect("value present");
    let k = values.len();

    let mut coincidence = vec![vec![F::zero(); k]; k];
    let mut pairable = false;
    for row in &m.rows {
        let codes: Vec<usize> = row.iter().filter_map(|c| c.map(index)).collect();
        let mu = codes.len();
        if mu < 2 {
            continue;
        }
        pairable = true;
        let w = F::one() / F::from_usize_lossy(mu - 1);
        for (i, &a) in codes.iter().enumerate() {
            for (j, &b) in codes.iter().enumerate() {
                if i != j {
                    coincidence[a][b] = coincidence[a][b] + w;
                }
            }
        }
    }
    if !pairable {
        return Err(MetricsError::InsufficientData);
    }

    let marginals: Vec<F> = coincidence.iter().map(|r| r.iter().copied().sum()).collect();
    let n: F = marginals.iter().copied().sum();
    let mut observed = F::zero();
    let mut expected = F::zero();
    for c in 0..k {
        for kk in 0..k {
            let delta: F = distance.delta(values[c], values[kk]);
            observed = observed + coincidence[c][kk] * delta;
            expected = expected + marginals[c] * marginals[kk] * delta;
        }
    }
    if expected <= F::zero() {
        return Ok(F::one());
    }
    let observed = observed / n;
    let expected = expected / (n * (n - F::one()));
    Ok(F::one() - observed / expected)
}

/// [`krippendorff_alpha`] with linear weights.
pub fn krippendorff_alpha_weighted<F: Real>(m: &CodingMatrix) -> Result<F, MetricsError> {
    krippendorff_alpha(m, Distance::Linear)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairAgreement<F> {
    pub coder_a: usize,
    pub coder_b: usize,
    pub alpha: Option<F>,
    pub pearson: Option<F>,
    pub mad: Option<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementSummary<F> {
    pub pairs: Vec<PairAgreement<F>>,
    pub overall_alpha: F,
    /// Percentage of fully coded items on which every coder gave the same code.
    pub full_agreement_pct: Option<F>,
    pub items: usize,
}

/// Pairwise alpha, Pearson and MAD for every coder pair, plus overall alpha
/// and the full-agreement rate.
pub fn agreement_summary<F: Real>(m: &CodingMatrix) -> Result<AgreementSummary<F>, MetricsError> {
    let overall_alpha = krippendorff_alpha_weighted(m)?;
    let mut pairs = Vec::new();
    for a in 0..m.coders {
        for b in a + 1..m.coders {
            let (ca, cb) = m.paired_codes(a, b);
            let series = PairedSeries::<F>::from_codes(&ca, &cb).ok();
            pairs.push(PairAgreement {
                coder_a: a,
                coder_b: b,
                alpha: m.pair(a, b).and_then(|p| krippendorff_alpha_weighted(&p).ok()),
                pearson: series.as_ref().and_then(pearson),
                mad: series.as_ref().map(mad),
            });
        }
    }
    let complete: Vec<&Vec<Option<i32>>> = m
        .rows
        .iter()
        .filter(|r| r.iter().all(Option::is_some))
        .collect();
    let full_agreement_pct = (!complete.is_empty()).then(|| {
        let agreed = complete.iter().filter(|r| r.iter().all(|c| *c == r[0])).count();
        F::from_usize_lossy(agreed) * F::hundred() / F::from_usize_lossy(complete.len())
    });
    Ok(AgreementSummary {
        pairs,
        overall_alpha,
        full_agreement_pct,
        items: m.rows.len(),
    })
}

/// Percentage cross-tabulation of two scorers' outputs over a code range.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossTab<F> {
    pub labels: Vec<i32>,
    /// `cells[r][c]`: % of items with `a == labels[r]` and `b == labels[c]`.
    pub cells: Vec<Vec<F>>,
    pub n: usize,
}

impl<F: Real> CrossTab<F> {
    /// Sum of the diagonal, i.e. the percentage of exact agreement.
    pub fn agreement_pct(&self) -> F {
        (0..self.labels.len()).map(|i| self.cells[i][i]).sum()
    }

    pub fn total(&self) -> F {
        self.cells.iter().flatten().copied().sum()
    }

    /// Rows are `a` codes, columns `b` codes; one decimal.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("a\\b");
        for l in &self.labels {
            let _ = write!(out, "\t{l}");
        }
        out.push('\n');
        for (r, l) in self.labels.iter().enumerate() {
            let _ = write!(out, "{l}");
            for c in &self.cells[r] {
                let _ = write!(out, "\t{:.1}", c.to_f64().unwrap_or(f64::NAN));
            }
            out.push('\n');
        }
        out
    }
}

pub fn cross_tab<F: Real>(
    a: &[i32],
    b: &[i32],
    range: RangeInclusive<i32>,
) -> Result<CrossTab<F>, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthError(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(MetricsError::EmptySeries);
    }
    let lo = *range.start();
    let hi = *range.end();
    let labels: Vec<i32> = range.collect();
    let mut counts = vec![vec![0usize; labels.len()]; labels.len()];
    for (&x, &y) in a.iter().zip(b) {
        for v in [x, y] {
            if !(lo..=hi).contains(&v) {
                return Err(MetricsError::OutOfRange(v, lo, hi));
            }
        }
        counts[(x - lo) as usize][(y - lo) as usize] += 1;
    }
    let n = F::from_usize_lossy(a.len());
    let cells = counts
        .iter()
        .map(|row| {
            row.iter()
                .map(|&c| F::from_usize_lossy(c) * F::hundred() / n)
                .collect()
        })
        .collect();
    Ok(CrossTab {
        labels,
        cells,
        n: a.len(),
    })
}
