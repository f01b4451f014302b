//! Stress and relaxation strength detection for short informal texts.
//!
//! Every text gets a dual score: stress from `-1` (none) to `-5` (extreme) and
//! relaxation from `1` (none) to `5` (completely relaxed). Scores come from a
//! lexicon of weighted terms plus a small set of modifier rules (boosters,
//! negation, idioms, emoticons, repeated letters, exclamation marks); see
//! [`scorer`].
//!
//! Around the scorer the crate provides:
//!
//! * [`optimizer`]: supervised hill-climbing of term strengths against coded texts,
//! * [`metrics`]: exact/within-1 accuracy, Pearson correlation, MAD,
//!   weighted Krippendorff's alpha and cross-tabulation,
//! * [`corpus`]: coded-corpus loading, fold construction and repeated
//!   cross-validation,
//! * [`baseline`]: an n-gram Naive Bayes / logistic regression comparison.
//!
//! Floating-point code is generic over [`scalar::Real`]; the aliases at the
//! crate root fix it to `f64`.

pub mod baseline;
pub mod corpus;
pub mod lexicon;
pub mod metrics;
pub mod optimizer;
pub mod scalar;
pub mod scorer;
pub mod textproc;

pub use lexicon::{load_lexicon_set, save_lexicon_set, LexiconError, LexiconSet, TermKind};
pub use scalar::Real;
pub use scorer::{explain, score_text, DualScore, Scorer};

pub type MetricsReport = metrics::MetricsReport<f64>;
pub type MetricsReport32 = metrics::MetricsReport<f32>;
pub type PairedSeries = metrics::PairedSeries<f64>;
pub type CrossTab = metrics::CrossTab<f64>;
pub type CrossvalReport = corpus::CrossvalReport<f64>;
pub type FeatureTable = baseline::FeatureTable<f64>;
pub type TrainedModel = baseline::TrainedModel<f64>;
pub type TrainedModel32 = baseline::TrainedModel<f32>;
