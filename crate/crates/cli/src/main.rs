use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tensilex::baseline::{self, BaselineError, BaselineOptions, ClassifierKind, LogisticConfig};
use tensilex::corpus::{self, CorpusError, CrossvalOptions, GoldMode};
use tensilex::lexicon::{LexiconError, TermKind};
use tensilex::metrics::{self, MetricsReport, REPORT_TSV_HEADER};
use tensilex::optimizer::{self, OptimizerConfig, OptimizerError};
use tensilex::{LexiconSet, Scorer};

/// Stress and relaxation strength scoring for short informal texts.
#[derive(Debug, Parser)]
#[command(name = "tensilex", version, about)]
struct Cli {
    /// Lexicon directory.
    #[arg(long, global = true, env = "TENSILEX_LEXICON_DIR")]
    lexicon_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score texts (one per line) and print `text_id<TAB>stress<TAB>relaxation`.
    Score(ScoreArgs),
    /// Hill-climb lexicon strengths against an annotated corpus.
    Optimize(OptimizeArgs),
    /// Compare lexicon scores with corpus golds.
    Evaluate(EvaluateArgs),
    /// Inter-coder agreement for a coding table.
    Agreement(AgreementArgs),
    /// Cross-validated n-gram classifier baseline.
    Baseline(BaselineArgs),
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Input file; standard input when omitted.
    input: Option<PathBuf>,
    /// Write an explanation of every score to standard error.
    #[arg(long)]
    trace: bool,
    /// Input lines are `id<TAB>text` instead of bare texts.
    #[arg(long)]
    tsv: bool,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    /// Annotated corpus TSV.
    corpus: PathBuf,
    /// Directory for the optimized lexicon.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Report log path (default: <out>/optimization.log).
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    min_improvement: u64,
    #[arg(long, default_value_t = 1000)]
    max_passes: usize,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Annotated corpus TSV.
    corpus: PathBuf,
    /// Only evaluate rows with this sub-corpus label.
    #[arg(long)]
    subcorpus: Option<String>,
    /// Compare against the unrounded coder means.
    #[arg(long)]
    unrounded: bool,
    /// Repeated k-fold cross-validation with hill-climbing on training folds.
    #[arg(long)]
    supervised: bool,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 30)]
    reps: usize,
    /// Required with --supervised.
    #[arg(long, required_if_eq("supervised", "true"))]
    seed: Option<u64>,
    /// Per-fold log TSV (supervised only).
    #[arg(long)]
    log: Option<PathBuf>,
    /// Aligned plain-text table instead of TSV.
    #[arg(long)]
    pretty: bool,
}

#[derive(Debug, Args)]
struct AgreementArgs {
    /// Coding table: corpus TSV layout, one code per coder, `NA` for missing.
    codes: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ClassifierArg {
    Nb,
    Logistic,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScaleArg {
    Stress,
    Relax,
    Both,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    /// Annotated corpus TSV.
    corpus: PathBuf,
    #[arg(long, value_enum, default_value_t = ClassifierArg::Both)]
    classifier: ClassifierArg,
    /// Number of selected n-gram features, or `sweep` for 100..1000.
    #[arg(long, default_value = "sweep")]
    features: String,
    #[arg(long, value_enum, default_value_t = ScaleArg::Both)]
    scale: ScaleArg,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 30)]
    reps: usize,
    #[arg(long)]
    seed: u64,
    /// Also train on the whole corpus and save the model here (needs a single
    /// classifier, scale and feature count).
    #[arg(long)]
    save_model: Option<PathBuf>,
}

/// An error with its exit code: 1 for I/O, 2 for validation.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

type CmdResult = Result<(), Failure>;

fn io_failure(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

fn invalid(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

impl From<LexiconError> for Failure {
    fn from(e: LexiconError) -> Self {
        invalid(e)
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io { .. } => io_failure(e),
            _ => invalid(e),
        }
    }
}

impl From<BaselineError> for Failure {
    fn from(e: BaselineError) -> Self {
        match e {
            BaselineError::Io { .. } => io_failure(e),
            BaselineError::Corpus(c) => c.into(),
            _ => invalid(e),
        }
    }
}

impl From<OptimizerError> for Failure {
    fn from(e: OptimizerError) -> Self {
        invalid(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        io_failure(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Score(a) => cmd_score(&cli, a),
        Command::Optimize(a) => cmd_optimize(&cli, a),
        Command::Evaluate(a) => cmd_evaluate(&cli, a),
        Command::Agreement(a) => cmd_agreement(a),
        Command::Baseline(a) => cmd_baseline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if is_broken_pipe(&f.error) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.downcast_ref::<io::Error>()
        .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe)
}

fn load_lexicon(cli: &Cli) -> Result<LexiconSet, Failure> {
    let dir = cli.lexicon_dir.as_ref().ok_or_else(|| {
        invalid(anyhow!("no lexicon directory: pass --lexicon-dir or set TENSILEX_LEXICON_DIR"))
    })?;
    Ok(tensilex::load_lexicon_set(dir)?)
}

fn require_file(path: &Path) -> CmdResult {
    if path.is_file() {
        Ok(())
    } else {
        Err(io_failure(anyhow!("cannot read {}", path.display())))
    }
}

fn write_file(path: &Path, body: &str) -> CmdResult {
    fs::write(path, body)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(io_failure)
}

fn cmd_score(cli: &Cli, args: &ScoreArgs) -> CmdResult {
    if let Some(p) = &args.input {
        require_file(p)?;
    }
    let lex = load_lexicon(cli)?;
    let scorer = Scorer::new(&lex);
    let input: Box<dyn Read> = match &args.input {
        Some(p) => Box::new(
            fs::File::open(p)
                .with_context(|| format!("opening {}", p.display()))
                .map_err(io_failure)?,
        ),
        None => Box::new(io::stdin().lock()),
    };
    let mut reader = BufReader::new(input);
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let stderr = io::stderr();
    let mut err = stderr.lock();
    writeln!(out, "text_id\tstress\trelaxation")?;

    let mut buf = Vec::new();
    let mut line_no = 0usize;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        while matches!(buf.last(), Some(b'\n' | b'\r')) {
            buf.pop();
        }
        let line = String::from_utf8_lossy(&buf);
        let (id, text) = if args.tsv {
            match line.split_once('\t') {
                Some((id, text)) => (id.to_string(), text),
                None => (line_no.to_string(), line.as_ref()),
            }
        } else {
            (line_no.to_string(), line.as_ref())
        };
        if args.trace {
            let (score, _) = scorer.score_traced(text);
            writeln!(out, "{id}\t{}\t{}", score.stress(), score.relaxation())?;
            writeln!(err, "# {id}\n{}", scorer.explain(text))?;
        } else {
            let score = scorer.score(text);
            writeln!(out, "{id}\t{}\t{}", score.stress(), score.relaxation())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_optimize(cli: &Cli, args: &OptimizeArgs) -> CmdResult {
    require_file(&args.corpus)?;
    let lex = load_lexicon(cli)?;
    let examples = corpus::load_corpus(&args.corpus)?;
    let cfg = OptimizerConfig {
        seed: args.seed,
        min_improvement: args.min_improvement,
        max_passes: args.max_passes,
    };
    let (optimized, report) = optimizer::hill_climb(&lex, &examples, &cfg)?;
    tensilex::save_lexicon_set(&optimized, &args.out).map_err(|e| match e {
        LexiconError::Write { .. } => io_failure(e),
        other => invalid(other),
    })?;
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| args.out.join("optimization.log"));
    write_file(&report_path, &report.to_log())?;
    println!("initial error: {}", report.initial_error);
    println!("final error: {}", report.final_error);
    println!("{} changes in {} passes", report.changes_made, report.passes_run);
    Ok(())
}

fn report_rows(
    subset: &str,
    stress: &MetricsReport<f64>,
    relax: &MetricsReport<f64>,
    pretty: bool,
) -> String {
    if pretty {
        metrics::render_table(&[
            (format!("{subset} stress"), *stress),
            (format!("{subset} relax"), *relax),
        ])
    } else {
        format!(
            "subset\tscale\t{REPORT_TSV_HEADER}\n{subset}\tstress\t{}\n{subset}\trelax\t{}\n",
            stress.to_tsv_row(),
            relax.to_tsv_row()
        )
    }
}

fn cmd_evaluate(cli: &Cli, args: &EvaluateArgs) -> CmdResult {
    require_file(&args.corpus)?;
    let lex = load_lexicon(cli)?;
    let mut examples = corpus::load_corpus(&args.corpus)?;
    let subset = match &args.subcorpus {
        Some(label) => {
            let s = corpus::slice(&examples, label);
            if s.unknown_label {
                eprintln!(
                    "warning: no rows with sub-corpus `{label}` (labels: {})",
                    corpus::labels(&examples).join(", ")
                );
                if args.pretty {
                    print!("{}", metrics::render_table::<f64>(&[]));
                } else {
                    println!("subset\tscale\t{REPORT_TSV_HEADER}");
                }
                return Ok(());
            }
            examples = s.examples;
            label.clone()
        }
        None => "all".to_string(),
    };
    let gold = if args.unrounded {
        GoldMode::Unrounded
    } else {
        GoldMode::Rounded
    };

    if args.supervised {
        let seed = args
            .seed
            .ok_or_else(|| invalid(anyhow!("--supervised needs --seed")))?;
        let opts = CrossvalOptions {
            k: args.k,
            reps: args.reps,
            base_seed: seed,
            supervised: true,
            gold,
            optimizer: OptimizerConfig::default(),
        };
        let report = corpus::crossval_supervised::<f64>(&lex, &examples, &opts)?;
        if let Some(log) = &args.log {
            write_file(log, &report.log_tsv())?;
        }
        if report.stress_pearson_skipped + report.relax_pearson_skipped > 0 {
            eprintln!(
                "note: undefined correlation in {} stress and {} relaxation repetitions (left out of the mean)",
                report.stress_pearson_skipped, report.relax_pearson_skipped
            );
        }
        print!(
            "{}",
            report_rows(&subset, &report.mean.stress, &report.mean.relax, args.pretty)
        );
    } else {
        if args.log.is_some() {
            eprintln!("warning: --log is only written with --supervised");
        }
        let report = corpus::evaluate_unsupervised::<f64>(&lex, &examples, gold)?;
        print!(
            "{}",
            report_rows(&subset, &report.stress, &report.relax, args.pretty)
        );
    }
    Ok(())
}

fn cmd_agreement(args: &AgreementArgs) -> CmdResult {
    require_file(&args.codes)?;
    let table = corpus::load_coding_table(&args.codes)?;
    if table.stress.coders() < 2 {
        return Err(invalid(anyhow!(
            "agreement needs at least two coders, found {}",
            table.stress.coders()
        )));
    }
    let mut out = String::from("scale\tpair\talpha\tpearson\tmad\tfull_agreement\n");
    for (scale, m) in [("stress", &table.stress), ("relax", &table.relax)] {
        let s = metrics::agreement_summary::<f64>(m).map_err(invalid)?;
        for p in &s.pairs {
            let _ = writeln!(
                out,
                "{scale}\t{}-{}\t{}\t{}\t{}\tNA",
                p.coder_a + 1,
                p.coder_b + 1,
                metrics::fmt_opt3(p.alpha),
                metrics::fmt_opt3(p.pearson),
                metrics::fmt_opt3(p.mad)
            );
        }
        let _ = writeln!(
            out,
            "{scale}\tall\t{}\tNA\tNA\t{}",
            metrics::fmt3(s.overall_alpha),
            s.full_agreement_pct
                .map_or_else(|| "NA".to_string(), |p| format!("{p:.1}"))
        );
    }
    print!("{out}");
    Ok(())
}

fn cmd_baseline(args: &BaselineArgs) -> CmdResult {
    require_file(&args.corpus)?;
    let feature_counts = if args.features == "sweep" {
        baseline::SWEEP_SIZES.to_vec()
    } else {
        match args.features.parse::<usize>() {
            Ok(n) if n > 0 => vec![n],
            _ => {
                return Err(invalid(anyhow!(
                    "--features must be a positive integer or `sweep`, got `{}`",
                    args.features
                )))
            }
        }
    };
    let classifiers = match args.classifier {
        ClassifierArg::Nb => vec![ClassifierKind::NaiveBayes],
        ClassifierArg::Logistic => vec![ClassifierKind::Logistic],
        ClassifierArg::Both => vec![ClassifierKind::NaiveBayes, ClassifierKind::Logistic],
    };
    let scales = match args.scale {
        ScaleArg::Stress => vec![TermKind::Stress],
        ScaleArg::Relax => vec![TermKind::Relaxation],
        ScaleArg::Both => vec![TermKind::Stress, TermKind::Relaxation],
    };
    if args.save_model.is_some()
        && (classifiers.len() != 1 || scales.len() != 1 || feature_counts.len() != 1)
    {
        return Err(invalid(anyhow!(
            "--save-model needs one --classifier, one --scale and a numeric --features"
        )));
    }
    let examples = corpus::load_corpus(&args.corpus)?;
    let opts = BaselineOptions {
        k: args.k,
        reps: args.reps,
        base_seed: args.seed,
        classifiers: classifiers.clone(),
        feature_counts: feature_counts.clone(),
        scales: scales.clone(),
        logistic: LogisticConfig::default(),
    };
    let cells = baseline::crossval_baseline::<f64>(&examples, &opts)?;
    print!("{}", baseline::sweep_tsv(&cells));
    if let Some(path) = &args.save_model {
        let model = baseline::train_full::<f64>(
            &examples,
            classifiers[0],
            scales[0],
            feature_counts[0],
            &opts.logistic,
        )?;
        model.save(path)?;
    }
    Ok(())
}
