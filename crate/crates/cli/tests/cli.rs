use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn tensilex() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tensilex"));
    c.env_remove("TENSILEX_LEXICON_DIR");
    c
}

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = tensilex()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn lexicon_dir(root: &Path, stress: &[(&str, u8)], relax: &[(&str, u8)]) -> PathBuf {
    let dir = root.join("lexicon");
    fs::create_dir_all(&dir).unwrap();
    let terms = |xs: &[(&str, u8)]| xs.iter().map(|(t, s)| format!("{t}\t{s}\n")).collect::<String>();
    fs::write(dir.join("stress_terms.tsv"), terms(stress)).unwrap();
    fs::write(dir.join("relax_terms.tsv"), terms(relax)).unwrap();
    fs::write(dir.join("negators.txt"), "never\nnot\n").unwrap();
    for f in ["boosters.tsv", "idioms.tsv", "emoticons.tsv", "dictionary.txt"] {
        fs::write(dir.join(f), "").unwrap();
    }
    dir
}

fn fixture_lexicon(root: &Path) -> PathBuf {
    lexicon_dir(root, &[("delayed", 3), ("filthy", 2)], &[("asleep", 4), ("trust", 2)])
}

fn corpus_file(root: &Path, rows: &[(&str, &str, &str, &str)]) -> PathBuf {
    let mut body = String::from("id\tsubcorpus\ttext\tstress_codes\trelax_codes\n");
    for (i, (sub, text, s, r)) in rows.iter().enumerate() {
        body.push_str(&format!("t{i}\t{sub}\t{text}\t{s}\t{r}\n"));
    }
    let path = root.join("corpus.tsv");
    fs::write(&path, body).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn score_worked_example_and_empty_input() {
    let tmp = TempDir::new().unwrap();
    let lex = fixture_lexicon(tmp.path());
    let o = run(&["--lexicon-dir", p(&lex), "score"], "Almost home and the train is delayed\n");
    assert!(o.status.success());
    assert_eq!(stdout(&o), "text_id\tstress\trelaxation\n1\t-3\t1\n");

    let o = run(&["--lexicon-dir", p(&lex), "score"], "");
    assert!(o.status.success());
    assert_eq!(stdout(&o), "text_id\tstress\trelaxation\n");
}

#[test]
fn score_reads_lexicon_dir_from_env() {
    let tmp = TempDir::new().unwrap();
    let lex = fixture_lexicon(tmp.path());
    let mut child = tensilex()
        .env("TENSILEX_LEXICON_DIR", &lex)
        .arg("score")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"so delayed\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("1\t-3\t1\n"));
}

#[test]
fn score_preserves_order_on_large_input() {
    let tmp = TempDir::new().unwrap();
    let lex = fixture_lexicon(tmp.path());
    let texts = ["delayed", "asleep", "nothing", "never trust"];
    let input: String = (0..10_000).map(|i| format!("{}\n", texts[i % 4])).collect();
    let file = tmp.path().join("in.txt");
    fs::write(&file, &input).unwrap();
    let o = run(&["--lexicon-dir", p(&lex), "score", p(&file)], "");
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 10_000);
    let expected = ["-3\t1", "-1\t4", "-1\t1", "-2\t1"];
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(*row, format!("{}\t{}", i + 1, expected[i % 4]));
    }
}

#[test]
fn score_tsv_trace_and_bad_bytes() {
    let tmp = TempDir::new().unwrap();
    let lex = fixture_lexicon(tmp.path());
    let mut input = b"a1\tFell asleep\nb2\tdelayed!!\n".to_vec();
    input.extend_from_slice(b"c3\t\xff\xfe delayed\n");
    let mut child = tensilex()
        .args(["--lexicon-dir", p(&lex), "score", "--tsv", "--trace"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&input).unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "text_id\tstress\trelaxation\na1\t-1\t4\nb2\t-4\t1\nc3\t-3\t1\n"
    );
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("# a1") && err.contains("asleep"));
    assert!(err.contains("ExclamationBoost"));
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let lex = fixture_lexicon(tmp.path());
    // lexicon errors
    assert_eq!(run(&["score"], "x\n").status.code(), Some(2));
    assert_eq!(run(&["--lexicon-dir", p(&tmp.path().join("nope")), "score"], "").status.code(), Some(2));
    fs::write(lex.join("stress_terms.tsv"), "delayed\t9\n").unwrap();
    assert_eq!(run(&["--lexicon-dir", p(&lex), "score"], "").status.code(), Some(2));
    // I/O errors
    let lex = fixture_lexicon(&tmp.path().join("ok"));
    let missing = tmp.path().join("missing.txt");
    assert_eq!(run(&["--lexicon-dir", p(&lex), "score", p(&missing)], "").status.code(), Some(1));
    assert_eq!(run(&["agreement", p(&missing)], "").status.code(), Some(1));
    // malformed corpus
    let bad = tmp.path().join("bad.tsv");
    fs::write(&bad, "id\tsubcorpus\ttext\tstress_codes\trelax_codes\nx\ty\tz\t-9\t1\n").unwrap();
    assert_eq!(run(&["--lexicon-dir", p(&lex), "evaluate", p(&bad)], "").status.code(), Some(2));
}

#[test]
fn optimize_reports_and_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let rows: Vec<(&str, &str, &str, &str)> = vec![
        ("x", "so calm", "-1", "3"),
        ("x", "calm again", "-1", "3"),
        ("x", "calm calm", "-1", "3"),
        ("x", "the bus is late", "-2", "1"),
        ("x", "late again", "-2", "1"),
    ];
    let corpus = corpus_file(tmp.path(), &rows);

    let optimal = lexicon_dir(&tmp.path().join("a"), &[("late", 2)], &[("calm", 3)]);
    let out = tmp.path().join("out0");
    let o = run(&["--lexicon-dir", p(&optimal), "optimize", p(&corpus), "--out", p(&out), "--seed", "1"], "");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("initial error: 0"));
    assert!(text.contains("0 changes"));

    let perturbed = lexicon_dir(&tmp.path().join("b"), &[("late", 2)], &[("calm", 2)]);
    let mut outputs = Vec::new();
    for run_no in 0..2 {
        let out = tmp.path().join(format!("out{}", run_no + 1));
        let o = run(&["--lexicon-dir", p(&perturbed), "optimize", p(&corpus), "--out", p(&out), "--seed", "9"], "");
        assert!(o.status.success());
        let text = stdout(&o);
        assert!(text.contains("initial error: 3\n"), "{text}");
        assert!(text.contains("final error: 0\n"), "{text}");
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    let relax = &outputs[0].iter().find(|(n, _)| n == "relax_terms.tsv").unwrap().1;
    assert_eq!(String::from_utf8_lossy(relax), "calm\t3\n");
    assert!(outputs[0].iter().any(|(n, _)| n == "optimization.log"));

    assert_ne!(
        run(&["--lexicon-dir", p(&perturbed), "optimize", p(&corpus), "--out", p(&out)], "").status.code(),
        Some(0),
        "--seed is required"
    );
}

#[test]
fn evaluate_worked_metric_example() {
    let tmp = TempDir::new().unwrap();
    let lex = lexicon_dir(tmp.path(), &[], &[("calm", 5)]);
    let corpus = corpus_file(
        tmp.path(),
        &[
            ("a", "nothing here", "-1", "1"),
            ("a", "calm", "-1", "5"),
            ("b", "calm", "-1", "5"),
            ("b", "calm", "-1", "1"),
        ],
    );
    let o = run(&["--lexicon-dir", p(&lex), "evaluate", p(&corpus)], "");
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "subset\tscale\tn\texact\twithin1\tpearson\tmad\n\
         all\tstress\t4\t100.000\t100.000\tNA\t0.000\n\
         all\trelax\t4\t75.000\t75.000\t0.577\t1.000\n"
    );

    let o = run(&["--lexicon-dir", p(&lex), "evaluate", p(&corpus), "--subcorpus", "a"], "");
    let out = stdout(&o);
    assert!(out.contains("a\trelax\t2\t100.000\t100.000\t1.000\t0.000"), "{out}");

    let o = run(&["--lexicon-dir", p(&lex), "evaluate", p(&corpus), "--subcorpus", "transport"], "");
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));

    let o = run(&["--lexicon-dir", p(&lex), "evaluate", p(&corpus), "--pretty"], "");
    assert!(stdout(&o).contains("0.577"));
}

#[test]
fn evaluate_unrounded_and_supervised() {
    let tmp = TempDir::new().unwrap();
    let lex = lexicon_dir(tmp.path(), &[("late", 3)], &[("calm", 3)]);
    let rows: Vec<(String, String)> = (0..20)
        .map(|i| {
            if i % 2 == 0 {
                ("calm day".to_string(), "-1,-1\t3,4".to_string())
            } else {
                ("late bus".to_string(), "-3,-2\t1,1".to_string())
            }
        })
        .collect();
    let mut body = String::from("id\tsubcorpus\ttext\tstress_codes\trelax_codes\n");
    for (i, (t, codes)) in rows.iter().enumerate() {
        body.push_str(&format!("t{i}\tx\t{t}\t{codes}\n"));
    }
    let corpus = tmp.path().join("c.tsv");
    fs::write(&corpus, body).unwrap();

    let o = run(&["--lexicon-dir", p(&lex), "evaluate", p(&corpus), "--unrounded"], "");
    let out = stdout(&o);
    // half the rows have a .5 gold that is never hit exactly
    assert!(out.contains("all\tstress\t20\t50.000\t100.000\t1.000\t0.250"), "{out}");
    assert!(out.contains("all\trelax\t20\t50.000\t100.000\t1.000\t0.250"), "{out}");

    let log = tmp.path().join("cv.tsv");
    let args = ["--lexicon-dir", p(&lex), "evaluate", p(&corpus), "--supervised", "--k", "5", "--reps", "3", "--seed", "3", "--log", p(&log)];
    let a = run(&args, "");
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let log_a = fs::read(&log).unwrap();
    let b = run(&args, "");
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(log_a, fs::read(&log).unwrap());
    // 3 reps x (5 folds + pooled row) x 2 scales + header
    assert_eq!(String::from_utf8(log_a).unwrap().lines().count(), 1 + 3 * 6 * 2);

    let o = run(&["--lexicon-dir", p(&lex), "evaluate", p(&corpus), "--supervised"], "");
    assert_eq!(o.status.code(), Some(2), "--supervised needs --seed");
}

fn codes_file(root: &Path, rows: &[(&str, &str)]) -> PathBuf {
    let mut body = String::from("id\tsubcorpus\ttext\tstress_codes\trelax_codes\n");
    for (i, (s, r)) in rows.iter().enumerate() {
        body.push_str(&format!("i{i}\tx\ttext {i}\t{s}\t{r}\n"));
    }
    let path = root.join("codes.tsv");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn agreement_identical_coders() {
    let tmp = TempDir::new().unwrap();
    let codes = codes_file(tmp.path(), &[("-1,-1", "2,2"), ("-3,-3", "1,1"), ("-5,-5", "4,4")]);
    let o = run(&["agreement", p(&codes)], "");
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "scale\tpair\talpha\tpearson\tmad\tfull_agreement\n\
         stress\t1-2\t1.000\t1.000\t0.000\tNA\n\
         stress\tall\t1.000\tNA\tNA\t100.0\n\
         relax\t1-2\t1.000\t1.000\t0.000\tNA\n\
         relax\tall\t1.000\tNA\tNA\t100.0\n"
    );
}

#[test]
fn agreement_three_coders_and_too_few() {
    let tmp = TempDir::new().unwrap();
    let codes = codes_file(
        tmp.path(),
        &[("-1,-2,-1", "2,2,3"), ("-3,-3,NA", "1,1,1"), ("-5,-4,-4", "4,5,4"), ("-2,-2,-2", "1,2,1")],
    );
    let o = run(&["agreement", p(&codes)], "");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    for scale in ["stress", "relax"] {
        let pairs: Vec<&str> = out
            .lines()
            .filter(|l| l.starts_with(&format!("{scale}\t")) && !l.contains("\tall\t"))
            .collect();
        assert_eq!(pairs.len(), 3, "{out}");
        assert_eq!(out.lines().filter(|l| l.starts_with(&format!("{scale}\tall\t"))).count(), 1);
    }
    // stress: 3 fully coded items, one with full agreement
    assert!(out.contains("stress\tall\t") && out.lines().nth(4).unwrap().ends_with("\t33.3"), "{out}");

    let one = codes_file(tmp.path(), &[("-1", "2"), ("-3", "1")]);
    assert_eq!(run(&["agreement", p(&one)], "").status.code(), Some(2));
}

#[test]
fn agreement_two_coder_toy_value() {
    // items (1,5) and (5,1): observed disagreement 4 per pair, expected 16/3
    let tmp = TempDir::new().unwrap();
    let codes = codes_file(tmp.path(), &[("-1,-5", "1,5"), ("-5,-1", "5,1")]);
    let out = stdout(&run(&["agreement", p(&codes)], ""));
    assert!(out.contains("relax\tall\t-0.500\t"), "{out}");
}

fn separable_corpus(root: &Path) -> PathBuf {
    let mut rows = Vec::new();
    let words = ["bus", "work", "rain", "desk"];
    for i in 0..40 {
        let filler = format!("{} {}", words[i % 4], words[(i / 4) % 4]);
        if i % 2 == 0 {
            rows.push((format!("{filler} panicking"), "-4,-4", "1,1"));
        } else {
            rows.push((filler, "-1,-1", "1,1"));
        }
    }
    let mut body = String::from("id\tsubcorpus\ttext\tstress_codes\trelax_codes\n");
    for (i, (t, s, r)) in rows.iter().enumerate() {
        body.push_str(&format!("t{i}\tx\t{t}\t{s}\t{r}\n"));
    }
    let path = root.join("sep.tsv");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn baseline_sweep_shape_and_determinism() {
    let tmp = TempDir::new().unwrap();
    let corpus = separable_corpus(tmp.path());
    let args = ["baseline", p(&corpus), "--scale", "stress", "--k", "4", "--reps", "2", "--seed", "5"];
    let o = run(&args, "");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 20);
    for c in ["nb", "logistic"] {
        assert_eq!(rows.iter().filter(|r| r.starts_with(&format!("{c}\t"))).count(), 10);
        let best_exact = rows
            .iter()
            .find(|r| r.starts_with(&format!("{c}\t")) && r.rsplit('\t').next().unwrap().contains("exact"))
            .unwrap();
        assert_eq!(best_exact.split('\t').nth(4).unwrap(), "100.000", "{out}");
    }
    assert_eq!(run(&args, "").stdout, o.stdout);

    let single = ["baseline", p(&corpus), "--classifier", "nb", "--features", "100", "--seed", "5", "--k", "4", "--reps", "2"];
    let a = run(&single, "");
    assert!(a.status.success());
    assert_eq!(stdout(&a).lines().count(), 3);
    assert_eq!(run(&single, "").stdout, a.stdout);
}

#[test]
fn baseline_save_model() {
    let tmp = TempDir::new().unwrap();
    let corpus = separable_corpus(tmp.path());
    let model = tmp.path().join("model.txt");
    let base = ["baseline", p(&corpus), "--classifier", "logistic", "--scale", "stress", "--k", "4", "--reps", "1", "--seed", "1"];
    let mut args = base.to_vec();
    args.extend(["--features", "50", "--save-model", p(&model)]);
    let o = run(&args, "");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let saved = fs::read_to_string(&model).unwrap();
    assert!(saved.starts_with("tensilex-model\t1\nkind\tlogistic\n"));

    let mut sweep = base.to_vec();
    sweep.extend(["--save-model", p(&model)]);
    assert_eq!(run(&sweep, "").status.code(), Some(2));
    let mut bad = base.to_vec();
    bad.extend(["--features", "lots"]);
    assert_eq!(run(&bad, "").status.code(), Some(2));
}
