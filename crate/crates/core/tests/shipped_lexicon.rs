use std::path::PathBuf;

use tensilex::{load_lexicon_set, save_lexicon_set, score_text, TermKind};

fn shipped() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../lexicon")
}

#[test]
fn loads_and_round_trips() {
    let lex = load_lexicon_set(shipped()).unwrap();
    assert!(lex.terms(TermKind::Stress).len() > 20);
    assert!(lex.terms(TermKind::Relaxation).len() > 20);
    assert!(lex.is_negator("never"));
    assert_eq!(lex.booster_delta("extremely"), Some(2));

    let dir = tempfile::tempdir().unwrap();
    save_lexicon_set(&lex, dir.path()).unwrap();
    let back = load_lexicon_set(dir.path()).unwrap();
    assert_eq!(back, lex);
    let again = tempfile::tempdir().unwrap();
    save_lexicon_set(&back, again.path()).unwrap();
    for name in tensilex::lexicon::LEXICON_FILES {
        assert_eq!(
            std::fs::read(dir.path().join(name)).unwrap(),
            std::fs::read(again.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn scores_everyday_texts() {
    let lex = load_lexicon_set(shipped()).unwrap();
    let s = |t: &str| {
        let (score, trace) = score_text(t, &lex);
        assert_eq!(trace.replay(), score);
        (score.stress(), score.relaxation())
    };
    assert_eq!(s("train delayed again"), (-3, 1));
    assert_eq!(s("so relaxed after yoga"), (-1, 5));
    assert_eq!(s("not relaxed at all"), (-4, 1));
    assert_eq!(s("no worries, take it easy"), (-1, 4));
    assert_eq!(s("stuck in traffic :("), (-2, 1));
    assert_eq!(s("I'm soooo stressed!!!"), (-5, 1));
}
