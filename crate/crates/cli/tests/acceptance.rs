//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//!     cargo test -p tandem-cli --test acceptance

use std::path::PathBuf;
use std::process::Command;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use sha2::{Digest, Sha256};
use tandem_cli::run;
use tandem_core::oracle::{enumerate_parses, shape_of};
use tandem_core::{
    process_sentence, tokenize, EngineConfig, Interpretation, KnowledgeBase, Lesion, SemanticResult, Status,
    TraceEvent,
};

const TEXT1: &str = "The man saw the horse.";
const TEXT2: &str = "The man saw the woman with the horse.";
const TEXT3: &str = "The officers taught at the military academy were very demanding.";

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn kb_dir() -> String {
    root().join("kb").display().to_string()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn tandem(args: &[&str]) -> (i32, String) {
    let kb = kb_dir();
    let mut argv = vec!["tandem", args[0], "--kb", kb.as_str()];
    argv.extend_from_slice(&args[1..]);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn engine(text: &str, config: &EngineConfig) -> Interpretation {
    process_sentence(&tokenize(text), &KnowledgeBase::shipped(), config).unwrap()
}

fn ensure(cond: bool, what: impl Into<String>) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn matches_golden(name: &str, args: &[&str], code: i32) -> Outcome {
    let (c, out) = tandem(args);
    ensure(c == code, format!("{name}: exit {c}, expected {code}"))?;
    ensure(out == golden(name), format!("{name}: output differs from golden file"))
}

fn text1_reproduction() -> Outcome {
    matches_golden("text1.out", &["parse", TEXT1], 0)?;
    let i = engine(TEXT1, &EngineConfig::default());
    let shape = shape_of(&i.state, i.parse_roots[0]).to_string();
    ensure(
        shape == "(S (NP (Det the) (N man)) (VP (V saw) (NP (Det the) (N horse))))",
        format!("tree {shape}"),
    )?;
    let (_, meaning) = tandem(&["parse", "--format", "meaning", TEXT1]);
    ensure(
        meaning.lines().nth(2) == Some("SEE1:SEE ACTOR=MAN1:MAN OBJECT=HORSE1:HORSE"),
        format!("meaning {meaning:?}"),
    )
}

fn semantic_override() -> Outcome {
    matches_golden("text2_trace.out", &["parse", "--trace", TEXT2], 0)?;
    matches_golden(
        "text2_semantics_lesion_trace.out",
        &["parse", "--trace", "--lesion", "semantics", TEXT2],
        0,
    )?;
    let i = engine(TEXT2, &EngineConfig::default());
    let vp_violation = i.state.trace.iter().any(|r| match &r.event {
        TraceEvent::Evaluate { site, semantic, .. } => {
            *semantic == SemanticResult::Violation && i.state.nodes[site.parent as usize - 1].category == "VP"
        }
        _ => false,
    });
    ensure(vp_violation, "no VIOLATION evaluation for the VP site")?;
    let with = shape_of(&i.state, i.parse_roots[0]).to_string();
    ensure(with.contains("(N woman) (NMOD (PP (P with)"), format!("not NP-attached: {with}"))?;
    let l = engine(TEXT2, &EngineConfig::default().with_lesion(Lesion::Semantics));
    let without = shape_of(&l.state, l.parse_roots[0]).to_string();
    ensure(
        without.contains("(VP (V saw) (NP (Det the) (N woman)) (PP (P with)"),
        format!("not VP-attached under lesion: {without}"),
    )
}

fn garden_path_recovery() -> Outcome {
    matches_golden("text3_trace.out", &["parse", "--trace", TEXT3], 0)?;
    let i = engine(TEXT3, &EngineConfig::default());
    let lines = i.trace_lines();
    let at = |token: usize, prefix: &str| -> Vec<String> {
        i.state
            .trace
            .iter()
            .zip(&lines)
            .filter(|(r, l)| r.token == token && l.starts_with(prefix))
            .map(|(_, l)| l.clone())
            .collect()
    };
    let select = at(2, "SELECT");
    ensure(select.len() == 1 && select[0].starts_with("SELECT site=1.1 "), format!("{select:?}"))?;
    ensure(i.state.nodes[0].category == "S", "site 1 is not the sentence node")?;
    ensure(!at(7, "FAIL").is_empty(), "no FAIL at \"were\"")?;
    let recovers = lines.iter().filter(|l| l.starts_with("RECOVER")).count();
    ensure(recovers == 1, format!("{recovers} RECOVER events"))?;
    ensure(i.counters.recoveries == 1, "recoveries counter")?;
    let shape = shape_of(&i.state, i.parse_roots[0]).to_string();
    ensure(
        shape.starts_with("(S (NP (Det the) (N officers) (RRC (V taught) (PP (P at)"),
        format!("tree {shape}"),
    )?;
    ensure(
        i.state.recovery_log.iter().all(|(before, after)| before == after) && i.state.recovery_log.len() == 1,
        format!("node constructions during recovery: {:?}", i.state.recovery_log),
    )
}

fn oracle_equivalence() -> Outcome {
    let kb = KnowledgeBase::shipped();
    let corpus = std::fs::read_to_string(root().join("corpus/sentences.txt")).unwrap();
    let sentences = tandem_cli::corpus_sentences(&corpus);
    ensure(sentences.len() >= 20, "corpus too small")?;
    for s in sentences {
        let tokens = tokenize(s);
        let i = process_sentence(&tokens, &kb, &EngineConfig::default()).unwrap();
        let parses = enumerate_parses(&tokens, &kb, false).unwrap();
        let complete = i.status == Status::Complete;
        ensure(complete == !parses.is_empty(), format!("{s}: engine {:?}, oracle {}", i.status, parses.len()))?;
        if complete {
            let shape = shape_of(&i.state, i.parse_roots[0]);
            ensure(parses.iter().any(|p| p.shape() == shape), format!("{s}: parse not found by oracle"))?;
        }
    }
    Ok(())
}

const PALETTE: &[&str] = &[
    "(cat Det) (subcat definite) (sense NONE)",
    "(cat N) (subcat common) (sense HORSE)",
    "(cat N) (subcat common) (sense SAW-TOOL)",
    "(cat V) (subcat transitive) (sense SEE)",
    "(cat V) (subcat past-transitive) (sense TEACH)",
    "(cat V) (subcat passive-participle) (sense TEACH)",
    "(cat P) (subcat preposition) (sense NONE)",
    "(cat Adj) (subcat attributive) (sense MILITARY)",
];

fn entry_label(sexp: &str) -> String {
    let parts: Vec<&str> = sexp
        .split(['(', ')', ' '])
        .filter(|p| !p.is_empty() && !["cat", "subcat", "sense"].contains(p))
        .collect();
    parts.join("/")
}

/// Every ACCESS event lists exactly the lexicon entries of its word.
fn access_is_exhaustive(kb: &KnowledgeBase, tokens: &[String]) -> Outcome {
    for config in [EngineConfig::default(), EngineConfig::default().with_lesion(Lesion::Syntax)] {
        let i = process_sentence(tokens, kb, &config).unwrap();
        let mut seen = 0;
        for r in &i.state.trace {
            if let TraceEvent::Access { word, entries } = &r.event {
                let expected: Vec<String> = kb.lexical_access(word).unwrap().iter().map(|e| e.to_string()).collect();
                ensure(*entries == expected, format!("{word}: {entries:?} vs {expected:?}"))?;
                seen += 1;
            }
        }
        ensure(seen == tokens.len(), "missing ACCESS events")?;
    }
    Ok(())
}

fn multiple_access() -> Outcome {
    let kb = KnowledgeBase::shipped();
    let words: Vec<String> = kb.words().map(|(w, _)| w.to_string()).collect();
    access_is_exhaustive(&kb, &words)?;
    access_is_exhaustive(&kb, &tokenize(TEXT3))?;
    let grammar = std::fs::read_to_string(root().join("kb/grammar.sexp")).unwrap();
    let concepts = std::fs::read_to_string(root().join("kb/concepts.sexp")).unwrap();
    let lexicon = prop::collection::btree_map("[a-z]{2,6}", prop::collection::vec(0..PALETTE.len(), 1..5), 1..7);
    let sentence = prop::collection::vec(any::<prop::sample::Index>(), 1..7);
    let mut runner = TestRunner::new(Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&(lexicon, sentence), |(lexicon, picks)| {
            let words: Vec<(String, Vec<usize>)> = lexicon.into_iter().collect();
            let text: String = words
                .iter()
                .map(|(w, es)| {
                    let entries: Vec<String> = es.iter().map(|&e| format!("(entry {})", PALETTE[e])).collect();
                    format!("(word \"{w}\" {})\n", entries.join(" "))
                })
                .collect();
            let kb = KnowledgeBase::load(&text, &grammar, &concepts).unwrap();
            for (w, es) in &words {
                let listed: Vec<String> = kb.lexical_access(w).unwrap().iter().map(|e| e.to_string()).collect();
                let expected: Vec<String> = es.iter().map(|&e| entry_label(PALETTE[e])).collect();
                prop_assert_eq!(listed, expected);
            }
            let tokens: Vec<String> = picks.iter().map(|i| words[i.index(words.len())].0.clone()).collect();
            access_is_exhaustive(&kb, &tokens).map_err(TestCaseError::fail)?;
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn capacity_degradation() -> Outcome {
    let (limited, _) = tandem(&["parse", "--capacity", "0", TEXT3]);
    let (unlimited, _) = tandem(&["parse", TEXT3]);
    ensure(limited == 2, format!("capacity 0 exit {limited}"))?;
    ensure(unlimited == 0, format!("unlimited exit {unlimited}"))?;
    let i = engine(TEXT3, &EngineConfig::default().with_capacity(0));
    ensure(i.status == Status::Fragments, "capacity 0 completed")?;
    ensure(engine(TEXT3, &EngineConfig::default()).status == Status::Complete, "unlimited did not complete")
}

fn functional_independence() -> Outcome {
    matches_golden(
        "text1_syntax_lesion_trace.out",
        &["parse", "--trace", "--lesion", "syntax", TEXT1],
        2,
    )?;
    matches_golden("text1_link_lesion_trace.out", &["parse", "--trace", "--lesion", "link", TEXT1], 0)?;
    let i = engine(TEXT1, &EngineConfig::default().with_lesion(Lesion::Syntax));
    let see = i.state.meanings.iter().find(|m| m.tag == "SEE1").ok_or("no SEE1")?;
    let bound: Vec<String> = see
        .bindings
        .iter()
        .map(|b| format!("{}={}", b.role, i.state.meaning(b.filler).tag))
        .collect();
    ensure(bound == ["ACTOR=MAN1", "OBJECT=HORSE1"], format!("SEE1 fragment {bound:?}"))?;
    let l = engine(TEXT1, &EngineConfig::default().with_lesion(Lesion::Link));
    ensure(l.status == Status::Complete, "link lesion did not complete")?;
    ensure(
        !l.trace_lines().iter().any(|x| x.starts_with("BIND")),
        "BIND under link lesion",
    )
}

fn digest(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tandem"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    Ok(format!("{:x}", Sha256::digest(&out.stdout)))
}

fn determinism() -> Outcome {
    let corpus = root().join("corpus/sentences.txt").display().to_string();
    let kb = kb_dir();
    let table = ["corpus", "--kb", kb.as_str(), corpus.as_str()];
    ensure(digest(&table)? == digest(&table)?, "corpus table differs between runs")?;
    let text = std::fs::read_to_string(&corpus).unwrap();
    let mut parse = vec!["parse", "--kb", kb.as_str(), "--trace"];
    parse.extend(tandem_cli::corpus_sentences(&text));
    ensure(digest(&parse)? == digest(&parse)?, "corpus traces differ between runs")
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("text 1 reproduction", text1_reproduction),
        ("text 2 semantic override", semantic_override),
        ("text 3 garden-path recovery", garden_path_recovery),
        ("oracle equivalence", oracle_equivalence),
        ("multiple access", multiple_access),
        ("retention-capacity degradation", capacity_degradation),
        ("functional independence", functional_independence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(()) => println!("criterion {}: {name}: PASS", n + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: {name}: FAIL ({why})", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
