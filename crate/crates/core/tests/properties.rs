use std::collections::BTreeSet;

use proptest::prelude::*;
use tandem_core::oracle::{enumerate_parses, shape_of};
use tandem_core::*;

const GRAMMAR: &str = include_str!("../../../kb/grammar.sexp");
const CONCEPTS: &str = include_str!("../../../kb/concepts.sexp");

/// Entry shapes that fit the shipped grammar and concepts.
const PALETTE: &[(&str, &str, &str)] = &[
    ("Det", "definite", "NONE"),
    ("N", "common", "MAN"),
    ("N", "common", "HORSE"),
    ("N", "common", "TELESCOPE"),
    ("N", "common", "SAW-TOOL"),
    ("V", "transitive", "SEE"),
    ("V", "past-transitive", "TEACH"),
    ("V", "passive-participle", "TEACH"),
    ("V", "copula", "BE"),
    ("P", "preposition", "NONE"),
    ("Adj", "attributive", "MILITARY"),
    ("Adj", "predicative", "DEMANDING"),
    ("Adv", "degree", "NONE"),
];

fn lexicon_text(words: &[(String, Vec<usize>)]) -> String {
    let mut s = String::new();
    for (w, entries) in words {
        s += &format!("(word \"{w}\"");
        for &e in entries {
            let (c, sub, sense) = PALETTE[e];
            s += &format!(" (entry (cat {c}) (subcat {sub}) (sense {sense}))");
        }
        s += ")\n";
    }
    s
}

fn random_lexicon() -> impl Strategy<Value = Vec<(String, Vec<usize>)>> {
    prop::collection::btree_map("[a-z]{2,7}", prop::collection::vec(0..PALETTE.len(), 1..5), 1..8)
        .prop_map(|m| m.into_iter().collect())
}

fn shipped_words() -> Vec<String> {
    KnowledgeBase::shipped().words().map(|(w, _)| w.to_string()).collect()
}

fn role_history_is_a_path(kb: &KnowledgeBase, state: &ParseState) -> bool {
    state.roles.iter().all(|r| {
        let mut path: Vec<&RoleLabel> = r.history.iter().collect();
        path.push(&r.label);
        path.windows(2).all(|w| kb.can_specialize(w[0], w[1]))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn access_lists_every_entry_of_random_lexicons(
        words in random_lexicon(),
        picks in prop::collection::vec(any::<prop::sample::Index>(), 1..7),
    ) {
        let kb = KnowledgeBase::load(&lexicon_text(&words), GRAMMAR, CONCEPTS).unwrap();
        for (w, entries) in &words {
            prop_assert_eq!(kb.lexical_access(w).unwrap().len(), entries.len());
        }
        let tokens: Vec<String> = picks.iter().map(|i| words[i.index(words.len())].0.clone()).collect();
        for config in [EngineConfig::default(), EngineConfig::default().with_lesion(Lesion::Syntax)] {
            let interp = process_sentence(&tokens, &kb, &config).unwrap();
            let access: Vec<_> = interp
                .state
                .trace
                .iter()
                .filter_map(|r| match &r.event {
                    TraceEvent::Access { word, entries } => Some((r.token, word.clone(), entries.clone())),
                    _ => None,
                })
                .collect();
            prop_assert_eq!(access.len(), tokens.len());
            for (t, word, listed) in access {
                prop_assert_eq!(&word, &tokens[t]);
                let (_, expected) = words.iter().find(|(w, _)| *w == word).unwrap();
                let expected: Vec<String> = expected
                    .iter()
                    .map(|&e| {
                        let (c, sub, sense) = PALETTE[e];
                        format!("{c}/{sub}/{sense}")
                    })
                    .collect();
                prop_assert_eq!(listed, expected);
            }
        }
    }

    #[test]
    fn random_sentences_hold_engine_invariants(picks in prop::collection::vec(any::<prop::sample::Index>(), 1..9)) {
        let kb = KnowledgeBase::shipped();
        let words = shipped_words();
        let tokens: Vec<String> = picks.iter().map(|i| words[i.index(words.len())].clone()).collect();
        let config = EngineConfig::default();
        let a = process_sentence(&tokens, &kb, &config).unwrap();
        let b = process_sentence(&tokens, &kb, &config).unwrap();
        prop_assert_eq!(a.trace_lines(), b.trace_lines());
        prop_assert!(a.state.check_well_formed().is_ok());
        prop_assert!(a.state.recovery_log.iter().all(|(before, after)| before == after));
        prop_assert!(role_history_is_a_path(&kb, &a.state));
        prop_assert!(a.state.bindings.iter().all(|b| kb.has_role(&b.role)));
        // soundness: a complete result is a parse the grammar licenses
        if a.status == Status::Complete {
            let shape = shape_of(&a.state, a.parse_roots[0]);
            let oracle = enumerate_parses(&tokens, &kb, false).unwrap();
            prop_assert!(oracle.iter().any(|p| p.shape() == shape));
        }
    }

    #[test]
    fn semantics_lesion_parses_whenever_syntax_allows(picks in prop::collection::vec(any::<prop::sample::Index>(), 1..9)) {
        let kb = KnowledgeBase::shipped();
        let words = shipped_words();
        let tokens: Vec<String> = picks.iter().map(|i| words[i.index(words.len())].clone()).collect();
        let lesioned = process_sentence(&tokens, &kb, &EngineConfig::default().with_lesion(Lesion::Semantics)).unwrap();
        prop_assert!(lesioned.state.meanings.is_empty());
        prop_assert!(lesioned.state.bindings.is_empty());
        if lesioned.status == Status::Complete {
            let shape = shape_of(&lesioned.state, lesioned.parse_roots[0]);
            let oracle = enumerate_parses(&tokens, &kb, false).unwrap();
            prop_assert!(oracle.iter().any(|p| p.shape() == shape));
        }
    }

    #[test]
    fn oracle_ignores_template_order(seed in any::<u64>()) {
        let kb = KnowledgeBase::shipped();
        let permuted = permute_templates(GRAMMAR, seed);
        let lexicon = include_str!("../../../kb/lexicon.sexp");
        let other = KnowledgeBase::load(lexicon, &permuted, CONCEPTS).unwrap();
        for text in [
            "the man saw the woman with the horse",
            "the officers taught at the military academy were very demanding",
            "the officers taught the man at the academy",
            "the man saw the saw",
        ] {
            let tokens = tokenize(text);
            let set = |kb: &KnowledgeBase| -> BTreeSet<_> {
                enumerate_parses(&tokens, kb, false).unwrap().iter().map(|p| p.shape()).collect()
            };
            prop_assert_eq!(set(&kb), set(&other));
        }
    }
}

/// Reverses or rotates the template lines inside each category block,
/// choosing per category from `seed`.
fn permute_templates(grammar: &str, seed: u64) -> String {
    let mut out = Vec::new();
    let mut block: Vec<&str> = Vec::new();
    let mut k = 0u32;
    let flush = |block: &mut Vec<&str>, out: &mut Vec<String>, k: &mut u32| {
        if !block.is_empty() {
            let n = block.len();
            let r = ((seed >> (*k * 3)) as usize) % n;
            block.rotate_left(r);
            if (seed >> (*k * 3 + 2)) & 1 == 1 {
                block.reverse();
            }
            out.extend(block.drain(..).map(str::to_string));
            *k += 1;
        }
    };
    for line in grammar.lines() {
        if line.trim_start().starts_with("(template") {
            block.push(line);
        } else {
            flush(&mut block, &mut out, &mut k);
            out.push(line.to_string());
        }
    }
    flush(&mut block, &mut out, &mut k);
    out.join("\n")
}

#[test]
fn permutation_helper_changes_order() {
    let p = permute_templates(GRAMMAR, 0b100_100_100_100);
    assert_ne!(p, GRAMMAR.trim_end());
    assert!(KnowledgeBase::load(include_str!("../../../kb/lexicon.sexp"), &p, CONCEPTS).is_ok());
}

const NOUNS: &[&str] = &["man", "woman", "horse", "horses", "officers", "academy", "telescope", "saw"];

fn noun_phrase(modified: bool) -> BoxedStrategy<String> {
    let base = (0..3usize, prop::sample::select(NOUNS)).prop_map(|(det, n)| match det {
        0 => n.to_string(),
        1 => format!("the {n}"),
        _ => format!("the military {n}"),
    });
    if !modified {
        return base.boxed();
    }
    (base, 0..4usize, prop::sample::select(NOUNS))
        .prop_map(|(np, m, n)| match m {
            0 => format!("{np} with the {n}"),
            1 => format!("{np} at the {n}"),
            2 => format!("{np} taught at the {n}"),
            _ => np,
        })
        .boxed()
}

/// Sentences built from the shipped grammar's own constructions.
fn grammatical_sentence() -> impl Strategy<Value = String> {
    let vp = prop_oneof![
        noun_phrase(true).prop_map(|o| format!("saw {o}")),
        (noun_phrase(false), prop::sample::select(NOUNS)).prop_map(|(o, n)| format!("saw {o} with the {n}")),
        Just("taught".to_string()),
        noun_phrase(false).prop_map(|o| format!("taught {o} at the academy")),
        Just("were very demanding".to_string()),
        Just("were demanding".to_string()),
    ];
    (noun_phrase(true), vp).prop_map(|(s, v)| format!("{s} {v}"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_sentences_are_sound_and_reuse_subtrees(text in grammatical_sentence()) {
        let kb = KnowledgeBase::shipped();
        let tokens = tokenize(&text);
        let i = process_sentence(&tokens, &kb, &EngineConfig::default()).unwrap();
        prop_assert!(i.state.check_well_formed().is_ok());
        prop_assert!(i.state.recovery_log.iter().all(|(before, after)| before == after));
        prop_assert!(role_history_is_a_path(&kb, &i.state));
        let oracle = enumerate_parses(&tokens, &kb, false).unwrap();
        prop_assert!(!oracle.is_empty(), "generator produced an ungrammatical sentence: {}", text);
        if i.status == Status::Complete {
            let shape = shape_of(&i.state, i.parse_roots[0]);
            prop_assert!(oracle.iter().any(|p| p.shape() == shape));
        }
    }
}

/// Reanalysis can only reach readings that were retained. A reading that
/// had no site when its word was read is never retained, so a sentence
/// that needs two such revisions ends in fragments although it has a
/// parse.
#[test]
fn double_reanalysis_is_out_of_reach() {
    let kb = KnowledgeBase::shipped();
    for text in [
        "the man taught at the academy taught the horses",
        "the horses with the saw taught saw",
    ] {
        let tokens = tokenize(text);
        assert_eq!(enumerate_parses(&tokens, &kb, false).unwrap().len(), 1, "{text}");
        let i = process_sentence(&tokens, &kb, &EngineConfig::default()).unwrap();
        assert_eq!(i.status, Status::Fragments, "{text}");
    }
}
