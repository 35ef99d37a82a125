//! Every complete parse the grammar licenses can be reached one word at a
//! time through the syntactic candidates: replaying an oracle parse, each
//! word has a candidate whose result matches that parse's prefix.

use tandem_core::oracle::{enumerate_parses, shape_of, Shape, Tree};
use tandem_core::syntax_source::syntactic_candidates;
use tandem_core::*;

fn first_token(tree: &Tree) -> usize {
    match tree {
        Tree::Leaf { token, .. } => *token,
        Tree::Node { children, .. } => first_token(&children[0].1),
    }
}

/// The part of `tree` covering tokens up to and including `t`.
fn prefix(tree: &Tree, t: usize) -> Option<Shape> {
    if first_token(tree) > t {
        return None;
    }
    Some(match tree {
        Tree::Leaf { .. } => tree.shape(),
        Tree::Node { category, children, .. } => Shape::Node {
            category: category.clone(),
            children: children.iter().filter_map(|(_, c)| prefix(c, t)).collect(),
        },
    })
}

fn leaf_entry(tree: &Tree, t: usize) -> Option<LexicalEntry> {
    match tree {
        Tree::Leaf { token, entry } => (*token == t).then(|| entry.clone()),
        Tree::Node { children, .. } => children.iter().find_map(|(_, c)| leaf_entry(c, t)),
    }
}

fn apply(kb: &KnowledgeBase, state: &mut ParseState, leaf: NodeId, site: &AttachmentSite) {
    let mut cur = leaf;
    for p in &site.creates {
        let start = state.node(cur).span.0;
        let node = state.new_phrase(&p.category, p.template, start);
        state.attach(kb, cur, node, p.template, p.position).unwrap();
        cur = node;
    }
    state.attach(kb, cur, site.parent, site.template, site.position).unwrap();
}

fn replay(kb: &KnowledgeBase, tokens: &[String], tree: &Tree) -> Result<(), String> {
    let mut state = ParseState::new(tokens.to_vec(), None);
    let root = state.new_phrase(kb.start_category(), 0, 0);
    for (t, word) in tokens.iter().enumerate() {
        let entry = leaf_entry(tree, t).unwrap();
        let leaf = state.new_leaf(&entry, t);
        let want = prefix(tree, t).unwrap();
        let sites = syntactic_candidates(kb, &state, root, leaf);
        let next = sites.iter().find_map(|site| {
            let mut trial = state.clone();
            apply(kb, &mut trial, leaf, site);
            (shape_of(&trial, root) == want).then_some(trial)
        });
        match next {
            Some(s) => state = s,
            None => return Err(format!("no candidate reproduces token {t} ({word})")),
        }
    }
    if state.is_complete(kb, root) {
        Ok(())
    } else {
        Err("replayed tree is incomplete".into())
    }
}

#[test]
fn every_oracle_parse_of_the_corpus_is_reachable() {
    let kb = KnowledgeBase::shipped();
    let corpus = include_str!("../../../corpus/sentences.txt");
    let extra = [
        "the man taught at the academy taught the horses",
        "the horses with the saw taught saw",
        "the woman with the horse at the academy saw the man",
    ];
    let mut checked = 0;
    for line in corpus
        .lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .chain(extra)
    {
        let tokens = tokenize(line);
        for parse in enumerate_parses(&tokens, &kb, false).unwrap() {
            replay(&kb, &tokens, &parse.tree).unwrap_or_else(|e| panic!("{line}: {e}\n{}", parse.shape()));
            checked += 1;
        }
    }
    assert!(checked >= 20);
}
