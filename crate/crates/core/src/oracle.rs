//! Exhaustive, preference-free enumeration of every complete parse the
//! grammar licenses over a token sequence, with the bindings each parse
//! implies. Used to check the engine; shares nothing with its candidate
//! generation beyond the knowledge base.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::rc::Rc;

use crate::error::EngineError;
use crate::kb::{Element, KnowledgeBase, LexicalEntry, RoleLabel};
use crate::semantic_source::SemanticResult;
use crate::structures::{NodeId, ParseState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tree {
    Leaf {
        token: usize,
        entry: LexicalEntry,
    },
    Node {
        category: String,
        template: usize,
        /// (template position, subtree)
        children: Vec<(usize, Rc<Tree>)>,
    },
}

impl Tree {
    pub fn category(&self) -> &str {
        match self {
            Tree::Leaf { entry, .. } => &entry.category,
            Tree::Node { category, .. } => category,
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            Tree::Leaf { entry, .. } => Shape::Leaf {
                category: entry.category.clone(),
                word: entry.word.clone(),
                entry: entry.to_string(),
            },
            Tree::Node { category, children, .. } => Shape::Node {
                category: category.clone(),
                children: children.iter().map(|(_, c)| c.shape()).collect(),
            },
        }
    }
}

/// Identity-free tree shape: categories, words and chosen entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Leaf {
        category: String,
        word: String,
        entry: String,
    },
    Node {
        category: String,
        children: Vec<Shape>,
    },
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Leaf { category, word, .. } => write!(f, "({category} {word})"),
            Shape::Node { category, children } => {
                write!(f, "({category}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Shape of an engine subtree, for comparison against oracle parses.
pub fn shape_of(state: &ParseState, node: NodeId) -> Shape {
    let n = state.node(node);
    match &n.entry {
        Some(entry) => Shape::Leaf {
            category: n.category.clone(),
            word: entry.word.clone(),
            entry: entry.to_string(),
        },
        None => Shape::Node {
            category: n.category.clone(),
            children: n.children.iter().map(|&c| shape_of(state, c)).collect(),
        },
    }
}

/// A binding implied by a parse. Meanings are named by the token that
/// introduced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleBinding {
    pub head: (usize, String),
    pub role: RoleLabel,
    pub filler: (usize, String),
    pub result: SemanticResult,
}

#[derive(Debug, Clone)]
pub struct OracleParse {
    pub tree: Rc<Tree>,
    pub bindings: Vec<OracleBinding>,
    pub meaning_root: Option<(usize, String)>,
}

impl OracleParse {
    pub fn shape(&self) -> Shape {
        self.tree.shape()
    }
}

type Key = (String, usize, usize);

struct Chart<'k> {
    kb: &'k KnowledgeBase,
    entries: Vec<Vec<LexicalEntry>>,
    memo: BTreeMap<Key, Rc<Vec<Rc<Tree>>>>,
    active: BTreeSet<Key>,
}

impl<'k> Chart<'k> {
    fn parses(&mut self, category: &str, i: usize, j: usize) -> Rc<Vec<Rc<Tree>>> {
        let key = (category.to_string(), i, j);
        if let Some(found) = self.memo.get(&key) {
            return found.clone();
        }
        if !self.active.insert(key.clone()) {
            // a unary cycle adds nothing new
            return Rc::new(Vec::new());
        }
        let mut out = Vec::new();
        if j == i + 1 {
            for entry in &self.entries[i] {
                if entry.category == category {
                    out.push(Rc::new(Tree::Leaf {
                        token: i,
                        entry: entry.clone(),
                    }));
                }
            }
        }
        let templates = self
            .kb
            .category(category)
            .map(|c| c.templates.clone())
            .unwrap_or_default();
        for (t, template) in templates.iter().enumerate() {
            for children in self.sequences(&template.elements, 0, i, j) {
                if children.is_empty() {
                    continue;
                }
                out.push(Rc::new(Tree::Node {
                    category: category.to_string(),
                    template: t,
                    children,
                }));
            }
        }
        self.active.remove(&key);
        let out = Rc::new(out);
        self.memo.insert(key, out.clone());
        out
    }

    /// Ways to cover exactly `i..j` with `elements[k..]`.
    fn sequences(&mut self, elements: &[Element], k: usize, i: usize, j: usize) -> Vec<Vec<(usize, Rc<Tree>)>> {
        if k == elements.len() {
            return if i == j { vec![Vec::new()] } else { Vec::new() };
        }
        let e = &elements[k];
        let mut out = Vec::new();
        if e.optional {
            out.extend(self.sequences(elements, k + 1, i, j));
        }
        for mid in i + 1..=j {
            let here: Vec<_> = self
                .parses(&e.category, i, mid)
                .iter()
                .filter(|t| subcat_ok(e, t))
                .cloned()
                .collect();
            if here.is_empty() {
                continue;
            }
            let rest = self.sequences(elements, k + 1, mid, j);
            for t in &here {
                for r in &rest {
                    let mut seq = vec![(k, t.clone())];
                    seq.extend(r.iter().cloned());
                    out.push(seq);
                }
            }
        }
        out
    }
}

fn subcat_ok(element: &Element, tree: &Tree) -> bool {
    match (&element.subcat, tree) {
        (None, _) => true,
        (Some(s), Tree::Leaf { entry, .. }) => &entry.subcategory == s,
        (Some(_), Tree::Node { .. }) => false,
    }
}

/// Token and concept of the meaning a subtree carries up its head path.
fn meaning(kb: &KnowledgeBase, tree: &Tree) -> Option<(usize, String)> {
    match tree {
        Tree::Leaf { token, entry } => entry.sense.concept().map(|c| (*token, c.to_string())),
        Tree::Node {
            category,
            template,
            children,
        } => {
            let head = kb.category(category)?.templates[*template].head;
            let (_, child) = children.iter().find(|(p, _)| *p == head)?;
            meaning(kb, child)
        }
    }
}

fn leftmost_entry(tree: &Tree) -> &LexicalEntry {
    match tree {
        Tree::Leaf { entry, .. } => entry,
        Tree::Node { children, .. } => leftmost_entry(&children[0].1),
    }
}

fn check(kb: &KnowledgeBase, head: &str, role: &RoleLabel, filler: &str) -> SemanticResult {
    match kb.slot_restriction(head, role) {
        None => SemanticResult::Unknown,
        Some(r) => match kb.isa_subsumes(filler, r) {
            Ok(true) => SemanticResult::Ok,
            Ok(false) => SemanticResult::Violation,
            Err(_) => SemanticResult::Unknown,
        },
    }
}

fn collect_bindings(kb: &KnowledgeBase, tree: &Tree, out: &mut Vec<OracleBinding>) {
    let Tree::Node {
        category,
        template,
        children,
    } = tree
    else {
        return;
    };
    let tmpl = &kb.category(category).expect("parsed category").templates[*template];
    let here = meaning(kb, tree);
    for (pos, child) in children {
        collect_bindings(kb, child, out);
        if *pos == tmpl.head {
            continue;
        }
        let (Some(h), Some(c)) = (here.clone(), meaning(kb, child)) else {
            continue;
        };
        let e = &tmpl.elements[*pos];
        let (role, inverse) = match &e.role {
            Some(r) => (r.clone(), e.inverse),
            None => match leftmost_entry(child).role_at(category) {
                Some(r) if kb.has_role(r) => (r.clone(), false),
                _ => continue,
            },
        };
        let (head, filler) = if inverse { (c, h) } else { (h, c) };
        let result = check(kb, &head.1, &role, &filler.1);
        out.push(OracleBinding {
            head,
            role,
            filler,
            result,
        });
    }
}

/// Every complete parse of `tokens` rooted in the start category.
pub fn enumerate_parses(
    tokens: &[String],
    kb: &KnowledgeBase,
    unknown_as_noun: bool,
) -> Result<Vec<OracleParse>, EngineError> {
    if tokens.is_empty() {
        return Err(EngineError::EmptyInput);
    }
    let mut entries = Vec::new();
    for (position, w) in tokens.iter().enumerate() {
        match kb.lexical_access(w) {
            Some(e) => entries.push(e.to_vec()),
            None if unknown_as_noun => entries.push(vec![kb.fallback_entry(w)?]),
            None => {
                return Err(EngineError::UnknownWord {
                    word: w.clone(),
                    position,
                })
            }
        }
    }
    let mut chart = Chart {
        kb,
        entries,
        memo: BTreeMap::new(),
        active: BTreeSet::new(),
    };
    let trees = chart.parses(kb.start_category(), 0, tokens.len());
    Ok(trees
        .iter()
        .map(|t| {
            let mut bindings = Vec::new();
            collect_bindings(kb, t, &mut bindings);
            OracleParse {
                tree: t.clone(),
                bindings,
                meaning_root: meaning(kb, t),
            }
        })
        .collect())
}

/// No binding in the parse violates a selectional restriction.
pub fn semantically_clean(parse: &OracleParse) -> bool {
    parse.bindings.iter().all(|b| b.result != SemanticResult::Violation)
}
