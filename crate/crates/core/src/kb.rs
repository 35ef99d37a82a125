//! The three knowledge sources: lexicon, syntactic category network and
//! semantic concept network, loaded from s-expression documents.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use crate::error::{EngineError, KbError};
use crate::sexp::{is_identifier, read_all, Sexp};

/// A thematic role label such as `THING` or `INSTRUMENT`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoleLabel(pub String);

impl RoleLabel {
    pub fn new(s: &str) -> Self {
        RoleLabel(s.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RoleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Meaning pointer of a lexical entry. Function words carry `None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Sense {
    None,
    Concept(String),
}

impl Sense {
    pub fn concept(&self) -> Option<&str> {
        match self {
            Sense::None => None,
            Sense::Concept(c) => Some(c),
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sense::None => f.write_str("NONE"),
            Sense::Concept(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalEntry {
    pub word: String,
    pub category: String,
    pub subcategory: String,
    pub sense: Sense,
    /// For prepositions: the role marked when the meanings meet at a node
    /// of the given category.
    pub role_at: Vec<(String, RoleLabel)>,
}

impl LexicalEntry {
    pub fn role_at(&self, category: &str) -> Option<&RoleLabel> {
        self.role_at
            .iter()
            .find(|(c, _)| c == category)
            .map(|(_, r)| r)
    }
}

impl fmt::Display for LexicalEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.category, self.subcategory, self.sense)
    }
}

/// One constituent slot of a template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub category: String,
    pub subcat: Option<String>,
    pub optional: bool,
    pub role: Option<RoleLabel>,
    /// The parent's meaning fills `role` of the child's meaning.
    pub inverse: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub elements: Vec<Element>,
    /// 0-based head position.
    pub head: usize,
    /// Global order of this template in the grammar file.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryNode {
    pub name: String,
    pub templates: Vec<Template>,
    pub primitive_role: Option<RoleLabel>,
}

impl CategoryNode {
    /// Lexical categories have no templates.
    pub fn is_lexical(&self) -> bool {
        self.templates.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptNode {
    pub name: String,
    pub isa: Vec<String>,
    pub slots: Vec<(RoleLabel, String)>,
}

/// Validated, immutable knowledge base.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    words: BTreeMap<String, Vec<LexicalEntry>>,
    categories: Vec<CategoryNode>,
    category_index: HashMap<String, usize>,
    start: String,
    concepts: Vec<ConceptNode>,
    concept_index: HashMap<String, usize>,
    roles: BTreeMap<RoleLabel, Vec<RoleLabel>>,
}

const LEXICON: &str = "lexicon";
const GRAMMAR: &str = "grammar";
const CONCEPTS: &str = "concepts";

fn malformed(file: &'static str, form: &Sexp, what: &str) -> KbError {
    let p = form.pos();
    KbError::Malformed {
        file,
        message: format!("{what} at {}:{}", p.line, p.column),
    }
}

fn ident(file: &'static str, form: &Sexp) -> Result<String, KbError> {
    match form.as_symbol() {
        Some(s) if is_identifier(s) => Ok(s.to_string()),
        _ => Err(malformed(file, form, "expected identifier")),
    }
}

/// `(key value)` with a single identifier value.
fn keyed_ident(file: &'static str, form: &Sexp, key: &str) -> Result<String, KbError> {
    match form.as_list() {
        Some([k, v]) if k.as_symbol() == Some(key) => ident(file, v),
        _ => Err(malformed(file, form, &format!("expected ({key} IDENT)"))),
    }
}

impl KnowledgeBase {
    pub fn load(lexicon: &str, grammar: &str, concepts: &str) -> Result<Self, KbError> {
        let (concepts, concept_index, roles) = parse_concepts(concepts)?;
        let (categories, category_index, start) = parse_grammar(grammar, &roles)?;
        let words = parse_lexicon(lexicon, &category_index, &concept_index, &roles)?;
        Ok(KnowledgeBase {
            words,
            categories,
            category_index,
            start,
            concepts,
            concept_index,
            roles,
        })
    }

    /// Loads `lexicon.sexp`, `grammar.sexp` and `concepts.sexp` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, KbError> {
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|e| KbError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })
        };
        Self::load(
            &read("lexicon.sexp")?,
            &read("grammar.sexp")?,
            &read("concepts.sexp")?,
        )
    }

    /// The knowledge base shipped with this crate.
    pub fn shipped() -> Self {
        Self::load(SHIPPED_LEXICON, SHIPPED_GRAMMAR, SHIPPED_CONCEPTS)
            .expect("shipped knowledge base is valid")
    }

    /// All entries for `word` in file order. Never filtered by context.
    pub fn lexical_access(&self, word: &str) -> Option<&[LexicalEntry]> {
        self.words.get(&word.to_ascii_lowercase()).map(Vec::as_slice)
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, &[LexicalEntry])> {
        self.words.iter().map(|(w, e)| (w.as_str(), e.as_slice()))
    }

    pub fn categories(&self) -> &[CategoryNode] {
        &self.categories
    }

    pub fn category(&self, name: &str) -> Option<&CategoryNode> {
        self.category_index.get(name).map(|&i| &self.categories[i])
    }

    pub fn start_category(&self) -> &str {
        &self.start
    }

    pub fn concepts(&self) -> &[ConceptNode] {
        &self.concepts
    }

    pub fn concept(&self, name: &str) -> Option<&ConceptNode> {
        self.concept_index.get(name).map(|&i| &self.concepts[i])
    }

    pub fn has_role(&self, label: &RoleLabel) -> bool {
        self.roles.contains_key(label)
    }

    pub fn role_labels(&self) -> impl Iterator<Item = &RoleLabel> {
        self.roles.keys()
    }

    /// True iff `target` is reachable from `from` through one or more
    /// specialization edges.
    pub fn can_specialize(&self, from: &RoleLabel, target: &RoleLabel) -> bool {
        let mut stack: Vec<&RoleLabel> = self.roles.get(from).into_iter().flatten().collect();
        let mut seen = BTreeSet::new();
        while let Some(r) = stack.pop() {
            if r == target {
                return true;
            }
            if seen.insert(r) {
                stack.extend(self.roles.get(r).into_iter().flatten());
            }
        }
        false
    }

    /// True iff `concept` equals `restriction` or reaches it via ISA links.
    pub fn isa_subsumes(&self, concept: &str, restriction: &str) -> Result<bool, KbError> {
        for c in [concept, restriction] {
            if !self.concept_index.contains_key(c) {
                return Err(KbError::UndefinedConcept(c.to_string()));
            }
        }
        let mut stack = vec![concept];
        let mut seen = BTreeSet::new();
        while let Some(c) = stack.pop() {
            if c == restriction {
                return Ok(true);
            }
            if seen.insert(c) {
                stack.extend(self.concept(c).unwrap().isa.iter().map(String::as_str));
            }
        }
        Ok(false)
    }

    /// Restriction on `slot` for `concept`, inherited breadth-first along
    /// ISA links.
    pub fn slot_restriction(&self, concept: &str, slot: &RoleLabel) -> Option<&str> {
        let mut queue = std::collections::VecDeque::from([concept]);
        let mut seen = BTreeSet::new();
        while let Some(c) = queue.pop_front() {
            if !seen.insert(c) {
                continue;
            }
            let node = self.concept(c)?;
            if let Some((_, r)) = node.slots.iter().find(|(l, _)| l == slot) {
                return Some(r);
            }
            queue.extend(node.isa.iter().map(String::as_str));
        }
        None
    }

    /// Entry used for out-of-lexicon words when the fallback is enabled.
    pub fn fallback_entry(&self, word: &str) -> Result<LexicalEntry, EngineError> {
        if self.concept("GENERIC-THING").is_none() || self.category("N").is_none() {
            return Err(EngineError::NoFallbackConcept);
        }
        Ok(LexicalEntry {
            word: word.to_string(),
            category: "N".into(),
            subcategory: "common".into(),
            sense: Sense::Concept("GENERIC-THING".into()),
            role_at: Vec::new(),
        })
    }
}

pub const SHIPPED_LEXICON: &str = include_str!("../../../kb/lexicon.sexp");
pub const SHIPPED_GRAMMAR: &str = include_str!("../../../kb/grammar.sexp");
pub const SHIPPED_CONCEPTS: &str = include_str!("../../../kb/concepts.sexp");

type ConceptTables = (
    Vec<ConceptNode>,
    HashMap<String, usize>,
    BTreeMap<RoleLabel, Vec<RoleLabel>>,
);

fn parse_concepts(text: &str) -> Result<ConceptTables, KbError> {
    let mut concepts = Vec::new();
    let mut index = HashMap::new();
    let mut roles: BTreeMap<RoleLabel, Vec<RoleLabel>> = BTreeMap::new();
    for form in read_all(text, CONCEPTS)? {
        let items = form
            .as_list()
            .ok_or_else(|| malformed(CONCEPTS, &form, "expected a list"))?;
        match form.head() {
            Some("role") if items.len() >= 2 => {
                let label = RoleLabel(ident(CONCEPTS, &items[1])?);
                let mut targets = Vec::new();
                for item in &items[2..] {
                    match item.as_list() {
                        Some([k, rest @ ..]) if k.as_symbol() == Some("specializes") => {
                            for r in rest {
                                targets.push(RoleLabel(ident(CONCEPTS, r)?));
                            }
                        }
                        _ => return Err(malformed(CONCEPTS, item, "expected (specializes ...)")),
                    }
                }
                if roles.insert(label.clone(), targets).is_some() {
                    return Err(KbError::Duplicate {
                        file: CONCEPTS,
                        kind: "role",
                        name: label.0,
                    });
                }
            }
            Some("concept") if items.len() >= 2 => {
                let name = ident(CONCEPTS, &items[1])?;
                let mut node = ConceptNode {
                    name: name.clone(),
                    isa: Vec::new(),
                    slots: Vec::new(),
                };
                for item in &items[2..] {
                    match (item.head(), item.as_list()) {
                        (Some("isa"), Some([_, parents @ ..])) if !parents.is_empty() => {
                            for p in parents {
                                node.isa.push(ident(CONCEPTS, p)?);
                            }
                        }
                        (Some("slot"), Some([_, label, restriction])) => node.slots.push((
                            RoleLabel(ident(CONCEPTS, label)?),
                            ident(CONCEPTS, restriction)?,
                        )),
                        _ => return Err(malformed(CONCEPTS, item, "expected (isa ...) or (slot ROLE CONCEPT)")),
                    }
                }
                if index.insert(name.clone(), concepts.len()).is_some() {
                    return Err(KbError::Duplicate {
                        file: CONCEPTS,
                        kind: "concept",
                        name,
                    });
                }
                concepts.push(node);
            }
            _ => return Err(malformed(CONCEPTS, &form, "expected (role ...) or (concept ...)")),
        }
    }

    for targets in roles.values() {
        for t in targets {
            if !roles.contains_key(t) {
                return Err(dangling(CONCEPTS, "role", &t.0));
            }
        }
    }
    for c in &concepts {
        for p in &c.isa {
            if !index.contains_key(p) {
                return Err(dangling(CONCEPTS, "concept", p));
            }
        }
        for (label, restriction) in &c.slots {
            if !roles.contains_key(label) {
                return Err(dangling(CONCEPTS, "role", &label.0));
            }
            if !index.contains_key(restriction) {
                return Err(dangling(CONCEPTS, "concept", restriction));
            }
        }
    }

    let isa_edges: BTreeMap<&str, Vec<&str>> = concepts
        .iter()
        .map(|c| (c.name.as_str(), c.isa.iter().map(String::as_str).collect()))
        .collect();
    if let Some(cycle) = find_cycle(&isa_edges) {
        return Err(KbError::IsaCycle(cycle));
    }
    let role_edges: BTreeMap<&str, Vec<&str>> = roles
        .iter()
        .map(|(r, t)| (r.as_str(), t.iter().map(RoleLabel::as_str).collect()))
        .collect();
    if let Some(cycle) = find_cycle(&role_edges) {
        return Err(KbError::RoleCycle(cycle));
    }
    Ok((concepts, index, roles))
}

fn dangling(file: &'static str, kind: &'static str, name: &str) -> KbError {
    KbError::Dangling {
        file,
        kind,
        name: name.to_string(),
    }
}

/// Depth-first search for a directed cycle; returns it closed
/// (first node repeated at the end).
fn find_cycle(edges: &BTreeMap<&str, Vec<&str>>) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit<'a>(
        node: &'a str,
        edges: &BTreeMap<&'a str, Vec<&'a str>>,
        marks: &mut HashMap<&'a str, Mark>,
        path: &mut Vec<&'a str>,
    ) -> Option<Vec<String>> {
        match marks.get(node) {
            Some(Mark::Done) => return None,
            Some(Mark::Active) => {
                let start = path.iter().position(|n| *n == node).unwrap();
                let mut cycle: Vec<String> = path[start..].iter().map(|s| s.to_string()).collect();
                cycle.push(node.to_string());
                return Some(cycle);
            }
            None => {}
        }
        marks.insert(node, Mark::Active);
        path.push(node);
        for next in edges.get(node).into_iter().flatten() {
            if let Some(c) = visit(next, edges, marks, path) {
                return Some(c);
            }
        }
        path.pop();
        marks.insert(node, Mark::Done);
        None
    }
    let mut marks = HashMap::new();
    for node in edges.keys() {
        if let Some(c) = visit(node, edges, &mut marks, &mut Vec::new()) {
            return Some(c);
        }
    }
    None
}

type GrammarTables = (Vec<CategoryNode>, HashMap<String, usize>, String);

fn parse_grammar(
    text: &str,
    roles: &BTreeMap<RoleLabel, Vec<RoleLabel>>,
) -> Result<GrammarTables, KbError> {
    let mut categories: Vec<CategoryNode> = Vec::new();
    let mut index = HashMap::new();
    let mut start = None;
    let mut rank = 0;
    for form in read_all(text, GRAMMAR)? {
        let items = form
            .as_list()
            .ok_or_else(|| malformed(GRAMMAR, &form, "expected a list"))?;
        match form.head() {
            Some("start") => start = Some(keyed_ident(GRAMMAR, &form, "start")?),
            Some("category") if items.len() >= 2 => {
                let name = ident(GRAMMAR, &items[1])?;
                let mut node = CategoryNode {
                    name: name.clone(),
                    templates: Vec::new(),
                    primitive_role: None,
                };
                let mut pending: Option<Vec<Element>> = None;
                for item in &items[2..] {
                    match item.head() {
                        Some("template") => {
                            if pending.is_some() {
                                return Err(malformed(GRAMMAR, item, "template without (head k)"));
                            }
                            let elems = item.as_list().unwrap()[1..]
                                .iter()
                                .map(parse_element)
                                .collect::<Result<Vec<_>, _>>()?;
                            if elems.is_empty() {
                                return Err(malformed(GRAMMAR, item, "empty template"));
                            }
                            pending = Some(elems);
                        }
                        Some("head") => {
                            let elements = pending
                                .take()
                                .ok_or_else(|| malformed(GRAMMAR, item, "(head k) without a template"))?;
                            let k = match item.as_list() {
                                Some([_, k]) => k.as_symbol().and_then(|s| s.parse::<usize>().ok()),
                                _ => None,
                            };
                            let head = match k {
                                Some(k) if (1..=elements.len()).contains(&k) => k - 1,
                                _ => return Err(malformed(GRAMMAR, item, "head position out of range")),
                            };
                            node.templates.push(Template { elements, head, rank });
                            rank += 1;
                        }
                        Some("role") => {
                            node.primitive_role = Some(RoleLabel(keyed_ident(GRAMMAR, item, "role")?));
                        }
                        _ => return Err(malformed(GRAMMAR, item, "expected (template ...), (head k) or (role R)")),
                    }
                }
                if pending.is_some() {
                    return Err(malformed(GRAMMAR, &form, "template without (head k)"));
                }
                if index.insert(name.clone(), categories.len()).is_some() {
                    return Err(KbError::Duplicate {
                        file: GRAMMAR,
                        kind: "category",
                        name,
                    });
                }
                categories.push(node);
            }
            _ => return Err(malformed(GRAMMAR, &form, "expected (start ...) or (category ...)")),
        }
    }
    if categories.is_empty() {
        return Err(KbError::NoCategories);
    }
    for c in &categories {
        if let Some(r) = &c.primitive_role {
            if !roles.contains_key(r) {
                return Err(dangling(GRAMMAR, "role", &r.0));
            }
        }
        for t in &c.templates {
            for e in &t.elements {
                if !index.contains_key(&e.category) {
                    return Err(dangling(GRAMMAR, "category", &e.category));
                }
                if let Some(r) = &e.role {
                    if !roles.contains_key(r) {
                        return Err(dangling(GRAMMAR, "role", &r.0));
                    }
                }
            }
        }
    }
    let start = start.unwrap_or_else(|| "S".to_string());
    match index.get(&start) {
        Some(&i) if !categories[i].is_lexical() => {}
        _ => return Err(dangling(GRAMMAR, "start category", &start)),
    }
    Ok((categories, index, start))
}

fn parse_element(form: &Sexp) -> Result<Element, KbError> {
    let items = form
        .as_list()
        .filter(|i| !i.is_empty())
        .ok_or_else(|| malformed(GRAMMAR, form, "expected (CATEGORY options...)"))?;
    let mut element = Element {
        category: ident(GRAMMAR, &items[0])?,
        subcat: None,
        optional: false,
        role: None,
        inverse: false,
    };
    let mut rest = items[1..].iter();
    while let Some(opt) = rest.next() {
        match opt.as_symbol() {
            Some(":opt") => element.optional = true,
            Some(":inverse") => element.inverse = true,
            Some(":subcat") => {
                let v = rest
                    .next()
                    .ok_or_else(|| malformed(GRAMMAR, opt, ":subcat needs a value"))?;
                element.subcat = Some(ident(GRAMMAR, v)?);
            }
            Some(":role") => {
                let v = rest
                    .next()
                    .ok_or_else(|| malformed(GRAMMAR, opt, ":role needs a value"))?;
                element.role = Some(RoleLabel(ident(GRAMMAR, v)?));
            }
            _ => return Err(malformed(GRAMMAR, opt, "unknown element option")),
        }
    }
    if element.inverse && element.role.is_none() {
        return Err(malformed(GRAMMAR, form, ":inverse needs :role"));
    }
    Ok(element)
}

fn parse_lexicon(
    text: &str,
    categories: &HashMap<String, usize>,
    concepts: &HashMap<String, usize>,
    roles: &BTreeMap<RoleLabel, Vec<RoleLabel>>,
) -> Result<BTreeMap<String, Vec<LexicalEntry>>, KbError> {
    let mut words: BTreeMap<String, Vec<LexicalEntry>> = BTreeMap::new();
    for form in read_all(text, LEXICON)? {
        let items = match (form.head(), form.as_list()) {
            (Some("word"), Some(items)) if items.len() >= 3 => items,
            _ => return Err(malformed(LEXICON, &form, "expected (word \"form\" (entry ...) ...)")),
        };
        let word = match &items[1] {
            Sexp::Str(s, _) if !s.is_empty() => s.to_ascii_lowercase(),
            other => return Err(malformed(LEXICON, other, "expected a quoted word")),
        };
        let entries = words.entry(word.clone()).or_default();
        for e in &items[2..] {
            if e.head() != Some("entry") {
                return Err(malformed(LEXICON, e, "expected (entry ...)"));
            }
            let mut category = None;
            let mut subcategory = None;
            let mut sense = None;
            let mut role_at = Vec::new();
            for field in &e.as_list().unwrap()[1..] {
                match field.head() {
                    Some("cat") => category = Some(keyed_ident(LEXICON, field, "cat")?),
                    Some("subcat") => subcategory = Some(keyed_ident(LEXICON, field, "subcat")?),
                    Some("sense") => sense = Some(keyed_ident(LEXICON, field, "sense")?),
                    Some("role-at") => match field.as_list() {
                        Some([_, c, r]) => role_at.push((ident(LEXICON, c)?, RoleLabel(ident(LEXICON, r)?))),
                        _ => return Err(malformed(LEXICON, field, "expected (role-at CATEGORY ROLE)")),
                    },
                    _ => return Err(malformed(LEXICON, field, "unknown entry field")),
                }
            }
            let (Some(category), Some(subcategory), Some(sense)) = (category, subcategory, sense) else {
                return Err(malformed(LEXICON, e, "entry needs cat, subcat and sense"));
            };
            if !categories.contains_key(&category) {
                return Err(dangling(LEXICON, "category", &category));
            }
            let sense = if sense == "NONE" {
                Sense::None
            } else if concepts.contains_key(&sense) {
                Sense::Concept(sense)
            } else {
                return Err(dangling(LEXICON, "concept", &sense));
            };
            for (c, r) in &role_at {
                if !categories.contains_key(c) {
                    return Err(dangling(LEXICON, "category", c));
                }
                if !roles.contains_key(r) {
                    return Err(dangling(LEXICON, "role", &r.0));
                }
            }
            entries.push(LexicalEntry {
                word: word.clone(),
                category,
                subcategory,
                sense,
                role_at,
            });
        }
    }
    Ok(words)
}
