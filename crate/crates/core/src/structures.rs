//! The evolving interpretation of one sentence: parse tree, role tree,
//! meaning instances, the store of retained alternatives and the audit
//! counters.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use crate::engine::PreferenceVector;
use crate::error::StructureError;
use crate::kb::{Element, KnowledgeBase, LexicalEntry, RoleLabel};
use crate::semantic_source::SemanticResult;
use crate::syntax_source::AttachmentSite;
use crate::trace::{TraceEvent, TraceRecord};

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(NodeId);
id_type!(RoleId);
id_type!(MeaningId);
id_type!(AltId);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseNode {
    pub id: NodeId,
    pub category: String,
    pub features: Vec<String>,
    /// Template in use; `None` for lexical leaves.
    pub template: Option<usize>,
    /// Half-open token range.
    pub span: (usize, usize),
    pub children: Vec<NodeId>,
    /// Template position of each child, parallel to `children`.
    pub positions: Vec<usize>,
    pub parent: Option<NodeId>,
    pub meaning: Option<MeaningId>,
    pub role: Option<RoleId>,
    pub entry: Option<LexicalEntry>,
}

impl ParseNode {
    pub fn is_leaf(&self) -> bool {
        self.template.is_none()
    }

    pub fn last_position(&self) -> Option<usize> {
        self.positions.last().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleNode {
    pub id: RoleId,
    pub label: RoleLabel,
    pub filler: MeaningId,
    pub parent: Option<RoleId>,
    /// Prior labels, oldest first.
    pub history: Vec<RoleLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub role: RoleLabel,
    pub filler: MeaningId,
    pub result: SemanticResult,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeaningInstance {
    pub id: MeaningId,
    pub concept: String,
    /// Concept name plus per-parse ordinal, e.g. `SEE1`.
    pub tag: String,
    pub bindings: Vec<Binding>,
}

/// A binding together with the structural position that licensed it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindRecord {
    /// Parse node where the meanings met; `None` for bindings made
    /// without syntax.
    pub site: Option<NodeId>,
    pub child: Option<NodeId>,
    pub head: MeaningId,
    pub filler: MeaningId,
    pub role: RoleLabel,
    pub result: SemanticResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AltStatus {
    Viable,
    Violating,
    Consumed,
}

/// An unselected candidate, deactivated but kept for error recovery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alternative {
    pub id: AltId,
    pub child: NodeId,
    pub site: AttachmentSite,
    /// Projection nodes built for this candidate, bottom first; linked
    /// only if the alternative is reactivated.
    pub prebuilt: Vec<NodeId>,
    pub preference: PreferenceVector,
    pub status: AltStatus,
    /// Token index at which the choice was made.
    pub birth: usize,
    /// The node that won the choice and the top of its projection.
    pub displaced_child: NodeId,
    pub displaced_top: NodeId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlternativeStore {
    items: VecDeque<Alternative>,
    capacity: Option<usize>,
    peak: usize,
    evicted: usize,
}

impl AlternativeStore {
    pub fn new(capacity: Option<usize>) -> Self {
        AlternativeStore {
            capacity,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn peak(&self) -> usize {
        self.peak
    }

    pub fn evicted(&self) -> usize {
        self.evicted
    }

    pub fn iter(&self) -> impl Iterator<Item = &Alternative> {
        self.items.iter()
    }

    pub fn retain(&mut self, alt: Alternative) {
        self.items.push_back(alt);
        if let Some(cap) = self.capacity {
            self.prune(cap);
        }
        self.peak = self.peak.max(self.items.len());
    }

    /// Evicts the oldest alternatives beyond `capacity`.
    pub fn prune(&mut self, capacity: usize) {
        while self.items.len() > capacity {
            self.items.pop_front();
            self.evicted += 1;
        }
    }

    /// Most recent viable alternative matching `predicate`, falling back
    /// to the most recent violating one. The result is marked consumed
    /// and leaves the store.
    pub fn reactivate(&mut self, mut predicate: impl FnMut(&Alternative) -> bool) -> Option<Alternative> {
        let pick = |status: AltStatus, items: &VecDeque<Alternative>, predicate: &mut dyn FnMut(&Alternative) -> bool| {
            items
                .iter()
                .rposition(|a| a.status == status && predicate(a))
        };
        let index = pick(AltStatus::Viable, &self.items, &mut predicate)
            .or_else(|| pick(AltStatus::Violating, &self.items, &mut predicate))?;
        let mut alt = self.items.remove(index).unwrap();
        alt.status = AltStatus::Consumed;
        Some(alt)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub node_constructions: usize,
    pub attachments: usize,
    pub detachments: usize,
    pub recoveries: usize,
    pub retained_peak: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    /// The sentence tree grown from the start category.
    Main,
    /// A constituent waiting for meaning before it is attached.
    Pending,
    /// A node that could not be attached anywhere.
    Stray,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Root {
    pub node: NodeId,
    pub kind: RootKind,
}

/// Everything one parse owns. Cloning is cheap enough for desk-scale
/// sentences and is how candidates are evaluated and repairs undone.
#[derive(Debug, Clone)]
pub struct ParseState {
    pub tokens: Vec<String>,
    pub nodes: Vec<ParseNode>,
    pub roles: Vec<RoleNode>,
    pub meanings: Vec<MeaningInstance>,
    pub bindings: Vec<BindRecord>,
    pub store: AlternativeStore,
    pub counters: Counters,
    pub roots: Vec<Root>,
    /// Leaf chosen for each token so far.
    pub token_leaf: Vec<Option<NodeId>>,
    /// Meaning and role built for each (token, concept).
    pub token_meanings: BTreeMap<(usize, String), (MeaningId, Option<RoleId>)>,
    pub trace: Vec<TraceRecord>,
    pub tracing: bool,
    pub current_token: usize,
    /// node_constructions before and after each successful recovery.
    pub recovery_log: Vec<(usize, usize)>,
    ordinals: BTreeMap<String, u32>,
    next_alt: u32,
}

impl ParseState {
    pub fn new(tokens: Vec<String>, capacity: Option<usize>) -> Self {
        let n = tokens.len();
        ParseState {
            tokens,
            nodes: Vec::new(),
            roles: Vec::new(),
            meanings: Vec::new(),
            bindings: Vec::new(),
            store: AlternativeStore::new(capacity),
            counters: Counters::default(),
            roots: Vec::new(),
            token_leaf: vec![None; n],
            token_meanings: BTreeMap::new(),
            trace: Vec::new(),
            tracing: true,
            current_token: 0,
            recovery_log: Vec::new(),
            ordinals: BTreeMap::new(),
            next_alt: 1,
        }
    }

    pub fn emit(&mut self, event: TraceEvent) {
        if self.tracing {
            self.trace.push(TraceRecord {
                token: self.current_token,
                event,
            });
        }
    }

    pub fn node(&self, id: NodeId) -> &ParseNode {
        &self.nodes[id.0 as usize - 1]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut ParseNode {
        &mut self.nodes[id.0 as usize - 1]
    }

    pub fn try_node(&self, id: NodeId) -> Result<&ParseNode, StructureError> {
        (id.0 as usize)
            .checked_sub(1)
            .and_then(|i| self.nodes.get(i))
            .ok_or(StructureError::NoSuchNode(id.0))
    }

    pub fn meaning(&self, id: MeaningId) -> &MeaningInstance {
        &self.meanings[id.0 as usize - 1]
    }

    pub fn meaning_mut(&mut self, id: MeaningId) -> &mut MeaningInstance {
        &mut self.meanings[id.0 as usize - 1]
    }

    pub fn role(&self, id: RoleId) -> &RoleNode {
        &self.roles[id.0 as usize - 1]
    }

    pub fn role_mut(&mut self, id: RoleId) -> &mut RoleNode {
        &mut self.roles[id.0 as usize - 1]
    }

    pub fn role_of_meaning(&self, m: MeaningId) -> Option<RoleId> {
        self.roles.iter().find(|r| r.filler == m).map(|r| r.id)
    }

    pub fn new_leaf(&mut self, entry: &LexicalEntry, token: usize) -> NodeId {
        let id = NodeId(self.nodes.len() as u32 + 1);
        self.nodes.push(ParseNode {
            id,
            category: entry.category.clone(),
            features: vec![entry.subcategory.clone()],
            template: None,
            span: (token, token + 1),
            children: Vec::new(),
            positions: Vec::new(),
            parent: None,
            meaning: None,
            role: None,
            entry: Some(entry.clone()),
        });
        self.counters.node_constructions += 1;
        id
    }

    pub fn new_phrase(&mut self, category: &str, template: usize, start: usize) -> NodeId {
        let id = NodeId(self.nodes.len() as u32 + 1);
        self.nodes.push(ParseNode {
            id,
            category: category.to_string(),
            features: Vec::new(),
            template: Some(template),
            span: (start, start),
            children: Vec::new(),
            positions: Vec::new(),
            parent: None,
            meaning: None,
            role: None,
            entry: None,
        });
        self.counters.node_constructions += 1;
        id
    }

    pub fn new_meaning(&mut self, concept: &str) -> MeaningId {
        let ordinal = self.ordinals.entry(concept.to_string()).or_insert(0);
        *ordinal += 1;
        let id = MeaningId(self.meanings.len() as u32 + 1);
        self.meanings.push(MeaningInstance {
            id,
            concept: concept.to_string(),
            tag: format!("{concept}{ordinal}"),
            bindings: Vec::new(),
        });
        id
    }

    pub fn new_role(&mut self, label: RoleLabel, filler: MeaningId) -> RoleId {
        let id = RoleId(self.roles.len() as u32 + 1);
        self.roles.push(RoleNode {
            id,
            label,
            filler,
            parent: None,
            history: Vec::new(),
        });
        id
    }

    pub fn next_alt_id(&mut self) -> AltId {
        let id = AltId(self.next_alt);
        self.next_alt += 1;
        id
    }

    /// Retains `alt`, keeping `retained_peak` in step with the store.
    pub fn retain(&mut self, alt: Alternative) {
        self.store.retain(alt);
        self.counters.retained_peak = self.counters.retained_peak.max(self.store.peak());
    }

    pub fn template_of<'k>(&self, kb: &'k KnowledgeBase, id: NodeId) -> Option<&'k crate::kb::Template> {
        let n = self.node(id);
        let t = n.template?;
        kb.category(&n.category)?.templates.get(t)
    }

    pub fn element<'k>(&self, kb: &'k KnowledgeBase, id: NodeId, position: usize) -> Option<&'k Element> {
        self.template_of(kb, id)?.elements.get(position)
    }

    /// The child occupying the head position, if attached.
    pub fn head_child(&self, kb: &KnowledgeBase, id: NodeId) -> Option<NodeId> {
        let head = self.template_of(kb, id)?.head;
        let n = self.node(id);
        n.positions
            .iter()
            .position(|&p| p == head)
            .map(|i| n.children[i])
    }

    /// Meaning carried by a node: its own for leaves, otherwise the
    /// meaning propagated up from the head child.
    pub fn meaning_of(&self, kb: &KnowledgeBase, id: NodeId) -> Option<MeaningId> {
        let mut cur = id;
        loop {
            let n = self.node(cur);
            if n.is_leaf() {
                return n.meaning;
            }
            cur = self.head_child(kb, cur)?;
        }
    }

    /// True when every obligatory position of every node in the subtree
    /// is filled.
    pub fn is_complete(&self, kb: &KnowledgeBase, id: NodeId) -> bool {
        let n = self.node(id);
        let Some(template) = self.template_of(kb, id) else {
            return true;
        };
        template
            .elements
            .iter()
            .enumerate()
            .all(|(p, e)| e.optional || n.positions.contains(&p))
            && n.children.iter().all(|&c| self.is_complete(kb, c))
    }

    /// True when every obligatory position after the last filled one is
    /// optional, i.e. the node may be closed now.
    pub fn can_close(&self, kb: &KnowledgeBase, id: NodeId) -> bool {
        let n = self.node(id);
        let Some(template) = self.template_of(kb, id) else {
            return true;
        };
        let from = n.last_position().map_or(0, |p| p + 1);
        template.elements[from..].iter().all(|e| e.optional)
    }

    /// Rightmost path of the tree rooted at `root`, top-down.
    pub fn right_frontier(&self, root: NodeId) -> Vec<NodeId> {
        let mut path = vec![root];
        let mut cur = root;
        while let Some(&last) = self.node(cur).children.last() {
            path.push(last);
            cur = last;
        }
        path
    }

    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = vec![id];
        let mut i = 0;
        while i < out.len() {
            out.extend(self.node(out[i]).children.iter().copied());
            i += 1;
        }
        out.sort();
        out
    }

    pub fn root_of(&self, mut id: NodeId) -> NodeId {
        while let Some(p) = self.node(id).parent {
            id = p;
        }
        id
    }

    fn refresh_spans(&mut self, mut id: NodeId) {
        loop {
            let n = self.node(id);
            if !n.is_leaf() {
                let span = match (n.children.first(), n.children.last()) {
                    (Some(&f), Some(&l)) => (self.node(f).span.0, self.node(l).span.1),
                    _ => (n.span.0, n.span.0),
                };
                self.node_mut(id).span = span;
            }
            match self.node(id).parent {
                Some(p) => id = p,
                None => return,
            }
        }
    }

    /// Links `child` under `site.parent` at `site.position`. Projection
    /// chains in `site.creates` are not built here.
    pub fn attach(
        &mut self,
        kb: &KnowledgeBase,
        child: NodeId,
        parent: NodeId,
        template: usize,
        position: usize,
    ) -> Result<(), StructureError> {
        let c = self.try_node(child)?;
        let p = self.try_node(parent)?;
        if c.parent.is_some() {
            return Err(StructureError::AlreadyAttached(child.0));
        }
        let mismatch = || StructureError::Mismatch {
            child: child.0,
            category: c.category.clone(),
            parent: parent.0,
            template,
            position,
        };
        if p.template != Some(template) {
            return Err(mismatch());
        }
        let element = self.element(kb, parent, position).ok_or_else(mismatch)?;
        if !crate::syntax_source::check_features(element, c) {
            return Err(mismatch());
        }
        if p.last_position().is_some_and(|last| position <= last) {
            return Err(StructureError::OutOfOrder {
                parent: parent.0,
                position,
            });
        }
        let parent_end = if p.children.is_empty() { p.span.0 } else { p.span.1 };
        if c.span.0 != parent_end {
            return Err(StructureError::Discontiguous {
                child: child.0,
                child_start: c.span.0,
                parent: parent.0,
                parent_end,
            });
        }
        let p = self.node_mut(parent);
        p.children.push(child);
        p.positions.push(position);
        self.node_mut(child).parent = Some(parent);
        self.refresh_spans(parent);
        self.counters.attachments += 1;
        Ok(())
    }

    /// Unlinks `node` from its parent; its subtree is left untouched.
    pub fn detach(&mut self, node: NodeId) -> Result<NodeId, StructureError> {
        let parent = self
            .try_node(node)?
            .parent
            .ok_or(StructureError::Root(node.0))?;
        let p = self.node_mut(parent);
        let i = p.children.iter().position(|&c| c == node).unwrap();
        p.children.remove(i);
        p.positions.remove(i);
        self.node_mut(node).parent = None;
        self.refresh_spans(parent);
        self.counters.detachments += 1;
        Ok(parent)
    }

    pub fn specialize_role(
        &mut self,
        kb: &KnowledgeBase,
        role: RoleId,
        target: &RoleLabel,
    ) -> Result<(), StructureError> {
        let r = self.role(role);
        if !kb.can_specialize(&r.label, target) {
            return Err(StructureError::IllegalSpecialization {
                from: r.label.to_string(),
                to: target.to_string(),
            });
        }
        let r = self.role_mut(role);
        let old = std::mem::replace(&mut r.label, target.clone());
        r.history.push(old);
        Ok(())
    }

    /// Checks parent/child symmetry, acyclicity and span contiguity of
    /// every attached node. Used by tests after each operation.
    pub fn check_well_formed(&self) -> Result<(), String> {
        for n in &self.nodes {
            for (i, &c) in n.children.iter().enumerate() {
                if self.node(c).parent != Some(n.id) {
                    return Err(format!("child {c} of {} does not point back", n.id));
                }
                if i > 0 {
                    let prev = self.node(n.children[i - 1]);
                    if prev.span.1 != self.node(c).span.0 {
                        return Err(format!("gap between children of {}", n.id));
                    }
                    if n.positions[i - 1] >= n.positions[i] {
                        return Err(format!("positions out of order under {}", n.id));
                    }
                }
            }
            if let (Some(&f), Some(&l)) = (n.children.first(), n.children.last()) {
                if n.span != (self.node(f).span.0, self.node(l).span.1) {
                    return Err(format!("span of {} does not cover its children", n.id));
                }
            }
            let mut seen = 0;
            let mut cur = n.id;
            while let Some(p) = self.node(cur).parent {
                cur = p;
                seen += 1;
                if seen > self.nodes.len() {
                    return Err(format!("parent cycle through {}", n.id));
                }
            }
        }
        Ok(())
    }
}
