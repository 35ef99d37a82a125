//! The control loop: read a word, access every lexical entry, build
//! nodes, propose attachments through both knowledge sources, evaluate,
//! select, retain the rest and bind. When nothing attaches, retained
//! alternatives are reactivated and the tree is repaired in place.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::error::EngineError;
use crate::kb::{KnowledgeBase, LexicalEntry};
use crate::semantic_source::{self, SemanticResult};
use crate::structures::{
    AltStatus, Alternative, Counters, MeaningId, NodeId, ParseState, RoleId, Root, RootKind,
};
use crate::syntax_source::{self, AttachmentSite};
use crate::trace::{FailReason, TraceEvent};

/// Ranking of one candidate. Compared lexicographically: semantic class,
/// obligatory expectation filled, fewer projected nodes, more recent
/// site, earlier template. `Greater` is better.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PreferenceVector {
    pub semantic: SemanticResult,
    pub expectation_satisfied: bool,
    pub created: usize,
    pub recency: usize,
    pub template_rank: usize,
}

impl Ord for PreferenceVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.semantic
            .cmp(&other.semantic)
            .then(self.expectation_satisfied.cmp(&other.expectation_satisfied))
            .then(other.created.cmp(&self.created))
            .then(other.recency.cmp(&self.recency))
            .then(other.template_rank.cmp(&self.template_rank))
    }
}

impl PartialOrd for PreferenceVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lesion {
    Syntax,
    Semantics,
    /// Cross-source communication only.
    Link,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TraceVerbosity {
    Off,
    #[default]
    Events,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EngineConfig {
    /// Retention capacity; `None` is unlimited.
    pub capacity: Option<usize>,
    pub lesions: BTreeSet<Lesion>,
    pub unknown_as_noun: bool,
    pub trace: TraceVerbosity,
}

impl EngineConfig {
    pub fn with_lesion(mut self, lesion: Lesion) -> Self {
        self.lesions.insert(lesion);
        self
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        self.capacity = Some(capacity);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub child: NodeId,
    pub site: AttachmentSite,
    pub preference: PreferenceVector,
    /// Generation order; final tie-breaker.
    pub ordinal: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Complete,
    Fragments,
}

#[derive(Debug, Clone)]
pub struct Interpretation {
    pub status: Status,
    pub parse_roots: Vec<NodeId>,
    pub role_roots: Vec<RoleId>,
    pub meaning_roots: Vec<MeaningId>,
    pub counters: Counters,
    pub state: ParseState,
}

impl Interpretation {
    pub fn trace_lines(&self) -> Vec<String> {
        self.state.trace.iter().map(|r| r.event.to_string()).collect()
    }
}

/// Lowercases and strips surrounding punctuation.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| c.is_ascii_punctuation())
                .to_ascii_lowercase()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

pub fn process_sentence(
    tokens: &[String],
    kb: &KnowledgeBase,
    config: &EngineConfig,
) -> Result<Interpretation, EngineError> {
    Engine::new(kb, config).process_sentence(tokens)
}

/// What a recovery must make possible.
#[derive(Debug, Clone)]
enum Goal {
    /// Some leaf of the current word attaches to the last root.
    Leaves(Vec<NodeId>),
    /// The pending root attaches to the root before it.
    Root(NodeId),
    /// At end of input: the main tree is a complete sentence.
    Complete,
}

pub struct Engine<'k> {
    kb: &'k KnowledgeBase,
    config: &'k EngineConfig,
}

impl<'k> Engine<'k> {
    pub fn new(kb: &'k KnowledgeBase, config: &'k EngineConfig) -> Self {
        Engine { kb, config }
    }

    fn syntax_on(&self) -> bool {
        !self.config.lesions.contains(&Lesion::Syntax)
    }

    fn semantics_on(&self) -> bool {
        !self.config.lesions.contains(&Lesion::Semantics)
    }

    fn link_on(&self) -> bool {
        self.semantics_on() && !self.config.lesions.contains(&Lesion::Link)
    }

    /// Lexical entries per token; fails on the first unknown word unless
    /// the noun fallback is enabled.
    fn access_all(&self, tokens: &[String]) -> Result<Vec<Vec<LexicalEntry>>, EngineError> {
        tokens
            .iter()
            .enumerate()
            .map(|(position, w)| match self.kb.lexical_access(w) {
                Some(entries) => Ok(entries.to_vec()),
                None if self.config.unknown_as_noun => Ok(vec![self.kb.fallback_entry(w)?]),
                None => Err(EngineError::UnknownWord {
                    word: w.clone(),
                    position,
                }),
            })
            .collect()
    }

    pub fn process_sentence(&self, tokens: &[String]) -> Result<Interpretation, EngineError> {
        if tokens.is_empty() {
            return Err(EngineError::EmptyInput);
        }
        let entries = self.access_all(tokens)?;
        let mut state = self.start(tokens);
        for (t, e) in entries.iter().enumerate() {
            self.step(&mut state, t, e);
        }
        Ok(self.finish(state))
    }

    /// Fresh state; with syntax on, the start category is seeded as an
    /// empty expectation.
    pub fn start(&self, tokens: &[String]) -> ParseState {
        let mut state = ParseState::new(tokens.to_vec(), self.config.capacity);
        state.tracing = self.config.trace != TraceVerbosity::Off;
        if self.syntax_on() {
            let s = state.new_phrase(self.kb.start_category(), 0, 0);
            state.roots.push(Root {
                node: s,
                kind: RootKind::Main,
            });
        }
        state
    }

    /// Processes token `t` whose lexical entries are `entries`.
    pub fn step(&self, state: &mut ParseState, t: usize, entries: &[LexicalEntry]) {
        state.current_token = t;
        state.emit(TraceEvent::Access {
            word: state.tokens[t].clone(),
            entries: entries.iter().map(ToString::to_string).collect(),
        });
        let leaves = self.build_word(state, t, entries);
        if !self.syntax_on() {
            let leaf = leaves
                .iter()
                .copied()
                .find(|&l| state.node(l).meaning.is_some())
                .unwrap_or(leaves[0]);
            state.token_leaf[t] = Some(leaf);
            state.roots.push(Root {
                node: leaf,
                kind: RootKind::Stray,
            });
            return;
        }
        self.place_word(state, t, &leaves);
        self.settle_pending(state, false);
    }

    /// One leaf per lexical entry, each with its meaning instance and
    /// primitive role. Entries sharing a concept share the instance.
    fn build_word(&self, state: &mut ParseState, t: usize, entries: &[LexicalEntry]) -> Vec<NodeId> {
        let mut leaves = Vec::new();
        for entry in entries {
            let leaf = state.new_leaf(entry, t);
            if let (true, Some(concept)) = (self.semantics_on(), entry.sense.concept()) {
                let key = (t, concept.to_string());
                let (meaning, role) = match state.token_meanings.get(&key) {
                    Some(&mr) => mr,
                    None => {
                        let m = state.new_meaning(concept);
                        let r = semantic_source::primitive_role(self.kb, &entry.category)
                            .map(|label| state.new_role(label, m));
                        state.token_meanings.insert(key, (m, r));
                        (m, r)
                    }
                };
                let n = state.node_mut(leaf);
                n.meaning = Some(meaning);
                n.role = role;
            }
            leaves.push(leaf);
        }
        leaves
    }

    fn last_root(state: &ParseState) -> Root {
        *state.roots.last().expect("at least one root")
    }

    fn place_word(&self, state: &mut ParseState, t: usize, leaves: &[NodeId]) {
        loop {
            let target = Self::last_root(state);
            let mut proposals = Vec::new();
            for &leaf in leaves {
                proposals.extend(self.propose(state, target.node, leaf));
            }
            if proposals.is_empty() {
                if target.kind == RootKind::Pending && state.roots.len() >= 2 && self.place_root(state) {
                    continue;
                }
                state.emit(TraceEvent::Fail {
                    node: leaves[0].0,
                    reason: FailReason::NoSite,
                });
                if self.recover(state, &Goal::Leaves(leaves.to_vec())) {
                    continue;
                }
                state.emit(TraceEvent::Fail {
                    node: leaves[0].0,
                    reason: FailReason::RecoveryExhausted,
                });
                state.token_leaf[t] = Some(leaves[0]);
                state.roots.push(Root {
                    node: leaves[0],
                    kind: RootKind::Stray,
                });
                return;
            }
            if let Some(bottom) = self.deferrable(state, &proposals) {
                let leaf = proposals[0].0;
                let start = state.node(leaf).span.0;
                let node = state.new_phrase(&bottom.category, bottom.template, start);
                state
                    .attach(self.kb, leaf, node, bottom.template, bottom.position)
                    .expect("projection fits by construction");
                state.token_leaf[t] = Some(leaf);
                state.roots.push(Root {
                    node,
                    kind: RootKind::Pending,
                });
                return;
            }
            let candidates = self.evaluate_all(state, target.node, proposals);
            let (chosen, retained) = select(candidates);
            self.commit(state, chosen, retained);
            return;
        }
    }

    /// A constituent whose every candidate site shares the same first
    /// projection, and which carries no meaning yet, is built as a
    /// pending fragment. It is attached once meaning reaches it.
    fn deferrable(
        &self,
        state: &ParseState,
        proposals: &[(NodeId, AttachmentSite)],
    ) -> Option<syntax_source::Projection> {
        if !self.link_on() || proposals.len() < 2 {
            return None;
        }
        let child = proposals[0].0;
        if state.meaning_of(self.kb, child).is_some() {
            return None;
        }
        let bottom = proposals[0].1.creates.first()?.clone();
        let same = proposals
            .iter()
            .all(|(c, s)| *c == child && s.creates.first() == Some(&bottom));
        let sites: BTreeSet<_> = proposals.iter().map(|(_, s)| (s.parent, s.position)).collect();
        let template = &self.kb.category(&bottom.category)?.templates[bottom.template];
        let open = template.elements[bottom.position + 1..].iter().any(|e| !e.optional);
        (same && sites.len() >= 2 && open).then_some(bottom)
    }

    /// Attachment sites for `node` on the frontier of `root`.
    pub fn propose(&self, state: &mut ParseState, root: NodeId, node: NodeId) -> Vec<(NodeId, AttachmentSite)> {
        let sites = syntax_source::syntactic_candidates(self.kb, state, root, node);
        state.emit(TraceEvent::Propose {
            node: node.0,
            sites: sites.iter().map(AttachmentSite::site_ref).collect(),
        });
        sites.into_iter().map(|s| (node, s)).collect()
    }

    fn evaluate_all(
        &self,
        state: &mut ParseState,
        root: NodeId,
        proposals: Vec<(NodeId, AttachmentSite)>,
    ) -> Vec<Candidate> {
        let mut out = Vec::new();
        for (ordinal, (child, site)) in proposals.into_iter().enumerate() {
            let preference = self.evaluate(state, root, child, &site);
            state.emit(TraceEvent::Evaluate {
                site: site.site_ref(),
                semantic: preference.semantic,
                expectation: preference.expectation_satisfied,
                recency: preference.recency,
                template: preference.template_rank,
            });
            out.push(Candidate {
                child,
                site,
                preference,
                ordinal,
            });
        }
        out
    }

    /// Preference vector of one candidate. The semantic class is the
    /// worst result among the bindings the attachment would create,
    /// found by applying it to a scratch copy of the state.
    pub fn evaluate(&self, state: &ParseState, root: NodeId, child: NodeId, site: &AttachmentSite) -> PreferenceVector {
        let semantic = if self.link_on() {
            let mut scratch = state.clone();
            scratch.tracing = false;
            let before = scratch.bindings.clone();
            let top = build_chain(self.kb, &mut scratch, child, &site.creates);
            scratch
                .attach(self.kb, top, site.parent, site.template, site.position)
                .expect("candidate site accepts its projection");
            self.bind_at(&mut scratch, child);
            scratch
                .bindings
                .iter()
                .filter(|b| !before.contains(b))
                .map(|b| b.result)
                .min()
                .unwrap_or(SemanticResult::Unknown)
        } else {
            SemanticResult::Unknown
        };
        PreferenceVector {
            semantic,
            expectation_satisfied: syntax_source::expectation_satisfied(self.kb, state, site),
            created: site.creates.len(),
            recency: syntax_source::recency_rank(self.kb, state, root, site.parent),
            template_rank: syntax_source::template_rank(self.kb, state, site),
        }
    }

    /// Attaches the chosen candidate and retains the others with their
    /// projections prebuilt.
    fn commit(&self, state: &mut ParseState, chosen: Candidate, retained: Vec<Candidate>) {
        let ids: Vec<_> = retained.iter().map(|_| state.next_alt_id()).collect();
        state.emit(TraceEvent::Select {
            site: chosen.site.site_ref(),
            retained: ids
                .iter()
                .zip(&retained)
                .map(|(id, c)| (id.0, c.site.site_ref()))
                .collect(),
        });
        let top = build_chain(self.kb, state, chosen.child, &chosen.site.creates);
        state
            .attach(self.kb, top, chosen.site.parent, chosen.site.template, chosen.site.position)
            .expect("candidate site accepts its projection");
        if let Some(token) = leaf_token(state, chosen.child) {
            state.token_leaf[token] = Some(chosen.child);
        }
        for (id, c) in ids.into_iter().zip(retained) {
            let start = state.node(c.child).span.0;
            let prebuilt = c
                .site
                .creates
                .iter()
                .map(|p| state.new_phrase(&p.category, p.template, start))
                .collect();
            let status = if c.preference.semantic == SemanticResult::Violation {
                AltStatus::Violating
            } else {
                AltStatus::Viable
            };
            state.retain(Alternative {
                id,
                child: c.child,
                site: c.site,
                prebuilt,
                preference: c.preference,
                status,
                birth: state.current_token,
                displaced_child: chosen.child,
                displaced_top: top,
            });
        }
        self.bind_at(state, chosen.child);
    }

    /// Brings the bindings at `node` and every ancestor in line with the
    /// tree: meanings propagate up through head children and meet the
    /// meanings of non-head children where both are present.
    pub fn bind_at(&self, state: &mut ParseState, node: NodeId) {
        if !self.link_on() {
            return;
        }
        let mut cur = Some(node);
        while let Some(n) = cur {
            self.reconcile(state, n);
            cur = state.node(n).parent;
        }
    }

    fn reconcile(&self, state: &mut ParseState, n: NodeId) {
        let Some(template) = state.template_of(self.kb, n) else {
            return;
        };
        let head_pos = template.head;
        let head = state.meaning_of(self.kb, n);
        let node = state.node(n).clone();
        let mut desired = Vec::new();
        if let Some(hm) = head {
            for (&c, &pos) in node.children.iter().zip(&node.positions) {
                if pos == head_pos {
                    continue;
                }
                let Some(cm) = state.meaning_of(self.kb, c) else {
                    continue;
                };
                if let Some(a) = semantic_source::role_assignment(self.kb, state, n, pos, c, hm, cm) {
                    let (h, f) = if a.inverse { (cm, hm) } else { (hm, cm) };
                    desired.push((c, h, f, a));
                }
            }
        }
        let mut i = state.bindings.len();
        while i > 0 {
            i -= 1;
            let b = &state.bindings[i];
            if b.site != Some(n) {
                continue;
            }
            let keep = desired
                .iter()
                .any(|(c, h, f, a)| b.child == Some(*c) && b.head == *h && b.filler == *f && b.role == a.role);
            if !keep {
                semantic_source::unbind(state, i);
            }
        }
        for (c, h, f, a) in desired {
            let exists = state
                .bindings
                .iter()
                .any(|b| b.site == Some(n) && b.child == Some(c) && b.head == h && b.filler == f && b.role == a.role);
            if !exists {
                semantic_source::bind(self.kb, state, Some(n), Some(c), h, f, &a);
            }
        }
    }

    fn reconcile_all(&self, state: &mut ParseState) {
        if !self.link_on() {
            return;
        }
        for i in 0..state.nodes.len() {
            self.reconcile(state, NodeId(i as u32 + 1));
        }
    }

    /// Attaches pending fragments whose meaning has arrived (or all of
    /// them when `force`).
    fn settle_pending(&self, state: &mut ParseState, force: bool) {
        while state.roots.len() >= 2 {
            let last = Self::last_root(state);
            if last.kind != RootKind::Pending {
                return;
            }
            if !force && state.meaning_of(self.kb, last.node).is_none() {
                return;
            }
            if !self.place_root(state) {
                return;
            }
        }
    }

    /// Attaches the last (pending) root into the root before it.
    fn place_root(&self, state: &mut ParseState) -> bool {
        let pending = Self::last_root(state).node;
        loop {
            let target = state.roots[state.roots.len() - 2].node;
            let proposals = self.propose(state, target, pending);
            if proposals.is_empty() {
                state.emit(TraceEvent::Fail {
                    node: pending.0,
                    reason: FailReason::NoSite,
                });
                if self.recover(state, &Goal::Root(pending)) {
                    continue;
                }
                state.emit(TraceEvent::Fail {
                    node: pending.0,
                    reason: FailReason::RecoveryExhausted,
                });
                state.roots.last_mut().unwrap().kind = RootKind::Stray;
                return false;
            }
            let candidates = self.evaluate_all(state, target, proposals);
            let (chosen, retained) = select(candidates);
            self.commit(state, chosen, retained);
            state.roots.pop();
            return true;
        }
    }

    fn goal_reachable(&self, state: &ParseState, goal: &Goal) -> bool {
        match goal {
            Goal::Leaves(leaves) => {
                let root = Self::last_root(state).node;
                leaves
                    .iter()
                    .any(|&l| !syntax_source::syntactic_candidates(self.kb, state, root, l).is_empty())
            }
            Goal::Root(p) => {
                let target = state.roots[state.roots.len() - 2].node;
                !syntax_source::syntactic_candidates(self.kb, state, target, *p).is_empty()
            }
            Goal::Complete => self.is_sentence(state),
        }
    }

    /// Examines retained alternatives, most recent first, until a repair
    /// makes the goal reachable. Each alternative is tried at most once.
    fn recover(&self, state: &mut ParseState, goal: &Goal) -> bool {
        loop {
            let mut store = std::mem::take(&mut state.store);
            let alt = store.reactivate(|a| applicable(state, a));
            state.store = store;
            let Some(alt) = alt else {
                return false;
            };
            let snapshot = state.clone();
            let built = state.counters.node_constructions;
            if self.repair(state, &alt).is_ok() && self.goal_reachable(state, goal) {
                state.recovery_log.push((built, state.counters.node_constructions));
                state.counters.recoveries += 1;
                state.emit(TraceEvent::Recover {
                    alt: alt.id.0,
                    detach: alt.displaced_top.0,
                    reattach: alt.site.site_ref(),
                });
                self.reconcile_all(state);
                return true;
            }
            *state = snapshot;
        }
    }

    /// Moves the structure chosen over `alt` to the alternative's site.
    /// The displaced projection is detached; the alternative's prebuilt
    /// projection receives its child; later constituents hanging off the
    /// displaced projection are re-hung, intact, under the new one.
    fn repair(&self, state: &mut ParseState, alt: &Alternative) -> Result<(), crate::error::StructureError> {
        let kb = self.kb;
        let top = alt.displaced_top;
        let chosen = alt.displaced_child;
        state.detach(top)?;
        let mut chain = Vec::new();
        let mut cur = chosen;
        while cur != top {
            cur = state.node(cur).parent.expect("chosen child lies under its projection");
            chain.push(cur);
        }
        let mut movers: Vec<NodeId> = chain
            .iter()
            .flat_map(|&n| state.node(n).children.clone())
            .filter(|c| *c != chosen && !chain.contains(c))
            .collect();
        movers.sort_by_key(|&m| state.node(m).span.0);
        for &m in &movers {
            state.detach(m)?;
        }
        if !chain.is_empty() {
            state.detach(chosen)?;
        }
        let mut cur = alt.child;
        for (&node, proj) in alt.prebuilt.iter().zip(&alt.site.creates) {
            state.attach(kb, cur, node, proj.template, proj.position)?;
            cur = node;
        }
        state.attach(kb, cur, alt.site.parent, alt.site.template, alt.site.position)?;
        for m in movers {
            let site = syntax_source::syntactic_candidates(kb, state, cur, m)
                .into_iter()
                .find(|s| s.creates.is_empty())
                .ok_or(crate::error::StructureError::NoSuchNode(m.0))?;
            state.attach(kb, m, site.parent, site.template, site.position)?;
        }
        if let Some(token) = leaf_token(state, alt.child) {
            state.token_leaf[token] = Some(alt.child);
        }
        Ok(())
    }

    /// One tree, rooted in the start category, complete and spanning
    /// every token.
    fn is_sentence(&self, state: &ParseState) -> bool {
        if !self.syntax_on() || state.roots.len() != 1 {
            return false;
        }
        let main = state.roots[0].node;
        let node = state.node(main);
        node.category == self.kb.start_category()
            && node.span == (0, state.tokens.len())
            && state.is_complete(self.kb, main)
    }

    pub fn finish(&self, mut state: ParseState) -> Interpretation {
        state.current_token = state.tokens.len().saturating_sub(1);
        if self.syntax_on() {
            self.settle_pending(&mut state, true);
            // running out of input is a failure like any other
            if state.roots.len() == 1 && !self.is_sentence(&state) {
                let main = state.roots[0].node;
                state.emit(TraceEvent::Fail {
                    node: main.0,
                    reason: FailReason::NoSite,
                });
                if !self.recover(&mut state, &Goal::Complete) {
                    state.emit(TraceEvent::Fail {
                        node: main.0,
                        reason: FailReason::RecoveryExhausted,
                    });
                }
            }
        }
        let complete = self.is_sentence(&state);
        let (status, parse_roots, role_roots) = if complete {
            let roles = state
                .token_leaf
                .iter()
                .flatten()
                .filter_map(|&l| state.node(l).role)
                .filter(|&r| state.role(r).parent.is_none())
                .collect();
            (Status::Complete, vec![state.roots[0].node], roles)
        } else {
            let mut parse_roots = Vec::new();
            for root in &state.roots {
                if root.kind == RootKind::Main {
                    parse_roots.extend(state.node(root.node).children.iter().copied());
                } else {
                    parse_roots.push(root.node);
                }
            }
            let roles = if self.semantics_on() {
                semantic_source::semantic_fragments(self.kb, &mut state)
            } else {
                Vec::new()
            };
            (Status::Fragments, parse_roots, roles)
        };
        let meaning_roots = match status {
            Status::Complete => state.meaning_of(self.kb, parse_roots[0]).into_iter().collect(),
            Status::Fragments => role_roots.iter().map(|&r| state.role(r).filler).collect(),
        };
        Interpretation {
            status,
            parse_roots,
            role_roots,
            meaning_roots,
            counters: state.counters,
            state,
        }
    }
}

fn leaf_token(state: &ParseState, node: NodeId) -> Option<usize> {
    let n = state.node(node);
    n.is_leaf().then_some(n.span.0)
}

/// Builds the projections in `creates` above `child`, bottom first, and
/// returns the top.
fn build_chain(
    kb: &KnowledgeBase,
    state: &mut ParseState,
    child: NodeId,
    creates: &[syntax_source::Projection],
) -> NodeId {
    let mut cur = child;
    for p in creates {
        let start = state.node(cur).span.0;
        let node = state.new_phrase(&p.category, p.template, start);
        state
            .attach(kb, cur, node, p.template, p.position)
            .expect("projection fits by construction");
        cur = node;
    }
    cur
}

/// The alternative can still be realized: the structure that beat it is
/// in place and its own child is free.
fn applicable(state: &ParseState, alt: &Alternative) -> bool {
    state.node(alt.displaced_top).parent.is_some()
        && (alt.child == alt.displaced_child || state.node(alt.child).parent.is_none())
}

/// Best candidate first; ties fall to generation order.
pub fn select(mut candidates: Vec<Candidate>) -> (Candidate, Vec<Candidate>) {
    assert!(!candidates.is_empty(), "select needs at least one candidate");
    candidates.sort_by(|a, b| b.preference.cmp(&a.preference).then(a.ordinal.cmp(&b.ordinal)));
    let chosen = candidates.remove(0);
    (chosen, candidates)
}
