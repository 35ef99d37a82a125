//! Semantic knowledge source: primitive roles, selectional checks, role
//! assignment at the node where two meanings meet, and syntax-free
//! fragment building.

use std::fmt;

use crate::kb::{Element, KnowledgeBase, RoleLabel};
use crate::structures::{BindRecord, Binding, MeaningId, NodeId, ParseState, RoleId};
use crate::trace::TraceEvent;

/// Outcome of a selectional check. Declared worst first so the derived
/// order ranks `Ok` highest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum SemanticResult {
    Violation,
    #[default]
    Unknown,
    Ok,
}

impl fmt::Display for SemanticResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SemanticResult::Ok => "OK",
            SemanticResult::Unknown => "UNKNOWN",
            SemanticResult::Violation => "VIOLATION",
        })
    }
}

pub fn primitive_role(kb: &KnowledgeBase, category: &str) -> Option<RoleLabel> {
    kb.category(category)?.primitive_role.clone()
}

/// OK if `slot` exists on `event_concept` and `filler_concept` falls under
/// its restriction, VIOLATION if it exists and does not, UNKNOWN otherwise.
pub fn selectional_check(
    kb: &KnowledgeBase,
    event_concept: &str,
    slot: &RoleLabel,
    filler_concept: &str,
) -> SemanticResult {
    match kb.slot_restriction(event_concept, slot) {
        None => SemanticResult::Unknown,
        Some(restriction) => match kb.isa_subsumes(filler_concept, restriction) {
            Ok(true) => SemanticResult::Ok,
            Ok(false) => SemanticResult::Violation,
            Err(_) => SemanticResult::Unknown,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub role: RoleLabel,
    /// The parent meaning fills `role` of the child meaning.
    pub inverse: bool,
    pub result: SemanticResult,
}

/// Role a child constituent plays where it meets the parent's meaning:
/// the template's `:role` annotation, else the role its preposition marks
/// at the parent's category.
pub fn role_for_position(
    kb: &KnowledgeBase,
    state: &ParseState,
    parent_category: &str,
    element: &Element,
    child: NodeId,
) -> Option<(RoleLabel, bool)> {
    if let Some(r) = &element.role {
        return Some((r.clone(), element.inverse));
    }
    let mut cur = child;
    loop {
        let n = state.node(cur);
        if let Some(entry) = &n.entry {
            return entry.role_at(parent_category).filter(|r| kb.has_role(r)).map(|r| (r.clone(), false));
        }
        cur = *n.children.first()?;
    }
}

pub fn role_assignment(
    kb: &KnowledgeBase,
    state: &ParseState,
    parent: NodeId,
    position: usize,
    child: NodeId,
    parent_meaning: MeaningId,
    child_meaning: MeaningId,
) -> Option<Assignment> {
    let element = state.element(kb, parent, position)?;
    let (role, inverse) = role_for_position(kb, state, &state.node(parent).category, element, child)?;
    let (event, filler) = if inverse {
        (child_meaning, parent_meaning)
    } else {
        (parent_meaning, child_meaning)
    };
    let result = selectional_check(
        kb,
        &state.meaning(event).concept,
        &role,
        &state.meaning(filler).concept,
    );
    Some(Assignment { role, inverse, result })
}

/// Records `filler` in `role` of `head`, specializes the filler's role
/// node and links the role tree.
pub fn bind(
    kb: &KnowledgeBase,
    state: &mut ParseState,
    site: Option<NodeId>,
    child: Option<NodeId>,
    head: MeaningId,
    filler: MeaningId,
    assignment: &Assignment,
) {
    state.meaning_mut(head).bindings.push(Binding {
        role: assignment.role.clone(),
        filler,
        result: assignment.result,
    });
    state.bindings.push(BindRecord {
        site,
        child,
        head,
        filler,
        role: assignment.role.clone(),
        result: assignment.result,
    });
    let filler_role = state.role_of_meaning(filler);
    let head_role = state.role_of_meaning(head);
    if assignment.inverse {
        if let (Some(h), Some(f)) = (head_role, filler_role) {
            state.role_mut(h).parent = Some(f);
        }
    } else if let Some(f) = filler_role {
        let label = state.role(f).label.clone();
        if label != assignment.role && kb.can_specialize(&label, &assignment.role) {
            state.specialize_role(kb, f, &assignment.role).expect("checked specialization");
        }
        state.role_mut(f).parent = head_role;
    }
    let event = TraceEvent::Bind {
        role: assignment.role.to_string(),
        filler: state.meaning(filler).tag.clone(),
        head: state.meaning(head).tag.clone(),
    };
    state.emit(event);
}

/// Removes a recorded binding. Role labels keep their specialization.
pub fn unbind(state: &mut ParseState, index: usize) {
    let record = state.bindings.remove(index);
    let bindings = &mut state.meaning_mut(record.head).bindings;
    if let Some(i) = bindings
        .iter()
        .position(|b| b.role == record.role && b.filler == record.filler)
    {
        bindings.remove(i);
    }
    for (child_meaning, parent_meaning) in [(record.filler, record.head), (record.head, record.filler)] {
        if let (Some(c), Some(p)) = (state.role_of_meaning(child_meaning), state.role_of_meaning(parent_meaning)) {
            if state.role(c).parent == Some(p) {
                state.role_mut(c).parent = None;
            }
        }
    }
}

/// Role nodes of the words currently chosen, in token order.
fn active_roles(state: &ParseState) -> Vec<RoleId> {
    state
        .token_leaf
        .iter()
        .flatten()
        .filter_map(|&leaf| state.node(leaf).role)
        .collect()
}

/// Best-effort role trees built from role and slot knowledge alone.
/// Each event still lacking participants takes the leftmost unattached
/// compatible THING as ACTOR and the next compatible one as OBJECT.
/// Returns the fragment roots in token order.
pub fn semantic_fragments(kb: &KnowledgeBase, state: &mut ParseState) -> Vec<RoleId> {
    let event = RoleLabel::new("EVENT");
    let thing = RoleLabel::new("THING");
    let roles = active_roles(state);
    let events: Vec<RoleId> = roles
        .iter()
        .copied()
        .filter(|&r| state.role(r).label == event)
        .collect();
    for e in events {
        let head = state.role(e).filler;
        let mut after = None;
        for (slot, position) in [("ACTOR", 0usize), ("OBJECT", 1)] {
            let slot = RoleLabel::new(slot);
            if state.meaning(head).bindings.iter().any(|b| b.role == slot) {
                continue;
            }
            let free = |state: &ParseState, r: RoleId| {
                let role = state.role(r);
                role.parent.is_none()
                    && r != e
                    && (role.label == thing || role.label == slot)
                    && selectional_check(kb, &state.meaning(head).concept, &slot, &state.meaning(role.filler).concept)
                        == SemanticResult::Ok
            };
            let start = if position == 0 { 0 } else { after.map_or(0, |i| i + 1) };
            let pick = roles[start..]
                .iter()
                .position(|&r| free(state, r))
                .map(|i| i + start)
                .or_else(|| roles.iter().position(|&r| free(state, r)));
            if let Some(i) = pick {
                after = Some(i);
                let filler = state.role(roles[i]).filler;
                let assignment = Assignment {
                    role: slot,
                    inverse: false,
                    result: SemanticResult::Ok,
                };
                bind(kb, state, None, None, head, filler, &assignment);
            }
        }
    }
    roles
        .into_iter()
        .filter(|&r| state.role(r).parent.is_none())
        .collect()
}
