//! Syntactic knowledge source: attachment sites on the right frontier and
//! the minimal-attachment signal.

use crate::kb::{Element, KnowledgeBase};
use crate::structures::{NodeId, ParseNode, ParseState};
use crate::trace::SiteRef;

/// Longest projection chain considered when fitting a node into a site.
pub const MAX_PROJECTION: usize = 3;

/// A node to be built above the attached node: `category` using
/// `template`, holding the node below at `position`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    pub category: String,
    pub template: usize,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttachmentSite {
    pub parent: NodeId,
    pub template: usize,
    pub position: usize,
    /// Projections to build, bottom first. Empty for direct attachment.
    pub creates: Vec<Projection>,
}

impl AttachmentSite {
    pub fn site_ref(&self) -> SiteRef {
        SiteRef {
            parent: self.parent.0,
            position: self.position,
        }
    }
}

fn fits(element: &Element, category: &str, features: &[String]) -> bool {
    element.category == category && element.subcat.as_ref().is_none_or(|s| features.contains(s))
}

/// Does `node` satisfy the category and feature constraints of `element`?
pub fn check_features(element: &Element, node: &ParseNode) -> bool {
    fits(element, &node.category, &node.features)
}

/// Positions of `template` where a constituent may begin: every element
/// before it must be optional.
fn left_corner_positions(elements: &[Element]) -> impl Iterator<Item = (usize, &Element)> {
    elements
        .iter()
        .enumerate()
        .scan(true, |open, (i, e)| {
            if !*open {
                return None;
            }
            *open = e.optional;
            Some((i, e))
        })
}

/// Shortest chains of projections that carry a node of `category` with
/// `features` up to a constituent accepted by `target`.
pub fn projection_chains(
    kb: &KnowledgeBase,
    category: &str,
    features: &[String],
    target: &Element,
) -> Vec<Vec<Projection>> {
    // Each frontier entry: chain so far; its top is always a phrase.
    let mut frontier: Vec<Vec<Projection>> = vec![Vec::new()];
    for _ in 0..MAX_PROJECTION {
        let mut next = Vec::new();
        for chain in &frontier {
            let (cat, feats): (&str, &[String]) = match chain.last() {
                Some(p) => (&p.category, &[]),
                None => (category, features),
            };
            for c in kb.categories() {
                for (t, template) in c.templates.iter().enumerate() {
                    for (pos, e) in left_corner_positions(&template.elements) {
                        if fits(e, cat, feats) {
                            let mut longer = chain.clone();
                            longer.push(Projection {
                                category: c.name.clone(),
                                template: t,
                                position: pos,
                            });
                            next.push(longer);
                        }
                    }
                }
            }
        }
        let done: Vec<_> = next
            .iter()
            .filter(|ch| fits(target, &ch.last().unwrap().category, &[]))
            .cloned()
            .collect();
        if !done.is_empty() {
            return done;
        }
        frontier = next;
    }
    Vec::new()
}

/// Every site on the right frontier of `root` where `node` can attach,
/// directly or through a minimal projection chain. Ordered top-down,
/// then by position, then by chain.
pub fn syntactic_candidates(
    kb: &KnowledgeBase,
    state: &ParseState,
    root: NodeId,
    node: NodeId,
) -> Vec<AttachmentSite> {
    let n = state.node(node);
    if n.parent.is_some() {
        return Vec::new();
    }
    let frontier = state.right_frontier(root);
    let mut sites = Vec::new();
    for (j, &f) in frontier.iter().enumerate() {
        let fnode = state.node(f);
        let Some(template) = state.template_of(kb, f) else {
            continue;
        };
        // attaching here closes everything below on the frontier
        if !frontier[j + 1..].iter().all(|&below| state.can_close(kb, below)) {
            continue;
        }
        let from = fnode.last_position().map_or(0, |p| p + 1);
        for (pos, element) in template.elements.iter().enumerate().skip(from) {
            let site = |creates| AttachmentSite {
                parent: f,
                template: fnode.template.unwrap(),
                position: pos,
                creates,
            };
            if check_features(element, n) {
                sites.push(site(Vec::new()));
            } else {
                for chain in projection_chains(kb, &n.category, &n.features, element) {
                    sites.push(site(chain));
                }
            }
            if !element.optional {
                break;
            }
        }
    }
    sites
}

/// Rank of `parent` on the right frontier counted from the bottom;
/// 0 is the most recently opened constituent.
pub fn recency_rank(kb: &KnowledgeBase, state: &ParseState, root: NodeId, parent: NodeId) -> usize {
    state
        .right_frontier(root)
        .iter()
        .rev()
        .filter(|&&f| state.template_of(kb, f).is_some())
        .position(|&f| f == parent)
        .unwrap_or(usize::MAX)
}

/// Attaching at `site` fills an obligatory position.
pub fn expectation_satisfied(kb: &KnowledgeBase, state: &ParseState, site: &AttachmentSite) -> bool {
    state
        .element(kb, site.parent, site.position)
        .is_some_and(|e| !e.optional)
}

/// Global grammar-file rank of the template that receives the node.
pub fn template_rank(kb: &KnowledgeBase, state: &ParseState, site: &AttachmentSite) -> usize {
    match site.creates.first() {
        Some(p) => kb.category(&p.category).unwrap().templates[p.template].rank,
        None => state.template_of(kb, site.parent).unwrap().rank,
    }
}
