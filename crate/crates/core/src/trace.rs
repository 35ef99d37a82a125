//! Line-oriented record of every engine action.

use std::fmt;

use crate::semantic_source::SemanticResult;

/// `<parent-id>.<pos>`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteRef {
    pub parent: u32,
    pub position: usize,
}

impl fmt::Display for SiteRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.parent, self.position)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailReason {
    NoSite,
    RecoveryExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Access {
        word: String,
        entries: Vec<String>,
    },
    Propose {
        node: u32,
        sites: Vec<SiteRef>,
    },
    Evaluate {
        site: SiteRef,
        semantic: SemanticResult,
        expectation: bool,
        recency: usize,
        template: usize,
    },
    Select {
        site: SiteRef,
        /// (alternative id, its site), best first.
        retained: Vec<(u32, SiteRef)>,
    },
    Bind {
        role: String,
        filler: String,
        head: String,
    },
    Fail {
        node: u32,
        reason: FailReason,
    },
    Recover {
        alt: u32,
        detach: u32,
        reattach: SiteRef,
    },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Access { word, entries } => {
                write!(f, "ACCESS w={word} entries=[{}]", entries.join(","))
            }
            TraceEvent::Propose { node, sites } => {
                let sites: Vec<String> = sites.iter().map(ToString::to_string).collect();
                write!(f, "PROPOSE node={node} sites=[{}]", sites.join(","))
            }
            TraceEvent::Evaluate {
                site,
                semantic,
                expectation,
                recency,
                template,
            } => write!(
                f,
                "EVALUATE site={site} sem={semantic} exp={} rec={recency} tmpl={template}",
                u8::from(*expectation)
            ),
            TraceEvent::Select { site, retained } => {
                let retained: Vec<String> = retained.iter().map(|(id, s)| format!("{id}@{s}")).collect();
                write!(f, "SELECT site={site} retained=[{}]", retained.join(","))
            }
            TraceEvent::Bind { role, filler, head } => {
                write!(f, "BIND role={role} filler={filler} head={head}")
            }
            TraceEvent::Fail { node, reason } => {
                let reason = match reason {
                    FailReason::NoSite => "no-site",
                    FailReason::RecoveryExhausted => "recovery-exhausted",
                };
                write!(f, "FAIL node={node} reason={reason}")
            }
            TraceEvent::Recover { alt, detach, reattach } => {
                write!(f, "RECOVER alt={alt} detach={detach} reattach={reattach}")
            }
        }
    }
}

/// An event tagged with the token being processed when it happened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub token: usize,
    pub event: TraceEvent,
}
