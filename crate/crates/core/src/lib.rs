//! Incremental sentence interpretation driven by a single control loop
//! over a syntactic and a semantic knowledge source.

pub mod engine;
pub mod error;
pub mod kb;
pub mod oracle;
pub mod semantic_source;
pub mod sexp;
pub mod structures;
pub mod syntax_source;
pub mod trace;

pub use engine::{
    process_sentence, select, tokenize, Candidate, Engine, EngineConfig, Interpretation, Lesion,
    PreferenceVector, Status, TraceVerbosity,
};
pub use error::{EngineError, KbError, StructureError};
pub use kb::{KnowledgeBase, LexicalEntry, RoleLabel, Sense};
pub use semantic_source::SemanticResult;
pub use structures::{
    AltId, AltStatus, Alternative, AlternativeStore, Counters, MeaningId, MeaningInstance, NodeId,
    ParseNode, ParseState, RoleId, RoleNode, Root, RootKind,
};
pub use syntax_source::{AttachmentSite, Projection};
pub use trace::{TraceEvent, TraceRecord};
