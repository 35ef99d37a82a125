use thiserror::Error;

/// Failures while reading or validating the knowledge sources.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("{file}:{line}:{column}: syntax error: {message}")]
    Syntax {
        file: &'static str,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{file}: malformed form: {message}")]
    Malformed { file: &'static str, message: String },
    #[error("{file}: dangling reference to {kind} `{name}`")]
    Dangling {
        file: &'static str,
        kind: &'static str,
        name: String,
    },
    #[error("{file}: duplicate {kind} `{name}`")]
    Duplicate {
        file: &'static str,
        kind: &'static str,
        name: String,
    },
    #[error("no categories defined")]
    NoCategories,
    #[error("ISA cycle: {}", .0.join(" -> "))]
    IsaCycle(Vec<String>),
    #[error("role specialization cycle: {}", .0.join(" -> "))]
    RoleCycle(Vec<String>),
    #[error("undefined concept `{0}`")]
    UndefinedConcept(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Failures of the structure-editing operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("node {child} ({category}) does not fit position {position} of template {template} of node {parent}")]
    Mismatch {
        child: u32,
        category: String,
        parent: u32,
        template: usize,
        position: usize,
    },
    #[error("node {child} span starts at {child_start} but node {parent} ends at {parent_end}")]
    Discontiguous {
        child: u32,
        child_start: usize,
        parent: u32,
        parent_end: usize,
    },
    #[error("position {position} of node {parent} is not after its last filled position")]
    OutOfOrder { parent: u32, position: usize },
    #[error("node {0} is already attached")]
    AlreadyAttached(u32),
    #[error("node {0} is a root")]
    Root(u32),
    #[error("illegal role specialization {from} -> {to}")]
    IllegalSpecialization { from: String, to: String },
    #[error("no such node {0}")]
    NoSuchNode(u32),
}

/// Failures surfaced by sentence processing.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("UNKNOWN_WORD `{word}` at token {position}")]
    UnknownWord { word: String, position: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("unknown-as-noun fallback needs concept GENERIC-THING in the knowledge base")]
    NoFallbackConcept,
}
