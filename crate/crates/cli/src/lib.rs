//! Command-line front end: parse sentences and corpora, print traces,
//! trees, role structures and per-sentence metrics.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use tandem_core::oracle::{self, OracleParse};
use tandem_core::{
    tokenize, Engine, EngineConfig, EngineError, Interpretation, KnowledgeBase, Lesion, MeaningId, NodeId,
    ParseState, RoleId, SemanticResult, Status, TraceVerbosity,
};

#[derive(Parser, Debug)]
#[command(name = "tandem", version, about = "Incremental sentence interpreter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse sentences given on the command line.
    Parse {
        #[command(flatten)]
        opts: Opts,
        #[arg(required = true)]
        sentences: Vec<String>,
    },
    /// Parse every sentence in a file and print a metrics table.
    Corpus {
        #[command(flatten)]
        opts: Opts,
        path: PathBuf,
    },
    /// List every complete parse of a sentence.
    Oracle {
        #[command(flatten)]
        opts: Opts,
        sentence: String,
    },
    /// Load and validate a knowledge base.
    CheckKb {
        #[arg(long)]
        kb: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Opts {
    /// Directory holding lexicon.sexp, grammar.sexp and concepts.sexp.
    #[arg(long)]
    kb: Option<PathBuf>,
    /// Print the event trace before each result.
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum)]
    lesion: Vec<LesionArg>,
    /// Maximum number of retained alternatives.
    #[arg(long)]
    capacity: Option<usize>,
    /// Treat unknown words as generic common nouns.
    #[arg(long)]
    unknown_as_noun: bool,
    #[arg(long, value_enum, default_value_t = Format::All)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LesionArg {
    Syntax,
    Semantics,
    Link,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Tree,
    Roles,
    Meaning,
    All,
}

impl Opts {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            capacity: self.capacity,
            lesions: self
                .lesion
                .iter()
                .map(|l| match l {
                    LesionArg::Syntax => Lesion::Syntax,
                    LesionArg::Semantics => Lesion::Semantics,
                    LesionArg::Link => Lesion::Link,
                })
                .collect(),
            unknown_as_noun: self.unknown_as_noun,
            trace: TraceVerbosity::Events,
        }
    }
}

fn load_kb(dir: Option<&PathBuf>) -> Result<KnowledgeBase, String> {
    match dir {
        Some(d) => KnowledgeBase::load_dir(d).map_err(|e| e.to_string()),
        None => Ok(KnowledgeBase::shipped()),
    }
}

/// Runs the command line `argv` (program name first). Returns the exit
/// code: 0 when every sentence completes, 2 when any ends in fragments,
/// 1 on usage, knowledge-base or unknown-word errors.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(shown.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(shown.as_bytes());
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Command::Parse { opts, sentences } => cmd_parse(&opts, &sentences, out, err),
        Command::Corpus { opts, path } => cmd_corpus(&opts, &path, out, err),
        Command::Oracle { opts, sentence } => cmd_oracle(&opts, &sentence, out),
        Command::CheckKb { kb } => cmd_check_kb(kb.as_ref(), out),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            1
        }
    }
}

fn io(e: std::io::Error) -> String {
    e.to_string()
}

fn interpret(kb: &KnowledgeBase, config: &EngineConfig, sentence: &str) -> Result<Interpretation, EngineError> {
    Engine::new(kb, config).process_sentence(&tokenize(sentence))
}

fn cmd_parse(opts: &Opts, sentences: &[String], out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let kb = load_kb(opts.kb.as_ref())?;
    let config = opts.config();
    let mut code = 0;
    for sentence in sentences {
        let interp = match interpret(&kb, &config, sentence) {
            Ok(i) => i,
            Err(e) => {
                writeln!(err, "error: {e}").map_err(io)?;
                return Ok(1);
            }
        };
        if opts.trace {
            for line in interp.trace_lines() {
                writeln!(out, "{line}").map_err(io)?;
            }
        }
        out.write_all(render(&interp, opts.format).as_bytes()).map_err(io)?;
        if interp.status == Status::Fragments {
            code = 2;
        }
    }
    Ok(code)
}

/// Status line plus the requested sections.
pub fn render(interp: &Interpretation, format: Format) -> String {
    let mut s = String::new();
    let status = match interp.status {
        Status::Complete => "complete",
        Status::Fragments => "fragments",
    };
    s += &format!("status: {status}\n");
    if matches!(format, Format::Tree | Format::All) {
        s += "tree:\n";
        for &root in &interp.parse_roots {
            s += &render_tree(&interp.state, root);
            s += "\n";
        }
    }
    if matches!(format, Format::Roles | Format::All) {
        s += "roles:\n";
        s += &render_roles(interp);
    }
    if matches!(format, Format::Meaning | Format::All) {
        s += "meaning:\n";
        s += &render_meaning(interp);
    }
    s
}

/// Bracketed tree; a node whose children are all leaves stays on one
/// line, otherwise each child goes on its own indented line.
pub fn render_tree(state: &ParseState, root: NodeId) -> String {
    let mut s = String::new();
    tree_into(state, root, 0, &mut s);
    s
}

fn tree_into(state: &ParseState, id: NodeId, depth: usize, s: &mut String) {
    let n = state.node(id);
    if let Some(entry) = &n.entry {
        s.push_str(&format!("({} {})", n.category, entry.word));
        return;
    }
    s.push('(');
    s.push_str(&n.category);
    let flat = n.children.iter().all(|&c| state.node(c).is_leaf());
    for &c in &n.children {
        if flat {
            s.push(' ');
        } else {
            s.push('\n');
            s.push_str(&"  ".repeat(depth + 1));
        }
        tree_into(state, c, depth + 1, s);
    }
    s.push(')');
}

fn active_roles(state: &ParseState) -> Vec<RoleId> {
    state
        .token_leaf
        .iter()
        .flatten()
        .filter_map(|&l| state.node(l).role)
        .collect()
}

/// Role trees, one line per role: label, filler tag, and the chain of
/// labels it passed through when it was specialized.
pub fn render_roles(interp: &Interpretation) -> String {
    let state = &interp.state;
    let active = active_roles(state);
    let mut s = String::new();
    let mut seen = BTreeSet::new();
    for &r in &interp.role_roots {
        roles_into(state, &active, r, 0, &mut seen, &mut s);
    }
    s
}

fn roles_into(
    state: &ParseState,
    active: &[RoleId],
    r: RoleId,
    depth: usize,
    seen: &mut BTreeSet<RoleId>,
    s: &mut String,
) {
    if !seen.insert(r) {
        return;
    }
    let role = state.role(r);
    s.push_str(&"  ".repeat(depth));
    s.push_str(&format!("{} {}", role.label, state.meaning(role.filler).tag));
    if !role.history.is_empty() {
        let chain: Vec<String> = role
            .history
            .iter()
            .chain(std::iter::once(&role.label))
            .map(ToString::to_string)
            .collect();
        s.push_str(&format!(" [{}]", chain.join(">")));
    }
    s.push('\n');
    for &c in active {
        if state.role(c).parent == Some(r) {
            roles_into(state, active, c, depth + 1, seen, s);
        }
    }
}

/// One line per instance with bindings: the meaning roots first, then the
/// instances of the role trees in display order. Roots are printed even
/// without bindings.
pub fn render_meaning(interp: &Interpretation) -> String {
    let state = &interp.state;
    let active = active_roles(state);
    let mut order: Vec<(MeaningId, bool)> = interp.meaning_roots.iter().map(|&m| (m, true)).collect();
    let mut stack: Vec<RoleId> = interp.role_roots.iter().rev().copied().collect();
    let mut visited = BTreeSet::new();
    while let Some(r) = stack.pop() {
        if !visited.insert(r) {
            continue;
        }
        order.push((state.role(r).filler, false));
        let children: Vec<RoleId> = active.iter().copied().filter(|&c| state.role(c).parent == Some(r)).collect();
        stack.extend(children.into_iter().rev());
    }
    let name = |m: MeaningId| {
        let inst = state.meaning(m);
        format!("{}:{}", inst.tag, inst.concept)
    };
    let mut s = String::new();
    let mut seen = BTreeSet::new();
    for (m, root) in order {
        let inst = state.meaning(m);
        if (!root && inst.bindings.is_empty()) || !seen.insert(m) {
            continue;
        }
        s.push_str(&name(m));
        for b in &inst.bindings {
            s.push_str(&format!(" {}={}", b.role, name(b.filler)));
            if b.result == SemanticResult::Violation {
                s.push_str("(VIOLATION)");
            }
        }
        s.push('\n');
    }
    s
}

pub const CORPUS_HEADER: &str =
    "sentence\ttokens\tstatus\trecoveries\tretained_peak\tnode_constructions\tattachments\tdetachments\tevents_per_word";

/// Non-empty, non-comment lines of a corpus file.
pub fn corpus_sentences(text: &str) -> Vec<&str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// One metrics row; `Err` carries the diagnostic for a failed sentence.
pub fn corpus_row(kb: &KnowledgeBase, config: &EngineConfig, sentence: &str) -> Result<(String, Status), String> {
    let tokens = tokenize(sentence);
    let interp = Engine::new(kb, config)
        .process_sentence(&tokens)
        .map_err(|e| e.to_string())?;
    let mut per_word = vec![0usize; tokens.len()];
    for r in &interp.state.trace {
        per_word[r.token] += 1;
    }
    let c = interp.counters;
    let status = match interp.status {
        Status::Complete => "complete",
        Status::Fragments => "fragments",
    };
    let per_word: Vec<String> = per_word.iter().map(ToString::to_string).collect();
    let row = format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        sentence,
        tokens.len(),
        status,
        c.recoveries,
        c.retained_peak,
        c.node_constructions,
        c.attachments,
        c.detachments,
        per_word.join(",")
    );
    Ok((row, interp.status))
}

fn cmd_corpus(opts: &Opts, path: &PathBuf, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let kb = load_kb(opts.kb.as_ref())?;
    let config = opts.config();
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let sentences = corpus_sentences(&text);
    let rows: Vec<_> = sentences
        .par_iter()
        .map(|s| corpus_row(&kb, &config, s))
        .collect();
    writeln!(out, "{CORPUS_HEADER}").map_err(io)?;
    let mut code = 0;
    for (sentence, row) in sentences.iter().zip(rows) {
        match row {
            Ok((line, status)) => {
                writeln!(out, "{line}").map_err(io)?;
                if status == Status::Fragments && code == 0 {
                    code = 2;
                }
            }
            Err(message) => {
                writeln!(out, "{sentence}\t-\terror\t-\t-\t-\t-\t-\t-").map_err(io)?;
                writeln!(err, "error: {sentence}: {message}").map_err(io)?;
                code = 1;
            }
        }
    }
    Ok(code)
}

fn render_oracle_parse(index: usize, parse: &OracleParse) -> String {
    let mut s = format!(
        "parse {} clean={}\n{}\n",
        index + 1,
        oracle::semantically_clean(parse),
        parse.shape()
    );
    for b in &parse.bindings {
        s += &format!(
            "  {} {}@{} {}@{} {}\n",
            b.role, b.head.1, b.head.0, b.filler.1, b.filler.0, b.result
        );
    }
    s
}

fn cmd_oracle(opts: &Opts, sentence: &str, out: &mut dyn Write) -> Result<i32, String> {
    let kb = load_kb(opts.kb.as_ref())?;
    let parses = oracle::enumerate_parses(&tokenize(sentence), &kb, opts.unknown_as_noun).map_err(|e| e.to_string())?;
    writeln!(out, "parses: {}", parses.len()).map_err(io)?;
    for (i, p) in parses.iter().enumerate() {
        out.write_all(render_oracle_parse(i, p).as_bytes()).map_err(io)?;
    }
    Ok(if parses.is_empty() { 2 } else { 0 })
}

fn cmd_check_kb(dir: Option<&PathBuf>, out: &mut dyn Write) -> Result<i32, String> {
    let kb = load_kb(dir)?;
    writeln!(
        out,
        "ok: {} words, {} categories, {} concepts",
        kb.word_count(),
        kb.categories().len(),
        kb.concepts().len()
    )
    .map_err(io)?;
    Ok(0)
}
