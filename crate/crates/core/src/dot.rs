//! Graphviz rendering of models and counterexamples.

use std::collections::BTreeSet;
use std::fmt::Write;

use thiserror::Error;

use crate::checker::Counterexample;
use crate::model::{KripkeModel, StateId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DotError {
    #[error("highlighted path mentions unknown state {0}")]
    UnknownState(StateId),
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders `model` as a DOT digraph. Initial states get a double border;
/// edges of `highlight`, including a lasso's closing edge, are drawn red.
pub fn export_dot(model: &KripkeModel, highlight: Option<&Counterexample>) -> Result<String, DotError> {
    let mut marked: BTreeSet<(&str, &str)> = BTreeSet::new();
    let mut on_path: BTreeSet<&str> = BTreeSet::new();
    if let Some(cex) = highlight {
        if let Some(id) = cex.states().find(|id| model.index_of(id.as_str()).is_none()) {
            return Err(DotError::UnknownState(id.clone()));
        }
        on_path.extend(cex.states().map(StateId::as_str));
        marked.extend(cex.steps().into_iter().map(|(a, b)| (a.as_str(), b.as_str())));
    }

    let mut out = String::from("digraph kripke {\n  node [shape=box, fontname=\"monospace\"];\n");
    for (i, s) in model.states().iter().enumerate() {
        let label = format!("{}\n{}", s.id, model.render_assignment(i));
        let _ = write!(out, "  {} [label={}", quote(s.id.as_str()), quote(&label));
        if model.is_initial(i) {
            out.push_str(", peripheries=2");
        }
        if on_path.contains(s.id.as_str()) {
            out.push_str(", color=red");
        }
        out.push_str("];\n");
    }
    for (a, b) in model.transitions() {
        let _ = write!(out, "  {} -> {}", quote(a.as_str()), quote(b.as_str()));
        if marked.contains(&(a.as_str(), b.as_str())) {
            out.push_str(" [color=red, penwidth=2]");
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
    Ok(out)
}
