//! JSON run reports.

use serde::{Deserialize, Serialize};

use crate::cegar::{CegarReport, FinalVerdict, IterationVerdict, RefinementAction, Strategy};
use crate::checker::Counterexample;
use crate::model::StateId;

/// The document written by [`write_report`]. It also deserializes, so
/// consumers can check reports against this schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub property: String,
    pub strategy: Strategy,
    pub hidden: Vec<String>,
    /// `holds`, `violated` or `cap-exceeded`.
    pub final_verdict: String,
    pub total_iterations: usize,
    /// Concrete counterexample when the verdict is `violated`.
    pub witness: Option<Counterexample>,
    pub iterations: Vec<IterationEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationEntry {
    pub iteration: usize,
    pub abstract_states: usize,
    pub abstract_transitions: usize,
    pub verdict: IterationVerdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<FailureEntry>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub refinement: Option<RefinementAction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureEntry {
    pub position: usize,
    pub state: StateId,
    pub dead: usize,
    pub bad: usize,
    pub isolated: usize,
    pub dead_states: Vec<StateId>,
    pub bad_states: Vec<StateId>,
    pub isolated_states: Vec<StateId>,
}

impl From<&CegarReport> for ReportDocument {
    fn from(r: &CegarReport) -> Self {
        ReportDocument {
            property: r.property.to_string(),
            strategy: r.strategy,
            hidden: r.hidden.clone(),
            final_verdict: r.final_verdict.name().to_owned(),
            total_iterations: r.total_iterations(),
            witness: match &r.final_verdict {
                FinalVerdict::Violated(w) => Some(w.clone()),
                _ => None,
            },
            iterations: r
                .iterations
                .iter()
                .map(|it| IterationEntry {
                    iteration: it.iteration,
                    abstract_states: it.abstract_states,
                    abstract_transitions: it.abstract_transitions,
                    verdict: it.verdict,
                    counterexample: it.counterexample.clone(),
                    failure: it.failure.as_ref().map(|f| FailureEntry {
                        position: f.position,
                        state: f.failure_state.id.clone(),
                        dead: f.dead.len(),
                        bad: f.bad.len(),
                        isolated: f.isolated.len(),
                        dead_states: f.dead.iter().cloned().collect(),
                        bad_states: f.bad.iter().cloned().collect(),
                        isolated_states: f.isolated.iter().cloned().collect(),
                    }),
                    refinement: it.refinement.clone(),
                })
                .collect(),
        }
    }
}

/// Pretty-printed JSON for `report`.
pub fn write_report(report: &CegarReport) -> String {
    let mut text = serde_json::to_string_pretty(&ReportDocument::from(report)).expect("report serializes");
    text.push('\n');
    text
}
