//! Kripke structures over finitely-valued variables.
//!
//! A [`KripkeModel`] is an immutable value. Construction never fails; call
//! [`KripkeModel::validate`] to get the list of structural violations. Graph
//! algorithms elsewhere in the crate work on dense state indices, which follow
//! the id-sorted order of [`KripkeModel::states`].

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a concrete or abstract state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(String);

impl StateId {
    pub fn new(id: impl Into<String>) -> Self {
        StateId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for StateId {
    fn from(s: &str) -> Self {
        StateId(s.to_owned())
    }
}

impl From<String> for StateId {
    fn from(s: String) -> Self {
        StateId(s)
    }
}

impl Borrow<str> for StateId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// The value of a variable in a state: an index into the variable's domain,
/// or undefined (⊥). Undefined orders after every defined value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Defined(usize),
    Undefined,
}

/// Textual spelling of ⊥ in every format this crate reads or writes.
pub const UNDEFINED_TOKEN: &str = "_";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: String,
    pub domain: Vec<String>,
}

impl VariableDecl {
    pub fn new<S: Into<String>>(name: impl Into<String>, domain: impl IntoIterator<Item = S>) -> Self {
        VariableDecl {
            name: name.into(),
            domain: domain.into_iter().map(Into::into).collect(),
        }
    }

    /// Parses a value spelling, accepting `_` for ⊥.
    pub fn value_of(&self, text: &str) -> Option<Value> {
        if text == UNDEFINED_TOKEN {
            return Some(Value::Undefined);
        }
        self.domain.iter().position(|d| d == text).map(Value::Defined)
    }

    pub fn render(&self, value: Value) -> &str {
        match value {
            Value::Defined(i) => self.domain.get(i).map(String::as_str).unwrap_or("?"),
            Value::Undefined => UNDEFINED_TOKEN,
        }
    }

    pub fn admits(&self, value: Value) -> bool {
        match value {
            Value::Defined(i) => i < self.domain.len(),
            Value::Undefined => true,
        }
    }
}

/// A concrete state. `assignment[k]` is the value of the k-th declared variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub id: StateId,
    pub assignment: Vec<Value>,
}

impl State {
    pub fn new(id: impl Into<StateId>, assignment: Vec<Value>) -> Self {
        State {
            id: id.into(),
            assignment,
        }
    }
}

/// A structural problem found by [`KripkeModel::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyVariableName,
    DuplicateVariable(String),
    EmptyDomain(String),
    DuplicateDomainValue { variable: String, value: String },
    ReservedDomainValue { variable: String },
    DuplicateState(StateId),
    AssignmentArity { state: StateId, expected: usize, found: usize },
    ValueOutOfDomain { state: StateId, variable: String },
    UnknownInitialState(StateId),
    UnknownTransitionEndpoint { from: StateId, to: StateId, missing: StateId },
    UnknownLabelledState(StateId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyVariableName => write!(f, "variable with empty name"),
            Violation::DuplicateVariable(v) => write!(f, "duplicate variable {v}"),
            Violation::EmptyDomain(v) => write!(f, "variable {v} has an empty domain"),
            Violation::DuplicateDomainValue { variable, value } => {
                write!(f, "value {value} listed twice in domain of {variable}")
            }
            Violation::ReservedDomainValue { variable } => {
                write!(f, "domain of {variable} uses the reserved value {UNDEFINED_TOKEN}")
            }
            Violation::DuplicateState(id) => write!(f, "duplicate state {id}"),
            Violation::AssignmentArity {
                state,
                expected,
                found,
            } => write!(f, "state {state} assigns {found} variables, expected {expected}"),
            Violation::ValueOutOfDomain { state, variable } => {
                write!(f, "state {state} assigns a value outside the domain of {variable}")
            }
            Violation::UnknownInitialState(id) => write!(f, "unknown state {id} in initial set"),
            Violation::UnknownTransitionEndpoint { from, to, missing } => {
                write!(f, "unknown state {missing} in transition {from} -> {to}")
            }
            Violation::UnknownLabelledState(id) => write!(f, "unknown state {id} in labels"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("value {value} not in domain of {variable}")]
    ValueNotInDomain { variable: String, value: String },
    #[error("unknown proposition {0}")]
    UnknownProposition(String),
}

static NO_LABELS: BTreeSet<String> = BTreeSet::new();

/// A Kripke structure `(S, S0, R, L)` whose states are valuations of the
/// declared variables.
///
/// Two states may carry identical assignments; they are told apart by id.
#[derive(Debug, Clone)]
pub struct KripkeModel {
    variables: Vec<VariableDecl>,
    states: Vec<State>,
    initial: BTreeSet<StateId>,
    transitions: BTreeSet<(StateId, StateId)>,
    labels: BTreeMap<StateId, BTreeSet<String>>,
    index: HashMap<StateId, usize>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    initial_idx: Vec<usize>,
}

impl PartialEq for KripkeModel {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables
            && self.states == other.states
            && self.initial == other.initial
            && self.transitions == other.transitions
            && self.labels == other.labels
    }
}

impl Eq for KripkeModel {}

impl KripkeModel {
    /// Builds a model. States are stored sorted by id; references to unknown
    /// ids are kept and reported by [`validate`](Self::validate) but take no
    /// part in graph queries.
    pub fn new(
        variables: Vec<VariableDecl>,
        mut states: Vec<State>,
        initial: BTreeSet<StateId>,
        transitions: BTreeSet<(StateId, StateId)>,
        labels: BTreeMap<StateId, BTreeSet<String>>,
    ) -> Self {
        states.sort_by(|a, b| a.id.cmp(&b.id));
        let mut index = HashMap::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            index.entry(s.id.clone()).or_insert(i);
        }
        let mut succ = vec![Vec::new(); states.len()];
        let mut pred = vec![Vec::new(); states.len()];
        for (from, to) in &transitions {
            if let (Some(&f), Some(&t)) = (index.get(from), index.get(to)) {
                succ[f].push(t);
                pred[t].push(f);
            }
        }
        for list in succ.iter_mut().chain(pred.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        let mut initial_idx: Vec<usize> = initial.iter().filter_map(|id| index.get(id).copied()).collect();
        initial_idx.sort_unstable();
        KripkeModel {
            variables,
            states,
            initial,
            transitions,
            labels,
            index,
            succ,
            pred,
            initial_idx,
        }
    }

    /// Reports every violated structural invariant, or `Ok` if there are none.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let mut names = BTreeSet::new();
        for v in &self.variables {
            if v.name.is_empty() {
                out.push(Violation::EmptyVariableName);
            } else if !names.insert(v.name.as_str()) {
                out.push(Violation::DuplicateVariable(v.name.clone()));
            }
            if v.domain.is_empty() {
                out.push(Violation::EmptyDomain(v.name.clone()));
            }
            let mut seen = BTreeSet::new();
            for value in &v.domain {
                if value == UNDEFINED_TOKEN {
                    out.push(Violation::ReservedDomainValue {
                        variable: v.name.clone(),
                    });
                } else if !seen.insert(value.as_str()) {
                    out.push(Violation::DuplicateDomainValue {
                        variable: v.name.clone(),
                        value: value.clone(),
                    });
                }
            }
        }
        let mut ids = BTreeSet::new();
        for s in &self.states {
            if !ids.insert(&s.id) {
                out.push(Violation::DuplicateState(s.id.clone()));
            }
            if s.assignment.len() != self.variables.len() {
                out.push(Violation::AssignmentArity {
                    state: s.id.clone(),
                    expected: self.variables.len(),
                    found: s.assignment.len(),
                });
                continue;
            }
            for (decl, &value) in self.variables.iter().zip(&s.assignment) {
                if !decl.admits(value) {
                    out.push(Violation::ValueOutOfDomain {
                        state: s.id.clone(),
                        variable: decl.name.clone(),
                    });
                }
            }
        }
        for id in &self.initial {
            if !self.index.contains_key(id) {
                out.push(Violation::UnknownInitialState(id.clone()));
            }
        }
        for (from, to) in &self.transitions {
            for end in [from, to] {
                if !self.index.contains_key(end) {
                    out.push(Violation::UnknownTransitionEndpoint {
                        from: from.clone(),
                        to: to.clone(),
                        missing: end.clone(),
                    });
                }
            }
        }
        for id in self.labels.keys() {
            if !self.index.contains_key(id) {
                out.push(Violation::UnknownLabelledState(id.clone()));
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    pub fn variables(&self) -> &[VariableDecl] {
        &self.variables
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// States in id order; position in this slice is the state's index.
    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, index: usize) -> &State {
        &self.states[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require_index(&self, id: &str) -> Result<usize, ModelError> {
        self.index_of(id).ok_or_else(|| ModelError::UnknownState(id.to_owned()))
    }

    pub fn initial(&self) -> &BTreeSet<StateId> {
        &self.initial
    }

    pub fn transitions(&self) -> &BTreeSet<(StateId, StateId)> {
        &self.transitions
    }

    pub fn labels(&self) -> &BTreeMap<StateId, BTreeSet<String>> {
        &self.labels
    }

    pub fn labels_of(&self, index: usize) -> &BTreeSet<String> {
        self.labels.get(&self.states[index].id).unwrap_or(&NO_LABELS)
    }

    /// All proposition names used anywhere in the labelling.
    pub fn propositions(&self) -> BTreeSet<&str> {
        self.labels.values().flatten().map(String::as_str).collect()
    }

    /// `{t | (s, t) ∈ R}`.
    pub fn successors(&self, id: &str) -> Result<BTreeSet<&StateId>, ModelError> {
        let i = self.require_index(id)?;
        Ok(self.succ[i].iter().map(|&t| &self.states[t].id).collect())
    }

    /// Successor indices, ascending.
    pub fn succ(&self, index: usize) -> &[usize] {
        &self.succ[index]
    }

    /// Predecessor indices, ascending.
    pub fn pred(&self, index: usize) -> &[usize] {
        &self.pred[index]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.succ[from].binary_search(&to).is_ok()
    }

    /// Initial state indices, ascending.
    pub fn initial_indices(&self) -> &[usize] {
        &self.initial_idx
    }

    pub fn is_initial(&self, index: usize) -> bool {
        self.initial_idx.binary_search(&index).is_ok()
    }

    /// Number of transitions whose endpoints both exist.
    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Renders a state's assignment as `name=value` pairs.
    pub fn render_assignment(&self, index: usize) -> String {
        let s = &self.states[index];
        self.variables
            .iter()
            .zip(&s.assignment)
            .map(|(d, &v)| format!("{}={}", d.name, d.render(v)))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn traffic_light_is_valid() {
        let m = fixtures::traffic_light();
        assert_eq!(m.validate(), Ok(()));
        assert_eq!(m.len(), 3);
        assert_eq!(m.transitions().len(), 3);
        assert_eq!(m.initial().len(), 1);
    }

    #[test]
    fn unknown_transition_target_is_reported() {
        let x = VariableDecl::new("x", ["a"]);
        let m = KripkeModel::new(
            vec![x],
            vec![State::new("s1", vec![Value::Defined(0)])],
            BTreeSet::new(),
            [(StateId::from("s1"), StateId::from("nowhere"))].into_iter().collect(),
            BTreeMap::new(),
        );
        let errs = m.validate().unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].to_string().contains("unknown state nowhere"));
    }

    #[test]
    fn empty_model_is_vacuously_valid() {
        let m = KripkeModel::new(vec![], vec![], BTreeSet::new(), BTreeSet::new(), BTreeMap::new());
        assert_eq!(m.validate(), Ok(()));
        assert!(m.is_empty());
    }

    #[test]
    fn every_violation_is_reported() {
        let x = VariableDecl::new("x", ["a", "a"]);
        let y = VariableDecl::new("x", Vec::<String>::new());
        let m = KripkeModel::new(
            vec![x, y],
            vec![
                State::new("s", vec![Value::Defined(5), Value::Undefined]),
                State::new("s", vec![Value::Defined(0)]),
            ],
            ["t".into()].into_iter().collect(),
            BTreeSet::new(),
            [(StateId::from("u"), BTreeSet::new())].into_iter().collect(),
        );
        let errs = m.validate().unwrap_err();
        assert!(errs.contains(&Violation::DuplicateVariable("x".into())));
        assert!(errs.contains(&Violation::EmptyDomain("x".into())));
        assert!(errs.contains(&Violation::DuplicateDomainValue {
            variable: "x".into(),
            value: "a".into()
        }));
        assert!(errs.contains(&Violation::DuplicateState("s".into())));
        assert!(errs.contains(&Violation::UnknownInitialState("t".into())));
        assert!(errs.contains(&Violation::UnknownLabelledState("u".into())));
        assert!(errs.iter().any(|e| matches!(e, Violation::ValueOutOfDomain { .. })));
        assert!(errs.iter().any(|e| matches!(e, Violation::AssignmentArity { .. })));
    }

    #[test]
    fn successors_follow_the_cycle() {
        let m = fixtures::traffic_light();
        let s: Vec<_> = m.successors("s1").unwrap().into_iter().cloned().collect();
        assert_eq!(s, vec![StateId::from("s2")]);
        assert_eq!(m.successors("nope"), Err(ModelError::UnknownState("nope".into())));
    }

    #[test]
    fn successors_of_sink_and_self_loop() {
        let x = VariableDecl::new("x", ["a"]);
        let a = vec![Value::Defined(0)];
        let m = KripkeModel::new(
            vec![x],
            vec![State::new("sink", a.clone()), State::new("spin", a)],
            BTreeSet::new(),
            [(StateId::from("spin"), StateId::from("spin"))].into_iter().collect(),
            BTreeMap::new(),
        );
        assert!(m.successors("sink").unwrap().is_empty());
        let spin: Vec<_> = m.successors("spin").unwrap().into_iter().collect();
        assert_eq!(spin, vec![&StateId::from("spin")]);
    }

    #[test]
    fn undefined_orders_after_defined() {
        assert!(Value::Defined(usize::MAX) < Value::Undefined);
    }
}
