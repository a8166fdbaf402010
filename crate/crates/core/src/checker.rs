//! Explicit-state checking of `AG p` and `GF p`.
//!
//! `AG p` is decided by breadth-first search and yields a shortest path to a
//! `¬p` state. `GF p` fails iff some reachable cycle avoids `p` entirely;
//! the counterexample is a lasso whose loop lies in a strongly connected
//! component of the `¬p` subgraph. Both searches visit states in index
//! order, so results are deterministic.

use std::collections::VecDeque;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{KripkeModel, ModelError, StateId};
use crate::predicate::Property;

/// A finite path, or a lasso `prefix · loop^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Counterexample {
    Finite {
        path: Vec<StateId>,
    },
    Lasso {
        prefix: Vec<StateId>,
        #[serde(rename = "loop")]
        cycle: Vec<StateId>,
    },
}

impl Counterexample {
    pub fn finite<S: Into<StateId>>(path: impl IntoIterator<Item = S>) -> Self {
        Counterexample::Finite {
            path: path.into_iter().map(Into::into).collect(),
        }
    }

    pub fn lasso<S: Into<StateId>, T: Into<StateId>>(
        prefix: impl IntoIterator<Item = S>,
        cycle: impl IntoIterator<Item = T>,
    ) -> Self {
        Counterexample::Lasso {
            prefix: prefix.into_iter().map(Into::into).collect(),
            cycle: cycle.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_lasso(&self) -> bool {
        matches!(self, Counterexample::Lasso { .. })
    }

    /// Every state mentioned, prefix first.
    pub fn states(&self) -> impl Iterator<Item = &StateId> {
        let (a, b): (&[StateId], &[StateId]) = match self {
            Counterexample::Finite { path } => (path, &[]),
            Counterexample::Lasso { prefix, cycle } => (prefix, cycle),
        };
        a.iter().chain(b)
    }

    /// Consecutive pairs that must be transitions, including the junction
    /// from prefix to loop and the loop's closing edge.
    pub fn steps(&self) -> Vec<(&StateId, &StateId)> {
        let mut seq: Vec<&StateId> = self.states().collect();
        if let Counterexample::Lasso { cycle, .. } = self {
            if let Some(head) = cycle.first() {
                seq.push(head);
            }
        }
        seq.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Checks the path against `model`: known states, existing transitions,
    /// an initial first state, and a non-empty loop.
    pub fn validate(&self, model: &KripkeModel) -> Result<(), PathError> {
        match self {
            Counterexample::Finite { path } if path.is_empty() => return Err(PathError::Empty),
            Counterexample::Lasso { cycle, .. } if cycle.is_empty() => return Err(PathError::EmptyLoop),
            _ => {}
        }
        for id in self.states() {
            model
                .index_of(id.as_str())
                .ok_or_else(|| PathError::UnknownState(id.clone()))?;
        }
        let first = self.states().next().expect("non-empty path");
        if !model.is_initial(model.index_of(first.as_str()).expect("checked above")) {
            return Err(PathError::NotInitial(first.clone()));
        }
        for (a, b) in self.steps() {
            let (x, y) = (model.index_of(a.as_str()).unwrap(), model.index_of(b.as_str()).unwrap());
            if !model.has_edge(x, y) {
                return Err(PathError::MissingTransition {
                    from: a.clone(),
                    to: b.clone(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("empty path")]
    Empty,
    #[error("lasso with an empty loop")]
    EmptyLoop,
    #[error("unknown state {0}")]
    UnknownState(StateId),
    #[error("path starts at non-initial state {0}")]
    NotInitial(StateId),
    #[error("no transition {from} -> {to}")]
    MissingTransition { from: StateId, to: StateId },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckOutcome {
    Holds,
    Violated(Counterexample),
}

impl CheckOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, CheckOutcome::Holds)
    }
}

/// Breadth-first search from `sources` through states accepted by `allowed`.
/// Returns states in visiting order and BFS parents.
pub(crate) fn bfs(model: &KripkeModel, sources: &[usize], allowed: impl Fn(usize) -> bool) -> (Vec<usize>, Vec<Option<usize>>) {
    let mut parent = vec![None; model.len()];
    let mut seen = vec![false; model.len()];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    for &s in sources {
        if allowed(s) && !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &v in model.succ(u) {
            if !seen[v] && allowed(v) {
                seen[v] = true;
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    (order, parent)
}

pub(crate) fn trace_back(parent: &[Option<usize>], target: usize) -> Vec<usize> {
    let mut path = vec![target];
    let mut cur = target;
    while let Some(p) = parent[cur] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    path
}

fn ids(model: &KripkeModel, path: &[usize]) -> Vec<StateId> {
    path.iter().map(|&i| model.state(i).id.clone()).collect()
}

/// Model checks `property` on `model`.
pub fn check(model: &KripkeModel, property: &Property) -> Result<CheckOutcome, ModelError> {
    let p = property.predicate().compile(model)?;
    let sat: Vec<bool> = (0..model.len()).map(|i| p.holds_at(model, i)).collect();
    Ok(match property {
        Property::Globally(_) => check_globally(model, &sat),
        Property::InfinitelyOften(_) => check_infinitely_often(model, &sat),
    })
}

fn check_globally(model: &KripkeModel, sat: &[bool]) -> CheckOutcome {
    let (order, parent) = bfs(model, model.initial_indices(), |_| true);
    // BFS dequeues in non-decreasing depth, so the first bad state is a nearest one.
    match order.into_iter().find(|&s| !sat[s]) {
        Some(bad) => CheckOutcome::Violated(Counterexample::Finite {
            path: ids(model, &trace_back(&parent, bad)),
        }),
        None => CheckOutcome::Holds,
    }
}

fn check_infinitely_often(model: &KripkeModel, sat: &[bool]) -> CheckOutcome {
    let (order, parent) = bfs(model, model.initial_indices(), |_| true);
    let mut reachable = vec![false; model.len()];
    for &s in &order {
        reachable[s] = true;
    }
    let avoid = |s: usize| reachable[s] && !sat[s];

    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(model.len(), 0);
    for _ in 0..model.len() {
        g.add_node(());
    }
    for u in (0..model.len()).filter(|&u| avoid(u)) {
        for &v in model.succ(u) {
            if avoid(v) {
                g.add_edge(NodeIndex::new(u), NodeIndex::new(v), ());
            }
        }
    }
    let mut component = vec![usize::MAX; model.len()];
    let mut cyclic = vec![false; model.len()];
    for (c, scc) in tarjan_scc(&g).into_iter().enumerate() {
        let nontrivial = scc.len() > 1 || model.has_edge(scc[0].index(), scc[0].index());
        for n in scc {
            component[n.index()] = c;
            cyclic[n.index()] = nontrivial && avoid(n.index());
        }
    }

    let Some(head) = order.iter().copied().find(|&s| cyclic[s]) else {
        return CheckOutcome::Holds;
    };
    let cycle = shortest_cycle(model, head, |v| component[v] == component[head] && avoid(v));
    let mut prefix = trace_back(&parent, head);
    prefix.pop();
    CheckOutcome::Violated(Counterexample::Lasso {
        prefix: ids(model, &prefix),
        cycle: ids(model, &cycle),
    })
}

/// Shortest cycle through `head` using only states accepted by `allowed`.
/// Returns the cycle starting at `head`, without repeating it at the end.
pub(crate) fn shortest_cycle(model: &KripkeModel, head: usize, allowed: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut parent = vec![None; model.len()];
    let mut seen = vec![false; model.len()];
    let mut queue = VecDeque::from([head]);
    seen[head] = true;
    while let Some(u) = queue.pop_front() {
        for &v in model.succ(u) {
            if v == head {
                return trace_back(&parent, u);
            }
            if !seen[v] && allowed(v) {
                seen[v] = true;
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    panic!("state {head} lies on no cycle");
}

/// Whether the path denoted by `path` satisfies `property`.
///
/// A lasso denotes the infinite path `prefix · loop^ω`. A finite path is
/// judged as a finite prefix: it violates `AG p` if it reaches `¬p`, but can
/// never refute `GF p`.
pub fn holds_on_path(model: &KripkeModel, property: &Property, path: &Counterexample) -> Result<bool, PathError> {
    path.validate(model)?;
    let p = property.predicate().compile(model)?;
    let at = |id: &StateId| p.holds_at(model, model.index_of(id.as_str()).expect("validated"));
    Ok(match (property, path) {
        (Property::Globally(_), _) => path.states().all(at),
        (Property::InfinitelyOften(_), Counterexample::Finite { .. }) => true,
        (Property::InfinitelyOften(_), Counterexample::Lasso { cycle, .. }) => cycle.iter().any(at),
    })
}
