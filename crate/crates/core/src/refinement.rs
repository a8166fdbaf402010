//! Refinement operators.
//!
//! The extra-variable refinement adds one synthetic boolean that tells dead
//! states (0) from bad states (1) and is ⊥ everywhere else, so only the
//! failure state is split. The smallest variant folds the isolated states
//! into one side. The visible-variable refinement is the classical
//! alternative: reveal a set of hidden base variables that separates every
//! dead state from every bad one.

use std::collections::BTreeSet;

use itertools::Itertools;
use thiserror::Error;

use crate::abstraction::{Abstraction, AbstractionError};
use crate::model::{KripkeModel, StateId, Value};
use crate::spurious::FailureAnalysis;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefineError {
    #[error("variable name {0} is already in use")]
    NameCollision(String),
    #[error("failure analysis mentions unknown state {0}")]
    UnknownState(StateId),
    #[error("failure analysis has an empty dead or bad set")]
    EmptyFailure,
    #[error("variable {0} is not an invisible base variable")]
    NotInvisible(String),
}

impl From<AbstractionError> for RefineError {
    fn from(e: AbstractionError) -> Self {
        match e {
            AbstractionError::DuplicateName(n) => RefineError::NameCollision(n),
            other => unreachable!("refinement cannot cause {other}"),
        }
    }
}

/// Which side the isolated states join in [`refine_smallest`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MergeSide {
    ToDead,
    ToBad,
}

fn indices(base: &KripkeModel, ids: &BTreeSet<StateId>) -> Result<Vec<usize>, RefineError> {
    ids.iter()
        .map(|id| base.index_of(id.as_str()).ok_or_else(|| RefineError::UnknownState(id.clone())))
        .collect()
}

fn add_split(
    a: &Abstraction,
    name: &str,
    zero: &[&BTreeSet<StateId>],
    one: &[&BTreeSet<StateId>],
) -> Result<Abstraction, RefineError> {
    if a.has_name(name) {
        return Err(RefineError::NameCollision(name.to_owned()));
    }
    let base = a.base();
    let mut values = vec![Value::Undefined; base.len()];
    for (set, v) in zero.iter().map(|s| (s, 0)).chain(one.iter().map(|s| (s, 1))) {
        for i in indices(base, set)? {
            values[i] = Value::Defined(v);
        }
    }
    Ok(a.with_synthetic(name, values)?)
}

fn require_nonempty(f: &FailureAnalysis) -> Result<(), RefineError> {
    if f.dead.is_empty() || f.bad.is_empty() {
        Err(RefineError::EmptyFailure)
    } else {
        Ok(())
    }
}

/// Adds a visible synthetic variable `name`: 0 on dead states, 1 on bad
/// states, ⊥ elsewhere.
pub fn refine_extra_var(a: &Abstraction, f: &FailureAnalysis, name: &str) -> Result<Abstraction, RefineError> {
    require_nonempty(f)?;
    add_split(a, name, &[&f.dead], &[&f.bad])
}

/// Like [`refine_extra_var`], but the isolated states take the value of the
/// chosen side, so the failure state splits in exactly two.
pub fn refine_smallest(a: &Abstraction, f: &FailureAnalysis, side: MergeSide, name: &str) -> Result<Abstraction, RefineError> {
    require_nonempty(f)?;
    match side {
        MergeSide::ToDead => add_split(a, name, &[&f.dead, &f.isolated], &[&f.bad]),
        MergeSide::ToBad => add_split(a, name, &[&f.dead], &[&f.bad, &f.isolated]),
    }
}

/// A smallest set of `candidates` on which every dead state differs from
/// every bad state, or `None` if even all candidates together do not
/// separate them. Among sets of equal size the lexicographically first (by
/// sorted variable name) wins.
pub fn minimal_separating_set<S: AsRef<str>>(
    base: &KripkeModel,
    dead: &BTreeSet<StateId>,
    bad: &BTreeSet<StateId>,
    candidates: &[S],
) -> Result<Option<BTreeSet<String>>, RefineError> {
    let names: Vec<&str> = candidates.iter().map(AsRef::as_ref).sorted().dedup().collect();
    let columns: Vec<usize> = names
        .iter()
        .map(|n| base.variable_index(n).ok_or_else(|| RefineError::NotInvisible((*n).to_owned())))
        .try_collect()?;
    let (dead, bad) = (indices(base, dead)?, indices(base, bad)?);

    // For each dead/bad pair, the candidate positions on which they differ.
    let mut pairs: Vec<Vec<bool>> = dead
        .iter()
        .cartesian_product(&bad)
        .map(|(&d, &b)| {
            let (x, y) = (&base.state(d).assignment, &base.state(b).assignment);
            columns.iter().map(|&c| x[c] != y[c]).collect()
        })
        .collect();
    pairs.sort();
    pairs.dedup();
    if pairs.iter().any(|p| !p.contains(&true)) {
        return Ok(None);
    }
    for size in 0..=names.len() {
        if let Some(set) = (0..names.len())
            .combinations(size)
            .find(|set| pairs.iter().all(|p| set.iter().any(|&v| p[v])))
        {
            return Ok(Some(set.into_iter().map(|v| names[v].to_owned()).collect()));
        }
    }
    unreachable!("the full candidate set separates every pair")
}

/// Makes the hidden base variables `u` visible.
pub fn refine_visible<S: AsRef<str>>(a: &Abstraction, u: &[S]) -> Result<Abstraction, RefineError> {
    let hidden = a.invisible();
    if let Some(v) = u.iter().find(|v| !hidden.contains(&v.as_ref())) {
        return Err(RefineError::NotInvisible(v.as_ref().to_owned()));
    }
    Ok(a.with_visible(u))
}
