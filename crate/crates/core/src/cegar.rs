//! The abstract, check, analyze, refine loop.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{AbstractModel, Abstraction, AbstractionError};
use crate::checker::{check, CheckOutcome, Counterexample};
use crate::model::{KripkeModel, ModelError};
use crate::predicate::Property;
use crate::refinement::{minimal_separating_set, refine_extra_var, refine_smallest, refine_visible, MergeSide, RefineError};
use crate::spurious::{check_spurious, concretize, FailureAnalysis, SpuriousError, SpuriousVerdict};

/// How a spurious counterexample is eliminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Fresh variable: 0 on dead, 1 on bad, ⊥ elsewhere.
    ExtraVar,
    /// Fresh variable with the isolated states joining the dead side.
    #[serde(rename = "smallest-dead")]
    SmallestToDead,
    /// Fresh variable with the isolated states joining the bad side.
    #[serde(rename = "smallest-bad")]
    SmallestToBad,
    /// Reveal a minimum set of hidden variables separating dead from bad.
    VisibleMinimal,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::ExtraVar,
        Strategy::SmallestToDead,
        Strategy::SmallestToBad,
        Strategy::VisibleMinimal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::ExtraVar => "extra-var",
            Strategy::SmallestToDead => "smallest-dead",
            Strategy::SmallestToBad => "smallest-bad",
            Strategy::VisibleMinimal => "visible-minimal",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown strategy '{0}' (expected extra-var, smallest-dead, smallest-bad or visible-minimal)")]
pub struct UnknownStrategy(pub String);

impl FromStr for Strategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownStrategy(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CegarConfig {
    /// Base variables hidden in the first abstraction.
    pub hidden: Vec<String>,
    pub strategy: Strategy,
    /// Maximum number of model-checking rounds; `None` means `2·|S|`.
    pub iteration_cap: Option<usize>,
}

impl CegarConfig {
    pub fn new<S: Into<String>>(hidden: impl IntoIterator<Item = S>, strategy: Strategy) -> Self {
        CegarConfig {
            hidden: hidden.into_iter().map(Into::into).collect(),
            strategy,
            iteration_cap: None,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.iteration_cap = Some(cap);
        self
    }

    fn cap_for(&self, model: &KripkeModel) -> usize {
        self.iteration_cap.unwrap_or(2 * model.len()).max(1)
    }
}

/// Outcome of model checking one abstraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IterationVerdict {
    Holds,
    Real,
    Spurious,
}

/// What a refinement step changed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementAction {
    /// The strategy actually applied; differs from the configured one when
    /// visible-minimal finds no separating set and falls back to extra-var.
    pub strategy: Strategy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub added_variable: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub revealed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub abstract_states: usize,
    pub abstract_transitions: usize,
    pub verdict: IterationVerdict,
    pub counterexample: Option<Counterexample>,
    pub failure: Option<FailureAnalysis>,
    pub refinement: Option<RefinementAction>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FinalVerdict {
    Holds,
    /// A concrete counterexample, validated against the base model.
    Violated(Counterexample),
    CapExceeded,
}

impl FinalVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            FinalVerdict::Holds => "holds",
            FinalVerdict::Violated(_) => "violated",
            FinalVerdict::CapExceeded => "cap-exceeded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CegarReport {
    pub property: Property,
    pub strategy: Strategy,
    pub hidden: Vec<String>,
    pub iterations: Vec<IterationRecord>,
    pub final_verdict: FinalVerdict,
}

impl CegarReport {
    pub fn total_iterations(&self) -> usize {
        self.iterations.len()
    }

    pub fn max_abstract_states(&self) -> usize {
        self.iterations.iter().map(|r| r.abstract_states).max().unwrap_or(0)
    }

    pub fn final_abstract_states(&self) -> usize {
        self.iterations.last().map_or(0, |r| r.abstract_states)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CegarError {
    #[error("invalid model: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidModel(Vec<crate::model::Violation>),
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spurious(#[from] SpuriousError),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error("counterexample judged real but no concrete realization was found")]
    Inconsistent,
}

/// Everything known about one round, handed to the observer of
/// [`abstract_mc_with`] before the loop moves on.
#[derive(Debug)]
pub struct Round<'a> {
    pub iteration: usize,
    pub abstraction: &'a Abstraction,
    pub abstract_model: &'a AbstractModel,
    pub counterexample: Option<&'a Counterexample>,
    pub failure: Option<&'a FailureAnalysis>,
    /// The abstraction for the next round, if this one refined.
    pub refined: Option<&'a Abstraction>,
}

/// Runs the CEGAR loop of `property` on `model`.
pub fn abstract_mc(model: Arc<KripkeModel>, property: &Property, config: &CegarConfig) -> Result<CegarReport, CegarError> {
    abstract_mc_with(model, property, config, |_| {})
}

/// A fresh synthetic name for round `i`: `B{i}`, prefixed with underscores
/// until it clashes with nothing.
fn fresh_name(a: &Abstraction, i: usize) -> String {
    let mut name = format!("B{i}");
    while a.has_name(&name) {
        name.insert(0, '_');
    }
    name
}

/// [`abstract_mc`] with a callback invoked once per round.
pub fn abstract_mc_with(
    model: Arc<KripkeModel>,
    property: &Property,
    config: &CegarConfig,
    mut observe: impl FnMut(&Round<'_>),
) -> Result<CegarReport, CegarError> {
    model.validate().map_err(CegarError::InvalidModel)?;
    let cap = config.cap_for(&model);
    let mut abstraction = Abstraction::hiding(model, &config.hidden)?;
    abstraction.check_property(property)?;
    let mut report = CegarReport {
        property: property.clone(),
        strategy: config.strategy,
        hidden: config.hidden.clone(),
        iterations: Vec::new(),
        final_verdict: FinalVerdict::CapExceeded,
    };

    for iteration in 1..=cap {
        let am = abstraction.build();
        let mut record = IterationRecord {
            iteration,
            abstract_states: am.state_count(),
            abstract_transitions: am.transition_count(),
            verdict: IterationVerdict::Holds,
            counterexample: None,
            failure: None,
            refinement: None,
        };
        let cex = match check(am.model(), property)? {
            CheckOutcome::Holds => {
                observe(&Round {
                    iteration,
                    abstraction: &abstraction,
                    abstract_model: &am,
                    counterexample: None,
                    failure: None,
                    refined: None,
                });
                report.iterations.push(record);
                report.final_verdict = FinalVerdict::Holds;
                return Ok(report);
            }
            CheckOutcome::Violated(cex) => cex,
        };
        match check_spurious(&am, &cex)? {
            SpuriousVerdict::Real => {
                let witness = concretize(&am, &cex)?.ok_or(CegarError::Inconsistent)?;
                observe(&Round {
                    iteration,
                    abstraction: &abstraction,
                    abstract_model: &am,
                    counterexample: Some(&cex),
                    failure: None,
                    refined: None,
                });
                record.verdict = IterationVerdict::Real;
                record.counterexample = Some(cex);
                report.iterations.push(record);
                report.final_verdict = FinalVerdict::Violated(witness);
                return Ok(report);
            }
            SpuriousVerdict::Spurious(failure) => {
                let (next, action) = refine(&abstraction, &failure, config.strategy, iteration)?;
                observe(&Round {
                    iteration,
                    abstraction: &abstraction,
                    abstract_model: &am,
                    counterexample: Some(&cex),
                    failure: Some(&failure),
                    refined: Some(&next),
                });
                record.verdict = IterationVerdict::Spurious;
                record.counterexample = Some(cex);
                record.failure = Some(failure);
                record.refinement = Some(action);
                report.iterations.push(record);
                abstraction = next;
            }
        }
    }
    Ok(report)
}

fn refine(
    a: &Abstraction,
    f: &FailureAnalysis,
    strategy: Strategy,
    iteration: usize,
) -> Result<(Abstraction, RefinementAction), CegarError> {
    let fresh = |a: &Abstraction, applied: Strategy| {
        let name = fresh_name(a, iteration);
        RefinementAction {
            strategy: applied,
            added_variable: Some(name),
            revealed: Vec::new(),
        }
    };
    Ok(match strategy {
        Strategy::ExtraVar | Strategy::SmallestToDead | Strategy::SmallestToBad => {
            let action = fresh(a, strategy);
            let name = action.added_variable.as_deref().expect("fresh name");
            let next = match strategy {
                Strategy::ExtraVar => refine_extra_var(a, f, name)?,
                Strategy::SmallestToDead => refine_smallest(a, f, MergeSide::ToDead, name)?,
                _ => refine_smallest(a, f, MergeSide::ToBad, name)?,
            };
            (next, action)
        }
        Strategy::VisibleMinimal => match minimal_separating_set(a.base(), &f.dead, &f.bad, &a.invisible())? {
            Some(u) => {
                let revealed: Vec<String> = u.into_iter().collect();
                let next = refine_visible(a, &revealed)?;
                (
                    next,
                    RefinementAction {
                        strategy,
                        added_variable: None,
                        revealed,
                    },
                )
            }
            None => {
                let action = fresh(a, Strategy::ExtraVar);
                let next = refine_extra_var(a, f, action.added_variable.as_deref().expect("fresh name"))?;
                (next, action)
            }
        },
    })
}
