//! Explicit-state CEGAR model checking.
//!
//! Models are Kripke structures over finitely-valued variables. An
//! abstraction hides some variables; abstract counterexamples are checked
//! against the concrete model and, when spurious, eliminated by adding a
//! fresh boolean variable that splits only the failure state. Revealing a
//! minimum set of hidden variables is available as a baseline strategy.
//!
//! ```
//! use std::sync::Arc;
//! use cegar_core::{abstract_mc, fixtures, parse_property, CegarConfig, FinalVerdict, Strategy};
//!
//! let model = Arc::new(fixtures::traffic_light());
//! let property = parse_property("GF state=stop").unwrap();
//! let report = abstract_mc(model, &property, &CegarConfig::new(["color"], Strategy::ExtraVar)).unwrap();
//! assert_eq!(report.final_verdict, FinalVerdict::Holds);
//! assert_eq!(report.total_iterations(), 2);
//! ```

pub mod abstraction;
pub mod bench;
pub mod cegar;
pub mod checker;
pub mod dot;
pub mod fixtures;
pub mod model;
pub mod parse;
pub mod predicate;
pub mod random;
pub mod refinement;
pub mod report;
pub mod spurious;

pub use abstraction::{AbstractModel, AbstractState, Abstraction, AbstractionError};
pub use bench::{load_cases, run_benchmark, to_csv, BenchCase, BenchError, BenchRow};
pub use cegar::{abstract_mc, abstract_mc_with, CegarConfig, CegarError, CegarReport, FinalVerdict, Strategy};
pub use checker::{check, holds_on_path, CheckOutcome, Counterexample, PathError};
pub use dot::{export_dot, DotError};
pub use model::{KripkeModel, ModelError, State, StateId, Value, VariableDecl};
pub use parse::{parse_model, parse_predicate, parse_property, ParseError};
pub use predicate::{Predicate, Property};
pub use refinement::{minimal_separating_set, refine_extra_var, refine_smallest, refine_visible, MergeSide, RefineError};
pub use report::{write_report, ReportDocument};
pub use spurious::{check_spurious, concretize, in_sets, out_set, unroll, FailureAnalysis, SpuriousVerdict};
