//! Abstraction by variable hiding, extended with synthetic boolean columns.
//!
//! An [`Abstraction`] fixes which base variables are visible and carries the
//! synthetic variables added by refinement. Each synthetic variable is a
//! valuation over the concrete states taking values in `{0, 1, ⊥}`. The base
//! model itself is never modified.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{KripkeModel, ModelError, State, StateId, Value, VariableDecl, Violation};
use crate::predicate::Property;

/// Domain of every synthetic variable; ⊥ is implicit.
pub const SYNTHETIC_DOMAIN: [&str; 2] = ["0", "1"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbstractionError {
    #[error("invalid base model: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidBase(Vec<Violation>),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("variable name {0} is already in use")]
    DuplicateName(String),
    #[error("synthetic variable {variable} has no value for state {state}")]
    PartialValuation { variable: String, state: StateId },
    #[error("synthetic variable {variable} assigns a non-boolean value to state {state}")]
    NonBooleanValue { variable: String, state: StateId },
    #[error("synthetic variable {variable} values unknown state {state}")]
    UnknownState { variable: String, state: StateId },
    #[error("property refers to invisible variable {0}")]
    InvisibleVariable(String),
    #[error("proposition {proposition} is not uniform over the origins of {state}")]
    NonUniformLabel { proposition: String, state: StateId },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A boolean variable introduced by refinement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticVar {
    name: String,
    // aligned with base.states()
    values: Vec<Value>,
}

impl SyntheticVar {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Value at the concrete state with the given index.
    pub fn value_at(&self, index: usize) -> Value {
        self.values[index]
    }

    /// The valuation keyed by concrete state id.
    pub fn valuation(&self, base: &KripkeModel) -> BTreeMap<StateId, Value> {
        base.states()
            .iter()
            .zip(&self.values)
            .map(|(s, &v)| (s.id.clone(), v))
            .collect()
    }

    fn decl(&self) -> VariableDecl {
        VariableDecl::new(self.name.clone(), SYNTHETIC_DOMAIN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Base(usize),
    Synthetic(usize),
}

/// Visible/invisible split of the base variables plus synthetic variables.
#[derive(Debug, Clone)]
pub struct Abstraction {
    base: Arc<KripkeModel>,
    visible: BTreeSet<String>,
    synthetic: Vec<SyntheticVar>,
    columns: Vec<Column>,
}

/// A state of the abstract model: one value per visible column.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbstractState {
    pub id: StateId,
    pub values: Vec<Value>,
}

impl Abstraction {
    /// General constructor. `synthetic` valuations must be total over the
    /// base states and take values in `{0, 1, ⊥}`.
    pub fn new<S: Into<String>>(
        base: Arc<KripkeModel>,
        visible: impl IntoIterator<Item = S>,
        synthetic: Vec<(String, BTreeMap<StateId, Value>)>,
    ) -> Result<Self, AbstractionError> {
        base.validate().map_err(AbstractionError::InvalidBase)?;
        let mut names: BTreeSet<String> = base.variables().iter().map(|v| v.name.clone()).collect();
        let mut vars = Vec::with_capacity(synthetic.len());
        for (name, map) in synthetic {
            if !names.insert(name.clone()) {
                return Err(AbstractionError::DuplicateName(name));
            }
            if let Some(extra) = map.keys().find(|id| base.index_of(id.as_str()).is_none()) {
                return Err(AbstractionError::UnknownState {
                    variable: name,
                    state: extra.clone(),
                });
            }
            let mut values = Vec::with_capacity(base.len());
            for s in base.states() {
                let v = *map.get(&s.id).ok_or_else(|| AbstractionError::PartialValuation {
                    variable: name.clone(),
                    state: s.id.clone(),
                })?;
                if !matches!(v, Value::Defined(0 | 1) | Value::Undefined) {
                    return Err(AbstractionError::NonBooleanValue {
                        variable: name.clone(),
                        state: s.id.clone(),
                    });
                }
                values.push(v);
            }
            vars.push(SyntheticVar { name, values });
        }
        let visible: BTreeSet<String> = visible.into_iter().map(Into::into).collect();
        if let Some(v) = visible.iter().find(|v| !names.contains(*v)) {
            return Err(AbstractionError::UnknownVariable(v.clone()));
        }
        Ok(Self::assemble(base, visible, vars))
    }

    /// Every base variable visible, nothing synthetic.
    pub fn identity(base: Arc<KripkeModel>) -> Result<Self, AbstractionError> {
        let all: Vec<String> = base.variables().iter().map(|v| v.name.clone()).collect();
        Self::new(base, all, Vec::new())
    }

    /// Hides the named base variables and leaves the rest visible.
    pub fn hiding<S: AsRef<str>>(base: Arc<KripkeModel>, hidden: &[S]) -> Result<Self, AbstractionError> {
        for h in hidden {
            if base.variable_index(h.as_ref()).is_none() {
                return Err(AbstractionError::UnknownVariable(h.as_ref().to_owned()));
            }
        }
        let visible: Vec<String> = base
            .variables()
            .iter()
            .filter(|v| !hidden.iter().any(|h| h.as_ref() == v.name))
            .map(|v| v.name.clone())
            .collect();
        Self::new(base, visible, Vec::new())
    }

    fn assemble(base: Arc<KripkeModel>, visible: BTreeSet<String>, synthetic: Vec<SyntheticVar>) -> Self {
        let mut columns: Vec<Column> = base
            .variables()
            .iter()
            .enumerate()
            .filter(|(_, v)| visible.contains(&v.name))
            .map(|(k, _)| Column::Base(k))
            .collect();
        columns.extend(
            synthetic
                .iter()
                .enumerate()
                .filter(|(_, v)| visible.contains(&v.name))
                .map(|(k, _)| Column::Synthetic(k)),
        );
        Abstraction {
            base,
            visible,
            synthetic,
            columns,
        }
    }

    /// Adds a visible synthetic variable. `values` is aligned with
    /// `base().states()`.
    pub(crate) fn with_synthetic(&self, name: &str, values: Vec<Value>) -> Result<Self, AbstractionError> {
        if self.has_name(name) {
            return Err(AbstractionError::DuplicateName(name.to_owned()));
        }
        debug_assert_eq!(values.len(), self.base.len());
        let mut synthetic = self.synthetic.clone();
        synthetic.push(SyntheticVar {
            name: name.to_owned(),
            values,
        });
        let mut visible = self.visible.clone();
        visible.insert(name.to_owned());
        Ok(Self::assemble(self.base.clone(), visible, synthetic))
    }

    pub(crate) fn with_visible<S: AsRef<str>>(&self, more: &[S]) -> Self {
        let mut visible = self.visible.clone();
        visible.extend(more.iter().map(|s| s.as_ref().to_owned()));
        Self::assemble(self.base.clone(), visible, self.synthetic.clone())
    }

    pub fn base(&self) -> &KripkeModel {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<KripkeModel> {
        &self.base
    }

    pub fn visible(&self) -> &BTreeSet<String> {
        &self.visible
    }

    pub fn is_visible(&self, name: &str) -> bool {
        self.visible.contains(name)
    }

    /// Hidden base variables in declaration order.
    pub fn invisible(&self) -> Vec<&str> {
        self.base
            .variables()
            .iter()
            .filter(|v| !self.visible.contains(&v.name))
            .map(|v| v.name.as_str())
            .collect()
    }

    pub fn synthetic(&self) -> &[SyntheticVar] {
        &self.synthetic
    }

    /// Whether `name` is taken by a base or synthetic variable.
    pub fn has_name(&self, name: &str) -> bool {
        self.base.variable_index(name).is_some() || self.synthetic.iter().any(|v| v.name == name)
    }

    /// Declarations of the visible columns: visible base variables in
    /// declaration order, then visible synthetic variables in creation order.
    pub fn column_decls(&self) -> Vec<VariableDecl> {
        self.columns
            .iter()
            .map(|c| match *c {
                Column::Base(k) => self.base.variables()[k].clone(),
                Column::Synthetic(k) => self.synthetic[k].decl(),
            })
            .collect()
    }

    fn values_at(&self, index: usize) -> Vec<Value> {
        let s = self.base.state(index);
        self.columns
            .iter()
            .map(|c| match *c {
                Column::Base(k) => s.assignment[k],
                Column::Synthetic(k) => self.synthetic[k].values[index],
            })
            .collect()
    }

    fn render_id(&self, values: &[Value]) -> StateId {
        let mut out = String::from("(");
        for (i, (c, &v)) in self.columns.iter().zip(values).enumerate() {
            if i > 0 {
                out.push(',');
            }
            let (name, text) = match *c {
                Column::Base(k) => {
                    let d = &self.base.variables()[k];
                    (d.name.as_str(), d.render(v).to_owned())
                }
                Column::Synthetic(k) => (self.synthetic[k].name.as_str(), render_synthetic(v).to_owned()),
            };
            let _ = write!(out, "{name}={text}");
        }
        out.push(')');
        StateId::new(out)
    }

    pub(crate) fn project_index(&self, index: usize) -> AbstractState {
        let values = self.values_at(index);
        AbstractState {
            id: self.render_id(&values),
            values,
        }
    }

    /// `h(s, V_V)`: the abstract state of concrete state `id`.
    pub fn project(&self, id: &str) -> Result<AbstractState, AbstractionError> {
        let i = self.base.require_index(id)?;
        Ok(self.project_index(i))
    }

    /// `h⁻(ŝ, V_V)`: every concrete state projecting to `state`.
    pub fn origins(&self, state: &AbstractState) -> BTreeSet<StateId> {
        (0..self.base.len())
            .filter(|&i| self.values_at(i) == state.values)
            .map(|i| self.base.state(i).id.clone())
            .collect()
    }

    /// Builds the existential abstraction: abstract states are the
    /// projections of concrete states, an abstract edge exists iff some
    /// concrete edge witnesses it, and labels are unions over origins.
    pub fn build(&self) -> AbstractModel {
        let base = &*self.base;
        let mut by_values: BTreeMap<Vec<Value>, Vec<usize>> = BTreeMap::new();
        for i in 0..base.len() {
            by_values.entry(self.values_at(i)).or_default().push(i);
        }
        let mut states = Vec::with_capacity(by_values.len());
        let mut block_ids = vec![StateId::new(""); base.len()];
        let mut labels: BTreeMap<StateId, BTreeSet<String>> = BTreeMap::new();
        let mut initial = BTreeSet::new();
        for (values, members) in &by_values {
            let id = self.render_id(values);
            for &c in members {
                block_ids[c] = id.clone();
                if base.is_initial(c) {
                    initial.insert(id.clone());
                }
                let l = base.labels_of(c);
                if !l.is_empty() {
                    labels.entry(id.clone()).or_default().extend(l.iter().cloned());
                }
            }
            states.push(State::new(id, values.clone()));
        }
        let mut transitions = BTreeSet::new();
        for from in 0..base.len() {
            for &to in base.succ(from) {
                transitions.insert((block_ids[from].clone(), block_ids[to].clone()));
            }
        }
        let model = KripkeModel::new(self.column_decls(), states, initial, transitions, labels);
        let mut block_of = vec![0; base.len()];
        let mut blocks = vec![Vec::new(); model.len()];
        for (c, id) in block_ids.iter().enumerate() {
            let a = model.index_of(id.as_str()).expect("every block id names an abstract state");
            block_of[c] = a;
            blocks[a].push(c);
        }
        AbstractModel {
            abstraction: self.clone(),
            model,
            blocks,
            block_of,
        }
    }

    /// Rejects properties whose truth could differ between the origins of
    /// one abstract state: variables must be visible, and every proposition
    /// must label either all or none of each origin set.
    pub fn check_property(&self, property: &Property) -> Result<(), AbstractionError> {
        let pred = property.predicate();
        for var in pred.variables() {
            if !self.visible.contains(var) {
                return Err(if self.has_name(var) {
                    AbstractionError::InvisibleVariable(var.to_owned())
                } else {
                    AbstractionError::UnknownVariable(var.to_owned())
                });
            }
        }
        let am = self.build();
        pred.compile(&am.model)?;
        for prop in pred.propositions() {
            for (a, block) in am.blocks.iter().enumerate() {
                let mut seen = block.iter().map(|&c| self.base.labels_of(c).contains(prop));
                let first = seen.next().unwrap_or(false);
                if seen.any(|x| x != first) {
                    return Err(AbstractionError::NonUniformLabel {
                        proposition: prop.to_owned(),
                        state: am.model.state(a).id.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

fn render_synthetic(v: Value) -> &'static str {
    match v {
        Value::Defined(0) => SYNTHETIC_DOMAIN[0],
        Value::Defined(_) => SYNTHETIC_DOMAIN[1],
        Value::Undefined => crate::model::UNDEFINED_TOKEN,
    }
}

/// The abstract Kripke structure together with its block structure: which
/// concrete states each abstract state stands for.
#[derive(Debug, Clone)]
pub struct AbstractModel {
    abstraction: Abstraction,
    model: KripkeModel,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl AbstractModel {
    pub fn abstraction(&self) -> &Abstraction {
        &self.abstraction
    }

    /// The abstract structure itself; its state ids are the canonical
    /// renderings of the abstract assignments.
    pub fn model(&self) -> &KripkeModel {
        &self.model
    }

    pub fn base(&self) -> &KripkeModel {
        self.abstraction.base()
    }

    /// Concrete state indices (ascending) that project to abstract state `a`.
    pub fn block(&self, a: usize) -> &[usize] {
        &self.blocks[a]
    }

    /// Abstract index of concrete state `c`.
    pub fn block_of(&self, c: usize) -> usize {
        self.block_of[c]
    }

    pub fn abstract_state(&self, a: usize) -> AbstractState {
        let s = self.model.state(a);
        AbstractState {
            id: s.id.clone(),
            values: s.assignment.clone(),
        }
    }

    pub fn origins_of(&self, a: usize) -> BTreeSet<StateId> {
        self.blocks[a].iter().map(|&c| self.base().state(c).id.clone()).collect()
    }

    pub fn state_count(&self) -> usize {
        self.model.len()
    }

    pub fn transition_count(&self) -> usize {
        self.model.edge_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::random::{random_model, RandomModelConfig};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ids(xs: &[&str]) -> BTreeSet<StateId> {
        xs.iter().map(|&x| StateId::from(x)).collect()
    }

    fn edges(m: &KripkeModel) -> Vec<(String, String)> {
        m.transitions()
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn traffic_light_projection_hides_color() {
        let a = Abstraction::hiding(Arc::new(fixtures::traffic_light()), &["color"]).unwrap();
        let p = a.project("s1").unwrap();
        assert_eq!(p.id.as_str(), "(state=stop)");
        assert_eq!(p.values, vec![Value::Defined(0)]);
        assert_eq!(a.invisible(), vec!["color"]);
    }

    #[test]
    fn identity_projection_keeps_assignment() {
        let m = fixtures::traffic_light();
        let a = Abstraction::identity(Arc::new(m.clone())).unwrap();
        for (i, s) in m.states().iter().enumerate() {
            assert_eq!(a.project(s.id.as_str()).unwrap().values, s.assignment);
            assert_eq!(a.origins(&a.project_index(i)), ids(&[s.id.as_str()]));
        }
    }

    #[test]
    fn synthetic_column_is_projected() {
        let m = Arc::new(fixtures::traffic_light());
        let b1 = [
            (StateId::from("s1"), Value::Undefined),
            (StateId::from("s2"), Value::Defined(1)),
            (StateId::from("s3"), Value::Defined(0)),
        ]
        .into_iter()
        .collect();
        let a = Abstraction::new(m, ["state", "B1"], vec![("B1".into(), b1)]).unwrap();
        let p = a.project("s3").unwrap();
        assert_eq!(p.id.as_str(), "(state=go,B1=0)");
        assert_eq!(a.project("s1").unwrap().id.as_str(), "(state=stop,B1=_)");
    }

    #[test]
    fn constructor_rejects_bad_synthetics() {
        let m = Arc::new(fixtures::traffic_light());
        let partial: BTreeMap<_, _> = [(StateId::from("s1"), Value::Undefined)].into_iter().collect();
        assert!(matches!(
            Abstraction::new(m.clone(), ["state"], vec![("B1".into(), partial)]),
            Err(AbstractionError::PartialValuation { .. })
        ));
        let clash = m.states().iter().map(|s| (s.id.clone(), Value::Undefined)).collect();
        assert_eq!(
            Abstraction::new(m.clone(), ["state"], vec![("color".into(), clash)]).unwrap_err(),
            AbstractionError::DuplicateName("color".into())
        );
        assert_eq!(
            Abstraction::hiding(m, &["speed"]).unwrap_err(),
            AbstractionError::UnknownVariable("speed".into())
        );
    }

    #[test]
    fn origins_of_failure_block() {
        let a = Abstraction::hiding(Arc::new(fixtures::spurious_path()), &["aux"]).unwrap();
        let c = a.project("7").unwrap();
        assert_eq!(a.origins(&c), ids(&["7", "8", "9"]));
        let nowhere = AbstractState {
            id: "(pos=_)".into(),
            values: vec![Value::Undefined],
        };
        assert!(a.origins(&nowhere).is_empty());
    }

    #[test]
    fn chain_abstracts_to_two_states() {
        let a = Abstraction::hiding(Arc::new(fixtures::chain()), &["v3", "v4"]).unwrap();
        let am = a.build();
        assert_eq!(am.state_count(), 2);
        let lo = "(v1=0,v2=0)".to_string();
        let hi = "(v1=1,v2=1)".to_string();
        assert_eq!(
            edges(am.model()),
            vec![(lo.clone(), lo.clone()), (lo.clone(), hi.clone()), (hi.clone(), hi)]
        );
        assert_eq!(am.model().initial(), &ids(&["(v1=0,v2=0)"]));
    }

    #[test]
    fn traffic_light_abstract_model() {
        let a = Abstraction::hiding(Arc::new(fixtures::traffic_light()), &["color"]).unwrap();
        let am = a.build();
        let stop = "(state=stop)".to_string();
        let go = "(state=go)".to_string();
        assert_eq!(am.state_count(), 2);
        let mut expected = vec![(stop.clone(), go.clone()), (go.clone(), go.clone()), (go.clone(), stop.clone())];
        expected.sort();
        assert_eq!(edges(am.model()), expected);
        assert_eq!(am.model().initial(), &ids(&["(state=stop)"]));
    }

    #[test]
    fn identity_abstraction_is_isomorphic() {
        let m = fixtures::spurious_path();
        let am = Abstraction::identity(Arc::new(m.clone())).unwrap().build();
        assert_eq!(am.state_count(), m.len());
        assert_eq!(am.transition_count(), m.edge_count());
        for c in 0..m.len() {
            let a = am.block_of(c);
            assert_eq!(am.block(a), &[c]);
            for &t in m.succ(c) {
                assert!(am.model().has_edge(a, am.block_of(t)));
            }
        }
    }

    #[test]
    fn labels_are_unions_and_must_be_uniform() {
        let m = crate::parse::parse_model(
            "var x : a | b\nvar y : a | b\nstate p : x=a, y=a\nstate q : x=a, y=b\nlabel p : hot\ninit p\n",
        )
        .unwrap();
        let a = Abstraction::hiding(Arc::new(m), &["y"]).unwrap();
        let am = a.build();
        assert!(am.model().labels_of(0).contains("hot"));
        let prop = crate::parse::parse_property("AG !hot").unwrap();
        assert!(matches!(a.check_property(&prop), Err(AbstractionError::NonUniformLabel { .. })));
        let hidden = crate::parse::parse_property("AG y=a").unwrap();
        assert_eq!(a.check_property(&hidden), Err(AbstractionError::InvisibleVariable("y".into())));
        let ok = crate::parse::parse_property("AG x=a").unwrap();
        assert_eq!(a.check_property(&ok), Ok(()));
    }

    fn arb_abstraction() -> impl Strategy<Value = (Abstraction, Vec<String>)> {
        (any::<u64>(), 1usize..6, any::<u64>()).prop_map(|(seed, vars, mask)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = Arc::new(random_model(&mut rng, &RandomModelConfig { variables: vars, ..Default::default() }));
            let hidden: Vec<String> = m
                .variables()
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, v)| v.name.clone())
                .collect();
            (Abstraction::hiding(m, &hidden).unwrap(), hidden)
        })
    }

    proptest! {
        #[test]
        fn existential_abstraction_is_a_simulation_with_exact_witnesses((a, _) in arb_abstraction()) {
            let am = a.build();
            let base = a.base();
            for c in 0..base.len() {
                prop_assert_eq!(&a.project_index(c).id, &am.model().state(am.block_of(c)).id);
                if base.is_initial(c) {
                    prop_assert!(am.model().is_initial(am.block_of(c)));
                }
                for &t in base.succ(c) {
                    prop_assert!(am.model().has_edge(am.block_of(c), am.block_of(t)));
                }
            }
            for x in 0..am.state_count() {
                for &y in am.model().succ(x) {
                    let witnessed = am.block(x).iter().any(|&c| am.block(y).iter().any(|&t| base.has_edge(c, t)));
                    prop_assert!(witnessed);
                }
                if am.model().is_initial(x) {
                    prop_assert!(am.block(x).iter().any(|&c| base.is_initial(c)));
                }
            }
        }

        #[test]
        fn origins_partition_the_base((a, _) in arb_abstraction()) {
            let am = a.build();
            let mut all = BTreeSet::new();
            for x in 0..am.state_count() {
                let o = a.origins(&am.abstract_state(x));
                prop_assert!(!o.is_empty());
                prop_assert_eq!(&o, &am.origins_of(x));
                for id in o {
                    prop_assert!(all.insert(id));
                }
            }
            prop_assert_eq!(all.len(), a.base().len());
        }

        #[test]
        fn revealing_a_variable_never_shrinks((a, hidden) in arb_abstraction()) {
            if let Some(v) = hidden.first() {
                let finer = a.with_visible(&[v.as_str()]);
                prop_assert!(finer.build().state_count() >= a.build().state_count());
            }
        }
    }
}
