//! State predicates and the two temporal property shapes the checker handles.

use std::collections::BTreeSet;
use std::fmt;

use crate::model::{KripkeModel, ModelError, State, Value, VariableDecl, UNDEFINED_TOKEN};

/// Boolean combination of `var = value` atoms and proposition names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Predicate {
    /// `var = value`; a `None` value is the atom `var = ⊥`.
    Eq { var: String, value: Option<String> },
    Prop(String),
    Not(Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
}

impl Predicate {
    pub fn eq(var: impl Into<String>, value: impl Into<String>) -> Self {
        Predicate::Eq {
            var: var.into(),
            value: Some(value.into()),
        }
    }

    pub fn undefined(var: impl Into<String>) -> Self {
        Predicate::Eq {
            var: var.into(),
            value: None,
        }
    }

    pub fn prop(name: impl Into<String>) -> Self {
        Predicate::Prop(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Predicate::Not(Box::new(self))
    }

    pub fn and(self, rhs: Predicate) -> Self {
        Predicate::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Predicate) -> Self {
        Predicate::Or(Box::new(self), Box::new(rhs))
    }

    /// Variable names mentioned by `var = value` atoms.
    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| {
            if let Predicate::Eq { var, .. } = p {
                out.insert(var.as_str());
            }
        });
        out
    }

    pub fn propositions(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| {
            if let Predicate::Prop(name) = p {
                out.insert(name.as_str());
            }
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Predicate)) {
        f(self);
        match self {
            Predicate::Eq { .. } | Predicate::Prop(_) => {}
            Predicate::Not(p) => p.visit(f),
            Predicate::And(a, b) | Predicate::Or(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Evaluates against a single state. Propositions are looked up in
    /// `labels`; variables and values are resolved against `variables`.
    pub fn eval(&self, variables: &[VariableDecl], state: &State, labels: &BTreeSet<String>) -> Result<bool, ModelError> {
        Ok(match self {
            Predicate::Eq { var, value } => {
                let k = variables
                    .iter()
                    .position(|d| &d.name == var)
                    .ok_or_else(|| ModelError::UnknownVariable(var.clone()))?;
                let expected = resolve_value(&variables[k], value.as_deref())?;
                state.assignment.get(k) == Some(&expected)
            }
            Predicate::Prop(name) => labels.contains(name),
            Predicate::Not(p) => !p.eval(variables, state, labels)?,
            Predicate::And(a, b) => a.eval(variables, state, labels)? && b.eval(variables, state, labels)?,
            Predicate::Or(a, b) => a.eval(variables, state, labels)? || b.eval(variables, state, labels)?,
        })
    }

    /// Resolves names against `model` once so that evaluation is a tree walk
    /// over indices.
    pub fn compile(&self, model: &KripkeModel) -> Result<CompiledPredicate, ModelError> {
        let props = model.propositions();
        compile_node(self, model, &props).map(CompiledPredicate)
    }
}

fn resolve_value(decl: &VariableDecl, value: Option<&str>) -> Result<Value, ModelError> {
    match value {
        None => Ok(Value::Undefined),
        Some(v) => decl.value_of(v).ok_or_else(|| ModelError::ValueNotInDomain {
            variable: decl.name.clone(),
            value: v.to_owned(),
        }),
    }
}

fn compile_node(p: &Predicate, model: &KripkeModel, props: &BTreeSet<&str>) -> Result<Node, ModelError> {
    Ok(match p {
        Predicate::Eq { var, value } => {
            let k = model
                .variable_index(var)
                .ok_or_else(|| ModelError::UnknownVariable(var.clone()))?;
            let v = resolve_value(&model.variables()[k], value.as_deref())?;
            Node::Eq(k, v)
        }
        Predicate::Prop(name) => {
            if !props.contains(name.as_str()) {
                return Err(ModelError::UnknownProposition(name.clone()));
            }
            Node::Prop(name.clone())
        }
        Predicate::Not(q) => Node::Not(Box::new(compile_node(q, model, props)?)),
        Predicate::And(a, b) => Node::And(
            Box::new(compile_node(a, model, props)?),
            Box::new(compile_node(b, model, props)?),
        ),
        Predicate::Or(a, b) => Node::Or(
            Box::new(compile_node(a, model, props)?),
            Box::new(compile_node(b, model, props)?),
        ),
    })
}

#[derive(Debug, Clone)]
enum Node {
    Eq(usize, Value),
    Prop(String),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
}

impl Node {
    fn eval(&self, state: &State, labels: &BTreeSet<String>) -> bool {
        match self {
            Node::Eq(k, v) => state.assignment.get(*k) == Some(v),
            Node::Prop(name) => labels.contains(name),
            Node::Not(p) => !p.eval(state, labels),
            Node::And(a, b) => a.eval(state, labels) && b.eval(state, labels),
            Node::Or(a, b) => a.eval(state, labels) || b.eval(state, labels),
        }
    }
}

/// A predicate whose names were resolved against one particular model.
#[derive(Debug, Clone)]
pub struct CompiledPredicate(Node);

impl CompiledPredicate {
    /// Truth value at the state with the given index of the model this was
    /// compiled against.
    pub fn holds_at(&self, model: &KripkeModel, index: usize) -> bool {
        self.0.eval(model.state(index), model.labels_of(index))
    }
}

/// Evaluates `p` at the state `id` of `model`.
pub fn eval_predicate(model: &KripkeModel, id: &str, p: &Predicate) -> Result<bool, ModelError> {
    let i = model.require_index(id)?;
    Ok(p.compile(model)?.holds_at(model, i))
}

// Precedence levels for printing: `|` < `&` < `!`/atoms.
fn write_pred(p: &Predicate, f: &mut fmt::Formatter<'_>, level: u8) -> fmt::Result {
    match p {
        Predicate::Eq { var, value } => write!(f, "{var}={}", value.as_deref().unwrap_or(UNDEFINED_TOKEN)),
        Predicate::Prop(name) => f.write_str(name),
        Predicate::Not(q) => {
            f.write_str("!")?;
            write_pred(q, f, 2)
        }
        Predicate::And(a, b) => {
            let paren = level > 1;
            if paren {
                f.write_str("(")?;
            }
            write_pred(a, f, 1)?;
            f.write_str(" & ")?;
            // left-associative: a right operand of the same operator needs parens
            write_pred(b, f, 2)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        Predicate::Or(a, b) => {
            let paren = level > 0;
            if paren {
                f.write_str("(")?;
            }
            write_pred(a, f, 0)?;
            f.write_str(" | ")?;
            write_pred(b, f, 1)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_pred(self, f, 0)
    }
}

/// The property shapes supported by the checker: `AG p` and `GF p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Property {
    /// `AG p`: every reachable state satisfies `p`.
    Globally(Predicate),
    /// `GF p` (□◇p): every infinite path visits `p` infinitely often.
    InfinitelyOften(Predicate),
}

impl Property {
    pub fn predicate(&self) -> &Predicate {
        match self {
            Property::Globally(p) | Property::InfinitelyOften(p) => p,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Globally(p) => write!(f, "AG {p}"),
            Property::InfinitelyOften(p) => write!(f, "GF {p}"),
        }
    }
}
