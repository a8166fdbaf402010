//! Seeded random models over boolean variables, for benchmarks and
//! property tests.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bench::BenchCase;
use crate::model::{KripkeModel, State, StateId, Value, VariableDecl};
use crate::predicate::{Predicate, Property};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomModelConfig {
    /// Number of boolean variables `x1..xk`.
    pub variables: usize,
    /// Upper bound on the number of states; also capped at `2^variables`
    /// since every state gets a distinct assignment.
    pub max_states: usize,
    /// Expected number of successors per state.
    pub density: f64,
}

impl Default for RandomModelConfig {
    fn default() -> Self {
        RandomModelConfig {
            variables: 4,
            max_states: 64,
            density: 2.0,
        }
    }
}

/// Draws a model with between 1 and `min(max_states, 2^variables)` states,
/// pairwise distinct assignments, and at least one initial state.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, config: &RandomModelConfig) -> KripkeModel {
    let k = config.variables.min(20);
    let variables: Vec<VariableDecl> = (1..=k).map(|i| VariableDecl::new(format!("x{i}"), ["0", "1"])).collect();
    let universe = 1usize << k;
    let n = rng.gen_range(1..=config.max_states.clamp(1, universe));
    let width = (n - 1).to_string().len();
    let codes = sample(rng, universe, n);
    let states: Vec<State> = codes
        .iter()
        .enumerate()
        .map(|(i, code)| {
            let assignment = (0..k).map(|bit| Value::Defined(code >> bit & 1)).collect();
            State::new(format!("s{i:0width$}"), assignment)
        })
        .collect();
    let ids: Vec<StateId> = states.iter().map(|s| s.id.clone()).collect();

    let p = (config.density / n as f64).clamp(0.0, 1.0);
    let mut transitions = BTreeSet::new();
    for a in &ids {
        for b in &ids {
            if rng.gen_bool(p) {
                transitions.insert((a.clone(), b.clone()));
            }
        }
    }
    let mut initial = BTreeSet::new();
    initial.insert(ids[rng.gen_range(0..n)].clone());
    if n > 1 && rng.gen_bool(0.3) {
        initial.insert(ids[rng.gen_range(0..n)].clone());
    }
    KripkeModel::new(variables, states, initial, transitions, BTreeMap::new())
}

/// A random model plus a random `AG`/`GF` property over one or two visible
/// variables and a random set of hidden variables that the property does
/// not mention.
pub fn random_case<R: Rng + ?Sized>(rng: &mut R, name: impl Into<String>, config: &RandomModelConfig) -> BenchCase {
    let model = random_model(rng, config);
    let k = model.variables().len();
    let bit = |rng: &mut R| if rng.gen_bool(0.5) { "1" } else { "0" };
    let watched = if k >= 2 && rng.gen_bool(0.5) { 2 } else { 1 };
    let predicate = if watched == 1 {
        Predicate::eq("x1", bit(rng))
    } else {
        let a = Predicate::eq("x1", bit(rng));
        let b = Predicate::eq("x2", bit(rng));
        if rng.gen_bool(0.5) {
            a.and(b).not()
        } else {
            a.or(b)
        }
    };
    let property = if rng.gen_bool(0.5) {
        Property::Globally(predicate)
    } else {
        Property::InfinitelyOften(predicate)
    };
    let hidden = (watched + 1..=k)
        .filter(|_| rng.gen_bool(0.75))
        .map(|i| format!("x{i}"))
        .collect();
    BenchCase {
        name: name.into(),
        model,
        property,
        hidden,
    }
}

/// `count` cases named `random0`, `random1`, … drawn from a ChaCha8 stream
/// seeded with `seed`. Names are zero-padded to a common width.
pub fn seeded_cases(seed: u64, count: usize, config: &RandomModelConfig) -> Vec<BenchCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = count.saturating_sub(1).to_string().len();
    (0..count)
        .map(|i| random_case(&mut rng, format!("random{i:0width$}"), config))
        .collect()
}
