//! Spuriousness analysis of abstract counterexamples.
//!
//! Positions of an abstract path are 0-based. `In` at position 0 is the
//! set of initial origins of the first abstract state, closed under
//! transitions that stay inside that block; `In` at position `k + 1` is the
//! closure of the successors of `In[k]` that land in the next block. `Out`
//! at position `k` is the set of origins that can reach the next block,
//! again closed backwards within the block. A position where `In` and `Out`
//! are disjoint is a failure: the concrete states reachable along the path
//! (dead) cannot continue, and the ones that could continue (bad) are not
//! reachable.
//!
//! Because of the intra-block closure a concrete realization may stay in one
//! block for several steps. [`concretize`] searches for realizations under
//! the same reading, so it agrees with [`check_spurious`].
//!
//! A lasso `prefix · loop^ω` is scanned along its infinite unrolling. The
//! scan stops after `|prefix| + |loop| · |block(loop head)|` positions: if
//! `In` is still non-empty there, some concrete state of the loop head block
//! recurs, which yields an infinite realization.

use std::collections::{BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;
use thiserror::Error;

use crate::abstraction::{AbstractModel, AbstractState};
use crate::checker::{trace_back, Counterexample, PathError};
use crate::model::StateId;

/// Where and why an abstract counterexample breaks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailureAnalysis {
    /// 0-based position in the unrolled abstract path.
    pub position: usize,
    #[serde(serialize_with = "serialize_abstract_id")]
    pub failure_state: AbstractState,
    /// Reachable along the path but unable to continue.
    pub dead: BTreeSet<StateId>,
    /// Able to continue but unreachable along the path.
    pub bad: BTreeSet<StateId>,
    /// The remaining origins of the failure state.
    pub isolated: BTreeSet<StateId>,
}

fn serialize_abstract_id<S: serde::Serializer>(s: &AbstractState, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(s.id.as_str())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpuriousVerdict {
    Real,
    Spurious(FailureAnalysis),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpuriousError {
    #[error("not a path of the abstract model: {0}")]
    NotAbstractPath(#[from] PathError),
    #[error("position {position} out of range for a path of length {len}")]
    PositionOutOfRange { position: usize, len: usize },
}

/// Flattens a counterexample into a finite sequence of states. A lasso
/// becomes `prefix ++ loop ++ [loop head]`.
pub fn unroll(cex: &Counterexample) -> Vec<StateId> {
    let mut out: Vec<StateId> = cex.states().cloned().collect();
    if let Counterexample::Lasso { cycle, .. } = cex {
        out.extend(cycle.first().cloned());
    }
    out
}

/// Concrete-state subset of the base model, as a membership mask.
type Mask = Vec<bool>;

fn to_ids(am: &AbstractModel, mask: &[bool]) -> BTreeSet<StateId> {
    mask.iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| am.base().state(i).id.clone())
        .collect()
}

fn is_empty(mask: &[bool]) -> bool {
    !mask.iter().any(|&m| m)
}

/// Extends `mask` with everything reachable from it without leaving block `a`.
fn close_forward(am: &AbstractModel, a: usize, mut mask: Mask) -> Mask {
    let base = am.base();
    let mut stack: Vec<usize> = am.block(a).iter().copied().filter(|&c| mask[c]).collect();
    while let Some(c) = stack.pop() {
        for &d in base.succ(c) {
            if !mask[d] && am.block_of(d) == a {
                mask[d] = true;
                stack.push(d);
            }
        }
    }
    mask
}

fn in_initial(am: &AbstractModel, a: usize) -> Mask {
    let base = am.base();
    let mut mask = vec![false; base.len()];
    for &c in am.block(a) {
        mask[c] = base.is_initial(c);
    }
    close_forward(am, a, mask)
}

fn in_next(am: &AbstractModel, prev: &[bool], a: usize) -> Mask {
    let base = am.base();
    let mut mask = vec![false; base.len()];
    for &c in am.block(a) {
        mask[c] = base.pred(c).iter().any(|&p| prev[p]);
    }
    close_forward(am, a, mask)
}

fn out_of(am: &AbstractModel, a: usize, next: usize) -> Mask {
    let base = am.base();
    let mut mask = vec![false; base.len()];
    let mut stack = Vec::new();
    for &c in am.block(a) {
        if base.succ(c).iter().any(|&d| am.block_of(d) == next) {
            mask[c] = true;
            stack.push(c);
        }
    }
    while let Some(c) = stack.pop() {
        for &p in base.pred(c) {
            if !mask[p] && am.block_of(p) == a {
                mask[p] = true;
                stack.push(p);
            }
        }
    }
    mask
}

fn resolve(am: &AbstractModel, path: &[StateId]) -> Result<Vec<usize>, SpuriousError> {
    if path.is_empty() {
        return Err(PathError::Empty.into());
    }
    Counterexample::Finite { path: path.to_vec() }.validate(am.model())?;
    Ok(path.iter().map(|id| am.model().index_of(id.as_str()).expect("validated")).collect())
}

/// The `In` set of every position of a finite abstract path. Once a set is
/// empty all later ones are too.
pub fn in_sets(am: &AbstractModel, path: &[StateId]) -> Result<Vec<BTreeSet<StateId>>, SpuriousError> {
    let seq = resolve(am, path)?;
    let mut cur = in_initial(am, seq[0]);
    let mut out = vec![to_ids(am, &cur)];
    for &a in &seq[1..] {
        cur = in_next(am, &cur, a);
        out.push(to_ids(am, &cur));
    }
    Ok(out)
}

/// The `Out` set of position `i` (0-based); requires `i + 1 < path.len()`.
pub fn out_set(am: &AbstractModel, path: &[StateId], i: usize) -> Result<BTreeSet<StateId>, SpuriousError> {
    let seq = resolve(am, path)?;
    if i + 1 >= seq.len() {
        return Err(SpuriousError::PositionOutOfRange {
            position: i,
            len: seq.len(),
        });
    }
    Ok(to_ids(am, &out_of(am, seq[i], seq[i + 1])))
}

/// Abstract indices of a validated counterexample, split into prefix and loop.
fn shape(am: &AbstractModel, cex: &Counterexample) -> Result<(Vec<usize>, Vec<usize>), SpuriousError> {
    cex.validate(am.model())?;
    let idx = |ids: &[StateId]| -> Vec<usize> { ids.iter().map(|id| am.model().index_of(id.as_str()).expect("validated")).collect() };
    Ok(match cex {
        Counterexample::Finite { path } => (idx(path), Vec::new()),
        Counterexample::Lasso { prefix, cycle } => (idx(prefix), idx(cycle)),
    })
}

/// Abstract state at position `k` of `prefix · loop^ω` (or of the finite
/// path when `cycle` is empty).
fn at(prefix: &[usize], cycle: &[usize], k: usize) -> usize {
    if k < prefix.len() {
        prefix[k]
    } else {
        cycle[(k - prefix.len()) % cycle.len()]
    }
}

/// Decides whether `cex`, a counterexample of `am.model()`, has a concrete
/// realization, and locates the first failure position if not.
pub fn check_spurious(am: &AbstractModel, cex: &Counterexample) -> Result<SpuriousVerdict, SpuriousError> {
    let (prefix, cycle) = shape(am, cex)?;
    let checks = if cycle.is_empty() {
        prefix.len() - 1
    } else {
        prefix.len() + cycle.len() * am.block(cycle[0]).len()
    };
    let mut current = in_initial(am, at(&prefix, &cycle, 0));
    for k in 0..checks {
        let (a, next) = (at(&prefix, &cycle, k), at(&prefix, &cycle, k + 1));
        let out = out_of(am, a, next);
        if !current.iter().zip(&out).any(|(&x, &y)| x && y) {
            let dead = to_ids(am, &current);
            let bad = to_ids(am, &out);
            let isolated = am
                .origins_of(a)
                .into_iter()
                .filter(|s| !dead.contains(s) && !bad.contains(s))
                .collect();
            return Ok(SpuriousVerdict::Spurious(FailureAnalysis {
                position: k,
                failure_state: am.abstract_state(a),
                dead,
                bad,
                isolated,
            }));
        }
        current = in_next(am, &current, next);
        debug_assert!(!is_empty(&current));
    }
    Ok(SpuriousVerdict::Real)
}

/// Searches the base model for a realization of `cex`.
///
/// Works on the product of concrete states and path positions. From
/// `(c, k)` a concrete edge `c → d` either stays at position `k` (when `d`
/// is in the same block) or advances to the next position (when `d` is in
/// the next block). For a lasso, positions wrap from the end of the loop
/// back to its start, and a realization is a reachable product cycle that
/// advances at least once.
pub fn concretize(am: &AbstractModel, cex: &Counterexample) -> Result<Option<Counterexample>, SpuriousError> {
    let (prefix, cycle) = shape(am, cex)?;
    let product = Product::new(am, &prefix, &cycle);
    let (order, parent) = product.explore();
    let state_ids = |nodes: &[usize]| -> Vec<StateId> { nodes.iter().map(|&n| am.base().state(product.concrete(n)).id.clone()).collect() };

    if cycle.is_empty() {
        let last = prefix.len() - 1;
        return Ok(order
            .iter()
            .copied()
            .find(|&n| product.position(n) == last)
            .map(|n| Counterexample::Finite {
                path: state_ids(&trace_back(&parent, n)),
            }));
    }

    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(product.len(), 0);
    for _ in 0..product.len() {
        g.add_node(());
    }
    let mut reached = vec![false; product.len()];
    for &n in &order {
        reached[n] = true;
    }
    for &n in &order {
        for (m, _) in product.successors(n) {
            g.add_edge(NodeIndex::new(n), NodeIndex::new(m), ());
        }
    }
    let mut component = vec![usize::MAX; product.len()];
    for (i, scc) in tarjan_scc(&g).into_iter().enumerate() {
        for n in scc {
            component[n.index()] = i;
        }
    }
    let entry = order.iter().find_map(|&u| {
        product
            .successors(u)
            .into_iter()
            .find(|&(v, advance)| advance && component[v] == component[u])
            .map(|(v, _)| (u, v))
    });
    let Some((u, v)) = entry else {
        return Ok(None);
    };
    // shortest path v ->* u inside the component
    let mut back = vec![None; product.len()];
    let mut seen = vec![false; product.len()];
    seen[v] = true;
    let mut queue = VecDeque::from([v]);
    while let Some(x) = queue.pop_front() {
        if x == u {
            break;
        }
        for (y, _) in product.successors(x) {
            if !seen[y] && component[y] == component[u] {
                seen[y] = true;
                back[y] = Some(x);
                queue.push_back(y);
            }
        }
    }
    let mut lasso_loop = vec![u];
    if v != u {
        lasso_loop.extend(trace_back(&back, u));
        lasso_loop.pop();
    }
    let mut stem = trace_back(&parent, u);
    stem.pop();
    Ok(Some(Counterexample::Lasso {
        prefix: state_ids(&stem),
        cycle: state_ids(&lasso_loop),
    }))
}

/// Nodes `(concrete state, position)` numbered `position * |S| + state`.
struct Product<'a> {
    am: &'a AbstractModel,
    prefix: &'a [usize],
    cycle: &'a [usize],
    positions: usize,
}

impl<'a> Product<'a> {
    fn new(am: &'a AbstractModel, prefix: &'a [usize], cycle: &'a [usize]) -> Self {
        Product {
            am,
            prefix,
            cycle,
            positions: prefix.len() + cycle.len(),
        }
    }

    fn len(&self) -> usize {
        self.positions * self.am.base().len()
    }

    fn node(&self, c: usize, k: usize) -> usize {
        k * self.am.base().len() + c
    }

    fn concrete(&self, n: usize) -> usize {
        n % self.am.base().len()
    }

    fn position(&self, n: usize) -> usize {
        n / self.am.base().len()
    }

    fn next_position(&self, k: usize) -> Option<usize> {
        if k + 1 < self.positions {
            Some(k + 1)
        } else if self.cycle.is_empty() {
            None
        } else {
            Some(self.prefix.len())
        }
    }

    /// Successor nodes, each flagged with whether it advances the position.
    fn successors(&self, n: usize) -> Vec<(usize, bool)> {
        let (c, k) = (self.concrete(n), self.position(n));
        let block = at(self.prefix, self.cycle, k);
        let next = self.next_position(k);
        let mut out = Vec::new();
        for &d in self.am.base().succ(c) {
            let b = self.am.block_of(d);
            if let Some(j) = next {
                if b == at(self.prefix, self.cycle, j) {
                    out.push((self.node(d, j), true));
                    if j == k {
                        continue;
                    }
                }
            }
            if b == block {
                out.push((self.node(d, k), false));
            }
        }
        out
    }

    fn explore(&self) -> (Vec<usize>, Vec<Option<usize>>) {
        let base = self.am.base();
        let first = at(self.prefix, self.cycle, 0);
        let mut parent = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for &c in self.am.block(first) {
            if base.is_initial(c) {
                let n = self.node(c, 0);
                seen[n] = true;
                queue.push_back(n);
            }
        }
        while let Some(n) = queue.pop_front() {
            order.push(n);
            for (m, _) in self.successors(n) {
                if !seen[m] {
                    seen[m] = true;
                    parent[m] = Some(n);
                    queue.push_back(m);
                }
            }
        }
        (order, parent)
    }
}
