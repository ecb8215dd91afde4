//! Expediting, disentangled paths, path safety and domination checks.
//!
//! Sequence positions are zero-based throughout: `steps[0]` fires first.

use std::collections::{BTreeSet, HashSet, VecDeque};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::net::{Cluster, ClusterMap, Marking, Node, NodePath, PetriNet, PlaceId, TransitionId};
use crate::semantics::{fire, fire_sequence, is_enabled, ReachabilityGraph};

/// Default number of distinct sequences kept by [`expedite_closure`].
pub const DEFAULT_EXPEDITE_BUDGET: usize = 10_000;

/// A transition sequence enabled from its origin marking.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiringSequence {
    origin: Marking,
    steps: Vec<TransitionId>,
}

impl FiringSequence {
    pub fn new(net: &PetriNet, origin: Marking, steps: Vec<TransitionId>) -> Result<Self> {
        fire_sequence(net, &origin, &steps)?;
        Ok(FiringSequence { origin, steps })
    }

    pub fn from_names<S: AsRef<str>>(net: &PetriNet, origin: Marking, names: &[S]) -> Result<Self> {
        let steps = names
            .iter()
            .map(|n| net.transition_id(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        FiringSequence::new(net, origin, steps)
    }

    pub fn origin(&self) -> &Marking {
        &self.origin
    }

    pub fn steps(&self) -> &[TransitionId] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The marking reached after the whole sequence.
    pub fn target(&self, net: &PetriNet) -> Marking {
        fire_sequence(net, &self.origin, &self.steps).expect("validated on construction")
    }

    pub fn names(&self, net: &PetriNet) -> Vec<String> {
        self.steps.iter().map(|&t| net.transition_name(t).to_string()).collect()
    }
}

/// Moves the element at `j` to position `i`, shifting `i..j` one step right.
pub fn expedite_permutation<T: Clone>(steps: &[T], i: usize, j: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(steps.len());
    out.extend_from_slice(&steps[..i]);
    out.push(steps[j].clone());
    out.extend_from_slice(&steps[i..j]);
    out.extend_from_slice(&steps[j + 1..]);
    out
}

fn check_indices(len: usize, i: usize, j: usize) -> Result<()> {
    if i < j && j < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { i, j, len })
    }
}

// Markings before each step: prefix[k] is reached after steps[..k].
fn prefix_markings(net: &PetriNet, origin: &Marking, steps: &[TransitionId]) -> Vec<Marking> {
    let mut out = Vec::with_capacity(steps.len() + 1);
    out.push(origin.clone());
    for &t in steps {
        let next = fire(net, out.last().expect("non-empty"), t).expect("enabled sequence");
        out.push(next);
    }
    out
}

fn permitted(
    net: &PetriNet,
    clusters: &ClusterMap,
    before: &Marking,
    steps: &[TransitionId],
    i: usize,
    j: usize,
) -> bool {
    let target = clusters.index_of_transition(steps[j]);
    is_enabled(net, before, steps[j]) && steps[i..j].iter().all(|&t| clusters.index_of_transition(t) != target)
}

/// Whether the transition at position `j` may be moved to position `i`: it
/// must be enabled after `steps[..i]`, and no step in `i..j` may belong to
/// its cluster.
pub fn expedite_check(net: &PetriNet, seq: &FiringSequence, i: usize, j: usize) -> Result<bool> {
    check_indices(seq.len(), i, j)?;
    let clusters = ClusterMap::new(net);
    let before = fire_sequence(net, &seq.origin, &seq.steps[..i])?;
    Ok(permitted(net, &clusters, &before, &seq.steps, i, j))
}

pub fn expedite_apply(net: &PetriNet, seq: &FiringSequence, i: usize, j: usize) -> Result<FiringSequence> {
    if !expedite_check(net, seq, i, j)? {
        return Err(Error::ExpediteNotPermitted { i, j });
    }
    Ok(FiringSequence {
        origin: seq.origin.clone(),
        steps: expedite_permutation(&seq.steps, i, j),
    })
}

/// `Exp(σ)`, possibly cut short.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpediteClosure {
    pub sequences: BTreeSet<FiringSequence>,
    /// True when the budget stopped the search before the fixed point.
    pub truncated: bool,
}

/// The closure of `seq` under permitted expedite steps, keeping at most
/// `budget` distinct sequences.
pub fn expedite_closure(net: &PetriNet, seq: &FiringSequence, budget: usize) -> ExpediteClosure {
    let budget = budget.max(1);
    let clusters = ClusterMap::new(net);
    let mut seen: HashSet<Vec<TransitionId>> = HashSet::from([seq.steps.clone()]);
    let mut queue = VecDeque::from([seq.steps.clone()]);
    let mut truncated = false;

    'search: while let Some(steps) = queue.pop_front() {
        let prefix = prefix_markings(net, &seq.origin, &steps);
        for j in 1..steps.len() {
            for (i, before) in prefix.iter().enumerate().take(j) {
                if !permitted(net, &clusters, before, &steps, i, j) {
                    continue;
                }
                let next = expedite_permutation(&steps, i, j);
                if seen.contains(&next) {
                    continue;
                }
                if seen.len() >= budget {
                    truncated = true;
                    break 'search;
                }
                seen.insert(next.clone());
                queue.push_back(next);
            }
        }
    }

    let sequences = seen
        .into_iter()
        .map(|steps| FiringSequence {
            origin: seq.origin.clone(),
            steps,
        })
        .collect();
    ExpediteClosure { sequences, truncated }
}

/// Shortens a path into a `target`-rooted disentangled path with the same
/// first place. A pointer walks over the places of the path; when a later
/// place shares the current place's cluster, the path jumps from the
/// current place straight to the transition following the last such place.
pub fn disentangle(net: &PetriNet, path: &NodePath, target: &Cluster) -> Result<NodePath> {
    let nodes = path.nodes();
    if nodes.len().is_multiple_of(2) || nodes[0].as_place().is_none() {
        return Err(Error::InvalidPath("path must start and end with a place".into()));
    }
    // Alternation is implied by the arc check on construction.
    let places: Vec<PlaceId> = path.places().collect();
    let transitions: Vec<TransitionId> = nodes.iter().filter_map(|n| n.as_transition()).collect();
    let n = places.len();
    if !target.places().contains(&places[n - 1]) {
        return Err(Error::InvalidPath(format!(
            "path does not end in the target cluster at {}",
            net.place_name(places[n - 1])
        )));
    }
    let clusters = ClusterMap::new(net);

    let mut out = Vec::new();
    let mut i = 0;
    loop {
        let p = places[i];
        out.push(Node::Place(p));
        if target.places().contains(&p) {
            break;
        }
        let here = clusters.index_of_place(p);
        let last_same = (i + 1..n).rev().find(|&j| clusters.index_of_place(places[j]) == here);
        match last_same {
            Some(j) => {
                // j < n - 1 whenever `target` is a cluster of the net.
                let t = *transitions
                    .get(j)
                    .ok_or_else(|| Error::InvalidPath("target is not a cluster of the net".into()))?;
                if !net.has_arc(Node::Place(p), Node::Transition(t)) {
                    return Err(Error::NotFreeChoice(format!(
                        "{} is not an input of {}",
                        net.place_name(p),
                        net.transition_name(t)
                    )));
                }
                out.push(Node::Transition(t));
                i = j + 1;
            }
            None => {
                out.push(Node::Transition(transitions[i]));
                i += 1;
            }
        }
    }
    NodePath::new(net, out)
}

fn ensure_cluster(net: &PetriNet, c: &Cluster) -> Result<()> {
    let seed = c
        .nodes()
        .next()
        .ok_or_else(|| Error::NotInNet("empty cluster".into()))?;
    let valid = match seed {
        Node::Place(p) => p.index() < net.place_count(),
        Node::Transition(t) => t.index() < net.transition_count(),
    };
    if !valid || Cluster::of(net, seed) != *c {
        return Err(Error::NotInNet("cluster is not a cluster of this net".into()));
    }
    Ok(())
}

/// A `c`-rooted disentangled path starting in `p`, found by breadth-first
/// search and then disentangled. `None` if `p` is never marked or cannot
/// reach `c`.
pub fn rooted_path_from_place(
    net: &PetriNet,
    rg: &ReachabilityGraph,
    p: PlaceId,
    c: &Cluster,
) -> Result<Option<NodePath>> {
    if p.index() >= net.place_count() {
        return Err(Error::NotInNet(format!("place #{}", p.index())));
    }
    ensure_cluster(net, c)?;
    if !rg.markings().iter().any(|m| m.contains(p)) {
        return Ok(None);
    }
    let start = Node::Place(p);
    let mut parent: std::collections::HashMap<Node, Node> = Default::default();
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    let mut found = None;
    while let Some(n) = queue.pop_front() {
        if let Node::Place(q) = n {
            if c.places().contains(&q) {
                found = Some(n);
                break;
            }
        }
        for s in net.successors(n) {
            if seen.insert(s) {
                parent.insert(s, n);
                queue.push_back(s);
            }
        }
    }
    let Some(end) = found else {
        return Ok(None);
    };
    let mut nodes = vec![end];
    while let Some(&prev) = parent.get(nodes.last().expect("non-empty")) {
        nodes.push(prev);
    }
    nodes.reverse();
    let path = NodePath::new(net, nodes)?;
    disentangle(net, &path, c).map(Some)
}

/// Every `c`-rooted disentangled path starting in `p`, in depth-first order,
/// stopping after `limit` paths. The flag reports whether the limit cut the
/// enumeration short.
pub fn rooted_disentangled_paths(net: &PetriNet, p: PlaceId, c: &Cluster, limit: usize) -> (Vec<NodePath>, bool) {
    let clusters = ClusterMap::new(net);
    let mut out = Vec::new();
    let mut used = vec![false; clusters.clusters().len()];
    let mut stack = vec![Node::Place(p)];
    used[clusters.index_of_place(p)] = true;
    let truncated = extend_rooted(net, &clusters, c, &mut stack, &mut used, &mut out, limit);
    (out, truncated)
}

fn extend_rooted(
    net: &PetriNet,
    clusters: &ClusterMap,
    c: &Cluster,
    stack: &mut Vec<Node>,
    used: &mut [bool],
    out: &mut Vec<NodePath>,
    limit: usize,
) -> bool {
    let p = stack.last().and_then(|n| n.as_place()).expect("ends in a place");
    if c.places().contains(&p) {
        if out.len() >= limit {
            return true;
        }
        out.push(NodePath::new_unchecked(stack.clone()));
        return false;
    }
    for &t in net.place_postset(p) {
        for &q in net.postset(t) {
            let k = clusters.index_of_place(q);
            if used[k] {
                continue;
            }
            used[k] = true;
            stack.push(Node::Transition(t));
            stack.push(Node::Place(q));
            let cut = extend_rooted(net, clusters, c, stack, used, out, limit);
            stack.truncate(stack.len() - 2);
            used[k] = false;
            if cut {
                return true;
            }
        }
    }
    false
}

/// The largest number of tokens that any reachable marking puts on the
/// places of `path` together.
pub fn path_max_tokens(rg: &ReachabilityGraph, path: &NodePath) -> Result<u64> {
    rg.require_complete()?;
    let places: BTreeSet<PlaceId> = path.places().collect();
    Ok(rg.markings().iter().map(|m| m.count_in(&places)).max().unwrap_or(0))
}

/// A reachable marking strictly above another one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Domination {
    pub larger: Marking,
    pub smaller: Marking,
}

/// With a cluster: every reachable `M' ≥ Mrk(c)` other than `Mrk(c)`.
/// Without: every pair of reachable markings `M1 > M2`.
///
/// Violations found on an incomplete graph are genuine and are returned. An
/// incomplete graph without violations proves nothing and is an error.
pub fn check_no_domination(rg: &ReachabilityGraph, c: Option<&Cluster>) -> Result<Vec<Domination>> {
    let mut found = Vec::new();
    match c {
        Some(c) => {
            let mrk = c.marking();
            for m in rg.markings() {
                if mrk.lt(m) {
                    found.push(Domination {
                        larger: m.clone(),
                        smaller: mrk.clone(),
                    });
                }
            }
        }
        None => {
            let width = rg
                .markings()
                .iter()
                .flat_map(|m| m.support())
                .map(|p| p.index() + 1)
                .max()
                .unwrap_or(0);
            let supports: Vec<FixedBitSet> = rg
                .markings()
                .iter()
                .map(|m| {
                    let mut s = FixedBitSet::with_capacity(width);
                    for p in m.support() {
                        s.insert(p.index());
                    }
                    s
                })
                .collect();
            let totals: Vec<u64> = rg.markings().iter().map(Marking::total).collect();
            for a in 0..rg.len() {
                for b in 0..rg.len() {
                    if totals[a] > totals[b] && supports[b].is_subset(&supports[a]) && rg.marking(b).le(rg.marking(a)) {
                        found.push(Domination {
                            larger: rg.marking(a).clone(),
                            smaller: rg.marking(b).clone(),
                        });
                    }
                }
            }
        }
    }
    if found.is_empty() {
        rg.require_complete()?;
    }
    found.sort();
    Ok(found)
}
