//! Static net structure: places, transitions, and the flow relation.
//!
//! Identifiers are opaque strings. Internally every place and transition is
//! addressed by a dense index assigned in lexicographic order of its
//! identifier, so iteration order is deterministic and matches name order.

mod cluster;
mod marking;
mod path;
mod structure;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cluster::{cluster_marking, compute_clusters, Cluster, ClusterMap};
pub use marking::Marking;
pub use path::{path_predicates, NodePath, PathClass};
pub use structure::{classify_structure, is_strongly_connected, StructureReport};

/// Index of a place in its net.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaceId(pub(crate) u32);

/// Index of a transition in its net.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionId(pub(crate) u32);

impl PlaceId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl TransitionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A node of the bipartite net graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Place(PlaceId),
    Transition(TransitionId),
}

impl Node {
    pub fn as_place(self) -> Option<PlaceId> {
        match self {
            Node::Place(p) => Some(p),
            Node::Transition(_) => None,
        }
    }

    pub fn as_transition(self) -> Option<TransitionId> {
        match self {
            Node::Transition(t) => Some(t),
            Node::Place(_) => None,
        }
    }
}

impl From<PlaceId> for Node {
    fn from(p: PlaceId) -> Self {
        Node::Place(p)
    }
}

impl From<TransitionId> for Node {
    fn from(t: TransitionId) -> Self {
        Node::Transition(t)
    }
}

/// A directed arc between two named nodes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arc {
    pub from: String,
    pub to: String,
}

/// An ordinary Petri net `(P, T, F)`.
///
/// Values are immutable once built; use [`PetriNet::to_builder`] to derive a
/// modified copy.
#[derive(Clone, PartialEq, Eq)]
pub struct PetriNet {
    name: String,
    places: Vec<String>,
    transitions: Vec<String>,
    place_index: HashMap<String, PlaceId>,
    transition_index: HashMap<String, TransitionId>,
    // •t and t• per transition, sorted.
    pre_t: Vec<Vec<PlaceId>>,
    post_t: Vec<Vec<PlaceId>>,
    // •p and p• per place, sorted.
    pre_p: Vec<Vec<TransitionId>>,
    post_p: Vec<Vec<TransitionId>>,
    // Transitions with an empty preset; always enabled.
    unguarded: Vec<TransitionId>,
}

impl fmt::Debug for PetriNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PetriNet")
            .field("name", &self.name)
            .field("places", &self.places)
            .field("transitions", &self.transitions)
            .field("arcs", &self.arcs().collect::<Vec<_>>())
            .finish()
    }
}

impl PetriNet {
    pub fn builder(name: impl Into<String>) -> NetBuilder {
        NetBuilder::new(name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn node_count(&self) -> usize {
        self.places.len() + self.transitions.len()
    }

    pub fn arc_count(&self) -> usize {
        self.pre_t.iter().chain(&self.post_t).map(Vec::len).sum()
    }

    pub fn places(&self) -> impl ExactSizeIterator<Item = PlaceId> + '_ {
        (0..self.places.len() as u32).map(PlaceId)
    }

    pub fn transitions(&self) -> impl ExactSizeIterator<Item = TransitionId> + '_ {
        (0..self.transitions.len() as u32).map(TransitionId)
    }

    /// All nodes, places first, each group in identifier order.
    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.places()
            .map(Node::Place)
            .chain(self.transitions().map(Node::Transition))
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.index()]
    }

    pub fn transition_name(&self, t: TransitionId) -> &str {
        &self.transitions[t.index()]
    }

    pub fn node_name(&self, n: Node) -> &str {
        match n {
            Node::Place(p) => self.place_name(p),
            Node::Transition(t) => self.transition_name(t),
        }
    }

    pub fn place_id(&self, name: &str) -> Result<PlaceId> {
        self.place_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::NotInNet(name.to_string()))
    }

    pub fn transition_id(&self, name: &str) -> Result<TransitionId> {
        self.transition_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::NotInNet(name.to_string()))
    }

    pub fn node_id(&self, name: &str) -> Result<Node> {
        if let Some(&p) = self.place_index.get(name) {
            return Ok(Node::Place(p));
        }
        self.transition_id(name).map(Node::Transition)
    }

    pub fn has_place(&self, name: &str) -> bool {
        self.place_index.contains_key(name)
    }

    pub fn has_transition(&self, name: &str) -> bool {
        self.transition_index.contains_key(name)
    }

    /// Input places `•t`.
    pub fn preset(&self, t: TransitionId) -> &[PlaceId] {
        &self.pre_t[t.index()]
    }

    /// Output places `t•`.
    pub fn postset(&self, t: TransitionId) -> &[PlaceId] {
        &self.post_t[t.index()]
    }

    /// Input transitions `•p`.
    pub fn place_preset(&self, p: PlaceId) -> &[TransitionId] {
        &self.pre_p[p.index()]
    }

    /// Output transitions `p•`.
    pub fn place_postset(&self, p: PlaceId) -> &[TransitionId] {
        &self.post_p[p.index()]
    }

    /// Output nodes of any node.
    pub fn successors(&self, n: Node) -> Vec<Node> {
        match n {
            Node::Place(p) => self.place_postset(p).iter().map(|&t| t.into()).collect(),
            Node::Transition(t) => self.postset(t).iter().map(|&p| p.into()).collect(),
        }
    }

    /// Input nodes of any node.
    pub fn predecessors(&self, n: Node) -> Vec<Node> {
        match n {
            Node::Place(p) => self.place_preset(p).iter().map(|&t| t.into()).collect(),
            Node::Transition(t) => self.preset(t).iter().map(|&p| p.into()).collect(),
        }
    }

    /// Transitions without input places.
    pub fn unguarded_transitions(&self) -> &[TransitionId] {
        &self.unguarded
    }

    pub fn has_arc(&self, from: Node, to: Node) -> bool {
        match (from, to) {
            (Node::Place(p), Node::Transition(t)) => self.pre_t[t.index()].binary_search(&p).is_ok(),
            (Node::Transition(t), Node::Place(p)) => self.post_t[t.index()].binary_search(&p).is_ok(),
            _ => false,
        }
    }

    /// `(•X, X•)` for a set of nodes, given by name.
    pub fn preset_postset<S: AsRef<str>>(&self, names: &[S]) -> Result<(BTreeSet<Node>, BTreeSet<Node>)> {
        let mut pre = BTreeSet::new();
        let mut post = BTreeSet::new();
        for name in names {
            let n = self.node_id(name.as_ref())?;
            pre.extend(self.predecessors(n));
            post.extend(self.successors(n));
        }
        Ok((pre, post))
    }

    /// Every arc as a node pair: place→transition arcs first, then
    /// transition→place arcs, each in index order.
    pub fn arcs(&self) -> impl Iterator<Item = (Node, Node)> + '_ {
        let inputs = self.transitions().flat_map(move |t| {
            self.preset(t)
                .iter()
                .map(move |&p| (Node::Place(p), Node::Transition(t)))
        });
        let outputs = self.transitions().flat_map(move |t| {
            self.postset(t)
                .iter()
                .map(move |&p| (Node::Transition(t), Node::Place(p)))
        });
        inputs.chain(outputs)
    }

    /// A builder pre-populated with this net.
    pub fn to_builder(&self) -> NetBuilder {
        let mut b = NetBuilder::new(self.name.clone());
        for p in self.places() {
            b.add_place(self.place_name(p));
        }
        for t in self.transitions() {
            b.add_transition(self.transition_name(t));
        }
        for (from, to) in self.arcs() {
            b.arcs
                .insert((self.node_name(from).to_string(), self.node_name(to).to_string()));
        }
        b
    }

    /// Picks an identifier not used by any node, starting from `base` and
    /// appending `_1`, `_2`, ... on collision.
    pub fn fresh_name(&self, base: &str) -> String {
        if !self.place_index.contains_key(base) && !self.transition_index.contains_key(base) {
            return base.to_string();
        }
        (1..)
            .map(|i| format!("{base}_{i}"))
            .find(|n| !self.place_index.contains_key(n) && !self.transition_index.contains_key(n))
            .expect("unbounded suffix search")
    }

    /// Nodes reachable along directed arcs from `start`, including `start`.
    pub fn forward_closure(&self, start: impl IntoIterator<Item = Node>) -> BTreeSet<Node> {
        let mut seen: BTreeSet<Node> = BTreeSet::new();
        let mut queue: VecDeque<Node> = VecDeque::new();
        for n in start {
            if seen.insert(n) {
                queue.push_back(n);
            }
        }
        while let Some(n) = queue.pop_front() {
            for s in self.successors(n) {
                if seen.insert(s) {
                    queue.push_back(s);
                }
            }
        }
        seen
    }
}

/// Incremental construction of a [`PetriNet`]. All invariants are checked by
/// [`NetBuilder::build`].
#[derive(Clone, Debug, Default)]
pub struct NetBuilder {
    name: String,
    places: BTreeSet<String>,
    transitions: BTreeSet<String>,
    arcs: BTreeSet<(String, String)>,
}

impl NetBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_place(&mut self, id: impl Into<String>) -> &mut Self {
        self.places.insert(id.into());
        self
    }

    pub fn add_transition(&mut self, id: impl Into<String>) -> &mut Self {
        self.transitions.insert(id.into());
        self
    }

    /// Adds an arc. Returns an error if the arc is already present.
    pub fn add_arc(&mut self, from: impl Into<String>, to: impl Into<String>) -> Result<&mut Self> {
        let (from, to) = (from.into(), to.into());
        if !self.arcs.insert((from.clone(), to.clone())) {
            return Err(Error::InvalidNet(format!("duplicate arc {from} -> {to}")));
        }
        Ok(self)
    }

    /// Adds a transition together with its input and output arcs.
    pub fn add_transition_with<S: AsRef<str>>(&mut self, id: &str, inputs: &[S], outputs: &[S]) -> Result<&mut Self> {
        self.add_transition(id);
        for p in inputs {
            self.add_arc(p.as_ref(), id)?;
        }
        for p in outputs {
            self.add_arc(id, p.as_ref())?;
        }
        Ok(self)
    }

    pub fn has_node(&self, id: &str) -> bool {
        self.places.contains(id) || self.transitions.contains(id)
    }

    /// Drops every node not in `keep` together with its arcs.
    pub fn retain_nodes(&mut self, keep: &BTreeSet<String>) -> &mut Self {
        self.places.retain(|p| keep.contains(p));
        self.transitions.retain(|t| keep.contains(t));
        self.arcs.retain(|(a, b)| keep.contains(a) && keep.contains(b));
        self
    }

    pub fn set_name(&mut self, name: impl Into<String>) -> &mut Self {
        self.name = name.into();
        self
    }

    pub fn build(&self) -> Result<PetriNet> {
        if self.places.is_empty() {
            return Err(Error::InvalidNet("net has no places".into()));
        }
        if self.transitions.is_empty() {
            return Err(Error::InvalidNet("net has no transitions".into()));
        }
        if let Some(both) = self.places.intersection(&self.transitions).next() {
            return Err(Error::InvalidNet(format!("`{both}` is both a place and a transition")));
        }
        let places: Vec<String> = self.places.iter().cloned().collect();
        let transitions: Vec<String> = self.transitions.iter().cloned().collect();
        let place_index: HashMap<String, PlaceId> = places
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), PlaceId(i as u32)))
            .collect();
        let transition_index: HashMap<String, TransitionId> = transitions
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), TransitionId(i as u32)))
            .collect();

        let mut pre_t = vec![Vec::new(); transitions.len()];
        let mut post_t = vec![Vec::new(); transitions.len()];
        let mut pre_p = vec![Vec::new(); places.len()];
        let mut post_p = vec![Vec::new(); places.len()];
        for (from, to) in &self.arcs {
            if let (Some(&p), Some(&t)) = (place_index.get(from), transition_index.get(to)) {
                pre_t[t.index()].push(p);
                post_p[p.index()].push(t);
                continue;
            }
            match (transition_index.get(from), place_index.get(to)) {
                (Some(&t), Some(&p)) => {
                    post_t[t.index()].push(p);
                    pre_p[p.index()].push(t);
                }
                _ => {
                    for end in [from, to] {
                        if !place_index.contains_key(end) && !transition_index.contains_key(end) {
                            return Err(Error::InvalidNet(format!("arc endpoint `{end}` is not declared")));
                        }
                    }
                    return Err(Error::InvalidNet(format!(
                        "arc {from} -> {to} does not connect a place and a transition"
                    )));
                }
            }
        }
        for v in pre_t.iter_mut().chain(post_t.iter_mut()) {
            v.sort_unstable();
        }
        for v in pre_p.iter_mut().chain(post_p.iter_mut()) {
            v.sort_unstable();
        }

        let unguarded = (0..transitions.len() as u32)
            .map(TransitionId)
            .filter(|t| pre_t[t.index()].is_empty())
            .collect();
        let net = PetriNet {
            name: self.name.clone(),
            places,
            transitions,
            place_index,
            transition_index,
            pre_t,
            post_t,
            pre_p,
            post_p,
            unguarded,
        };
        if !weakly_connected(&net) {
            return Err(Error::InvalidNet("net is not weakly connected".into()));
        }
        Ok(net)
    }
}

fn weakly_connected(net: &PetriNet) -> bool {
    let mut seen = vec![false; net.node_count()];
    let slot = |n: Node| match n {
        Node::Place(p) => p.index(),
        Node::Transition(t) => net.place_count() + t.index(),
    };
    let mut stack = vec![Node::Place(PlaceId(0))];
    seen[0] = true;
    let mut count = 1;
    while let Some(n) = stack.pop() {
        for m in net.successors(n).into_iter().chain(net.predecessors(n)) {
            if !seen[slot(m)] {
                seen[slot(m)] = true;
                count += 1;
                stack.push(m);
            }
        }
    }
    count == net.node_count()
}
