//! Token game, reachability graphs, and behavioral verdicts.

use std::collections::{BTreeSet, HashMap, VecDeque};

use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{Marking, PetriNet, PlaceId, TransitionId};

/// Default exploration budget in markings.
pub const DEFAULT_CAP: usize = 1_000_000;

/// The structural data the firing rule needs. Implemented by [`PetriNet`]
/// and by lightweight derived views that avoid copying a whole net.
pub trait FiringRule {
    fn transition_count(&self) -> usize;
    fn inputs(&self, t: TransitionId) -> &[PlaceId];
    fn outputs(&self, t: TransitionId) -> &[PlaceId];
    /// Output transitions of a place.
    fn consumers(&self, p: PlaceId) -> &[TransitionId];
    /// Transitions with an empty preset.
    fn unguarded(&self) -> &[TransitionId];
}

impl FiringRule for PetriNet {
    fn transition_count(&self) -> usize {
        PetriNet::transition_count(self)
    }
    fn inputs(&self, t: TransitionId) -> &[PlaceId] {
        self.preset(t)
    }
    fn outputs(&self, t: TransitionId) -> &[PlaceId] {
        self.postset(t)
    }
    fn consumers(&self, p: PlaceId) -> &[TransitionId] {
        self.place_postset(p)
    }
    fn unguarded(&self) -> &[TransitionId] {
        self.unguarded_transitions()
    }
}

/// Enabled transitions in index order. Only consumers of marked places are
/// inspected, so the cost depends on the marking, not on the net size.
pub(crate) fn enabled_in<R: FiringRule + ?Sized>(rule: &R, m: &Marking) -> Vec<TransitionId> {
    let mut candidates: Vec<TransitionId> = m
        .support()
        .flat_map(|p| rule.consumers(p).iter().copied())
        .chain(rule.unguarded().iter().copied())
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    candidates.retain(|&t| rule.inputs(t).iter().all(|&p| m.contains(p)));
    candidates
}

/// `en(N, M)`.
pub fn enabled(net: &PetriNet, m: &Marking) -> BTreeSet<TransitionId> {
    enabled_in(net, m).into_iter().collect()
}

pub fn is_enabled(net: &PetriNet, m: &Marking, t: TransitionId) -> bool {
    net.preset(t).iter().all(|&p| m.contains(p))
}

/// `M' = (M − •t) + t•`.
pub fn fire(net: &PetriNet, m: &Marking, t: TransitionId) -> Result<Marking> {
    if t.index() >= net.transition_count() {
        return Err(Error::NotInNet(format!("transition #{}", t.index())));
    }
    m.step(net.preset(t), net.postset(t))
        .ok_or_else(|| Error::NotEnabled(net.transition_name(t).to_string()))
}

/// Fires `sequence` step by step; the first disabled step is reported with
/// its zero-based index.
pub fn fire_sequence(net: &PetriNet, m: &Marking, sequence: &[TransitionId]) -> Result<Marking> {
    let mut current = m.clone();
    for (index, &t) in sequence.iter().enumerate() {
        current = fire(net, &current, t).map_err(|e| match e {
            Error::NotEnabled(transition) => Error::SequenceNotEnabled { index, transition },
            other => other,
        })?;
    }
    Ok(current)
}

/// A labeled firing edge between two reachability-graph nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: usize,
    pub transition: TransitionId,
    pub to: usize,
}

/// Strongly connected components of a reachability graph and their DAG.
#[derive(Clone, Debug, Default)]
pub struct Condensation {
    component_of: Vec<usize>,
    components: Vec<Vec<usize>>,
    successors: Vec<BTreeSet<usize>>,
    terminal: Vec<usize>,
}

impl Condensation {
    fn build(node_count: usize, edges: &[Edge]) -> Self {
        let mut g: DiGraph<(), ()> = DiGraph::with_capacity(node_count, edges.len());
        for _ in 0..node_count {
            g.add_node(());
        }
        for e in edges {
            g.add_edge(NodeIndex::new(e.from), NodeIndex::new(e.to), ());
        }
        let mut components: Vec<Vec<usize>> = petgraph::algo::tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut v: Vec<usize> = c.into_iter().map(NodeIndex::index).collect();
                v.sort_unstable();
                v
            })
            .collect();
        components.sort_unstable_by_key(|c| c[0]);
        let mut component_of = vec![0; node_count];
        for (i, c) in components.iter().enumerate() {
            for &n in c {
                component_of[n] = i;
            }
        }
        let mut successors = vec![BTreeSet::new(); components.len()];
        for e in edges {
            let (a, b) = (component_of[e.from], component_of[e.to]);
            if a != b {
                successors[a].insert(b);
            }
        }
        let terminal = (0..components.len()).filter(|&c| successors[c].is_empty()).collect();
        Condensation {
            component_of,
            components,
            successors,
            terminal,
        }
    }

    pub fn component_of(&self, node: usize) -> usize {
        self.component_of[node]
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    /// Successor components in the condensation DAG.
    pub fn successors(&self, component: usize) -> &BTreeSet<usize> {
        &self.successors[component]
    }

    /// Components without outgoing edges.
    pub fn terminal(&self) -> &[usize] {
        &self.terminal
    }
}

/// Explored markings of a marked net. Node 0 is the initial marking.
#[derive(Clone, Debug)]
pub struct ReachabilityGraph {
    markings: Vec<Marking>,
    index: HashMap<Marking, usize>,
    enabled: Vec<Vec<TransitionId>>,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    complete: bool,
    condensation: Condensation,
}

impl ReachabilityGraph {
    pub fn root(&self) -> &Marking {
        &self.markings[0]
    }

    pub fn len(&self) -> usize {
        self.markings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markings.is_empty()
    }

    /// False when exploration stopped at the cap.
    pub fn complete(&self) -> bool {
        self.complete
    }

    pub fn markings(&self) -> &[Marking] {
        &self.markings
    }

    pub fn marking(&self, node: usize) -> &Marking {
        &self.markings[node]
    }

    pub fn node_of(&self, m: &Marking) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn contains(&self, m: &Marking) -> bool {
        self.index.contains_key(m)
    }

    /// Transitions enabled at a node, in index order. For nodes on the
    /// frontier of an incomplete graph this still reflects the marking.
    pub fn enabled(&self, node: usize) -> &[TransitionId] {
        &self.enabled[node]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.out[node].iter().map(move |&e| &self.edges[e])
    }

    /// The BFS-tree firing sequence from the root to `node`.
    pub fn path_to(&self, node: usize) -> Vec<TransitionId> {
        let mut steps = Vec::new();
        let mut current = node;
        while let Some(p) = self.parent[current] {
            let t = self
                .out_edges(p)
                .find(|e| e.to == current)
                .map(|e| e.transition)
                .expect("tree edge exists");
            steps.push(t);
            current = p;
        }
        steps.reverse();
        steps
    }

    pub fn condensation(&self) -> &Condensation {
        &self.condensation
    }

    pub(crate) fn require_complete(&self) -> Result<()> {
        if self.complete {
            Ok(())
        } else {
            Err(Error::IncompleteStateSpace)
        }
    }

    /// Number of distinct transitions enabled somewhere in each terminal
    /// component, in the order of [`Condensation::terminal`].
    pub fn terminal_coverage(&self) -> Vec<usize> {
        self.condensation
            .terminal
            .iter()
            .map(|&c| {
                let mut seen: BTreeSet<TransitionId> = BTreeSet::new();
                for &n in &self.condensation.components[c] {
                    seen.extend(self.enabled[n].iter().copied());
                }
                seen.len()
            })
            .collect()
    }
}

/// Why exploration stopped early.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct UnboundedWitness {
    pub smaller: Marking,
    pub larger: Marking,
}

/// Breadth-first exploration over any firing rule. Stops with a witness as
/// soon as a new marking strictly covers a marking on its own BFS-tree path
/// (that firing sequence can then be repeated forever).
pub(crate) fn explore_rule<R: FiringRule + ?Sized>(
    rule: &R,
    m0: &Marking,
    cap: usize,
    detect_unbounded: bool,
) -> std::result::Result<ReachabilityGraph, UnboundedWitness> {
    let cap = cap.max(1);
    let mut markings = vec![m0.clone()];
    let mut index = HashMap::from([(m0.clone(), 0usize)]);
    let mut enabled: Vec<Vec<TransitionId>> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut complete = true;
    let mut queue = VecDeque::from([0usize]);

    while let Some(node) = queue.pop_front() {
        let m = markings[node].clone();
        let en = enabled_in(rule, &m);
        let mut node_out = Vec::with_capacity(en.len());
        for &t in &en {
            let next = m
                .step(rule.inputs(t), rule.outputs(t))
                .expect("enabled transitions fire");
            let target = match index.get(&next) {
                Some(&existing) => existing,
                None => {
                    let mut ancestor = if detect_unbounded { Some(node) } else { None };
                    while let Some(a) = ancestor {
                        if markings[a].lt(&next) {
                            return Err(UnboundedWitness {
                                smaller: markings[a].clone(),
                                larger: next,
                            });
                        }
                        ancestor = parent[a];
                    }
                    if markings.len() >= cap {
                        complete = false;
                        continue;
                    }
                    let id = markings.len();
                    markings.push(next.clone());
                    index.insert(next, id);
                    parent.push(Some(node));
                    queue.push_back(id);
                    id
                }
            };
            node_out.push(edges.len());
            edges.push(Edge {
                from: node,
                transition: t,
                to: target,
            });
        }
        // Nodes are dequeued in id order, so these vectors stay aligned.
        debug_assert_eq!(enabled.len(), node);
        enabled.push(en);
        out.push(node_out);
    }

    let condensation = Condensation::build(markings.len(), &edges);
    Ok(ReachabilityGraph {
        markings,
        index,
        enabled,
        edges,
        out,
        parent,
        complete,
        condensation,
    })
}

fn unbounded_error(net: &PetriNet, w: UnboundedWitness) -> Error {
    Error::Unbounded {
        smaller: w.smaller.display(net).to_string(),
        larger: w.larger.display(net).to_string(),
    }
}

/// Explores `R(N, m0)` up to `cap` markings. The graph is returned even if
/// the cap was hit, with [`ReachabilityGraph::complete`] set to false.
pub fn explore_partial(net: &PetriNet, m0: &Marking, cap: usize) -> Result<ReachabilityGraph> {
    explore_rule(net, m0, cap, true).map_err(|w| unbounded_error(net, w))
}

/// The first `cap` markings in breadth-first order, without the
/// unboundedness check. Useful for inspecting a prefix of an infinite
/// state space.
pub fn explore_prefix(net: &PetriNet, m0: &Marking, cap: usize) -> ReachabilityGraph {
    explore_rule(net, m0, cap, false).expect("no unboundedness check")
}

/// Explores `R(N, m0)` to closure. Fails with [`Error::Unbounded`] on a
/// strictly growing firing sequence and with [`Error::StateSpaceExceeded`]
/// when more than `cap` markings are needed.
pub fn explore(net: &PetriNet, m0: &Marking, cap: usize) -> Result<ReachabilityGraph> {
    let rg = explore_partial(net, m0, cap)?;
    if !rg.complete {
        return Err(Error::StateSpaceExceeded { cap });
    }
    Ok(rg)
}

/// Behavioral verdicts read off a complete reachability graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorReport {
    pub bounded: bool,
    pub bound_k: Option<u32>,
    pub safe: bool,
    pub live: bool,
    pub deadlock_free: bool,
    #[serde(skip)]
    pub dead_places: BTreeSet<PlaceId>,
    #[serde(skip)]
    pub dead_transitions: BTreeSet<TransitionId>,
    #[serde(skip)]
    pub home_markings: BTreeSet<Marking>,
    #[serde(skip)]
    pub dead_markings: BTreeSet<Marking>,
}

pub fn behavior(net: &PetriNet, rg: &ReachabilityGraph) -> Result<BehaviorReport> {
    rg.require_complete()?;
    let bound = rg.markings.iter().map(Marking::max_count).max().unwrap_or(0);

    let mut fired: BTreeSet<TransitionId> = BTreeSet::new();
    for e in &rg.edges {
        fired.insert(e.transition);
    }
    let dead_transitions = net.transitions().filter(|t| !fired.contains(t)).collect();

    let mut marked: BTreeSet<PlaceId> = BTreeSet::new();
    for m in &rg.markings {
        marked.extend(m.support());
    }
    let dead_places = net.places().filter(|p| !marked.contains(p)).collect();

    let dead_markings: BTreeSet<Marking> = (0..rg.len())
        .filter(|&n| rg.out[n].is_empty())
        .map(|n| rg.markings[n].clone())
        .collect();

    // Every node reaches some terminal component and never leaves it, so the
    // net is live iff each terminal component enables every transition.
    let all = net.transition_count();
    let live = rg.terminal_coverage().iter().all(|&covered| covered == all);

    let home_markings = match rg.condensation.terminal() {
        [only] => rg.condensation.components[*only]
            .iter()
            .map(|&n| rg.markings[n].clone())
            .collect(),
        _ => BTreeSet::new(),
    };

    Ok(BehaviorReport {
        bounded: true,
        bound_k: Some(bound),
        safe: bound <= 1,
        live,
        deadlock_free: dead_markings.is_empty(),
        dead_places,
        dead_transitions,
        home_markings,
        dead_markings,
    })
}
