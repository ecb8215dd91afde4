use std::collections::BTreeSet;

use super::{Marking, Node, PetriNet, PlaceId, TransitionId};

/// A cluster: the smallest node set containing a seed node that is closed
/// under "a place brings its output transitions" and "a transition brings
/// its input places".
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cluster {
    places: BTreeSet<PlaceId>,
    transitions: BTreeSet<TransitionId>,
}

impl Cluster {
    pub fn new(places: BTreeSet<PlaceId>, transitions: BTreeSet<TransitionId>) -> Self {
        Cluster { places, transitions }
    }

    /// The cluster `[x]` of one node, computed directly from the closure
    /// rules.
    pub fn of(net: &PetriNet, seed: Node) -> Cluster {
        let mut places = BTreeSet::new();
        let mut transitions = BTreeSet::new();
        let mut stack = vec![seed];
        while let Some(n) = stack.pop() {
            match n {
                Node::Place(p) => {
                    if places.insert(p) {
                        stack.extend(net.place_postset(p).iter().map(|&t| Node::Transition(t)));
                    }
                }
                Node::Transition(t) => {
                    if transitions.insert(t) {
                        stack.extend(net.preset(t).iter().map(|&p| Node::Place(p)));
                    }
                }
            }
        }
        Cluster { places, transitions }
    }

    /// `Pl(C)`.
    pub fn places(&self) -> &BTreeSet<PlaceId> {
        &self.places
    }

    /// `Tr(C)`.
    pub fn transitions(&self) -> &BTreeSet<TransitionId> {
        &self.transitions
    }

    pub fn contains(&self, n: Node) -> bool {
        match n {
            Node::Place(p) => self.places.contains(&p),
            Node::Transition(t) => self.transitions.contains(&t),
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.places
            .iter()
            .map(|&p| Node::Place(p))
            .chain(self.transitions.iter().map(|&t| Node::Transition(t)))
    }

    pub fn len(&self) -> usize {
        self.places.len() + self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Mrk(C)`, see [`cluster_marking`].
    pub fn marking(&self) -> Marking {
        cluster_marking(self)
    }

    /// Member names, places first.
    pub fn names(&self, net: &PetriNet) -> Vec<String> {
        self.nodes().map(|n| net.node_name(n).to_string()).collect()
    }

    /// Lexicographically smallest member identifier.
    pub fn smallest_name<'a>(&self, net: &'a PetriNet) -> &'a str {
        self.nodes().map(|n| net.node_name(n)).min().unwrap_or("")
    }

    /// Carries the cluster over to another net by node name. Returns `None`
    /// if some member does not exist there.
    pub fn transfer(&self, from: &PetriNet, to: &PetriNet) -> Option<Cluster> {
        let places = self
            .places
            .iter()
            .map(|&p| to.place_id(from.place_name(p)).ok())
            .collect::<Option<BTreeSet<_>>>()?;
        let transitions = self
            .transitions
            .iter()
            .map(|&t| to.transition_id(from.transition_name(t)).ok())
            .collect::<Option<BTreeSet<_>>>()?;
        Some(Cluster { places, transitions })
    }
}

/// `Mrk(C)`: one token on every place of the cluster, the smallest marking
/// enabling all of its transitions.
pub fn cluster_marking(c: &Cluster) -> Marking {
    Marking::from_places(c.places.iter().copied())
}

/// All clusters of the net. They partition `P ∪ T` and are ordered by their
/// smallest member identifier.
pub fn compute_clusters(net: &PetriNet) -> Vec<Cluster> {
    ClusterMap::new(net).into_clusters()
}

/// Clusters of a net with a node → cluster lookup.
#[derive(Clone, Debug)]
pub struct ClusterMap {
    clusters: Vec<Cluster>,
    of_place: Vec<usize>,
    of_transition: Vec<usize>,
}

impl ClusterMap {
    pub fn new(net: &PetriNet) -> Self {
        let np = net.place_count();
        let mut uf = UnionFind::new(np + net.transition_count());
        for t in net.transitions() {
            for &p in net.preset(t) {
                uf.union(p.index(), np + t.index());
            }
        }
        let mut by_root: std::collections::HashMap<usize, Cluster> = Default::default();
        for p in net.places() {
            by_root
                .entry(uf.find(p.index()))
                .or_insert_with(|| Cluster::new(BTreeSet::new(), BTreeSet::new()))
                .places
                .insert(p);
        }
        for t in net.transitions() {
            by_root
                .entry(uf.find(np + t.index()))
                .or_insert_with(|| Cluster::new(BTreeSet::new(), BTreeSet::new()))
                .transitions
                .insert(t);
        }
        let mut clusters: Vec<Cluster> = by_root.into_values().collect();
        clusters.sort_by(|a, b| a.smallest_name(net).cmp(b.smallest_name(net)));

        let mut of_place = vec![0; np];
        let mut of_transition = vec![0; net.transition_count()];
        for (i, c) in clusters.iter().enumerate() {
            for &p in &c.places {
                of_place[p.index()] = i;
            }
            for &t in &c.transitions {
                of_transition[t.index()] = i;
            }
        }
        ClusterMap {
            clusters,
            of_place,
            of_transition,
        }
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn into_clusters(self) -> Vec<Cluster> {
        self.clusters
    }

    pub fn index_of_place(&self, p: PlaceId) -> usize {
        self.of_place[p.index()]
    }

    pub fn index_of_transition(&self, t: TransitionId) -> usize {
        self.of_transition[t.index()]
    }

    pub fn index_of(&self, n: Node) -> usize {
        match n {
            Node::Place(p) => self.index_of_place(p),
            Node::Transition(t) => self.index_of_transition(t),
        }
    }

    pub fn of(&self, n: Node) -> &Cluster {
        &self.clusters[self.index_of(n)]
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
