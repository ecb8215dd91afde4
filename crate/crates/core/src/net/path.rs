use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ClusterMap, Node, PetriNet, PlaceId};
use crate::error::{Error, Result};

/// A non-empty node sequence where consecutive nodes are joined by an arc.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePath {
    nodes: Vec<Node>,
}

impl NodePath {
    pub fn new(net: &PetriNet, nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidPath("path is empty".into()));
        }
        for w in nodes.windows(2) {
            if !net.has_arc(w[0], w[1]) {
                return Err(Error::InvalidPath(format!(
                    "no arc {} -> {}",
                    net.node_name(w[0]),
                    net.node_name(w[1])
                )));
            }
        }
        Ok(NodePath { nodes })
    }

    pub fn from_names<S: AsRef<str>>(net: &PetriNet, names: &[S]) -> Result<Self> {
        let nodes = names
            .iter()
            .map(|n| net.node_id(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        NodePath::new(net, nodes)
    }

    pub(crate) fn new_unchecked(nodes: Vec<Node>) -> Self {
        debug_assert!(!nodes.is_empty());
        NodePath { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> Node {
        self.nodes[0]
    }

    pub fn last(&self) -> Node {
        *self.nodes.last().expect("paths are non-empty")
    }

    /// Places on the path, in order, with repetitions.
    pub fn places(&self) -> impl Iterator<Item = PlaceId> + '_ {
        self.nodes.iter().filter_map(|n| n.as_place())
    }

    pub fn names(&self, net: &PetriNet) -> Vec<String> {
        self.nodes.iter().map(|&n| net.node_name(n).to_string()).collect()
    }

    pub fn display(&self, net: &PetriNet) -> String {
        format!("<{}>", self.names(net).join(","))
    }
}

/// Classification flags of a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathClass {
    /// No node occurs twice.
    pub elementary: bool,
    /// Elementary and the first node is an output of the last.
    pub circuit: bool,
    /// Starts and ends with a place, and no two of its places share a cluster.
    pub disentangled: bool,
    /// Disentangled and the last node lies in the given place set.
    pub q_rooted: bool,
}

pub fn path_predicates(net: &PetriNet, path: &NodePath, q: Option<&BTreeSet<PlaceId>>) -> PathClass {
    let clusters = ClusterMap::new(net);
    classify_with(net, &clusters, path, q)
}

pub(crate) fn classify_with(
    net: &PetriNet,
    clusters: &ClusterMap,
    path: &NodePath,
    q: Option<&BTreeSet<PlaceId>>,
) -> PathClass {
    let nodes = path.nodes();
    let distinct: BTreeSet<Node> = nodes.iter().copied().collect();
    let elementary = distinct.len() == nodes.len();
    let circuit = elementary && net.has_arc(path.last(), path.first());

    let ends_are_places = path.first().as_place().is_some() && path.last().as_place().is_some();
    let mut seen_clusters = BTreeSet::new();
    let disjoint_clusters = path.places().all(|p| seen_clusters.insert(clusters.index_of_place(p)));
    let disentangled = ends_are_places && disjoint_clusters;

    let q_rooted = disentangled
        && match (q, path.last().as_place()) {
            (Some(q), Some(last)) => q.contains(&last),
            _ => false,
        };
    PathClass {
        elementary,
        circuit,
        disentangled,
        q_rooted,
    }
}
