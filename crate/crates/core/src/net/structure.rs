use serde::{Deserialize, Serialize};

use super::{Node, PetriNet, PlaceId};

/// Structural classification of a net.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    /// Any two transitions have equal or disjoint presets.
    pub free_choice: bool,
    /// Every transition has at least one input and one output place.
    pub proper: bool,
    pub strongly_connected: bool,
    /// State machine: every transition has at most one input and one output place.
    pub p_net: bool,
    /// Marked graph: every place has at most one input and one output transition.
    pub t_net: bool,
}

pub fn classify_structure(net: &PetriNet) -> StructureReport {
    StructureReport {
        free_choice: is_free_choice(net),
        proper: net
            .transitions()
            .all(|t| !net.preset(t).is_empty() && !net.postset(t).is_empty()),
        strongly_connected: is_strongly_connected(net),
        p_net: net
            .transitions()
            .all(|t| net.preset(t).len() <= 1 && net.postset(t).len() <= 1),
        t_net: net
            .places()
            .all(|p| net.place_preset(p).len() <= 1 && net.place_postset(p).len() <= 1),
    }
}

// A net is free-choice iff every place's output transitions all have the
// same preset: for two transitions with overlapping presets there is a
// shared place, and the presets must then be equal.
fn is_free_choice(net: &PetriNet) -> bool {
    net.places().all(|p: PlaceId| {
        let consumers = net.place_postset(p);
        consumers.windows(2).all(|w| net.preset(w[0]) == net.preset(w[1]))
    })
}

pub fn is_strongly_connected(net: &PetriNet) -> bool {
    let start = Node::Place(PlaceId(0));
    if net.forward_closure([start]).len() != net.node_count() {
        return false;
    }
    let mut seen = std::collections::BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(n) = stack.pop() {
        for m in net.predecessors(n) {
            if seen.insert(m) {
                stack.push(m);
            }
        }
    }
    seen.len() == net.node_count()
}
