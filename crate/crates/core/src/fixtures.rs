//! The three example nets used throughout the documentation and tests.

use crate::io::format::parse_net;
use crate::net::{Marking, PetriNet};

pub const N1_TEXT: &str = include_str!("../fixtures/n1.net");
pub const N2_TEXT: &str = include_str!("../fixtures/n2.net");
pub const N3_TEXT: &str = include_str!("../fixtures/n3.net");

fn load(text: &str) -> (PetriNet, Marking) {
    parse_net(text).expect("bundled fixture parses")
}

/// Terminating free-choice net with home marking `[p4]`.
pub fn n1() -> (PetriNet, Marking) {
    load(N1_TEXT)
}

/// Non-free-choice net with six reachable markings.
pub fn n2() -> (PetriNet, Marking) {
    load(N2_TEXT)
}

/// Live, safe, strongly connected marked graph without a home cluster.
pub fn n3() -> (PetriNet, Marking) {
    load(N3_TEXT)
}

/// All fixtures by lowercase name.
pub fn all() -> Vec<(&'static str, PetriNet, Marking)> {
    [("n1", N1_TEXT), ("n2", N2_TEXT), ("n3", N3_TEXT)]
        .into_iter()
        .map(|(name, text)| {
            let (net, m) = load(text);
            (name, net, m)
        })
        .collect()
}
