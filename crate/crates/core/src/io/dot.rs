//! Graphviz export.

use std::fmt::Write as _;

use crate::net::{Marking, Node, PetriNet};

const PALETTE: [&str; 4] = ["crimson", "royalblue", "darkgreen", "darkorange"];

/// A named node set drawn in its own colour.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Highlight {
    pub label: String,
    pub nodes: Vec<Node>,
}

impl Highlight {
    pub fn new(label: impl Into<String>, nodes: impl IntoIterator<Item = Node>) -> Self {
        Highlight {
            label: label.into(),
            nodes: nodes.into_iter().collect(),
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            _ => out.push(ch),
        }
    }
    out.push('"');
    out
}

fn tokens(count: u32) -> String {
    match count {
        0 => String::new(),
        1..=3 => "•".repeat(count as usize),
        n => n.to_string(),
    }
}

/// Places are circles, transitions boxes. A node in several highlight sets
/// takes the colour of the first.
pub fn export_dot(net: &PetriNet, marking: Option<&Marking>, highlights: &[Highlight]) -> String {
    let colour_of = |n: Node| {
        highlights
            .iter()
            .position(|h| h.nodes.contains(&n))
            .map(|i| (PALETTE[i % PALETTE.len()], highlights[i].label.as_str()))
    };
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(net.name())).unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    for p in net.places() {
        let name = net.place_name(p);
        let count = marking.map_or(0, |m| m.get(p));
        let mut label = quote(name);
        if count > 0 {
            label.insert_str(label.len() - 1, &format!("\\n{}", tokens(count)));
        }
        let mut attrs = format!("shape=circle, label={label}");
        if let Some((colour, tag)) = colour_of(Node::Place(p)) {
            write!(attrs, ", color={colour}, penwidth=2.5, tooltip={}", quote(tag)).unwrap();
        }
        writeln!(out, "  {} [{attrs}];", quote(name)).unwrap();
    }
    for t in net.transitions() {
        let name = net.transition_name(t);
        let mut attrs = format!("shape=box, label={}", quote(name));
        if let Some((colour, tag)) = colour_of(Node::Transition(t)) {
            write!(attrs, ", color={colour}, penwidth=2.5, tooltip={}", quote(tag)).unwrap();
        }
        writeln!(out, "  {} [{attrs}];", quote(name)).unwrap();
    }
    for (from, to) in net.arcs() {
        writeln!(out, "  {} -> {};", quote(net.node_name(from)), quote(net.node_name(to))).unwrap();
    }
    out.push_str("}\n");
    out
}
