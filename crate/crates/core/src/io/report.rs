//! Serializable reports. Markings are lists of place names with
//! multiplicity; clusters and paths are lists of node names.

use serde::Serialize;

use crate::home_cluster::{DetectionMode, HomeClusterReport, StructuralStats};
use crate::lucency::{ConflictPair, LucencyVerdict, Transparency};
use crate::net::{classify_structure, Cluster, ClusterMap, Marking, NodePath, PetriNet, StructureReport};
use crate::semantics::{BehaviorReport, ReachabilityGraph};
use crate::suite::{Counterexample, SuiteConfig, SuiteReport};

pub type MarkingNames = Vec<String>;

fn marking(net: &PetriNet, m: &Marking) -> MarkingNames {
    m.names(net)
}

#[derive(Clone, Debug, Serialize)]
pub struct NetSummary {
    pub name: String,
    pub places: usize,
    pub transitions: usize,
    pub arcs: usize,
    pub initial_marking: MarkingNames,
}

impl NetSummary {
    pub fn new(net: &PetriNet, m0: &Marking) -> Self {
        NetSummary {
            name: net.name().to_string(),
            places: net.place_count(),
            transitions: net.transition_count(),
            arcs: net.arc_count(),
            initial_marking: marking(net, m0),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BehaviorJson {
    pub states: usize,
    pub edges: usize,
    pub bounded: bool,
    pub bound: Option<u32>,
    pub safe: bool,
    pub live: bool,
    pub deadlock_free: bool,
    pub dead_places: Vec<String>,
    pub dead_transitions: Vec<String>,
    pub home_markings: Vec<MarkingNames>,
    pub dead_markings: Vec<MarkingNames>,
}

impl BehaviorJson {
    pub fn new(net: &PetriNet, rg: &ReachabilityGraph, b: &BehaviorReport) -> Self {
        BehaviorJson {
            states: rg.len(),
            edges: rg.edges().len(),
            bounded: b.bounded,
            bound: b.bound_k,
            safe: b.safe,
            live: b.live,
            deadlock_free: b.deadlock_free,
            dead_places: b.dead_places.iter().map(|&p| net.place_name(p).to_string()).collect(),
            dead_transitions: b
                .dead_transitions
                .iter()
                .map(|&t| net.transition_name(t).to_string())
                .collect(),
            home_markings: b.home_markings.iter().map(|m| marking(net, m)).collect(),
            dead_markings: b.dead_markings.iter().map(|m| marking(net, m)).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeReport {
    pub command: &'static str,
    pub net: NetSummary,
    pub structure: StructureReport,
    pub clusters: Vec<Vec<String>>,
    /// `None` when the net is unbounded.
    pub behavior: Option<BehaviorJson>,
    pub unbounded_witness: Option<(MarkingNames, MarkingNames)>,
}

impl AnalyzeReport {
    pub fn new(net: &PetriNet, m0: &Marking, behavior: Option<BehaviorJson>) -> Self {
        AnalyzeReport {
            command: "analyze",
            net: NetSummary::new(net, m0),
            structure: classify_structure(net),
            clusters: ClusterMap::new(net).clusters().iter().map(|c| c.names(net)).collect(),
            behavior,
            unbounded_witness: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub first: MarkingNames,
    pub second: MarkingNames,
    pub enabled: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LucencyReport {
    pub command: &'static str,
    pub net: NetSummary,
    pub lucent: bool,
    pub unbounded: bool,
    pub states: Option<usize>,
    pub witness: Option<Witness>,
    pub fully_transparent: Option<bool>,
    pub opaque_markings: Vec<MarkingNames>,
}

impl LucencyReport {
    pub fn new(
        net: &PetriNet,
        m0: &Marking,
        rg: Option<&ReachabilityGraph>,
        verdict: &LucencyVerdict,
        transparency: Option<&Transparency>,
    ) -> Self {
        let witness = verdict.witness.as_ref().map(|(a, b)| Witness {
            first: marking(net, a),
            second: marking(net, b),
            enabled: crate::semantics::enabled(net, a)
                .into_iter()
                .map(|t| net.transition_name(t).to_string())
                .collect(),
        });
        LucencyReport {
            command: "lucency",
            net: NetSummary::new(net, m0),
            lucent: verdict.lucent,
            unbounded: verdict.unbounded,
            states: rg.map(ReachabilityGraph::len),
            witness,
            fully_transparent: transparency.map(|t| t.fully_transparent),
            opaque_markings: transparency
                .map(|t| {
                    t.per_marking
                        .iter()
                        .filter(|(_, ok)| !ok)
                        .map(|(m, _)| marking(net, m))
                        .collect()
                })
                .unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterEntry {
    pub nodes: Vec<String>,
    pub in_conn: bool,
    pub behavioral_home: Option<bool>,
    pub short_circuit_live_bounded: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomeClustersJson {
    pub command: &'static str,
    pub net: NetSummary,
    pub mode: DetectionMode,
    pub home_clusters: Vec<Vec<String>>,
    pub clusters: Vec<ClusterEntry>,
    pub stats: Option<StructuralStats>,
    pub disagreements: Vec<Vec<String>>,
}

impl HomeClustersJson {
    pub fn new(net: &PetriNet, m0: &Marking, r: &HomeClusterReport) -> Self {
        HomeClustersJson {
            command: "home-clusters",
            net: NetSummary::new(net, m0),
            mode: r.mode,
            home_clusters: r.home_clusters.iter().map(|c| c.names(net)).collect(),
            clusters: r
                .per_cluster
                .iter()
                .map(|v| ClusterEntry {
                    nodes: v.cluster.names(net),
                    in_conn: v.in_conn,
                    behavioral_home: v.behavioral_home,
                    short_circuit_live_bounded: v.short_circuit_live_bounded,
                })
                .collect(),
            stats: r.stats,
            disagreements: r.disagreements.iter().map(|c| c.names(net)).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConflictPairJson {
    pub m1: MarkingNames,
    pub m2: MarkingNames,
    pub agree: MarkingNames,
    pub disagree1: MarkingNames,
    pub disagree2: MarkingNames,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConflictPairsReport {
    pub command: &'static str,
    pub net: NetSummary,
    pub states: usize,
    pub pairs: Vec<ConflictPairJson>,
}

impl ConflictPairsReport {
    pub fn new(net: &PetriNet, m0: &Marking, states: usize, pairs: &[ConflictPair]) -> Self {
        ConflictPairsReport {
            command: "conflict-pairs",
            net: NetSummary::new(net, m0),
            states,
            pairs: pairs
                .iter()
                .map(|c| ConflictPairJson {
                    m1: marking(net, &c.m1),
                    m2: marking(net, &c.m2),
                    agree: marking(net, &c.agree),
                    disagree1: marking(net, &c.disagree1),
                    disagree2: marking(net, &c.disagree2),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PathJson {
    pub nodes: Vec<String>,
    pub max_tokens: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathsReport {
    pub command: &'static str,
    pub net: NetSummary,
    pub cluster: Vec<String>,
    pub home_cluster: bool,
    pub paths: Vec<PathJson>,
    /// Places with no rooted disentangled path found by the search,
    /// because they are never marked.
    pub dead_places: Vec<String>,
    pub truncated: bool,
}

impl PathsReport {
    pub fn new(net: &PetriNet, m0: &Marking, cluster: &Cluster, home_cluster: bool) -> Self {
        PathsReport {
            command: "paths",
            net: NetSummary::new(net, m0),
            cluster: cluster.names(net),
            home_cluster,
            paths: Vec::new(),
            dead_places: Vec::new(),
            truncated: false,
        }
    }

    pub fn push(&mut self, net: &PetriNet, path: &NodePath, max_tokens: u64) {
        self.paths.push(PathJson {
            nodes: path.names(net),
            max_tokens,
        });
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NetTextReport {
    /// `generate`, `short-circuit` or `dot`.
    pub command: &'static str,
    pub net: NetSummary,
    /// Net file text, or DOT for `dot`.
    pub text: String,
    pub cluster: Option<Vec<String>>,
    pub added_transition: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckTheoremsReport {
    pub command: &'static str,
    pub config: SuiteConfig,
    pub passed: bool,
    pub summary: SuiteReport,
    pub failures_by_property: std::collections::BTreeMap<String, usize>,
}

impl CheckTheoremsReport {
    pub fn new(config: SuiteConfig, summary: SuiteReport) -> Self {
        let mut failures_by_property = std::collections::BTreeMap::new();
        for Counterexample { property, .. } in &summary.counterexamples {
            *failures_by_property.entry(property.clone()).or_insert(0) += 1;
        }
        CheckTheoremsReport {
            command: "check-theorems",
            config,
            passed: summary.passed(),
            summary,
            failures_by_property,
        }
    }
}
