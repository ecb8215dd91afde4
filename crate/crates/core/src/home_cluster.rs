//! Home clusters and the short-circuited cleaned net `N_{C,M}`.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{classify_structure, Cluster, ClusterMap, Marking, Node, PetriNet, PlaceId, TransitionId};
use crate::semantics::{behavior, explore, explore_rule, FiringRule, ReachabilityGraph};

/// Prefix of the transition added by [`short_circuit`].
pub const SHORT_CIRCUIT_PREFIX: &str = "t_C__";

/// `conn(N, M)`: every node on a directed path starting in a place marked by
/// `m0`, including those places.
pub fn conn_nodes(net: &PetriNet, m0: &Marking) -> BTreeSet<Node> {
    net.forward_closure(m0.support().map(Node::Place))
}

fn conn_names(net: &PetriNet, m0: &Marking) -> BTreeSet<String> {
    conn_nodes(net, m0)
        .into_iter()
        .map(|n| net.node_name(n).to_string())
        .collect()
}

/// The restriction of `net` to [`conn_nodes`].
pub fn clean_net(net: &PetriNet, m0: &Marking) -> Result<PetriNet> {
    let mut b = net.to_builder();
    b.retain_nodes(&conn_names(net, m0));
    b.build().map_err(|e| match e {
        Error::InvalidNet(msg) => Error::CleanFailed(msg),
        other => other,
    })
}

/// Cleaning keeps the full preset of every retained transition. When it
/// does not, a retained transition loses an input place and may fire in
/// `N_{C,M}` although it is dead in `N`.
pub fn clean_keeps_presets(net: &PetriNet, m0: &Marking) -> bool {
    let conn = conn_nodes(net, m0);
    net.transitions()
        .filter(|&t| conn.contains(&Node::Transition(t)))
        .all(|t| net.preset(t).iter().all(|&p| conn.contains(&Node::Place(p))))
}

fn fresh_among(taken: &BTreeSet<String>, base: &str) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken.contains(n))
        .expect("unbounded suffix search")
}

/// `clean(net, m0)` with a fresh transition consuming `inputs` and marking
/// every place of `m0`. Always a valid net, since the fresh transition
/// touches every component of the cleaned net.
fn cleaned_with_fresh(
    net: &PetriNet,
    m0: &Marking,
    keep: &BTreeSet<String>,
    base: &str,
    inputs: &[&str],
) -> (PetriNet, String) {
    let name = fresh_among(keep, base);
    let outputs: Vec<&str> = m0.support().map(|p| net.place_name(p)).collect();
    let mut b = net.to_builder();
    b.retain_nodes(keep);
    b.add_transition_with(&name, inputs, &outputs)
        .expect("fresh transition has no arcs yet");
    let nc = b.build().expect("every kept node hangs off a marked place");
    (nc, name)
}

fn ensure_safe(net: &PetriNet, m0: &Marking, cap: usize) -> Result<ReachabilityGraph> {
    let rg = explore(net, m0, cap).map_err(|e| match e {
        Error::Unbounded { .. } => {
            Error::UnsafeInitialMarking(format!("{} is not safe: the net is unbounded", m0.display(net)))
        }
        other => other,
    })?;
    if rg.markings().iter().any(|m| m.max_count() > 1) {
        return Err(Error::UnsafeInitialMarking(format!(
            "{} reaches a marking with more than one token on a place",
            m0.display(net)
        )));
    }
    Ok(rg)
}

fn ensure_cluster(net: &PetriNet, c: &Cluster) -> Result<()> {
    let seed = c
        .nodes()
        .next()
        .ok_or_else(|| Error::NotInNet("empty cluster".into()))?;
    let in_range = match seed {
        Node::Place(p) => p.index() < net.place_count(),
        Node::Transition(t) => t.index() < net.transition_count(),
    };
    if !in_range || Cluster::of(net, seed) != *c {
        return Err(Error::NotInNet("not a cluster of this net".into()));
    }
    Ok(())
}

/// Name for the fresh transition `t_C`.
pub fn short_circuit_name(net: &PetriNet, c: &Cluster) -> String {
    net.fresh_name(&format!("{SHORT_CIRCUIT_PREFIX}{}", anchor_name(net, c)))
}

/// Adds a fresh transition consuming `Pl(c)` and producing one token on
/// every place marked by `m0`. `m0` must be safe for `net`.
pub fn short_circuit(net: &PetriNet, c: &Cluster, m0: &Marking, cap: usize) -> Result<PetriNet> {
    ensure_cluster(net, c)?;
    ensure_safe(net, m0, cap)?;
    Ok(short_circuit_unchecked(net, c, m0))
}

fn short_circuit_unchecked(net: &PetriNet, c: &Cluster, m0: &Marking) -> PetriNet {
    let name = short_circuit_name(net, c);
    let inputs: Vec<&str> = c.places().iter().map(|&p| net.place_name(p)).collect();
    let outputs: Vec<&str> = m0.support().map(|p| net.place_name(p)).collect();
    let mut b = net.to_builder();
    b.add_transition_with(&name, &inputs, &outputs)
        .expect("fresh transition has no arcs yet");
    b.build().expect("adding a transition keeps the net connected")
}

/// `N_{C,M}`: the cleaned net of `(net, m0)` short-circuited at `c`, with
/// `c` and `m0` carried over. Returns `None` if `c` is not inside `conn`.
pub fn short_circuited_clean_net(
    net: &PetriNet,
    c: &Cluster,
    m0: &Marking,
    cap: usize,
) -> Result<Option<(PetriNet, Cluster, Marking)>> {
    ensure_cluster(net, c)?;
    ensure_safe(net, m0, cap)?;
    let conn = conn_nodes(net, m0);
    if !c.nodes().all(|n| conn.contains(&n)) {
        return Ok(None);
    }
    let (nc, c_nc, m_nc, _) = materialize(net, m0, &conn_names(net, m0), c);
    Ok(Some((nc, c_nc, m_nc)))
}

fn anchor_name<'a>(net: &'a PetriNet, c: &Cluster) -> &'a str {
    c.places()
        .iter()
        .map(|&p| net.place_name(p))
        .min()
        .unwrap_or_else(|| c.smallest_name(net))
}

/// Builds `N_{C,M}` for a cluster inside `conn`, returning the carried over
/// cluster and marking and the id of `t_C`.
fn materialize(
    net: &PetriNet,
    m0: &Marking,
    keep: &BTreeSet<String>,
    c: &Cluster,
) -> (PetriNet, Cluster, Marking, TransitionId) {
    let inputs: Vec<&str> = c.places().iter().map(|&p| net.place_name(p)).collect();
    let base = format!("{SHORT_CIRCUIT_PREFIX}{}", anchor_name(net, c));
    let (nc, name) = cleaned_with_fresh(net, m0, keep, &base, &inputs);
    let c_nc = c.transfer(net, &nc).expect("cluster lies inside conn");
    let m_nc = m0.transfer(net, &nc).expect("marked places are kept");
    let t_c = nc.transition_id(&name).expect("fresh transition exists");
    (nc, c_nc, m_nc, t_c)
}

/// The short-circuited net as an overlay on a carrier net, the cleaned net
/// plus an input-free `t_C`, so each cluster check costs no more than the
/// arcs of `t_C`.
struct ShortCircuitView<'a> {
    base: &'a PetriNet,
    t_c: TransitionId,
    inputs: Vec<PlaceId>,
    consumers: HashMap<PlaceId, Vec<TransitionId>>,
    unguarded: Vec<TransitionId>,
}

impl<'a> ShortCircuitView<'a> {
    fn new(base: &'a PetriNet, t_c: TransitionId, c: &Cluster) -> Self {
        let inputs: Vec<PlaceId> = c.places().iter().copied().collect();
        let consumers = inputs
            .iter()
            .map(|&p| {
                let mut v = base.place_postset(p).to_vec();
                v.push(t_c);
                (p, v)
            })
            .collect();
        let mut unguarded: Vec<TransitionId> = base
            .unguarded_transitions()
            .iter()
            .copied()
            .filter(|&t| t != t_c)
            .collect();
        if inputs.is_empty() {
            unguarded.push(t_c);
        }
        ShortCircuitView {
            base,
            t_c,
            inputs,
            consumers,
            unguarded,
        }
    }
}

impl FiringRule for ShortCircuitView<'_> {
    fn transition_count(&self) -> usize {
        self.base.transition_count()
    }
    fn inputs(&self, t: TransitionId) -> &[PlaceId] {
        if t == self.t_c {
            &self.inputs
        } else {
            self.base.preset(t)
        }
    }
    fn outputs(&self, t: TransitionId) -> &[PlaceId] {
        self.base.postset(t)
    }
    fn consumers(&self, p: PlaceId) -> &[TransitionId] {
        match self.consumers.get(&p) {
            Some(v) => v,
            None => self.base.place_postset(p),
        }
    }
    fn unguarded(&self) -> &[TransitionId] {
        &self.unguarded
    }
}

/// Live and bounded from `m0` under `rule`. Unbounded nets answer false;
/// hitting the cap is an error.
fn live_and_bounded<R: FiringRule>(rule: &R, m0: &Marking, cap: usize) -> Result<bool> {
    match explore_rule(rule, m0, cap, true) {
        Err(_) => Ok(false),
        Ok(rg) if !rg.complete() => Err(Error::StateSpaceExceeded { cap }),
        Ok(rg) => {
            let all = rule.transition_count();
            Ok(rg.terminal_coverage().iter().all(|&n| n == all))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionMode {
    /// `Mrk(C)` is a home marking of the reachability graph.
    Behavioral,
    /// `N_{C,M}` is live and bounded.
    Structural,
    Both,
}

/// Verdicts for one cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterVerdict {
    pub cluster: Cluster,
    /// `None` in structural mode.
    pub behavioral_home: Option<bool>,
    pub in_conn: bool,
    /// `None` in behavioral mode and for clusters outside `conn`.
    pub short_circuit_live_bounded: Option<bool>,
}

/// Work performed by structural detection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralStats {
    pub clusters: usize,
    pub eligible_clusters: usize,
    /// The cleaned net does not depend on the cluster and is built once.
    pub clean_computations: usize,
    /// Per-cluster checks that consumed the cleaned net.
    pub clean_uses: usize,
    pub short_circuits: usize,
    pub live_bounded_decisions: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomeClusterReport {
    pub mode: DetectionMode,
    pub home_clusters: Vec<Cluster>,
    pub per_cluster: Vec<ClusterVerdict>,
    pub stats: Option<StructuralStats>,
    /// In `Both` mode: the clusters inside `conn` on which the two methods
    /// disagree. Empty whenever the theorem holds.
    pub disagreements: Vec<Cluster>,
}

pub fn find_home_clusters(net: &PetriNet, m0: &Marking, mode: DetectionMode, cap: usize) -> Result<HomeClusterReport> {
    let clusters = ClusterMap::new(net).into_clusters();
    let conn = conn_nodes(net, m0);
    let in_conn: Vec<bool> = clusters.iter().map(|c| c.nodes().all(|n| conn.contains(&n))).collect();

    let behavioral = match mode {
        DetectionMode::Structural => None,
        _ => {
            let rg = explore(net, m0, cap)?;
            let report = behavior(net, &rg)?;
            Some(
                clusters
                    .iter()
                    .map(|c| report.home_markings.contains(&c.marking()))
                    .collect::<Vec<bool>>(),
            )
        }
    };

    let (structural, stats) = match mode {
        DetectionMode::Behavioral => (None, None),
        _ => {
            let (verdicts, stats) = structural_detection(net, m0, &clusters, &in_conn, cap)?;
            (Some(verdicts), Some(stats))
        }
    };

    let per_cluster: Vec<ClusterVerdict> = clusters
        .iter()
        .enumerate()
        .map(|(i, c)| ClusterVerdict {
            cluster: c.clone(),
            behavioral_home: behavioral.as_ref().map(|b| b[i]),
            in_conn: in_conn[i],
            short_circuit_live_bounded: structural.as_ref().and_then(|s| s[i]),
        })
        .collect();

    let home_clusters = per_cluster
        .iter()
        .filter(|v| match mode {
            DetectionMode::Structural => v.short_circuit_live_bounded == Some(true),
            _ => v.behavioral_home == Some(true),
        })
        .map(|v| v.cluster.clone())
        .collect();
    let disagreements = per_cluster
        .iter()
        .filter(|v| match (v.behavioral_home, v.short_circuit_live_bounded) {
            (Some(a), Some(b)) => a != b,
            _ => false,
        })
        .map(|v| v.cluster.clone())
        .collect();

    Ok(HomeClusterReport {
        mode,
        home_clusters,
        per_cluster,
        stats,
        disagreements,
    })
}

fn structural_detection(
    net: &PetriNet,
    m0: &Marking,
    clusters: &[Cluster],
    in_conn: &[bool],
    cap: usize,
) -> Result<(Vec<Option<bool>>, StructuralStats)> {
    let shape = classify_structure(net);
    if !shape.free_choice {
        return Err(Error::NotFreeChoice(net.name().to_string()));
    }
    if !shape.proper {
        return Err(Error::NotProper(net.name().to_string()));
    }
    ensure_safe(net, m0, cap)?;

    let mut stats = StructuralStats {
        clusters: clusters.len(),
        eligible_clusters: in_conn.iter().filter(|&&b| b).count(),
        ..Default::default()
    };
    let keep = conn_names(net, m0);
    let (carrier, t_name) = cleaned_with_fresh(net, m0, &keep, SHORT_CIRCUIT_PREFIX, &[]);
    stats.clean_computations += 1;
    let t_c = carrier.transition_id(&t_name)?;
    let m_carrier = m0.transfer(net, &carrier)?;

    let mut verdicts = vec![None; clusters.len()];
    for (i, c) in clusters.iter().enumerate() {
        if !in_conn[i] {
            continue;
        }
        let c_carrier = c.transfer(net, &carrier).expect("cluster lies inside conn");
        stats.clean_uses += 1;
        let view = ShortCircuitView::new(&carrier, t_c, &c_carrier);
        stats.short_circuits += 1;
        verdicts[i] = Some(live_and_bounded(&view, &m_carrier, cap)?);
        stats.live_bounded_decisions += 1;
    }
    Ok((verdicts, stats))
}

/// The three statements of the relating theorem for one cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelatingRow {
    pub cluster: Cluster,
    /// (1) `C` is a home cluster of `(N, M)`.
    pub home_in_original: bool,
    /// (2) `Ĉ` is a home cluster of `(N_{C,M}, M)`. `None` when the
    /// short-circuited net is unbounded and home markings are undecided.
    pub home_in_short_circuit: Option<bool>,
    /// (3) `(N_{C,M}, M)` is live and bounded.
    pub live_and_bounded: bool,
    /// Structure of `N_{C,M}`.
    pub strongly_connected: bool,
    pub free_choice: bool,
    /// `C ∪ {t_C}` is a cluster of `N_{C,M}`.
    pub hat_is_cluster: bool,
    /// See [`clean_keeps_presets`].
    pub clean_keeps_presets: bool,
}

impl RelatingRow {
    /// All three statements agree. With an unbounded short-circuited net,
    /// (3) is false and agreement requires (1) to be false as well.
    pub fn agrees(&self) -> bool {
        match self.home_in_short_circuit {
            Some(two) => self.home_in_original == two && two == self.live_and_bounded,
            None => !self.home_in_original && !self.live_and_bounded,
        }
    }
}

/// Evaluates the three statements independently for every cluster inside
/// `conn`. Requires a proper free-choice net with a safe initial marking.
pub fn verify_relating_theorem(net: &PetriNet, m0: &Marking, cap: usize) -> Result<Vec<RelatingRow>> {
    let shape = classify_structure(net);
    if !shape.free_choice {
        return Err(Error::NotFreeChoice(net.name().to_string()));
    }
    if !shape.proper {
        return Err(Error::NotProper(net.name().to_string()));
    }
    let rg = ensure_safe(net, m0, cap)?;
    let homes = behavior(net, &rg)?.home_markings;
    let conn = conn_nodes(net, m0);
    let keep = conn_names(net, m0);
    let keeps_presets = clean_keeps_presets(net, m0);

    let mut rows = Vec::new();
    for c in ClusterMap::new(net).into_clusters() {
        if !c.nodes().all(|n| conn.contains(&n)) {
            continue;
        }
        let (nc, c_nc, m_nc, t_c) = materialize(net, m0, &keep, &c);
        let mut hat_transitions = c_nc.transitions().clone();
        hat_transitions.insert(t_c);
        let hat = Cluster::new(c_nc.places().clone(), hat_transitions);
        let seed = hat.nodes().next().expect("non-empty");
        let nc_shape = classify_structure(&nc);

        let (two, three) = match explore(&nc, &m_nc, cap) {
            Ok(g) => {
                let report = behavior(&nc, &g)?;
                (Some(report.home_markings.contains(&hat.marking())), report.live)
            }
            Err(Error::Unbounded { .. }) => (None, false),
            Err(e) => return Err(e),
        };
        rows.push(RelatingRow {
            home_in_original: homes.contains(&c.marking()),
            home_in_short_circuit: two,
            live_and_bounded: three,
            strongly_connected: nc_shape.strongly_connected,
            free_choice: nc_shape.free_choice,
            hat_is_cluster: Cluster::of(&nc, seed) == hat,
            clean_keeps_presets: keeps_presets,
            cluster: c,
        });
    }
    Ok(rows)
}
