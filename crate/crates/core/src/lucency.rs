//! Lucency, transparency and conflict-pairs.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::net::{Marking, PetriNet, PlaceId, TransitionId};
use crate::semantics::{explore, ReachabilityGraph};

/// Result of a lucency check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LucencyVerdict {
    pub lucent: bool,
    /// The lexicographically smallest pair of distinct markings with equal
    /// enabled sets, if any.
    pub witness: Option<(Marking, Marking)>,
    /// Markings grouped by enabled set, each group sorted.
    pub footprint_index: BTreeMap<Vec<TransitionId>, Vec<Marking>>,
    /// Set when the net is unbounded. Such a net is never lucent and there
    /// is no finite state space to index.
    pub unbounded: bool,
}

pub fn check_lucency(_net: &PetriNet, rg: &ReachabilityGraph) -> Result<LucencyVerdict> {
    rg.require_complete()?;
    let mut footprint_index: BTreeMap<Vec<TransitionId>, Vec<Marking>> = BTreeMap::new();
    for node in 0..rg.len() {
        footprint_index
            .entry(rg.enabled(node).to_vec())
            .or_default()
            .push(rg.marking(node).clone());
    }
    for group in footprint_index.values_mut() {
        group.sort();
    }
    let witness = footprint_index
        .values()
        .filter(|g| g.len() > 1)
        .map(|g| (g[0].clone(), g[1].clone()))
        .min();
    Ok(LucencyVerdict {
        lucent: witness.is_none(),
        witness,
        footprint_index,
        unbounded: false,
    })
}

/// Explores `(net, m0)` and checks lucency. Unbounded nets yield a negative
/// verdict with [`LucencyVerdict::unbounded`] set instead of an error.
pub fn check_lucency_marked(net: &PetriNet, m0: &Marking, cap: usize) -> Result<LucencyVerdict> {
    match explore(net, m0, cap) {
        Ok(rg) => check_lucency(net, &rg),
        Err(Error::Unbounded { .. }) => Ok(LucencyVerdict {
            lucent: false,
            witness: None,
            footprint_index: BTreeMap::new(),
            unbounded: true,
        }),
        Err(e) => Err(e),
    }
}

/// Per-marking transparency, in node order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transparency {
    pub per_marking: Vec<(Marking, bool)>,
    pub fully_transparent: bool,
}

/// A marking is transparent iff it puts exactly one token on each input
/// place of its enabled transitions and nothing anywhere else.
pub fn is_transparent(net: &PetriNet, m: &Marking, enabled: &[TransitionId]) -> bool {
    let inputs: BTreeSet<PlaceId> = enabled.iter().flat_map(|&t| net.preset(t).iter().copied()).collect();
    *m == Marking::from_places(inputs)
}

pub fn transparency(net: &PetriNet, rg: &ReachabilityGraph) -> Result<Transparency> {
    rg.require_complete()?;
    let per_marking: Vec<(Marking, bool)> = (0..rg.len())
        .map(|n| {
            let m = rg.marking(n);
            (m.clone(), is_transparent(net, m, rg.enabled(n)))
        })
        .collect();
    let fully_transparent = per_marking.iter().all(|(_, ok)| *ok);
    Ok(Transparency {
        per_marking,
        fully_transparent,
    })
}

/// A conflict-pair together with its agreement split.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ConflictPair {
    pub m1: Marking,
    pub m2: Marking,
    pub agree: Marking,
    pub disagree1: Marking,
    pub disagree2: Marking,
}

impl ConflictPair {
    pub fn new(m1: Marking, m2: Marking) -> Self {
        let (agree, disagree1, disagree2) = agreement_split(&m1, &m2);
        ConflictPair {
            m1,
            m2,
            agree,
            disagree1,
            disagree2,
        }
    }
}

/// `(agree, disagree1, disagree2)` with `agree` the pointwise minimum.
pub fn agreement_split(m1: &Marking, m2: &Marking) -> (Marking, Marking, Marking) {
    let agree = m1.meet(m2);
    let d1 = m1.minus(&agree);
    let d2 = m2.minus(&agree);
    (agree, d1, d2)
}

/// Checks the five conflict-pair conditions for two markings assumed to be
/// reachable.
pub fn is_conflict_pair(net: &PetriNet, m1: &Marking, m2: &Marking) -> bool {
    let en1 = crate::semantics::enabled(net, m1);
    let en2 = crate::semantics::enabled(net, m2);
    !en1.is_empty()
        && !en2.is_empty()
        && en1.is_disjoint(&en2)
        && en1.iter().all(|&t| m2.count_in(net.preset(t)) >= 1)
        && en2.iter().all(|&t| m1.count_in(net.preset(t)) >= 1)
}

struct NodeSets {
    enabled: FixedBitSet,
    support: FixedBitSet,
}

/// All unordered pairs of reachable markings forming a conflict-pair, each
/// reported with `m1 < m2` and sorted.
pub fn find_conflict_pairs(net: &PetriNet, rg: &ReachabilityGraph) -> Result<Vec<ConflictPair>> {
    rg.require_complete()?;
    let sets: Vec<NodeSets> = (0..rg.len())
        .map(|n| {
            let mut enabled = FixedBitSet::with_capacity(net.transition_count());
            for &t in rg.enabled(n) {
                enabled.insert(t.index());
            }
            let mut support = FixedBitSet::with_capacity(net.place_count());
            for p in rg.marking(n).support() {
                support.insert(p.index());
            }
            NodeSets { enabled, support }
        })
        .collect();
    let covers = |en: &[TransitionId], support: &FixedBitSet| {
        en.iter()
            .all(|&t| net.preset(t).iter().any(|p| support.contains(p.index())))
    };

    let live: Vec<usize> = (0..rg.len()).filter(|&n| !rg.enabled(n).is_empty()).collect();
    let mut pairs = Vec::new();
    for (i, &a) in live.iter().enumerate() {
        for &b in &live[i + 1..] {
            if !sets[a].enabled.is_disjoint(&sets[b].enabled) {
                continue;
            }
            if covers(rg.enabled(a), &sets[b].support) && covers(rg.enabled(b), &sets[a].support) {
                let (m1, m2) = (rg.marking(a).clone(), rg.marking(b).clone());
                let (m1, m2) = if m1 < m2 { (m1, m2) } else { (m2, m1) };
                pairs.push(ConflictPair::new(m1, m2));
            }
        }
    }
    pairs.sort();
    Ok(pairs)
}
