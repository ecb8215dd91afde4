//! Brute-force reference implementations used as test oracles. They read
//! only names and arcs from the library and redo everything else on dense
//! token vectors.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use lucency::net::{Cluster, Marking, PetriNet};
use proptest::prelude::*;

pub type Vm = Vec<u32>;

pub struct Oracle {
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    pub pre: Vec<Vec<usize>>,
    pub post: Vec<Vec<usize>>,
}

impl Oracle {
    pub fn new(net: &PetriNet) -> Self {
        let places: Vec<String> = net.places().map(|p| net.place_name(p).to_string()).collect();
        let index = |name: &str| places.iter().position(|q| q == name).unwrap();
        let transitions: Vec<String> = net.transitions().map(|t| net.transition_name(t).to_string()).collect();
        let pre = net
            .transitions()
            .map(|t| net.preset(t).iter().map(|&p| index(net.place_name(p))).collect())
            .collect();
        let post = net
            .transitions()
            .map(|t| net.postset(t).iter().map(|&p| index(net.place_name(p))).collect())
            .collect();
        Oracle {
            places,
            transitions,
            pre,
            post,
        }
    }

    pub fn vm(&self, m: &Marking, net: &PetriNet) -> Vm {
        let mut v = vec![0; self.places.len()];
        for name in m.names(net) {
            v[self.places.iter().position(|q| *q == name).unwrap()] += 1;
        }
        v
    }

    pub fn marking(&self, v: &Vm, net: &PetriNet) -> Marking {
        let names: Vec<&str> = v
            .iter()
            .enumerate()
            .flat_map(|(i, &k)| std::iter::repeat_n(self.places[i].as_str(), k as usize))
            .collect();
        Marking::from_names(net, &names).unwrap()
    }

    pub fn enabled(&self, m: &Vm) -> BTreeSet<usize> {
        (0..self.transitions.len())
            .filter(|&t| self.pre[t].iter().all(|&p| m[p] >= 1))
            .collect()
    }

    pub fn enabled_names(&self, m: &Vm) -> BTreeSet<String> {
        self.enabled(m)
            .into_iter()
            .map(|t| self.transitions[t].clone())
            .collect()
    }

    pub fn fire(&self, m: &Vm, t: usize) -> Vm {
        let mut out = m.clone();
        for &p in &self.pre[t] {
            out[p] -= 1;
        }
        for &p in &self.post[t] {
            out[p] += 1;
        }
        out
    }

    /// All markings reachable from `m0`, or `None` past `limit` markings.
    pub fn reach(&self, m0: &Vm, limit: usize) -> Option<Vec<Vm>> {
        let mut seen: HashSet<Vm> = HashSet::new();
        let mut stack = vec![m0.clone()];
        seen.insert(m0.clone());
        while let Some(m) = stack.pop() {
            for t in self.enabled(&m) {
                let next = self.fire(&m, t);
                if seen.insert(next.clone()) {
                    if seen.len() > limit {
                        return None;
                    }
                    stack.push(next);
                }
            }
        }
        let mut all: Vec<Vm> = seen.into_iter().collect();
        all.sort();
        Some(all)
    }

    /// Reachability relation over a finite state space.
    pub fn closure(&self, states: &[Vm]) -> HashMap<Vm, HashSet<Vm>> {
        states
            .iter()
            .map(|m| (m.clone(), self.reach(m, usize::MAX).unwrap().into_iter().collect()))
            .collect()
    }

    pub fn home_markings(&self, states: &[Vm]) -> BTreeSet<Vm> {
        let reach = self.closure(states);
        states
            .iter()
            .filter(|h| states.iter().all(|m| reach[m].contains(*h)))
            .cloned()
            .collect()
    }

    pub fn live(&self, states: &[Vm]) -> bool {
        let reach = self.closure(states);
        states
            .iter()
            .all(|m| (0..self.transitions.len()).all(|t| reach[m].iter().any(|r| self.enabled(r).contains(&t))))
    }

    pub fn lucent(&self, states: &[Vm]) -> bool {
        for (i, a) in states.iter().enumerate() {
            for b in &states[i + 1..] {
                if self.enabled(a) == self.enabled(b) {
                    return false;
                }
            }
        }
        true
    }

    pub fn transparent(&self, m: &Vm) -> bool {
        let mut covered = vec![0; m.len()];
        for t in self.enabled(m) {
            for &p in &self.pre[t] {
                covered[p] = 1;
            }
        }
        covered == *m
    }

    /// Five conditions of a conflict-pair, checked literally.
    pub fn is_conflict_pair(&self, states: &[Vm], a: &Vm, b: &Vm) -> bool {
        let ea = self.enabled(a);
        let eb = self.enabled(b);
        let covers = |m: &Vm, ts: &BTreeSet<usize>| ts.iter().all(|&t| self.pre[t].iter().any(|&p| m[p] >= 1));
        states.contains(a)
            && states.contains(b)
            && !ea.is_empty()
            && !eb.is_empty()
            && ea.is_disjoint(&eb)
            && covers(a, &eb)
            && covers(b, &ea)
    }

    /// Clusters by closure from every node, as sets of names.
    pub fn clusters(&self) -> BTreeSet<BTreeSet<String>> {
        let n_p = self.places.len();
        let mut out = BTreeSet::new();
        for start in 0..n_p + self.transitions.len() {
            let mut members: BTreeSet<usize> = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                if !members.insert(x) {
                    continue;
                }
                if x < n_p {
                    for t in 0..self.transitions.len() {
                        if self.pre[t].contains(&x) {
                            queue.push_back(n_p + t);
                        }
                    }
                } else {
                    for &p in &self.pre[x - n_p] {
                        queue.push_back(p);
                    }
                }
            }
            out.insert(
                members
                    .into_iter()
                    .map(|x| {
                        if x < n_p {
                            self.places[x].clone()
                        } else {
                            self.transitions[x - n_p].clone()
                        }
                    })
                    .collect(),
            );
        }
        out
    }

    pub fn free_choice(&self) -> bool {
        let sets: Vec<BTreeSet<usize>> = self.pre.iter().map(|v| v.iter().copied().collect()).collect();
        sets.iter().all(|a| sets.iter().all(|b| a == b || a.is_disjoint(b)))
    }

    /// Successor lists over all nodes; places first, then transitions.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let n_p = self.places.len();
        let mut adj = vec![Vec::new(); n_p + self.transitions.len()];
        for t in 0..self.transitions.len() {
            for &p in &self.pre[t] {
                adj[p].push(n_p + t);
            }
            for &p in &self.post[t] {
                adj[n_p + t].push(p);
            }
        }
        adj
    }

    pub fn strongly_connected(&self) -> bool {
        let adj = self.adjacency();
        let n = adj.len();
        (0..n).all(|s| {
            let mut seen = vec![false; n];
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                if !std::mem::replace(&mut seen[x], true) {
                    stack.extend(&adj[x]);
                }
            }
            seen.iter().all(|&b| b)
        })
    }

    /// Names of nodes on a directed path from a marked place.
    pub fn conn(&self, m0: &Vm) -> BTreeSet<String> {
        let adj = self.adjacency();
        let n_p = self.places.len();
        let mut seen = vec![false; adj.len()];
        let mut stack: Vec<usize> = (0..n_p).filter(|&p| m0[p] > 0).collect();
        while let Some(x) = stack.pop() {
            if !std::mem::replace(&mut seen[x], true) {
                stack.extend(&adj[x]);
            }
        }
        (0..adj.len())
            .filter(|&x| seen[x])
            .map(|x| {
                if x < n_p {
                    self.places[x].clone()
                } else {
                    self.transitions[x - n_p].clone()
                }
            })
            .collect()
    }

    pub fn cluster_vm(&self, c: &BTreeSet<String>) -> Vm {
        self.places.iter().map(|p| u32::from(c.contains(p))).collect()
    }
}

pub fn names_of(m: &Marking, net: &PetriNet) -> Vec<String> {
    m.names(net)
}

pub fn cluster_names(c: &Cluster, net: &PetriNet) -> BTreeSet<String> {
    c.names(net).into_iter().collect()
}

pub fn marking(net: &PetriNet, names: &[&str]) -> Marking {
    Marking::from_names(net, names).unwrap()
}

pub fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// An arbitrary small ordinary net with an initial marking. Nets that fail
/// validation (disconnected, no arcs) come out as `None`.
#[derive(Clone, Debug)]
pub struct RawNet {
    pub places: usize,
    pub transitions: Vec<(Vec<usize>, Vec<usize>)>,
    pub init: Vec<u32>,
}

impl RawNet {
    pub fn build(&self) -> Option<(PetriNet, Marking)> {
        let mut b = PetriNet::builder("arb");
        let names: Vec<String> = (0..self.places).map(|i| format!("p{i}")).collect();
        for p in &names {
            b.add_place(p);
        }
        for (i, (pre, post)) in self.transitions.iter().enumerate() {
            let ins: BTreeSet<&str> = pre.iter().map(|&k| names[k].as_str()).collect();
            let outs: BTreeSet<&str> = post.iter().map(|&k| names[k].as_str()).collect();
            let ins: Vec<&str> = ins.into_iter().collect();
            let outs: Vec<&str> = outs.into_iter().collect();
            b.add_transition_with(&format!("t{i}"), &ins, &outs).ok()?;
        }
        let net = b.build().ok()?;
        let pairs: Vec<_> = self
            .init
            .iter()
            .enumerate()
            .map(|(i, &k)| (net.place_id(&names[i]).unwrap(), k))
            .collect();
        Some((net, Marking::from_counts(pairs)))
    }
}

pub fn raw_net(max_places: usize, max_transitions: usize, max_tokens: u32) -> impl Strategy<Value = RawNet> {
    (1..=max_places).prop_flat_map(move |np| {
        let t = (
            proptest::collection::vec(0..np, 0..=2),
            proptest::collection::vec(0..np, 0..=2),
        );
        (
            Just(np),
            proptest::collection::vec(t, 1..=max_transitions),
            proptest::collection::vec(0..=max_tokens, np),
        )
            .prop_map(|(places, transitions, init)| RawNet {
                places,
                transitions,
                init,
            })
    })
}

/// Groups markings of a state space by their enabled transition names.
pub fn footprints(o: &Oracle, states: &[Vm]) -> BTreeMap<BTreeSet<String>, Vec<Vm>> {
    let mut out: BTreeMap<BTreeSet<String>, Vec<Vm>> = BTreeMap::new();
    for m in states {
        out.entry(o.enabled_names(m)).or_default().push(m.clone());
    }
    out
}
