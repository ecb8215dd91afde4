//! Seeded random proper free-choice nets.
//!
//! Nets with a guaranteed home cluster are built from nested blocks between
//! a source place `i` and a sink place `o`:
//!
//! * a single transition,
//! * a sequence of two blocks,
//! * an exclusive choice between blocks sharing their entry place,
//! * a parallel split into branches followed by a join,
//! * a loop whose body may be repeated.
//!
//! Every place is either consumed only by transitions with that place as
//! their whole preset, or by a single join transition, so the result is
//! free-choice by construction. The sink cluster `{o}` (or `{o, t_back}`
//! when a back edge makes the net strongly connected) is checked to be a
//! home cluster before the net is returned.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::home_cluster::{find_home_clusters, DetectionMode};
use crate::net::{classify_structure, Cluster, Marking, NetBuilder, PetriNet};
use crate::semantics::{behavior, explore};

/// Number of resamples before giving up.
pub const RETRY_BUDGET: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    /// Add a transition whose preset overlaps another one without being
    /// equal to it.
    BreakFreeChoice,
    /// Perturb the net until no cluster is a home cluster.
    RemoveHomeCluster,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    /// Upper bound on places. The smallest net has two.
    pub place_budget: usize,
    /// Upper bound on transitions, including the back edge.
    pub transition_budget: usize,
    /// Largest number of branches in a choice or parallel block, and the
    /// largest preset of a random cluster.
    pub branching: usize,
    pub guarantee_home_cluster: bool,
    pub strongly_connected: bool,
    pub mutation: Option<Mutation>,
    /// Draws with more reachable markings than this are resampled.
    pub max_states: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            place_budget: 12,
            transition_budget: 14,
            branching: 3,
            guarantee_home_cluster: true,
            strongly_connected: false,
            mutation: None,
            max_states: 10_000,
        }
    }
}

impl GenConfig {
    fn validate(&self) -> Result<()> {
        if self.place_budget < 1 || self.transition_budget < 1 || self.branching < 1 || self.max_states < 1 {
            return Err(Error::GenerationFailed {
                attempts: 0,
                reason: "budgets, branching and max_states must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// A generated marked net.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generated {
    pub net: PetriNet,
    pub marking: Marking,
    /// The verified home cluster the construction was built around.
    pub home_cluster: Option<Cluster>,
}

pub fn generate(config: &GenConfig) -> Result<Generated> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut last_reason = String::new();
    for _ in 0..RETRY_BUDGET {
        match attempt(config, &mut rng) {
            Ok(g) => return Ok(g),
            Err(reason) => last_reason = reason,
        }
    }
    Err(Error::GenerationFailed {
        attempts: RETRY_BUDGET,
        reason: last_reason,
    })
}

fn attempt(config: &GenConfig, rng: &mut ChaCha8Rng) -> std::result::Result<Generated, String> {
    let (net, marking, seeded) = if config.guarantee_home_cluster {
        let (net, marking, seed) = block_net(config, rng)?;
        let cluster = Cluster::of(&net, net.node_id(&seed).expect("sink exists"));
        verify_home(&net, &marking, &cluster, config.max_states)?;
        (net, marking, Some(cluster))
    } else {
        let (net, marking) = random_free_choice(config, rng)?;
        (net, marking, None)
    };
    match config.mutation {
        None => Ok(Generated {
            net,
            marking,
            home_cluster: seeded,
        }),
        Some(Mutation::BreakFreeChoice) => {
            let mutated = break_free_choice(&net, rng)?;
            let marking = marking.transfer(&net, &mutated).map_err(|e| e.to_string())?;
            Ok(Generated {
                net: mutated,
                marking,
                home_cluster: None,
            })
        }
        Some(Mutation::RemoveHomeCluster) => {
            let (net, marking) = remove_home_cluster(&net, &marking, config.max_states, rng)?;
            Ok(Generated {
                net,
                marking,
                home_cluster: None,
            })
        }
    }
}

fn verify_home(net: &PetriNet, m: &Marking, c: &Cluster, max_states: usize) -> std::result::Result<(), String> {
    let rg = explore(net, m, max_states).map_err(|e| e.to_string())?;
    let report = behavior(net, &rg).map_err(|e| e.to_string())?;
    if !report.home_markings.contains(&c.marking()) {
        return Err("seeded cluster is not a home cluster".into());
    }
    Ok(())
}

#[derive(Clone, Debug)]
enum Block {
    Act,
    Seq(Box<Block>, Box<Block>),
    Choice(Vec<Block>),
    Par(Vec<Block>),
    Loop(Box<Block>),
}

impl Block {
    // Places and transitions added inside the block, excluding its
    // entry and exit places.
    fn size(&self) -> (usize, usize) {
        match self {
            Block::Act => (0, 1),
            Block::Seq(a, b) => {
                let (pa, ta) = a.size();
                let (pb, tb) = b.size();
                (pa + pb + 1, ta + tb)
            }
            Block::Choice(bs) => bs.iter().fold((0, 0), |(p, t), b| {
                let (pb, tb) = b.size();
                (p + pb, t + tb)
            }),
            Block::Par(bs) => bs.iter().fold((2 * bs.len(), 2), |(p, t), b| {
                let (pb, tb) = b.size();
                (p + pb, t + tb)
            }),
            Block::Loop(body) => {
                let (pb, tb) = body.size();
                (pb + 1, tb + 2)
            }
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Block::Act => 1,
            Block::Seq(a, b) => a.leaves() + b.leaves(),
            Block::Choice(bs) | Block::Par(bs) => bs.iter().map(Block::leaves).sum(),
            Block::Loop(body) => body.leaves(),
        }
    }

    // Replaces the `k`-th leaf, counted depth-first.
    fn replace_leaf(&mut self, k: &mut usize, with: &mut Option<Block>) {
        match self {
            Block::Act => {
                if *k == 0 {
                    if let Some(b) = with.take() {
                        *self = b;
                    }
                } else {
                    *k -= 1;
                }
            }
            Block::Seq(a, b) => {
                a.replace_leaf(k, with);
                b.replace_leaf(k, with);
            }
            Block::Choice(bs) | Block::Par(bs) => {
                for b in bs {
                    b.replace_leaf(k, with);
                }
            }
            Block::Loop(body) => body.replace_leaf(k, with),
        }
    }
}

fn random_operator(rng: &mut ChaCha8Rng, branching: usize) -> Block {
    let width = |rng: &mut ChaCha8Rng| rng.gen_range(2..=branching.max(2));
    match rng.gen_range(0..10) {
        0..=3 => Block::Seq(Box::new(Block::Act), Box::new(Block::Act)),
        4..=5 if branching >= 2 => Block::Choice(vec![Block::Act; width(rng)]),
        6..=7 if branching >= 2 => Block::Par(vec![Block::Act; width(rng)]),
        8..=9 => Block::Loop(Box::new(Block::Act)),
        _ => Block::Seq(Box::new(Block::Act), Box::new(Block::Act)),
    }
}

struct Emitter {
    b: NetBuilder,
    places: usize,
    transitions: usize,
}

impl Emitter {
    fn place(&mut self) -> String {
        self.places += 1;
        let id = format!("p{}", self.places);
        self.b.add_place(&id);
        id
    }

    fn transition(&mut self, inputs: &[String], outputs: &[String]) {
        self.transitions += 1;
        let id = format!("t{}", self.transitions);
        self.b
            .add_transition_with(&id, inputs, outputs)
            .expect("fresh identifiers");
    }

    fn emit(&mut self, block: &Block, entry: &str, exit: &str) {
        let (entry, exit) = (entry.to_string(), exit.to_string());
        match block {
            Block::Act => self.transition(&[entry], &[exit]),
            Block::Seq(a, b) => {
                let mid = self.place();
                self.emit(a, &entry, &mid);
                self.emit(b, &mid, &exit);
            }
            Block::Choice(bs) => {
                for b in bs {
                    self.emit(b, &entry, &exit);
                }
            }
            Block::Par(bs) => {
                let starts: Vec<String> = bs.iter().map(|_| self.place()).collect();
                let ends: Vec<String> = bs.iter().map(|_| self.place()).collect();
                self.transition(&[entry], &starts);
                for ((b, s), e) in bs.iter().zip(&starts).zip(&ends) {
                    self.emit(b, s, e);
                }
                self.transition(&ends, &[exit]);
            }
            Block::Loop(body) => {
                let mid = self.place();
                self.emit(body, &entry, &mid);
                self.transition(std::slice::from_ref(&mid), &[entry]);
                self.transition(&[mid], &[exit]);
            }
        }
    }
}

fn block_net(config: &GenConfig, rng: &mut ChaCha8Rng) -> std::result::Result<(PetriNet, Marking, String), String> {
    let back = usize::from(config.strongly_connected);
    if config.place_budget < 2 || config.transition_budget < 1 + back {
        // Too small for a source and a sink: a single self-loop.
        let mut b = PetriNet::builder(format!("gen-{}", config.seed));
        b.add_place("i");
        b.add_transition_with("t1", &["i"], &["i"]).expect("fresh");
        let net = b.build().map_err(|e| e.to_string())?;
        let m = Marking::from_names(&net, &["i"]).map_err(|e| e.to_string())?;
        return Ok((net, m, "i".into()));
    }

    let mut root = Block::Act;
    let place_room = config.place_budget - 2;
    let transition_room = config.transition_budget - back;
    // A few draws per leaf keep growth going when a choice does not fit.
    let mut misses = 0;
    while misses < 8 {
        let candidate = random_operator(rng, config.branching);
        let leaf = rng.gen_range(0..root.leaves());
        let mut next = root.clone();
        next.replace_leaf(&mut { leaf }, &mut Some(candidate));
        let (p, t) = next.size();
        if p <= place_room && t <= transition_room {
            root = next;
            misses = 0;
        } else {
            misses += 1;
        }
    }

    let mut e = Emitter {
        b: PetriNet::builder(format!("gen-{}", config.seed)),
        places: 0,
        transitions: 0,
    };
    e.b.add_place("i").add_place("o");
    e.emit(&root, "i", "o");
    if config.strongly_connected {
        e.b.add_transition_with("t_back", &["o"], &["i"]).expect("fresh");
    }
    let net = e.b.build().map_err(|err| err.to_string())?;
    let m = Marking::from_names(&net, &["i"]).map_err(|err| err.to_string())?;
    Ok((net, m, "o".into()))
}

/// A proper free-choice net built from random clusters, with one or two
/// initially marked places. Nothing about its behavior is guaranteed.
fn random_free_choice(config: &GenConfig, rng: &mut ChaCha8Rng) -> std::result::Result<(PetriNet, Marking), String> {
    let np = config.place_budget.max(1);
    let nt = config.transition_budget.max(1);
    let names_p: Vec<String> = (1..=np).map(|i| format!("p{i}")).collect();

    // Split places into clusters of at most `branching` places.
    let mut order: Vec<usize> = (0..np).collect();
    order.shuffle(rng);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut rest = &order[..];
    while !rest.is_empty() {
        let k = rng.gen_range(1..=config.branching.min(rest.len()));
        groups.push(rest[..k].to_vec());
        rest = &rest[k..];
    }

    let mut b = PetriNet::builder(format!("gen-{}", config.seed));
    for p in &names_p {
        b.add_place(p);
    }
    // The first transitions consume each group in turn and feed a place of
    // an earlier group, which spans the groups with one weak component.
    // Groups left without a consumer become extra outputs.
    let mut arcs: Vec<(Vec<usize>, Vec<usize>)> = Vec::with_capacity(nt);
    for t in 1..=nt {
        let k = if t <= groups.len() {
            t - 1
        } else {
            rng.gen_range(0..groups.len())
        };
        let g = &groups[k];
        let outs = rng.gen_range(1..=g.len().min(2));
        let mut outputs: Vec<usize> = (0..np)
            .collect::<Vec<_>>()
            .choose_multiple(rng, outs)
            .copied()
            .collect();
        if t <= groups.len() && k > 0 {
            let earlier = groups[..k].iter().flatten().copied().collect::<Vec<_>>();
            let anchor = *earlier.choose(rng).expect("non-empty");
            if !outputs.contains(&anchor) {
                outputs[0] = anchor;
            }
        }
        arcs.push((g.clone(), outputs));
    }
    for (k, g) in groups.iter().enumerate().skip(nt) {
        arcs[k % nt].1.extend(g);
    }
    for (t, (inputs, mut outputs)) in arcs.into_iter().enumerate() {
        outputs.sort_unstable();
        outputs.dedup();
        let inputs: Vec<&str> = inputs.iter().map(|&i| names_p[i].as_str()).collect();
        let outputs: Vec<&str> = outputs.iter().map(|&i| names_p[i].as_str()).collect();
        b.add_transition_with(&format!("t{}", t + 1), &inputs, &outputs)
            .map_err(|e| e.to_string())?;
    }
    let net = b.build().map_err(|e| e.to_string())?;
    let marked = rng.gen_range(1..=2.min(np));
    let picks: Vec<&str> = names_p.choose_multiple(rng, marked).map(String::as_str).collect();
    let m = Marking::from_names(&net, &picks).map_err(|e| e.to_string())?;
    Ok((net, m))
}

fn break_free_choice(net: &PetriNet, rng: &mut ChaCha8Rng) -> std::result::Result<PetriNet, String> {
    let t = net
        .transitions()
        .collect::<Vec<_>>()
        .choose(rng)
        .copied()
        .ok_or("no transitions")?;
    let q = net.fresh_name("q_fc");
    let u = net.fresh_name("t_fc");
    let mut inputs: Vec<String> = net.preset(t).iter().map(|&p| net.place_name(p).to_string()).collect();
    inputs.push(q.clone());
    let outputs: Vec<String> = net.postset(t).iter().map(|&p| net.place_name(p).to_string()).collect();
    let mut b = net.to_builder();
    b.add_place(&q);
    b.add_transition_with(&u, &inputs, &outputs)
        .map_err(|e| e.to_string())?;
    let out = b.build().map_err(|e| e.to_string())?;
    debug_assert!(!classify_structure(&out).free_choice);
    Ok(out)
}

/// Adds an escape from a choice place into a fresh dead end, which creates
/// a second terminal behavior. Falls back to an extra initial token.
fn remove_home_cluster(
    net: &PetriNet,
    m: &Marking,
    max_states: usize,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<(PetriNet, Marking), String> {
    let has_home = |n: &PetriNet, mk: &Marking| -> std::result::Result<bool, String> {
        match find_home_clusters(n, mk, DetectionMode::Behavioral, max_states) {
            Ok(r) => Ok(!r.home_clusters.is_empty()),
            Err(Error::Unbounded { .. }) => Ok(false),
            Err(e) => Err(e.to_string()),
        }
    };

    // Escape candidates: marked places whose consumers all take exactly that
    // place, so the new transition keeps the net free-choice.
    let mut candidates: Vec<_> = m
        .support()
        .filter(|&p| net.place_postset(p).iter().all(|&t| net.preset(t) == [p]))
        .collect();
    candidates.shuffle(rng);
    for p in candidates {
        let z = net.fresh_name("z_dead");
        let esc = net.fresh_name("t_escape");
        let mut b = net.to_builder();
        b.add_place(&z);
        b.add_transition_with(&esc, &[net.place_name(p)], &[z.as_str()])
            .map_err(|e| e.to_string())?;
        let mutated = b.build().map_err(|e| e.to_string())?;
        let mm = m.transfer(net, &mutated).map_err(|e| e.to_string())?;
        if !has_home(&mutated, &mm)? {
            return Ok((mutated, mm));
        }
    }

    let p = m.support().next().ok_or("empty initial marking")?;
    let doubled = m.plus(&Marking::from_places([p]));
    if !has_home(net, &doubled)? {
        return Ok((net.clone(), doubled));
    }
    Err("could not remove the home cluster".into())
}

/// A net with `clusters` clusters whose state space stays at two markings
/// however large it grows, and whose clusters all lie in `conn`: a two-step
/// core `i -> a -> o` and a chain of clusters that is reachable in the graph
/// but never receives a token, because its entry also needs a token from
/// its own end.
pub fn scaling_family(clusters: usize) -> (PetriNet, Marking) {
    let chain = clusters.saturating_sub(2).max(1);
    let mut b = PetriNet::builder(format!("scale-{clusters}"));
    b.add_place("i").add_place("o").add_place("z");
    b.add_transition_with("a", &["i"], &["o"]).expect("fresh");
    let width = chain.to_string().len();
    let c = |j: usize| format!("c{j:0width$}");
    for j in 1..=chain {
        b.add_place(c(j));
    }
    b.add_transition_with("u", &["o", "z"], &[c(1).as_str()])
        .expect("fresh");
    for j in 1..=chain {
        let next = if j == chain { "z".to_string() } else { c(j + 1) };
        b.add_transition_with(&format!("v{j:0width$}"), &[c(j)], &[next])
            .expect("fresh");
    }
    let net = b.build().expect("family is connected");
    let m = Marking::from_names(&net, &["i"]).expect("i exists");
    (net, m)
}
