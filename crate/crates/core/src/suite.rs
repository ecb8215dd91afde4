//! Property suite over generated nets.
//!
//! For each seed the suite draws one net with a verified home cluster and
//! one unconstrained free-choice net, then checks every consequence of the
//! theory that applies to it. Any failed check is recorded as a
//! counterexample; a clean run reports none.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::{generate, GenConfig};
use crate::home_cluster::{find_home_clusters, verify_relating_theorem, DetectionMode};
use crate::lucency::{check_lucency, find_conflict_pairs, transparency};
use crate::net::{classify_structure, path_predicates, Cluster, Marking, PetriNet, PlaceId, TransitionId};
use crate::semantics::{behavior, enabled, explore, fire, fire_sequence, ReachabilityGraph};
use crate::structural::{
    check_no_domination, expedite_closure, path_max_tokens, rooted_disentangled_paths, rooted_path_from_place,
    FiringSequence,
};

/// Property name of the strong connectivity check on `N_{C,M}`.
pub const SHORT_CIRCUIT_STRONGLY_CONNECTED: &str = "short-circuited cleaned net is strongly connected";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteConfig {
    /// Number of seeds; each seed yields two nets.
    pub seeds: u64,
    pub first_seed: u64,
    /// Reachable markings allowed per generated net.
    pub max_states: usize,
    /// Sequences kept per expedite closure.
    pub expedite_budget: usize,
    /// (place, home cluster) pairs sampled per net.
    pub path_pairs: usize,
    /// Rooted disentangled paths enumerated per pair.
    pub paths_per_pair: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seeds: 100,
            first_seed: 0,
            max_states: 10_000,
            expedite_budget: crate::structural::DEFAULT_EXPEDITE_BUDGET,
            path_pairs: 10,
            paths_per_pair: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub seed: u64,
    pub net: String,
    pub property: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub home_cluster_nets: usize,
    pub strongly_connected_nets: usize,
    pub terminating_nets: usize,
    pub random_nets: usize,
    pub safe_random_nets: usize,
    pub largest_state_space: usize,
    pub relating_nets: usize,
    pub relating_clusters: usize,
    pub expedite_draws: usize,
    pub expedite_sequences: usize,
    pub expedite_truncated: usize,
    pub path_pairs: usize,
    pub paths: usize,
    /// Pairs with fewer than the requested number available.
    pub nets_with_fewer_pairs: usize,
    pub lucent_nets: usize,
    pub lucent_not_transparent: usize,
    pub skipped: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

struct Ctx<'a> {
    report: &'a mut SuiteReport,
    seed: u64,
    net: String,
}

impl Ctx<'_> {
    fn check(&mut self, ok: bool, property: &str, detail: impl FnOnce() -> String) {
        if !ok {
            self.report.counterexamples.push(Counterexample {
                seed: self.seed,
                net: self.net.clone(),
                property: property.to_string(),
                detail: detail(),
            });
        }
    }
}

/// Configuration of the home-cluster net drawn for `seed`. Odd seeds give
/// strongly connected nets, even seeds terminating ones.
pub fn home_cluster_config(seed: u64) -> GenConfig {
    let places = 6 + (seed % 15) as usize;
    GenConfig {
        seed,
        place_budget: places,
        transition_budget: places + 2,
        branching: 2 + (seed % 3) as usize,
        guarantee_home_cluster: true,
        strongly_connected: seed % 2 == 1,
        ..GenConfig::default()
    }
}

/// Configuration of the unconstrained net drawn for `seed`.
pub fn random_config(seed: u64) -> GenConfig {
    let places = 3 + (seed % 7) as usize;
    GenConfig {
        seed,
        place_budget: places,
        transition_budget: places + (seed % 3) as usize,
        branching: 1 + (seed % 3) as usize,
        guarantee_home_cluster: false,
        ..GenConfig::default()
    }
}

pub fn run(config: &SuiteConfig) -> SuiteReport {
    let mut report = SuiteReport::default();
    for seed in config.first_seed..config.first_seed + config.seeds {
        if let Err(e) = home_cluster_checks(config, seed, &mut report) {
            report.counterexamples.push(Counterexample {
                seed,
                net: format!("gen-{seed}"),
                property: "home-cluster net analysis".into(),
                detail: e.to_string(),
            });
        }
        if let Err(e) = random_net_checks(config, seed, &mut report) {
            report.counterexamples.push(Counterexample {
                seed,
                net: format!("gen-{seed}"),
                property: "random net analysis".into(),
                detail: e.to_string(),
            });
        }
    }
    report
}

fn home_cluster_checks(config: &SuiteConfig, seed: u64, report: &mut SuiteReport) -> Result<()> {
    let gen_config = GenConfig {
        max_states: config.max_states,
        ..home_cluster_config(seed)
    };
    let g = generate(&gen_config)?;
    let (net, m0) = (&g.net, &g.marking);
    let seeded = g.home_cluster.clone().expect("guaranteed");
    let rg = explore(net, m0, config.max_states)?;
    let beh = behavior(net, &rg)?;
    let shape = classify_structure(net);

    report.home_cluster_nets += 1;
    if shape.strongly_connected {
        report.strongly_connected_nets += 1;
    } else {
        report.terminating_nets += 1;
    }
    report.largest_state_space = report.largest_state_space.max(rg.len());

    let found = find_home_clusters(net, m0, DetectionMode::Both, config.max_states)?;
    let lucency = check_lucency(net, &rg)?;
    let conflict_pairs = find_conflict_pairs(net, &rg)?;
    let dominations = check_no_domination(&rg, None)?;
    let transparent = transparency(net, &rg)?.fully_transparent;

    let mut paths_done = 0;
    let mut pairs_done = 0;
    let fewer;
    {
        let mut ctx = Ctx {
            report: &mut *report,
            seed,
            net: net.name().to_string(),
        };
        ctx.check(
            shape.free_choice && shape.proper,
            "generated net is proper free-choice",
            || format!("{shape:?}"),
        );
        ctx.check(found.home_clusters.contains(&seeded), "seeded cluster detected", || {
            seeded.names(net).join(",")
        });
        ctx.check(
            found.disagreements.is_empty(),
            "behavioral and structural detection agree",
            || format!("{} disagreements", found.disagreements.len()),
        );
        ctx.check(lucency.lucent, "home cluster ensures lucency", || {
            let (a, b) = lucency.witness.clone().expect("witness");
            format!("{} vs {}", a.display(net), b.display(net))
        });
        ctx.check(beh.safe, "home cluster ensures safety", || {
            format!("bound {:?}", beh.bound_k)
        });
        ctx.check(
            conflict_pairs.is_empty(),
            "home cluster excludes conflict-pairs",
            || {
                let c = &conflict_pairs[0];
                format!("{} / {}", c.m1.display(net), c.m2.display(net))
            },
        );
        ctx.check(dominations.is_empty(), "no strictly dominating markings", || {
            let d = &dominations[0];
            format!("{} > {}", d.larger.display(net), d.smaller.display(net))
        });
        for c in &found.home_clusters {
            let over = check_no_domination(&rg, Some(c))?;
            ctx.check(over.is_empty(), "no marking strictly above Mrk(C)", || {
                c.names(net).join(",")
            });
            two_types_of_clusters(&mut ctx, net, &beh.dead_markings, c);
        }
        ctx.check(
            rg.len() as u128 <= 1u128 << net.transition_count().min(127),
            "lucent nets have at most 2^|T| markings",
            || format!("{} markings, {} transitions", rg.len(), net.transition_count()),
        );
        ctx.check(
            !transparent || lucency.lucent,
            "fully transparent implies lucent",
            String::new,
        );
        if shape.strongly_connected {
            ctx.check(
                beh.live && beh.safe && lucency.lucent,
                "strongly connected with home cluster is live, safe and lucent",
                || format!("live {} safe {} lucent {}", beh.live, beh.safe, lucency.lucent),
            );
        }
        if beh.live && beh.bounded {
            ctx.check(shape.proper, "perpetual nets are proper", String::new);
        }

        // Rooted disentangled paths are safe.
        let mut pairs: Vec<(PlaceId, &Cluster)> = Vec::new();
        let marked: BTreeSet<PlaceId> = rg.markings().iter().flat_map(|m| m.support()).collect();
        for c in &found.home_clusters {
            for &p in &marked {
                pairs.push((p, c));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        pairs.shuffle(&mut rng);
        fewer = pairs.len() < config.path_pairs;
        for (p, c) in pairs.into_iter().take(config.path_pairs) {
            pairs_done += 1;
            let from_search = rooted_path_from_place(net, &rg, p, c)?;
            ctx.check(
                from_search.is_some(),
                "non-dead places have a rooted disentangled path",
                || net.place_name(p).to_string(),
            );
            let (mut paths, _) = rooted_disentangled_paths(net, p, c, config.paths_per_pair);
            paths.extend(from_search);
            let places: BTreeSet<PlaceId> = c.places().clone();
            for path in &paths {
                paths_done += 1;
                let class = path_predicates(net, path, Some(&places));
                ctx.check(
                    class.disentangled && class.q_rooted,
                    "path is rooted and disentangled",
                    || path.display(net),
                );
                let tokens = path_max_tokens(&rg, path)?;
                ctx.check(tokens <= 1, "rooted disentangled paths are safe", || {
                    format!("{} carries {tokens} tokens", path.display(net))
                });
            }
        }
        // The relating theorem on every cluster in conn.
        relating_checks(&mut ctx, net, m0, config.max_states)?;
        expedite_draw(&mut ctx, net, m0, &rg, config, seed)?;
    }
    report.path_pairs += pairs_done;
    report.paths += paths_done;
    if fewer {
        report.nets_with_fewer_pairs += 1;
    }
    if lucency.lucent {
        report.lucent_nets += 1;
        if !transparent {
            report.lucent_not_transparent += 1;
        }
    }
    Ok(())
}

fn two_types_of_clusters(ctx: &mut Ctx<'_>, net: &PetriNet, dead: &BTreeSet<Marking>, c: &Cluster) {
    if dead.is_empty() {
        ctx.check(
            !c.transitions().is_empty(),
            "deadlock-free: home cluster has a transition",
            || c.names(net).join(","),
        );
    } else {
        let only = dead.len() == 1 && dead.contains(&c.marking());
        ctx.check(
            only && c.places().len() == 1 && c.transitions().is_empty(),
            "dead marking is Mrk(C) of a single-place cluster",
            || c.names(net).join(","),
        );
    }
}

fn relating_checks(ctx: &mut Ctx<'_>, net: &PetriNet, m0: &Marking, cap: usize) -> Result<()> {
    let rows = verify_relating_theorem(net, m0, cap)?;
    ctx.report.relating_nets += 1;
    ctx.report.relating_clusters += rows.len();
    for row in &rows {
        ctx.check(row.agrees(), "relating theorem statements agree", || {
            format!(
                "{}: (1) {} (2) {:?} (3) {}; cleaning keeps presets: {}",
                row.cluster.names(net).join(","),
                row.home_in_original,
                row.home_in_short_circuit,
                row.live_and_bounded,
                row.clean_keeps_presets
            )
        });
        ctx.check(
            row.free_choice && row.hat_is_cluster,
            "short-circuited cleaned net is free-choice with cluster C plus t_C",
            || row.cluster.names(net).join(","),
        );
        ctx.check(row.strongly_connected, SHORT_CIRCUIT_STRONGLY_CONNECTED, || {
            format!(
                "{} (home cluster: {})",
                row.cluster.names(net).join(","),
                row.home_in_original
            )
        });
    }
    Ok(())
}

/// A random firing sequence from a random reachable marking.
fn random_sequence(net: &PetriNet, rg: &ReachabilityGraph, rng: &mut ChaCha8Rng) -> FiringSequence {
    let origin = rg.marking(rng.gen_range(0..rg.len())).clone();
    let mut current = origin.clone();
    let mut steps: Vec<TransitionId> = Vec::new();
    let len = rng.gen_range(0..=7);
    for _ in 0..len {
        let en: Vec<TransitionId> = enabled(net, &current).into_iter().collect();
        let Some(&t) = en.choose(rng) else { break };
        current = fire(net, &current, t).expect("enabled");
        steps.push(t);
    }
    FiringSequence::new(net, origin, steps).expect("built from enabled steps")
}

fn expedite_draw(
    ctx: &mut Ctx<'_>,
    net: &PetriNet,
    _m0: &Marking,
    rg: &ReachabilityGraph,
    config: &SuiteConfig,
    seed: u64,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ net.node_count() as u64);
    let seq = random_sequence(net, rg, &mut rng);
    let closure = expedite_closure(net, &seq, config.expedite_budget);
    ctx.report.expedite_draws += 1;
    ctx.report.expedite_sequences += closure.sequences.len();
    if closure.truncated {
        ctx.report.expedite_truncated += 1;
    }
    let target = seq.target(net);
    let clusters = crate::net::ClusterMap::new(net);
    let by_cluster = |steps: &[TransitionId], k: usize| -> Vec<TransitionId> {
        steps
            .iter()
            .copied()
            .filter(|&t| clusters.index_of_transition(t) == k)
            .collect()
    };
    let mut sorted = seq.steps().to_vec();
    sorted.sort();
    for other in &closure.sequences {
        let reached = fire_sequence(net, seq.origin(), other.steps());
        ctx.check(
            reached.as_ref() == Ok(&target),
            "expedited sequence reaches the same marking",
            || format!("{:?} from {}", other.names(net), seq.origin().display(net)),
        );
        let mut multiset = other.steps().to_vec();
        multiset.sort();
        ctx.check(multiset == sorted, "expediting preserves the step multiset", || {
            format!("{:?}", other.names(net))
        });
        let same_order =
            (0..clusters.clusters().len()).all(|k| by_cluster(seq.steps(), k) == by_cluster(other.steps(), k));
        ctx.check(same_order, "expediting preserves order within clusters", || {
            format!("{:?} vs {:?}", seq.names(net), other.names(net))
        });
    }
    Ok(())
}

fn random_net_checks(config: &SuiteConfig, seed: u64, report: &mut SuiteReport) -> Result<()> {
    let gen_config = GenConfig {
        max_states: config.max_states,
        ..random_config(seed)
    };
    let g = generate(&gen_config)?;
    let (net, m0) = (&g.net, &g.marking);
    report.random_nets += 1;
    let rg = match explore(net, m0, config.max_states) {
        Ok(rg) => rg,
        Err(Error::Unbounded { .. }) | Err(Error::StateSpaceExceeded { .. }) => {
            report.skipped += 1;
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    report.largest_state_space = report.largest_state_space.max(rg.len());
    let beh = behavior(net, &rg)?;
    let lucency = check_lucency(net, &rg)?;
    let transparent = transparency(net, &rg)?.fully_transparent;
    if lucency.lucent {
        report.lucent_nets += 1;
        if !transparent {
            report.lucent_not_transparent += 1;
        }
    }
    let mut ctx = Ctx {
        report,
        seed,
        net: format!("{}-random", net.name()),
    };
    ctx.check(
        !transparent || lucency.lucent,
        "fully transparent implies lucent",
        String::new,
    );
    if lucency.lucent {
        ctx.check(
            rg.len() as u128 <= 1u128 << net.transition_count().min(127),
            "lucent nets have at most 2^|T| markings",
            || format!("{} markings", rg.len()),
        );
    }
    expedite_draw(&mut ctx, net, m0, &rg, config, seed)?;
    if beh.safe {
        ctx.report.safe_random_nets += 1;
        relating_checks(&mut ctx, net, m0, config.max_states)?;
        let found = find_home_clusters(net, m0, DetectionMode::Both, config.max_states)?;
        ctx.check(
            found.disagreements.is_empty(),
            "behavioral and structural detection agree",
            || format!("{} disagreements", found.disagreements.len()),
        );
        if !found.home_clusters.is_empty() {
            ctx.check(lucency.lucent, "home cluster ensures lucency", String::new);
        }
    }
    Ok(())
}
