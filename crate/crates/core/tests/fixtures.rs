//! Worked examples on the three reference nets and small constructed nets.
//! Literal values are quoted facts about the reference nets; everything else
//! is compared against the brute-force oracle.

mod common;

use std::collections::BTreeSet;

use common::{cluster_names, marking, set, Oracle};
use lucency::error::Error;
use lucency::fixtures;
use lucency::home_cluster::{
    clean_net, conn_nodes, find_home_clusters, short_circuit, verify_relating_theorem, DetectionMode,
};
use lucency::lucency::{agreement_split, check_lucency, find_conflict_pairs, is_conflict_pair, transparency};
use lucency::net::{
    classify_structure, cluster_marking, compute_clusters, path_predicates, Cluster, Marking, Node, NodePath, PetriNet,
};
use lucency::semantics::{behavior, enabled, explore, explore_prefix, fire, fire_sequence};
use lucency::structural::{
    check_no_domination, disentangle, expedite_apply, expedite_check, expedite_closure, path_max_tokens,
    rooted_path_from_place, FiringSequence,
};

const CAP: usize = 10_000;

fn names(net: &PetriNet, ts: impl IntoIterator<Item = lucency::net::TransitionId>) -> BTreeSet<String> {
    ts.into_iter().map(|t| net.transition_name(t).to_string()).collect()
}

fn node_names(net: &PetriNet, nodes: &BTreeSet<Node>) -> BTreeSet<String> {
    nodes.iter().map(|&n| net.node_name(n).to_string()).collect()
}

fn cluster_of(net: &PetriNet, node: &str) -> Cluster {
    Cluster::of(net, net.node_id(node).unwrap())
}

fn display_set(net: &PetriNet, ms: impl IntoIterator<Item = Marking>) -> BTreeSet<String> {
    ms.into_iter().map(|m| m.display(net).to_string()).collect()
}

// ---- structure ----

#[test]
fn preset_postset_of_n2_t3() {
    let (net, _) = fixtures::n2();
    let (pre, post) = net.preset_postset(&["t3"]).unwrap();
    assert_eq!(node_names(&net, &pre), set(&["p2"]));
    assert_eq!(node_names(&net, &post), set(&["p3"]));
}

#[test]
fn preset_postset_of_n3_t2_matches_arc_scan() {
    let (net, _) = fixtures::n3();
    let (pre, post) = net.preset_postset(&["t2"]).unwrap();
    let t2 = net.node_id("t2").unwrap();
    let scan_pre: BTreeSet<Node> = net.arcs().filter(|&(_, b)| b == t2).map(|(a, _)| a).collect();
    let scan_post: BTreeSet<Node> = net.arcs().filter(|&(a, _)| a == t2).map(|(_, b)| b).collect();
    assert_eq!(pre, scan_pre);
    assert_eq!(post, scan_post);
    assert_eq!(node_names(&net, &pre), set(&["p2", "p3"]));
    assert_eq!(node_names(&net, &post), set(&["p1", "p4"]));
}

#[test]
fn preset_postset_empty_side_and_unknown_node() {
    let mut b = PetriNet::builder("x");
    b.add_place("a").add_place("b");
    b.add_transition_with("t", &["a"], &["b"]).unwrap();
    let net = b.build().unwrap();
    let (pre, _) = net.preset_postset(&["a"]).unwrap();
    assert!(pre.is_empty());
    let (_, post) = net.preset_postset(&["b"]).unwrap();
    assert!(post.is_empty());
    assert!(matches!(net.preset_postset(&["zz"]), Err(Error::NotInNet(_))));
}

#[test]
fn clusters_of_n1_and_n3() {
    let (n1, _) = fixtures::n1();
    let got: BTreeSet<_> = compute_clusters(&n1).iter().map(|c| cluster_names(c, &n1)).collect();
    let want: BTreeSet<_> = [
        set(&["p1", "t1", "t2"]),
        set(&["p2", "t3"]),
        set(&["p3", "t4", "t5"]),
        set(&["p4"]),
    ]
    .into();
    assert_eq!(got, want);

    let (n3, _) = fixtures::n3();
    let got: BTreeSet<_> = compute_clusters(&n3).iter().map(|c| cluster_names(c, &n3)).collect();
    let want: BTreeSet<_> = [
        set(&["p1", "t1"]),
        set(&["p2", "p3", "t2"]),
        set(&["p4", "p5", "t3"]),
        set(&["p6", "t4"]),
    ]
    .into();
    assert_eq!(got, want);
}

#[test]
fn clusters_are_ordered_by_smallest_member() {
    for (_, net, _) in fixtures::all() {
        let order: Vec<String> = compute_clusters(&net)
            .iter()
            .map(|c| c.smallest_name(&net).to_string())
            .collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
        let oracle: BTreeSet<_> = Oracle::new(&net).clusters();
        let got: BTreeSet<_> = compute_clusters(&net).iter().map(|c| cluster_names(c, &net)).collect();
        assert_eq!(got, oracle);
    }
}

#[test]
fn single_place_single_transition_is_one_cluster() {
    let mut b = PetriNet::builder("x");
    b.add_place("p");
    b.add_transition_with("t", &["p"], &["p"]).unwrap();
    let net = b.build().unwrap();
    let cs = compute_clusters(&net);
    assert_eq!(cs.len(), 1);
    assert_eq!(cluster_names(&cs[0], &net), set(&["p", "t"]));
}

#[test]
fn cluster_markings() {
    let (n1, _) = fixtures::n1();
    assert_eq!(cluster_marking(&cluster_of(&n1, "p4")), marking(&n1, &["p4"]));
    let (n3, _) = fixtures::n3();
    assert_eq!(cluster_marking(&cluster_of(&n3, "t2")), marking(&n3, &["p2", "p3"]));
    assert!(cluster_marking(&Cluster::new(BTreeSet::new(), BTreeSet::new())).is_empty());
}

#[test]
fn structure_classification() {
    let (n2, _) = fixtures::n2();
    assert!(!classify_structure(&n2).free_choice);
    let (n3, _) = fixtures::n3();
    let s3 = classify_structure(&n3);
    assert!(s3.free_choice && s3.t_net && s3.strongly_connected);
    let (n1, _) = fixtures::n1();
    let s1 = classify_structure(&n1);
    let o1 = Oracle::new(&n1);
    assert_eq!(s1.free_choice, o1.free_choice());
    assert_eq!(s1.strongly_connected, o1.strongly_connected());
    assert!(s1.free_choice && s1.proper && !s1.strongly_connected);
}

#[test]
fn path_predicates_examples() {
    let (n3, _) = fixtures::n3();
    let p = NodePath::from_names(&n3, &["p5", "t3", "p3", "t2", "p4"]).unwrap();
    let c = path_predicates(&n3, &p, None);
    assert!(c.elementary && !c.disentangled);

    let q: BTreeSet<_> = [n3.place_id("p1").unwrap()].into();
    let p = NodePath::from_names(&n3, &["p5", "t3", "p3", "t2", "p1"]).unwrap();
    let c = path_predicates(&n3, &p, Some(&q));
    assert!(c.elementary && c.disentangled && c.q_rooted);

    let single = NodePath::from_names(&n3, &["p2"]).unwrap();
    let c = path_predicates(&n3, &single, Some(&q));
    assert!(c.elementary && c.disentangled && !c.q_rooted);
    let q2: BTreeSet<_> = [n3.place_id("p2").unwrap()].into();
    assert!(path_predicates(&n3, &single, Some(&q2)).q_rooted);
}

#[test]
fn node_path_rejects_missing_arcs() {
    let (n3, _) = fixtures::n3();
    assert!(NodePath::from_names(&n3, &["p1", "t2"]).is_err());
}

// ---- semantics ----

#[test]
fn enabled_examples() {
    let (n2, _) = fixtures::n2();
    assert_eq!(names(&n2, enabled(&n2, &marking(&n2, &["p2", "p5"]))), set(&["t3"]));
    assert_eq!(names(&n2, enabled(&n2, &marking(&n2, &["p2", "p6"]))), set(&["t3"]));
    assert!(enabled(&n2, &Marking::empty()).is_empty());
    let (n3, m3) = fixtures::n3();
    assert_eq!(names(&n3, enabled(&n3, &m3)), set(&["t1", "t4"]));
}

#[test]
fn fire_examples_match_oracle() {
    let (n2, m2) = fixtures::n2();
    let o = Oracle::new(&n2);
    let t1 = n2.transition_id("t1").unwrap();
    let got = fire(&n2, &m2, t1).unwrap();
    assert_eq!(got, o.marking(&o.fire(&o.vm(&m2, &n2), t1.index()), &n2));
    assert_eq!(got, marking(&n2, &["p2", "p5"]));

    let (n3, m3) = fixtures::n3();
    let o = Oracle::new(&n3);
    let t4 = n3.transition_id("t4").unwrap();
    let got = fire(&n3, &m3, t4).unwrap();
    assert_eq!(got, o.marking(&o.fire(&o.vm(&m3, &n3), t4.index()), &n3));
    assert_eq!(got, marking(&n3, &["p1", "p3", "p5"]));

    let mut b = PetriNet::builder("loop");
    b.add_place("p");
    b.add_transition_with("t", &["p"], &["p"]).unwrap();
    let lp = b.build().unwrap();
    let m = marking(&lp, &["p"]);
    assert_eq!(fire(&lp, &m, lp.transition_id("t").unwrap()).unwrap(), m);
}

#[test]
fn fire_errors() {
    let (n2, m2) = fixtures::n2();
    let t3 = n2.transition_id("t3").unwrap();
    assert!(matches!(fire(&n2, &m2, t3), Err(Error::NotEnabled(_))));
    let (n1, _) = fixtures::n1();
    let foreign = n1.transition_id("t5").unwrap();
    let mut b = PetriNet::builder("tiny");
    b.add_place("a");
    b.add_transition_with("u", &["a"], &["a"]).unwrap();
    let tiny = b.build().unwrap();
    assert!(matches!(
        fire(&tiny, &marking(&tiny, &["a"]), foreign),
        Err(Error::NotInNet(_))
    ));
}

#[test]
fn fire_sequence_examples() {
    let (n3, m3) = fixtures::n3();
    let seq = |names: &[&str]| -> Vec<_> { names.iter().map(|n| n3.transition_id(n).unwrap()).collect() };
    assert_eq!(
        fire_sequence(&n3, &m3, &seq(&["t1", "t4"])).unwrap(),
        marking(&n3, &["p2", "p3", "p5"])
    );
    assert_eq!(
        fire_sequence(&n3, &m3, &seq(&["t1", "t2", "t1", "t4"])).unwrap(),
        marking(&n3, &["p2", "p4", "p5"])
    );
    assert_eq!(fire_sequence(&n3, &m3, &[]).unwrap(), m3);
    let err = fire_sequence(&n3, &m3, &seq(&["t1", "t3"])).unwrap_err();
    assert!(matches!(err, Error::SequenceNotEnabled { index: 1, .. }));
}

#[test]
fn explore_examples() {
    let (n2, m2) = fixtures::n2();
    let rg = explore(&n2, &m2, CAP).unwrap();
    let want: BTreeSet<String> = ["[p1]", "[p2,p5]", "[p2,p6]", "[p3,p5]", "[p3,p6]", "[p4]"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    assert_eq!(display_set(&n2, rg.markings().iter().cloned()), want);

    let (n1, m1) = fixtures::n1();
    assert_eq!(explore(&n1, &m1, CAP).unwrap().len(), 4);

    let mut b = PetriNet::builder("grow");
    b.add_place("p").add_place("q");
    b.add_transition_with("t", &["p"], &["p", "q"]).unwrap();
    let g = b.build().unwrap();
    assert!(matches!(
        explore(&g, &marking(&g, &["p"]), CAP),
        Err(Error::Unbounded { .. })
    ));
    assert!(matches!(
        explore(&n2, &m2, 3),
        Err(Error::StateSpaceExceeded { cap: 3 })
    ));
}

#[test]
fn explore_matches_oracle_on_fixtures() {
    for (_, net, m0) in fixtures::all() {
        let o = Oracle::new(&net);
        let states = o.reach(&o.vm(&m0, &net), CAP).unwrap();
        let rg = explore(&net, &m0, CAP).unwrap();
        let got: BTreeSet<Vec<u32>> = rg.markings().iter().map(|m| o.vm(m, &net)).collect();
        assert_eq!(got, states.into_iter().collect());
        for e in rg.edges() {
            let from = o.vm(rg.marking(e.from), &net);
            assert_eq!(o.vm(rg.marking(e.to), &net), o.fire(&from, e.transition.index()));
        }
    }
}

#[test]
fn behavior_examples() {
    let (n1, m1) = fixtures::n1();
    let b1 = behavior(&n1, &explore(&n1, &m1, CAP).unwrap()).unwrap();
    assert!(!b1.live);
    assert_eq!(b1.home_markings, [marking(&n1, &["p4"])].into());

    let (n3, m3) = fixtures::n3();
    let rg3 = explore(&n3, &m3, CAP).unwrap();
    let b3 = behavior(&n3, &rg3).unwrap();
    assert!(b3.live && b3.safe && b3.deadlock_free);
    assert_eq!(b3.home_markings, rg3.markings().iter().cloned().collect());
    assert!(b3.dead_markings.is_empty());
}

#[test]
fn behavior_matches_oracle_on_fixtures() {
    for (_, net, m0) in fixtures::all() {
        let o = Oracle::new(&net);
        let states = o.reach(&o.vm(&m0, &net), CAP).unwrap();
        let b = behavior(&net, &explore(&net, &m0, CAP).unwrap()).unwrap();
        let homes: BTreeSet<Vec<u32>> = b.home_markings.iter().map(|m| o.vm(m, &net)).collect();
        assert_eq!(homes, o.home_markings(&states));
        assert_eq!(b.live, o.live(&states));
    }
}

#[test]
fn behavior_needs_a_complete_graph() {
    let (n2, m2) = fixtures::n2();
    let partial = explore_prefix(&n2, &m2, 2);
    assert!(!partial.complete());
    assert_eq!(behavior(&n2, &partial).unwrap_err(), Error::IncompleteStateSpace);
}

// ---- lucency ----

#[test]
fn lucency_examples() {
    let (n2, m2) = fixtures::n2();
    let v = check_lucency(&n2, &explore(&n2, &m2, CAP).unwrap()).unwrap();
    assert!(!v.lucent);
    assert_eq!(
        v.witness,
        Some((marking(&n2, &["p2", "p5"]), marking(&n2, &["p2", "p6"])))
    );

    let (n1, m1) = fixtures::n1();
    assert!(check_lucency(&n1, &explore(&n1, &m1, CAP).unwrap()).unwrap().lucent);

    let (n3, m3) = fixtures::n3();
    let v = check_lucency(&n3, &explore(&n3, &m3, CAP).unwrap()).unwrap();
    assert!(!v.lucent);
    assert_eq!(
        v.witness,
        Some((marking(&n3, &["p1", "p3", "p6"]), marking(&n3, &["p1", "p4", "p6"])))
    );
}

#[test]
fn lucency_matches_all_pairs_oracle_on_fixtures() {
    for (_, net, m0) in fixtures::all() {
        let o = Oracle::new(&net);
        let states = o.reach(&o.vm(&m0, &net), CAP).unwrap();
        let v = check_lucency(&net, &explore(&net, &m0, CAP).unwrap()).unwrap();
        assert_eq!(v.lucent, o.lucent(&states));
        assert_eq!(v.witness.is_some(), !v.lucent);
    }
}

/// Two concurrent branches where one token waits for a synchronisation
/// that the other branch has to enable first.
fn waiting_token_net() -> (PetriNet, Marking) {
    let mut b = PetriNet::builder("waiting");
    for p in ["a", "b", "c", "w", "d"] {
        b.add_place(p);
    }
    b.add_transition_with("s", &["a"], &["b", "w"]).unwrap();
    b.add_transition_with("u", &["b"], &["c"]).unwrap();
    b.add_transition_with("j", &["c", "w"], &["d"]).unwrap();
    let net = b.build().unwrap();
    let m = marking(&net, &["a"]);
    (net, m)
}

#[test]
fn transparency_examples() {
    let (net, m) = waiting_token_net();
    let rg = explore(&net, &m, CAP).unwrap();
    let o = Oracle::new(&net);
    let t = transparency(&net, &rg).unwrap();
    for (mk, ok) in &t.per_marking {
        assert_eq!(*ok, o.transparent(&o.vm(mk, &net)), "{}", mk.display(&net));
    }
    assert!(check_lucency(&net, &rg).unwrap().lucent);
    assert!(!t.fully_transparent);
    // [b,w] hides the token on w
    let hidden = marking(&net, &["b", "w"]);
    assert!(t.per_marking.iter().any(|(mk, ok)| *mk == hidden && !ok));
    // [d] enables nothing but is not empty
    let dead = marking(&net, &["d"]);
    assert!(t.per_marking.iter().any(|(mk, ok)| *mk == dead && !ok));

    let (n1, m1) = fixtures::n1();
    let t1 = transparency(&n1, &explore(&n1, &m1, CAP).unwrap()).unwrap();
    assert!(t1.per_marking.iter().any(|(mk, ok)| *mk == m1 && *ok));
}

#[test]
fn conflict_pair_examples() {
    let (n3, m3) = fixtures::n3();
    let rg = explore(&n3, &m3, CAP).unwrap();
    let pairs = find_conflict_pairs(&n3, &rg).unwrap();
    let cp = pairs
        .iter()
        .find(|c| c.m1 == marking(&n3, &["p2", "p3", "p5"]) && c.m2 == marking(&n3, &["p2", "p4", "p5"]))
        .expect("conflict-pair of the running example");
    assert_eq!(cp.agree, marking(&n3, &["p2", "p5"]));
    assert_eq!(cp.disagree1, marking(&n3, &["p3"]));
    assert_eq!(cp.disagree2, marking(&n3, &["p4"]));

    let (n1, m1) = fixtures::n1();
    assert!(find_conflict_pairs(&n1, &explore(&n1, &m1, CAP).unwrap())
        .unwrap()
        .is_empty());

    let mut b = PetriNet::builder("still");
    b.add_place("a").add_place("b");
    b.add_transition_with("t", &["a"], &["b"]).unwrap();
    let still = b.build().unwrap();
    let rg = explore(&still, &marking(&still, &["b"]), CAP).unwrap();
    assert_eq!(rg.len(), 1);
    assert!(find_conflict_pairs(&still, &rg).unwrap().is_empty());
}

#[test]
fn conflict_pairs_match_oracle_on_fixtures() {
    for (_, net, m0) in fixtures::all() {
        let o = Oracle::new(&net);
        let states = o.reach(&o.vm(&m0, &net), CAP).unwrap();
        let mut want = BTreeSet::new();
        for a in &states {
            for b in &states {
                if a < b && o.is_conflict_pair(&states, a, b) {
                    want.insert((a.clone(), b.clone()));
                }
            }
        }
        let rg = explore(&net, &m0, CAP).unwrap();
        let got: BTreeSet<_> = find_conflict_pairs(&net, &rg)
            .unwrap()
            .iter()
            .map(|c| {
                let (a, b) = (o.vm(&c.m1, &net), o.vm(&c.m2, &net));
                assert!(is_conflict_pair(&net, &c.m1, &c.m2));
                (a.clone().min(b.clone()), a.max(b))
            })
            .collect();
        assert_eq!(got, want, "{}", net.name());
    }
}

#[test]
fn agreement_split_examples() {
    let (n3, _) = fixtures::n3();
    let (a, d1, d2) = agreement_split(&marking(&n3, &["p2", "p3", "p5"]), &marking(&n3, &["p2", "p4", "p5"]));
    assert_eq!(
        (a, d1, d2),
        (
            marking(&n3, &["p2", "p5"]),
            marking(&n3, &["p3"]),
            marking(&n3, &["p4"])
        )
    );
    let m = marking(&n3, &["p1", "p6"]);
    assert_eq!(agreement_split(&m, &m), (m.clone(), Marking::empty(), Marking::empty()));
    let (a, d1, d2) = agreement_split(&marking(&n3, &["p1", "p1"]), &marking(&n3, &["p1"]));
    assert_eq!(
        (a, d1, d2),
        (marking(&n3, &["p1"]), marking(&n3, &["p1"]), Marking::empty())
    );
}

// ---- structural ----

fn n3_seq(names: &[&str]) -> (PetriNet, FiringSequence) {
    let (n3, m3) = fixtures::n3();
    let seq = FiringSequence::from_names(&n3, m3, names).unwrap();
    (n3, seq)
}

#[test]
fn expedite_check_examples() {
    // Positions are 0-based.
    let (n3, seq) = n3_seq(&["t1", "t4", "t2"]);
    assert!(expedite_check(&n3, &seq, 0, 1).unwrap());
    assert!(!expedite_check(&n3, &seq, 0, 2).unwrap());
    let (n3b, same) = n3_seq(&["t1", "t2", "t1"]);
    assert!(!expedite_check(&n3b, &same, 0, 2).unwrap());
    assert!(matches!(
        expedite_check(&n3, &seq, 2, 1),
        Err(Error::IndexOutOfRange { .. })
    ));
    assert!(matches!(
        expedite_check(&n3, &seq, 0, 3),
        Err(Error::IndexOutOfRange { .. })
    ));
}

#[test]
fn expedite_apply_example() {
    let (n3, seq) = n3_seq(&["t1", "t4", "t2"]);
    let out = expedite_apply(&n3, &seq, 0, 1).unwrap();
    assert_eq!(out.names(&n3), vec!["t4", "t1", "t2"]);
    assert_eq!(out.target(&n3), seq.target(&n3));
    assert!(matches!(
        expedite_apply(&n3, &seq, 0, 2),
        Err(Error::ExpediteNotPermitted { .. })
    ));
}

#[test]
fn expedite_closure_examples() {
    let (n3, empty) = n3_seq(&[]);
    let c = expedite_closure(&n3, &empty, 100);
    assert_eq!(c.sequences.len(), 1);
    let (_, one) = n3_seq(&["t1"]);
    assert_eq!(expedite_closure(&n3, &one, 100).sequences, [one.clone()].into());

    let (n3, two) = n3_seq(&["t1", "t4"]);
    let got: BTreeSet<Vec<String>> = expedite_closure(&n3, &two, 100)
        .sequences
        .iter()
        .map(|s| s.names(&n3))
        .collect();
    // Brute force over both orders.
    let (_, m3) = fixtures::n3();
    let mut want = BTreeSet::new();
    for order in [["t1", "t4"], ["t4", "t1"]] {
        if let Ok(s) = FiringSequence::from_names(&n3, m3.clone(), &order) {
            assert_eq!(s.target(&n3), two.target(&n3));
            want.insert(s.names(&n3));
        }
    }
    assert_eq!(got, want);
    assert_eq!(got.len(), 2);
}

#[test]
fn disentangle_worked_example() {
    let (n3, _) = fixtures::n3();
    let rho = NodePath::from_names(&n3, &["p6", "t4", "p5", "t3", "p3", "t2", "p4", "t3", "p3", "t2", "p1"]).unwrap();
    let out = disentangle(&n3, &rho, &cluster_of(&n3, "p1")).unwrap();
    assert_eq!(out.names(&n3), vec!["p6", "t4", "p5", "t3", "p3", "t2", "p1"]);
}

#[test]
fn disentangle_short_and_fixed_cases() {
    let (n3, _) = fixtures::n3();
    let c = cluster_of(&n3, "p1");
    let rho = NodePath::from_names(&n3, &["p1", "t1", "p2", "t2", "p1"]).unwrap();
    assert_eq!(disentangle(&n3, &rho, &c).unwrap().names(&n3), vec!["p1"]);
    let clean = NodePath::from_names(&n3, &["p5", "t3", "p3", "t2", "p1"]).unwrap();
    assert_eq!(disentangle(&n3, &clean, &c).unwrap(), clean);
    let bad = NodePath::from_names(&n3, &["p5", "t3"]).unwrap();
    assert!(matches!(disentangle(&n3, &bad, &c), Err(Error::InvalidPath(_))));
}

#[test]
fn rooted_path_examples() {
    let (n1, m1) = fixtures::n1();
    let rg = explore(&n1, &m1, CAP).unwrap();
    let c = cluster_of(&n1, "p4");
    let path = rooted_path_from_place(&n1, &rg, n1.place_id("p1").unwrap(), &c)
        .unwrap()
        .unwrap();
    let q: BTreeSet<_> = c.places().clone();
    let class = path_predicates(&n1, &path, Some(&q));
    assert!(class.disentangled && class.q_rooted);
    assert_eq!(path.names(&n1).first().map(String::as_str), Some("p1"));
    assert_eq!(path.names(&n1), vec!["p1", "t1", "p2", "t3", "p3", "t4", "p4"]);
    let at = rooted_path_from_place(&n1, &rg, n1.place_id("p4").unwrap(), &c)
        .unwrap()
        .unwrap();
    assert_eq!(at.names(&n1), vec!["p4"]);

    let (net, m) = waiting_token_net();
    let rg = explore(&net, &m, CAP).unwrap();
    let mut b = net.to_builder();
    b.add_place("never");
    b.add_transition_with("feed", &["never"], &["a"]).unwrap();
    let bigger = b.build().unwrap();
    let m_big = m.transfer(&net, &bigger).unwrap();
    let rg_big = explore(&bigger, &m_big, CAP).unwrap();
    let c = cluster_of(&bigger, "d");
    assert!(
        rooted_path_from_place(&bigger, &rg_big, bigger.place_id("never").unwrap(), &c)
            .unwrap()
            .is_none()
    );
    assert!(rg.len() <= rg_big.len());
}

#[test]
fn path_max_tokens_examples() {
    let (n1, m1) = fixtures::n1();
    let rg = explore(&n1, &m1, CAP).unwrap();
    let o = Oracle::new(&n1);
    let path = NodePath::from_names(&n1, &["p1", "t1", "p2", "t3", "p3", "t4", "p4"]).unwrap();
    let brute = |o: &Oracle, net: &PetriNet, rg: &lucency::semantics::ReachabilityGraph, path: &NodePath| {
        let idx: Vec<usize> = path
            .places()
            .map(|p| o.places.iter().position(|q| q == net.place_name(p)).unwrap())
            .collect();
        rg.markings()
            .iter()
            .map(|m| {
                let v = o.vm(m, net);
                idx.iter().map(|&i| u64::from(v[i])).sum::<u64>()
            })
            .max()
            .unwrap()
    };
    assert_eq!(path_max_tokens(&rg, &path).unwrap(), brute(&o, &n1, &rg, &path));
    assert_eq!(path_max_tokens(&rg, &path).unwrap(), 1);

    let (n3, m3) = fixtures::n3();
    let rg3 = explore(&n3, &m3, CAP).unwrap();
    let o3 = Oracle::new(&n3);
    let path = NodePath::from_names(&n3, &["p6", "t4", "p5", "t3", "p3", "t2", "p1"]).unwrap();
    let got = path_max_tokens(&rg3, &path).unwrap();
    assert_eq!(got, brute(&o3, &n3, &rg3, &path));
    // The initial marking alone puts a token on p6, p3 and p1.
    assert_eq!(got, 3);
    assert!(got > 1);

    let (net, m) = waiting_token_net();
    let mut b = net.to_builder();
    b.add_place("never");
    b.add_transition_with("feed", &["never"], &["a"]).unwrap();
    let n = b.build().unwrap();
    let rg = explore(&n, &m.transfer(&net, &n).unwrap(), CAP).unwrap();
    let unmarked = NodePath::from_names(&n, &["never"]).unwrap();
    assert_eq!(path_max_tokens(&rg, &unmarked).unwrap(), 0);
}

#[test]
fn domination_examples() {
    let (n1, m1) = fixtures::n1();
    let rg = explore(&n1, &m1, CAP).unwrap();
    assert!(check_no_domination(&rg, Some(&cluster_of(&n1, "p4")))
        .unwrap()
        .is_empty());

    let (n2, m2) = fixtures::n2();
    let rg = explore(&n2, &m2, CAP).unwrap();
    let o = Oracle::new(&n2);
    let vs: Vec<Vec<u32>> = rg.markings().iter().map(|m| o.vm(m, &n2)).collect();
    let brute = vs
        .iter()
        .any(|a| vs.iter().any(|b| a != b && a.iter().zip(b).all(|(x, y)| x >= y)));
    assert!(!brute);
    assert!(check_no_domination(&rg, None).unwrap().is_empty());

    let mut b = PetriNet::builder("grow");
    b.add_place("p").add_place("q");
    b.add_transition_with("t", &["p"], &["p", "q"]).unwrap();
    let g = b.build().unwrap();
    let prefix = explore_prefix(&g, &marking(&g, &["p"]), 3);
    let v = check_no_domination(&prefix, None).unwrap();
    assert!(v
        .iter()
        .any(|d| d.larger == marking(&g, &["p", "q"]) && d.smaller == marking(&g, &["p"])));
}

// ---- home clusters ----

#[test]
fn conn_examples() {
    let (n1, m1) = fixtures::n1();
    let o = Oracle::new(&n1);
    assert_eq!(node_names(&n1, &conn_nodes(&n1, &m1)), o.conn(&o.vm(&m1, &n1)));
    assert_eq!(conn_nodes(&n1, &m1).len(), n1.node_count());
    let (n3, m3) = fixtures::n3();
    assert_eq!(conn_nodes(&n3, &m3).len(), n3.node_count());

    let mut b = PetriNet::builder("x");
    b.add_place("a").add_place("b").add_place("up");
    b.add_transition_with("t", &["a"], &["b"]).unwrap();
    b.add_transition_with("u", &["up"], &["a"]).unwrap();
    let net = b.build().unwrap();
    let conn = node_names(&net, &conn_nodes(&net, &marking(&net, &["a"])));
    assert_eq!(conn, set(&["a", "b", "t"]));
}

#[test]
fn clean_examples() {
    let (n1, m1) = fixtures::n1();
    assert_eq!(clean_net(&n1, &m1).unwrap(), n1);
    let (n2, m2) = fixtures::n2();
    let o = Oracle::new(&n2);
    assert_eq!(o.conn(&o.vm(&m2, &n2)).len(), n2.node_count());
    assert_eq!(clean_net(&n2, &m2).unwrap(), n2);

    let mut b = PetriNet::builder("x");
    b.add_place("a").add_place("b").add_place("src");
    b.add_transition_with("t", &["a"], &["b"]).unwrap();
    b.add_transition_with("dead", &["src"], &["b"]).unwrap();
    let net = b.build().unwrap();
    let clean = clean_net(&net, &marking(&net, &["a"])).unwrap();
    assert!(!clean.has_place("src") && !clean.has_transition("dead"));
    assert!(matches!(
        clean_net(&net, &marking(&net, &["b"])),
        Err(Error::CleanFailed(_))
    ));
}

fn arcs_of(net: &PetriNet) -> BTreeSet<(String, String)> {
    net.arcs()
        .map(|(a, b)| (net.node_name(a).to_string(), net.node_name(b).to_string()))
        .collect()
}

#[test]
fn short_circuit_examples() {
    let (n1, m1) = fixtures::n1();
    let sc = short_circuit(&n1, &cluster_of(&n1, "p4"), &m1, CAP).unwrap();
    let mut want = arcs_of(&n1);
    want.insert(("p4".into(), "t_C__p4".into()));
    want.insert(("t_C__p4".into(), "p1".into()));
    assert_eq!(arcs_of(&sc), want);

    let c = cluster_of(&n1, "t1");
    let sc = short_circuit(&n1, &c, &m1, CAP).unwrap();
    let t_c = sc.transition_id("t_C__p1").unwrap();
    let t1 = sc.transition_id("t1").unwrap();
    assert_eq!(sc.preset(t_c), sc.preset(t1));
    assert_eq!(sc.postset(t_c), &[sc.place_id("p1").unwrap()]);
    assert!(classify_structure(&sc).free_choice);

    // A single place cluster marked initially gives a self-loop.
    let sc = short_circuit(&n1, &cluster_of(&n1, "p1"), &m1, CAP).unwrap();
    let t_c = sc.transition_id("t_C__p1").unwrap();
    assert_eq!(sc.preset(t_c), sc.postset(t_c));
}

#[test]
fn short_circuit_rejects_unsafe_markings() {
    let (n1, _) = fixtures::n1();
    let two = marking(&n1, &["p1", "p1"]);
    assert!(matches!(
        short_circuit(&n1, &cluster_of(&n1, "p4"), &two, CAP),
        Err(Error::UnsafeInitialMarking(_))
    ));
}

#[test]
fn home_cluster_examples() {
    let expect = |net: &PetriNet, m: &Marking, want: Vec<BTreeSet<String>>| {
        for mode in [
            DetectionMode::Behavioral,
            DetectionMode::Structural,
            DetectionMode::Both,
        ] {
            if mode != DetectionMode::Behavioral && !classify_structure(net).free_choice {
                assert!(matches!(
                    find_home_clusters(net, m, mode, CAP),
                    Err(Error::NotFreeChoice(_))
                ));
                continue;
            }
            let r = find_home_clusters(net, m, mode, CAP).unwrap();
            let got: Vec<_> = r.home_clusters.iter().map(|c| cluster_names(c, net)).collect();
            assert_eq!(got, want, "{} {mode:?}", net.name());
            assert!(r.disagreements.is_empty());
        }
    };
    let (n1, m1) = fixtures::n1();
    expect(&n1, &m1, vec![set(&["p4"])]);
    let (n3, m3) = fixtures::n3();
    expect(&n3, &m3, vec![]);
    let (n2, m2) = fixtures::n2();
    expect(&n2, &m2, vec![set(&["p4"])]);
}

#[test]
fn home_clusters_match_oracle_on_fixtures() {
    for (_, net, m0) in fixtures::all() {
        let o = Oracle::new(&net);
        let states = o.reach(&o.vm(&m0, &net), CAP).unwrap();
        let homes = o.home_markings(&states);
        let want: Vec<BTreeSet<String>> = o
            .clusters()
            .into_iter()
            .filter(|c| homes.contains(&o.cluster_vm(c)))
            .collect();
        let r = find_home_clusters(&net, &m0, DetectionMode::Behavioral, CAP).unwrap();
        let got: Vec<_> = r.home_clusters.iter().map(|c| cluster_names(c, &net)).collect();
        assert_eq!(
            got.iter().cloned().collect::<BTreeSet<_>>(),
            want.into_iter().collect::<BTreeSet<_>>()
        );
    }
}

#[test]
fn relating_theorem_on_n1() {
    let (n1, m1) = fixtures::n1();
    let rows = verify_relating_theorem(&n1, &m1, CAP).unwrap();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert!(row.agrees());
    }
    let p4 = rows
        .iter()
        .find(|r| cluster_names(&r.cluster, &n1) == set(&["p4"]))
        .unwrap();
    assert!(p4.home_in_original && p4.home_in_short_circuit == Some(true) && p4.live_and_bounded);
    let p1 = rows
        .iter()
        .find(|r| cluster_names(&r.cluster, &n1) == set(&["p1", "t1", "t2"]))
        .unwrap();
    assert!(!p1.home_in_original && p1.home_in_short_circuit == Some(false) && !p1.live_and_bounded);
    // p4 is a sink of the short-circuited net, which is therefore not
    // strongly connected.
    assert!(!p1.strongly_connected && p1.free_choice && p1.hat_is_cluster);
}

#[test]
fn relating_theorem_on_n3() {
    let (n3, m3) = fixtures::n3();
    let rows = verify_relating_theorem(&n3, &m3, CAP).unwrap();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert!(row.agrees());
        assert!(!row.home_in_original);
    }
}
