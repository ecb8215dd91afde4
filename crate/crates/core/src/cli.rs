//! Command-line surface. [`run_cli`] takes the argument vector and returns
//! the process exit code; the binary only forwards to it.

use std::ffi::OsString;
use std::io::{Read as _, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::generator::{generate, GenConfig, Mutation};
use crate::home_cluster::{find_home_clusters, short_circuit, short_circuited_clean_net, DetectionMode};
use crate::io::report::{
    AnalyzeReport, BehaviorJson, CheckTheoremsReport, ConflictPairsReport, HomeClustersJson, LucencyReport, NetSummary,
    NetTextReport, PathsReport,
};
use crate::io::{export_dot, parse_net, serialize_net, Highlight, ParseError};
use crate::lucency::{check_lucency, check_lucency_marked, find_conflict_pairs, transparency};
use crate::net::{Cluster, Marking, Node, NodePath, PetriNet};
use crate::semantics::{behavior, explore, DEFAULT_CAP};
use crate::structural::{path_max_tokens, rooted_disentangled_paths, rooted_path_from_place};
use crate::suite::{self, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_STATE_SPACE: i32 = 3;

/// Environment variable overriding the default `--cap`.
pub const CAP_ENV: &str = "LUCENCY_DEFAULT_CAP";

#[derive(Parser, Debug)]
#[command(
    name = "lucency",
    version,
    about = "Lucency and home-cluster analysis of free-choice Petri nets"
)]
struct Cli {
    /// Largest number of reachable markings to explore.
    #[arg(long, global = true, env = CAP_ENV, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Emit JSON reports.
    #[arg(long, global = true)]
    json: bool,
    /// Print only artifacts (nets, DOT) and errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Input {
    /// Net file, or `-` for standard input.
    file: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Structure and behavior of a marked net.
    Analyze(Input),
    /// Whether distinct reachable markings enable distinct transition sets.
    Lucency(Input),
    /// Clusters whose marking is a home marking.
    HomeClusters {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = ModeArg::Behavioral)]
        mode: ModeArg,
    },
    /// Pairs of reachable markings that block each other.
    ConflictPairs(Input),
    /// Disentangled paths rooted in a cluster, with their token bound.
    Paths {
        #[command(flatten)]
        input: Input,
        /// A place of the target cluster.
        #[arg(long)]
        cluster: String,
        /// Enumerate every rooted path from this place instead of one per place.
        #[arg(long)]
        from: Option<String>,
        #[arg(long, default_value_t = 1000)]
        limit: usize,
    },
    /// The net with a transition from a cluster back to the initial marking.
    ShortCircuit {
        #[command(flatten)]
        input: Input,
        /// A place of the cluster to short-circuit.
        #[arg(long)]
        cluster: String,
        /// Keep nodes not reachable from the initial marking.
        #[arg(long)]
        no_clean: bool,
    },
    /// A random proper free-choice net.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = GenConfig::default().place_budget)]
        places: usize,
        #[arg(long, default_value_t = GenConfig::default().transition_budget)]
        transitions: usize,
        #[arg(long, default_value_t = GenConfig::default().branching)]
        branching: usize,
        /// Close the net with a back edge.
        #[arg(long)]
        strongly_connected: bool,
        /// Draw an unconstrained net instead of one with a home cluster.
        #[arg(long)]
        no_home_cluster: bool,
        #[arg(long, value_enum)]
        mutation: Option<MutationArg>,
        #[arg(long, default_value_t = GenConfig::default().max_states)]
        max_states: usize,
    },
    /// Runs the property suite over generated nets.
    CheckTheorems {
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        /// Reachable markings allowed per generated net.
        #[arg(long, default_value_t = SuiteConfig::default().max_states)]
        budget: usize,
        /// Sequences kept per expedite closure.
        #[arg(long, default_value_t = SuiteConfig::default().expedite_budget)]
        expedite_budget: usize,
        #[arg(long, default_value_t = SuiteConfig::default().path_pairs)]
        path_pairs: usize,
    },
    /// Graphviz rendering of a net.
    Dot {
        #[command(flatten)]
        input: Input,
        /// Comma separated node names to highlight, such as a path.
        #[arg(long, value_delimiter = ',')]
        highlight: Vec<String>,
        /// Highlight the cluster of this place.
        #[arg(long)]
        cluster: Option<String>,
        /// Highlight the disagreement places of the first conflict-pair.
        #[arg(long)]
        conflict_pair: bool,
        /// Omit the initial marking.
        #[arg(long)]
        no_marking: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Behavioral,
    Structural,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MutationArg {
    BreakFreeChoice,
    RemoveHomeCluster,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    StateSpace(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::StateSpaceExceeded { .. } | Error::IncompleteStateSpace => Failure::StateSpace(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        match e {
            ParseError::Invalid(inner) => inner.into(),
            other => Failure::Input(other.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

struct Out<'a> {
    stdout: &'a mut dyn Write,
    json: bool,
    quiet: bool,
}

impl Out<'_> {
    fn report<R: Serialize>(&mut self, report: &R, text: impl FnOnce() -> String) -> Outcome {
        if self.json {
            let s = serde_json::to_string_pretty(report).expect("reports serialize");
            writeln!(self.stdout, "{s}").map_err(|e| Failure::Input(e.to_string()))
        } else if self.quiet {
            Ok(())
        } else {
            write!(self.stdout, "{}", text()).map_err(|e| Failure::Input(e.to_string()))
        }
    }

    fn artifact<R: Serialize>(&mut self, report: &R, text: &str) -> Outcome {
        if self.json {
            return self.report(report, String::new);
        }
        write!(self.stdout, "{text}").map_err(|e| Failure::Input(e.to_string()))
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code: 0 analysis ran, 1 usage error, 2 input error,
/// 3 state space exceeded.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    let mut out = Out {
        stdout,
        json: cli.json,
        quiet: cli.quiet,
    };
    match dispatch(&cli, &mut out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::StateSpace(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_STATE_SPACE
        }
    }
}

fn load(input: &Input) -> std::result::Result<(PetriNet, Marking), Failure> {
    let text = if input.file.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Input(format!("standard input: {e}")))?;
        s
    } else {
        std::fs::read_to_string(&input.file).map_err(|e| Failure::Input(format!("{}: {e}", input.file.display())))?
    };
    Ok(parse_net(&text)?)
}

fn cluster_of(net: &PetriNet, place: &str) -> std::result::Result<Cluster, Failure> {
    let p = net.place_id(place)?;
    Ok(Cluster::of(net, Node::Place(p)))
}

fn show(net: &PetriNet, m: &Marking) -> String {
    m.display(net).to_string()
}

fn braces(names: &[String]) -> String {
    format!("{{{}}}", names.join(","))
}

fn dispatch(cli: &Cli, out: &mut Out<'_>) -> Outcome {
    let cap = cli.cap;
    match &cli.command {
        Command::Analyze(input) => {
            let (net, m0) = load(input)?;
            let mut report = AnalyzeReport::new(&net, &m0, None);
            match explore(&net, &m0, cap) {
                Ok(rg) => {
                    let b = behavior(&net, &rg)?;
                    report.behavior = Some(BehaviorJson::new(&net, &rg, &b));
                }
                Err(Error::Unbounded { smaller, larger }) => {
                    report.unbounded_witness = Some((vec![smaller], vec![larger]))
                }
                Err(e) => return Err(e.into()),
            }
            out.report(&report, || analyze_text(&report))
        }
        Command::Lucency(input) => {
            let (net, m0) = load(input)?;
            let verdict = check_lucency_marked(&net, &m0, cap)?;
            let report = if verdict.unbounded {
                LucencyReport::new(&net, &m0, None, &verdict, None)
            } else {
                let rg = explore(&net, &m0, cap)?;
                let verdict = check_lucency(&net, &rg)?;
                let t = transparency(&net, &rg)?;
                LucencyReport::new(&net, &m0, Some(&rg), &verdict, Some(&t))
            };
            out.report(&report, || {
                let mut s = format!("net {}: lucent = {}\n", report.net.name, report.lucent);
                if report.unbounded {
                    s.push_str("the net is unbounded\n");
                }
                if let Some(w) = &report.witness {
                    s.push_str(&format!(
                        "witness: [{}] and [{}] both enable {}\n",
                        w.first.join(","),
                        w.second.join(","),
                        braces(&w.enabled)
                    ));
                }
                if let Some(ft) = report.fully_transparent {
                    s.push_str(&format!("fully transparent = {ft}\n"));
                }
                s
            })
        }
        Command::HomeClusters { input, mode } => {
            let (net, m0) = load(input)?;
            let mode = match mode {
                ModeArg::Behavioral => DetectionMode::Behavioral,
                ModeArg::Structural => DetectionMode::Structural,
                ModeArg::Both => DetectionMode::Both,
            };
            let r = find_home_clusters(&net, &m0, mode, cap)?;
            let report = HomeClustersJson::new(&net, &m0, &r);
            out.report(&report, || {
                let mut s = format!(
                    "net {}: {} home cluster(s)\n",
                    report.net.name,
                    report.home_clusters.len()
                );
                for c in &report.home_clusters {
                    s.push_str(&format!("  {}\n", braces(c)));
                }
                for c in &report.disagreements {
                    s.push_str(&format!("  detection methods disagree on {}\n", braces(c)));
                }
                s
            })
        }
        Command::ConflictPairs(input) => {
            let (net, m0) = load(input)?;
            let rg = explore(&net, &m0, cap)?;
            let pairs = find_conflict_pairs(&net, &rg)?;
            let report = ConflictPairsReport::new(&net, &m0, rg.len(), &pairs);
            out.report(&report, || {
                let mut s = format!("net {}: {} conflict-pair(s)\n", report.net.name, pairs.len());
                for c in &pairs {
                    s.push_str(&format!(
                        "  {} / {}  agree {} disagree {} {}\n",
                        show(&net, &c.m1),
                        show(&net, &c.m2),
                        show(&net, &c.agree),
                        show(&net, &c.disagree1),
                        show(&net, &c.disagree2)
                    ));
                }
                s
            })
        }
        Command::Paths {
            input,
            cluster,
            from,
            limit,
        } => {
            let (net, m0) = load(input)?;
            let c = cluster_of(&net, cluster)?;
            let rg = explore(&net, &m0, cap)?;
            let home = behavior(&net, &rg)?.home_markings.contains(&c.marking());
            let mut report = PathsReport::new(&net, &m0, &c, home);
            let mut collected: Vec<NodePath> = Vec::new();
            match from {
                Some(p) => {
                    let (paths, truncated) = rooted_disentangled_paths(&net, net.place_id(p)?, &c, *limit);
                    report.truncated = truncated;
                    collected = paths;
                }
                None => {
                    for p in net.places() {
                        match rooted_path_from_place(&net, &rg, p, &c)? {
                            Some(path) => collected.push(path),
                            None => report.dead_places.push(net.place_name(p).to_string()),
                        }
                    }
                }
            }
            for path in &collected {
                report.push(&net, path, path_max_tokens(&rg, path)?);
            }
            out.report(&report, || {
                let mut s = format!(
                    "net {}: {} path(s) rooted in {}{}\n",
                    report.net.name,
                    report.paths.len(),
                    braces(&report.cluster),
                    if report.home_cluster { " (home cluster)" } else { "" }
                );
                for p in &report.paths {
                    s.push_str(&format!("  <{}>  max tokens {}\n", p.nodes.join(","), p.max_tokens));
                }
                if !report.dead_places.is_empty() {
                    s.push_str(&format!("  never marked: {}\n", report.dead_places.join(",")));
                }
                if report.truncated {
                    s.push_str("  (truncated)\n");
                }
                s
            })
        }
        Command::ShortCircuit {
            input,
            cluster,
            no_clean,
        } => {
            let (net, m0) = load(input)?;
            let c = cluster_of(&net, cluster)?;
            let (result, m) = if *no_clean {
                let sc = short_circuit(&net, &c, &m0, cap)?;
                let m = m0.transfer(&net, &sc)?;
                (sc, m)
            } else {
                match short_circuited_clean_net(&net, &c, &m0, cap)? {
                    Some((nc, _, m)) => (nc, m),
                    None => {
                        return Err(Failure::Input(format!(
                            "cluster {} is not reachable from the initial marking",
                            braces(&c.names(&net))
                        )))
                    }
                }
            };
            let added = result
                .transitions()
                .map(|t| result.transition_name(t))
                .find(|name| !net.has_transition(name))
                .map(str::to_string);
            let text = serialize_net(&result, &m);
            let report = NetTextReport {
                command: "short-circuit",
                net: NetSummary::new(&result, &m),
                text: text.clone(),
                cluster: Some(c.names(&net)),
                added_transition: added,
            };
            out.artifact(&report, &text)
        }
        Command::Generate {
            seed,
            places,
            transitions,
            branching,
            strongly_connected,
            no_home_cluster,
            mutation,
            max_states,
        } => {
            let config = GenConfig {
                seed: *seed,
                place_budget: *places,
                transition_budget: *transitions,
                branching: *branching,
                guarantee_home_cluster: !no_home_cluster,
                strongly_connected: *strongly_connected,
                mutation: mutation.map(|m| match m {
                    MutationArg::BreakFreeChoice => Mutation::BreakFreeChoice,
                    MutationArg::RemoveHomeCluster => Mutation::RemoveHomeCluster,
                }),
                max_states: *max_states,
            };
            let g = generate(&config)?;
            let text = serialize_net(&g.net, &g.marking);
            let report = NetTextReport {
                command: "generate",
                net: NetSummary::new(&g.net, &g.marking),
                text: text.clone(),
                cluster: g.home_cluster.as_ref().map(|c| c.names(&g.net)),
                added_transition: None,
            };
            out.artifact(&report, &text)
        }
        Command::CheckTheorems {
            seeds,
            first_seed,
            budget,
            expedite_budget,
            path_pairs,
        } => {
            let config = SuiteConfig {
                seeds: *seeds,
                first_seed: *first_seed,
                max_states: *budget,
                expedite_budget: *expedite_budget,
                path_pairs: *path_pairs,
                ..SuiteConfig::default()
            };
            let summary = suite::run(&config);
            let report = CheckTheoremsReport::new(config, summary);
            out.report(&report, || check_text(&report))
        }
        Command::Dot {
            input,
            highlight,
            cluster,
            conflict_pair,
            no_marking,
        } => {
            let (net, m0) = load(input)?;
            let mut highlights = Vec::new();
            if !highlight.is_empty() {
                let nodes = highlight
                    .iter()
                    .map(|n| net.node_id(n))
                    .collect::<Result<Vec<_>, _>>()?;
                highlights.push(Highlight::new("highlight", nodes));
            }
            if let Some(p) = cluster {
                highlights.push(Highlight::new("cluster", cluster_of(&net, p)?.nodes()));
            }
            if *conflict_pair {
                let rg = explore(&net, &m0, cap)?;
                if let Some(c) = find_conflict_pairs(&net, &rg)?.first() {
                    highlights.push(Highlight::new("disagree1", c.disagree1.support().map(Node::Place)));
                    highlights.push(Highlight::new("disagree2", c.disagree2.support().map(Node::Place)));
                }
            }
            let text = export_dot(&net, (!no_marking).then_some(&m0), &highlights);
            let report = NetTextReport {
                command: "dot",
                net: NetSummary::new(&net, &m0),
                text: text.clone(),
                cluster: None,
                added_transition: None,
            };
            out.artifact(&report, &text)
        }
    }
}

fn analyze_text(r: &AnalyzeReport) -> String {
    let s = &r.structure;
    let mut out = format!(
        "net {}: {} places, {} transitions, {} arcs, initial [{}]\n",
        r.net.name,
        r.net.places,
        r.net.transitions,
        r.net.arcs,
        r.net.initial_marking.join(",")
    );
    out.push_str(&format!(
        "structure: free-choice {}, proper {}, strongly connected {}, state machine {}, marked graph {}\n",
        s.free_choice, s.proper, s.strongly_connected, s.p_net, s.t_net
    ));
    let clusters: Vec<String> = r.clusters.iter().map(|c| braces(c)).collect();
    out.push_str(&format!("clusters: {}\n", clusters.join(" ")));
    match (&r.behavior, &r.unbounded_witness) {
        (Some(b), _) => {
            out.push_str(&format!(
                "behavior: {} markings, {} edges, bound {}, safe {}, live {}, deadlock-free {}\n",
                b.states,
                b.edges,
                b.bound.map_or("-".into(), |k| k.to_string()),
                b.safe,
                b.live,
                b.deadlock_free
            ));
            let homes: Vec<String> = b.home_markings.iter().map(|m| format!("[{}]", m.join(","))).collect();
            out.push_str(&format!("home markings: {}\n", homes.join(" ")));
            if !b.dead_transitions.is_empty() {
                out.push_str(&format!("dead transitions: {}\n", b.dead_transitions.join(",")));
            }
        }
        (None, Some((a, b))) => {
            out.push_str(&format!(
                "behavior: unbounded, {} is strictly covered by {}\n",
                a[0], b[0]
            ));
        }
        (None, None) => {}
    }
    out
}

fn check_text(r: &CheckTheoremsReport) -> String {
    let s = &r.summary;
    let mut out = format!(
        "{} home-cluster nets ({} strongly connected, {} terminating), {} random nets ({} safe)\n",
        s.home_cluster_nets, s.strongly_connected_nets, s.terminating_nets, s.random_nets, s.safe_random_nets
    );
    out.push_str(&format!(
        "relating theorem: {} nets, {} clusters; expedite: {} draws, {} sequences; paths: {} pairs, {} paths\n",
        s.relating_nets, s.relating_clusters, s.expedite_draws, s.expedite_sequences, s.path_pairs, s.paths
    ));
    if r.passed {
        out.push_str("no counterexamples\n");
    } else {
        for (property, count) in &r.failures_by_property {
            out.push_str(&format!("FAIL {property}: {count}\n"));
        }
        for c in s.counterexamples.iter().take(20) {
            out.push_str(&format!("  seed {} {}: {}: {}\n", c.seed, c.net, c.property, c.detail));
        }
    }
    out
}
