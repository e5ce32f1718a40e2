//! Directed internal-promotion graph: build from link sightings, classify
//! node roles against degree statistics, and compute connectivity.
//!
//! Edges are deduplicated per (src, dst) pair; targets outside the crawled
//! set become external stub nodes that count toward out-degree but carry no
//! role. Nodes whose outgoing links are exclusively private invites are
//! recorded in `invite_only_excluded` and contribute no outgoing edges or
//! degree statistics.

use crate::crawler::DiscoveryResult;
use crate::platform::{InternalLink, LinkKind};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no eligible channel nodes")]
    EmptyGraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Channel,
    Bot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    ChCh,
    ChBot,
    BotCh,
}

impl EdgeKind {
    pub fn wire_name(self) -> &'static str {
        match self {
            EdgeKind::ChCh => "ch_ch",
            EdgeKind::ChBot => "ch_bot",
            EdgeKind::BotCh => "bot_ch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    /// Link target outside the crawled set (stub).
    pub external: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Regular,
    Super,
    Terminal,
    Isolated,
}

impl Role {
    pub fn wire_name(self) -> &'static str {
        match self {
            Role::Regular => "regular",
            Role::Super => "super",
            Role::Terminal => "terminal",
            Role::Isolated => "isolated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRole {
    pub id: String,
    pub role: Role,
    pub outdeg: usize,
    pub indeg: usize,
}

/// Out-degree statistics over eligible channel nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleThresholds {
    pub mean_outdeg: f64,
    pub median_outdeg: f64,
    pub stddev_outdeg: f64,
    pub super_cutoff: f64,
}

impl RoleThresholds {
    /// Thresholds from precomputed moments; cutoff = mean + 2·stddev.
    pub fn from_moments(mean: f64, median: f64, stddev: f64) -> Self {
        RoleThresholds {
            mean_outdeg: mean,
            median_outdeg: median,
            stddev_outdeg: stddev,
            super_cutoff: mean + 2.0 * stddev,
        }
    }

    /// Smallest integer out-degree strictly above the cutoff.
    pub fn min_super_outdeg(&self) -> u64 {
        if self.super_cutoff < 0.0 {
            return 0;
        }
        // Works for integer cutoffs too: "strictly above" needs floor + 1.
        self.super_cutoff.floor() as u64 + 1
    }
}

/// Entity participating in graph construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphEntity {
    pub id: String,
    pub handle: Option<String>,
    pub is_bot: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PromotionGraph {
    nodes: BTreeMap<String, Node>,
    edges: BTreeMap<(String, String), EdgeKind>,
    invite_only_excluded: BTreeSet<String>,
    out_degree: BTreeMap<String, usize>,
    in_degree: BTreeMap<String, usize>,
}

impl PromotionGraph {
    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, EdgeKind)> {
        self.edges.iter().map(|((s, d), k)| (s.as_str(), d.as_str(), *k))
    }

    pub fn has_edge(&self, src: &str, dst: &str) -> bool {
        self.edges.contains_key(&(src.to_string(), dst.to_string()))
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn invite_only_excluded(&self) -> &BTreeSet<String> {
        &self.invite_only_excluded
    }

    pub fn outdeg(&self, id: &str) -> usize {
        self.out_degree.get(id).copied().unwrap_or(0)
    }

    pub fn indeg(&self, id: &str) -> usize {
        self.in_degree.get(id).copied().unwrap_or(0)
    }

    fn successors(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for ((s, d), _) in &self.edges {
            adj.entry(s.as_str()).or_default().push(d.as_str());
        }
        adj
    }
}

/// Assemble the graph from known entities plus per-post link sightings
/// (source entity id, link). Sightings from unknown sources are ignored.
pub fn build(entities: &[GraphEntity], sightings: &[(String, InternalLink)]) -> PromotionGraph {
    let mut g = PromotionGraph::default();
    let mut handle_to_id: BTreeMap<String, String> = BTreeMap::new();
    for e in entities {
        g.nodes.insert(
            e.id.clone(),
            Node {
                id: e.id.clone(),
                kind: if e.is_bot { NodeKind::Bot } else { NodeKind::Channel },
                external: false,
            },
        );
        if let Some(h) = &e.handle {
            handle_to_id.insert(h.to_ascii_lowercase(), e.id.clone());
        }
    }

    // First pass: which sources promote anything besides invites?
    let mut has_invite: BTreeSet<&str> = BTreeSet::new();
    let mut has_public: BTreeSet<&str> = BTreeSet::new();
    for (src, link) in sightings {
        if !g.nodes.contains_key(src) {
            continue;
        }
        if link.kind == LinkKind::Invite {
            has_invite.insert(src);
        } else {
            has_public.insert(src);
        }
    }
    g.invite_only_excluded = has_invite
        .difference(&has_public)
        .map(|s| s.to_string())
        .collect();

    for (src, link) in sightings {
        if link.kind == LinkKind::Invite || !g.nodes.contains_key(src) {
            continue;
        }
        if g.invite_only_excluded.contains(src) {
            continue;
        }
        let target = link.target.to_ascii_lowercase();
        let dst = match handle_to_id.get(&target) {
            Some(id) => id.clone(),
            None => {
                // Uncrawled target: materialize a stub node keyed by handle.
                g.nodes.entry(target.clone()).or_insert_with(|| Node {
                    id: target.clone(),
                    kind: if link.kind == LinkKind::Bot {
                        NodeKind::Bot
                    } else {
                        NodeKind::Channel
                    },
                    external: true,
                });
                target
            }
        };
        if *src == dst {
            continue;
        }
        let src_kind = g.nodes[src].kind;
        let dst_kind = g.nodes[&dst].kind;
        let kind = match (src_kind, dst_kind) {
            (NodeKind::Channel, NodeKind::Channel) => EdgeKind::ChCh,
            (NodeKind::Channel, NodeKind::Bot) => EdgeKind::ChBot,
            (NodeKind::Bot, NodeKind::Channel) => EdgeKind::BotCh,
            // Bot-to-bot promotion is outside the edge model.
            (NodeKind::Bot, NodeKind::Bot) => continue,
        };
        g.edges.insert((src.clone(), dst), kind);
    }

    for id in g.nodes.keys() {
        g.out_degree.insert(id.clone(), 0);
        g.in_degree.insert(id.clone(), 0);
    }
    for (s, d) in g.edges.keys() {
        *g.out_degree.get_mut(s).expect("src registered") += 1;
        *g.in_degree.get_mut(d).expect("dst registered") += 1;
    }
    g
}

/// [`build`] over a crawl result's entities.
pub fn build_from_discovery(
    discovery: &DiscoveryResult,
    sightings: &[(String, InternalLink)],
) -> PromotionGraph {
    let entities: Vec<GraphEntity> = discovery
        .entities()
        .into_iter()
        .map(|e| GraphEntity {
            id: e.record.id.clone(),
            handle: e.record.handle.clone(),
            is_bot: e.record.is_bot,
        })
        .collect();
    build(&entities, sightings)
}

/// Eligible for degree statistics: crawled channel, not invite-excluded.
fn stat_nodes(graph: &PromotionGraph) -> Vec<&Node> {
    graph
        .nodes()
        .filter(|n| {
            n.kind == NodeKind::Channel
                && !n.external
                && !graph.invite_only_excluded.contains(&n.id)
        })
        .collect()
}

/// Population statistics over eligible channel out-degrees.
pub fn compute_thresholds(graph: &PromotionGraph) -> Result<RoleThresholds, GraphError> {
    let degrees: Vec<f64> = stat_nodes(graph)
        .iter()
        .map(|n| graph.outdeg(&n.id) as f64)
        .collect();
    if degrees.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    let n = degrees.len() as f64;
    let mean = degrees.iter().sum::<f64>() / n;
    let var = degrees.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
    let stddev = var.sqrt();
    let mut sorted = degrees.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("degrees are finite"));
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
    };
    Ok(RoleThresholds::from_moments(mean, median, stddev))
}

/// One role per crawled channel node. Super takes precedence over regular;
/// bots and external stubs carry no role.
pub fn classify_roles(graph: &PromotionGraph, thresholds: &RoleThresholds) -> Vec<NodeRole> {
    graph
        .nodes()
        .filter(|n| n.kind == NodeKind::Channel && !n.external)
        .map(|n| {
            let outdeg = graph.outdeg(&n.id);
            let indeg = graph.indeg(&n.id);
            let role = if outdeg as f64 > thresholds.super_cutoff {
                Role::Super
            } else if outdeg >= 1 {
                Role::Regular
            } else if indeg >= 1 {
                Role::Terminal
            } else {
                Role::Isolated
            };
            NodeRole { id: n.id.clone(), role, outdeg, indeg }
        })
        .collect()
}

/// Weakly connected components over all nodes, each sorted internally,
/// ordered by smallest member id. Singletons included.
pub fn components(graph: &PromotionGraph) -> Vec<BTreeSet<String>> {
    let mut undirected: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for n in graph.nodes.keys() {
        undirected.entry(n.as_str()).or_default();
    }
    for (s, d) in graph.edges.keys() {
        undirected.entry(s.as_str()).or_default().push(d.as_str());
        undirected.entry(d.as_str()).or_default().push(s.as_str());
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut out: Vec<BTreeSet<String>> = Vec::new();
    for start in graph.nodes.keys() {
        if seen.contains(start.as_str()) {
            continue;
        }
        let mut comp: BTreeSet<String> = BTreeSet::new();
        let mut queue: VecDeque<&str> = VecDeque::new();
        queue.push_back(start.as_str());
        seen.insert(start.as_str());
        while let Some(u) = queue.pop_front() {
            comp.insert(u.to_string());
            for &v in undirected.get(u).into_iter().flatten() {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        out.push(comp);
    }
    // BTreeMap key order makes starts ascending, so components are already
    // ordered by smallest member; keep that explicit.
    out.sort_by(|a, b| a.iter().next().cmp(&b.iter().next()));
    out
}

/// Ordered pairs (u, v), u ≠ v, connected by a directed path of length ≥ 2
/// with no direct edge u → v.
pub fn transitive_pairs(graph: &PromotionGraph) -> BTreeSet<(String, String)> {
    let adj = graph.successors();
    let mut out = BTreeSet::new();
    for u in graph.nodes.keys() {
        // BFS reachability from u.
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut queue: VecDeque<&str> = VecDeque::new();
        queue.push_back(u.as_str());
        while let Some(x) = queue.pop_front() {
            for &v in adj.get(x).into_iter().flatten() {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        for v in seen {
            if v != u && !graph.edges.contains_key(&(u.clone(), v.to_string())) {
                out.insert((u.clone(), v.to_string()));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Exports.

pub fn edges_csv(graph: &PromotionGraph) -> String {
    let mut out = String::from("src,dst,edge_kind\n");
    for (s, d, k) in graph.edges() {
        let _ = writeln!(out, "{},{},{}", s, d, k.wire_name());
    }
    out
}

pub fn roles_csv(graph: &PromotionGraph, roles: &[NodeRole]) -> String {
    let by_id: BTreeMap<&str, &NodeRole> = roles.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut out = String::from("id,kind,role,outdeg,indeg\n");
    for n in graph.nodes() {
        let role = match (n.external, n.kind) {
            (true, _) => "external",
            (false, NodeKind::Bot) => "bot",
            (false, NodeKind::Channel) => by_id
                .get(n.id.as_str())
                .map(|r| r.role.wire_name())
                .unwrap_or("unclassified"),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            n.id,
            match n.kind {
                NodeKind::Channel => "channel",
                NodeKind::Bot => "bot",
            },
            role,
            graph.outdeg(&n.id),
            graph.indeg(&n.id)
        );
    }
    out
}

pub fn to_dot(graph: &PromotionGraph, roles: &[NodeRole]) -> String {
    let by_id: BTreeMap<&str, Role> = roles.iter().map(|r| (r.id.as_str(), r.role)).collect();
    let mut out = String::from("digraph promotion {\n  rankdir=LR;\n");
    for n in graph.nodes() {
        let (shape, color) = match (n.external, n.kind) {
            (true, _) => ("ellipse", "gray"),
            (false, NodeKind::Bot) => ("diamond", "lightblue"),
            (false, NodeKind::Channel) => match by_id.get(n.id.as_str()) {
                Some(Role::Super) => ("box", "red"),
                Some(Role::Terminal) => ("box", "orange"),
                Some(Role::Isolated) => ("box", "lightgray"),
                _ => ("box", "white"),
            },
        };
        let _ = writeln!(
            out,
            "  \"{}\" [shape={},style=filled,fillcolor={}];",
            n.id, shape, color
        );
    }
    for (s, d, k) in graph.edges() {
        let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"{}\"];", s, d, k.wire_name());
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ch(id: &str) -> GraphEntity {
        GraphEntity { id: id.into(), handle: Some(format!("h_{id}")), is_bot: false }
    }

    fn bot(id: &str) -> GraphEntity {
        GraphEntity { id: id.into(), handle: Some(format!("h_{id}")), is_bot: true }
    }

    fn link_to(entity: &GraphEntity) -> InternalLink {
        let h = entity.handle.clone().unwrap();
        if entity.is_bot {
            InternalLink::bot(h)
        } else {
            InternalLink::channel(h)
        }
    }

    #[test]
    fn repeated_links_collapse_to_one_edge() {
        let ents = vec![ch("a"), ch("b")];
        let sightings: Vec<(String, InternalLink)> =
            (0..5).map(|_| ("a".to_string(), link_to(&ents[1]))).collect();
        let g = build(&ents, &sightings);
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.outdeg("a"), 1);
        assert_eq!(g.indeg("b"), 1);
    }

    #[test]
    fn invite_only_nodes_are_excluded_and_stripped() {
        let ents = vec![ch("a"), ch("b"), ch("c")];
        let sightings = vec![
            ("a".to_string(), InternalLink::invite("SeCrEt1")),
            ("a".to_string(), InternalLink::invite("SeCrEt2")),
            ("b".to_string(), InternalLink::invite("SeCrEt3")),
            ("b".to_string(), link_to(&ents[2])),
        ];
        let g = build(&ents, &sightings);
        assert!(g.invite_only_excluded().contains("a"));
        assert!(!g.invite_only_excluded().contains("b"), "mixed promoter stays");
        assert!(g.node("a").is_some(), "node kept");
        assert_eq!(g.outdeg("a"), 0);
        assert_eq!(g.n_edges(), 1);
    }

    #[test]
    fn edge_kinds_follow_endpoints() {
        let ents = vec![ch("a"), bot("x"), ch("b")];
        let sightings = vec![
            ("a".to_string(), link_to(&ents[1])),
            ("x".to_string(), link_to(&ents[2])),
            ("a".to_string(), link_to(&ents[2])),
        ];
        let g = build(&ents, &sightings);
        let kinds: Vec<EdgeKind> = g.edges().map(|(_, _, k)| k).collect();
        assert_eq!(g.n_edges(), 3);
        assert!(kinds.contains(&EdgeKind::ChBot));
        assert!(kinds.contains(&EdgeKind::BotCh));
        assert!(kinds.contains(&EdgeKind::ChCh));
        let by_kind = kinds.len();
        assert_eq!(by_kind, g.n_edges(), "kind counts sum to edge count");
    }

    #[test]
    fn self_loops_and_unknown_sources_are_dropped() {
        let ents = vec![ch("a")];
        let sightings = vec![
            ("a".to_string(), link_to(&ents[0])),
            ("ghost".to_string(), link_to(&ents[0])),
        ];
        let g = build(&ents, &sightings);
        assert_eq!(g.n_edges(), 0);
        assert_eq!(g.n_nodes(), 1);
    }

    #[test]
    fn external_targets_become_stub_nodes() {
        let ents = vec![ch("a")];
        let sightings = vec![
            ("a".to_string(), InternalLink::channel("outside_hub")),
            ("a".to_string(), InternalLink::bot("outsidebot")),
        ];
        let g = build(&ents, &sightings);
        assert_eq!(g.n_nodes(), 3);
        let stub = g.node("outside_hub").unwrap();
        assert!(stub.external);
        assert_eq!(stub.kind, NodeKind::Channel);
        assert_eq!(g.node("outsidebot").unwrap().kind, NodeKind::Bot);
        assert_eq!(g.outdeg("a"), 2, "stubs count toward out-degree");
        let thr = compute_thresholds(&g).unwrap();
        assert_eq!(thr.mean_outdeg, 2.0, "stats cover only crawled channels");
        let roles = classify_roles(&g, &thr);
        assert!(roles.iter().all(|r| r.id == "a"), "stubs carry no role");
    }

    #[test]
    fn threshold_arithmetic_matches_published_moments() {
        let t = RoleThresholds::from_moments(5.9554, 3.0, 8.2207);
        assert!((t.super_cutoff - 22.3968).abs() < 1e-9);
        assert_eq!(t.min_super_outdeg(), 23);
    }

    #[test]
    fn degenerate_distributions_have_no_supers() {
        // All degrees equal: σ=0, cutoff=μ, nothing strictly exceeds it.
        let ents = vec![ch("a"), ch("b"), ch("c")];
        let sightings = vec![
            ("a".to_string(), link_to(&ents[1])),
            ("b".to_string(), link_to(&ents[2])),
            ("c".to_string(), link_to(&ents[0])),
        ];
        let g = build(&ents, &sightings);
        let t = compute_thresholds(&g).unwrap();
        assert_eq!(t.stddev_outdeg, 0.0);
        assert_eq!(t.super_cutoff, t.mean_outdeg);
        let roles = classify_roles(&g, &t);
        assert!(roles.iter().all(|r| r.role == Role::Regular));
    }

    #[test]
    fn skewed_distribution_hand_computed() {
        // Out-degrees {0, 0, 30}: μ=10, σ=√200, cutoff≈38.28, no super.
        let ents = vec![ch("a"), ch("b"), ch("c")];
        let mut sightings = Vec::new();
        for i in 0..30 {
            sightings.push(("c".to_string(), InternalLink::channel(format!("stub_{i:02}"))));
        }
        let g = build(&ents, &sightings);
        let t = compute_thresholds(&g).unwrap();
        assert!((t.mean_outdeg - 10.0).abs() < 1e-12);
        assert!((t.stddev_outdeg - 200f64.sqrt()).abs() < 1e-12);
        assert!((t.super_cutoff - (10.0 + 2.0 * 200f64.sqrt())).abs() < 1e-12);
        assert_eq!(t.median_outdeg, 0.0);
        let roles = classify_roles(&g, &t);
        assert!(roles.iter().all(|r| r.role != Role::Super));
    }

    #[test]
    fn planted_high_degree_node_is_super_under_published_thresholds() {
        let ents = vec![ch("big")];
        let sightings: Vec<(String, InternalLink)> = (0..74)
            .map(|i| ("big".to_string(), InternalLink::channel(format!("dest_{i:03}"))))
            .collect();
        let g = build(&ents, &sightings);
        assert_eq!(g.outdeg("big"), 74);
        let t = RoleThresholds::from_moments(5.9554, 3.0, 8.2207);
        let roles = classify_roles(&g, &t);
        assert_eq!(roles.len(), 1);
        assert_eq!(roles[0].role, Role::Super);
    }

    #[test]
    fn terminal_and_isolated_roles() {
        let ents = vec![ch("src"), ch("sink"), ch("alone")];
        let sightings = vec![("src".to_string(), link_to(&ents[1]))];
        let g = build(&ents, &sightings);
        let t = compute_thresholds(&g).unwrap();
        let role_of = |id: &str| {
            classify_roles(&g, &t)
                .into_iter()
                .find(|r| r.id == id)
                .unwrap()
                .role
        };
        assert_eq!(role_of("src"), Role::Regular);
        assert_eq!(role_of("sink"), Role::Terminal);
        assert_eq!(role_of("alone"), Role::Isolated);
    }

    #[test]
    fn empty_graph_errors_and_components_empty() {
        let g = build(&[], &[]);
        assert_eq!(compute_thresholds(&g), Err(GraphError::EmptyGraph));
        assert!(components(&g).is_empty());
        assert!(transitive_pairs(&g).is_empty());
    }

    #[test]
    fn two_disjoint_edges_give_two_components() {
        let ents = vec![ch("a"), ch("b"), ch("c"), ch("d")];
        let sightings = vec![
            ("a".to_string(), link_to(&ents[1])),
            ("c".to_string(), link_to(&ents[3])),
        ];
        let g = build(&ents, &sightings);
        let comps = components(&g);
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn chain_yields_single_transitive_pair() {
        let ents = vec![ch("a"), ch("b"), ch("c")];
        let sightings = vec![
            ("a".to_string(), link_to(&ents[1])),
            ("b".to_string(), link_to(&ents[2])),
        ];
        let g = build(&ents, &sightings);
        let pairs = transitive_pairs(&g);
        assert_eq!(pairs, BTreeSet::from([("a".to_string(), "c".to_string())]));
    }

    #[test]
    fn direct_edge_suppresses_transitive_pair() {
        let ents = vec![ch("a"), ch("b"), ch("c")];
        let sightings = vec![
            ("a".to_string(), link_to(&ents[1])),
            ("b".to_string(), link_to(&ents[2])),
            ("a".to_string(), link_to(&ents[2])),
        ];
        let g = build(&ents, &sightings);
        assert!(transitive_pairs(&g).is_empty());
    }

    // ---- random-graph oracles ----

    fn random_graph(seed: u64, n: usize, p: f64) -> PromotionGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ents: Vec<GraphEntity> = (0..n).map(|i| ch(&format!("n{i:03}"))).collect();
        let mut sightings = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.random_bool(p) {
                    sightings.push((ents[i].id.clone(), link_to(&ents[j])));
                }
            }
        }
        build(&ents, &sightings)
    }

    /// Independent union-find over the undirected projection.
    fn union_find_components(g: &PromotionGraph) -> Vec<BTreeSet<String>> {
        let ids: Vec<String> = g.nodes().map(|n| n.id.clone()).collect();
        let index: BTreeMap<&str, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let root = find(parent, parent[x]);
                parent[x] = root;
            }
            parent[x]
        }
        for (s, d, _) in g.edges() {
            let (a, b) = (index[s], index[d]);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().insert(id.clone());
        }
        let mut out: Vec<BTreeSet<String>> = groups.into_values().collect();
        out.sort_by(|a, b| a.iter().next().cmp(&b.iter().next()));
        out
    }

    /// Independent recursive-DFS reachability oracle.
    fn dfs_transitive_pairs(g: &PromotionGraph) -> BTreeSet<(String, String)> {
        fn reach<'a>(
            adj: &BTreeMap<&'a str, Vec<&'a str>>,
            u: &'a str,
            seen: &mut BTreeSet<&'a str>,
        ) {
            for &v in adj.get(u).into_iter().flatten() {
                if seen.insert(v) {
                    reach(adj, v, seen);
                }
            }
        }
        let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (s, d, _) in g.edges() {
            adj.entry(s).or_default().push(d);
        }
        let mut out = BTreeSet::new();
        let ids: Vec<&str> = g.nodes().map(|n| n.id.as_str()).collect();
        for &u in &ids {
            let mut seen = BTreeSet::new();
            reach(&adj, u, &mut seen);
            for v in seen {
                if v != u && !g.has_edge(u, v) {
                    out.insert((u.to_string(), v.to_string()));
                }
            }
        }
        out
    }

    #[test]
    fn components_match_union_find_oracle() {
        for seed in 0..25u64 {
            let n = 5 + (seed as usize * 7) % 80;
            let p = 0.01 + (seed as f64 % 7.0) * 0.01;
            let g = random_graph(seed, n, p);
            assert_eq!(components(&g), union_find_components(&g), "seed {seed}");
        }
    }

    #[test]
    fn transitive_pairs_match_dfs_oracle() {
        for seed in 0..25u64 {
            let n = 4 + (seed as usize * 3) % 40;
            let p = 0.02 + (seed as f64 % 5.0) * 0.02;
            let g = random_graph(seed + 1000, n, p);
            assert_eq!(transitive_pairs(&g), dfs_transitive_pairs(&g), "seed {seed}");
        }
    }

    #[test]
    fn exports_are_sorted_and_complete() {
        let ents = vec![ch("b"), ch("a"), bot("x")];
        let sightings = vec![
            ("b".to_string(), link_to(&ents[1])),
            ("a".to_string(), link_to(&ents[2])),
            ("a".to_string(), InternalLink::channel("outside_hub")),
        ];
        let g = build(&ents, &sightings);
        let roles = classify_roles(&g, &compute_thresholds(&g).unwrap());
        let edges = edges_csv(&g);
        let mut lines = edges.lines();
        assert_eq!(lines.next(), Some("src,dst,edge_kind"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), g.n_edges());
        let mut sorted = rows.clone();
        sorted.sort();
        assert_eq!(rows, sorted);

        let roles_out = roles_csv(&g, &roles);
        assert_eq!(roles_out.lines().count(), g.n_nodes() + 1);
        assert!(roles_out.contains("outside_hub,channel,external,0,1"));
        assert!(roles_out.contains("x,bot,bot,0,1"));

        let dot = to_dot(&g, &roles);
        assert!(dot.starts_with("digraph promotion {"));
        assert!(dot.contains("\"a\" -> \"x\" [label=\"ch_bot\"];"));
    }

    #[test]
    fn role_partition_is_total_and_exclusive() {
        let g = random_graph(99, 60, 0.04);
        let t = compute_thresholds(&g).unwrap();
        let roles = classify_roles(&g, &t);
        let crawled_channels = g
            .nodes()
            .filter(|n| n.kind == NodeKind::Channel && !n.external)
            .count();
        assert_eq!(roles.len(), crawled_channels);
        let ids: BTreeSet<&str> = roles.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids.len(), roles.len(), "exactly one role per node");
        for r in &roles {
            match r.role {
                Role::Super => assert!((r.outdeg as f64) > t.super_cutoff),
                Role::Regular => assert!(r.outdeg >= 1),
                Role::Terminal => assert!(r.indeg >= 1 && r.outdeg == 0),
                Role::Isolated => assert!(r.indeg == 0 && r.outdeg == 0),
            }
        }
    }

    #[test]
    fn thresholds_recompute_from_raw_degrees() {
        let g = random_graph(7, 40, 0.05);
        let t = compute_thresholds(&g).unwrap();
        let degrees: Vec<f64> = g
            .nodes()
            .filter(|n| n.kind == NodeKind::Channel && !n.external)
            .filter(|n| !g.invite_only_excluded().contains(&n.id))
            .map(|n| g.outdeg(&n.id) as f64)
            .collect();
        let mean = degrees.iter().sum::<f64>() / degrees.len() as f64;
        let var =
            degrees.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / degrees.len() as f64;
        assert!((t.mean_outdeg - mean).abs() < 1e-9);
        assert!((t.stddev_outdeg - var.sqrt()).abs() < 1e-9);
        assert!((t.super_cutoff - (mean + 2.0 * var.sqrt())).abs() < 1e-9);
    }
}
