//! State graphs over machine configurations: the evolution chain of a
//! single run, the collapsed graph with repeats merged into one node, and
//! the probabilistic graph combining many runs.
//!
//! Node identity is the canonical configuration key. Stable indices exist
//! only to fix a row/column order for matrix encoding; they are assigned
//! in ascending key order at construction and are the one thing
//! [`StateGraph::permute_nodes`] changes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::exec::{Configuration, Trace};
use crate::ordinal::OrdinalTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Evolution,
    Collapsed,
    Probabilistic,
}

impl GraphKind {
    pub fn name(self) -> &'static str {
        match self {
            GraphKind::Evolution => "Evolution",
            GraphKind::Collapsed => "Collapsed",
            GraphKind::Probabilistic => "Probabilistic",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        match s {
            "Evolution" => Some(GraphKind::Evolution),
            "Collapsed" => Some(GraphKind::Collapsed),
            "Probabilistic" => Some(GraphKind::Probabilistic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    /// Row/column position for matrix encodings.
    pub index: usize,
    /// Snapshot of the configuration behind the key; absent for graphs
    /// loaded from files or matrices.
    pub config: Option<Configuration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub from: String,
    pub to: String,
    /// Number of traversals this edge accumulated.
    pub count: u64,
    /// Explicit probability, set on merged and imported probabilistic
    /// graphs; derived from counts otherwise.
    pub probability: Option<f64>,
    /// Step indices at which the edge was traversed; the replay order.
    pub visit_orders: Vec<usize>,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateGraph {
    pub kind: GraphKind,
    /// Identity of the key scheme (the machine name); merging graphs with
    /// different provenance is refused.
    pub provenance: String,
    nodes: BTreeMap<String, GraphNode>,
    edges: Vec<GraphEdge>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("mixed provenance: cannot merge {left:?} with {right:?}")]
    MixedProvenance { left: String, right: String },
    #[error("wrong graph kind: expected {expected}, got {found}")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },
    #[error("nothing to merge")]
    EmptyMerge,
    #[error("ambiguous replay: the graph carries no visit orders")]
    AmbiguousReplay,
    #[error("unknown node {key:?}")]
    UnknownNode { key: String },
    #[error("not a bijection on node indices: {reason}")]
    NotABijection { reason: String },
    #[error("layer times must be strictly increasing: {prev} then {next}")]
    NonIncreasingTimes {
        prev: OrdinalTime,
        next: OrdinalTime,
    },
    #[error("graph file line {line}: {message}")]
    Format { line: usize, message: String },
}

impl StateGraph {
    fn from_parts(
        kind: GraphKind,
        provenance: String,
        configs: BTreeMap<String, Option<Configuration>>,
        mut edges: Vec<GraphEdge>,
    ) -> StateGraph {
        let nodes = configs
            .into_iter()
            .enumerate()
            .map(|(index, (key, config))| (key, GraphNode { index, config }))
            .collect();
        edges.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
        StateGraph {
            kind,
            provenance,
            nodes,
            edges,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Keys in ascending order.
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.nodes.keys().map(|k| k.as_str())
    }

    /// Keys ordered by stable index (the matrix row order).
    pub fn keys_by_index(&self) -> Vec<String> {
        let mut keyed: Vec<(&String, usize)> =
            self.nodes.iter().map(|(k, n)| (k, n.index)).collect();
        keyed.sort_by_key(|&(_, index)| index);
        keyed.into_iter().map(|(k, _)| k.clone()).collect()
    }

    pub fn node(&self, key: &str) -> Option<&GraphNode> {
        self.nodes.get(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.nodes.contains_key(key)
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn out_edges<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a GraphEdge> {
        self.edges.iter().filter(move |e| e.from == key)
    }

    pub fn total_count(&self) -> u64 {
        self.edges.iter().map(|e| e.count).sum()
    }

    /// Counts of all edges, as a descending multiset. The shape of a merged
    /// graph's weight distribution.
    pub fn weight_multiset(&self) -> Vec<u64> {
        let mut weights: Vec<u64> = self.edges.iter().map(|e| e.count).collect();
        weights.sort_unstable_by(|a, b| b.cmp(a));
        weights
    }

    /// Normalized weight of an edge: its explicit probability if set,
    /// otherwise its count over the source node's outgoing total.
    pub fn edge_probability(&self, edge: &GraphEdge) -> f64 {
        if let Some(p) = edge.probability {
            return p;
        }
        let total: u64 = self.out_edges(&edge.from).map(|e| e.count).sum();
        if total == 0 {
            return 0.0;
        }
        edge.count as f64 / total as f64
    }

    /// True when every edge carries visit orders, i.e. the graph is a
    /// lossless record of one trace and can be replayed.
    pub fn is_replayable(&self) -> bool {
        !self.edges.is_empty() && self.edges.iter().all(|e| !e.visit_orders.is_empty())
    }

    /// Follows the stored visit orders from `start`, reproducing the
    /// configuration-key sequence of the original trace.
    pub fn replay(&self, start: &str) -> Result<Vec<String>, GraphError> {
        if !self.contains(start) {
            return Err(GraphError::UnknownNode {
                key: start.to_string(),
            });
        }
        if !self.edges.is_empty() && !self.is_replayable() {
            return Err(GraphError::AmbiguousReplay);
        }
        // visit order t belongs to the edge taken from step t to step t+1.
        let mut by_order: BTreeMap<usize, &GraphEdge> = BTreeMap::new();
        for edge in &self.edges {
            for &t in &edge.visit_orders {
                by_order.insert(t, edge);
            }
        }
        let mut sequence = vec![start.to_string()];
        let mut current = start.to_string();
        for t in 0.. {
            let Some(edge) = by_order.get(&t) else { break };
            if edge.from != current {
                return Err(GraphError::AmbiguousReplay);
            }
            sequence.push(edge.to.clone());
            current = edge.to.clone();
        }
        Ok(sequence)
    }

    /// Greedy routing: at each node take the out-edge with the highest
    /// normalized weight, ties broken by ascending target key. Stops at a
    /// sink, on revisiting a node (the revisit is included), or after
    /// `max_steps` hops.
    pub fn route_greedy(&self, start: &str, max_steps: usize) -> Result<Vec<String>, GraphError> {
        if !self.contains(start) {
            return Err(GraphError::UnknownNode {
                key: start.to_string(),
            });
        }
        let mut path = vec![start.to_string()];
        let mut current = start.to_string();
        for _ in 0..max_steps {
            let Some(next) = self.greedy_next(&current) else {
                break;
            };
            let revisit = path.contains(&next);
            path.push(next.clone());
            if revisit {
                break;
            }
            current = next;
        }
        Ok(path)
    }

    /// The greedy successor of a node, if it has any out-edge.
    fn greedy_next(&self, key: &str) -> Option<String> {
        self.out_edges(key)
            .map(|e| (self.edge_probability(e), e))
            .max_by(|(pa, ea), (pb, eb)| {
                pa.partial_cmp(pb)
                    .expect("edge weights are finite")
                    // Equal weights: prefer the lexicographically smaller
                    // target, so pick the *greater* key as the max's loser.
                    .then_with(|| eb.to.cmp(&ea.to))
            })
            .map(|(_, e)| e.to.clone())
    }

    /// Relabels stable indices by `permutation` (new index of the node at
    /// old index i is `permutation[i]`). Keys, edges, and weights are
    /// untouched.
    pub fn permute_nodes(&self, permutation: &[usize]) -> Result<StateGraph, GraphError> {
        let n = self.node_count();
        if permutation.len() != n {
            return Err(GraphError::NotABijection {
                reason: format!("length {} for {} nodes", permutation.len(), n),
            });
        }
        let mut seen = vec![false; n];
        for &target in permutation {
            if target >= n || seen[target] {
                return Err(GraphError::NotABijection {
                    reason: format!("index {target} repeated or out of range"),
                });
            }
            seen[target] = true;
        }
        let nodes = self
            .nodes
            .iter()
            .map(|(key, node)| {
                (
                    key.clone(),
                    GraphNode {
                        index: permutation[node.index],
                        config: node.config.clone(),
                    },
                )
            })
            .collect();
        Ok(StateGraph {
            kind: self.kind,
            provenance: self.provenance.clone(),
            nodes,
            edges: self.edges.clone(),
        })
    }

    /// Builds a graph from explicit parts (used by the matrix decoder).
    pub(crate) fn from_indexed_nodes(
        kind: GraphKind,
        provenance: String,
        keys_in_index_order: Vec<String>,
        edges: Vec<GraphEdge>,
    ) -> StateGraph {
        let nodes = keys_in_index_order
            .into_iter()
            .enumerate()
            .map(|(index, key)| {
                (
                    key,
                    GraphNode {
                        index,
                        config: None,
                    },
                )
            })
            .collect();
        let mut graph = StateGraph {
            kind,
            provenance,
            nodes,
            edges,
        };
        graph
            .edges
            .sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
        graph
    }
}

/// One node per recorded step, chained in step order. Keys carry a
/// zero-padded step index so key order equals step order even when
/// configurations repeat.
pub fn evolution_graph(trace: &Trace) -> StateGraph {
    assert!(!trace.is_empty(), "evolution graph needs at least one step");
    let step_key = |i: usize, c: &Configuration| format!("s{:06}|{}", i, c.canonical_key());

    let mut configs = BTreeMap::new();
    let mut edges = Vec::new();
    for (i, step) in trace.steps.iter().enumerate() {
        configs.insert(step_key(i, &step.config), Some(step.config.clone()));
        if i > 0 {
            edges.push(GraphEdge {
                from: step_key(i - 1, &trace.steps[i - 1].config),
                to: step_key(i, &step.config),
                count: 1,
                probability: None,
                visit_orders: vec![i - 1],
                label: step.applied.label(),
            });
        }
    }
    StateGraph::from_parts(
        GraphKind::Evolution,
        trace.machine_name.clone(),
        configs,
        edges,
    )
}

/// Collapses repeated configurations into single nodes; each consecutive
/// pair of steps contributes one edge occurrence, with the step index
/// appended to the edge's visit orders so the trace can be replayed.
pub fn collapse(trace: &Trace) -> StateGraph {
    assert!(!trace.is_empty(), "collapse needs at least one step");
    let mut configs: BTreeMap<String, Option<Configuration>> = BTreeMap::new();
    let mut edges: BTreeMap<(String, String), GraphEdge> = BTreeMap::new();

    let keys = trace.key_sequence();
    for (i, step) in trace.steps.iter().enumerate() {
        configs
            .entry(keys[i].clone())
            .or_insert_with(|| Some(step.config.clone()));
        if i > 0 {
            let pair = (keys[i - 1].clone(), keys[i].clone());
            let edge = edges.entry(pair.clone()).or_insert_with(|| GraphEdge {
                from: pair.0,
                to: pair.1,
                count: 0,
                probability: None,
                visit_orders: Vec::new(),
                label: step.applied.label(),
            });
            edge.count += 1;
            edge.visit_orders.push(i - 1);
        }
    }
    StateGraph::from_parts(
        GraphKind::Collapsed,
        trace.machine_name.clone(),
        configs,
        edges.into_values().collect(),
    )
}

/// Combines collapsed graphs from multiple runs of the same machine into a
/// probabilistic graph: node set union, edge counts summed, and per-source
/// normalized probabilities attached. Commutative and associative.
pub fn merge(graphs: &[StateGraph]) -> Result<StateGraph, GraphError> {
    let first = graphs.first().ok_or(GraphError::EmptyMerge)?;
    for g in graphs {
        if g.kind == GraphKind::Evolution {
            return Err(GraphError::WrongKind {
                expected: "Collapsed or Probabilistic",
                found: g.kind.name(),
            });
        }
        if g.provenance != first.provenance {
            return Err(GraphError::MixedProvenance {
                left: first.provenance.clone(),
                right: g.provenance.clone(),
            });
        }
    }

    let mut configs: BTreeMap<String, Option<Configuration>> = BTreeMap::new();
    let mut merged: BTreeMap<(String, String), GraphEdge> = BTreeMap::new();
    for g in graphs {
        for (key, node) in &g.nodes {
            let slot = configs.entry(key.clone()).or_insert(None);
            if slot.is_none() {
                *slot = node.config.clone();
            }
        }
        for edge in &g.edges {
            let pair = (edge.from.clone(), edge.to.clone());
            merged
                .entry(pair)
                .and_modify(|e| {
                    e.count += edge.count;
                    if edge.label < e.label {
                        e.label = edge.label.clone();
                    }
                })
                .or_insert_with(|| GraphEdge {
                    from: edge.from.clone(),
                    to: edge.to.clone(),
                    count: edge.count,
                    probability: None,
                    visit_orders: Vec::new(),
                    label: edge.label.clone(),
                });
        }
    }

    let mut graph = StateGraph::from_parts(
        GraphKind::Probabilistic,
        first.provenance.clone(),
        configs,
        merged.into_values().collect(),
    );
    attach_probabilities(&mut graph);
    Ok(graph)
}

fn attach_probabilities(graph: &mut StateGraph) {
    let mut totals: BTreeMap<String, u64> = BTreeMap::new();
    for edge in &graph.edges {
        *totals.entry(edge.from.clone()).or_insert(0) += edge.count;
    }
    for edge in &mut graph.edges {
        let total = totals[&edge.from];
        edge.probability = Some(edge.count as f64 / total as f64);
    }
}

/// Graphs pinned to successive ordinal times, the structure traversed one
/// hop per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphLayerSequence {
    layers: Vec<(OrdinalTime, StateGraph)>,
}

impl GraphLayerSequence {
    pub fn new(layers: Vec<(OrdinalTime, StateGraph)>) -> Result<Self, GraphError> {
        for pair in layers.windows(2) {
            if pair[0].0 >= pair[1].0 {
                return Err(GraphError::NonIncreasingTimes {
                    prev: pair[0].0,
                    next: pair[1].0,
                });
            }
        }
        Ok(GraphLayerSequence { layers })
    }

    pub fn layers(&self) -> &[(OrdinalTime, StateGraph)] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// One greedy hop per layer, carrying the reached key into the next
    /// layer. Stops early (flagged) when the carried key is absent from a
    /// layer or has no outgoing edge there.
    pub fn traverse(&self, start: &str) -> Result<LayerTraversal, GraphError> {
        let Some((_, first)) = self.layers.first() else {
            return Ok(LayerTraversal {
                hops: Vec::new(),
                truncated: false,
            });
        };
        if !first.contains(start) {
            return Err(GraphError::UnknownNode {
                key: start.to_string(),
            });
        }
        let mut hops = Vec::new();
        let mut current = start.to_string();
        for (time, graph) in &self.layers {
            if !graph.contains(&current) {
                return Ok(LayerTraversal {
                    hops,
                    truncated: true,
                });
            }
            let Some(next) = graph.greedy_next(&current) else {
                return Ok(LayerTraversal {
                    hops,
                    truncated: true,
                });
            };
            hops.push(LayerHop {
                time: *time,
                from: current.clone(),
                to: next.clone(),
            });
            current = next;
        }
        Ok(LayerTraversal {
            hops,
            truncated: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerHop {
    pub time: OrdinalTime,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerTraversal {
    pub hops: Vec<LayerHop>,
    /// True when the walk stopped before consuming every layer.
    pub truncated: bool,
}

/// Renders the line-oriented native format:
/// a header, `node <index> <key>` lines in index order, then
/// `edge <from> <to> count=<c> p=<prob> orders=<csv> label=<text>` lines
/// referencing node indices.
pub fn format_graph(graph: &StateGraph) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "graph kind={} machine={}",
        graph.kind.name(),
        graph.provenance
    )
    .unwrap();
    let keys = graph.keys_by_index();
    for (index, key) in keys.iter().enumerate() {
        writeln!(out, "node {index} {key}").unwrap();
    }
    let index_of: BTreeMap<&String, usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    for edge in &graph.edges {
        let orders = if edge.visit_orders.is_empty() {
            "-".to_string()
        } else {
            edge.visit_orders
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        writeln!(
            out,
            "edge {} {} count={} p={} orders={} label={}",
            index_of[&edge.from],
            index_of[&edge.to],
            edge.count,
            graph.edge_probability(edge),
            orders,
            edge.label
        )
        .unwrap();
    }
    out
}

/// Parses the native format written by [`format_graph`].
pub fn parse_graph(source: &str) -> Result<StateGraph, GraphError> {
    let mut kind: Option<GraphKind> = None;
    let mut provenance = String::new();
    let mut keys_by_index: BTreeMap<usize, String> = BTreeMap::new();
    struct RawEdge {
        from: usize,
        to: usize,
        count: u64,
        probability: f64,
        visit_orders: Vec<usize>,
        label: String,
    }
    let mut raw_edges: Vec<RawEdge> = Vec::new();

    let err = |line: usize, message: String| GraphError::Format { line, message };

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, ' ');
        let head = parts.next().unwrap_or_default();
        let rest = parts.next().unwrap_or_default();
        match head {
            "graph" => {
                let mut parsed_kind = None;
                let mut parsed_machine = None;
                for field in rest.split_whitespace() {
                    if let Some(v) = field.strip_prefix("kind=") {
                        parsed_kind = GraphKind::from_name(v);
                    } else if let Some(v) = field.strip_prefix("machine=") {
                        parsed_machine = Some(v.to_string());
                    }
                }
                kind = Some(
                    parsed_kind.ok_or_else(|| err(line_no, "bad or missing kind=".to_string()))?,
                );
                provenance = parsed_machine
                    .ok_or_else(|| err(line_no, "missing machine= field".to_string()))?;
            }
            "node" => {
                let mut fields = rest.splitn(2, ' ');
                let index: usize = fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(line_no, "bad node index".to_string()))?;
                let key = fields
                    .next()
                    .ok_or_else(|| err(line_no, "missing node key".to_string()))?
                    .to_string();
                if keys_by_index.insert(index, key).is_some() {
                    return Err(err(line_no, format!("duplicate node index {index}")));
                }
            }
            "edge" => {
                let (fixed, label) = match rest.split_once(" label=") {
                    Some((fixed, label)) => (fixed, label.to_string()),
                    None => (rest, String::new()),
                };
                let fields: Vec<&str> = fixed.split_whitespace().collect();
                if fields.len() != 5 {
                    return Err(err(
                        line_no,
                        "expected edge <from> <to> count= p= orders=".into(),
                    ));
                }
                let from: usize = fields[0]
                    .parse()
                    .map_err(|_| err(line_no, "bad edge source index".to_string()))?;
                let to: usize = fields[1]
                    .parse()
                    .map_err(|_| err(line_no, "bad edge target index".to_string()))?;
                let count: u64 = fields[2]
                    .strip_prefix("count=")
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(line_no, "bad count= field".to_string()))?;
                if count == 0 {
                    return Err(err(line_no, "edge count must be positive".to_string()));
                }
                let probability: f64 = fields[3]
                    .strip_prefix("p=")
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(line_no, "bad p= field".to_string()))?;
                let orders_text = fields[4]
                    .strip_prefix("orders=")
                    .ok_or_else(|| err(line_no, "bad orders= field".to_string()))?;
                let visit_orders = if orders_text == "-" {
                    Vec::new()
                } else {
                    orders_text
                        .split(',')
                        .map(|t| t.parse::<usize>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| err(line_no, "bad orders= field".to_string()))?
                };
                raw_edges.push(RawEdge {
                    from,
                    to,
                    count,
                    probability,
                    visit_orders,
                    label,
                });
            }
            other => return Err(err(line_no, format!("unknown record {other:?}"))),
        }
    }

    let kind = kind.ok_or_else(|| err(1, "missing graph header".to_string()))?;
    let keys: Vec<String> = keys_by_index.values().cloned().collect();
    for (expected, index) in keys_by_index.keys().enumerate() {
        if *index != expected {
            return Err(err(
                1,
                format!("node indices are not contiguous at {index}"),
            ));
        }
    }
    let edges = raw_edges
        .into_iter()
        .map(|raw| {
            let resolve = |i: usize| {
                keys.get(i)
                    .cloned()
                    .ok_or_else(|| err(1, format!("edge references node {i}")))
            };
            Ok(GraphEdge {
                from: resolve(raw.from)?,
                to: resolve(raw.to)?,
                count: raw.count,
                probability: match kind {
                    GraphKind::Probabilistic => Some(raw.probability),
                    _ => None,
                },
                visit_orders: raw.visit_orders,
                label: raw.label,
            })
        })
        .collect::<Result<Vec<_>, GraphError>>()?;
    Ok(StateGraph::from_indexed_nodes(
        kind, provenance, keys, edges,
    ))
}
