//! Matrix and tensor encodings of state graphs, plus DOT rendering.
//!
//! Matrices are dense with an explicit node order; desk-scale graphs are
//! small and exact round-trips matter more than storage. Rows and columns
//! follow the graph's stable node indices, so an unpermuted graph encodes
//! with ascending canonical keys and a permuted one encodes as the
//! conjugated matrix.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::graph::{GraphEdge, GraphKind, GraphLayerSequence, StateGraph};
use crate::machine::Machine;
use crate::ordinal::OrdinalTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixMode {
    Counts,
    Probabilities,
}

impl MatrixMode {
    pub fn name(self) -> &'static str {
        match self {
            MatrixMode::Counts => "counts",
            MatrixMode::Probabilities => "probabilities",
        }
    }
}

/// A dense N×N matrix of edge weights, row i / column j holding the weight
/// of `node_order[i] → node_order[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    pub mode: MatrixMode,
    pub node_order: Vec<String>,
    entries: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncodeError {
    #[error("matrix is not square: {entries} entries for {order} nodes")]
    NotSquare { order: usize, entries: usize },
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("counts-mode entry {value} at ({row}, {col}) is not an integer")]
    NonIntegralCount { row: usize, col: usize, value: f64 },
    #[error("row {row} of a probabilities-mode matrix sums to {sum}, expected 0 or 1")]
    NormalizationError { row: usize, sum: f64 },
    #[error("duplicate node key {key:?} in matrix order")]
    DuplicateKey { key: String },
    #[error("matrix text line {line}: {message}")]
    Format { line: usize, message: String },
}

impl AdjacencyMatrix {
    pub fn zero(mode: MatrixMode, node_order: Vec<String>) -> Self {
        let n = node_order.len();
        AdjacencyMatrix {
            mode,
            node_order,
            entries: vec![0.0; n * n],
        }
    }

    pub fn from_entries(
        mode: MatrixMode,
        node_order: Vec<String>,
        entries: Vec<f64>,
    ) -> Result<Self, EncodeError> {
        let n = node_order.len();
        if entries.len() != n * n {
            return Err(EncodeError::NotSquare {
                order: n,
                entries: entries.len(),
            });
        }
        let matrix = AdjacencyMatrix {
            mode,
            node_order,
            entries,
        };
        matrix.check()?;
        Ok(matrix)
    }

    pub fn order(&self) -> usize {
        self.node_order.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.order() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        let n = self.order();
        self.entries[row * n + col] = value;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row_sum(&self, row: usize) -> f64 {
        (0..self.order()).map(|col| self.get(row, col)).sum()
    }

    fn check(&self) -> Result<(), EncodeError> {
        let n = self.order();
        for row in 0..n {
            for col in 0..n {
                let value = self.get(row, col);
                if value < 0.0 || value.is_nan() {
                    return Err(EncodeError::NegativeEntry { row, col, value });
                }
                if self.mode == MatrixMode::Counts && value.fract() != 0.0 {
                    return Err(EncodeError::NonIntegralCount { row, col, value });
                }
            }
        }
        if self.mode == MatrixMode::Probabilities {
            for row in 0..n {
                let sum = self.row_sum(row);
                if sum != 0.0 && (sum - 1.0).abs() > 1e-12 {
                    return Err(EncodeError::NormalizationError { row, sum });
                }
            }
        }
        Ok(())
    }

    fn format_value(&self, value: f64) -> String {
        match self.mode {
            MatrixMode::Counts => format!("{}", value as u64),
            MatrixMode::Probabilities => format!("{value}"),
        }
    }

    /// CSV text: a header row of node keys, then N rows of N values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.node_order.join(","));
        out.push('\n');
        let n = self.order();
        for row in 0..n {
            let cells: Vec<String> = (0..n)
                .map(|col| self.format_value(self.get(row, col)))
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses the CSV text written by [`to_csv`].
    pub fn from_csv(text: &str, mode: MatrixMode) -> Result<Self, EncodeError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(EncodeError::Format {
            line: 1,
            message: "empty matrix text".into(),
        })?;
        let node_order: Vec<String> = if header.is_empty() {
            Vec::new()
        } else {
            header.split(',').map(|s| s.to_string()).collect()
        };
        let n = node_order.len();
        let mut entries = Vec::with_capacity(n * n);
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|cell| {
                    cell.parse::<f64>().map_err(|_| EncodeError::Format {
                        line: idx + 1,
                        message: format!("bad value {cell:?}"),
                    })
                })
                .collect::<Result<_, _>>()?;
            if row.len() != n {
                return Err(EncodeError::Format {
                    line: idx + 1,
                    message: format!("expected {n} values, got {}", row.len()),
                });
            }
            entries.extend(row);
        }
        AdjacencyMatrix::from_entries(mode, node_order, entries)
    }
}

/// Encodes a graph as a dense matrix in its stable node-index order.
pub fn to_adjacency(graph: &StateGraph, mode: MatrixMode) -> AdjacencyMatrix {
    let node_order = graph.keys_by_index();
    let index: BTreeMap<&str, usize> = node_order
        .iter()
        .enumerate()
        .map(|(i, k)| (k.as_str(), i))
        .collect();
    let mut matrix = AdjacencyMatrix::zero(mode, node_order.clone());
    for edge in graph.edges() {
        let row = index[edge.from.as_str()];
        let col = index[edge.to.as_str()];
        let value = match mode {
            MatrixMode::Counts => edge.count as f64,
            MatrixMode::Probabilities => graph.edge_probability(edge),
        };
        matrix.set(row, col, value);
    }
    matrix
}

/// Decodes a matrix back into a graph with an edge at every positive
/// entry. Visit orders do not survive the encoding, so the result is not
/// replayable; its provenance is the empty scheme.
pub fn from_adjacency(matrix: &AdjacencyMatrix) -> Result<StateGraph, EncodeError> {
    matrix.check()?;
    let mut seen = BTreeMap::new();
    for key in &matrix.node_order {
        if seen.insert(key.clone(), ()).is_some() {
            return Err(EncodeError::DuplicateKey { key: key.clone() });
        }
    }
    let n = matrix.order();
    let mut edges = Vec::new();
    for row in 0..n {
        for col in 0..n {
            let value = matrix.get(row, col);
            if value > 0.0 {
                let (count, probability) = match matrix.mode {
                    MatrixMode::Counts => (value as u64, None),
                    MatrixMode::Probabilities => (1, Some(value)),
                };
                edges.push(GraphEdge {
                    from: matrix.node_order[row].clone(),
                    to: matrix.node_order[col].clone(),
                    count,
                    probability,
                    visit_orders: Vec::new(),
                    label: String::new(),
                });
            }
        }
    }
    let kind = match matrix.mode {
        MatrixMode::Counts => GraphKind::Collapsed,
        MatrixMode::Probabilities => GraphKind::Probabilistic,
    };
    Ok(StateGraph::from_indexed_nodes(
        kind,
        String::new(),
        matrix.node_order.clone(),
        edges,
    ))
}

/// An order-3 tensor: one adjacency slice per layer over the union of the
/// layers' node sets, absent nodes contributing zero rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTensor {
    pub mode: MatrixMode,
    pub times: Vec<OrdinalTime>,
    pub node_order: Vec<String>,
    slices: Vec<AdjacencyMatrix>,
}

impl LayerTensor {
    /// (layer count, N, N).
    pub fn shape(&self) -> (usize, usize, usize) {
        let n = self.node_order.len();
        (self.times.len(), n, n)
    }

    pub fn slice(&self, t: usize) -> &AdjacencyMatrix {
        &self.slices[t]
    }

    pub fn get(&self, t: usize, i: usize, j: usize) -> f64 {
        self.slices[t].get(i, j)
    }

    /// Text form: per layer a `# t=<ordinal>` line followed by the CSV
    /// block of its slice.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (time, slice) in self.times.iter().zip(&self.slices) {
            writeln!(out, "# t={time}").unwrap();
            out.push_str(&slice.to_csv());
        }
        out
    }
}

/// Encodes a layer sequence as an order-3 tensor over the unioned node
/// universe, in ascending key order.
pub fn to_layer_tensor(layers: &GraphLayerSequence, mode: MatrixMode) -> LayerTensor {
    let mut universe: Vec<String> = layers
        .layers()
        .iter()
        .flat_map(|(_, g)| g.keys().map(|k| k.to_string()).collect::<Vec<_>>())
        .collect();
    universe.sort();
    universe.dedup();
    let index: BTreeMap<&str, usize> = universe
        .iter()
        .enumerate()
        .map(|(i, k)| (k.as_str(), i))
        .collect();

    let mut times = Vec::with_capacity(layers.len());
    let mut slices = Vec::with_capacity(layers.len());
    for (time, graph) in layers.layers() {
        let mut slice = AdjacencyMatrix::zero(mode, universe.clone());
        for edge in graph.edges() {
            let value = match mode {
                MatrixMode::Counts => edge.count as f64,
                MatrixMode::Probabilities => graph.edge_probability(edge),
            };
            slice.set(index[edge.from.as_str()], index[edge.to.as_str()], value);
        }
        times.push(*time);
        slices.push(slice);
    }
    LayerTensor {
        mode,
        times,
        node_order: universe,
        slices,
    }
}

/// Deterministic DOT text for a state graph. Edge labels carry the count
/// and the normalized probability.
pub fn to_dot(graph: &StateGraph) -> String {
    let mut out = String::new();
    out.push_str("digraph state_graph {\n");
    out.push_str("  rankdir=LR;\n");
    for key in graph.keys() {
        writeln!(out, "  \"{key}\";").unwrap();
    }
    for edge in graph.edges() {
        writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"count={} p={}\"];",
            edge.from,
            edge.to,
            edge.count,
            graph.edge_probability(edge)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// DOT text for a machine's transition-rule graph: control states as
/// nodes, one labeled edge per rule. Halting states render double-circled.
pub fn rules_to_dot(machine: &Machine) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", machine.name).unwrap();
    out.push_str("  rankdir=LR;\n");
    for state in &machine.states {
        if machine.is_halting(state) {
            writeln!(out, "  \"{state}\" [shape=doublecircle];").unwrap();
        } else {
            writeln!(out, "  \"{state}\";").unwrap();
        }
    }
    for ((state, read), action) in &machine.rules {
        writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}/{},{}\"];",
            state, action.next, read, action.write, action.movement
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_machine, parse_tape};
    use crate::exec::run;
    use crate::graph::collapse;

    const COUNTER: &str = include_str!("../tests/machines/binary_counter.tm");

    fn abc_counts() -> AdjacencyMatrix {
        AdjacencyMatrix::from_entries(
            MatrixMode::Counts,
            vec!["A".into(), "B".into(), "C".into()],
            vec![
                0.0, 1.0, 1.0, //
                0.0, 0.0, 1.0, //
                0.0, 0.0, 0.0,
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_node_graph_encodes_as_a_1x1_zero_matrix() {
        let matrix =
            AdjacencyMatrix::from_entries(MatrixMode::Counts, vec!["only".into()], vec![0.0])
                .unwrap();
        let graph = from_adjacency(&matrix).unwrap();
        assert_eq!(graph.node_count(), 1);
        assert_eq!(graph.edge_count(), 0);
        assert_eq!(to_adjacency(&graph, MatrixMode::Counts), matrix);
    }

    #[test]
    fn entries_transcribe_edges_directly() {
        let graph = from_adjacency(&abc_counts()).unwrap();
        let matrix = to_adjacency(&graph, MatrixMode::Counts);
        assert_eq!(matrix.get(0, 1), 1.0); // A -> B
        assert_eq!(matrix.get(1, 2), 1.0); // B -> C
        assert_eq!(matrix.get(0, 2), 1.0); // A -> C
        assert_eq!(matrix.entries().iter().sum::<f64>(), 3.0);
    }

    #[test]
    fn row_sums_equal_per_node_outgoing_totals() {
        let machine = parse_machine(COUNTER).unwrap();
        let trace = run(&machine, &parse_tape("11", &machine).unwrap(), 100).unwrap();
        let graph = collapse(&trace);
        let matrix = to_adjacency(&graph, MatrixMode::Counts);
        for (row, key) in matrix.node_order.iter().enumerate() {
            let expected: u64 = graph.out_edges(key).map(|e| e.count).sum();
            assert_eq!(matrix.row_sum(row), expected as f64);
        }
    }

    #[test]
    fn probability_encoding_rows_are_normalized() {
        use crate::graph::merge;
        let machine = parse_machine(COUNTER).unwrap();
        let graphs: Vec<_> = ["11", "0", "101"]
            .iter()
            .map(|input| {
                collapse(&run(&machine, &parse_tape(input, &machine).unwrap(), 100).unwrap())
            })
            .collect();
        let merged = merge(&graphs).unwrap();
        let matrix = to_adjacency(&merged, MatrixMode::Probabilities);
        for row in 0..matrix.order() {
            let sum = matrix.row_sum(row);
            assert!(
                sum == 0.0 || (sum - 1.0).abs() <= 1e-12,
                "row {row} sums to {sum}"
            );
        }
    }

    #[test]
    fn zero_matrix_decodes_to_isolated_nodes() {
        let matrix =
            AdjacencyMatrix::zero(MatrixMode::Counts, vec!["x".into(), "y".into(), "z".into()]);
        let graph = from_adjacency(&matrix).unwrap();
        assert_eq!(graph.node_count(), 3);
        assert_eq!(graph.edge_count(), 0);
    }

    #[test]
    fn invalid_matrices_are_rejected() {
        assert!(matches!(
            AdjacencyMatrix::from_entries(MatrixMode::Counts, vec!["a".into()], vec![0.0, 1.0]),
            Err(EncodeError::NotSquare { .. })
        ));
        assert!(matches!(
            AdjacencyMatrix::from_entries(MatrixMode::Counts, vec!["a".into()], vec![-1.0]),
            Err(EncodeError::NegativeEntry { .. })
        ));
        assert!(matches!(
            AdjacencyMatrix::from_entries(MatrixMode::Counts, vec!["a".into()], vec![0.5]),
            Err(EncodeError::NonIntegralCount { .. })
        ));
        // A node with an out-edge whose row sums to 0.9.
        assert!(matches!(
            AdjacencyMatrix::from_entries(
                MatrixMode::Probabilities,
                vec!["a".into(), "b".into()],
                vec![0.0, 0.9, 0.0, 0.0],
            ),
            Err(EncodeError::NormalizationError { row: 0, .. })
        ));
    }

    #[test]
    fn csv_round_trips_byte_for_byte() {
        let matrix = abc_counts();
        let csv = matrix.to_csv();
        assert_eq!(csv, "A,B,C\n0,1,1\n0,0,1\n0,0,0\n");
        let parsed = AdjacencyMatrix::from_csv(&csv, MatrixMode::Counts).unwrap();
        assert_eq!(parsed, matrix);
        assert_eq!(parsed.to_csv(), csv);
    }

    #[test]
    fn probability_csv_round_trips() {
        let matrix = AdjacencyMatrix::from_entries(
            MatrixMode::Probabilities,
            vec!["A".into(), "B".into()],
            vec![0.0, 1.0, 0.7, 0.3],
        )
        .unwrap();
        let csv = matrix.to_csv();
        let parsed = AdjacencyMatrix::from_csv(&csv, MatrixMode::Probabilities).unwrap();
        assert_eq!(parsed, matrix);
    }

    #[test]
    fn layer_tensor_slices_match_per_layer_matrices() {
        use crate::graph::GraphLayerSequence;
        let graph = from_adjacency(&abc_counts()).unwrap();
        let w = OrdinalTime::limit(1);
        let layers =
            GraphLayerSequence::new(vec![(w, graph.clone()), (w.succ(), graph.clone())]).unwrap();
        let tensor = to_layer_tensor(&layers, MatrixMode::Counts);
        assert_eq!(tensor.shape(), (2, 3, 3));
        assert_eq!(tensor.slice(0), tensor.slice(1));
        assert_eq!(tensor.slice(0), &to_adjacency(&graph, MatrixMode::Counts));
        assert_eq!(
            tensor
                .times
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>(),
            vec!["w", "w+1"]
        );
        let text = tensor.to_text();
        assert!(text.starts_with("# t=w\nA,B,C\n"));
        assert_eq!(text.matches("# t=").count(), 2);
    }

    #[test]
    fn tensor_times_come_from_a_transfinite_run() {
        use crate::exec::{Outcome, Trace};
        use crate::graph::GraphLayerSequence;
        use crate::tape::Tape;
        use crate::transfinite::run_transfinite;

        let machine = parse_machine(
            "machine double\n\
             blank B\n\
             input_alphabet 0 1\n\
             tape_alphabet B 0 1\n\
             start s\n\
             rule s B -> 1 S s\n\
             rule s 0 -> 1 S s\n\
             rule s 1 -> 0 S s\n\
             rule limit 1 -> 1 S p\n\
             rule p 1 -> 1 S p\n\
             rule p 0 -> 0 S p\n\
             rule p B -> B S p\n",
        )
        .unwrap();
        let trace = run_transfinite(&machine, &Tape::new("B"), 100, 2).unwrap();

        // One layer per limit stage, collapsed from that stage's steps and
        // pinned to the stage's limit ordinal.
        let limit_positions: Vec<usize> = trace
            .steps
            .iter()
            .enumerate()
            .filter(|(_, s)| s.time.is_limit())
            .map(|(i, _)| i)
            .collect();
        assert_eq!(limit_positions.len(), 2);
        let layers: Vec<(OrdinalTime, _)> = limit_positions
            .iter()
            .map(|&at| {
                let stage = Trace {
                    machine_name: trace.machine_name.clone(),
                    steps: trace.steps[..at].to_vec(),
                    outcome: Outcome::Running,
                    step_budget: at,
                };
                (trace.steps[at].time, collapse(&stage))
            })
            .collect();
        let sequence = GraphLayerSequence::new(layers).unwrap();
        let tensor = to_layer_tensor(&sequence, MatrixMode::Counts);
        assert_eq!(
            tensor
                .times
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>(),
            vec!["w", "w*2"]
        );
        for (t, (_, graph)) in sequence.layers().iter().enumerate() {
            let slice = tensor.slice(t);
            let per_layer = to_adjacency(graph, MatrixMode::Counts);
            // The slice embeds the layer matrix in the unioned node order.
            for (i, from) in per_layer.node_order.iter().enumerate() {
                for (j, to) in per_layer.node_order.iter().enumerate() {
                    let row = tensor.node_order.iter().position(|k| k == from).unwrap();
                    let col = tensor.node_order.iter().position(|k| k == to).unwrap();
                    assert_eq!(slice.get(row, col), per_layer.get(i, j));
                }
            }
        }
    }

    #[test]
    fn dot_output_is_deterministic() {
        let graph = from_adjacency(&abc_counts()).unwrap();
        let dot = to_dot(&graph);
        assert_eq!(dot, to_dot(&graph));
        assert!(dot.contains("\"A\" -> \"B\" [label=\"count=1 p=0.5\"];"));

        let two_node = AdjacencyMatrix::from_entries(
            MatrixMode::Counts,
            vec!["a".into(), "b".into()],
            vec![0.0, 1.0, 0.0, 0.0],
        )
        .unwrap();
        let dot = to_dot(&from_adjacency(&two_node).unwrap());
        assert_eq!(dot.matches("->").count(), 1);
    }

    #[test]
    fn rule_graph_of_the_counter_has_three_nodes_and_six_edges() {
        let machine = parse_machine(COUNTER).unwrap();
        let dot = rules_to_dot(&machine);
        assert_eq!(dot.matches("->").count(), 6);
        for state in ["q0", "q1", "qh"] {
            assert!(dot.contains(&format!("\"{state}\"")));
        }
        assert!(dot.contains("\"qh\" [shape=doublecircle];"));
        assert!(dot.contains("\"q0\" -> \"q1\" [label=\"B/B,L\"];"));
        assert_eq!(dot, rules_to_dot(&machine));
    }
}
