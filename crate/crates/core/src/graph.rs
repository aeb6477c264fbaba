//! Z^d-periodic graph data: fundamental graphs, edge indices, bridges,
//! spanning trees, and cycle-space bases.
//!
//! A periodic graph is described by its finite quotient (the fundamental
//! graph) together with an integer index vector per edge recording how the
//! edge crosses period cells. Everything downstream — fiber matrices, band
//! structures, effective masses — is computed from this data alone.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::GraphError;

/// Threshold on singular values when ranking integer index matrices.
const RANK_EPS: f64 = 1e-9;

/// Exhaustive basis search is used while the number of candidate subsets
/// stays below this; larger bridge sets fall back to greedy selection.
const EXHAUSTIVE_SUBSET_LIMIT: u128 = 10_000;

/// An undirected edge of a fundamental graph, stored with a fixed
/// orientation. `index` is the integer crossing vector; reversing the
/// orientation negates it. Loops (`tail == head`) and multiple edges are
/// allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub index: Vec<i64>,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }

    pub fn is_bridge(&self) -> bool {
        self.index.iter().any(|&c| c != 0)
    }

    /// Euclidean norm of the index vector.
    pub fn index_norm(&self) -> f64 {
        self.index
            .iter()
            .map(|&c| (c * c) as f64)
            .sum::<f64>()
            .sqrt()
    }

    /// Inner product of the index vector with a real direction.
    pub fn index_dot(&self, direction: &[f64]) -> f64 {
        self.index
            .iter()
            .zip(direction)
            .map(|(&c, &x)| c as f64 * x)
            .sum()
    }
}

/// One oriented copy of an undirected edge. Every edge contributes two:
/// the stored orientation and its reversal with negated index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedEdge {
    pub edge: usize,
    pub tail: usize,
    pub head: usize,
    pub index: Vec<i64>,
}

/// A validated fundamental graph of a Z^d-periodic graph.
///
/// Immutable after construction; vertex order is input order and fixes the
/// row/column indexing of every matrix built from the graph. A loop
/// contributes two to the degree of its vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalGraph {
    dimension: usize,
    labels: Vec<String>,
    edges: Vec<Edge>,
    degrees: Vec<usize>,
}

impl FundamentalGraph {
    pub fn new(
        dimension: usize,
        labels: Vec<String>,
        edges: Vec<Edge>,
    ) -> Result<Self, GraphError> {
        if dimension == 0 {
            return Err(GraphError::ZeroDimension);
        }
        if labels.is_empty() {
            return Err(GraphError::NoVertices);
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(GraphError::DuplicateVertex(label.clone()));
            }
        }
        let count = labels.len();
        for (e, edge) in edges.iter().enumerate() {
            if edge.tail >= count {
                return Err(GraphError::UnknownVertex {
                    edge: e,
                    label: format!("#{}", edge.tail),
                });
            }
            if edge.head >= count {
                return Err(GraphError::UnknownVertex {
                    edge: e,
                    label: format!("#{}", edge.head),
                });
            }
            if edge.index.len() != dimension {
                return Err(GraphError::IndexDimensionMismatch {
                    edge: e,
                    expected: dimension,
                    found: edge.index.len(),
                });
            }
        }

        let mut degrees = vec![0usize; count];
        for edge in &edges {
            degrees[edge.tail] += 1;
            degrees[edge.head] += 1;
        }

        let graph = FundamentalGraph {
            dimension,
            labels,
            edges,
            degrees,
        };
        if !graph.is_connected() {
            return Err(GraphError::DisconnectedQuotient);
        }
        let rank = graph.index_rank();
        if rank < dimension {
            return Err(GraphError::InsufficientPeriodRank { rank, dimension });
        }
        Ok(graph)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.degrees[vertex]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Sum of all vertex degrees, twice the edge count.
    pub fn total_degree(&self) -> usize {
        self.degrees.iter().sum()
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Both oriented copies of every edge, in edge order: the stored
    /// orientation first, then the reversal with negated index.
    pub fn oriented_edges(&self) -> Vec<OrientedEdge> {
        let mut out = Vec::with_capacity(2 * self.edges.len());
        for (e, edge) in self.edges.iter().enumerate() {
            out.push(OrientedEdge {
                edge: e,
                tail: edge.tail,
                head: edge.head,
                index: edge.index.clone(),
            });
            out.push(OrientedEdge {
                edge: e,
                tail: edge.head,
                head: edge.tail,
                index: edge.index.iter().map(|&c| -c).collect(),
            });
        }
        out
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut adjacency = vec![Vec::new(); n];
        for edge in &self.edges {
            adjacency[edge.tail].push(edge.head);
            adjacency[edge.head].push(edge.tail);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Rank over R of the stacked edge-index matrix.
    fn index_rank(&self) -> usize {
        let rows: Vec<&Edge> = self.edges.iter().filter(|e| e.is_bridge()).collect();
        if rows.is_empty() {
            return 0;
        }
        let m = DMatrix::from_fn(rows.len(), self.dimension, |i, j| rows[i].index[j] as f64);
        m.svd(false, false).rank(RANK_EPS)
    }

    /// Breadth-first spanning tree rooted at the first listed vertex.
    /// Deterministic given input order.
    pub fn spanning_tree(&self) -> SpanningTree {
        let n = self.vertex_count();
        let mut incident = vec![Vec::new(); n];
        for (e, edge) in self.edges.iter().enumerate() {
            incident[edge.tail].push(e);
            if !edge.is_loop() {
                incident[edge.head].push(e);
            }
        }
        let mut parent = vec![None; n];
        let mut depth = vec![0usize; n];
        let mut in_tree = vec![false; self.edges.len()];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut edge_ids = Vec::with_capacity(n.saturating_sub(1));
        while let Some(v) = queue.pop_front() {
            for &e in &incident[v] {
                let edge = &self.edges[e];
                let other = if edge.tail == v { edge.head } else { edge.tail };
                if !seen[other] {
                    seen[other] = true;
                    parent[other] = Some((v, e));
                    depth[other] = depth[v] + 1;
                    in_tree[e] = true;
                    edge_ids.push(e);
                    queue.push_back(other);
                }
            }
        }
        SpanningTree {
            edge_ids,
            in_tree,
            parent,
            depth,
        }
    }

    /// Vertex shifts that zero the indices of every spanning-tree edge when
    /// fed to [`FundamentalGraph::normalize_indices`].
    pub fn tree_shifts(&self) -> Vec<Vec<i64>> {
        let tree = self.spanning_tree();
        let d = self.dimension;
        let mut shifts = vec![vec![0i64; d]; self.vertex_count()];
        // Parents are assigned in BFS order, so a vertex's parent shift is
        // already final when the vertex is processed.
        let mut order: Vec<usize> = (0..self.vertex_count()).collect();
        order.sort_by_key(|&v| tree.depth[v]);
        for v in order {
            if let Some((p, e)) = tree.parent[v] {
                let edge = &self.edges[e];
                // Index after shifting: tau + shift(tail) - shift(head).
                // Solve for the child's shift so the tree edge gets zero.
                let parent_shift = shifts[p].clone();
                if edge.tail == p {
                    for (s, (tau, base)) in shifts[v]
                        .iter_mut()
                        .zip(edge.index.iter().zip(&parent_shift))
                    {
                        *s = tau + base;
                    }
                } else {
                    for (s, (tau, base)) in shifts[v]
                        .iter_mut()
                        .zip(edge.index.iter().zip(&parent_shift))
                    {
                        *s = base - tau;
                    }
                }
            }
        }
        shifts
    }

    /// Re-index the graph with respect to a shifted fundamental vertex set.
    ///
    /// Each edge index becomes `tau + shift(tail) - shift(head)`; loop
    /// indices are unchanged. The spectrum of the fiber matrices is
    /// invariant under this operation.
    ///
    /// `shifts` must contain one length-d vector per vertex.
    pub fn normalize_indices(&self, shifts: &[Vec<i64>]) -> FundamentalGraph {
        assert_eq!(shifts.len(), self.vertex_count(), "one shift per vertex");
        for s in shifts {
            assert_eq!(s.len(), self.dimension, "shift length must equal dimension");
        }
        let edges = self
            .edges
            .iter()
            .map(|edge| {
                let index = (0..self.dimension)
                    .map(|j| edge.index[j] + shifts[edge.tail][j] - shifts[edge.head][j])
                    .collect();
                Edge {
                    tail: edge.tail,
                    head: edge.head,
                    index,
                }
            })
            .collect();
        FundamentalGraph {
            dimension: self.dimension,
            labels: self.labels.clone(),
            edges,
            degrees: self.degrees.clone(),
        }
    }

    /// Bridge set and the spectral data of its index matrices.
    pub fn bridges(&self) -> Result<BridgeData, GraphError> {
        let bridge_ids: Vec<usize> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_bridge())
            .map(|(i, _)| i)
            .collect();
        let d = self.dimension;
        let rows: Vec<Vec<f64>> = bridge_ids
            .iter()
            .map(|&e| self.edges[e].index.iter().map(|&c| c as f64).collect())
            .collect();
        let full = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        let rank = full.clone().svd(false, false).rank(RANK_EPS);
        if rank < d {
            return Err(GraphError::InsufficientPeriodRank { rank, dimension: d });
        }

        let basis_positions = select_basis(&rows, d);
        let basis_ids: Vec<usize> = basis_positions.iter().map(|&p| bridge_ids[p]).collect();
        let basis = DMatrix::from_fn(d, d, |i, j| rows[basis_positions[i]][j]);
        let basis_svd = basis.svd(false, false);
        let sigma_min = basis_svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let full_svd = full.svd(false, false);
        let sigma_max = full_svd
            .singular_values
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);

        // Guaranteed enclosure for the extreme Gram eigenvalues in terms of
        // row norms of integer index matrices.
        let squared_norm_sum: f64 = basis_positions
            .iter()
            .map(|&p| rows[p].iter().map(|x| x * x).sum::<f64>())
            .sum();
        let bracket_lower = if d == 1 {
            1.0
        } else {
            ((d as f64 - 1.0) / squared_norm_sum).powi(d as i32 - 1)
        };
        let mut abs_sum = vec![0.0f64; d];
        for row in &rows {
            for j in 0..d {
                abs_sum[j] += row[j].abs();
            }
        }
        let bracket_upper = rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&abs_sum)
                    .map(|(x, s)| x.abs() * s)
                    .sum::<f64>()
            })
            .fold(0.0f64, f64::max);

        Ok(BridgeData {
            bridge_ids,
            basis_ids,
            basis_gram_min: sigma_min * sigma_min,
            full_gram_max: sigma_max * sigma_max,
            bracket: (bracket_lower, bracket_upper),
        })
    }

    /// Signed indicator vectors of the tree+chord cycles, one per non-tree
    /// edge. They span the kernel of the adjoint of the vertex-to-edge
    /// gradient at zero quasimomentum, so there are exactly
    /// `edge_count - vertex_count + 1` of them.
    pub fn cycle_kernel_basis(&self) -> Vec<Vec<f64>> {
        let tree = self.spanning_tree();
        let mut basis = Vec::new();
        for (e, edge) in self.edges.iter().enumerate() {
            if tree.in_tree[e] {
                continue;
            }
            let mut cycle = vec![0.0f64; self.edges.len()];
            cycle[e] = 1.0;
            // Close the cycle with the unique tree path head -> tail.
            for (path_edge, forward) in tree.path(self, edge.head, edge.tail) {
                cycle[path_edge] += if forward { 1.0 } else { -1.0 };
            }
            basis.push(cycle);
        }
        basis
    }

    /// Signed index sum around a cycle vector: `sum_e xi(e) * tau(e)`.
    /// Invariant under re-indexing by vertex shifts.
    pub fn cycle_index_sum(&self, cycle: &[f64]) -> Vec<i64> {
        let mut total = vec![0i64; self.dimension];
        for (e, &sign) in cycle.iter().enumerate() {
            let s = sign.round() as i64;
            for (t, tau) in total.iter_mut().zip(&self.edges[e].index) {
                *t += s * tau;
            }
        }
        total
    }
}

/// Breadth-first spanning tree of a fundamental graph.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    /// Tree edges in discovery order; `vertex_count - 1` of them.
    pub edge_ids: Vec<usize>,
    pub in_tree: Vec<bool>,
    /// `parent[v] = (parent vertex, connecting edge)`, `None` at the root.
    pub parent: Vec<Option<(usize, usize)>>,
    pub depth: Vec<usize>,
}

impl SpanningTree {
    /// Tree path from `from` to `to` as `(edge, traversed_forward)` steps,
    /// where `forward` means the stored orientation points along the walk.
    pub fn path(&self, graph: &FundamentalGraph, from: usize, to: usize) -> Vec<(usize, bool)> {
        let mut up_from = Vec::new();
        let mut up_to = Vec::new();
        let (mut a, mut b) = (from, to);
        while self.depth[a] > self.depth[b] {
            let (p, e) = self.parent[a].expect("non-root vertex has a parent");
            up_from.push((e, graph.edges()[e].tail == a));
            a = p;
        }
        while self.depth[b] > self.depth[a] {
            let (p, e) = self.parent[b].expect("non-root vertex has a parent");
            up_to.push((e, graph.edges()[e].tail == b));
            b = p;
        }
        while a != b {
            let (pa, ea) = self.parent[a].expect("non-root vertex has a parent");
            up_from.push((ea, graph.edges()[ea].tail == a));
            a = pa;
            let (pb, eb) = self.parent[b].expect("non-root vertex has a parent");
            up_to.push((eb, graph.edges()[eb].tail == b));
            b = pb;
        }
        // Walk up from `from`, then down to `to`; descending steps reverse.
        for step in up_to.iter_mut() {
            step.1 = !step.1;
        }
        up_to.reverse();
        up_from.extend(up_to);
        up_from
    }
}

/// Bridges of a fundamental graph with two-sided spectral data of their
/// index matrices: the smallest Gram eigenvalue of a best d-subset and the
/// largest Gram eigenvalue of the full bridge stack, plus a computable
/// enclosure for both.
#[derive(Debug, Clone)]
pub struct BridgeData {
    pub bridge_ids: Vec<usize>,
    /// The d bridges chosen to maximize the smallest singular value.
    pub basis_ids: Vec<usize>,
    /// Smallest eigenvalue of (basis)^T (basis); positive by construction.
    pub basis_gram_min: f64,
    /// Largest eigenvalue of the full bridge-index Gram matrix.
    pub full_gram_max: f64,
    /// Proven enclosure: `bracket.0 <= basis_gram_min` and
    /// `full_gram_max <= bracket.1`.
    pub bracket: (f64, f64),
}

impl BridgeData {
    pub fn bridge_count(&self) -> usize {
        self.bridge_ids.len()
    }
}

/// Pick d row positions whose submatrix maximizes the smallest singular
/// value. Exhaustive below `EXHAUSTIVE_SUBSET_LIMIT` combinations, greedy
/// volume-based selection above.
fn select_basis(rows: &[Vec<f64>], d: usize) -> Vec<usize> {
    let n = rows.len();
    if binomial(n, d) <= EXHAUSTIVE_SUBSET_LIMIT {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for combo in combinations(n, d) {
            let m = DMatrix::from_fn(d, d, |i, j| rows[combo[i]][j]);
            let sigma = m
                .svd(false, false)
                .singular_values
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|(s, _)| sigma > *s) {
                best = Some((sigma, combo));
            }
        }
        best.expect("at least one subset").1
    } else {
        greedy_basis(rows, d)
    }
}

/// Greedy pivoted selection: repeatedly take the row with the largest
/// component orthogonal to the span of the rows chosen so far.
fn greedy_basis(rows: &[Vec<f64>], d: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(d);
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for _ in 0..d {
        let mut best = (f64::NEG_INFINITY, 0usize, Vec::new());
        for (i, row) in rows.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let mut r = row.clone();
            for q in &ortho {
                let pivot: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
                for (rj, qj) in r.iter_mut().zip(q) {
                    *rj -= pivot * qj;
                }
            }
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > best.0 {
                best = (norm, i, r);
            }
        }
        let (norm, i, mut r) = best;
        if norm > RANK_EPS {
            for rj in r.iter_mut() {
                *rj /= norm;
            }
            ortho.push(r);
        }
        chosen.push(i);
    }
    chosen
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut out: u128 = 1;
    for i in 0..k.min(n - k) {
        out = out.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        out.push(combo.clone());
        // Advance the rightmost index that can still move.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if combo[i] < n - (k - i) {
                combo[i] += 1;
                for j in i + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDocument {
    dimension: usize,
    vertices: Vec<String>,
    edges: Vec<(String, String, Vec<i64>)>,
}

/// Parse a graph-definition document.
///
/// The format is a JSON object with exactly the fields `dimension`
/// (integer), `vertices` (list of labels) and `edges` (list of
/// `[tail, head, [t1, ..., td]]` triples); unknown fields are rejected.
pub fn parse_graph(text: &str) -> Result<FundamentalGraph, GraphError> {
    let doc: GraphDocument =
        serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
    let mut labels = Vec::with_capacity(doc.vertices.len());
    for label in doc.vertices {
        if labels.contains(&label) {
            return Err(GraphError::DuplicateVertex(label));
        }
        labels.push(label);
    }
    let lookup = |edge: usize, label: &str| -> Result<usize, GraphError> {
        labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| GraphError::UnknownVertex {
                edge,
                label: label.to_string(),
            })
    };
    let mut edges = Vec::with_capacity(doc.edges.len());
    for (e, (tail, head, index)) in doc.edges.into_iter().enumerate() {
        if index.len() != doc.dimension {
            return Err(GraphError::IndexDimensionMismatch {
                edge: e,
                expected: doc.dimension,
                found: index.len(),
            });
        }
        edges.push(Edge {
            tail: lookup(e, &tail)?,
            head: lookup(e, &head)?,
            index,
        });
    }
    FundamentalGraph::new(doc.dimension, labels, edges)
}
