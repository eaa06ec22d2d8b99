//! Capacitated flow networks: a single source, a set of target vertices,
//! labeled vertices, and integer edge capacities. Edges never enter the
//! source and never leave a target; every target is reachable from the
//! source and every vertex can reach some target.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Raw network description as it appears in JSON. Field-for-field mirror of
/// the on-disk format; validation happens when converting to [`FlowNetwork`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkData {
    pub ap: Vec<String>,
    pub vertices: Vec<VertexData>,
    pub source: String,
    pub targets: Vec<String>,
    pub edges: Vec<EdgeData>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexData {
    pub id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeData {
    pub from: String,
    pub to: String,
    pub cap: i64,
}

/// A violation of the structural network invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateVertex(String),
    DuplicateEdge(String, String),
    UnknownVertex(String),
    UnknownLabel(String, String),
    SourceIsTarget(String),
    NoTargets,
    EdgeEntersSource(String, String),
    EdgeLeavesTarget(String, String),
    NegativeCapacity(String, String),
    TargetUnreachable(String),
    CannotReachTarget(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateVertex(v) => write!(f, "duplicate vertex {v}"),
            Violation::DuplicateEdge(u, v) => write!(f, "duplicate edge ({u},{v})"),
            Violation::UnknownVertex(v) => write!(f, "unknown vertex {v}"),
            Violation::UnknownLabel(v, p) => write!(f, "vertex {v} carries label {p} not in ap"),
            Violation::SourceIsTarget(v) => write!(f, "source {v} is also a target"),
            Violation::NoTargets => write!(f, "no target vertices"),
            Violation::EdgeEntersSource(u, v) => write!(f, "edge ({u},{v}) enters the source"),
            Violation::EdgeLeavesTarget(u, v) => write!(f, "edge ({u},{v}) leaves a target"),
            Violation::NegativeCapacity(u, v) => write!(f, "negative capacity on ({u},{v})"),
            Violation::TargetUnreachable(v) => write!(f, "target {v} unreachable from source"),
            Violation::CannotReachTarget(v) => write!(f, "vertex {v} cannot reach a target"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum NetworkError {
    #[error("network JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invalid network: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub cap: u64,
}

/// A validated flow network. Vertices are adressed by dense indices in input
/// order; ids stay available for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    ap: Vec<String>,
    ids: Vec<String>,
    labels: Vec<BTreeSet<String>>,
    source: usize,
    targets: BTreeSet<usize>,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn from_data(data: &NetworkData) -> Result<FlowNetwork, NetworkError> {
        let violations = validate(data);
        if !violations.is_empty() {
            return Err(NetworkError::Invalid(violations));
        }
        let mut index = BTreeMap::new();
        for (i, v) in data.vertices.iter().enumerate() {
            index.insert(v.id.clone(), i);
        }
        let n = data.vertices.len();
        let mut net = FlowNetwork {
            ap: data.ap.clone(),
            ids: data.vertices.iter().map(|v| v.id.clone()).collect(),
            labels: data
                .vertices
                .iter()
                .map(|v| v.labels.iter().cloned().collect())
                .collect(),
            source: index[&data.source],
            targets: data.targets.iter().map(|t| index[t]).collect(),
            edges: data
                .edges
                .iter()
                .map(|e| Edge { from: index[&e.from], to: index[&e.to], cap: e.cap as u64 })
                .collect(),
            out_edges: vec![Vec::new(); n],
            in_edges: vec![Vec::new(); n],
        };
        for (i, e) in net.edges.iter().enumerate() {
            net.out_edges[e.from].push(i);
            net.in_edges[e.to].push(i);
        }
        Ok(net)
    }

    pub fn to_data(&self) -> NetworkData {
        NetworkData {
            ap: self.ap.clone(),
            vertices: self
                .ids
                .iter()
                .zip(&self.labels)
                .map(|(id, ls)| VertexData { id: id.clone(), labels: ls.iter().cloned().collect() })
                .collect(),
            source: self.ids[self.source].clone(),
            targets: self.targets.iter().map(|&t| self.ids[t].clone()).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeData {
                    from: self.ids[e.from].clone(),
                    to: self.ids[e.to].clone(),
                    cap: e.cap as i64,
                })
                .collect(),
        }
    }

    pub fn ap(&self) -> &[String] {
        &self.ap
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn has_label(&self, v: usize, p: &str) -> bool {
        self.labels[v].contains(p)
    }

    pub fn labels(&self, v: usize) -> &BTreeSet<String> {
        &self.labels[v]
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn is_target(&self, v: usize) -> bool {
        self.targets.contains(&v)
    }

    pub fn targets(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_edges[v].iter().map(move |&e| self.edges[e].to)
    }

    pub fn edge_index(&self, from: usize, to: usize) -> Option<usize> {
        self.out_edges[from].iter().copied().find(|&e| self.edges[e].to == to)
    }

    /// Sum of all edge capacities; every through-flow value is bounded by it.
    pub fn capacity_sum(&self) -> u64 {
        self.edges.iter().map(|e| e.cap).sum()
    }

    pub fn all_vertices(&self) -> VertexSet {
        let mut s = VertexSet::empty(self.vertex_count());
        for v in 0..self.vertex_count() {
            s.insert(v);
        }
        s
    }
}

/// Parse and validate a network from its JSON text.
pub fn parse_network(text: &str) -> Result<FlowNetwork, NetworkError> {
    let data: NetworkData = serde_json::from_str(text)?;
    FlowNetwork::from_data(&data)
}

/// Check every structural invariant and report all violations found.
pub fn validate(data: &NetworkData) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut index = BTreeMap::new();
    for v in &data.vertices {
        if index.insert(v.id.clone(), index.len()).is_some() {
            out.push(Violation::DuplicateVertex(v.id.clone()));
        }
        for p in &v.labels {
            if !data.ap.contains(p) {
                out.push(Violation::UnknownLabel(v.id.clone(), p.clone()));
            }
        }
    }
    if !index.contains_key(&data.source) {
        out.push(Violation::UnknownVertex(data.source.clone()));
    }
    if data.targets.is_empty() {
        out.push(Violation::NoTargets);
    }
    for t in &data.targets {
        if !index.contains_key(t) {
            out.push(Violation::UnknownVertex(t.clone()));
        }
        if *t == data.source {
            out.push(Violation::SourceIsTarget(t.clone()));
        }
    }
    let mut seen = BTreeSet::new();
    for e in &data.edges {
        for v in [&e.from, &e.to] {
            if !index.contains_key(v) {
                out.push(Violation::UnknownVertex(v.clone()));
            }
        }
        if !seen.insert((e.from.clone(), e.to.clone())) {
            out.push(Violation::DuplicateEdge(e.from.clone(), e.to.clone()));
        }
        if data.targets.contains(&e.from) {
            out.push(Violation::EdgeLeavesTarget(e.from.clone(), e.to.clone()));
        }
        if e.to == data.source {
            out.push(Violation::EdgeEntersSource(e.from.clone(), e.to.clone()));
        }
        if e.cap < 0 {
            out.push(Violation::NegativeCapacity(e.from.clone(), e.to.clone()));
        }
    }
    if !out.is_empty() {
        return out;
    }

    // Reachability invariants, checked only once the graph shape is sound.
    let n = data.vertices.len();
    let mut succ = vec![Vec::new(); n];
    let mut pred = vec![Vec::new(); n];
    for e in &data.edges {
        succ[index[&e.from]].push(index[&e.to]);
        pred[index[&e.to]].push(index[&e.from]);
    }
    let from_source = bfs_closure(&succ, [index[&data.source]]);
    for t in &data.targets {
        if !from_source[index[t]] {
            out.push(Violation::TargetUnreachable(t.clone()));
        }
    }
    let to_target = bfs_closure(&pred, data.targets.iter().map(|t| index[t]));
    for v in &data.vertices {
        if !to_target[index[&v.id]] {
            out.push(Violation::CannotReachTarget(v.id.clone()));
        }
    }
    out
}

fn bfs_closure(adj: &[Vec<usize>], start: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue: VecDeque<usize> = start.into_iter().collect();
    for &v in &queue {
        seen[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Layer information for `X^k` constraint extraction at a vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerInfo {
    /// Vertices some path of length exactly `k` from `v` ends at.
    pub exactly_k: VertexSet,
    /// Vertices some path of length at least `k` from `v` passes through.
    pub at_least_k: VertexSet,
    /// Whether some target `v`-path is shorter than `k`.
    pub short_target_path_exists: bool,
}

/// Compute the exact-`k` layer, its forward closure, and whether a target is
/// reachable from `v` in fewer than `k` steps.
pub fn reachability_layers(net: &FlowNetwork, v: usize, k: usize) -> LayerInfo {
    let n = net.vertex_count();
    let mut layer = VertexSet::empty(n);
    layer.insert(v);
    let mut short = false;
    for _ in 0..k {
        if layer.iter().any(|u| net.is_target(u)) {
            short = true;
        }
        let mut next = VertexSet::empty(n);
        for u in layer.iter() {
            for w in net.successors(u) {
                next.insert(w);
            }
        }
        layer = next;
    }
    let mut closure = layer.clone();
    let mut queue: VecDeque<usize> = layer.iter().collect();
    while let Some(u) = queue.pop_front() {
        for w in net.successors(u) {
            if !closure.contains(w) {
                closure.insert(w);
                queue.push_back(w);
            }
        }
    }
    LayerInfo { exactly_k: layer, at_least_k: closure, short_target_path_exists: short }
}

/// Subdivide every edge with a fresh vertex labeled by a fresh proposition.
/// Both halves keep the original capacity, so flows transfer one-to-one and
/// the maximal flow value is preserved. Returns the refined network, the
/// fresh proposition, and for each original edge the index of its first half
/// in the refined edge list.
pub fn refine_for_positive_paths(net: &FlowNetwork) -> (FlowNetwork, String, Vec<usize>) {
    let mut prop = "edge".to_string();
    let mut k = 0;
    while net.ap.contains(&prop) {
        prop = format!("edge{k}");
        k += 1;
    }
    let mut data = net.to_data();
    data.ap.push(prop.clone());
    let old_edges = std::mem::take(&mut data.edges);
    let mut first_half = Vec::with_capacity(old_edges.len());
    for e in &old_edges {
        let mut id = format!("{}>{}", e.from, e.to);
        while data.vertices.iter().any(|v| v.id == id) {
            id.push('\'');
        }
        data.vertices.push(VertexData { id: id.clone(), labels: vec![prop.clone()] });
        first_half.push(data.edges.len());
        data.edges.push(EdgeData { from: e.from.clone(), to: id.clone(), cap: e.cap });
        data.edges.push(EdgeData { from: id, to: e.to.clone(), cap: e.cap });
    }
    let refined = FlowNetwork::from_data(&data).expect("refinement preserves the invariants");
    (refined, prop, first_half)
}

/// A set of vertex indices, packed into machine words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    len: usize,
    bits: Vec<u64>,
}

impl VertexSet {
    pub fn empty(len: usize) -> VertexSet {
        VertexSet { len, bits: vec![0; len.div_ceil(64)] }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn insert(&mut self, v: usize) {
        debug_assert!(v < self.len);
        self.bits[v / 64] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: usize) {
        self.bits[v / 64] &= !(1 << (v % 64));
    }

    pub fn contains(&self, v: usize) -> bool {
        self.bits[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        debug_assert_eq!(self.len, other.len);
        VertexSet {
            len: self.len,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn intersect(&self, other: &VertexSet) -> VertexSet {
        debug_assert_eq!(self.len, other.len);
        VertexSet {
            len: self.len,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn complement(&self) -> VertexSet {
        let mut out = VertexSet { len: self.len, bits: self.bits.iter().map(|w| !w).collect() };
        let tail = self.len % 64;
        if tail != 0 {
            if let Some(last) = out.bits.last_mut() {
                *last &= (1 << tail) - 1;
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&v| self.contains(v))
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
