//! Integral flow algorithms: maximum flow, feasible flow under edge lower
//! bounds, and flow under per-vertex through-flow ranges (by splitting each
//! vertex into an in/out pair joined by a bounded edge). All of them return
//! integral witnesses whenever a solution exists at all.

use crate::flow::FlowFunction;
use crate::network::FlowNetwork;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility<T> {
    Feasible(T),
    Infeasible,
}

impl<T> Feasibility<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn feasible(self) -> Option<T> {
        match self {
            Feasibility::Feasible(t) => Some(t),
            Feasibility::Infeasible => None,
        }
    }
}

/// Closed integer range for a vertex through-flow. `hi = None` leaves the
/// upper end at the capacity sum, which no flow can exceed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntRange {
    pub lo: u64,
    pub hi: Option<u64>,
}

impl IntRange {
    pub fn unconstrained() -> IntRange {
        IntRange { lo: 0, hi: None }
    }

    pub fn exactly(v: u64) -> IntRange {
        IntRange { lo: v, hi: Some(v) }
    }
}

/// Augmenting-path max flow on a scratch graph. Arcs come in forward/reverse
/// pairs; BFS picks arcs in insertion order, so results are deterministic.
struct ResidualGraph {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u64>,
}

impl ResidualGraph {
    fn new(n: usize) -> ResidualGraph {
        ResidualGraph { adj: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new() }
    }

    fn add_arc(&mut self, u: usize, v: usize, cap: u64) -> usize {
        let id = self.to.len();
        self.to.push(v);
        self.cap.push(cap);
        self.adj[u].push(id);
        self.to.push(u);
        self.cap.push(0);
        self.adj[v].push(id + 1);
        id
    }

    /// Flow pushed through a forward arc equals the residual on its pair.
    fn pushed(&self, arc: usize) -> u64 {
        self.cap[arc ^ 1]
    }

    fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let mut total = 0;
        loop {
            let mut prev: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(s);
            prev[s] = Some(usize::MAX);
            while let Some(u) = queue.pop_front() {
                for &a in &self.adj[u] {
                    let v = self.to[a];
                    if self.cap[a] > 0 && prev[v].is_none() {
                        prev[v] = Some(a);
                        queue.push_back(v);
                    }
                }
            }
            if prev[t].is_none() || s == t {
                return total;
            }
            let mut bottleneck = u64::MAX;
            let mut v = t;
            while v != s {
                let a = prev[v].unwrap();
                bottleneck = bottleneck.min(self.cap[a]);
                v = self.to[a ^ 1];
            }
            let mut v = t;
            while v != s {
                let a = prev[v].unwrap();
                self.cap[a] -= bottleneck;
                self.cap[a ^ 1] += bottleneck;
                v = self.to[a ^ 1];
            }
            total += bottleneck;
        }
    }
}

/// Maximum flow from the source into the target set, with a witness.
pub fn max_flow(net: &FlowNetwork) -> (u64, FlowFunction) {
    let n = net.vertex_count();
    let mut g = ResidualGraph::new(n + 1);
    let sink = n;
    let arcs: Vec<usize> =
        net.edges().iter().map(|e| g.add_arc(e.from, e.to, e.cap)).collect();
    let big = net.capacity_sum();
    for t in net.targets() {
        g.add_arc(t, sink, big);
    }
    let value = g.max_flow(net.source(), sink);
    let vals: Vec<u64> = arcs.iter().map(|&a| g.pushed(a)).collect();
    let witness = FlowFunction::integral(net, vals).expect("max flow respects the invariants");
    (value, witness)
}

/// Directed graph with per-arc flow bounds, the input to
/// [`feasible_flow_lower_bounds`].
#[derive(Debug, Clone)]
pub struct BoundedEdgeGraph {
    n: usize,
    arcs: Vec<BoundedArc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundedArc {
    pub from: usize,
    pub to: usize,
    pub lower: u64,
    pub upper: u64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("arc ({0},{1}) has lower bound {2} above upper bound {3}")]
    LowerAboveUpper(usize, usize, u64, u64),
    #[error("arc endpoint {0} out of range")]
    BadVertex(usize),
}

impl BoundedEdgeGraph {
    pub fn new(n: usize) -> BoundedEdgeGraph {
        BoundedEdgeGraph { n, arcs: Vec::new() }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, lower: u64, upper: u64) -> Result<usize, BoundsError> {
        if lower > upper {
            return Err(BoundsError::LowerAboveUpper(from, to, lower, upper));
        }
        if from >= self.n || to >= self.n {
            return Err(BoundsError::BadVertex(from.max(to)));
        }
        self.arcs.push(BoundedArc { from, to, lower, upper });
        Ok(self.arcs.len() - 1)
    }

    pub fn arcs(&self) -> &[BoundedArc] {
        &self.arcs
    }
}

/// Feasible source-to-targets flow respecting all arc bounds. Lower bounds
/// are subtracted out, the per-vertex imbalance becomes supply and demand on
/// a super source/sink pair, return arcs close the circulation, and the
/// instance is feasible exactly when the supply saturates.
pub fn feasible_flow_lower_bounds(
    graph: &BoundedEdgeGraph,
    source: usize,
    targets: &[usize],
) -> Feasibility<Vec<u64>> {
    let n = graph.n;
    let super_source = n;
    let super_sink = n + 1;
    let mut g = ResidualGraph::new(n + 2);
    let mut imbalance = vec![0i128; n];
    let big: u64 = graph.arcs.iter().map(|a| a.upper).sum::<u64>().max(1);

    let arcs: Vec<usize> = graph
        .arcs
        .iter()
        .map(|a| {
            imbalance[a.to] += a.lower as i128;
            imbalance[a.from] -= a.lower as i128;
            g.add_arc(a.from, a.to, a.upper - a.lower)
        })
        .collect();
    for &t in targets {
        g.add_arc(t, source, big);
    }
    let mut supply = 0;
    for (v, &d) in imbalance.iter().enumerate() {
        if d > 0 {
            g.add_arc(super_source, v, d as u64);
            supply += d as u64;
        } else if d < 0 {
            g.add_arc(v, super_sink, (-d) as u64);
        }
    }
    if g.max_flow(super_source, super_sink) != supply {
        return Feasibility::Infeasible;
    }
    Feasibility::Feasible(
        arcs.iter()
            .zip(&graph.arcs)
            .map(|(&a, bounds)| bounds.lower + g.pushed(a))
            .collect(),
    )
}

/// An integral flow whose through-flow at each vertex lies in the given
/// range. Every vertex `v` splits into an in/out pair joined by an edge
/// bounded by the range, so feasibility reduces to edge lower bounds.
pub fn vertex_constrained_flow(
    net: &FlowNetwork,
    ranges: &[IntRange],
) -> Feasibility<FlowFunction> {
    assert_eq!(ranges.len(), net.vertex_count());
    let cap_sum = net.capacity_sum();
    let n = net.vertex_count();
    let v_in = |v: usize| 2 * v;
    let v_out = |v: usize| 2 * v + 1;

    let mut g = BoundedEdgeGraph::new(2 * n);
    for (v, r) in ranges.iter().enumerate() {
        let hi = r.hi.unwrap_or(cap_sum).min(cap_sum);
        if r.lo > hi {
            return Feasibility::Infeasible;
        }
        g.add_arc(v_in(v), v_out(v), r.lo, hi).expect("bounds checked above");
    }
    let mut edge_arcs = Vec::with_capacity(net.edges().len());
    for e in net.edges() {
        edge_arcs.push(
            g.add_arc(v_out(e.from), v_in(e.to), 0, e.cap).expect("capacity bounds are valid"),
        );
    }
    let split_targets: Vec<usize> = net.targets().map(v_out).collect();
    match feasible_flow_lower_bounds(&g, v_in(net.source()), &split_targets) {
        Feasibility::Infeasible => Feasibility::Infeasible,
        Feasibility::Feasible(vals) => {
            let flow: Vec<u64> = edge_arcs.iter().map(|&a| vals[a]).collect();
            Feasibility::Feasible(
                FlowFunction::integral(net, flow).expect("split-graph flow maps back"),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{net, DIAMOND, PIPE9};
    use crate::gen::{random_network, NetworkConfig};
    use crate::oracle::enumerate_flows;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_edge_max_flow() {
        let n = net(r#"{"ap":[],"vertices":[{"id":"s"},{"id":"t"}],
            "source":"s","targets":["t"],
            "edges":[{"from":"s","to":"t","cap":5}]}"#);
        let (v, f) = max_flow(&n);
        assert_eq!(v, 5);
        assert_eq!(f.vertex_value_int(&n, n.source()), Some(5));
    }

    #[test]
    fn diamond_max_flow_is_seven() {
        let n = net(DIAMOND);
        let (v, f) = max_flow(&n);
        assert_eq!(v, 7);
        f.validate(&n).unwrap();
        assert_eq!(f.vertex_value_int(&n, n.source()), Some(7));
    }

    #[test]
    fn max_flow_matches_enumeration_on_random_networks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let n = random_network(&mut rng, &NetworkConfig { max_internal: 4, max_cap: 3, ..Default::default() });
            let (v, f) = max_flow(&n);
            f.validate(&n).unwrap();
            assert_eq!(f.vertex_value_int(&n, n.source()), Some(v));
            let best = enumerate_flows(&n, 500_000)
                .unwrap()
                .iter()
                .map(|g| g.vertex_value_int(&n, n.source()).unwrap())
                .max()
                .unwrap();
            assert_eq!(v, best);
        }
    }

    #[test]
    fn lower_bounds_single_arc() {
        let mut g = BoundedEdgeGraph::new(2);
        g.add_arc(0, 1, 2, 5).unwrap();
        match feasible_flow_lower_bounds(&g, 0, &[1]) {
            Feasibility::Feasible(vals) => assert!((2..=5).contains(&vals[0])),
            Feasibility::Infeasible => panic!("expected a feasible flow"),
        }
        assert_eq!(
            g.add_arc(0, 1, 6, 5).unwrap_err(),
            BoundsError::LowerAboveUpper(0, 1, 6, 5)
        );
    }

    #[test]
    fn lower_bounds_detect_capacity_mismatch() {
        let mut g = BoundedEdgeGraph::new(3);
        g.add_arc(0, 1, 3, 3).unwrap();
        g.add_arc(1, 2, 0, 2).unwrap();
        assert_eq!(feasible_flow_lower_bounds(&g, 0, &[2]), Feasibility::Infeasible);
    }

    #[test]
    fn vertex_ranges_on_a_pipe() {
        let n = net(PIPE9);
        let s = n.source();
        let mut ranges = vec![IntRange::unconstrained(); n.vertex_count()];
        ranges[s] = IntRange { lo: 7, hi: Some(8) };
        match vertex_constrained_flow(&n, &ranges) {
            Feasibility::Feasible(f) => {
                let v = f.vertex_value_int(&n, s).unwrap();
                assert!((7..=8).contains(&v));
            }
            Feasibility::Infeasible => panic!("range [7,8] fits under capacity 9"),
        }
        ranges[s] = IntRange { lo: 10, hi: Some(12) };
        assert_eq!(vertex_constrained_flow(&n, &ranges), Feasibility::Infeasible);
    }

    #[test]
    fn vertex_ranges_match_enumeration_on_random_networks() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for round in 0..30 {
            let n = random_network(&mut rng, &NetworkConfig { max_internal: 3, max_cap: 3, ..Default::default() });
            let ranges: Vec<IntRange> = (0..n.vertex_count())
                .map(|_| {
                    use rand::Rng;
                    let lo = rng.gen_range(0..=2u64);
                    let hi = if rng.gen_bool(0.3) { None } else { Some(lo + rng.gen_range(0..=2u64)) };
                    IntRange { lo, hi }
                })
                .collect();
            let got = vertex_constrained_flow(&n, &ranges);
            let want = enumerate_flows(&n, 500_000).unwrap().into_iter().find(|f| {
                (0..n.vertex_count()).all(|v| {
                    let val = f.vertex_value_int(&n, v).unwrap();
                    val >= ranges[v].lo && ranges[v].hi.is_none_or(|h| val <= h)
                })
            });
            match (&got, &want) {
                (Feasibility::Feasible(f), Some(_)) => {
                    f.validate(&n).unwrap();
                    for (v, r) in ranges.iter().enumerate() {
                        let val = f.vertex_value_int(&n, v).unwrap();
                        assert!(val >= r.lo, "round {round}: lo violated at {v}");
                        assert!(r.hi.is_none_or(|h| val <= h), "round {round}: hi violated at {v}");
                    }
                }
                (Feasibility::Infeasible, None) => {}
                _ => panic!("round {round}: disagreement with enumeration, ranges {ranges:?}"),
            }
        }
    }
}
