//! Unwinding a network into a tree of paths from the source.
//!
//! Tree vertices are the paths themselves; each copy of an edge inherits
//! the capacity of the underlying edge, so vertex duplication can raise
//! the maximal flow value. Flow-free formulas are preserved (the tree is
//! bisimilar to the network), which is exactly what makes flow
//! propositions interesting: they are not.

use super::OracleError;
use crate::network::{EdgeData, FlowNetwork, NetworkData, VertexData};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnwindDepth {
    /// Unroll every path; only finite for acyclic networks.
    Full,
    /// Unroll paths of at most this many edges, then prune branches that
    /// no longer reach a target.
    Depth(u32),
}

pub fn unwind(net: &FlowNetwork, depth: UnwindDepth) -> Result<FlowNetwork, OracleError> {
    if depth == UnwindDepth::Full && has_reachable_cycle(net) {
        return Err(OracleError::CyclicFullUnwind);
    }
    let limit = match depth {
        UnwindDepth::Full => u32::MAX,
        UnwindDepth::Depth(d) => d,
    };

    // Grow the tree of paths. Nodes carry the underlying vertex and their
    // parent; targets are never expanded (they have no outgoing edges).
    struct Node {
        vertex: usize,
        parent: Option<(usize, u64)>,
        depth: u32,
        children: Vec<usize>,
    }
    let mut nodes = vec![Node {
        vertex: net.source(),
        parent: None,
        depth: 0,
        children: Vec::new(),
    }];
    let mut frontier = vec![0usize];
    while let Some(id) = frontier.pop() {
        if nodes[id].depth >= limit {
            continue;
        }
        let v = nodes[id].vertex;
        for &e in net.out_edges(v) {
            let edge = &net.edges()[e];
            let child = nodes.len();
            nodes.push(Node {
                vertex: edge.to,
                parent: Some((id, edge.cap)),
                depth: nodes[id].depth + 1,
                children: Vec::new(),
            });
            nodes[id].children.push(child);
            frontier.push(child);
        }
    }

    // Keep only nodes from which a target node is reachable; a truncated
    // branch would otherwise violate the reaches-a-target invariant.
    let mut keep = vec![false; nodes.len()];
    fn mark(nodes: &[Node], keep: &mut [bool], net: &FlowNetwork, id: usize) -> bool {
        let mut ok = net.is_target(nodes[id].vertex);
        for &c in &nodes[id].children {
            ok |= mark(nodes, keep, net, c);
        }
        keep[id] = ok;
        ok
    }
    if !mark(&nodes, &mut keep, net, 0) {
        return Err(OracleError::UnwindDepthTooShallow);
    }

    let mut ids = vec![String::new(); nodes.len()];
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut targets = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        if !keep[i] {
            continue;
        }
        let base = net.vertex_id(node.vertex);
        ids[i] = match node.parent {
            None => base.to_string(),
            Some((p, _)) => format!("{}/{}", ids[p], base),
        };
        vertices.push(VertexData {
            id: ids[i].clone(),
            labels: net.labels(node.vertex).iter().cloned().collect(),
        });
        if let Some((p, cap)) = node.parent {
            edges.push(EdgeData { from: ids[p].clone(), to: ids[i].clone(), cap: cap as i64 });
        }
        if net.is_target(node.vertex) {
            targets.push(ids[i].clone());
        }
    }

    let data = NetworkData {
        ap: net.ap().to_vec(),
        vertices,
        source: ids[0].clone(),
        targets,
        edges,
    };
    Ok(FlowNetwork::from_data(&data).expect("unwinding preserves the network invariants"))
}

fn has_reachable_cycle(net: &FlowNetwork) -> bool {
    // Iterative three-color depth-first search from the source.
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut color = vec![Color::White; net.vertex_count()];
    let mut stack = vec![(net.source(), 0usize)];
    color[net.source()] = Color::Gray;
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        let out = net.out_edges(v);
        if *next < out.len() {
            let w = net.edges()[out[*next]].to;
            *next += 1;
            match color[w] {
                Color::Gray => return true,
                Color::White => {
                    color[w] = Color::Gray;
                    stack.push((w, 0));
                }
                Color::Black => {}
            }
        } else {
            color[v] = Color::Black;
            stack.pop();
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::maxflow::max_flow;
    use crate::semantics::{Evaluator, FlowContext};
    use crate::formula::StateFormula;

    #[test]
    fn unwinding_raises_the_diamond_max_flow() {
        let n = fixtures::net(fixtures::DIAMOND);
        let (base, f) = max_flow(&n);
        f.validate(&n).unwrap();
        assert_eq!(base, 7);
        let t = unwind(&n, UnwindDepth::Full).unwrap();
        let (lifted, g) = max_flow(&t);
        g.validate(&t).unwrap();
        assert_eq!(lifted, 8);
    }

    #[test]
    fn trees_unwind_to_themselves() {
        let n = fixtures::net(
            r#"{
                "ap": ["p"],
                "vertices": [
                    {"id": "s"}, {"id": "a", "labels": ["p"]}, {"id": "b"},
                    {"id": "t1"}, {"id": "t2"}
                ],
                "source": "s",
                "targets": ["t1", "t2"],
                "edges": [
                    {"from": "s", "to": "a", "cap": 3},
                    {"from": "s", "to": "b", "cap": 2},
                    {"from": "a", "to": "t1", "cap": 3},
                    {"from": "b", "to": "t2", "cap": 2}
                ]
            }"#,
        );
        let t = unwind(&n, UnwindDepth::Full).unwrap();
        assert_eq!(t.vertex_count(), n.vertex_count());
        assert_eq!(t.edges().len(), n.edges().len());
        assert_eq!(max_flow(&t).0, max_flow(&n).0);
    }

    #[test]
    fn cyclic_networks_require_a_depth() {
        let n = fixtures::net(
            r#"{
                "ap": [],
                "vertices": [{"id": "s"}, {"id": "a"}, {"id": "b"}, {"id": "t"}],
                "source": "s",
                "targets": ["t"],
                "edges": [
                    {"from": "s", "to": "a", "cap": 2},
                    {"from": "a", "to": "b", "cap": 2},
                    {"from": "b", "to": "a", "cap": 1},
                    {"from": "b", "to": "t", "cap": 2}
                ]
            }"#,
        );
        assert_eq!(unwind(&n, UnwindDepth::Full).unwrap_err(), OracleError::CyclicFullUnwind);
        assert_eq!(
            unwind(&n, UnwindDepth::Depth(2)).unwrap_err(),
            OracleError::UnwindDepthTooShallow
        );
        let t = unwind(&n, UnwindDepth::Depth(3)).unwrap();
        // s -> a -> b -> {t}; the b -> a continuation is pruned away.
        assert_eq!(t.vertex_count(), 4);
        let deeper = unwind(&n, UnwindDepth::Depth(5)).unwrap();
        assert!(deeper.vertex_count() > t.vertex_count());
    }

    #[test]
    fn flow_free_formulas_survive_unwinding() {
        let n = fixtures::net(fixtures::DIAMOND);
        let t = unwind(&n, UnwindDepth::Full).unwrap();
        for text in ["A X p", "E X p", "E X X p", "A F p", "E G !p", "A F !p"] {
            let f = StateFormula::parse(text).unwrap();
            let before =
                Evaluator::new(&n, FlowContext::None).eval_state(&f, n.source()).unwrap();
            let after =
                Evaluator::new(&t, FlowContext::None).eval_state(&f, t.source()).unwrap();
            assert_eq!(before, after, "{text}");
        }
    }
}
