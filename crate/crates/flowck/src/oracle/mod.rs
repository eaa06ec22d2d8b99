//! Brute-force reference implementations. Everything here is written for
//! transparency over speed: exhaustive enumeration with explicit budgets, so
//! the clever algorithms elsewhere in the crate can be cross-checked against
//! an independent route on desk-scale instances.

mod brute;
pub mod cnf;
mod unwind;

pub use brute::{brute_check, brute_check_at, enumerate_value_solutions};
pub use unwind::{unwind, UnwindDepth};

use crate::flow::FlowFunction;
use crate::network::FlowNetwork;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration budget exceeded: needs about {needed}, budget {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("CNF balancing needs at least two variables")]
    TooFewVariables,
    #[error("CNF is not balanced: {0}")]
    NotBalanced(String),
    #[error("CNF clauses must be nonempty")]
    EmptyClause,
    #[error("full unwinding of a cyclic network")]
    CyclicFullUnwind,
    #[error("depth-bounded unwinding reaches no target")]
    UnwindDepthTooShallow,
    #[error("brute evaluation does not cover {0}")]
    Unsupported(String),
}

/// Enumeration budgets for the brute-force evaluators.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub max_flows: u64,
    pub max_paths: u64,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { max_flows: 200_000, max_paths: 200_000 }
    }
}

/// All integral flow functions of the network, in lexicographic order of
/// edge values. The search space is the product of `cap + 1` over all edges;
/// if that exceeds the budget the call refuses up front.
pub fn enumerate_flows(net: &FlowNetwork, max_flows: u64) -> Result<Vec<FlowFunction>, OracleError> {
    let mut space: u64 = 1;
    for e in net.edges() {
        space = space.saturating_mul(e.cap + 1);
    }
    if space > max_flows {
        return Err(OracleError::BudgetExceeded { needed: space, budget: max_flows });
    }

    let n = net.vertex_count();
    let m = net.edges().len();
    // Remaining unassigned capacity into and out of each vertex; used to
    // prune partial assignments that can no longer balance.
    let mut rem_in = vec![0u64; n];
    let mut rem_out = vec![0u64; n];
    for e in net.edges() {
        rem_in[e.to] += e.cap;
        rem_out[e.from] += e.cap;
    }
    let mut got_in = vec![0u64; n];
    let mut got_out = vec![0u64; n];
    let mut vals = vec![0u64; m];
    let mut out = Vec::new();

    fn balanced_possible(
        net: &FlowNetwork,
        v: usize,
        got_in: &[u64],
        got_out: &[u64],
        rem_in: &[u64],
        rem_out: &[u64],
    ) -> bool {
        if v == net.source() || net.is_target(v) {
            return true;
        }
        got_in[v] <= got_out[v] + rem_out[v] && got_out[v] <= got_in[v] + rem_in[v]
    }

    #[allow(clippy::too_many_arguments)]
    fn go(
        net: &FlowNetwork,
        e: usize,
        vals: &mut Vec<u64>,
        got_in: &mut Vec<u64>,
        got_out: &mut Vec<u64>,
        rem_in: &mut Vec<u64>,
        rem_out: &mut Vec<u64>,
        out: &mut Vec<FlowFunction>,
    ) {
        if e == net.edges().len() {
            out.push(
                FlowFunction::integral(net, vals.clone()).expect("pruning keeps flows valid"),
            );
            return;
        }
        let edge = net.edges()[e].clone();
        rem_out[edge.from] -= edge.cap;
        rem_in[edge.to] -= edge.cap;
        for f in 0..=edge.cap {
            vals[e] = f;
            got_out[edge.from] += f;
            got_in[edge.to] += f;
            if balanced_possible(net, edge.from, got_in, got_out, rem_in, rem_out)
                && balanced_possible(net, edge.to, got_in, got_out, rem_in, rem_out)
            {
                go(net, e + 1, vals, got_in, got_out, rem_in, rem_out, out);
            }
            got_out[edge.from] -= f;
            got_in[edge.to] -= f;
        }
        vals[e] = 0;
        rem_out[edge.from] += edge.cap;
        rem_in[edge.to] += edge.cap;
    }

    go(net, 0, &mut vals, &mut got_in, &mut got_out, &mut rem_in, &mut rem_out, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;

    #[test]
    fn enumerates_exactly_the_conserved_assignments() {
        let net = parse_network(
            r#"{"ap":[],"vertices":[{"id":"s"},{"id":"u"},{"id":"t"}],
            "source":"s","targets":["t"],
            "edges":[{"from":"s","to":"u","cap":2},{"from":"u","to":"t","cap":1}]}"#,
        )
        .unwrap();
        let flows = enumerate_flows(&net, 1000).unwrap();
        // Independent count: filter the raw product by the flow invariants.
        let mut expect = 0;
        for a in 0..=2u64 {
            for b in 0..=1u64 {
                if FlowFunction::integral(&net, vec![a, b]).is_ok() {
                    expect += 1;
                }
            }
        }
        assert_eq!(flows.len(), expect);
        assert_eq!(expect, 2); // f = 0 and f = 1 through the chain
    }

    #[test]
    fn refuses_oversized_spaces() {
        let net = parse_network(
            r#"{"ap":[],"vertices":[{"id":"s"},{"id":"t"}],
            "source":"s","targets":["t"],
            "edges":[{"from":"s","to":"t","cap":99}]}"#,
        )
        .unwrap();
        assert_eq!(
            enumerate_flows(&net, 10).unwrap_err(),
            OracleError::BudgetExceeded { needed: 100, budget: 10 }
        );
    }

    #[test]
    fn diamond_flow_count_matches_raw_filter() {
        let net = parse_network(crate::fixtures::DIAMOND).unwrap();
        let flows = enumerate_flows(&net, 100_000).unwrap();
        let caps: Vec<u64> = net.edges().iter().map(|e| e.cap).collect();
        let mut expect = 0;
        let mut idx = vec![0u64; caps.len()];
        loop {
            if FlowFunction::integral(&net, idx.clone()).is_ok() {
                expect += 1;
            }
            let mut i = 0;
            loop {
                if i == caps.len() {
                    assert_eq!(flows.len(), expect);
                    return;
                }
                idx[i] += 1;
                if idx[i] <= caps[i] {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }
}
