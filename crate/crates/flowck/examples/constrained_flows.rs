//! Flows with per-vertex through-flow requirements. Integral ranges go
//! through a node-split bounded-flow reduction; real ranges with strict
//! bounds go through exact rational feasibility.

use flowck::lp::{real_vertex_constrained_flow, VertexRange};
use flowck::maxflow::{vertex_constrained_flow, IntRange};
use flowck::network::parse_network;

const DIAMOND: &str = r#"{
    "ap": [],
    "vertices": [{"id":"s"},{"id":"u"},{"id":"v"},{"id":"t"}],
    "source": "s",
    "targets": ["t"],
    "edges": [
        {"from":"s","to":"u","cap":4},
        {"from":"s","to":"v","cap":4},
        {"from":"v","to":"u","cap":4},
        {"from":"u","to":"t","cap":4},
        {"from":"v","to":"t","cap":3}
    ]
}"#;

fn main() {
    let net = parse_network(DIAMOND).expect("example network is valid");
    let idx = |id: &str| net.vertex_index(id).unwrap();

    // Demand 4 units through u while limiting v to at most 2.
    let mut ranges = vec![IntRange::unconstrained(); net.vertex_count()];
    ranges[idx("u")] = IntRange { lo: 4, hi: None };
    ranges[idx("v")] = IntRange { lo: 0, hi: Some(2) };
    match vertex_constrained_flow(&net, &ranges).feasible() {
        Some(flow) => {
            println!("f(u) >= 4 and f(v) <= 2 is feasible:");
            for e in flow.to_data(&net).edges {
                println!("  {} -> {}: {}", e.from, e.to, e.flow);
            }
        }
        None => println!("f(u) >= 4 and f(v) <= 2 is infeasible"),
    }

    // Impossible integrally: u's outgoing capacity is 4.
    ranges[idx("u")] = IntRange { lo: 5, hi: None };
    println!(
        "f(u) >= 5 and f(v) <= 2 is {}",
        if vertex_constrained_flow(&net, &ranges).is_feasible() { "feasible" } else { "infeasible" }
    );

    // Strict bounds need the rational route: 0 < f(u) < 1 has no integral
    // solution at all, but 1/2 works over the rationals.
    let mut real_ranges = vec![VertexRange::unconstrained(); net.vertex_count()];
    real_ranges[idx("u")] =
        VertexRange { lo: 0, lo_strict: true, hi: Some(1), hi_strict: true };
    let flow = real_vertex_constrained_flow(&net, &real_ranges)
        .expect("system stays within the solver's budget")
        .feasible()
        .expect("a fractional value through u exists");
    println!("0 < f(u) < 1 over the rationals:");
    for e in flow.to_data(&net).edges {
        println!("  {} -> {}: {}", e.from, e.to, e.flow);
    }
}
