//! The conjunctive engine never enumerates flows: it compiles the body into
//! per-vertex admissible through-flow ranges and asks one bounded-flow
//! feasibility question per candidate vertex.

use flowck::cbfl::{check_cbfl, extract_constraints};
use flowck::formula::{normalize_cbfl, CbflBool, CbflLeaf, StateFormula};
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
    let f = StateFormula::parse("Ef (= 7 & A X (>= 3))").unwrap();

    let CbflBool::Leaf(CbflLeaf::Exists(body)) = normalize_cbfl(&f).unwrap() else {
        unreachable!("an existential flow formula normalizes to one body");
    };
    println!("{f} compiles to per-vertex ranges at the source:");
    let sheet = extract_constraints(&net, net.source(), &body)
        .unwrap()
        .expect("no conjunct is refuted outright");
    for (v, ranges) in sheet.allowed.iter().enumerate() {
        let rendered: Vec<String> = ranges
            .iter()
            .map(|r| {
                let lo = if r.lo_strict { format!("> {}", r.lo) } else { format!(">= {}", r.lo) };
                match r.hi {
                    Some(h) if r.hi_strict => format!("{lo} and < {h}"),
                    Some(h) => format!("{lo} and <= {h}"),
                    None => lo,
                }
            })
            .collect();
        println!("  f({}) {}", net.vertex_id(v), rendered.join(" or "));
    }

    let run = check_cbfl(&net, &f, 1 << 14).unwrap();
    println!(
        "verdict at the source: {}",
        if run.set.contains(net.source()) { "satisfied" } else { "unsatisfied" }
    );
    if let Some(w) = run.witness {
        println!("one admissible flow:");
        for e in w.to_data(&net).edges {
            println!("  {} -> {}: {}", e.from, e.to, e.flow);
        }
    }
}
