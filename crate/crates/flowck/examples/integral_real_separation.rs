//! Integral and real-valued flow quantifiers disagree: one unit of integral
//! flow over two parallel unit routes cannot be positive on both, but half a
//! unit on each can.

use flowck::checker::{check_with, verify_witness, CheckOptions};
use flowck::formula::StateFormula;
use flowck::network::parse_network;

const TWO_ROUTES: &str = r#"{
    "ap": [],
    "vertices": [{"id":"s"},{"id":"u"},{"id":"v"},{"id":"t"}],
    "source": "s",
    "targets": ["t"],
    "edges": [
        {"from":"s","to":"u","cap":1},
        {"from":"s","to":"v","cap":1},
        {"from":"u","to":"t","cap":1},
        {"from":"v","to":"t","cap":1}
    ]
}"#;

fn main() {
    let net = parse_network(TWO_ROUTES).expect("example network is valid");
    let opts = CheckOptions::default();

    let integral = StateFormula::parse("Ef (= 1 & A X (> 0))").unwrap();
    let verdict = check_with(&net, &integral, &opts).unwrap();
    println!("{integral}  ->  {}", if verdict.satisfied { "satisfied" } else { "unsatisfied" });

    let real = StateFormula::parse("EfR (= 1 & A X (> 0))").unwrap();
    let verdict = check_with(&net, &real, &opts).unwrap();
    println!("{real}  ->  {}", if verdict.satisfied { "satisfied" } else { "unsatisfied" });

    let witness = verdict.witness.expect("a real-valued split witnesses the formula");
    println!("witness over the rationals:");
    for (e, val) in net.edges().iter().zip(witness.to_data(&net).edges) {
        let _ = e;
        println!("  {} -> {}: {}", val.from, val.to, val.flow);
    }
    assert!(verify_witness(&net, &real, &witness).unwrap());
    println!("witness replays against the formula");
}
