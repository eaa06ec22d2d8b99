//! Queries with a `?` standing for an unknown assertion over the atomic
//! propositions. Solutions are enumerated as truth tables and reduced to
//! the strongest antichain: implication-minimal for positive queries,
//! implication-maximal for negative ones.

use flowck::checker::CheckOptions;
use flowck::formula::StateFormula;
use flowck::network::parse_network;
use flowck::query::{classify_prop_query, strongest_prop_solutions};

const DIAMOND: &str = r#"{
    "ap": ["p"],
    "vertices": [{"id":"s"},{"id":"u","labels":["p"]},{"id":"v"},{"id":"t"}],
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
    let opts = CheckOptions::default();

    for text in ["E (F (?))", "A (G (?))", "!(E (F (?)))"] {
        let f = StateFormula::parse(text).unwrap();
        let q = classify_prop_query(&f).unwrap();
        let solutions = strongest_prop_solutions(&net, &q, 3, &opts).unwrap();
        println!("{text}  [{:?}]", q.polarity);
        if solutions.is_empty() {
            println!("  no solution");
        }
        for s in solutions {
            println!("  {}", s.formula);
        }
    }
}
