//! The same verdict along three routes: the general labeling engine, the
//! polynomial engine for conjunctive formulas, and brute-force enumeration.

use std::time::Instant;

use flowck::checker::{check_with, CheckOptions, Engine};
use flowck::formula::StateFormula;
use flowck::network::parse_network;

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
    let formulas = [
        "Ef (= 7 & A X (>= 4))",
        "Ef (= 7 & A X (>= 5))",
        "EfMax (E X (p & > 3))",
        "exists x. (Ef (= x + 3) & Af (<= x + 7))",
    ];
    for text in formulas {
        let f = StateFormula::parse(text).unwrap();
        println!("{f}");
        for engine in [Engine::General, Engine::Cbfl, Engine::Oracle] {
            let opts = CheckOptions { engine, ..CheckOptions::default() };
            let start = Instant::now();
            match check_with(&net, &f, &opts) {
                Ok(v) => println!(
                    "  {:<8} {} in {:?}",
                    engine.to_string(),
                    if v.satisfied { "satisfied  " } else { "unsatisfied" },
                    start.elapsed()
                ),
                Err(e) => println!("  {:<8} refused: {e}", engine.to_string()),
            }
        }
    }
}
