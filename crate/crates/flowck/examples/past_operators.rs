//! Past operators look backward along the run: with `Y` (yesterday) and `S`
//! (since) in the formula, path quantifiers range over source-to-target
//! paths anchored at the evaluation vertex instead of suffixes.

use flowck::checker::{check_with, CheckOptions, Engine};
use flowck::formula::StateFormula;
use flowck::network::parse_network;
use flowck::oracle::{brute_check, Budget};

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
    let cases = [
        // Every checkpoint visit has a past position moving more than 3
        // units; the source itself provides it when the flow is large.
        ("Ef (= 7 & A (G (p -> (true S (> 3)))))", "past holds via the source"),
        ("Ef (= 2 & A (G (p -> (true S (> 3)))))", "2 units never exceed 3 anywhere"),
        // Positions right after the checkpoint still carry at least 4.
        ("Ef (= 7 & A (G ((Y p) -> (>= 4))))", "all 7 units pass the sink edge"),
        ("Ef (= 7 & A (G ((Y p) -> (>= 8))))", "nothing carries 8"),
    ];
    for (text, why) in cases {
        let f = StateFormula::parse(text).unwrap();
        let opts = CheckOptions { engine: Engine::General, ..CheckOptions::default() };
        let verdict = check_with(&net, &f, &opts).unwrap();
        let brute = brute_check(&net, &f, &Budget::default()).unwrap();
        assert_eq!(verdict.satisfied, brute, "engine and enumeration agree");
        println!(
            "{text}\n  -> {} ({why})",
            if verdict.satisfied { "satisfied" } else { "unsatisfied" }
        );
    }
}
