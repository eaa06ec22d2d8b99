//! Queries with a threshold hole: the solution set of a legal query is a
//! one-sided interval, so binary search finds the strongest solution in
//! logarithmically many checks. Equality holes break the interval shape and
//! only the brute-force enumerator accepts them.

use flowck::checker::CheckOptions;
use flowck::formula::StateFormula;
use flowck::network::parse_network;
use flowck::oracle::{enumerate_value_solutions, Budget};
use flowck::query::{classify_value_query, strongest_value_solution};

const PIPE5: &str = r#"{
    "ap": [],
    "vertices": [{"id":"s"},{"id":"t"}],
    "source": "s",
    "targets": ["t"],
    "edges": [{"from":"s","to":"t","cap":5}]
}"#;

const PIPE9: &str = r#"{
    "ap": [],
    "vertices": [{"id":"s"},{"id":"t"}],
    "source": "s",
    "targets": ["t"],
    "edges": [{"from":"s","to":"t","cap":9}]
}"#;

fn main() {
    let net = parse_network(PIPE5).expect("example network is valid");
    let opts = CheckOptions::default();

    for text in ["Ef (>= ?)", "Af (<= ?)", "Ef (!(>= ?))"] {
        let f = StateFormula::parse(text).unwrap();
        let q = classify_value_query(&f).unwrap();
        print!("{text}  [{:?}, {:?}]  ->  ", q.polarity, q.class);
        match strongest_value_solution(&net, &q, &opts).unwrap() {
            Some(s) => println!("strongest {} (solutions {}..={})", s.strongest, s.lo, s.hi),
            None => println!("no solution"),
        }
    }

    // `= ?` can carve holes into the solution set; here the satisfying
    // thresholds on a capacity-9 pipe skip 5 entirely.
    let net = parse_network(PIPE9).expect("example network is valid");
    let f = StateFormula::parse("Ef ((= ?) & ((>= 2 & <= 4) | (>= 6 & <= 9)))").unwrap();
    assert!(classify_value_query(&f).is_err());
    let scan = enumerate_value_solutions(&net, &f, &Budget::default()).unwrap();
    println!("{f}");
    println!("  enumerated solutions {scan:?} (not an interval)");
}
