//! Synthesis returns a flow, not just a verdict, and the flow decodes back
//! into a solution of the modeled problem. Here: two workers, two jobs,
//! every worker must end up on exactly one job.

use flowck::checker::{synthesize, verify_witness};
use flowck::formula::StateFormula;
use flowck::network::parse_network;

/// One unit of flow per worker; each job accepts one worker. A worker's
/// unit must leave along a single job edge, so a flow is an assignment.
const WORKERS_JOBS: &str = r#"{
    "ap": ["a", "b"],
    "vertices": [
        {"id":"s"},
        {"id":"w1"},
        {"id":"w2"},
        {"id":"ja","labels":["a"]},
        {"id":"jb","labels":["b"]}
    ],
    "source": "s",
    "targets": ["ja", "jb"],
    "edges": [
        {"from":"s","to":"w1","cap":1},
        {"from":"s","to":"w2","cap":1},
        {"from":"w1","to":"ja","cap":1},
        {"from":"w1","to":"jb","cap":1},
        {"from":"w2","to":"ja","cap":1},
        {"from":"w2","to":"jb","cap":1}
    ]
}"#;

fn main() {
    let net = parse_network(WORKERS_JOBS).expect("example network is valid");
    // Two units leave the source, and from every busy worker, every
    // positive-flow continuation reaches job a, or every one reaches job b.
    let f = StateFormula::parse("Ef (= 2 & A X ((A+ (X a)) | (A+ (X b))))").unwrap();

    let flow = synthesize(&net, &f).unwrap().expect("both workers can be assigned");
    assert!(verify_witness(&net, &f, &flow).unwrap());

    println!("{f}");
    println!("synthesized flow:");
    for e in flow.to_data(&net).edges {
        println!("  {} -> {}: {}", e.from, e.to, e.flow);
    }

    for worker in ["w1", "w2"] {
        let w = net.vertex_index(worker).unwrap();
        let job = net
            .out_edges(w)
            .iter()
            .find(|&&ei| flow.edge_positive(ei))
            .map(|&ei| net.vertex_id(net.edges()[ei].to))
            .expect("busy worker routes its unit somewhere");
        println!("{worker} takes {job}");
    }
}
