//! Maximum flow is not invariant under unwinding a network into a tree of
//! paths: duplicating a vertex relaxes its through-flow bottleneck. The
//! diamond below moves 7 units, but its full unwinding moves 8.

use flowck::maxflow::max_flow;
use flowck::network::parse_network;
use flowck::oracle::{unwind, UnwindDepth};

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
    let (value, witness) = max_flow(&net);
    witness.validate(&net).expect("max flow witness is a valid flow");
    println!("diamond: {} vertices, max flow {value}", net.vertex_count());

    let tree = unwind(&net, UnwindDepth::Full).expect("acyclic network unwinds fully");
    let (tree_value, tree_witness) = max_flow(&tree);
    tree_witness.validate(&tree).expect("unwound witness is a valid flow");
    println!("full unwinding: {} vertices, max flow {tree_value}", tree.vertex_count());

    assert_eq!((value, tree_value), (7, 8));
    println!("the u-copy on the s->v->u->t branch no longer shares u's bottleneck");
}
