//! Shared networks for unit tests.

use crate::network::{parse_network, FlowNetwork};

/// Diamond with an inner cross edge: max flow 7, full unwinding max flow 8.
pub const DIAMOND: &str = r#"{
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

/// Two parallel unit-capacity routes. One unit of flow cannot be positive on
/// both, but half a unit on each can.
pub const SEPARATION: &str = r#"{
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

/// Source with two successors behind capacities 4 and 5+6; lets formulas
/// about flow 10 splitting across successors be exercised.
pub const TWO_SUCCESSORS: &str = r#"{
    "ap": [],
    "vertices": [{"id":"s"},{"id":"u"},{"id":"v"},{"id":"t"}],
    "source": "s",
    "targets": ["t"],
    "edges": [
        {"from":"s","to":"u","cap":4},
        {"from":"s","to":"v","cap":6},
        {"from":"u","to":"t","cap":4},
        {"from":"v","to":"t","cap":6}
    ]
}"#;

/// Single edge of capacity 9.
pub const PIPE9: &str = r#"{
    "ap": [],
    "vertices": [{"id":"s"},{"id":"t"}],
    "source": "s",
    "targets": ["t"],
    "edges": [{"from":"s","to":"t","cap":9}]
}"#;

pub fn net(text: &str) -> FlowNetwork {
    parse_network(text).expect("fixture network is valid")
}
