//! Structured run reports for scripted consumers of the command line.
//!
//! Every subcommand can emit one JSON document on stdout: the command echo,
//! a payload specific to the subcommand, wall-clock timing, and any
//! warnings. The schema is versioned so downstream parsers can detect
//! incompatible changes; witness flows use the same edge-map encoding as
//! the flow module and re-load as valid flow functions.

use serde::{Deserialize, Serialize};

use crate::flow::FlowData;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    /// Subcommand and arguments as invoked.
    pub command: Vec<String>,
    pub elapsed_ms: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(flatten)]
    pub payload: Payload,
}

impl RunReport {
    pub fn new(command: Vec<String>, elapsed_ms: u64, payload: Payload) -> RunReport {
        RunReport { schema_version: SCHEMA_VERSION, command, elapsed_ms, warnings: Vec::new(), payload }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Payload {
    Validate {
        violations: Vec<String>,
    },
    Maxflow {
        value: u64,
        witness: FlowData,
    },
    Check {
        satisfied: bool,
        engine: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        witness: Option<FlowData>,
    },
    Synth {
        found: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        witness: Option<FlowData>,
    },
    QueryValue {
        #[serde(skip_serializing_if = "Option::is_none")]
        solution: Option<ValueSolutionData>,
    },
    QueryProp {
        solutions: Vec<PropSolutionData>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueSolutionData {
    pub strongest: u64,
    pub lo: u64,
    pub hi: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropSolutionData {
    pub formula: String,
    pub table: Vec<bool>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{net, DIAMOND};
    use crate::flow::FlowFunction;
    use crate::maxflow::max_flow;

    #[test]
    fn reports_round_trip_and_witnesses_reload() {
        let n = net(DIAMOND);
        let (value, flow) = max_flow(&n);
        let report = RunReport::new(
            vec!["maxflow".into(), "--network".into(), "diamond.json".into()],
            3,
            Payload::Maxflow { value, witness: flow.to_data(&n) },
        );
        let text = serde_json::to_string_pretty(&report).unwrap();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.schema_version, SCHEMA_VERSION);
        let Payload::Maxflow { value: v, witness } = &back.payload else {
            panic!("payload kind changed in the round trip");
        };
        assert_eq!(*v, 7);
        let reloaded = FlowFunction::from_data(&n, witness).unwrap();
        assert_eq!(reloaded, flow);
    }

    #[test]
    fn json_shape_is_stable() {
        let report = RunReport::new(
            vec!["check".into()],
            1,
            Payload::Check { satisfied: true, engine: "cbfl".into(), witness: None },
        );
        let v: serde_json::Value = serde_json::to_value(&report).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["result"], "check");
        assert_eq!(v["satisfied"], true);
        assert_eq!(v["engine"], "cbfl");
        assert!(v.get("witness").is_none());
        assert!(v.get("warnings").is_none());
    }
}
