//! Flow functions over a network: one value per edge, within capacity, with
//! conservation at every internal vertex. Integral flows carry `u64` values;
//! rational flows carry exact `BigRational` values.

use std::cmp::Ordering;

use num::{BigRational, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::network::FlowNetwork;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowValues {
    Int(Vec<u64>),
    Rat(Vec<BigRational>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowFunction {
    values: FlowValues,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("flow has {got} edge values, network has {want} edges")]
    WrongLength { got: usize, want: usize },
    #[error("flow on edge ({0},{1}) exceeds capacity")]
    OverCapacity(String, String),
    #[error("negative flow on edge ({0},{1})")]
    Negative(String, String),
    #[error("conservation violated at {0}")]
    NotConserved(String),
    #[error("unknown edge ({0},{1})")]
    UnknownEdge(String, String),
    #[error("bad flow value {0:?}")]
    BadValue(String),
}

impl FlowFunction {
    pub fn integral(net: &FlowNetwork, values: Vec<u64>) -> Result<FlowFunction, FlowError> {
        let f = FlowFunction { values: FlowValues::Int(values) };
        f.validate(net)?;
        Ok(f)
    }

    pub fn rational(net: &FlowNetwork, values: Vec<BigRational>) -> Result<FlowFunction, FlowError> {
        let f = FlowFunction { values: FlowValues::Rat(values) };
        f.validate(net)?;
        Ok(f)
    }

    pub fn zero(net: &FlowNetwork) -> FlowFunction {
        FlowFunction { values: FlowValues::Int(vec![0; net.edges().len()]) }
    }

    pub fn is_integral(&self) -> bool {
        matches!(self.values, FlowValues::Int(_))
    }

    pub fn values(&self) -> &FlowValues {
        &self.values
    }

    pub fn edge_int(&self, e: usize) -> Option<u64> {
        match &self.values {
            FlowValues::Int(v) => Some(v[e]),
            FlowValues::Rat(_) => None,
        }
    }

    pub fn edge_rat(&self, e: usize) -> BigRational {
        match &self.values {
            FlowValues::Int(v) => BigRational::from_integer(v[e].into()),
            FlowValues::Rat(v) => v[e].clone(),
        }
    }

    pub fn edge_positive(&self, e: usize) -> bool {
        match &self.values {
            FlowValues::Int(v) => v[e] > 0,
            FlowValues::Rat(v) => v[e].is_positive(),
        }
    }

    /// Through-flow at a vertex: outflow at the source, inflow elsewhere.
    /// Self-loop flow appears in both sums and cancels out of neither.
    pub fn vertex_value(&self, net: &FlowNetwork, v: usize) -> BigRational {
        let edges = if v == net.source() { net.out_edges(v) } else { net.in_edges(v) };
        edges.iter().map(|&e| self.edge_rat(e)).sum()
    }

    pub fn vertex_value_int(&self, net: &FlowNetwork, v: usize) -> Option<u64> {
        match &self.values {
            FlowValues::Int(vals) => {
                let edges = if v == net.source() { net.out_edges(v) } else { net.in_edges(v) };
                Some(edges.iter().map(|&e| vals[e]).sum())
            }
            FlowValues::Rat(_) => None,
        }
    }

    pub fn cmp_vertex(&self, net: &FlowNetwork, v: usize, gamma: u64) -> Ordering {
        match &self.values {
            FlowValues::Int(_) => self.vertex_value_int(net, v).unwrap().cmp(&gamma),
            FlowValues::Rat(_) => self
                .vertex_value(net, v)
                .cmp(&BigRational::from_integer(gamma.into())),
        }
    }

    pub fn validate(&self, net: &FlowNetwork) -> Result<(), FlowError> {
        let m = net.edges().len();
        let got = match &self.values {
            FlowValues::Int(v) => v.len(),
            FlowValues::Rat(v) => v.len(),
        };
        if got != m {
            return Err(FlowError::WrongLength { got, want: m });
        }
        let edge_name = |e: usize| {
            let ed = &net.edges()[e];
            (net.vertex_id(ed.from).to_string(), net.vertex_id(ed.to).to_string())
        };
        for e in 0..m {
            let val = self.edge_rat(e);
            if val.is_negative() {
                let (a, b) = edge_name(e);
                return Err(FlowError::Negative(a, b));
            }
            if val > BigRational::from_integer(net.edges()[e].cap.into()) {
                let (a, b) = edge_name(e);
                return Err(FlowError::OverCapacity(a, b));
            }
        }
        for v in 0..net.vertex_count() {
            if v == net.source() || net.is_target(v) {
                continue;
            }
            let inflow: BigRational = net.in_edges(v).iter().map(|&e| self.edge_rat(e)).sum();
            let outflow: BigRational = net.out_edges(v).iter().map(|&e| self.edge_rat(e)).sum();
            if inflow != outflow {
                return Err(FlowError::NotConserved(net.vertex_id(v).to_string()));
            }
        }
        Ok(())
    }

    pub fn to_data(&self, net: &FlowNetwork) -> FlowData {
        let kind = if self.is_integral() { "integral" } else { "rational" };
        FlowData {
            kind: kind.to_string(),
            edges: net
                .edges()
                .iter()
                .enumerate()
                .map(|(i, e)| FlowEdgeData {
                    from: net.vertex_id(e.from).to_string(),
                    to: net.vertex_id(e.to).to_string(),
                    flow: match &self.values {
                        FlowValues::Int(v) => v[i].to_string(),
                        FlowValues::Rat(v) => v[i].to_string(),
                    },
                })
                .collect(),
        }
    }

    pub fn from_data(net: &FlowNetwork, data: &FlowData) -> Result<FlowFunction, FlowError> {
        let mut by_edge = vec![None; net.edges().len()];
        for fe in &data.edges {
            let from = net
                .vertex_index(&fe.from)
                .ok_or_else(|| FlowError::UnknownEdge(fe.from.clone(), fe.to.clone()))?;
            let to = net
                .vertex_index(&fe.to)
                .ok_or_else(|| FlowError::UnknownEdge(fe.from.clone(), fe.to.clone()))?;
            let e = net
                .edge_index(from, to)
                .ok_or_else(|| FlowError::UnknownEdge(fe.from.clone(), fe.to.clone()))?;
            by_edge[e] = Some(fe.flow.clone());
        }
        if data.kind == "integral" {
            let mut vals = Vec::with_capacity(by_edge.len());
            for v in by_edge {
                let text = v.unwrap_or_else(|| "0".to_string());
                vals.push(text.parse::<u64>().map_err(|_| FlowError::BadValue(text))?);
            }
            FlowFunction::integral(net, vals)
        } else {
            let mut vals = Vec::with_capacity(by_edge.len());
            for v in by_edge {
                let text = v.unwrap_or_else(|| "0".to_string());
                vals.push(text.parse::<BigRational>().map_err(|_| FlowError::BadValue(text))?);
            }
            FlowFunction::rational(net, vals)
        }
    }
}

/// JSON form of a flow function; values are decimal strings ("3", "1/2") so
/// rationals survive the round trip exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowData {
    pub kind: String,
    pub edges: Vec<FlowEdgeData>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowEdgeData {
    pub from: String,
    pub to: String,
    pub flow: String,
}

/// `1 + sum of capacities`: every flow value at every vertex is strictly
/// below it, so value quantifier enumeration over `0..=C_N` is exhaustive.
pub fn compute_cn(net: &FlowNetwork) -> u64 {
    1 + net.capacity_sum()
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn rat_u(n: u64) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn is_zero(r: &BigRational) -> bool {
    r.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;

    fn chain() -> FlowNetwork {
        parse_network(
            r#"{"ap":[],"vertices":[{"id":"s"},{"id":"u"},{"id":"t"}],
            "source":"s","targets":["t"],
            "edges":[{"from":"s","to":"u","cap":3},{"from":"u","to":"t","cap":2}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn conservation_is_enforced() {
        let net = chain();
        assert!(FlowFunction::integral(&net, vec![2, 2]).is_ok());
        assert_eq!(
            FlowFunction::integral(&net, vec![3, 2]).unwrap_err(),
            FlowError::NotConserved("u".into())
        );
        assert_eq!(
            FlowFunction::integral(&net, vec![3, 3]).unwrap_err(),
            FlowError::OverCapacity("u".into(), "t".into())
        );
    }

    #[test]
    fn vertex_values_count_self_loops_on_both_sides() {
        let net = parse_network(
            r#"{"ap":[],"vertices":[{"id":"s"},{"id":"u"},{"id":"t"}],
            "source":"s","targets":["t"],
            "edges":[{"from":"s","to":"u","cap":1},{"from":"u","to":"u","cap":2},{"from":"u","to":"t","cap":1}]}"#,
        )
        .unwrap();
        let f = FlowFunction::integral(&net, vec![1, 2, 1]).unwrap();
        let u = net.vertex_index("u").unwrap();
        assert_eq!(f.vertex_value_int(&net, u), Some(3));
        assert_eq!(f.vertex_value_int(&net, net.source()), Some(1));
    }

    #[test]
    fn rational_flows_validate_and_round_trip() {
        let net = chain();
        let f = FlowFunction::rational(&net, vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let data = f.to_data(&net);
        assert_eq!(data.edges[0].flow, "1/2");
        let back = FlowFunction::from_data(&net, &data).unwrap();
        assert_eq!(back, f);
        let text = serde_json::to_string(&data).unwrap();
        let parsed: FlowData = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, data);
    }

    #[test]
    fn cn_is_one_plus_capacity_sum() {
        assert_eq!(compute_cn(&chain()), 6);
        let net = parse_network(
            r#"{"ap":[],"vertices":[{"id":"s"},{"id":"t"}],
            "source":"s","targets":["t"],
            "edges":[{"from":"s","to":"t","cap":0}]}"#,
        )
        .unwrap();
        assert_eq!(compute_cn(&net), 1);
    }
}
