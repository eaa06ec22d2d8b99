//! Extensional evaluation of closed formulas: flow quantifiers enumerate
//! every integral flow, path quantifiers enumerate explicit target paths,
//! value quantifiers scan their whole domain. No progression, no interval
//! reasoning, no duality tricks; this is the ground truth the clever
//! engines are checked against.

use std::collections::HashMap;

use super::{enumerate_flows, Budget, OracleError};
use crate::flow::{compute_cn, FlowFunction};
use crate::formula::{
    substitute, FlowQuant, PathFormula, StateFormula, SubstTarget, ValueExpr, ValueQuant,
};
use crate::network::FlowNetwork;

/// Truth of a closed formula at the source.
pub fn brute_check(
    net: &FlowNetwork,
    f: &StateFormula,
    budget: &Budget,
) -> Result<bool, OracleError> {
    brute_check_at(net, f, net.source(), budget)
}

/// Truth of a closed formula at a chosen vertex.
pub fn brute_check_at(
    net: &FlowNetwork,
    f: &StateFormula,
    v: usize,
    budget: &Budget,
) -> Result<bool, OracleError> {
    let gmax = if mentions_gmax_state(f) {
        // Independent of the augmenting-path computation on purpose: the
        // maximal flow value is read off the enumeration.
        let flows = enumerate_flows(net, budget.max_flows)?;
        Some(
            flows
                .iter()
                .map(|fl| fl.vertex_value_int(net, net.source()).expect("integral"))
                .max()
                .unwrap_or(0),
        )
    } else {
        None
    };
    let mut b = Brute { net, budget, gmax, env: HashMap::new() };
    b.state(f, v, None)
}

/// All values of the single placeholder that make the query hold, scanned
/// over the entire threshold domain `[0, sum of capacities]`.
pub fn enumerate_value_solutions(
    net: &FlowNetwork,
    query: &StateFormula,
    budget: &Budget,
) -> Result<Vec<u64>, OracleError> {
    let holes = count_value_holes(query);
    if holes == 0 {
        return Err(OracleError::Unsupported("query without a value placeholder".into()));
    }
    if holes > 1 {
        return Err(OracleError::Unsupported("query with several value placeholders".into()));
    }
    let top = net.capacity_sum();
    if top + 1 > budget.max_flows {
        return Err(OracleError::BudgetExceeded { needed: top + 1, budget: budget.max_flows });
    }
    let mut out = Vec::new();
    for gamma in 0..=top {
        let grounded = substitute(query, &SubstTarget::ValueHole(gamma))
            .expect("hole counted above");
        if brute_check(net, &grounded, budget)? {
            out.push(gamma);
        }
    }
    Ok(out)
}

struct Brute<'a> {
    net: &'a FlowNetwork,
    budget: &'a Budget,
    gmax: Option<u64>,
    env: HashMap<String, u64>,
}

impl Brute<'_> {
    fn expr(&self, e: &ValueExpr) -> Result<u64, OracleError> {
        Ok(match e {
            ValueExpr::Const(c) => *c,
            ValueExpr::Var(x) => *self
                .env
                .get(x)
                .ok_or_else(|| OracleError::Unsupported(format!("free variable {x}")))?,
            ValueExpr::GammaMax => self.gmax.expect("computed up front"),
            ValueExpr::GmaxMinus(k) => self.gmax.expect("computed up front").saturating_sub(*k),
            ValueExpr::Add(a, b) => self.expr(a)?.saturating_add(self.expr(b)?),
            ValueExpr::Mul(a, b) => self.expr(a)?.saturating_mul(self.expr(b)?),
            ValueExpr::Div(a, d) => self.expr(a)? / d,
        })
    }

    fn state(
        &mut self,
        f: &StateFormula,
        v: usize,
        flow: Option<&FlowFunction>,
    ) -> Result<bool, OracleError> {
        match f {
            StateFormula::True => Ok(true),
            StateFormula::False => Ok(false),
            StateFormula::Atom(p) => Ok(self.net.has_label(v, p)),
            StateFormula::FlowProp(rel, e) => {
                let fl = flow.ok_or_else(|| {
                    OracleError::Unsupported(format!("flow proposition {f} outside a quantifier"))
                })?;
                let threshold = self.expr(e)?;
                let val = fl.vertex_value_int(self.net, v).expect("integral");
                Ok(rel.holds_int(val, threshold))
            }
            StateFormula::Placeholder | StateFormula::ValuePlaceholder(_) => {
                Err(OracleError::Unsupported(format!("placeholder {f}")))
            }
            StateFormula::Not(a) => Ok(!self.state(a, v, flow)?),
            StateFormula::And(a, b) => Ok(self.state(a, v, flow)? && self.state(b, v, flow)?),
            StateFormula::Or(a, b) => Ok(self.state(a, v, flow)? || self.state(b, v, flow)?),
            StateFormula::Implies(a, b) => {
                Ok(!self.state(a, v, flow)? || self.state(b, v, flow)?)
            }
            StateFormula::Path(q, psi) => {
                let positive = q.is_positive();
                if positive && flow.is_none() {
                    return Err(OracleError::Unsupported(format!(
                        "positive path quantifier {f} outside a flow quantifier"
                    )));
                }
                self.path_quant(q.is_universal(), positive, psi, v, flow)
            }
            StateFormula::Flow(q, body) => {
                if q.over_reals() {
                    return Err(OracleError::Unsupported(
                        "real-valued flow quantifier".into(),
                    ));
                }
                let mut flows = enumerate_flows(self.net, self.budget.max_flows)?;
                if matches!(q, FlowQuant::AfMax | FlowQuant::EfMax) {
                    let source = self.net.source();
                    let best = flows
                        .iter()
                        .map(|fl| fl.vertex_value_int(self.net, source).expect("integral"))
                        .max()
                        .unwrap_or(0);
                    flows.retain(|fl| {
                        fl.vertex_value_int(self.net, source).expect("integral") == best
                    });
                }
                let universal = q.is_universal();
                for fl in &flows {
                    let holds = self.state(body, v, Some(fl))?;
                    if holds != universal {
                        return Ok(!universal);
                    }
                }
                Ok(universal)
            }
            StateFormula::Value(q, x, body) => {
                let universal = matches!(q, ValueQuant::Forall);
                let saved = self.env.get(x).copied();
                let top = compute_cn(self.net);
                let mut result = universal;
                for val in 0..=top {
                    self.env.insert(x.clone(), val);
                    let holds = self.state(body, v, flow);
                    let holds = match holds {
                        Ok(h) => h,
                        Err(e) => {
                            restore(&mut self.env, x, saved);
                            return Err(e);
                        }
                    };
                    if holds != universal {
                        result = !universal;
                        break;
                    }
                }
                restore(&mut self.env, x, saved);
                Ok(result)
            }
        }
    }

    /// Quantify over explicit paths. Future-only formulas range over target
    /// paths from `v`; once past operators occur, they range over
    /// source-to-target paths anchored at each visit of `v`.
    fn path_quant(
        &mut self,
        universal: bool,
        positive: bool,
        psi: &PathFormula,
        v: usize,
        flow: Option<&FlowFunction>,
    ) -> Result<bool, OracleError> {
        let bound = path_bound(self.net, psi);
        let anchored = mentions_past(psi);
        let start = if anchored { self.net.source() } else { v };
        let mut walker = Walker {
            path: vec![start],
            visited: 0,
            max_paths: self.budget.max_paths,
            bound,
        };
        let verdict = self.walk(&mut walker, universal, positive, psi, v, anchored, flow)?;
        Ok(verdict.unwrap_or(universal))
    }

    /// Depth-first enumeration; returns early once the quantifier is
    /// decided. `Ok(None)` means exhausted without a decisive path.
    #[allow(clippy::too_many_arguments)]
    fn walk(
        &mut self,
        w: &mut Walker,
        universal: bool,
        positive: bool,
        psi: &PathFormula,
        anchor: usize,
        anchored: bool,
        flow: Option<&FlowFunction>,
    ) -> Result<Option<bool>, OracleError> {
        w.visited += 1;
        if w.visited > w.max_paths {
            return Err(OracleError::BudgetExceeded {
                needed: w.visited,
                budget: w.max_paths,
            });
        }
        let here = *w.path.last().expect("nonempty");
        if self.net.is_target(here) {
            let decided = if anchored {
                let mut any = None;
                for i in 0..w.path.len() {
                    if w.path[i] != anchor {
                        continue;
                    }
                    let holds = self.path_at(psi, &w.path, i, flow)?;
                    if holds != universal {
                        any = Some(!universal);
                        break;
                    }
                }
                any
            } else {
                let holds = self.path_at(psi, &w.path, 0, flow)?;
                if holds != universal {
                    Some(!universal)
                } else {
                    None
                }
            };
            return Ok(decided);
        }
        if w.path.len() as u64 >= w.bound {
            return Ok(None);
        }
        for &e in self.net.out_edges(here) {
            if positive && !flow.expect("checked by caller").edge_positive(e) {
                continue;
            }
            w.path.push(self.net.edges()[e].to);
            let sub = self.walk(w, universal, positive, psi, anchor, anchored, flow);
            w.path.pop();
            if let Some(decided) = sub? {
                return Ok(Some(decided));
            }
        }
        Ok(None)
    }

    /// Truth of a path formula at position `i` of a concrete path, by the
    /// book: `X` demands a next position, `U`/`S` scan forward/backward.
    fn path_at(
        &mut self,
        psi: &PathFormula,
        path: &[usize],
        i: usize,
        flow: Option<&FlowFunction>,
    ) -> Result<bool, OracleError> {
        match psi {
            PathFormula::State(s) => self.state(s, path[i], flow),
            PathFormula::Not(a) => Ok(!self.path_at(a, path, i, flow)?),
            PathFormula::And(a, b) => {
                Ok(self.path_at(a, path, i, flow)? && self.path_at(b, path, i, flow)?)
            }
            PathFormula::Or(a, b) => {
                Ok(self.path_at(a, path, i, flow)? || self.path_at(b, path, i, flow)?)
            }
            PathFormula::Implies(a, b) => {
                Ok(!self.path_at(a, path, i, flow)? || self.path_at(b, path, i, flow)?)
            }
            PathFormula::Next(a) => {
                Ok(i + 1 < path.len() && self.path_at(a, path, i + 1, flow)?)
            }
            PathFormula::Finally(a) => {
                for j in i..path.len() {
                    if self.path_at(a, path, j, flow)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            PathFormula::Globally(a) => {
                for j in i..path.len() {
                    if !self.path_at(a, path, j, flow)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            PathFormula::Until(a, b) => {
                for j in i..path.len() {
                    if self.path_at(b, path, j, flow)? {
                        return Ok(true);
                    }
                    if !self.path_at(a, path, j, flow)? {
                        return Ok(false);
                    }
                }
                Ok(false)
            }
            PathFormula::Yesterday(a) => Ok(i > 0 && self.path_at(a, path, i - 1, flow)?),
            PathFormula::Since(a, b) => {
                for j in (0..=i).rev() {
                    if self.path_at(b, path, j, flow)? {
                        return Ok(true);
                    }
                    if !self.path_at(a, path, j, flow)? {
                        return Ok(false);
                    }
                }
                Ok(false)
            }
        }
    }
}

struct Walker {
    path: Vec<usize>,
    visited: u64,
    max_paths: u64,
    bound: u64,
}

fn restore(env: &mut HashMap<String, u64>, x: &str, saved: Option<u64>) {
    match saved {
        Some(old) => {
            env.insert(x.to_string(), old);
        }
        None => {
            env.remove(x);
        }
    }
}

/// Completeness bound for path search: a satisfying path longer than
/// (vertex count) x 2^(formula closure) revisits a product state and can be
/// shortened, so enumeration may stop there.
fn path_bound(net: &FlowNetwork, psi: &PathFormula) -> u64 {
    let closure = closure_size(psi).min(40);
    (net.vertex_count() as u64).saturating_mul(1u64 << closure)
}

fn closure_size(psi: &PathFormula) -> u32 {
    match psi {
        PathFormula::State(_) => 1,
        PathFormula::Not(a)
        | PathFormula::Next(a)
        | PathFormula::Finally(a)
        | PathFormula::Globally(a)
        | PathFormula::Yesterday(a) => 1 + closure_size(a),
        PathFormula::And(a, b)
        | PathFormula::Or(a, b)
        | PathFormula::Implies(a, b)
        | PathFormula::Until(a, b)
        | PathFormula::Since(a, b) => 1 + closure_size(a) + closure_size(b),
    }
}

fn mentions_past(psi: &PathFormula) -> bool {
    match psi {
        PathFormula::State(_) => false,
        PathFormula::Yesterday(_) | PathFormula::Since(..) => true,
        PathFormula::Not(a)
        | PathFormula::Next(a)
        | PathFormula::Finally(a)
        | PathFormula::Globally(a) => mentions_past(a),
        PathFormula::And(a, b) | PathFormula::Or(a, b) | PathFormula::Implies(a, b)
        | PathFormula::Until(a, b) => mentions_past(a) || mentions_past(b),
    }
}

fn mentions_gmax_expr(e: &ValueExpr) -> bool {
    match e {
        ValueExpr::GammaMax | ValueExpr::GmaxMinus(_) => true,
        ValueExpr::Add(a, b) | ValueExpr::Mul(a, b) => {
            mentions_gmax_expr(a) || mentions_gmax_expr(b)
        }
        ValueExpr::Div(a, _) => mentions_gmax_expr(a),
        ValueExpr::Const(_) | ValueExpr::Var(_) => false,
    }
}

fn mentions_gmax_state(f: &StateFormula) -> bool {
    match f {
        StateFormula::FlowProp(_, e) => mentions_gmax_expr(e),
        StateFormula::Not(a) | StateFormula::Flow(_, a) | StateFormula::Value(_, _, a) => {
            mentions_gmax_state(a)
        }
        StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
            mentions_gmax_state(a) || mentions_gmax_state(b)
        }
        StateFormula::Path(_, p) => mentions_gmax_path(p),
        _ => false,
    }
}

fn mentions_gmax_path(p: &PathFormula) -> bool {
    match p {
        PathFormula::State(s) => mentions_gmax_state(s),
        PathFormula::Not(a)
        | PathFormula::Next(a)
        | PathFormula::Finally(a)
        | PathFormula::Globally(a)
        | PathFormula::Yesterday(a) => mentions_gmax_path(a),
        PathFormula::And(a, b)
        | PathFormula::Or(a, b)
        | PathFormula::Implies(a, b)
        | PathFormula::Until(a, b)
        | PathFormula::Since(a, b) => mentions_gmax_path(a) || mentions_gmax_path(b),
    }
}

fn count_value_holes(f: &StateFormula) -> usize {
    fn state(f: &StateFormula) -> usize {
        match f {
            StateFormula::ValuePlaceholder(_) => 1,
            StateFormula::Not(a) | StateFormula::Flow(_, a) | StateFormula::Value(_, _, a) => {
                state(a)
            }
            StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
                state(a) + state(b)
            }
            StateFormula::Path(_, p) => path(p),
            _ => 0,
        }
    }
    fn path(p: &PathFormula) -> usize {
        match p {
            PathFormula::State(s) => state(s),
            PathFormula::Not(a)
            | PathFormula::Next(a)
            | PathFormula::Finally(a)
            | PathFormula::Globally(a)
            | PathFormula::Yesterday(a) => path(a),
            PathFormula::And(a, b)
            | PathFormula::Or(a, b)
            | PathFormula::Implies(a, b)
            | PathFormula::Until(a, b)
            | PathFormula::Since(a, b) => path(a) + path(b),
        }
    }
    state(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn check(net: &FlowNetwork, text: &str) -> bool {
        let f = StateFormula::parse(text).unwrap();
        brute_check(net, &f, &Budget::default()).unwrap()
    }

    #[test]
    fn separation_network_has_no_integral_split() {
        let n = fixtures::net(fixtures::SEPARATION);
        assert!(!check(&n, "Ef (= 1 & A X > 0)"));
        assert!(check(&n, "Ef (= 1 & E X > 0)"));
        assert!(check(&n, "Ef (= 1)"));
    }

    #[test]
    fn diamond_flow_quantifiers() {
        let n = fixtures::net(fixtures::DIAMOND);
        assert!(check(&n, "Ef >= 7"));
        assert!(!check(&n, "Ef >= 8"));
        assert!(check(&n, "Af <= 7"));
        assert!(check(&n, "EfMax = 7"));
        assert!(check(&n, "AfMax = 7"));
        assert!(check(&n, "EfMax (= gmax)"));
        assert!(check(&n, "AfMax (>= gmax - 100)"));
        assert!(!check(&n, "Ef > gmax"));
    }

    #[test]
    fn value_quantifiers_scan_the_domain() {
        let n = fixtures::net(fixtures::PIPE9);
        assert!(check(&n, "forall x. (Ef >= x -> Ef = x)"));
        assert!(check(&n, "exists x. (Ef = x & !(Ef = x + 1))"));
        assert!(!check(&n, "forall x. Ef >= x"));
        assert!(check(&n, "exists x. (Ef = x * 3 & Ef = x + 6)"));
        assert!(check(&n, "forall x. Ef = x div 2"));
    }

    #[test]
    fn positive_quantifiers_see_only_flowing_edges() {
        let n = fixtures::net(fixtures::DIAMOND);
        assert!(check(&n, "Ef (= 0 & A+ X false)"));
        assert!(!check(&n, "Ef (= 0 & E+ X true)"));
        assert!(check(&n, "Ef (= 7 & E+ X p)"));
        assert!(check(&n, "Ef (> 0 & A+ G (p -> > 0))"));
    }

    #[test]
    fn past_operators_use_anchored_paths() {
        let n = fixtures::net(fixtures::DIAMOND);
        let f = StateFormula::parse("E Y p").unwrap();
        let t = n.vertex_index("t").unwrap();
        let u = n.vertex_index("u").unwrap();
        assert!(brute_check_at(&n, &f, t, &Budget::default()).unwrap());
        assert!(!brute_check_at(&n, &f, u, &Budget::default()).unwrap());
        let g = StateFormula::parse("A (true S p)").unwrap();
        assert!(!brute_check_at(&n, &g, t, &Budget::default()).unwrap());
        assert!(brute_check_at(&n, &g, u, &Budget::default()).unwrap());
    }

    #[test]
    fn agrees_with_progression_on_formula_families() {
        use crate::semantics::{Evaluator, FlowContext};
        let n = fixtures::net(fixtures::DIAMOND);
        let texts = [
            "A X p",
            "E X X p",
            "A F !p",
            "E (!p U p)",
            "E G !p",
            "A (p U !p)",
            "E (X p & X X !p)",
            "E Y true",
            "A Y (true S p)",
            "E (true S p)",
        ];
        for text in texts {
            let f = StateFormula::parse(text).unwrap();
            for v in 0..n.vertex_count() {
                let fast = Evaluator::new(&n, FlowContext::None).eval_state(&f, v).unwrap();
                let slow = brute_check_at(&n, &f, v, &Budget::default()).unwrap();
                assert_eq!(fast, slow, "{text} at {}", n.vertex_id(v));
            }
        }
    }

    #[test]
    fn value_solution_scan_matches_the_nonconvex_example() {
        let n = fixtures::net(fixtures::PIPE9);
        let q = StateFormula::parse("Ef ((= ?) & ((>= 2 & <= 4) | (>= 6 & <= 9)))").unwrap();
        let sols = enumerate_value_solutions(&n, &q, &Budget::default()).unwrap();
        assert_eq!(sols, vec![2, 3, 4, 6, 7, 8, 9]);
        let lower = StateFormula::parse("Ef >= ?").unwrap();
        let sols = enumerate_value_solutions(&n, &lower, &Budget::default()).unwrap();
        assert_eq!(sols, (0..=9).collect::<Vec<_>>());
        let none = StateFormula::parse("Ef (= ? & = 1 & = 2)").unwrap();
        assert!(enumerate_value_solutions(&n, &none, &Budget::default()).unwrap().is_empty());
        let no_hole = StateFormula::parse("Ef >= 2").unwrap();
        assert!(matches!(
            enumerate_value_solutions(&n, &no_hole, &Budget::default()),
            Err(OracleError::Unsupported(_))
        ));
    }

    #[test]
    fn cyclic_networks_are_searched_up_to_the_bound() {
        let n = fixtures::net(
            r#"{
                "ap": ["p"],
                "vertices": [
                    {"id": "s"}, {"id": "a", "labels": ["p"]}, {"id": "b"}, {"id": "t"}
                ],
                "source": "s",
                "targets": ["t"],
                "edges": [
                    {"from": "s", "to": "a", "cap": 2},
                    {"from": "a", "to": "b", "cap": 2},
                    {"from": "b", "to": "a", "cap": 1},
                    {"from": "b", "to": "t", "cap": 2}
                ]
            }"#,
        );
        assert!(check(&n, "E X X X p"));
        assert!(!check(&n, "E X X X X p"));
        assert!(check(&n, "A F p"));
        let tight = Budget { max_flows: 200_000, max_paths: 2 };
        let f = StateFormula::parse("A G (p | !p)").unwrap();
        assert!(matches!(
            brute_check(&n, &f, &tight),
            Err(OracleError::BudgetExceeded { .. })
        ));
    }
}
