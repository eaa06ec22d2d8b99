//! Constraint-propagation engine for the conjunctive fragment.
//!
//! A normalized flow-quantified body is a conjunction of parts, each pinning
//! the vertices at one reachability layer (or from one layer onward) to a
//! requirement on their through-flow. Evaluating the body at a vertex
//! therefore reduces to intersecting per-vertex admissible ranges and asking
//! for one network-wide flow meeting all of them, which is a maximum-flow
//! question, not a search over flows. Requirements that are single
//! comparisons keep everything polynomial; set-valued requirements
//! (disjunctions of comparisons, negated equalities) make the admissible set
//! a union of ranges, and the engine branches over the choices, exponential
//! only in the number of multi-range vertices.

use num::BigRational;

use crate::checker::CheckError;
use crate::flow::{rat_u, ratio, FlowFunction};
use crate::formula::{
    normalize_cbfl, CbflAtom, CbflBody, CbflBool, CbflConjunct, CbflLeaf, CbflProp, Rel,
    StateFormula, SubstError, SubstTarget,
};
use crate::lp::{real_vertex_constrained_flow, VertexRange};
use crate::maxflow::{max_flow, vertex_constrained_flow, IntRange};
use crate::network::{reachability_layers, FlowNetwork, VertexSet};
use crate::semantics::rel_holds;

/// Outcome of a conjunctive-engine run: the satisfying vertex set, plus a
/// flow relevant to the verdict at the source when one exists (a satisfying
/// flow for a top-level existential, a counterexample for a failed
/// top-level universal).
#[derive(Debug)]
pub struct CbflRun {
    pub set: VertexSet,
    pub witness: Option<FlowFunction>,
}

/// Per-vertex admissible through-flow ranges for one quantified body at one
/// evaluation vertex, with observables already resolved. Each vertex holds a
/// disjoint ascending list; strictness is kept until integerization so the
/// real-flow variant loses nothing.
#[derive(Debug, Clone)]
pub struct ConstraintSheet {
    pub allowed: Vec<Vec<VertexRange>>,
}

/// Evaluate a formula with the conjunctive engine. `gmax` is folded to the
/// network's maximum flow value first; normalization failures surface the
/// offending subformula.
pub fn check_cbfl(
    net: &FlowNetwork,
    f: &StateFormula,
    max_branches: u64,
) -> Result<CbflRun, CheckError> {
    let folded = match crate::formula::substitute(f, &SubstTarget::Gmax(max_flow(net).0)) {
        Ok(g) => g,
        Err(SubstError::Unbound(_)) => f.clone(),
    };
    let nf =
        normalize_cbfl(&folded).map_err(|e| CheckError::NotConjunctive(e.to_string()))?;
    let mut engine = Engine { net, max_branches, gamma_max: None };
    match &nf {
        CbflBool::Leaf(CbflLeaf::Exists(body)) => {
            let (set, mut wit) = engine.eval_exists(body)?;
            let witness = wit[net.source()].take();
            Ok(CbflRun { set, witness })
        }
        CbflBool::Not(inner) => {
            if let CbflBool::Leaf(CbflLeaf::Exists(body)) = inner.as_ref() {
                let (dual, mut wit) = engine.eval_exists(body)?;
                let witness = wit[net.source()].take();
                Ok(CbflRun { set: dual.complement(), witness })
            } else {
                let set = engine.eval(&nf)?;
                Ok(CbflRun { set, witness: None })
            }
        }
        _ => {
            let set = engine.eval(&nf)?;
            Ok(CbflRun { set, witness: None })
        }
    }
}

/// The admissible ranges a body induces when evaluated at `v`, or `None`
/// when the body is refuted outright (a strong next step meets a path that
/// already ended, or some constrained vertex admits no value).
pub fn extract_constraints(
    net: &FlowNetwork,
    v: usize,
    body: &CbflBody,
) -> Result<Option<ConstraintSheet>, CheckError> {
    let mut engine = Engine { net, max_branches: 1, gamma_max: None };
    let atoms = body
        .conjuncts
        .iter()
        .map(|c| engine.compile_atom(&c.atom))
        .collect::<Result<Vec<_>, _>>()?;
    engine.sheet_at(v, &body.conjuncts, &atoms)
}

/// Atom with observables resolved to vertex sets and thresholds to
/// constants, ready for repeated per-vertex evaluation.
enum CAtom {
    Flow(Rel, u64),
    Truth(VertexSet),
    Not(Box<CAtom>),
    And(Box<CAtom>, Box<CAtom>),
    Or(Box<CAtom>, Box<CAtom>),
}

struct Engine<'a> {
    net: &'a FlowNetwork,
    max_branches: u64,
    gamma_max: Option<u64>,
}

impl<'a> Engine<'a> {
    fn eval(&mut self, b: &CbflBool) -> Result<VertexSet, CheckError> {
        match b {
            CbflBool::Leaf(l) => self.eval_leaf(l),
            CbflBool::Not(a) => Ok(self.eval(a)?.complement()),
            CbflBool::And(a, b) => Ok(self.eval(a)?.intersect(&self.eval(b)?)),
            CbflBool::Or(a, b) => Ok(self.eval(a)?.union(&self.eval(b)?)),
        }
    }

    fn eval_leaf(&mut self, l: &CbflLeaf) -> Result<VertexSet, CheckError> {
        let n = self.net.vertex_count();
        match l {
            CbflLeaf::Const(false) => Ok(VertexSet::empty(n)),
            CbflLeaf::Const(true) => Ok(VertexSet::empty(n).complement()),
            CbflLeaf::Atom(p) => {
                let mut set = VertexSet::empty(n);
                for v in 0..n {
                    if self.net.has_label(v, p) {
                        set.insert(v);
                    }
                }
                Ok(set)
            }
            CbflLeaf::FlowProp(rel, e) => Err(CheckError::NotClosed(format!(
                "flow proposition `{rel} {e}` lies outside any flow quantifier"
            ))),
            CbflLeaf::Exists(body) => Ok(self.eval_exists(body)?.0),
            CbflLeaf::Paths(cs) => self.eval_paths(cs),
        }
    }

    /// Flow-free universal chains: the layer machinery without ranges.
    fn eval_paths(&mut self, cs: &[CbflConjunct]) -> Result<VertexSet, CheckError> {
        let atoms = cs
            .iter()
            .map(|c| self.compile_atom(&c.atom))
            .collect::<Result<Vec<_>, _>>()?;
        for atom in &atoms {
            if mentions_flow(atom) {
                return Err(CheckError::NotClosed(
                    "flow proposition under a path quantifier outside any flow quantifier"
                        .into(),
                ));
            }
        }
        let n = self.net.vertex_count();
        let zero = rat_u(0);
        let mut set = VertexSet::empty(n);
        'vertex: for v in 0..n {
            for (c, atom) in cs.iter().zip(&atoms) {
                if self.strong_refuted(v, &c.nexts) {
                    continue 'vertex;
                }
                let info = reachability_layers(self.net, v, c.nexts.len());
                let at = if c.globally { info.at_least_k } else { info.exactly_k };
                for u in at.iter() {
                    if !atom_truth(atom, u, &zero) {
                        continue 'vertex;
                    }
                }
            }
            set.insert(v);
        }
        Ok(set)
    }

    /// The quantified case: per evaluation vertex, extract the constraint
    /// sheet and ask for one admissible flow.
    fn eval_exists(
        &mut self,
        body: &CbflBody,
    ) -> Result<(VertexSet, Vec<Option<FlowFunction>>), CheckError> {
        let n = self.net.vertex_count();
        let atoms = body
            .conjuncts
            .iter()
            .map(|c| self.compile_atom(&c.atom))
            .collect::<Result<Vec<_>, _>>()?;
        let mut set = VertexSet::empty(n);
        let mut witnesses: Vec<Option<FlowFunction>> = vec![None; n];
        for (v, slot) in witnesses.iter_mut().enumerate() {
            let Some(sheet) = self.sheet_at(v, &body.conjuncts, &atoms)? else {
                continue;
            };
            if let Some(flow) = self.admissible_flow(sheet, body)? {
                set.insert(v);
                *slot = Some(flow);
            }
        }
        Ok((set, witnesses))
    }

    fn sheet_at(
        &mut self,
        v: usize,
        conjuncts: &[CbflConjunct],
        atoms: &[CAtom],
    ) -> Result<Option<ConstraintSheet>, CheckError> {
        let n = self.net.vertex_count();
        let cap = self.net.capacity_sum();
        // Which atoms constrain each vertex, by conjunct index.
        let mut on_vertex: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (idx, c) in conjuncts.iter().enumerate() {
            if self.strong_refuted(v, &c.nexts) {
                return Ok(None);
            }
            let info = reachability_layers(self.net, v, c.nexts.len());
            let at = if c.globally { info.at_least_k } else { info.exactly_k };
            for u in at.iter() {
                on_vertex[u].push(idx);
            }
        }
        let mut allowed = Vec::with_capacity(n);
        for (u, idxs) in on_vertex.iter().enumerate() {
            if idxs.is_empty() {
                allowed.push(vec![VertexRange::unconstrained()]);
                continue;
            }
            let mut ts: Vec<u64> = Vec::new();
            for &i in idxs {
                atom_thresholds(&atoms[i], &mut ts);
            }
            ts.retain(|&g| g <= cap);
            ts.sort_unstable();
            ts.dedup();
            let mut ranges = Vec::new();
            for (cell, rep) in cells(&ts, cap) {
                if idxs.iter().all(|&i| atom_truth(&atoms[i], u, &rep)) {
                    merge_push(&mut ranges, cell);
                }
            }
            if ranges.is_empty() {
                return Ok(None);
            }
            allowed.push(ranges);
        }
        Ok(Some(ConstraintSheet { allowed }))
    }

    /// One flow of the body's kind meeting every range, or `None`. Branches
    /// over the per-vertex range choices; single-range vertices cost
    /// nothing.
    fn admissible_flow(
        &mut self,
        sheet: ConstraintSheet,
        body: &CbflBody,
    ) -> Result<Option<FlowFunction>, CheckError> {
        let mut allowed = sheet.allowed;
        if body.quant.binds_gmax() {
            let gm = self.gamma_max();
            let s = self.net.source();
            allowed[s] = allowed[s]
                .iter()
                .map(|r| {
                    let mut r = *r;
                    r.tighten_lo(gm, false);
                    r.tighten_hi(gm, false);
                    r
                })
                .filter(|r| !r.is_empty_real())
                .collect();
            if allowed[s].is_empty() {
                return Ok(None);
            }
        }
        let real = body.quant.over_reals();
        let int_allowed: Vec<Vec<IntRange>> = if real {
            Vec::new()
        } else {
            let mut out = Vec::with_capacity(allowed.len());
            for ranges in &allowed {
                let ints: Vec<IntRange> =
                    ranges.iter().filter_map(|r| r.integerize()).collect();
                if ints.is_empty() {
                    return Ok(None);
                }
                out.push(ints);
            }
            out
        };
        let lens: Vec<usize> = if real {
            allowed.iter().map(|r| r.len()).collect()
        } else {
            int_allowed.iter().map(|r| r.len()).collect()
        };
        let branches = lens.iter().fold(1u64, |acc, &l| acc.saturating_mul(l as u64));
        if branches > self.max_branches {
            return Err(CheckError::Budget { needed: branches, budget: self.max_branches });
        }
        let mut pick = vec![0usize; lens.len()];
        loop {
            let found = if real {
                let ranges: Vec<VertexRange> =
                    pick.iter().enumerate().map(|(u, &i)| allowed[u][i]).collect();
                real_vertex_constrained_flow(self.net, &ranges)?.feasible()
            } else {
                let ranges: Vec<IntRange> =
                    pick.iter().enumerate().map(|(u, &i)| int_allowed[u][i]).collect();
                vertex_constrained_flow(self.net, &ranges).feasible()
            };
            if found.is_some() {
                return Ok(found);
            }
            // Advance the mixed-radix choice vector.
            let mut u = 0;
            loop {
                if u == lens.len() {
                    return Ok(None);
                }
                pick[u] += 1;
                if pick[u] < lens[u] {
                    break;
                }
                pick[u] = 0;
                u += 1;
            }
        }
    }

    /// Whether a strong step in the prefix meets a path that has already
    /// ended: a target lies at a strong position's depth.
    fn strong_refuted(&self, v: usize, nexts: &[bool]) -> bool {
        nexts.iter().enumerate().any(|(i, &strong)| {
            strong
                && reachability_layers(self.net, v, i)
                    .exactly_k
                    .iter()
                    .any(|u| self.net.is_target(u))
        })
    }

    fn compile_atom(&mut self, a: &CbflAtom) -> Result<CAtom, CheckError> {
        Ok(match a {
            CbflAtom::Flow(rel, e) => {
                let g = e.fold().const_value().ok_or_else(|| {
                    CheckError::NonConstantThreshold(format!("{rel} {e}"))
                })?;
                CAtom::Flow(*rel, g)
            }
            CbflAtom::Bool(p) => CAtom::Truth(self.prop_set(p)?),
            CbflAtom::Not(x) => CAtom::Not(Box::new(self.compile_atom(x)?)),
            CbflAtom::And(x, y) => {
                CAtom::And(Box::new(self.compile_atom(x)?), Box::new(self.compile_atom(y)?))
            }
            CbflAtom::Or(x, y) => {
                CAtom::Or(Box::new(self.compile_atom(x)?), Box::new(self.compile_atom(y)?))
            }
        })
    }

    /// Observable truth as a vertex set; nested normal forms recurse into
    /// the engine one hierarchy level down.
    fn prop_set(&mut self, p: &CbflProp) -> Result<VertexSet, CheckError> {
        let n = self.net.vertex_count();
        match p {
            CbflProp::Const(false) => Ok(VertexSet::empty(n)),
            CbflProp::Const(true) => Ok(VertexSet::empty(n).complement()),
            CbflProp::Atom(a) => {
                let mut set = VertexSet::empty(n);
                for v in 0..n {
                    if self.net.has_label(v, a) {
                        set.insert(v);
                    }
                }
                Ok(set)
            }
            CbflProp::Nested(b) => self.eval(b),
            CbflProp::Not(a) => Ok(self.prop_set(a)?.complement()),
            CbflProp::And(a, b) => Ok(self.prop_set(a)?.intersect(&self.prop_set(b)?)),
            CbflProp::Or(a, b) => Ok(self.prop_set(a)?.union(&self.prop_set(b)?)),
        }
    }

    fn gamma_max(&mut self) -> u64 {
        *self.gamma_max.get_or_insert_with(|| max_flow(self.net).0)
    }
}

fn mentions_flow(c: &CAtom) -> bool {
    match c {
        CAtom::Flow(..) => true,
        CAtom::Truth(_) => false,
        CAtom::Not(a) => mentions_flow(a),
        CAtom::And(a, b) | CAtom::Or(a, b) => mentions_flow(a) || mentions_flow(b),
    }
}

fn atom_thresholds(c: &CAtom, out: &mut Vec<u64>) {
    match c {
        CAtom::Flow(_, g) => out.push(*g),
        CAtom::Truth(_) => {}
        CAtom::Not(a) => atom_thresholds(a, out),
        CAtom::And(a, b) | CAtom::Or(a, b) => {
            atom_thresholds(a, out);
            atom_thresholds(b, out);
        }
    }
}

fn atom_truth(c: &CAtom, u: usize, val: &BigRational) -> bool {
    match c {
        CAtom::Flow(rel, g) => rel_holds(*rel, val.cmp(&rat_u(*g))),
        CAtom::Truth(set) => set.contains(u),
        CAtom::Not(a) => !atom_truth(a, u, val),
        CAtom::And(a, b) => atom_truth(a, u, val) && atom_truth(b, u, val),
        CAtom::Or(a, b) => atom_truth(a, u, val) || atom_truth(b, u, val),
    }
}

/// Partition of `[0, cap]` induced by the thresholds: a point per threshold
/// and the open stretches between, each with a representative on which every
/// involved comparison is constant.
pub(crate) fn cells(ts: &[u64], cap: u64) -> Vec<(VertexRange, BigRational)> {
    let mut out = Vec::new();
    let mut prev: Option<u64> = None;
    for &g in ts {
        match prev {
            None if g > 0 => out.push((
                VertexRange { lo: 0, lo_strict: false, hi: Some(g), hi_strict: true },
                ratio(g as i64, 2),
            )),
            Some(p) if g > p => out.push((
                VertexRange { lo: p, lo_strict: true, hi: Some(g), hi_strict: true },
                ratio((p + g) as i64, 2),
            )),
            _ => {}
        }
        out.push((VertexRange::exactly(g), rat_u(g)));
        prev = Some(g);
    }
    match prev {
        None => out.push((
            VertexRange { lo: 0, lo_strict: false, hi: Some(cap), hi_strict: false },
            rat_u(0),
        )),
        Some(p) if p < cap => out.push((
            VertexRange { lo: p, lo_strict: true, hi: Some(cap), hi_strict: false },
            ratio((p + cap) as i64, 2),
        )),
        _ => {}
    }
    out
}

/// Append a kept cell, fusing it with the previous one when they share an
/// endpoint that at least one side includes.
pub(crate) fn merge_push(out: &mut Vec<VertexRange>, r: VertexRange) {
    if let Some(last) = out.last_mut() {
        if last.hi == Some(r.lo) && !(last.hi_strict && r.lo_strict) {
            last.hi = r.hi;
            last.hi_strict = r.hi_strict;
            return;
        }
    }
    out.push(r);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{net, DIAMOND, SEPARATION};
    use crate::oracle::cnf::{balance_cnf, cnf_to_network, decode_assignment, CnfFormula};
    use crate::oracle::{brute_check, brute_check_at, Budget};

    fn f(text: &str) -> StateFormula {
        StateFormula::parse(text).expect("test formula parses")
    }

    fn agree(net_text: &str, formula: &str) -> bool {
        let n = net(net_text);
        let got = check_cbfl(&n, &f(formula), 1 << 12).unwrap().set.contains(n.source());
        let want = brute_check(&n, &f(formula), &Budget::default()).unwrap();
        assert_eq!(got, want, "range propagation and oracle disagree on {formula}");
        got
    }

    #[test]
    fn layer_constraints_match_the_oracle() {
        assert!(agree(DIAMOND, "Ef (= 7 & A X (>= 3))"));
        assert!(agree(DIAMOND, "Ef (= 7 & A X (>= 4))"));
        assert!(!agree(DIAMOND, "Ef (= 7 & A X (>= 5))"));
        assert!(agree(DIAMOND, "Ef (A (G (> 0)))"));
        assert!(!agree(DIAMOND, "Ef (= 0 & A (G (> 0)))"));
    }

    #[test]
    fn set_valued_atoms_branch_over_range_unions() {
        assert!(agree(SEPARATION, "Ef ((= 0 | = 2) & A X (<= 1))"));
        assert!(agree(SEPARATION, "Ef (!(= 1) & > 0)"));
        assert!(!agree(SEPARATION, "Ef (!(= 0) & !(= 1) & !(= 2))"));
    }

    #[test]
    fn strong_next_fails_at_targets_and_weak_next_survives() {
        let n = net(DIAMOND);
        let t = n.vertex_index("t").unwrap();
        let strong = f("Ef (A X (>= 0))");
        let weak = f("Ef (A (!(X (!(>= 0)))))");
        let strong_run = check_cbfl(&n, &strong, 1 << 12).unwrap();
        let weak_run = check_cbfl(&n, &weak, 1 << 12).unwrap();
        assert!(!strong_run.set.contains(t));
        assert!(weak_run.set.contains(t));
        assert!(!brute_check_at(&n, &strong, t, &Budget::default()).unwrap());
        assert!(brute_check_at(&n, &weak, t, &Budget::default()).unwrap());
    }

    #[test]
    fn maximal_flow_quantifiers_pin_the_source() {
        assert!(agree(DIAMOND, "EfMax (A X (>= 3))"));
        assert!(!agree(DIAMOND, "EfMax (= 6)"));
        assert!(agree(DIAMOND, "EfMax (= 7)"));
    }

    #[test]
    fn nested_quantifiers_become_observables() {
        assert!(agree(DIAMOND, "Ef (= 7 & A X (Ef (= 0)))"));
        assert!(!agree(DIAMOND, "Ef (= 7 & A X (Af (= 0)))"));
    }

    #[test]
    fn universal_roots_yield_counterexamples() {
        let n = net(DIAMOND);
        let run = check_cbfl(&n, &f("Af (>= 1)"), 1 << 12).unwrap();
        assert!(!run.set.contains(n.source()));
        let counter = run.witness.expect("counterexample flow");
        assert!(counter.validate(&n).is_ok());
        assert!(counter.vertex_value(&n, n.source()) < rat_u(1));
    }

    #[test]
    fn constraint_sheets_expose_the_per_vertex_ranges() {
        let n = net(DIAMOND);
        let nf = normalize_cbfl(&f("Ef (= 7 & A X (>= 3))")).unwrap();
        let CbflBool::Leaf(CbflLeaf::Exists(body)) = nf else {
            panic!("worked example normalizes to a single existential");
        };
        let sheet = extract_constraints(&n, n.source(), &body)
            .unwrap()
            .expect("source admits constraints");
        let s = n.source();
        let u = n.vertex_index("u").unwrap();
        let v = n.vertex_index("v").unwrap();
        let t = n.vertex_index("t").unwrap();
        assert_eq!(sheet.allowed[s], vec![VertexRange::exactly(7)]);
        let geq3 = VertexRange { lo: 3, lo_strict: false, hi: Some(19), hi_strict: false };
        assert_eq!(sheet.allowed[u], vec![geq3]);
        assert_eq!(sheet.allowed[v], vec![geq3]);
        assert_eq!(sheet.allowed[t], vec![VertexRange::unconstrained()]);
    }

    #[test]
    fn branch_budget_is_honest() {
        let n = net(SEPARATION);
        let err =
            check_cbfl(&n, &f("Ef ((= 0 | = 2) & A X (= 0 | = 1))"), 1).unwrap_err();
        assert!(matches!(err, CheckError::Budget { .. }));
    }

    #[test]
    fn propositional_reductions_route_through_range_propagation() {
        let sat = CnfFormula::new(2, vec![vec![1, 2], vec![-1, -2]]).unwrap();
        let unsat = CnfFormula::new(2, vec![vec![1], vec![-1]]).unwrap();
        for (cnf, expect) in [(sat, true), (unsat, false)] {
            let balanced = balance_cnf(&cnf).unwrap();
            let (rnet, rf) = cnf_to_network(&balanced).unwrap();
            let run = check_cbfl(&rnet, &rf, 1 << 14).unwrap();
            assert_eq!(run.set.contains(rnet.source()), expect);
            assert_eq!(cnf.brute_sat().is_some(), expect);
            if expect {
                let flow = run.witness.expect("satisfying flow");
                let assignment =
                    decode_assignment(&balanced, &rnet, &flow).expect("assignment decodes");
                assert!(balanced.eval(&assignment));
                assert!(cnf.eval(&assignment));
            }
        }
    }
}
