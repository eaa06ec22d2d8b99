//! Verdicts, witnesses, and the engines that produce them.
//!
//! Three routes answer the same question on their common domain. The
//! general engine labels every quantified subformula with its satisfying
//! vertex set: it partitions `[0, capacity-sum]` into the cells induced by
//! the body's thresholds, enumerates cell assignments to vertices with
//! feasibility pruning, and evaluates the residual formula on cell
//! representatives. The conjunctive engine (`cbfl` module) skips the
//! enumeration by propagating one range constraint per vertex. The oracle
//! enumerates integral flows outright. `check` routes automatically,
//! `check_with` obeys the caller, and disagreement between routes is a bug
//! by construction, which the test suites exploit.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use num::BigRational;
use thiserror::Error;

use crate::cbfl::{cells, check_cbfl, merge_push};
use crate::flow::{compute_cn, rat_u, FlowFunction};
use crate::formula::{
    classify_formula, rewrite_positive_quantifiers, substitute, uses_div, FlowQuant, PathFormula,
    Rel, StateFormula, SubstError, SubstTarget, ValueQuant,
};
use crate::lp::{real_vertex_constrained_flow, LpError, VertexRange};
use crate::maxflow::{max_flow, vertex_constrained_flow};
use crate::network::{refine_for_positive_paths, FlowNetwork, VertexSet};
use crate::oracle::{brute_check, Budget, OracleError};
use crate::semantics::{rel_holds, EvalError, Evaluator, FlowContext};

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("formula is not closed: {0}")]
    NotClosed(String),
    #[error("search needs at least {needed} steps but the budget is {budget}; raise the limit or simplify the formula")]
    Budget { needed: u64, budget: u64 },
    #[error("formula is outside the conjunctive fragment: {0}")]
    NotConjunctive(String),
    #[error("threshold does not fold to a constant: {0}")]
    NonConstantThreshold(String),
    #[error("unsupported nesting: {0}")]
    UnsupportedNesting(String),
    #[error("synthesis needs a top-level existential flow quantifier over a singly-quantified body, got: {0}")]
    NotExistentialBfl1(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("internal invariant broke: {0}")]
    Internal(String),
}

/// Which engine answers a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Conjunctive engine when the formula normalizes into that fragment,
    /// the general engine otherwise.
    Auto,
    /// Threshold-cell labeling for the full logic.
    General,
    /// Per-vertex range propagation for the conjunctive fragment.
    Cbfl,
    /// Exhaustive integral-flow enumeration.
    Oracle,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Auto => "auto",
            Engine::General => "general",
            Engine::Cbfl => "cbfl",
            Engine::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub engine: Engine,
    /// Assignment-tree nodes the general engine may visit per flow
    /// quantifier, and the cap on value-quantifier expansion leaves.
    pub max_assignments: u64,
    /// Range combinations a single realizability check may try when interval
    /// unions force branching.
    pub max_branches: u64,
    /// Enumeration limits for the oracle engine.
    pub budget: Budget,
    /// Upper end of value-quantifier enumeration. Defaults to one past the
    /// capacity sum, which bounds every through-flow strictly.
    pub value_domain: Option<u64>,
}

impl Default for CheckOptions {
    fn default() -> CheckOptions {
        CheckOptions {
            engine: Engine::Auto,
            max_assignments: 2_000_000,
            max_branches: 1 << 14,
            budget: Budget::default(),
            value_domain: None,
        }
    }
}

/// Note attached to a verdict: engine choice, applied rewrites, caveats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
}

fn note(code: &str, message: impl Into<String>) -> Diagnostic {
    Diagnostic { code: code.to_string(), message: message.into() }
}

/// Outcome of a check. The witness, when present, lives on the network the
/// caller passed in: a satisfying flow for a top-level existential flow
/// quantifier, or a counterexample flow for a refuted universal one.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub satisfied: bool,
    pub witness: Option<FlowFunction>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn check(net: &FlowNetwork, f: &StateFormula) -> Result<Verdict, CheckError> {
    check_with(net, f, &CheckOptions::default())
}

pub fn check_with(
    net: &FlowNetwork,
    f: &StateFormula,
    opts: &CheckOptions,
) -> Result<Verdict, CheckError> {
    let tag = classify_formula(f);
    if !tag.is_closed {
        return Err(CheckError::NotClosed(f.to_string()));
    }
    let mut diagnostics = Vec::new();
    if uses_div(f) && mentions_value_quant(f) {
        diagnostics.push(note(
            "div-range",
            "value quantifiers enumerate up to one past the capacity sum; `div` in a threshold \
             is not monotone enough to justify that bound, so treat the verdict as relative to it",
        ));
    }
    let engine = match opts.engine {
        Engine::Auto => {
            if tag.cbfl_level.is_some() {
                Engine::Cbfl
            } else {
                Engine::General
            }
        }
        chosen => chosen,
    };
    match engine {
        Engine::Oracle => {
            diagnostics.push(note("engine", "oracle: exhaustive integral enumeration"));
            let satisfied = brute_check(net, f, &opts.budget)?;
            Ok(Verdict { satisfied, witness: None, diagnostics })
        }
        Engine::Cbfl => {
            diagnostics.push(note("engine", "conjunctive range propagation"));
            let run = check_cbfl(net, f, opts.max_branches)?;
            Ok(Verdict {
                satisfied: run.set.contains(net.source()),
                witness: run.witness,
                diagnostics,
            })
        }
        Engine::General | Engine::Auto => general_check(net, f, opts, diagnostics),
    }
}

fn general_check(
    net: &FlowNetwork,
    f: &StateFormula,
    opts: &CheckOptions,
    mut diagnostics: Vec<Diagnostic>,
) -> Result<Verdict, CheckError> {
    diagnostics.push(note("engine", "general threshold-cell labeling"));
    let folded = fold_gmax(net, f);
    let refined_net;
    let halves;
    let net_used: &FlowNetwork;
    let formula;
    if mentions_positive(&folded) {
        let (r, prop, h) = refine_for_positive_paths(net);
        formula = rewrite_positive_quantifiers(&folded, &prop);
        refined_net = r;
        net_used = &refined_net;
        halves = Some(h);
        diagnostics.push(note(
            "positive-rewrite",
            "positive path quantifiers evaluated on the edge-subdivided network",
        ));
    } else {
        formula = folded;
        net_used = net;
        halves = None;
    }
    let gen = General::new(net_used, opts);
    let set = gen.eval_set(&formula)?;
    let satisfied = set.contains(net_used.source());
    let raw_witness = match &formula {
        StateFormula::Flow(q, _) if !q.is_universal() && satisfied => {
            gen.quantified(&formula)?.1.get(&net_used.source()).cloned()
        }
        StateFormula::Flow(q, body) if q.is_universal() && !satisfied => {
            let dual = StateFormula::Flow(q.dual(), Box::new(body.as_ref().clone().negated()));
            gen.quantified(&dual)?.1.get(&net_used.source()).cloned()
        }
        _ => None,
    };
    let witness = match (raw_witness, &halves) {
        (Some(w), Some(h)) => Some(project_flow(net, &w, h)?),
        (w, _) => w,
    };
    Ok(Verdict { satisfied, witness, diagnostics })
}

/// Satisfying vertex set of one flow quantifier, with a witness flow per
/// satisfied vertex. `gmax` in the body is folded against the network first;
/// positive path quantifiers inside must already be rewritten away.
pub fn eval_flow_quantifier(
    net: &FlowNetwork,
    quant: FlowQuant,
    body: &StateFormula,
    opts: &CheckOptions,
) -> Result<(VertexSet, HashMap<usize, FlowFunction>), CheckError> {
    let folded = fold_gmax(net, body);
    let gen = General::new(net, opts);
    gen.flow_quantifier(quant, &folded)
}

/// Satisfying vertex set of one value quantifier over the enumeration
/// domain `0..=value_domain` (defaulting to one past the capacity sum).
pub fn eval_value_quantifier(
    net: &FlowNetwork,
    quant: ValueQuant,
    var: &str,
    body: &StateFormula,
    opts: &CheckOptions,
) -> Result<VertexSet, CheckError> {
    let folded = fold_gmax(net, body);
    let gen = General::new(net, opts);
    gen.value_quantifier(quant, var, &folded)
}

pub fn synthesize(net: &FlowNetwork, f: &StateFormula) -> Result<Option<FlowFunction>, CheckError> {
    synthesize_with(net, f, &CheckOptions::default())
}

/// Produce a flow realizing a top-level existential flow quantifier, or
/// `None` when the formula is unsatisfiable on the network. The witness is
/// replayed under a fixed-flow evaluation before it is returned, so a
/// successful synthesis is self-checking.
pub fn synthesize_with(
    net: &FlowNetwork,
    f: &StateFormula,
    opts: &CheckOptions,
) -> Result<Option<FlowFunction>, CheckError> {
    // `gmax` in a threshold is a constant of the network, so classification
    // applies to the folded formula.
    let folded = fold_gmax(net, f);
    let tag = classify_formula(&folded);
    let existential_root = matches!(folded, StateFormula::Flow(q, _) if !q.is_universal());
    if !existential_root || !tag.is_exists_bfl1 {
        return Err(CheckError::NotExistentialBfl1(f.to_string()));
    }
    let mut opts = opts.clone();
    if opts.engine == Engine::Oracle {
        // The oracle decides but never produces witnesses.
        opts.engine = Engine::Auto;
    }
    let verdict = check_with(net, &folded, &opts)?;
    if !verdict.satisfied {
        return Ok(None);
    }
    let flow = verdict.witness.ok_or_else(|| {
        CheckError::Internal("satisfied existential check produced no witness".into())
    })?;
    if !verify_witness(net, f, &flow)? {
        return Err(CheckError::Internal(
            "synthesized witness failed re-checking under a fixed flow".into(),
        ));
    }
    Ok(Some(flow))
}

/// Replay `flow-quantifier body` under a concrete flow: the flow must
/// validate against the network, match the quantifier's integrality, carry
/// the maximal value when the quantifier demands it, and satisfy the body
/// at the source with the flow in scope. Nested quantified subformulas are
/// resolved by fresh general-engine labelings.
pub fn verify_witness(
    net: &FlowNetwork,
    f: &StateFormula,
    flow: &FlowFunction,
) -> Result<bool, CheckError> {
    let StateFormula::Flow(q, body) = f else {
        return Err(CheckError::NotExistentialBfl1(f.to_string()));
    };
    if flow.validate(net).is_err() {
        return Ok(false);
    }
    if !q.over_reals() && !flow.is_integral() {
        return Ok(false);
    }
    if q.binds_gmax() {
        let (gm, _) = max_flow(net);
        if flow.vertex_value(net, net.source()) != rat_u(gm) {
            return Ok(false);
        }
    }
    let folded = fold_gmax(net, body);
    let opts = CheckOptions::default();
    let cache: RefCell<HashMap<StateFormula, VertexSet>> = RefCell::new(HashMap::new());
    let pending: RefCell<Option<CheckError>> = RefCell::new(None);
    let hook = |sub: &StateFormula, v: usize| -> Result<bool, EvalError> {
        if let Some(s) = cache.borrow().get(sub) {
            return Ok(s.contains(v));
        }
        match labeled_set(net, sub, &opts) {
            Ok(s) => {
                let hit = s.contains(v);
                cache.borrow_mut().insert(sub.clone(), s);
                Ok(hit)
            }
            Err(e) => {
                *pending.borrow_mut() = Some(e);
                Err(EvalError::UnexpectedQuantifier(sub.to_string()))
            }
        }
    };
    let ev = Evaluator::with_nested(net, FlowContext::Flow(flow), &hook);
    ev.eval_state(&folded, net.source())
        .map_err(|e| pending.borrow_mut().take().unwrap_or_else(|| from_eval(e)))
}

/// Check a formula coming out of the propositional-satisfiability encoding
/// on its companion network. The encoding's shape normalizes into the
/// conjunctive fragment, so `Auto` answers it by range propagation instead
/// of assignment enumeration.
pub fn check_reduction_cnf(net: &FlowNetwork, f: &StateFormula) -> Result<Verdict, CheckError> {
    check(net, f)
}

/// Per-vertex satisfying set of a closed formula under the general pipeline:
/// `gmax` folded, positive path quantifiers rewritten onto the subdivided
/// network and the set mapped back to the original vertices.
fn labeled_set(
    net: &FlowNetwork,
    f: &StateFormula,
    opts: &CheckOptions,
) -> Result<VertexSet, CheckError> {
    let folded = fold_gmax(net, f);
    if mentions_positive(&folded) {
        let (refined, prop, _halves) = refine_for_positive_paths(net);
        let rewritten = rewrite_positive_quantifiers(&folded, &prop);
        let gen = General::new(&refined, opts);
        let s = gen.eval_set(&rewritten)?;
        let mut out = VertexSet::empty(net.vertex_count());
        for v in 0..net.vertex_count() {
            let rv = refined.vertex_index(net.vertex_id(v)).ok_or_else(|| {
                CheckError::Internal("subdivision lost an original vertex".into())
            })?;
            if s.contains(rv) {
                out.insert(v);
            }
        }
        Ok(out)
    } else {
        let gen = General::new(net, opts);
        gen.eval_set(&folded)
    }
}

/// Map a flow on the edge-subdivided network back to the original edges:
/// each original edge carries what its first half carried.
fn project_flow(
    orig: &FlowNetwork,
    flow: &FlowFunction,
    halves: &[usize],
) -> Result<FlowFunction, CheckError> {
    let projected = if flow.is_integral() {
        let vals: Option<Vec<u64>> = halves.iter().map(|&e| flow.edge_int(e)).collect();
        let vals =
            vals.ok_or_else(|| CheckError::Internal("integral flow lost a value".into()))?;
        FlowFunction::integral(orig, vals)
    } else {
        FlowFunction::rational(orig, halves.iter().map(|&e| flow.edge_rat(e)).collect())
    };
    projected.map_err(|e| CheckError::Internal(format!("projected witness is invalid: {e}")))
}

fn fold_gmax(net: &FlowNetwork, f: &StateFormula) -> StateFormula {
    let (gm, _) = max_flow(net);
    match substitute(f, &SubstTarget::Gmax(gm)) {
        Ok(g) => g,
        Err(SubstError::Unbound(_)) => f.clone(),
    }
}

fn from_eval(e: EvalError) -> CheckError {
    match e {
        EvalError::UnboundFlowProp(s) => {
            CheckError::NotClosed(format!("flow proposition `{s}` outside any flow quantifier"))
        }
        EvalError::NonConstantThreshold(s) => CheckError::NonConstantThreshold(s),
        EvalError::PositiveNeedsFlow(s) => CheckError::UnsupportedNesting(format!(
            "positive path quantifier must be rewritten before interval labeling: {s}"
        )),
        EvalError::UnsupportedNesting(s) => CheckError::UnsupportedNesting(s),
        EvalError::UnexpectedQuantifier(s) => {
            CheckError::Internal(format!("unresolved quantifier: {s}"))
        }
        EvalError::Placeholder(s) => CheckError::NotClosed(format!("placeholder `{s}`")),
        EvalError::PastOverflow => {
            CheckError::UnsupportedNesting("too many distinct past subformulas".into())
        }
    }
}

type QuantResult = (VertexSet, HashMap<usize, FlowFunction>);

/// One union of ranges all giving the body's flow propositions the same
/// truth vector, with a representative value from its first cell.
#[derive(Clone)]
struct Class {
    ranges: Vec<VertexRange>,
    rep: BigRational,
}

/// Labeling state for the general engine on one network: a memo of
/// quantified subformulas to their satisfying sets and witnesses.
struct General<'a> {
    net: &'a FlowNetwork,
    opts: &'a CheckOptions,
    cn: u64,
    gamma_max: u64,
    memo: RefCell<HashMap<StateFormula, Rc<QuantResult>>>,
}

impl<'a> General<'a> {
    fn new(net: &'a FlowNetwork, opts: &'a CheckOptions) -> General<'a> {
        General {
            net,
            opts,
            cn: opts.value_domain.unwrap_or_else(|| compute_cn(net)),
            gamma_max: max_flow(net).0,
            memo: RefCell::new(HashMap::new()),
        }
    }

    fn eval_set(&self, f: &StateFormula) -> Result<VertexSet, CheckError> {
        self.eval_with_ctx(FlowContext::None, f)
    }

    /// Evaluate with flow and value quantifiers resolved through the memo.
    /// The evaluator cannot carry a typed error through its hook, so the
    /// real error is parked and rethrown in place of the generic one.
    fn eval_with_ctx(&self, ctx: FlowContext<'_>, f: &StateFormula) -> Result<VertexSet, CheckError> {
        let pending: RefCell<Option<CheckError>> = RefCell::new(None);
        let hook = |sub: &StateFormula, v: usize| -> Result<bool, EvalError> {
            match self.quantified(sub) {
                Ok(r) => Ok(r.0.contains(v)),
                Err(e) => {
                    *pending.borrow_mut() = Some(e);
                    Err(EvalError::UnexpectedQuantifier(sub.to_string()))
                }
            }
        };
        let ev = Evaluator::with_nested(self.net, ctx, &hook);
        ev.eval_state_set(f)
            .map_err(|e| pending.borrow_mut().take().unwrap_or_else(|| from_eval(e)))
    }

    fn quantified(&self, f: &StateFormula) -> Result<Rc<QuantResult>, CheckError> {
        if let Some(hit) = self.memo.borrow().get(f) {
            return Ok(hit.clone());
        }
        let computed = match f {
            StateFormula::Flow(q, body) => self.flow_quantifier(*q, body)?,
            StateFormula::Value(q, x, body) => {
                (self.value_quantifier(*q, x, body)?, HashMap::new())
            }
            other => {
                return Err(CheckError::Internal(format!(
                    "labeling hook called on a non-quantified formula: {other}"
                )))
            }
        };
        let rc = Rc::new(computed);
        self.memo.borrow_mut().insert(f.clone(), rc.clone());
        Ok(rc)
    }

    fn flow_quantifier(&self, q: FlowQuant, body: &StateFormula) -> Result<QuantResult, CheckError> {
        if q.is_universal() {
            let dual = StateFormula::Flow(q.dual(), Box::new(body.clone().negated()));
            let inner = self.quantified(&dual)?;
            return Ok((inner.0.complement(), HashMap::new()));
        }
        let body = self.expand_values(body)?;
        let mut props: Vec<(Rel, u64)> = Vec::new();
        collect_props(&body, &mut props)?;
        props.sort_unstable_by_key(|&(rel, g)| (g, rel as u8));
        props.dedup();
        let cap = self.net.capacity_sum();
        let mut ts: Vec<u64> = props.iter().map(|&(_, g)| g).filter(|&g| g <= cap).collect();
        ts.sort_unstable();
        ts.dedup();
        // Cells the propositions cannot tell apart collapse into one choice
        // whose constraint is the union of their ranges.
        let mut grouped: Vec<(Vec<bool>, Class)> = Vec::new();
        for (range, rep) in cells(&ts, cap) {
            let vector: Vec<bool> =
                props.iter().map(|&(rel, g)| rel_holds(rel, rep.cmp(&rat_u(g)))).collect();
            match grouped.iter_mut().find(|(v, _)| *v == vector) {
                Some((_, c)) => merge_push(&mut c.ranges, range),
                None => grouped.push((vector, Class { ranges: vec![range], rep })),
            }
        }
        let classes: Vec<Class> = grouped.into_iter().map(|(_, c)| c).collect();
        let n = self.net.vertex_count();
        let source = self.net.source();
        let lists: Vec<Vec<Class>> = (0..n)
            .map(|v| {
                if q.binds_gmax() && v == source {
                    // Flows of maximal value leave no choice at the source.
                    vec![Class {
                        ranges: vec![VertexRange::exactly(self.gamma_max)],
                        rep: rat_u(self.gamma_max),
                    }]
                } else {
                    classes.clone()
                }
            })
            .collect();
        let mut search = FlowSearch {
            gen: self,
            body: &body,
            real: q.over_reals(),
            lists: &lists,
            pick: vec![0; n],
            visited: 0,
            result: VertexSet::empty(n),
            witnesses: HashMap::new(),
        };
        search.go(0)?;
        Ok((search.result, search.witnesses))
    }

    fn value_quantifier(
        &self,
        q: ValueQuant,
        x: &str,
        body: &StateFormula,
    ) -> Result<VertexSet, CheckError> {
        let n = self.net.vertex_count();
        let mut acc = match q {
            ValueQuant::Forall => VertexSet::empty(n).complement(),
            ValueQuant::Exists => VertexSet::empty(n),
        };
        for g in 0..=self.cn {
            let inst = match substitute(body, &SubstTarget::Var(x, g)) {
                Ok(inst) => inst,
                // Vacuous binder: the body does not depend on the value.
                Err(SubstError::Unbound(_)) => return self.eval_set(body),
            };
            let s = self.eval_set(&inst)?;
            acc = match q {
                ValueQuant::Forall => acc.intersect(&s),
                ValueQuant::Exists => acc.union(&s),
            };
            let settled = match q {
                ValueQuant::Forall => acc.is_empty(),
                ValueQuant::Exists => acc.count() == n,
            };
            if settled {
                break;
            }
        }
        Ok(acc)
    }

    /// Replace value quantifiers in a flow-quantifier body by finite
    /// conjunctions or disjunctions over the enumeration domain. Nested
    /// flow quantifiers keep theirs; they expand in their own evaluation.
    fn expand_values(&self, f: &StateFormula) -> Result<StateFormula, CheckError> {
        let k = count_value_nodes(f);
        if k > 0 {
            let leaves = (self.cn + 1).checked_pow(k).unwrap_or(u64::MAX);
            if leaves > self.opts.max_assignments {
                return Err(CheckError::Budget {
                    needed: leaves,
                    budget: self.opts.max_assignments,
                });
            }
        }
        self.expand_state(f)
    }

    fn expand_state(&self, f: &StateFormula) -> Result<StateFormula, CheckError> {
        Ok(match f {
            StateFormula::Value(q, x, body) => {
                let mut parts = Vec::new();
                for g in 0..=self.cn {
                    match substitute(body, &SubstTarget::Var(x, g)) {
                        Ok(inst) => parts.push(self.expand_state(&inst)?),
                        Err(SubstError::Unbound(_)) => return self.expand_state(body),
                    }
                }
                let mut it = parts.into_iter();
                let first = it.next().expect("enumeration domain is never empty");
                it.fold(first, |a, b| match q {
                    ValueQuant::Forall => StateFormula::And(Box::new(a), Box::new(b)),
                    ValueQuant::Exists => StateFormula::Or(Box::new(a), Box::new(b)),
                })
            }
            StateFormula::Flow(..) => f.clone(),
            StateFormula::Not(a) => StateFormula::Not(Box::new(self.expand_state(a)?)),
            StateFormula::And(a, b) => {
                StateFormula::And(Box::new(self.expand_state(a)?), Box::new(self.expand_state(b)?))
            }
            StateFormula::Or(a, b) => {
                StateFormula::Or(Box::new(self.expand_state(a)?), Box::new(self.expand_state(b)?))
            }
            StateFormula::Implies(a, b) => StateFormula::Implies(
                Box::new(self.expand_state(a)?),
                Box::new(self.expand_state(b)?),
            ),
            StateFormula::Path(q, p) => StateFormula::Path(*q, Box::new(self.expand_path(p)?)),
            leaf => leaf.clone(),
        })
    }

    fn expand_path(&self, p: &PathFormula) -> Result<PathFormula, CheckError> {
        Ok(match p {
            PathFormula::State(s) => PathFormula::State(self.expand_state(s)?),
            PathFormula::Not(a) => PathFormula::Not(Box::new(self.expand_path(a)?)),
            PathFormula::And(a, b) => {
                PathFormula::And(Box::new(self.expand_path(a)?), Box::new(self.expand_path(b)?))
            }
            PathFormula::Or(a, b) => {
                PathFormula::Or(Box::new(self.expand_path(a)?), Box::new(self.expand_path(b)?))
            }
            PathFormula::Implies(a, b) => PathFormula::Implies(
                Box::new(self.expand_path(a)?),
                Box::new(self.expand_path(b)?),
            ),
            PathFormula::Next(a) => PathFormula::Next(Box::new(self.expand_path(a)?)),
            PathFormula::Finally(a) => PathFormula::Finally(Box::new(self.expand_path(a)?)),
            PathFormula::Globally(a) => PathFormula::Globally(Box::new(self.expand_path(a)?)),
            PathFormula::Yesterday(a) => PathFormula::Yesterday(Box::new(self.expand_path(a)?)),
            PathFormula::Until(a, b) => {
                PathFormula::Until(Box::new(self.expand_path(a)?), Box::new(self.expand_path(b)?))
            }
            PathFormula::Since(a, b) => {
                PathFormula::Since(Box::new(self.expand_path(a)?), Box::new(self.expand_path(b)?))
            }
        })
    }
}

/// Depth-first enumeration of one class per vertex. Prefixes are pruned by
/// the feasibility of their convex hulls; a complete assignment contributes
/// the vertices where the body holds on the representatives, provided some
/// flow realizes the exact (possibly disconnected) unions.
struct FlowSearch<'a, 'b> {
    gen: &'b General<'a>,
    body: &'b StateFormula,
    real: bool,
    lists: &'b [Vec<Class>],
    pick: Vec<usize>,
    visited: u64,
    result: VertexSet,
    witnesses: HashMap<usize, FlowFunction>,
}

impl FlowSearch<'_, '_> {
    fn go(&mut self, depth: usize) -> Result<(), CheckError> {
        if depth == self.lists.len() {
            return self.leaf();
        }
        for i in 0..self.lists[depth].len() {
            self.pick[depth] = i;
            self.visited += 1;
            if self.visited > self.gen.opts.max_assignments {
                return Err(CheckError::Budget {
                    needed: self.visited,
                    budget: self.gen.opts.max_assignments,
                });
            }
            if self.hull_feasible(depth)? {
                self.go(depth + 1)?;
            }
        }
        Ok(())
    }

    fn leaf(&mut self) -> Result<(), CheckError> {
        let reps: Vec<BigRational> =
            (0..self.lists.len()).map(|v| self.lists[v][self.pick[v]].rep.clone()).collect();
        let sat = self.gen.eval_with_ctx(FlowContext::Values(&reps), self.body)?;
        if sat.iter().all(|v| self.result.contains(v)) {
            return Ok(());
        }
        let Some(flow) = self.exact()? else { return Ok(()) };
        for v in sat.iter() {
            if !self.result.contains(v) {
                self.result.insert(v);
                self.witnesses.insert(v, flow.clone());
            }
        }
        Ok(())
    }

    /// Feasibility of the hulls of the classes chosen so far, later vertices
    /// unconstrained. Sound for pruning only: a hull relaxes its union.
    fn hull_feasible(&self, depth: usize) -> Result<bool, CheckError> {
        let ranges: Vec<VertexRange> = (0..self.lists.len())
            .map(|v| {
                if v <= depth {
                    hull(&self.lists[v][self.pick[v]].ranges)
                } else {
                    VertexRange::unconstrained()
                }
            })
            .collect();
        Ok(self.try_ranges(&ranges)?.is_some())
    }

    /// A flow meeting the exact chosen unions, branching over their parts.
    fn exact(&self) -> Result<Option<FlowFunction>, CheckError> {
        let n = self.lists.len();
        let chosen: Vec<&[VertexRange]> =
            (0..n).map(|v| &self.lists[v][self.pick[v]].ranges[..]).collect();
        let mut branches: u64 = 1;
        for c in &chosen {
            branches = branches.saturating_mul(c.len() as u64);
        }
        if branches > self.gen.opts.max_branches {
            return Err(CheckError::Budget { needed: branches, budget: self.gen.opts.max_branches });
        }
        let mut idx = vec![0usize; n];
        loop {
            let ranges: Vec<VertexRange> = (0..n).map(|v| chosen[v][idx[v]]).collect();
            if let Some(flow) = self.try_ranges(&ranges)? {
                return Ok(Some(flow));
            }
            let mut d = 0;
            loop {
                if d == n {
                    return Ok(None);
                }
                idx[d] += 1;
                if idx[d] < chosen[d].len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }

    fn try_ranges(&self, ranges: &[VertexRange]) -> Result<Option<FlowFunction>, CheckError> {
        if self.real {
            Ok(real_vertex_constrained_flow(self.gen.net, ranges)?.feasible())
        } else {
            let mut int_ranges = Vec::with_capacity(ranges.len());
            for r in ranges {
                match r.integerize() {
                    Some(ir) => int_ranges.push(ir),
                    None => return Ok(None),
                }
            }
            Ok(vertex_constrained_flow(self.gen.net, &int_ranges).feasible())
        }
    }
}

fn hull(ranges: &[VertexRange]) -> VertexRange {
    let first = ranges[0];
    let last = ranges[ranges.len() - 1];
    VertexRange { lo: first.lo, lo_strict: first.lo_strict, hi: last.hi, hi_strict: last.hi_strict }
}

fn collect_props(f: &StateFormula, out: &mut Vec<(Rel, u64)>) -> Result<(), CheckError> {
    match f {
        StateFormula::FlowProp(rel, e) => {
            let g = e
                .fold()
                .const_value()
                .ok_or_else(|| CheckError::NonConstantThreshold(f.to_string()))?;
            out.push((*rel, g));
        }
        StateFormula::Placeholder | StateFormula::ValuePlaceholder(_) => {
            return Err(CheckError::NotClosed(f.to_string()));
        }
        StateFormula::Flow(..) => {}
        StateFormula::Value(_, _, b) => collect_props(b, out)?,
        StateFormula::Not(a) => collect_props(a, out)?,
        StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
            collect_props(a, out)?;
            collect_props(b, out)?;
        }
        StateFormula::Path(_, p) => collect_props_path(p, out)?,
        StateFormula::True | StateFormula::False | StateFormula::Atom(_) => {}
    }
    Ok(())
}

fn collect_props_path(p: &PathFormula, out: &mut Vec<(Rel, u64)>) -> Result<(), CheckError> {
    match p {
        PathFormula::State(s) => collect_props(s, out),
        PathFormula::Not(a)
        | PathFormula::Next(a)
        | PathFormula::Finally(a)
        | PathFormula::Globally(a)
        | PathFormula::Yesterday(a) => collect_props_path(a, out),
        PathFormula::And(a, b)
        | PathFormula::Or(a, b)
        | PathFormula::Implies(a, b)
        | PathFormula::Until(a, b)
        | PathFormula::Since(a, b) => {
            collect_props_path(a, out)?;
            collect_props_path(b, out)
        }
    }
}

fn count_value_nodes(f: &StateFormula) -> u32 {
    match f {
        StateFormula::Value(_, _, b) => 1 + count_value_nodes(b),
        StateFormula::Flow(..) => 0,
        StateFormula::Not(a) => count_value_nodes(a),
        StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
            count_value_nodes(a) + count_value_nodes(b)
        }
        StateFormula::Path(_, p) => count_value_nodes_path(p),
        _ => 0,
    }
}

fn count_value_nodes_path(p: &PathFormula) -> u32 {
    match p {
        PathFormula::State(s) => count_value_nodes(s),
        PathFormula::Not(a)
        | PathFormula::Next(a)
        | PathFormula::Finally(a)
        | PathFormula::Globally(a)
        | PathFormula::Yesterday(a) => count_value_nodes_path(a),
        PathFormula::And(a, b)
        | PathFormula::Or(a, b)
        | PathFormula::Implies(a, b)
        | PathFormula::Until(a, b)
        | PathFormula::Since(a, b) => count_value_nodes_path(a) + count_value_nodes_path(b),
    }
}

fn mentions_positive(f: &StateFormula) -> bool {
    match f {
        StateFormula::Path(q, p) => q.is_positive() || mentions_positive_path(p),
        StateFormula::Not(a) => mentions_positive(a),
        StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
            mentions_positive(a) || mentions_positive(b)
        }
        StateFormula::Flow(_, b) => mentions_positive(b),
        StateFormula::Value(_, _, b) => mentions_positive(b),
        _ => false,
    }
}

fn mentions_positive_path(p: &PathFormula) -> bool {
    match p {
        PathFormula::State(s) => mentions_positive(s),
        PathFormula::Not(a)
        | PathFormula::Next(a)
        | PathFormula::Finally(a)
        | PathFormula::Globally(a)
        | PathFormula::Yesterday(a) => mentions_positive_path(a),
        PathFormula::And(a, b)
        | PathFormula::Or(a, b)
        | PathFormula::Implies(a, b)
        | PathFormula::Until(a, b)
        | PathFormula::Since(a, b) => mentions_positive_path(a) || mentions_positive_path(b),
    }
}

fn mentions_value_quant(f: &StateFormula) -> bool {
    match f {
        StateFormula::Value(..) => true,
        StateFormula::Not(a) => mentions_value_quant(a),
        StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
            mentions_value_quant(a) || mentions_value_quant(b)
        }
        StateFormula::Flow(_, b) => mentions_value_quant(b),
        StateFormula::Path(_, p) => mentions_value_quant_path(p),
        _ => false,
    }
}

fn mentions_value_quant_path(p: &PathFormula) -> bool {
    match p {
        PathFormula::State(s) => mentions_value_quant(s),
        PathFormula::Not(a)
        | PathFormula::Next(a)
        | PathFormula::Finally(a)
        | PathFormula::Globally(a)
        | PathFormula::Yesterday(a) => mentions_value_quant_path(a),
        PathFormula::And(a, b)
        | PathFormula::Or(a, b)
        | PathFormula::Implies(a, b)
        | PathFormula::Until(a, b)
        | PathFormula::Since(a, b) => mentions_value_quant_path(a) || mentions_value_quant_path(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{net, DIAMOND, PIPE9, SEPARATION, TWO_SUCCESSORS};

    fn f(text: &str) -> StateFormula {
        StateFormula::parse(text).expect("test formula parses")
    }

    fn run(net_text: &str, formula: &str, engine: Engine) -> Verdict {
        let n = net(net_text);
        let opts = CheckOptions { engine, ..CheckOptions::default() };
        check_with(&n, &f(formula), &opts).expect("check succeeds")
    }

    fn agree(net_text: &str, formula: &str) -> bool {
        let general = run(net_text, formula, Engine::General);
        let oracle = run(net_text, formula, Engine::Oracle);
        assert_eq!(
            general.satisfied, oracle.satisfied,
            "general and oracle disagree on {formula}"
        );
        general.satisfied
    }

    #[test]
    fn zero_flow_realizes_ef_zero_everywhere() {
        let n = net(DIAMOND);
        let opts = CheckOptions::default();
        let (set, wit) = eval_flow_quantifier(&n, FlowQuant::Ef, &f("= 0"), &opts).unwrap();
        assert_eq!(set.count(), n.vertex_count());
        for v in 0..n.vertex_count() {
            let w = wit.get(&v).expect("witness at every vertex");
            assert!(w.validate(&n).is_ok());
            assert_eq!(w.vertex_value(&n, v), rat_u(0));
        }
    }

    #[test]
    fn gmax_constant_folds_against_the_network() {
        assert!(agree(DIAMOND, "Ef (= gmax)"));
        assert!(!agree(DIAMOND, "Ef (> gmax)"));
        assert!(agree(DIAMOND, "Ef (= gmax - 2)"));
    }

    #[test]
    fn max_quantifier_pins_the_source_value() {
        let v = run(DIAMOND, "EfMax (>= 7)", Engine::General);
        assert!(v.satisfied);
        let w = v.witness.expect("existential witness");
        let n = net(DIAMOND);
        assert_eq!(w.vertex_value(&n, n.source()), rat_u(7));
        assert!(!run(DIAMOND, "EfMax (<= 6)", Engine::General).satisfied);
        assert!(run(DIAMOND, "AfMax (= gmax)", Engine::General).satisfied);
    }

    #[test]
    fn refuted_universal_checks_carry_counterexamples() {
        let v = run(DIAMOND, "Af (>= 1)", Engine::General);
        assert!(!v.satisfied);
        let w = v.witness.expect("counterexample flow");
        let n = net(DIAMOND);
        assert!(w.vertex_value(&n, n.source()) < rat_u(1));
    }

    #[test]
    fn forced_split_across_successors() {
        assert!(agree(TWO_SUCCESSORS, "A Af (>= 10 -> X >= 4)"));
        assert!(!agree(TWO_SUCCESSORS, "A Af (>= 10 -> X >= 5)"));
    }

    #[test]
    fn integral_and_real_quantifiers_separate() {
        let phi = "> 0 & A X (< 1)";
        assert!(!agree(SEPARATION, &format!("Ef ({phi})")));
        let real = run(SEPARATION, &format!("EfR ({phi})"), Engine::General);
        assert!(real.satisfied);
        let w = real.witness.expect("real witness");
        assert!(!w.is_integral());
        let n = net(SEPARATION);
        assert!(w.vertex_value(&n, n.source()) > rat_u(0));
    }

    #[test]
    fn conjunctive_and_general_engines_agree_on_the_separation_pair() {
        for formula in ["Ef (> 0 & A X (< 1))", "EfR (> 0 & A X (< 1))", "Ef (= 2 & A X (= 1))"] {
            let g = run(SEPARATION, formula, Engine::General);
            let c = run(SEPARATION, formula, Engine::Cbfl);
            assert_eq!(g.satisfied, c.satisfied, "engines disagree on {formula}");
        }
    }

    #[test]
    fn value_quantifiers_range_over_attainable_values() {
        assert!(agree(DIAMOND, "forall x. (Ef (= x) -> Ef (>= x))"));
        assert!(agree(DIAMOND, "exists x. (Ef (= x) & !(Ef (>= x + 1)))"));
        assert!(!agree(PIPE9, "exists x. (Ef (= x) & Ef (= x + 10))"));
    }

    #[test]
    fn vacuous_value_binders_evaluate_once() {
        assert!(agree(PIPE9, "exists x. (Ef (>= 3))"));
        assert!(!agree(PIPE9, "forall x. (Ef (> 9))"));
    }

    #[test]
    fn nested_flow_quantifiers_resolve_through_the_labeling() {
        assert!(agree(DIAMOND, "Ef (>= 1 & A X (Ef (= 0)))"));
        assert!(!agree(DIAMOND, "Ef (>= 1 & A X (Af (= 0)))"));
    }

    #[test]
    fn positive_quantifiers_rewrite_onto_the_subdivided_network() {
        let sat = agree(SEPARATION, "Ef (= 1 & A+ X (>= 1))");
        assert!(sat);
        let v = run(SEPARATION, "Ef (= 1 & A+ X (>= 1))", Engine::General);
        assert!(v.diagnostics.iter().any(|d| d.code == "positive-rewrite"));
        let w = v.witness.expect("witness mapped back to the original net");
        let n = net(SEPARATION);
        assert!(w.validate(&n).is_ok());
        assert!(verify_witness(&n, &f("Ef (= 1 & A+ X (>= 1))"), &w).unwrap());
        assert!(!agree(SEPARATION, "Ef (= 2 & E+ X (<= 0))"));
    }

    #[test]
    fn auto_routes_conjunctive_formulas_to_range_propagation() {
        let v = run(DIAMOND, "Ef (= 7 & A X (>= 3))", Engine::Auto);
        assert!(v.diagnostics.iter().any(|d| d.message.contains("conjunctive")));
        let g = run(DIAMOND, "Ef (= 7 & A X (>= 3))", Engine::General);
        assert_eq!(v.satisfied, g.satisfied);
        let v = run(DIAMOND, "Ef (A (p U (> 1)))", Engine::Auto);
        assert!(v.diagnostics.iter().any(|d| d.message.contains("general")));
    }

    #[test]
    fn explicit_conjunctive_engine_rejects_the_rest() {
        let n = net(DIAMOND);
        let opts = CheckOptions { engine: Engine::Cbfl, ..CheckOptions::default() };
        let err = check_with(&n, &f("Ef (A (p U q))"), &opts).unwrap_err();
        assert!(matches!(err, CheckError::NotConjunctive(_)));
    }

    #[test]
    fn open_formulas_are_refused() {
        let n = net(DIAMOND);
        assert!(matches!(check(&n, &f("> 5")), Err(CheckError::NotClosed(_))));
        assert!(matches!(check(&n, &f("Ef (= x)")), Err(CheckError::NotClosed(_))));
        assert!(matches!(check(&n, &f("Ef (>?)")), Err(CheckError::NotClosed(_))));
    }

    #[test]
    fn assignment_budget_is_honest() {
        let n = net(DIAMOND);
        let opts = CheckOptions { max_assignments: 3, ..CheckOptions::default() };
        let err = check_with(&n, &f("Ef ((= 1 | = 3) & E X (= 2 | >= 4))"), &opts).unwrap_err();
        assert!(matches!(err, CheckError::Budget { .. }));
    }

    #[test]
    fn composite_constant_thresholds_fold_everywhere() {
        // `6 + 5` and `2 * 1` are constants; every evaluation path must
        // fold them rather than reject them as symbolic.
        agree(PIPE9, "Ef (< 6 + 5)");
        agree(PIPE9, "Ef (E ((> 2 * 1) U (>= 2 + 2)))");
        let n = net(PIPE9);
        let w = synthesize(&n, &f("Ef (>= 4 + 5)")).unwrap().expect("cap 9 reaches 9");
        assert!(verify_witness(&n, &f("Ef (>= 4 + 5)"), &w).unwrap());
    }

    #[test]
    fn synthesis_returns_replayable_flows() {
        let n = net(DIAMOND);
        let phi = f("Ef (>= 3 & A X (>= 1))");
        let flow = synthesize(&n, &phi).unwrap().expect("satisfiable");
        assert!(flow.vertex_value(&n, n.source()) >= rat_u(3));
        assert!(verify_witness(&n, &phi, &flow).unwrap());
        assert!(synthesize(&n, &f("Ef (> gmax)")).unwrap().is_none());
        assert!(matches!(
            synthesize(&n, &f("Af (>= 0)")),
            Err(CheckError::NotExistentialBfl1(_))
        ));
        assert!(matches!(
            synthesize(&n, &f("Ef (>= 1) & Ef (= 0)")),
            Err(CheckError::NotExistentialBfl1(_))
        ));
    }

    #[test]
    fn witness_replay_rejects_wrong_flows() {
        let n = net(DIAMOND);
        let zero = FlowFunction::zero(&n);
        assert!(!verify_witness(&n, &f("Ef (>= 3)"), &zero).unwrap());
        assert!(!verify_witness(&n, &f("EfMax (>= 0)"), &zero).unwrap());
        assert!(verify_witness(&n, &f("Ef (= 0)"), &zero).unwrap());
    }

    #[test]
    fn duality_under_negation() {
        for formula in
            ["Ef (= 7 & A X (>= 3))", "Af (>= 1)", "EfMax (>= 7)", "Ef (>= 1 & A X (Ef (= 0)))"]
        {
            let direct = run(DIAMOND, formula, Engine::General).satisfied;
            let negated = run(DIAMOND, &format!("!({formula})"), Engine::General).satisfied;
            assert_ne!(direct, negated, "negation must flip {formula}");
        }
    }

    #[test]
    fn oracle_engine_decides_without_witnesses() {
        let v = run(DIAMOND, "Ef (= 7)", Engine::Oracle);
        assert!(v.satisfied);
        assert!(v.witness.is_none());
    }

    #[test]
    fn past_operators_check_against_the_oracle() {
        assert!(agree(DIAMOND, "E X (E (Y true))"));
        assert!(!agree(DIAMOND, "E (Y true)"));
    }
}
