//! Fragment classification. The flags describe which sublogics a formula
//! falls into; engines use them to pick evaluation strategies and the CLI
//! surfaces them for diagnostics.
//!
//! Core-fragment flags (`is_flow_ctl_star`, `is_lfl`, `is_bfl`, the `bfl1`
//! family) refer to the base logic: formulas using extension syntax (past
//! operators, positive path quantifiers, value quantifiers, `gmax`,
//! placeholders) are not members even when shaped right otherwise.

use super::cbfl::normalize_cbfl;
use super::{FlowQuant, PathFormula, PathQuant, StateFormula, ValueExpr};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentTag {
    /// Every flow proposition sits under a flow quantifier, every variable
    /// under its value quantifier, every positive path quantifier under a
    /// flow quantifier, and there are no placeholders.
    pub is_closed: bool,
    /// No flow quantification at all: branching temporal logic whose atoms
    /// may compare through-flow against constants.
    pub is_flow_ctl_star: bool,
    /// Propositional over atoms and flow propositions (the state-formula
    /// core of the linear fragment).
    pub is_flow_ltl: bool,
    /// `A psi` with no path quantification inside psi, under an optional
    /// flow-quantifier prefix.
    pub is_lfl: bool,
    /// Every temporal operator appears immediately under a path quantifier.
    pub is_bfl: bool,
    /// Boolean combination of singly-flow-quantified branching formulas.
    pub is_bfl1: bool,
    pub is_exists_bfl1: bool,
    pub is_forall_bfl1: bool,
    /// Boolean combination of singly-quantified linear formulas.
    pub is_lfl1: bool,
    pub is_exists_lfl1: bool,
    pub is_forall_lfl1: bool,
    /// Level in the conjunctive hierarchy, when normalization succeeds.
    pub cbfl_level: Option<u32>,
}

pub fn classify_formula(f: &StateFormula) -> FragmentTag {
    let is_exists_bfl1 = exists_bfl1(f);
    let is_forall_bfl1 = forall_bfl1(f);
    let is_exists_lfl1 = exists_lfl1(f);
    let is_forall_lfl1 = forall_lfl1(f);
    FragmentTag {
        is_closed: state_closed(f, false, &mut Vec::new()),
        is_flow_ctl_star: flow_ctl_star(f),
        is_flow_ltl: propositional(f),
        is_lfl: lfl(f),
        is_bfl: bfl_state(f),
        is_bfl1: boolean_over(f, &|leaf| exists_bfl1(leaf) || forall_bfl1(leaf)),
        is_exists_bfl1,
        is_forall_bfl1,
        is_lfl1: boolean_over(f, &|leaf| exists_lfl1(leaf) || forall_lfl1(leaf)),
        is_exists_lfl1,
        is_forall_lfl1,
        cbfl_level: normalize_cbfl(f).ok().map(|nf| nf.level()),
    }
}

/// Whether any value expression in the formula uses `div`. Division is the
/// one operator for which the bounded-range argument behind value
/// quantification has no monotonicity proof, so engines warn about it.
pub fn uses_div(f: &StateFormula) -> bool {
    fn expr(e: &ValueExpr) -> bool {
        match e {
            ValueExpr::Div(..) => true,
            ValueExpr::Add(a, b) | ValueExpr::Mul(a, b) => expr(a) || expr(b),
            _ => false,
        }
    }
    fn path(p: &PathFormula) -> bool {
        match p {
            PathFormula::State(s) => uses_div(s),
            PathFormula::Not(a)
            | PathFormula::Next(a)
            | PathFormula::Finally(a)
            | PathFormula::Globally(a)
            | PathFormula::Yesterday(a) => path(a),
            PathFormula::And(a, b)
            | PathFormula::Or(a, b)
            | PathFormula::Implies(a, b)
            | PathFormula::Until(a, b)
            | PathFormula::Since(a, b) => path(a) || path(b),
        }
    }
    match f {
        StateFormula::FlowProp(_, e) => expr(e),
        StateFormula::Not(a) | StateFormula::Flow(_, a) | StateFormula::Value(_, _, a) => {
            uses_div(a)
        }
        StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
            uses_div(a) || uses_div(b)
        }
        StateFormula::Path(_, p) => path(p),
        _ => false,
    }
}

fn expr_closed(e: &ValueExpr, vars: &[String]) -> bool {
    match e {
        ValueExpr::Const(_) | ValueExpr::GammaMax | ValueExpr::GmaxMinus(_) => true,
        ValueExpr::Var(x) => vars.iter().any(|v| v == x),
        ValueExpr::Add(a, b) | ValueExpr::Mul(a, b) => {
            expr_closed(a, vars) && expr_closed(b, vars)
        }
        ValueExpr::Div(a, _) => expr_closed(a, vars),
    }
}

fn state_closed(f: &StateFormula, in_flow: bool, vars: &mut Vec<String>) -> bool {
    match f {
        StateFormula::True | StateFormula::False | StateFormula::Atom(_) => true,
        StateFormula::FlowProp(_, e) => in_flow && expr_closed(e, vars),
        StateFormula::Placeholder | StateFormula::ValuePlaceholder(_) => false,
        StateFormula::Not(a) => state_closed(a, in_flow, vars),
        StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
            state_closed(a, in_flow, vars) && state_closed(b, in_flow, vars)
        }
        StateFormula::Path(q, p) => {
            (!q.is_positive() || in_flow) && path_closed(p, in_flow, vars)
        }
        StateFormula::Flow(_, a) => state_closed(a, true, vars),
        StateFormula::Value(_, x, a) => {
            vars.push(x.clone());
            let ok = state_closed(a, in_flow, vars);
            vars.pop();
            ok
        }
    }
}

fn path_closed(p: &PathFormula, in_flow: bool, vars: &mut Vec<String>) -> bool {
    match p {
        PathFormula::State(s) => state_closed(s, in_flow, vars),
        PathFormula::Not(a)
        | PathFormula::Next(a)
        | PathFormula::Finally(a)
        | PathFormula::Globally(a)
        | PathFormula::Yesterday(a) => path_closed(a, in_flow, vars),
        PathFormula::And(a, b)
        | PathFormula::Or(a, b)
        | PathFormula::Implies(a, b)
        | PathFormula::Until(a, b)
        | PathFormula::Since(a, b) => path_closed(a, in_flow, vars) && path_closed(b, in_flow, vars),
    }
}

fn const_expr(e: &ValueExpr) -> bool {
    e.fold().const_value().is_some()
}

/// Propositional over atoms and constant-threshold flow propositions.
fn propositional(f: &StateFormula) -> bool {
    match f {
        StateFormula::True | StateFormula::False | StateFormula::Atom(_) => true,
        StateFormula::FlowProp(_, e) => const_expr(e),
        StateFormula::Not(a) => propositional(a),
        StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
            propositional(a) && propositional(b)
        }
        _ => false,
    }
}

fn flow_ctl_star(f: &StateFormula) -> bool {
    match f {
        StateFormula::True | StateFormula::False | StateFormula::Atom(_) => true,
        StateFormula::FlowProp(_, e) => const_expr(e),
        StateFormula::Placeholder | StateFormula::ValuePlaceholder(_) => false,
        StateFormula::Not(a) => flow_ctl_star(a),
        StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
            flow_ctl_star(a) && flow_ctl_star(b)
        }
        StateFormula::Path(q, p) => !q.is_positive() && flow_ctl_star_path(p),
        StateFormula::Flow(..) | StateFormula::Value(..) => false,
    }
}

fn flow_ctl_star_path(p: &PathFormula) -> bool {
    match p {
        PathFormula::State(s) => flow_ctl_star(s),
        PathFormula::Yesterday(_) | PathFormula::Since(..) => false,
        PathFormula::Not(a)
        | PathFormula::Next(a)
        | PathFormula::Finally(a)
        | PathFormula::Globally(a) => flow_ctl_star_path(a),
        PathFormula::And(a, b)
        | PathFormula::Or(a, b)
        | PathFormula::Implies(a, b)
        | PathFormula::Until(a, b) => flow_ctl_star_path(a) && flow_ctl_star_path(b),
    }
}

/// Linear path formula: temporal over propositional atoms, no quantifiers
/// of any kind, no past.
pub fn path_is_flow_ltl(p: &PathFormula) -> bool {
    match p {
        PathFormula::State(s) => propositional(s),
        PathFormula::Yesterday(_) | PathFormula::Since(..) => false,
        PathFormula::Not(a)
        | PathFormula::Next(a)
        | PathFormula::Finally(a)
        | PathFormula::Globally(a) => path_is_flow_ltl(a),
        PathFormula::And(a, b)
        | PathFormula::Or(a, b)
        | PathFormula::Implies(a, b)
        | PathFormula::Until(a, b) => path_is_flow_ltl(a) && path_is_flow_ltl(b),
    }
}

fn lfl(f: &StateFormula) -> bool {
    match f {
        StateFormula::Flow(_, inner) => lfl(inner),
        StateFormula::Path(PathQuant::A, p) => path_without_path_quants(p),
        _ => false,
    }
}

fn path_without_path_quants(p: &PathFormula) -> bool {
    fn state(f: &StateFormula) -> bool {
        match f {
            StateFormula::Path(..) => false,
            StateFormula::Placeholder | StateFormula::ValuePlaceholder(_) => false,
            StateFormula::Not(a) | StateFormula::Flow(_, a) | StateFormula::Value(_, _, a) => {
                state(a)
            }
            StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
                state(a) && state(b)
            }
            _ => true,
        }
    }
    match p {
        PathFormula::State(s) => state(s),
        PathFormula::Yesterday(_) | PathFormula::Since(..) => false,
        PathFormula::Not(a)
        | PathFormula::Next(a)
        | PathFormula::Finally(a)
        | PathFormula::Globally(a) => path_without_path_quants(a),
        PathFormula::And(a, b)
        | PathFormula::Or(a, b)
        | PathFormula::Implies(a, b)
        | PathFormula::Until(a, b) => {
            path_without_path_quants(a) && path_without_path_quants(b)
        }
    }
}

fn exists_bfl1(f: &StateFormula) -> bool {
    matches!(f, StateFormula::Flow(FlowQuant::Ef, body) if flow_quantifier_free(body))
}

fn forall_bfl1(f: &StateFormula) -> bool {
    matches!(f, StateFormula::Flow(FlowQuant::Af, body) if flow_quantifier_free(body))
}

/// Bodies of singly-quantified formulas: the one flow quantifier at the root
/// must be the only one, but the body may otherwise use the full language,
/// positive path quantifiers and past operators included.
fn flow_quantifier_free(f: &StateFormula) -> bool {
    fn path(p: &PathFormula) -> bool {
        match p {
            PathFormula::State(s) => flow_quantifier_free(s),
            PathFormula::Not(a)
            | PathFormula::Next(a)
            | PathFormula::Finally(a)
            | PathFormula::Globally(a)
            | PathFormula::Yesterday(a) => path(a),
            PathFormula::And(a, b)
            | PathFormula::Or(a, b)
            | PathFormula::Implies(a, b)
            | PathFormula::Until(a, b)
            | PathFormula::Since(a, b) => path(a) && path(b),
        }
    }
    match f {
        StateFormula::True | StateFormula::False | StateFormula::Atom(_) => true,
        StateFormula::FlowProp(..) => true,
        StateFormula::Placeholder | StateFormula::ValuePlaceholder(_) => false,
        StateFormula::Flow(..) => false,
        StateFormula::Not(a) | StateFormula::Value(_, _, a) => flow_quantifier_free(a),
        StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
            flow_quantifier_free(a) && flow_quantifier_free(b)
        }
        StateFormula::Path(_, p) => path(p),
    }
}

fn exists_lfl1(f: &StateFormula) -> bool {
    single_quant_linear(f, FlowQuant::Ef)
}

fn forall_lfl1(f: &StateFormula) -> bool {
    single_quant_linear(f, FlowQuant::Af)
}

fn single_quant_linear(f: &StateFormula, q: FlowQuant) -> bool {
    match f {
        StateFormula::Flow(fq, body) if *fq == q => match body.as_ref() {
            StateFormula::Path(PathQuant::A, p) => path_is_flow_ltl(p),
            _ => false,
        },
        _ => false,
    }
}

fn boolean_over(f: &StateFormula, leaf: &dyn Fn(&StateFormula) -> bool) -> bool {
    if leaf(f) {
        return true;
    }
    match f {
        StateFormula::Not(a) => boolean_over(a, leaf),
        StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
            boolean_over(a, leaf) && boolean_over(b, leaf)
        }
        _ => false,
    }
}

fn bfl_state(f: &StateFormula) -> bool {
    match f {
        StateFormula::True | StateFormula::False | StateFormula::Atom(_) => true,
        StateFormula::FlowProp(_, e) => const_expr(e),
        StateFormula::Placeholder | StateFormula::ValuePlaceholder(_) => false,
        StateFormula::Not(a) => bfl_state(a),
        StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
            bfl_state(a) && bfl_state(b)
        }
        StateFormula::Flow(_, a) => bfl_state(a),
        StateFormula::Value(..) => false,
        StateFormula::Path(q, p) => !q.is_positive() && bfl_quantified_body(p),
    }
}

/// Directly under a path quantifier: at most one temporal operator, then
/// back to state formulas.
fn bfl_quantified_body(p: &PathFormula) -> bool {
    match p {
        PathFormula::Next(a) | PathFormula::Finally(a) | PathFormula::Globally(a) => {
            bfl_modal_free(a)
        }
        PathFormula::Until(a, b) => bfl_modal_free(a) && bfl_modal_free(b),
        PathFormula::Yesterday(_) | PathFormula::Since(..) => false,
        other => bfl_modal_free(other),
    }
}

fn bfl_modal_free(p: &PathFormula) -> bool {
    match p {
        PathFormula::State(s) => bfl_state(s),
        PathFormula::Not(a) => bfl_modal_free(a),
        PathFormula::And(a, b) | PathFormula::Or(a, b) | PathFormula::Implies(a, b) => {
            bfl_modal_free(a) && bfl_modal_free(b)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tag(text: &str) -> FragmentTag {
        classify_formula(&StateFormula::parse(text).unwrap())
    }

    #[test]
    fn linear_formulas_with_one_quantifier() {
        let t = tag("Af A (>= 10 -> X >= 4)");
        assert!(t.is_closed);
        assert!(t.is_lfl);
        assert!(t.is_forall_lfl1 && t.is_lfl1 && t.is_forall_bfl1 && t.is_bfl1);
        assert!(!t.is_exists_lfl1);
        // Hoisting makes the quantifier orders literally identical.
        assert_eq!(tag("A Af (>= 10 -> X >= 4)"), t);
        let t = tag("Ef A (= 6 & X X (= 2 | = 0) & X X X >= 1)");
        assert!(t.is_exists_lfl1 && t.is_closed);
    }

    #[test]
    fn open_formulas_are_flagged() {
        let t = tag(">= 5");
        assert!(!t.is_closed);
        assert!(t.is_flow_ctl_star && t.is_flow_ltl);
        assert!(!tag("Ef (= x & A X > 0)").is_closed);
        assert!(tag("forall x. Ef (= x & A X > 0)").is_closed);
        assert!(!tag("A G (req -> ?)").is_closed);
        assert!(!tag("Ef (>=? & p)").is_closed);
        // Positive path quantification needs a flow in scope.
        assert!(!tag("A+ X p").is_closed);
        assert!(tag("Ef (= 2 & A+ X p)").is_closed);
    }

    #[test]
    fn branching_fragment_requires_quantified_modalities() {
        assert!(tag("Ef (A X (p & > 0) & E (q U r))").is_bfl);
        assert!(!tag("Ef A (p U X q)").is_bfl);
        assert!(!tag("Ef A X X p").is_bfl);
        assert!(tag("Ef A X (E G p)").is_bfl);
    }

    #[test]
    fn conjunctive_level_matches_the_worked_example() {
        let t = tag("Af (< 10 -> E X <= 0) & Ef (15 & A X >= 1)");
        assert_eq!(t.cbfl_level, Some(1));
        assert!(t.is_bfl1);
        assert_eq!(tag("p & !q").cbfl_level, Some(0));
        assert_eq!(tag("Ef (A (p U q))").cbfl_level, None);
        // Nesting a quantified formula inside a body climbs one level.
        let t = tag("Ef (15 & A X (p & Ef (= 2 & A X > 0)))");
        assert_eq!(t.cbfl_level, Some(2));
        assert!(!t.is_bfl1, "nested flow quantifiers leave the single-level fragment");
    }

    #[test]
    fn extensions_leave_core_fragments() {
        assert!(!tag("Ef (= 2 & A+ X p)").is_flow_ctl_star);
        assert!(tag("A (p U q)").is_flow_ctl_star);
        assert!(!tag("A (p S q)").is_flow_ctl_star);
        assert!(!tag("Ef A (p U Y q)").is_lfl);
        assert!(tag("Ef A (p U Ef (>= 3))").is_lfl);
        assert!(!tag("Ef A (p U E X q)").is_lfl);
    }

    #[test]
    fn division_is_detected() {
        assert!(uses_div(&StateFormula::parse("forall x. Ef (>= x div 2)").unwrap()));
        assert!(!uses_div(&StateFormula::parse("forall x. Ef (>= x + 2)").unwrap()));
    }
}
