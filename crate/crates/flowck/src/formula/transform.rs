//! Substitution and the positive-path rewrite.

use super::{PathFormula, PathQuant, Rel, StateFormula, ValueExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubstTarget<'a> {
    /// Replace a free value variable by a constant.
    Var(&'a str, u64),
    /// Replace `gmax` (and fold the `gmax - k` idiom, clamped at zero) by
    /// the network's maximal flow value.
    Gmax(u64),
    /// Fill every `>?`-style hole with a threshold, keeping its relation.
    ValueHole(u64),
    /// Fill every `?` hole with a state formula.
    PropHole(&'a StateFormula),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubstError {
    #[error("substitution target {0} does not occur free in the formula")]
    Unbound(String),
}

/// Substitute into all free occurrences of the target and constant-fold the
/// affected value expressions. Errors when nothing was replaced.
pub fn substitute(f: &StateFormula, target: &SubstTarget) -> Result<StateFormula, SubstError> {
    let mut hits = 0usize;
    let out = subst_state(f, target, false, &mut hits);
    if hits == 0 {
        let what = match target {
            SubstTarget::Var(x, _) => format!("variable `{x}`"),
            SubstTarget::Gmax(_) => "`gmax`".to_string(),
            SubstTarget::ValueHole(_) => "threshold placeholder".to_string(),
            SubstTarget::PropHole(_) => "`?`".to_string(),
        };
        return Err(SubstError::Unbound(what));
    }
    Ok(out)
}

fn subst_state(
    f: &StateFormula,
    target: &SubstTarget,
    shadowed: bool,
    hits: &mut usize,
) -> StateFormula {
    match f {
        StateFormula::True | StateFormula::False | StateFormula::Atom(_) => f.clone(),
        StateFormula::FlowProp(rel, e) => {
            StateFormula::FlowProp(*rel, subst_expr(e, target, shadowed, hits).fold())
        }
        StateFormula::Placeholder => match target {
            SubstTarget::PropHole(g) => {
                *hits += 1;
                (*g).clone()
            }
            _ => f.clone(),
        },
        StateFormula::ValuePlaceholder(rel) => match target {
            SubstTarget::ValueHole(v) => {
                *hits += 1;
                StateFormula::FlowProp(*rel, ValueExpr::Const(*v))
            }
            _ => f.clone(),
        },
        StateFormula::Not(a) => {
            StateFormula::Not(Box::new(subst_state(a, target, shadowed, hits)))
        }
        StateFormula::And(a, b) => StateFormula::And(
            Box::new(subst_state(a, target, shadowed, hits)),
            Box::new(subst_state(b, target, shadowed, hits)),
        ),
        StateFormula::Or(a, b) => StateFormula::Or(
            Box::new(subst_state(a, target, shadowed, hits)),
            Box::new(subst_state(b, target, shadowed, hits)),
        ),
        StateFormula::Implies(a, b) => StateFormula::Implies(
            Box::new(subst_state(a, target, shadowed, hits)),
            Box::new(subst_state(b, target, shadowed, hits)),
        ),
        StateFormula::Path(q, p) => {
            StateFormula::Path(*q, Box::new(subst_path(p, target, shadowed, hits)))
        }
        StateFormula::Flow(q, a) => {
            StateFormula::Flow(*q, Box::new(subst_state(a, target, shadowed, hits)))
        }
        StateFormula::Value(q, x, a) => {
            // An inner binder of the same name shadows the substitution.
            let shadowed =
                shadowed || matches!(target, SubstTarget::Var(y, _) if x == y);
            StateFormula::Value(*q, x.clone(), Box::new(subst_state(a, target, shadowed, hits)))
        }
    }
}

fn subst_path(
    p: &PathFormula,
    target: &SubstTarget,
    shadowed: bool,
    hits: &mut usize,
) -> PathFormula {
    use PathFormula::*;
    match p {
        State(s) => State(subst_state(s, target, shadowed, hits)),
        Not(a) => Not(Box::new(subst_path(a, target, shadowed, hits))),
        And(a, b) => And(
            Box::new(subst_path(a, target, shadowed, hits)),
            Box::new(subst_path(b, target, shadowed, hits)),
        ),
        Or(a, b) => Or(
            Box::new(subst_path(a, target, shadowed, hits)),
            Box::new(subst_path(b, target, shadowed, hits)),
        ),
        Implies(a, b) => Implies(
            Box::new(subst_path(a, target, shadowed, hits)),
            Box::new(subst_path(b, target, shadowed, hits)),
        ),
        Next(a) => Next(Box::new(subst_path(a, target, shadowed, hits))),
        Finally(a) => Finally(Box::new(subst_path(a, target, shadowed, hits))),
        Globally(a) => Globally(Box::new(subst_path(a, target, shadowed, hits))),
        Yesterday(a) => Yesterday(Box::new(subst_path(a, target, shadowed, hits))),
        Until(a, b) => Until(
            Box::new(subst_path(a, target, shadowed, hits)),
            Box::new(subst_path(b, target, shadowed, hits)),
        ),
        Since(a, b) => Since(
            Box::new(subst_path(a, target, shadowed, hits)),
            Box::new(subst_path(b, target, shadowed, hits)),
        ),
    }
}

fn subst_expr(
    e: &ValueExpr,
    target: &SubstTarget,
    shadowed: bool,
    hits: &mut usize,
) -> ValueExpr {
    match e {
        ValueExpr::Const(_) => e.clone(),
        ValueExpr::Var(x) => match target {
            SubstTarget::Var(y, v) if x == y && !shadowed => {
                *hits += 1;
                ValueExpr::Const(*v)
            }
            _ => e.clone(),
        },
        ValueExpr::GammaMax => match target {
            SubstTarget::Gmax(g) => {
                *hits += 1;
                ValueExpr::Const(*g)
            }
            _ => e.clone(),
        },
        ValueExpr::GmaxMinus(k) => match target {
            SubstTarget::Gmax(g) => {
                *hits += 1;
                // Flow values are nonnegative, so clamping keeps the
                // comparison equivalent.
                ValueExpr::Const(g.saturating_sub(*k))
            }
            _ => e.clone(),
        },
        ValueExpr::Add(a, b) => ValueExpr::Add(
            Box::new(subst_expr(a, target, shadowed, hits)),
            Box::new(subst_expr(b, target, shadowed, hits)),
        ),
        ValueExpr::Mul(a, b) => ValueExpr::Mul(
            Box::new(subst_expr(a, target, shadowed, hits)),
            Box::new(subst_expr(b, target, shadowed, hits)),
        ),
        ValueExpr::Div(a, d) => {
            ValueExpr::Div(Box::new(subst_expr(a, target, shadowed, hits)), *d)
        }
    }
}

/// Rewrite a formula for evaluation on the edge-refined network, where every
/// original edge passes through a fresh mid-vertex labeled `edge_prop`.
/// Positive path quantifiers become plain ones guarded by "every traversed
/// mid-vertex carries flow"; temporal operators are adjusted so that the
/// obligations of the original formula attach to original vertices only.
pub fn rewrite_positive_quantifiers(f: &StateFormula, edge_prop: &str) -> StateFormula {
    rw_state(f, edge_prop)
}

fn edge_atom(edge_prop: &str) -> PathFormula {
    PathFormula::State(StateFormula::Atom(edge_prop.to_string()))
}

fn rw_state(f: &StateFormula, edge: &str) -> StateFormula {
    match f {
        StateFormula::True
        | StateFormula::False
        | StateFormula::Atom(_)
        | StateFormula::FlowProp(..)
        | StateFormula::Placeholder
        | StateFormula::ValuePlaceholder(_) => f.clone(),
        StateFormula::Not(a) => StateFormula::Not(Box::new(rw_state(a, edge))),
        StateFormula::And(a, b) => StateFormula::And(
            Box::new(rw_state(a, edge)),
            Box::new(rw_state(b, edge)),
        ),
        StateFormula::Or(a, b) => StateFormula::Or(
            Box::new(rw_state(a, edge)),
            Box::new(rw_state(b, edge)),
        ),
        StateFormula::Implies(a, b) => StateFormula::Implies(
            Box::new(rw_state(a, edge)),
            Box::new(rw_state(b, edge)),
        ),
        StateFormula::Flow(q, a) => StateFormula::Flow(*q, Box::new(rw_state(a, edge))),
        StateFormula::Value(q, x, a) => {
            StateFormula::Value(*q, x.clone(), Box::new(rw_state(a, edge)))
        }
        StateFormula::Path(q, p) => {
            let body = rw_path(p, edge);
            // Paths on which flow travels: all mid-vertices along the path
            // carry nonzero flow.
            let positive = PathFormula::Globally(Box::new(PathFormula::Implies(
                Box::new(edge_atom(edge)),
                Box::new(PathFormula::State(StateFormula::FlowProp(
                    Rel::Gt,
                    ValueExpr::Const(0),
                ))),
            )));
            match q {
                PathQuant::A => StateFormula::Path(PathQuant::A, Box::new(body)),
                PathQuant::E => StateFormula::Path(PathQuant::E, Box::new(body)),
                PathQuant::APlus => StateFormula::Path(
                    PathQuant::A,
                    Box::new(PathFormula::Implies(Box::new(positive), Box::new(body))),
                ),
                PathQuant::EPlus => StateFormula::Path(
                    PathQuant::E,
                    Box::new(PathFormula::And(Box::new(positive), Box::new(body))),
                ),
            }
        }
    }
}

fn rw_path(p: &PathFormula, edge: &str) -> PathFormula {
    use PathFormula::*;
    match p {
        State(s) => State(rw_state(s, edge)),
        Not(a) => Not(Box::new(rw_path(a, edge))),
        And(a, b) => And(Box::new(rw_path(a, edge)), Box::new(rw_path(b, edge))),
        Or(a, b) => Or(Box::new(rw_path(a, edge)), Box::new(rw_path(b, edge))),
        Implies(a, b) => Implies(Box::new(rw_path(a, edge)), Box::new(rw_path(b, edge))),
        // A refined path alternates original and mid vertices, so one
        // original step is two refined ones.
        Next(a) => Next(Box::new(Next(Box::new(rw_path(a, edge))))),
        Yesterday(a) => Yesterday(Box::new(Yesterday(Box::new(rw_path(a, edge))))),
        Finally(a) => Finally(Box::new(And(
            Box::new(rw_path(a, edge)),
            Box::new(Not(Box::new(edge_atom(edge)))),
        ))),
        Globally(a) => Globally(Box::new(Or(
            Box::new(rw_path(a, edge)),
            Box::new(edge_atom(edge)),
        ))),
        Until(a, b) => Until(
            Box::new(Or(Box::new(rw_path(a, edge)), Box::new(edge_atom(edge)))),
            Box::new(And(
                Box::new(rw_path(b, edge)),
                Box::new(Not(Box::new(edge_atom(edge)))),
            )),
        ),
        Since(a, b) => Since(
            Box::new(Or(Box::new(rw_path(a, edge)), Box::new(edge_atom(edge)))),
            Box::new(And(
                Box::new(rw_path(b, edge)),
                Box::new(Not(Box::new(edge_atom(edge)))),
            )),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::super::StateFormula;
    use super::*;

    fn sub(text: &str, target: SubstTarget) -> String {
        substitute(&StateFormula::parse(text).unwrap(), &target)
            .unwrap()
            .to_string()
    }

    #[test]
    fn variable_substitution_folds_arithmetic() {
        assert_eq!(sub(">= x + 2", SubstTarget::Var("x", 3)), ">= 5");
        assert_eq!(sub(">= 2 * x + x", SubstTarget::Var("x", 4)), ">= 12");
        assert_eq!(sub(">= x div 2", SubstTarget::Var("x", 7)), ">= 3");
        assert_eq!(
            sub("Ef (= x & A X (>= x | !p))", SubstTarget::Var("x", 1)),
            "Ef (= 1 & A X (>= 1 | !p))"
        );
    }

    #[test]
    fn inner_binders_shadow() {
        let out = sub(
            "Ef (>= x) & exists x. Ef (= x)",
            SubstTarget::Var("x", 9),
        );
        assert_eq!(out, "Ef >= 9 & exists x. Ef = x");
    }

    #[test]
    fn gmax_substitution_clamps_at_zero() {
        assert_eq!(sub(">= gmax - 4", SubstTarget::Gmax(7)), ">= 3");
        assert_eq!(sub(">= gmax - 4", SubstTarget::Gmax(2)), ">= 0");
        assert_eq!(sub("< gmax * 2", SubstTarget::Gmax(3)), "< 6");
    }

    #[test]
    fn holes_are_filled() {
        let theta = StateFormula::parse(">= 3").unwrap();
        assert_eq!(
            sub("A G (req -> ?)", SubstTarget::PropHole(&theta)),
            "A G (req -> >= 3)"
        );
        assert_eq!(
            sub("Ef (>=? & A X > 0)", SubstTarget::ValueHole(5)),
            "Ef (>= 5 & A X > 0)"
        );
        let f = StateFormula::parse("Ef (>= 2)").unwrap();
        let e = substitute(&f, &SubstTarget::Var("x", 1)).unwrap_err();
        assert!(e.to_string().contains("`x`"), "{e}");
    }

    #[test]
    fn positive_quantifiers_become_guarded_plain_ones() {
        let f = StateFormula::parse("A+ X a").unwrap();
        let out = rewrite_positive_quantifiers(&f, "edge");
        assert_eq!(out.to_string(), "A (G (edge -> > 0) -> X X a)");
        let f = StateFormula::parse("E+ X a").unwrap();
        let out = rewrite_positive_quantifiers(&f, "edge");
        assert_eq!(out.to_string(), "E (G (edge -> > 0) & X X a)");
    }

    #[test]
    fn plain_quantifier_bodies_are_still_stretched() {
        let f = StateFormula::parse("A (p U q)").unwrap();
        let out = rewrite_positive_quantifiers(&f, "edge");
        assert_eq!(out.to_string(), "A ((p | edge) U (q & !edge))");
        let f = StateFormula::parse("E G p").unwrap();
        let out = rewrite_positive_quantifiers(&f, "edge");
        assert_eq!(out.to_string(), "E G (p | edge)");
        let f = StateFormula::parse("A F p").unwrap();
        let out = rewrite_positive_quantifiers(&f, "edge");
        assert_eq!(out.to_string(), "A F (p & !edge)");
        let f = StateFormula::parse("E (p S (q & Y r))").unwrap();
        let out = rewrite_positive_quantifiers(&f, "edge");
        assert_eq!(out.to_string(), "E ((p | edge) S (q & Y Y r & !edge))");
    }

    #[test]
    fn atoms_and_quantifier_nests_recurse() {
        let f = StateFormula::parse("Ef (= 2 & A X (A+ X a | E+ X b))").unwrap();
        let out = rewrite_positive_quantifiers(&f, "edge");
        assert_eq!(
            out.to_string(),
            "Ef (= 2 & A X X (A (G (edge -> > 0) -> X X a) | E (G (edge -> > 0) & X X b)))"
        );
    }
}
