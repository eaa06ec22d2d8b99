//! Normalization into the conjunctive fragment.
//!
//! The conjunctive fragment restricts what a flow quantifier's body may say
//! so that it collapses into per-vertex interval constraints: a body is a
//! conjunction of parts `A n_1 .. n_k [G] xi` where each `n_j` is a strong
//! or weak next step and `xi` is a single flow proposition or a Boolean
//! observable. Weak steps arise from negating the strong `X` on finite
//! paths: `!X a` holds at the last position of a path, `X !a` does not.
//!
//! Normalization pushes negation to atoms (dualizing quantifiers),
//! eliminates implication, distributes universal path quantification and
//! next/globally over conjunction, splices nested universal chains
//! (`A X A X xi` into `A X X xi`), and collapses a strong next inside `G`
//! to false, since every target path is finite and `G` reaches its last
//! position. A disjunction confined to one path position stays a single
//! (set-valued) atom; anything relating different positions or paths
//! disjunctively is rejected with the offending subformula.
//!
//! Boolean-only subformulas never constrain the quantified flow: nested
//! flow-quantified formulas and flow-free path-quantified formulas become
//! per-vertex observables evaluated one level down, which is what the
//! hierarchy level counts.

use super::{FlowQuant, PathFormula, PathQuant, Rel, StateFormula, ValueExpr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CbflError {
    #[error("not conjunctive: `{0}` does not fit the conjunctive shape")]
    NotConjunctive(String),
}

/// Boolean combination over conjunctive leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CbflBool {
    Leaf(CbflLeaf),
    Not(Box<CbflBool>),
    And(Box<CbflBool>, Box<CbflBool>),
    Or(Box<CbflBool>, Box<CbflBool>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CbflLeaf {
    Const(bool),
    Atom(String),
    /// A flow proposition outside any flow quantifier. Such a formula is
    /// not closed, but it still has a place in the hierarchy.
    FlowProp(Rel, ValueExpr),
    Exists(CbflBody),
    /// Universal path quantification with no flow binder, kept in chain
    /// form so the same layer machinery applies. Unlike [`CbflLeaf::Exists`]
    /// it does not add a hierarchy level: no flow is being quantified.
    Paths(Vec<CbflConjunct>),
}

/// Existential flow quantifier over a conjunction of path constraints.
/// Universal quantifiers normalize to the negation of a dual body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CbflBody {
    pub quant: FlowQuant,
    pub conjuncts: Vec<CbflConjunct>,
}

/// One `A n_1 .. n_k [G] xi` part. `nexts[j]` is true for a strong step
/// (the position must exist) and false for a weak one (a path that ends
/// first satisfies the part vacuously).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CbflConjunct {
    pub nexts: Vec<bool>,
    pub globally: bool,
    pub atom: CbflAtom,
}

/// What a conjunct requires at its position: a Boolean combination of flow
/// propositions (over the quantified flow's value at that vertex) and
/// flow-independent observables. A single comparison pins the vertex to one
/// interval; disjunctions and negated equalities yield interval unions,
/// which the conjunctive engine resolves by branching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CbflAtom {
    Flow(Rel, ValueExpr),
    Bool(CbflProp),
    Not(Box<CbflAtom>),
    And(Box<CbflAtom>, Box<CbflAtom>),
    Or(Box<CbflAtom>, Box<CbflAtom>),
}

/// Per-vertex Boolean observable: atomic propositions and formulas whose
/// truth does not depend on the currently quantified flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CbflProp {
    Const(bool),
    Atom(String),
    Nested(Box<CbflBool>),
    Not(Box<CbflProp>),
    And(Box<CbflProp>, Box<CbflProp>),
    Or(Box<CbflProp>, Box<CbflProp>),
}

pub fn normalize_cbfl(f: &StateFormula) -> Result<CbflBool, CbflError> {
    top(f)
}

impl CbflBool {
    /// Height in the conjunctive hierarchy: propositional assertions are
    /// level 0, each flow quantification adds one above its deepest nested
    /// observable.
    pub fn level(&self) -> u32 {
        match self {
            CbflBool::Leaf(l) => l.level(),
            CbflBool::Not(a) => a.level(),
            CbflBool::And(a, b) | CbflBool::Or(a, b) => a.level().max(b.level()),
        }
    }

    /// Equivalent plain formula; useful for displaying normal forms and for
    /// cross-checking normalization against a general-purpose engine.
    pub fn to_formula(&self) -> StateFormula {
        match self {
            CbflBool::Leaf(l) => l.to_formula(),
            CbflBool::Not(a) => StateFormula::Not(Box::new(a.to_formula())),
            CbflBool::And(a, b) => {
                StateFormula::And(Box::new(a.to_formula()), Box::new(b.to_formula()))
            }
            CbflBool::Or(a, b) => {
                StateFormula::Or(Box::new(a.to_formula()), Box::new(b.to_formula()))
            }
        }
    }
}

impl CbflLeaf {
    fn level(&self) -> u32 {
        match self {
            CbflLeaf::Exists(b) => {
                1 + b.conjuncts.iter().map(|c| c.atom.level()).max().unwrap_or(0)
            }
            CbflLeaf::Paths(cs) => cs.iter().map(|c| c.atom.level()).max().unwrap_or(0),
            _ => 0,
        }
    }

    fn to_formula(&self) -> StateFormula {
        match self {
            CbflLeaf::Const(true) => StateFormula::True,
            CbflLeaf::Const(false) => StateFormula::False,
            CbflLeaf::Atom(p) => StateFormula::Atom(p.clone()),
            CbflLeaf::FlowProp(rel, e) => StateFormula::FlowProp(*rel, e.clone()),
            CbflLeaf::Exists(b) => b.to_formula(),
            CbflLeaf::Paths(cs) => conjunct_and(cs),
        }
    }
}

fn conjunct_and(cs: &[CbflConjunct]) -> StateFormula {
    let mut parts = cs.iter().map(|c| c.to_formula());
    match parts.next() {
        None => StateFormula::True,
        Some(first) => {
            parts.fold(first, |acc, p| StateFormula::And(Box::new(acc), Box::new(p)))
        }
    }
}

impl CbflBody {
    fn to_formula(&self) -> StateFormula {
        StateFormula::Flow(self.quant, Box::new(conjunct_and(&self.conjuncts)))
    }
}

impl CbflConjunct {
    fn to_formula(&self) -> StateFormula {
        let atom = self.atom.to_formula();
        if self.nexts.is_empty() && !self.globally {
            return atom;
        }
        let mut path = PathFormula::State(atom);
        if self.globally {
            path = PathFormula::Globally(Box::new(path));
        }
        for &strong in self.nexts.iter().rev() {
            path = if strong {
                PathFormula::Next(Box::new(path))
            } else {
                PathFormula::Not(Box::new(PathFormula::Next(Box::new(PathFormula::Not(
                    Box::new(path),
                )))))
            };
        }
        StateFormula::Path(PathQuant::A, Box::new(path))
    }
}

impl CbflAtom {
    fn level(&self) -> u32 {
        match self {
            CbflAtom::Flow(..) => 0,
            CbflAtom::Bool(p) => p.level(),
            CbflAtom::Not(a) => a.level(),
            CbflAtom::And(a, b) | CbflAtom::Or(a, b) => a.level().max(b.level()),
        }
    }

    fn to_formula(&self) -> StateFormula {
        match self {
            CbflAtom::Flow(rel, e) => StateFormula::FlowProp(*rel, e.clone()),
            CbflAtom::Bool(p) => p.to_formula(),
            CbflAtom::Not(a) => StateFormula::Not(Box::new(a.to_formula())),
            CbflAtom::And(a, b) => {
                StateFormula::And(Box::new(a.to_formula()), Box::new(b.to_formula()))
            }
            CbflAtom::Or(a, b) => {
                StateFormula::Or(Box::new(a.to_formula()), Box::new(b.to_formula()))
            }
        }
    }
}

impl CbflProp {
    fn level(&self) -> u32 {
        match self {
            CbflProp::Nested(b) => b.level(),
            CbflProp::Not(a) => a.level(),
            CbflProp::And(a, b) | CbflProp::Or(a, b) => a.level().max(b.level()),
            _ => 0,
        }
    }

    fn to_formula(&self) -> StateFormula {
        match self {
            CbflProp::Const(true) => StateFormula::True,
            CbflProp::Const(false) => StateFormula::False,
            CbflProp::Atom(p) => StateFormula::Atom(p.clone()),
            CbflProp::Nested(b) => b.to_formula(),
            CbflProp::Not(a) => StateFormula::Not(Box::new(a.to_formula())),
            CbflProp::And(a, b) => {
                StateFormula::And(Box::new(a.to_formula()), Box::new(b.to_formula()))
            }
            CbflProp::Or(a, b) => {
                StateFormula::Or(Box::new(a.to_formula()), Box::new(b.to_formula()))
            }
        }
    }
}

/// Path-level negation normal form. `WX` is the weak next; `E` never
/// appears because an existential quantifier over flow propositions is
/// rejected on sight. The flow literal keeps a negation flag solely for
/// `!(= n)`, the one comparison with no relational complement.
enum N {
    Lit(CbflProp),
    FlowLit(bool, Rel, ValueExpr),
    And(Box<N>, Box<N>),
    Or(Box<N>, Box<N>),
    A(Box<N>),
    X(Box<N>),
    Wx(Box<N>),
    G(Box<N>),
}

fn not_conjunctive<T>(offender: String) -> Result<T, CbflError> {
    Err(CbflError::NotConjunctive(offender))
}

fn rendered(neg: bool, node: &impl std::fmt::Display) -> String {
    if neg {
        format!("!({node})")
    } else {
        node.to_string()
    }
}

fn top(f: &StateFormula) -> Result<CbflBool, CbflError> {
    match f {
        StateFormula::True => Ok(CbflBool::Leaf(CbflLeaf::Const(true))),
        StateFormula::False => Ok(CbflBool::Leaf(CbflLeaf::Const(false))),
        StateFormula::Atom(p) => Ok(CbflBool::Leaf(CbflLeaf::Atom(p.clone()))),
        StateFormula::FlowProp(rel, e) => {
            Ok(CbflBool::Leaf(CbflLeaf::FlowProp(*rel, e.clone())))
        }
        StateFormula::Placeholder | StateFormula::ValuePlaceholder(_) => {
            not_conjunctive(f.to_string())
        }
        StateFormula::Not(a) => Ok(CbflBool::Not(Box::new(top(a)?))),
        StateFormula::And(a, b) => Ok(CbflBool::And(Box::new(top(a)?), Box::new(top(b)?))),
        StateFormula::Or(a, b) => Ok(CbflBool::Or(Box::new(top(a)?), Box::new(top(b)?))),
        StateFormula::Implies(a, b) => Ok(CbflBool::Or(
            Box::new(CbflBool::Not(Box::new(top(a)?))),
            Box::new(top(b)?),
        )),
        StateFormula::Value(..) => not_conjunctive(f.to_string()),
        StateFormula::Flow(q, body) => {
            if q.is_universal() {
                let body = make_body(q.dual(), body, true)?;
                Ok(CbflBool::Not(Box::new(CbflBool::Leaf(CbflLeaf::Exists(body)))))
            } else {
                Ok(CbflBool::Leaf(CbflLeaf::Exists(make_body(*q, body, false)?)))
            }
        }
        StateFormula::Path(q, p) => match q {
            PathQuant::APlus | PathQuant::EPlus => not_conjunctive(f.to_string()),
            PathQuant::A => {
                let conjuncts = body_conjuncts(N::A(Box::new(conv_path(p, false)?)))?;
                Ok(CbflBool::Leaf(CbflLeaf::Paths(conjuncts)))
            }
            PathQuant::E => {
                let conjuncts = body_conjuncts(N::A(Box::new(conv_path(p, true)?)))?;
                Ok(CbflBool::Not(Box::new(CbflBool::Leaf(CbflLeaf::Paths(conjuncts)))))
            }
        },
    }
}

fn make_body(
    quant: FlowQuant,
    body: &StateFormula,
    neg: bool,
) -> Result<CbflBody, CbflError> {
    let n = conv_state(body, neg)?;
    Ok(CbflBody { quant, conjuncts: body_conjuncts(n)? })
}

fn body_conjuncts(n: N) -> Result<Vec<CbflConjunct>, CbflError> {
    let mut out = Vec::new();
    chain(n, Vec::new(), false, &mut out)?;
    Ok(out)
}

fn conv_state(f: &StateFormula, neg: bool) -> Result<N, CbflError> {
    match f {
        StateFormula::True => Ok(N::Lit(CbflProp::Const(!neg))),
        StateFormula::False => Ok(N::Lit(CbflProp::Const(neg))),
        StateFormula::Atom(p) => {
            let lit = CbflProp::Atom(p.clone());
            Ok(N::Lit(if neg { CbflProp::Not(Box::new(lit)) } else { lit }))
        }
        StateFormula::FlowProp(rel, e) => {
            if neg {
                match rel.negate() {
                    Some(r) => Ok(N::FlowLit(false, r, e.clone())),
                    None => Ok(N::FlowLit(true, *rel, e.clone())),
                }
            } else {
                Ok(N::FlowLit(false, *rel, e.clone()))
            }
        }
        StateFormula::Placeholder | StateFormula::ValuePlaceholder(_) => {
            not_conjunctive(rendered(neg, f))
        }
        StateFormula::Not(a) => conv_state(a, !neg),
        StateFormula::And(a, b) => {
            let (x, y) = (conv_state(a, neg)?, conv_state(b, neg)?);
            Ok(if neg { N::Or(Box::new(x), Box::new(y)) } else { N::And(Box::new(x), Box::new(y)) })
        }
        StateFormula::Or(a, b) => {
            let (x, y) = (conv_state(a, neg)?, conv_state(b, neg)?);
            Ok(if neg { N::And(Box::new(x), Box::new(y)) } else { N::Or(Box::new(x), Box::new(y)) })
        }
        StateFormula::Implies(a, b) => {
            let (x, y) = (conv_state(a, !neg)?, conv_state(b, neg)?);
            Ok(if neg { N::And(Box::new(x), Box::new(y)) } else { N::Or(Box::new(x), Box::new(y)) })
        }
        StateFormula::Flow(..) => {
            let inner = top(f)?;
            let lit = CbflProp::Nested(Box::new(inner));
            Ok(N::Lit(if neg { CbflProp::Not(Box::new(lit)) } else { lit }))
        }
        StateFormula::Value(..) => not_conjunctive(rendered(neg, f)),
        StateFormula::Path(q, p) => {
            if q.is_positive() {
                return not_conjunctive(rendered(neg, f));
            }
            if !constrains_flow(f) {
                let inner = top(f)?;
                let lit = CbflProp::Nested(Box::new(inner));
                return Ok(N::Lit(if neg { CbflProp::Not(Box::new(lit)) } else { lit }));
            }
            let universal = (*q == PathQuant::A) != neg;
            if universal {
                Ok(N::A(Box::new(conv_path(p, neg)?)))
            } else {
                // An existential path quantifier over the current flow's
                // propositions relates them disjunctively across paths.
                not_conjunctive(rendered(neg, f))
            }
        }
    }
}

fn conv_path(p: &PathFormula, neg: bool) -> Result<N, CbflError> {
    match p {
        PathFormula::State(s) => conv_state(s, neg),
        PathFormula::Not(a) => conv_path(a, !neg),
        PathFormula::And(a, b) => {
            let (x, y) = (conv_path(a, neg)?, conv_path(b, neg)?);
            Ok(if neg { N::Or(Box::new(x), Box::new(y)) } else { N::And(Box::new(x), Box::new(y)) })
        }
        PathFormula::Or(a, b) => {
            let (x, y) = (conv_path(a, neg)?, conv_path(b, neg)?);
            Ok(if neg { N::And(Box::new(x), Box::new(y)) } else { N::Or(Box::new(x), Box::new(y)) })
        }
        PathFormula::Implies(a, b) => {
            let (x, y) = (conv_path(a, !neg)?, conv_path(b, neg)?);
            Ok(if neg { N::And(Box::new(x), Box::new(y)) } else { N::Or(Box::new(x), Box::new(y)) })
        }
        PathFormula::Next(a) => {
            let inner = conv_path(a, neg)?;
            Ok(if neg { N::Wx(Box::new(inner)) } else { N::X(Box::new(inner)) })
        }
        PathFormula::Finally(a) => {
            if neg {
                Ok(N::G(Box::new(conv_path(a, true)?)))
            } else {
                // `F` is a disjunction over positions.
                not_conjunctive(rendered(false, p))
            }
        }
        PathFormula::Globally(a) => {
            if neg {
                not_conjunctive(rendered(true, p))
            } else {
                Ok(N::G(Box::new(conv_path(a, false)?)))
            }
        }
        PathFormula::Until(..) | PathFormula::Since(..) | PathFormula::Yesterday(_) => {
            not_conjunctive(rendered(neg, p))
        }
    }
}

/// Whether the formula contains a flow proposition governed by the
/// enclosing flow quantifier (as opposed to one bound deeper inside).
fn constrains_flow(f: &StateFormula) -> bool {
    fn state(f: &StateFormula) -> bool {
        match f {
            StateFormula::FlowProp(..) | StateFormula::ValuePlaceholder(_) => true,
            StateFormula::Flow(..) => false,
            StateFormula::Not(a) | StateFormula::Value(_, _, a) => state(a),
            StateFormula::And(a, b)
            | StateFormula::Or(a, b)
            | StateFormula::Implies(a, b) => state(a) || state(b),
            StateFormula::Path(_, p) => path(p),
            _ => false,
        }
    }
    fn path(p: &PathFormula) -> bool {
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
            | PathFormula::Since(a, b) => path(a) || path(b),
        }
    }
    state(f)
}

fn chain(
    n: N,
    nexts: Vec<bool>,
    in_g: bool,
    out: &mut Vec<CbflConjunct>,
) -> Result<(), CbflError> {
    match n {
        N::And(a, b) => {
            chain(*a, nexts.clone(), in_g, out)?;
            chain(*b, nexts, in_g, out)?;
            Ok(())
        }
        N::Lit(p) => {
            out.push(CbflConjunct { nexts, globally: in_g, atom: CbflAtom::Bool(p) });
            Ok(())
        }
        N::FlowLit(neg, rel, e) => {
            let atom = CbflAtom::Flow(rel, e);
            let atom = if neg { CbflAtom::Not(Box::new(atom)) } else { atom };
            out.push(CbflConjunct { nexts, globally: in_g, atom });
            Ok(())
        }
        N::X(a) => {
            if in_g {
                // Every target path is finite and `G` covers the last
                // position, where a strong next fails.
                out.push(CbflConjunct {
                    nexts,
                    globally: false,
                    atom: CbflAtom::Bool(CbflProp::Const(false)),
                });
                Ok(())
            } else {
                let mut nexts = nexts;
                nexts.push(true);
                chain(*a, nexts, false, out)
            }
        }
        N::Wx(a) => {
            // Under `G` this uses G (WX xi) = WX (G xi).
            let mut nexts = nexts;
            nexts.push(false);
            chain(*a, nexts, in_g, out)
        }
        N::G(a) => chain(*a, nexts, true, out),
        // A nested universal chain continues the current one: the suffixes
        // of target paths through position k are exactly the target paths
        // of the vertex reached there.
        N::A(a) => chain(*a, nexts, in_g, out),
        N::Or(a, b) => {
            let node = N::Or(a, b);
            match atom_only(&node) {
                Some(atom) => {
                    out.push(CbflConjunct { nexts, globally: in_g, atom });
                    Ok(())
                }
                // The branches disagree past this position, so no
                // per-vertex requirement captures the disjunction.
                None => not_conjunctive(render_n(&node)),
            }
        }
    }
}

/// The node as a single-position atom, when it involves no further
/// temporal structure.
fn atom_only(n: &N) -> Option<CbflAtom> {
    match n {
        N::Lit(p) => Some(CbflAtom::Bool(p.clone())),
        N::FlowLit(neg, rel, e) => {
            let atom = CbflAtom::Flow(*rel, e.clone());
            Some(if *neg { CbflAtom::Not(Box::new(atom)) } else { atom })
        }
        N::And(a, b) => Some(CbflAtom::And(Box::new(atom_only(a)?), Box::new(atom_only(b)?))),
        N::Or(a, b) => Some(CbflAtom::Or(Box::new(atom_only(a)?), Box::new(atom_only(b)?))),
        _ => None,
    }
}

fn render_n(n: &N) -> String {
    match n {
        N::Lit(p) => p.to_formula().to_string(),
        N::FlowLit(false, rel, e) => format!("{rel} {e}"),
        N::FlowLit(true, rel, e) => format!("!({rel} {e})"),
        N::And(a, b) => format!("({} & {})", render_n(a), render_n(b)),
        N::Or(a, b) => format!("({} | {})", render_n(a), render_n(b)),
        N::A(a) => format!("A {}", render_n(a)),
        N::X(a) => format!("X {}", render_n(a)),
        N::Wx(a) => format!("!X !{}", render_n(a)),
        N::G(a) => format!("G {}", render_n(a)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(text: &str) -> Result<CbflBool, CbflError> {
        normalize_cbfl(&StateFormula::parse(text).unwrap())
    }

    fn body(nf: &CbflBool) -> &CbflBody {
        match nf {
            CbflBool::Leaf(CbflLeaf::Exists(b)) => b,
            CbflBool::Not(inner) => body(inner),
            other => panic!("expected a quantified leaf, got {other:?}"),
        }
    }

    #[test]
    fn conjunction_distributes_over_next_and_globally() {
        let nf = norm("Ef (A X (p & > 5) & A G <= 8)").unwrap();
        let b = body(&nf);
        assert_eq!(b.quant, FlowQuant::Ef);
        assert_eq!(b.conjuncts.len(), 3);
        assert_eq!(b.conjuncts[0].nexts, vec![true]);
        assert_eq!(b.conjuncts[0].atom, CbflAtom::Bool(CbflProp::Atom("p".into())));
        assert_eq!(
            b.conjuncts[1].atom,
            CbflAtom::Flow(Rel::Gt, ValueExpr::Const(5))
        );
        assert!(b.conjuncts[2].globally);
        assert_eq!(
            nf.to_formula().to_string(),
            "Ef (A X p & A X > 5 & A G <= 8)"
        );
    }

    #[test]
    fn until_is_rejected_with_the_offender() {
        let e = norm("Ef (A (p U q))").unwrap_err();
        assert!(e.to_string().contains("p U q"), "{e}");
        let e = norm("Ef (A (X > 1 | X X > 2))").unwrap_err();
        assert!(e.to_string().contains("|"), "{e}");
        let e = norm("Ef (E X > 0)").unwrap_err();
        assert!(e.to_string().contains("E X > 0"), "{e}");
        let e = norm("Ef (A F > 0)").unwrap_err();
        assert!(e.to_string().contains("F > 0"), "{e}");
    }

    #[test]
    fn position_local_disjunctions_become_set_atoms() {
        let nf = norm("Ef (= 6 & A X X (= 2 | = 0) & A X X X >= 1)").unwrap();
        let b = body(&nf);
        assert_eq!(b.conjuncts.len(), 3);
        assert_eq!(b.conjuncts[1].nexts, vec![true, true]);
        assert_eq!(
            b.conjuncts[1].atom,
            CbflAtom::Or(
                Box::new(CbflAtom::Flow(Rel::Eq, ValueExpr::Const(2))),
                Box::new(CbflAtom::Flow(Rel::Eq, ValueExpr::Const(0))),
            )
        );
        assert_eq!(
            nf.to_formula().to_string(),
            "Ef (= 6 & A X X (= 2 | = 0) & A X X X >= 1)"
        );

        let nf = norm("Ef (!(= 3))").unwrap();
        let b = body(&nf);
        assert_eq!(
            b.conjuncts[0].atom,
            CbflAtom::Not(Box::new(CbflAtom::Flow(Rel::Eq, ValueExpr::Const(3))))
        );

        // Mixing an observable into the position's requirement is fine.
        let nf = norm("Ef (A X (p | > 5))").unwrap();
        let b = body(&nf);
        assert_eq!(b.conjuncts.len(), 1);
        assert_eq!(
            b.conjuncts[0].atom,
            CbflAtom::Or(
                Box::new(CbflAtom::Bool(CbflProp::Atom("p".into()))),
                Box::new(CbflAtom::Flow(Rel::Gt, ValueExpr::Const(5))),
            )
        );
        assert_eq!(nf.level(), 1);
    }

    #[test]
    fn nested_universal_chains_splice() {
        let nf = norm("Ef (A X A X > 3)").unwrap();
        let b = body(&nf);
        assert_eq!(b.conjuncts.len(), 1);
        assert_eq!(b.conjuncts[0].nexts, vec![true, true]);
        assert!(!b.conjuncts[0].globally);
        assert_eq!(nf.to_formula().to_string(), "Ef A X X > 3");
        let nf = norm("Ef (A X G (A G (> 1)))").unwrap();
        let b = body(&nf);
        assert_eq!(b.conjuncts.len(), 1);
        assert_eq!(b.conjuncts[0].nexts, vec![true]);
        assert!(b.conjuncts[0].globally);
    }

    #[test]
    fn strong_next_inside_globally_is_false() {
        let nf = norm("Ef (A G X > 0)").unwrap();
        let b = body(&nf);
        assert_eq!(b.conjuncts.len(), 1);
        assert_eq!(b.conjuncts[0].atom, CbflAtom::Bool(CbflProp::Const(false)));
        assert!(!b.conjuncts[0].globally);
        assert_eq!(nf.to_formula().to_string(), "Ef false");
    }

    #[test]
    fn universal_quantifiers_dualize() {
        let nf = norm("Af (< 10 -> E X <= 0)").unwrap();
        let CbflBool::Not(inner) = &nf else { panic!("{nf:?}") };
        let CbflBool::Leaf(CbflLeaf::Exists(b)) = inner.as_ref() else { panic!("{nf:?}") };
        assert_eq!(b.quant, FlowQuant::Ef);
        assert_eq!(b.conjuncts.len(), 2);
        assert_eq!(b.conjuncts[0].atom, CbflAtom::Flow(Rel::Lt, ValueExpr::Const(10)));
        assert_eq!(b.conjuncts[0].nexts, Vec::<bool>::new());
        // The negated existential next becomes one weak step.
        assert_eq!(b.conjuncts[1].nexts, vec![false]);
        assert_eq!(b.conjuncts[1].atom, CbflAtom::Flow(Rel::Gt, ValueExpr::Const(0)));
        assert_eq!(nf.to_formula().to_string(), "!Ef (< 10 & A !X !> 0)");
    }

    #[test]
    fn flow_free_quantified_parts_become_observables() {
        let nf = norm("Ef (15 & E X p)").unwrap();
        let b = body(&nf);
        assert_eq!(b.conjuncts.len(), 2);
        let CbflAtom::Bool(CbflProp::Nested(nested)) = &b.conjuncts[1].atom else {
            panic!("{b:?}");
        };
        // The flow-free `E X p` quantifies no flow, so it stays level 0.
        assert_eq!(nested.level(), 0);
        assert!(matches!(
            nested.as_ref(),
            CbflBool::Not(inner) if matches!(inner.as_ref(), CbflBool::Leaf(CbflLeaf::Paths(_)))
        ));
        assert_eq!(nf.level(), 1);
    }

    #[test]
    fn max_quantifiers_keep_their_kind() {
        let nf = norm("AfMax (E X < 1)").unwrap();
        let CbflBool::Not(inner) = &nf else { panic!("{nf:?}") };
        let CbflBool::Leaf(CbflLeaf::Exists(b)) = inner.as_ref() else { panic!("{nf:?}") };
        assert_eq!(b.quant, FlowQuant::EfMax);
        assert_eq!(b.conjuncts[0].nexts, vec![false]);
        assert_eq!(b.conjuncts[0].atom, CbflAtom::Flow(Rel::Ge, ValueExpr::Const(1)));
        // Dualizing `A X >= 1` yields an existential over a flow
        // proposition, which the fragment cannot express.
        assert!(norm("AfMax (A X >= 1)").is_err());
    }

    #[test]
    fn top_level_boolean_structure_is_preserved() {
        let nf = norm("Af (< 10 -> E X <= 0) & Ef (15 & A X >= 1)").unwrap();
        assert!(matches!(nf, CbflBool::And(..)));
        assert_eq!(nf.level(), 1);
        let nf = norm("p & !q").unwrap();
        assert_eq!(nf.level(), 0);
    }
}
