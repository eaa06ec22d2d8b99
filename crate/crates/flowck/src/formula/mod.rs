//! Formula syntax for branching flow logics: the state/path AST, a
//! recursive-descent parser, a printer whose output reparses to the same
//! tree, fragment classification, substitution, the positive-path rewrite,
//! and normalization into the conjunctive fragment.
//!
//! State formulas live at vertices, path formulas along target paths. Flow
//! propositions compare the through-flow at the current vertex against a
//! value expression; `X` is strong (false at the last position of a path).

mod cbfl;
mod classify;
mod parse;
mod transform;

pub use cbfl::{
    normalize_cbfl, CbflAtom, CbflBody, CbflBool, CbflConjunct, CbflError, CbflLeaf, CbflProp,
};
pub use classify::{classify_formula, uses_div, FragmentTag};
pub use parse::ParseError;
pub use transform::{rewrite_positive_quantifiers, substitute, SubstError, SubstTarget};

use std::fmt;
use std::str::FromStr;

/// Comparison relation of a flow proposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
}

impl Rel {
    /// Relation holding exactly when `self` does not.
    pub fn negate(self) -> Option<Rel> {
        match self {
            Rel::Gt => Some(Rel::Le),
            Rel::Ge => Some(Rel::Lt),
            Rel::Lt => Some(Rel::Ge),
            Rel::Le => Some(Rel::Gt),
            Rel::Eq => None,
        }
    }

    pub fn holds_int(self, value: u64, threshold: u64) -> bool {
        match self {
            Rel::Gt => value > threshold,
            Rel::Ge => value >= threshold,
            Rel::Lt => value < threshold,
            Rel::Le => value <= threshold,
            Rel::Eq => value == threshold,
        }
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Gt => ">",
            Rel::Ge => ">=",
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
        })
    }
}

/// Value expression compared against through-flow. Subtraction exists only
/// in the `gmax - k` idiom and clamps at zero, keeping values in the
/// naturals; `div` is floor division by a positive literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValueExpr {
    Const(u64),
    Var(String),
    GammaMax,
    GmaxMinus(u64),
    Add(Box<ValueExpr>, Box<ValueExpr>),
    Mul(Box<ValueExpr>, Box<ValueExpr>),
    Div(Box<ValueExpr>, u64),
}

impl ValueExpr {
    /// Value of a fully folded expression.
    pub fn const_value(&self) -> Option<u64> {
        match self {
            ValueExpr::Const(n) => Some(*n),
            _ => None,
        }
    }

    /// Fold constant subtrees bottom-up. Arithmetic saturates: thresholds
    /// beyond any capacity sum compare identically.
    pub fn fold(&self) -> ValueExpr {
        match self {
            ValueExpr::Add(a, b) => match (a.fold(), b.fold()) {
                (ValueExpr::Const(x), ValueExpr::Const(y)) => ValueExpr::Const(x.saturating_add(y)),
                (a, b) => ValueExpr::Add(Box::new(a), Box::new(b)),
            },
            ValueExpr::Mul(a, b) => match (a.fold(), b.fold()) {
                (ValueExpr::Const(x), ValueExpr::Const(y)) => ValueExpr::Const(x.saturating_mul(y)),
                (a, b) => ValueExpr::Mul(Box::new(a), Box::new(b)),
            },
            ValueExpr::Div(a, d) => match a.fold() {
                ValueExpr::Const(x) => ValueExpr::Const(x / d),
                a => ValueExpr::Div(Box::new(a), *d),
            },
            other => other.clone(),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            ValueExpr::Add(..) | ValueExpr::GmaxMinus(_) => 0,
            ValueExpr::Mul(..) | ValueExpr::Div(..) => 1,
            _ => 2,
        }
    }

    fn fmt_prec(&self, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parens = self.prec() < min;
        if parens {
            f.write_str("(")?;
        }
        match self {
            ValueExpr::Const(n) => write!(f, "{n}")?,
            ValueExpr::Var(x) => f.write_str(x)?,
            ValueExpr::GammaMax => f.write_str("gmax")?,
            ValueExpr::GmaxMinus(k) => write!(f, "gmax - {k}")?,
            ValueExpr::Add(a, b) => {
                a.fmt_prec(0, f)?;
                f.write_str(" + ")?;
                b.fmt_prec(1, f)?;
            }
            ValueExpr::Mul(a, b) => {
                a.fmt_prec(1, f)?;
                f.write_str(" * ")?;
                b.fmt_prec(2, f)?;
            }
            ValueExpr::Div(a, d) => {
                a.fmt_prec(1, f)?;
                write!(f, " div {d}")?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ValueExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(0, f)
    }
}

/// Path quantifier. The positive variants range only over paths on which
/// every traversed edge carries nonzero flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathQuant {
    A,
    E,
    APlus,
    EPlus,
}

impl PathQuant {
    pub fn is_universal(self) -> bool {
        matches!(self, PathQuant::A | PathQuant::APlus)
    }

    pub fn is_positive(self) -> bool {
        matches!(self, PathQuant::APlus | PathQuant::EPlus)
    }

    pub fn dual(self) -> PathQuant {
        match self {
            PathQuant::A => PathQuant::E,
            PathQuant::E => PathQuant::A,
            PathQuant::APlus => PathQuant::EPlus,
            PathQuant::EPlus => PathQuant::APlus,
        }
    }
}

impl fmt::Display for PathQuant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathQuant::A => "A",
            PathQuant::E => "E",
            PathQuant::APlus => "A+",
            PathQuant::EPlus => "E+",
        })
    }
}

/// Flow quantifier: universal or existential, over integral flows, integral
/// flows of maximal value, or real-valued flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlowQuant {
    Af,
    Ef,
    AfMax,
    EfMax,
    AfR,
    EfR,
}

impl FlowQuant {
    pub fn is_universal(self) -> bool {
        matches!(self, FlowQuant::Af | FlowQuant::AfMax | FlowQuant::AfR)
    }

    pub fn dual(self) -> FlowQuant {
        match self {
            FlowQuant::Af => FlowQuant::Ef,
            FlowQuant::Ef => FlowQuant::Af,
            FlowQuant::AfMax => FlowQuant::EfMax,
            FlowQuant::EfMax => FlowQuant::AfMax,
            FlowQuant::AfR => FlowQuant::EfR,
            FlowQuant::EfR => FlowQuant::AfR,
        }
    }

    /// Whether the quantifier binds `gmax` in its body.
    pub fn binds_gmax(self) -> bool {
        matches!(self, FlowQuant::AfMax | FlowQuant::EfMax)
    }

    pub fn over_reals(self) -> bool {
        matches!(self, FlowQuant::AfR | FlowQuant::EfR)
    }
}

impl fmt::Display for FlowQuant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowQuant::Af => "Af",
            FlowQuant::Ef => "Ef",
            FlowQuant::AfMax => "AfMax",
            FlowQuant::EfMax => "EfMax",
            FlowQuant::AfR => "AfR",
            FlowQuant::EfR => "EfR",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueQuant {
    Forall,
    Exists,
}

impl fmt::Display for ValueQuant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueQuant::Forall => "forall",
            ValueQuant::Exists => "exists",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StateFormula {
    True,
    False,
    Atom(String),
    FlowProp(Rel, ValueExpr),
    /// `?`: hole standing for an unknown state formula in a query.
    Placeholder,
    /// `>?` and friends: flow proposition with an unknown threshold.
    ValuePlaceholder(Rel),
    Not(Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    Or(Box<StateFormula>, Box<StateFormula>),
    Implies(Box<StateFormula>, Box<StateFormula>),
    Path(PathQuant, Box<PathFormula>),
    Flow(FlowQuant, Box<StateFormula>),
    Value(ValueQuant, String, Box<StateFormula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathFormula {
    State(StateFormula),
    Not(Box<PathFormula>),
    And(Box<PathFormula>, Box<PathFormula>),
    Or(Box<PathFormula>, Box<PathFormula>),
    Implies(Box<PathFormula>, Box<PathFormula>),
    Next(Box<PathFormula>),
    Finally(Box<PathFormula>),
    Globally(Box<PathFormula>),
    Yesterday(Box<PathFormula>),
    Until(Box<PathFormula>, Box<PathFormula>),
    Since(Box<PathFormula>, Box<PathFormula>),
}

impl StateFormula {
    pub fn parse(text: &str) -> Result<StateFormula, ParseError> {
        parse::parse_state(text)
    }

    /// Logical negation, boxed.
    pub fn negated(self) -> StateFormula {
        StateFormula::Not(Box::new(self))
    }
}

impl PathFormula {
    pub fn parse(text: &str) -> Result<PathFormula, ParseError> {
        parse::parse_path(text)
    }
}

impl FromStr for StateFormula {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StateFormula::parse(s)
    }
}

impl FromStr for PathFormula {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PathFormula::parse(s)
    }
}

// Printing precedence. State: -> 0, | 1, & 2, unary 3. Path additionally
// puts U/S between & and unary: -> 0, | 1, & 2, U/S 3, unary 4.
const S_IMPL: u8 = 0;
const S_OR: u8 = 1;
const S_AND: u8 = 2;
const S_UNARY: u8 = 3;
const P_UNTIL: u8 = 3;
const P_UNARY: u8 = 4;

impl StateFormula {
    fn prec(&self) -> u8 {
        match self {
            StateFormula::Implies(..) => S_IMPL,
            StateFormula::Or(..) => S_OR,
            StateFormula::And(..) => S_AND,
            _ => S_UNARY,
        }
    }

    fn fmt_prec(&self, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parens = self.prec() < min;
        if parens {
            f.write_str("(")?;
        }
        match self {
            StateFormula::True => f.write_str("true")?,
            StateFormula::False => f.write_str("false")?,
            StateFormula::Atom(p) => f.write_str(p)?,
            StateFormula::FlowProp(rel, e) => write!(f, "{rel} {e}")?,
            StateFormula::Placeholder => f.write_str("?")?,
            StateFormula::ValuePlaceholder(rel) => write!(f, "{rel}?")?,
            StateFormula::Not(a) => {
                f.write_str("!")?;
                a.fmt_prec(S_UNARY, f)?;
            }
            StateFormula::And(a, b) => {
                a.fmt_prec(S_AND, f)?;
                f.write_str(" & ")?;
                b.fmt_prec(S_AND + 1, f)?;
            }
            StateFormula::Or(a, b) => {
                a.fmt_prec(S_OR, f)?;
                f.write_str(" | ")?;
                b.fmt_prec(S_OR + 1, f)?;
            }
            StateFormula::Implies(a, b) => {
                a.fmt_prec(S_IMPL + 1, f)?;
                f.write_str(" -> ")?;
                b.fmt_prec(S_IMPL, f)?;
            }
            StateFormula::Path(q, body) => {
                write!(f, "{q} ")?;
                // A path operand that is itself a matching-parity flow
                // quantifier would be hoisted on reparse; parenthesize so
                // the printed text reparses to this very tree.
                let needs_guard = matches!(
                    body.as_ref(),
                    PathFormula::State(StateFormula::Flow(fq, _))
                        if fq.is_universal() == q.is_universal() && !q.is_positive()
                );
                if needs_guard {
                    f.write_str("(")?;
                    body.fmt_prec(0, f)?;
                    f.write_str(")")?;
                } else {
                    body.fmt_prec(P_UNARY, f)?;
                }
            }
            StateFormula::Flow(q, body) => {
                write!(f, "{q} ")?;
                body.fmt_prec(S_UNARY, f)?;
            }
            StateFormula::Value(q, x, body) => {
                write!(f, "{q} {x}. ")?;
                body.fmt_prec(S_UNARY, f)?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl PathFormula {
    fn prec(&self) -> u8 {
        match self {
            PathFormula::Implies(..) => S_IMPL,
            PathFormula::Or(..) => S_OR,
            PathFormula::And(..) => S_AND,
            PathFormula::Until(..) | PathFormula::Since(..) => P_UNTIL,
            PathFormula::State(s) => s.prec().min(P_UNTIL),
            _ => P_UNARY,
        }
    }

    fn fmt_prec(&self, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let PathFormula::State(s) = self {
            // State connectives share the path levels up to &; a state
            // formula below the U threshold needs its own parentheses.
            return s.fmt_prec(min.min(S_UNARY), f);
        }
        let parens = self.prec() < min;
        if parens {
            f.write_str("(")?;
        }
        match self {
            PathFormula::State(_) => unreachable!(),
            PathFormula::Not(a) => {
                f.write_str("!")?;
                a.fmt_prec(P_UNARY, f)?;
            }
            PathFormula::And(a, b) => {
                a.fmt_prec(S_AND, f)?;
                f.write_str(" & ")?;
                b.fmt_prec(S_AND + 1, f)?;
            }
            PathFormula::Or(a, b) => {
                a.fmt_prec(S_OR, f)?;
                f.write_str(" | ")?;
                b.fmt_prec(S_OR + 1, f)?;
            }
            PathFormula::Implies(a, b) => {
                a.fmt_prec(S_IMPL + 1, f)?;
                f.write_str(" -> ")?;
                b.fmt_prec(S_IMPL, f)?;
            }
            PathFormula::Next(a) => {
                f.write_str("X ")?;
                a.fmt_prec(P_UNARY, f)?;
            }
            PathFormula::Finally(a) => {
                f.write_str("F ")?;
                a.fmt_prec(P_UNARY, f)?;
            }
            PathFormula::Globally(a) => {
                f.write_str("G ")?;
                a.fmt_prec(P_UNARY, f)?;
            }
            PathFormula::Yesterday(a) => {
                f.write_str("Y ")?;
                a.fmt_prec(P_UNARY, f)?;
            }
            PathFormula::Until(a, b) => {
                a.fmt_prec(P_UNTIL + 1, f)?;
                f.write_str(" U ")?;
                b.fmt_prec(P_UNTIL, f)?;
            }
            PathFormula::Since(a, b) => {
                a.fmt_prec(P_UNTIL + 1, f)?;
                f.write_str(" S ")?;
                b.fmt_prec(P_UNTIL, f)?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(0, f)
    }
}

impl fmt::Display for PathFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(0, f)
    }
}
