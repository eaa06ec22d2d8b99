//! Recursive-descent parser for the formula grammar.
//!
//! Unary operators (negation, temporal prefixes, all quantifiers) bind
//! tightest and absorb a chain of unary operators plus one atom; `U`/`S`
//! are right-associative and bind above `&`, then `|`, then `->`.
//!
//! A flow quantifier directly under a path quantifier of the same parity
//! (`A Af ...`, `E Ef ...`) takes a path-formula operand and is hoisted:
//! `A Af psi` parses as `Af A psi`. Same-parity quantifiers commute, so the
//! reading is sound, and it is the only position where a flow quantifier
//! may govern a path formula. With opposite parity the operand is parsed as
//! an ordinary state formula, so temporal operators inside it are errors.

use super::{FlowQuant, PathFormula, PathQuant, Rel, StateFormula, ValueExpr, ValueQuant};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset of the offending token.
    pub pos: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "syntax error at offset {}: {}", self.pos, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    True,
    False,
    LPar,
    RPar,
    Dot,
    Amp,
    Pipe,
    Arrow,
    Bang,
    Question,
    Plus,
    Star,
    Minus,
    Rel(Rel),
    PathQ(PathQuant),
    FlowQ(FlowQuant),
    ValueQ(ValueQuant),
    Gmax,
    Div,
    Next,
    Finally,
    Globally,
    Yesterday,
    Until,
    Since,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &str {
        match self {
            Tok::Ident(_) | Tok::Int(_) => unreachable!(),
            Tok::True => "true",
            Tok::False => "false",
            Tok::LPar => "(",
            Tok::RPar => ")",
            Tok::Dot => ".",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::Arrow => "->",
            Tok::Bang => "!",
            Tok::Question => "?",
            Tok::Plus => "+",
            Tok::Star => "*",
            Tok::Minus => "-",
            Tok::Rel(Rel::Gt) => ">",
            Tok::Rel(Rel::Ge) => ">=",
            Tok::Rel(Rel::Lt) => "<",
            Tok::Rel(Rel::Le) => "<=",
            Tok::Rel(Rel::Eq) => "=",
            Tok::PathQ(PathQuant::A) => "A",
            Tok::PathQ(PathQuant::E) => "E",
            Tok::PathQ(PathQuant::APlus) => "A+",
            Tok::PathQ(PathQuant::EPlus) => "E+",
            Tok::FlowQ(FlowQuant::Af) => "Af",
            Tok::FlowQ(FlowQuant::Ef) => "Ef",
            Tok::FlowQ(FlowQuant::AfMax) => "AfMax",
            Tok::FlowQ(FlowQuant::EfMax) => "EfMax",
            Tok::FlowQ(FlowQuant::AfR) => "AfR",
            Tok::FlowQ(FlowQuant::EfR) => "EfR",
            Tok::ValueQ(ValueQuant::Forall) => "forall",
            Tok::ValueQ(ValueQuant::Exists) => "exists",
            Tok::Gmax => "gmax",
            Tok::Div => "div",
            Tok::Next => "X",
            Tok::Finally => "F",
            Tok::Globally => "G",
            Tok::Yesterday => "Y",
            Tok::Until => "U",
            Tok::Since => "S",
        }
    }
}

fn err<T>(pos: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { pos, message: message.into() })
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'(' => toks.push((Tok::LPar, start)),
            b')' => toks.push((Tok::RPar, start)),
            b'.' => toks.push((Tok::Dot, start)),
            b'&' => toks.push((Tok::Amp, start)),
            b'|' => toks.push((Tok::Pipe, start)),
            b'!' => toks.push((Tok::Bang, start)),
            b'?' => toks.push((Tok::Question, start)),
            b'+' => toks.push((Tok::Plus, start)),
            b'*' => toks.push((Tok::Star, start)),
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    i += 1;
                    toks.push((Tok::Arrow, start));
                } else {
                    toks.push((Tok::Minus, start));
                }
            }
            b'>' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    i += 1;
                    toks.push((Tok::Rel(Rel::Ge), start));
                } else {
                    toks.push((Tok::Rel(Rel::Gt), start));
                }
            }
            b'<' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    i += 1;
                    toks.push((Tok::Rel(Rel::Le), start));
                } else {
                    toks.push((Tok::Rel(Rel::Lt), start));
                }
            }
            b'=' => toks.push((Tok::Rel(Rel::Eq), start)),
            b'0'..=b'9' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let lit = &text[i..j];
                match lit.parse::<u64>() {
                    Ok(n) => toks.push((Tok::Int(n), start)),
                    Err(_) => return err(start, format!("integer literal `{lit}` is too large")),
                }
                i = j;
                continue;
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                let mut j = i;
                while j < bytes.len()
                    && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                let word = &text[i..j];
                let tok = match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "A" if bytes.get(j) == Some(&b'+') => {
                        j += 1;
                        Tok::PathQ(PathQuant::APlus)
                    }
                    "E" if bytes.get(j) == Some(&b'+') => {
                        j += 1;
                        Tok::PathQ(PathQuant::EPlus)
                    }
                    "A" => Tok::PathQ(PathQuant::A),
                    "E" => Tok::PathQ(PathQuant::E),
                    "Af" => Tok::FlowQ(FlowQuant::Af),
                    "Ef" => Tok::FlowQ(FlowQuant::Ef),
                    "AfMax" => Tok::FlowQ(FlowQuant::AfMax),
                    "EfMax" => Tok::FlowQ(FlowQuant::EfMax),
                    "AfR" => Tok::FlowQ(FlowQuant::AfR),
                    "EfR" => Tok::FlowQ(FlowQuant::EfR),
                    "forall" => Tok::ValueQ(ValueQuant::Forall),
                    "exists" => Tok::ValueQ(ValueQuant::Exists),
                    "gmax" => Tok::Gmax,
                    "div" => Tok::Div,
                    "X" => Tok::Next,
                    "F" => Tok::Finally,
                    "G" => Tok::Globally,
                    "Y" => Tok::Yesterday,
                    "U" => Tok::Until,
                    "S" => Tok::Since,
                    _ => Tok::Ident(word.to_string()),
                };
                toks.push((tok, start));
                i = j;
                continue;
            }
            _ => return err(start, format!("unexpected character `{}`", &text[i..i + 1])),
        }
        i += 1;
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |(_, p)| *p)
    }

    fn advance(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|(t, _)| t.clone());
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            let found = self
                .peek()
                .map_or("end of input".to_string(), |x| x.describe());
            err(self.pos(), format!("expected `{}`, found {found}", t.text()))
        }
    }

    fn state_implies(&mut self) -> Result<StateFormula, ParseError> {
        let lhs = self.state_or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.state_implies()?;
            Ok(StateFormula::Implies(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn state_or(&mut self) -> Result<StateFormula, ParseError> {
        let mut lhs = self.state_and()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.state_and()?;
            lhs = StateFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn state_and(&mut self) -> Result<StateFormula, ParseError> {
        let mut lhs = self.state_unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.state_unary()?;
            lhs = StateFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn state_unary(&mut self) -> Result<StateFormula, ParseError> {
        let pos = self.pos();
        let Some(tok) = self.advance() else {
            return err(pos, "expected a state formula, found end of input");
        };
        match tok {
            Tok::True => Ok(StateFormula::True),
            Tok::False => Ok(StateFormula::False),
            Tok::Question => Ok(StateFormula::Placeholder),
            Tok::Int(n) => Ok(StateFormula::FlowProp(Rel::Eq, ValueExpr::Const(n))),
            Tok::Ident(p) => Ok(StateFormula::Atom(p)),
            Tok::Bang => Ok(StateFormula::Not(Box::new(self.state_unary()?))),
            Tok::Rel(rel) => {
                if self.eat(&Tok::Question) {
                    Ok(StateFormula::ValuePlaceholder(rel))
                } else {
                    Ok(StateFormula::FlowProp(rel, self.expr()?))
                }
            }
            Tok::LPar => {
                let inner = self.state_implies()?;
                self.expect(Tok::RPar)?;
                Ok(inner)
            }
            Tok::ValueQ(q) => {
                let vpos = self.pos();
                let var = match self.advance() {
                    Some(Tok::Ident(x)) => x,
                    other => {
                        let found =
                            other.map_or("end of input".to_string(), |t| t.describe());
                        return err(vpos, format!("expected a variable name, found {found}"));
                    }
                };
                self.expect(Tok::Dot)?;
                let body = self.state_unary()?;
                Ok(StateFormula::Value(q, var, Box::new(body)))
            }
            Tok::FlowQ(q) => Ok(StateFormula::Flow(q, Box::new(self.state_unary()?))),
            Tok::PathQ(q) => {
                if let (false, Some(&Tok::FlowQ(fq))) = (q.is_positive(), self.peek()) {
                    if fq.is_universal() == q.is_universal() {
                        // Same-parity quantifiers commute: read the flow
                        // quantifier over a path operand and hoist it out.
                        self.i += 1;
                        let body = self.path_unary()?;
                        return Ok(StateFormula::Flow(
                            fq,
                            Box::new(StateFormula::Path(q, Box::new(body))),
                        ));
                    }
                }
                Ok(StateFormula::Path(q, Box::new(self.path_unary()?)))
            }
            t @ (Tok::Next
            | Tok::Finally
            | Tok::Globally
            | Tok::Yesterday
            | Tok::Until
            | Tok::Since) => err(
                pos,
                format!(
                    "path operator {} outside a path context (is a path quantifier missing?)",
                    t.describe()
                ),
            ),
            other => err(pos, format!("expected a state formula, found {}", other.describe())),
        }
    }

    fn path_implies(&mut self) -> Result<PathFormula, ParseError> {
        let lhs = self.path_or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.path_implies()?;
            Ok(PathFormula::Implies(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn path_or(&mut self) -> Result<PathFormula, ParseError> {
        let mut lhs = self.path_and()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.path_and()?;
            lhs = PathFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn path_and(&mut self) -> Result<PathFormula, ParseError> {
        let mut lhs = self.path_until()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.path_until()?;
            lhs = PathFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn path_until(&mut self) -> Result<PathFormula, ParseError> {
        let lhs = self.path_unary()?;
        if self.eat(&Tok::Until) {
            let rhs = self.path_until()?;
            Ok(PathFormula::Until(Box::new(lhs), Box::new(rhs)))
        } else if self.eat(&Tok::Since) {
            let rhs = self.path_until()?;
            Ok(PathFormula::Since(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn path_unary(&mut self) -> Result<PathFormula, ParseError> {
        let pos = self.pos();
        match self.peek() {
            None => err(pos, "expected a path formula, found end of input"),
            Some(Tok::Bang) => {
                self.i += 1;
                Ok(PathFormula::Not(Box::new(self.path_unary()?)))
            }
            Some(Tok::Next) => {
                self.i += 1;
                Ok(PathFormula::Next(Box::new(self.path_unary()?)))
            }
            Some(Tok::Finally) => {
                self.i += 1;
                Ok(PathFormula::Finally(Box::new(self.path_unary()?)))
            }
            Some(Tok::Globally) => {
                self.i += 1;
                Ok(PathFormula::Globally(Box::new(self.path_unary()?)))
            }
            Some(Tok::Yesterday) => {
                self.i += 1;
                Ok(PathFormula::Yesterday(Box::new(self.path_unary()?)))
            }
            Some(Tok::LPar) => {
                self.i += 1;
                let inner = self.path_implies()?;
                self.expect(Tok::RPar)?;
                Ok(inner)
            }
            Some(_) => Ok(PathFormula::State(self.state_unary()?)),
        }
    }

    fn expr(&mut self) -> Result<ValueExpr, ParseError> {
        let mut lhs = self.expr_term()?;
        while self.eat(&Tok::Plus) {
            let rhs = self.expr_term()?;
            lhs = ValueExpr::Add(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn expr_term(&mut self) -> Result<ValueExpr, ParseError> {
        let mut lhs = self.expr_factor()?;
        loop {
            if self.eat(&Tok::Star) {
                let rhs = self.expr_factor()?;
                lhs = ValueExpr::Mul(Box::new(lhs), Box::new(rhs));
            } else if self.eat(&Tok::Div) {
                let pos = self.pos();
                match self.advance() {
                    Some(Tok::Int(d)) if d > 0 => lhs = ValueExpr::Div(Box::new(lhs), d),
                    Some(Tok::Int(_)) => {
                        return err(pos, "division requires a positive integer constant")
                    }
                    other => {
                        let found =
                            other.map_or("end of input".to_string(), |t| t.describe());
                        return err(
                            pos,
                            format!("expected a positive integer after `div`, found {found}"),
                        );
                    }
                }
            } else {
                return Ok(lhs);
            }
        }
    }

    fn expr_factor(&mut self) -> Result<ValueExpr, ParseError> {
        let pos = self.pos();
        match self.advance() {
            Some(Tok::Int(n)) => Ok(ValueExpr::Const(n)),
            Some(Tok::Ident(x)) => Ok(ValueExpr::Var(x)),
            Some(Tok::Gmax) => {
                if self.eat(&Tok::Minus) {
                    let kpos = self.pos();
                    match self.advance() {
                        Some(Tok::Int(k)) => Ok(ValueExpr::GmaxMinus(k)),
                        other => {
                            let found =
                                other.map_or("end of input".to_string(), |t| t.describe());
                            err(kpos, format!(
                                "subtraction is only supported as `gmax - <integer>`, found {found}"
                            ))
                        }
                    }
                } else {
                    Ok(ValueExpr::GammaMax)
                }
            }
            Some(Tok::LPar) => {
                let inner = self.expr()?;
                self.expect(Tok::RPar)?;
                Ok(inner)
            }
            other => {
                let found = other.map_or("end of input".to_string(), |t| t.describe());
                err(pos, format!("expected a value expression, found {found}"))
            }
        }
    }

    fn finish<T>(&mut self, value: T) -> Result<T, ParseError> {
        match self.peek() {
            None => Ok(value),
            Some(t) => err(self.pos(), format!("unexpected trailing input: {}", t.describe())),
        }
    }
}

pub(super) fn parse_state(text: &str) -> Result<StateFormula, ParseError> {
    let mut p = Parser { toks: lex(text)?, i: 0, end: text.len() };
    let f = p.state_implies()?;
    p.finish(f)
}

pub(super) fn parse_path(text: &str) -> Result<PathFormula, ParseError> {
    let mut p = Parser { toks: lex(text)?, i: 0, end: text.len() };
    let f = p.path_implies()?;
    p.finish(f)
}

#[cfg(test)]
mod tests {
    use super::super::*;

    fn roundtrip(text: &str) {
        let first = StateFormula::parse(text).unwrap_or_else(|e| panic!("{text}: {e}"));
        let printed = first.to_string();
        let second = StateFormula::parse(&printed)
            .unwrap_or_else(|e| panic!("reparse of `{printed}`: {e}"));
        assert_eq!(first, second, "`{text}` printed as `{printed}`");
    }

    #[test]
    fn parses_flow_quantified_invariants() {
        let f = StateFormula::parse("Ef (>= 100 & A G (low -> <= 20))").unwrap();
        let StateFormula::Flow(FlowQuant::Ef, body) = &f else { panic!("{f}") };
        let StateFormula::And(lhs, rhs) = body.as_ref() else { panic!("{f}") };
        assert_eq!(
            lhs.as_ref(),
            &StateFormula::FlowProp(Rel::Ge, ValueExpr::Const(100))
        );
        let StateFormula::Path(PathQuant::A, g) = rhs.as_ref() else { panic!("{f}") };
        let PathFormula::Globally(inner) = g.as_ref() else { panic!("{f}") };
        let PathFormula::Implies(ante, cons) = inner.as_ref() else { panic!("{f}") };
        assert_eq!(ante.as_ref(), &PathFormula::State(StateFormula::Atom("low".into())));
        assert_eq!(
            cons.as_ref(),
            &PathFormula::State(StateFormula::FlowProp(Rel::Le, ValueExpr::Const(20)))
        );
    }

    #[test]
    fn bare_integer_reads_as_equality() {
        let f = StateFormula::parse("Ef (1 & A X > 0)").unwrap();
        let explicit = StateFormula::parse("Ef (= 1 & A X > 0)").unwrap();
        assert_eq!(f, explicit);
    }

    #[test]
    fn reports_positions_for_stray_tokens() {
        let text = "Ef A (>= 10 -> X >= 4))";
        let e = StateFormula::parse(text).unwrap_err();
        assert_eq!(e.pos, text.len() - 1);
        assert!(e.message.contains("trailing"), "{e}");
        let e = StateFormula::parse("Ef (>= 10").unwrap_err();
        assert!(e.message.contains("expected `)`"), "{e}");
    }

    #[test]
    fn flow_quantifier_under_matching_path_quantifier_hoists() {
        let hoisted = StateFormula::parse("A Af (>= 10 -> X >= 4)").unwrap();
        let direct = StateFormula::parse("Af A (>= 10 -> X >= 4)").unwrap();
        assert_eq!(hoisted, direct);
        let hoisted = StateFormula::parse("E EfMax (p U q)").unwrap();
        let direct = StateFormula::parse("EfMax E (p U q)").unwrap();
        assert_eq!(hoisted, direct);
    }

    #[test]
    fn opposite_parity_keeps_state_operand() {
        // A state-formula operand is fine either way.
        let f = StateFormula::parse("A Ef (>= 5)").unwrap();
        let StateFormula::Path(PathQuant::A, body) = &f else { panic!("{f}") };
        assert!(matches!(
            body.as_ref(),
            PathFormula::State(StateFormula::Flow(FlowQuant::Ef, _))
        ));
        // A path-formula operand cannot move across opposite parities.
        let e = StateFormula::parse("A Ef (X >= 5)").unwrap_err();
        assert!(e.message.contains("path operator"), "{e}");
    }

    #[test]
    fn positive_quantifiers_lex_only_when_adjacent() {
        let f = StateFormula::parse("Ef A+ X a").unwrap();
        let StateFormula::Flow(_, body) = &f else { panic!() };
        assert!(matches!(body.as_ref(), StateFormula::Path(PathQuant::APlus, _)));
        // `A + X` is a path quantifier followed by junk, not `A+`.
        assert!(StateFormula::parse("Ef A + X a").is_err());
    }

    #[test]
    fn value_expressions_mix_operators() {
        let f = StateFormula::parse(">= x + 2 * (y div 3)").unwrap();
        let StateFormula::FlowProp(Rel::Ge, e) = &f else { panic!("{f}") };
        assert_eq!(
            e,
            &ValueExpr::Add(
                Box::new(ValueExpr::Var("x".into())),
                Box::new(ValueExpr::Mul(
                    Box::new(ValueExpr::Const(2)),
                    Box::new(ValueExpr::Div(Box::new(ValueExpr::Var("y".into())), 3)),
                )),
            )
        );
        assert!(StateFormula::parse(">= x div 0").is_err());
        assert!(StateFormula::parse(">= x - 1").is_err());
        let f = StateFormula::parse("> gmax - 4").unwrap();
        assert_eq!(f, StateFormula::FlowProp(Rel::Gt, ValueExpr::GmaxMinus(4)));
    }

    #[test]
    fn placeholders_parse_in_both_positions() {
        assert_eq!(
            StateFormula::parse("A G (req -> ?)").unwrap().to_string(),
            "A G (req -> ?)"
        );
        let f = StateFormula::parse("Ef (>=? & A X > 0)").unwrap();
        let StateFormula::Flow(_, body) = &f else { panic!() };
        let StateFormula::And(lhs, _) = body.as_ref() else { panic!() };
        assert_eq!(lhs.as_ref(), &StateFormula::ValuePlaceholder(Rel::Ge));
        // Spaced form means the same thing.
        assert_eq!(f, StateFormula::parse("Ef (>= ? & A X > 0)").unwrap());
    }

    #[test]
    fn until_is_right_associative_and_binds_above_and() {
        let f = PathFormula::parse("p U q U r").unwrap();
        let PathFormula::Until(_, rhs) = &f else { panic!("{f}") };
        assert!(matches!(rhs.as_ref(), PathFormula::Until(..)));
        let f = PathFormula::parse("p U q & r").unwrap();
        assert!(matches!(f, PathFormula::And(..)));
        let f = PathFormula::parse("X p | G q").unwrap();
        assert!(matches!(f, PathFormula::Or(..)));
    }

    #[test]
    fn printed_forms_reparse_to_the_same_tree() {
        for text in [
            "Ef (>= 100 & A G (low -> <= 20))",
            "Ef (= 1 & A X > 0)",
            "Af A (>= 10 -> X >= 4)",
            "A Af (>= 10 -> X >= 4)",
            "!(Ef true) | Af (p -> q) & !r",
            "Ef (A (p U q U r) & E ((p | q) U r))",
            "forall x. Ef (= x & A X (>= x | ! p))",
            "exists x. (Ef (= x) -> Af (<= x + 1))",
            "EfMax (>= gmax - 4 & A G (E+ X true -> > 0))",
            "Ef A (= 6 & X X (= 2 | = 0) & X X X >= 1)",
            "AfR (> 0 -> E (true U (= 1 & Y p)))",
            "Ef E (p S (q & Y r))",
            "A (Ef (>= 3))",
            "E (Ef (>= 3))",
            "Ef (> 2 * x + 1 & < x * (y + 3) div 2)",
            "a -> b -> c",
            "(a -> b) -> c",
            "?",
            ">=?",
            "Ef A+ (p U q)",
        ] {
            roundtrip(text);
        }
    }

    #[test]
    fn same_parity_state_operand_needs_parens_to_avoid_hoist() {
        // Built by hand: E over a state atom that is itself Ef-quantified.
        let f = StateFormula::Path(
            PathQuant::E,
            Box::new(PathFormula::State(StateFormula::Flow(
                FlowQuant::Ef,
                Box::new(StateFormula::FlowProp(Rel::Ge, ValueExpr::Const(3))),
            ))),
        );
        let printed = f.to_string();
        assert_eq!(printed, "E (Ef >= 3)");
        assert_eq!(StateFormula::parse(&printed).unwrap(), f);
    }

    #[test]
    fn keywords_are_not_identifiers() {
        let e = StateFormula::parse("Ef (X & p)").unwrap_err();
        assert!(e.message.contains("path operator"), "{e}");
        assert!(StateFormula::parse("forall U. p").is_err());
    }
}
