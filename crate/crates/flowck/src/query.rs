//! Query checking: strongest replacements for a placeholder that keep a
//! formula true on a network.
//!
//! A value query has one threshold hole (`>= ?` and friends). Substituting a
//! constant closes the formula, and the hole's polarity makes the solution
//! set a one-sided interval, so a binary search over `[0, capacity sum]`
//! finds the strongest solution with logarithmically many checks. A
//! propositional query has one `?` in state-formula position; solutions
//! range over assertions on the atomic propositions, enumerated as truth
//! tables and reduced to the antichain of strongest ones.

use thiserror::Error;

use crate::checker::{check_with, CheckError, CheckOptions};
use crate::formula::{substitute, PathFormula, Rel, StateFormula, SubstTarget};
use crate::network::FlowNetwork;

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("query has no placeholder")]
    NoPlaceholder,
    #[error("query has {0} placeholders, exactly one is required")]
    MultiplePlaceholders(usize),
    #[error("`= ?` admits no one-sided solution set; only order placeholders are searchable")]
    EqualsPlaceholder,
    #[error("network has {found} atomic propositions, the enumeration limit is {limit}")]
    ApLimitExceeded { found: usize, limit: usize },
    #[error(transparent)]
    Check(#[from] CheckError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryClass {
    LowerBound,
    UpperBound,
}

/// A formula with one threshold hole, plus how satisfaction moves as the
/// filled-in threshold grows.
#[derive(Debug, Clone)]
pub struct ValueQuery {
    pub formula: StateFormula,
    pub rel: Rel,
    /// Negation parity of the hole; the left side of an implication counts
    /// as one negation.
    pub polarity: Polarity,
    /// Whether solutions close downward (`[0, strongest]`) or upward
    /// (`[strongest, capacity sum]`).
    pub class: QueryClass,
}

pub fn classify_value_query(f: &StateFormula) -> Result<ValueQuery, QueryError> {
    let mut found: Vec<(Rel, bool)> = Vec::new();
    scan_value_state(f, false, &mut found);
    match found.as_slice() {
        [] => Err(QueryError::NoPlaceholder),
        &[(rel, negated)] => {
            if rel == Rel::Eq {
                return Err(QueryError::EqualsPlaceholder);
            }
            let polarity = if negated { Polarity::Negative } else { Polarity::Positive };
            // Raising the threshold strengthens `>`-style assertions and
            // weakens `<`-style ones; polarity flips the effect on the
            // formula. Solutions close downward exactly when raising can
            // only break satisfaction.
            let raising_strengthens = matches!(rel, Rel::Gt | Rel::Ge);
            let class = if (polarity == Polarity::Positive) == raising_strengthens {
                QueryClass::LowerBound
            } else {
                QueryClass::UpperBound
            };
            Ok(ValueQuery { formula: f.clone(), rel, polarity, class })
        }
        many => Err(QueryError::MultiplePlaceholders(many.len())),
    }
}

/// Strongest threshold for a value query and the interval it tops or bottoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValueSolution {
    pub strongest: u64,
    pub lo: u64,
    pub hi: u64,
}

/// Binary search for the strongest solution: the largest satisfying
/// threshold for a lower-bound query, the smallest for an upper-bound one.
/// `None` when even the weakest endpoint of `[0, capacity sum]` fails.
pub fn strongest_value_solution(
    net: &FlowNetwork,
    q: &ValueQuery,
    opts: &CheckOptions,
) -> Result<Option<ValueSolution>, QueryError> {
    let cap = net.capacity_sum();
    let sat = |g: u64| -> Result<bool, QueryError> {
        let inst = substitute(&q.formula, &SubstTarget::ValueHole(g))
            .expect("classification guarantees a hole");
        Ok(check_with(net, &inst, opts)?.satisfied)
    };
    match q.class {
        QueryClass::LowerBound => {
            if !sat(0)? {
                return Ok(None);
            }
            let (mut lo, mut hi) = (0u64, cap);
            while lo < hi {
                let mid = lo + (hi - lo).div_ceil(2);
                if sat(mid)? {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            Ok(Some(ValueSolution { strongest: lo, lo: 0, hi: lo }))
        }
        QueryClass::UpperBound => {
            if !sat(cap)? {
                return Ok(None);
            }
            let (mut lo, mut hi) = (0u64, cap);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if sat(mid)? {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            Ok(Some(ValueSolution { strongest: lo, lo, hi: cap }))
        }
    }
}

/// A formula with one `?` standing for an assertion over the atomic
/// propositions.
#[derive(Debug, Clone)]
pub struct PropQuery {
    pub formula: StateFormula,
    pub polarity: Polarity,
}

pub fn classify_prop_query(f: &StateFormula) -> Result<PropQuery, QueryError> {
    let mut found: Vec<bool> = Vec::new();
    scan_prop_state(f, false, &mut found);
    match found.as_slice() {
        [] => Err(QueryError::NoPlaceholder),
        &[negated] => {
            let polarity = if negated { Polarity::Negative } else { Polarity::Positive };
            Ok(PropQuery { formula: f.clone(), polarity })
        }
        many => Err(QueryError::MultiplePlaceholders(many.len())),
    }
}

/// One strongest propositional solution. Row `r` of the table gives the
/// assertion's truth on vertices whose label set, read bitwise in `ap`
/// order, equals `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropSolution {
    pub table: Vec<bool>,
    pub formula: StateFormula,
}

/// Enumerate every Boolean function over the network's atomic propositions,
/// keep the satisfying ones, and return the strongest: implication-minimal
/// tables for positive queries, implication-maximal for negative ones,
/// ordered by table bits. Strength is truth-table containment.
pub fn strongest_prop_solutions(
    net: &FlowNetwork,
    q: &PropQuery,
    ap_limit: usize,
    opts: &CheckOptions,
) -> Result<Vec<PropSolution>, QueryError> {
    let ap = net.ap();
    if ap.len() > ap_limit {
        return Err(QueryError::ApLimitExceeded { found: ap.len(), limit: ap_limit });
    }
    let rows = 1usize << ap.len();
    let mut solutions: Vec<u32> = Vec::new();
    for bits in 0..1u64 << rows {
        let theta = table_formula(ap, rows, bits as u32);
        let inst = substitute(&q.formula, &SubstTarget::PropHole(&theta))
            .expect("classification guarantees a hole");
        if check_with(net, &inst, opts)?.satisfied {
            solutions.push(bits as u32);
        }
    }
    let keep_minimal = q.polarity == Polarity::Positive;
    let mut out = Vec::new();
    'next: for &s in &solutions {
        for &other in &solutions {
            if other == s {
                continue;
            }
            let beats_s =
                if keep_minimal { other & s == other } else { other & s == s };
            if beats_s {
                continue 'next;
            }
        }
        out.push(PropSolution {
            table: (0..rows).map(|r| s >> r & 1 == 1).collect(),
            formula: table_formula(ap, rows, s),
        });
    }
    Ok(out)
}

/// Disjunctive normal form of a truth table: one full conjunction of
/// literals per true row. No true rows is `false`, all rows true is
/// `true`, and with no propositions the single row renders as `true`.
fn table_formula(ap: &[String], rows: usize, bits: u32) -> StateFormula {
    if u64::from(bits) == (1u64 << rows) - 1 {
        return StateFormula::True;
    }
    let mut terms: Vec<StateFormula> = Vec::new();
    for r in 0..rows {
        if bits >> r & 1 == 0 {
            continue;
        }
        let lits: Vec<StateFormula> = ap
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let atom = StateFormula::Atom(p.clone());
                if r >> i & 1 == 1 {
                    atom
                } else {
                    atom.negated()
                }
            })
            .collect();
        let term = lits
            .into_iter()
            .reduce(|a, b| StateFormula::And(Box::new(a), Box::new(b)))
            .unwrap_or(StateFormula::True);
        terms.push(term);
    }
    terms
        .into_iter()
        .reduce(|a, b| StateFormula::Or(Box::new(a), Box::new(b)))
        .unwrap_or(StateFormula::False)
}

fn scan_value_state(f: &StateFormula, neg: bool, out: &mut Vec<(Rel, bool)>) {
    match f {
        StateFormula::ValuePlaceholder(rel) => out.push((*rel, neg)),
        StateFormula::Not(a) => scan_value_state(a, !neg, out),
        StateFormula::Implies(a, b) => {
            scan_value_state(a, !neg, out);
            scan_value_state(b, neg, out);
        }
        StateFormula::And(a, b) | StateFormula::Or(a, b) => {
            scan_value_state(a, neg, out);
            scan_value_state(b, neg, out);
        }
        StateFormula::Path(_, p) => scan_value_path(p, neg, out),
        StateFormula::Flow(_, b) => scan_value_state(b, neg, out),
        StateFormula::Value(_, _, b) => scan_value_state(b, neg, out),
        _ => {}
    }
}

fn scan_value_path(p: &PathFormula, neg: bool, out: &mut Vec<(Rel, bool)>) {
    match p {
        PathFormula::State(s) => scan_value_state(s, neg, out),
        PathFormula::Not(a) => scan_value_path(a, !neg, out),
        PathFormula::Implies(a, b) => {
            scan_value_path(a, !neg, out);
            scan_value_path(b, neg, out);
        }
        PathFormula::And(a, b)
        | PathFormula::Or(a, b)
        | PathFormula::Until(a, b)
        | PathFormula::Since(a, b) => {
            scan_value_path(a, neg, out);
            scan_value_path(b, neg, out);
        }
        PathFormula::Next(a)
        | PathFormula::Finally(a)
        | PathFormula::Globally(a)
        | PathFormula::Yesterday(a) => scan_value_path(a, neg, out),
    }
}

fn scan_prop_state(f: &StateFormula, neg: bool, out: &mut Vec<bool>) {
    match f {
        StateFormula::Placeholder => out.push(neg),
        StateFormula::Not(a) => scan_prop_state(a, !neg, out),
        StateFormula::Implies(a, b) => {
            scan_prop_state(a, !neg, out);
            scan_prop_state(b, neg, out);
        }
        StateFormula::And(a, b) | StateFormula::Or(a, b) => {
            scan_prop_state(a, neg, out);
            scan_prop_state(b, neg, out);
        }
        StateFormula::Path(_, p) => scan_prop_path(p, neg, out),
        StateFormula::Flow(_, b) => scan_prop_state(b, neg, out),
        StateFormula::Value(_, _, b) => scan_prop_state(b, neg, out),
        _ => {}
    }
}

fn scan_prop_path(p: &PathFormula, neg: bool, out: &mut Vec<bool>) {
    match p {
        PathFormula::State(s) => scan_prop_state(s, neg, out),
        PathFormula::Not(a) => scan_prop_path(a, !neg, out),
        PathFormula::Implies(a, b) => {
            scan_prop_path(a, !neg, out);
            scan_prop_path(b, neg, out);
        }
        PathFormula::And(a, b)
        | PathFormula::Or(a, b)
        | PathFormula::Until(a, b)
        | PathFormula::Since(a, b) => {
            scan_prop_path(a, neg, out);
            scan_prop_path(b, neg, out);
        }
        PathFormula::Next(a)
        | PathFormula::Finally(a)
        | PathFormula::Globally(a)
        | PathFormula::Yesterday(a) => scan_prop_path(a, neg, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{net, DIAMOND, PIPE9, TWO_SUCCESSORS};
    use crate::network::parse_network;
    use crate::oracle::{enumerate_value_solutions, Budget};

    fn f(text: &str) -> StateFormula {
        StateFormula::parse(text).expect("test formula parses")
    }

    #[test]
    fn classification_tracks_relation_and_parity() {
        let q = classify_value_query(&f("Ef (E (F (target & (>= ?))))")).unwrap();
        assert_eq!((q.polarity, q.class), (Polarity::Positive, QueryClass::LowerBound));
        let q = classify_value_query(&f("Af (<= ?)")).unwrap();
        assert_eq!((q.polarity, q.class), (Polarity::Positive, QueryClass::UpperBound));
        let q = classify_value_query(&f("Ef (!(>= ?))")).unwrap();
        assert_eq!((q.polarity, q.class), (Polarity::Negative, QueryClass::UpperBound));
        let q = classify_value_query(&f("Ef ((<= ?) -> (>= 1))")).unwrap();
        assert_eq!((q.polarity, q.class), (Polarity::Negative, QueryClass::LowerBound));
        assert!(matches!(
            classify_value_query(&f("Ef (= ?)")),
            Err(QueryError::EqualsPlaceholder)
        ));
        assert!(matches!(classify_value_query(&f("Ef (= 1)")), Err(QueryError::NoPlaceholder)));
        assert!(matches!(
            classify_value_query(&f("Ef ((>= ?) & (<= ?))")),
            Err(QueryError::MultiplePlaceholders(2))
        ));
    }

    #[test]
    fn binary_search_matches_the_linear_scan() {
        let cases = [
            (DIAMOND, "Ef (>= ?)"),
            (DIAMOND, "Af (<= ?)"),
            (DIAMOND, "Ef (!(>= ?))"),
            (DIAMOND, "Ef (= 7 & A X (>= ?))"),
            (TWO_SUCCESSORS, "A Af (>= 10 -> X (>= ?))"),
        ];
        for (net_text, query) in cases {
            let n = net(net_text);
            let q = classify_value_query(&f(query)).unwrap();
            let got = strongest_value_solution(&n, &q, &CheckOptions::default()).unwrap();
            let scan = enumerate_value_solutions(&n, &f(query), &Budget::default()).unwrap();
            match got {
                None => assert!(scan.is_empty(), "search found nothing but scan has {scan:?}"),
                Some(sol) => {
                    assert_eq!(
                        scan,
                        (sol.lo..=sol.hi).collect::<Vec<_>>(),
                        "solution set of {query} is not the reported interval"
                    );
                    let extremum = match q.class {
                        QueryClass::LowerBound => *scan.last().unwrap(),
                        QueryClass::UpperBound => scan[0],
                    };
                    assert_eq!(sol.strongest, extremum, "wrong extremum for {query}");
                }
            }
        }
    }

    #[test]
    fn pipe_capacity_bounds_the_reachable_value() {
        let n = net(PIPE9);
        let q = classify_value_query(&f("Ef (>= ?)")).unwrap();
        let sol = strongest_value_solution(&n, &q, &CheckOptions::default()).unwrap().unwrap();
        assert_eq!(sol, ValueSolution { strongest: 9, lo: 0, hi: 9 });
        let q = classify_value_query(&f("Af (<= ?)")).unwrap();
        let sol = strongest_value_solution(&n, &q, &CheckOptions::default()).unwrap().unwrap();
        assert_eq!(sol, ValueSolution { strongest: 9, lo: 9, hi: 9 });
    }

    #[test]
    fn unsatisfiable_queries_have_no_solution() {
        let n = net(PIPE9);
        let q = classify_value_query(&f("Ef (false & (>= ?))")).unwrap();
        assert_eq!(strongest_value_solution(&n, &q, &CheckOptions::default()).unwrap(), None);
    }

    #[test]
    fn equality_holes_break_the_interval_shape() {
        let n = net(PIPE9);
        let query = f("Ef ((= ?) & ((>= 2 & <= 4) | (>= 6 & <= 9)))");
        assert!(matches!(classify_value_query(&query), Err(QueryError::EqualsPlaceholder)));
        let scan = enumerate_value_solutions(&n, &query, &Budget::default()).unwrap();
        assert_eq!(scan, vec![2, 3, 4, 6, 7, 8, 9]);
    }

    #[test]
    fn prop_solutions_form_the_strongest_antichain() {
        let n = net(DIAMOND);
        let opts = CheckOptions::default();
        let q = classify_prop_query(&f("E (F (?))")).unwrap();
        assert_eq!(q.polarity, Polarity::Positive);
        let sols = strongest_prop_solutions(&n, &q, 3, &opts).unwrap();
        let tables: Vec<Vec<bool>> = sols.iter().map(|s| s.table.clone()).collect();
        assert_eq!(tables, vec![vec![true, false], vec![false, true]]);

        let q = classify_prop_query(&f("A (G (?))")).unwrap();
        let sols = strongest_prop_solutions(&n, &q, 3, &opts).unwrap();
        let tables: Vec<Vec<bool>> = sols.iter().map(|s| s.table.clone()).collect();
        assert_eq!(tables, vec![vec![true, true]]);

        let q = classify_prop_query(&f("!(E (F (?)))")).unwrap();
        assert_eq!(q.polarity, Polarity::Negative);
        let sols = strongest_prop_solutions(&n, &q, 3, &opts).unwrap();
        let tables: Vec<Vec<bool>> = sols.iter().map(|s| s.table.clone()).collect();
        assert_eq!(tables, vec![vec![false, false]]);
    }

    #[test]
    fn containment_implies_satisfaction_for_positive_queries() {
        let two_ap = r#"{
            "ap": ["a", "b"],
            "vertices": [
                {"id": "s", "labels": ["a"]},
                {"id": "u", "labels": ["b"]},
                {"id": "t", "labels": ["a", "b"]}
            ],
            "source": "s",
            "targets": ["t"],
            "edges": [
                {"from": "s", "to": "u", "cap": 2},
                {"from": "u", "to": "t", "cap": 2}
            ]
        }"#;
        let n = parse_network(two_ap).unwrap();
        let opts = CheckOptions::default();
        let query = f("E (F (?))");
        let rows = 4;
        let mut sat = Vec::new();
        for bits in 0..1u32 << rows {
            let theta = super::table_formula(n.ap(), rows, bits);
            let inst = substitute(&query, &SubstTarget::PropHole(&theta)).unwrap();
            sat.push(check_with(&n, &inst, &opts).unwrap().satisfied);
        }
        for a in 0..1u32 << rows {
            for b in 0..1u32 << rows {
                if a & b == a && sat[a as usize] {
                    assert!(
                        sat[b as usize],
                        "containment {a:#06b} into {b:#06b} must preserve satisfaction"
                    );
                }
            }
        }
        let q = classify_prop_query(&query).unwrap();
        let sols = strongest_prop_solutions(&n, &q, 3, &opts).unwrap();
        for (bits, &ok) in sat.iter().enumerate() {
            if !ok {
                continue;
            }
            let covered = sols.iter().any(|s| {
                let sol_bits: u32 = s
                    .table
                    .iter()
                    .enumerate()
                    .map(|(r, &b)| if b { 1 << r } else { 0 })
                    .sum();
                sol_bits & bits as u32 == sol_bits
            });
            assert!(covered, "solution {bits:#06b} is not implied by any antichain member");
        }
    }

    #[test]
    fn ap_limit_guards_the_double_exponential() {
        let wide = r#"{
            "ap": ["a", "b", "c", "d"],
            "vertices": [{"id": "s"}, {"id": "t"}],
            "source": "s",
            "targets": ["t"],
            "edges": [{"from": "s", "to": "t", "cap": 1}]
        }"#;
        let n = parse_network(wide).unwrap();
        let q = classify_prop_query(&f("E (F (?))")).unwrap();
        let err = strongest_prop_solutions(&n, &q, 3, &CheckOptions::default()).unwrap_err();
        assert!(matches!(err, QueryError::ApLimitExceeded { found: 4, limit: 3 }));
    }
}
