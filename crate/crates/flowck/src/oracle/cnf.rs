//! CNF satisfiability as a flow problem: balancing, the layered network
//! reduction, and a brute-force SAT solver used to judge both.
//!
//! The reduction needs every literal to occur in exactly `k` clauses for
//! one common `k`. Any CNF over at least two variables can be padded into
//! that shape with tautological clauses, which is what [`balance_cnf`]
//! does. The layered network then routes `k` units through exactly one
//! literal per variable, and a clause vertex sees flow iff a chosen
//! literal satisfies it.

use rand::Rng;

use super::OracleError;
use crate::flow::FlowFunction;
use crate::formula::StateFormula;
use crate::network::{EdgeData, FlowNetwork, NetworkData, VertexData};

/// Clauses over variables `1..=num_vars`; a positive integer is the
/// variable itself, a negative one its negation. Within a clause a literal
/// appears at most once, but both polarities may (a tautological clause).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<CnfFormula, OracleError> {
        let mut normed = Vec::with_capacity(clauses.len());
        for clause in clauses {
            if clause.is_empty() {
                return Err(OracleError::EmptyClause);
            }
            let mut c = clause;
            c.sort_unstable();
            c.dedup();
            for &lit in &c {
                let var = lit.unsigned_abs() as usize;
                if lit == 0 || var > num_vars {
                    return Err(OracleError::Unsupported(format!(
                        "literal {lit} outside 1..={num_vars}"
                    )));
                }
            }
            normed.push(c);
        }
        Ok(CnfFormula { num_vars, clauses: normed })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&lit| {
                let val = assignment[lit.unsigned_abs() as usize - 1];
                (lit > 0) == val
            })
        })
    }

    /// Exhaustive SAT check; the reference the reduction is held against.
    pub fn brute_sat(&self) -> Option<Vec<bool>> {
        assert!(self.num_vars <= 24, "brute SAT is for desk-scale instances");
        for bits in 0u64..1 << self.num_vars {
            let assignment: Vec<bool> = (0..self.num_vars).map(|i| bits >> i & 1 == 1).collect();
            if self.eval(&assignment) {
                return Some(assignment);
            }
        }
        None
    }

    /// Occurrences of each polarity, indexed by variable - 1.
    pub fn literal_counts(&self) -> Vec<(u64, u64)> {
        let mut counts = vec![(0u64, 0u64); self.num_vars];
        for clause in &self.clauses {
            for &lit in clause {
                let slot = &mut counts[lit.unsigned_abs() as usize - 1];
                if lit > 0 {
                    slot.0 += 1;
                } else {
                    slot.1 += 1;
                }
            }
        }
        counts
    }

    /// The common per-literal count, when every literal has one.
    pub fn balanced_k(&self) -> Option<u64> {
        let counts = self.literal_counts();
        let k = counts.first()?.0;
        if k > 0 && counts.iter().all(|&(p, n)| p == k && n == k) {
            Some(k)
        } else {
            None
        }
    }
}

/// Equisatisfiable balanced form, built by three padding stages: even out
/// the first variable using clauses made true by the second, even out every
/// other variable using clauses made true by the first, then pad all
/// per-variable counts up to the maximum with single-variable tautologies.
pub fn balance_cnf(f: &CnfFormula) -> Result<CnfFormula, OracleError> {
    if f.num_vars < 2 {
        return Err(OracleError::TooFewVariables);
    }
    let mut clauses = f.clauses.clone();
    let counts = |clauses: &[Vec<i32>], var: i32| {
        let mut pos = 0i64;
        let mut neg = 0i64;
        for c in clauses {
            if c.contains(&var) {
                pos += 1;
            }
            if c.contains(&-var) {
                neg += 1;
            }
        }
        (pos, neg)
    };

    let (pos, neg) = counts(&clauses, 1);
    let lit = if pos < neg { 1 } else { -1 };
    for _ in 0..(pos - neg).abs() {
        clauses.push(vec![lit, 2, -2]);
    }
    for var in 2..=f.num_vars as i32 {
        let (pos, neg) = counts(&clauses, var);
        let lit = if pos < neg { var } else { -var };
        for _ in 0..(pos - neg).abs() {
            clauses.push(vec![lit, 1, -1]);
        }
    }
    let mut per_var = Vec::with_capacity(f.num_vars);
    for var in 1..=f.num_vars as i32 {
        let (pos, neg) = counts(&clauses, var);
        debug_assert_eq!(pos, neg);
        per_var.push(pos);
    }
    let k = per_var.iter().copied().max().unwrap_or(0).max(1);
    for (i, &c) in per_var.iter().enumerate() {
        let var = i as i32 + 1;
        for _ in 0..k - c {
            clauses.push(vec![var, -var]);
        }
    }
    let out = CnfFormula::new(f.num_vars, clauses)?;
    debug_assert_eq!(out.balanced_k(), Some(k as u64));
    Ok(out)
}

/// The layered reduction network and the formula characterizing its
/// satisfying flows. Positions along every source-to-target path are
/// source, variable, literal, clause, target; the formula pins the source
/// to full throughput, each literal vertex to all-or-nothing, and each
/// clause vertex to being hit.
pub fn cnf_to_network(f: &CnfFormula) -> Result<(FlowNetwork, StateFormula), OracleError> {
    let k = f
        .balanced_k()
        .ok_or_else(|| OracleError::NotBalanced(describe_imbalance(f)))? as i64;
    let n = f.num_vars;

    let mut vertices = vec![VertexData { id: "s".into(), labels: vec![] }];
    let mut edges = Vec::new();
    for i in 1..=n {
        vertices.push(VertexData { id: format!("v{i}"), labels: vec![] });
        vertices.push(VertexData { id: format!("x{i}"), labels: vec![] });
        vertices.push(VertexData { id: format!("nx{i}"), labels: vec![] });
        // One variable's worth of flow: forced through exactly one polarity
        // once the formula pins the source value to k * n.
        edges.push(EdgeData { from: "s".into(), to: format!("v{i}"), cap: k });
        edges.push(EdgeData { from: format!("v{i}"), to: format!("x{i}"), cap: k });
        edges.push(EdgeData { from: format!("v{i}"), to: format!("nx{i}"), cap: k });
    }
    for (j, clause) in f.clauses.iter().enumerate() {
        let cid = format!("c{}", j + 1);
        vertices.push(VertexData { id: cid.clone(), labels: vec![] });
        for &lit in clause {
            let from = if lit > 0 {
                format!("x{lit}")
            } else {
                format!("nx{}", -lit)
            };
            edges.push(EdgeData { from, to: cid.clone(), cap: 1 });
        }
        edges.push(EdgeData { from: cid, to: "t".into(), cap: clause.len() as i64 });
    }
    vertices.push(VertexData { id: "t".into(), labels: vec![] });

    let data = NetworkData {
        ap: vec![],
        vertices,
        source: "s".into(),
        targets: vec!["t".into()],
        edges,
    };
    let net = FlowNetwork::from_data(&data).expect("the layered reduction net is valid");
    let text = format!("Ef A (= {} & X X (= {k} | = 0) & X X X >= 1)", k * n as i64);
    let formula = StateFormula::parse(&text).expect("reduction formula parses");
    Ok((net, formula))
}

/// Reads the chosen assignment off a flow that satisfies the reduction
/// formula: a positive-literal vertex carrying its full `k` means true.
pub fn decode_assignment(
    f: &CnfFormula,
    net: &FlowNetwork,
    flow: &FlowFunction,
) -> Option<Vec<bool>> {
    let k = f.balanced_k()?;
    let mut assignment = Vec::with_capacity(f.num_vars);
    for i in 1..=f.num_vars {
        let v = net.vertex_index(&format!("x{i}"))?;
        assignment.push(flow.vertex_value_int(net, v)? == k);
    }
    Some(assignment)
}

/// Uniform random CNF for the reduction test suite. Clauses draw distinct
/// variables, each polarity a coin flip.
pub fn random_cnf<R: Rng>(
    rng: &mut R,
    num_vars: usize,
    num_clauses: usize,
    clause_size: usize,
) -> CnfFormula {
    assert!(clause_size <= num_vars);
    let mut clauses = Vec::with_capacity(num_clauses);
    for _ in 0..num_clauses {
        let mut vars: Vec<i32> = (1..=num_vars as i32).collect();
        let mut clause = Vec::with_capacity(clause_size);
        for _ in 0..clause_size {
            let pick = rng.gen_range(0..vars.len());
            let var = vars.swap_remove(pick);
            clause.push(if rng.gen_bool(0.5) { var } else { -var });
        }
        clauses.push(clause);
    }
    CnfFormula::new(num_vars, clauses).expect("generated clauses are nonempty and in range")
}

fn describe_imbalance(f: &CnfFormula) -> String {
    for (i, &(pos, neg)) in f.literal_counts().iter().enumerate() {
        if pos != neg {
            return format!("variable {} occurs {pos} times positive, {neg} negative", i + 1);
        }
    }
    let counts = f.literal_counts();
    if counts.iter().all(|&(p, _)| p == 0) {
        return "no literal occurrences".into();
    }
    "per-variable counts differ".into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_check, Budget};

    #[test]
    fn balancing_keeps_satisfiability() {
        let f = CnfFormula::new(2, vec![vec![1, 2]]).unwrap();
        assert!(f.balanced_k().is_none());
        let b = balance_cnf(&f).unwrap();
        let k = b.balanced_k().expect("balanced");
        assert!(k >= 1);
        assert_eq!(f.brute_sat().is_some(), b.brute_sat().is_some());

        let unsat = CnfFormula::new(2, vec![vec![1], vec![-1]]).unwrap();
        let ub = balance_cnf(&unsat).unwrap();
        assert!(ub.balanced_k().is_some());
        assert!(ub.brute_sat().is_none());

        let already = CnfFormula::new(2, vec![vec![1, -1], vec![2, -2]]).unwrap();
        let ab = balance_cnf(&already).unwrap();
        assert_eq!(ab.balanced_k(), Some(1));

        let single = CnfFormula::new(1, vec![vec![1]]).unwrap();
        assert_eq!(balance_cnf(&single).unwrap_err(), OracleError::TooFewVariables);
    }

    #[test]
    fn random_instances_stay_balanced_and_equisatisfiable() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let f = random_cnf(&mut rng, 4, 5, 3);
            let b = balance_cnf(&f).unwrap();
            assert!(b.balanced_k().is_some());
            assert_eq!(f.brute_sat().is_some(), b.brute_sat().is_some());
        }
    }

    #[test]
    fn reduction_network_is_layered_and_judged_by_enumeration() {
        // Unsatisfiable: x and not-x, balanced. The flow space is small
        // enough for the extensional oracle to decide the formula.
        let unsat = balance_cnf(&CnfFormula::new(2, vec![vec![1], vec![-1]]).unwrap()).unwrap();
        let (net, formula) = cnf_to_network(&unsat).unwrap();
        assert!(!brute_check(&net, &formula, &Budget::default()).unwrap());

        // Satisfiable: two single-variable tautologies.
        let sat = balance_cnf(&CnfFormula::new(2, vec![]).unwrap()).unwrap();
        let (net, formula) = cnf_to_network(&sat).unwrap();
        assert!(brute_check(&net, &formula, &Budget::default()).unwrap());

        let raw = CnfFormula::new(2, vec![vec![1, 2]]).unwrap();
        assert!(matches!(cnf_to_network(&raw), Err(OracleError::NotBalanced(_))));
    }

    #[test]
    fn satisfying_flows_decode_to_satisfying_assignments() {
        let sat = balance_cnf(&CnfFormula::new(2, vec![]).unwrap()).unwrap();
        let (net, formula) = cnf_to_network(&sat).unwrap();
        let flows = crate::oracle::enumerate_flows(&net, 200_000).unwrap();
        let body = match &formula {
            StateFormula::Flow(_, body) => body.as_ref().clone(),
            other => panic!("unexpected reduction formula shape {other}"),
        };
        let mut found = 0;
        for flow in &flows {
            use crate::semantics::{Evaluator, FlowContext};
            let holds = Evaluator::new(&net, FlowContext::Flow(flow))
                .eval_state(&body, net.source())
                .unwrap();
            if holds {
                let assignment = decode_assignment(&sat, &net, flow).unwrap();
                assert!(sat.eval(&assignment));
                found += 1;
            }
        }
        assert!(found > 0, "some enumerated flow satisfies the reduction formula");
    }

    #[test]
    fn clause_shape_is_validated() {
        assert_eq!(
            CnfFormula::new(2, vec![vec![]]).unwrap_err(),
            OracleError::EmptyClause
        );
        assert!(matches!(
            CnfFormula::new(2, vec![vec![3]]),
            Err(OracleError::Unsupported(_))
        ));
        let dupes = CnfFormula::new(2, vec![vec![1, 1, 2]]).unwrap();
        assert_eq!(dupes.clauses()[0], vec![1, 2]);
    }
}
