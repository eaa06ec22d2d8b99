//! Propositional satisfiability as a flow question: a balanced CNF turns
//! into a network plus one fixed formula shape, a satisfying flow decodes
//! into a satisfying assignment, and the verdict always matches brute-force
//! SAT.

use flowck::checker::check_reduction_cnf;
use flowck::oracle::cnf::{balance_cnf, cnf_to_network, decode_assignment, CnfFormula};

fn main() {
    // (x1 | x2) & (!x1 | x2) & (x1 | !x2): satisfiable only by x1=x2=true.
    let sat = CnfFormula::new(2, vec![vec![1, 2], vec![-1, 2], vec![1, -2]]).unwrap();
    // x1 & !x1 padded to two variables: unsatisfiable.
    let unsat = CnfFormula::new(2, vec![vec![1], vec![-1], vec![2, -2]]).unwrap();

    for (name, cnf) in [("satisfiable", sat), ("unsatisfiable", unsat)] {
        let balanced = balance_cnf(&cnf).unwrap();
        let (net, formula) = cnf_to_network(&balanced).unwrap();
        let verdict = check_reduction_cnf(&net, &formula).unwrap();
        println!(
            "{name}: {} vertices, formula {formula}, checker says {}",
            net.vertex_count(),
            if verdict.satisfied { "satisfiable" } else { "unsatisfiable" }
        );
        assert_eq!(verdict.satisfied, cnf.brute_sat().is_some());
        if let Some(flow) = verdict.witness {
            let assignment = decode_assignment(&balanced, &net, &flow)
                .expect("satisfying flows decode to assignments");
            let rendered: Vec<String> = assignment
                .iter()
                .enumerate()
                .map(|(i, &b)| format!("x{}={}", i + 1, b))
                .collect();
            println!("  decoded assignment: {}", rendered.join(", "));
            assert!(cnf.eval(&assignment), "decoded assignment satisfies the original CNF");
        }
    }
}
