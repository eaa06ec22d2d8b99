//! Exact rational linear feasibility. A small dense two-phase simplex over
//! `BigRational` with Bland's pivoting rule (lowest index enters, lowest
//! basic index leaves on ties), so every run terminates and no floating
//! point appears anywhere. Strict inequalities are handled by a shared slack
//! variable: each `lhs > b` becomes `lhs >= b + eps`, `eps` is maximized
//! subject to `eps <= 1`, and the strict system is feasible exactly when the
//! optimum is positive.
//!
//! All variables are implicitly nonnegative; bounds above that are ordinary
//! constraints.

use num::{BigRational, One, Signed, Zero};

use crate::flow::FlowFunction;
use crate::maxflow::Feasibility;
use crate::network::FlowNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinRel {
    Le,
    Ge,
    Eq,
    Lt,
    Gt,
}

#[derive(Debug, Clone)]
pub struct LinearConstraint {
    /// Sparse left-hand side: (variable index, coefficient).
    pub terms: Vec<(usize, BigRational)>,
    pub rel: LinRel,
    pub rhs: BigRational,
}

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub num_vars: usize,
    pub constraints: Vec<LinearConstraint>,
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> LinearSystem {
        LinearSystem { num_vars, constraints: Vec::new() }
    }

    pub fn push(&mut self, terms: Vec<(usize, BigRational)>, rel: LinRel, rhs: BigRational) {
        self.constraints.push(LinearConstraint { terms, rel, rhs });
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LpError {
    #[error("constraint references variable {0}, system has {1}")]
    Malformed(usize, usize),
    #[error("objective unbounded")]
    Unbounded,
}

/// Decide feasibility of a system that may contain strict inequalities and
/// return an exact rational witness. Without strict relations this is plain
/// phase-one feasibility.
pub fn strict_rational_feasibility(
    sys: &LinearSystem,
) -> Result<Feasibility<Vec<BigRational>>, LpError> {
    for c in &sys.constraints {
        for (v, _) in &c.terms {
            if *v >= sys.num_vars {
                return Err(LpError::Malformed(*v, sys.num_vars));
            }
        }
    }
    let has_strict = sys.constraints.iter().any(|c| matches!(c.rel, LinRel::Lt | LinRel::Gt));
    if !has_strict {
        let t = Tableau::build(sys, None)?;
        return Ok(match t.phase_one()? {
            Some(t) => Feasibility::Feasible(t.solution(sys.num_vars)),
            None => Feasibility::Infeasible,
        });
    }

    // eps gets index num_vars; maximize it, capped at 1.
    let eps = sys.num_vars;
    let mut relaxed = LinearSystem::new(sys.num_vars + 1);
    for c in &sys.constraints {
        let mut terms = c.terms.clone();
        let rel = match c.rel {
            LinRel::Gt => {
                terms.push((eps, -BigRational::one()));
                LinRel::Ge
            }
            LinRel::Lt => {
                terms.push((eps, BigRational::one()));
                LinRel::Le
            }
            other => other,
        };
        relaxed.push(terms, rel, c.rhs.clone());
    }
    relaxed.push(vec![(eps, BigRational::one())], LinRel::Le, BigRational::one());

    let mut objective = vec![BigRational::zero(); relaxed.num_vars];
    objective[eps] = -BigRational::one(); // minimize -eps
    let t = Tableau::build(&relaxed, Some(&objective))?;
    let t = match t.phase_one()? {
        Some(t) => t,
        None => return Ok(Feasibility::Infeasible),
    };
    let t = t.phase_two()?;
    let x = t.solution(relaxed.num_vars);
    if x[eps].is_positive() {
        Ok(Feasibility::Feasible(x[..sys.num_vars].to_vec()))
    } else {
        Ok(Feasibility::Infeasible)
    }
}

/// Per-vertex through-flow interval with independently strict endpoints.
/// `hi = None` means bounded only by the capacity sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexRange {
    pub lo: u64,
    pub lo_strict: bool,
    pub hi: Option<u64>,
    pub hi_strict: bool,
}

impl VertexRange {
    pub fn unconstrained() -> VertexRange {
        VertexRange { lo: 0, lo_strict: false, hi: None, hi_strict: false }
    }

    pub fn exactly(v: u64) -> VertexRange {
        VertexRange { lo: v, lo_strict: false, hi: Some(v), hi_strict: false }
    }

    pub fn tighten_lo(&mut self, lo: u64, strict: bool) {
        if lo > self.lo || (lo == self.lo && strict) {
            self.lo = lo;
            self.lo_strict = strict || (lo == self.lo && self.lo_strict);
        }
    }

    pub fn tighten_hi(&mut self, hi: u64, strict: bool) {
        match self.hi {
            Some(h) if hi > h => {}
            Some(h) if hi == h => self.hi_strict |= strict,
            _ => {
                self.hi = Some(hi);
                self.hi_strict = strict;
            }
        }
    }

    /// Whether no real value fits.
    pub fn is_empty_real(&self) -> bool {
        match self.hi {
            None => false,
            Some(h) => self.lo > h || (self.lo == h && (self.lo_strict || self.hi_strict)),
        }
    }

    /// Round strict endpoints inward to integers. `None` when no integer fits.
    pub fn integerize(&self) -> Option<crate::maxflow::IntRange> {
        let lo = if self.lo_strict { self.lo.checked_add(1)? } else { self.lo };
        let hi = match self.hi {
            None => None,
            Some(h) => {
                let h = if self.hi_strict { h.checked_sub(1)? } else { h };
                Some(h)
            }
        };
        if let Some(h) = hi {
            if lo > h {
                return None;
            }
        }
        Some(crate::maxflow::IntRange { lo, hi })
    }
}

/// Real-valued flow whose through-flow at each vertex lies in the given
/// (possibly strict) range. Builds edge variables, conservation equalities,
/// capacity bounds, and range rows, then defers to the simplex.
pub fn real_vertex_constrained_flow(
    net: &FlowNetwork,
    ranges: &[VertexRange],
) -> Result<Feasibility<FlowFunction>, LpError> {
    assert_eq!(ranges.len(), net.vertex_count());
    let m = net.edges().len();
    let mut sys = LinearSystem::new(m);
    for (e, edge) in net.edges().iter().enumerate() {
        sys.push(vec![(e, BigRational::one())], LinRel::Le, BigRational::from_integer(edge.cap.into()));
    }
    for v in 0..net.vertex_count() {
        if v != net.source() && !net.is_target(v) {
            let mut terms: Vec<(usize, BigRational)> = Vec::new();
            for &e in net.in_edges(v) {
                terms.push((e, BigRational::one()));
            }
            for &e in net.out_edges(v) {
                terms.push((e, -BigRational::one()));
            }
            sys.push(terms, LinRel::Eq, BigRational::zero());
        }
    }
    for (v, r) in ranges.iter().enumerate() {
        if r.is_empty_real() {
            return Ok(Feasibility::Infeasible);
        }
        let through: Vec<(usize, BigRational)> = if v == net.source() {
            net.out_edges(v).iter().map(|&e| (e, BigRational::one())).collect()
        } else {
            net.in_edges(v).iter().map(|&e| (e, BigRational::one())).collect()
        };
        if r.lo > 0 || r.lo_strict {
            let rel = if r.lo_strict { LinRel::Gt } else { LinRel::Ge };
            sys.push(through.clone(), rel, BigRational::from_integer(r.lo.into()));
        }
        if let Some(h) = r.hi {
            let rel = if r.hi_strict { LinRel::Lt } else { LinRel::Le };
            sys.push(through, rel, BigRational::from_integer(h.into()));
        }
    }
    Ok(match strict_rational_feasibility(&sys)? {
        Feasibility::Infeasible => Feasibility::Infeasible,
        Feasibility::Feasible(x) => Feasibility::Feasible(
            FlowFunction::rational(net, x).expect("LP constraints encode the flow invariants"),
        ),
    })
}

/// Dense simplex tableau in canonical form: basis columns are an identity,
/// the cost row holds reduced costs, `obj` the negated objective value.
struct Tableau {
    cols: usize,
    rows: Vec<Vec<BigRational>>,
    rhs: Vec<BigRational>,
    basis: Vec<usize>,
    cost: Vec<BigRational>,
    first_artificial: usize,
    objective: Option<Vec<BigRational>>,
}

impl Tableau {
    /// Normal form: every constraint becomes an equality with nonnegative
    /// right-hand side, slack/surplus vars are added, then one artificial
    /// per row forms the starting basis.
    fn build(sys: &LinearSystem, objective: Option<&[BigRational]>) -> Result<Tableau, LpError> {
        let m = sys.constraints.len();
        let n_slack: usize = sys
            .constraints
            .iter()
            .filter(|c| !matches!(c.rel, LinRel::Eq))
            .count();
        let first_artificial = sys.num_vars + n_slack;
        let cols = first_artificial + m;
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack = sys.num_vars;
        for (i, c) in sys.constraints.iter().enumerate() {
            let mut row = vec![BigRational::zero(); cols];
            for (v, coeff) in &c.terms {
                row[*v] += coeff.clone();
            }
            let mut b = c.rhs.clone();
            match c.rel {
                LinRel::Le => {
                    row[slack] = BigRational::one();
                    slack += 1;
                }
                LinRel::Ge => {
                    row[slack] = -BigRational::one();
                    slack += 1;
                }
                LinRel::Eq => {}
                LinRel::Lt | LinRel::Gt => unreachable!("strict relations are relaxed first"),
            }
            if b.is_negative() {
                for x in row.iter_mut() {
                    *x = -x.clone();
                }
                b = -b;
            }
            row[first_artificial + i] = BigRational::one();
            rows.push(row);
            rhs.push(b);
            basis.push(first_artificial + i);
        }
        let mut t = Tableau {
            cols,
            rows,
            rhs,
            basis,
            cost: Vec::new(),
            first_artificial,
            objective: objective.map(|o| o.to_vec()),
        };
        let mut phase1 = vec![BigRational::zero(); cols];
        for entry in phase1.iter_mut().skip(first_artificial) {
            *entry = BigRational::one();
        }
        t.set_cost(phase1);
        Ok(t)
    }

    fn set_cost(&mut self, raw: Vec<BigRational>) {
        self.cost = raw;
        for i in 0..self.rows.len() {
            let c = self.cost[self.basis[i]].clone();
            if !c.is_zero() {
                for j in 0..self.cols {
                    let adj = &self.rows[i][j] * &c;
                    self.cost[j] -= adj;
                }
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for x in self.rows[row].iter_mut() {
            *x /= p.clone();
        }
        self.rhs[row] /= p;
        for i in 0..self.rows.len() {
            if i != row && !self.rows[i][col].is_zero() {
                let f = self.rows[i][col].clone();
                for j in 0..self.cols {
                    let adj = &self.rows[row][j] * &f;
                    self.rows[i][j] -= adj;
                }
                let adj = &self.rhs[row] * &f;
                self.rhs[i] -= adj;
            }
        }
        if !self.cost[col].is_zero() {
            let f = self.cost[col].clone();
            for j in 0..self.cols {
                let adj = &self.rows[row][j] * &f;
                self.cost[j] -= adj;
            }
        }
        self.basis[row] = col;
    }

    /// Bland: entering is the lowest-index improving column, leaving the
    /// lowest-basis-index row among minimum ratios.
    fn run(&mut self, allowed: impl Fn(usize) -> bool) -> Result<(), LpError> {
        loop {
            let entering = (0..self.cols).find(|&j| allowed(j) && self.cost[j].is_negative());
            let Some(col) = entering else { return Ok(()) };
            let mut best: Option<(BigRational, usize)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][col].is_positive() {
                    let ratio = &self.rhs[i] / &self.rows[i][col];
                    let better = match &best {
                        None => true,
                        Some((r, bi)) => {
                            ratio < *r || (ratio == *r && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((ratio, i));
                    }
                }
            }
            let Some((_, row)) = best else { return Err(LpError::Unbounded) };
            self.pivot(row, col);
        }
    }

    /// Minimize the artificial sum. `None` when it stays positive. Basic
    /// artificials at zero are pivoted out; rows that cannot release one are
    /// redundant and dropped.
    fn phase_one(mut self) -> Result<Option<Tableau>, LpError> {
        self.run(|_| true)?;
        let value: BigRational =
            (0..self.rows.len()).filter(|&i| self.basis[i] >= self.first_artificial).map(|i| self.rhs[i].clone()).sum();
        if value.is_positive() {
            return Ok(None);
        }
        let mut drop_rows = Vec::new();
        for i in 0..self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(j) => self.pivot(i, j),
                    None => drop_rows.push(i),
                }
            }
        }
        for &i in drop_rows.iter().rev() {
            self.rows.remove(i);
            self.rhs.remove(i);
            self.basis.remove(i);
        }
        Ok(Some(self))
    }

    fn phase_two(mut self) -> Result<Tableau, LpError> {
        let mut cost = self.objective.clone().unwrap_or_default();
        cost.resize(self.cols, BigRational::zero());
        self.set_cost(cost);
        let cut = self.first_artificial;
        self.run(|j| j < cut)?;
        Ok(self)
    }

    fn solution(&self, n: usize) -> Vec<BigRational> {
        let mut x = vec![BigRational::zero(); n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.rhs[i].clone();
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{net, SEPARATION};
    use crate::flow::{rat, ratio};
    use crate::maxflow::{vertex_constrained_flow, IntRange};

    fn term(v: usize, c: i64) -> (usize, BigRational) {
        (v, rat(c))
    }

    #[test]
    fn strict_box_is_feasible() {
        let mut sys = LinearSystem::new(1);
        sys.push(vec![term(0, 1)], LinRel::Ge, rat(0));
        sys.push(vec![term(0, 1)], LinRel::Le, rat(1));
        sys.push(vec![term(0, 1)], LinRel::Gt, rat(0));
        sys.push(vec![term(0, 1)], LinRel::Lt, rat(1));
        match strict_rational_feasibility(&sys).unwrap() {
            Feasibility::Feasible(x) => {
                assert!(x[0] > rat(0) && x[0] < rat(1), "witness {x:?}");
            }
            Feasibility::Infeasible => panic!("open unit interval is nonempty"),
        }
    }

    #[test]
    fn pinned_point_with_strict_bound_is_infeasible() {
        let mut sys = LinearSystem::new(1);
        sys.push(vec![term(0, 1)], LinRel::Ge, rat(0));
        sys.push(vec![term(0, 1)], LinRel::Le, rat(0));
        sys.push(vec![term(0, 1)], LinRel::Gt, rat(0));
        assert_eq!(strict_rational_feasibility(&sys).unwrap(), Feasibility::Infeasible);
    }

    #[test]
    fn rejects_out_of_range_variables() {
        let mut sys = LinearSystem::new(1);
        sys.push(vec![term(3, 1)], LinRel::Le, rat(1));
        assert_eq!(strict_rational_feasibility(&sys).unwrap_err(), LpError::Malformed(3, 1));
    }

    #[test]
    fn equalities_work_without_strict_relations() {
        // x + y = 2, x - y = 0 has the unique solution (1, 1).
        let mut sys = LinearSystem::new(2);
        sys.push(vec![term(0, 1), term(1, 1)], LinRel::Eq, rat(2));
        sys.push(vec![term(0, 1), term(1, -1)], LinRel::Eq, rat(0));
        match strict_rational_feasibility(&sys).unwrap() {
            Feasibility::Feasible(x) => assert_eq!(x, vec![rat(1), rat(1)]),
            Feasibility::Infeasible => panic!(),
        }
        sys.push(vec![term(0, 1)], LinRel::Ge, rat(2));
        assert_eq!(strict_rational_feasibility(&sys).unwrap(), Feasibility::Infeasible);
    }

    #[test]
    fn unit_split_feasible_over_reals_not_integers() {
        let n = net(SEPARATION);
        let s = n.source();
        let u = n.vertex_index("u").unwrap();
        let v = n.vertex_index("v").unwrap();
        let mut ranges = vec![VertexRange::unconstrained(); n.vertex_count()];
        ranges[s] = VertexRange::exactly(1);
        ranges[u] = VertexRange { lo: 0, lo_strict: true, hi: None, hi_strict: false };
        ranges[v] = VertexRange { lo: 0, lo_strict: true, hi: None, hi_strict: false };
        match real_vertex_constrained_flow(&n, &ranges).unwrap() {
            Feasibility::Feasible(f) => {
                f.validate(&n).unwrap();
                assert_eq!(f.vertex_value(&n, s), rat(1));
                assert!(f.vertex_value(&n, u) > rat(0));
                assert!(f.vertex_value(&n, v) > rat(0));
            }
            Feasibility::Infeasible => panic!("half/half split satisfies the ranges"),
        }
        // The same ranges admit no integral flow.
        let int_ranges: Vec<IntRange> = ranges.iter().map(|r| r.integerize().unwrap()).collect();
        assert_eq!(vertex_constrained_flow(&n, &int_ranges), Feasibility::Infeasible);
    }

    #[test]
    fn no_constraints_yields_some_flow() {
        let n = net(SEPARATION);
        let ranges = vec![VertexRange::unconstrained(); n.vertex_count()];
        match real_vertex_constrained_flow(&n, &ranges).unwrap() {
            Feasibility::Feasible(f) => f.validate(&n).unwrap(),
            Feasibility::Infeasible => panic!("the zero flow always qualifies"),
        }
    }

    #[test]
    fn strict_witnesses_are_exact_rationals() {
        // 2x > 1 and 3x < 2 pins x into (1/2, 2/3).
        let mut sys = LinearSystem::new(1);
        sys.push(vec![term(0, 2)], LinRel::Gt, rat(1));
        sys.push(vec![term(0, 3)], LinRel::Lt, rat(2));
        match strict_rational_feasibility(&sys).unwrap() {
            Feasibility::Feasible(x) => {
                assert!(x[0] > ratio(1, 2) && x[0] < ratio(2, 3), "witness {x:?}");
            }
            Feasibility::Infeasible => panic!(),
        }
    }

    #[test]
    fn range_integerization() {
        let r = VertexRange { lo: 6, lo_strict: true, hi: Some(8), hi_strict: false };
        assert_eq!(r.integerize(), Some(IntRange { lo: 7, hi: Some(8) }));
        let r = VertexRange { lo: 6, lo_strict: true, hi: Some(7), hi_strict: true };
        assert_eq!(r.integerize(), None);
        assert!(!r.is_empty_real());
        let r = VertexRange { lo: 5, lo_strict: false, hi: Some(5), hi_strict: true };
        assert!(r.is_empty_real());
    }

    #[test]
    fn tighten_narrows_ranges() {
        let mut r = VertexRange::unconstrained();
        r.tighten_lo(6, true);
        r.tighten_hi(10, true);
        r.tighten_hi(8, false);
        assert_eq!(r, VertexRange { lo: 6, lo_strict: true, hi: Some(8), hi_strict: false });
        r.tighten_lo(6, false);
        assert!(r.lo_strict, "an existing strict bound never loosens");
        r.tighten_hi(8, true);
        assert!(r.hi_strict);
    }
}
