//! Evaluation of formulas at network vertices under a flow context.
//!
//! Path quantifiers range over target paths: finite paths that start at the
//! vertex of evaluation and end at a target. Since networks may have cycles
//! there can be infinitely many such paths, so quantification runs by
//! formula progression: a breadth-first search over (vertex, residual
//! obligation) pairs, where the residual is the hash-consed remainder of
//! the path formula after the steps taken so far. Residuals are Boolean
//! combinations of subformulas of the original, so the search space is
//! finite.
//!
//! `X` is strong: at the last position of a path `X psi` is false and its
//! negation holds. Positive path quantifiers restrict the search to edges
//! carrying positive flow and therefore need a concrete flow function.
//!
//! Past operators refer to the history of the path before the vertex of
//! evaluation, so paths are anchored: quantification ranges over pairs of a
//! source-to-target path and a position on it at the queried vertex. The
//! truth of all past subformulas is carried as a deterministic tracker
//! updated position by position; a future operator inside a past operator
//! has no such tracker and is rejected.

use std::collections::{HashMap, HashSet, VecDeque};

use num::BigRational;

use crate::flow::FlowFunction;
use crate::formula::{PathFormula, PathQuant, Rel, StateFormula};
use crate::network::{FlowNetwork, VertexSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("flow proposition `{0}` has no flow in scope")]
    UnboundFlowProp(String),
    #[error("threshold `{0}` is not a constant at evaluation time")]
    NonConstantThreshold(String),
    #[error("positive path quantifier in `{0}` needs a concrete flow, not value ranges")]
    PositiveNeedsFlow(String),
    #[error("unsupported nesting: future operator inside past operator in `{0}`")]
    UnsupportedNesting(String),
    #[error("quantifier `{0}` cannot be evaluated in this context")]
    UnexpectedQuantifier(String),
    #[error("placeholder `{0}` cannot be evaluated")]
    Placeholder(String),
    #[error("too many distinct past subformulas (limit 64)")]
    PastOverflow,
}

/// How flow propositions are resolved.
#[derive(Clone, Copy)]
pub enum FlowContext<'a> {
    /// No flow in scope; any flow proposition is an error.
    None,
    /// A concrete flow function; also enables positive path quantifiers.
    Flow(&'a FlowFunction),
    /// One through-flow value per vertex. The general checker uses interval
    /// representatives here, so edge-level information is unavailable.
    Values(&'a [BigRational]),
}

/// Resolver for closed quantified subformulas (flow and value quantifiers),
/// which the evaluator itself does not interpret.
pub type NestedEval<'a> = &'a dyn Fn(&StateFormula, usize) -> Result<bool, EvalError>;

pub struct Evaluator<'a> {
    pub net: &'a FlowNetwork,
    pub ctx: FlowContext<'a>,
    pub nested: Option<NestedEval<'a>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(net: &'a FlowNetwork, ctx: FlowContext<'a>) -> Self {
        Evaluator { net, ctx, nested: None }
    }

    pub fn with_nested(
        net: &'a FlowNetwork,
        ctx: FlowContext<'a>,
        nested: NestedEval<'a>,
    ) -> Self {
        Evaluator { net, ctx, nested: Some(nested) }
    }

    pub fn eval_state(&self, f: &StateFormula, v: usize) -> Result<bool, EvalError> {
        match f {
            StateFormula::True => Ok(true),
            StateFormula::False => Ok(false),
            StateFormula::Atom(p) => Ok(self.net.has_label(v, p)),
            StateFormula::FlowProp(rel, e) => {
                let threshold = e
                    .fold()
                    .const_value()
                    .ok_or_else(|| EvalError::NonConstantThreshold(e.to_string()))?;
                match self.ctx {
                    FlowContext::None => Err(EvalError::UnboundFlowProp(f.to_string())),
                    FlowContext::Flow(flow) => {
                        Ok(rel_holds(*rel, flow.cmp_vertex(self.net, v, threshold)))
                    }
                    FlowContext::Values(vals) => {
                        let t = BigRational::from_integer(threshold.into());
                        Ok(rel_holds(*rel, vals[v].cmp(&t)))
                    }
                }
            }
            StateFormula::Placeholder | StateFormula::ValuePlaceholder(_) => {
                Err(EvalError::Placeholder(f.to_string()))
            }
            StateFormula::Not(a) => Ok(!self.eval_state(a, v)?),
            StateFormula::And(a, b) => Ok(self.eval_state(a, v)? && self.eval_state(b, v)?),
            StateFormula::Or(a, b) => Ok(self.eval_state(a, v)? || self.eval_state(b, v)?),
            StateFormula::Implies(a, b) => {
                Ok(!self.eval_state(a, v)? || self.eval_state(b, v)?)
            }
            StateFormula::Path(q, psi) => self.eval_path_quant(*q, psi, v),
            StateFormula::Flow(..) | StateFormula::Value(..) => match self.nested {
                Some(h) => h(f, v),
                None => Err(EvalError::UnexpectedQuantifier(f.to_string())),
            },
        }
    }

    /// Truth of `f` at every vertex.
    pub fn eval_state_set(&self, f: &StateFormula) -> Result<VertexSet, EvalError> {
        let mut set = VertexSet::empty(self.net.vertex_count());
        for v in 0..self.net.vertex_count() {
            if self.eval_state(f, v)? {
                set.insert(v);
            }
        }
        Ok(set)
    }

    fn eval_path_quant(
        &self,
        q: PathQuant,
        psi: &PathFormula,
        v: usize,
    ) -> Result<bool, EvalError> {
        if q.is_positive() && !matches!(self.ctx, FlowContext::Flow(_)) {
            let shown = StateFormula::Path(q, Box::new(psi.clone()));
            return Err(EvalError::PositiveNeedsFlow(shown.to_string()));
        }
        // Universal quantifiers dualize to existential search for a
        // violating path over the same path domain.
        let (negate, exists_psi);
        if q.is_universal() {
            negate = true;
            exists_psi = PathFormula::Not(Box::new(psi.clone()));
        } else {
            negate = false;
            exists_psi = psi.clone();
        }
        let positive_only = q.is_positive();
        let found = self.exists_path(&exists_psi, v, positive_only)?;
        Ok(negate != found)
    }

    fn successors(&self, u: usize, positive_only: bool) -> Vec<usize> {
        let mut out = Vec::new();
        for &e in self.net.out_edges(u) {
            if positive_only {
                let FlowContext::Flow(flow) = self.ctx else { unreachable!() };
                if !flow.edge_positive(e) {
                    continue;
                }
            }
            out.push(self.net.edges()[e].to);
        }
        out
    }

    /// Does some target path from `v` (anchored through `v` when past
    /// operators occur) satisfy `psi`?
    fn exists_path(
        &self,
        psi: &PathFormula,
        v: usize,
        positive_only: bool,
    ) -> Result<bool, EvalError> {
        let mut arena = Arena::default();
        let root = arena.intern_path(psi, false)?;

        if arena.past.nodes.is_empty() {
            let start = Tracker(0);
            return self.search(&mut arena, &[(v, start)], root, positive_only);
        }

        // Phase one: gather every past-tracker state that can hold on
        // arrival at `v` along some walk from the source.
        let mut seen: HashSet<(usize, Tracker)> = HashSet::new();
        let mut queue: VecDeque<(usize, Tracker)> = VecDeque::new();
        let s = self.net.source();
        let t0 = self.init_tracker(&arena, s)?;
        seen.insert((s, t0));
        queue.push_back((s, t0));
        let mut anchors = Vec::new();
        while let Some((u, tr)) = queue.pop_front() {
            if u == v {
                anchors.push((u, tr));
            }
            for w in self.successors(u, positive_only) {
                let next = self.step_tracker(&arena, tr, u, w)?;
                if seen.insert((w, next)) {
                    queue.push_back((w, next));
                }
            }
        }
        self.search(&mut arena, &anchors, root, positive_only)
    }

    /// Phase two: progress the residual from each anchor state.
    fn search(
        &self,
        arena: &mut Arena,
        starts: &[(usize, Tracker)],
        root: NodeId,
        positive_only: bool,
    ) -> Result<bool, EvalError> {
        let mut seen: HashSet<(usize, Tracker, NodeId)> = HashSet::new();
        let mut queue: VecDeque<(usize, Tracker, NodeId)> = VecDeque::new();
        for &(u, tr) in starts {
            if seen.insert((u, tr, root)) {
                queue.push_back((u, tr, root));
            }
        }
        while let Some((u, tr, rid)) = queue.pop_front() {
            if self.net.is_target(u) && self.fin(arena, rid, u, tr)? {
                return Ok(true);
            }
            let stepped = self.progress(arena, rid, u, tr)?;
            if stepped == Arena::FALSE {
                continue;
            }
            for w in self.successors(u, positive_only) {
                let next_tr = if arena.past.nodes.is_empty() {
                    tr
                } else {
                    self.step_tracker(arena, tr, u, w)?
                };
                if seen.insert((w, next_tr, stepped)) {
                    queue.push_back((w, next_tr, stepped));
                }
            }
        }
        Ok(false)
    }

    fn lit_truth(
        &self,
        arena: &Arena,
        idx: usize,
        neg: bool,
        u: usize,
        tr: Tracker,
    ) -> Result<bool, EvalError> {
        let raw = match &arena.lits[idx] {
            Lit::State(f) => self.eval_state(f, u)?,
            Lit::Past(expr) => self.eval_past_expr(expr, u, tr)?,
        };
        Ok(raw != neg)
    }

    fn eval_past_expr(
        &self,
        expr: &PastExpr,
        u: usize,
        tr: Tracker,
    ) -> Result<bool, EvalError> {
        match expr {
            PastExpr::State(f) => self.eval_state(f, u),
            PastExpr::Slot(i) => Ok(tr.get(*i)),
            PastExpr::Not(a) => Ok(!self.eval_past_expr(a, u, tr)?),
            PastExpr::And(a, b) => {
                Ok(self.eval_past_expr(a, u, tr)? && self.eval_past_expr(b, u, tr)?)
            }
            PastExpr::Or(a, b) => {
                Ok(self.eval_past_expr(a, u, tr)? || self.eval_past_expr(b, u, tr)?)
            }
        }
    }

    /// Tracker at the first position of a path starting at `u`: nothing has
    /// a yesterday, and `a S b` reduces to `b`.
    fn init_tracker(&self, arena: &Arena, u: usize) -> Result<Tracker, EvalError> {
        let mut tr = Tracker(0);
        for (i, node) in arena.past.nodes.iter().enumerate() {
            let val = match node {
                PastNode::Yesterday(_) => false,
                PastNode::Since(_, b) => self.eval_past_expr(b, u, tr)?,
            };
            tr.set(i, val);
        }
        Ok(tr)
    }

    /// Tracker after moving from `u` (with tracker `tr`) to `w`. Nodes are
    /// in dependency order, so slots read during evaluation at `w` are
    /// already updated.
    fn step_tracker(
        &self,
        arena: &Arena,
        tr: Tracker,
        u: usize,
        w: usize,
    ) -> Result<Tracker, EvalError> {
        let mut next = Tracker(0);
        for (i, node) in arena.past.nodes.iter().enumerate() {
            let val = match node {
                PastNode::Yesterday(a) => self.eval_past_expr(a, u, tr)?,
                PastNode::Since(a, b) => {
                    self.eval_past_expr(b, w, next)?
                        || (self.eval_past_expr(a, w, next)? && tr.get(i))
                }
            };
            next.set(i, val);
        }
        Ok(next)
    }

    /// Residual obligation for the rest of the path after taking one step
    /// from `u`. Literals collapse to constants, temporal operators unfold.
    fn progress(
        &self,
        arena: &mut Arena,
        rid: NodeId,
        u: usize,
        tr: Tracker,
    ) -> Result<NodeId, EvalError> {
        let node = arena.nodes[rid.0 as usize].clone();
        Ok(match node {
            Node::Const(b) => arena.constant(b),
            Node::Lit { idx, neg } => {
                arena.constant(self.lit_truth(arena, idx as usize, neg, u, tr)?)
            }
            Node::And(children) => {
                let mut ids = Vec::with_capacity(children.len());
                for c in children.iter() {
                    ids.push(self.progress(arena, *c, u, tr)?);
                }
                arena.mk_and(ids)
            }
            Node::Or(children) => {
                let mut ids = Vec::with_capacity(children.len());
                for c in children.iter() {
                    ids.push(self.progress(arena, *c, u, tr)?);
                }
                arena.mk_or(ids)
            }
            Node::Next(a) | Node::WeakNext(a) => a,
            Node::Until(a, b) => {
                let pb = self.progress(arena, b, u, tr)?;
                let pa = self.progress(arena, a, u, tr)?;
                let cont = arena.mk_and(vec![pa, rid]);
                arena.mk_or(vec![pb, cont])
            }
            Node::Release(a, b) => {
                let pb = self.progress(arena, b, u, tr)?;
                let pa = self.progress(arena, a, u, tr)?;
                let cont = arena.mk_or(vec![pa, rid]);
                arena.mk_and(vec![pb, cont])
            }
        })
    }

    /// Truth of a residual on the single-position path at `u`: a strong
    /// next fails, a weak one holds, `U` and `R` reduce to their right
    /// argument.
    fn fin(
        &self,
        arena: &Arena,
        rid: NodeId,
        u: usize,
        tr: Tracker,
    ) -> Result<bool, EvalError> {
        let node = &arena.nodes[rid.0 as usize];
        Ok(match node.clone() {
            Node::Const(b) => b,
            Node::Lit { idx, neg } => self.lit_truth(arena, idx as usize, neg, u, tr)?,
            Node::And(children) => {
                for c in children.iter() {
                    if !self.fin(arena, *c, u, tr)? {
                        return Ok(false);
                    }
                }
                true
            }
            Node::Or(children) => {
                for c in children.iter() {
                    if self.fin(arena, *c, u, tr)? {
                        return Ok(true);
                    }
                }
                false
            }
            Node::Next(_) => false,
            Node::WeakNext(_) => true,
            Node::Until(_, b) | Node::Release(_, b) => self.fin(arena, b, u, tr)?,
        })
    }
}

pub(crate) fn rel_holds(rel: Rel, ord: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match rel {
        Rel::Gt => ord == Greater,
        Rel::Ge => ord != Less,
        Rel::Lt => ord == Less,
        Rel::Le => ord != Greater,
        Rel::Eq => ord == Equal,
    }
}

/// Truth values of all past subformulas at the current position, packed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Tracker(u64);

impl Tracker {
    fn get(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }
    fn set(&mut self, i: usize, val: bool) {
        if val {
            self.0 |= 1 << i;
        } else {
            self.0 &= !(1 << i);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct NodeId(u32);

/// Negation normal form for progression. `F` and `G` are expressed through
/// `Until` and `Release`; literals are state formulas or past formulas.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Const(bool),
    Lit { idx: u32, neg: bool },
    And(Box<[NodeId]>),
    Or(Box<[NodeId]>),
    Next(NodeId),
    WeakNext(NodeId),
    Until(NodeId, NodeId),
    Release(NodeId, NodeId),
}

#[derive(Debug)]
enum Lit {
    State(StateFormula),
    Past(PastExpr),
}

/// Boolean expression over state formulas and tracker slots.
#[derive(Debug, Clone)]
enum PastExpr {
    State(StateFormula),
    Slot(usize),
    Not(Box<PastExpr>),
    And(Box<PastExpr>, Box<PastExpr>),
    Or(Box<PastExpr>, Box<PastExpr>),
}

#[derive(Debug)]
enum PastNode {
    Yesterday(PastExpr),
    Since(PastExpr, PastExpr),
}

#[derive(Default, Debug)]
struct PastSpace {
    nodes: Vec<PastNode>,
    memo: HashMap<PathFormula, usize>,
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    ids: HashMap<Node, NodeId>,
    lits: Vec<Lit>,
    past: PastSpace,
}

impl Arena {
    const FALSE: NodeId = NodeId(0);

    fn intern(&mut self, node: Node) -> NodeId {
        if self.nodes.is_empty() {
            for seed in [Node::Const(false), Node::Const(true)] {
                let id = NodeId(self.nodes.len() as u32);
                self.nodes.push(seed.clone());
                self.ids.insert(seed, id);
            }
        }
        if let Some(&id) = self.ids.get(&node) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.ids.insert(node, id);
        id
    }

    fn constant(&mut self, b: bool) -> NodeId {
        self.intern(Node::Const(b))
    }

    fn mk_and(&mut self, children: Vec<NodeId>) -> NodeId {
        let mut flat = Vec::new();
        for c in children {
            match &self.nodes[c.0 as usize] {
                Node::Const(false) => return self.constant(false),
                Node::Const(true) => {}
                Node::And(inner) => flat.extend(inner.iter().copied()),
                _ => flat.push(c),
            }
        }
        flat.sort_by_key(|id| id.0);
        flat.dedup();
        match flat.len() {
            0 => self.constant(true),
            1 => flat[0],
            _ => self.intern(Node::And(flat.into_boxed_slice())),
        }
    }

    fn mk_or(&mut self, children: Vec<NodeId>) -> NodeId {
        let mut flat = Vec::new();
        for c in children {
            match &self.nodes[c.0 as usize] {
                Node::Const(true) => return self.constant(true),
                Node::Const(false) => {}
                Node::Or(inner) => flat.extend(inner.iter().copied()),
                _ => flat.push(c),
            }
        }
        flat.sort_by_key(|id| id.0);
        flat.dedup();
        match flat.len() {
            0 => self.constant(false),
            1 => flat[0],
            _ => self.intern(Node::Or(flat.into_boxed_slice())),
        }
    }

    fn lit(&mut self, lit: Lit, neg: bool) -> NodeId {
        let idx = self.lits.len() as u32;
        self.lits.push(lit);
        self.intern(Node::Lit { idx, neg })
    }

    fn intern_path(&mut self, p: &PathFormula, neg: bool) -> Result<NodeId, EvalError> {
        Ok(match p {
            PathFormula::State(s) => {
                let folded = match s {
                    StateFormula::True => Some(!neg),
                    StateFormula::False => Some(neg),
                    _ => None,
                };
                match folded {
                    Some(b) => self.constant(b),
                    None => self.lit(Lit::State(s.clone()), neg),
                }
            }
            PathFormula::Not(a) => self.intern_path(a, !neg)?,
            PathFormula::And(a, b) => {
                let (x, y) = (self.intern_path(a, neg)?, self.intern_path(b, neg)?);
                if neg {
                    self.mk_or(vec![x, y])
                } else {
                    self.mk_and(vec![x, y])
                }
            }
            PathFormula::Or(a, b) => {
                let (x, y) = (self.intern_path(a, neg)?, self.intern_path(b, neg)?);
                if neg {
                    self.mk_and(vec![x, y])
                } else {
                    self.mk_or(vec![x, y])
                }
            }
            PathFormula::Implies(a, b) => {
                let (x, y) = (self.intern_path(a, !neg)?, self.intern_path(b, neg)?);
                if neg {
                    self.mk_and(vec![x, y])
                } else {
                    self.mk_or(vec![x, y])
                }
            }
            PathFormula::Next(a) => {
                let x = self.intern_path(a, neg)?;
                if neg {
                    self.intern(Node::WeakNext(x))
                } else {
                    self.intern(Node::Next(x))
                }
            }
            PathFormula::Finally(a) => {
                let x = self.intern_path(a, neg)?;
                let tt = self.constant(true);
                let ff = self.constant(false);
                if neg {
                    self.intern(Node::Release(ff, x))
                } else {
                    self.intern(Node::Until(tt, x))
                }
            }
            PathFormula::Globally(a) => {
                let x = self.intern_path(a, neg)?;
                let tt = self.constant(true);
                let ff = self.constant(false);
                if neg {
                    self.intern(Node::Until(tt, x))
                } else {
                    self.intern(Node::Release(ff, x))
                }
            }
            PathFormula::Until(a, b) => {
                let (x, y) = (self.intern_path(a, neg)?, self.intern_path(b, neg)?);
                if neg {
                    self.intern(Node::Release(x, y))
                } else {
                    self.intern(Node::Until(x, y))
                }
            }
            PathFormula::Yesterday(_) | PathFormula::Since(..) => {
                let expr = self.intern_past(p)?;
                self.lit(Lit::Past(expr), neg)
            }
        })
    }

    /// Flatten a past-rooted formula into an expression over state formulas
    /// and tracker slots, registering every `Y`/`S` node as a slot.
    fn intern_past(&mut self, p: &PathFormula) -> Result<PastExpr, EvalError> {
        Ok(match p {
            PathFormula::State(s) => PastExpr::State(s.clone()),
            PathFormula::Not(a) => PastExpr::Not(Box::new(self.intern_past(a)?)),
            PathFormula::And(a, b) => PastExpr::And(
                Box::new(self.intern_past(a)?),
                Box::new(self.intern_past(b)?),
            ),
            PathFormula::Or(a, b) => PastExpr::Or(
                Box::new(self.intern_past(a)?),
                Box::new(self.intern_past(b)?),
            ),
            PathFormula::Implies(a, b) => PastExpr::Or(
                Box::new(PastExpr::Not(Box::new(self.intern_past(a)?))),
                Box::new(self.intern_past(b)?),
            ),
            PathFormula::Yesterday(a) => {
                if let Some(&slot) = self.past.memo.get(p) {
                    return Ok(PastExpr::Slot(slot));
                }
                let inner = self.intern_past(a)?;
                self.push_past(p.clone(), PastNode::Yesterday(inner))?
            }
            PathFormula::Since(a, b) => {
                if let Some(&slot) = self.past.memo.get(p) {
                    return Ok(PastExpr::Slot(slot));
                }
                let (x, y) = (self.intern_past(a)?, self.intern_past(b)?);
                self.push_past(p.clone(), PastNode::Since(x, y))?
            }
            PathFormula::Next(_)
            | PathFormula::Finally(_)
            | PathFormula::Globally(_)
            | PathFormula::Until(..) => {
                return Err(EvalError::UnsupportedNesting(p.to_string()));
            }
        })
    }

    fn push_past(&mut self, key: PathFormula, node: PastNode) -> Result<PastExpr, EvalError> {
        let slot = self.past.nodes.len();
        if slot >= 64 {
            return Err(EvalError::PastOverflow);
        }
        self.past.nodes.push(node);
        self.past.memo.insert(key, slot);
        Ok(PastExpr::Slot(slot))
    }
}
