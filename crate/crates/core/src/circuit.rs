//! Division-free arithmetic circuits with input and parameter leaves.
//!
//! A [`Circuit`] stores its nodes in topological order: every gate refers only
//! to earlier nodes, so acyclicity holds by construction. Build circuits with
//! [`CircuitBuilder`], which also tracks which multiplications are essential.

use serde::{Deserialize, Serialize};

use crate::exact::{Coefficient, ExactError, Rational};
use crate::poly::{Polynomial, QPoly};

pub const DEFAULT_EXPANSION_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("arity mismatch for {what}: expected {expected}, got {got}")]
    ArityMismatch { what: &'static str, expected: usize, got: usize },
    #[error("expansion cap exceeded at node {node}: {terms} terms > cap {cap}")]
    ExpansionCapExceeded { node: usize, terms: usize, cap: usize },
    #[error("malformed circuit: {0}")]
    Malformed(String),
    #[error("circuit has no inputs or parameters to fix the scalar ring")]
    NoRingContext,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "args", rename_all = "snake_case")]
pub enum NodeKind {
    Input(usize),
    Param(usize),
    /// Parameter plus a rational offset, a polynomial parameter leaf.
    ShiftedParam(usize, Rational),
    Const(Rational),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
}

impl NodeKind {
    pub fn is_leaf(&self) -> bool {
        matches!(
            self,
            NodeKind::Input(_) | NodeKind::Param(_) | NodeKind::ShiftedParam(..) | NodeKind::Const(_)
        )
    }

    fn children(&self) -> Option<(usize, usize)> {
        match *self {
            NodeKind::Add(a, b) | NodeKind::Sub(a, b) | NodeKind::Mul(a, b) => Some((a, b)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    #[serde(flatten)]
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub essential: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub n: usize,
    pub r: usize,
    pub nodes: Vec<Node>,
    pub output: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSize {
    pub gates: usize,
    pub leaves: usize,
    pub essential_muls: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

pub struct CircuitBuilder {
    n: usize,
    r: usize,
    nodes: Vec<Node>,
    uses_input: Vec<bool>,
}

impl CircuitBuilder {
    pub fn new(n: usize, r: usize) -> Self {
        CircuitBuilder { n, r, nodes: Vec::new(), uses_input: Vec::new() }
    }

    fn push(&mut self, kind: NodeKind) -> NodeId {
        let (uses_input, essential) = match &kind {
            NodeKind::Input(_) => (true, false),
            NodeKind::Param(_) | NodeKind::ShiftedParam(..) | NodeKind::Const(_) => (false, false),
            NodeKind::Add(a, b) | NodeKind::Sub(a, b) => {
                (self.uses_input[*a] || self.uses_input[*b], false)
            }
            NodeKind::Mul(a, b) => {
                let both = self.uses_input[*a] && self.uses_input[*b];
                (self.uses_input[*a] || self.uses_input[*b], both)
            }
        };
        let id = self.nodes.len();
        self.nodes.push(Node { id, kind, essential });
        self.uses_input.push(uses_input);
        NodeId(id)
    }

    pub fn input(&mut self, i: usize) -> NodeId {
        assert!(i < self.n, "input index out of range");
        self.push(NodeKind::Input(i))
    }

    pub fn param(&mut self, j: usize) -> NodeId {
        assert!(j < self.r, "parameter index out of range");
        self.push(NodeKind::Param(j))
    }

    pub fn shifted_param(&mut self, j: usize, offset: Rational) -> NodeId {
        assert!(j < self.r, "parameter index out of range");
        self.push(NodeKind::ShiftedParam(j, offset))
    }

    pub fn constant(&mut self, value: Rational) -> NodeId {
        self.push(NodeKind::Const(value))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(NodeKind::Add(a.0, b.0))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(NodeKind::Sub(a.0, b.0))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(NodeKind::Mul(a.0, b.0))
    }

    /// Left-to-right sum; panics on an empty slice.
    pub fn sum(&mut self, items: &[NodeId]) -> NodeId {
        let mut acc = items[0];
        for &x in &items[1..] {
            acc = self.add(acc, x);
        }
        acc
    }

    pub fn product(&mut self, items: &[NodeId]) -> NodeId {
        let mut acc = items[0];
        for &x in &items[1..] {
            acc = self.mul(acc, x);
        }
        acc
    }

    pub fn finish(self, output: NodeId) -> Circuit {
        Circuit { n: self.n, r: self.r, nodes: self.nodes, output: output.0 }
    }
}

impl Circuit {
    /// Check index ranges and ordering, and recompute the essential flags.
    pub fn validated(mut self) -> Result<Circuit, CircuitError> {
        if self.nodes.is_empty() {
            return Err(CircuitError::Malformed("no nodes".into()));
        }
        if self.output >= self.nodes.len() {
            return Err(CircuitError::Malformed(format!("output {} out of range", self.output)));
        }
        let mut uses_input = Vec::with_capacity(self.nodes.len());
        for (pos, node) in self.nodes.iter_mut().enumerate() {
            if node.id != pos {
                return Err(CircuitError::Malformed(format!("node at position {pos} has id {}", node.id)));
            }
            let (u, e) = match &node.kind {
                NodeKind::Input(i) => {
                    if *i >= self.n {
                        return Err(CircuitError::Malformed(format!("input {i} >= n = {}", self.n)));
                    }
                    (true, false)
                }
                NodeKind::Param(j) | NodeKind::ShiftedParam(j, _) => {
                    if *j >= self.r {
                        return Err(CircuitError::Malformed(format!("param {j} >= r = {}", self.r)));
                    }
                    (false, false)
                }
                NodeKind::Const(_) => (false, false),
                kind => {
                    let (a, b) = kind.children().expect("gate");
                    if a >= pos || b >= pos {
                        return Err(CircuitError::Malformed(format!(
                            "node {pos} refers to a later node"
                        )));
                    }
                    let ua: bool = uses_input[a];
                    let ub: bool = uses_input[b];
                    (ua || ub, matches!(kind, NodeKind::Mul(..)) && ua && ub)
                }
            };
            node.essential = e;
            uses_input.push(u);
        }
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }

    pub fn from_json(text: &str) -> Result<Circuit, CircuitError> {
        let c: Circuit =
            serde_json::from_str(text).map_err(|e| CircuitError::Malformed(e.to_string()))?;
        c.validated()
    }

    pub fn size(&self) -> CircuitSize {
        let leaves = self.nodes.iter().filter(|n| n.kind.is_leaf()).count();
        CircuitSize {
            gates: self.nodes.len() - leaves,
            leaves,
            essential_muls: self.nodes.iter().filter(|n| n.essential).count(),
        }
    }

    fn check_arity<R>(&self, params: &[R], inputs: &[R]) -> Result<(), CircuitError> {
        if params.len() != self.r {
            return Err(CircuitError::ArityMismatch { what: "parameters", expected: self.r, got: params.len() });
        }
        if inputs.len() != self.n {
            return Err(CircuitError::ArityMismatch { what: "inputs", expected: self.n, got: inputs.len() });
        }
        Ok(())
    }

    /// Evaluate with every leaf in one ring, taken from the first supplied value.
    pub fn evaluate<R: Coefficient>(&self, params: &[R], inputs: &[R]) -> Result<R, CircuitError> {
        let ring = params.first().or(inputs.first()).ok_or(CircuitError::NoRingContext)?.zero_like();
        self.evaluate_in(&ring, params, inputs)
    }

    pub fn evaluate_in<R: Coefficient>(
        &self,
        ring: &R,
        params: &[R],
        inputs: &[R],
    ) -> Result<R, CircuitError> {
        self.check_arity(params, inputs)?;
        self.run(ring, params, inputs, |_, _| Ok(()))
    }

    fn run<R: Coefficient>(
        &self,
        ring: &R,
        params: &[R],
        inputs: &[R],
        mut check: impl FnMut(usize, &R) -> Result<(), CircuitError>,
    ) -> Result<R, CircuitError> {
        let mut vals: Vec<R> = Vec::with_capacity(self.nodes.len());
        for (pos, node) in self.nodes.iter().enumerate() {
            let v = match &node.kind {
                NodeKind::Input(i) => inputs[*i].clone(),
                NodeKind::Param(j) => params[*j].clone(),
                NodeKind::ShiftedParam(j, off) => params[*j].clone() + ring.from_rational_like(off)?,
                NodeKind::Const(c) => ring.from_rational_like(c)?,
                NodeKind::Add(a, b) => vals[*a].clone() + vals[*b].clone(),
                NodeKind::Sub(a, b) => vals[*a].clone() - vals[*b].clone(),
                NodeKind::Mul(a, b) => vals[*a].clone() * vals[*b].clone(),
            };
            check(pos, &v)?;
            vals.push(v);
        }
        Ok(vals.swap_remove(self.output))
    }

    /// Final result as a polynomial in the inputs with coefficients in `R`,
    /// aborting once any intermediate node exceeds `cap` terms.
    pub fn expand_with<R: Coefficient>(
        &self,
        ring: &R,
        params: &[R],
        cap: usize,
    ) -> Result<Polynomial<R>, CircuitError> {
        if params.len() != self.r {
            return Err(CircuitError::ArityMismatch { what: "parameters", expected: self.r, got: params.len() });
        }
        let pring = Polynomial::zero(self.n, ring);
        let lifted: Vec<Polynomial<R>> =
            params.iter().map(|p| Polynomial::constant(self.n, p.clone())).collect();
        let xs: Vec<Polynomial<R>> = (0..self.n).map(|i| Polynomial::var(self.n, i, ring)).collect();
        self.run(&pring, &lifted, &xs, |node, v| {
            if v.term_count() > cap {
                Err(CircuitError::ExpansionCapExceeded { node, terms: v.term_count(), cap })
            } else {
                Ok(())
            }
        })
    }

    pub fn expand(&self, params: &[Rational], cap: usize) -> Result<QPoly, CircuitError> {
        self.expand_with(&Rational::zero(), params, cap)
    }

    /// Final result as a polynomial in `r + n` variables, parameters first.
    pub fn expand_symbolic(&self, cap: usize) -> Result<QPoly, CircuitError> {
        let total = self.r + self.n;
        let vars: Vec<QPoly> = (0..total).map(|i| QPoly::var_q(total, i)).collect();
        let ring = QPoly::zero_q(total);
        self.run(&ring, &vars[..self.r], &vars[self.r..], |node, v| {
            if v.term_count() > cap {
                Err(CircuitError::ExpansionCapExceeded { node, terms: v.term_count(), cap })
            } else {
                Ok(())
            }
        })
    }
}

/// Parameter count of [`generic_computation`].
pub fn generic_param_arity(l: usize, n: usize) -> usize {
    (l + n + 1) * (l + n + 1)
}

/// Index layout of the generic computation's parameters: for each step
/// `i = 1..=L` the left then right affine coefficients over `(1, X1..Xn,
/// p1..p_{i-1})`, then the output coefficients over `(1, X1..Xn, p1..pL)`,
/// then unused padding up to `(L+n+1)^2`.
pub fn generic_layout(l: usize, n: usize) -> (Vec<(std::ops::Range<usize>, std::ops::Range<usize>)>, std::ops::Range<usize>) {
    let mut at = 0;
    let mut steps = Vec::with_capacity(l);
    for i in 1..=l {
        let w = n + i;
        steps.push((at..at + w, at + w..at + 2 * w));
        at += 2 * w;
    }
    (steps, at..at + n + l + 1)
}

/// Universal circuit for the `n`-variate polynomials computable with at most
/// `L` essential multiplications.
pub fn generic_computation(l: usize, n: usize) -> Circuit {
    assert!(n >= 1, "at least one input");
    let r = generic_param_arity(l, n);
    let mut b = CircuitBuilder::new(n, r);
    let xs: Vec<NodeId> = (0..n).map(|i| b.input(i)).collect();
    let mut ps: Vec<NodeId> = Vec::new();
    let (steps, out) = generic_layout(l, n);

    fn affine(b: &mut CircuitBuilder, coeffs: std::ops::Range<usize>, terms: &[NodeId]) -> NodeId {
        let mut acc = b.param(coeffs.start);
        for (k, &t) in terms.iter().enumerate() {
            let c = b.param(coeffs.start + 1 + k);
            let prod = b.mul(c, t);
            acc = b.add(acc, prod);
        }
        acc
    }

    for (left, right) in steps {
        let terms: Vec<NodeId> = xs.iter().chain(ps.iter()).copied().collect();
        let a = affine(&mut b, left, &terms);
        let c = affine(&mut b, right, &terms);
        ps.push(b.mul(a, c));
    }
    let terms: Vec<NodeId> = xs.iter().chain(ps.iter()).copied().collect();
    let o = affine(&mut b, out, &terms);
    b.finish(o)
}
