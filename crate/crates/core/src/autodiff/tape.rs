//! Reverse-mode tape.
//!
//! Every operation on a [`Var`] appends one node holding its value, the kind
//! of primitive that produced it and the local partial derivatives with
//! respect to its parents. Parents always precede children, so a single
//! backward pass over the node list in reverse order propagates adjoints.
//!
//! Constants never touch the tape: a `Var` without a tape reference is a
//! plain number and contributes no edges.

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{AdError, Scalar};

/// Primitive that produced a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Input,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Tanh,
    Ln,
    Pow,
    Abs,
    /// Fused multiply-accumulate, `Σ a_i b_i`.
    Dot,
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    parent: u32,
    partial: f64,
}

/// One recorded operation.
#[derive(Debug, Clone, Copy)]
pub struct TapeNode {
    pub op: OpKind,
    pub value: f64,
    edge_start: u32,
    edge_end: u32,
}

#[derive(Debug, Default)]
struct Inner {
    nodes: Vec<TapeNode>,
    edges: Vec<Edge>,
}

/// Append-only record of operations for one evaluation.
#[derive(Debug, Default)]
pub struct Tape {
    inner: RefCell<Inner>,
}

/// A differentiable scalar. Cheap to copy.
#[derive(Debug, Clone, Copy)]
pub struct Var<'t> {
    tape: Option<&'t Tape>,
    index: u32,
    value: f64,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(nodes: usize) -> Self {
        Self {
            inner: RefCell::new(Inner {
                nodes: Vec::with_capacity(nodes),
                edges: Vec::with_capacity(2 * nodes),
            }),
        }
    }

    /// Drop all recorded nodes, keeping the allocation.
    pub fn clear(&mut self) {
        let inner = self.inner.get_mut();
        inner.nodes.clear();
        inner.edges.clear();
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Register an independent variable.
    pub fn input(&self, value: f64) -> Var<'_> {
        self.push(OpKind::Input, value, &[])
    }

    pub fn inputs(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.input(v)).collect()
    }

    pub fn node(&self, index: usize) -> TapeNode {
        self.inner.borrow().nodes[index]
    }

    /// Parent indices and local partials of a node.
    pub fn parents(&self, index: usize) -> Vec<(usize, f64)> {
        let inner = self.inner.borrow();
        let node = inner.nodes[index];
        inner.edges[node.edge_start as usize..node.edge_end as usize]
            .iter()
            .map(|e| (e.parent as usize, e.partial))
            .collect()
    }

    fn push(&self, op: OpKind, value: f64, edges: &[(Var<'_>, f64)]) -> Var<'_> {
        let mut inner = self.inner.borrow_mut();
        let edge_start = inner.edges.len() as u32;
        for &(parent, partial) in edges {
            if parent.tape.is_some() && partial != 0.0 {
                inner.edges.push(Edge {
                    parent: parent.index,
                    partial,
                });
            }
        }
        let edge_end = inner.edges.len() as u32;
        let index = inner.nodes.len() as u32;
        inner.nodes.push(TapeNode {
            op,
            value,
            edge_start,
            edge_end,
        });
        Var {
            tape: Some(self),
            index,
            value,
        }
    }

    /// Adjoints of every node with respect to `output`.
    pub fn backward(&self, output: Var<'_>) -> Result<Adjoints, AdError> {
        let inner = self.inner.borrow();
        if inner.nodes.is_empty() {
            return Err(AdError::EmptyTape);
        }
        if !output.value.is_finite() {
            return Err(AdError::NonFinite(output.value));
        }
        let mut adjoint = vec![0.0; inner.nodes.len()];
        if output.tape.is_some() {
            adjoint[output.index as usize] = 1.0;
            for i in (0..=output.index as usize).rev() {
                let a = adjoint[i];
                if a == 0.0 {
                    continue;
                }
                let node = inner.nodes[i];
                for e in &inner.edges[node.edge_start as usize..node.edge_end as usize] {
                    adjoint[e.parent as usize] += a * e.partial;
                }
            }
        }
        Ok(Adjoints { adjoint })
    }
}

/// Result of a backward sweep.
#[derive(Debug, Clone)]
pub struct Adjoints {
    adjoint: Vec<f64>,
}

impl Adjoints {
    pub fn wrt(&self, var: Var<'_>) -> f64 {
        match var.tape {
            Some(_) => self.adjoint[var.index as usize],
            None => 0.0,
        }
    }

    pub fn wrt_all(&self, vars: &[Var<'_>]) -> Vec<f64> {
        vars.iter().map(|&v| self.wrt(v)).collect()
    }
}

impl<'t> Var<'t> {
    pub fn constant(value: f64) -> Self {
        Var {
            tape: None,
            index: u32::MAX,
            value,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.tape.is_none()
    }

    pub fn index(&self) -> Option<usize> {
        self.tape.map(|_| self.index as usize)
    }

    fn unary(self, op: OpKind, value: f64, partial: f64) -> Self {
        match self.tape {
            Some(t) => t.push(op, value, &[(self, partial)]),
            None => Var::constant(value),
        }
    }

    fn binary(self, other: Self, op: OpKind, value: f64, pa: f64, pb: f64) -> Self {
        match self.tape.or(other.tape) {
            Some(t) => t.push(op, value, &[(self, pa), (other, pb)]),
            None => Var::constant(value),
        }
    }
}

impl<'t> Add for Var<'t> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.binary(rhs, OpKind::Add, self.value + rhs.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.binary(rhs, OpKind::Sub, self.value - rhs.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.binary(rhs, OpKind::Mul, self.value * rhs.value, rhs.value, self.value)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q = self.value / rhs.value;
        self.binary(rhs, OpKind::Div, q, 1.0 / rhs.value, -q / rhs.value)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Self;
    fn neg(self) -> Self {
        self.unary(OpKind::Neg, -self.value, -1.0)
    }
}

impl<'t> Scalar for Var<'t> {
    fn from_f64(v: f64) -> Self {
        Var::constant(v)
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn tanh(self) -> Self {
        let t = self.value.tanh();
        self.unary(OpKind::Tanh, t, 1.0 - t * t)
    }

    fn ln(self) -> Self {
        self.unary(OpKind::Ln, self.value.ln(), 1.0 / self.value)
    }

    fn powf(self, exponent: f64) -> Self {
        let v = self.value.powf(exponent);
        self.unary(OpKind::Pow, v, exponent * self.value.powf(exponent - 1.0))
    }

    fn abs(self) -> Self {
        let sign = if self.value > 0.0 {
            1.0
        } else if self.value < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.unary(OpKind::Abs, self.value.abs(), sign)
    }

    fn dot(a: &[Self], b: &[Self]) -> Self {
        debug_assert_eq!(a.len(), b.len());
        let value = a
            .iter()
            .zip(b)
            .fold(0.0, |acc, (x, y)| acc + x.value * y.value);
        let tape = a.iter().chain(b).find_map(|v| v.tape);
        match tape {
            Some(t) => {
                let mut edges = Vec::with_capacity(2 * a.len());
                for (&x, &y) in a.iter().zip(b) {
                    edges.push((x, y.value));
                    edges.push((y, x.value));
                }
                t.push(OpKind::Dot, value, &edges)
            }
            None => Var::constant(value),
        }
    }
}
