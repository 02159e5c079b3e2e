//! Define-by-run reverse-mode tape over [`Tensor`] values.
//!
//! A fresh [`Tape`] is built for every forward pass. Nodes are appended in
//! evaluation order, so the node list is already topologically sorted and
//! [`Tape::backward`] is a single reverse sweep.

use serde::{Deserialize, Serialize};

use crate::diff::spectral::{self, SpectralCache, SpectralShape};
use crate::diff::tensor::{gemm_nn, gemm_nt, gemm_tn, Tensor};
use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Gelu,
    Tanh,
    Identity,
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + 0.044715 * x * x * x)).tanh())
}

fn gelu_grad(x: f64) -> f64 {
    let u = GELU_C * (x + 0.044715 * x * x * x);
    let th = u.tanh();
    0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * GELU_C * (1.0 + 3.0 * 0.044715 * x * x)
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Gelu => gelu(x),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Gelu => gelu_grad(x),
            Activation::Tanh => 1.0 - x.tanh().powi(2),
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    /// `a . b^T`
    MatMulNt(Var, Var),
    /// `x[m x n] + b[n]`, bias broadcast over rows.
    AddBias(Var, Var),
    /// `x + s` with `s` a one-element tensor.
    AddScalar(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Activate(Var, Activation),
    Abs(Var),
    Square(Var),
    Sum(Var),
    Mean(Var),
    /// Each input flattened into one column of the output.
    StackCols(Vec<Var>),
    Reshape(Var),
    Spectral {
        x: Var,
        w_re: Var,
        w_im: Var,
        cache: Box<SpectralCache>,
    },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Gradients produced by one backward sweep.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    /// Gradient of the loss with respect to `v`; zero when `v` is off the loss path.
    pub fn wrt(&self, v: Var) -> Tensor {
        match &self.grads[v.0] {
            Some(g) => g.clone(),
            None => Tensor::zeros(&self.shapes[v.0]),
        }
    }

    pub fn take(&mut self, v: Var) -> Tensor {
        self.grads[v.0]
            .take()
            .unwrap_or_else(|| Tensor::zeros(&self.shapes[v.0]))
    }
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.leaf(value, true)
    }

    /// Constant leaf (no gradient).
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var], name: &'static str) -> Result<Var> {
        let value = value.ensure_finite(name)?;
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).matmul(self.value(b))?;
        self.push(out, Op::MatMul(a, b), &[a, b], "matmul")
    }

    /// `a[m x k] . b[n x k]^T`
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.value(a).dims2()?;
        let (n, k2) = self.value(b).dims2()?;
        if k != k2 {
            return Err(Error::shape("matmul_nt", format!("[{m}x{k}] . [{n}x{k2}]^T")));
        }
        let mut out = vec![0.0; m * n];
        gemm_nt(self.value(a).data(), self.value(b).data(), &mut out, m, k, n);
        let out = Tensor::new(vec![m, n], out)?;
        self.push(out, Op::MatMulNt(a, b), &[a, b], "matmul_nt")
    }

    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let (m, n) = self.value(x).dims2()?;
        let b = self.value(bias);
        if b.len() != n {
            return Err(Error::shape("add_bias", format!("{n} columns, bias {:?}", b.shape())));
        }
        let mut out = self.value(x).clone();
        let bd = b.data().to_vec();
        for row in out.data_mut().chunks_mut(n).take(m) {
            for (o, bv) in row.iter_mut().zip(&bd) {
                *o += bv;
            }
        }
        self.push(out, Op::AddBias(x, bias), &[x, bias], "add_bias")
    }

    pub fn add_scalar(&mut self, x: Var, s: Var) -> Result<Var> {
        if self.value(s).len() != 1 {
            return Err(Error::shape("add_scalar", format!("{:?}", self.value(s).shape())));
        }
        let sv = self.value(s).data()[0];
        let out = self.value(x).map(|v| v + sv);
        self.push(out, Op::AddScalar(x, s), &[x, s], "add_scalar")
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).zip_map(self.value(b), "add", |x, y| x + y)?;
        self.push(out, Op::Add(a, b), &[a, b], "add")
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).zip_map(self.value(b), "sub", |x, y| x - y)?;
        self.push(out, Op::Sub(a, b), &[a, b], "sub")
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).zip_map(self.value(b), "mul", |x, y| x * y)?;
        self.push(out, Op::Mul(a, b), &[a, b], "mul")
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Result<Var> {
        let out = self.value(a).map(|v| v * factor);
        self.push(out, Op::Scale(a, factor), &[a], "scale")
    }

    pub fn activate(&mut self, a: Var, act: Activation) -> Result<Var> {
        if act == Activation::Identity {
            return Ok(a);
        }
        let out = self.value(a).map(|v| act.apply(v));
        self.push(out, Op::Activate(a, act), &[a], "activation")
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        self.activate(a, Activation::Relu)
    }

    pub fn gelu(&mut self, a: Var) -> Result<Var> {
        self.activate(a, Activation::Gelu)
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        self.activate(a, Activation::Tanh)
    }

    pub fn abs(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).map(f64::abs);
        self.push(out, Op::Abs(a), &[a], "abs")
    }

    pub fn square(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).map(|v| v * v);
        self.push(out, Op::Square(a), &[a], "square")
    }

    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let out = Tensor::scalar(self.value(a).sum());
        self.push(out, Op::Sum(a), &[a], "sum")
    }

    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let t = self.value(a);
        if t.is_empty() {
            return Err(Error::shape("mean", "empty tensor"));
        }
        let out = Tensor::scalar(t.sum() / t.len() as f64);
        self.push(out, Op::Mean(a), &[a], "mean")
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        let out = self.value(a).clone().reshape(shape)?;
        self.push(out, Op::Reshape(a), &[a], "reshape")
    }

    /// Flattens each input into one column: `out[r][c] = inputs[c].data[r]`.
    pub fn stack_cols(&mut self, inputs: &[Var]) -> Result<Var> {
        let cols = inputs.len();
        let rows = inputs.first().map_or(0, |v| self.value(*v).len());
        if cols == 0 || inputs.iter().any(|v| self.value(*v).len() != rows) {
            return Err(Error::shape("stack_cols", "inputs must be non-empty and equal length"));
        }
        let mut out = vec![0.0; rows * cols];
        for (c, v) in inputs.iter().enumerate() {
            for (r, &x) in self.value(*v).data().iter().enumerate() {
                out[r * cols + c] = x;
            }
        }
        let out = Tensor::new(vec![rows, cols], out)?;
        self.push(out, Op::StackCols(inputs.to_vec()), inputs, "stack_cols")
    }

    pub fn spectral_conv(&mut self, x: Var, w_re: Var, w_im: Var, shape: SpectralShape) -> Result<Var> {
        let (out, cache) =
            spectral::forward(self.value(x), self.value(w_re), self.value(w_im), shape)?;
        self.push(
            out,
            Op::Spectral {
                x,
                w_re,
                w_im,
                cache: Box::new(cache),
            },
            &[x, w_re, w_im],
            "spectral_conv",
        )
    }

    /// Mean squared error against a constant target.
    pub fn mse(&mut self, pred: Var, target: Var) -> Result<Var> {
        let d = self.sub(pred, target)?;
        let sq = self.square(d)?;
        self.mean(sq)
    }

    /// Mean absolute error against a constant target.
    pub fn mae(&mut self, pred: Var, target: Var) -> Result<Var> {
        let d = self.sub(pred, target)?;
        let a = self.abs(d)?;
        self.mean(a)
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let lv = self.value(loss);
        if lv.len() != 1 {
            return Err(Error::shape(
                "backward",
                format!("loss must be scalar, got {:?}", lv.shape()),
            ));
        }
        let n = loss.0 + 1;
        let mut grads: Vec<Option<Tensor>> = (0..n).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::full(lv.shape(), 1.0));

        for id in (0..n).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &self.nodes[id];
            if !node.requires_grad {
                continue;
            }
            for (input, contribution) in self.adjoint(node, &g)? {
                if !self.nodes[input.0].requires_grad {
                    continue;
                }
                match &mut grads[input.0] {
                    Some(acc) => acc.add_assign(&contribution),
                    slot => *slot = Some(contribution),
                }
            }
            grads[id] = Some(g);
        }
        let grads = grads
            .into_iter()
            .chain((n..self.nodes.len()).map(|_| None))
            .collect();
        let shapes = self.nodes.iter().map(|n| n.value.shape().to_vec()).collect();
        Ok(Gradients { grads, shapes })
    }

    fn adjoint(&self, node: &Node, g: &Tensor) -> Result<Vec<(Var, Tensor)>> {
        let val = |v: Var| &self.nodes[v.0].value;
        let wants = |v: Var| self.nodes[v.0].requires_grad;
        Ok(match &node.op {
            Op::Leaf => Vec::new(),
            Op::MatMul(a, b) => {
                let (m, k) = val(*a).dims2()?;
                let (_, n) = val(*b).dims2()?;
                let mut out = Vec::new();
                if wants(*a) {
                    let mut ga = vec![0.0; m * k];
                    gemm_nt(g.data(), val(*b).data(), &mut ga, m, n, k);
                    out.push((*a, Tensor::new(vec![m, k], ga)?));
                }
                if wants(*b) {
                    let mut gb = vec![0.0; k * n];
                    gemm_tn(val(*a).data(), g.data(), &mut gb, m, k, n);
                    out.push((*b, Tensor::new(vec![k, n], gb)?));
                }
                out
            }
            Op::MatMulNt(a, b) => {
                let (m, k) = val(*a).dims2()?;
                let (n, _) = val(*b).dims2()?;
                let mut out = Vec::new();
                if wants(*a) {
                    let mut ga = vec![0.0; m * k];
                    gemm_nn(g.data(), val(*b).data(), &mut ga, m, n, k);
                    out.push((*a, Tensor::new(vec![m, k], ga)?));
                }
                if wants(*b) {
                    let mut gb = vec![0.0; n * k];
                    gemm_tn(g.data(), val(*a).data(), &mut gb, m, n, k);
                    out.push((*b, Tensor::new(vec![n, k], gb)?));
                }
                out
            }
            Op::AddBias(x, b) => {
                let (_, n) = g.dims2()?;
                let mut gb = vec![0.0; n];
                for row in g.data().chunks(n) {
                    for (acc, v) in gb.iter_mut().zip(row) {
                        *acc += v;
                    }
                }
                let gb = Tensor::new(val(*b).shape().to_vec(), gb)?;
                vec![(*x, g.clone()), (*b, gb)]
            }
            Op::AddScalar(x, s) => vec![(*x, g.clone()), (*s, Tensor::scalar(g.sum()))],
            Op::Add(a, b) => vec![(*a, g.clone()), (*b, g.clone())],
            Op::Sub(a, b) => vec![(*a, g.clone()), (*b, g.map(|v| -v))],
            Op::Mul(a, b) => vec![
                (*a, g.zip_map(val(*b), "mul'", |gv, bv| gv * bv)?),
                (*b, g.zip_map(val(*a), "mul'", |gv, av| gv * av)?),
            ],
            Op::Scale(a, f) => vec![(*a, g.map(|v| v * f))],
            Op::Activate(a, act) => {
                vec![(*a, g.zip_map(val(*a), "activation'", |gv, x| gv * act.derivative(x))?)]
            }
            Op::Abs(a) => vec![(*a, g.zip_map(val(*a), "abs'", |gv, x| gv * sign(x))?)],
            Op::Square(a) => vec![(*a, g.zip_map(val(*a), "square'", |gv, x| 2.0 * gv * x)?)],
            Op::Sum(a) => vec![(*a, Tensor::full(val(*a).shape(), g.data()[0]))],
            Op::Mean(a) => {
                let t = val(*a);
                vec![(*a, Tensor::full(t.shape(), g.data()[0] / t.len() as f64))]
            }
            Op::Reshape(a) => vec![(*a, g.clone().reshape(val(*a).shape())?)],
            Op::StackCols(inputs) => {
                let cols = inputs.len();
                inputs
                    .iter()
                    .enumerate()
                    .map(|(c, v)| {
                        let col: Vec<f64> = g.data().iter().skip(c).step_by(cols).copied().collect();
                        Tensor::new(val(*v).shape().to_vec(), col).map(|t| (*v, t))
                    })
                    .collect::<Result<_>>()?
            }
            Op::Spectral { x, w_re, w_im, cache } => {
                let (gx, gwr, gwi) = spectral::backward(g, val(*w_re), val(*w_im), cache)?;
                vec![(*x, gx), (*w_re, gwr), (*w_im, gwi)]
            }
        })
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
