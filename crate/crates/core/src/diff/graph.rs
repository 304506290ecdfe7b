//! Define-by-run reverse-mode differentiation over dense matrices.
//!
//! Every builder method evaluates its node immediately and appends it to a
//! flat tape, so node indices are a topological order by construction.
//! [`Graph::backward`] walks the tape once in reverse.
//!
//! Binary elementwise ops broadcast a `1xC` row, an `Rx1` column, or a `1x1`
//! scalar against the other operand; the backward pass sums the gradient
//! back over the broadcast axis.

use std::collections::{BTreeMap, HashMap};

use crate::diff::params::ParamStore;
use crate::error::GraphError;
use crate::tensor::Tensor;

/// Lower clamp applied to every `log` argument.
pub const LOG_FLOOR: f64 = 1e-12;

/// Handle to a node on a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

#[derive(Clone, Debug)]
pub enum Op {
    Input,
    Param(String),
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Concat {
        inputs: Vec<Var>,
        axis: Axis,
    },
    Slice {
        input: Var,
        axis: Axis,
        start: usize,
        len: usize,
    },
    Sigmoid(Var),
    Tanh(Var),
    /// Row-wise softmax.
    Softmax(Var),
    Log(Var),
    Exp(Var),
    Square(Var),
    Abs(Var),
    Sqrt(Var),
    MaxScalar(Var, f64),
    Scale(Var, f64),
    AddScalar(Var, f64),
    Sum(Var),
    Mean(Var),
    /// Sum over columns, giving an `Rx1` column.
    RowSum(Var),
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::Input => "input",
            Op::Param(_) => "param",
            Op::MatMul(..) => "matmul",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Mul(..) => "mul",
            Op::Concat { .. } => "concat",
            Op::Slice { .. } => "slice",
            Op::Sigmoid(_) => "sigmoid",
            Op::Tanh(_) => "tanh",
            Op::Softmax(_) => "softmax",
            Op::Log(_) => "log",
            Op::Exp(_) => "exp",
            Op::Square(_) => "square",
            Op::Abs(_) => "abs",
            Op::Sqrt(_) => "sqrt",
            Op::MaxScalar(..) => "max_scalar",
            Op::Scale(..) => "scale",
            Op::AddScalar(..) => "add_scalar",
            Op::Sum(_) => "sum",
            Op::Mean(_) => "mean",
            Op::RowSum(_) => "row_sum",
        }
    }
}

struct Node {
    op: Op,
    value: Tensor,
    requires_grad: bool,
}

/// Gradients keyed by parameter identifier.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Gradients {
    map: BTreeMap<String, Tensor>,
}

impl Gradients {
    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.map.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn insert(&mut self, name: impl Into<String>, grad: Tensor) {
        self.map.insert(name.into(), grad);
    }

    pub fn global_norm(&self) -> f64 {
        self.map.values().map(Tensor::sum_sq).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for g in self.map.values_mut() {
            g.data_mut().iter_mut().for_each(|v| *v *= factor);
        }
    }

    /// Rescales so the global L2 norm is at most `max_norm`.
    pub fn clip_global_norm(&mut self, max_norm: f64) -> f64 {
        let norm = self.global_norm();
        if norm > max_norm && norm > 0.0 {
            self.scale(max_norm / norm);
        }
        norm
    }

    /// Name of the first parameter whose gradient is not finite.
    pub fn first_non_finite(&self) -> Option<&str> {
        self.map
            .iter()
            .find(|(_, g)| !g.is_finite())
            .map(|(k, _)| k.as_str())
    }
}

#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
    params: HashMap<String, Var>,
    frozen: Vec<String>,
}

fn broadcast_dim(a: usize, b: usize) -> Option<usize> {
    if a == b {
        Some(a)
    } else if a == 1 {
        Some(b)
    } else if b == 1 {
        Some(a)
    } else {
        None
    }
}

fn broadcast_zip(
    a: &Tensor,
    b: &Tensor,
    shape: (usize, usize),
    f: impl Fn(f64, f64) -> f64,
) -> Tensor {
    if a.shape() == b.shape() {
        return a.zip_map(b, f);
    }
    let (rows, cols) = shape;
    let at = |t: &Tensor, r: usize, c: usize| {
        let rr = if t.rows() == 1 { 0 } else { r };
        let cc = if t.cols() == 1 { 0 } else { c };
        t.get(rr, cc)
    };
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            data.push(f(at(a, r, c), at(b, r, c)));
        }
    }
    Tensor::from_vec(rows, cols, data)
}

/// Sums `grad` over the axes along which `shape` was broadcast.
fn reduce_to(grad: &Tensor, shape: (usize, usize)) -> Tensor {
    if grad.shape() == shape {
        return grad.clone();
    }
    let mut out = Tensor::zeros(shape.0, shape.1);
    for r in 0..grad.rows() {
        let rr = if shape.0 == 1 { 0 } else { r };
        for c in 0..grad.cols() {
            let cc = if shape.1 == 1 { 0 } else { c };
            let v = out.get(rr, cc) + grad.get(r, c);
            out.set(rr, cc, v);
        }
    }
    out
}

fn softmax_rows(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    let cols = x.cols();
    for row in out.data_mut().chunks_mut(cols.max(1)) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    out
}

fn slice(x: &Tensor, axis: Axis, start: usize, len: usize) -> Tensor {
    match axis {
        Axis::Rows => {
            let c = x.cols();
            Tensor::from_vec(len, c, x.data()[start * c..(start + len) * c].to_vec())
        }
        Axis::Cols => {
            let mut data = Vec::with_capacity(x.rows() * len);
            for r in 0..x.rows() {
                data.extend_from_slice(&x.row_slice(r)[start..start + len]);
            }
            Tensor::from_vec(x.rows(), len, data)
        }
    }
}

fn concat(parts: &[&Tensor], axis: Axis) -> Tensor {
    match axis {
        Axis::Rows => {
            let cols = parts[0].cols();
            let rows = parts.iter().map(|t| t.rows()).sum();
            let mut data = Vec::with_capacity(rows * cols);
            for p in parts {
                data.extend_from_slice(p.data());
            }
            Tensor::from_vec(rows, cols, data)
        }
        Axis::Cols => {
            let rows = parts[0].rows();
            let cols = parts.iter().map(|t| t.cols()).sum();
            let mut data = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                for p in parts {
                    data.extend_from_slice(p.row_slice(r));
                }
            }
            Tensor::from_vec(rows, cols, data)
        }
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parameters whose name starts with `prefix` are bound as constants:
    /// they take part in the forward pass but receive no gradient.
    pub fn freeze_prefix(&mut self, prefix: impl Into<String>) {
        self.frozen.push(prefix.into());
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    pub fn op(&self, v: Var) -> &Op {
        &self.nodes[v.0].op
    }

    fn push(&mut self, op: Op, value: Tensor, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            op,
            value,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn shape_err(&self, op: &'static str, detail: String) -> GraphError {
        GraphError::Shape {
            node: self.nodes.len(),
            op,
            detail,
        }
    }

    /// Leaf holding a constant (never differentiated).
    pub fn input(&mut self, value: Tensor) -> Var {
        self.push(Op::Input, value, false)
    }

    pub fn scalar(&mut self, value: f64) -> Var {
        self.input(Tensor::scalar(value))
    }

    /// Binds a parameter from `store`. Repeated calls with the same name
    /// return the same node, so gradients from every use accumulate.
    pub fn param(&mut self, store: &ParamStore, name: &str) -> Result<Var, GraphError> {
        if let Some(&v) = self.params.get(name) {
            return Ok(v);
        }
        let value = store
            .get(name)
            .ok_or_else(|| GraphError::UnknownParam(name.to_string()))?
            .clone();
        let trainable = !self.frozen.iter().any(|p| name.starts_with(p.as_str()));
        let v = self.push(Op::Param(name.to_string()), value, trainable);
        self.params.insert(name.to_string(), v);
        Ok(v)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, GraphError> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.1 != sb.0 {
            return Err(self.shape_err("matmul", format!("{}x{} · {}x{}", sa.0, sa.1, sb.0, sb.1)));
        }
        let value = self.value(a).matmul(self.value(b));
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(Op::MatMul(a, b), value, rg))
    }

    fn binary(
        &mut self,
        a: Var,
        b: Var,
        name: &'static str,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<Var, GraphError> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        let shape = match (broadcast_dim(sa.0, sb.0), broadcast_dim(sa.1, sb.1)) {
            (Some(r), Some(c)) => (r, c),
            _ => {
                return Err(self.shape_err(
                    name,
                    format!("cannot broadcast {}x{} with {}x{}", sa.0, sa.1, sb.0, sb.1),
                ))
            }
        };
        let value = broadcast_zip(self.value(a), self.value(b), shape, f);
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(op, value, rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, GraphError> {
        self.binary(a, b, "add", |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, GraphError> {
        self.binary(a, b, "sub", |x, y| x - y, Op::Sub(a, b))
    }

    /// Elementwise (Hadamard) product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, GraphError> {
        self.binary(a, b, "mul", |x, y| x * y, Op::Mul(a, b))
    }

    pub fn concat(&mut self, inputs: &[Var], axis: Axis) -> Result<Var, GraphError> {
        if inputs.is_empty() {
            return Err(self.shape_err("concat", "no inputs".into()));
        }
        let first = self.shape(inputs[0]);
        for &v in &inputs[1..] {
            let s = self.shape(v);
            let ok = match axis {
                Axis::Rows => s.1 == first.1,
                Axis::Cols => s.0 == first.0,
            };
            if !ok {
                return Err(self.shape_err(
                    "concat",
                    format!(
                        "{:?} concat of {}x{} with {}x{}",
                        axis, first.0, first.1, s.0, s.1
                    ),
                ));
            }
        }
        let parts: Vec<&Tensor> = inputs.iter().map(|&v| self.value(v)).collect();
        let value = concat(&parts, axis);
        let rg = inputs.iter().any(|&v| self.needs(v));
        Ok(self.push(
            Op::Concat {
                inputs: inputs.to_vec(),
                axis,
            },
            value,
            rg,
        ))
    }

    pub fn concat_cols(&mut self, inputs: &[Var]) -> Result<Var, GraphError> {
        self.concat(inputs, Axis::Cols)
    }

    pub fn concat_rows(&mut self, inputs: &[Var]) -> Result<Var, GraphError> {
        self.concat(inputs, Axis::Rows)
    }

    pub fn slice(
        &mut self,
        input: Var,
        axis: Axis,
        start: usize,
        len: usize,
    ) -> Result<Var, GraphError> {
        let s = self.shape(input);
        let extent = match axis {
            Axis::Rows => s.0,
            Axis::Cols => s.1,
        };
        if len == 0 || start + len > extent {
            return Err(self.shape_err(
                "slice",
                format!(
                    "{:?} range {}..{} out of 0..{}",
                    axis,
                    start,
                    start + len,
                    extent
                ),
            ));
        }
        let value = slice(self.value(input), axis, start, len);
        let rg = self.needs(input);
        Ok(self.push(
            Op::Slice {
                input,
                axis,
                start,
                len,
            },
            value,
            rg,
        ))
    }

    pub fn slice_cols(&mut self, input: Var, start: usize, len: usize) -> Result<Var, GraphError> {
        self.slice(input, Axis::Cols, start, len)
    }

    pub fn slice_rows(&mut self, input: Var, start: usize, len: usize) -> Result<Var, GraphError> {
        self.slice(input, Axis::Rows, start, len)
    }

    fn unary(&mut self, x: Var, op: Op, f: impl Fn(f64) -> f64) -> Var {
        let value = self.value(x).map(f);
        let rg = self.needs(x);
        self.push(op, value, rg)
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        self.unary(x, Op::Sigmoid(x), |v| 1.0 / (1.0 + (-v).exp()))
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        self.unary(x, Op::Tanh(x), f64::tanh)
    }

    pub fn softmax(&mut self, x: Var) -> Var {
        let value = softmax_rows(self.value(x));
        let rg = self.needs(x);
        self.push(Op::Softmax(x), value, rg)
    }

    /// Natural log with the argument clamped below at [`LOG_FLOOR`].
    pub fn log(&mut self, x: Var) -> Var {
        self.unary(x, Op::Log(x), |v| v.max(LOG_FLOOR).ln())
    }

    pub fn exp(&mut self, x: Var) -> Var {
        self.unary(x, Op::Exp(x), f64::exp)
    }

    pub fn square(&mut self, x: Var) -> Var {
        self.unary(x, Op::Square(x), |v| v * v)
    }

    pub fn abs(&mut self, x: Var) -> Var {
        self.unary(x, Op::Abs(x), f64::abs)
    }

    pub fn sqrt(&mut self, x: Var) -> Var {
        self.unary(x, Op::Sqrt(x), |v| v.max(0.0).sqrt())
    }

    pub fn max_scalar(&mut self, x: Var, floor: f64) -> Var {
        self.unary(x, Op::MaxScalar(x, floor), |v| v.max(floor))
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Var {
        self.unary(x, Op::Scale(x, factor), |v| v * factor)
    }

    pub fn add_scalar(&mut self, x: Var, c: f64) -> Var {
        self.unary(x, Op::AddScalar(x, c), |v| v + c)
    }

    pub fn neg(&mut self, x: Var) -> Var {
        self.scale(x, -1.0)
    }

    /// `1 - x`.
    pub fn one_minus(&mut self, x: Var) -> Var {
        let n = self.neg(x);
        self.add_scalar(n, 1.0)
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let value = Tensor::scalar(self.value(x).sum());
        let rg = self.needs(x);
        self.push(Op::Sum(x), value, rg)
    }

    pub fn mean(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let value = Tensor::scalar(t.sum() / t.len() as f64);
        let rg = self.needs(x);
        self.push(Op::Mean(x), value, rg)
    }

    pub fn row_sum(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let data = (0..t.rows()).map(|r| t.row_slice(r).iter().sum()).collect();
        let value = Tensor::from_vec(t.rows(), 1, data);
        let rg = self.needs(x);
        self.push(Op::RowSum(x), value, rg)
    }

    /// Sum of same-shaped nodes.
    pub fn add_all(&mut self, xs: &[Var]) -> Result<Var, GraphError> {
        let mut it = xs.iter();
        let mut acc = *it
            .next()
            .ok_or_else(|| self.shape_err("add", "empty sum".into()))?;
        for &x in it {
            acc = self.add(acc, x)?;
        }
        Ok(acc)
    }

    /// Reverse pass from a scalar node. Only trainable parameters that the
    /// output depends on appear in the result.
    pub fn backward(&self, output: Var) -> Result<Gradients, GraphError> {
        let (rows, cols) = self.shape(output);
        if (rows, cols) != (1, 1) {
            return Err(GraphError::NonScalarOutput { rows, cols });
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; output.0 + 1];
        grads[output.0] = Some(Tensor::scalar(1.0));
        let mut out = Gradients::default();

        for idx in (0..=output.0).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            let y = &node.value;
            let mut acc = |v: Var, delta: Tensor| {
                if !self.nodes[v.0].requires_grad {
                    return;
                }
                match &mut grads[v.0] {
                    Some(existing) => existing.add_assign(&delta),
                    slot => *slot = Some(delta),
                }
            };
            match &node.op {
                Op::Input => {}
                Op::Param(name) => {
                    out.insert(name.clone(), g);
                }
                Op::MatMul(a, b) => {
                    let (va, vb) = (self.value(*a), self.value(*b));
                    if self.needs(*a) {
                        acc(*a, g.matmul_nt(vb));
                    }
                    if self.needs(*b) {
                        acc(*b, va.matmul_tn(&g));
                    }
                }
                Op::Add(a, b) => {
                    acc(*a, reduce_to(&g, self.shape(*a)));
                    acc(*b, reduce_to(&g, self.shape(*b)));
                }
                Op::Sub(a, b) => {
                    acc(*a, reduce_to(&g, self.shape(*a)));
                    acc(*b, reduce_to(&g.map(|v| -v), self.shape(*b)));
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (self.value(*a), self.value(*b));
                    if self.needs(*a) {
                        acc(
                            *a,
                            reduce_to(&broadcast_zip(&g, vb, g.shape(), |x, y| x * y), va.shape()),
                        );
                    }
                    if self.needs(*b) {
                        acc(
                            *b,
                            reduce_to(&broadcast_zip(&g, va, g.shape(), |x, y| x * y), vb.shape()),
                        );
                    }
                }
                Op::Concat { inputs, axis } => {
                    let mut offset = 0;
                    for &v in inputs {
                        let s = self.shape(v);
                        let len = match axis {
                            Axis::Rows => s.0,
                            Axis::Cols => s.1,
                        };
                        if self.needs(v) {
                            acc(v, slice(&g, *axis, offset, len));
                        }
                        offset += len;
                    }
                }
                Op::Slice {
                    input,
                    axis,
                    start,
                    len,
                } => {
                    let (r, c) = self.shape(*input);
                    let mut full = Tensor::zeros(r, c);
                    match axis {
                        Axis::Rows => {
                            full.data_mut()[start * c..(start + len) * c].copy_from_slice(g.data());
                        }
                        Axis::Cols => {
                            for row in 0..r {
                                for k in 0..*len {
                                    full.set(row, start + k, g.get(row, k));
                                }
                            }
                        }
                    }
                    acc(*input, full);
                }
                Op::Sigmoid(x) => acc(*x, g.zip_map(y, |g, y| g * y * (1.0 - y))),
                Op::Tanh(x) => acc(*x, g.zip_map(y, |g, y| g * (1.0 - y * y))),
                Op::Softmax(x) => {
                    let cols = y.cols();
                    let mut dx = Tensor::zeros(y.rows(), cols);
                    for r in 0..y.rows() {
                        let (yr, gr) = (y.row_slice(r), g.row_slice(r));
                        let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                        for c in 0..cols {
                            dx.set(r, c, yr[c] * (gr[c] - dot));
                        }
                    }
                    acc(*x, dx);
                }
                Op::Log(x) => {
                    let d = g.zip_map(
                        self.value(*x),
                        |g, x| if x > LOG_FLOOR { g / x } else { 0.0 },
                    );
                    acc(*x, d)
                }
                Op::Exp(x) => acc(*x, g.zip_map(y, |g, y| g * y)),
                Op::Square(x) => acc(*x, g.zip_map(self.value(*x), |g, x| 2.0 * x * g)),
                Op::Abs(x) => acc(
                    *x,
                    g.zip_map(self.value(*x), |g, x| {
                        if x > 0.0 {
                            g
                        } else if x < 0.0 {
                            -g
                        } else {
                            0.0
                        }
                    }),
                ),
                Op::Sqrt(x) => acc(
                    *x,
                    g.zip_map(y, |g, y| if y > 0.0 { 0.5 * g / y } else { 0.0 }),
                ),
                Op::MaxScalar(x, floor) => {
                    let f = *floor;
                    acc(
                        *x,
                        g.zip_map(self.value(*x), |g, x| if x > f { g } else { 0.0 }),
                    )
                }
                Op::Scale(x, c) => {
                    let c = *c;
                    acc(*x, g.map(|v| v * c))
                }
                Op::AddScalar(x, _) => acc(*x, g),
                Op::Sum(x) => {
                    let (r, c) = self.shape(*x);
                    acc(*x, Tensor::filled(r, c, g.item()))
                }
                Op::Mean(x) => {
                    let (r, c) = self.shape(*x);
                    acc(*x, Tensor::filled(r, c, g.item() / (r * c) as f64))
                }
                Op::RowSum(x) => {
                    let (r, c) = self.shape(*x);
                    let mut d = Tensor::zeros(r, c);
                    for row in 0..r {
                        let gv = g.get(row, 0);
                        d.data_mut()[row * c..(row + 1) * c]
                            .iter_mut()
                            .for_each(|v| *v = gv);
                    }
                    acc(*x, d)
                }
            }
        }
        Ok(out)
    }
}

/// `∂output/∂θ` for every parameter in `store`; parameters the output does
/// not reach (or that were frozen) get a zero array.
pub fn gradients(graph: &Graph, output: Var, store: &ParamStore) -> Result<Gradients, GraphError> {
    let mut grads = graph.backward(output)?;
    for (name, value) in store.iter() {
        if grads.get(name).is_none() {
            grads.insert(name, Tensor::zeros(value.rows(), value.cols()));
        }
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn square_of_three() {
        let mut store = ParamStore::new(0);
        store.insert("x", Tensor::scalar(3.0));
        let mut g = Graph::new();
        let x = g.param(&store, "x").unwrap();
        let y = g.square(x);
        assert_eq!(g.value(y).item(), 9.0);
        let grads = g.backward(y).unwrap();
        assert_eq!(grads.get("x").unwrap().item(), 6.0);
    }

    #[test]
    fn product_gradient() {
        let mut store = ParamStore::new(0);
        store.insert("x", Tensor::scalar(2.0));
        store.insert("y", Tensor::scalar(5.0));
        let mut g = Graph::new();
        let x = g.param(&store, "x").unwrap();
        let y = g.param(&store, "y").unwrap();
        let p = g.mul(x, y).unwrap();
        let grads = g.backward(p).unwrap();
        assert_eq!(grads.get("x").unwrap().item(), 5.0);
        assert_eq!(grads.get("y").unwrap().item(), 2.0);
    }

    #[test]
    fn softmax_and_sigmoid_identities() {
        let mut g = Graph::new();
        let z = g.input(Tensor::row(&[0.0, 0.0, 0.0]));
        let s = g.softmax(z);
        for &v in g.value(s).data() {
            assert!(close(v, 1.0 / 3.0, 1e-15));
        }
        let zero = g.scalar(0.0);
        let sg = g.sigmoid(zero);
        assert_eq!(g.value(sg).item(), 0.5);
    }

    #[test]
    fn shape_mismatch_names_node() {
        let mut g = Graph::new();
        let a = g.input(Tensor::zeros(2, 3));
        let b = g.input(Tensor::zeros(2, 3));
        match g.matmul(a, b) {
            Err(GraphError::Shape { node, op, .. }) => {
                assert_eq!(node, 2);
                assert_eq!(op, "matmul");
            }
            other => panic!("expected shape error, got {other:?}"),
        }
        let c = g.input(Tensor::zeros(3, 2));
        assert!(matches!(
            g.add(a, c),
            Err(GraphError::Shape { op: "add", .. })
        ));
    }

    #[test]
    fn non_scalar_output_rejected() {
        let mut g = Graph::new();
        let a = g.input(Tensor::zeros(2, 1));
        assert!(matches!(
            g.backward(a),
            Err(GraphError::NonScalarOutput { rows: 2, cols: 1 })
        ));
    }

    #[test]
    fn unreachable_and_frozen_params_get_zero() {
        let mut store = ParamStore::new(0);
        store.insert("a", Tensor::scalar(2.0));
        store.insert("b", Tensor::row(&[1.0, 2.0]));
        store.insert("frozen.c", Tensor::scalar(4.0));
        let mut g = Graph::new();
        g.freeze_prefix("frozen.");
        let a = g.param(&store, "a").unwrap();
        let c = g.param(&store, "frozen.c").unwrap();
        let y = g.mul(a, c).unwrap();
        let grads = gradients(&g, y, &store).unwrap();
        assert_eq!(grads.get("a").unwrap().item(), 4.0);
        assert_eq!(grads.get("b").unwrap().data(), &[0.0, 0.0]);
        assert_eq!(grads.get("frozen.c").unwrap().item(), 0.0);
    }

    #[test]
    fn broadcast_bias_gradient_sums_rows() {
        let mut store = ParamStore::new(0);
        store.insert("b", Tensor::row(&[1.0, -1.0]));
        let mut g = Graph::new();
        let x = g.input(Tensor::from_vec(3, 2, vec![1., 2., 3., 4., 5., 6.]));
        let b = g.param(&store, "b").unwrap();
        let y = g.add(x, b).unwrap();
        let s = g.sum(y);
        let grads = g.backward(s).unwrap();
        assert_eq!(grads.get("b").unwrap().data(), &[3.0, 3.0]);
    }

    #[test]
    fn log_is_clamped() {
        let mut g = Graph::new();
        let z = g.scalar(0.0);
        let l = g.log(z);
        assert!(close(g.value(l).item(), LOG_FLOOR.ln(), 1e-12));
    }
}
