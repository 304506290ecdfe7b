//! Recurrent and affine building blocks on top of [`Graph`].
//!
//! Everything is batched along rows: a `B x in` input gives `B x out`
//! outputs. Parameters live in a [`ParamStore`] under `{prefix}.w` and
//! `{prefix}.b`.

use crate::diff::{Graph, Initializer, ParamStore, Var};
use crate::error::Result;

/// `y = x·W + b` with `W: in x out`, `b: 1 x out`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Linear {
    pub prefix: String,
    pub input: usize,
    pub output: usize,
}

impl Linear {
    pub fn new(prefix: impl Into<String>, input: usize, output: usize) -> Self {
        Linear {
            prefix: prefix.into(),
            input,
            output,
        }
    }

    pub fn init(&self, init: &mut Initializer) {
        init.uniform(
            format!("{}.w", self.prefix),
            self.input,
            self.output,
            self.input,
        );
        init.uniform(format!("{}.b", self.prefix), 1, self.output, self.input);
    }

    pub fn forward(&self, g: &mut Graph, store: &ParamStore, x: Var) -> Result<Var> {
        let w = g.param(store, &format!("{}.w", self.prefix))?;
        let b = g.param(store, &format!("{}.b", self.prefix))?;
        let xw = g.matmul(x, w)?;
        Ok(g.add(xw, b)?)
    }
}

/// Gate activations and new state of one LSTM step.
#[derive(Clone, Copy, Debug)]
pub struct LstmStep {
    pub i: Var,
    pub f: Var,
    pub o: Var,
    pub u: Var,
    pub c: Var,
    pub h: Var,
}

/// Single-layer LSTM. One weight matrix `W: (in + H) x 4H` acts on `[x, h]`;
/// the column blocks are the input, forget and output gates and the
/// candidate `u`, in that order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lstm {
    pub prefix: String,
    pub input: usize,
    pub hidden: usize,
}

impl Lstm {
    pub fn new(prefix: impl Into<String>, input: usize, hidden: usize) -> Self {
        Lstm {
            prefix: prefix.into(),
            input,
            hidden,
        }
    }

    pub fn init(&self, init: &mut Initializer) {
        let fan_in = self.input + self.hidden;
        init.uniform(
            format!("{}.w", self.prefix),
            fan_in,
            4 * self.hidden,
            fan_in,
        );
        init.uniform(format!("{}.b", self.prefix), 1, 4 * self.hidden, fan_in);
    }

    /// Zero `h` and `c` for a batch of `batch` rows.
    pub fn zero_state(&self, g: &mut Graph, batch: usize) -> (Var, Var) {
        let h = g.input(crate::Tensor::zeros(batch, self.hidden));
        let c = g.input(crate::Tensor::zeros(batch, self.hidden));
        (h, c)
    }

    /// `i, f, o = σ(·)`, `u = tanh(·)`, `c' = f⊙c + i⊙u`, `h' = o⊙tanh(c')`.
    pub fn step(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        x: Var,
        h: Var,
        c: Var,
    ) -> Result<LstmStep> {
        let w = g.param(store, &format!("{}.w", self.prefix))?;
        let b = g.param(store, &format!("{}.b", self.prefix))?;
        let xh = g.concat_cols(&[x, h])?;
        let pre = g.matmul(xh, w)?;
        let pre = g.add(pre, b)?;
        self.gates(g, pre, c)
    }

    /// Gate nonlinearities applied to precomputed pre-activations.
    pub(crate) fn gates(&self, g: &mut Graph, pre: Var, c: Var) -> Result<LstmStep> {
        let hd = self.hidden;
        let i = g.slice_cols(pre, 0, hd)?;
        let i = g.sigmoid(i);
        let f = g.slice_cols(pre, hd, hd)?;
        let f = g.sigmoid(f);
        let o = g.slice_cols(pre, 2 * hd, hd)?;
        let o = g.sigmoid(o);
        let u = g.slice_cols(pre, 3 * hd, hd)?;
        let u = g.tanh(u);
        let fc = g.mul(f, c)?;
        let iu = g.mul(i, u)?;
        let c = g.add(fc, iu)?;
        let tc = g.tanh(c);
        let h = g.mul(o, tc)?;
        Ok(LstmStep { i, f, o, u, c, h })
    }

    /// Runs over `xs` (one `B x in` node per frame) from a zero state and
    /// returns the hidden state after every frame.
    pub fn run(&self, g: &mut Graph, store: &ParamStore, xs: &[Var]) -> Result<Vec<Var>> {
        let batch = xs.first().map(|&x| g.shape(x).0).unwrap_or(1);
        let (mut h, mut c) = self.zero_state(g, batch);
        let mut out = Vec::with_capacity(xs.len());
        for &x in xs {
            let s = self.step(g, store, x, h, c)?;
            h = s.h;
            c = s.c;
            out.push(h);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::{grad_check, GradCheckConfig};
    use crate::Tensor;

    #[test]
    fn zero_weights_fixed_point() {
        let lstm = Lstm::new("l", 2, 3);
        let mut init = Initializer::new(0);
        lstm.init(&mut init);
        let mut store = init.finish();
        store.zero_all();
        let mut g = Graph::new();
        let x = g.input(Tensor::filled(1, 2, 5.0));
        let (h, c) = lstm.zero_state(&mut g, 1);
        let s = lstm.step(&mut g, &store, x, h, c).unwrap();
        assert_eq!(g.value(s.i).data(), &[0.5; 3]);
        assert_eq!(g.value(s.u).data(), &[0.0; 3]);
        assert_eq!(g.value(s.h).data(), &[0.0; 3]);
    }

    #[test]
    fn hand_computed_step() {
        // in=1, H=1, W = [[1,1,1,1],[0,0,0,0]], b = 0, x = 1:
        // i=f=o=σ(1), u=tanh(1), c=σ(1)tanh(1), h=σ(1)tanh(c).
        let lstm = Lstm::new("l", 1, 1);
        let mut store = ParamStore::new(0);
        store.insert(
            "l.w",
            Tensor::from_vec(2, 4, vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
        );
        store.insert("l.b", Tensor::zeros(1, 4));
        let mut g = Graph::new();
        let x = g.input(Tensor::scalar(1.0));
        let (h, c) = lstm.zero_state(&mut g, 1);
        let s = lstm.step(&mut g, &store, x, h, c).unwrap();
        let sig = 1.0 / (1.0 + (-1.0f64).exp());
        let c_want = sig * 1.0f64.tanh();
        assert!((g.value(s.c).item() - c_want).abs() < 1e-15);
        assert!((g.value(s.h).item() - sig * c_want.tanh()).abs() < 1e-15);
    }

    #[test]
    fn lstm_gradients_match_finite_differences() {
        let lstm = Lstm::new("l", 3, 4);
        let head = Linear::new("head", 4, 2);
        let mut init = Initializer::new(11);
        lstm.init(&mut init);
        head.init(&mut init);
        let store = init.finish();
        let xs: Vec<Tensor> = (0..3)
            .map(|t| {
                Tensor::from_vec(
                    2,
                    3,
                    (0..6).map(|k| ((t * 6 + k) as f64 * 0.37).sin()).collect(),
                )
            })
            .collect();
        let report = grad_check(
            |g, p| {
                let inputs: Vec<Var> = xs.iter().map(|x| g.input(x.clone())).collect();
                let hs = lstm.run(g, p, &inputs)?;
                let y = head.forward(g, p, *hs.last().unwrap())?;
                let y = g.square(y);
                Ok(g.sum(y))
            },
            &store,
            &GradCheckConfig::default(),
        )
        .unwrap();
        assert!(report.max_rel_error < 1e-6, "{report:?}");
    }
}
