//! Interaction classifier used to score synthesized reactions: a two-layer
//! LSTM over per-frame inputs with a linear softmax layer on the last hidden
//! state. Parameters: `rec.l0.*`, `rec.l1.*`, `rec.out.*`.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diff::{gradients, Graph, Initializer, ParamStore, RmsProp, RmsPropConfig, Var};
use crate::error::{Error, Result};
use crate::generator::stack_frames;
use crate::motion::clip::InteractionClip;
use crate::motion::pose::{Motion, POSE_DIM};
use crate::nn::{Linear, Lstm};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecognizerInput {
    /// A and B side by side, 90 values per frame.
    #[default]
    Stacked,
    /// B only, 45 values per frame.
    BOnly,
}

impl RecognizerInput {
    pub fn width(self) -> usize {
        match self {
            RecognizerInput::Stacked => 2 * POSE_DIM,
            RecognizerInput::BOnly => POSE_DIM,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecognizerConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub input: RecognizerInput,
    pub grad_clip: f64,
}

impl Default for RecognizerConfig {
    fn default() -> Self {
        RecognizerConfig {
            hidden: 512,
            epochs: 300,
            batch_size: 16,
            learning_rate: 0.01,
            seed: 0,
            input: RecognizerInput::Stacked,
            grad_clip: 5.0,
        }
    }
}

/// Anything that maps an interaction to class probabilities over `1..=N`.
pub trait Classifier: Sync {
    fn predict_proba(&self, a: &Motion, b: &Motion) -> Result<Vec<f64>>;

    /// Most probable 1-based class; ties go to the lower class.
    fn predict(&self, a: &Motion, b: &Motion) -> Result<usize> {
        let p = self.predict_proba(a, b)?;
        let mut best = 0;
        for (i, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = i;
            }
        }
        Ok(best + 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recognizer {
    pub config: RecognizerConfig,
    pub num_classes: usize,
    pub params: ParamStore,
}

impl Recognizer {
    fn layers(&self) -> (Lstm, Lstm, Linear) {
        layers(&self.config, self.num_classes)
    }

    fn inputs(&self, g: &mut Graph, a: &[&Motion], b: &[&Motion]) -> Result<Vec<Var>> {
        let fb = stack_frames(b)?;
        Ok(match self.config.input {
            RecognizerInput::BOnly => fb.into_iter().map(|t| g.input(t)).collect(),
            RecognizerInput::Stacked => {
                let fa = stack_frames(a)?;
                if fa.len() != fb.len() {
                    return Err(Error::LengthMismatch {
                        left: fa.len(),
                        right: fb.len(),
                    });
                }
                fa.into_iter()
                    .zip(fb)
                    .map(|(x, y)| {
                        let rows = x.rows();
                        let mut data = Vec::with_capacity(rows * 2 * POSE_DIM);
                        for r in 0..rows {
                            data.extend_from_slice(x.row_slice(r));
                            data.extend_from_slice(y.row_slice(r));
                        }
                        g.input(Tensor::from_vec(rows, 2 * POSE_DIM, data))
                    })
                    .collect()
            }
        })
    }

    /// `B x N` class probabilities.
    fn build(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        a: &[&Motion],
        b: &[&Motion],
    ) -> Result<Var> {
        let (l0, l1, out) = self.layers();
        let xs = self.inputs(g, a, b)?;
        let h0 = l0.run(g, store, &xs)?;
        let h1 = l1.run(g, store, &h0)?;
        let logits = out.forward(g, store, *h1.last().unwrap())?;
        Ok(g.softmax(logits))
    }
}

impl Classifier for Recognizer {
    fn predict_proba(&self, a: &Motion, b: &Motion) -> Result<Vec<f64>> {
        let mut g = Graph::new();
        let p = self.build(&mut g, &self.params, &[a], &[b])?;
        Ok(g.value(p).data().to_vec())
    }
}

fn layers(c: &RecognizerConfig, n: usize) -> (Lstm, Lstm, Linear) {
    (
        Lstm::new("rec.l0", c.input.width(), c.hidden),
        Lstm::new("rec.l1", c.hidden, c.hidden),
        Linear::new("rec.out", c.hidden, n),
    )
}

/// Trains on real interactions with cross-entropy and RMSprop. The class
/// count is the largest label present; at least two distinct labels are
/// required.
pub fn train_recognizer(
    clips: &[InteractionClip],
    config: &RecognizerConfig,
) -> Result<Recognizer> {
    let labels: BTreeSet<usize> = clips.iter().map(|c| c.label).collect();
    if labels.len() < 2 {
        return Err(Error::Invalid(format!(
            "recognizer needs at least 2 classes, got {}",
            labels.len()
        )));
    }
    if config.hidden == 0 || config.batch_size == 0 {
        return Err(Error::Invalid(
            "recognizer hidden size and batch size must be positive".into(),
        ));
    }
    let num_classes = *labels.last().unwrap();
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let mut init = Initializer::new(master.next_u64());
    let (l0, l1, out) = layers(config, num_classes);
    l0.init(&mut init);
    l1.init(&mut init);
    out.init(&mut init);
    let mut rec = Recognizer {
        config: config.clone(),
        num_classes,
        params: init.finish(),
    };
    let mut opt = RmsProp::new(RmsPropConfig {
        learning_rate: config.learning_rate,
        ..Default::default()
    });
    let mut order: Vec<usize> = (0..clips.len()).collect();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut master);
        for (bi, chunk) in order.chunks(config.batch_size).enumerate() {
            let a: Vec<&Motion> = chunk.iter().map(|&i| &clips[i].motion_a).collect();
            let b: Vec<&Motion> = chunk.iter().map(|&i| &clips[i].motion_b).collect();
            let mut onehot = Tensor::zeros(chunk.len(), num_classes);
            for (r, &i) in chunk.iter().enumerate() {
                onehot.set(r, clips[i].label - 1, 1.0);
            }
            let mut g = Graph::new();
            let probs = rec.build(&mut g, &rec.params, &a, &b)?;
            let onehot = g.input(onehot);
            let lp = g.log(probs);
            let picked = g.mul(lp, onehot)?;
            let picked = g.row_sum(picked);
            let mean = g.mean(picked);
            let loss = g.neg(mean);
            let diverged = |msg: String| Error::Diverged {
                epoch,
                batch: bi + 1,
                msg,
            };
            if !g.value(loss).item().is_finite() {
                return Err(diverged("recognizer loss is not finite".into()));
            }
            let mut grads = gradients(&g, loss, &rec.params)?;
            if config.grad_clip > 0.0 {
                grads.clip_global_norm(config.grad_clip);
            }
            opt.step(&mut rec.params, &grads)
                .map_err(|e| diverged(e.to_string()))?;
        }
    }
    Ok(rec)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyReport {
    /// Correct and total count per 1-based class.
    pub per_class: BTreeMap<usize, (usize, usize)>,
    pub correct: usize,
    pub total: usize,
}

impl AccuracyReport {
    pub fn overall(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }

    pub fn class_accuracy(&self, label: usize) -> Option<f64> {
        self.per_class
            .get(&label)
            .map(|&(c, n)| c as f64 / n as f64)
    }
}

/// Fraction of samples `(A, B, label)` whose predicted class is the label,
/// per class and overall. Prediction runs on the rayon pool.
pub fn recognition_accuracy(
    classifier: &dyn Classifier,
    samples: &[(&Motion, &Motion, usize)],
) -> Result<AccuracyReport> {
    if samples.is_empty() {
        return Err(Error::EmptyBatch("test interactions"));
    }
    let predicted: Vec<usize> = samples
        .par_iter()
        .map(|(a, b, _)| classifier.predict(a, b))
        .collect::<Result<_>>()?;
    let mut per_class: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut correct = 0;
    for (&(_, _, label), p) in samples.iter().zip(predicted) {
        let e = per_class.entry(label).or_insert((0, 0));
        e.1 += 1;
        if p == label {
            e.0 += 1;
            correct += 1;
        }
    }
    Ok(AccuracyReport {
        per_class,
        correct,
        total: samples.len(),
    })
}
