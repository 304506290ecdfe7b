//! Dual discriminator over B's motion only.
//!
//! A bidirectional LSTM reads the motion; the feature is the forward
//! direction's last hidden state next to the backward direction's state
//! after it has read frame 1. A binary head gives the probability that the
//! motion is real and an (N+1)-class head gives class probabilities whose
//! last entry means "synthesized".
//!
//! Parameters: `disc.fwd.*`, `disc.bwd.*` (LSTMs, input 45), `disc.bin.*`
//! (`2H → 1`), `disc.cls.*` (`2H → N+1`).

use serde::{Deserialize, Serialize};

use crate::diff::{Checkpoint, Graph, Initializer, ParamStore, Var};
use crate::error::{Error, Result};
use crate::generator::{check_params, stack_frames};
use crate::motion::pose::{Motion, POSE_DIM};
use crate::nn::{Linear, Lstm};
use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscriminatorConfig {
    pub h_disc: usize,
    /// Number of real classes `N`.
    pub num_classes: usize,
}

impl Default for DiscriminatorConfig {
    fn default() -> Self {
        DiscriminatorConfig {
            h_disc: 128,
            num_classes: 6,
        }
    }
}

/// Probabilities over classes `1..=N+1`; class `N+1` is "synthesized".
#[derive(Clone, Debug, PartialEq)]
pub struct ClassDistribution {
    pub probs: Vec<f64>,
}

impl ClassDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 || probs.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::Invalid(
                "class probabilities must be finite, non-negative, N+1 >= 2".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!(
                "class probabilities sum to {total}"
            )));
        }
        Ok(ClassDistribution { probs })
    }

    pub fn uniform(num_classes: usize) -> Self {
        ClassDistribution {
            probs: vec![1.0 / (num_classes + 1) as f64; num_classes + 1],
        }
    }

    /// `N`.
    pub fn num_real(&self) -> usize {
        self.probs.len() - 1
    }

    /// Probability of 1-based class `label`.
    pub fn prob(&self, label: usize) -> f64 {
        self.probs[label - 1]
    }

    pub fn fake(&self) -> f64 {
        *self.probs.last().unwrap()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Discriminator {
    pub config: DiscriminatorConfig,
    pub params: ParamStore,
}

impl Discriminator {
    pub fn new(config: DiscriminatorConfig, seed: u64) -> Result<Self> {
        if config.h_disc == 0 || config.num_classes == 0 {
            return Err(Error::Invalid(
                "discriminator needs h_disc > 0 and at least one class".into(),
            ));
        }
        let mut init = Initializer::new(seed);
        for l in Self::lstms(&config) {
            l.init(&mut init);
        }
        let (bin, cls) = Self::heads(&config);
        bin.init(&mut init);
        cls.init(&mut init);
        Ok(Discriminator {
            params: init.finish(),
            config,
        })
    }

    fn lstms(c: &DiscriminatorConfig) -> [Lstm; 2] {
        [
            Lstm::new("disc.fwd", POSE_DIM, c.h_disc),
            Lstm::new("disc.bwd", POSE_DIM, c.h_disc),
        ]
    }

    fn heads(c: &DiscriminatorConfig) -> (Linear, Linear) {
        (
            Linear::new("disc.bin", 2 * c.h_disc, 1),
            Linear::new("disc.cls", 2 * c.h_disc, c.num_classes + 1),
        )
    }

    /// `B x 2H` feature from frame nodes (`B x 45` each).
    pub fn build_features(&self, g: &mut Graph, store: &ParamStore, frames: &[Var]) -> Result<Var> {
        if frames.len() < 2 {
            return Err(Error::Invalid(format!(
                "need at least 2 frames, got {}",
                frames.len()
            )));
        }
        let [fwd, bwd] = Self::lstms(&self.config);
        let hf = *fwd.run(g, store, frames)?.last().unwrap();
        let reversed: Vec<Var> = frames.iter().rev().copied().collect();
        let hb = *bwd.run(g, store, &reversed)?.last().unwrap();
        Ok(g.concat_cols(&[hf, hb])?)
    }

    /// `B x 1` probabilities `D_b(x)` that each motion is real.
    pub fn build_binary(&self, g: &mut Graph, store: &ParamStore, feature: Var) -> Result<Var> {
        let logit = Self::heads(&self.config).0.forward(g, store, feature)?;
        Ok(g.sigmoid(logit))
    }

    /// `B x (N+1)` class probabilities.
    pub fn build_multiclass(&self, g: &mut Graph, store: &ParamStore, feature: Var) -> Result<Var> {
        let logits = Self::heads(&self.config).1.forward(g, store, feature)?;
        Ok(g.softmax(logits))
    }

    pub fn extract_features(&self, motion_b: &Motion) -> Result<Vec<f64>> {
        let frames = stack_frames(&[motion_b])?;
        let mut g = Graph::new();
        let xs: Vec<Var> = frames.into_iter().map(|f| g.input(f)).collect();
        let feat = self.build_features(&mut g, &self.params, &xs)?;
        Ok(g.value(feat).data().to_vec())
    }

    fn feature_node(&self, g: &mut Graph, feature: &[f64]) -> Result<Var> {
        if feature.len() != 2 * self.config.h_disc {
            return Err(Error::LengthMismatch {
                left: 2 * self.config.h_disc,
                right: feature.len(),
            });
        }
        Ok(g.input(Tensor::row(feature)))
    }

    pub fn disc_binary(&self, feature: &[f64]) -> Result<f64> {
        let mut g = Graph::new();
        let f = self.feature_node(&mut g, feature)?;
        let p = self.build_binary(&mut g, &self.params, f)?;
        Ok(g.value(p).item())
    }

    pub fn disc_multiclass(&self, feature: &[f64]) -> Result<ClassDistribution> {
        let mut g = Graph::new();
        let f = self.feature_node(&mut g, feature)?;
        let p = self.build_multiclass(&mut g, &self.params, f)?;
        Ok(ClassDistribution {
            probs: g.value(p).data().to_vec(),
        })
    }

    /// `D_b` and the class distribution for each motion of a batch.
    pub fn classify_batch(&self, motions_b: &[&Motion]) -> Result<Vec<(f64, ClassDistribution)>> {
        let frames = stack_frames(motions_b)?;
        let mut g = Graph::new();
        let xs: Vec<Var> = frames.into_iter().map(|f| g.input(f)).collect();
        let feat = self.build_features(&mut g, &self.params, &xs)?;
        let db = self.build_binary(&mut g, &self.params, feat)?;
        let dm = self.build_multiclass(&mut g, &self.params, feat)?;
        Ok((0..motions_b.len())
            .map(|b| {
                (
                    g.value(db).get(b, 0),
                    ClassDistribution {
                        probs: g.value(dm).row_slice(b).to_vec(),
                    },
                )
            })
            .collect())
    }

    pub fn to_checkpoint(&self, config_hash: &str) -> Result<Checkpoint> {
        Ok(Checkpoint::new(
            self.params.clone(),
            config_hash,
            serde_json::to_string(&self.config)?,
        ))
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let config: DiscriminatorConfig = serde_json::from_str(&ck.metadata)?;
        let fresh = Discriminator::new(config, 0)?;
        check_params(&fresh.params, &ck.params)?;
        Ok(Discriminator {
            config: fresh.config,
            params: ck.params.clone(),
        })
    }
}
