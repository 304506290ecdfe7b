use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diff::RmsPropConfig;
use crate::discriminator::DiscriminatorConfig;
use crate::error::{Error, Result};
use crate::generator::GeneratorConfig;
use crate::losses::{ContinuityParams, LossSubset, LossWeights, ObjectiveOptions};
use crate::motion::partition::NUM_PARTS;
use crate::motion::skeleton::ReferenceSkeleton;

/// Everything that determines a training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dataset: String,
    /// Real classes `N`.
    pub num_classes: usize,
    pub h_part: usize,
    pub h_dec: usize,
    pub h_disc: usize,
    pub attn_dim: usize,
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub weights: LossWeights,
    pub continuity: ContinuityParams,
    pub disable_attention: bool,
    pub disable_part_encoding: bool,
    pub loss_subset: LossSubset,
    pub disable_multiclass: bool,
    /// Binary target for real motions in the discriminator objective.
    pub smoothing: f64,
    /// Discriminator steps before each generator step.
    pub d_steps_per_g: usize,
    pub non_saturating: bool,
    /// Global gradient-norm clip; 0 turns it off.
    pub grad_clip: f64,
    /// Probability of feeding the true previous B frame to the decoder.
    pub teacher_forcing: f64,
    pub tanh_pose_head: bool,
    /// Reference bone lengths for the bone loss; `None` uses the T-pose
    /// template.
    pub skl_ref: Option<Vec<f64>>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::sbu()
    }
}

impl TrainConfig {
    pub fn sbu() -> Self {
        TrainConfig {
            dataset: "sbu".into(),
            num_classes: 6,
            h_part: 40,
            h_dec: 200,
            h_disc: 128,
            attn_dim: 200,
            learning_rate: 0.01,
            rho: 0.9,
            epsilon: 1e-8,
            batch_size: 16,
            epochs: 1000,
            seed: 0,
            weights: LossWeights::default(),
            continuity: ContinuityParams::default(),
            disable_attention: false,
            disable_part_encoding: false,
            loss_subset: LossSubset::Full,
            disable_multiclass: false,
            smoothing: 0.9,
            d_steps_per_g: 1,
            non_saturating: false,
            grad_clip: 5.0,
            teacher_forcing: 0.0,
            tanh_pose_head: false,
            skl_ref: None,
        }
    }

    pub fn hhoi() -> Self {
        TrainConfig {
            dataset: "hhoi".into(),
            num_classes: 2,
            h_part: 60,
            h_dec: 300,
            attn_dim: 300,
            ..Self::sbu()
        }
    }

    /// Preset by dataset tag (`sbu`, `hhoi`, `synthetic`).
    pub fn preset(tag: &str) -> Result<Self> {
        match tag {
            "sbu" => Ok(Self::sbu()),
            "hhoi" => Ok(Self::hhoi()),
            "synthetic" => Ok(TrainConfig {
                dataset: "synthetic".into(),
                num_classes: 2,
                ..Self::sbu()
            }),
            other => Err(Error::Invalid(format!("unknown dataset preset `{other}`"))),
        }
    }

    /// Sets `h_part`, `h_dec = 5·h_part` and `d_a = h_dec` together.
    pub fn with_part_width(mut self, h_part: usize) -> Self {
        self.h_part = h_part;
        self.h_dec = NUM_PARTS * h_part;
        self.attn_dim = self.h_dec;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.generator_config().validate()?;
        if self.num_classes == 0
            || self.h_disc == 0
            || self.batch_size == 0
            || self.d_steps_per_g == 0
        {
            return Err(Error::Invalid(
                "num_classes, h_disc, batch_size and d_steps_per_g must be positive".into(),
            ));
        }
        if !(self.smoothing > 0.0 && self.smoothing <= 1.0) {
            return Err(Error::Invalid(format!(
                "smoothing {} outside (0, 1]",
                self.smoothing
            )));
        }
        if !(0.0..=1.0).contains(&self.teacher_forcing) {
            return Err(Error::Invalid("teacher_forcing must be in [0, 1]".into()));
        }
        let w = &self.weights;
        if [w.alpha, w.beta, w.gamma].iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Invalid("loss weights must be non-negative".into()));
        }
        if !(self.learning_rate >= 0.0 && self.rho > 0.0 && self.rho < 1.0 && self.epsilon > 0.0) {
            return Err(Error::Invalid("bad optimizer constants".into()));
        }
        self.skeleton()?;
        Ok(())
    }

    pub fn generator_config(&self) -> GeneratorConfig {
        GeneratorConfig {
            h_part: self.h_part,
            h_dec: self.h_dec,
            attn_dim: self.attn_dim,
            use_attention: !self.disable_attention,
            part_encoding: !self.disable_part_encoding,
            tanh_pose_head: self.tanh_pose_head,
            ..GeneratorConfig::default()
        }
    }

    pub fn discriminator_config(&self) -> DiscriminatorConfig {
        DiscriminatorConfig {
            h_disc: self.h_disc,
            num_classes: self.num_classes,
        }
    }

    pub fn optimizer(&self) -> RmsPropConfig {
        RmsPropConfig {
            learning_rate: self.learning_rate,
            rho: self.rho,
            epsilon: self.epsilon,
        }
    }

    /// Loss weights after the loss-subset ablation.
    pub fn effective_weights(&self) -> LossWeights {
        self.loss_subset.apply(self.weights)
    }

    pub fn objective_options(&self) -> ObjectiveOptions {
        ObjectiveOptions {
            non_saturating: self.non_saturating,
            disable_multiclass: self.disable_multiclass,
            smoothing: self.smoothing,
        }
    }

    pub fn skeleton(&self) -> Result<ReferenceSkeleton> {
        match &self.skl_ref {
            Some(r) => ReferenceSkeleton::with_reference(r.clone()),
            None => Ok(ReferenceSkeleton::default()),
        }
    }

    pub fn hash(&self) -> String {
        config_hash(self)
    }
}

/// Hex SHA-256 of the JSON serialization of `value`.
pub fn config_hash<T: Serialize + ?Sized>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config serializes");
    Sha256::digest(&json)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let s = TrainConfig::sbu();
        assert_eq!((s.h_part, s.h_dec, s.epochs), (40, 200, 1000));
        let h = TrainConfig::hhoi();
        assert_eq!((h.h_part, h.h_dec), (60, 300));
        assert!(s.validate().is_ok() && h.validate().is_ok());
        assert!(TrainConfig::preset("nope").is_err());
    }

    #[test]
    fn width_invariant_enforced() {
        let mut c = TrainConfig::sbu();
        c.h_dec = 100;
        assert!(c.validate().is_err());
        c.disable_part_encoding = true;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn hash_tracks_content() {
        let a = TrainConfig::sbu();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
