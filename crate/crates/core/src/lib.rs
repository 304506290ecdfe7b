//! Reactive motion synthesis for two-person interactions.
//!
//! Given the skeletal motion of an active character A, a part-based
//! attentive sequence-to-sequence generator synthesizes the reacting
//! character B. Training is adversarial against a discriminator with a
//! shared bidirectional LSTM trunk and two heads: a binary real/fake head and
//! an (N+1)-class head whose last class means "synthesized".
//!
//! Module map:
//!
//! - [`diff`]: reverse-mode differentiation, parameters, RMSprop, gradient checks, checkpoints
//! - [`motion`]: poses, clips, SBU import, normalization, windowing, partitions, synthetic data
//! - [`generator`], [`discriminator`]: the two networks
//! - [`losses`]: adversarial and auxiliary objectives
//! - [`train`]: training loop, AFD, baselines, recognition classifier, ablations

pub mod diff;
pub mod discriminator;
pub mod error;
pub mod generator;
pub mod losses;
pub mod motion;
pub mod nn;
pub mod tensor;
pub mod train;

pub use diff::{Checkpoint, Graph, ParamStore, Var};
pub use discriminator::{ClassDistribution, Discriminator, DiscriminatorConfig};
pub use error::{Error, GraphError, Result};
pub use generator::{AttentionMap, Generator, GeneratorConfig};
pub use losses::{ContinuityParams, LossWeights};
pub use motion::{InteractionClip, Motion, PartitionSpec, Pose, ReferenceSkeleton};
pub use tensor::Tensor;
pub use train::{TrainConfig, TrainLog};
