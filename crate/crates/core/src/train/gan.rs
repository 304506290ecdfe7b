//! Alternating adversarial training.
//!
//! Per batch: `d_steps_per_g` discriminator steps, then one generator step.
//! The discriminator step treats synthesized motions as constants; the
//! generator step binds the discriminator's parameters as frozen. Both use
//! RMSprop with their own accumulators. All randomness (initialization,
//! shuffling, teacher forcing) comes from streams derived from the seed.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diff::{
    grad_check, gradients, GradCheckConfig, GradCheckReport, Graph, ParamStore, RmsProp, Var,
};
use crate::discriminator::{Discriminator, DiscriminatorConfig};
use crate::error::{Error, Result};
use crate::generator::{stack_frames, Generator, GeneratorConfig, TeacherForcing};
use crate::losses::{
    bone_node, continuity_node, contractive_node, discriminator_objective_node,
    generator_objective_node, loss_sup_node, loss_unsup_node, AuxNodes, ContinuityParams,
    LossWeights, ObjectiveOptions,
};
use crate::motion::clip::InteractionClip;
use crate::motion::pose::POSE_DIM;
use crate::motion::skeleton::ReferenceSkeleton;
use crate::tensor::Tensor;
use crate::train::config::TrainConfig;
use crate::train::log::{EpochRecord, TrainLog};

pub struct TrainOutput {
    pub generator: Generator,
    pub discriminator: Discriminator,
    pub log: TrainLog,
    /// Wall-clock seconds per epoch, kept apart from the deterministic log.
    pub epoch_seconds: Vec<f64>,
}

struct Batch {
    a: Vec<Tensor>,
    b: Vec<Tensor>,
    labels: Vec<usize>,
}

impl Batch {
    fn new(clips: &[&InteractionClip]) -> Result<Self> {
        let a: Vec<_> = clips.iter().map(|c| &c.motion_a).collect();
        let b: Vec<_> = clips.iter().map(|c| &c.motion_b).collect();
        Ok(Batch {
            a: stack_frames(&a)?,
            b: stack_frames(&b)?,
            labels: clips.iter().map(|c| c.label).collect(),
        })
    }

    fn size(&self) -> usize {
        self.labels.len()
    }
}

fn stack_rows(top: &Tensor, bottom: &Tensor) -> Tensor {
    let mut data = top.data().to_vec();
    data.extend_from_slice(bottom.data());
    Tensor::from_vec(top.rows() + bottom.rows(), top.cols(), data)
}

#[derive(Default)]
struct Stats {
    sup: f64,
    unsup: f64,
    d_obj: f64,
    acc_real: f64,
    acc_fake: f64,
    d_steps: usize,
    skl: f64,
    con: f64,
    l1: f64,
    g_obj: f64,
    g_steps: usize,
}

/// Everything the two step functions share.
struct Trainer<'a> {
    config: &'a TrainConfig,
    skeleton: ReferenceSkeleton,
    weights: LossWeights,
    opts: ObjectiveOptions,
    epoch: usize,
    batch: usize,
}

impl Trainer<'_> {
    fn diverged(&self, msg: impl Into<String>) -> Error {
        Error::Diverged {
            epoch: self.epoch,
            batch: self.batch,
            msg: msg.into(),
        }
    }

    fn apply(
        &self,
        g: &Graph,
        obj: Var,
        params: &mut ParamStore,
        opt: &mut RmsProp,
        who: &str,
    ) -> Result<f64> {
        let value = g.value(obj).item();
        if !value.is_finite() {
            return Err(self.diverged(format!("{who} objective is {value}")));
        }
        let mut grads = gradients(g, obj, params)?;
        if let Some(name) = grads.first_non_finite() {
            return Err(self.diverged(format!("non-finite gradient for `{name}`")));
        }
        if self.config.grad_clip > 0.0 {
            grads.clip_global_norm(self.config.grad_clip);
        }
        opt.step(params, &grads)
            .map_err(|e| self.diverged(e.to_string()))?;
        Ok(value)
    }

    fn d_step(
        &self,
        gen: &Generator,
        disc: &mut Discriminator,
        batch: &Batch,
        opt: &mut RmsProp,
        stats: &mut Stats,
    ) -> Result<()> {
        let n = batch.size();
        let fake: Vec<Tensor> = {
            let mut g = Graph::new();
            let nodes = gen.build(
                &mut g,
                &gen.params,
                &batch.a,
                None::<TeacherForcing<'_, ChaCha8Rng>>,
            )?;
            nodes.poses.iter().map(|&p| g.value(p).clone()).collect()
        };
        let mut g = Graph::new();
        let frames: Vec<Var> = batch
            .b
            .iter()
            .zip(&fake)
            .map(|(r, f)| g.input(stack_rows(r, f)))
            .collect();
        let feat = disc.build_features(&mut g, &disc.params, &frames)?;
        let db = disc.build_binary(&mut g, &disc.params, feat)?;
        let probs = disc.build_multiclass(&mut g, &disc.params, feat)?;
        let real_db = g.slice_rows(db, 0, n)?;
        let fake_db = g.slice_rows(db, n, n)?;
        let real_p = g.slice_rows(probs, 0, n)?;
        let fake_p = g.slice_rows(probs, n, n)?;
        let labels = &batch.labels;
        let obj = discriminator_objective_node(
            &mut g, real_p, labels, fake_p, labels, real_db, fake_db, &self.opts,
        )?;
        let sup = loss_sup_node(&mut g, real_p, labels, fake_p, labels)?;
        let unsup = loss_unsup_node(&mut g, real_db, fake_db)?;
        stats.sup += g.value(sup).item();
        stats.unsup += g.value(unsup).item();
        let dbv = g.value(db);
        stats.acc_real += (0..n).filter(|&r| dbv.get(r, 0) > 0.5).count() as f64 / n as f64;
        stats.acc_fake += (n..2 * n).filter(|&r| dbv.get(r, 0) < 0.5).count() as f64 / n as f64;
        stats.d_obj += self.apply(&g, obj, &mut disc.params, opt, "discriminator")?;
        stats.d_steps += 1;
        Ok(())
    }

    fn g_step(
        &self,
        gen: &mut Generator,
        disc: &Discriminator,
        batch: &Batch,
        opt: &mut RmsProp,
        tf_rng: &mut ChaCha8Rng,
        stats: &mut Stats,
    ) -> Result<()> {
        let mut g = Graph::new();
        g.freeze_prefix("disc.");
        let teacher = (self.config.teacher_forcing > 0.0).then(|| TeacherForcing {
            targets: &batch.b,
            ratio: self.config.teacher_forcing,
            rng: tf_rng,
        });
        let nodes = gen.build(&mut g, &gen.params, &batch.a, teacher)?;
        let feat = disc.build_features(&mut g, &disc.params, &nodes.poses)?;
        let db = disc.build_binary(&mut g, &disc.params, feat)?;
        let probs = disc.build_multiclass(&mut g, &disc.params, feat)?;
        let truth: Vec<Var> = batch.b.iter().map(|t| g.input(t.clone())).collect();
        let aux = AuxNodes {
            skl: bone_node(&mut g, &nodes.poses, &self.skeleton)?,
            con: continuity_node(&mut g, &nodes.poses, &self.config.continuity)?,
            l1: contractive_node(&mut g, &nodes.poses, &truth)?,
        };
        let obj = generator_objective_node(
            &mut g,
            probs,
            &batch.labels,
            db,
            aux,
            &self.weights,
            &self.opts,
        )?;
        stats.skl += g.value(aux.skl).item();
        stats.con += g.value(aux.con).item();
        stats.l1 += g.value(aux.l1).item();
        stats.g_obj += self.apply(&g, obj, &mut gen.params, opt, "generator")?;
        stats.g_steps += 1;
        Ok(())
    }
}

/// Checks that clips are usable together: non-empty, equal length, labels
/// in `1..=N`, long enough for the continuity term.
pub fn validate_training_set(train: &[InteractionClip], config: &TrainConfig) -> Result<()> {
    let first = train.first().ok_or(Error::EmptyBatch("training set"))?;
    for c in train {
        c.validate_label(config.num_classes)?;
        if c.len() != first.len() {
            return Err(Error::LengthMismatch {
                left: first.len(),
                right: c.len(),
            });
        }
    }
    config.continuity.validate(first.len())
}

pub fn train_gan(train: &[InteractionClip], config: &TrainConfig) -> Result<TrainOutput> {
    train_gan_with(train, config, |_| {})
}

/// [`train_gan`] with a callback after every epoch.
pub fn train_gan_with(
    train: &[InteractionClip],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutput> {
    config.validate()?;
    validate_training_set(train, config)?;
    let hash = config.hash();
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let mut gen = Generator::new(config.generator_config(), master.next_u64())?;
    let mut disc = Discriminator::new(config.discriminator_config(), master.next_u64())?;
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(master.next_u64());
    let mut tf_rng = ChaCha8Rng::seed_from_u64(master.next_u64());
    let mut opt_g = RmsProp::new(config.optimizer());
    let mut opt_d = RmsProp::new(config.optimizer());
    let mut trainer = Trainer {
        config,
        skeleton: config.skeleton()?,
        weights: config.effective_weights(),
        opts: config.objective_options(),
        epoch: 0,
        batch: 0,
    };

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut log = TrainLog::default();
    let mut epoch_seconds = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let started = Instant::now();
        trainer.epoch = epoch;
        order.shuffle(&mut shuffle_rng);
        let mut stats = Stats::default();
        for (bi, chunk) in order.chunks(config.batch_size).enumerate() {
            trainer.batch = bi + 1;
            let clips: Vec<&InteractionClip> = chunk.iter().map(|&i| &train[i]).collect();
            let batch = Batch::new(&clips)?;
            for _ in 0..config.d_steps_per_g {
                trainer.d_step(&gen, &mut disc, &batch, &mut opt_d, &mut stats)?;
            }
            trainer.g_step(&mut gen, &disc, &batch, &mut opt_g, &mut tf_rng, &mut stats)?;
        }
        let (nd, ng) = (stats.d_steps as f64, stats.g_steps as f64);
        let record = EpochRecord {
            epoch,
            loss_sup: stats.sup / nd,
            loss_unsup: stats.unsup / nd,
            loss_skl: stats.skl / ng,
            loss_con: stats.con / ng,
            loss_l1: stats.l1 / ng,
            d_objective: stats.d_obj / nd,
            g_objective: stats.g_obj / ng,
            d_acc_real: stats.acc_real / nd,
            d_acc_fake: stats.acc_fake / nd,
            seed: config.seed,
            config_hash: hash.clone(),
        };
        on_epoch(&record);
        log.records.push(record);
        epoch_seconds.push(started.elapsed().as_secs_f64());
    }
    Ok(TrainOutput {
        generator: gen,
        discriminator: disc,
        log,
        epoch_seconds,
    })
}

/// Relative-error floor for [`pipeline_grad_check`]. Some attention weights
/// get gradients around 1e-9 at initialization, where central differences
/// carry roundoff of a few 1e-9; below the floor the comparison is absolute.
pub const PIPELINE_GRAD_FLOOR: f64 = 1e-3;

/// Gradient check of the complete objective (generator objective plus
/// discriminator objective, all five loss terms, both heads) on a tiny
/// model: part width 3, 4 frames, 2 classes, random data.
pub fn pipeline_grad_check(seed: u64, samples: Option<usize>) -> Result<GradCheckReport> {
    pipeline_grad_check_with(
        seed,
        samples,
        &GradCheckConfig {
            floor: PIPELINE_GRAD_FLOOR,
            ..Default::default()
        },
    )
}

/// [`pipeline_grad_check`] with explicit step, tolerance and floor; `seed`
/// and `samples` override the ones in `check`.
pub fn pipeline_grad_check_with(
    seed: u64,
    samples: Option<usize>,
    check: &GradCheckConfig,
) -> Result<GradCheckReport> {
    const FRAMES: usize = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gen = Generator::new(GeneratorConfig::with_part_width(3), rng.next_u64())?;
    let disc = Discriminator::new(
        DiscriminatorConfig {
            h_disc: 3,
            num_classes: 2,
        },
        rng.next_u64(),
    )?;
    let labels = vec![1, 2];
    let mut random_frames = |scale: f64| -> Vec<Tensor> {
        (0..FRAMES)
            .map(|_| {
                let data = (0..labels.len() * POSE_DIM)
                    .map(|_| scale * (2.0 * (rng.next_u64() as f64 / u64::MAX as f64) - 1.0))
                    .collect();
                Tensor::from_vec(labels.len(), POSE_DIM, data)
            })
            .collect()
    };
    let a = random_frames(1.0);
    let b = random_frames(1.0);
    let continuity = ContinuityParams {
        dt: 1,
        k: 2,
        ..Default::default()
    };
    let skeleton = ReferenceSkeleton::default();
    let weights = LossWeights {
        alpha: 0.5,
        beta: 0.5,
        gamma: 0.5,
    };
    let opts = ObjectiveOptions::default();
    let params = gen.params.merged(&disc.params);
    let build = |g: &mut Graph, p: &ParamStore| -> Result<Var> {
        let nodes = gen.build(g, p, &a, None::<TeacherForcing<'_, ChaCha8Rng>>)?;
        let truth: Vec<Var> = b.iter().map(|t| g.input(t.clone())).collect();
        let fake_feat = disc.build_features(g, p, &nodes.poses)?;
        let real_feat = disc.build_features(g, p, &truth)?;
        let fake_db = disc.build_binary(g, p, fake_feat)?;
        let real_db = disc.build_binary(g, p, real_feat)?;
        let fake_p = disc.build_multiclass(g, p, fake_feat)?;
        let real_p = disc.build_multiclass(g, p, real_feat)?;
        let aux = AuxNodes {
            skl: bone_node(g, &nodes.poses, &skeleton)?,
            con: continuity_node(g, &nodes.poses, &continuity)?,
            l1: contractive_node(g, &nodes.poses, &truth)?,
        };
        let g_obj = generator_objective_node(g, fake_p, &labels, fake_db, aux, &weights, &opts)?;
        let d_obj = discriminator_objective_node(
            g, real_p, &labels, fake_p, &labels, real_db, fake_db, &opts,
        )?;
        Ok(g.add(g_obj, d_obj)?)
    };
    grad_check(
        build,
        &params,
        &GradCheckConfig {
            samples,
            seed,
            ..*check
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::synthetic::{make_synthetic_dataset, SyntheticSpec};

    fn tiny_config() -> TrainConfig {
        TrainConfig {
            num_classes: 2,
            h_disc: 4,
            epochs: 2,
            batch_size: 3,
            seed: 5,
            continuity: ContinuityParams {
                dt: 2,
                ..Default::default()
            },
            ..TrainConfig::sbu().with_part_width(2)
        }
    }

    fn data() -> Vec<InteractionClip> {
        make_synthetic_dataset(
            &SyntheticSpec {
                clips_per_class: 2,
                length: 10,
                noise: 0.01,
                ..Default::default()
            },
            1,
        )
        .unwrap()
    }

    #[test]
    fn one_record_per_epoch_and_deterministic() {
        let a = train_gan(&data(), &tiny_config()).unwrap();
        let b = train_gan(&data(), &tiny_config()).unwrap();
        assert_eq!(a.log.records.len(), 2);
        assert_eq!(a.log, b.log);
        assert_eq!(a.generator.params, b.generator.params);
        assert_eq!(a.discriminator.params, b.discriminator.params);
        assert_eq!(a.epoch_seconds.len(), 2);
    }

    #[test]
    fn rejects_bad_sets() {
        assert!(train_gan(&[], &tiny_config()).is_err());
        let mut d = data();
        d[0].label = 3;
        assert!(train_gan(&d, &tiny_config()).is_err());
    }

    #[test]
    fn divergence_reported_with_position() {
        let mut c = tiny_config();
        c.learning_rate = f64::INFINITY;
        match train_gan(&data(), &c) {
            Err(Error::Diverged { epoch, batch, .. }) => assert_eq!((epoch, batch), (1, 1)),
            other => panic!("{:?}", other.err()),
        }
    }
}
