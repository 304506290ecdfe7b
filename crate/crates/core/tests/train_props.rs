//! Optimizer, baselines, recognizer and short training runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reactmotion::diff::{gradients, Gradients, ParamStore, RmsProp, RmsPropConfig};
use reactmotion::generator::{stack_frames, TeacherForcing};
use reactmotion::losses::{
    bone_node, continuity_node, contractive_node, generator_objective_node, AuxNodes,
    ObjectiveOptions,
};
use reactmotion::motion::{make_synthetic_dataset, InteractionClip, Pose, SyntheticSpec, POSE_DIM};
use reactmotion::train::{
    afd, nn_baseline, recognition_accuracy, train_gan, train_recognizer, Classifier,
    MeanPoseBaseline, RecognizerConfig, TrainConfig,
};
use reactmotion::{
    ContinuityParams, Discriminator, DiscriminatorConfig, Error, Generator, GeneratorConfig, Graph,
    LossWeights, ReferenceSkeleton, Tensor,
};

#[test]
fn rmsprop_single_step_by_hand() {
    let mut params = ParamStore::new(0);
    params.insert("w", Tensor::filled(1, 1, 1.0));
    let mut grads = Gradients::default();
    grads.insert("w", Tensor::filled(1, 1, 1.0));
    let mut opt = RmsProp::new(RmsPropConfig::default());
    opt.step(&mut params, &grads).unwrap();
    // v = 0.1, step = 0.01 / (sqrt(0.1) + 1e-8)
    let want = 1.0 - 0.01 / (0.1f64.sqrt() + 1e-8);
    let got = params.get("w").unwrap().item();
    assert!((got - want).abs() < 1e-15);
    assert!((got - 0.968_377).abs() < 1e-6);
}

fn random_pose(rng: &mut ChaCha8Rng, values: &[f64]) -> Pose {
    let v: Vec<f64> = (0..POSE_DIM)
        .map(|_| values[rng.random_range(0..values.len())])
        .collect();
    Pose::from_slice(&v).unwrap()
}

#[test]
fn nn_baseline_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    // few distinct values so exact ties happen
    let values = [-1.0, 0.0, 0.5, 1.0];
    for _ in 0..50 {
        let clips: Vec<InteractionClip> = (0..rng.random_range(1..4))
            .map(|_| {
                let len = rng.random_range(2..5);
                let a = (0..len).map(|_| random_pose(&mut rng, &values)).collect();
                let b = (0..len).map(|_| random_pose(&mut rng, &values)).collect();
                InteractionClip::new(a, b, 1, (1, 2), "t").unwrap()
            })
            .collect();
        let query: Vec<Pose> = (0..3).map(|_| random_pose(&mut rng, &values)).collect();
        let got = nn_baseline(&clips, &query).unwrap();
        let pairs: Vec<(&Pose, &Pose)> = clips
            .iter()
            .flat_map(|c| c.motion_a.iter().zip(&c.motion_b))
            .collect();
        for (q, g) in query.iter().zip(&got) {
            let dists: Vec<f64> = pairs
                .iter()
                .map(|(a, _)| a.0.iter().zip(&q.0).map(|(x, y)| (x - y) * (x - y)).sum())
                .collect();
            let best = dists.iter().cloned().fold(f64::INFINITY, f64::min);
            let first = dists.iter().position(|&d| d == best).unwrap();
            assert_eq!(g, pairs[first].1);
        }
    }
}

#[test]
fn afd_scaling() {
    let truth = vec![Pose::zeros(); 5];
    let shifted: Vec<Pose> = truth.iter().map(|p| Pose(p.0.map(|v| v + 0.1))).collect();
    let d = afd(&shifted, &truth, false).unwrap();
    assert!((d - 45.0 * 0.01).abs() < 1e-12);
    assert!((afd(&shifted, &truth, true).unwrap() - 0.03).abs() < 1e-12);
    let doubled: Vec<Pose> = truth.iter().map(|p| Pose(p.0.map(|v| v + 0.2))).collect();
    assert!((afd(&doubled, &truth, false).unwrap() - 4.0 * d).abs() < 1e-12);
    assert!(afd(&shifted[..2], &truth, false).is_err());
}

#[test]
fn mean_pose_baseline_averages_class_frames() {
    let clips = make_synthetic_dataset(
        &SyntheticSpec {
            clips_per_class: 2,
            ..Default::default()
        },
        0,
    )
    .unwrap();
    let model = MeanPoseBaseline::fit(&clips).unwrap();
    for label in [1, 2] {
        let frames: Vec<&Pose> = clips
            .iter()
            .filter(|c| c.label == label)
            .flat_map(|c| &c.motion_b)
            .collect();
        let pred = model.predict(label, 3).unwrap();
        for k in 0..POSE_DIM {
            let want = frames.iter().map(|p| p.0[k]).sum::<f64>() / frames.len() as f64;
            assert!((pred[0].0[k] - want).abs() < 1e-12);
        }
    }
    assert!(model.predict(3, 4).is_err());
}

#[test]
fn recognizer_fits_separable_classes() {
    let clips = make_synthetic_dataset(
        &SyntheticSpec {
            clips_per_class: 8,
            length: 12,
            noise: 0.01,
            classes: 2,
        },
        4,
    )
    .unwrap();
    let config = RecognizerConfig {
        hidden: 8,
        epochs: 30,
        batch_size: 4,
        ..Default::default()
    };
    let rec = train_recognizer(&clips, &config).unwrap();
    let samples: Vec<_> = clips
        .iter()
        .map(|c| (&c.motion_a, &c.motion_b, c.label))
        .collect();
    let report = recognition_accuracy(&rec, &samples).unwrap();
    assert!(report.overall() >= 0.95, "{report:?}");
    let p = rec
        .predict_proba(&clips[0].motion_a, &clips[0].motion_b)
        .unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn generator_objective_decreases_with_frozen_discriminator() {
    let clips = make_synthetic_dataset(
        &SyntheticSpec {
            clips_per_class: 2,
            length: 12,
            noise: 0.01,
            classes: 2,
        },
        2,
    )
    .unwrap();
    let gen = Generator::new(GeneratorConfig::with_part_width(3), 1).unwrap();
    let mut params = gen.params.clone();
    let disc = Discriminator::new(
        DiscriminatorConfig {
            h_disc: 4,
            num_classes: 2,
        },
        2,
    )
    .unwrap();
    let a = stack_frames(&clips.iter().map(|c| &c.motion_a).collect::<Vec<_>>()).unwrap();
    let b = stack_frames(&clips.iter().map(|c| &c.motion_b).collect::<Vec<_>>()).unwrap();
    let labels: Vec<usize> = clips.iter().map(|c| c.label).collect();
    let skeleton = ReferenceSkeleton::default();
    let continuity = ContinuityParams::default();
    let objective = |params: &ParamStore| {
        let mut g = Graph::new();
        let nodes = gen
            .build(&mut g, params, &a, None::<TeacherForcing<'_, ChaCha8Rng>>)
            .unwrap();
        let truth: Vec<_> = b.iter().map(|t| g.input(t.clone())).collect();
        let feat = disc
            .build_features(&mut g, &disc.params, &nodes.poses)
            .unwrap();
        let db = disc.build_binary(&mut g, &disc.params, feat).unwrap();
        let probs = disc.build_multiclass(&mut g, &disc.params, feat).unwrap();
        let aux = AuxNodes {
            skl: bone_node(&mut g, &nodes.poses, &skeleton).unwrap(),
            con: continuity_node(&mut g, &nodes.poses, &continuity).unwrap(),
            l1: contractive_node(&mut g, &nodes.poses, &truth).unwrap(),
        };
        let obj = generator_objective_node(
            &mut g,
            probs,
            &labels,
            db,
            aux,
            &LossWeights::default(),
            &ObjectiveOptions::default(),
        )
        .unwrap();
        let value = g.value(obj).item();
        (value, gradients(&g, obj, params).unwrap())
    };
    let mut values = Vec::new();
    for _ in 0..=10 {
        let (v, grads) = objective(&params);
        values.push(v);
        // only the generator store is updated; D stays fixed
        assert!(grads.iter().any(|(n, _)| n.starts_with("disc.")));
        let names: Vec<String> = params.names().map(String::from).collect();
        for name in &names {
            let gr = grads.get(name).unwrap();
            let p = params.get_mut(name).unwrap();
            for (x, d) in p.data_mut().iter_mut().zip(gr.data()) {
                *x -= 1e-4 * d;
            }
        }
    }
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn training_is_deterministic_and_reports_divergence() {
    let clips = make_synthetic_dataset(
        &SyntheticSpec {
            clips_per_class: 2,
            length: 12,
            noise: 0.01,
            classes: 2,
        },
        6,
    )
    .unwrap();
    let config = TrainConfig {
        num_classes: 2,
        h_disc: 4,
        epochs: 2,
        batch_size: 2,
        seed: 9,
        ..TrainConfig::sbu().with_part_width(2)
    };
    let x = train_gan(&clips, &config).unwrap();
    let y = train_gan(&clips, &config).unwrap();
    assert_eq!(x.generator, y.generator);
    assert_eq!(x.discriminator, y.discriminator);
    assert_eq!(x.log.to_jsonl(), y.log.to_jsonl());
    assert_eq!(x.log.records.len(), 2);

    let bad = TrainConfig {
        learning_rate: f64::INFINITY,
        ..config
    };
    assert!(matches!(
        train_gan(&clips, &bad),
        Err(Error::Diverged {
            epoch: 1,
            batch: 1,
            ..
        })
    ));
}
