//! Data-model properties: normalization, synthetic data, import, windows,
//! splits, bone lengths.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reactmotion::motion::synthetic::synthetic_pose_a;
use reactmotion::motion::{
    bone_lengths, import_sbu_dir, make_synthetic_dataset, normalize_interaction, parse_sbu_clip,
    read_dataset, split_loso, subjects, t_pose, to_sbu_text, window_all, write_dataset,
    InteractionClip, Joint, Pose, ReferenceSkeleton, SbuImportOptions, SyntheticSpec, NUM_JOINTS,
    POSE_DIM,
};

fn dist(p: &Pose, q: &Pose, i: usize, j: usize) -> f64 {
    let (a, b) = (p.joint(i), q.joint(j));
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Rotates a T-pose about the vertical axis, jitters it, and moves it.
fn posed(rng: &mut ChaCha8Rng, yaw: f64, offset: [f64; 3]) -> Pose {
    let (s, c) = yaw.sin_cos();
    let mut p = t_pose();
    for j in 0..NUM_JOINTS {
        let [x, y, z] = p.joint(j);
        let (x, y, z) = (
            x + rng.random_range(-0.05..0.05),
            y + rng.random_range(-0.05..0.05),
            z,
        );
        p.set_joint(
            j,
            [
                c * x + s * z + offset[0],
                y + offset[1],
                -s * x + c * z + offset[2],
            ],
        );
    }
    p
}

fn random_clip(seed: u64, len: usize) -> InteractionClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let yaw = rng.random_range(-3.1..3.1);
    let off = [
        rng.random_range(-3.0..3.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-3.0..3.0),
    ];
    let a: Vec<Pose> = (0..len).map(|_| posed(&mut rng, yaw, off)).collect();
    let b: Vec<Pose> = (0..len)
        .map(|_| posed(&mut rng, yaw + 3.0, [off[0] + 1.0, off[1], off[2] + 1.0]))
        .collect();
    InteractionClip::new(a, b, 1, (1, 2), "test").unwrap()
}

proptest! {
    #[test]
    fn normalization_is_rigid_and_idempotent(seed in any::<u64>(), len in 2usize..6) {
        let clip = random_clip(seed, len);
        let (norm, tf) = normalize_interaction(&clip).unwrap();
        prop_assert!((tf.determinant() - 1.0).abs() < 1e-9);
        for t in 0..len {
            // every pair within and across the two characters
            let (a0, b0, a1, b1) = (&clip.motion_a[t], &clip.motion_b[t], &norm.motion_a[t], &norm.motion_b[t]);
            for i in 0..NUM_JOINTS {
                for j in 0..NUM_JOINTS {
                    prop_assert!((dist(a0, a0, i, j) - dist(a1, a1, i, j)).abs() < 1e-9);
                    prop_assert!((dist(b0, b0, i, j) - dist(b1, b1, i, j)).abs() < 1e-9);
                    prop_assert!((dist(a0, b0, i, j) - dist(a1, b1, i, j)).abs() < 1e-9);
                }
            }
        }
        let first = &norm.motion_a[0];
        let (l, r) = (first.joint(Joint::LeftHip.index()), first.joint(Joint::RightHip.index()));
        for k in 0..3 {
            prop_assert!((l[k] + r[k]).abs() < 1e-9);
        }
        let (twice, _) = normalize_interaction(&norm).unwrap();
        for (x, y) in twice.motion_a.iter().chain(&twice.motion_b).zip(norm.motion_a.iter().chain(&norm.motion_b)) {
            prop_assert!(x.0.iter().zip(&y.0).all(|(u, v)| (u - v).abs() < 1e-9));
        }
    }

    #[test]
    fn bone_lengths_match_direct_distances(v in proptest::collection::vec(-2.0f64..2.0, POSE_DIM)) {
        let pose = Pose::from_slice(&v).unwrap();
        let skel = ReferenceSkeleton::default();
        let lens = bone_lengths(&pose, &skel);
        for (k, &(a, b)) in skel.bones().iter().enumerate() {
            prop_assert!((lens[k] - dist(&pose, &pose, a, b)).abs() < 1e-12);
        }
    }
}

#[test]
fn synthetic_b_follows_generating_formula() {
    let spec = SyntheticSpec {
        clips_per_class: 2,
        length: 24,
        ..Default::default()
    };
    let clips = make_synthetic_dataset(&spec, 3).unwrap();
    assert_eq!(clips, make_synthetic_dataset(&spec, 3).unwrap());
    let template = t_pose();
    for clip in &clips {
        assert_eq!(clip.motion_b[0], template);
        for t in 0..spec.length {
            let phase = |lag: f64| {
                (std::f64::consts::PI * (t as f64 - lag) / spec.length as f64)
                    .sin()
                    .max(0.0)
            };
            let mut want = template;
            if clip.label == 1 {
                for j in 0..NUM_JOINTS {
                    want.0[3 * j + 2] -= 0.4 * phase(3.0);
                }
            } else {
                for j in [Joint::RightElbow, Joint::RightHand] {
                    want.0[3 * j.index() + 1] += 0.5 * phase(3.0);
                }
            }
            assert_eq!(clip.motion_b[t], want, "label {} frame {t}", clip.label);
            assert_eq!(
                clip.motion_a[t],
                synthetic_pose_a(clip.label, t, spec.length)
            );
        }
    }
    let mut a_hand = template;
    a_hand.0[3 * Joint::RightHand.index() + 2] += 0.5 * (std::f64::consts::PI * 5.0 / 24.0).sin();
    assert_eq!(clips[0].motion_a[5], a_hand);
}

#[test]
fn sbu_round_trip_through_directory() {
    let dir = tempfile::tempdir().unwrap();
    let clips: Vec<InteractionClip> = (0..3)
        .map(|i| {
            let mut c = random_clip(i, 4);
            c.label = 2;
            c.subjects = (1, 3);
            c
        })
        .collect();
    for (i, c) in clips.iter().enumerate() {
        let take = dir
            .path()
            .join("04")
            .join("s01s03")
            .join(format!("{:03}", i + 1));
        std::fs::create_dir_all(&take).unwrap();
        std::fs::write(take.join("skeleton_pos.txt"), to_sbu_text(c)).unwrap();
    }
    // excluded categories are skipped
    std::fs::create_dir_all(dir.path().join("02").join("s01s03").join("001")).unwrap();
    std::fs::write(
        dir.path().join("02/s01s03/001/skeleton_pos.txt"),
        to_sbu_text(&clips[0]),
    )
    .unwrap();
    let back = import_sbu_dir(dir.path(), &SbuImportOptions::default()).unwrap();
    assert_eq!(back.len(), 3);
    for (b, c) in back.iter().zip(&clips) {
        assert_eq!((b.label, b.subjects), (2, (1, 3)));
        assert_eq!(b.motion_a, c.motion_a);
        assert_eq!(b.motion_b, c.motion_b);
    }

    let text = to_sbu_text(&clips[0]);
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[2] = lines[2].rsplit_once(',').unwrap().0.to_string();
    match parse_sbu_clip(&lines.join("\n"), 1, (1, 2), &SbuImportOptions::default()) {
        Err(reactmotion::Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn canonical_dataset_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let clips = make_synthetic_dataset(
        &SyntheticSpec {
            clips_per_class: 2,
            noise: 0.01,
            ..Default::default()
        },
        1,
    )
    .unwrap();
    write_dataset(dir.path(), "clip", &clips, Some("abc")).unwrap();
    assert_eq!(read_dataset(dir.path()).unwrap(), clips);
}

#[test]
fn windows_and_folds() {
    let long = random_clip(9, 100);
    assert_eq!(window_all(&[long.clone()], 40, 5).unwrap().len(), 13);
    assert_eq!(window_all(&[long], 100, 5).unwrap().len(), 1);

    let clips = make_synthetic_dataset(
        &SyntheticSpec {
            noise: 0.01,
            ..Default::default()
        },
        0,
    )
    .unwrap();
    let ids = subjects(&clips);
    assert_eq!(ids, (1..=8).collect::<Vec<u32>>());
    for &s in &ids {
        let fold = split_loso(&clips, s).unwrap();
        assert_eq!(fold.test.len(), 8);
        assert_eq!(fold.train.len() + fold.test.len(), clips.len());
        for c in &clips {
            assert_eq!(fold.test.contains(c), c.involves(s));
            assert_ne!(fold.test.contains(c), fold.train.contains(c));
        }
    }
    assert!(split_loso(&clips, 42).is_err());
}
